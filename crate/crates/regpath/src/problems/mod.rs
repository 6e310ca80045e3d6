//! Concrete problem instances: LASSO least squares and MLP classification.

mod lasso;
mod mlp;

pub use lasso::{random_lasso_instance, LassoProblem};
pub use mlp::MlpProblem;
