//! Front points, archives, and dominance.

use crate::error::{Error, Result};
use crate::param::ParamVector;

/// Which phase of a run produced a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Initial,
    TowardLoss,
    TowardSparsity,
    WeightedSum,
}

impl Direction {
    pub fn label(&self) -> &'static str {
        match self {
            Direction::Initial => "initial",
            Direction::TowardLoss => "loss-direction",
            Direction::TowardSparsity => "sparsity-direction",
            Direction::WeightedSum => "ws",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "initial" => Ok(Direction::Initial),
            "loss-direction" => Ok(Direction::TowardLoss),
            "sparsity-direction" => Ok(Direction::TowardSparsity),
            "ws" => Ok(Direction::WeightedSum),
            other => Err(Error::InvalidArgument(format!(
                "unknown direction label '{other}'"
            ))),
        }
    }
}

/// An evaluated point on (or near) the front. Objective values are always
/// full-batch doubles; test metrics are present only for supervised problems.
#[derive(Debug, Clone)]
pub struct ParetoPoint {
    pub theta: ParamVector,
    pub f1_train: f64,
    /// Scaled l1 value `weight * ||theta||_1`.
    pub g2: f64,
    /// Unscaled `||theta||_1`, reported alongside for plotting.
    pub l1_unscaled: f64,
    pub f1_test: Option<f64>,
    pub acc_train: Option<f64>,
    pub acc_test: Option<f64>,
    /// Position along the path.
    pub index: usize,
    /// Cumulative gradient evaluations when this point was accepted.
    pub grad_evals_cum: u64,
}

impl ParetoPoint {
    /// Bare point carrying only objective values, for metric computations.
    pub fn from_objectives(index: usize, f1_train: f64, g2: f64) -> Self {
        ParetoPoint {
            theta: ParamVector::zeros(0),
            f1_train,
            g2,
            l1_unscaled: 0.0,
            f1_test: None,
            acc_train: None,
            acc_test: None,
            index,
            grad_evals_cum: 0,
        }
    }
}

/// `p` dominates `q` iff `p` is <= in both objectives and < in at least one.
pub fn dominates(p: &ParetoPoint, q: &ParetoPoint) -> bool {
    p.f1_train <= q.f1_train
        && p.g2 <= q.g2
        && (p.f1_train < q.f1_train || p.g2 < q.g2)
}

/// Ordered collection of evaluated points produced by one run. Indices are
/// assigned contiguously at insertion.
#[derive(Debug, Clone, Default)]
pub struct FrontArchive {
    points: Vec<ParetoPoint>,
    labels: Vec<Direction>,
}

impl FrontArchive {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a point, overwriting its index with the insertion position.
    pub fn push(&mut self, mut point: ParetoPoint, label: Direction) {
        point.index = self.points.len();
        self.points.push(point);
        self.labels.push(label);
    }

    /// Appends a point keeping its existing index (used when re-assembling
    /// archives from exports or filters).
    pub fn push_preserving_index(&mut self, point: ParetoPoint, label: Direction) {
        self.points.push(point);
        self.labels.push(label);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ParetoPoint] {
        &self.points
    }

    pub fn labels(&self) -> &[Direction] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ParetoPoint, &Direction)> {
        self.points.iter().zip(self.labels.iter())
    }

    /// Points carrying a given label, in archive order.
    pub fn leg(&self, label: Direction) -> Vec<&ParetoPoint> {
        self.iter()
            .filter(|(_, l)| **l == label)
            .map(|(p, _)| p)
            .collect()
    }
}

/// Returns the mutually non-dominated subset (by `f1_train`, `g2`),
/// preserving order and original indices. The input is untouched.
pub fn front_filter_nondominated(archive: &FrontArchive) -> FrontArchive {
    let mut out = FrontArchive::new();
    for (i, (p, label)) in archive.iter().enumerate() {
        let dominated = archive
            .points()
            .iter()
            .enumerate()
            .any(|(j, q)| j != i && dominates(q, p));
        if !dominated {
            out.push_preserving_index(p.clone(), *label);
        }
    }
    out
}

/// Slope `dF1/dF2` between consecutive points after sorting by `g2`.
/// Pairs with zero `g2` difference yield `f64::INFINITY` as the marker.
pub fn front_slope(archive: &FrontArchive) -> Result<Vec<f64>> {
    if archive.len() < 2 {
        return Err(Error::InvalidArgument(
            "front_slope needs at least 2 points".into(),
        ));
    }
    let mut pts: Vec<(f64, f64)> = archive
        .points()
        .iter()
        .map(|p| (p.g2, p.f1_train))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pts
        .windows(2)
        .map(|w| {
            let dg2 = w[1].0 - w[0].0;
            let df1 = w[1].1 - w[0].1;
            if dg2 == 0.0 {
                f64::INFINITY
            } else {
                df1 / dg2
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(f1: f64, g2: f64) -> ParetoPoint {
        ParetoPoint::from_objectives(0, f1, g2)
    }

    #[test]
    fn dominance_cases() {
        assert!(dominates(&pt(1.0, 1.0), &pt(2.0, 2.0)));
        assert!(!dominates(&pt(1.0, 2.0), &pt(2.0, 1.0)));
        assert!(!dominates(&pt(2.0, 1.0), &pt(1.0, 2.0)));
        // equality is not dominance
        assert!(!dominates(&pt(1.0, 1.0), &pt(1.0, 1.0)));
        // weak improvement in one coordinate is
        assert!(dominates(&pt(1.0, 1.0), &pt(1.0, 2.0)));
    }

    #[test]
    fn dominance_irreflexive_and_transitive_on_random_triples() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let ps: Vec<ParetoPoint> = (0..3)
                .map(|_| pt(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)))
                .collect();
            for p in &ps {
                assert!(!dominates(p, p));
            }
            for a in 0..3 {
                for b in 0..3 {
                    for c in 0..3 {
                        if dominates(&ps[a], &ps[b]) && dominates(&ps[b], &ps[c]) {
                            assert!(dominates(&ps[a], &ps[c]));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn filter_examples() {
        let mut arch = FrontArchive::new();
        arch.push(pt(1.0, 1.0), Direction::Initial);
        let f = front_filter_nondominated(&arch);
        assert_eq!(f.len(), 1);

        let mut arch = FrontArchive::new();
        arch.push(pt(1.0, 2.0), Direction::Initial);
        arch.push(pt(2.0, 1.0), Direction::Initial);
        arch.push(pt(2.0, 2.0), Direction::Initial);
        let f = front_filter_nondominated(&arch);
        assert_eq!(f.len(), 2);
        assert_eq!(f.points()[0].f1_train, 1.0);
        assert_eq!(f.points()[1].g2, 1.0);
        // input untouched
        assert_eq!(arch.len(), 3);
    }

    #[test]
    fn filter_agrees_with_pairwise_oracle_on_random_clouds() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut arch = FrontArchive::new();
            for _ in 0..50 {
                arch.push(
                    pt(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
                    Direction::Initial,
                );
            }
            let filtered = front_filter_nondominated(&arch);
            // exhaustive O(n^2) oracle
            let expect: Vec<usize> = (0..arch.len())
                .filter(|&i| {
                    !(0..arch.len()).any(|j| {
                        j != i && dominates(&arch.points()[j], &arch.points()[i])
                    })
                })
                .collect();
            let got: Vec<usize> = filtered.points().iter().map(|p| p.index).collect();
            assert_eq!(got, expect);
            // no dominating pair remains
            for a in filtered.points() {
                for b in filtered.points() {
                    assert!(!dominates(a, b) || std::ptr::eq(a, b));
                }
            }
        }
    }

    #[test]
    fn slope_examples() {
        let mut arch = FrontArchive::new();
        arch.push(pt(1.0, 0.0), Direction::Initial);
        arch.push(pt(0.0, 1.0), Direction::Initial);
        assert_eq!(front_slope(&arch).unwrap(), vec![-1.0]);

        let mut arch = FrontArchive::new();
        arch.push(pt(1.0, 0.0), Direction::Initial);
        arch.push(pt(1.0, 1.0), Direction::Initial);
        assert_eq!(front_slope(&arch).unwrap(), vec![0.0]);

        let mut arch = FrontArchive::new();
        arch.push(pt(1.0, 0.0), Direction::Initial);
        arch.push(pt(0.0, 0.0), Direction::Initial);
        assert!(front_slope(&arch).unwrap()[0].is_infinite());

        let mut single = FrontArchive::new();
        single.push(pt(1.0, 0.0), Direction::Initial);
        assert!(front_slope(&single).is_err());
    }

    #[test]
    fn push_assigns_contiguous_indices() {
        let mut arch = FrontArchive::new();
        for _ in 0..5 {
            arch.push(pt(1.0, 1.0), Direction::TowardLoss);
        }
        let idx: Vec<usize> = arch.points().iter().map(|p| p.index).collect();
        assert_eq!(idx, vec![0, 1, 2, 3, 4]);
    }
}
