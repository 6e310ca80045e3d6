//! Front-quality measures: 2-D hypervolume, normalized max-gap spread, and
//! budget accounting.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::front::{dominates, FrontArchive, ParetoPoint};

pub use crate::problem::Budget;

/// Reference corner for hypervolume; must be strictly worse than every front
/// point in both coordinates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReferencePoint {
    pub f1_ref: f64,
    pub g2_ref: f64,
}

impl ReferencePoint {
    /// Shared reference for a set of fronts: 1.1 x componentwise max over
    /// the union of all points.
    pub fn shared(fronts: &[&FrontArchive]) -> Result<ReferencePoint> {
        let mut f1 = f64::NEG_INFINITY;
        let mut g2 = f64::NEG_INFINITY;
        for front in fronts {
            for p in front.points() {
                f1 = f1.max(p.f1_train);
                g2 = g2.max(p.g2);
            }
        }
        if !f1.is_finite() || !g2.is_finite() {
            return Err(Error::InvalidArgument(
                "cannot build a reference point from empty fronts".into(),
            ));
        }
        // 1.1x on a max of exactly zero would not be strictly worse
        let pad = |v: f64| if v > 0.0 { 1.1 * v } else { v.abs() * 1.1 + 1e-9 };
        Ok(ReferencePoint {
            f1_ref: pad(f1),
            g2_ref: pad(g2),
        })
    }
}

fn nondominated_objectives(front: &FrontArchive) -> Vec<(f64, f64)> {
    let pts = front.points();
    let mut out = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        let dominated = pts
            .iter()
            .enumerate()
            .any(|(j, q)| j != i && dominates(q, p));
        if !dominated {
            out.push((p.f1_train, p.g2));
        }
    }
    out
}

/// Area dominated by the non-dominated subset of `front` relative to `ref`,
/// by a rectangle sweep over points sorted by `g2`. Dominated points
/// contribute nothing.
pub fn hypervolume_2d(front: &FrontArchive, reference: &ReferencePoint) -> Result<f64> {
    if front.is_empty() {
        return Ok(0.0);
    }
    for p in front.points() {
        if p.f1_train >= reference.f1_ref || p.g2 >= reference.g2_ref {
            return Err(Error::InvalidArgument(format!(
                "reference point ({}, {}) does not dominate point {} at ({}, {})",
                reference.f1_ref, reference.g2_ref, p.index, p.f1_train, p.g2
            )));
        }
    }
    let mut pts = nondominated_objectives(front);
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    pts.dedup();
    // g2 strictly ascending, f1 strictly descending after filtering
    let mut area = 0.0;
    let mut prev_f1 = reference.f1_ref;
    for (f1, g2) in pts {
        area += (reference.g2_ref - g2) * (prev_f1 - f1);
        prev_f1 = f1;
    }
    Ok(area)
}

/// Largest Euclidean distance between consecutive points of the
/// non-dominated front, after normalizing both objectives to [0,1] over the
/// front's own bounding box and sorting by `g2`.
pub fn max_gap(front: &FrontArchive) -> Result<f64> {
    let mut pts = nondominated_objectives(front);
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    pts.dedup();
    if pts.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "max_gap needs >= 2 non-dominated points, found {}",
            pts.len()
        )));
    }
    let (mut f1_min, mut f1_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut g2_min, mut g2_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (f1, g2) in &pts {
        f1_min = f1_min.min(*f1);
        f1_max = f1_max.max(*f1);
        g2_min = g2_min.min(*g2);
        g2_max = g2_max.max(*g2);
    }
    // degenerate ranges collapse that coordinate's contribution to zero
    let f1_range = if f1_max > f1_min { f1_max - f1_min } else { 1.0 };
    let g2_range = if g2_max > g2_min { g2_max - g2_min } else { 1.0 };
    let mut worst = 0.0_f64;
    for w in pts.windows(2) {
        let df = (w[1].0 - w[0].0) / f1_range;
        let dg = (w[1].1 - w[0].1) / g2_range;
        worst = worst.max((df * df + dg * dg).sqrt());
    }
    Ok(worst)
}

/// Counts of points from each front that are dominated by some point of the
/// other, plus how many are non-dominated within the pooled union.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CrossDominance {
    pub a_dominated_by_b: usize,
    pub b_dominated_by_a: usize,
    pub a_nondominated_in_union: usize,
    pub b_nondominated_in_union: usize,
}

pub fn cross_dominance(a: &FrontArchive, b: &FrontArchive) -> CrossDominance {
    let dominated_by = |p: &ParetoPoint, other: &FrontArchive| {
        other.points().iter().any(|q| dominates(q, p))
    };
    let nondominated_in_union = |p: &ParetoPoint, own: &FrontArchive, other: &FrontArchive| {
        !own.points()
            .iter()
            .any(|q| !std::ptr::eq(q, p) && dominates(q, p))
            && !other.points().iter().any(|q| dominates(q, p))
    };
    CrossDominance {
        a_dominated_by_b: a.points().iter().filter(|p| dominated_by(p, b)).count(),
        b_dominated_by_a: b.points().iter().filter(|p| dominated_by(p, a)).count(),
        a_nondominated_in_union: a
            .points()
            .iter()
            .filter(|p| nondominated_in_union(p, a, b))
            .count(),
        b_nondominated_in_union: b
            .points()
            .iter()
            .filter(|p| nondominated_in_union(p, b, a))
            .count(),
    }
}

/// Work done between two counter snapshots.
pub fn budget_report(before: &Budget, after: &Budget) -> Budget {
    after.since(before)
}
