//! Construction of discrete laws with prescribed moments.
//!
//! Given a support and up to four moment targets, [`moment_match`] returns the
//! PMF closest in Euclidean distance to a reference PMF among all PMFs on that
//! support meeting the targets. Raw-moment constraints are linear in the
//! probabilities, so this is a projection onto the intersection of an affine
//! set with the nonnegative orthant. It is solved with Dykstra's alternating
//! projections, followed by an exact equality-constrained solve on the
//! identified positive set. The constraints are expressed on the standardized
//! variable `(x - mean) / scale`, which spans the same affine set as the raw
//! moments while keeping the rows well conditioned.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::dist::{DiscretePmf, DistError};

/// Maximum number of alternating-projection sweeps.
pub const MAX_ITERATIONS: usize = 100_000;

/// Tolerance on the returned PMF's moments.
pub const MOMENT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTargets {
    pub mean: f64,
    pub stddev: Option<f64>,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
}

impl MomentTargets {
    pub fn mean_only(mean: f64) -> Self {
        Self {
            mean,
            stddev: None,
            skewness: None,
            kurtosis: None,
        }
    }

    pub fn new(mean: f64, stddev: f64, skewness: Option<f64>, kurtosis: Option<f64>) -> Self {
        Self {
            mean,
            stddev: Some(stddev),
            skewness,
            kurtosis,
        }
    }

    pub fn validate(&self) -> Result<(), MatchError> {
        let bad = |msg: &str| Err(MatchError::BadTargets(msg.to_string()));
        if !self.mean.is_finite() {
            return bad("mean must be finite");
        }
        match self.stddev {
            Some(s) if !(s.is_finite() && s >= 0.0) => return bad("stddev must be finite and >= 0"),
            None if self.skewness.is_some() || self.kurtosis.is_some() => {
                return bad("skewness and kurtosis targets need a stddev target")
            }
            Some(s) if s == 0.0 && (self.skewness.is_some() || self.kurtosis.is_some()) => {
                return bad("skewness and kurtosis are undefined at zero stddev")
            }
            _ => {}
        }
        if let Some(k) = self.kurtosis {
            let s = self.skewness.unwrap_or(0.0);
            if !(k.is_finite() && k >= 1.0) {
                return bad("kurtosis must be >= 1");
            }
            if self.skewness.is_some() && k < s * s + 1.0 - 1e-12 {
                return bad("kurtosis must be at least skewness^2 + 1");
            }
        }
        Ok(())
    }

    /// Residual of each active target for the given PMF.
    pub fn residuals(&self, pmf: &DiscretePmf) -> Vec<(&'static str, f64)> {
        let m = pmf.moments();
        let mut out = vec![("mean", m.mean - self.mean)];
        if let Some(s) = self.stddev {
            out.push(("stddev", m.stddev - s));
        }
        if let Some(s) = self.skewness {
            out.push(("skewness", m.skewness.map_or(f64::INFINITY, |v| v - s)));
        }
        if let Some(k) = self.kurtosis {
            out.push(("kurtosis", m.kurtosis.map_or(f64::INFINITY, |v| v - k)));
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchError {
    #[error("invalid targets: {0}")]
    BadTargets(String),
    #[error("invalid support or reference: {0}")]
    Support(#[from] DistError),
    #[error("no nonnegative PMF meets the targets: {constraint} residual {residual:.3e}")]
    Infeasible { constraint: String, residual: f64 },
    #[error("no convergence after {iterations} iterations (constraint residual {residual:.3e})")]
    DidNotConverge { iterations: usize, residual: f64 },
}

struct Constraints {
    a: DMatrix<f64>,
    b: DVector<f64>,
    names: Vec<&'static str>,
}

fn build_constraints(support: &[f64], targets: &MomentTargets) -> Constraints {
    let lo = support[0];
    let hi = support[support.len() - 1];
    let scale = match targets.stddev {
        Some(s) if s > 0.0 => s,
        _ => (hi - lo).max(1.0),
    };
    let z: Vec<f64> = support.iter().map(|&x| (x - targets.mean) / scale).collect();
    let mut rows: Vec<(Vec<f64>, f64, &'static str)> = vec![(vec![1.0; z.len()], 1.0, "total mass")];
    rows.push((z.clone(), 0.0, "mean"));
    if let Some(s) = targets.stddev {
        rows.push((z.iter().map(|v| v * v).collect(), (s / scale).powi(2), "stddev"));
    }
    if let Some(sk) = targets.skewness {
        rows.push((z.iter().map(|v| v.powi(3)).collect(), sk, "skewness"));
    }
    if let Some(k) = targets.kurtosis {
        rows.push((z.iter().map(|v| v.powi(4)).collect(), k, "kurtosis"));
    }
    let a = DMatrix::from_fn(rows.len(), z.len(), |i, j| rows[i].0[j]);
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let names = rows.iter().map(|r| r.2).collect();
    Constraints { a, b, names }
}

/// Euclidean projection onto `{ p : A p = b }` restricted to the coordinates
/// in `free` (others held at zero).
struct AffineProjector {
    a: DMatrix<f64>,
    b: DVector<f64>,
    // A^T (A A^T)^+
    pinv: DMatrix<f64>,
}

impl AffineProjector {
    fn new(a: DMatrix<f64>, b: DVector<f64>) -> Self {
        let gram = &a * a.transpose();
        let gram_pinv = gram
            .clone()
            .pseudo_inverse(1e-12 * gram.norm().max(1.0))
            .expect("pseudo-inverse of a symmetric matrix");
        let pinv = a.transpose() * gram_pinv;
        Self { a, b, pinv }
    }

    fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        let r = &self.a * v - &self.b;
        v - &self.pinv * r
    }

    fn residual(&self, v: &DVector<f64>) -> f64 {
        (&self.a * v - &self.b).amax()
    }
}

/// Exact projection of `reference` onto the affine set with the coordinates
/// outside `free` pinned to zero. Returns `None` when the restricted affine
/// set is empty or the solution leaves the orthant.
fn polish(c: &Constraints, reference: &DVector<f64>, free: &[usize]) -> Option<DVector<f64>> {
    if free.is_empty() {
        return None;
    }
    let a = DMatrix::from_fn(c.a.nrows(), free.len(), |i, j| c.a[(i, free[j])]);
    let r = DVector::from_iterator(free.len(), free.iter().map(|&j| reference[j]));
    let proj = AffineProjector::new(a, c.b.clone());
    let p = proj.project(&r);
    if proj.residual(&p) > 1e-11 || p.iter().any(|&v| v < -1e-12) {
        return None;
    }
    let mut full = DVector::zeros(reference.len());
    for (k, &j) in free.iter().enumerate() {
        full[j] = p[k].max(0.0);
    }
    Some(full)
}

fn worst_residual(c: &Constraints, p: &DVector<f64>) -> (String, f64) {
    let r = &c.a * p - &c.b;
    let (i, v) = r
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .map(|(i, v)| (i, v.abs()))
        .unwrap_or((0, 0.0));
    (c.names[i].to_string(), v)
}

/// Closest PMF to `reference` (uniform by default) on `support` whose moments
/// equal `targets`.
pub fn moment_match(
    support: &[f64],
    targets: &MomentTargets,
    reference: Option<&DiscretePmf>,
) -> Result<DiscretePmf, MatchError> {
    targets.validate()?;
    let uniform = DiscretePmf::uniform(support.to_vec())?;
    let reference = reference.unwrap_or(&uniform);
    if reference.support() != support {
        return Err(MatchError::BadTargets(
            "reference PMF must share the support".into(),
        ));
    }
    let lo = support[0];
    let hi = support[support.len() - 1];
    if targets.mean < lo || targets.mean > hi {
        let gap = if targets.mean < lo { lo - targets.mean } else { targets.mean - hi };
        return Err(MatchError::Infeasible {
            constraint: "mean".into(),
            residual: gap,
        });
    }

    let c = build_constraints(support, targets);
    let n = support.len();
    let r = DVector::from_column_slice(reference.probs());
    let affine = AffineProjector::new(c.a.clone(), c.b.clone());

    // Inconsistent equality system: even the unrestricted affine set is empty.
    let anchor = affine.project(&r);
    if affine.residual(&anchor) > 1e-9 {
        let (constraint, residual) = worst_residual(&c, &anchor);
        return Err(MatchError::Infeasible { constraint, residual });
    }

    let finish = |p: DVector<f64>| -> Result<DiscretePmf, MatchError> {
        let total: f64 = p.iter().sum();
        let probs: Vec<f64> = p.iter().map(|v| v / total).collect();
        let pmf = DiscretePmf::new(support.to_vec(), probs)?;
        match targets
            .residuals(&pmf)
            .into_iter()
            .find(|(_, r)| r.is_nan() || r.abs() > MOMENT_TOLERANCE)
        {
            Some((name, residual)) => Err(MatchError::Infeasible {
                constraint: name.to_string(),
                residual: residual.abs(),
            }),
            None => Ok(pmf),
        }
    };

    // Dykstra's algorithm: the affine set needs no correction term.
    let mut x = r.clone();
    let mut q = DVector::zeros(n);
    let mut last_gap = f64::INFINITY;
    let mut stalled_since = 0usize;
    for iter in 1..=MAX_ITERATIONS {
        let y = affine.project(&x);
        let shifted = &y + &q;
        let x_next = shifted.map(|v| v.max(0.0));
        q = shifted - &x_next;
        let gap = (&y - &x_next).amax();
        let step = (&x_next - &x).amax();
        x = x_next;

        if iter % 50 == 0 || step < 1e-15 {
            let free: Vec<usize> = (0..n).filter(|&j| x[j] > 1e-10).collect();
            if let Some(p) = polish(&c, &r, &free) {
                if kkt_holds(&c, &r, &p, &free) {
                    return finish(p);
                }
            }
        }

        if iter % 1000 == 0 {
            // Disjoint convex sets: the gap between iterates settles at a
            // positive distance instead of shrinking.
            if gap > 1e-7 && (last_gap - gap).abs() <= 1e-9 * last_gap.max(1e-300) {
                stalled_since += 1;
                if stalled_since >= 3 {
                    let (constraint, residual) = worst_residual(&c, &x);
                    return Err(MatchError::Infeasible { constraint, residual });
                }
            } else {
                stalled_since = 0;
            }
            last_gap = gap;
        }
        if gap < 1e-14 && step < 1e-15 {
            break;
        }
    }

    let free: Vec<usize> = (0..n).filter(|&j| x[j] > 1e-10).collect();
    if let Some(p) = polish(&c, &r, &free) {
        return finish(p);
    }
    let residual = affine.residual(&x);
    if residual <= 1e-9 {
        return finish(x);
    }
    Err(MatchError::DidNotConverge {
        iterations: MAX_ITERATIONS,
        residual,
    })
}

/// Sign condition on the multipliers of the zero coordinates.
fn kkt_holds(c: &Constraints, r: &DVector<f64>, p: &DVector<f64>, free: &[usize]) -> bool {
    // Stationarity on the free set gives p_F - r_F = A_F^T lambda.
    let a_free = DMatrix::from_fn(c.a.nrows(), free.len(), |i, j| c.a[(i, free[j])]);
    let diff = DVector::from_iterator(free.len(), free.iter().map(|&j| p[j] - r[j]));
    let Ok(svd) = a_free.transpose().svd(true, true).solve(&diff, 1e-12) else {
        return false;
    };
    let lambda = svd;
    let grad = c.a.transpose() * &lambda;
    (0..p.len())
        .filter(|j| !free.contains(j))
        .all(|j| -r[j] - grad[j] >= -1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn odd_support(n: usize) -> Vec<f64> {
        (0..n).map(|i| (2 * i + 1) as f64).collect()
    }

    #[test]
    fn mean_outside_hull_is_infeasible() {
        let err = moment_match(&[1.0, 3.0], &MomentTargets::mean_only(9.0), None).unwrap_err();
        match err {
            MatchError::Infeasible { constraint, residual } => {
                assert_eq!(constraint, "mean");
                assert!((residual - 6.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn symmetric_three_point_solution() {
        // Solving the 3x3 system by hand: p1 + p2 + p3 = 1, (p3 - p1) * 8 = 0,
        // 64 (p1 + p3) = 64 forces p2 = 0 and p1 = p3 = 1/2.
        let pmf = moment_match(
            &[1.0, 9.0, 17.0],
            &MomentTargets::new(9.0, 8.0, Some(0.0), None),
            None,
        )
        .unwrap();
        let expected = [0.5, 0.0, 0.5];
        for (p, e) in pmf.probs().iter().zip(expected) {
            assert!((p - e).abs() < 1e-9, "{:?}", pmf.probs());
        }
    }

    #[test]
    fn matches_four_moments_on_nine_points() {
        let targets = MomentTargets::new(9.0, 4.24, Some(0.0), Some(1.87));
        let pmf = moment_match(&odd_support(9), &targets, None).unwrap();
        for (name, r) in targets.residuals(&pmf) {
            assert!(r.abs() < 1e-6, "{name} residual {r}");
        }
    }

    #[test]
    fn reference_that_is_feasible_is_returned_unchanged() {
        let d2 = DiscretePmf::new(
            odd_support(9),
            vec![0.035, 0.080, 0.210, 0.130, 0.090, 0.130, 0.210, 0.080, 0.035],
        )
        .unwrap();
        let m = d2.moments();
        let targets = MomentTargets::new(m.mean, m.stddev, m.skewness, m.kurtosis);
        let out = moment_match(d2.support(), &targets, Some(&d2)).unwrap();
        for (a, b) in out.probs().iter().zip(d2.probs()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn unreachable_stddev_is_infeasible() {
        // On {1,3,5} with mean 3 the largest achievable stddev is 2.
        let err = moment_match(
            &[1.0, 3.0, 5.0],
            &MomentTargets::new(3.0, 2.5, None, None),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, MatchError::Infeasible { .. }), "{err:?}");
    }

    #[test]
    fn infeasible_kurtosis_on_wide_support() {
        // Bimodal-at-the-ends laws have kurtosis close to 1; a very peaked
        // target with a large spread cannot be met.
        let err = moment_match(
            &odd_support(9),
            &MomentTargets::new(9.0, 7.9, Some(0.0), Some(5.0)),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, MatchError::Infeasible { .. }), "{err:?}");
    }

    #[test]
    fn invalid_targets_rejected() {
        let t = MomentTargets::new(9.0, 4.0, Some(2.0), Some(2.0));
        assert!(matches!(t.validate(), Err(MatchError::BadTargets(_))));
        let t = MomentTargets {
            mean: 1.0,
            stddev: None,
            skewness: Some(0.0),
            kurtosis: None,
        };
        assert!(matches!(t.validate(), Err(MatchError::BadTargets(_))));
    }
}
