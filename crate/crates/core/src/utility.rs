//! Customer utility for a random sojourn time.
//!
//! Three specifications are supported, all linear in summary statistics of the
//! wait law `W` and in the service reward `R`:
//!
//! * mean only: `R - b_mean E[W]`
//! * mean-variance: `R - b_mean E[W] - b_var Var(W)`
//! * tail based: `R - b_mean E[W] + b_cvar CVaR_q(W) - b_pct P_q(W)`
//!
//! Coefficients are stored as positive magnitudes; the signs above are applied
//! by [`UtilityModel::evaluate`].

use std::fmt;
use std::str::FromStr;

use crate::phasetype::PhaseType;

/// Default tail level.
pub const DEFAULT_TAIL_LEVEL: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    MeanOnly,
    MeanVariance,
    TailBased,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::MeanOnly, ModelKind::MeanVariance, ModelKind::TailBased];

    /// Short name used in configs and CSV files.
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::MeanOnly => "mean",
            ModelKind::MeanVariance => "meanvar",
            ModelKind::TailBased => "tail",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(ModelKind::MeanOnly),
            "meanvar" => Ok(ModelKind::MeanVariance),
            "tail" => Ok(ModelKind::TailBased),
            other => Err(format!("unknown model `{other}`")),
        }
    }
}

/// Coefficient magnitudes. Unused entries are ignored by the model kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub mean: f64,
    pub var: f64,
    pub cvar: f64,
    pub pct: f64,
}

impl Coefficients {
    /// Simulation-study estimates for each specification.
    pub fn defaults(kind: ModelKind) -> Self {
        match kind {
            ModelKind::MeanOnly => Self { mean: 0.411, var: 0.0, cvar: 0.0, pct: 0.0 },
            ModelKind::MeanVariance => Self { mean: 0.406, var: 0.009, cvar: 0.0, pct: 0.0 },
            ModelKind::TailBased => Self { mean: 0.544, var: 0.0, cvar: 0.331, pct: 0.215 },
        }
    }
}

/// Summary of a wait law at tail level `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaitSummary {
    pub mean: f64,
    pub variance: f64,
    pub pct_q: f64,
    pub cvar_q: f64,
}

impl WaitSummary {
    /// A wait known in advance.
    pub fn deterministic(wait: f64) -> Self {
        Self { mean: wait, variance: 0.0, pct_q: wait, cvar_q: wait }
    }
}

pub fn summarize(pt: &PhaseType, q: f64) -> WaitSummary {
    let (pct_q, cvar_q) = pt.tail(q);
    WaitSummary {
        mean: pt.mean(),
        variance: pt.variance(),
        pct_q,
        cvar_q,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityModel {
    pub kind: ModelKind,
    pub coefficients: Coefficients,
    pub tail_level: f64,
}

/// Outcome of an arrival's decision; both variants carry the evaluated
/// utility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decision {
    Join { utility: f64 },
    Balk { utility: f64 },
}

impl Decision {
    pub fn joins(&self) -> bool {
        matches!(self, Decision::Join { .. })
    }

    pub fn utility(&self) -> f64 {
        match *self {
            Decision::Join { utility } | Decision::Balk { utility } => utility,
        }
    }
}

impl UtilityModel {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            coefficients: Coefficients::defaults(kind),
            tail_level: DEFAULT_TAIL_LEVEL,
        }
    }

    pub fn mean_only() -> Self {
        Self::new(ModelKind::MeanOnly)
    }

    pub fn mean_variance() -> Self {
        Self::new(ModelKind::MeanVariance)
    }

    pub fn tail_based() -> Self {
        Self::new(ModelKind::TailBased)
    }

    pub fn with_coefficients(mut self, coefficients: Coefficients) -> Self {
        self.coefficients = coefficients;
        self
    }

    pub fn with_tail_level(mut self, q: f64) -> Self {
        self.tail_level = q;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.tail_level > 0.0 && self.tail_level < 1.0) {
            return Err(format!("tail level must lie in (0, 1), got {}", self.tail_level));
        }
        let c = self.coefficients;
        if [c.mean, c.var, c.cvar, c.pct].iter().any(|v| !v.is_finite()) {
            return Err("coefficients must be finite".into());
        }
        Ok(())
    }

    /// Whether the model reads the tail statistics of the wait law.
    pub fn needs_tail(&self) -> bool {
        self.kind == ModelKind::TailBased
    }

    pub fn evaluate(&self, w: &WaitSummary, reward: f64) -> f64 {
        let c = &self.coefficients;
        match self.kind {
            ModelKind::MeanOnly => reward - c.mean * w.mean,
            ModelKind::MeanVariance => reward - c.mean * w.mean - c.var * w.variance,
            ModelKind::TailBased => reward - c.mean * w.mean + c.cvar * w.cvar_q - c.pct * w.pct_q,
        }
    }

    /// Utility of joining with wait law `pt`.
    pub fn utility(&self, pt: &PhaseType, reward: f64) -> f64 {
        let summary = if self.needs_tail() {
            summarize(pt, self.tail_level)
        } else {
            WaitSummary {
                mean: pt.mean(),
                variance: pt.variance(),
                pct_q: f64::NAN,
                cvar_q: f64::NAN,
            }
        };
        self.evaluate(&summary, reward)
    }

    /// Join iff the utility is strictly positive.
    pub fn join_decision(&self, pt: &PhaseType, reward: f64) -> Decision {
        decide(self.utility(pt, reward))
    }
}

pub fn decide(utility: f64) -> Decision {
    if utility > 0.0 {
        Decision::Join { utility }
    } else {
        Decision::Balk { utility }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasetype::Topology;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exponential_summary() {
        let s = summarize(&PhaseType::exponential(1.0).unwrap(), 0.8);
        assert_eq!((s.mean, s.variance), (1.0, 1.0));
        assert_abs_diff_eq!(s.pct_q, 5f64.ln(), epsilon = 1e-8);
        assert_abs_diff_eq!(s.cvar_q, 1.0 + 5f64.ln(), epsilon = 1e-8);
    }

    #[test]
    fn mean_only_balks_on_erlang_three() {
        let pt = PhaseType::erlang(3, 1.0).unwrap();
        let d = UtilityModel::mean_only().join_decision(&pt, 1.0);
        assert!(!d.joins());
        assert_abs_diff_eq!(d.utility(), 1.0 - 0.411 * 3.0, epsilon = 1e-12);
    }

    #[test]
    fn tail_based_on_exponential() {
        let s = summarize(&PhaseType::exponential(1.0).unwrap(), 0.8);
        let u = UtilityModel::tail_based().evaluate(&s, 2.0);
        let ln5 = 5f64.ln();
        assert_abs_diff_eq!(u, 2.0 - 0.544 + 0.331 * (1.0 + ln5) - 0.215 * ln5, epsilon = 1e-8);
        assert_abs_diff_eq!(u, 1.9737, epsilon = 1e-4);
    }

    #[test]
    fn mean_variance_deterministic_wait() {
        let u = UtilityModel::mean_variance().evaluate(&WaitSummary::deterministic(1.0), 1.0);
        assert_abs_diff_eq!(u, 0.594, epsilon = 1e-12);
    }

    #[test]
    fn join_decisions_from_queue_states() {
        let m = UtilityModel::mean_only();
        let idle = PhaseType::from_queue_state(Topology::Pooled, 0, 2, 1.0).unwrap();
        let d = m.join_decision(&idle, 1.0);
        assert!(d.joins());
        assert_abs_diff_eq!(d.utility(), 0.589, epsilon = 1e-12);
        let busy = PhaseType::from_queue_state(Topology::Dedicated, 2, 2, 1.0).unwrap();
        let d = m.join_decision(&busy, 1.0);
        assert!(!d.joins());
        assert_abs_diff_eq!(d.utility(), -0.233, epsilon = 1e-12);
    }

    #[test]
    fn zero_utility_balks() {
        assert_eq!(decide(0.0), Decision::Balk { utility: 0.0 });
        let pt = PhaseType::exponential(1.0).unwrap();
        assert!(!UtilityModel::mean_only().join_decision(&pt, 0.411).joins());
    }

    #[test]
    fn reduced_models_coincide_with_mean_only() {
        let w = WaitSummary { mean: 2.3, variance: 4.1, pct_q: 3.0, cvar_q: 5.5 };
        let base = UtilityModel::mean_only().with_coefficients(Coefficients {
            mean: 0.5,
            var: 0.0,
            cvar: 0.0,
            pct: 0.0,
        });
        let tail = UtilityModel::tail_based().with_coefficients(base.coefficients);
        let mv = UtilityModel::mean_variance().with_coefficients(base.coefficients);
        assert_eq!(base.evaluate(&w, 2.0), tail.evaluate(&w, 2.0));
        assert_eq!(base.evaluate(&w, 2.0), mv.evaluate(&w, 2.0));
    }
}
