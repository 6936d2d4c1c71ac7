//! Sums of independent exponential stages (bidiagonal phase-type laws).
//!
//! This is the law of a customer's sojourn time once the queue has been
//! observed: every customer ahead must clear before the customer's own
//! service starts. Transient quantities are evaluated by uniformization, which
//! stays stable when many stages share a rate (partial fractions do not).

use rand::Rng;
use thiserror::Error;

/// Largest number of stages accepted.
pub const MAX_STAGES: usize = 10_000;

/// Bound on the discarded Poisson tail in uniformization.
pub const TRUNCATION: f64 = 1e-13;

/// Absolute tolerance of quantile bisection, in minutes.
pub const QUANTILE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseTypeError {
    #[error("a phase-type law needs at least one stage")]
    NoStages,
    #[error("stage {index} has rate {rate}; rates must be finite and positive")]
    BadRate { index: usize, rate: f64 },
    #[error("{stages} stages exceed the cap of {MAX_STAGES}")]
    TooManyStages { stages: usize },
    #[error("invalid queue state: {0}")]
    BadQueueState(String),
}

/// Service layout a customer faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Topology {
    /// One FIFO line feeding `N` servers (M/M/N).
    Pooled,
    /// `N` separate single-server lines with random routing.
    Dedicated,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Topology::Pooled => "pooled",
            Topology::Dedicated => "dedicated",
        }
    }
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Topology {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pooled" => Ok(Topology::Pooled),
            "dedicated" => Ok(Topology::Dedicated),
            other => Err(format!("unknown topology `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseType {
    rates: Vec<f64>,
}

impl PhaseType {
    pub fn new(rates: Vec<f64>) -> Result<Self, PhaseTypeError> {
        if rates.is_empty() {
            return Err(PhaseTypeError::NoStages);
        }
        if rates.len() > MAX_STAGES {
            return Err(PhaseTypeError::TooManyStages { stages: rates.len() });
        }
        if let Some((index, &rate)) = rates
            .iter()
            .enumerate()
            .find(|(_, r)| !(r.is_finite() && **r > 0.0))
        {
            return Err(PhaseTypeError::BadRate { index, rate });
        }
        Ok(Self { rates })
    }

    pub fn exponential(rate: f64) -> Result<Self, PhaseTypeError> {
        Self::new(vec![rate])
    }

    pub fn erlang(stages: usize, rate: f64) -> Result<Self, PhaseTypeError> {
        Self::new(vec![rate; stages])
    }

    /// Sojourn-time law of an arrival that sees `n_observed` customers.
    ///
    /// Pooled: `n_observed` counts everyone in the system. With a free server
    /// the wait is the customer's own service; otherwise `n - N + 1`
    /// departures at the pooled rate `N mu` precede it. Dedicated:
    /// `n_observed` counts the customers at the chosen server, who are cleared
    /// one by one before the customer's own service.
    pub fn from_queue_state(
        topology: Topology,
        n_observed: usize,
        servers: usize,
        mu: f64,
    ) -> Result<Self, PhaseTypeError> {
        if servers == 0 {
            return Err(PhaseTypeError::BadQueueState("at least one server is required".into()));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(PhaseTypeError::BadQueueState(format!(
                "service rate must be positive, got {mu}"
            )));
        }
        let ahead = match topology {
            Topology::Pooled if n_observed < servers => 0,
            Topology::Pooled => n_observed - servers + 1,
            Topology::Dedicated => n_observed,
        };
        let stages = ahead + 1;
        if stages > MAX_STAGES {
            return Err(PhaseTypeError::TooManyStages { stages });
        }
        let ahead_rate = match topology {
            Topology::Pooled => servers as f64 * mu,
            Topology::Dedicated => mu,
        };
        let mut rates = vec![ahead_rate; ahead];
        rates.push(mu);
        Self::new(rates)
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn stages(&self) -> usize {
        self.rates.len()
    }

    pub fn mean(&self) -> f64 {
        self.rates.iter().map(|r| 1.0 / r).sum()
    }

    pub fn variance(&self) -> f64 {
        self.rates.iter().map(|r| 1.0 / (r * r)).sum()
    }

    pub fn stddev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        (1.0 - self.transient(t).survival).clamp(0.0, 1.0)
    }

    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        self.transient(t).survival
    }

    /// `E[(W - t)+]`.
    pub fn expected_excess(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.mean() - t;
        }
        self.transient(t).excess
    }

    /// The `q`-quantile, by bisection.
    pub fn percentile(&self, q: f64) -> f64 {
        assert!(q > 0.0 && q < 1.0, "quantile level must lie in (0, 1), got {q}");
        let mut lo = 0.0;
        let mut hi = self.mean() + 40.0 * self.stddev();
        while self.cdf(hi) < q {
            lo = hi;
            hi *= 2.0;
        }
        while hi - lo > QUANTILE_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Rockafellar–Uryasev CVaR; equals `E[W | W > t_q]` for this
    /// continuous law.
    pub fn cvar(&self, q: f64) -> f64 {
        let t = self.percentile(q);
        t + self.expected_excess(t) / (1.0 - q)
    }

    /// Percentile and CVaR at level `q` in one pass.
    pub fn tail(&self, q: f64) -> (f64, f64) {
        let t = self.percentile(q);
        (t, t + self.expected_excess(t) / (1.0 - q))
    }

    /// One draw by inverse transform on every stage.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.rates
            .iter()
            .map(|r| {
                let u: f64 = rng.random();
                -(1.0 - u).ln() / r
            })
            .sum()
    }

    /// Survival probability and expected excess at `t > 0`.
    ///
    /// With `Lambda = max rate`, `exp(T t) = sum_k Pois(k; Lambda t) P^k` where
    /// `P = I + T / Lambda` is substochastic and bidiagonal. The row vector
    /// `alpha P^k` is advanced in place; `(-T)^{-1} 1` is the vector of
    /// remaining mean times, obtained by back-substitution.
    fn transient(&self, t: f64) -> Transient {
        let k = self.rates.len();
        let lambda = self.rates.iter().cloned().fold(0.0, f64::max);
        let stay: Vec<f64> = self.rates.iter().map(|r| 1.0 - r / lambda).collect();
        let advance: Vec<f64> = self.rates.iter().map(|r| r / lambda).collect();
        let mut remaining = vec![0.0; k];
        let mut acc = 0.0;
        for i in (0..k).rev() {
            acc += 1.0 / self.rates[i];
            remaining[i] = acc;
        }

        let m = lambda * t;
        let mut state = vec![0.0; k];
        state[0] = 1.0;
        // Only stages 0..=reach can hold mass after `step` jumps.
        let mut reach = 0usize;
        let mut survival = 0.0;
        let mut excess = 0.0;
        let ln_m = m.ln();
        let mut ln_fact = 0.0;
        let mut step = 0usize;
        loop {
            let weight = (-m + step as f64 * ln_m - ln_fact).exp();
            if weight > 0.0 {
                let (s, e) = state[..=reach]
                    .iter()
                    .zip(&remaining[..=reach])
                    .fold((0.0, 0.0), |(s, e), (&p, &h)| (s + p, e + p * h));
                survival += weight * s;
                excess += weight * e;
            }
            let next = (step + 1) as f64;
            if next > m {
                // Poisson tail beyond `step` is bounded by a geometric series.
                let tail = weight * m / (next - m);
                if tail < TRUNCATION {
                    break;
                }
            }
            // advance the embedded chain one jump
            let new_reach = (reach + 1).min(k - 1);
            for i in (0..=new_reach).rev() {
                let from_prev = if i > 0 { state[i - 1] * advance[i - 1] } else { 0.0 };
                state[i] = state[i] * stay[i] + from_prev;
            }
            reach = new_reach;
            step += 1;
            ln_fact += (step as f64).ln();
        }
        Transient {
            survival: survival.clamp(0.0, 1.0),
            excess: excess.max(0.0),
        }
    }
}

struct Transient {
    survival: f64,
    excess: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn queue_state_laws() {
        let p = PhaseType::from_queue_state(Topology::Pooled, 1, 2, 1.0).unwrap();
        assert_eq!(p.rates(), &[1.0]);
        assert_eq!(p.mean(), 1.0);
        let p = PhaseType::from_queue_state(Topology::Pooled, 3, 2, 1.0).unwrap();
        assert_eq!(p.rates(), &[2.0, 2.0, 1.0]);
        assert_eq!(p.mean(), 2.0);
        let d = PhaseType::from_queue_state(Topology::Dedicated, 2, 7, 1.0).unwrap();
        assert_eq!(d.rates(), &[1.0, 1.0, 1.0]);
        assert_eq!((d.mean(), d.variance()), (3.0, 3.0));
        assert!(PhaseType::from_queue_state(Topology::Pooled, 0, 0, 1.0).is_err());
        assert!(PhaseType::from_queue_state(Topology::Pooled, 0, 1, 0.0).is_err());
        assert!(matches!(
            PhaseType::from_queue_state(Topology::Dedicated, MAX_STAGES, 1, 1.0),
            Err(PhaseTypeError::TooManyStages { .. })
        ));
    }

    #[test]
    fn closed_form_moments() {
        let p = PhaseType::new(vec![2.0, 1.0]).unwrap();
        assert_eq!((p.mean(), p.variance()), (1.5, 1.25));
        let p = PhaseType::new(vec![2.0, 2.0, 1.0]).unwrap();
        assert_eq!((p.mean(), p.variance()), (2.0, 1.5));
    }

    #[test]
    fn rejects_bad_rates() {
        assert_eq!(PhaseType::new(vec![]), Err(PhaseTypeError::NoStages));
        assert!(matches!(
            PhaseType::new(vec![1.0, -1.0]),
            Err(PhaseTypeError::BadRate { index: 1, .. })
        ));
        assert!(PhaseType::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn cdf_closed_forms() {
        let e = (-1.0f64).exp();
        assert_abs_diff_eq!(PhaseType::exponential(1.0).unwrap().cdf(1.0), 1.0 - e, epsilon = 1e-12);
        assert_abs_diff_eq!(
            PhaseType::erlang(2, 1.0).unwrap().cdf(2.0),
            1.0 - 3.0 * e * e,
            epsilon = 1e-12
        );
        // Partial fractions for rates (2, 1): F(t) = 1 - 2 e^{-t} + e^{-2t}.
        assert_abs_diff_eq!(
            PhaseType::new(vec![2.0, 1.0]).unwrap().cdf(1.0),
            1.0 - 2.0 * e + e * e,
            epsilon = 1e-12
        );
        assert_eq!(PhaseType::exponential(1.0).unwrap().cdf(0.0), 0.0);
    }

    #[test]
    fn erlang_cdf_at_large_argument() {
        // Erlang(k, 1) survival is the Poisson(t) cdf at k - 1.
        let k = 200;
        let t = 180.0;
        let pt = PhaseType::erlang(k, 1.0).unwrap();
        let mut surv = 0.0;
        let mut ln_term: f64 = -t;
        for j in 0..k {
            if j > 0 {
                ln_term += t.ln() - (j as f64).ln();
            }
            surv += ln_term.exp();
        }
        assert_abs_diff_eq!(pt.survival(t), surv, epsilon = 1e-11);
    }

    #[test]
    fn exponential_tail_statistics() {
        let pt = PhaseType::exponential(1.0).unwrap();
        assert_abs_diff_eq!(pt.percentile(0.8), 5f64.ln(), epsilon = 1e-8);
        assert_abs_diff_eq!(pt.percentile(0.5), 2f64.ln(), epsilon = 1e-8);
        assert_abs_diff_eq!(pt.cvar(0.8), 1.0 + 5f64.ln(), epsilon = 1e-8);
        let fast = PhaseType::exponential(3.0).unwrap();
        for q in [0.1, 0.5, 0.9, 0.99] {
            assert_abs_diff_eq!(fast.cvar(q), fast.percentile(q) + 1.0 / 3.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn excess_at_zero_is_mean() {
        let pt = PhaseType::new(vec![2.0, 2.0, 1.0]).unwrap();
        assert_abs_diff_eq!(pt.expected_excess(0.0), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pt.expected_excess(1e-9), 2.0 - 1e-9, epsilon = 1e-9);
    }

    struct Constant(u64);

    impl rand::RngCore for Constant {
        fn next_u32(&mut self) -> u32 {
            (self.0 >> 32) as u32
        }
        fn next_u64(&mut self) -> u64 {
            self.0
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            for (i, b) in dst.iter_mut().enumerate() {
                *b = self.0.to_le_bytes()[i % 8];
            }
        }
    }

    #[test]
    fn inverse_transform_sample() {
        // 1 << 63 maps to u = 0.5 under the standard float conversion.
        let draw = PhaseType::exponential(1.0).unwrap().sample(&mut Constant(1 << 63));
        assert_abs_diff_eq!(draw, 2f64.ln(), epsilon = 1e-12);
    }
}
