//! Finite discrete waiting-time distributions.
//!
//! A [`DiscretePmf`] is a law on a strictly increasing list of waiting times
//! (minutes). It carries the statistics used throughout the crate: standardized
//! moments, the lower quantile, conditional value-at-risk and first-order
//! stochastic dominance for outcomes where smaller is better.

use std::fmt;

use thiserror::Error;

/// Tolerance on the total probability mass of a PMF.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Slack used when comparing cumulative probabilities against a level, so that
/// rows printed with three decimals hit their atoms exactly.
const CDF_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("a distribution needs at least one support point")]
    Empty,
    #[error("support has {support} points but {probs} probabilities were given")]
    LengthMismatch { support: usize, probs: usize },
    #[error("support must be strictly increasing (violated at index {index})")]
    NotIncreasing { index: usize },
    #[error("probability at index {index} is negative ({value})")]
    NegativeProbability { index: usize, value: f64 },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("probabilities sum to {sum}, expected 1 within {SUM_TOLERANCE}")]
    BadSum { sum: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Convention used for conditional value-at-risk at an atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CvarConvention {
    /// `t_q + E[(X - t_q)+] / (1 - q)`.
    #[default]
    RockafellarUryasev,
    /// `E[X | X > t_q]`, falling back to `t_q` when no mass lies above it.
    StrictExceedance,
}

/// Mean, standard deviation and the standardized third and fourth central
/// moments. Skewness and kurtosis are `None` for a degenerate law.
///
/// Kurtosis is the plain fourth standardized moment, not excess kurtosis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub stddev: f64,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePmf {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscretePmf {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self, DistError> {
        if support.is_empty() {
            return Err(DistError::Empty);
        }
        if support.len() != probs.len() {
            return Err(DistError::LengthMismatch {
                support: support.len(),
                probs: probs.len(),
            });
        }
        for (index, (&x, &p)) in support.iter().zip(&probs).enumerate() {
            if !x.is_finite() || !p.is_finite() {
                return Err(DistError::NonFinite { index });
            }
            if p < 0.0 {
                return Err(DistError::NegativeProbability { index, value: p });
            }
            if index > 0 && x <= support[index - 1] {
                return Err(DistError::NotIncreasing { index });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(DistError::BadSum { sum });
        }
        Ok(Self { support, probs })
    }

    /// Builds a PMF from `(value, probability)` pairs given in increasing order.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, DistError> {
        let (support, probs) = pairs.iter().copied().unzip();
        Self::new(support, probs)
    }

    pub fn point(value: f64) -> Self {
        Self::new(vec![value], vec![1.0]).expect("a finite point mass is a valid PMF")
    }

    /// Uniform law on the given support.
    pub fn uniform(support: Vec<f64>) -> Result<Self, DistError> {
        let n = support.len();
        if n == 0 {
            return Err(DistError::Empty);
        }
        Self::new(support, vec![1.0 / n as f64; n])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.support[0]
    }

    pub fn max(&self) -> f64 {
        self.support[self.support.len() - 1]
    }

    fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.pairs().take_while(|&(x, _)| x <= t).map(|(_, p)| p).sum()
    }

    pub fn mean(&self) -> f64 {
        self.pairs().map(|(x, p)| p * x).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.pairs().map(|(x, p)| p * (x - mean).powi(2)).sum()
    }

    /// Raw moment `E[X^k]`.
    pub fn raw_moment(&self, k: i32) -> f64 {
        self.pairs().map(|(x, p)| p * x.powi(k)).sum()
    }

    pub fn moments(&self) -> Moments {
        let mean = self.mean();
        let (m2, m3, m4) = self.pairs().fold((0.0, 0.0, 0.0), |(a, b, c), (x, p)| {
            let d = x - mean;
            (a + p * d * d, b + p * d * d * d, c + p * d * d * d * d)
        });
        let stddev = m2.sqrt();
        let scale = self.max().abs().max(self.min().abs()).max(1.0);
        if stddev <= 1e-12 * scale {
            return Moments {
                mean,
                stddev: 0.0,
                skewness: None,
                kurtosis: None,
            };
        }
        Moments {
            mean,
            stddev,
            skewness: Some(m3 / stddev.powi(3)),
            kurtosis: Some(m4 / (m2 * m2)),
        }
    }

    /// Lower quantile `min { x : F(x) >= q }`.
    pub fn percentile(&self, q: f64) -> f64 {
        assert!(q > 0.0 && q < 1.0, "quantile level must lie in (0, 1), got {q}");
        let mut cumulative = 0.0;
        for (x, p) in self.pairs() {
            cumulative += p;
            if cumulative >= q - CDF_SLACK {
                return x;
            }
        }
        self.max()
    }

    pub fn cvar(&self, q: f64) -> f64 {
        self.cvar_with(q, CvarConvention::default())
    }

    pub fn cvar_with(&self, q: f64, convention: CvarConvention) -> f64 {
        let t = self.percentile(q);
        match convention {
            CvarConvention::RockafellarUryasev => {
                let excess: f64 = self.pairs().map(|(x, p)| p * (x - t).max(0.0)).sum();
                t + excess / (1.0 - q)
            }
            CvarConvention::StrictExceedance => {
                let (mass, weighted) = self
                    .pairs()
                    .filter(|&(x, _)| x > t)
                    .fold((0.0, 0.0), |(m, w), (x, p)| (m + p, w + p * x));
                if mass > 0.0 {
                    weighted / mass
                } else {
                    t
                }
            }
        }
    }

    /// First-order dominance for waiting times: `self` is better than `worse`
    /// when its CDF is nowhere below and somewhere strictly above.
    pub fn fosd_dominates(&self, worse: &DiscretePmf) -> bool {
        let mut grid: Vec<f64> = self.support.iter().chain(&worse.support).copied().collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let mut strict = false;
        for t in grid {
            let diff = self.cdf(t) - worse.cdf(t);
            if diff < -CDF_SLACK {
                return false;
            }
            if diff > CDF_SLACK {
                strict = true;
            }
        }
        strict
    }

    /// Parses the `# pmf` text format.
    pub fn parse(text: &str) -> Result<Self, DistError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, "# pmf")) => {}
            Some((line, _)) => {
                return Err(DistError::Parse {
                    line,
                    message: "expected header `# pmf`".into(),
                })
            }
            None => return Err(DistError::Empty),
        }
        let mut support = Vec::new();
        let mut probs = Vec::new();
        for (line, body) in lines {
            let (x, p) = body.split_once(',').ok_or_else(|| DistError::Parse {
                line,
                message: format!("expected `<value>,<probability>`, got `{body}`"),
            })?;
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| DistError::Parse {
                    line,
                    message: format!("`{}`: {e}", s.trim()),
                })
            };
            support.push(parse(x)?);
            probs.push(parse(p)?);
        }
        Self::new(support, probs)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for DiscretePmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# pmf")?;
        for (x, p) in self.pairs() {
            writeln!(f, "{x},{p}")?;
        }
        Ok(())
    }
}

/// Lower `q`-quantile and Rockafellar–Uryasev CVaR of an equally weighted
/// sample. Returns `None` for an empty sample.
pub fn empirical_tail(samples: &[f64], q: f64) -> Option<(f64, f64)> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // smallest k with k/n >= q
    let target = q * n as f64;
    let mut k = target.ceil() as usize;
    if k > 0 && (k - 1) as f64 >= target - 1e-9 * n as f64 {
        k -= 1;
    }
    let t = sorted[k.clamp(1, n) - 1];
    let excess: f64 = sorted.iter().map(|&x| (x - t).max(0.0)).sum::<f64>() / n as f64;
    Some((t, t + excess / (1.0 - q)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> DiscretePmf {
        DiscretePmf::from_pairs(&[(5.0, 0.5), (15.0, 0.5)]).unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(DiscretePmf::new(vec![], vec![]), Err(DistError::Empty));
        assert!(matches!(
            DiscretePmf::new(vec![1.0, 2.0], vec![1.0]),
            Err(DistError::LengthMismatch { .. })
        ));
        assert!(matches!(
            DiscretePmf::new(vec![2.0, 1.0], vec![0.5, 0.5]),
            Err(DistError::NotIncreasing { index: 1 })
        ));
        assert!(matches!(
            DiscretePmf::new(vec![1.0, 2.0], vec![1.5, -0.5]),
            Err(DistError::NegativeProbability { index: 1, .. })
        ));
        assert!(matches!(
            DiscretePmf::new(vec![1.0, 2.0], vec![0.5, 0.4]),
            Err(DistError::BadSum { .. })
        ));
    }

    #[test]
    fn one_point_moments_are_degenerate() {
        let m = DiscretePmf::point(5.0).moments();
        assert_eq!(m.mean, 5.0);
        assert_eq!(m.stddev, 0.0);
        assert!(m.skewness.is_none() && m.kurtosis.is_none());
    }

    #[test]
    fn lower_quantile_at_atoms() {
        assert_eq!(two_point().percentile(0.8), 15.0);
        assert_eq!(two_point().percentile(0.5), 5.0);
    }

    #[test]
    fn cvar_hand_values() {
        assert_eq!(two_point().cvar(0.8), 15.0);
        let p = DiscretePmf::from_pairs(&[(0.0, 0.9), (10.0, 0.1)]).unwrap();
        assert!((p.cvar(0.8) - 5.0).abs() < 1e-12);
        // the strict convention conditions on X > t_q = 0
        assert!((p.cvar_with(0.8, CvarConvention::StrictExceedance) - 10.0).abs() < 1e-12);
        assert_eq!(two_point().cvar_with(0.8, CvarConvention::StrictExceedance), 15.0);
    }

    #[test]
    fn dominance_cases() {
        let five = DiscretePmf::point(5.0);
        let ten = DiscretePmf::point(10.0);
        assert!(five.fosd_dominates(&ten));
        assert!(!ten.fosd_dominates(&five));
        assert!(!five.fosd_dominates(&five));
        let a = DiscretePmf::from_pairs(&[(4.0, 0.5), (6.0, 0.5)]).unwrap();
        let b = DiscretePmf::from_pairs(&[(3.0, 0.5), (7.0, 0.5)]).unwrap();
        assert!(!a.fosd_dominates(&b));
        assert!(!b.fosd_dominates(&a));
    }

    #[test]
    fn text_format_round_trip() {
        let p = DiscretePmf::from_pairs(&[(1.0, 0.35), (7.0, 0.24), (17.0, 0.41)]).unwrap();
        let text = p.to_text();
        assert!(text.starts_with("# pmf\n1,0.35\n"));
        assert_eq!(DiscretePmf::parse(&text).unwrap(), p);
        assert!(matches!(
            DiscretePmf::parse("# pmf\n1;0.5\n"),
            Err(DistError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            DiscretePmf::parse("1,1\n"),
            Err(DistError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn empirical_tail_matches_pmf_tail() {
        let samples = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        let (t, c) = empirical_tail(&samples, 0.8).unwrap();
        let pmf = DiscretePmf::new(samples.to_vec(), vec![0.1; 10]).unwrap();
        assert_eq!(t, pmf.percentile(0.8));
        assert!((c - pmf.cvar(0.8)).abs() < 1e-12);
        assert_eq!(t, 8.0);
        assert!((c - 9.5).abs() < 1e-12);
        assert!(empirical_tail(&[], 0.8).is_none());
    }
}
