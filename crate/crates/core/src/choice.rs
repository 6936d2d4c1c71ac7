//! Binary logit over pairs of wait distributions.
//!
//! Each observation compares option A with option B through feature
//! differences `x = f(A) - f(B)`; A is chosen with probability `sigmoid(b . x)`.
//! Fitting is plain maximum likelihood (Newton steps with a backtracking line
//! search) without subject effects or observation weights.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use thiserror::Error;

use crate::dist::DiscretePmf;
use crate::streams::{stream, Purpose};

pub const GRADIENT_TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 500;
/// A fitted linear predictor beyond this magnitude (choice probability within
/// 3e-7 of 0 or 1) is taken as a sign that the likelihood has no finite
/// maximizer.
const SEPARATION_INDEX: f64 = 15.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChoiceError {
    #[error("observation {index} ({decision_id}) has no recorded choice")]
    Unlabeled { index: usize, decision_id: String },
    #[error("no usable observations")]
    NoObservations,
    #[error("expected {expected} parameters, got {got}")]
    ParamLength { expected: usize, got: usize },
    #[error("parameters must be finite")]
    NonFinite,
    #[error("tail level must lie in (0, 1), got {0}")]
    BadLevel(f64),
    #[error("likelihood is unbounded (separated data): linear predictor reached {max_index:.1}")]
    Separation { max_index: f64 },
    #[error("information matrix is singular")]
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feature {
    Mean,
    Variance,
    Skewness,
    Kurtosis,
    Percentile,
    Cvar,
}

impl Feature {
    pub fn name(self) -> &'static str {
        match self {
            Feature::Mean => "mean",
            Feature::Variance => "variance",
            Feature::Skewness => "skewness",
            Feature::Kurtosis => "kurtosis",
            Feature::Percentile => "percentile",
            Feature::Cvar => "cvar",
        }
    }

    /// Value for one distribution; `None` when a standardized moment is
    /// undefined.
    pub fn value(self, pmf: &DiscretePmf, q: f64) -> Option<f64> {
        match self {
            Feature::Mean => Some(pmf.mean()),
            Feature::Variance => Some(pmf.variance()),
            Feature::Skewness => pmf.moments().skewness,
            Feature::Kurtosis => pmf.moments().kurtosis,
            Feature::Percentile => Some(pmf.percentile(q)),
            Feature::Cvar => Some(pmf.cvar(q)),
        }
    }
}

/// Feature specification of a logit model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Menu {
    pub features: Vec<Feature>,
    pub intercept: bool,
}

impl Menu {
    pub fn new(features: Vec<Feature>) -> Self {
        Self { features, intercept: false }
    }

    /// Mean, CVaR and percentile, in that order.
    pub fn tail_based() -> Self {
        Self::new(vec![Feature::Mean, Feature::Cvar, Feature::Percentile])
    }

    pub fn mean() -> Self {
        Self::new(vec![Feature::Mean])
    }

    pub fn mean_var() -> Self {
        Self::new(vec![Feature::Mean, Feature::Variance])
    }

    pub fn mean_var_skew() -> Self {
        Self::new(vec![Feature::Mean, Feature::Variance, Feature::Skewness])
    }

    pub fn all_moments() -> Self {
        Self::new(vec![Feature::Mean, Feature::Variance, Feature::Skewness, Feature::Kurtosis])
    }

    pub fn with_intercept(mut self, intercept: bool) -> Self {
        self.intercept = intercept;
        self
    }

    /// Model columns 1-7 of the published comparison: tail-based at the 70th,
    /// 80th and 90th percentile, then mean, mean+variance,
    /// mean+variance+skewness and all four moments. Returns the menu and its
    /// tail level (0.8 for moment columns, where it is unused).
    pub fn column(c: usize) -> Option<(Menu, f64)> {
        Some(match c {
            1 => (Self::tail_based(), 0.7),
            2 => (Self::tail_based(), 0.8),
            3 => (Self::tail_based(), 0.9),
            4 => (Self::mean(), 0.8),
            5 => (Self::mean_var(), 0.8),
            6 => (Self::mean_var_skew(), 0.8),
            7 => (Self::all_moments(), 0.8),
            _ => return None,
        })
    }

    /// Number of parameters.
    pub fn len(&self) -> usize {
        self.features.len() + usize::from(self.intercept)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameter names in order.
    pub fn names(&self) -> Vec<&'static str> {
        let mut names: Vec<_> = self.features.iter().map(|f| f.name()).collect();
        if self.intercept {
            names.push("constant");
        }
        names
    }
}

impl fmt::Display for Menu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = if *self == Self::tail_based() {
            "tail"
        } else if *self == Self::mean() {
            "mean"
        } else if *self == Self::mean_var() {
            "meanvar"
        } else if *self == Self::mean_var_skew() {
            "meanvarskew"
        } else if *self == Self::all_moments() {
            "all"
        } else {
            return f.write_str(&self.names().join("+"));
        };
        f.write_str(base)
    }
}

impl FromStr for Menu {
    type Err = String;

    /// Accepts `tail`, `mean`, `meanvar`, `meanvarskew`, `all`, optionally
    /// followed by `+constant`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (base, intercept) = match s.strip_suffix("+constant") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let menu = match base {
            "tail" => Self::tail_based(),
            "mean" => Self::mean(),
            "meanvar" => Self::mean_var(),
            "meanvarskew" => Self::mean_var_skew(),
            "all" => Self::all_moments(),
            other => return Err(format!("unknown menu `{other}`")),
        };
        Ok(menu.with_intercept(intercept))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoicePair {
    pub subject_id: String,
    pub decision_id: String,
    pub a: DiscretePmf,
    pub b: DiscretePmf,
    pub chosen_a: Option<bool>,
}

impl ChoicePair {
    pub fn unlabeled(decision_id: impl Into<String>, a: DiscretePmf, b: DiscretePmf) -> Self {
        Self {
            subject_id: String::new(),
            decision_id: decision_id.into(),
            a,
            b,
            chosen_a: None,
        }
    }

    pub fn labeled(&self, subject_id: impl Into<String>, chosen_a: bool) -> Self {
        Self {
            subject_id: subject_id.into(),
            chosen_a: Some(chosen_a),
            ..self.clone()
        }
    }

    /// The same choice with the options swapped.
    pub fn swapped(&self) -> Self {
        Self {
            subject_id: self.subject_id.clone(),
            decision_id: self.decision_id.clone(),
            a: self.b.clone(),
            b: self.a.clone(),
            chosen_a: self.chosen_a.map(|c| !c),
        }
    }
}

/// Feature differences A - B for the menu, with a trailing 1 for the
/// intercept. `None` when a selected standardized moment is undefined for
/// either option.
pub fn features(pair: &ChoicePair, q: f64, menu: &Menu) -> Option<Vec<f64>> {
    let mut x = Vec::with_capacity(menu.len());
    for f in &menu.features {
        x.push(f.value(&pair.a, q)? - f.value(&pair.b, q)?);
    }
    if menu.intercept {
        x.push(1.0);
    }
    Some(x)
}

/// Labeled observations reduced to feature rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub names: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    /// +1 when A was chosen, -1 otherwise.
    pub y: Vec<f64>,
    /// Observations dropped for undefined features.
    pub excluded: usize,
}

impl Design {
    pub fn build(data: &[ChoicePair], q: f64, menu: &Menu) -> Result<Self, ChoiceError> {
        check_level(q)?;
        let mut rows = Vec::with_capacity(data.len());
        let mut y = Vec::with_capacity(data.len());
        let mut excluded = 0;
        for (index, pair) in data.iter().enumerate() {
            let chosen = pair.chosen_a.ok_or_else(|| ChoiceError::Unlabeled {
                index,
                decision_id: pair.decision_id.clone(),
            })?;
            match features(pair, q, menu) {
                Some(x) => {
                    rows.push(x);
                    y.push(if chosen { 1.0 } else { -1.0 });
                }
                None => excluded += 1,
            }
        }
        Ok(Self { names: menu.names(), rows, y, excluded })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }
}

fn check_level(q: f64) -> Result<(), ChoiceError> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(ChoiceError::BadLevel(q))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(sigmoid(z))` without overflow.
fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// Log-likelihood and its gradient.
pub fn loglik(params: &[f64], design: &Design) -> (f64, Vec<f64>) {
    let mut value = 0.0;
    let mut grad = vec![0.0; params.len()];
    for (x, &y) in design.rows.iter().zip(&design.y) {
        let m = y * dot(params, x);
        value += log_sigmoid(m);
        let w = y * sigmoid(-m);
        for (g, xi) in grad.iter_mut().zip(x) {
            *g += w * xi;
        }
    }
    (value, grad)
}

/// Observed information `sum p (1 - p) x x'`.
fn information(params: &[f64], design: &Design) -> DMatrix<f64> {
    let k = params.len();
    let mut info = DMatrix::zeros(k, k);
    for x in &design.rows {
        let p = sigmoid(dot(params, x));
        let w = p * (1.0 - p);
        for i in 0..k {
            for j in 0..=i {
                info[(i, j)] += w * x[i] * x[j];
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            info[(j, i)] = info[(i, j)];
        }
    }
    info
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub names: Vec<&'static str>,
    pub params: Vec<f64>,
    pub stderr: Vec<f64>,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub n: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl Fit {
    /// `feature,estimate,stderr` rows followed by a `loglik,AIC,BIC,n` block.
    pub fn report_csv(&self) -> String {
        let mut out = String::from("feature,estimate,stderr\n");
        for ((name, p), se) in self.names.iter().zip(&self.params).zip(&self.stderr) {
            out.push_str(&format!("{name},{p},{se}\n"));
        }
        out.push_str("loglik,AIC,BIC,n\n");
        out.push_str(&format!("{},{},{},{}\n", self.loglik, self.aic, self.bic, self.n));
        out
    }
}

pub fn aic(k: usize, loglik: f64) -> f64 {
    2.0 * k as f64 - 2.0 * loglik
}

pub fn bic(k: usize, n: usize, loglik: f64) -> f64 {
    k as f64 * (n as f64).ln() - 2.0 * loglik
}

fn max_index(params: &[f64], design: &Design) -> f64 {
    design
        .rows
        .iter()
        .map(|x| dot(params, x).abs())
        .fold(0.0, f64::max)
}

/// Maximum-likelihood fit on a prepared design.
pub fn fit_design(design: &Design, init: Option<&[f64]>) -> Result<Fit, ChoiceError> {
    let k = design.dim();
    if design.is_empty() {
        return Err(ChoiceError::NoObservations);
    }
    let mut params = match init {
        Some(p) if p.len() != k => {
            return Err(ChoiceError::ParamLength { expected: k, got: p.len() })
        }
        Some(p) => p.to_vec(),
        None => vec![0.0; k],
    };
    if params.iter().any(|p| !p.is_finite()) {
        return Err(ChoiceError::NonFinite);
    }

    let (mut value, mut grad) = loglik(&params, design);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        if grad.iter().all(|g| g.abs() < GRADIENT_TOLERANCE) {
            converged = true;
            break;
        }
        iterations += 1;
        let info = information(&params, design);
        let g = DVector::from_column_slice(&grad);
        let step = match info.clone().cholesky() {
            Some(ch) => ch.solve(&g),
            None => info
                .svd(true, true)
                .solve(&g, 1e-12)
                .map_err(|_| ChoiceError::Singular)?,
        };
        let slope = step.dot(&g);
        // Newton decrement below the resolution of the log-likelihood: no
        // representable ascent remains even though rounding noise in the sum
        // may keep the gradient above tolerance on large designs.
        if slope <= 4.0 * f64::EPSILON * value.abs().max(1.0) {
            converged = true;
            break;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, s)| p + t * s).collect();
            let (v, gr) = loglik(&trial, design);
            if v.is_finite() && v >= value + 1e-4 * t * slope {
                params = trial;
                value = v;
                grad = gr;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // No ascent possible along the Newton direction: numerically at
            // the optimum.
            converged = grad.iter().all(|g| g.abs() < GRADIENT_TOLERANCE.sqrt());
            break;
        }
    }

    let index = max_index(&params, design);
    if index > SEPARATION_INDEX {
        return Err(ChoiceError::Separation { max_index: index });
    }
    let info = information(&params, design);
    let cov = info.clone().try_inverse().ok_or(ChoiceError::Singular)?;
    let stderr: Vec<f64> = (0..k).map(|i| cov[(i, i)].sqrt()).collect();
    if stderr.iter().any(|s| !s.is_finite()) {
        return Err(ChoiceError::Singular);
    }
    let n = design.len();
    Ok(Fit {
        names: design.names.clone(),
        params,
        stderr,
        loglik: value,
        aic: aic(k, value),
        bic: bic(k, n, value),
        n,
        iterations,
        converged,
    })
}

/// Builds the design and fits it.
pub fn fit(
    data: &[ChoicePair],
    q: f64,
    menu: &Menu,
    init: Option<&[f64]>,
) -> Result<Fit, ChoiceError> {
    fit_design(&Design::build(data, q, menu)?, init)
}

/// Synthetic subjects answer every pair with `P(A) = sigmoid(params . x)`.
/// Pairs whose features are undefined for the menu are skipped. Subject ids
/// are `s0000`, `s0001`, ...
pub fn simulate_choices(
    params: &[f64],
    pairs: &[ChoicePair],
    n_subjects: usize,
    q: f64,
    menu: &Menu,
    seed: u64,
) -> Result<Vec<ChoicePair>, ChoiceError> {
    check_level(q)?;
    if params.len() != menu.len() {
        return Err(ChoiceError::ParamLength { expected: menu.len(), got: params.len() });
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(ChoiceError::NonFinite);
    }
    let probs: Vec<Option<f64>> = pairs
        .iter()
        .map(|p| features(p, q, menu).map(|x| sigmoid(dot(params, &x))))
        .collect();
    let mut rng = stream(seed, Purpose::Other(0x63686f696365), 0);
    let mut out = Vec::with_capacity(n_subjects * pairs.len());
    for s in 0..n_subjects {
        let subject = format!("s{s:04}");
        for (pair, prob) in pairs.iter().zip(&probs) {
            if let Some(p) = prob {
                let u: f64 = rng.random();
                out.push(pair.labeled(subject.clone(), u < *p));
            }
        }
    }
    Ok(out)
}
