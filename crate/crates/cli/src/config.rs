//! Line-oriented `key = value` run configuration.
//!
//! ```text
//! # study grid
//! seed = 42
//! rho = 0.9, 0.95, 1.0, 1.05, 1.1
//! model = all
//! ```
//!
//! Unset keys take the defaults of the pooled-versus-dedicated study. List
//! keys (`topology`, `servers`, `rho`, `reward`, `model`) accept comma lists.
//! `coef.*` overrides apply to every selected model.

use std::path::PathBuf;

use tailqueue::des::Grid;
use tailqueue::{Coefficients, ModelKind, Topology, UtilityModel};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {message}")]
    BadValue { line: usize, key: String, message: String },
    #[error("missing required key `{0}`")]
    MissingRequired(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub topologies: Vec<Topology>,
    pub servers: Vec<usize>,
    pub rho: Vec<f64>,
    pub reward: Vec<f64>,
    pub mu: f64,
    pub models: Vec<ModelKind>,
    pub q: f64,
    pub horizon: f64,
    pub warmup: f64,
    pub replications: usize,
    pub seed: u64,
    pub coef_mean: Option<f64>,
    pub coef_var: Option<f64>,
    pub coef_cvar: Option<f64>,
    pub coef_pct: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Study defaults with the given seed.
    pub fn with_seed(seed: u64) -> Self {
        let grid = Grid::study(seed);
        Self {
            topologies: grid.topologies,
            servers: grid.servers,
            rho: grid.rhos,
            reward: grid.rewards,
            mu: grid.mu,
            models: ModelKind::ALL.to_vec(),
            q: tailqueue::utility::DEFAULT_TAIL_LEVEL,
            horizon: grid.horizon,
            warmup: grid.warmup,
            replications: grid.replications,
            seed,
            coef_mean: None,
            coef_var: None,
            coef_cvar: None,
            coef_pct: None,
            out_dir: None,
        }
    }

    pub fn model(&self, kind: ModelKind) -> UtilityModel {
        let d = Coefficients::defaults(kind);
        UtilityModel::new(kind)
            .with_coefficients(Coefficients {
                mean: self.coef_mean.unwrap_or(d.mean),
                var: self.coef_var.unwrap_or(d.var),
                cvar: self.coef_cvar.unwrap_or(d.cvar),
                pct: self.coef_pct.unwrap_or(d.pct),
            })
            .with_tail_level(self.q)
    }

    pub fn grid(&self) -> Grid {
        Grid {
            rhos: self.rho.clone(),
            servers: self.servers.clone(),
            rewards: self.reward.clone(),
            models: self.models.iter().map(|&k| self.model(k)).collect(),
            topologies: self.topologies.clone(),
            mu: self.mu,
            horizon: self.horizon,
            warmup: self.warmup,
            replications: self.replications,
            seed: self.seed,
        }
    }

    /// Number of scenario runs (cells x models x topologies).
    pub fn runs(&self) -> usize {
        self.rho.len() * self.servers.len() * self.reward.len() * self.models.len() * self.topologies.len()
    }
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Text form accepted by [`parse_config`].
pub fn render(c: &RunConfig) -> String {
    let topology = if c.topologies == [Topology::Pooled, Topology::Dedicated] {
        "both".to_string()
    } else {
        join(&c.topologies)
    };
    let model = if c.models == ModelKind::ALL {
        "all".to_string()
    } else {
        join(&c.models)
    };
    let mut out = format!(
        "topology = {topology}\nservers = {}\nrho = {}\nreward = {}\nmu = {}\nmodel = {model}\n\
         q = {}\nhorizon = {}\nwarmup = {}\nreplications = {}\nseed = {}\n",
        join(&c.servers),
        join(&c.rho),
        join(&c.reward),
        c.mu,
        c.q,
        c.horizon,
        c.warmup,
        c.replications,
        c.seed
    );
    for (key, value) in [
        ("coef.mean", c.coef_mean),
        ("coef.var", c.coef_var),
        ("coef.cvar", c.coef_cvar),
        ("coef.pct", c.coef_pct),
    ] {
        if let Some(v) = value {
            out.push_str(&format!("{key} = {v}\n"));
        }
    }
    if let Some(dir) = &c.out_dir {
        out.push_str(&format!("out_dir = {}\n", dir.display()));
    }
    out
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Entry<'_> {
    fn bad(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::BadValue {
            line: self.line,
            key: self.key.to_string(),
            message: message.into(),
        }
    }

    fn list<T>(&self, parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, ConfigError> {
        let items: Vec<T> = self
            .value
            .split(',')
            .map(|s| parse(s.trim()).map_err(|m| self.bad(m)))
            .collect::<Result<_, _>>()?;
        if items.is_empty() {
            return Err(self.bad("empty list"));
        }
        Ok(items)
    }

    fn one<T>(&self, parse: impl Fn(&str) -> Result<T, String>) -> Result<T, ConfigError> {
        parse(self.value).map_err(|m| self.bad(m))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be positive"))
    }
}

fn finite(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a finite number")),
    }
}

fn count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

/// Parses a configuration; `seed_override` (from the environment) replaces or
/// supplies the seed.
pub fn parse_config_with_seed(text: &str, seed_override: Option<u64>) -> Result<RunConfig, ConfigError> {
    let mut c = RunConfig::with_seed(0);
    let mut seed = None;
    let mut seen: Vec<&str> = Vec::new();
    let mut horizon_line = 0;
    let mut warmup_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError::BadValue {
                line,
                key: body.to_string(),
                message: "expected `key = value`".into(),
            });
        };
        let e = Entry { line, key: key.trim(), value: value.trim() };
        if seen.contains(&e.key) {
            return Err(e.bad("key given twice"));
        }
        match e.key {
            "topology" => {
                c.topologies = match e.value {
                    "both" => vec![Topology::Pooled, Topology::Dedicated],
                    _ => e.list(|s| s.parse::<Topology>())?,
                }
            }
            "servers" => c.servers = e.list(count)?,
            "rho" => c.rho = e.list(positive)?,
            "reward" => c.reward = e.list(finite)?,
            "mu" => c.mu = e.one(positive)?,
            "model" => {
                c.models = match e.value {
                    "all" => ModelKind::ALL.to_vec(),
                    _ => e.list(|s| s.parse::<ModelKind>())?,
                }
            }
            "q" => {
                c.q = e.one(|s| match finite(s)? {
                    v if v > 0.0 && v < 1.0 => Ok(v),
                    _ => Err(format!("`{s}` must lie in (0, 1)")),
                })?
            }
            "horizon" => {
                c.horizon = e.one(positive)?;
                horizon_line = line;
            }
            "warmup" => {
                c.warmup = e.one(|s| match finite(s)? {
                    v if v >= 0.0 => Ok(v),
                    _ => Err(format!("`{s}` must be >= 0")),
                })?;
                warmup_line = line;
            }
            "replications" => c.replications = e.one(count)?,
            "seed" => seed = Some(e.one(|s| s.parse::<u64>().map_err(|_| format!("`{s}` is not a 64-bit unsigned integer")))?),
            "coef.mean" => c.coef_mean = Some(e.one(finite)?),
            "coef.var" => c.coef_var = Some(e.one(finite)?),
            "coef.cvar" => c.coef_cvar = Some(e.one(finite)?),
            "coef.pct" => c.coef_pct = Some(e.one(finite)?),
            "out_dir" => {
                if e.value.is_empty() {
                    return Err(e.bad("empty path"));
                }
                c.out_dir = Some(PathBuf::from(e.value));
            }
            other => {
                return Err(ConfigError::UnknownKey { line, key: other.to_string() });
            }
        }
        seen.push(e.key);
    }
    if c.horizon <= c.warmup {
        let (line, key) = if horizon_line >= warmup_line {
            (horizon_line, "horizon")
        } else {
            (warmup_line, "warmup")
        };
        return Err(ConfigError::BadValue {
            line,
            key: key.into(),
            message: format!("horizon ({}) must exceed warmup ({})", c.horizon, c.warmup),
        });
    }
    c.seed = seed_override.or(seed).ok_or(ConfigError::MissingRequired("seed"))?;
    Ok(c)
}
