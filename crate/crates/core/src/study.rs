//! Stimulus distributions of the pairwise wait-choice experiments.
//!
//! Study 2A and 2B distributions are fully specified. Of Study 2C only the six
//! distributions with listed probabilities are bundled; the remaining ones were
//! shown as unknown or partially described. Study 2C D4 lists nine
//! probabilities, and is bundled on the nine-point grid `{1, 3, ..., 17}`.

use std::fmt;

use crate::choice::ChoicePair;
use crate::dist::DiscretePmf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Study {
    S2A,
    S2B,
    S2C,
}

impl Study {
    pub const ALL: [Study; 3] = [Study::S2A, Study::S2B, Study::S2C];

    pub fn name(self) -> &'static str {
        match self {
            Study::S2A => "2a",
            Study::S2B => "2b",
            Study::S2C => "2c",
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "study{}", self.name())
    }
}

macro_rules! bundled {
    ($($study:ident $name:literal $file:literal),* $(,)?) => {
        const FILES: &[(Study, &str, &str)] = &[
            $((Study::$study, $name, include_str!(concat!("../data/", $file)))),*
        ];
    };
}

bundled! {
    S2A "D1" "study2a_D1.pmf", S2A "D2" "study2a_D2.pmf", S2A "D3" "study2a_D3.pmf",
    S2A "D4" "study2a_D4.pmf", S2A "D5" "study2a_D5.pmf", S2A "D6" "study2a_D6.pmf",
    S2A "D7" "study2a_D7.pmf", S2A "D8" "study2a_D8.pmf", S2A "D9" "study2a_D9.pmf",
    S2A "D10" "study2a_D10.pmf",
    S2B "D1" "study2b_D1.pmf", S2B "D2" "study2b_D2.pmf", S2B "D3" "study2b_D3.pmf",
    S2B "D4" "study2b_D4.pmf", S2B "D5" "study2b_D5.pmf", S2B "D6" "study2b_D6.pmf",
    S2B "D7" "study2b_D7.pmf", S2B "D8" "study2b_D8.pmf", S2B "D9" "study2b_D9.pmf",
    S2B "D10" "study2b_D10.pmf", S2B "D11" "study2b_D11.pmf", S2B "D12" "study2b_D12.pmf",
    S2C "D1" "study2c_D1.pmf", S2C "D2" "study2c_D2.pmf", S2C "D3" "study2c_D3.pmf",
    S2C "D4" "study2c_D4.pmf", S2C "D5" "study2c_D5.pmf", S2C "D6" "study2c_D6.pmf",
}

/// File name of a bundled distribution, e.g. `study2a_D1.pmf`.
pub fn file_name(study: Study, name: &str) -> String {
    format!("study{}_{name}.pmf", study.name())
}

/// Raw text of a bundled distribution.
pub fn text(study: Study, name: &str) -> Option<&'static str> {
    FILES
        .iter()
        .find(|(s, n, _)| *s == study && *n == name)
        .map(|(_, _, t)| *t)
}

pub fn distribution(study: Study, name: &str) -> Option<DiscretePmf> {
    text(study, name).map(|t| DiscretePmf::parse(t).expect("bundled distribution is valid"))
}

/// Every bundled distribution in study order.
pub fn all() -> Vec<(Study, &'static str, DiscretePmf)> {
    FILES
        .iter()
        .map(|(s, n, t)| (*s, *n, DiscretePmf::parse(t).expect("bundled distribution is valid")))
        .collect()
}

/// Moments printed next to a decision option. Kurtosis is non-excess and only
/// printed for Study 2A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrintedMoments {
    pub study: Study,
    pub decision: u32,
    pub option: char,
    pub dist: &'static str,
    pub mean: f64,
    pub stddev: f64,
    pub skewness: f64,
    pub kurtosis: Option<f64>,
}

macro_rules! printed {
    ($study:ident; $($d:literal $o:literal $n:literal $m:literal $s:literal $sk:literal $k:expr;)*) => {
        [$(PrintedMoments {
            study: Study::$study,
            decision: $d,
            option: $o,
            dist: $n,
            mean: $m,
            stddev: $s,
            skewness: $sk,
            kurtosis: $k,
        }),*]
    };
}

pub const PRINTED_2A: [PrintedMoments; 18] = printed! { S2A;
    1 'A' "D2" 9.00 4.24 0.00 Some(1.87); 1 'B' "D3" 9.00 5.09 0.00 Some(1.87);
    2 'A' "D4" 9.00 4.99 0.00 Some(1.43); 2 'B' "D5" 9.00 6.03 0.00 Some(1.43);
    3 'A' "D6" 9.00 6.03 0.00 Some(1.12); 3 'B' "D7" 9.00 6.93 0.00 Some(1.12);
    4 'A' "D4" 9.00 4.99 0.00 Some(1.43); 4 'B' "D9" 9.00 5.00 0.30 Some(1.43);
    5 'A' "D5" 9.00 6.03 0.00 Some(1.43); 5 'B' "D8" 9.00 6.00 0.30 Some(1.45);
    6 'A' "D7" 9.00 6.93 0.00 Some(1.12); 6 'B' "D10" 9.00 6.99 0.11 Some(1.14);
    7 'A' "D1" 9.00 4.24 0.00 Some(2.37); 7 'B' "D2" 9.00 4.24 0.00 Some(1.87);
    8 'A' "D3" 9.00 5.09 0.00 Some(1.87); 8 'B' "D4" 9.00 4.99 0.00 Some(1.43);
    9 'A' "D5" 9.00 6.03 0.00 Some(1.43); 9 'B' "D6" 9.00 6.00 0.00 Some(1.12);
};

pub const PRINTED_2B: [PrintedMoments; 18] = printed! { S2B;
    1 'A' "D4" 8.99 6.01 0.26 None; 1 'B' "D1" 9.00 6.00 0.30 None;
    2 'A' "D5" 8.99 5.15 0.55 None; 2 'B' "D2" 9.00 5.00 0.30 None;
    3 'A' "D6" 9.00 7.04 0.08 None; 3 'B' "D3" 9.00 6.99 0.11 None;
    4 'A' "D4" 8.99 6.01 0.26 None; 4 'B' "D7" 9.01 6.01 -0.26 None;
    5 'A' "D5" 8.99 5.15 0.55 None; 5 'B' "D8" 9.01 5.15 -0.55 None;
    6 'A' "D6" 9.00 7.04 0.08 None; 6 'B' "D9" 9.00 7.04 -0.08 None;
    7 'A' "D1" 9.00 6.00 0.30 None; 7 'B' "D10" 8.99 6.04 0.58 None;
    8 'A' "D2" 9.00 5.00 0.30 None; 8 'B' "D11" 9.00 5.05 0.86 None;
    9 'A' "D3" 9.00 6.99 0.11 None; 9 'B' "D12" 9.00 7.02 0.51 None;
};

/// All printed moment rows of Studies 2A and 2B.
pub fn printed_moments() -> impl Iterator<Item = &'static PrintedMoments> {
    PRINTED_2A.iter().chain(PRINTED_2B.iter())
}

/// One designed decision: ids of the two bundled distributions shown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub id: String,
    pub study: Study,
    pub a: &'static str,
    pub b: &'static str,
}

/// The designed decisions 1-9 of Studies 2A and 2B.
pub fn decisions() -> Vec<Decision> {
    [&PRINTED_2A, &PRINTED_2B]
        .into_iter()
        .flat_map(|table| table.chunks_exact(2))
        .map(|rows| Decision {
            id: format!("{}-{}", rows[0].study.name(), rows[0].decision),
            study: rows[0].study,
            a: rows[0].dist,
            b: rows[1].dist,
        })
        .collect()
}

/// The designed decisions as unlabeled pairs.
pub fn decision_pairs() -> Vec<ChoicePair> {
    decisions()
        .into_iter()
        .map(|d| {
            let a = distribution(d.study, d.a).expect("printed distribution is bundled");
            let b = distribution(d.study, d.b).expect("printed distribution is bundled");
            ChoicePair::unlabeled(d.id, a, b)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundle_is_complete() {
        let all = all();
        assert_eq!(all.len(), 28);
        for study in Study::ALL {
            assert!(all.iter().any(|(s, _, _)| *s == study));
        }
        assert!(distribution(Study::S2C, "D7").is_none());
        assert_eq!(file_name(Study::S2B, "D10"), "study2b_D10.pmf");
    }

    #[test]
    fn means_are_nine() {
        for (study, name, pmf) in all() {
            if study != Study::S2C {
                assert!((pmf.mean() - 9.0).abs() <= 0.011, "{study} {name}");
            }
        }
    }

    #[test]
    fn eighteen_designed_pairs() {
        let pairs = decision_pairs();
        assert_eq!(pairs.len(), 18);
        assert_eq!(pairs[9].decision_id, "2b-1");
        assert_eq!(pairs[9].a, distribution(Study::S2B, "D4").unwrap());
    }
}
