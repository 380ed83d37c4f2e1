//! Decoding strategies over the [`LanguageModel`] interface.
//!
//! Deterministic searches (greedy, beam, diverse beam) and seeded samplers
//! (ancestral, top-k, nucleus, MBR). Every returned [`Candidate`] carries the
//! log-probability of its sequence under the decoding model, accumulated in
//! the same order as [`crate::lm::sequence_log_prob`].

mod beam;
mod mbr;
mod sampling;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use beam::{beam_search, diverse_beam_search, greedy_decode};
pub use mbr::{mbr_decode, mbr_select, utility_ngram_overlap};
pub use sampling::{ancestral_sample, nucleus_sample, top_k_sample};
pub(crate) use sampling::{all_outcomes, sample_from};

use crate::error::{Error, Result};
use crate::lm::{LanguageModel, Sequence};

/// A decoded string with its total log-probability (nats).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub sequence: Sequence,
    pub log_prob: f64,
}

pub const DEFAULT_BEAM_WIDTH: usize = 5;
pub const DEFAULT_DIVERSE_GROUPS: usize = 5;
pub const DEFAULT_DIVERSITY_PENALTY: f64 = 0.7;
pub const DEFAULT_TOP_K: usize = 30;
pub const DEFAULT_NUCLEUS_P: f64 = 0.85;
pub const DEFAULT_MBR_SAMPLES: usize = 32;
/// Highest n-gram order of the MBR overlap utility.
pub const DEFAULT_MBR_MAX_N: usize = 4;

/// Strategy names accepted on the command line and in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Greedy,
    Beam,
    DiverseBeam,
    Ancestral,
    TopK,
    Nucleus,
    Mbr,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 7] = [
        StrategyKind::Greedy,
        StrategyKind::Beam,
        StrategyKind::DiverseBeam,
        StrategyKind::Ancestral,
        StrategyKind::TopK,
        StrategyKind::Nucleus,
        StrategyKind::Mbr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Greedy => "greedy",
            StrategyKind::Beam => "beam",
            StrategyKind::DiverseBeam => "diverse_beam",
            StrategyKind::Ancestral => "ancestral",
            StrategyKind::TopK => "top_k",
            StrategyKind::Nucleus => "nucleus",
            StrategyKind::Mbr => "mbr",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s.replace('-', "_"))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown decoding strategy {s:?}")))
    }
}

/// A fully parameterized decoding strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum DecodeConfig {
    Greedy,
    Beam { k: usize },
    DiverseBeam { k: usize, groups: usize, lambda: f64 },
    Ancestral { seed: u64 },
    TopK { k: usize, seed: u64 },
    Nucleus { p: f64, seed: u64 },
    Mbr { samples: usize, max_n: usize, seed: u64 },
}

impl DecodeConfig {
    /// The strategy with its default hyperparameters.
    pub fn default_for(kind: StrategyKind, seed: u64) -> Self {
        match kind {
            StrategyKind::Greedy => DecodeConfig::Greedy,
            StrategyKind::Beam => DecodeConfig::Beam {
                k: DEFAULT_BEAM_WIDTH,
            },
            StrategyKind::DiverseBeam => DecodeConfig::DiverseBeam {
                k: DEFAULT_DIVERSE_GROUPS,
                groups: DEFAULT_DIVERSE_GROUPS,
                lambda: DEFAULT_DIVERSITY_PENALTY,
            },
            StrategyKind::Ancestral => DecodeConfig::Ancestral { seed },
            StrategyKind::TopK => DecodeConfig::TopK {
                k: DEFAULT_TOP_K,
                seed,
            },
            StrategyKind::Nucleus => DecodeConfig::Nucleus {
                p: DEFAULT_NUCLEUS_P,
                seed,
            },
            StrategyKind::Mbr => DecodeConfig::Mbr {
                samples: DEFAULT_MBR_SAMPLES,
                max_n: DEFAULT_MBR_MAX_N,
                seed,
            },
        }
    }

    /// The eight systems of the standard experiment: beam search appears at
    /// widths 5 and 10.
    pub fn standard_suite(seed: u64) -> Vec<(String, DecodeConfig)> {
        let mut out = Vec::new();
        for kind in StrategyKind::ALL {
            let config = DecodeConfig::default_for(kind, seed);
            if kind == StrategyKind::Beam {
                out.push(("beam_5".to_string(), DecodeConfig::Beam { k: 5 }));
                out.push(("beam_10".to_string(), DecodeConfig::Beam { k: 10 }));
            } else {
                out.push((kind.name().to_string(), config));
            }
        }
        out
    }

    pub fn kind(&self) -> StrategyKind {
        match self {
            DecodeConfig::Greedy => StrategyKind::Greedy,
            DecodeConfig::Beam { .. } => StrategyKind::Beam,
            DecodeConfig::DiverseBeam { .. } => StrategyKind::DiverseBeam,
            DecodeConfig::Ancestral { .. } => StrategyKind::Ancestral,
            DecodeConfig::TopK { .. } => StrategyKind::TopK,
            DecodeConfig::Nucleus { .. } => StrategyKind::Nucleus,
            DecodeConfig::Mbr { .. } => StrategyKind::Mbr,
        }
    }

    pub fn is_stochastic(&self) -> bool {
        self.seed().is_some()
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            DecodeConfig::Ancestral { seed }
            | DecodeConfig::TopK { seed, .. }
            | DecodeConfig::Nucleus { seed, .. }
            | DecodeConfig::Mbr { seed, .. } => Some(seed),
            _ => None,
        }
    }

    /// Replaces the seed of a stochastic strategy; no-op otherwise.
    pub fn with_seed(mut self, new_seed: u64) -> Self {
        match &mut self {
            DecodeConfig::Ancestral { seed }
            | DecodeConfig::TopK { seed, .. }
            | DecodeConfig::Nucleus { seed, .. }
            | DecodeConfig::Mbr { seed, .. } => *seed = new_seed,
            _ => {}
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            DecodeConfig::Beam { k } | DecodeConfig::TopK { k, .. } if k == 0 => {
                bad("k must be at least 1".into())
            }
            DecodeConfig::DiverseBeam { k, groups, lambda } => {
                if k == 0 || groups == 0 || groups > k || k % groups != 0 {
                    bad(format!("group count {groups} must divide beam width {k}"))
                } else if !(lambda >= 0.0 && lambda.is_finite()) {
                    bad(format!("diversity penalty must be non-negative, got {lambda}"))
                } else {
                    Ok(())
                }
            }
            DecodeConfig::Nucleus { p, .. } if !(p > 0.0 && p <= 1.0) => {
                bad(format!("nucleus mass must lie in (0, 1], got {p}"))
            }
            DecodeConfig::Mbr { samples, max_n, .. } if samples == 0 || max_n == 0 => {
                bad("MBR needs at least one sample and n-gram order at least 1".into())
            }
            _ => Ok(()),
        }
    }
}

/// Runs one strategy and returns its single output: the best hypothesis for
/// the searches, the draw for the samplers. `extras` joins the MBR candidate
/// set and is ignored by the other strategies.
pub fn decode<M: LanguageModel + ?Sized>(
    model: &M,
    config: &DecodeConfig,
    extras: &[Sequence],
) -> Result<Candidate> {
    config.validate()?;
    let first = |v: Vec<Candidate>| {
        v.into_iter()
            .next()
            .ok_or_else(|| Error::InvalidParameter("search returned no hypotheses".into()))
    };
    match *config {
        DecodeConfig::Greedy => Ok(greedy_decode(model)),
        DecodeConfig::Beam { k } => first(beam_search(model, k)?),
        DecodeConfig::DiverseBeam { k, groups, lambda } => {
            first(diverse_beam_search(model, k, groups, lambda)?)
        }
        DecodeConfig::Ancestral { seed } => Ok(ancestral_sample(model, seed)),
        DecodeConfig::TopK { k, seed } => top_k_sample(model, k, seed),
        DecodeConfig::Nucleus { p, seed } => nucleus_sample(model, p, seed),
        DecodeConfig::Mbr {
            samples,
            max_n,
            seed,
        } => mbr_decode(
            model,
            samples,
            seed,
            |a, b| utility_ngram_overlap(a, b, max_n),
            extras,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_names_round_trip() {
        for kind in StrategyKind::ALL {
            assert_eq!(kind.name().parse::<StrategyKind>().unwrap(), kind);
        }
        assert_eq!("top-k".parse::<StrategyKind>().unwrap(), StrategyKind::TopK);
        assert!("sampling".parse::<StrategyKind>().is_err());
    }

    #[test]
    fn validation() {
        assert!(DecodeConfig::Beam { k: 0 }.validate().is_err());
        let dbs = |k, groups, lambda| DecodeConfig::DiverseBeam { k, groups, lambda };
        assert!(dbs(6, 4, 0.7).validate().is_err());
        assert!(dbs(4, 8, 0.7).validate().is_err());
        assert!(dbs(6, 3, -0.1).validate().is_err());
        assert!(dbs(6, 3, 0.0).validate().is_ok());
        assert!(DecodeConfig::Nucleus { p: 0.0, seed: 0 }.validate().is_err());
        assert!(DecodeConfig::Nucleus { p: 1.0, seed: 0 }.validate().is_ok());
        assert!(DecodeConfig::Mbr { samples: 0, max_n: 2, seed: 0 }.validate().is_err());
    }

    #[test]
    fn standard_suite_hyperparameters() {
        let suite = DecodeConfig::standard_suite(1);
        let names: Vec<&str> = suite.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(
            names,
            ["greedy", "beam_5", "beam_10", "diverse_beam", "ancestral", "top_k", "nucleus", "mbr"]
        );
        assert!(suite.contains(&(
            "diverse_beam".into(),
            DecodeConfig::DiverseBeam { k: 5, groups: 5, lambda: 0.7 }
        )));
        assert!(suite.contains(&("top_k".into(), DecodeConfig::TopK { k: 30, seed: 1 })));
        assert!(suite.contains(&("nucleus".into(), DecodeConfig::Nucleus { p: 0.85, seed: 1 })));
        assert!(suite.contains(&(
            "mbr".into(),
            DecodeConfig::Mbr { samples: 32, max_n: 4, seed: 1 }
        )));
    }

    #[test]
    fn config_json_is_tagged() {
        let c = DecodeConfig::Nucleus { p: 0.85, seed: 3 };
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, r#"{"strategy":"nucleus","p":0.85,"seed":3}"#);
        assert_eq!(serde_json::from_str::<DecodeConfig>(&json).unwrap(), c);
    }
}
