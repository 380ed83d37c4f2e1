//! Experiment configuration: a flat `key = value` file.
//!
//! ```text
//! # comments start with '#'
//! corpus = train.txt
//! heldout = prompts.txt
//! order = 3
//! strategies = greedy, beam_5, beam_10, nucleus
//! ```
//!
//! Relative paths resolve against the directory of the config file.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decoding::{
    DecodeConfig, StrategyKind, DEFAULT_BEAM_WIDTH, DEFAULT_DIVERSE_GROUPS,
    DEFAULT_DIVERSITY_PENALTY, DEFAULT_MBR_MAX_N, DEFAULT_MBR_SAMPLES, DEFAULT_NUCLEUS_P,
    DEFAULT_TOP_K,
};
use crate::error::{Error, Result};
use crate::information::DEFAULT_ENTROPY_SAMPLES;
use crate::lm::DEFAULT_SMOOTHING;
use crate::stats::DEFAULT_ALPHA;

pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_MAX_LENGTH: usize = 40;
pub const DEFAULT_CONTEXT_CHARS: usize = 2;
pub const DEFAULT_TOTAL_BIN_WIDTH: f64 = 2.0;
pub const DEFAULT_NORMALIZED_BIN_WIDTH: f64 = 0.25;
/// Name of the human-written continuation in reports and ratings files.
pub const REFERENCE_SYSTEM: &str = "reference";

/// Which information value the band analyses use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandMeasure {
    /// `I(y)` against the estimate of `H`.
    #[default]
    Total,
    /// `I(y) / |y|` against the estimate of the same ratio over samples.
    Normalized,
}

impl FromStr for BandMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" => Ok(BandMeasure::Total),
            "normalized" => Ok(BandMeasure::Normalized),
            _ => Err(Error::InvalidParameter(format!(
                "band measure must be total or normalized, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for BandMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BandMeasure::Total => "total",
            BandMeasure::Normalized => "normalized",
        })
    }
}

/// A named decoding system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub name: String,
    pub config: DecodeConfig,
}

/// Hyperparameters shared by all systems of a kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    pub beam_width: usize,
    pub diverse_width: usize,
    pub diverse_groups: usize,
    pub diversity_penalty: f64,
    pub top_k: usize,
    pub top_p: f64,
    pub mbr_samples: usize,
    pub mbr_max_n: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            beam_width: DEFAULT_BEAM_WIDTH,
            diverse_width: DEFAULT_DIVERSE_GROUPS,
            diverse_groups: DEFAULT_DIVERSE_GROUPS,
            diversity_penalty: DEFAULT_DIVERSITY_PENALTY,
            top_k: DEFAULT_TOP_K,
            top_p: DEFAULT_NUCLEUS_P,
            mbr_samples: DEFAULT_MBR_SAMPLES,
            mbr_max_n: DEFAULT_MBR_MAX_N,
        }
    }
}

impl SystemSpec {
    /// Parses a system name: any strategy name, or `beam_<k>` for a beam of
    /// width `k`. The seed is a placeholder; runs derive their own.
    pub fn parse(name: &str, hp: &Hyperparameters) -> Result<Self> {
        let config = if let Some(k) = name.strip_prefix("beam_") {
            let k = k.parse().map_err(|_| {
                Error::InvalidParameter(format!("bad beam width in system name {name:?}"))
            })?;
            DecodeConfig::Beam { k }
        } else {
            match name.parse::<StrategyKind>()? {
                StrategyKind::Greedy => DecodeConfig::Greedy,
                StrategyKind::Beam => DecodeConfig::Beam { k: hp.beam_width },
                StrategyKind::DiverseBeam => DecodeConfig::DiverseBeam {
                    k: hp.diverse_width,
                    groups: hp.diverse_groups,
                    lambda: hp.diversity_penalty,
                },
                StrategyKind::Ancestral => DecodeConfig::Ancestral { seed: 0 },
                StrategyKind::TopK => DecodeConfig::TopK { k: hp.top_k, seed: 0 },
                StrategyKind::Nucleus => DecodeConfig::Nucleus { p: hp.top_p, seed: 0 },
                StrategyKind::Mbr => DecodeConfig::Mbr {
                    samples: hp.mbr_samples,
                    max_n: hp.mbr_max_n,
                    seed: 0,
                },
            }
        };
        config.validate()?;
        Ok(SystemSpec {
            name: name.replace('-', "_"),
            config,
        })
    }

    /// The eight systems of the standard experiment.
    pub fn standard_suite() -> Vec<SystemSpec> {
        DecodeConfig::standard_suite(0)
            .into_iter()
            .map(|(name, config)| SystemSpec { name, config })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Training corpus, one string per line.
    pub corpus: PathBuf,
    /// Lines whose prefixes become prompts; the training corpus if absent.
    pub heldout: Option<PathBuf>,
    /// Saved model to load instead of training.
    pub model: Option<PathBuf>,
    pub order: usize,
    pub alpha: f64,
    pub max_length: usize,
    /// Prompt length in characters.
    pub context_chars: usize,
    pub max_contexts: Option<usize>,
    pub systems: Vec<SystemSpec>,
    /// Samples per context for the entropy estimate.
    pub entropy_samples: usize,
    /// Samples per context for the chance baseline of the band test;
    /// `None` reuses the entropy samples.
    pub chance_samples: Option<usize>,
    pub seed: u64,
    pub alpha_test: f64,
    pub band_measure: BandMeasure,
    pub total_bin_width: f64,
    pub normalized_bin_width: f64,
    /// Where `analyze` writes the JSON report, if set.
    pub report: Option<PathBuf>,
    /// Where `analyze` writes the CSV bundle, if set.
    pub csv_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for everything but the corpus.
    pub fn new(corpus: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            corpus: corpus.into(),
            heldout: None,
            model: None,
            order: DEFAULT_ORDER,
            alpha: DEFAULT_SMOOTHING,
            max_length: DEFAULT_MAX_LENGTH,
            context_chars: DEFAULT_CONTEXT_CHARS,
            max_contexts: None,
            systems: SystemSpec::standard_suite(),
            entropy_samples: DEFAULT_ENTROPY_SAMPLES,
            chance_samples: None,
            seed: 0,
            alpha_test: DEFAULT_ALPHA,
            band_measure: BandMeasure::Total,
            total_bin_width: DEFAULT_TOTAL_BIN_WIDTH,
            normalized_bin_width: DEFAULT_NORMALIZED_BIN_WIDTH,
            report: None,
            csv_dir: None,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base, &path.display().to_string())
    }

    /// Parses config text; `origin` names the source in error messages.
    pub fn parse(text: &str, base: &Path, origin: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let mut corpus = None;
        let mut cfg = ExperimentConfig::new("");
        let mut hp = Hyperparameters::default();
        let mut strategies: Option<Vec<String>> = None;
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(line_no, format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(err(line_no, format!("duplicate key {key:?}")));
            }
            let num = |what: &str| err(line_no, format!("{key}: expected {what}, got {value:?}"));
            let path = || base.join(value);
            match key {
                "corpus" => corpus = Some(path()),
                "heldout" => cfg.heldout = Some(path()),
                "model" => cfg.model = Some(path()),
                "report" => cfg.report = Some(path()),
                "csv_dir" => cfg.csv_dir = Some(path()),
                "order" => cfg.order = value.parse().map_err(|_| num("an integer"))?,
                "alpha" => cfg.alpha = value.parse().map_err(|_| num("a number"))?,
                "max_length" => cfg.max_length = value.parse().map_err(|_| num("an integer"))?,
                "context_chars" => cfg.context_chars = value.parse().map_err(|_| num("an integer"))?,
                "max_contexts" => cfg.max_contexts = Some(value.parse().map_err(|_| num("an integer"))?),
                "entropy_samples" => cfg.entropy_samples = value.parse().map_err(|_| num("an integer"))?,
                "chance_samples" => cfg.chance_samples = Some(value.parse().map_err(|_| num("an integer"))?),
                "seed" => cfg.seed = value.parse().map_err(|_| num("an unsigned integer"))?,
                "alpha_test" => cfg.alpha_test = value.parse().map_err(|_| num("a number"))?,
                "band_measure" => cfg.band_measure = value.parse().map_err(|e: Error| err(line_no, e.to_string()))?,
                "total_bin_width" => cfg.total_bin_width = value.parse().map_err(|_| num("a number"))?,
                "normalized_bin_width" => cfg.normalized_bin_width = value.parse().map_err(|_| num("a number"))?,
                "beam_width" => hp.beam_width = value.parse().map_err(|_| num("an integer"))?,
                "diverse_width" => hp.diverse_width = value.parse().map_err(|_| num("an integer"))?,
                "diverse_groups" => hp.diverse_groups = value.parse().map_err(|_| num("an integer"))?,
                "diversity_penalty" => hp.diversity_penalty = value.parse().map_err(|_| num("a number"))?,
                "top_k" => hp.top_k = value.parse().map_err(|_| num("an integer"))?,
                "top_p" => hp.top_p = value.parse().map_err(|_| num("a number"))?,
                "mbr_samples" => hp.mbr_samples = value.parse().map_err(|_| num("an integer"))?,
                "mbr_max_n" => hp.mbr_max_n = value.parse().map_err(|_| num("an integer"))?,
                "strategies" => {
                    strategies = Some(
                        value
                            .split(',')
                            .map(|s| s.trim().to_string())
                            .filter(|s| !s.is_empty())
                            .collect(),
                    )
                }
                _ => return Err(err(line_no, format!("unknown key {key:?}"))),
            }
        }
        cfg.corpus = corpus.ok_or_else(|| err(0, "missing required key \"corpus\"".into()))?;
        if let Some(names) = strategies {
            cfg.systems = names
                .iter()
                .map(|n| SystemSpec::parse(n, &hp))
                .collect::<Result<_>>()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.entropy_samples == 0 || self.chance_samples == Some(0) {
            return bad("sample counts must be at least 1".into());
        }
        if !(self.alpha_test > 0.0 && self.alpha_test < 1.0) {
            return bad(format!("test level must lie in (0, 1), got {}", self.alpha_test));
        }
        if !(self.total_bin_width > 0.0 && self.normalized_bin_width > 0.0) {
            return bad("histogram bin widths must be positive".into());
        }
        if self.context_chars > self.max_length {
            return bad(format!(
                "prompt length {} exceeds the maximum length {}",
                self.context_chars, self.max_length
            ));
        }
        let mut names = HashSet::new();
        for s in &self.systems {
            if s.name == REFERENCE_SYSTEM {
                return bad(format!("system name {REFERENCE_SYSTEM:?} is reserved"));
            }
            if !names.insert(&s.name) {
                return bad(format!("duplicate system name {:?}", s.name));
            }
            s.config.validate()?;
        }
        Ok(())
    }

    /// Samples per context for the chance baseline.
    pub fn chance_sample_count(&self) -> usize {
        self.chance_samples.unwrap_or(self.entropy_samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_resolves_paths() {
        let text = "# demo\ncorpus = train.txt\nheldout = dev.txt  # trailing\norder = 2\nalpha = 0.5\n\
                    strategies = greedy, beam_3, top-k, mbr\ntop_k = 4\nmbr_samples = 8\nseed = 11\nband_measure = normalized\n";
        let cfg = ExperimentConfig::parse(text, Path::new("/data"), "x.cfg").unwrap();
        assert_eq!(cfg.corpus, PathBuf::from("/data/train.txt"));
        assert_eq!(cfg.heldout, Some(PathBuf::from("/data/dev.txt")));
        assert_eq!((cfg.order, cfg.alpha, cfg.seed), (2, 0.5, 11));
        assert_eq!(cfg.band_measure, BandMeasure::Normalized);
        let names: Vec<&str> = cfg.systems.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["greedy", "beam_3", "top_k", "mbr"]);
        assert_eq!(cfg.systems[1].config, DecodeConfig::Beam { k: 3 });
        assert_eq!(cfg.systems[2].config, DecodeConfig::TopK { k: 4, seed: 0 });
        assert_eq!(cfg.systems[3].config, DecodeConfig::Mbr { samples: 8, max_n: 4, seed: 0 });
        assert_eq!(cfg.chance_sample_count(), 100);
    }

    #[test]
    fn defaults_use_standard_suite() {
        let cfg = ExperimentConfig::parse("corpus = c.txt", Path::new(""), "x").unwrap();
        assert_eq!(cfg.systems.len(), 8);
        assert_eq!(cfg.context_chars, 2);
        assert_eq!(cfg.total_bin_width, 2.0);
        assert_eq!(cfg.normalized_bin_width, 0.25);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = ExperimentConfig::parse("corpus = a\nbogus = 1\n", Path::new(""), "x.cfg").unwrap_err();
        assert_eq!(e.to_string(), "x.cfg:2: unknown key \"bogus\"");
        let e = ExperimentConfig::parse("corpus = a\norder = two\n", Path::new(""), "x.cfg").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        assert!(ExperimentConfig::parse("order = 2\n", Path::new(""), "x").is_err());
        assert!(ExperimentConfig::parse("corpus = a\ncorpus = b\n", Path::new(""), "x").is_err());
        assert!(ExperimentConfig::parse("corpus = a\nstrategies = greedy, greedy\n", Path::new(""), "x").is_err());
        assert!(ExperimentConfig::parse("corpus = a\nstrategies = sampling\n", Path::new(""), "x").is_err());
    }
}
