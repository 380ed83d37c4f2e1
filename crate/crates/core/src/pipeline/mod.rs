//! Experiment orchestration: train a model, decode every prompt with every
//! system, and score the outputs against per-context entropy estimates.
//!
//! Each context gets its own seed `derive_seed(master, ordinal)`; within a
//! context the entropy samples use sub-seed 0, the chance baseline sub-seed
//! 1 (when it is drawn separately), and system `j` sub-seed `2 + j`. Contexts
//! run in parallel and are assembled by ordinal, so the report does not
//! depend on scheduling.

mod config;
mod ratings;
mod report;

use std::path::Path;

use rayon::prelude::*;

pub use config::{
    BandMeasure, ExperimentConfig, Hyperparameters, SystemSpec, DEFAULT_CONTEXT_CHARS,
    DEFAULT_MAX_LENGTH, DEFAULT_NORMALIZED_BIN_WIDTH, DEFAULT_ORDER, DEFAULT_TOTAL_BIN_WIDTH,
    REFERENCE_SYSTEM,
};
pub use ratings::{
    competition_ranks, join_ratings, parse_ratings, read_ratings, score_table, RatingsRecord,
    AGGREGATION_NOTE, MAX_SCORE, RATED_TOP_K,
};
pub use report::{
    emit_report, measure_value, Bin, ContextRatings, ContextReport, DeviationSummary, Histogram,
    RatingsAnalysis, Report, ReportFormat, ReportSettings, ScoreBin, ScoreTable, SystemHistograms,
    SystemOutput, SystemScore, TestOutcome, NORMALIZATION_NOTE, SCHEMA_VERSION,
};

use crate::decoding::{decode, Candidate, DecodeConfig};
use crate::error::{Error, Result};
use crate::information::{
    information_content, normalize_information, sample_information_lengths, EntropyEstimate,
};
use crate::lm::{train_ngram, LanguageModel, NgramModel, PrefixedModel, Sequence};
use crate::rng::derive_seed;
use crate::stats::classify;

/// Non-blank lines of a text file, without line terminators.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect())
}

/// Identifier of the context with the given ordinal.
pub fn context_id(ordinal: usize) -> String {
    format!("c{ordinal:04}")
}

/// A prompt and the human continuation it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub prompt: String,
    pub reference: String,
}

/// Splits each line after its first `chars` characters. Lines shorter than
/// that are skipped.
pub fn prompts_from_lines<S: AsRef<str>>(lines: &[S], chars: usize, limit: Option<usize>) -> Vec<Prompt> {
    lines
        .iter()
        .filter_map(|l| {
            let l = l.as_ref();
            let cut = l.char_indices().nth(chars).map_or(l.len(), |(i, _)| i);
            (l.chars().count() >= chars).then(|| Prompt {
                prompt: l[..cut].to_string(),
                reference: l[cut..].to_string(),
            })
        })
        .take(limit.unwrap_or(usize::MAX))
        .collect()
}

/// Trains (or loads) the model named by `config`.
pub fn load_or_train(config: &ExperimentConfig) -> Result<NgramModel> {
    match &config.model {
        Some(path) => NgramModel::load(path),
        None => {
            let corpus = read_lines(&config.corpus)?;
            train_ngram(&corpus, config.order, config.alpha, config.max_length)
        }
    }
}

/// Runs the full experiment described by `config`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let model = load_or_train(config)?;
    let lines = match &config.heldout {
        Some(path) => read_lines(path)?,
        None => read_lines(&config.corpus)?,
    };
    let prompts = prompts_from_lines(&lines, config.context_chars, config.max_contexts);
    run_on_prompts(&model, &prompts, config)
}

/// Runs the experiment on an already built model and prompt list.
pub fn run_on_prompts<M: LanguageModel>(model: &M, prompts: &[Prompt], config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    if prompts.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no held-out line has at least {} characters to form a prompt",
            config.context_chars
        )));
    }
    let contexts = prompts
        .par_iter()
        .enumerate()
        .map(|(i, p)| run_context(model, i, p, config).map_err(|e| e.in_context(context_id(i))))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let system_names: Vec<&str> = config.systems.iter().map(|s| s.name.as_str()).collect();
    let mut histograms = Vec::new();
    let mut deviations = Vec::new();
    for name in system_names.iter().copied().chain([REFERENCE_SYSTEM]) {
        let outs: Vec<&SystemOutput> = contexts.iter().filter_map(|c| c.output(name)).collect();
        if name != REFERENCE_SYSTEM {
            histograms.push(system_histograms(name, &outs, config));
        }
        deviations.push(deviation_summary(name, &outs));
    }
    let all: Vec<&SystemOutput> = contexts
        .iter()
        .flat_map(|c| c.outputs.iter().filter(|o| o.system != REFERENCE_SYSTEM))
        .collect();
    histograms.push(system_histograms("all", &all, config));

    Ok(Report {
        schema_version: SCHEMA_VERSION,
        settings: ReportSettings {
            order: config.order,
            alpha: config.alpha,
            max_length: model.max_length(),
            context_chars: config.context_chars,
            entropy_samples: config.entropy_samples,
            chance_samples: config.chance_sample_count(),
            seed: config.seed,
            alpha_test: config.alpha_test,
            band_measure: config.band_measure,
            total_bin_width: config.total_bin_width,
            normalized_bin_width: config.normalized_bin_width,
            normalization: NORMALIZATION_NOTE.to_string(),
            systems: config.systems.clone(),
        },
        vocabulary: model.vocab().symbols().to_vec(),
        contexts,
        histograms,
        deviations,
        ratings: None,
    })
}

fn system_histograms(name: &str, outs: &[&SystemOutput], config: &ExperimentConfig) -> SystemHistograms {
    SystemHistograms {
        system: name.to_string(),
        total: Histogram::from_values(outs.iter().map(|o| o.profile.total), config.total_bin_width),
        normalized: Histogram::from_values(
            outs.iter().map(|o| o.profile.normalized),
            config.normalized_bin_width,
        ),
        deviation: Histogram::from_values(outs.iter().map(|o| o.deviation), config.total_bin_width),
    }
}

fn deviation_summary(name: &str, outs: &[&SystemOutput]) -> DeviationSummary {
    use crate::stats::Membership::*;
    let n = outs.len();
    let mean = |f: &dyn Fn(&SystemOutput) -> f64| {
        if n == 0 {
            0.0
        } else {
            outs.iter().map(|o| f(o)).sum::<f64>() / n as f64
        }
    };
    let count = |m| outs.iter().filter(|o| o.membership == m).count();
    DeviationSummary {
        system: name.to_string(),
        count: n,
        mean_deviation: mean(&|o| o.deviation),
        mean_abs_deviation: mean(&|o| o.deviation.abs()),
        inside: count(Inside),
        above: count(Above),
        below: count(Below),
    }
}

fn split_samples(draws: &[(f64, usize)]) -> (Vec<f64>, Vec<f64>) {
    draws
        .iter()
        .map(|&(info, len)| (info, normalize_information(info, len)))
        .unzip()
}

fn run_context<M: LanguageModel>(
    model: &M,
    ordinal: usize,
    prompt: &Prompt,
    config: &ExperimentConfig,
) -> Result<ContextReport> {
    let seed = derive_seed(config.seed, ordinal as u64);
    let conditional = PrefixedModel::from_text(model, &prompt.prompt)?;

    let draws = sample_information_lengths(&conditional, config.entropy_samples, derive_seed(seed, 0));
    let (totals, normalized) = split_samples(&draws);
    let estimate = EntropyEstimate::from_values(&totals)?;
    let normalized_estimate = EntropyEstimate::from_values(&normalized)?;
    let (chance_information, chance_normalized) = if config.chance_sample_count() == config.entropy_samples {
        (totals, normalized)
    } else {
        split_samples(&sample_information_lengths(
            &conditional,
            config.chance_sample_count(),
            derive_seed(seed, 1),
        ))
    };

    let reference = Sequence::parse(conditional.vocab(), &prompt.reference)?;
    let mut decoded: Vec<Option<Candidate>> = vec![None; config.systems.len()];
    // MBR runs last so the other systems' outputs can join its candidates.
    let order = (0..config.systems.len())
        .filter(|&j| !matches!(config.systems[j].config, DecodeConfig::Mbr { .. }))
        .chain((0..config.systems.len()).filter(|&j| matches!(config.systems[j].config, DecodeConfig::Mbr { .. })));
    for j in order {
        let spec = &config.systems[j];
        let extras: Vec<Sequence> = decoded.iter().flatten().map(|c| c.sequence.clone()).collect();
        let run = spec.config.with_seed(derive_seed(seed, 2 + j as u64));
        decoded[j] = Some(decode(&conditional, &run, &extras)?);
    }

    let mut outputs = Vec::with_capacity(config.systems.len() + 1);
    let strings = std::iter::once((REFERENCE_SYSTEM, reference)).chain(
        config
            .systems
            .iter()
            .zip(decoded)
            .map(|(s, c)| (s.name.as_str(), c.expect("every system ran").sequence)),
    );
    for (system, sequence) in strings {
        let profile = information_content(&conditional, &sequence)?;
        let (value, band) = match config.band_measure {
            BandMeasure::Total => (profile.total, &estimate),
            BandMeasure::Normalized => (profile.normalized, &normalized_estimate),
        };
        outputs.push(SystemOutput {
            system: system.to_string(),
            text: sequence.text(conditional.vocab()),
            membership: classify(value, band.mean, band.std_dev),
            deviation: profile.total - estimate.mean,
            normalized_deviation: profile.normalized - normalized_estimate.mean,
            profile,
        });
    }

    Ok(ContextReport {
        id: context_id(ordinal),
        ordinal,
        prompt: prompt.prompt.clone(),
        estimate,
        normalized_estimate,
        chance_information,
        chance_normalized,
        outputs,
    })
}
