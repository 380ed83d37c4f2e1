//! Information content, exact entropy, and the Monte Carlo entropy estimator.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoding::{all_outcomes, sample_from};
use crate::error::{Error, Result};
use crate::lm::{for_each_sequence, validate_sequence, LanguageModel, Sequence};
use crate::rng::{derive_seed, seeded};

/// Number of Monte Carlo samples used per context by default.
pub const DEFAULT_ENTROPY_SAMPLES: usize = 100;

/// Information content of one string under a model, in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationProfile {
    pub sequence: Sequence,
    /// `I(y) = −log q(y)`, including the EOS step.
    pub total: f64,
    /// `−log q(y_t | y_<t)` for every step, EOS last.
    pub surprisals: Vec<f64>,
    /// `I(y) / |y|` over the interior length; for the empty string this is
    /// the EOS surprisal alone.
    pub normalized: f64,
}

impl InformationProfile {
    pub fn interior_length(&self) -> usize {
        self.sequence.len()
    }
}

pub fn information_content<M: LanguageModel + ?Sized>(
    model: &M,
    y: &Sequence,
) -> Result<InformationProfile> {
    validate_sequence(model, y)?;
    let interior = y.interior();
    let eos = model.vocab().eos_id();
    let surprisals: Vec<f64> = (0..=interior.len())
        .map(|t| {
            let next = interior.get(t).copied().unwrap_or(eos);
            0.0 - model.next(&interior[..t]).prob(next).ln()
        })
        .collect();
    // Summed in the same order as `sequence_log_prob` so the two agree bitwise.
    let total = 0.0 - surprisals.iter().fold(0.0, |acc, s| acc + -s);
    let normalized = normalize_information(total, interior.len());
    Ok(InformationProfile {
        sequence: y.clone(),
        total,
        surprisals,
        normalized,
    })
}

/// Entropy computed by summing over the whole support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactEntropy {
    /// `H = −Σ q(y) log q(y)` in nats.
    pub entropy: f64,
    /// `√(Σ q(y) (I(y) − H)²)`.
    pub std_dev: f64,
    pub support_size: usize,
    /// Total enumerated mass; 1 up to rounding.
    pub mass: f64,
}

pub fn exact_entropy<M: LanguageModel + ?Sized>(model: &M, cap: usize) -> Result<ExactEntropy> {
    // Weighted running mean and variance (West's algorithm).
    let mut mass = 0.0;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let support_size = for_each_sequence(model, cap, |_, lp| {
        let w = lp.exp();
        if w == 0.0 {
            return;
        }
        let info = -lp;
        mass += w;
        let delta = info - mean;
        mean += delta * w / mass;
        m2 += w * delta * (info - mean);
    })?;
    // `mean` is normalized by the enumerated mass; rescale so H is the plain sum.
    Ok(ExactEntropy {
        entropy: mean * mass,
        std_dev: (m2.max(0.0)).sqrt(),
        support_size,
        mass,
    })
}

/// Monte Carlo estimate of the entropy from `samples` independent strings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    /// Ĥ, the mean information content of the samples (nats).
    pub mean: f64,
    /// Sample standard deviation of the information values (Bessel-corrected;
    /// zero for a single sample).
    pub std_dev: f64,
    pub samples: usize,
    /// `std_dev / √samples`.
    pub std_error: f64,
}

impl EntropyEstimate {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "an entropy estimate needs at least one sample".into(),
            ));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std_dev = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Ok(EntropyEstimate {
            mean,
            std_dev,
            samples: values.len(),
            std_error: std_dev / n.sqrt(),
        })
    }
}

/// Draws `samples` ancestral strings and returns their information values.
pub fn sample_information<M: LanguageModel + ?Sized>(
    model: &M,
    samples: usize,
    seed: u64,
) -> Vec<f64> {
    sample_information_lengths(model, samples, seed)
        .into_iter()
        .map(|(info, _)| info)
        .collect()
}

/// Like [`sample_information`], paired with each draw's interior length.
/// The draws are the same for the same seed.
pub fn sample_information_lengths<M: LanguageModel + ?Sized>(
    model: &M,
    samples: usize,
    seed: u64,
) -> Vec<(f64, usize)> {
    let mut rng = seeded(seed);
    (0..samples)
        .map(|_| {
            let c = sample_from(model, &mut rng, all_outcomes);
            (0.0 - c.log_prob, c.sequence.len())
        })
        .collect()
}

/// `I / length`, or `I` itself for the empty string.
pub fn normalize_information(total: f64, length: usize) -> f64 {
    if length == 0 {
        total
    } else {
        total / length as f64
    }
}

/// Ĥ = mean of `−log q(y)` over `samples` ancestral draws.
pub fn mc_entropy<M: LanguageModel + ?Sized>(
    model: &M,
    samples: usize,
    seed: u64,
) -> Result<EntropyEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    EntropyEstimate::from_values(&sample_information(model, samples, seed))
}

/// Estimate plus the information values it was computed from.
pub fn mc_entropy_with_values<M: LanguageModel + ?Sized>(
    model: &M,
    samples: usize,
    seed: u64,
) -> Result<(EntropyEstimate, Vec<f64>)> {
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    let values = sample_information(model, samples, seed);
    Ok((EntropyEstimate::from_values(&values)?, values))
}

/// Per-context conditional entropy.
///
/// Context `i` is sampled with `derive_seed(seed, i)`, so results do not
/// depend on scheduling. A context whose factory fails gets its own error and
/// the sweep continues.
pub fn conditional_entropy_sweep<C, M, F>(
    factory: F,
    contexts: &[C],
    samples: usize,
    seed: u64,
) -> Result<Vec<Result<EntropyEstimate>>>
where
    C: Sync,
    M: LanguageModel,
    F: Fn(&C) -> Result<M> + Sync,
{
    if contexts.is_empty() {
        return Err(Error::InvalidParameter("no contexts to sweep".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    Ok(contexts
        .par_iter()
        .enumerate()
        .map(|(i, ctx)| {
            let model = factory(ctx)?;
            mc_entropy(&model, samples, derive_seed(seed, i as u64))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::{sequence_log_prob, train_ngram, IidModel, TableModel, Vocabulary};

    fn coin3() -> IidModel {
        IidModel::coin(0.6, 3).unwrap()
    }

    fn uniform_table() -> TableModel {
        TableModel::uniform(Vocabulary::new(["a", "b"]).unwrap(), &["a", "b", "ab", "ba"]).unwrap()
    }

    #[test]
    fn profile_of_coin_sequence() {
        let m = coin3();
        let y = Sequence::parse(m.vocab(), "HHT").unwrap();
        let p = information_content(&m, &y).unwrap();
        let expected = -(0.6f64 * 0.6 * 0.4).ln();
        assert!((p.total - expected).abs() < 1e-12);
        assert!((p.total - 1.9379).abs() < 1e-4);
        assert!((p.normalized - 0.6460).abs() < 1e-4);
        assert_eq!(p.surprisals.len(), 4);
        assert_eq!(p.surprisals[3], 0.0);
        assert!((p.surprisals.iter().sum::<f64>() - p.total).abs() < 1e-9);
        assert_eq!(p.total, -sequence_log_prob(&m, &y).unwrap());
    }

    #[test]
    fn uniform_table_member_carries_log4() {
        let t = uniform_table();
        let y = Sequence::parse(t.vocab(), "ba").unwrap();
        assert!((information_content(&t, &y).unwrap().total - 4f64.ln()).abs() < 1e-12);
        let e = exact_entropy(&t, 100).unwrap();
        assert!((e.entropy - 4f64.ln()).abs() < 1e-12);
        assert!(e.std_dev < 1e-7);
    }

    #[test]
    fn empty_string_normalizes_to_eos_surprisal() {
        let vocab = Vocabulary::new(["a"]).unwrap();
        let t = TableModel::new(
            vocab.clone(),
            vec![
                (Sequence::parse(&vocab, "").unwrap(), 0.25),
                (Sequence::parse(&vocab, "a").unwrap(), 0.75),
            ],
        )
        .unwrap();
        let p = information_content(&t, &Sequence::parse(&vocab, "").unwrap()).unwrap();
        assert!((p.normalized - 4f64.ln()).abs() < 1e-12);
        assert_eq!(p.normalized, p.total);
    }

    #[test]
    fn coin_entropy_is_additive() {
        let e = exact_entropy(&coin3(), 100).unwrap();
        let h1 = -(0.6f64 * 0.6f64.ln() + 0.4 * 0.4f64.ln());
        assert!((e.entropy - 3.0 * h1).abs() < 1e-9);
        assert!((e.entropy - 2.0190).abs() < 1e-4);
        let sigma = (3.0f64 * 0.24).sqrt() * (0.6f64.ln() - 0.4f64.ln()).abs();
        assert!((e.std_dev - sigma).abs() < 1e-9);
        assert_eq!(e.support_size, 8);
    }

    #[test]
    fn degenerate_model_has_zero_entropy() {
        let m = train_ngram(&["a"], 2, 0.0, 4).unwrap();
        let e = exact_entropy(&m, 10).unwrap();
        assert_eq!((e.entropy, e.std_dev), (0.0, 0.0));
        let mc = mc_entropy(&m, 50, 3).unwrap();
        assert_eq!((mc.mean, mc.std_dev), (0.0, 0.0));
    }

    #[test]
    fn single_sample_estimate_is_that_sample() {
        let m = coin3();
        let values = sample_information(&m, 1, 11);
        let e = mc_entropy(&m, 1, 11).unwrap();
        assert_eq!(e.mean, values[0]);
        assert_eq!(e.std_dev, 0.0);
        assert_eq!(e.samples, 1);
    }

    #[test]
    fn mc_estimate_tracks_exact_entropy() {
        let m = coin3();
        let e = mc_entropy(&m, 10_000, 5).unwrap();
        let exact = exact_entropy(&m, 100).unwrap().entropy;
        assert!((e.mean - exact).abs() < 3.0 * e.std_error, "{e:?} vs {exact}");
        assert_eq!(mc_entropy(&m, 10_000, 5).unwrap(), e);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(mc_entropy(&coin3(), 0, 1).is_err());
    }

    #[test]
    fn sweep_uses_distinct_seeds_and_reports_factory_errors() {
        let contexts = ["ok", "ok", "bad", "ok"];
        let out = conditional_entropy_sweep(
            |c: &&str| {
                if *c == "bad" {
                    Err(Error::InvalidParameter("bad context".into()))
                } else {
                    Ok(coin3())
                }
            },
            &contexts,
            2_000,
            9,
        )
        .unwrap();
        assert_eq!(out.len(), 4);
        assert!(out[2].is_err());
        let a = out[0].as_ref().unwrap();
        let b = out[1].as_ref().unwrap();
        assert_ne!(a.mean, b.mean);
        let combined = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() < 3.0 * combined);
    }

    #[test]
    fn single_context_sweep_matches_mc_entropy() {
        let out = conditional_entropy_sweep(|_: &()| Ok(coin3()), &[()], 500, 4).unwrap();
        let direct = mc_entropy(&coin3(), 500, derive_seed(4, 0)).unwrap();
        assert_eq!(*out[0].as_ref().unwrap(), direct);
    }
}
