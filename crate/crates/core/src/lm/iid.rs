use super::{LanguageModel, NextTokenDistribution, TokenId, Vocabulary, DISTRIBUTION_TOLERANCE};
use crate::error::{Error, Result};

/// Fixed-length i.i.d. process: `length` symbols drawn independently from one
/// categorical distribution, then EOS.
#[derive(Debug, Clone)]
pub struct IidModel {
    vocab: Vocabulary,
    probs: Vec<f64>,
    length: usize,
}

impl IidModel {
    pub fn new(vocab: Vocabulary, probs: Vec<f64>, length: usize) -> Result<Self> {
        if probs.len() != vocab.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} probabilities for {} symbols",
                probs.len(),
                vocab.len()
            )));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidDistribution(
                "symbol probabilities must be finite and non-negative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "symbol probabilities sum to {total}"
            )));
        }
        Ok(IidModel {
            vocab,
            probs,
            length,
        })
    }

    /// Biased coin over `{H, T}` with `P(H) = heads`.
    pub fn coin(heads: f64, length: usize) -> Result<Self> {
        Self::new(
            Vocabulary::new(["H", "T"])?,
            vec![heads, 1.0 - heads],
            length,
        )
    }

    /// Uniform distribution over `symbols` at every position.
    pub fn uniform(symbols: &[&str], length: usize) -> Result<Self> {
        let p = 1.0 / symbols.len() as f64;
        Self::new(
            Vocabulary::new(symbols.iter().copied())?,
            vec![p; symbols.len()],
            length,
        )
    }

    pub fn symbol_probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Entropy of a single symbol in nats.
    pub fn symbol_entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }

    /// Same process at a different length.
    pub fn with_length(&self, length: usize) -> Self {
        IidModel {
            length,
            ..self.clone()
        }
    }
}

impl LanguageModel for IidModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn max_length(&self) -> usize {
        self.length
    }

    fn conditional(&self, _prefix: &[TokenId]) -> NextTokenDistribution {
        let mut probs = self.probs.clone();
        probs.push(0.0);
        NextTokenDistribution::from_vec_unchecked(probs)
    }
}
