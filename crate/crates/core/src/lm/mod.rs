//! Sequences, the autoregressive model interface, and exact toy models.
//!
//! Every model bounds its support: once a prefix reaches the model's maximum
//! interior length `N`, the only continuation is EOS. This keeps entropy
//! finite and makes support enumeration terminate.

mod enumerate;
mod iid;
mod markov;
mod ngram;
mod prefixed;
mod sequence;
mod table;
mod vocab;

use std::sync::Arc;

pub use enumerate::{enumerate_support, for_each_sequence, sequence_log_prob};
pub use iid::IidModel;
pub use markov::MarkovModel;
pub use ngram::{train_ngram, NgramModel, DEFAULT_SMOOTHING};
pub use prefixed::PrefixedModel;
pub use sequence::Sequence;
pub use table::TableModel;
pub use vocab::{TokenId, Vocabulary};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a next-token distribution.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

/// Probabilities over every symbol followed by EOS (index `vocab.len()`).
#[derive(Debug, Clone, PartialEq)]
pub struct NextTokenDistribution {
    probs: Vec<f64>,
}

impl NextTokenDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "probability {p} is not a finite non-negative number"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(NextTokenDistribution { probs })
    }

    pub(crate) fn from_vec_unchecked(probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= DISTRIBUTION_TOLERANCE);
        NextTokenDistribution { probs }
    }

    /// One-hot on `token` among `outcomes` entries.
    pub fn point_mass(outcomes: usize, token: TokenId) -> Self {
        let mut probs = vec![0.0; outcomes];
        probs[token as usize] = 1.0;
        NextTokenDistribution { probs }
    }

    pub fn uniform(outcomes: usize) -> Self {
        NextTokenDistribution {
            probs: vec![1.0 / outcomes as f64; outcomes],
        }
    }

    pub fn prob(&self, token: TokenId) -> f64 {
        self.probs[token as usize]
    }

    pub fn eos(&self) -> f64 {
        *self.probs.last().unwrap()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Most probable outcome; ties go to the lowest token id.
    pub fn argmax(&self) -> TokenId {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best as TokenId
    }

    /// Outcomes with positive probability, ordered by descending probability
    /// with ties broken by lowest id.
    pub fn ranked(&self) -> Vec<TokenId> {
        let mut ids: Vec<TokenId> = (0..self.probs.len() as TokenId)
            .filter(|&t| self.probs[t as usize] > 0.0)
            .collect();
        ids.sort_by(|&a, &b| {
            self.probs[b as usize]
                .total_cmp(&self.probs[a as usize])
                .then(a.cmp(&b))
        });
        ids
    }
}

/// An autoregressive model over a bounded string space.
///
/// Implementations are immutable and deterministic: the same prefix always
/// yields the same distribution.
pub trait LanguageModel: Send + Sync {
    fn vocab(&self) -> &Vocabulary;

    /// Maximum interior length `N`.
    fn max_length(&self) -> usize;

    /// Distribution over the next token given the interior prefix (BOS is
    /// implied). Only called with `prefix.len() < max_length()`.
    fn conditional(&self, prefix: &[TokenId]) -> NextTokenDistribution;

    /// `conditional`, with EOS forced once the prefix reaches `max_length()`.
    fn next(&self, prefix: &[TokenId]) -> NextTokenDistribution {
        if prefix.len() >= self.max_length() {
            NextTokenDistribution::point_mass(self.vocab().outcomes(), self.vocab().eos_id())
        } else {
            self.conditional(prefix)
        }
    }
}

impl<T: LanguageModel + ?Sized> LanguageModel for &T {
    fn vocab(&self) -> &Vocabulary {
        (**self).vocab()
    }
    fn max_length(&self) -> usize {
        (**self).max_length()
    }
    fn conditional(&self, prefix: &[TokenId]) -> NextTokenDistribution {
        (**self).conditional(prefix)
    }
}

impl<T: LanguageModel + ?Sized> LanguageModel for Arc<T> {
    fn vocab(&self) -> &Vocabulary {
        (**self).vocab()
    }
    fn max_length(&self) -> usize {
        (**self).max_length()
    }
    fn conditional(&self, prefix: &[TokenId]) -> NextTokenDistribution {
        (**self).conditional(prefix)
    }
}

impl<T: LanguageModel + ?Sized> LanguageModel for Box<T> {
    fn vocab(&self) -> &Vocabulary {
        (**self).vocab()
    }
    fn max_length(&self) -> usize {
        (**self).max_length()
    }
    fn conditional(&self, prefix: &[TokenId]) -> NextTokenDistribution {
        (**self).conditional(prefix)
    }
}

/// Checks that `y` is a valid string for `model`.
pub fn validate_sequence<M: LanguageModel + ?Sized>(model: &M, y: &Sequence) -> Result<()> {
    let vocab = model.vocab();
    if let Some(&bad) = y.interior().iter().find(|&&t| t as usize >= vocab.len()) {
        return Err(Error::TokenOutOfRange(bad));
    }
    if y.len() > model.max_length() {
        return Err(Error::SequenceTooLong {
            length: y.len(),
            max: model.max_length(),
        });
    }
    Ok(())
}
