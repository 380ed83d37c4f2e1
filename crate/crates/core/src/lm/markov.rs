use std::collections::HashMap;

use super::{LanguageModel, NextTokenDistribution, TokenId, Vocabulary, DISTRIBUTION_TOLERANCE};
use crate::error::{Error, Result};

/// Fixed-length m-gram chain with explicit conditionals.
///
/// Each symbol depends on at most the previous `order - 1` symbols. Near the
/// start of a string the context is simply shorter, so the table holds one row
/// for every context of length `0..order-1`. EOS comes only at `length`.
#[derive(Debug, Clone)]
pub struct MarkovModel {
    vocab: Vocabulary,
    order: usize,
    length: usize,
    rows: HashMap<Vec<TokenId>, Vec<f64>>,
}

impl MarkovModel {
    /// `rows` maps each context to a distribution over the symbols (no EOS).
    pub fn new(
        vocab: Vocabulary,
        order: usize,
        length: usize,
        rows: impl IntoIterator<Item = (Vec<TokenId>, Vec<f64>)>,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter("chain order must be at least 1".into()));
        }
        let rows: HashMap<_, _> = rows.into_iter().collect();
        for (ctx, row) in &rows {
            if ctx.len() >= order || ctx.iter().any(|&t| t as usize >= vocab.len()) {
                return Err(Error::InvalidDistribution(format!("invalid context {ctx:?}")));
            }
            if row.len() != vocab.len() || row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::InvalidDistribution(format!(
                    "row for context {ctx:?} is not a distribution over the symbols"
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
                return Err(Error::InvalidDistribution(format!(
                    "row for context {ctx:?} sums to {total}"
                )));
            }
        }
        let expected: usize = (0..order as u32).map(|k| vocab.len().pow(k)).sum();
        if rows.len() != expected {
            return Err(Error::InvalidDistribution(format!(
                "order-{order} chain needs {expected} context rows, got {}",
                rows.len()
            )));
        }
        Ok(MarkovModel {
            vocab,
            order,
            length,
            rows,
        })
    }

    /// First-order chain: `initial[a]` for the first symbol, then
    /// `transition[a][b]` for `b` following `a`.
    pub fn bigram(
        vocab: Vocabulary,
        initial: Vec<f64>,
        transition: Vec<Vec<f64>>,
        length: usize,
    ) -> Result<Self> {
        let rows = std::iter::once((vec![], initial)).chain(
            transition
                .into_iter()
                .enumerate()
                .map(|(a, row)| (vec![a as TokenId], row)),
        );
        Self::new(vocab, 2, length, rows)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Same chain at a different length.
    pub fn with_length(&self, length: usize) -> Self {
        MarkovModel {
            length,
            ..self.clone()
        }
    }
}

impl LanguageModel for MarkovModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn max_length(&self) -> usize {
        self.length
    }

    fn conditional(&self, prefix: &[TokenId]) -> NextTokenDistribution {
        let width = prefix.len().min(self.order - 1);
        let mut probs = self.rows[&prefix[prefix.len() - width..]].clone();
        probs.push(0.0);
        NextTokenDistribution::from_vec_unchecked(probs)
    }
}
