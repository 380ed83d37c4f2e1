use super::{LanguageModel, NextTokenDistribution, TokenId, Vocabulary};
use crate::error::{Error, Result};

/// Conditional model `q(· | x)` for a prompt prefix `x`.
///
/// Generates the continuation after `x` under `base`. The continuation's
/// maximum length is what remains of the base model's budget.
#[derive(Debug, Clone)]
pub struct PrefixedModel<M> {
    base: M,
    prompt: Vec<TokenId>,
}

impl<M: LanguageModel> PrefixedModel<M> {
    pub fn new(base: M, prompt: Vec<TokenId>) -> Result<Self> {
        if let Some(&bad) = prompt.iter().find(|&&t| t as usize >= base.vocab().len()) {
            return Err(Error::TokenOutOfRange(bad));
        }
        if prompt.len() > base.max_length() {
            return Err(Error::SequenceTooLong {
                length: prompt.len(),
                max: base.max_length(),
            });
        }
        Ok(PrefixedModel { base, prompt })
    }

    pub fn from_text(base: M, prompt: &str) -> Result<Self> {
        let ids = base.vocab().encode(prompt)?;
        Self::new(base, ids)
    }

    pub fn prompt(&self) -> &[TokenId] {
        &self.prompt
    }

    pub fn base(&self) -> &M {
        &self.base
    }
}

impl<M: LanguageModel> LanguageModel for PrefixedModel<M> {
    fn vocab(&self) -> &Vocabulary {
        self.base.vocab()
    }

    fn max_length(&self) -> usize {
        self.base.max_length() - self.prompt.len()
    }

    fn conditional(&self, prefix: &[TokenId]) -> NextTokenDistribution {
        let mut full = Vec::with_capacity(self.prompt.len() + prefix.len());
        full.extend_from_slice(&self.prompt);
        full.extend_from_slice(prefix);
        self.base.next(&full)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::{sequence_log_prob, train_ngram, Sequence};

    #[test]
    fn continuation_probability_is_conditional_on_prompt() {
        let m = train_ngram(&["abc", "abd", "xyz"], 2, 0.0, 5).unwrap();
        let q = PrefixedModel::from_text(&m, "ab").unwrap();
        assert_eq!(q.max_length(), 3);
        let c = Sequence::parse(q.vocab(), "c").unwrap();
        assert!((sequence_log_prob(&q, &c).unwrap() - 0.5f64.ln()).abs() < 1e-12);
        assert!(PrefixedModel::from_text(&m, "abcdef").is_err());
    }
}
