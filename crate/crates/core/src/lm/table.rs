use std::collections::HashMap;

use super::{LanguageModel, NextTokenDistribution, Sequence, TokenId, Vocabulary, DISTRIBUTION_TOLERANCE};
use crate::error::{Error, Result};

/// Model defined by an explicit probability for every string in its support.
///
/// Conditionals are ratios of prefix masses. Prefixes with zero mass are
/// outside the support and get the uniform distribution.
#[derive(Debug, Clone)]
pub struct TableModel {
    vocab: Vocabulary,
    max_length: usize,
    entries: Vec<(Sequence, f64)>,
    prefix_mass: HashMap<Vec<TokenId>, f64>,
    terminal_mass: HashMap<Vec<TokenId>, f64>,
}

impl TableModel {
    pub fn new(vocab: Vocabulary, entries: Vec<(Sequence, f64)>) -> Result<Self> {
        let mut total = 0.0;
        let mut max_length = 0;
        let mut prefix_mass: HashMap<Vec<TokenId>, f64> = HashMap::new();
        let mut terminal_mass: HashMap<Vec<TokenId>, f64> = HashMap::new();
        for (seq, p) in &entries {
            if !(p.is_finite() && *p >= 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "table probability {p} is not a finite non-negative number"
                )));
            }
            Sequence::new(&vocab, seq.interior().to_vec())?;
            if terminal_mass.insert(seq.interior().to_vec(), *p).is_some() {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate table entry {:?}",
                    seq.text(&vocab)
                )));
            }
            total += p;
            max_length = max_length.max(seq.len());
            for t in 0..=seq.len() {
                *prefix_mass.entry(seq.interior()[..t].to_vec()).or_insert(0.0) += p;
            }
        }
        if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "table probabilities sum to {total}"
            )));
        }
        Ok(TableModel {
            vocab,
            max_length,
            entries,
            prefix_mass,
            terminal_mass,
        })
    }

    /// Uniform distribution over the given strings.
    pub fn uniform(vocab: Vocabulary, strings: &[&str]) -> Result<Self> {
        let p = 1.0 / strings.len() as f64;
        let entries = strings
            .iter()
            .map(|s| Ok((Sequence::parse(&vocab, s)?, p)))
            .collect::<Result<_>>()?;
        Self::new(vocab, entries)
    }

    pub fn entries(&self) -> &[(Sequence, f64)] {
        &self.entries
    }
}

impl LanguageModel for TableModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn max_length(&self) -> usize {
        self.max_length
    }

    fn conditional(&self, prefix: &[TokenId]) -> NextTokenDistribution {
        let outcomes = self.vocab.outcomes();
        let mass = self.prefix_mass.get(prefix).copied().unwrap_or(0.0);
        if mass <= 0.0 {
            return NextTokenDistribution::uniform(outcomes);
        }
        let mut key = prefix.to_vec();
        let mut probs = Vec::with_capacity(outcomes);
        for t in 0..self.vocab.len() as TokenId {
            key.push(t);
            probs.push(self.prefix_mass.get(&key).copied().unwrap_or(0.0) / mass);
            key.pop();
        }
        probs.push(self.terminal_mass.get(prefix).copied().unwrap_or(0.0) / mass);
        NextTokenDistribution::from_vec_unchecked(probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::{enumerate_support, sequence_log_prob};

    #[test]
    fn reproduces_listed_probabilities() {
        let vocab = Vocabulary::new(["x", "y"]).unwrap();
        let entries = vec![
            (Sequence::parse(&vocab, "").unwrap(), 0.1),
            (Sequence::parse(&vocab, "x").unwrap(), 0.2),
            (Sequence::parse(&vocab, "xy").unwrap(), 0.3),
            (Sequence::parse(&vocab, "yyy").unwrap(), 0.4),
        ];
        let t = TableModel::new(vocab, entries.clone()).unwrap();
        assert_eq!(t.max_length(), 3);
        for (s, p) in &entries {
            assert!((sequence_log_prob(&t, s).unwrap() - p.ln()).abs() < 1e-12);
        }
        assert_eq!(enumerate_support(&t, 10).unwrap().len(), 4);
    }

    #[test]
    fn rejects_bad_tables() {
        let vocab = Vocabulary::new(["x"]).unwrap();
        let s = Sequence::parse(&vocab, "x").unwrap();
        assert!(TableModel::new(vocab.clone(), vec![(s.clone(), 0.5)]).is_err());
        assert!(TableModel::new(vocab.clone(), vec![(s.clone(), 0.5), (s, 0.5)]).is_err());
    }
}
