use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LanguageModel, NextTokenDistribution, TokenId, Vocabulary};
use crate::error::{Error, Result};

/// Default add-α smoothing.
pub const DEFAULT_SMOOTHING: f64 = 0.1;

const EOS_KEY: &str = "<eos>";

#[derive(Debug, Clone)]
struct ContextCounts {
    counts: Vec<u64>,
    total: u64,
}

/// Character-level m-gram model with add-α smoothing.
///
/// The context of a prediction is the previous `order - 1` tokens, padded on
/// the left with BOS. Conditionals are
/// `(count + α) / (total + α·(|V| + 1))`, the denominator counting EOS as an
/// outcome. A context never seen in training falls back to the uniform
/// distribution; with `α = 0` such contexts are unreachable from the support.
#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    alpha: f64,
    max_length: usize,
    vocab: Vocabulary,
    contexts: HashMap<Vec<TokenId>, ContextCounts>,
}

/// Count-based maximum-likelihood training with add-α smoothing.
///
/// The vocabulary is the set of characters observed in `corpus`.
pub fn train_ngram<S: AsRef<str>>(
    corpus: &[S],
    order: usize,
    alpha: f64,
    max_length: usize,
) -> Result<NgramModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if order == 0 {
        return Err(Error::InvalidParameter("n-gram order must be at least 1".into()));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "smoothing must be a finite non-negative number, got {alpha}"
        )));
    }
    for (line, text) in corpus.iter().enumerate() {
        let length = text.as_ref().chars().count();
        if length > max_length {
            return Err(Error::LineTooLong {
                line,
                length,
                max: max_length,
            });
        }
    }
    let vocab = Vocabulary::from_corpus(corpus)?;
    let outcomes = vocab.outcomes();
    let mut contexts: HashMap<Vec<TokenId>, ContextCounts> = HashMap::new();
    for text in corpus {
        let interior = vocab.encode(text.as_ref())?;
        for t in 0..=interior.len() {
            let next = interior.get(t).copied().unwrap_or(vocab.eos_id());
            let key = context_key(&vocab, order, &interior[..t]);
            let entry = contexts.entry(key).or_insert_with(|| ContextCounts {
                counts: vec![0; outcomes],
                total: 0,
            });
            entry.counts[next as usize] += 1;
            entry.total += 1;
        }
    }
    Ok(NgramModel {
        order,
        alpha,
        max_length,
        vocab,
        contexts,
    })
}

fn context_key(vocab: &Vocabulary, order: usize, prefix: &[TokenId]) -> Vec<TokenId> {
    let width = order - 1;
    let mut key = Vec::with_capacity(width);
    let have = prefix.len().min(width);
    key.resize(width - have, vocab.bos_id());
    key.extend_from_slice(&prefix[prefix.len() - have..]);
    key
}

impl NgramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Raw count of `token` after the context implied by `prefix`.
    pub fn count(&self, prefix: &[TokenId], token: TokenId) -> u64 {
        self.contexts
            .get(&context_key(&self.vocab, self.order, prefix))
            .map_or(0, |c| c.counts[token as usize])
    }

    pub fn to_file(&self) -> NgramFile {
        let bos = self.vocab.bos_id();
        let counts = self
            .contexts
            .iter()
            .map(|(key, c)| {
                let ctx: Vec<TokenId> = key.iter().copied().filter(|&t| t != bos).collect();
                let row = c
                    .counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &n)| n > 0)
                    .map(|(t, &n)| (self.outcome_key(t as TokenId), n))
                    .collect();
                (self.vocab.decode(&ctx), row)
            })
            .collect();
        NgramFile {
            order: self.order,
            alpha: self.alpha,
            max_length: self.max_length,
            vocab: self.vocab.symbols().to_vec(),
            counts,
        }
    }

    fn outcome_key(&self, t: TokenId) -> String {
        if t == self.vocab.eos_id() {
            EOS_KEY.to_string()
        } else {
            self.vocab.decode(&[t])
        }
    }

    pub fn from_file(file: NgramFile) -> Result<Self> {
        if file.order == 0 {
            return Err(Error::ModelFormat("order must be at least 1".into()));
        }
        if !(file.alpha >= 0.0 && file.alpha.is_finite()) {
            return Err(Error::ModelFormat(format!("invalid alpha {}", file.alpha)));
        }
        let vocab = Vocabulary::new(file.vocab)?;
        let width = file.order - 1;
        let mut contexts = HashMap::with_capacity(file.counts.len());
        for (ctx, row) in file.counts {
            let ids = vocab.encode(&ctx)?;
            if ids.len() > width {
                return Err(Error::ModelFormat(format!(
                    "context {ctx:?} is longer than order - 1 = {width}"
                )));
            }
            let mut counts = vec![0; vocab.outcomes()];
            for (outcome, n) in row {
                let id = if outcome == EOS_KEY {
                    vocab.eos_id()
                } else {
                    match vocab.encode(&outcome)?.as_slice() {
                        [id] => *id,
                        _ => {
                            return Err(Error::ModelFormat(format!(
                                "outcome {outcome:?} is not a single symbol"
                            )))
                        }
                    }
                };
                counts[id as usize] = n;
            }
            let total = counts.iter().sum();
            let key = context_key(&vocab, file.order, &ids);
            if contexts.insert(key, ContextCounts { counts, total }).is_some() {
                return Err(Error::ModelFormat(format!("duplicate context {ctx:?}")));
            }
        }
        Ok(NgramModel {
            order: file.order,
            alpha: file.alpha,
            max_length: file.max_length,
            vocab,
            contexts,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(json)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&json)
    }
}

impl LanguageModel for NgramModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn max_length(&self) -> usize {
        self.max_length
    }

    fn conditional(&self, prefix: &[TokenId]) -> NextTokenDistribution {
        let outcomes = self.vocab.outcomes();
        match self.contexts.get(&context_key(&self.vocab, self.order, prefix)) {
            Some(c) if c.total as f64 + self.alpha * outcomes as f64 > 0.0 => {
                let denom = c.total as f64 + self.alpha * outcomes as f64;
                NextTokenDistribution::from_vec_unchecked(
                    c.counts
                        .iter()
                        .map(|&n| (n as f64 + self.alpha) / denom)
                        .collect(),
                )
            }
            _ => NextTokenDistribution::uniform(outcomes),
        }
    }
}

/// On-disk form of an [`NgramModel`].
///
/// Context strings omit BOS padding: a context shorter than `order - 1`
/// symbols is left-padded with BOS. The EOS outcome is keyed `"<eos>"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramFile {
    pub order: usize,
    pub alpha: f64,
    pub max_length: usize,
    pub vocab: Vec<String>,
    pub counts: BTreeMap<String, BTreeMap<String, u64>>,
}
