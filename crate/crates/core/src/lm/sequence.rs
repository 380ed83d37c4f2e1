use serde::{Deserialize, Serialize};

use super::vocab::{TokenId, Vocabulary};
use crate::error::{Error, Result};

/// A BOS-initiated, EOS-terminated token string.
///
/// Only the interior tokens are stored; BOS and EOS are implied by the
/// vocabulary. Ordering is lexicographic over the interior token ids, which is
/// the tie-break order used by the decoders.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sequence {
    interior: Vec<TokenId>,
}

impl Sequence {
    /// Builds a sequence from interior token ids, rejecting BOS/EOS or
    /// out-of-range ids.
    pub fn new(vocab: &Vocabulary, interior: Vec<TokenId>) -> Result<Self> {
        if let Some(&bad) = interior.iter().find(|&&t| t as usize >= vocab.len()) {
            return Err(if bad == vocab.eos_id() || bad == vocab.bos_id() {
                Error::MalformedSequence(format!("reserved token {bad} in interior"))
            } else {
                Error::TokenOutOfRange(bad)
            });
        }
        Ok(Sequence { interior })
    }

    /// Builds a sequence from a full token list `[BOS, ..., EOS]`.
    pub fn from_tokens(vocab: &Vocabulary, tokens: &[TokenId]) -> Result<Self> {
        match tokens {
            [first, interior @ .., last] if *first == vocab.bos_id() && *last == vocab.eos_id() => {
                Self::new(vocab, interior.to_vec())
            }
            _ => Err(Error::MalformedSequence(
                "sequence must start with BOS and end with EOS".into(),
            )),
        }
    }

    pub fn parse(vocab: &Vocabulary, text: &str) -> Result<Self> {
        Ok(Sequence {
            interior: vocab.encode(text)?,
        })
    }

    pub(crate) fn from_interior_unchecked(interior: Vec<TokenId>) -> Self {
        Sequence { interior }
    }

    pub fn interior(&self) -> &[TokenId] {
        &self.interior
    }

    /// Interior length |y|.
    pub fn len(&self) -> usize {
        self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }

    /// Full token list including BOS and EOS.
    pub fn tokens(&self, vocab: &Vocabulary) -> Vec<TokenId> {
        let mut out = Vec::with_capacity(self.interior.len() + 2);
        out.push(vocab.bos_id());
        out.extend_from_slice(&self.interior);
        out.push(vocab.eos_id());
        out
    }

    pub fn text(&self, vocab: &Vocabulary) -> String {
        vocab.decode(&self.interior)
    }
}
