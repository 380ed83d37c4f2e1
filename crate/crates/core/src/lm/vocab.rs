use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a token. Symbols occupy `0..len`, followed by EOS and BOS.
pub type TokenId = u32;

/// Character-level vocabulary.
///
/// Every symbol is a single unicode scalar value. The end-of-sequence id is
/// `len()` and the beginning-of-sequence id is `len() + 1`, so neither can
/// collide with a symbol index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    symbols: Vec<String>,
    index: HashMap<char, TokenId>,
}

impl Vocabulary {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidVocabulary("vocabulary is empty".into()));
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            let mut chars = s.chars();
            let c = match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => {
                    return Err(Error::InvalidVocabulary(format!(
                        "symbol {s:?} is not a single character"
                    )))
                }
            };
            if index.insert(c, i as TokenId).is_some() {
                return Err(Error::InvalidVocabulary(format!("duplicate symbol {s:?}")));
            }
        }
        Ok(Vocabulary { symbols, index })
    }

    /// Vocabulary of the distinct characters in `lines`, in codepoint order.
    pub fn from_corpus<S: AsRef<str>>(lines: &[S]) -> Result<Self> {
        let mut chars: Vec<char> = lines.iter().flat_map(|l| l.as_ref().chars()).collect();
        chars.sort_unstable();
        chars.dedup();
        Self::new(chars.into_iter().map(String::from))
    }

    /// Number of symbols, excluding BOS and EOS.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn eos_id(&self) -> TokenId {
        self.symbols.len() as TokenId
    }

    pub fn bos_id(&self) -> TokenId {
        self.symbols.len() as TokenId + 1
    }

    /// Size of a next-token distribution: every symbol plus EOS.
    pub fn outcomes(&self) -> usize {
        self.symbols.len() + 1
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, id: TokenId) -> Option<&str> {
        self.symbols.get(id as usize).map(String::as_str)
    }

    pub fn id_of(&self, c: char) -> Option<TokenId> {
        self.index.get(&c).copied()
    }

    pub fn encode(&self, text: &str) -> Result<Vec<TokenId>> {
        text.chars()
            .map(|c| self.id_of(c).ok_or_else(|| Error::UnknownSymbol(c.to_string())))
            .collect()
    }

    /// Renders interior tokens as text. Panics on ids outside the symbol range.
    pub fn decode(&self, tokens: &[TokenId]) -> String {
        tokens
            .iter()
            .map(|&t| self.symbols[t as usize].as_str())
            .collect()
    }

    /// Name used for a distribution outcome in files and reports.
    pub fn outcome_name(&self, id: TokenId) -> &str {
        if id == self.eos_id() {
            "<eos>"
        } else if id == self.bos_id() {
            "<bos>"
        } else {
            &self.symbols[id as usize]
        }
    }
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = Error;

    fn try_from(symbols: Vec<String>) -> Result<Self> {
        Vocabulary::new(symbols)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.symbols
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserved_ids_follow_symbols() {
        let v = Vocabulary::new(["a", "b", "c"]).unwrap();
        assert_eq!(v.eos_id(), 3);
        assert_eq!(v.bos_id(), 4);
        assert_eq!(v.outcomes(), 4);
        assert_eq!(v.outcome_name(3), "<eos>");
    }

    #[test]
    fn rejects_duplicates_and_multichar_symbols() {
        assert!(Vocabulary::new(["a", "a"]).is_err());
        assert!(Vocabulary::new(["ab"]).is_err());
        assert!(Vocabulary::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn corpus_vocabulary_is_sorted_and_distinct() {
        let v = Vocabulary::from_corpus(&["cab", "bca"]).unwrap();
        assert_eq!(v.symbols(), ["a", "b", "c"]);
        assert_eq!(v.encode("cab").unwrap(), vec![2, 0, 1]);
        assert_eq!(v.decode(&[2, 0, 1]), "cab");
        assert!(matches!(v.encode("x"), Err(Error::UnknownSymbol(_))));
    }
}
