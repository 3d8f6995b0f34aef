use std::collections::HashMap;

use crate::error::{Error, Result};

/// Index of a symbol in a task vocabulary.
pub type TokenId = usize;

/// A token list over a task vocabulary, beginning with START.
pub type TokenSequence = Vec<TokenId>;

/// Named symbols of a task, with reserved START and STOP ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    names: Vec<String>,
    index: HashMap<String, TokenId>,
    start: TokenId,
    stop: TokenId,
}

impl Vocab {
    pub fn new(names: Vec<String>, start: TokenId, stop: TokenId) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::invalid("vocabulary is empty"));
        }
        if start >= names.len() || stop >= names.len() || start == stop {
            return Err(Error::invalid(format!(
                "START ({start}) and STOP ({stop}) must be distinct ids below {}",
                names.len()
            )));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (id, name) in names.iter().enumerate() {
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(Error::invalid(format!("bad token name {name:?}")));
            }
            if index.insert(name.clone(), id).is_some() {
                return Err(Error::invalid(format!("duplicate token name {name:?}")));
            }
        }
        Ok(Vocab {
            names,
            index,
            start,
            stop,
        })
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn start(&self) -> TokenId {
        self.start
    }

    pub fn stop(&self) -> TokenId {
        self.stop
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: TokenId) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn id(&self, name: &str) -> Option<TokenId> {
        self.index.get(name).copied()
    }

    /// Space-separated rendering of a token sequence.
    pub fn render(&self, tokens: &[TokenId]) -> String {
        tokens
            .iter()
            .map(|&t| self.name(t).unwrap_or("?"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses space-separated token names.
    pub fn parse_line(&self, line: &str) -> Result<TokenSequence> {
        line.split_whitespace()
            .map(|w| {
                self.id(w)
                    .ok_or_else(|| Error::invalid(format!("unknown token {w:?}")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn start_stop_must_differ() {
        assert!(Vocab::new(names(&["a", "b"]), 0, 0).is_err());
        assert!(Vocab::new(names(&["a", "b"]), 0, 2).is_err());
        assert!(Vocab::new(names(&["a", "a"]), 0, 1).is_err());
        assert!(Vocab::new(names(&["a b", "c"]), 0, 1).is_err());
    }

    #[test]
    fn render_parse_roundtrip() {
        let v = Vocab::new(names(&["<s>", "</s>", "x"]), 0, 1).unwrap();
        let seq = vec![0, 2, 2, 1];
        assert_eq!(v.parse_line(&v.render(&seq)).unwrap(), seq);
        assert!(v.parse_line("<s> y").is_err());
    }
}
