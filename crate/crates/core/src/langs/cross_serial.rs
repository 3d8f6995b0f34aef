//! The cross-serial family `L_k = { aᵐ bⁿ cᵐ dⁿ | m + n < k }`.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::models::{TokenId, Vocab};

use super::{Labels, LabeledString};

pub const A: TokenId = 0;
pub const B: TokenId = 1;
pub const C: TokenId = 2;
pub const D: TokenId = 3;
pub const START: TokenId = 4;
pub const STOP: TokenId = 5;

/// Vocabulary size used by the cross-serial presets. Ids 6..10 are reserved
/// and never appear in data.
pub const VOCAB_SIZE: usize = 10;

pub fn vocab() -> Vocab {
    let mut names: Vec<String> = ["a", "b", "c", "d", "<s>", "</s>"]
        .map(String::from)
        .to_vec();
    names.extend((0..VOCAB_SIZE - 6).map(|i| format!("<u{i}>")));
    Vocab::new(names, START, STOP).expect("static vocabulary is valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrossSerialSpec {
    /// Strict upper bound on `m + n`.
    pub k: usize,
    /// Restrict sampling to `m ≥ 1` and `n ≥ 1`. Membership and the prefix
    /// oracle always use the full language.
    pub positive_only: bool,
}

impl CrossSerialSpec {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("cross-serial bound k must be at least 1"));
        }
        Ok(CrossSerialSpec {
            k,
            positive_only: false,
        })
    }

    /// All `(m, n)` with `m + n < k`, in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let lo = usize::from(self.positive_only);
        (lo..self.k)
            .flat_map(|m| (lo..self.k).map(move |n| (m, n)))
            .filter(|&(m, n)| m + n < self.k)
            .collect()
    }
}

/// `START aᵐ bⁿ cᵐ dⁿ STOP`.
pub fn cs_string(m: usize, n: usize) -> Vec<TokenId> {
    let mut t = Vec::with_capacity(2 * (m + n) + 2);
    t.push(START);
    t.extend(std::iter::repeat(A).take(m));
    t.extend(std::iter::repeat(B).take(n));
    t.extend(std::iter::repeat(C).take(m));
    t.extend(std::iter::repeat(D).take(n));
    t.push(STOP);
    t
}

/// Draws `(m, n)` uniformly from the language's pairs.
pub fn cs_sample<R: Rng + ?Sized>(spec: &CrossSerialSpec, rng: &mut R) -> Result<LabeledString> {
    let pairs = spec.pairs();
    if pairs.is_empty() {
        return Err(Error::invalid(format!(
            "no positive (m, n) pairs with m + n < {}",
            spec.k
        )));
    }
    let (m, n) = pairs[rng.gen_range(0..pairs.len())];
    Ok(LabeledString {
        tokens: cs_string(m, n),
        labels: Labels::CrossSerial { m, n },
    })
}

/// Counter automaton recognising prefixes of `START aᵐ bⁿ cᵐ dⁿ STOP`, `m+n<k`.
///
/// The phase order a → b → c → d is implied by the counters: `a` needs no
/// later symbol yet, `b` needs no `c`/`d`, `c` is bounded by the `a` count and
/// `d` may only start once every `c` is in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrossSerialState {
    k: usize,
    counts: [usize; 4],
    started: bool,
    finished: bool,
}

impl CrossSerialState {
    pub fn new(k: usize) -> Self {
        CrossSerialState {
            k,
            counts: [0; 4],
            started: false,
            finished: false,
        }
    }

    /// Whether appending `token` keeps the input a valid prefix.
    pub fn accepts(&self, token: TokenId) -> bool {
        let [a, b, c, d] = self.counts;
        if self.finished {
            return false;
        }
        if !self.started {
            return token == START;
        }
        match token {
            A => b == 0 && c == 0 && d == 0 && a + 1 < self.k,
            B => c == 0 && d == 0 && a + b + 1 < self.k,
            C => d == 0 && c < a,
            D => c == a && d < b,
            STOP => c == a && d == b,
            _ => false,
        }
    }

    /// Consumes `token`, failing if it cannot extend the current prefix.
    pub fn feed(&mut self, token: TokenId) -> Result<()> {
        if !self.accepts(token) {
            return Err(Error::invalid(format!(
                "token {token} does not continue a cross-serial prefix"
            )));
        }
        match token {
            START => self.started = true,
            STOP => self.finished = true,
            t => self.counts[t] += 1,
        }
        Ok(())
    }

    pub fn valid_next(&self) -> BTreeSet<TokenId> {
        (0..VOCAB_SIZE).filter(|&t| self.accepts(t)).collect()
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }
}

/// Tokens `σ` such that `prefix · σ` is a prefix of some member of `L_k`.
pub fn cs_valid_next(prefix: &[TokenId], k: usize) -> Result<BTreeSet<TokenId>> {
    if prefix.first() != Some(&START) {
        return Err(Error::invalid("prefix must begin with START"));
    }
    let mut state = CrossSerialState::new(k);
    for &t in prefix {
        state.feed(t)?;
    }
    Ok(state.valid_next())
}

/// Full-string correctness: `predictions[t]` is the model's guess for the
/// symbol after `gold[..=t]`; every guess through the STOP position must be a
/// valid continuation of the gold prefix.
pub fn cs_string_correct(predictions: &[TokenId], gold: &[TokenId], k: usize) -> Result<bool> {
    if gold.len() < 2 || predictions.len() != gold.len() - 1 {
        return Err(Error::invalid(format!(
            "expected {} predictions for a {}-token string, got {}",
            gold.len().saturating_sub(1),
            gold.len(),
            predictions.len()
        )));
    }
    if gold[0] != START {
        return Err(Error::invalid("gold string must begin with START"));
    }
    let mut state = CrossSerialState::new(k);
    state.feed(START)?;
    for (t, &pred) in predictions.iter().enumerate() {
        if !state.accepts(pred) {
            return Ok(false);
        }
        let next = gold[t + 1];
        state.feed(next)?;
        if next == STOP {
            break;
        }
    }
    Ok(true)
}
