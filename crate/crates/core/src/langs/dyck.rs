//! Generalised Dyck language over several bracket types.
//!
//! With `p` bracket types, ids `0..p` are openers, `p..2p` the matching
//! closers (opener `i` closes with `p + i`), then START and STOP.

use rand::Rng;

use crate::error::{Error, Result};
use crate::models::{TokenId, Vocab};

use super::{CloseAnnotation, DyckLabels, Labels, LabeledString};

const OPEN_CHARS: [char; 5] = ['(', '[', '{', '<', '`'];
const CLOSE_CHARS: [char; 5] = [')', ']', '}', '>', '\''];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyckSpec {
    /// Number of bracket types.
    pub pair_count: usize,
    /// Matching pairs per string (string length is twice this).
    pub pairs: usize,
}

impl DyckSpec {
    pub fn new(pair_count: usize, pairs: usize) -> Result<Self> {
        if pair_count == 0 || pairs == 0 {
            return Err(Error::invalid("Dyck spec needs at least one type and one pair"));
        }
        Ok(DyckSpec { pair_count, pairs })
    }

    pub fn vocab_size(&self) -> usize {
        2 * self.pair_count + 2
    }

    pub fn start(&self) -> TokenId {
        2 * self.pair_count
    }

    pub fn stop(&self) -> TokenId {
        2 * self.pair_count + 1
    }

    pub fn is_opener(&self, t: TokenId) -> bool {
        t < self.pair_count
    }

    pub fn is_closer(&self, t: TokenId) -> bool {
        (self.pair_count..2 * self.pair_count).contains(&t)
    }

    pub fn closer_of(&self, opener: TokenId) -> TokenId {
        opener + self.pair_count
    }

    /// Bracket type (0-based) of an opener or closer.
    pub fn kind(&self, t: TokenId) -> usize {
        t % self.pair_count
    }

    pub fn vocab(&self) -> Vocab {
        let mut names = Vec::with_capacity(self.vocab_size());
        for i in 0..self.pair_count {
            names.push(OPEN_CHARS.get(i).map_or(format!("o{i}"), |c| c.to_string()));
        }
        for i in 0..self.pair_count {
            names.push(CLOSE_CHARS.get(i).map_or(format!("c{i}"), |c| c.to_string()));
        }
        names.push("<s>".into());
        names.push("</s>".into());
        Vocab::new(names, self.start(), self.stop()).expect("generated vocabulary is valid")
    }

    /// Reads a compact bracket string such as `{([])}`. Only the five
    /// built-in bracket types have a character form.
    pub fn parse_brackets(&self, s: &str) -> Result<Vec<TokenId>> {
        s.chars()
            .map(|ch| {
                let pos = |set: &[char]| set.iter().position(|&c| c == ch);
                match (pos(&OPEN_CHARS), pos(&CLOSE_CHARS)) {
                    (Some(i), _) if i < self.pair_count => Ok(i),
                    (_, Some(i)) if i < self.pair_count => Ok(self.pair_count + i),
                    _ => Err(Error::invalid(format!("{ch:?} is not a bracket of this spec"))),
                }
            })
            .collect()
    }

    /// Brackets only, with START/STOP markers removed.
    fn brackets<'a>(&self, tokens: &'a [TokenId]) -> &'a [TokenId] {
        let mut s = tokens;
        if s.first() == Some(&self.start()) {
            s = &s[1..];
        }
        if s.last() == Some(&self.stop()) {
            s = &s[..s.len() - 1];
        }
        s
    }
}

/// Grid-walk sampler: from `(opens, closes)` an unconstrained step opens or
/// closes with probability ½ each; at the diagonal it must open, at the top
/// edge it must close. Opener types are uniform, closers match the stack top.
pub fn dyck_sample<R: Rng + ?Sized>(spec: &DyckSpec, rng: &mut R) -> LabeledString {
    let n = spec.pairs;
    let mut tokens = Vec::with_capacity(2 * n + 2);
    tokens.push(spec.start());
    let mut stack: Vec<TokenId> = Vec::with_capacity(n);
    let mut recorded = Vec::with_capacity(n);
    let (mut opens, mut closes) = (0, 0);
    while closes < n {
        let open = if closes == opens {
            true
        } else if opens == n {
            false
        } else {
            rng.gen_bool(0.5)
        };
        if open {
            let kind = rng.gen_range(0..spec.pair_count);
            stack.push(kind);
            tokens.push(kind);
            opens += 1;
        } else {
            let kind = stack.pop().expect("walk never closes past the diagonal");
            let closer = spec.closer_of(kind);
            recorded.push((tokens.len(), closer));
            tokens.push(closer);
            closes += 1;
        }
    }
    tokens.push(spec.stop());

    let depth = dyck_depth(spec, &tokens).expect("generated string is balanced");
    let closers = recorded
        .into_iter()
        .map(|(position, closer)| CloseAnnotation {
            position,
            closer,
            attractors: dyck_attractors(spec, &tokens, position)
                .expect("recorded position is a closer"),
        })
        .collect();
    LabeledString {
        tokens,
        labels: Labels::Dyck(DyckLabels { depth, closers }),
    }
}

/// Maximum stack height of a balanced bracket string (START/STOP ignored).
pub fn dyck_depth(spec: &DyckSpec, tokens: &[TokenId]) -> Result<usize> {
    let mut stack = Vec::new();
    let mut depth = 0;
    for &t in spec.brackets(tokens) {
        if spec.is_opener(t) {
            stack.push(t);
            depth = depth.max(stack.len());
        } else if spec.is_closer(t) {
            match stack.pop() {
                Some(o) if spec.closer_of(o) == t => {}
                _ => return Err(Error::invalid("unbalanced or mismatched bracket string")),
            }
        } else {
            return Err(Error::invalid(format!("token {t} is not a bracket")));
        }
    }
    if !stack.is_empty() {
        return Err(Error::invalid("unclosed brackets"));
    }
    Ok(depth)
}

/// Number of openers strictly inside the pair closed at `close_index` whose
/// type differs from that pair's type. Occurrences are counted, not types.
pub fn dyck_attractors(spec: &DyckSpec, tokens: &[TokenId], close_index: usize) -> Result<usize> {
    let closer = *tokens
        .get(close_index)
        .ok_or_else(|| Error::invalid("close index out of range"))?;
    if !spec.is_closer(closer) {
        return Err(Error::invalid(format!("position {close_index} is not a closer")));
    }
    // Walk left to the matching opener.
    let mut level = 0usize;
    let mut opener_at = None;
    for i in (0..close_index).rev() {
        let t = tokens[i];
        if spec.is_closer(t) {
            level += 1;
        } else if spec.is_opener(t) {
            if level == 0 {
                opener_at = Some(i);
                break;
            }
            level -= 1;
        }
    }
    let open = opener_at.ok_or_else(|| Error::invalid("closer has no matching opener"))?;
    if spec.closer_of(tokens[open]) != closer {
        return Err(Error::invalid("closer does not match its opener"));
    }
    let kind = spec.kind(closer);
    Ok(tokens[open + 1..close_index]
        .iter()
        .filter(|&&t| spec.is_opener(t) && spec.kind(t) != kind)
        .count())
}

/// The only correct closer after `prefix`: the match of the innermost open bracket.
pub fn dyck_closer_oracle(spec: &DyckSpec, prefix: &[TokenId]) -> Result<TokenId> {
    let mut stack = Vec::new();
    for (i, &t) in prefix.iter().enumerate() {
        if i == 0 && t == spec.start() {
            continue;
        }
        if spec.is_opener(t) {
            stack.push(t);
        } else if spec.is_closer(t) {
            match stack.pop() {
                Some(o) if spec.closer_of(o) == t => {}
                _ => return Err(Error::invalid("prefix closes a bracket that is not open")),
            }
        } else {
            return Err(Error::invalid(format!("token {t} is not a bracket")));
        }
    }
    stack
        .last()
        .map(|&o| spec.closer_of(o))
        .ok_or_else(|| Error::invalid("no open bracket to close"))
}
