//! Line-oriented text checkpoint.
//!
//! ```text
//! urnlab-checkpoint v1
//! arch urn
//! units 8
//! embed 0
//! tokens ( [ { < ` ) ] } > ' <s> </s>
//! start 10
//! stop 11
//! hyper lr 0.01
//! hyper seed 7
//! params 444
//! 3f847ae147ae147b
//! ...
//! end
//! ```
//!
//! Every parameter is stored as the 16-hex-digit IEEE-754 bit pattern of the
//! `f64`, one per line, in the model's flat layout, so a save/load cycle is
//! bit-exact. `hyper` lines carry free-form `key value` pairs (the value is
//! the rest of the line). The URN's initial state is fixed and not stored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::{count_params, Arch, LstmParams, Model, UrnParams, Vocab};

const MAGIC: &str = "urnlab-checkpoint v1";

/// A model with its vocabulary and the hyperparameters it was trained with.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub vocab: Vocab,
    pub hyper: Vec<(String, String)>,
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let m = &self.model;
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "arch {}", m.arch());
        let _ = writeln!(out, "units {}", m.units());
        let _ = writeln!(out, "embed {}", m.embed_size());
        let _ = writeln!(out, "tokens {}", self.vocab.names().join(" "));
        let _ = writeln!(out, "start {}", self.vocab.start());
        let _ = writeln!(out, "stop {}", self.vocab.stop());
        for (k, v) in &self.hyper {
            let _ = writeln!(out, "hyper {k} {v}");
        }
        let _ = writeln!(out, "params {}", m.params().len());
        for p in m.params() {
            let _ = writeln!(out, "{:016x}", p.to_bits());
        }
        out.push_str("end\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::parse(0, format!("unexpected end of file, wanted {what}")))
        };

        let (ln, magic) = next("header")?;
        if magic != MAGIC {
            return Err(Error::parse(ln, "not an urnlab checkpoint"));
        }
        let arch: Arch = field(next("arch")?, "arch")?
            .parse()
            .map_err(|e: Error| Error::parse(2, e.to_string()))?;
        let units = number(next("units")?, "units")?;
        let embed = number(next("embed")?, "embed")?;
        let (ln, tokens_line) = next("tokens")?;
        let names: Vec<String> = field((ln, tokens_line), "tokens")?
            .split_whitespace()
            .map(str::to_string)
            .collect();
        let start = number(next("start")?, "start")?;
        let stop = number(next("stop")?, "stop")?;
        let vocab = Vocab::new(names, start, stop).map_err(|e| Error::parse(ln, e.to_string()))?;

        let mut hyper = Vec::new();
        let declared = loop {
            let (ln, line) = next("params")?;
            if let Some(rest) = line.strip_prefix("hyper ") {
                let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
                if k.is_empty() {
                    return Err(Error::parse(ln, "empty hyperparameter key"));
                }
                hyper.push((k.to_string(), v.to_string()));
            } else {
                break number((ln, line), "params")?;
            }
        };

        // Check the declared size against the architecture and the input length
        // before allocating anything.
        let (v, n, e) = (vocab.size() as u128, units as u128, embed as u128);
        let expected = match arch {
            Arch::Urn => v * (n * n.saturating_sub(1) / 2) + v * n + v,
            Arch::Lstm => v * e + 4 * (n * (n + e) + n) + v * n + v,
        };
        if expected != declared as u128 {
            return Err(Error::parse(
                0,
                format!("declared {declared} parameters but the architecture has {expected}"),
            ));
        }
        if declared >= text.lines().count() {
            return Err(Error::parse(0, "file is shorter than its parameter count"));
        }

        let mut model = match arch {
            Arch::Urn => UrnParams::zeros(units, vocab.size()).map(Model::Urn),
            Arch::Lstm => LstmParams::zeros(units, embed, vocab.size()).map(Model::Lstm),
        }
        .map_err(|e| Error::parse(3, e.to_string()))?;
        debug_assert_eq!(count_params(&model), declared);
        for slot in model.params_mut() {
            let (ln, line) = next("parameter")?;
            if line.len() != 16 {
                return Err(Error::parse(ln, "parameter must be 16 hex digits"));
            }
            let bits = u64::from_str_radix(line, 16)
                .map_err(|e| Error::parse(ln, format!("bad parameter: {e}")))?;
            let value = f64::from_bits(bits);
            if !value.is_finite() {
                return Err(Error::parse(ln, "non-finite parameter"));
            }
            *slot = value;
        }
        let (ln, end) = next("end")?;
        if end != "end" {
            return Err(Error::parse(ln, "expected end marker"));
        }
        Ok(Checkpoint {
            model,
            vocab,
            hyper,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn hyper(&self, key: &str) -> Option<&str> {
        self.hyper
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

fn field<'a>((ln, line): (usize, &'a str), key: &str) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::parse(ln, format!("expected `{key} ...`")))
}

fn number((ln, line): (usize, &str), key: &str) -> Result<usize> {
    let value = field((ln, line), key)?;
    value
        .parse()
        .map_err(|_| Error::parse(ln, format!("`{key}` needs an unsigned integer, got {value:?}")))
}
