//! Dataset text files.
//!
//! ```text
//! # task=dyck pairs=10 pair_count=5 seed=42 count=2
//! <s> ( [ ] ) ... </s>
//! <s> { } ... </s>
//! ```
//!
//! The first line is metadata (`key=value` fields after `#`): `task`, the task
//! parameter (`k` for cross-serial, `pairs` and `pair_count` for Dyck), `seed`
//! and `count`. Every following non-empty line is one sequence of
//! space-separated token names, starting with START and ending with STOP.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::models::{TokenSequence, Vocab};

use super::{cross_serial, DyckSpec, Task};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub task: Task,
    /// `k` for cross-serial, the pair count `N` for Dyck.
    pub size_param: usize,
    /// Bracket types (Dyck only; 0 for cross-serial).
    pub pair_count: usize,
    pub seed: u64,
    pub sequences: Vec<TokenSequence>,
}

impl Dataset {
    pub fn vocab(&self) -> Result<Vocab> {
        match self.task {
            Task::CrossSerial => Ok(cross_serial::vocab()),
            Task::Dyck => Ok(DyckSpec::new(self.pair_count, self.size_param)?.vocab()),
        }
    }

    pub fn to_text(&self) -> Result<String> {
        let vocab = self.vocab()?;
        let mut out = String::new();
        match self.task {
            Task::CrossSerial => {
                let _ = write!(out, "# task={} k={}", self.task, self.size_param);
            }
            Task::Dyck => {
                let _ = write!(
                    out,
                    "# task={} pairs={} pair_count={}",
                    self.task, self.size_param, self.pair_count
                );
            }
        }
        let _ = writeln!(out, " seed={} count={}", self.seed, self.sequences.len());
        for s in &self.sequences {
            out.push_str(&vocab.render(s));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .and_then(|l| l.strip_prefix('#'))
            .ok_or_else(|| Error::parse(1, "missing `#` metadata line"))?;
        let mut task = None;
        let mut size_param = None;
        let mut pair_count = 0;
        let mut seed = None;
        let mut count = None;
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::parse(1, format!("metadata field {field:?} is not key=value")))?;
            let num = || {
                value
                    .parse::<u64>()
                    .map_err(|_| Error::parse(1, format!("{key} must be an unsigned integer")))
            };
            match key {
                "task" => task = Some(value.parse::<Task>().map_err(|e| Error::parse(1, e.to_string()))?),
                "k" | "pairs" => size_param = Some(num()? as usize),
                "pair_count" => pair_count = num()? as usize,
                "seed" => seed = Some(num()?),
                "count" => count = Some(num()? as usize),
                _ => return Err(Error::parse(1, format!("unknown metadata key {key:?}"))),
            }
        }
        let task = task.ok_or_else(|| Error::parse(1, "metadata lacks task"))?;
        let size_param = size_param.ok_or_else(|| Error::parse(1, "metadata lacks k/pairs"))?;
        let seed = seed.ok_or_else(|| Error::parse(1, "metadata lacks seed"))?;
        if task == Task::Dyck && pair_count == 0 {
            return Err(Error::parse(1, "Dyck metadata needs pair_count"));
        }
        if task == Task::Dyck && pair_count > 1024 {
            return Err(Error::parse(1, "pair_count too large"));
        }
        let mut ds = Dataset {
            task,
            size_param,
            pair_count: if task == Task::Dyck { pair_count } else { 0 },
            seed,
            sequences: Vec::new(),
        };
        let vocab = ds.vocab().map_err(|e| Error::parse(1, e.to_string()))?;
        for (i, line) in lines.enumerate() {
            let ln = i + 2;
            if line.trim().is_empty() {
                continue;
            }
            let seq = vocab
                .parse_line(line)
                .map_err(|e| Error::parse(ln, e.to_string()))?;
            if seq.first() != Some(&vocab.start()) || seq.last() != Some(&vocab.stop()) || seq.len() < 2 {
                return Err(Error::parse(ln, "sequence must run from START to STOP"));
            }
            ds.sequences.push(seq);
        }
        if let Some(c) = count {
            if c != ds.sequences.len() {
                return Err(Error::parse(
                    1,
                    format!("metadata count {c} but {} sequences", ds.sequences.len()),
                ));
            }
        }
        Ok(ds)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}
