//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! task = dyck
//! arch = urn
//! units = 8
//! depth_train = 3-6
//! ```
//!
//! Keys are the field names of [`ExperimentConfig`]; missing keys keep the
//! value of the preset the file is applied to.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::langs::{cross_serial, DyckSpec, Task};
use crate::models::Arch;

/// Full description of one training and evaluation run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub arch: Arch,
    pub units: usize,
    /// Model vocabulary size; may exceed the task's symbol count.
    pub vocab_size: usize,
    /// LSTM input embedding width (unused by the URN).
    pub embed: usize,
    pub lr: f64,
    pub batch: usize,
    pub epochs: usize,
    pub dropout: f64,
    pub seed: u64,
    pub train_count: usize,
    pub test_count: usize,
    pub k_train: usize,
    pub k_test: usize,
    /// Sample only `m, n ≥ 1` cross-serial strings.
    pub positive_only: bool,
    /// Matching pairs per Dyck string.
    pub pairs: usize,
    pub pair_count: usize,
    pub depth_train: (usize, usize),
    pub depth_test: (usize, usize),
}

pub const KEYS: [&str; 20] = [
    "task",
    "arch",
    "units",
    "vocab_size",
    "embed",
    "lr",
    "batch",
    "epochs",
    "dropout",
    "seed",
    "train_count",
    "test_count",
    "k_train",
    "k_test",
    "positive_only",
    "pairs",
    "pair_count",
    "depth_train",
    "depth_test",
    "preset",
];

impl ExperimentConfig {
    /// Cross-serial preset: train on `L_8`, test on `L_10`, Adam at 1e−3 with
    /// batches of 512, 100 epochs, dropout 0.05.
    pub fn cross_serial() -> Self {
        ExperimentConfig {
            task: Task::CrossSerial,
            arch: Arch::Urn,
            units: 32,
            vocab_size: cross_serial::VOCAB_SIZE,
            embed: 20,
            lr: 0.001,
            batch: 512,
            epochs: 100,
            dropout: 0.05,
            seed: 1,
            train_count: 51_200,
            test_count: 5_120,
            k_train: 8,
            k_test: 10,
            positive_only: false,
            pairs: 10,
            pair_count: 5,
            depth_train: (3, 6),
            depth_test: (7, 9),
        }
    }

    /// Dyck preset: 5 bracket types, 10 pairs per string, train depth 3–6,
    /// test depth 7–9, Adam at 1e−2 with batches of 512, 100 epochs, dropout 0.05.
    pub fn dyck() -> Self {
        ExperimentConfig {
            task: Task::Dyck,
            vocab_size: 12,
            embed: 12,
            lr: 0.01,
            train_count: 102_400,
            test_count: 5_120,
            units: 8,
            ..Self::cross_serial()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "cross-serial" => Ok(Self::cross_serial()),
            "dyck" => Ok(Self::dyck()),
            other => Err(Error::Config(format!("unknown preset {other:?}"))),
        }
    }

    pub fn dyck_spec(&self) -> Result<DyckSpec> {
        DyckSpec::new(self.pair_count, self.pairs).map_err(|e| Error::Config(e.to_string()))
    }

    /// Symbols the task itself needs (START and STOP included).
    pub fn task_symbols(&self) -> usize {
        match self.task {
            Task::CrossSerial => 6,
            Task::Dyck => 2 * self.pair_count + 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.units == 0 {
            return fail("units must be positive".into());
        }
        if self.arch == Arch::Lstm && self.embed == 0 {
            return fail("LSTM embedding size must be positive".into());
        }
        if self.batch == 0 || self.train_count == 0 || self.test_count == 0 {
            return fail("batch and dataset sizes must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return fail(format!("learning rate {} must be finite and non-negative", self.lr));
        }
        if self.vocab_size < self.task_symbols() {
            return fail(format!(
                "vocabulary of {} cannot hold the task's {} symbols",
                self.vocab_size,
                self.task_symbols()
            ));
        }
        match self.task {
            Task::CrossSerial => {
                if self.k_train == 0 || self.k_test == 0 {
                    return fail("k_train and k_test must be positive".into());
                }
                if self.positive_only && (self.k_train < 3 || self.k_test < 3) {
                    return fail("positive_only needs k ≥ 3".into());
                }
            }
            Task::Dyck => {
                if self.pairs == 0 || self.pair_count == 0 {
                    return fail("pairs and pair_count must be positive".into());
                }
                for (name, (lo, hi)) in [("depth_train", self.depth_train), ("depth_test", self.depth_test)] {
                    if lo == 0 || lo > hi || hi > self.pairs {
                        return fail(format!(
                            "{name} {lo}-{hi} must be a non-empty range within [1, {}]",
                            self.pairs
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |what: &str| Error::Config(format!("{key}: expected {what}, got {value:?}"));
        let uint = || value.parse::<usize>().map_err(|_| bad("an unsigned integer"));
        let real = || value.parse::<f64>().map_err(|_| bad("a number"));
        let range = || -> Result<(usize, usize)> {
            let (a, b) = value.split_once('-').ok_or_else(|| bad("a range like 3-6"))?;
            Ok((
                a.trim().parse().map_err(|_| bad("a range like 3-6"))?,
                b.trim().parse().map_err(|_| bad("a range like 3-6"))?,
            ))
        };
        match key {
            "task" => self.task = value.parse().map_err(|_| bad("cross-serial or dyck"))?,
            "arch" => self.arch = value.parse().map_err(|_| bad("urn or lstm"))?,
            "units" => self.units = uint()?,
            "vocab_size" => self.vocab_size = uint()?,
            "embed" => self.embed = uint()?,
            "lr" => self.lr = real()?,
            "batch" => self.batch = uint()?,
            "epochs" => self.epochs = uint()?,
            "dropout" => self.dropout = real()?,
            "seed" => self.seed = value.parse().map_err(|_| bad("an unsigned integer"))?,
            "train_count" => self.train_count = uint()?,
            "test_count" => self.test_count = uint()?,
            "k_train" => self.k_train = uint()?,
            "k_test" => self.k_test = uint()?,
            "positive_only" => self.positive_only = value.parse().map_err(|_| bad("true or false"))?,
            "pairs" => self.pairs = uint()?,
            "pair_count" => self.pair_count = uint()?,
            "depth_train" => self.depth_train = range()?,
            "depth_test" => self.depth_test = range()?,
            "preset" => *self = Self::preset(value)?,
            _ => return Err(Error::Config(format!("unknown configuration key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a config file on top of `self`. A `preset` line resets every
    /// field, so it belongs at the top.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected key = value, got {line:?}")))?;
            self.set(key.trim(), value).map_err(|e| match e {
                Error::Config(m) => Error::parse(i + 1, m),
                other => other,
            })?;
        }
        Ok(())
    }

    /// Parses a config file on top of the preset it names (or cross-serial).
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::cross_serial();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Every field as `(key, value)` text, in file order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("task", self.task.to_string()),
            ("arch", self.arch.to_string()),
            ("units", self.units.to_string()),
            ("vocab_size", self.vocab_size.to_string()),
            ("embed", self.embed.to_string()),
            ("lr", format!("{:?}", self.lr)),
            ("batch", self.batch.to_string()),
            ("epochs", self.epochs.to_string()),
            ("dropout", format!("{:?}", self.dropout)),
            ("seed", self.seed.to_string()),
            ("train_count", self.train_count.to_string()),
            ("test_count", self.test_count.to_string()),
            ("k_train", self.k_train.to_string()),
            ("k_test", self.k_test.to_string()),
            ("positive_only", self.positive_only.to_string()),
            ("pairs", self.pairs.to_string()),
            ("pair_count", self.pair_count.to_string()),
            ("depth_train", format!("{}-{}", self.depth_train.0, self.depth_train.1)),
            ("depth_test", format!("{}-{}", self.depth_test.0, self.depth_test.1)),
        ]
    }

    /// File stem identifying the run, e.g. `dyck_urn8`.
    pub fn run_name(&self) -> String {
        format!("{}_{}{}", self.task, self.arch, self.units)
    }
}
