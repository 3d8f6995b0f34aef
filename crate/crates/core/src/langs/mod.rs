//! Synthetic languages: samplers, prefix oracles and structural analysers.

pub mod cross_serial;
mod dataset;
pub mod dyck;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::models::{TokenId, TokenSequence};

pub use cross_serial::{cs_sample, cs_string_correct, cs_valid_next, CrossSerialSpec, CrossSerialState};
pub use dataset::Dataset;
pub use dyck::{dyck_attractors, dyck_closer_oracle, dyck_depth, dyck_sample, DyckSpec};

/// Benchmark task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Task {
    CrossSerial,
    Dyck,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::CrossSerial => "cross-serial",
            Task::Dyck => "dyck",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cross-serial" => Ok(Task::CrossSerial),
            "dyck" => Ok(Task::Dyck),
            other => Err(Error::invalid(format!("unknown task {other:?}"))),
        }
    }
}

/// Annotation of one closing position in a Dyck string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CloseAnnotation {
    /// Index into the token sequence (START is index 0).
    pub position: usize,
    pub closer: TokenId,
    pub attractors: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyckLabels {
    pub depth: usize,
    pub closers: Vec<CloseAnnotation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Labels {
    CrossSerial { m: usize, n: usize },
    Dyck(DyckLabels),
}

/// A sampled string with its structural annotations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledString {
    pub tokens: TokenSequence,
    pub labels: Labels,
}
