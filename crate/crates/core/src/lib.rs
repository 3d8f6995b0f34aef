//! Unitary-evolution recurrent networks (URN) and an LSTM baseline, trained as
//! generative language models on two synthetic syntax benchmarks: cross-serial
//! dependencies `a^m b^n c^m d^n` and a multi-bracket Dyck language.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: dense matrices, skew packing, the matrix exponential and its
//!   Fréchet derivative, softmax cross-entropy, dropout and Adam.
//! * [`models`]: the URN and LSTM cells with full backpropagation through time.
//! * [`langs`]: samplers, prefix oracles and structural analysers for both languages.
//! * [`harness`]: experiment configuration, datasets, training and evaluation.
//! * [`report`]: CSV series and SVG line plots.

pub mod error;
pub mod harness;
pub mod langs;
pub mod models;
pub mod numerics;
pub mod report;
pub mod selftest;

pub use error::{Error, Result};
