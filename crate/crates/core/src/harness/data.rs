//! Seeded random streams, dataset construction and re-annotation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::langs::{
    cross_serial, cs_sample, dyck_attractors, dyck_depth, dyck_sample, CloseAnnotation, CrossSerialSpec,
    Dataset, DyckLabels, DyckSpec, LabeledString, Labels, Task,
};
use crate::models::{TokenId, Vocab};

use super::ExperimentConfig;

/// Independent purposes that draw randomness from the run seed.
#[derive(Clone, Copy, Debug)]
pub enum Stream {
    TrainData = 1,
    TestData = 2,
    Init = 3,
    Shuffle = 4,
    Dropout = 5,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A generator determined by `(seed, purpose, a, b)` alone, so that e.g. the
/// dropout masks of one sequence do not depend on processing order.
pub fn stream_rng(seed: u64, stream: Stream, a: u64, b: u64) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    for part in [stream as u64, a, b] {
        h = splitmix(h ^ part);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// The task's symbols padded with unused names up to the configured size.
pub fn task_vocab(cfg: &ExperimentConfig) -> Result<Vocab> {
    let base = match cfg.task {
        Task::CrossSerial => cross_serial::vocab(),
        Task::Dyck => cfg.dyck_spec()?.vocab(),
    };
    let mut names: Vec<String> = base.names()[..cfg.task_symbols()].to_vec();
    if cfg.vocab_size < names.len() {
        return Err(Error::Config(format!(
            "vocabulary of {} cannot hold the task's {} symbols",
            cfg.vocab_size,
            names.len()
        )));
    }
    let pad = cfg.vocab_size - names.len();
    names.extend((0..pad).map(|i| format!("<u{i}>")));
    Vocab::new(names, base.start(), base.stop())
}

/// Draws the training and test sets. Cross-serial strings come from `L_k_train`
/// and `L_k_test`; Dyck strings are drawn by the grid walk and kept only when
/// their depth lies in the configured range. Sampling is with replacement.
pub fn build_datasets(cfg: &ExperimentConfig) -> Result<(Vec<LabeledString>, Vec<LabeledString>)> {
    cfg.validate()?;
    let mut train_rng = stream_rng(cfg.seed, Stream::TrainData, 0, 0);
    let mut test_rng = stream_rng(cfg.seed, Stream::TestData, 0, 0);
    match cfg.task {
        Task::CrossSerial => {
            let spec = |k| -> Result<CrossSerialSpec> {
                let mut s = CrossSerialSpec::new(k).map_err(|e| Error::Config(e.to_string()))?;
                s.positive_only = cfg.positive_only;
                Ok(s)
            };
            let (tr, te) = (spec(cfg.k_train)?, spec(cfg.k_test)?);
            let train = (0..cfg.train_count)
                .map(|_| cs_sample(&tr, &mut train_rng))
                .collect::<Result<_>>()?;
            let test = (0..cfg.test_count)
                .map(|_| cs_sample(&te, &mut test_rng))
                .collect::<Result<_>>()?;
            Ok((train, test))
        }
        Task::Dyck => {
            let spec = cfg.dyck_spec()?;
            let train = dyck_in_depth(&spec, cfg.depth_train, cfg.train_count, &mut train_rng)?;
            let test = dyck_in_depth(&spec, cfg.depth_test, cfg.test_count, &mut test_rng)?;
            Ok((train, test))
        }
    }
}

/// Rejection budget per requested string before the range is deemed too rare.
const REJECTIONS_PER_STRING: usize = 10_000;

fn dyck_in_depth(
    spec: &DyckSpec,
    (lo, hi): (usize, usize),
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<LabeledString>> {
    let budget = count.saturating_mul(REJECTIONS_PER_STRING).max(100_000);
    let mut out = Vec::with_capacity(count);
    let mut drawn = 0usize;
    while out.len() < count {
        if drawn == budget {
            return Err(Error::Config(format!(
                "depth range {lo}-{hi} produced {} of {count} strings in {budget} draws",
                out.len()
            )));
        }
        drawn += 1;
        let s = dyck_sample(spec, rng);
        if let Labels::Dyck(l) = &s.labels {
            if (lo..=hi).contains(&l.depth) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

/// Recovers the structural labels of a bare token sequence.
pub fn annotate(task: Task, dyck: Option<&DyckSpec>, tokens: &[TokenId]) -> Result<LabeledString> {
    let labels = match task {
        Task::CrossSerial => {
            let count = |t| tokens.iter().filter(|&&x| x == t).count();
            let (m, n) = (count(cross_serial::A), count(cross_serial::B));
            if tokens != cross_serial::cs_string(m, n).as_slice() {
                return Err(Error::invalid(format!(
                    "not a cross-serial string: {tokens:?}"
                )));
            }
            Labels::CrossSerial { m, n }
        }
        Task::Dyck => {
            let spec = dyck.ok_or_else(|| Error::invalid("Dyck annotation needs a spec"))?;
            if tokens.first() != Some(&spec.start()) || tokens.last() != Some(&spec.stop()) {
                return Err(Error::invalid("Dyck string must be wrapped in START and STOP"));
            }
            let depth = dyck_depth(spec, tokens)?;
            let closers = (0..tokens.len())
                .filter(|&i| spec.is_closer(tokens[i]))
                .map(|i| {
                    Ok(CloseAnnotation {
                        position: i,
                        closer: tokens[i],
                        attractors: dyck_attractors(spec, tokens, i)?,
                    })
                })
                .collect::<Result<_>>()?;
            Labels::Dyck(DyckLabels { depth, closers })
        }
    };
    Ok(LabeledString {
        tokens: tokens.to_vec(),
        labels,
    })
}

/// Annotates every sequence of a dataset file.
pub fn annotate_dataset(ds: &Dataset) -> Result<Vec<LabeledString>> {
    let spec = match ds.task {
        Task::Dyck => Some(DyckSpec::new(ds.pair_count, ds.size_param)?),
        Task::CrossSerial => None,
    };
    ds.sequences
        .iter()
        .map(|s| annotate(ds.task, spec.as_ref(), s))
        .collect()
}
