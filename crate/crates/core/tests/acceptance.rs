//! Acceptance suite: one pass/fail line per criterion.
//!
//! Training criteria take tens of minutes in an optimised build. Set
//! `URNLAB_ACCEPTANCE=1,2,5` to run a subset.

mod common;

use std::collections::BTreeSet;
use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use common::*;
use urnlab::harness::{BinCount, Evaluation, Experiment, ExperimentConfig};
use urnlab::langs::{cross_serial, cs_valid_next, dyck_sample, DyckSpec, Labels, LabeledString};
use urnlab::models::{count_params, Arch, Model, TokenId};
use urnlab::numerics::{dot, expm, skew, skew_len, Matrix, Mode, SkewVector};
use urnlab::report::emit_csv;

type Check = Result<String, String>;

fn require(cond: bool, detail: String) -> Check {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Writes past the test harness's output capture so the lines always show.
fn say(line: &str) {
    let mut out = std::io::stdout();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

// 1. Parameter counts for every model size in both tables.
fn parameter_counts() -> Check {
    let table = [
        ("cross-serial", Arch::Urn, 10, 20, [370, 1370, 5290]),
        ("cross-serial", Arch::Lstm, 10, 20, [1218, 2738, 7314]),
        ("dyck", Arch::Urn, 12, 12, [444, 1644, 6348]),
        ("dyck", Arch::Lstm, 12, 12, [924, 2204, 6300]),
    ];
    let mut r = rng(0);
    let mut wrong = Vec::new();
    for (task, arch, vocab, embed, counts) in table {
        for (units, want) in [8, 16, 32].into_iter().zip(counts) {
            let got = count_params(&Model::init(arch, units, embed, vocab, &mut r).unwrap());
            if got != want {
                wrong.push(format!("{task} {arch}{units}: {got} != {want}"));
            }
        }
    }
    require(wrong.is_empty(), if wrong.is_empty() { "12/12 exact".into() } else { wrong.join("; ") })
}

// 2. Orthogonality and inner-product preservation of exp(skew(x)).
fn unitarity() -> Check {
    let mut r = rng(2);
    let (mut worst_gram, mut worst_inner): (f64, f64) = (0.0, 0.0);
    for n in [2, 4, 8, 16, 32] {
        for _ in 0..1000 {
            let x = (0..skew_len(n)).map(|_| r.gen_range(-2.0..2.0)).collect();
            let q = expm(&skew(&SkewVector::new(n, x).unwrap())).unwrap();
            let gram = q.transpose().matmul(&q).unwrap();
            worst_gram = worst_gram.max(gram.sub(&Matrix::identity(n)).max_abs());
            let h: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
            let s: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
            let moved = dot(&q.matvec(&h), &q.matvec(&s));
            worst_inner = worst_inner.max((moved - dot(&h, &s)).abs());
        }
    }
    require(
        worst_gram < 1e-9 && worst_inner < 1e-9,
        format!("max |QᵀQ−I| = {worst_gram:.2e}, max inner-product drift = {worst_inner:.2e}"),
    )
}

// 3. Analytic derivatives against central differences.
fn gradients() -> Check {
    let mut r = rng(3);
    let spread = |arch, n, e, r: &mut rand_chacha::ChaCha8Rng| {
        let mut m = Model::init(arch, n, e, 4, r).unwrap();
        for p in m.params_mut() {
            *p += r.gen_range(-0.8..0.8);
        }
        m
    };
    let urn = spread(Arch::Urn, 4, 0, &mut r);
    let lstm = spread(Arch::Lstm, 4, 3, &mut r);
    let parts = [
        ("expm_frechet", frechet_error(4, 1.5, 31)),
        ("expm_backward", expm_backward_error(4, 1.5, 32)),
        ("lstm_step", lstm_step_error(3, 2, 0.2, 33)),
        ("urn bptt", bptt_error(&urn, &random_sequence(4, 5, 34), 3, 0.0, 1)),
        ("urn bptt+dropout", bptt_error(&urn, &random_sequence(4, 5, 35), 3, 0.2, 2)),
        ("lstm bptt", bptt_error(&lstm, &random_sequence(4, 7, 36), 3, 0.0, 3)),
        ("lstm bptt+dropout", bptt_error(&lstm, &random_sequence(4, 7, 37), 3, 0.2, 4)),
    ];
    let worst = parts.iter().map(|p| p.1).fold(0.0, f64::max);
    let detail = parts
        .iter()
        .map(|(name, e)| format!("{name} {e:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    require(worst < 1e-4, detail)
}

// 4. Stepwise evolution equals the ordered product of unitaries, and the
// transposed product run backwards returns to h0.
fn compositionality() -> Check {
    let mut r = rng(4);
    let (mut worst_fwd, mut worst_back): (f64, f64) = (0.0, 0.0);
    for n in [8, 32] {
        let mut model = Model::init(Arch::Urn, n, 0, 10, &mut r).unwrap();
        for p in model.params_mut() {
            *p += r.gen_range(-0.3..0.3);
        }
        let Model::Urn(urn) = &model else { unreachable!() };
        let qs: Vec<Matrix> = (0..10).map(|t| urn.unitary(t).unwrap()).collect();
        for _ in 0..50 {
            let tokens: Vec<TokenId> = (0..20).map(|_| r.gen_range(0..10)).collect();
            let (_, trace) = model.forward(&tokens, 0.0, &mut rng(0), Mode::Eval).unwrap();
            let stepwise = trace.states().last().unwrap().clone();
            let mut product = Matrix::identity(n);
            for &t in &tokens {
                product = qs[t].matmul(&product).unwrap();
            }
            let direct = product.matvec(urn.h0());
            let fwd = stepwise.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let mut h = stepwise;
            for &t in tokens.iter().rev() {
                h = qs[t].matvec_t(&h);
            }
            let back = h.iter().zip(urn.h0()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst_fwd = worst_fwd.max(fwd);
            worst_back = worst_back.max(back);
        }
    }
    require(
        worst_fwd < 1e-8 && worst_back < 1e-6,
        format!("stepwise vs product {worst_fwd:.1e}, reverse replay {worst_back:.1e} (100 sequences)"),
    )
}

/// Every member of `L_k`, spelled out symbol by symbol.
fn members(k: usize) -> Vec<Vec<TokenId>> {
    let mut out = Vec::new();
    for m in 0..k {
        for n in 0..k - m {
            let mut w = vec![cross_serial::START];
            w.extend(std::iter::repeat(cross_serial::A).take(m));
            w.extend(std::iter::repeat(cross_serial::B).take(n));
            w.extend(std::iter::repeat(cross_serial::C).take(m));
            w.extend(std::iter::repeat(cross_serial::D).take(n));
            w.push(cross_serial::STOP);
            out.push(w);
        }
    }
    out
}

/// Walks every valid prefix depth-first; at each one, every vocabulary symbol
/// is tried and the oracle must agree with the member list about it.
fn cs_exhaustive(k: usize) -> Result<usize, String> {
    let words = members(k);
    let extendable = |p: &[TokenId]| words.iter().any(|w| w.len() >= p.len() && w.starts_with(p));
    let mut stack = vec![vec![cross_serial::START]];
    let mut checked = 0;
    while let Some(prefix) = stack.pop() {
        let brute: BTreeSet<TokenId> = (0..cross_serial::VOCAB_SIZE)
            .filter(|&t| extendable(&[&prefix[..], &[t]].concat()))
            .collect();
        let oracle = cs_valid_next(&prefix, k).map_err(|e| format!("{prefix:?}: {e}"))?;
        if oracle != brute {
            return Err(format!("k={k} {prefix:?}: oracle {oracle:?} vs brute {brute:?}"));
        }
        for t in 0..cross_serial::VOCAB_SIZE {
            let next = [&prefix[..], &[t]].concat();
            if brute.contains(&t) {
                stack.push(next);
            } else if cs_valid_next(&next, k).is_ok() {
                return Err(format!("k={k}: invalid prefix {next:?} accepted"));
            }
        }
        checked += 1;
    }
    Ok(checked)
}

/// Independent checks of a sampled Dyck string against its labels.
fn validate_dyck(spec: &DyckSpec, s: &LabeledString) -> Result<(), String> {
    let Labels::Dyck(lab) = &s.labels else {
        return Err("not a Dyck label".into());
    };
    let t = &s.tokens;
    if t.len() != 2 * spec.pairs + 2 || t[0] != spec.start() || t[t.len() - 1] != spec.stop() {
        return Err(format!("bad frame or length {}", t.len()));
    }
    let body = &t[1..t.len() - 1];
    // Match every closer to its opener with an explicit stack of positions.
    let mut open: Vec<usize> = Vec::new();
    let mut pairs = Vec::new();
    let mut depth = 0;
    for (i, &x) in body.iter().enumerate() {
        if x < spec.pair_count {
            open.push(i);
            depth = depth.max(open.len());
        } else {
            let j = open.pop().ok_or("closer without opener")?;
            if body[j] + spec.pair_count != x {
                return Err("mismatched pair".into());
            }
            pairs.push((j, i));
        }
    }
    if !open.is_empty() {
        return Err("unclosed bracket".into());
    }
    if depth != lab.depth {
        return Err(format!("depth {depth} vs label {}", lab.depth));
    }
    if lab.closers.len() != pairs.len() {
        return Err("closer annotations missing".into());
    }
    for ((j, i), c) in pairs.iter().zip(&lab.closers) {
        let inside = body[j + 1..*i]
            .iter()
            .filter(|&&x| x < spec.pair_count && x != body[*j])
            .count();
        if c.position != i + 1 || c.attractors != inside || c.closer != body[*i] {
            return Err(format!("annotation {c:?} vs pair ({j}, {i}) with {inside} attractors"));
        }
    }
    Ok(())
}

/// Probability of each complete bracket word of `pairs` pairs under the
/// grid walk, by dynamic programming over `(opens, closes)` with the word's
/// choices; openers are uniform over `types`.
fn walk_distribution(pairs: usize, types: usize) -> Vec<(Vec<TokenId>, f64)> {
    let mut frontier: Vec<(Vec<TokenId>, Vec<TokenId>, usize, usize, f64)> =
        vec![(Vec::new(), Vec::new(), 0, 0, 1.0)];
    let mut done = Vec::new();
    while let Some((word, stack, o, c, p)) = frontier.pop() {
        if c == pairs {
            done.push((word, p));
            continue;
        }
        let can_open = o < pairs;
        let can_close = c < o;
        let branch = if can_open && can_close { 0.5 } else { 1.0 };
        if can_open {
            for kind in 0..types {
                let mut w = word.clone();
                w.push(kind);
                let mut s = stack.clone();
                s.push(kind);
                frontier.push((w, s, o + 1, c, p * branch / types as f64));
            }
        }
        if can_close {
            let mut s = stack.clone();
            let kind = s.pop().unwrap();
            let mut w = word.clone();
            w.push(types + kind);
            frontier.push((w, s, o, c + 1, p * branch));
        }
    }
    done
}

// 5. Language oracles against brute force, generator validity, and the N=3
// walk distribution against its exact probabilities.
fn oracles() -> Check {
    let mut prefixes = 0;
    for k in 1..=6 {
        prefixes += cs_exhaustive(k)?;
    }

    let spec = DyckSpec::new(5, 10).unwrap();
    let mut r = rng(5);
    for i in 0..100_000 {
        let s = dyck_sample(&spec, &mut r);
        validate_dyck(&spec, &s).map_err(|e| format!("sample {i}: {e}"))?;
    }

    let small = DyckSpec::new(2, 3).unwrap();
    let exact = walk_distribution(3, 2);
    let total: f64 = exact.iter().map(|e| e.1).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(format!("exact walk probabilities sum to {total}"));
    }
    let draws = 40_000;
    let mut counts = vec![0usize; exact.len()];
    for _ in 0..draws {
        let s = dyck_sample(&small, &mut r);
        let body = &s.tokens[1..s.tokens.len() - 1];
        let idx = exact.iter().position(|(w, _)| w == body).ok_or("sample outside support")?;
        counts[idx] += 1;
    }
    let chi2: f64 = exact
        .iter()
        .zip(&counts)
        .map(|((_, p), &c)| {
            let expect = p * draws as f64;
            (c as f64 - expect).powi(2) / expect
        })
        .sum();
    let df = (exact.len() - 1) as f64;
    let p_value = 1.0 - ChiSquared::new(df).unwrap().cdf(chi2);
    require(
        p_value > 0.01,
        format!(
            "{prefixes} cross-serial prefixes for k≤6 agree; 100000 Dyck samples valid; \
             N=3 walk chi²={chi2:.1} on {df} df, p={p_value:.3}"
        ),
    )
}

fn dyck_config(arch: Arch, units: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::dyck();
    cfg.arch = arch;
    cfg.units = units;
    cfg
}

// 6. URN n=8 beats the 80% majority baseline within the first epoch.
fn dyck_first_epoch() -> Check {
    let mut exp = Experiment::new(dyck_config(Arch::Urn, 8)).unwrap();
    let strings = exp.train.len();
    let r = exp.run_epoch().unwrap();
    require(
        r.max_err_rate < 0.8,
        format!(
            "full preset ({} strings), epoch 1 maxErrRate {:.3}, trainloss {:.3}",
            strings,
            r.max_err_rate,
            r.trainloss
        ),
    )
}

/// Pooled error rate over the bins from `lo` upward.
fn pooled_from(eval: &Evaluation, lo: usize) -> Option<f64> {
    let pooled = eval.bins.iter().skip(lo).fold(BinCount::default(), |acc, b| BinCount {
        total: acc.total + b.total,
        errors: acc.errors + b.errors,
    });
    pooled.error_rate()
}

fn bin_errors(eval: &Evaluation) -> String {
    eval.bins
        .iter()
        .enumerate()
        .filter_map(|(i, b)| b.error_rate().map(|e| format!("{i}:{e:.2}")))
        .collect::<Vec<_>>()
        .join(" ")
}

// 7. Qualitative attractor profile on the reduced run (20,480 strings, 30
// epochs): the URN handles many attractors better than none and better than
// the LSTM, whose errors peak at 2-5 attractors.
fn dyck_shape() -> Check {
    const HIGH: usize = 7;
    let mut details = Vec::new();
    let mut ok = true;
    for units in [16, 32] {
        let mut finals = Vec::new();
        for arch in [Arch::Urn, Arch::Lstm] {
            let mut cfg = dyck_config(arch, units);
            cfg.train_count = 20_480;
            cfg.epochs = 30;
            let mut exp = Experiment::new(cfg).unwrap();
            for _ in 0..exp.config.epochs {
                exp.run_epoch().unwrap();
            }
            let eval = exp.records.last().unwrap().eval.clone();
            details.push(format!("{arch}{units} [{}]", bin_errors(&eval)));
            finals.push(eval);
        }
        let (urn, lstm) = (&finals[0], &finals[1]);
        let urn_high = pooled_from(urn, HIGH).unwrap_or(1.0);
        let lstm_high = pooled_from(lstm, HIGH).unwrap_or(0.0);
        let urn_zero = urn.bins[0].error_rate().unwrap_or(0.0);
        let peak = lstm
            .bins
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.error_rate().map(|e| (i, e)))
            .fold((0, -1.0), |best, (i, e)| if e > best.1 { (i, e) } else { best })
            .0;
        let pass = urn_high < urn_zero && urn_high < lstm_high && (2..=5).contains(&peak);
        ok &= pass;
        details.push(format!(
            "n={units}: urn≥{HIGH} {urn_high:.3} vs urn0 {urn_zero:.3} vs lstm≥{HIGH} {lstm_high:.3}, lstm peak bin {peak}"
        ));
    }
    require(ok, details.join("; "))
}

// 8. Cross-serial URN n=32: low full-string error while the training loss is
// still high. Each of three seeds must reach error < 0.45 at an epoch with
// trainloss ≥ 0.8.
fn cross_serial_bias() -> Check {
    let mut details = Vec::new();
    let mut ok = true;
    for seed in 1..=3 {
        let mut cfg = ExperimentConfig::cross_serial();
        cfg.units = 32;
        cfg.seed = seed;
        let mut exp = Experiment::new(cfg).unwrap();
        let mut hit = None;
        let mut strict = false;
        let mut trail = Vec::new();
        for _ in 0..exp.config.epochs {
            let r = exp.run_epoch().unwrap();
            let err = 1.0 - r.accuracy;
            trail.push(format!("({:.2},{err:.2})", r.trainloss));
            strict |= err < 0.4 && r.trainloss >= 0.9;
            if err < 0.45 && r.trainloss >= 0.8 {
                hit = Some((r.epoch, r.trainloss, err));
                break;
            }
            // The training loss only drifts down from here on; once it is
            // well under the threshold no later epoch can qualify.
            if r.trainloss < 0.7 {
                break;
            }
        }
        ok &= hit.is_some();
        details.push(match hit {
            Some((epoch, loss, err)) => format!(
                "seed {seed}: epoch {epoch} trainloss {loss:.3} error {err:.3}{}",
                if strict { " (strict bound met)" } else { "" }
            ),
            None => format!("seed {seed}: no qualifying epoch, (trainloss,error) {}", trail.join(" ")),
        });
    }
    require(ok, details.join("; "))
}

// 9. Same seed, same bytes.
fn determinism() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let mut compared = 0;
    for preset in ["cross-serial", "dyck"] {
        for arch in [Arch::Urn, Arch::Lstm] {
            let mut cfg = ExperimentConfig::preset(preset).unwrap();
            cfg.arch = arch;
            cfg.units = 8;
            cfg.train_count = 1024;
            cfg.test_count = 256;
            cfg.batch = 128;
            cfg.epochs = 2;
            cfg.seed = 9;
            let mut outputs = Vec::new();
            for run in ["a", "b"] {
                let result = urnlab::harness::run_experiment(cfg.clone()).map_err(|(e, _)| e.to_string())?;
                let paths = emit_csv(&result, &dir.path().join(run), &cfg.run_name()).unwrap();
                outputs.push(paths.iter().map(|p| std::fs::read(p).unwrap()).collect::<Vec<_>>());
            }
            if outputs[0] != outputs[1] {
                return Err(format!("{preset} {arch}: CSV bytes differ between runs"));
            }
            compared += outputs[0].len();
        }
    }
    require(true, format!("{compared} CSV files byte-identical across repeated runs"))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(u8, &str, fn() -> Check); 9] = [
        (1, "parameter counts", parameter_counts),
        (2, "unitarity", unitarity),
        (3, "gradients", gradients),
        (4, "compositionality", compositionality),
        (5, "oracle equivalence", oracles),
        (6, "dyck baseline within one epoch", dyck_first_epoch),
        (7, "dyck attractor profile", dyck_shape),
        (8, "cross-serial bias curve", cross_serial_bias),
        (9, "determinism", determinism),
    ];
    let selected: Option<BTreeSet<u8>> = std::env::var("URNLAB_ACCEPTANCE")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        if selected.as_ref().is_some_and(|s| !s.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        let secs = start.elapsed().as_secs_f64();
        match &outcome {
            Ok(d) => say(&format!("criterion {id} PASS {name} ({secs:.0}s): {d}")),
            Err(d) => {
                say(&format!("criterion {id} FAIL {name} ({secs:.0}s): {d}"));
                failed.push(id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "unknown panic".into())
}
