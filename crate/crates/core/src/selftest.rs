//! Fast self-checks for an installed binary: parameter counts, unitarity,
//! derivative agreement, language oracles and file round trips.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::langs::{cross_serial, cs_valid_next, dyck_depth, dyck_sample, DyckSpec, Labels};
use crate::models::{count_params, Arch, Checkpoint, Model};
use crate::numerics::{expm, expm_frechet, skew, skew_len, Matrix, SkewVector};
use crate::report::{epoch_table, CsvTable};

/// Outcome of one named check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Result<(), String>,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn param_counts() -> Result<(), String> {
    let table = [
        (Arch::Urn, 10, 20, [370, 1370, 5290]),
        (Arch::Lstm, 10, 20, [1218, 2738, 7314]),
        (Arch::Urn, 12, 12, [444, 1644, 6348]),
        (Arch::Lstm, 12, 12, [924, 2204, 6300]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for (arch, vocab, embed, counts) in table {
        for (units, want) in [8, 16, 32].into_iter().zip(counts) {
            let m = Model::init(arch, units, embed, vocab, &mut rng).map_err(|e| e.to_string())?;
            let got = count_params(&m);
            ensure(got == want, || format!("{arch} n={units} V={vocab}: {got} != {want}"))?;
        }
    }
    Ok(())
}

fn random_skew(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let entries = (0..skew_len(n)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    skew(&SkewVector::new(n, entries).expect("length matches"))
}

fn unitarity() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [2, 4, 8, 16, 32] {
        for _ in 0..20 {
            let q = expm(&random_skew(n, &mut rng)).map_err(|e| e.to_string())?;
            let gram = q.transpose().matmul(&q).map_err(|e| e.to_string())?;
            let dev = gram.sub(&Matrix::identity(n)).max_abs();
            ensure(dev < 1e-9, || format!("n={n}: |QᵀQ − I| = {dev:e}"))?;
        }
    }
    Ok(())
}

fn frechet() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let m = random_skew(4, &mut rng);
    let e = random_skew(4, &mut rng);
    let (_, l) = expm_frechet(&m, &e).map_err(|e| e.to_string())?;
    let h = 1e-5;
    let shifted = |t: f64| {
        let mut x = m.clone();
        x.add_scaled(t, &e);
        expm(&x).map_err(|e| e.to_string())
    };
    let (plus, minus) = (shifted(h)?, shifted(-h)?);
    let fd = plus.sub(&minus).scaled(0.5 / h);
    let err = fd.sub(&l).max_abs() / l.max_abs();
    ensure(err < 1e-6, || format!("relative error {err:e}"))
}

/// Brute force: a next symbol is valid when some member of `L_k` extends the prefix with it.
fn cross_serial_oracle() -> Result<(), String> {
    for k in 1..=5 {
        let members: Vec<Vec<usize>> = (0..k)
            .flat_map(|m| (0..k - m).map(move |n| cross_serial::cs_string(m, n)))
            .collect();
        for w in &members {
            for len in 1..w.len() {
                let prefix = &w[..len];
                let brute: std::collections::BTreeSet<usize> = members
                    .iter()
                    .filter(|u| u.len() > len && u.starts_with(prefix))
                    .map(|u| u[len])
                    .collect();
                let got = cs_valid_next(prefix, k).map_err(|e| e.to_string())?;
                ensure(got == brute, || format!("k={k} prefix {prefix:?}: {got:?} != {brute:?}"))?;
            }
        }
    }
    Ok(())
}

fn dyck_generator() -> Result<(), String> {
    let spec = DyckSpec::new(5, 10).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let s = dyck_sample(&spec, &mut rng);
        let Labels::Dyck(lab) = &s.labels else {
            return Err("sampler returned non-Dyck labels".into());
        };
        ensure(s.tokens.len() == 22, || format!("length {}", s.tokens.len()))?;
        let depth = dyck_depth(&spec, &s.tokens).map_err(|e| e.to_string())?;
        ensure(depth == lab.depth, || format!("depth {depth} != label {}", lab.depth))?;
    }
    Ok(())
}

fn roundtrips() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let model = Model::init(Arch::Lstm, 3, 2, 10, &mut rng).map_err(|e| e.to_string())?;
    let ck = Checkpoint {
        model,
        vocab: cross_serial::vocab(),
        hyper: vec![("seed".into(), "4".into())],
    };
    let back = Checkpoint::parse(&ck.to_text()).map_err(|e| e.to_string())?;
    ensure(back == ck, || "checkpoint round trip changed the model".into())?;
    let table = epoch_table(&[]);
    let parsed = CsvTable::parse(&table.to_text()).map_err(|e| e.to_string())?;
    ensure(parsed == table, || "CSV round trip changed the table".into())
}

/// Runs every check; all should pass in well under a second.
pub fn run_selftest() -> Vec<Check> {
    let checks: [(&'static str, fn() -> Result<(), String>); 6] = [
        ("parameter counts", param_counts),
        ("unitarity", unitarity),
        ("frechet derivative", frechet),
        ("cross-serial oracle", cross_serial_oracle),
        ("dyck generator", dyck_generator),
        ("file round trips", roundtrips),
    ];
    checks
        .into_iter()
        .map(|(name, f)| Check { name, outcome: f() })
        .collect()
}
