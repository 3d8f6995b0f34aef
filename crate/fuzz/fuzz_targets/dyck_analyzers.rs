#![no_main]

use libfuzzer_sys::fuzz_target;
use urnlab::langs::{dyck_attractors, dyck_closer_oracle, dyck_depth, DyckSpec};

fuzz_target!(|data: &[u8]| {
    let [types, pairs, rest @ ..] = data else { return };
    let Ok(spec) = DyckSpec::new(usize::from(types % 6), usize::from(pairs % 12)) else { return };
    let v = spec.vocab_size();
    let tokens: Vec<usize> = rest.iter().map(|&b| usize::from(b) % (v + 1)).collect();
    let _ = dyck_depth(&spec, &tokens);
    for i in 0..=tokens.len() {
        let _ = dyck_closer_oracle(&spec, &tokens[..i]);
        let _ = dyck_attractors(&spec, &tokens, i);
    }
});
