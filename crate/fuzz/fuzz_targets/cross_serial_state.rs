#![no_main]

use libfuzzer_sys::fuzz_target;
use urnlab::langs::{cs_string_correct, CrossSerialState};

fuzz_target!(|data: &[u8]| {
    let Some((&k, rest)) = data.split_first() else { return };
    let k = usize::from(k % 16);
    let tokens: Vec<usize> = rest.iter().map(|&b| usize::from(b % 8)).collect();
    let mut state = CrossSerialState::new(k);
    for &t in &tokens {
        let ok = state.accepts(t);
        assert_eq!(state.feed(t).is_ok(), ok);
        if !ok {
            break;
        }
    }
    if tokens.len() > 1 {
        let _ = cs_string_correct(&tokens[1..], &tokens, k);
    }
});
