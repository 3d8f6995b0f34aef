#![no_main]

use libfuzzer_sys::fuzz_target;
use urnlab::langs::{cross_serial, DyckSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let vocab = cross_serial::vocab();
    if let Ok(tokens) = vocab.parse_line(text) {
        assert_eq!(vocab.parse_line(&vocab.render(&tokens)).unwrap(), tokens);
    }
    let spec = DyckSpec::new(5, 10).unwrap();
    let _ = spec.parse_brackets(text);
    let _ = spec.vocab().parse_line(text);
});
