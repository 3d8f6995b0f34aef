#![no_main]

use libfuzzer_sys::fuzz_target;
use urnlab::langs::Dataset;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ds) = Dataset::parse(text) {
        let again = Dataset::parse(&ds.to_text().unwrap()).unwrap();
        assert_eq!(again, ds);
    }
});
