#![no_main]

use libfuzzer_sys::fuzz_target;
use urnlab::report::CsvTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = CsvTable::parse(text) {
        for name in table.header.clone() {
            table.column(&name).unwrap();
        }
        let _ = CsvTable::parse(&table.to_text());
    }
});
