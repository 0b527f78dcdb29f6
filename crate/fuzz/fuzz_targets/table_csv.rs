#![no_main]

use libfuzzer_sys::fuzz_target;
use wave_oracle::dataset::load_table;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = load_table(text) {
        let again = load_table(&table.to_csv()).expect("emitted table reloads");
        assert_eq!(again, table);
    }
});
