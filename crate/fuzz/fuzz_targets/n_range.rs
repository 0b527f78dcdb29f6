#![no_main]

use libfuzzer_sys::fuzz_target;
use wave_oracle_cli::{parse_n_range, MAX_MARGIN_INPUTS};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok((lo, hi)) = parse_n_range(text) {
            assert!(2 <= lo && lo <= hi && hi <= MAX_MARGIN_INPUTS);
        }
    }
});
