#![no_main]

use libfuzzer_sys::fuzz_target;
use wave_oracle::OracleSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(oracle) = OracleSpec::from_json(text) {
        let again = OracleSpec::from_json(&oracle.to_json()).expect("emitted document reloads");
        assert_eq!(again, oracle);
        let _ = oracle.query(&vec![0.0; oracle.n()]);
    }
});
