#![no_main]

use libfuzzer_sys::fuzz_target;
use qce_core::io::{parse_state, write_state};

fuzz_target!(|data: &[u8]| {
    if let Ok(rho) = parse_state(data) {
        let again = parse_state(&write_state(&rho).unwrap()).unwrap();
        assert_eq!(again.matrix(), rho.matrix());
    }
});
