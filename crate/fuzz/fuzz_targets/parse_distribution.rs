#![no_main]

use libfuzzer_sys::fuzz_target;
use qce_core::io::{parse_distribution, write_distribution};
use qce_core::{lift_diagonal, lift_pure};

fuzz_target!(|data: &[u8]| {
    if let Ok(p) = parse_distribution(data) {
        let again = parse_distribution(&write_distribution(&p).unwrap()).unwrap();
        assert_eq!(again, p);
        if p.probabilities().len() <= 64 {
            let _ = lift_diagonal(&p);
            let _ = lift_pure(&p);
        }
    }
});
