#![no_main]

use libfuzzer_sys::fuzz_target;
use qce_core::io::{parse_game, write_game};

fuzz_target!(|data: &[u8]| {
    if let Ok(game) = parse_game(data) {
        let again = parse_game(&write_game(&game).unwrap()).unwrap();
        assert_eq!(again, game);
    }
});
