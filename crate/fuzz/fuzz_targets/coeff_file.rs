#![no_main]

use fhl_core::io::{format_coeff_file, parse_coeff_file};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_coeff_file(text) {
        assert_eq!(parse_coeff_file(&format_coeff_file(&f)).unwrap(), f);
    }
});
