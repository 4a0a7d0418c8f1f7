#![no_main]

use fhl_core::radial_measure::{moment_table, MeasureSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = MeasureSpec::from_json(text) else { return };
    // anything that parses must re-serialise and have sane low moments
    let back = MeasureSpec::from_json(&m.to_json().expect("parsed measures serialise")).unwrap();
    assert_eq!(back.id(), m.id());
    if let Ok(t) = moment_table(&m, 8) {
        assert!(t.values.iter().all(|v| v.is_finite() && *v >= 0.0));
    }
});
