#![no_main]

use libfuzzer_sys::fuzz_target;

// Argument vectors only: parsing must reject or accept, never panic.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let argv = std::iter::once("fhl").chain(text.split_whitespace());
    if let Ok(cfg) = fhl_cli::parse_config(argv) {
        let _ = serde_json::to_string(&cfg);
    }
});
