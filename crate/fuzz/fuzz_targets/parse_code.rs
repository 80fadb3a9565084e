#![no_main]

use libfuzzer_sys::fuzz_target;
use nbqec::code::{parse_code, parse_header, write_code};
use nbqec::BuildOptions;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Some(first) = text.lines().next() {
        let _ = parse_header(first, 1);
    }
    let opts = BuildOptions { audit: false, ..Default::default() };
    if let Ok(code) = parse_code(text, &opts) {
        // Accepted files survive a write and reparse unchanged.
        let again = parse_code(&write_code(&code), &opts).expect("reparse of written code");
        assert!(code.same_matrices(&again));
    }
});
