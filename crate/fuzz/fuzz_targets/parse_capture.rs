#![no_main]

use libfuzzer_sys::fuzz_target;
use nbqec_sim::Capture;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = Capture::parse(text) {
        assert_eq!(Capture::parse(&c.to_text()).as_ref(), Ok(&c));
    }
});
