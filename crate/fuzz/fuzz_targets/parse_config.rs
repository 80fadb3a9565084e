#![no_main]

use libfuzzer_sys::fuzz_target;
use nbqec_sim::config::{parse_build, parse_list};
use nbqec_sim::ConfigLayer;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(layer) = ConfigLayer::parse(text) {
        let _ = layer.finish();
    }
    let _ = parse_list(text);
    let _ = parse_build(text);
});
