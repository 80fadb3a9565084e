#![no_main]

//! Arbitrary syndromes through the decoder, trap identification and the
//! cycle solvers of a small fixed code.

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use nbqec::channel::SyndromePair;
use nbqec::post::postprocess;
use nbqec::trap::identify_cycle;
use nbqec::{build_code, BuildOptions, BuildParams, CssCode, Decoder, DecoderConfig, DepolarizingParams, Gf, Side};

fn code() -> &'static CssCode {
    static CODE: OnceLock<CssCode> = OnceLock::new();
    CODE.get_or_init(|| {
        let opts = BuildOptions { allow_girth_fallback: true, ..Default::default() };
        build_code(&BuildParams::new(4, 6, 16, 3).unwrap(), &opts).unwrap()
    })
}

fuzz_target!(|data: &[u8]| {
    let code = code();
    let m = code.gamma.n_rows();
    if data.len() < 2 {
        return;
    }
    let pd = 0.001 + 0.7 * data[0] as f64 / 255.0;
    let iters = 1 + data[1] as usize % 40;
    let body = &data[2..];
    let sym = |k: usize| Gf(body.get(k).map_or(0, |&b| b as u16 & 15));
    let syn = SyndromePair {
        sigma: (0..m).map(sym).collect(),
        tau: (m..2 * m).map(sym).collect(),
    };
    let channel = DepolarizingParams::new(pd).unwrap();
    let decoder = Decoder::new(code, DecoderConfig { max_iters: iters, damping: 0.0 });
    let Ok(out) = decoder.decode_once(&syn, &channel) else { return };
    for side in Side::BOTH {
        let Ok(hist) = out.history(side) else { continue };
        if let Ok(w) = identify_cycle(code, side, hist) {
            let target = if side == Side::X { &syn.sigma } else { &syn.tau };
            let _ = postprocess(code, &w, out.estimate(side), target);
        }
    }
});
