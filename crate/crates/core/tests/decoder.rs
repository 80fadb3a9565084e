mod common;

use common::{check_brute, coupled_prior, random_dist, small_code};
use nbqec::channel::{sample_noise, syndrome, PriorKernel};
use nbqec::decoder::{check_update, fwht, variable_update, DecodeError};
use nbqec::gf::{Field, Gf};
use nbqec::{CssCode, DecodeStatus, Decoder, DecoderConfig, DepolarizingParams, NoisePair, Side, SyndromePair};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Check message by direct convolution over the additive group, without
/// any transform.
fn check_convolution(f: &Field, incoming: &[Vec<f64>], coeffs: &[Gf], s: Gf, t: usize) -> Vec<f64> {
    let q = f.q();
    let mut acc = vec![0.0; q];
    acc[0] = 1.0;
    for u in (0..coeffs.len()).filter(|&u| u != t) {
        let mut next = vec![0.0; q];
        for (y, &a) in acc.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for x in f.elements() {
                next[y ^ f.mul(coeffs[u], x).index()] += a * incoming[u][x.index()];
            }
        }
        acc = next;
    }
    let mut out: Vec<f64> = f.elements().map(|x| acc[(f.mul(coeffs[t], x) + s).index()]).collect();
    let z: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= z);
    out
}

#[test]
fn check_update_matches_enumeration_gf4() {
    let f = Field::with_degree(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let deg = rng.random_range(2..=6);
        let incoming: Vec<Vec<f64>> = (0..deg).map(|_| random_dist(&mut rng, 4)).collect();
        let coeffs: Vec<Gf> = (0..deg).map(|_| Gf(rng.random_range(1..4))).collect();
        let s = Gf(rng.random_range(0..4));
        let out = check_update(&f, &incoming, &coeffs, s).unwrap();
        for t in 0..deg {
            let want = check_brute(&f, &incoming, &coeffs, s, t);
            for (a, b) in out[t].iter().zip(&want) {
                assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
            }
        }
    }
}

#[test]
fn check_update_matches_convolution_larger_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (e, trials) in [(3u32, 200), (4, 100), (8, 6)] {
        let f = Field::with_degree(e).unwrap();
        let q = f.q();
        for _ in 0..trials {
            let deg = rng.random_range(2..=6);
            let incoming: Vec<Vec<f64>> = (0..deg).map(|_| random_dist(&mut rng, q)).collect();
            let coeffs: Vec<Gf> = (0..deg).map(|_| Gf(rng.random_range(1..q as u16))).collect();
            let s = Gf(rng.random_range(0..q as u16));
            let out = check_update(&f, &incoming, &coeffs, s).unwrap();
            for t in 0..deg {
                let want = check_convolution(&f, &incoming, &coeffs, s, t);
                for (a, b) in out[t].iter().zip(&want) {
                    assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
                }
                if deg <= 3 && e <= 4 {
                    let brute = check_brute(&f, &incoming, &coeffs, s, t);
                    assert!(out[t].iter().zip(&brute).all(|(a, b)| (a - b).abs() <= 1e-9));
                }
            }
        }
    }
}

#[test]
fn check_update_with_point_masses_forces_the_remaining_symbol() {
    let f = Field::with_degree(8).unwrap();
    let coeffs = [Gf(3), Gf(200), Gf(17), Gf(1)];
    let xs = [Gf(9), Gf(0), Gf(255)];
    let s = Gf(77);
    let mut incoming: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| {
            let mut m = vec![0.0; 256];
            m[x.index()] = 1.0;
            m
        })
        .collect();
    incoming.push(vec![1.0 / 256.0; 256]);
    let out = check_update(&f, &incoming, &coeffs, s).unwrap();
    let rest = xs.iter().zip(&coeffs).fold(s, |acc, (&x, &c)| acc + f.mul(c, x));
    let want = f.div(rest, coeffs[3]);
    assert!((out[3][want.index()] - 1.0).abs() < 1e-9);
}

#[test]
fn fwht_matches_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v: Vec<f64> = (0..32).map(|_| rng.random::<f64>()).collect();
    let mut w = v.clone();
    fwht(&mut w);
    for (k, &got) in w.iter().enumerate() {
        let want: f64 = v.iter().enumerate().map(|(x, &a)| if (x & k).count_ones() % 2 == 0 { a } else { -a }).sum();
        assert!((got - want).abs() < 1e-12);
    }
}

fn product(q: usize, ms: &[&Vec<f64>]) -> Vec<f64> {
    let mut v = vec![1.0; q];
    for m in ms {
        v.iter_mut().zip(m.iter()).for_each(|(a, &b)| *a *= b);
    }
    v
}

fn assert_close_normalized(got: &[f64], want: &[f64]) {
    let z: f64 = want.iter().sum();
    for (a, b) in got.iter().zip(want) {
        assert!((a - b / z).abs() < 1e-12, "{a} vs {}", b / z);
    }
}

#[test]
fn variable_update_matches_direct_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for e in [2u32, 3, 5] {
        let f = Field::with_degree(e).unwrap();
        let q = f.q();
        let ch = DepolarizingParams::new(0.1).unwrap();
        let kernel = PriorKernel::new(&ch, &f);
        for side in Side::BOTH {
            for _ in 0..50 {
                let own: Vec<Vec<f64>> = (0..2).map(|_| random_dist(&mut rng, q)).collect();
                let opp: Vec<Vec<f64>> = (0..2).map(|_| random_dist(&mut rng, q)).collect();
                let u = variable_update(&f, &kernel, side, &own, &opp).unwrap();
                let prior = coupled_prior(&f, &ch, side, &product(q, &[&opp[0], &opp[1]]));
                assert_close_normalized(&u.prior, &prior);
                assert_close_normalized(&u.to_checks[0], &product(q, &[&prior, &own[1]]));
                assert_close_normalized(&u.to_checks[1], &product(q, &[&prior, &own[0]]));
                assert_close_normalized(&u.belief, &product(q, &[&prior, &own[0], &own[1]]));
                for v in u.to_checks.iter().chain([&u.belief, &u.prior]) {
                    assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn variable_update_detects_vanishing_product() {
    let f = Field::with_degree(2).unwrap();
    let ch = DepolarizingParams::new(0.1).unwrap();
    let kernel = PriorKernel::new(&ch, &f);
    let own = vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]];
    let opp = vec![vec![0.25; 4], vec![0.25; 4]];
    assert!(matches!(variable_update(&f, &kernel, Side::X, &own, &opp), Err(DecodeError::Underflow { .. })));
}

/// Straightforward flooding decoder in the value domain, used to check the
/// library's scheduling and bookkeeping. Returns per-iteration hard
/// decisions (index 0 is the prior decision) and the smallest gap between
/// the two best belief values seen on any symbol.
struct Reference {
    hard: Vec<[Vec<Gf>; 2]>,
    min_gap: f64,
}

fn reference_decode(code: &CssCode, syn: &SyndromePair, ch: &DepolarizingParams, iters: usize) -> Reference {
    let f = &code.field;
    let q = f.q();
    let n = code.params.n_sym;
    let syns = [&syn.sigma, &syn.tau];
    let checks = [code.check(Side::X), code.check(Side::Z)];
    // Edge lists per side: (row, col, coeff); v2c/c2v keyed by (row, position).
    let rows_of = |s: usize, j: usize| -> [usize; 2] {
        let c = checks[s].col(j);
        let mut r = [c[0].0 as usize, c[1].0 as usize];
        r.sort_unstable();
        r
    };
    let mut v2c: [Vec<Vec<Vec<f64>>>; 2] = [0, 1].map(|s| checks[s].rows().map(|r| vec![vec![0.0; q]; r.len()]).collect());
    let mut c2v = v2c.clone();
    let pos = |s: usize, i: usize, j: usize| checks[s].row(i).iter().position(|&(c, _)| c as usize == j).unwrap();
    let argmax = |b: &[f64]| {
        let mut best = 0;
        for x in 1..q {
            if b[x] > b[best] {
                best = x;
            }
        }
        Gf(best as u16)
    };
    let gap = |b: &[f64]| {
        let mut v: Vec<f64> = b.to_vec();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let z: f64 = v.iter().sum();
        (v[0] - v[1]) / z
    };
    let mut min_gap = f64::INFINITY;
    let uniform = vec![1.0 / q as f64; q];
    let mut hist = Vec::new();
    let mut hard = [vec![Gf::ZERO; n], vec![Gf::ZERO; n]];
    for s in 0..2 {
        for j in 0..n {
            let prior = coupled_prior(f, ch, Side::BOTH[s], &uniform);
            for i in rows_of(s, j) {
                let p = pos(s, i, j);
                v2c[s][i][p] = prior.clone();
            }
            hard[s][j] = argmax(&prior);
        }
    }
    hist.push(hard.clone());
    let satisfied = |hard: &[Vec<Gf>; 2]| (0..2).all(|s| checks[s].mul_vec(f, &hard[s]) == *syns[s]);
    let mut done = satisfied(&hard);
    let mut it = 0;
    while !done && it < iters {
        it += 1;
        for s in 0..2 {
            for i in 0..checks[s].n_rows() {
                let coeffs: Vec<Gf> = checks[s].row(i).iter().map(|&(_, c)| c).collect();
                for t in 0..coeffs.len() {
                    c2v[s][i][t] = check_convolution(f, &v2c[s][i], &coeffs, syns[s][i], t);
                }
            }
        }
        let ext: [Vec<Vec<f64>>; 2] = [0, 1].map(|s| {
            (0..n)
                .map(|j| {
                    let [a, b] = rows_of(s, j);
                    product(q, &[&c2v[s][a][pos(s, a, j)], &c2v[s][b][pos(s, b, j)]])
                })
                .collect()
        });
        for s in 0..2 {
            for j in 0..n {
                let prior = coupled_prior(f, ch, Side::BOTH[s], &ext[1 - s][j]);
                let [a, b] = rows_of(s, j);
                let (pa, pb) = (pos(s, a, j), pos(s, b, j));
                let (ma, mb) = (c2v[s][a][pa].clone(), c2v[s][b][pb].clone());
                v2c[s][a][pa] = product(q, &[&prior, &mb]);
                v2c[s][b][pb] = product(q, &[&prior, &ma]);
                let belief = product(q, &[&prior, &ma, &mb]);
                min_gap = min_gap.min(gap(&belief));
                hard[s][j] = argmax(&belief);
            }
        }
        hist.push(hard.clone());
        done = satisfied(&hard);
    }
    Reference { hard: hist, min_gap }
}

fn trial(code: &CssCode, ch: &DepolarizingParams, seed: u64) -> (NoisePair, SyndromePair) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = sample_noise(ch, &code.field, code.params.n_sym, &mut rng);
    let syn = syndrome(code, &noise).unwrap();
    (noise, syn)
}

#[test]
fn decoder_matches_reference_schedule() {
    let code = small_code(2, 4, 5, 1);
    let ch = DepolarizingParams::new(0.15).unwrap();
    let max = 12;
    let mut compared = 0;
    let mut nonconverged = 0;
    for seed in 0..60 {
        let (_, syn) = trial(&code, &ch, seed);
        let r = reference_decode(&code, &syn, &ch, max);
        if r.min_gap < 1e-9 {
            continue;
        }
        compared += 1;
        let ref_iters = r.hard.len() - 1;
        for cap in 1..=max {
            let dec = Decoder::new(&code, DecoderConfig { max_iters: cap, damping: 0.0 });
            let out = dec.decode_once(&syn, &ch).unwrap();
            let t = cap.min(ref_iters);
            assert_eq!(out.iterations, t);
            assert_eq!(out.xi_hat, r.hard[t][0], "seed {seed} cap {cap}");
            assert_eq!(out.zeta_hat, r.hard[t][1]);
            if !out.converged() && cap >= code.params.l {
                // J from the reference trajectory: symbols that changed in
                // transitions max(1, t - L) ..= t.
                let from = t.saturating_sub(code.params.l).max(1);
                for (s, side) in Side::BOTH.into_iter().enumerate() {
                    let want: Vec<usize> = (0..code.params.n_sym).filter(|&j| (from..=t).any(|k| r.hard[k][s][j] != r.hard[k - 1][s][j])).collect();
                    assert_eq!(out.history(side).unwrap().changed, want);
                }
            }
            if cap == max && !out.converged() {
                nonconverged += 1;
            }
        }
    }
    assert!(compared >= 40, "only {compared} trials without near ties");
    assert!(nonconverged > 0, "no trial exercised the history window");
}

#[test]
fn zero_syndrome_converges_immediately_to_zero() {
    let code = small_code(4, 6, 16, 3);
    let dec = Decoder::new(&code, DecoderConfig::default());
    let ch = DepolarizingParams::from_flip(0.05).unwrap();
    let syn = syndrome(&code, &NoisePair::zero(code.params.n_sym)).unwrap();
    let out = dec.decode_once(&syn, &ch).unwrap();
    assert_eq!(out.status, DecodeStatus::Converged);
    assert_eq!(out.iterations, 0);
    assert!(out.xi_hat.iter().chain(&out.zeta_hat).all(|x| x.is_zero()));
    assert!(out.history(Side::X).unwrap().changed.is_empty());
}

#[test]
fn single_symbol_error_is_corrected_in_one_iteration() {
    let code = small_code(8, 6, 17, 9);
    let dec = Decoder::new(&code, DecoderConfig::default());
    let ch = DepolarizingParams::from_flip(0.02).unwrap();
    let mut noise = NoisePair::zero(code.params.n_sym);
    noise.xi[5] = code.field.from_dual(1);
    let syn = syndrome(&code, &noise).unwrap();
    let out = dec.decode_once(&syn, &ch).unwrap();
    assert!(out.converged());
    assert_eq!(out.xi_hat, noise.xi);
    assert_eq!(out.iterations, 1);
}

#[test]
fn decoding_is_deterministic_and_workspace_reusable() {
    let code = small_code(4, 6, 16, 3);
    let dec = Decoder::new(&code, DecoderConfig::default());
    let ch = DepolarizingParams::from_flip(0.08).unwrap();
    let mut ws = dec.workspace();
    for seed in 0..20 {
        let (_, syn) = trial(&code, &ch, seed);
        let a = dec.decode(&mut ws, &syn, &ch).unwrap();
        let b = dec.decode_once(&syn, &ch).unwrap();
        assert_eq!(a, b);
        // Unsatisfied checks are exactly those the estimate violates.
        for side in Side::BOTH {
            if let Ok(h) = a.history(side) {
                let m = code.check(side);
                let synd = if side == Side::X { &syn.sigma } else { &syn.tau };
                let want: Vec<usize> = (0..m.n_rows()).filter(|&i| m.row_dot(&code.field, i, a.estimate(side)) != synd[i]).collect();
                assert_eq!(h.unsatisfied, want);
                if a.converged() {
                    assert!(h.unsatisfied.is_empty() && h.changed.is_empty());
                }
            }
        }
    }
}

#[test]
fn decoder_rejects_bad_inputs() {
    let code = small_code(2, 4, 5, 1);
    let ch = DepolarizingParams::new(0.1).unwrap();
    let dec = Decoder::new(&code, DecoderConfig { max_iters: 0, damping: 0.0 });
    let syn = syndrome(&code, &NoisePair::zero(code.params.n_sym)).unwrap();
    assert_eq!(dec.decode_once(&syn, &ch), Err(DecodeError::NoIterations));
    let dec = Decoder::new(&code, DecoderConfig::default());
    let short = SyndromePair { sigma: vec![Gf::ZERO; 3], tau: syn.tau.clone() };
    assert!(matches!(dec.decode_once(&short, &ch), Err(DecodeError::SyndromeLength { got: 3, .. })));
}

#[test]
fn short_runs_have_no_history() {
    let code = small_code(2, 4, 5, 1);
    let ch = DepolarizingParams::new(0.3).unwrap();
    let dec = Decoder::new(&code, DecoderConfig { max_iters: 2, damping: 0.0 });
    for seed in 0..50 {
        let (_, syn) = trial(&code, &ch, seed);
        let out = dec.decode_once(&syn, &ch).unwrap();
        if !out.converged() {
            assert!(matches!(out.history(Side::X), Err(DecodeError::ShortHistory { iterations: 2, needed: 4 })));
            return;
        }
    }
    panic!("no non-converged trial at p_D = 0.3");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn check_messages_are_distributions(seed in any::<u64>(), deg in 2usize..8) {
        let f = Field::with_degree(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let incoming: Vec<Vec<f64>> = (0..deg).map(|_| random_dist(&mut rng, 16)).collect();
        let coeffs: Vec<Gf> = (0..deg).map(|_| Gf(rng.random_range(1..16))).collect();
        let out = check_update(&f, &incoming, &coeffs, Gf(rng.random_range(0..16))).unwrap();
        for m in out {
            prop_assert!(m.iter().all(|&x| (0.0..=1.0 + 1e-12).contains(&x)));
            prop_assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
