//! Trial pipeline, per-point aggregation and sweep output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nbqec::channel::{sample_noise, syndrome};
use nbqec::code::{parse_code, ParseError};
use nbqec::cycle::walk_from_columns;
use nbqec::decoder::HistorySets;
use nbqec::oracle::Detectability;
use nbqec::post::{postprocess, PostOutcome};
use nbqec::trap::{classify, identify_cycle};
use nbqec::{
    build_code, BuildError, BuildOptions, CssCode, CycleType, CycleWitness, DecodeOutcome, Decoder, DecoderConfig, DegeneracyOracle,
    DepolarizingParams, Gf, NoisePair, Side,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::capture::{Capture, CycleRecord, Kind};
use crate::config::{CodeSource, ConfigError, RunConfig};
use crate::stats::{hashing_bound, PointStats, Terminal, TrapCounts};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("building code: {0}")]
    Build(#[from] BuildError),
    #[error("reading code: {0}")]
    Parse(#[from] ParseError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("thread pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SimError + '_ {
    move |source| SimError::Io { path: path.to_path_buf(), source }
}

/// Trials evaluated between two stop-rule checks. Fixed so the stopping
/// trial does not depend on the worker count.
pub const CHUNK: u64 = 64;

/// Per-trial noise stream: the global seed selects the key and the trial
/// index the stream, so a trial sees the same uniforms at every noise level.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn load_code(source: &CodeSource, allow_girth_fallback: bool) -> Result<CssCode, SimError> {
    let opts = BuildOptions {
        allow_girth_fallback,
        ..Default::default()
    };
    match source {
        CodeSource::Build(params) => Ok(build_code(params, &opts)?),
        CodeSource::File(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            Ok(parse_code(&text, &opts)?)
        }
    }
}

/// Outcome of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub terminal: Terminal,
    /// Plain decoder output was not exactly the noise.
    pub strict_fail: bool,
    pub traps: TrapCounts,
    pub identification_failures: u64,
    pub postprocess_failures: u64,
    pub numeric_failure: bool,
    pub captures: Vec<Capture>,
}

fn kind_index(t: CycleType) -> usize {
    match t {
        CycleType::TypeI { .. } => 0,
        CycleType::TypeII => 1,
        CycleType::TypeIII => 2,
    }
}

/// The cycle of `check` whose column set is exactly the support of
/// `truth + estimate`, if any.
pub fn difference_cycle(code: &CssCode, side: Side, truth: &[Gf], estimate: &[Gf]) -> Option<CycleWitness> {
    let support: Vec<usize> = (0..truth.len()).filter(|&j| truth[j] != estimate[j]).collect();
    if support.len() != code.params.l {
        return None;
    }
    let check = code.check(side);
    let (columns, rows) = walk_from_columns(check, &support)?;
    Some(CycleWitness::from_walk(&code.field, side, check, code.partner(side), columns, rows))
}

/// Immutable per-code state shared by all workers.
pub struct Pipeline<'c> {
    pub code: &'c CssCode,
    pub decoder: Decoder<'c>,
    pub oracle: DegeneracyOracle<'c>,
    pub postprocess: bool,
    pub seed: u64,
}

impl<'c> Pipeline<'c> {
    pub fn new(code: &'c CssCode, max_iters: usize, postprocess: bool, seed: u64) -> Self {
        Pipeline {
            code,
            decoder: Decoder::new(code, DecoderConfig { max_iters, damping: 0.0 }),
            oracle: DegeneracyOracle::new(code),
            postprocess,
            seed,
        }
    }

    fn capture(&self, pd: f64, trial: u64, out: &DecodeOutcome, noise: &NoisePair, w: &CycleWitness) -> Capture {
        let history = Side::BOTH.map(|s| out.history(s).cloned().unwrap_or_default());
        Capture {
            build: self.code.build,
            pd,
            seed: self.seed,
            trial,
            max_iters: self.decoder.config().max_iters,
            status: out.status,
            iterations: out.iterations,
            side: w.side,
            cycle: CycleRecord {
                kind: Kind::of(w.kind),
                columns: w.columns.clone(),
                rows: w.rows.clone(),
            },
            noise: noise.clone(),
            estimate: NoisePair {
                xi: out.xi_hat.clone(),
                zeta: out.zeta_hat.clone(),
            },
            history,
        }
    }

    /// Runs trial `trial` through sampling, decoding, trap handling and the
    /// final verdict. Captures are recorded only when `capture` is set.
    pub fn run_trial(&self, ws: &mut nbqec::decoder::Workspace, channel: &DepolarizingParams, trial: u64, capture: bool) -> TrialRecord {
        let code = self.code;
        let mut rng = trial_rng(self.seed, trial);
        let noise = sample_noise(channel, &code.field, code.params.n_sym, &mut rng);
        let syn = syndrome(code, &noise).expect("noise length matches the code");
        let mut rec = TrialRecord {
            terminal: Terminal::DetectedFailure,
            strict_fail: true,
            traps: TrapCounts::default(),
            identification_failures: 0,
            postprocess_failures: 0,
            numeric_failure: false,
            captures: Vec::new(),
        };
        let out = match self.decoder.decode(ws, &syn, channel) {
            Ok(out) => out,
            Err(e) => {
                log::debug!("trial {trial}: {e}");
                rec.numeric_failure = true;
                return rec;
            }
        };
        rec.strict_fail = out.xi_hat != noise.xi || out.zeta_hat != noise.zeta;
        let truth = |s: Side| if s == Side::X { &noise.xi } else { &noise.zeta };
        let synd = |s: Side| if s == Side::X { &syn.sigma } else { &syn.tau };

        let mut est = [out.xi_hat.clone(), out.zeta_hat.clone()];
        if out.converged() {
            let v = self.oracle.verdict(&noise, &out.xi_hat, &out.zeta_hat, &syn);
            if v.failure == Some(Detectability::Undetected) {
                for side in Side::BOTH {
                    if let Some(w) = difference_cycle(code, side, truth(side), out.estimate(side)).filter(|w| w.kind == CycleType::TypeII) {
                        rec.traps.seen[1] += 1;
                        if capture {
                            rec.captures.push(self.capture(channel.pd(), trial, &out, &noise, &w));
                        }
                    }
                }
            }
        } else {
            for (s, side) in Side::BOTH.into_iter().enumerate() {
                let hist: &HistorySets = match out.history(side) {
                    Ok(h) => h,
                    Err(_) => {
                        rec.identification_failures += 1;
                        continue;
                    }
                };
                if hist.unsatisfied.is_empty() {
                    continue;
                }
                let w = match identify_cycle(code, side, hist) {
                    Ok(w) => w,
                    Err(e) => {
                        log::trace!("trial {trial} side {side}: {e}");
                        rec.identification_failures += 1;
                        continue;
                    }
                };
                let k = kind_index(classify(code, &w));
                rec.traps.seen[k] += 1;
                if capture {
                    rec.captures.push(self.capture(channel.pd(), trial, &out, &noise, &w));
                }
                if !self.postprocess {
                    continue;
                }
                match postprocess(code, &w, out.estimate(side), synd(side)) {
                    Ok(PostOutcome::Corrected { estimate, .. }) => {
                        if self.oracle.check_syndrome_match(side, &estimate, synd(side)) && self.oracle.check_degenerate(side, truth(side), &estimate) {
                            rec.traps.fixed[k] += 1;
                        }
                        est[s] = estimate;
                    }
                    Ok(PostOutcome::Uncorrectable(_)) => {}
                    Err(e) => {
                        log::trace!("trial {trial} side {side}: {e}");
                        rec.postprocess_failures += 1;
                    }
                }
            }
        }
        let v = self.oracle.verdict(&noise, &est[0], &est[1], &syn);
        rec.terminal = if v.strict_success {
            Terminal::StrictSuccess
        } else if v.degenerate_success {
            Terminal::DegenerateSuccess
        } else if v.failure == Some(Detectability::Undetected) {
            Terminal::UndetectedFailure
        } else {
            Terminal::DetectedFailure
        };
        rec
    }
}

impl PointStats {
    pub fn add(&mut self, r: &TrialRecord) {
        self.trials += 1;
        self.strict_failures += r.strict_fail as u64;
        match r.terminal {
            Terminal::StrictSuccess => self.strict_successes += 1,
            Terminal::DegenerateSuccess => self.degenerate_successes += 1,
            Terminal::DetectedFailure => self.detected_failures += 1,
            Terminal::UndetectedFailure => self.undetected_failures += 1,
        }
        for k in 0..3 {
            self.traps.seen[k] += r.traps.seen[k];
            self.traps.fixed[k] += r.traps.fixed[k];
        }
        self.identification_failures += r.identification_failures;
        self.postprocess_failures += r.postprocess_failures;
        self.numeric_failures += r.numeric_failure as u64;
    }
}

/// Runs trials `0, 1, ...` until the budget is spent or `stop_failures`
/// final failures are seen. Records are reduced in trial order, so the
/// result does not depend on how many threads the current pool has.
pub fn run_point(pipe: &Pipeline, fm: f64, pd: f64, budget: u64, stop_failures: u64, capture: bool) -> (PointStats, Vec<Capture>) {
    let channel = DepolarizingParams::new(pd).expect("validated noise level");
    let mut stats = PointStats::new(fm, pd);
    let mut captures = Vec::new();
    let mut next = 0;
    while next < budget && stats.final_failures() < stop_failures {
        let end = (next + CHUNK).min(budget);
        let records: Vec<TrialRecord> = (next..end)
            .into_par_iter()
            .map_init(|| pipe.decoder.workspace(), |ws, t| pipe.run_trial(ws, &channel, t, capture))
            .collect();
        for r in records {
            if stats.final_failures() >= stop_failures {
                break;
            }
            stats.add(&r);
            captures.extend(r.captures);
        }
        next = end;
    }
    (stats, captures)
}

pub const CSV_HEADER: &str = "fm,pd,R,n,trials,strict_fail,degen_success,undetected_fail,trapI_seen,trapI_fixed,trapII_seen,trapIII_seen,trapIII_fixed,ident_fail,post_fail,fer_strict,fer_final,ci_lo,ci_hi,hashing_rate,detected_fail,numeric_fail,budget,stop_failures";

fn rate_text(r: Result<f64, crate::stats::DomainError>) -> String {
    r.map_or_else(|_| "nan".to_string(), |v| format!("{v:.6}"))
}

pub fn csv_row(s: &PointStats, code: &CssCode, budget: u64, stop_failures: u64) -> String {
    let (lo, hi) = s.ci_final();
    format!(
        "{},{},{:.6},{},{},{},{},{},{},{},{},{},{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{},{},{},{},{}",
        s.fm,
        s.pd,
        code.params.rate(),
        code.params.n,
        s.trials,
        s.strict_failures,
        s.degenerate_successes,
        s.undetected_failures,
        s.traps.seen[0],
        s.traps.fixed[0],
        s.traps.seen[1],
        s.traps.seen[2],
        s.traps.fixed[2],
        s.identification_failures,
        s.postprocess_failures,
        s.fer_strict(),
        s.fer_final(),
        lo,
        hi,
        rate_text(hashing_bound(s.pd)),
        s.detected_failures,
        s.numeric_failures,
        budget,
        stop_failures
    )
}

/// Whitespace-separated columns for plotting tools.
pub fn plot_data(rows: &[PointStats], code: &CssCode) -> String {
    let mut s = String::from("# fm pd fer_strict fer_final ci_lo ci_hi hashing_rate R\n");
    for r in rows {
        let (lo, hi) = r.ci_final();
        let _ = writeln!(
            s,
            "{} {} {:.6e} {:.6e} {:.6e} {:.6e} {} {:.6}",
            r.fm,
            r.pd,
            r.fer_strict(),
            r.fer_final(),
            lo,
            hi,
            rate_text(hashing_bound(r.pd)),
            code.params.rate()
        );
    }
    s
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub rows: Vec<PointStats>,
    pub csv: String,
    pub plot: String,
    pub captures: Vec<Capture>,
}

/// Runs every point of `cfg` on `code` in a pool of `cfg.workers` threads.
pub fn run_sweep_on(code: &CssCode, cfg: &RunConfig) -> Result<SweepResult, SimError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| SimError::Pool(e.to_string()))?;
    let pipe = Pipeline::new(code, cfg.max_iters, cfg.postprocess, cfg.seed);
    let capture = cfg.capture_dir.is_some();
    let mut csv = format!("{CSV_HEADER}\n");
    let mut rows = Vec::new();
    let mut captures = Vec::new();
    for (fm, pd) in cfg.noise_points() {
        let (stats, caps) = pool.install(|| run_point(&pipe, fm, pd, cfg.trials, cfg.stop_failures, capture));
        log::info!(
            "f_m {fm}: {} trials, FER strict {:.3e}, final {:.3e}",
            stats.trials,
            stats.fer_strict(),
            stats.fer_final()
        );
        csv.push_str(&csv_row(&stats, code, cfg.trials, cfg.stop_failures));
        csv.push('\n');
        rows.push(stats);
        captures.extend(caps);
    }
    let plot = plot_data(&rows, code);
    Ok(SweepResult { rows, csv, plot, captures })
}

/// [`run_sweep_on`] with code loading and output files.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepResult, SimError> {
    let code = load_code(&cfg.code, cfg.allow_girth_fallback)?;
    let result = run_sweep_on(&code, cfg)?;
    if let Some(out) = &cfg.out {
        fs::write(out, &result.csv).map_err(io_err(out))?;
        let dat = out.with_extension("dat");
        fs::write(&dat, &result.plot).map_err(io_err(&dat))?;
    }
    if let Some(dir) = &cfg.capture_dir {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        for c in &result.captures {
            let path = dir.join(c.file_name());
            fs::write(&path, c.to_text()).map_err(io_err(&path))?;
        }
    }
    Ok(result)
}

/// What a rerun of a captured trial reproduced.
#[derive(Clone, Debug, PartialEq)]
pub struct Replay {
    pub noise_matches: bool,
    pub exit_matches: bool,
    /// Witness found by rerunning identification (or the difference cycle
    /// for converged captures).
    pub witness: Option<CycleWitness>,
}

impl Replay {
    pub fn witness_matches(&self, c: &Capture) -> bool {
        self.witness.as_ref().is_some_and(|w| {
            w.side == c.side && Kind::of(w.kind) == c.cycle.kind && w.columns == c.cycle.columns && w.rows == c.cycle.rows
        })
    }
}

/// Reruns a captured trial on `code`, which must match the capture's build
/// header.
pub fn replay(capture: &Capture, code: &CssCode) -> Replay {
    let pipe = Pipeline::new(code, capture.max_iters, true, capture.seed);
    let channel = DepolarizingParams::new(capture.pd).expect("parsed pd is in range");
    let mut rng = trial_rng(capture.seed, capture.trial);
    let noise = sample_noise(&channel, &code.field, code.params.n_sym, &mut rng);
    let syn = syndrome(code, &noise).expect("noise length matches the code");
    let Ok(out) = pipe.decoder.decode_once(&syn, &channel) else {
        return Replay { noise_matches: noise == capture.noise, exit_matches: false, witness: None };
    };
    let history = Side::BOTH.map(|s| out.history(s).cloned().unwrap_or_default());
    let exit_matches = out.status == capture.status
        && out.iterations == capture.iterations
        && out.xi_hat == capture.estimate.xi
        && out.zeta_hat == capture.estimate.zeta
        && history == capture.history;
    let side = capture.side;
    let witness = if out.converged() {
        let truth = if side == Side::X { &noise.xi } else { &noise.zeta };
        difference_cycle(code, side, truth, out.estimate(side))
    } else {
        out.history(side).ok().and_then(|h| identify_cycle(code, side, h).ok())
    };
    Replay { noise_matches: noise == capture.noise, exit_matches, witness }
}
