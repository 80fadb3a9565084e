use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nbqec::code::write_code;
use nbqec_sim::config::{parse_build, parse_list};
use nbqec_sim::{load_code, run_sweep, CodeSource, ConfigError, ConfigLayer, NoiseAxis, SimError};

/// Frame-error-rate sweeps for non-binary quantum LDPC codes.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// `key = value` configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Load the code from a file written by `--dump-code`.
    #[arg(long, conflicts_with = "build")]
    code: Option<PathBuf>,
    /// Build the code from `e,L,P,seed`.
    #[arg(long, value_parser = parse_build)]
    build: Option<nbqec::BuildParams>,
    /// Marginal flip probabilities, comma separated.
    #[arg(long, conflicts_with = "pd")]
    fm: Option<String>,
    /// Depolarizing probabilities, comma separated.
    #[arg(long)]
    pd: Option<String>,
    /// Trial budget per point.
    #[arg(long)]
    trials: Option<u64>,
    /// Stop a point after this many final failures.
    #[arg(long)]
    stop_failures: Option<u64>,
    /// Decoder iteration cap (default 90).
    #[arg(long)]
    max_iters: Option<usize>,
    /// Run seed; trial `t` uses stream `t` of this seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Report plain decoder results without trap correction.
    #[arg(long)]
    no_postprocess: bool,
    /// CSV output path; plot data goes next to it with extension `.dat`.
    /// Without it the CSV is printed.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for captures of trapped trials.
    #[arg(long)]
    capture_dir: Option<PathBuf>,
    /// Worker threads. Results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    /// Fail instead of accepting a girth-8 construction.
    #[arg(long)]
    no_girth_fallback: bool,
    /// Write the code to this file and exit.
    #[arg(long)]
    dump_code: Option<PathBuf>,
}

fn noise(cli: &Cli) -> Result<Option<(NoiseAxis, Vec<f64>)>, ConfigError> {
    let (axis, key, text) = match (&cli.fm, &cli.pd) {
        (Some(t), _) => (NoiseAxis::Flip, "fm", t),
        (None, Some(t)) => (NoiseAxis::Depolarizing, "pd", t),
        (None, None) => return Ok(None),
    };
    let v = parse_list(text).map_err(|msg| ConfigError::Value { key: key.into(), msg })?;
    Ok(Some((axis, v)))
}

fn layer(cli: &Cli) -> Result<ConfigLayer, ConfigError> {
    Ok(ConfigLayer {
        code: cli.code.clone().map(CodeSource::File).or(cli.build.map(CodeSource::Build)),
        noise: noise(cli)?,
        trials: cli.trials,
        stop_failures: cli.stop_failures,
        max_iters: cli.max_iters,
        seed: cli.seed,
        postprocess: cli.no_postprocess.then_some(false),
        out: cli.out.clone(),
        capture_dir: cli.capture_dir.clone(),
        workers: cli.workers,
        allow_girth_fallback: cli.no_girth_fallback.then_some(false),
    })
}

fn run(cli: Cli) -> Result<(), SimError> {
    let base = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| SimError::Io { path: path.clone(), source })?;
            ConfigLayer::parse(&text)?
        }
        None => ConfigLayer::default(),
    };
    let merged = base.merge(layer(&cli)?);
    if let Some(path) = &cli.dump_code {
        let source = merged.code.clone().ok_or_else(|| ConfigError::Invalid("no code source".into()))?;
        let code = load_code(&source, merged.allow_girth_fallback.unwrap_or(true))?;
        std::fs::write(path, write_code(&code)).map_err(|source| SimError::Io { path: path.clone(), source })?;
        eprintln!("wrote {} (n = {}, k = {}, girth {})", path.display(), code.params.n, code.params.k, code.girth);
        return Ok(());
    }
    let cfg = merged.finish()?;
    let result = run_sweep(&cfg)?;
    if cfg.out.is_none() {
        print!("{}", result.csv);
    }
    if let Some(dir) = &cfg.capture_dir {
        eprintln!("{} captures written to {}", result.captures.len(), dir.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
