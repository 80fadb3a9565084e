//! Run configuration: a `key = value` file merged with command-line
//! overrides.

use std::path::PathBuf;

use nbqec::BuildParams;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("`{key}`: {msg}")]
    Value { key: String, msg: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum CodeSource {
    Build(BuildParams),
    File(PathBuf),
}

/// Which noise parameter the sweep values are given in.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum NoiseAxis {
    /// Marginal flip probability `f_m`.
    Flip,
    /// Depolarizing probability `p_D = 3 f_m / 2`.
    Depolarizing,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub code: CodeSource,
    pub axis: NoiseAxis,
    pub points: Vec<f64>,
    /// Trial budget per point.
    pub trials: u64,
    /// Stop a point after this many final failures.
    pub stop_failures: u64,
    pub max_iters: usize,
    pub seed: u64,
    pub postprocess: bool,
    pub out: Option<PathBuf>,
    pub capture_dir: Option<PathBuf>,
    pub workers: usize,
    pub allow_girth_fallback: bool,
}

pub const DEFAULT_STOP_FAILURES: u64 = 100;

impl RunConfig {
    /// `(f_m, p_D)` of every sweep point.
    pub fn noise_points(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|&x| match self.axis {
                NoiseAxis::Flip => (x, 1.5 * x),
                NoiseAxis::Depolarizing => (2.0 * x / 3.0, x),
            })
            .collect()
    }
}

/// One layer of settings; later layers override earlier ones field by field.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigLayer {
    pub code: Option<CodeSource>,
    pub noise: Option<(NoiseAxis, Vec<f64>)>,
    pub trials: Option<u64>,
    pub stop_failures: Option<u64>,
    pub max_iters: Option<usize>,
    pub seed: Option<u64>,
    pub postprocess: Option<bool>,
    pub out: Option<PathBuf>,
    pub capture_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub allow_girth_fallback: Option<bool>,
}

fn value_err(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        msg: msg.into(),
    }
}

/// Comma- or whitespace-separated list of probabilities.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let items: Vec<&str> = s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
    if items.is_empty() {
        return Err("empty list".into());
    }
    items
        .into_iter()
        .map(|t| {
            let v: f64 = t.parse().map_err(|_| format!("`{t}` is not a number"))?;
            if !v.is_finite() || v < 0.0 {
                return Err(format!("`{t}` is not a probability"));
            }
            Ok(v)
        })
        .collect()
}

/// `e,L,P,seed`, with an optional fifth hexadecimal modulus.
pub fn parse_build(s: &str) -> Result<BuildParams, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 && parts.len() != 5 {
        return Err("expected e,L,P,seed[,modulus]".into());
    }
    let num = |t: &str| t.parse::<u64>().map_err(|_| format!("`{t}` is not an integer"));
    let e = num(parts[0])?;
    let l = num(parts[1])?;
    let p = num(parts[2])?;
    let seed = num(parts[3])?;
    if e > 16 || l > 64 || p > 65_536 {
        return Err("parameters out of range".into());
    }
    let mut params = BuildParams::new(e as u32, l as usize, p as usize, seed).map_err(|e| e.to_string())?;
    if let Some(m) = parts.get(4) {
        let m = m.trim_start_matches("0x");
        params.modulus = u32::from_str_radix(m, 16).map_err(|_| format!("`{m}` is not a hexadecimal modulus"))?;
    }
    Ok(params)
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(value_err(key, format!("`{v}` is not a boolean"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| value_err(key, format!("`{v}` is not a valid number")))
}

impl ConfigLayer {
    /// Parses a configuration file. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut layer = ConfigLayer::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    msg: "expected `key = value`".into(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    msg: format!("`{key}` has no value"),
                });
            }
            layer.set(key, value).map_err(|e| match e {
                ConfigError::UnknownKey { key, .. } => ConfigError::UnknownKey { line, key },
                ConfigError::Value { key, msg } => ConfigError::Syntax {
                    line,
                    msg: format!("`{key}`: {msg}"),
                },
                other => other,
            })?;
        }
        Ok(layer)
    }

    /// Sets one key. Giving two code sources or both noise axes in the same
    /// layer is an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "code" | "build" => {
                if self.code.is_some() {
                    return Err(value_err(key, "code source given twice"));
                }
                self.code = Some(if key == "code" {
                    CodeSource::File(PathBuf::from(value))
                } else {
                    CodeSource::Build(parse_build(value).map_err(|m| value_err(key, m))?)
                });
            }
            "fm" | "pd" => {
                if self.noise.is_some() {
                    return Err(value_err(key, "give exactly one of fm and pd"));
                }
                let axis = if key == "fm" { NoiseAxis::Flip } else { NoiseAxis::Depolarizing };
                self.noise = Some((axis, parse_list(value).map_err(|m| value_err(key, m))?));
            }
            "trials" => self.trials = Some(parse_num(key, value)?),
            "stop_failures" => self.stop_failures = Some(parse_num(key, value)?),
            "max_iters" => self.max_iters = Some(parse_num(key, value)?),
            "seed" => self.seed = Some(parse_num(key, value)?),
            "postprocess" => self.postprocess = Some(parse_bool(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "capture_dir" => self.capture_dir = Some(PathBuf::from(value)),
            "workers" => self.workers = Some(parse_num(key, value)?),
            "girth_fallback" => self.allow_girth_fallback = Some(parse_bool(key, value)?),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    pub fn merge(mut self, over: ConfigLayer) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(code, noise, trials, stop_failures, max_iters, seed, postprocess, out, capture_dir, workers, allow_girth_fallback);
        self
    }

    pub fn finish(self) -> Result<RunConfig, ConfigError> {
        let code = self.code.ok_or_else(|| ConfigError::Invalid("no code source: give `build` or `code`".into()))?;
        let (axis, points) = self.noise.ok_or_else(|| ConfigError::Invalid("no noise levels: give `fm` or `pd`".into()))?;
        for &x in &points {
            let pd = if axis == NoiseAxis::Flip { 1.5 * x } else { x };
            if pd > 0.75 {
                return Err(ConfigError::Invalid(format!("noise level {x} gives p_D = {pd} > 3/4")));
            }
        }
        let trials = self.trials.unwrap_or(10_000);
        if trials == 0 {
            return Err(ConfigError::Invalid("trials must be at least 1".into()));
        }
        let max_iters = self.max_iters.unwrap_or(90);
        if max_iters == 0 {
            return Err(ConfigError::Invalid("max_iters must be at least 1".into()));
        }
        let stop_failures = self.stop_failures.unwrap_or(DEFAULT_STOP_FAILURES);
        if stop_failures == 0 {
            return Err(ConfigError::Invalid("stop_failures must be at least 1".into()));
        }
        Ok(RunConfig {
            code,
            axis,
            points,
            trials,
            stop_failures,
            max_iters,
            seed: self.seed.unwrap_or(1),
            postprocess: self.postprocess.unwrap_or(true),
            out: self.out,
            capture_dir: self.capture_dir,
            workers: self.workers.unwrap_or(1).max(1),
            allow_girth_fallback: self.allow_girth_fallback.unwrap_or(true),
        })
    }
}
