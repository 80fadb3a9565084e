//! Replayable records of trapped trials.
//!
//! A capture names the code by its build header, the trial by its seed and
//! index, and stores the sampled noise and the decoder exit state so a test
//! can rerun the trial and compare every step.
//!
//! ```text
//! capture 1
//! code 8 6 128 0x11d 1
//! trial pd 0.075 seed 7 index 1234 max_iters 90
//! exit not_converged 90
//! side X
//! cycle I 12 40 ... | 3 17 ...
//! N X 5 c3
//! E Z 9 1
//! J X 5 12 40
//! I X 3 17
//! end
//! ```
//!
//! `N` and `E` lines list nonzero noise and estimate symbols; `J` and `I`
//! lines list the history sets of one side. The `cycle` line gives the
//! witness type followed by its columns and rows in walk order.

use std::fmt::Write as _;

use nbqec::code::{format_header, parse_header, ParseError};
use nbqec::decoder::HistorySets;
use nbqec::{BuildParams, CycleType, DecodeStatus, Gf, NoisePair, Side};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum CaptureError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `{0}` line")]
    Missing(&'static str),
    #[error("code header: {0}")]
    Header(#[from] ParseError),
}

/// Coarse witness type stored in a capture.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    I,
    II,
    III,
}

impl Kind {
    pub fn of(t: CycleType) -> Self {
        match t {
            CycleType::TypeI { .. } => Kind::I,
            CycleType::TypeII => Kind::II,
            CycleType::TypeIII => Kind::III,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Kind::I => "I",
            Kind::II => "II",
            Kind::III => "III",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleRecord {
    pub kind: Kind,
    pub columns: Vec<usize>,
    pub rows: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Capture {
    pub build: BuildParams,
    pub pd: f64,
    pub seed: u64,
    pub trial: u64,
    pub max_iters: usize,
    pub status: DecodeStatus,
    pub iterations: usize,
    /// Side on which the cycle was found.
    pub side: Side,
    pub cycle: CycleRecord,
    pub noise: NoisePair,
    pub estimate: NoisePair,
    pub history: [HistorySets; 2],
}

fn side_tag(s: Side) -> &'static str {
    match s {
        Side::X => "X",
        Side::Z => "Z",
    }
}

fn sparse(out: &mut String, tag: char, side: Side, v: &[Gf]) {
    for (j, x) in v.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
        let _ = writeln!(out, "{tag} {} {j} {:x}", side_tag(side), x.0);
    }
}

fn list(out: &mut String, tag: char, side: Side, v: &[usize]) {
    let _ = write!(out, "{tag} {}", side_tag(side));
    for x in v {
        let _ = write!(out, " {x}");
    }
    out.push('\n');
}

impl Capture {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "capture {FORMAT_VERSION}");
        let _ = writeln!(s, "code {}", format_header(&self.build));
        let _ = writeln!(s, "trial pd {:?} seed {} index {} max_iters {}", self.pd, self.seed, self.trial, self.max_iters);
        let status = match self.status {
            DecodeStatus::Converged => "converged",
            DecodeStatus::NotConverged => "not_converged",
        };
        let _ = writeln!(s, "exit {status} {}", self.iterations);
        let _ = writeln!(s, "side {}", side_tag(self.side));
        let _ = write!(s, "cycle {}", self.cycle.kind.tag());
        for c in &self.cycle.columns {
            let _ = write!(s, " {c}");
        }
        s.push_str(" |");
        for r in &self.cycle.rows {
            let _ = write!(s, " {r}");
        }
        s.push('\n');
        sparse(&mut s, 'N', Side::X, &self.noise.xi);
        sparse(&mut s, 'N', Side::Z, &self.noise.zeta);
        sparse(&mut s, 'E', Side::X, &self.estimate.xi);
        sparse(&mut s, 'E', Side::Z, &self.estimate.zeta);
        for (side, h) in Side::BOTH.into_iter().zip(&self.history) {
            list(&mut s, 'J', side, &h.changed);
            list(&mut s, 'I', side, &h.unsatisfied);
        }
        s.push_str("end\n");
        s
    }

    /// Parses a capture. Symbol vectors get length `L P` from the code line.
    pub fn parse(text: &str) -> Result<Self, CaptureError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let syntax = |line: usize, msg: &str| CaptureError::Syntax { line, msg: msg.to_string() };
        let mut next = |what: &'static str| lines.next().ok_or(CaptureError::Missing(what));

        let (ln, l) = next("capture")?;
        match l.strip_prefix("capture ") {
            Some(v) if v.trim() == FORMAT_VERSION.to_string() => {}
            _ => return Err(syntax(ln, "expected `capture 1`")),
        }
        let (ln, l) = next("code")?;
        let header = l.strip_prefix("code ").ok_or_else(|| syntax(ln, "expected `code` line"))?;
        let build = parse_header(header, ln)?;
        let n = build.l * build.p;
        let m = 2 * build.p;

        let (ln, l) = next("trial")?;
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != 9 || t[0] != "trial" || t[1] != "pd" || t[3] != "seed" || t[5] != "index" || t[7] != "max_iters" {
            return Err(syntax(ln, "expected `trial pd <p> seed <s> index <i> max_iters <n>`"));
        }
        let bad = |what: &str| syntax(ln, &format!("invalid {what}"));
        let pd: f64 = t[2].parse().map_err(|_| bad("pd"))?;
        if !(0.0..=0.75).contains(&pd) {
            return Err(bad("pd"));
        }
        let seed = t[4].parse().map_err(|_| bad("seed"))?;
        let trial = t[6].parse().map_err(|_| bad("index"))?;
        let max_iters = t[8].parse().map_err(|_| bad("max_iters"))?;

        let (ln, l) = next("exit")?;
        let t: Vec<&str> = l.split_whitespace().collect();
        let status = match t.as_slice() {
            ["exit", "converged", _] => DecodeStatus::Converged,
            ["exit", "not_converged", _] => DecodeStatus::NotConverged,
            _ => return Err(syntax(ln, "expected `exit converged|not_converged <iterations>`")),
        };
        let iterations = t[2].parse().map_err(|_| syntax(ln, "invalid iteration count"))?;

        let (ln, l) = next("side")?;
        let side = match l {
            "side X" => Side::X,
            "side Z" => Side::Z,
            _ => return Err(syntax(ln, "expected `side X` or `side Z`")),
        };

        let (ln, l) = next("cycle")?;
        let body = l.strip_prefix("cycle ").ok_or_else(|| syntax(ln, "expected `cycle` line"))?;
        let (left, right) = body.split_once('|').ok_or_else(|| syntax(ln, "cycle line needs `|`"))?;
        let mut left = left.split_whitespace();
        let kind = match left.next() {
            Some("I") => Kind::I,
            Some("II") => Kind::II,
            Some("III") => Kind::III,
            _ => return Err(syntax(ln, "unknown cycle type")),
        };
        let idx = |s: &str, bound: usize| -> Result<usize, CaptureError> {
            match s.parse::<usize>() {
                Ok(v) if v < bound => Ok(v),
                _ => Err(syntax(ln, &format!("index `{s}` out of range"))),
            }
        };
        let columns = left.map(|s| idx(s, n)).collect::<Result<Vec<_>, _>>()?;
        let rows = right.split_whitespace().map(|s| idx(s, m)).collect::<Result<Vec<_>, _>>()?;
        if columns.len() != build.l || rows.len() != build.l {
            return Err(syntax(ln, "cycle needs L columns and L rows"));
        }

        let mut noise = NoisePair::zero(n);
        let mut estimate = NoisePair::zero(n);
        let mut history: [HistorySets; 2] = Default::default();
        let q = 1u32 << build.e;
        let mut done = false;
        for (ln, l) in lines.by_ref() {
            if l == "end" {
                done = true;
                break;
            }
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() < 2 {
                return Err(syntax(ln, "truncated line"));
            }
            let s = match t[1] {
                "X" => 0,
                "Z" => 1,
                _ => return Err(syntax(ln, "side must be X or Z")),
            };
            match t[0] {
                "N" | "E" => {
                    if t.len() != 4 {
                        return Err(syntax(ln, "expected `<tag> <side> <index> <hex value>`"));
                    }
                    let j = t[2].parse::<usize>().ok().filter(|&j| j < n).ok_or_else(|| syntax(ln, "symbol index out of range"))?;
                    let v = u32::from_str_radix(t[3], 16).ok().filter(|&v| v < q).ok_or_else(|| syntax(ln, "symbol value out of range"))?;
                    let target = if t[0] == "N" { &mut noise } else { &mut estimate };
                    let vec = if s == 0 { &mut target.xi } else { &mut target.zeta };
                    vec[j] = Gf(v as u16);
                }
                "J" | "I" => {
                    let bound = if t[0] == "J" { n } else { m };
                    let v = t[2..]
                        .iter()
                        .map(|x| x.parse::<usize>().ok().filter(|&x| x < bound).ok_or_else(|| syntax(ln, "index out of range")))
                        .collect::<Result<Vec<_>, _>>()?;
                    if t[0] == "J" {
                        history[s].changed = v;
                    } else {
                        history[s].unsatisfied = v;
                    }
                }
                _ => return Err(syntax(ln, "unknown record tag")),
            }
        }
        if !done {
            return Err(CaptureError::Missing("end"));
        }
        Ok(Capture {
            build,
            pd,
            seed,
            trial,
            max_iters,
            status,
            iterations,
            side,
            cycle: CycleRecord { kind, columns, rows },
            noise,
            estimate,
            history,
        })
    }

    /// File name that sorts captures by code, noise level and trial.
    pub fn file_name(&self) -> String {
        let b = &self.build;
        format!(
            "e{}_l{}_p{}_s{}_pd{:.5}_t{:08}_{}_{}.cap",
            b.e,
            b.l,
            b.p,
            b.seed,
            self.pd,
            self.trial,
            side_tag(self.side),
            self.cycle.kind.tag()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Capture {
        let build = BuildParams::new(4, 6, 16, 3).unwrap();
        let mut noise = NoisePair::zero(96);
        noise.xi[5] = Gf(3);
        noise.zeta[90] = Gf(15);
        let mut estimate = NoisePair::zero(96);
        estimate.xi[7] = Gf(1);
        Capture {
            build,
            pd: 0.075,
            seed: 7,
            trial: 12,
            max_iters: 90,
            status: DecodeStatus::NotConverged,
            iterations: 90,
            side: Side::X,
            cycle: CycleRecord { kind: Kind::III, columns: vec![0, 1, 2, 3, 4, 5], rows: vec![6, 7, 8, 9, 10, 11] },
            noise,
            estimate,
            history: [HistorySets { changed: vec![5, 7], unsatisfied: vec![3] }, HistorySets::default()],
        }
    }

    #[test]
    fn text_round_trip() {
        let c = sample();
        let text = c.to_text();
        assert_eq!(Capture::parse(&text).unwrap(), c);
        assert!(c.file_name().ends_with("_X_III.cap"));
    }

    #[test]
    fn rejects_damaged_text() {
        let text = sample().to_text();
        assert_eq!(Capture::parse(&text.replace("end\n", "")), Err(CaptureError::Missing("end")));
        assert!(Capture::parse(&text.replace("N X 5 3", "N X 500 3")).is_err());
        assert!(Capture::parse(&text.replace("N X 5 3", "N X 5 10")).is_err());
        assert!(Capture::parse(&text.replace("cycle III", "cycle IV")).is_err());
        assert!(Capture::parse(&text.replace("capture 1", "capture 2")).is_err());
        assert!(Capture::parse("").is_err());
    }
}
