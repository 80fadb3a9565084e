//! Line-oriented text format for codes.
//!
//! ```text
//! e L P modulus seed
//! G i j coeff      (one line per nonzero of H_Gamma)
//! D i j coeff      (one line per nonzero of H_Delta)
//! ```
//!
//! The modulus and coefficients are hexadecimal, indices are decimal and
//! 0-based. Entries appear row by row with ascending columns, all `G` lines
//! before all `D` lines, so equal codes give byte-identical files.

use std::fmt::Write as _;

use thiserror::Error;

use crate::gf::{Field, Gf};
use crate::sparse::NbSparseMatrix;

use super::{BuildError, BuildOptions, BuildParams, CssCode, J};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("file ends early: expected {expected} {tag} entries, found {found}")]
    Truncated { tag: char, expected: usize, found: usize },
    #[error("line {line}: coefficient {value:#x} is not a nonzero element of GF(2^{e})")]
    Coefficient { line: usize, value: u32, e: u32 },
    #[error("line {line}: entries are not in canonical order")]
    Order { line: usize },
    #[error(transparent)]
    Build(#[from] BuildError),
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, msg: msg.into() }
}

pub(crate) fn parse_hex(s: &str) -> Option<u32> {
    let digits = s.strip_prefix("0x").unwrap_or(s);
    if digits.is_empty() || digits.len() > 8 {
        return None;
    }
    u32::from_str_radix(digits, 16).ok()
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, ParseError> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| syntax(line, format!("invalid {what} `{tok}`")))
}

/// Parses the header line `e L P modulus seed`.
pub fn parse_header(text: &str, line: usize) -> Result<BuildParams, ParseError> {
    let mut it = text.split_whitespace();
    let e: u32 = parse_num(it.next(), line, "extension degree")?;
    let l: usize = parse_num(it.next(), line, "row weight")?;
    let p: usize = parse_num(it.next(), line, "circulant size")?;
    let modulus = it
        .next()
        .and_then(parse_hex)
        .ok_or_else(|| syntax(line, "invalid modulus"))?;
    let seed: u64 = parse_num(it.next(), line, "seed")?;
    if it.next().is_some() {
        return Err(syntax(line, "trailing tokens in header"));
    }
    if !(4..=64).contains(&l) || l % 2 != 0 {
        return Err(syntax(line, format!("row weight {l} must be even and in 4..=64")));
    }
    if !(2..=1 << 16).contains(&p) {
        return Err(syntax(line, format!("circulant size {p} out of range")));
    }
    Ok(BuildParams { e, l, p, modulus, seed })
}

pub fn format_header(b: &BuildParams) -> String {
    format!("{} {} {} {:#x} {}", b.e, b.l, b.p, b.modulus, b.seed)
}

/// Serializes a code to its canonical text form.
pub fn write_code(code: &CssCode) -> String {
    let mut out = format_header(&code.build);
    out.push('\n');
    for (tag, h) in [('G', &code.gamma), ('D', &code.delta)] {
        for (i, row) in h.rows().enumerate() {
            for &(j, c) in row {
                let _ = writeln!(out, "{tag} {i} {j} {:x}", c.0);
            }
        }
    }
    out
}

/// Parses a code file and rebuilds the derived data.
pub fn parse_code(text: &str, opts: &BuildOptions) -> Result<CssCode, ParseError> {
    let mut lines = text.lines().enumerate().map(|(k, s)| (k + 1, s));
    let (hline, header) = lines
        .by_ref()
        .find(|(_, s)| !s.trim().is_empty())
        .ok_or_else(|| syntax(1, "empty file"))?;
    let build = parse_header(header, hline)?;
    let field = Field::new(build.e, build.modulus).map_err(BuildError::from)?;
    let (l, p) = (build.l, build.p);
    let (n_rows, n_cols) = (J * p, l * p);
    let per_matrix = n_rows * l;

    let mut mats: [Vec<Vec<(u32, Gf)>>; 2] = [vec![Vec::new(); n_rows], vec![Vec::new(); n_rows]];
    let mut counts = [0usize; 2];
    let mut last: Option<(usize, usize, usize)> = None;
    for (ln, raw) in lines {
        let s = raw.trim();
        if s.is_empty() {
            continue;
        }
        let mut it = s.split_whitespace();
        let which = match it.next() {
            Some("G") => 0,
            Some("D") => 1,
            Some(t) => return Err(syntax(ln, format!("unknown record `{t}`"))),
            None => unreachable!(),
        };
        let i: usize = parse_num(it.next(), ln, "row index")?;
        let j: usize = parse_num(it.next(), ln, "column index")?;
        let value = it
            .next()
            .and_then(parse_hex)
            .ok_or_else(|| syntax(ln, "invalid coefficient"))?;
        if it.next().is_some() {
            return Err(syntax(ln, "trailing tokens"));
        }
        if i >= n_rows || j >= n_cols {
            return Err(syntax(ln, format!("entry ({i}, {j}) outside {n_rows}x{n_cols}")));
        }
        if value == 0 || value as usize >= field.q() {
            return Err(ParseError::Coefficient { line: ln, value, e: build.e });
        }
        let key = (which, i, j);
        if last.is_some_and(|prev| prev >= key) {
            return Err(ParseError::Order { line: ln });
        }
        last = Some(key);
        counts[which] += 1;
        if counts[which] > per_matrix {
            return Err(syntax(ln, "too many entries"));
        }
        mats[which][i].push((j as u32, Gf(value as u16)));
    }
    for (which, tag) in [(0, 'G'), (1, 'D')] {
        if counts[which] != per_matrix {
            return Err(ParseError::Truncated {
                tag,
                expected: per_matrix,
                found: counts[which],
            });
        }
    }
    let [g, d] = mats;
    let gamma = NbSparseMatrix::from_rows(n_cols, g);
    let delta = NbSparseMatrix::from_rows(n_cols, d);
    Ok(CssCode::from_parts(field, build, gamma, delta, opts)?)
}
