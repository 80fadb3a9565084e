//! Orthogonal non-binary (J=2, L) code pairs: construction, binary expansion,
//! cycle audit and serialization.

mod construct;
mod cycles;
mod expand;
mod io;
mod label;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cycle::Side;
use crate::gf::{default_modulus, Field, FieldError};
use crate::sparse::{BinSparseMatrix, NbSparseMatrix};

pub use construct::{search_exponents, tanner_girth, QcExponents, SearchOptions};
pub use cycles::{enumerate_cycles, enumerate_raw, AuditError, CycleTable, DEFAULT_ENUMERATION_BUDGET};
pub use expand::{expand_binary, expand_x, expand_z};
pub use io::{format_header, parse_code, parse_header, write_code, ParseError};
pub use label::label_nonbinary;

/// Column weight of every code in this crate.
pub const J: usize = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("girth {target} not reached; best girth found is {best}")]
    Girth { best: usize, target: usize },
    #[error("structural check failed: {0}")]
    Structure(String),
    #[error("no valid labelling found in {attempts} attempts")]
    Labeling { attempts: usize },
    #[error("cycle audit of side {side}: {source}")]
    Audit { side: Side, source: AuditError },
}

/// Everything needed to rebuild a code deterministically.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct BuildParams {
    pub e: u32,
    pub l: usize,
    pub p: usize,
    pub modulus: u32,
    pub seed: u64,
}

impl BuildParams {
    /// Parameters with the default modulus for `e`.
    pub fn new(e: u32, l: usize, p: usize, seed: u64) -> Result<Self, BuildError> {
        let modulus = default_modulus(e).ok_or(FieldError::Degree(e))?;
        Ok(BuildParams { e, l, p, modulus, seed })
    }
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    /// Accept girth 8 when girth 12 cannot be found.
    pub allow_girth_fallback: bool,
    pub search_attempts: usize,
    pub label_attempts: usize,
    /// Enumerate and index all 2L-cycles of both matrices.
    pub audit: bool,
    pub enumeration_budget: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            allow_girth_fallback: false,
            search_attempts: SearchOptions::default().attempts,
            label_attempts: 100,
            audit: true,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

/// Size parameters of a code. `n_sym`/`m_sym` count F_q symbols, `n`/`m`
/// count qubits and binary checks per side.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct CodeParams {
    pub e: u32,
    pub l: usize,
    pub p: usize,
    pub q: usize,
    pub n_sym: usize,
    pub m_sym: usize,
    pub n: usize,
    pub m: usize,
    pub rank_x: usize,
    pub rank_z: usize,
    pub k: usize,
}

impl CodeParams {
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Rate of the family when both check matrices have full rank.
    pub fn design_rate(&self) -> f64 {
        1.0 - 4.0 / self.l as f64
    }

    /// Binary rank deficiency beyond `2m - n`, summed over both sides.
    pub fn rank_deficiency(&self) -> usize {
        2 * self.m - self.rank_x - self.rank_z
    }
}

/// A constructed or loaded CSS code with its audit data.
#[derive(Clone, Debug)]
pub struct CssCode {
    pub field: Field,
    pub build: BuildParams,
    pub params: CodeParams,
    pub gamma: NbSparseMatrix,
    pub delta: NbSparseMatrix,
    pub hx: BinSparseMatrix,
    pub hz: BinSparseMatrix,
    /// Tanner-graph girth of the binary supports (the worse side).
    pub girth: usize,
    /// Cycle tables for the X side (cycles of `H_Delta`) and the Z side
    /// (cycles of `H_Gamma`), present when audited.
    pub tables: Option<[CycleTable; 2]>,
}

impl CssCode {
    /// Bundles a labelled pair, recomputing expansions, ranks, girth and the
    /// cycle audit.
    pub fn from_parts(
        field: Field,
        build: BuildParams,
        gamma: NbSparseMatrix,
        delta: NbSparseMatrix,
        opts: &BuildOptions,
    ) -> Result<Self, BuildError> {
        let (l, p) = (build.l, build.p);
        for (name, h) in [("Gamma", &gamma), ("Delta", &delta)] {
            if h.n_rows() != J * p || h.n_cols() != l * p || !h.is_regular(l, J) {
                return Err(BuildError::Structure(format!(
                    "H_{name} is not a ({J}, {l})-regular {}x{} matrix",
                    J * p,
                    l * p
                )));
            }
        }
        if !gamma.is_orthogonal_to(&field, &delta) {
            return Err(BuildError::Structure("H_Gamma H_Delta^T is not zero".into()));
        }
        let (hx, hz) = expand_binary(&field, &gamma, &delta);
        let e = field.e() as usize;
        // Each binary image represents an F_q-linear map, so its F_2 rank is
        // e times the F_q rank.
        let rank_x = e * gamma.rank_col_weight2(&field).expect("column weight 2");
        let rank_z = e * delta.rank_col_weight2(&field).expect("column weight 2");
        let n = e * l * p;
        let params = CodeParams {
            e: field.e(),
            l,
            p,
            q: field.q(),
            n_sym: l * p,
            m_sym: J * p,
            n,
            m: e * J * p,
            rank_x,
            rank_z,
            k: n - rank_x - rank_z,
        };
        if params.rank_deficiency() > 0 {
            log::warn!(
                "check matrices are rank deficient by {}; k/n = {:.4} instead of {:.4}",
                params.rank_deficiency(),
                params.rate(),
                params.design_rate()
            );
        }
        let support = |h: &NbSparseMatrix| {
            BinSparseMatrix::new(h.n_cols(), (0..h.n_rows()).map(|i| h.row_support(i).map(|j| j as u32).collect()).collect())
        };
        let girth = tanner_girth(&support(&gamma)).min(tanner_girth(&support(&delta)));
        let tables = if opts.audit {
            let x = enumerate_cycles(&field, Side::X, &delta, &gamma, l, opts.enumeration_budget)
                .map_err(|source| BuildError::Audit { side: Side::X, source })?;
            let z = enumerate_cycles(&field, Side::Z, &gamma, &delta, l, opts.enumeration_budget)
                .map_err(|source| BuildError::Audit { side: Side::Z, source })?;
            Some([x, z])
        } else {
            None
        };
        Ok(CssCode {
            field,
            build,
            params,
            gamma,
            delta,
            hx,
            hz,
            girth,
            tables,
        })
    }

    /// Check matrix whose syndrome constrains the noise of `side`.
    pub fn check(&self, side: Side) -> &NbSparseMatrix {
        match side {
            Side::X => &self.delta,
            Side::Z => &self.gamma,
        }
    }

    /// Matrix whose row space holds the degenerate errors of `side`.
    pub fn partner(&self, side: Side) -> &NbSparseMatrix {
        match side {
            Side::X => &self.gamma,
            Side::Z => &self.delta,
        }
    }

    pub fn table(&self, side: Side) -> Option<&CycleTable> {
        self.tables.as_ref().map(|t| match side {
            Side::X => &t[0],
            Side::Z => &t[1],
        })
    }

    /// Equality of the defining data, ignoring derived fields.
    pub fn same_matrices(&self, other: &CssCode) -> bool {
        self.build == other.build && self.field == other.field && self.gamma == other.gamma && self.delta == other.delta
    }
}

/// Builds a code: circulant exponent search, labelling, expansion and audit.
/// Deterministic in `params`.
pub fn build_code(params: &BuildParams, opts: &BuildOptions) -> Result<CssCode, BuildError> {
    let field = Field::new(params.e, params.modulus)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let search = SearchOptions {
        target_girth: 12,
        allow_fallback: opts.allow_girth_fallback,
        attempts: opts.search_attempts,
    };
    let (exps, fallback) = search_exponents(params.l, params.p, &search, &mut rng)?;
    let gs = exps.gamma_support();
    let ds = exps.delta_support();
    if !gs.is_orthogonal_to(&ds) {
        return Err(BuildError::Structure("binary supports are not orthogonal".into()));
    }
    let (gamma, delta) = label_nonbinary(&field, &gs, &ds, opts.label_attempts, &mut rng)?;
    let code = CssCode::from_parts(field, *params, gamma, delta, opts)?;
    if fallback {
        log::warn!("code built with girth {} (target 12)", code.girth);
    }
    Ok(code)
}
