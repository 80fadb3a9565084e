//! Direct solution of the cycle system left behind by a trapped decoder.
//!
//! With the estimate assumed correct off the cycle, the cycle symbols must
//! satisfy `C x_J = r`, where `C` is the L x L restriction of the check
//! matrix and `r` is the measured syndrome on the cycle rows with the
//! off-cycle contribution removed. Every row of `C` touches two consecutive
//! cycle columns, so the system is solved by substitution around the cycle.

use thiserror::Error;

use crate::code::CssCode;
use crate::cycle::{CycleType, CycleWitness, Side};
use crate::gf::{Field, Gf};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PostprocessError {
    #[error("cycle system is inconsistent with the off-cycle estimate")]
    Inconsistent,
    #[error("cycle matrix classified as full rank is singular")]
    Singular,
    #[error("witness of type {0} cannot be solved by this routine")]
    WrongType(&'static str),
}

/// The system `C x_J = r` for one identified cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualSystem {
    pub columns: Vec<usize>,
    pub rows: Vec<usize>,
    pub coeffs: Vec<(Gf, Gf)>,
    pub target: Vec<Gf>,
}

/// Field-operation tally of a solver call.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct OpCount {
    pub mul: usize,
    pub div: usize,
    pub add: usize,
}

impl OpCount {
    pub fn total(&self) -> usize {
        self.mul + self.div + self.add
    }
}

struct Counted<'f> {
    field: &'f Field,
    ops: OpCount,
}

impl Counted<'_> {
    fn mul(&mut self, a: Gf, b: Gf) -> Gf {
        self.ops.mul += 1;
        self.field.mul(a, b)
    }
    fn div(&mut self, a: Gf, b: Gf) -> Gf {
        self.ops.div += 1;
        self.field.div(a, b)
    }
    fn add(&mut self, a: Gf, b: Gf) -> Gf {
        self.ops.add += 1;
        a + b
    }
}

/// Builds `r` from the measured syndrome and the syndrome of the current
/// estimate, touching only the cycle rows: for cycle row `i_k`,
/// `r_k = sigma_i + (H x_hat)_i + c_k x_hat_{j_k} + c'_k x_hat_{j_(k+1)}`.
pub fn build_residual_with(field: &Field, witness: &CycleWitness, estimate: &[Gf], syndrome: &[Gf], estimate_syndrome: &[Gf]) -> ResidualSystem {
    let l = witness.len();
    let target = (0..l)
        .map(|k| {
            let i = witness.rows[k];
            let (c, d) = witness.coeffs[k];
            let on_cycle = field.mul(c, estimate[witness.columns[k]]) + field.mul(d, estimate[witness.columns[(k + 1) % l]]);
            syndrome[i] + estimate_syndrome[i] + on_cycle
        })
        .collect();
    ResidualSystem {
        columns: witness.columns.clone(),
        rows: witness.rows.clone(),
        coeffs: witness.coeffs.clone(),
        target,
    }
}

/// [`build_residual_with`] computing the estimate's syndrome on the cycle rows.
pub fn build_residual(code: &CssCode, witness: &CycleWitness, estimate: &[Gf], syndrome: &[Gf]) -> ResidualSystem {
    let h = code.check(witness.side);
    let mut est = vec![Gf::ZERO; h.n_rows()];
    for &i in &witness.rows {
        est[i] = h.row_dot(&code.field, i, estimate);
    }
    build_residual_with(&code.field, witness, estimate, syndrome, &est)
}

impl ResidualSystem {
    fn start(&self) -> usize {
        (0..self.columns.len()).min_by_key(|&k| self.columns[k]).unwrap_or(0)
    }

    /// Particular solution of a rank L-1 system with the lowest-index cycle
    /// column fixed to zero. Values follow `columns` order.
    pub fn solve_type1(&self, field: &Field) -> Result<(Vec<Gf>, OpCount), PostprocessError> {
        let l = self.columns.len();
        let mut f = Counted { field, ops: OpCount::default() };
        let s = self.start();
        let mut x = vec![Gf::ZERO; l];
        // Row k: c_k x_k + c'_k x_{k+1} = r_k.
        for step in 0..l - 1 {
            let k = (s + step) % l;
            let (c, d) = self.coeffs[k];
            let t = f.mul(c, x[k]);
            let t = f.add(self.target[k], t);
            x[(k + 1) % l] = f.div(t, d);
        }
        let k = (s + l - 1) % l;
        let (c, d) = self.coeffs[k];
        let a = f.mul(c, x[k]);
        let b = f.mul(d, x[s]);
        if f.add(a, b) != self.target[k] {
            return Err(PostprocessError::Inconsistent);
        }
        Ok((x, f.ops))
    }

    /// Unique solution of a full-rank system. Each symbol is carried as an
    /// affine function `alpha t + beta` of the first one, and the closing row
    /// fixes `t`.
    pub fn solve_type3(&self, field: &Field) -> Result<(Vec<Gf>, OpCount), PostprocessError> {
        let l = self.columns.len();
        let mut f = Counted { field, ops: OpCount::default() };
        let mut alpha = vec![Gf::ZERO; l];
        let mut beta = vec![Gf::ZERO; l];
        alpha[0] = Gf::ONE;
        for k in 0..l - 1 {
            let (c, d) = self.coeffs[k];
            let a = f.mul(c, alpha[k]);
            alpha[k + 1] = f.div(a, d);
            let b = f.mul(c, beta[k]);
            let b = f.add(self.target[k], b);
            beta[k + 1] = f.div(b, d);
        }
        let (c, d) = self.coeffs[l - 1];
        let ca = f.mul(c, alpha[l - 1]);
        let coef = f.add(ca, d);
        if coef.is_zero() {
            return Err(PostprocessError::Singular);
        }
        let cb = f.mul(c, beta[l - 1]);
        let rhs = f.add(self.target[l - 1], cb);
        let t = f.div(rhs, coef);
        let x = (0..l)
            .map(|k| {
                let at = f.mul(alpha[k], t);
                f.add(at, beta[k])
            })
            .collect();
        Ok((x, f.ops))
    }
}

/// Record emitted for a cycle that cannot be corrected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Type2Record {
    pub side: Side,
    pub columns: Vec<usize>,
    pub type2_uncorrectable: bool,
}

pub fn handle_type2(witness: &CycleWitness) -> Type2Record {
    Type2Record {
        side: witness.side,
        columns: witness.columns.clone(),
        type2_uncorrectable: true,
    }
}

/// Result of post-processing one side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PostOutcome {
    /// Corrected estimate for the whole side.
    Corrected { kind: CycleType, estimate: Vec<Gf>, ops: OpCount },
    Uncorrectable(Type2Record),
}

/// Solves the cycle system for `witness` and splices the solution into a
/// copy of `estimate`.
pub fn postprocess(code: &CssCode, witness: &CycleWitness, estimate: &[Gf], syndrome: &[Gf]) -> Result<PostOutcome, PostprocessError> {
    let sys = build_residual(code, witness, estimate, syndrome);
    let (x, ops) = match witness.kind {
        CycleType::TypeI { .. } => sys.solve_type1(&code.field)?,
        CycleType::TypeIII => sys.solve_type3(&code.field)?,
        CycleType::TypeII => return Ok(PostOutcome::Uncorrectable(handle_type2(witness))),
    };
    let mut out = estimate.to_vec();
    for (&j, &v) in sys.columns.iter().zip(&x) {
        out[j] = v;
    }
    Ok(PostOutcome::Corrected {
        kind: witness.kind,
        estimate: out,
        ops,
    })
}
