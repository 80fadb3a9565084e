//! Ground-truth success judgement for simulations.
//!
//! An estimate is a degenerate success when, on each side, the difference to
//! the true noise lies in the F_q row space of the partner matrix (`H_Gamma`
//! for `xi`, `H_Delta` for `zeta`). Membership is decided exactly by solving
//! `y^T H = v` over the row graph of the column-weight-2 partner matrix.

use std::collections::VecDeque;

use crate::channel::{NoisePair, SyndromePair};
use crate::code::CssCode;
use crate::cycle::Side;
use crate::gf::{Field, Gf};
use crate::sparse::NbSparseMatrix;

/// Exact row-space membership for a matrix whose columns have weight at most
/// 2, in O(nnz) per query.
///
/// Rows are vertices and columns edges. Along a spanning forest every `y_u`
/// is an affine function `alpha_u t + beta_u` of its component's root value
/// `t`; `alpha` depends only on the matrix, `beta` on the query. Edges off the
/// forest then pin or contradict `t`.
#[derive(Clone, Debug)]
pub struct RowSpaceSolver {
    n_rows: usize,
    n_cols: usize,
    /// Tree edges `(child, parent, column)` in BFS order.
    tree: Vec<(u32, u32, u32)>,
    roots: Vec<u32>,
    comp: Vec<u32>,
    alpha: Vec<Gf>,
    /// Columns not on the forest, with their rows.
    closing: Vec<(u32, u32, Option<u32>)>,
    coeffs: Vec<[(u32, Gf); 2]>,
    weight: Vec<u8>,
}

impl RowSpaceSolver {
    pub fn new(field: &Field, h: &NbSparseMatrix) -> Self {
        let (m, n) = (h.n_rows(), h.n_cols());
        let mut coeffs = vec![[(0u32, Gf::ZERO); 2]; n];
        let mut weight = vec![0u8; n];
        for j in 0..n {
            let col = h.col(j);
            assert!(col.len() <= 2, "row-space solver needs column weight at most 2");
            weight[j] = col.len() as u8;
            for (slot, &e) in coeffs[j].iter_mut().zip(col) {
                *slot = e;
            }
        }
        let mut comp = vec![u32::MAX; m];
        let mut alpha = vec![Gf::ZERO; m];
        let mut tree = Vec::new();
        let mut roots = Vec::new();
        let mut used = vec![false; n];
        for root in 0..m {
            if comp[root] != u32::MAX {
                continue;
            }
            let c = roots.len() as u32;
            roots.push(root as u32);
            comp[root] = c;
            alpha[root] = Gf::ONE;
            let mut queue = VecDeque::from([root]);
            while let Some(p) = queue.pop_front() {
                for &(j, cp) in h.row(p) {
                    let j = j as usize;
                    if weight[j] != 2 || used[j] {
                        continue;
                    }
                    let [(a, ca), (b, cb)] = coeffs[j];
                    let (u, cu) = if a as usize == p { (b as usize, cb) } else { (a as usize, ca) };
                    if comp[u] != u32::MAX {
                        continue;
                    }
                    used[j] = true;
                    comp[u] = c;
                    alpha[u] = field.div(field.mul(alpha[p], cp), cu);
                    tree.push((u as u32, p as u32, j as u32));
                    queue.push_back(u);
                }
            }
        }
        let closing = (0..n)
            .filter(|&j| !used[j])
            .map(|j| {
                let [(a, _), (b, _)] = coeffs[j];
                match weight[j] {
                    0 => (j as u32, u32::MAX, None),
                    1 => (j as u32, a, None),
                    _ => (j as u32, a, Some(b)),
                }
            })
            .collect();
        RowSpaceSolver {
            n_rows: m,
            n_cols: n,
            tree,
            roots,
            comp,
            alpha,
            closing,
            coeffs,
            weight,
        }
    }

    /// Coefficients `y` with `y^T H = v`, or `None` when `v` is outside the
    /// row space. Undetermined root values are set to zero.
    pub fn solve(&self, field: &Field, v: &[Gf]) -> Option<Vec<Gf>> {
        assert_eq!(v.len(), self.n_cols);
        let mut beta = vec![Gf::ZERO; self.n_rows];
        for &(u, p, j) in &self.tree {
            let [(a, ca), (_, cb)] = self.coeffs[j as usize];
            let (cp, cu) = if a == p { (ca, cb) } else { (cb, ca) };
            // y_p c_p + y_u c_u = v_j
            beta[u as usize] = field.div(v[j as usize] + field.mul(beta[p as usize], cp), cu);
        }
        let mut t: Vec<Option<Gf>> = vec![None; self.roots.len()];
        for &(j, a, b) in &self.closing {
            let j = j as usize;
            let (g, h) = match (self.weight[j], b) {
                (0, _) => (Gf::ZERO, v[j]),
                (1, _) => {
                    let ca = self.coeffs[j][0].1;
                    let a = a as usize;
                    (field.mul(self.alpha[a], ca), field.mul(beta[a], ca) + v[j])
                }
                (_, Some(b)) => {
                    let [(_, ca), (_, cb)] = self.coeffs[j];
                    let (a, b) = (a as usize, b as usize);
                    let g = field.mul(self.alpha[a], ca) + field.mul(self.alpha[b], cb);
                    let h = field.mul(beta[a], ca) + field.mul(beta[b], cb) + v[j];
                    (g, h)
                }
                _ => unreachable!(),
            };
            // Constraint g t = h on the component.
            if g.is_zero() {
                if !h.is_zero() {
                    return None;
                }
                continue;
            }
            let c = self.comp[a as usize] as usize;
            let val = field.div(h, g);
            match t[c] {
                None => t[c] = Some(val),
                Some(prev) if prev != val => return None,
                Some(_) => {}
            }
        }
        Some(
            (0..self.n_rows)
                .map(|u| {
                    let tc = t[self.comp[u] as usize].unwrap_or(Gf::ZERO);
                    field.mul(self.alpha[u], tc) + beta[u]
                })
                .collect(),
        )
    }

    pub fn contains(&self, field: &Field, v: &[Gf]) -> bool {
        self.solve(field, v).is_some()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Detectability {
    /// The estimate disagrees with the measured syndrome.
    Detected,
    /// The estimate reproduces the syndrome but is not degenerate-equivalent.
    Undetected,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuccessVerdict {
    pub strict_success: bool,
    pub degenerate_success: bool,
    /// Partner rows `(side, i)` such that the difference on that side is a
    /// nonzero multiple of row `i`.
    pub sufficient_hit: Option<Vec<(Side, usize)>>,
    pub syndrome_match: bool,
    /// Set on failure.
    pub failure: Option<Detectability>,
}

/// Per-code oracle with cached row-space solvers for both partner matrices.
#[derive(Clone, Debug)]
pub struct DegeneracyOracle<'c> {
    code: &'c CssCode,
    spaces: [RowSpaceSolver; 2],
}

fn diff(a: &[Gf], b: &[Gf]) -> Vec<Gf> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

impl<'c> DegeneracyOracle<'c> {
    pub fn new(code: &'c CssCode) -> Self {
        let spaces = Side::BOTH.map(|s| RowSpaceSolver::new(&code.field, code.partner(s)));
        DegeneracyOracle { code, spaces }
    }

    fn space(&self, side: Side) -> &RowSpaceSolver {
        match side {
            Side::X => &self.spaces[0],
            Side::Z => &self.spaces[1],
        }
    }

    pub fn check_strict(xi: &[Gf], xi_hat: &[Gf], zeta: &[Gf], zeta_hat: &[Gf]) -> bool {
        xi == xi_hat && zeta == zeta_hat
    }

    /// `truth + estimate` in the row space of the side's partner matrix.
    pub fn check_degenerate(&self, side: Side, truth: &[Gf], estimate: &[Gf]) -> bool {
        self.space(side).contains(&self.code.field, &diff(truth, estimate))
    }

    /// `H estimate = syndrome` for the side's check matrix.
    pub fn check_syndrome_match(&self, side: Side, estimate: &[Gf], syndrome: &[Gf]) -> bool {
        let h = self.code.check(side);
        (0..h.n_rows()).all(|i| h.row_dot(&self.code.field, i, estimate) == syndrome[i])
    }

    /// Partner row `i` when `truth + estimate` is a nonzero multiple of it.
    pub fn sufficient_hit(&self, side: Side, truth: &[Gf], estimate: &[Gf]) -> Option<usize> {
        let d = diff(truth, estimate);
        let j = d.iter().position(|x| !x.is_zero())?;
        let field = &self.code.field;
        let partner = self.code.partner(side);
        let support = d.iter().filter(|x| !x.is_zero()).count();
        partner.col(j).iter().find_map(|&(i, c)| {
            let row = partner.row(i as usize);
            if row.len() != support {
                return None;
            }
            let a = field.div(d[j], c);
            row.iter()
                .all(|&(k, ck)| d[k as usize] == field.mul(a, ck))
                .then_some(i as usize)
        })
    }

    pub fn verdict(&self, noise: &NoisePair, xi_hat: &[Gf], zeta_hat: &[Gf], syn: &SyndromePair) -> SuccessVerdict {
        let strict = Self::check_strict(&noise.xi, xi_hat, &noise.zeta, zeta_hat);
        let syndrome_match = self.check_syndrome_match(Side::X, xi_hat, &syn.sigma) && self.check_syndrome_match(Side::Z, zeta_hat, &syn.tau);
        let degenerate = strict
            || (syndrome_match && self.check_degenerate(Side::X, &noise.xi, xi_hat) && self.check_degenerate(Side::Z, &noise.zeta, zeta_hat));
        let mut hits = Vec::new();
        let mut all_hit = !strict;
        for (side, t, e) in [(Side::X, &noise.xi, xi_hat), (Side::Z, &noise.zeta, zeta_hat)] {
            if t.as_slice() == e {
                continue;
            }
            match self.sufficient_hit(side, t, e) {
                Some(i) => hits.push((side, i)),
                None => all_hit = false,
            }
        }
        let failure = if degenerate {
            None
        } else if syndrome_match {
            Some(Detectability::Undetected)
        } else {
            Some(Detectability::Detected)
        };
        SuccessVerdict {
            strict_success: strict,
            degenerate_success: degenerate,
            sufficient_hit: all_hit.then_some(hits),
            syndrome_match,
            failure,
        }
    }
}
