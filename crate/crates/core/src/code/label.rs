//! Non-binary labelling of an orthogonal binary pair.
//!
//! Delta coefficients are drawn at random and then corrected so that, for
//! every Gamma row, the Delta rows it meets form a singular cycle matrix: the
//! product of the "first" coefficients around the cycle must equal the
//! product of the "second" ones. Each Delta coefficient enters exactly two of
//! these conditions (one per Gamma row through its column), so processing
//! Gamma rows leaves-first along a spanning forest of the Gamma row graph
//! fixes all of them with one pivot each; the root condition of every tree
//! then holds because the product of all conditions is identically one.
//! Gamma rows are finally the null vectors of their cycles, which makes the
//! pair orthogonal over GF(2^e).

use std::collections::VecDeque;

use rand::Rng;

use crate::cycle::{cycle_rank, walk_coeffs, walk_from_columns};
use crate::gf::{Field, Gf};
use crate::sparse::{BinSparseMatrix, NbSparseMatrix};

use super::BuildError;

fn random_nonzero<R: Rng>(field: &Field, rng: &mut R) -> Gf {
    Gf(rng.random_range(1..field.q() as u32) as u16)
}

/// The Delta rows meeting one Gamma row, as an ordered 2L-cycle.
struct RowCycle {
    columns: Vec<usize>,
    rows: Vec<usize>,
}

fn row_cycles(gamma: &BinSparseMatrix, delta: &NbSparseMatrix) -> Result<Vec<RowCycle>, BuildError> {
    gamma
        .rows
        .iter()
        .enumerate()
        .map(|(i, support)| {
            let set: Vec<usize> = support.iter().map(|&j| j as usize).collect();
            walk_from_columns(delta, &set)
                .map(|(columns, rows)| RowCycle { columns, rows })
                .ok_or_else(|| {
                    BuildError::Structure(format!(
                        "Delta restricted to the support of Gamma row {i} is not a single cycle"
                    ))
                })
        })
        .collect()
}

/// `prod first / prod second` around a cycle.
fn imbalance(field: &Field, delta: &NbSparseMatrix, cyc: &RowCycle) -> Gf {
    let coeffs = walk_coeffs(delta, &cyc.columns, &cyc.rows);
    let (a, b) = coeffs.iter().fold((Gf::ONE, Gf::ONE), |(a, b), &(c, d)| {
        (field.mul(a, c), field.mul(b, d))
    });
    field.div(a, b)
}

fn set_coeff(rows: &mut [Vec<(u32, Gf)>], i: usize, j: usize, v: Gf) {
    let slot = rows[i]
        .iter_mut()
        .find(|(c, _)| *c as usize == j)
        .expect("entry on support");
    slot.1 = v;
}

/// One labelling attempt. Returns `(H_Gamma, H_Delta)`.
fn attempt<R: Rng>(
    field: &Field,
    gamma_support: &BinSparseMatrix,
    delta_support: &BinSparseMatrix,
    rng: &mut R,
) -> Result<(NbSparseMatrix, NbSparseMatrix), BuildError> {
    let n = gamma_support.n_cols;
    let mut delta_rows: Vec<Vec<(u32, Gf)>> = delta_support
        .rows
        .iter()
        .map(|r| r.iter().map(|&j| (j, random_nonzero(field, rng))).collect())
        .collect();
    let mut delta = NbSparseMatrix::from_rows(n, delta_rows.clone());
    let cycles = row_cycles(gamma_support, &delta)?;

    // Spanning forest of the Gamma row graph (rows joined through shared
    // columns), in BFS order.
    let gamma_cols = gamma_support.columns();
    let m = gamma_support.n_rows;
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; m];
    let mut visited = vec![false; m];
    let mut order = Vec::with_capacity(m);
    for root in 0..m {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &j in &gamma_support.rows[u] {
                for &w in &gamma_cols[j as usize] {
                    let w = w as usize;
                    if !visited[w] {
                        visited[w] = true;
                        parent[w] = Some((u, j as usize));
                        queue.push_back(w);
                    }
                }
            }
        }
    }

    for &u in order.iter().rev() {
        let Some((_, j)) = parent[u] else { continue };
        let cyc = &cycles[u];
        let ratio = imbalance(field, &delta, cyc);
        if ratio == Gf::ONE {
            continue;
        }
        // Pivot on the Delta entry (first Delta row of column j, j).
        let pivot_row = delta.col(j)[0].0 as usize;
        let k = cyc
            .rows
            .iter()
            .position(|&r| r == pivot_row)
            .expect("pivot row lies on the cycle");
        let old = delta.get(pivot_row, j);
        let new = if cyc.columns[k] == j {
            // Appears in the numerator.
            field.div(old, ratio)
        } else {
            field.mul(old, ratio)
        };
        set_coeff(&mut delta_rows, pivot_row, j, new);
        delta = NbSparseMatrix::from_rows(n, delta_rows.clone());
    }

    for (i, cyc) in cycles.iter().enumerate() {
        if imbalance(field, &delta, cyc) != Gf::ONE {
            return Err(BuildError::Structure(format!(
                "cycle condition of Gamma row {i} cannot be met by the spanning forest"
            )));
        }
    }

    // Gamma rows: null vectors of their cycles, propagated from a random
    // starting coefficient.
    let mut gamma_rows = Vec::with_capacity(m);
    for cyc in &cycles {
        let l = cyc.columns.len();
        let coeffs = walk_coeffs(&delta, &cyc.columns, &cyc.rows);
        let mut vals = vec![Gf::ZERO; l];
        vals[0] = random_nonzero(field, rng);
        for k in 0..l - 1 {
            // row k: c_k g_k + c'_k g_{k+1} = 0
            vals[k + 1] = field.div(field.mul(coeffs[k].0, vals[k]), coeffs[k].1);
        }
        let mut row: Vec<(u32, Gf)> = cyc
            .columns
            .iter()
            .zip(&vals)
            .map(|(&j, &v)| (j as u32, v))
            .collect();
        row.sort_by_key(|&(j, _)| j);
        gamma_rows.push(row);
    }
    let gamma = NbSparseMatrix::from_rows(n, gamma_rows);
    Ok((gamma, delta))
}

/// Labels the supports with GF(2^e) coefficients so that the pair is
/// orthogonal and every Gamma-row cycle of Delta has rank L-1. Resamples up
/// to `attempts` times.
pub fn label_nonbinary<R: Rng>(
    field: &Field,
    gamma_support: &BinSparseMatrix,
    delta_support: &BinSparseMatrix,
    attempts: usize,
    rng: &mut R,
) -> Result<(NbSparseMatrix, NbSparseMatrix), BuildError> {
    let mut last_err = None;
    for _ in 0..attempts.max(1) {
        match attempt(field, gamma_support, delta_support, rng) {
            Ok((gamma, delta)) => {
                if accept(field, &gamma, &delta) {
                    return Ok((gamma, delta));
                }
            }
            Err(e @ BuildError::Structure(_)) => return Err(e),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or(BuildError::Labeling { attempts }))
}

fn accept(field: &Field, gamma: &NbSparseMatrix, delta: &NbSparseMatrix) -> bool {
    if !gamma.is_orthogonal_to(field, delta) {
        return false;
    }
    (0..gamma.n_rows()).all(|i| {
        let set: Vec<usize> = gamma.row_support(i).collect();
        walk_from_columns(delta, &set)
            .map(|(c, r)| cycle_rank(field, &walk_coeffs(delta, &c, &r)) == set.len() - 1)
            .unwrap_or(false)
    })
}
