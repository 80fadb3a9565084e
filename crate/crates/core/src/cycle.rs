//! Length-2L cycles of a column-weight-2 check matrix and their
//! Type I / II / III classification.

use std::collections::BTreeSet;
use std::fmt;

use crate::gf::{Field, Gf};
use crate::linalg::FqMatrix;
use crate::sparse::NbSparseMatrix;

/// Which half of the CSS pair is being decoded.
///
/// `X` estimates the X-noise symbols against the checks of `H_Delta`, with
/// degeneracy measured by the row space of `H_Gamma`. `Z` swaps the roles.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    X,
    Z,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::X, Side::Z];

    pub fn label(self) -> &'static str {
        match self {
            Side::X => "x",
            Side::Z => "z",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum CycleType {
    /// Column set equals the support of row `row` of the partner matrix.
    TypeI { row: usize },
    /// Not a partner row support, rank below L.
    TypeII,
    /// Not a partner row support, full rank.
    TypeIII,
}

impl CycleType {
    pub fn short_name(self) -> &'static str {
        match self {
            CycleType::TypeI { .. } => "I",
            CycleType::TypeII => "II",
            CycleType::TypeIII => "III",
        }
    }
}

/// A single cycle of length 2L through a column-weight-2 check matrix.
///
/// `rows[k]` joins `columns[k]` and `columns[(k + 1) % L]`, and
/// `coeffs[k] = (H[rows[k]][columns[k]], H[rows[k]][columns[k + 1]])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleWitness {
    pub side: Side,
    pub columns: Vec<usize>,
    pub rows: Vec<usize>,
    pub coeffs: Vec<(Gf, Gf)>,
    pub kind: CycleType,
    pub rank: usize,
}

impl CycleWitness {
    /// Builds and classifies a witness from an ordered walk.
    pub fn from_walk(
        field: &Field,
        side: Side,
        check: &NbSparseMatrix,
        partner: &NbSparseMatrix,
        columns: Vec<usize>,
        rows: Vec<usize>,
    ) -> Self {
        let coeffs = walk_coeffs(check, &columns, &rows);
        let rank = cycle_rank(field, &coeffs);
        let kind = classify_walk(partner, &columns, rank);
        CycleWitness {
            side,
            columns,
            rows,
            coeffs,
            kind,
            rank,
        }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column_set(&self) -> BTreeSet<usize> {
        self.columns.iter().copied().collect()
    }

    pub fn row_set(&self) -> BTreeSet<usize> {
        self.rows.iter().copied().collect()
    }

    pub fn contains_column(&self, j: usize) -> bool {
        self.columns.contains(&j)
    }

    /// Dense L x L restriction, rows and columns in walk order.
    pub fn cycle_matrix(&self) -> FqMatrix {
        let l = self.len();
        let mut m = FqMatrix::zeros(l, l);
        for k in 0..l {
            m.set(k, k, self.coeffs[k].0);
            m.set(k, (k + 1) % l, self.coeffs[k].1);
        }
        m
    }
}

pub(crate) fn walk_coeffs(check: &NbSparseMatrix, columns: &[usize], rows: &[usize]) -> Vec<(Gf, Gf)> {
    let l = columns.len();
    (0..l)
        .map(|k| {
            (
                check.get(rows[k], columns[k]),
                check.get(rows[k], columns[(k + 1) % l]),
            )
        })
        .collect()
}

/// Rank over GF(2^e) of the L x L matrix of a single 2L-cycle, in O(L).
///
/// Expanding the determinant along the cycle leaves two terms, so the matrix
/// is singular exactly when the product of the first coefficients equals the
/// product of the second ones. Deleting any row leaves a path, which always
/// has rank L-1.
pub fn cycle_rank(field: &Field, coeffs: &[(Gf, Gf)]) -> usize {
    let (a, b) = coeffs.iter().fold((Gf::ONE, Gf::ONE), |(a, b), &(c, d)| {
        (field.mul(a, c), field.mul(b, d))
    });
    if a == b {
        coeffs.len() - 1
    } else {
        coeffs.len()
    }
}

/// Type test against the partner matrix: Type I if one of the two partner rows
/// through the first cycle column contains the next one and has exactly the
/// cycle's column set as support; otherwise rank decides.
pub fn classify_walk(partner: &NbSparseMatrix, columns: &[usize], rank: usize) -> CycleType {
    let l = columns.len();
    if l >= 2 {
        let (j, j2) = (columns[0], columns[1]);
        for &(i, _) in partner.col(j) {
            let row = partner.row(i as usize);
            if row.len() == l
                && row.iter().any(|&(c, _)| c as usize == j2)
                && row.iter().all(|&(c, _)| columns.contains(&(c as usize)))
            {
                return CycleType::TypeI { row: i as usize };
            }
        }
    }
    if rank < l {
        CycleType::TypeII
    } else {
        CycleType::TypeIII
    }
}

/// Orders a column set whose restriction of `check` (column weight 2) is a
/// single cycle. Returns `(columns, rows)` in walk order starting at the
/// smallest column, or `None` when the restriction is not one cycle.
pub fn walk_from_columns(check: &NbSparseMatrix, set: &[usize]) -> Option<(Vec<usize>, Vec<usize>)> {
    let l = set.len();
    if l < 2 {
        return None;
    }
    let in_set = |j: usize| set.contains(&j);
    let start = *set.iter().min()?;
    let mut columns = Vec::with_capacity(l);
    let mut rows = Vec::with_capacity(l);
    let mut col = start;
    let mut prev_row: Option<usize> = None;
    for _ in 0..l {
        columns.push(col);
        let adj = check.col(col);
        if adj.len() != 2 {
            return None;
        }
        // Leave through the row we did not arrive by; on the first step take
        // the row whose other cycle column is smaller, for a canonical
        // direction.
        let candidates: Vec<(usize, usize)> = adj
            .iter()
            .filter(|&&(r, _)| Some(r as usize) != prev_row)
            .filter_map(|&(r, _)| {
                let r = r as usize;
                let next: Vec<usize> = check
                    .row(r)
                    .iter()
                    .map(|&(c, _)| c as usize)
                    .filter(|&c| c != col && in_set(c))
                    .collect();
                (next.len() == 1).then(|| (r, next[0]))
            })
            .collect();
        let &(r, next) = candidates.iter().min_by_key(|&&(_, n)| n)?;
        if prev_row.is_some() && candidates.len() != 1 {
            return None;
        }
        rows.push(r);
        prev_row = Some(r);
        col = next;
    }
    if col != start {
        return None;
    }
    let mut seen = columns.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != l {
        return None;
    }
    // Every row of the restriction must hold exactly two cycle columns.
    for &r in &rows {
        let hits = check.row(r).iter().filter(|&&(c, _)| in_set(c as usize)).count();
        if hits != 2 {
            return None;
        }
    }
    Some((columns, rows))
}
