//! Sparse matrices over GF(2^e) with row and column adjacency views.

use crate::gf::{Field, Gf};
use crate::linalg::FqMatrix;

/// Sparse M x N matrix over GF(2^e). Rows hold `(column, coefficient)` pairs
/// sorted by column; columns hold `(row, coefficient)` pairs sorted by row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NbSparseMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<Vec<(u32, Gf)>>,
    cols: Vec<Vec<(u32, Gf)>>,
}

impl NbSparseMatrix {
    /// Builds a matrix from per-row entries. Zero coefficients are dropped and
    /// entries are sorted; duplicate positions keep the last value.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(u32, Gf)>>) -> Self {
        let n_rows = rows.len();
        let mut clean = Vec::with_capacity(n_rows);
        for mut row in rows {
            row.retain(|&(_, c)| !c.is_zero());
            row.sort_by_key(|&(j, _)| j);
            row.reverse();
            row.dedup_by_key(|&mut (j, _)| j);
            row.reverse();
            clean.push(row);
        }
        let mut cols = vec![Vec::new(); n_cols];
        for (i, row) in clean.iter().enumerate() {
            for &(j, c) in row {
                cols[j as usize].push((i as u32, c));
            }
        }
        NbSparseMatrix {
            n_rows,
            n_cols,
            rows: clean,
            cols,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[(u32, Gf)] {
        &self.rows[i]
    }

    pub fn col(&self, j: usize) -> &[(u32, Gf)] {
        &self.cols[j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[(u32, Gf)]> {
        self.rows.iter().map(|r| r.as_slice())
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> Gf {
        match self.rows[i].binary_search_by_key(&(j as u32), |&(c, _)| c) {
            Ok(k) => self.rows[i][k].1,
            Err(_) => Gf::ZERO,
        }
    }

    /// True when every row has weight `row_weight` and every column has
    /// weight `col_weight`.
    pub fn is_regular(&self, row_weight: usize, col_weight: usize) -> bool {
        self.rows.iter().all(|r| r.len() == row_weight)
            && self.cols.iter().all(|c| c.len() == col_weight)
    }

    /// Sparse product `H x`.
    pub fn mul_vec(&self, field: &Field, x: &[Gf]) -> Vec<Gf> {
        assert_eq!(x.len(), self.n_cols, "vector length does not match column count");
        self.rows
            .iter()
            .map(|row| {
                row.iter().fold(Gf::ZERO, |acc, &(j, c)| {
                    acc + field.mul(c, x[j as usize])
                })
            })
            .collect()
    }

    /// Single-row product `(H x)_i`.
    pub fn row_dot(&self, field: &Field, i: usize, x: &[Gf]) -> Gf {
        self.rows[i]
            .iter()
            .fold(Gf::ZERO, |acc, &(j, c)| acc + field.mul(c, x[j as usize]))
    }

    /// Checks `self * other^T = O` using sparse row intersections.
    pub fn is_orthogonal_to(&self, field: &Field, other: &NbSparseMatrix) -> bool {
        if self.n_cols != other.n_cols {
            return false;
        }
        for row in &self.rows {
            // Accumulate the inner product with every row of `other` touching
            // this row's support.
            let mut acc: Vec<(u32, Gf)> = Vec::new();
            for &(j, c) in row {
                for &(i2, d) in other.col(j as usize) {
                    acc.push((i2, field.mul(c, d)));
                }
            }
            acc.sort_by_key(|&(i2, _)| i2);
            let mut k = 0;
            while k < acc.len() {
                let mut sum = Gf::ZERO;
                let key = acc[k].0;
                while k < acc.len() && acc[k].0 == key {
                    sum += acc[k].1;
                    k += 1;
                }
                if !sum.is_zero() {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_dense(&self) -> FqMatrix {
        let mut m = FqMatrix::zeros(self.n_rows, self.n_cols);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, c) in row {
                m.set(i, j as usize, c);
            }
        }
        m
    }

    /// Column supports of each row.
    /// Rank over GF(2^e) of a matrix whose columns have weight at most 2, in
    /// O(nnz). Rows are vertices and columns are weighted edges; each
    /// connected component contributes one left null vector exactly when the
    /// edge ratios are consistent around all its cycles. Returns `None` for a
    /// column of weight above 2.
    pub fn rank_col_weight2(&self, field: &Field) -> Option<usize> {
        if self.cols.iter().any(|c| c.len() > 2) {
            return None;
        }
        let mut y: Vec<Option<Gf>> = vec![None; self.n_rows];
        let mut null_dim = 0;
        let mut stack = Vec::new();
        for root in 0..self.n_rows {
            if y[root].is_some() {
                continue;
            }
            y[root] = Some(Gf::ONE);
            stack.push(root);
            let mut consistent = true;
            while let Some(a) = stack.pop() {
                let ya = y[a].unwrap();
                for &(j, ca) in &self.rows[a] {
                    let col = &self.cols[j as usize];
                    if col.len() == 1 {
                        consistent = false;
                        continue;
                    }
                    let &(b, cb) = col.iter().find(|&&(r, _)| r as usize != a).unwrap();
                    let b = b as usize;
                    // y_a c_a + y_b c_b = 0
                    let want = field.div(field.mul(ya, ca), cb);
                    match y[b] {
                        None => {
                            y[b] = Some(want);
                            stack.push(b);
                        }
                        Some(yb) if yb != want => consistent = false,
                        Some(_) => {}
                    }
                }
            }
            if consistent {
                null_dim += 1;
            }
        }
        Some(self.n_rows - null_dim)
    }

    pub fn row_support(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[i].iter().map(|&(j, _)| j as usize)
    }
}

/// Sparse binary matrix with sorted column indices per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinSparseMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub rows: Vec<Vec<u32>>,
}

impl BinSparseMatrix {
    pub fn new(n_cols: usize, mut rows: Vec<Vec<u32>>) -> Self {
        for r in rows.iter_mut() {
            r.sort_unstable();
        }
        BinSparseMatrix {
            n_rows: rows.len(),
            n_cols,
            rows,
        }
    }

    /// Column adjacency lists.
    pub fn columns(&self) -> Vec<Vec<u32>> {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (i, row) in self.rows.iter().enumerate() {
            for &j in row {
                cols[j as usize].push(i as u32);
            }
        }
        cols
    }

    /// Product over F_2 with a vector given as one bit per entry.
    pub fn mul_bits(&self, x: &[bool]) -> Vec<bool> {
        self.rows
            .iter()
            .map(|row| row.iter().filter(|&&j| x[j as usize]).count() % 2 == 1)
            .collect()
    }

    pub fn to_dense(&self) -> crate::linalg::BitMatrix {
        let mut m = crate::linalg::BitMatrix::zeros(self.n_rows, self.n_cols);
        for (i, row) in self.rows.iter().enumerate() {
            for &j in row {
                m.set(i, j as usize, true);
            }
        }
        m
    }

    /// Checks `self * other^T = O` over F_2.
    pub fn is_orthogonal_to(&self, other: &BinSparseMatrix) -> bool {
        if self.n_cols != other.n_cols {
            return false;
        }
        let other_cols = other.columns();
        let mut parity = vec![false; other.n_rows];
        let mut touched = Vec::new();
        for row in &self.rows {
            for &j in row {
                for &i2 in &other_cols[j as usize] {
                    parity[i2 as usize] ^= true;
                    touched.push(i2);
                }
            }
            for &i2 in &touched {
                if parity[i2 as usize] {
                    return false;
                }
            }
            touched.clear();
        }
        true
    }
}
