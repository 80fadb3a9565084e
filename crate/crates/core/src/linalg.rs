//! Dense Gaussian elimination over GF(2^e) and over F_2.

use crate::gf::{Field, Gf};

/// Dense row-major matrix over GF(2^e).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FqMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<Gf>,
}

impl FqMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        FqMatrix {
            n_rows,
            n_cols,
            data: vec![Gf::ZERO; n_rows * n_cols],
        }
    }

    pub fn from_rows(rows: &[Vec<Gf>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut m = FqMatrix::zeros(rows.len(), n_cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n_cols, "ragged rows");
            m.row_mut(i).copy_from_slice(r);
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Gf {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Gf) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Gf] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Gf] {
        &mut self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn mul_vec(&self, field: &Field, x: &[Gf]) -> Vec<Gf> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(Gf::ZERO, |acc, (&a, &b)| acc + field.mul(a, b))
            })
            .collect()
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref_in_place(&mut self, field: &Field) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        let cols = self.n_cols;
        for c in 0..cols {
            if r == self.n_rows {
                break;
            }
            let Some(p) = (r..self.n_rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for k in 0..cols {
                    self.data.swap(p * cols + k, r * cols + k);
                }
            }
            let inv = field.inv(self.get(r, c)).expect("pivot is nonzero");
            for k in c..cols {
                let v = self.get(r, k);
                self.set(r, k, field.mul(v, inv));
            }
            let pivot_row: Vec<Gf> = self.row(r)[c..].to_vec();
            for i in 0..self.n_rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c);
                if f.is_zero() {
                    continue;
                }
                let row = &mut self.data[i * cols + c..(i + 1) * cols];
                for (x, &p) in row.iter_mut().zip(&pivot_row) {
                    *x += field.mul(f, p);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, field: &Field) -> usize {
        self.clone().rref_in_place(field).len()
    }

    /// One solution of `A x = b`, or `None` when inconsistent. Free variables
    /// are set to zero.
    pub fn solve(&self, field: &Field, b: &[Gf]) -> Option<Vec<Gf>> {
        assert_eq!(b.len(), self.n_rows);
        let mut aug = FqMatrix::zeros(self.n_rows, self.n_cols + 1);
        for i in 0..self.n_rows {
            aug.row_mut(i)[..self.n_cols].copy_from_slice(self.row(i));
            aug.set(i, self.n_cols, b[i]);
        }
        let pivots = aug.rref_in_place(field);
        if pivots.last() == Some(&self.n_cols) {
            return None;
        }
        let mut x = vec![Gf::ZERO; self.n_cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(r, self.n_cols);
        }
        Some(x)
    }

    /// Basis of the right null space.
    pub fn null_space(&self, field: &Field) -> Vec<Vec<Gf>> {
        let mut m = self.clone();
        let pivots = m.rref_in_place(field);
        let mut is_pivot = vec![false; self.n_cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.n_cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![Gf::ZERO; self.n_cols];
            v[free] = Gf::ONE;
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = m.get(r, free);
            }
            basis.push(v);
        }
        basis
    }
}

/// Cached reduced echelon basis of a row space, for membership queries.
#[derive(Clone, Debug)]
pub struct RowSpace {
    n_cols: usize,
    basis: FqMatrix,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(field: &Field, m: &FqMatrix) -> Self {
        let mut basis = m.clone();
        let pivots = basis.rref_in_place(field);
        let rank = pivots.len();
        let mut trimmed = FqMatrix::zeros(rank, m.n_cols());
        for r in 0..rank {
            trimmed.row_mut(r).copy_from_slice(basis.row(r));
        }
        RowSpace {
            n_cols: m.n_cols(),
            basis: trimmed,
            pivots,
        }
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    /// True when `v` lies in the row space. Costs one back-substitution pass.
    pub fn contains(&self, field: &Field, v: &[Gf]) -> bool {
        assert_eq!(v.len(), self.n_cols);
        let mut r = v.to_vec();
        for (k, &c) in self.pivots.iter().enumerate() {
            let f = r[c];
            if f.is_zero() {
                continue;
            }
            for (x, &b) in r[c..].iter_mut().zip(&self.basis.row(k)[c..]) {
                *x += field.mul(f, b);
            }
        }
        r.iter().all(|x| x.is_zero())
    }
}

/// Dense bit matrix with 64-bit words per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    n_rows: usize,
    n_cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        let words = n_cols.div_ceil(64);
        BitMatrix {
            n_rows,
            n_cols,
            words,
            data: vec![0; n_rows * words],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.data[i * self.words + j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let w = &mut self.data[i * self.words + j / 64];
        if v {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let words = m.words;
        let mut r = 0;
        for c in 0..m.n_cols {
            if r == m.n_rows {
                break;
            }
            let (w, b) = (c / 64, 1u64 << (c % 64));
            let Some(p) = (r..m.n_rows).find(|&i| m.data[i * words + w] & b != 0) else {
                continue;
            };
            if p != r {
                for k in 0..words {
                    m.data.swap(p * words + k, r * words + k);
                }
            }
            let (head, tail) = m.data.split_at_mut((r + 1) * words);
            let pivot = &head[r * words..];
            for row in tail.chunks_mut(words) {
                if row[w] & b != 0 {
                    for k in w..words {
                        row[k] ^= pivot[k];
                    }
                }
            }
            r += 1;
        }
        r
    }

    /// True when `self * other^T` is the zero matrix.
    pub fn is_orthogonal_to(&self, other: &BitMatrix) -> bool {
        assert_eq!(self.n_cols, other.n_cols);
        (0..self.n_rows).all(|i| {
            (0..other.n_rows).all(|k| {
                self.row_words(i)
                    .iter()
                    .zip(other.row_words(k))
                    .map(|(a, b)| (a & b).count_ones())
                    .sum::<u32>()
                    % 2
                    == 0
            })
        })
    }

    pub fn mul_bits(&self, x: &[bool]) -> Vec<bool> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|i| (0..self.n_cols).filter(|&j| x[j] && self.get(i, j)).count() % 2 == 1)
            .collect()
    }
}
