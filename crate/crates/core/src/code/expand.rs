//! Binary images of the non-binary pair.

use crate::gf::Field;
use crate::sparse::{BinSparseMatrix, NbSparseMatrix};

fn expand(field: &Field, h: &NbSparseMatrix, transpose: bool) -> BinSparseMatrix {
    let e = field.e() as usize;
    let mut rows = Vec::with_capacity(h.n_rows() * e);
    for row in h.rows() {
        let blocks: Vec<(usize, Vec<u16>)> = row
            .iter()
            .map(|&(j, c)| {
                let a = field.mul_matrix(c);
                let a = if transpose { a.transpose() } else { a };
                (j as usize, a.rows)
            })
            .collect();
        for r in 0..e {
            let mut out = Vec::new();
            for (j, block) in &blocks {
                for c in 0..e {
                    if (block[r] >> c) & 1 == 1 {
                        out.push((j * e + c) as u32);
                    }
                }
            }
            rows.push(out);
        }
    }
    BinSparseMatrix::new(h.n_cols() * e, rows)
}

/// `H_X`: every `gamma_ij` replaced by `A(gamma_ij)`, acting on primal
/// coordinates of Z-noise.
pub fn expand_x(field: &Field, gamma: &NbSparseMatrix) -> BinSparseMatrix {
    expand(field, gamma, false)
}

/// `H_Z`: every `delta_ij` replaced by `A(delta_ij)^T`, acting on dual
/// coordinates of X-noise.
pub fn expand_z(field: &Field, delta: &NbSparseMatrix) -> BinSparseMatrix {
    expand(field, delta, true)
}

/// Both binary images.
pub fn expand_binary(field: &Field, gamma: &NbSparseMatrix, delta: &NbSparseMatrix) -> (BinSparseMatrix, BinSparseMatrix) {
    (expand_x(field, gamma), expand_z(field, delta))
}
