//! Test-side reference implementations, written independently of the
//! library's fast paths.
#![allow(dead_code)]

use nbqec::channel::DepolarizingParams;
use nbqec::gf::{Field, Gf};
use rand::Rng;
use nbqec::sparse::{BinSparseMatrix, NbSparseMatrix};
use nbqec::{build_code, BuildOptions, BuildParams, CssCode, Side};

pub fn small_code(e: u32, l: usize, p: usize, seed: u64) -> CssCode {
    let params = BuildParams::new(e, l, p, seed).unwrap();
    let opts = BuildOptions {
        allow_girth_fallback: true,
        search_attempts: 5_000,
        ..Default::default()
    };
    build_code(&params, &opts).unwrap()
}

pub fn dense_nb(h: &NbSparseMatrix) -> Vec<Vec<Gf>> {
    (0..h.n_rows())
        .map(|i| (0..h.n_cols()).map(|j| h.get(i, j)).collect())
        .collect()
}

pub fn dense_bin(h: &BinSparseMatrix) -> Vec<Vec<u8>> {
    let mut m = vec![vec![0u8; h.n_cols]; h.n_rows];
    for (i, row) in h.rows.iter().enumerate() {
        for &j in row {
            m[i][j as usize] ^= 1;
        }
    }
    m
}

/// Rank over F_2 by plain row reduction.
pub fn rank_f2(mut m: Vec<Vec<u8>>) -> usize {
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] == 1) else { continue };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && m[i][c] == 1 {
                for k in 0..cols {
                    m[i][k] ^= m[r][k];
                }
            }
        }
        r += 1;
    }
    r
}

/// Rank over GF(2^e) by plain row reduction.
pub fn rank_fq(f: &Field, mut m: Vec<Vec<Gf>>) -> usize {
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = f.inv(m[r][c]).unwrap();
        for k in 0..cols {
            m[r][k] = f.mul(m[r][k], inv);
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c];
                for k in 0..cols {
                    let v = f.mul(factor, m[r][k]);
                    m[i][k] = m[i][k] + v;
                }
            }
        }
        r += 1;
    }
    r
}

/// Reduced row-echelon basis of a row space, for repeated membership tests.
pub struct DenseRowSpace {
    basis: Vec<(usize, Vec<Gf>)>,
}

impl DenseRowSpace {
    pub fn new(f: &Field, rows: &[Vec<Gf>]) -> Self {
        let mut basis: Vec<(usize, Vec<Gf>)> = Vec::new();
        for r in rows {
            let mut v = r.clone();
            reduce(f, &basis, &mut v);
            if let Some(p) = v.iter().position(|x| !x.is_zero()) {
                let inv = f.inv(v[p]).unwrap();
                v.iter_mut().for_each(|x| *x = f.mul(*x, inv));
                for (_, b) in basis.iter_mut() {
                    let c = b[p];
                    if !c.is_zero() {
                        for k in 0..v.len() {
                            b[k] = b[k] + f.mul(c, v[k]);
                        }
                    }
                }
                basis.push((p, v));
            }
        }
        DenseRowSpace { basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, f: &Field, v: &[Gf]) -> bool {
        let mut v = v.to_vec();
        reduce(f, &self.basis, &mut v);
        v.iter().all(|x| x.is_zero())
    }
}

fn reduce(f: &Field, basis: &[(usize, Vec<Gf>)], v: &mut [Gf]) {
    for (p, b) in basis {
        let c = v[*p];
        if !c.is_zero() {
            for k in 0..v.len() {
                v[k] = v[k] + f.mul(c, b[k]);
            }
        }
    }
}

/// Unique solution of `m x = b` by Gauss-Jordan elimination on the augmented
/// matrix; `None` when the system is inconsistent or underdetermined.
pub fn dense_solve(f: &Field, m: &[Vec<Gf>], b: &[Gf]) -> Option<Vec<Gf>> {
    let n = m[0].len();
    let mut a: Vec<Vec<Gf>> = m.iter().zip(b).map(|(r, &y)| r.iter().copied().chain([y]).collect()).collect();
    let mut r = 0;
    for c in 0..n {
        let p = (r..a.len()).find(|&i| !a[i][c].is_zero())?;
        a.swap(r, p);
        let inv = f.inv(a[r][c]).unwrap();
        a[r].iter_mut().for_each(|x| *x = f.mul(*x, inv));
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let factor = a[i][c];
                for k in 0..=n {
                    let v = f.mul(factor, a[r][k]);
                    a[i][k] = a[i][k] + v;
                }
            }
        }
        r += 1;
    }
    if a[n..].iter().any(|row| !row[n].is_zero()) {
        return None;
    }
    Some((0..n).map(|i| a[i][n]).collect())
}

pub fn in_row_space(f: &Field, rows: &[Vec<Gf>], v: &[Gf]) -> bool {
    let base = rank_fq(f, rows.to_vec());
    let mut ext = rows.to_vec();
    ext.push(v.to_vec());
    rank_fq(f, ext) == base
}

/// All solutions of a square system over GF(2^e) by exhaustive search; only
/// for tiny q and size.
pub fn brute_solutions(f: &Field, m: &[Vec<Gf>], r: &[Gf]) -> Vec<Vec<Gf>> {
    let n = m[0].len();
    let q = f.q();
    let mut out = Vec::new();
    let total = q.pow(n as u32);
    for code in 0..total {
        let mut t = code;
        let x: Vec<Gf> = (0..n)
            .map(|_| {
                let v = Gf((t % q) as u16);
                t /= q;
                v
            })
            .collect();
        if (0..m.len()).all(|i| m[i].iter().zip(&x).fold(Gf::ZERO, |a, (&c, &y)| a + f.mul(c, y)) == r[i]) {
            out.push(x);
        }
    }
    out
}

pub fn mat_vec(f: &Field, m: &[Vec<Gf>], x: &[Gf]) -> Vec<Gf> {
    m.iter()
        .map(|row| row.iter().zip(x).fold(Gf::ZERO, |a, (&c, &y)| a + f.mul(c, y)))
        .collect()
}

pub fn bin_mat_vec(m: &[Vec<u8>], x: &[bool]) -> Vec<bool> {
    m.iter()
        .map(|row| row.iter().zip(x).filter(|(&a, &b)| a == 1 && b).count() % 2 == 1)
        .collect()
}

/// Shift-and-add polynomial product reduced bit by bit.
pub fn clmul_oracle(a: u32, b: u32, modulus: u32, e: u32) -> u32 {
    let mut prod: u64 = 0;
    for k in 0..e {
        if (b >> k) & 1 == 1 {
            prod ^= (a as u64) << k;
        }
    }
    for bit in (e..2 * e).rev() {
        if (prod >> bit) & 1 == 1 {
            prod ^= (modulus as u64) << (bit - e);
        }
    }
    prod as u32
}

pub fn trace_oracle(a: u32, modulus: u32, e: u32) -> u32 {
    let mut x = a;
    let mut acc = 0;
    for _ in 0..e {
        acc ^= x;
        x = clmul_oracle(x, x, modulus, e);
    }
    acc
}

pub fn random_dist<R: Rng>(rng: &mut R, q: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..q).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// Check message to edge `t` by enumerating every assignment of the other
/// edges.
pub fn check_brute(f: &Field, incoming: &[Vec<f64>], coeffs: &[Gf], s: Gf, t: usize) -> Vec<f64> {
    let q = f.q();
    let others: Vec<usize> = (0..coeffs.len()).filter(|&u| u != t).collect();
    let mut out = vec![0.0; q];
    let total = q.pow(others.len() as u32);
    for code in 0..total {
        let mut c = code;
        let mut sum = s;
        let mut w = 1.0;
        for &u in &others {
            let x = Gf((c % q) as u16);
            c /= q;
            sum = sum + f.mul(coeffs[u], x);
            w *= incoming[u][x.index()];
        }
        // c_t x_t = s + sum of the others.
        let x_t = f.div(sum, coeffs[t]);
        out[x_t.index()] += w;
    }
    let z: f64 = out.iter().sum();
    out.into_iter().map(|x| x / z).collect()
}


/// `p(xi) ∝ sum_zeta p(xi, zeta) m(zeta)` by explicit joint sum.
pub fn coupled_prior(f: &Field, ch: &DepolarizingParams, side: Side, m: &[f64]) -> Vec<f64> {
    let t = ch.bit_table();
    let joint = |xi: Gf, zeta: Gf| -> f64 {
        let (w, v) = (f.coord_dual(xi), f.coord_primal(zeta));
        (0..f.e()).map(|k| t[((w >> k) & 1) as usize][((v >> k) & 1) as usize]).product()
    };
    let mut out: Vec<f64> = f
        .elements()
        .map(|a| {
            f.elements()
                .map(|b| match side {
                    Side::X => joint(a, b) * m[b.index()],
                    Side::Z => joint(b, a) * m[b.index()],
                })
                .sum()
        })
        .collect();
    let z: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= z);
    out
}
