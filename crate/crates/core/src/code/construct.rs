//! Orthogonal pairs of binary (J=2, L) quasi-cyclic protograph matrices.
//!
//! Both matrices are 2 x L arrays of P x P circulant permutation blocks. Row
//! `r*P + i` of the Gamma-side matrix has a one in column `c*P + (i + g[r][c])
//! mod P` for every block column `c`; the Delta side uses exponents `d[s][c]`.
//!
//! Block columns are paired so that every row of one side meets exactly L
//! rows of the other side, each in exactly two columns:
//!
//! * Gamma block row 0 against Delta block row 0, and Gamma 1 against Delta 1,
//!   use the pairs `(0,1), (2,3), ...`;
//! * the two mixed combinations use `(1,2), (3,4), ..., (L-1,0)`.
//!
//! A pair `(c, c')` overlaps when `g[r][c] - d[s][c] = g[r][c'] - d[s][c']`.
//! The two pairings together form a Hamiltonian cycle on the block columns,
//! so the Delta rows met by one Gamma row form a single cycle of length 2L.
//! The Tanner graph of a 2 x L circulant array has girth 12 exactly when the
//! block-row exponent differences form a Sidon set modulo P.

use rand::Rng;

use crate::sparse::BinSparseMatrix;

use super::BuildError;

/// Circulant exponents of both protograph matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QcExponents {
    pub l: usize,
    pub p: usize,
    pub gamma: [Vec<usize>; 2],
    pub delta: [Vec<usize>; 2],
}

impl QcExponents {
    fn support(&self, exps: &[Vec<usize>; 2]) -> BinSparseMatrix {
        let (l, p) = (self.l, self.p);
        let mut rows = Vec::with_capacity(2 * p);
        for block in exps {
            for i in 0..p {
                rows.push(
                    (0..l)
                        .map(|c| (c * p + (i + block[c]) % p) as u32)
                        .collect(),
                );
            }
        }
        BinSparseMatrix::new(l * p, rows)
    }

    /// Support of the Gamma-side (X-check) matrix.
    pub fn gamma_support(&self) -> BinSparseMatrix {
        self.support(&self.gamma)
    }

    /// Support of the Delta-side (Z-check) matrix.
    pub fn delta_support(&self) -> BinSparseMatrix {
        self.support(&self.delta)
    }

    /// Girth implied by the exponents (4, 8 or 12), taking the worse side.
    pub fn predicted_girth(&self) -> usize {
        let hg = diff(&self.gamma[0], &self.gamma[1], self.p);
        let hd = diff(&self.delta[0], &self.delta[1], self.p);
        qc_girth(&hg, self.p).min(qc_girth(&hd, self.p))
    }

    /// True when every paired overlap value is distinct within each block-row
    /// combination, so overlapping rows meet in exactly two columns.
    pub fn overlaps_are_simple(&self) -> bool {
        let (l, p) = (self.l, self.p);
        for r in 0..2 {
            for s in 0..2 {
                let offset = if r == s { 0 } else { 1 };
                let mut seen = vec![false; p];
                for k in 0..l / 2 {
                    let c = (2 * k + offset) % l;
                    let c2 = (c + 1) % l;
                    let v = (self.gamma[r][c] + p - self.delta[s][c]) % p;
                    let v2 = (self.gamma[r][c2] + p - self.delta[s][c2]) % p;
                    if v != v2 || seen[v] {
                        return false;
                    }
                    seen[v] = true;
                }
            }
        }
        true
    }
}

fn diff(a: &[usize], b: &[usize], p: usize) -> Vec<usize> {
    a.iter().zip(b).map(|(&x, &y)| (x + p - y) % p).collect()
}

/// Girth of a 2 x L circulant array from its exponent differences.
pub(crate) fn qc_girth(h: &[usize], p: usize) -> usize {
    let mut seen = vec![false; p];
    for (i, &a) in h.iter().enumerate() {
        if seen[a] {
            return 4;
        }
        seen[a] = true;
        for &b in &h[..i] {
            if a == b {
                return 4;
            }
        }
    }
    if is_sidon(h, p) {
        12
    } else {
        8
    }
}

/// All ordered differences of distinct elements are distinct modulo `p`.
fn is_sidon(h: &[usize], p: usize) -> bool {
    let mut seen = vec![false; p];
    for (i, &a) in h.iter().enumerate() {
        for (k, &b) in h.iter().enumerate() {
            if i == k {
                continue;
            }
            let d = (a + p - b) % p;
            if d == 0 || seen[d] {
                return false;
            }
            seen[d] = true;
        }
    }
    true
}

/// `sum over even k of (v[k+1] - v[k])` modulo `p`.
fn alternating_sum(v: &[usize], p: usize) -> usize {
    (0..v.len())
        .step_by(2)
        .fold(0, |acc, k| (acc + v[k + 1] + p - v[k]) % p)
}

/// Delta exponents induced by the Gamma exponents through the column pairing.
fn induced_delta(gamma: &[Vec<usize>; 2], l: usize, p: usize, offsets: [usize; 2]) -> [Vec<usize>; 2] {
    let step = |v: &[usize], k: usize| (v[(k + 1) % l] + p - v[k]) % p;
    let mut delta = [vec![0; l], vec![0; l]];
    for s in 0..2 {
        delta[s][0] = offsets[s];
        for k in 0..l - 1 {
            // Even steps follow Gamma row s, odd steps the other Gamma row.
            let src = if k % 2 == 0 { s } else { 1 - s };
            delta[s][k + 1] = (delta[s][k] + step(&gamma[src], k)) % p;
        }
    }
    delta
}

/// Draws exponent differences for one side, greedily keeping the Sidon
/// property and forcing the last entry so the pairing closes.
fn draw_differences<R: Rng>(l: usize, p: usize, rng: &mut R) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::with_capacity(l);
    for c in 0..l - 1 {
        let mut pick = rng.random_range(0..p);
        for _ in 0..32 {
            let mut trial = h.clone();
            trial.push(pick);
            if qc_girth(&trial, p) == 12 || c == 0 {
                break;
            }
            pick = rng.random_range(0..p);
        }
        h.push(pick);
    }
    // Closing the pairing cycle needs alternating_sum(h) = 0.
    let partial: usize = (0..l - 2)
        .step_by(2)
        .fold(0, |acc, k| (acc + h[k + 1] + p - h[k]) % p);
    h.push((h[l - 2] + p - partial) % p);
    debug_assert_eq!(alternating_sum(&h, p), 0);
    h
}

/// Search options for [`search_exponents`].
#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub target_girth: usize,
    pub allow_fallback: bool,
    pub attempts: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            target_girth: 12,
            allow_fallback: false,
            attempts: 200_000,
        }
    }
}

/// Randomised search for circulant exponents. Returns the exponents and
/// whether they fall short of the target girth (only when fallback to girth 8
/// is allowed).
pub fn search_exponents<R: Rng>(l: usize, p: usize, opts: &SearchOptions, rng: &mut R) -> Result<(QcExponents, bool), BuildError> {
    if l < 4 || l % 2 != 0 {
        return Err(BuildError::Params(format!("row weight L = {l} must be even and at least 4")));
    }
    if p < 2 {
        return Err(BuildError::Params(format!("circulant size P = {p} must be at least 2")));
    }
    let mut best: Option<(usize, QcExponents)> = None;
    for _ in 0..opts.attempts.max(1) {
        let h = draw_differences(l, p, rng);
        let g1: Vec<usize> = (0..l).map(|_| rng.random_range(0..p)).collect();
        let g0: Vec<usize> = h.iter().zip(&g1).map(|(&a, &b)| (a + b) % p).collect();
        let gamma = [g0, g1];
        let delta = induced_delta(&gamma, l, p, [rng.random_range(0..p), rng.random_range(0..p)]);
        let ex = QcExponents { l, p, gamma, delta };
        if !ex.overlaps_are_simple() {
            continue;
        }
        let girth = ex.predicted_girth();
        if girth >= opts.target_girth {
            return Ok((ex, false));
        }
        if best.as_ref().is_none_or(|(g, _)| girth > *g) {
            best = Some((girth, ex));
        }
    }
    match best {
        Some((girth, ex)) if opts.allow_fallback && girth >= 8 => {
            log::warn!(
                "girth {} unattainable for L={l}, P={p} within {} attempts; falling back to girth {girth}",
                opts.target_girth,
                opts.attempts
            );
            Ok((ex, true))
        }
        best => Err(BuildError::Girth {
            best: best.map_or(4, |(g, _)| g),
            target: opts.target_girth,
        }),
    }
}

/// Shortest cycle length of the Tanner graph of `h` by breadth-first search
/// from every variable node. Returns `usize::MAX` for a forest.
pub fn tanner_girth(h: &BinSparseMatrix) -> usize {
    let n = h.n_cols;
    let m = h.n_rows;
    let cols = h.columns();
    // Nodes: variables 0..n, checks n..n+m.
    let neighbours = |v: usize| -> Vec<usize> {
        if v < n {
            cols[v].iter().map(|&c| n + c as usize).collect()
        } else {
            h.rows[v - n].iter().map(|&j| j as usize).collect()
        }
    };
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; n + m];
    let mut parent = vec![usize::MAX; n + m];
    let mut queue = std::collections::VecDeque::new();
    let mut touched = Vec::new();
    for root in 0..n {
        for &t in &touched {
            dist[t] = usize::MAX;
            parent[t] = usize::MAX;
        }
        touched.clear();
        queue.clear();
        dist[root] = 0;
        touched.push(root);
        queue.push_back(root);
        'bfs: while let Some(u) = queue.pop_front() {
            if 2 * dist[u] + 1 >= best {
                break;
            }
            for w in neighbours(u) {
                if w == parent[u] {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    touched.push(w);
                    queue.push_back(w);
                } else {
                    best = best.min(dist[u] + dist[w] + 1);
                    if best <= 4 {
                        break 'bfs;
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sidon_predicate() {
        assert!(is_sidon(&[0, 1, 3, 7, 12, 20], 64));
        assert!(!is_sidon(&[0, 1, 2], 64));
        // 2a = 2b mod P when the difference is P/2.
        assert!(!is_sidon(&[0, 16], 32));
    }

    #[test]
    fn induced_delta_closes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (l, p) = (6, 97);
            let h = draw_differences(l, p, &mut rng);
            let g1: Vec<usize> = (0..l).map(|_| rng.random_range(0..p)).collect();
            let g0: Vec<usize> = h.iter().zip(&g1).map(|(&a, &b)| (a + b) % p).collect();
            let gamma = [g0, g1];
            let delta = induced_delta(&gamma, l, p, [5, 9]);
            // Closing step of each Delta row must agree with the pairing too.
            let step = |v: &[usize], k: usize| (v[(k + 1) % l] + p - v[k]) % p;
            for s in 0..2 {
                let src = 1 - s;
                assert_eq!(step(&delta[s], l - 1), step(&gamma[src], l - 1));
            }
        }
    }

    #[test]
    fn predicted_girth_matches_bfs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (l, p) in [(6, 64), (6, 40), (4, 13), (8, 32)] {
            let opts = SearchOptions {
                allow_fallback: true,
                attempts: 2000,
                ..Default::default()
            };
            let (ex, _) = search_exponents(l, p, &opts, &mut rng).unwrap();
            let g = ex.predicted_girth();
            let bg = tanner_girth(&ex.gamma_support()).min(tanner_girth(&ex.delta_support()));
            assert_eq!(g, bg, "L={l} P={p}");
        }
    }

    #[test]
    fn tiny_circulant_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = search_exponents(6, 2, &SearchOptions::default(), &mut rng).unwrap_err();
        assert_eq!(err, BuildError::Girth { best: 4, target: 12 });
    }
}
