//! Joint sum-product decoding of `(xi, zeta)` from `(sigma, tau)`.
//!
//! Each side runs flooding belief propagation over the Tanner graph of its
//! check matrix (`H_Delta` for `xi`, `H_Gamma` for `zeta`). The two graphs
//! are tied together at every symbol index by the joint bit law `p(x, z)`:
//! the prior of `xi_j` is the law contracted against the product of the check
//! messages arriving at `zeta_j`, and vice versa. Both sides are updated from
//! the same check half-round, so the exchange is Jacobi style.
//!
//! Messages live in the probability domain. Check nodes convolve over the
//! additive group of GF(2^e) with a Walsh-Hadamard transform.

use thiserror::Error;

use crate::channel::{ChannelError, DepolarizingParams, PriorKernel, SyndromePair};
use crate::code::CssCode;
use crate::cycle::Side;
use crate::gf::{Field, Gf};
use crate::sparse::NbSparseMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("all-zero message product on side {side} at iteration {iteration}")]
    Underflow { side: Side, iteration: usize },
    #[error("syndrome length {got} does not match {expected} checks")]
    SyndromeLength { got: usize, expected: usize },
    #[error("iteration cap must be at least 1")]
    NoIterations,
    #[error("history needs {needed} iterations, decoder ran {iterations}")]
    ShortHistory { iterations: usize, needed: usize },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecoderConfig {
    pub max_iters: usize,
    /// Weight of the previous variable-to-check message, in [0, 1).
    pub damping: f64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            max_iters: 90,
            damping: 0.0,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DecodeStatus {
    Converged,
    NotConverged,
}

/// `J(l)` (symbols whose hard decision changed in the last L+1 transitions)
/// and `I(l)` (checks not satisfied by the current estimate) for one side.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HistorySets {
    pub changed: Vec<usize>,
    pub unsatisfied: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutcome {
    pub status: DecodeStatus,
    pub xi_hat: Vec<Gf>,
    pub zeta_hat: Vec<Gf>,
    pub iterations: usize,
    history: [HistorySets; 2],
    window: usize,
}

impl DecodeOutcome {
    pub fn converged(&self) -> bool {
        self.status == DecodeStatus::Converged
    }

    pub fn estimate(&self, side: Side) -> &[Gf] {
        match side {
            Side::X => &self.xi_hat,
            Side::Z => &self.zeta_hat,
        }
    }

    /// History sets at exit. Fails when fewer than L iterations ran and the
    /// decoder did not converge.
    pub fn history(&self, side: Side) -> Result<&HistorySets, DecodeError> {
        if self.status == DecodeStatus::NotConverged && self.iterations < self.window {
            return Err(DecodeError::ShortHistory {
                iterations: self.iterations,
                needed: self.window,
            });
        }
        Ok(&self.history[side_index(side)])
    }
}

fn side_index(side: Side) -> usize {
    match side {
        Side::X => 0,
        Side::Z => 1,
    }
}

/// In-place unnormalized Walsh-Hadamard transform; applying it twice scales
/// by the length.
pub fn fwht(buf: &mut [f64]) {
    let q = buf.len();
    let mut h = 1;
    while h < q {
        for block in buf.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h <<= 1;
    }
}

/// Clamps round-off negatives and rescales to sum 1. Returns false for an
/// all-zero or non-finite vector.
fn normalize(v: &mut [f64]) -> bool {
    let mut s = 0.0;
    for x in v.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
        s += *x;
    }
    if !(s > 0.0) || !s.is_finite() {
        return false;
    }
    let inv = 1.0 / s;
    v.iter_mut().for_each(|x| *x *= inv);
    true
}

/// Core check-node kernel for a row of degree `deg = muls.len()`.
///
/// `incoming` holds `deg` variable-to-check messages back to back, `muls[t]`
/// is the multiplication table of the coefficient on edge `t` and `s` the
/// syndrome symbol. Writes the `deg` normalized check-to-variable messages to
/// `out`. `trans` needs `deg * q` entries and `tmp` `q`.
fn check_kernel(
    q: usize,
    muls: &[&[u16]],
    incoming: &[f64],
    s: u16,
    trans: &mut [f64],
    tmp: &mut [f64],
    out: &mut [f64],
) -> bool {
    let deg = muls.len();
    let inv_q = 1.0 / q as f64;
    for t in 0..deg {
        let tr = &mut trans[t * q..(t + 1) * q];
        let m = &incoming[t * q..(t + 1) * q];
        let mul = muls[t];
        // Distribution of c_t x_t.
        for x in 0..q {
            tr[mul[x] as usize] = m[x];
        }
        fwht(tr);
    }
    // Products of all other transforms: prefix pass into `out`, then suffix.
    out[..q].fill(1.0);
    for t in 1..deg {
        let (done, rest) = out.split_at_mut(t * q);
        let prev = &done[(t - 1) * q..];
        let tr = &trans[(t - 1) * q..t * q];
        for ((o, &p), &x) in rest[..q].iter_mut().zip(prev).zip(tr) {
            *o = p * x;
        }
    }
    tmp.fill(1.0);
    for t in (0..deg).rev() {
        let o = &mut out[t * q..(t + 1) * q];
        for (a, &b) in o.iter_mut().zip(tmp.iter()) {
            *a *= b;
        }
        if t > 0 {
            for (a, &b) in tmp.iter_mut().zip(&trans[t * q..(t + 1) * q]) {
                *a *= b;
            }
        }
    }
    for t in 0..deg {
        let o = &mut out[t * q..(t + 1) * q];
        fwht(o);
        // o[y] is now q times the probability that the other terms sum to y;
        // edge t must supply c_t x_t = s + y.
        let mul = muls[t];
        for x in 0..q {
            tmp[x] = o[(mul[x] ^ s) as usize] * inv_q;
        }
        o.copy_from_slice(tmp);
        if !normalize(o) {
            return false;
        }
    }
    true
}

/// Check-node update for one row, for callers outside the decoder loop.
/// `incoming[t]` is the message on edge `t`, `coeffs[t]` its coefficient and
/// `s` the syndrome symbol. Returns `None` when a message product vanishes.
pub fn check_update(field: &Field, incoming: &[Vec<f64>], coeffs: &[Gf], s: Gf) -> Option<Vec<Vec<f64>>> {
    let q = field.q();
    let deg = coeffs.len();
    assert_eq!(incoming.len(), deg);
    let tables: Vec<Vec<u16>> = coeffs.iter().map(|&c| field.mul_row(c)).collect();
    let muls: Vec<&[u16]> = tables.iter().map(Vec::as_slice).collect();
    let flat: Vec<f64> = incoming.iter().flatten().copied().collect();
    let mut trans = vec![0.0; deg * q];
    let mut tmp = vec![0.0; q];
    let mut out = vec![0.0; deg * q];
    check_kernel(q, &muls, &flat, s.0, &mut trans, &mut tmp, &mut out).then(|| out.chunks(q).map(<[f64]>::to_vec).collect())
}

/// Messages and belief of one symbol after a variable-node update.
#[derive(Clone, Debug, PartialEq)]
pub struct VariableUpdate {
    /// Message to each of the symbol's checks, excluding that check's input.
    pub to_checks: Vec<Vec<f64>>,
    pub belief: Vec<f64>,
    pub prior: Vec<f64>,
}

/// Variable-node update of symbol `j` on `side`, given its own incoming check
/// messages and those arriving at the same index on the other side.
pub fn variable_update(
    field: &Field,
    kernel: &PriorKernel,
    side: Side,
    own: &[Vec<f64>],
    opposite: &[Vec<f64>],
) -> Result<VariableUpdate, DecodeError> {
    let q = field.q();
    let mut ext = vec![1.0; q];
    for m in opposite {
        ext.iter_mut().zip(m).for_each(|(a, &b)| *a *= b);
    }
    let mut scratch = vec![0.0; q];
    let mut prior = vec![0.0; q];
    match side {
        Side::X => kernel.xi_prior_into(field, &ext, &mut scratch, &mut prior)?,
        Side::Z => kernel.zeta_prior_into(field, &ext, &mut scratch, &mut prior)?,
    }
    let underflow = || DecodeError::Underflow { side, iteration: 0 };
    let to_checks = (0..own.len())
        .map(|a| {
            let mut v = prior.clone();
            for (b, m) in own.iter().enumerate() {
                if b != a {
                    v.iter_mut().zip(m).for_each(|(x, &y)| *x *= y);
                }
            }
            if normalize(&mut v) {
                Ok(v)
            } else {
                Err(underflow())
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut belief = prior.clone();
    for m in own {
        belief.iter_mut().zip(m).for_each(|(x, &y)| *x *= y);
    }
    if !normalize(&mut belief) {
        return Err(underflow());
    }
    Ok(VariableUpdate {
        to_checks,
        belief,
        prior,
    })
}

/// Tanner-graph layout of one check matrix. Edges are numbered row-major.
#[derive(Clone, Debug)]
struct Graph {
    row_start: Vec<usize>,
    edge_table: Vec<u32>,
    col_edges: Vec<[u32; 2]>,
}

impl Graph {
    fn new(h: &NbSparseMatrix, table_of: &mut dyn FnMut(Gf) -> u32) -> Self {
        let mut row_start = Vec::with_capacity(h.n_rows() + 1);
        let mut edge_table = Vec::with_capacity(h.nnz());
        let mut col_fill: Vec<Vec<u32>> = vec![Vec::new(); h.n_cols()];
        row_start.push(0);
        for row in h.rows() {
            for &(j, c) in row {
                col_fill[j as usize].push(edge_table.len() as u32);
                edge_table.push(table_of(c));
            }
            row_start.push(edge_table.len());
        }
        let col_edges = col_fill
            .into_iter()
            .map(|v| {
                assert_eq!(v.len(), 2, "decoder needs column weight 2");
                [v[0], v[1]]
            })
            .collect();
        Graph {
            row_start,
            edge_table,
            col_edges,
        }
    }

    fn n_edges(&self) -> usize {
        self.edge_table.len()
    }

    fn max_degree(&self) -> usize {
        self.row_start.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }
}

/// Precomputed decoder tables for one code; shareable across threads.
#[derive(Clone, Debug)]
pub struct Decoder<'c> {
    code: &'c CssCode,
    config: DecoderConfig,
    q: usize,
    mul_tables: Vec<u16>,
    graphs: [Graph; 2],
}

/// Per-trial mutable buffers. Reusing one per worker avoids reallocating
/// the message arrays.
#[derive(Clone, Debug)]
pub struct Workspace {
    v2c: [Vec<f64>; 2],
    c2v: [Vec<f64>; 2],
    ext: [Vec<f64>; 2],
    prior: Vec<f64>,
    trans: Vec<f64>,
    tmp: Vec<f64>,
    scratch: Vec<f64>,
    hard: [Vec<Gf>; 2],
    last_change: [Vec<usize>; 2],
}

impl<'c> Decoder<'c> {
    pub fn new(code: &'c CssCode, config: DecoderConfig) -> Self {
        let field = &code.field;
        let q = field.q();
        let mut index = vec![u32::MAX; q];
        let mut mul_tables = Vec::new();
        let mut table_of = |c: Gf| {
            if index[c.index()] == u32::MAX {
                index[c.index()] = (mul_tables.len() / q) as u32;
                mul_tables.extend(field.mul_row(c));
            }
            index[c.index()]
        };
        let gx = Graph::new(&code.delta, &mut table_of);
        let gz = Graph::new(&code.gamma, &mut table_of);
        Decoder {
            code,
            config,
            q,
            mul_tables,
            graphs: [gx, gz],
        }
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    pub fn workspace(&self) -> Workspace {
        let q = self.q;
        let n = self.code.params.n_sym;
        let deg = self.graphs.iter().map(Graph::max_degree).max().unwrap_or(0);
        let edges = |s: usize| vec![0.0; self.graphs[s].n_edges() * q];
        Workspace {
            v2c: [edges(0), edges(1)],
            c2v: [edges(0), edges(1)],
            ext: [vec![0.0; n * q], vec![0.0; n * q]],
            prior: vec![0.0; q],
            trans: vec![0.0; deg * q],
            tmp: vec![0.0; q],
            scratch: vec![0.0; q],
            hard: [vec![Gf::ZERO; n], vec![Gf::ZERO; n]],
            last_change: [vec![0; n], vec![0; n]],
        }
    }

    fn table(&self, t: u32) -> &[u16] {
        let q = self.q;
        &self.mul_tables[t as usize * q..(t as usize + 1) * q]
    }

    /// Runs at most `max_iters` rounds. Deterministic in its inputs.
    pub fn decode(&self, ws: &mut Workspace, syn: &SyndromePair, channel: &DepolarizingParams) -> Result<DecodeOutcome, DecodeError> {
        let code = self.code;
        let field = &code.field;
        let q = self.q;
        let n = code.params.n_sym;
        let l = code.params.l;
        if self.config.max_iters == 0 {
            return Err(DecodeError::NoIterations);
        }
        for (s, h) in [(&syn.sigma, &code.delta), (&syn.tau, &code.gamma)] {
            if s.len() != h.n_rows() {
                return Err(DecodeError::SyndromeLength {
                    got: s.len(),
                    expected: h.n_rows(),
                });
            }
        }
        let syndromes = [&syn.sigma, &syn.tau];
        let kernel = PriorKernel::new(channel, field);

        // Round 0: uniform check messages, so each prior is the plain marginal.
        for s in 0..2 {
            ws.ext[s].fill(1.0 / q as f64);
            ws.last_change[s].fill(0);
        }
        self.variable_round(ws, &kernel, 0, false)?;

        let mut iterations = 0;
        let mut converged = self.satisfied(ws, &syndromes);
        while !converged && iterations < self.config.max_iters {
            iterations += 1;
            for s in 0..2 {
                self.check_round(ws, s, syndromes[s])
                    .map_err(|_| DecodeError::Underflow { side: Side::BOTH[s], iteration: iterations })?;
            }
            self.compute_ext(ws, iterations)?;
            self.variable_round(ws, &kernel, iterations, true)?;
            converged = self.satisfied(ws, &syndromes);
        }

        let window = l;
        let from = iterations.saturating_sub(window).max(1);
        let history = [0, 1].map(|s| {
            let changed = if converged {
                Vec::new()
            } else {
                (0..n).filter(|&j| ws.last_change[s][j] >= from).collect()
            };
            let h = code.check(Side::BOTH[s]);
            let unsatisfied = (0..h.n_rows())
                .filter(|&i| h.row_dot(field, i, &ws.hard[s]) != syndromes[s][i])
                .collect();
            HistorySets { changed, unsatisfied }
        });
        Ok(DecodeOutcome {
            status: if converged {
                DecodeStatus::Converged
            } else {
                DecodeStatus::NotConverged
            },
            xi_hat: ws.hard[0].clone(),
            zeta_hat: ws.hard[1].clone(),
            iterations,
            history,
            window,
        })
    }

    /// Convenience wrapper allocating a fresh workspace.
    pub fn decode_once(&self, syn: &SyndromePair, channel: &DepolarizingParams) -> Result<DecodeOutcome, DecodeError> {
        let mut ws = self.workspace();
        self.decode(&mut ws, syn, channel)
    }

    fn satisfied(&self, ws: &Workspace, syndromes: &[&Vec<Gf>; 2]) -> bool {
        let field = &self.code.field;
        (0..2).all(|s| {
            let h = self.code.check(Side::BOTH[s]);
            (0..h.n_rows()).all(|i| h.row_dot(field, i, &ws.hard[s]) == syndromes[s][i])
        })
    }

    fn check_round(&self, ws: &mut Workspace, s: usize, syndrome: &[Gf]) -> Result<(), ()> {
        let q = self.q;
        let g = &self.graphs[s];
        let mut muls: Vec<&[u16]> = Vec::with_capacity(g.max_degree());
        for (i, bounds) in g.row_start.windows(2).enumerate() {
            let (a, b) = (bounds[0], bounds[1]);
            muls.clear();
            muls.extend(g.edge_table[a..b].iter().map(|&t| self.table(t)));
            let ok = check_kernel(
                q,
                &muls,
                &ws.v2c[s][a * q..b * q],
                syndrome[i].0,
                &mut ws.trans,
                &mut ws.tmp,
                &mut ws.c2v[s][a * q..b * q],
            );
            if !ok {
                return Err(());
            }
        }
        Ok(())
    }

    /// Normalized product of the two check messages at every symbol.
    fn compute_ext(&self, ws: &mut Workspace, iteration: usize) -> Result<(), DecodeError> {
        let q = self.q;
        for s in 0..2 {
            let g = &self.graphs[s];
            for (j, &[e1, e2]) in g.col_edges.iter().enumerate() {
                let (e1, e2) = (e1 as usize, e2 as usize);
                let out = &mut ws.ext[s][j * q..(j + 1) * q];
                let m1 = &ws.c2v[s][e1 * q..(e1 + 1) * q];
                let m2 = &ws.c2v[s][e2 * q..(e2 + 1) * q];
                for ((o, &a), &b) in out.iter_mut().zip(m1).zip(m2) {
                    *o = a * b;
                }
                if !normalize(out) {
                    return Err(DecodeError::Underflow {
                        side: Side::BOTH[s],
                        iteration,
                    });
                }
            }
        }
        Ok(())
    }

    /// Coupled priors, variable-to-check messages and hard decisions for
    /// both sides. With `have_checks == false` the check messages are taken
    /// as uniform.
    fn variable_round(&self, ws: &mut Workspace, kernel: &PriorKernel, iteration: usize, have_checks: bool) -> Result<(), DecodeError> {
        let field = &self.code.field;
        let q = self.q;
        let damping = self.config.damping;
        for s in 0..2 {
            let side = Side::BOTH[s];
            let g = &self.graphs[s];
            let underflow = DecodeError::Underflow { side, iteration };
            for (j, &[e1, e2]) in g.col_edges.iter().enumerate() {
                let opposite = &ws.ext[1 - s][j * q..(j + 1) * q];
                let r = match side {
                    Side::X => kernel.xi_prior_into(field, opposite, &mut ws.scratch, &mut ws.prior),
                    Side::Z => kernel.zeta_prior_into(field, opposite, &mut ws.scratch, &mut ws.prior),
                };
                r.map_err(|_| underflow.clone())?;
                let (e1, e2) = (e1 as usize, e2 as usize);
                let prior = &ws.prior;
                let hard = if have_checks {
                    let c2v = &ws.c2v[s];
                    let m1 = &c2v[e1 * q..(e1 + 1) * q];
                    let m2 = &c2v[e2 * q..(e2 + 1) * q];
                    // Belief argmax, lowest value on ties.
                    let mut best = (0usize, f64::NEG_INFINITY);
                    for x in 0..q {
                        let b = prior[x] * m1[x] * m2[x];
                        if b > best.1 {
                            best = (x, b);
                        }
                    }
                    if !(best.1 > 0.0) {
                        return Err(underflow);
                    }
                    for (edge, other) in [(e1, e2), (e2, e1)] {
                        let mo = &c2v[other * q..(other + 1) * q];
                        let v = &mut ws.tmp;
                        for x in 0..q {
                            v[x] = prior[x] * mo[x];
                        }
                        if !normalize(v) {
                            return Err(underflow);
                        }
                        let dst = &mut ws.v2c[s][edge * q..(edge + 1) * q];
                        if damping > 0.0 {
                            for (d, &x) in dst.iter_mut().zip(v.iter()) {
                                *d = (1.0 - damping) * x + damping * *d;
                            }
                        } else {
                            dst.copy_from_slice(v);
                        }
                    }
                    best.0
                } else {
                    ws.v2c[s][e1 * q..(e1 + 1) * q].copy_from_slice(prior);
                    ws.v2c[s][e2 * q..(e2 + 1) * q].copy_from_slice(prior);
                    let mut best = 0;
                    for x in 1..q {
                        if prior[x] > prior[best] {
                            best = x;
                        }
                    }
                    best
                };
                let hard = Gf(hard as u16);
                if iteration > 0 && ws.hard[s][j] != hard {
                    ws.last_change[s][j] = iteration;
                }
                ws.hard[s][j] = hard;
            }
        }
        Ok(())
    }
}
