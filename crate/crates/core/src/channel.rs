//! Depolarizing noise, the coupled symbol prior and syndromes.

use rand::Rng;
use thiserror::Error;

use crate::code::CssCode;
use crate::gf::{Field, Gf};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("depolarizing probability {0} outside [0, 0.75]")]
    Probability(f64),
    #[error("belief has no probability mass")]
    DegenerateBelief,
    #[error("noise length {got} does not match code length {expected}")]
    Length { got: usize, expected: usize },
}

/// Depolarizing channel with X, Z and XZ each at `p_D / 3`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DepolarizingParams {
    pd: f64,
}

impl DepolarizingParams {
    pub fn new(pd: f64) -> Result<Self, ChannelError> {
        if !(0.0..=0.75).contains(&pd) {
            return Err(ChannelError::Probability(pd));
        }
        Ok(DepolarizingParams { pd })
    }

    /// From the marginal flip probability `f_m = 2 p_D / 3`.
    pub fn from_flip(fm: f64) -> Result<Self, ChannelError> {
        let pd = 1.5 * fm;
        if !(0.0..=0.75).contains(&pd) {
            return Err(ChannelError::Probability(pd));
        }
        Ok(DepolarizingParams { pd })
    }

    pub fn pd(&self) -> f64 {
        self.pd
    }

    pub fn fm(&self) -> f64 {
        2.0 * self.pd / 3.0
    }

    /// Joint law of one bit pair, `table[x][z]`.
    pub fn bit_table(&self) -> [[f64; 2]; 2] {
        let o = self.pd / 3.0;
        [[1.0 - self.pd, o], [o, o]]
    }
}

/// X and Z noise as F_q symbols. `xi` is read in dual coordinates and `zeta`
/// in primal coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoisePair {
    pub xi: Vec<Gf>,
    pub zeta: Vec<Gf>,
}

impl NoisePair {
    pub fn zero(n: usize) -> Self {
        NoisePair {
            xi: vec![Gf::ZERO; n],
            zeta: vec![Gf::ZERO; n],
        }
    }

    /// Binary X pattern `x = (w(xi_1), ..., w(xi_N))`, bit `k` of symbol `j`
    /// at position `j e + k`.
    pub fn x_bits(&self, field: &Field) -> Vec<bool> {
        expand_bits(field, &self.xi, |a| field.coord_dual(a))
    }

    /// Binary Z pattern `z = (v(zeta_1), ..., v(zeta_N))`.
    pub fn z_bits(&self, field: &Field) -> Vec<bool> {
        expand_bits(field, &self.zeta, |a| field.coord_primal(a))
    }
}

pub(crate) fn expand_bits(field: &Field, v: &[Gf], coord: impl Fn(Gf) -> u16) -> Vec<bool> {
    let e = field.e() as usize;
    let mut out = Vec::with_capacity(v.len() * e);
    for &a in v {
        let bits = coord(a);
        out.extend((0..e).map(|k| (bits >> k) & 1 == 1));
    }
    out
}

/// Draws `n` symbol pairs; each of the `n e` qubits independently suffers X,
/// Z or XZ with probability `p_D / 3` each.
pub fn sample_noise<R: Rng>(params: &DepolarizingParams, field: &Field, n: usize, rng: &mut R) -> NoisePair {
    let e = field.e();
    let pd = params.pd;
    let mut noise = NoisePair::zero(n);
    if pd == 0.0 {
        return noise;
    }
    for j in 0..n {
        let (mut w, mut v) = (0u16, 0u16);
        for k in 0..e {
            let u: f64 = rng.random();
            if u < pd {
                // Split [0, pd) evenly into X, Z and XZ.
                let kind = ((3.0 * u / pd) as u32).min(2);
                let (x, z) = match kind {
                    0 => (1, 0),
                    1 => (0, 1),
                    _ => (1, 1),
                };
                w |= x << k;
                v |= z << k;
            }
        }
        noise.xi[j] = field.from_dual(w);
        noise.zeta[j] = field.from_primal(v);
    }
    noise
}

/// Measured syndromes `sigma = H_Delta xi` and `tau = H_Gamma zeta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromePair {
    pub sigma: Vec<Gf>,
    pub tau: Vec<Gf>,
}

impl SyndromePair {
    /// Binary image `s = (w(sigma_1), ...)`, equal to `H_Z x`.
    pub fn s_bits(&self, field: &Field) -> Vec<bool> {
        expand_bits(field, &self.sigma, |a| field.coord_dual(a))
    }

    /// Binary image `t = (v(tau_1), ...)`, equal to `H_X z`.
    pub fn t_bits(&self, field: &Field) -> Vec<bool> {
        expand_bits(field, &self.tau, |a| field.coord_primal(a))
    }

    pub fn is_zero(&self) -> bool {
        self.sigma.iter().chain(&self.tau).all(|s| s.is_zero())
    }
}

pub fn syndrome(code: &CssCode, noise: &NoisePair) -> Result<SyndromePair, ChannelError> {
    let n = code.params.n_sym;
    for v in [&noise.xi, &noise.zeta] {
        if v.len() != n {
            return Err(ChannelError::Length { got: v.len(), expected: n });
        }
    }
    Ok(SyndromePair {
        sigma: code.delta.mul_vec(&code.field, &noise.xi),
        tau: code.gamma.mul_vec(&code.field, &noise.zeta),
    })
}

/// The per-bit law `p(x, z)` lifted to symbol marginals, evaluated with one
/// Kronecker butterfly per bit so a length-q table costs O(q e).
#[derive(Clone, Debug)]
pub struct PriorKernel {
    pub table: [[f64; 2]; 2],
    e: u32,
}

impl PriorKernel {
    pub fn new(params: &DepolarizingParams, field: &Field) -> Self {
        PriorKernel {
            table: params.bit_table(),
            e: field.e(),
        }
    }

    /// `out[a] = sum_b prod_k K[a_k][b_k] input[b]`, in place. With
    /// `transpose` the kernel is `K[b_k][a_k]`.
    fn butterfly(&self, buf: &mut [f64], transpose: bool) {
        let k = if transpose {
            [[self.table[0][0], self.table[1][0]], [self.table[0][1], self.table[1][1]]]
        } else {
            self.table
        };
        let q = buf.len();
        let mut h = 1;
        while h < q {
            for block in buf.chunks_exact_mut(2 * h) {
                let (lo, hi) = block.split_at_mut(h);
                for (b0, b1) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x0, x1) = (*b0, *b1);
                    *b0 = k[0][0] * x0 + k[0][1] * x1;
                    *b1 = k[1][0] * x0 + k[1][1] * x1;
                }
            }
            h <<= 1;
        }
    }

    /// Prior on `xi_j` given a distribution on `zeta_j` (indexed by raw
    /// value): `p(xi) ∝ sum_zeta p(w(xi), v(zeta)) belief(zeta)`. Writes a
    /// normalized table indexed by raw value into `out`; `scratch` has length q.
    pub fn xi_prior_into(&self, field: &Field, belief_zeta: &[f64], scratch: &mut [f64], out: &mut [f64]) -> Result<(), ChannelError> {
        scratch.copy_from_slice(belief_zeta);
        self.butterfly(scratch, false);
        let dual = field.dual_table();
        for (a, o) in out.iter_mut().enumerate() {
            *o = scratch[dual[a] as usize];
        }
        normalize(out)
    }

    /// Prior on `zeta_j` given a distribution on `xi_j` (indexed by raw value).
    pub fn zeta_prior_into(&self, field: &Field, belief_xi: &[f64], scratch: &mut [f64], out: &mut [f64]) -> Result<(), ChannelError> {
        let dual = field.dual_table();
        for (a, &b) in belief_xi.iter().enumerate() {
            scratch[dual[a] as usize] = b;
        }
        self.butterfly(scratch, true);
        out.copy_from_slice(scratch);
        normalize(out)
    }

    pub fn xi_prior(&self, field: &Field, belief_zeta: &[f64]) -> Result<Vec<f64>, ChannelError> {
        let q = belief_zeta.len();
        debug_assert_eq!(q, 1 << self.e);
        let mut scratch = vec![0.0; q];
        let mut out = vec![0.0; q];
        self.xi_prior_into(field, belief_zeta, &mut scratch, &mut out)?;
        Ok(out)
    }

    pub fn zeta_prior(&self, field: &Field, belief_xi: &[f64]) -> Result<Vec<f64>, ChannelError> {
        let q = belief_xi.len();
        let mut scratch = vec![0.0; q];
        let mut out = vec![0.0; q];
        self.zeta_prior_into(field, belief_xi, &mut scratch, &mut out)?;
        Ok(out)
    }
}

fn normalize(v: &mut [f64]) -> Result<(), ChannelError> {
    let s: f64 = v.iter().sum();
    if !(s > 0.0) || !s.is_finite() {
        return Err(ChannelError::DegenerateBelief);
    }
    let inv = 1.0 / s;
    v.iter_mut().for_each(|x| *x *= inv);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flip_rate_identity() {
        let p = DepolarizingParams::new(0.15).unwrap();
        assert!((p.fm() - 0.1).abs() < 1e-15);
        let q = DepolarizingParams::from_flip(0.1).unwrap();
        assert!((q.pd() - 0.15).abs() < 1e-15);
        assert!(DepolarizingParams::new(0.8).is_err());
        assert!(DepolarizingParams::new(-0.1).is_err());
    }

    #[test]
    fn zero_noise() {
        let f = Field::with_degree(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = sample_noise(&DepolarizingParams::new(0.0).unwrap(), &f, 100, &mut rng);
        assert_eq!(n, NoisePair::zero(100));
    }

    #[test]
    fn point_mass_belief_gives_conditional_product() {
        let f = Field::with_degree(3).unwrap();
        let p = DepolarizingParams::new(0.3).unwrap();
        let k = PriorKernel::new(&p, &f);
        let mut b = vec![0.0; 8];
        b[0] = 1.0;
        let out = k.xi_prior(&f, &b).unwrap();
        let t = p.bit_table();
        let c0 = t[0][0] / (t[0][0] + t[1][0]);
        for a in f.elements() {
            let w = f.coord_dual(a);
            let want: f64 = (0..3)
                .map(|bit| if (w >> bit) & 1 == 1 { 1.0 - c0 } else { c0 })
                .product();
            assert!((out[a.index()] - want).abs() < 1e-12);
        }
        assert!(k.xi_prior(&f, &[0.0; 8]).is_err());
    }
}
