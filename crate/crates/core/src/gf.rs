//! Arithmetic in GF(2^e) and the coordinate maps used to expand
//! non-binary check matrices into binary ones.
//!
//! Elements are stored in the polynomial basis `1, x, ..., x^(e-1)`: bit `k`
//! of the raw value is the coefficient of `x^k`. That raw bit pattern is the
//! primal coordinate vector `v(.)`. The dual coordinate vector `w(.)` is taken
//! with respect to the trace-dual basis, so `w(a)_k = Tr(a x^k)` and
//! `w(a) . v(b) = Tr(ab)`.

use std::fmt;
use std::ops::{Add, AddAssign};

use thiserror::Error;

/// Smallest supported extension degree.
pub const MIN_DEGREE: u32 = 2;
/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("extension degree {0} outside supported range {MIN_DEGREE}..={MAX_DEGREE}")]
    Degree(u32),
    #[error("modulus {modulus:#x} does not have degree {e}")]
    ModulusDegree { modulus: u32, e: u32 },
    #[error("modulus {0:#x} is reducible")]
    Reducible(u32),
    #[error("value {value} is not an element of GF(2^{e})")]
    OutOfRange { value: u32, e: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// An element of GF(2^e), in polynomial-basis bit representation.
#[derive(Copy, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gf(pub u16);

impl Gf {
    pub const ZERO: Gf = Gf(0);
    pub const ONE: Gf = Gf(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf({:#x})", self.0)
    }
}

impl fmt::Display for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

impl Add for Gf {
    type Output = Gf;
    #[inline]
    fn add(self, rhs: Gf) -> Gf {
        Gf(self.0 ^ rhs.0)
    }
}

impl AddAssign for Gf {
    #[inline]
    fn add_assign(&mut self, rhs: Gf) {
        self.0 ^= rhs.0;
    }
}

/// Default irreducible modulus per extension degree (index `e`).
const DEFAULT_MODULI: [u32; 17] = [
    0, 0, 0x7, 0xb, 0x13, 0x25, 0x43, 0x89, 0x11d, 0x211, 0x409, 0x805, 0x1053, 0x201b, 0x4443,
    0x8003, 0x1100b,
];

/// Default modulus for degree `e` (`x^8+x^4+x^3+x^2+1` for `e = 8`).
pub fn default_modulus(e: u32) -> Option<u32> {
    DEFAULT_MODULI
        .get(e as usize)
        .copied()
        .filter(|&m| m != 0)
}

/// Carry-less multiply of two polynomials over F_2 followed by reduction.
pub(crate) fn clmul_mod(a: u32, b: u32, modulus: u32, e: u32) -> u32 {
    let mut acc: u64 = 0;
    for k in 0..=e {
        if (b >> k) & 1 == 1 {
            acc ^= (a as u64) << k;
        }
    }
    poly_mod(acc, modulus as u64)
}

fn degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

fn poly_mod(mut a: u64, m: u64) -> u32 {
    let dm = degree(m);
    while a != 0 && degree(a) >= dm {
        a ^= m << (degree(a) - dm);
    }
    a as u32
}

fn is_irreducible(modulus: u32, e: u32) -> bool {
    // Any factorisation has a factor of degree <= e/2.
    for d in 1..=e / 2 {
        for low in 0..(1u32 << d) {
            let f = (1u32 << d) | low;
            if poly_mod(modulus as u64, f as u64) == 0 {
                return false;
            }
        }
    }
    true
}

/// The e x e binary matrix of multiplication by a fixed element, acting on
/// primal coordinates. `rows[r]` holds row `r` as a bitmask over columns.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MulMatrix {
    pub e: u32,
    pub rows: Vec<u16>,
}

impl MulMatrix {
    pub fn identity(e: u32) -> Self {
        MulMatrix {
            e,
            rows: (0..e).map(|r| 1u16 << r).collect(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.rows[r] >> c) & 1 == 1
    }

    /// Matrix-vector product over F_2.
    pub fn apply(&self, v: u16) -> u16 {
        self.rows
            .iter()
            .enumerate()
            .fold(0u16, |acc, (r, &row)| {
                acc | ((((row & v).count_ones() & 1) as u16) << r)
            })
    }

    pub fn transpose(&self) -> Self {
        let e = self.e as usize;
        let mut rows = vec![0u16; e];
        for (r, &row) in self.rows.iter().enumerate() {
            for (c, out) in rows.iter_mut().enumerate() {
                if (row >> c) & 1 == 1 {
                    *out |= 1 << r;
                }
            }
        }
        MulMatrix { e: self.e, rows }
    }

    /// Product `self * other` over F_2.
    pub fn mul(&self, other: &MulMatrix) -> Self {
        let e = self.e as usize;
        let mut rows = vec![0u16; e];
        for (r, out) in rows.iter_mut().enumerate() {
            for k in 0..e {
                if self.get(r, k) {
                    *out ^= other.rows[k];
                }
            }
        }
        MulMatrix { e: self.e, rows }
    }

    pub fn add(&self, other: &MulMatrix) -> Self {
        MulMatrix {
            e: self.e,
            rows: self.rows.iter().zip(&other.rows).map(|(a, b)| a ^ b).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }
}

/// GF(2^e) with precomputed log/antilog tables and coordinate tables.
#[derive(Clone)]
pub struct Field {
    e: u32,
    q: usize,
    modulus: u32,
    exp: Vec<u16>,
    log: Vec<u16>,
    trace_mask: u16,
    dual: Vec<u16>,
    dual_inv: Vec<u16>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("e", &self.e)
            .field("modulus", &format_args!("{:#x}", self.modulus))
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.e == other.e && self.modulus == other.modulus
    }
}

impl Eq for Field {}

impl Field {
    pub fn new(e: u32, modulus: u32) -> Result<Self, FieldError> {
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&e) {
            return Err(FieldError::Degree(e));
        }
        if degree(modulus as u64) != e as i32 {
            return Err(FieldError::ModulusDegree { modulus, e });
        }
        if !is_irreducible(modulus, e) {
            return Err(FieldError::Reducible(modulus));
        }
        let q = 1usize << e;
        let order = q - 1;

        // The modulus need not be primitive, so search for a generator.
        let mut generator = 2u32;
        let mut exp = vec![0u16; 2 * order];
        loop {
            let mut x = 1u32;
            let mut ok = true;
            for (i, slot) in exp.iter_mut().take(order).enumerate() {
                if i > 0 && x == 1 {
                    ok = false;
                    break;
                }
                *slot = x as u16;
                x = clmul_mod(x, generator, modulus, e);
            }
            if ok {
                break;
            }
            generator += 1;
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        let mut log = vec![0u16; q];
        for (i, &v) in exp.iter().take(order).enumerate() {
            log[v as usize] = i as u16;
        }

        let mut field = Field {
            e,
            q,
            modulus,
            exp,
            log,
            trace_mask: 0,
            dual: Vec::new(),
            dual_inv: Vec::new(),
        };

        let mut trace_mask = 0u16;
        for k in 0..e {
            if field.trace_by_powers(Gf(1 << k)) {
                trace_mask |= 1 << k;
            }
        }
        field.trace_mask = trace_mask;

        let basis_dual: Vec<u16> = (0..e)
            .map(|l| {
                (0..e).fold(0u16, |acc, k| {
                    let t = field.trace(field.mul(Gf(1 << l), Gf(1 << k)));
                    acc | ((t as u16) << k)
                })
            })
            .collect();
        let mut dual = vec![0u16; q];
        for a in 1..q {
            let low = a & (a - 1);
            let bit = (a ^ low).trailing_zeros() as usize;
            dual[a] = dual[low] ^ basis_dual[bit];
        }
        let mut dual_inv = vec![0u16; q];
        for (a, &w) in dual.iter().enumerate() {
            dual_inv[w as usize] = a as u16;
        }
        field.dual = dual;
        field.dual_inv = dual_inv;
        Ok(field)
    }

    /// Field with the default modulus for degree `e`.
    pub fn with_degree(e: u32) -> Result<Self, FieldError> {
        let modulus = default_modulus(e).ok_or(FieldError::Degree(e))?;
        Field::new(e, modulus)
    }

    #[inline]
    pub fn e(&self) -> u32 {
        self.e
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Checked conversion from a raw value.
    pub fn element(&self, value: u32) -> Result<Gf, FieldError> {
        if (value as usize) < self.q {
            Ok(Gf(value as u16))
        } else {
            Err(FieldError::OutOfRange { value, e: self.e })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Gf> {
        (0..self.q as u32).map(|v| Gf(v as u16))
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Gf> {
        (1..self.q as u32).map(|v| Gf(v as u16))
    }

    #[inline]
    pub fn add(&self, a: Gf, b: Gf) -> Gf {
        a + b
    }

    #[inline]
    pub fn mul(&self, a: Gf, b: Gf) -> Gf {
        if a.0 == 0 || b.0 == 0 {
            Gf::ZERO
        } else {
            Gf(self.exp[self.log[a.index()] as usize + self.log[b.index()] as usize])
        }
    }

    pub fn inv(&self, a: Gf) -> Result<Gf, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        let order = self.q - 1;
        Ok(Gf(self.exp[(order - self.log[a.index()] as usize) % order]))
    }

    /// `a / b`; panics when `b` is zero.
    #[inline]
    pub fn div(&self, a: Gf, b: Gf) -> Gf {
        assert!(!b.is_zero(), "division by zero in GF(2^{})", self.e);
        if a.is_zero() {
            return Gf::ZERO;
        }
        let order = self.q - 1;
        Gf(self.exp[self.log[a.index()] as usize + order - self.log[b.index()] as usize])
    }

    pub fn pow(&self, a: Gf, n: u64) -> Gf {
        if n == 0 {
            return Gf::ONE;
        }
        if a.is_zero() {
            return Gf::ZERO;
        }
        let order = (self.q - 1) as u64;
        let l = (self.log[a.index()] as u64 * (n % order)) % order;
        Gf(self.exp[l as usize])
    }

    fn trace_by_powers(&self, a: Gf) -> bool {
        let mut acc = Gf::ZERO;
        let mut x = a;
        for _ in 0..self.e {
            acc += x;
            x = self.mul(x, x);
        }
        debug_assert!(acc.0 <= 1);
        acc.0 == 1
    }

    /// Absolute trace `Tr(a) = a + a^2 + ... + a^(2^(e-1))`, as a bit.
    #[inline]
    pub fn trace(&self, a: Gf) -> bool {
        (a.0 & self.trace_mask).count_ones() & 1 == 1
    }

    /// Primal coordinates `v(a)`.
    #[inline]
    pub fn coord_primal(&self, a: Gf) -> u16 {
        a.0
    }

    /// Dual coordinates `w(a)`, with `w(a)_k = Tr(a x^k)`.
    #[inline]
    pub fn coord_dual(&self, a: Gf) -> u16 {
        self.dual[a.index()]
    }

    #[inline]
    pub fn from_primal(&self, bits: u16) -> Gf {
        Gf(bits)
    }

    #[inline]
    pub fn from_dual(&self, bits: u16) -> Gf {
        Gf(self.dual_inv[bits as usize])
    }

    /// Table `a -> w(a)` indexed by raw value.
    pub fn dual_table(&self) -> &[u16] {
        &self.dual
    }

    /// Multiplication matrix `A(g)` with `A(g) v(z) = v(g z)`.
    pub fn mul_matrix(&self, g: Gf) -> MulMatrix {
        let e = self.e as usize;
        let mut rows = vec![0u16; e];
        for c in 0..e {
            let col = self.mul(g, Gf(1 << c)).0;
            for (r, row) in rows.iter_mut().enumerate() {
                if (col >> r) & 1 == 1 {
                    *row |= 1 << c;
                }
            }
        }
        MulMatrix { e: self.e, rows }
    }

    /// Precomputed table `x -> g x` over all elements.
    pub fn mul_row(&self, g: Gf) -> Vec<u16> {
        self.elements().map(|x| self.mul(g, x).0).collect()
    }
}
