//! Bit-packed Pauli operators.
//!
//! An operator is stored as `i^phase` times a tensor product of single-qubit
//! factors, where the factor on qubit `q` is picked by the bits `(x_q, z_q)`:
//! `(0,0) = I`, `(1,0) = X`, `(0,1) = Z`, `(1,1) = Y`. With this convention a
//! Hermitian operator has `phase` 0 or 2.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

#[inline]
fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

#[inline]
fn popcount_and(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(u, v)| (u & v).count_ones()).sum()
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        PauliOperator { n, x: vec![0; words(n)], z: vec![0; words(n)], phase: 0 }
    }

    /// Single-qubit factor `c` ('I', 'X', 'Y' or 'Z') on qubit `q`.
    pub fn single(n: usize, q: usize, c: char) -> Self {
        let mut p = Self::identity(n);
        p.set(q, c);
        p
    }

    pub fn x_on(n: usize, q: usize) -> Self {
        Self::single(n, q, 'X')
    }

    pub fn z_on(n: usize, q: usize) -> Self {
        Self::single(n, q, 'Z')
    }

    /// Product of `c` over every qubit in `support`.
    pub fn from_support(n: usize, support: &[usize], c: char) -> Self {
        let mut p = Self::identity(n);
        for &q in support {
            p.set(q, c);
        }
        p
    }

    pub fn from_bits(n: usize, x: &[bool], z: &[bool], phase: u8) -> Self {
        let mut p = Self::identity(n);
        for q in 0..n {
            p.set_bits(q, x[q], z[q]);
        }
        p.phase = phase & 3;
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Exponent `e` of the `i^e` prefactor.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// +1 or -1 for Hermitian operators.
    pub fn sign(&self) -> i8 {
        debug_assert!(self.is_hermitian());
        if self.phase == 0 {
            1
        } else {
            -1
        }
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) & 3;
    }

    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        p.negate();
        p
    }

    /// Same Pauli word with phase `+1`.
    pub fn unsigned(&self) -> Self {
        let mut p = self.clone();
        p.phase = 0;
        p
    }

    #[inline]
    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q >> 6] >> (q & 63)) & 1 == 1
    }

    #[inline]
    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q >> 6] >> (q & 63)) & 1 == 1
    }

    #[inline]
    pub fn set_bits(&mut self, q: usize, x: bool, z: bool) {
        let (w, b) = (q >> 6, 1u64 << (q & 63));
        if x {
            self.x[w] |= b;
        } else {
            self.x[w] &= !b;
        }
        if z {
            self.z[w] |= b;
        } else {
            self.z[w] &= !b;
        }
    }

    pub fn get(&self, q: usize) -> char {
        match (self.x_bit(q), self.z_bit(q)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (false, true) => 'Z',
            (true, true) => 'Y',
        }
    }

    pub fn set(&mut self, q: usize, c: char) {
        let (x, z) = match c {
            'I' => (false, false),
            'X' => (true, false),
            'Z' => (false, true),
            'Y' => (true, true),
            _ => panic!("invalid Pauli letter {c}"),
        };
        self.set_bits(q, x, z);
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn is_identity_word(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.x_bit(q) || self.z_bit(q)).collect()
    }

    /// True when the two operators commute.
    pub fn commutes(&self, other: &Self) -> bool {
        (popcount_and(&self.x, &other.z) + popcount_and(&self.z, &other.x)) % 2 == 0
    }

    /// `self <- self * other`.
    pub fn mul_assign_right(&mut self, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        // Write each factor as i^{xz} X^x Z^z and move Z^{z1} past X^{x2}.
        let mut e = self.phase as u32 + other.phase as u32;
        e += popcount_and(&self.x, &self.z);
        e += popcount_and(&other.x, &other.z);
        e += 2 * popcount_and(&self.z, &other.x);
        for w in 0..self.x.len() {
            self.x[w] ^= other.x[w];
            self.z[w] ^= other.z[w];
        }
        let back = popcount_and(&self.x, &self.z);
        self.phase = ((e + 4 * back as u32 - back) & 3) as u8;
    }

    /// `self <- other * self`.
    pub fn mul_assign_left(&mut self, other: &Self) {
        let mut p = other.clone();
        p.mul_assign_right(self);
        *self = p;
    }

    /// Restriction to `qubits`, in that order, keeping the phase.
    pub fn restrict(&self, qubits: &[usize]) -> Self {
        let mut p = Self::identity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            p.set_bits(i, self.x_bit(q), self.z_bit(q));
        }
        p.phase = self.phase;
        p
    }

    /// Embed an operator on `qubits.len()` qubits into `n` qubits.
    pub fn embed(&self, n: usize, qubits: &[usize]) -> Self {
        assert_eq!(self.n, qubits.len());
        let mut p = Self::identity(n);
        for (i, &q) in qubits.iter().enumerate() {
            p.set_bits(q, self.x_bit(i), self.z_bit(i));
        }
        p.phase = self.phase;
        p
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let n = self.n + other.n;
        let mut p = Self::identity(n);
        for q in 0..self.n {
            p.set_bits(q, self.x_bit(q), self.z_bit(q));
        }
        for q in 0..other.n {
            p.set_bits(self.n + q, other.x_bit(q), other.z_bit(q));
        }
        p.phase = (self.phase + other.phase) & 3;
        p
    }

    /// Every signed Hermitian Pauli on `n` qubits (`2 * 4^n` of them).
    pub fn all_hermitian(n: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(2 << (2 * n));
        for sign in [0u8, 2] {
            for code in 0..(1usize << (2 * n)) {
                let mut p = Self::identity(n);
                for q in 0..n {
                    let c = ['I', 'X', 'Y', 'Z'][(code >> (2 * (n - 1 - q))) & 3];
                    p.set(q, c);
                }
                p.phase = sign;
                out.push(p);
            }
        }
        out
    }

    /// Dense matrix, row-major, with qubit 0 as the most significant bit.
    pub fn to_dense(&self) -> Vec<num_complex::Complex64> {
        use num_complex::Complex64 as C;
        let dim = 1usize << self.n;
        let mut m = vec![C::new(0.0, 0.0); dim * dim];
        let (xm, zm) = (self.index_mask(&self.x), self.index_mask(&self.z));
        let yc = (xm & zm).count_ones();
        let base = crate::dense::i_pow(self.phase as u32 + yc);
        for col in 0..dim {
            let row = col ^ xm;
            let sgn = if (col & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[row * dim + col] = base * sgn;
        }
        m
    }

    /// Bit mask in dense basis-index order (qubit 0 = most significant).
    pub(crate) fn index_mask(&self, bits: &[u64]) -> usize {
        let mut m = 0usize;
        for q in 0..self.n {
            if (bits[q >> 6] >> (q & 63)) & 1 == 1 {
                m |= 1 << (self.n - 1 - q);
            }
        }
        m
    }

    pub fn x_index_mask(&self) -> usize {
        self.index_mask(&self.x)
    }

    pub fn z_index_mask(&self) -> usize {
        self.index_mask(&self.z)
    }
}

/// Free-standing product with a dimension check.
pub fn pauli_mul(p: &PauliOperator, q: &PauliOperator) -> Result<PauliOperator> {
    if p.n != q.n {
        return Err(Error::DimensionMismatch(p.n, q.n));
    }
    let mut r = p.clone();
    r.mul_assign_right(q);
    Ok(r)
}

impl std::ops::Mul for &PauliOperator {
    type Output = PauliOperator;
    fn mul(self, rhs: &PauliOperator) -> PauliOperator {
        pauli_mul(self, rhs).expect("Pauli dimension mismatch")
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}")?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl serde::Serialize for PauliOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Parses `+XZI`, `-YY`, `+iZ`, `-iX` or an unsigned word.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            (0, s)
        };
        if body.is_empty() {
            return Err(Error::Parse { line: 0, msg: format!("empty Pauli string `{s}`") });
        }
        let mut p = PauliOperator::identity(body.len());
        for (q, c) in body.chars().enumerate() {
            if !matches!(c, 'I' | 'X' | 'Y' | 'Z') {
                return Err(Error::Parse { line: 0, msg: format!("bad Pauli letter `{c}` in `{s}`") });
            }
            p.set(q, c);
        }
        p.phase = phase;
        Ok(p)
    }
}
