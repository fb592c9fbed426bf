//! Dense state-vector and density-matrix backend (the exact oracle).
//!
//! Basis index bit `n - 1 - q` belongs to qubit `q`, so qubit 0 is the
//! leftmost label in `|q0 q1 ...⟩`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::Rng;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

pub const MAX_STATE_QUBITS: usize = 14;
pub const MAX_DENSITY_QUBITS: usize = 11;

pub fn i_pow(k: u32) -> C {
    match k & 3 {
        0 => C::new(1.0, 0.0),
        1 => C::new(0.0, 1.0),
        2 => C::new(-1.0, 0.0),
        _ => C::new(0.0, -1.0),
    }
}

const fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Row-major 2x2 matrix of a single-qubit gate.
pub fn single_qubit_matrix(g: &Gate) -> Option<[C; 4]> {
    use Gate::*;
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    Some(match g {
        I(_) => [one, o, o, one],
        X(_) => [o, one, one, o],
        Y(_) => [o, c(0.0, -1.0), c(0.0, 1.0), o],
        Z(_) => [one, o, o, -one],
        H(_) => [c(R, 0.0), c(R, 0.0), c(R, 0.0), c(-R, 0.0)],
        S(_) => [one, o, o, c(0.0, 1.0)],
        Sdg(_) => [one, o, o, c(0.0, -1.0)],
        U0(_) => [c(R, 0.0), c(0.0, -R), c(R, 0.0), c(0.0, R)],
        U0dg(_) => [c(R, 0.0), c(R, 0.0), c(0.0, R), c(0.0, -R)],
        T(_) => [one, o, o, c(R, R)],
        Tdg(_) => [one, o, o, c(R, -R)],
        _ => return None,
    })
}

#[inline]
fn bit(nq: usize, q: usize) -> usize {
    1 << (nq - 1 - q)
}

/// Applies `g` (shifted by `offset`) to a raw amplitude array over `nq` qubits.
/// With `conj` set the complex-conjugate gate is applied instead.
pub(crate) fn apply_gate_raw(amps: &mut [C], nq: usize, g: &Gate, offset: usize, conj: bool) {
    if let Some(mut m) = single_qubit_matrix(g) {
        if conj {
            for v in m.iter_mut() {
                *v = v.conj();
            }
        }
        let mask = bit(nq, g.qubits()[0] + offset);
        for i in 0..amps.len() {
            if i & mask == 0 {
                let (a, b) = (amps[i], amps[i | mask]);
                amps[i] = m[0] * a + m[1] * b;
                amps[i | mask] = m[2] * a + m[3] * b;
            }
        }
        return;
    }
    match *g {
        Gate::Cnot(ct, tg) => {
            let (mc, mt) = (bit(nq, ct + offset), bit(nq, tg + offset));
            for i in 0..amps.len() {
                if i & mc != 0 && i & mt == 0 {
                    amps.swap(i, i | mt);
                }
            }
        }
        Gate::Cz(a, b) => {
            let m = bit(nq, a + offset) | bit(nq, b + offset);
            for (i, v) in amps.iter_mut().enumerate() {
                if i & m == m {
                    *v = -*v;
                }
            }
        }
        Gate::Swap(a, b) => {
            let (ma, mb) = (bit(nq, a + offset), bit(nq, b + offset));
            for i in 0..amps.len() {
                if i & ma != 0 && i & mb == 0 {
                    amps.swap(i, (i ^ ma) | mb);
                }
            }
        }
        Gate::Ccz(a, b, d) => {
            let m = bit(nq, a + offset) | bit(nq, b + offset) | bit(nq, d + offset);
            for (i, v) in amps.iter_mut().enumerate() {
                if i & m == m {
                    *v = -*v;
                }
            }
        }
        _ => unreachable!("single-qubit gates handled above"),
    }
}

/// Applies a Pauli operator (with its phase) to a raw amplitude array.
pub(crate) fn apply_pauli_raw(amps: &mut [C], p: &PauliOperator, nq: usize, offset: usize, conj: bool) {
    let mut xm = 0usize;
    let mut zm = 0usize;
    for q in 0..p.num_qubits() {
        if p.x_bit(q) {
            xm |= bit(nq, q + offset);
        }
        if p.z_bit(q) {
            zm |= bit(nq, q + offset);
        }
    }
    let y = (xm & zm).count_ones();
    let mut base = i_pow(p.phase() as u32 + y);
    if conj {
        base = base.conj();
    }
    let src = amps.to_vec();
    for (i, &a) in src.iter().enumerate() {
        let s = if (i & zm).count_ones() % 2 == 1 { -base } else { base };
        amps[i ^ xm] = s * a;
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::Capacity(format!("{n} qubits exceeds the dense limit of {cap}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<C>,
}

impl DenseState {
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_cap(n, MAX_STATE_QUBITS)?;
        let mut amps = vec![C::new(0.0, 0.0); 1 << n];
        amps[index] = C::new(1.0, 0.0);
        Ok(DenseState { n, amps })
    }

    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(amps: Vec<C>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n || amps.is_empty() {
            return Err(Error::InvalidArgument("amplitude count must be a power of two".into()));
        }
        check_cap(n, MAX_STATE_QUBITS)?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::Numerical("zero vector".into()));
        }
        Ok(DenseState { n, amps: amps.into_iter().map(|a| a / norm).collect() })
    }

    pub fn from_circuit(circuit: &Circuit) -> Result<Self> {
        let mut s = Self::zero(circuit.n)?;
        s.apply_circuit(circuit)?;
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amps
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        for q in g.qubits() {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { index: q, n: self.n });
            }
        }
        apply_gate_raw(&mut self.amps, self.n, g, 0, false);
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n > self.n {
            return Err(Error::DimensionMismatch(self.n, circuit.n));
        }
        circuit.validate()?;
        for g in &circuit.gates {
            apply_gate_raw(&mut self.amps, self.n, g, 0, false);
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: &PauliOperator) -> Result<()> {
        if p.num_qubits() != self.n {
            return Err(Error::DimensionMismatch(self.n, p.num_qubits()));
        }
        apply_pauli_raw(&mut self.amps, p, self.n, 0, false);
        Ok(())
    }

    pub fn inner(&self, other: &DenseState) -> C {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|^2`.
    pub fn overlap(&self, other: &DenseState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn expectation(&self, p: &PauliOperator) -> C {
        let mut v = self.amps.clone();
        apply_pauli_raw(&mut v, p, self.n, 0, false);
        self.amps.iter().zip(&v).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn tensor(&self, other: &DenseState) -> Result<DenseState> {
        check_cap(self.n + other.n, MAX_STATE_QUBITS)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(DenseState { n: self.n + other.n, amps })
    }

    /// Projective Z measurement of qubit `q`.
    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<(u8, f64)> {
        let p1 = self.prob_one(q)?;
        let b = u8::from(rng.random::<f64>() < p1);
        let p = if b == 1 { p1 } else { 1.0 - p1 };
        self.project_z(q, b)?;
        Ok((b, p))
    }

    pub fn prob_one(&self, q: usize) -> Result<f64> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange { index: q, n: self.n });
        }
        let m = bit(self.n, q);
        Ok(self.amps.iter().enumerate().filter(|(i, _)| i & m != 0).map(|(_, a)| a.norm_sqr()).sum())
    }

    /// Projects onto outcome `b` of qubit `q` and renormalizes.
    pub fn project_z(&mut self, q: usize, b: u8) -> Result<f64> {
        let m = bit(self.n, q);
        let want = if b == 1 { m } else { 0 };
        let mut norm = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & m != want {
                *a = C::new(0.0, 0.0);
            } else {
                norm += a.norm_sqr();
            }
        }
        if norm < 1e-300 {
            return Err(Error::Numerical("projection onto a zero-probability outcome".into()));
        }
        let s = norm.sqrt();
        for a in self.amps.iter_mut() {
            *a /= s;
        }
        Ok(norm)
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_pure(self)
    }
}

/// Row-major `2^n x 2^n` density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<C>,
}

impl DensityMatrix {
    pub fn from_pure(s: &DenseState) -> Result<Self> {
        check_cap(s.n, MAX_DENSITY_QUBITS)?;
        let d = s.amps.len();
        let mut data = vec![C::new(0.0, 0.0); d * d];
        for r in 0..d {
            for col in 0..d {
                data[r * d + col] = s.amps[r] * s.amps[col].conj();
            }
        }
        Ok(DensityMatrix { n: s.n, data })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::from_pure(&DenseState::zero(n)?)
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_cap(n, MAX_DENSITY_QUBITS)?;
        let d = 1 << n;
        let mut data = vec![C::new(0.0, 0.0); d * d];
        for i in 0..d {
            data[i * d + i] = C::new(1.0 / d as f64, 0.0);
        }
        Ok(DensityMatrix { n, data })
    }

    pub fn from_matrix(m: &DMatrix<C>) -> Result<Self> {
        let d = m.nrows();
        let n = d.trailing_zeros() as usize;
        if m.ncols() != d || d != 1 << n {
            return Err(Error::InvalidArgument("density matrix must be square of size 2^n".into()));
        }
        check_cap(n, MAX_DENSITY_QUBITS)?;
        let mut data = Vec::with_capacity(d * d);
        for r in 0..d {
            for col in 0..d {
                data.push(m[(r, col)]);
            }
        }
        Ok(DensityMatrix { n, data })
    }

    pub fn to_matrix(&self) -> DMatrix<C> {
        let d = self.dim();
        DMatrix::from_row_slice(d, d, &self.data)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, r: usize, col: usize) -> C {
        self.data[r * self.dim() + col]
    }

    pub fn trace(&self) -> C {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i]).sum()
    }

    pub fn scale(&mut self, s: f64) {
        for v in self.data.iter_mut() {
            *v *= s;
        }
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let t = self.trace().re;
        if t < 1e-12 {
            return Err(Error::Numerical(format!("trace collapsed to {t:e}")));
        }
        self.scale(1.0 / t);
        Ok(t)
    }

    /// `self <- a * self + b * other`.
    pub fn mix(&mut self, a: f64, other: &DensityMatrix, b: f64) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x = *x * a + *y * b;
        }
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        for q in g.qubits() {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { index: q, n: self.n });
            }
        }
        // vec(U rho U†) = (U ⊗ U*) vec(rho) for row-major storage.
        apply_gate_raw(&mut self.data, 2 * self.n, g, 0, false);
        apply_gate_raw(&mut self.data, 2 * self.n, g, self.n, true);
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n > self.n {
            return Err(Error::DimensionMismatch(self.n, circuit.n));
        }
        circuit.validate()?;
        for g in &circuit.gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: &PauliOperator) -> Result<()> {
        if p.num_qubits() != self.n {
            return Err(Error::DimensionMismatch(self.n, p.num_qubits()));
        }
        apply_pauli_raw(&mut self.data, p, 2 * self.n, 0, false);
        apply_pauli_raw(&mut self.data, p, 2 * self.n, self.n, true);
        Ok(())
    }

    /// Conjugation by an arbitrary dense unitary on all qubits.
    pub fn apply_unitary(&mut self, u: &DMatrix<C>) -> Result<()> {
        if u.nrows() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), u.nrows()));
        }
        let m = u * self.to_matrix() * u.adjoint();
        *self = Self::from_matrix(&m)?;
        Ok(())
    }

    /// `rho <- (1 - w) rho + w (Tr_Q rho ⊗ I / 2^|Q|)`.
    pub fn depolarize(&mut self, qubits: &[usize], w: f64) -> Result<()> {
        if w == 0.0 {
            return Ok(());
        }
        let mut mask = 0usize;
        for &q in qubits {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { index: q, n: self.n });
            }
            mask |= bit(self.n, q);
        }
        let d = self.dim();
        let k = qubits.len();
        // Enumerate submasks of `mask` for the traced-out register.
        let subs: Vec<usize> = {
            let mut v = Vec::with_capacity(1 << k);
            let mut s = 0usize;
            loop {
                v.push(s);
                if s == mask {
                    break;
                }
                s = (s.wrapping_sub(mask)) & mask;
            }
            v
        };
        let inv = 1.0 / (1 << k) as f64;
        let old = self.data.clone();
        for r in 0..d {
            for col in 0..d {
                let mut avg = C::new(0.0, 0.0);
                if (r ^ col) & mask == 0 {
                    let (rb, cb) = (r & !mask, col & !mask);
                    for &s in &subs {
                        avg += old[(rb | s) * d + (cb | s)];
                    }
                    avg *= inv;
                }
                let v = &mut self.data[r * d + col];
                *v = *v * (1.0 - w) + avg * w;
            }
        }
        Ok(())
    }

    /// One-qubit channel `(1 - 3q/2) rho + (q/2)(X rho X + Y rho Y + Z rho Z)`.
    pub fn depolarize_one(&mut self, qubit: usize, q: f64) -> Result<()> {
        self.depolarize(&[qubit], 2.0 * q)
    }

    /// Two-qubit channel `(1 - 5q/4) rho + (q/12) Σ_{P ≠ I} P rho P`.
    pub fn depolarize_two(&mut self, a: usize, b: usize, q: f64) -> Result<()> {
        self.depolarize(&[a, b], 4.0 * q / 3.0)
    }

    /// `(1 - p) rho + p X_q rho X_q`.
    pub fn bit_flip(&mut self, qubit: usize, p: f64) -> Result<()> {
        let mut other = self.clone();
        other.apply_pauli(&PauliOperator::x_on(self.n, qubit))?;
        self.mix(1.0 - p, &other, p);
        Ok(())
    }

    pub fn prob_z(&self, q: usize, b: u8) -> Result<f64> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange { index: q, n: self.n });
        }
        let m = bit(self.n, q);
        let want = if b == 1 { m } else { 0 };
        let d = self.dim();
        Ok((0..d).filter(|i| i & m == want).map(|i| self.data[i * d + i].re).sum())
    }

    /// Projects onto outcome `b` without renormalizing; returns the weight.
    pub fn project_z_unnormalized(&mut self, q: usize, b: u8) -> Result<f64> {
        let p = self.prob_z(q, b)?;
        let m = bit(self.n, q);
        let want = if b == 1 { m } else { 0 };
        let d = self.dim();
        for r in 0..d {
            for col in 0..d {
                if r & m != want || col & m != want {
                    self.data[r * d + col] = C::new(0.0, 0.0);
                }
            }
        }
        Ok(p)
    }

    /// Keeps the listed qubits, in order, tracing out the rest.
    pub fn partial_trace_keep(&self, keep: &[usize]) -> Result<DensityMatrix> {
        for &q in keep {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { index: q, n: self.n });
            }
        }
        let k = keep.len();
        let dk = 1 << k;
        let d = self.dim();
        let traced: Vec<usize> = (0..self.n).filter(|q| !keep.contains(q)).collect();
        let dt = 1 << traced.len();
        let full_index = |sub: usize, env: usize| -> usize {
            let mut idx = 0usize;
            for (i, &q) in keep.iter().enumerate() {
                if (sub >> (k - 1 - i)) & 1 == 1 {
                    idx |= bit(self.n, q);
                }
            }
            for (i, &q) in traced.iter().enumerate() {
                if (env >> (traced.len() - 1 - i)) & 1 == 1 {
                    idx |= bit(self.n, q);
                }
            }
            idx
        };
        let mut data = vec![C::new(0.0, 0.0); dk * dk];
        for e in 0..dt {
            for r in 0..dk {
                let fr = full_index(r, e);
                for col in 0..dk {
                    data[r * dk + col] += self.data[fr * d + full_index(col, e)];
                }
            }
        }
        Ok(DensityMatrix { n: k, data })
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        check_cap(self.n + other.n, MAX_DENSITY_QUBITS)?;
        let (da, db) = (self.dim(), other.dim());
        let d = da * db;
        let mut data = vec![C::new(0.0, 0.0); d * d];
        for r1 in 0..da {
            for c1 in 0..da {
                let a = self.data[r1 * da + c1];
                if a == C::new(0.0, 0.0) {
                    continue;
                }
                for r2 in 0..db {
                    for c2 in 0..db {
                        data[(r1 * db + r2) * d + c1 * db + c2] = a * other.data[r2 * db + c2];
                    }
                }
            }
        }
        Ok(DensityMatrix { n: self.n + other.n, data })
    }

    pub fn expectation(&self, p: &PauliOperator) -> C {
        // Tr(P rho) = Σ_col (P rho)_{col,col}.
        let d = self.dim();
        let xm = p.x_index_mask();
        let zm = p.z_index_mask();
        let base = i_pow(p.phase() as u32 + (xm & zm).count_ones());
        let mut t = C::new(0.0, 0.0);
        for col in 0..d {
            // P|col⟩ = base (-1)^{col·z} |col ^ x⟩, so ⟨r|P = ... with r = col ^ x.
            let r = col ^ xm;
            let s = if (col & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            t += base * s * self.data[col * d + r];
        }
        t
    }

    /// `⟨ψ|rho|ψ⟩`.
    pub fn fidelity_pure(&self, psi: &DenseState) -> f64 {
        let d = self.dim();
        let mut t = C::new(0.0, 0.0);
        for r in 0..d {
            let a = psi.amps[r].conj();
            if a == C::new(0.0, 0.0) {
                continue;
            }
            for col in 0..d {
                t += a * self.data[r * d + col] * psi.amps[col];
            }
        }
        t.re
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `Tr[self · other]`.
    pub fn overlap(&self, other: &DensityMatrix) -> f64 {
        let d = self.dim();
        let mut t = C::new(0.0, 0.0);
        for r in 0..d {
            for col in 0..d {
                t += self.data[r * d + col] * other.data[col * d + r];
            }
        }
        t.re
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i].re).collect()
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Hermitian, unit trace, eigenvalues above `-tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let m = self.to_matrix();
        if (&m - m.adjoint()).iter().any(|v| v.norm() > tol) {
            return false;
        }
        if (self.trace() - C::new(1.0, 0.0)).norm() > tol {
            return false;
        }
        let h = (&m + m.adjoint()) * C::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().all(|&e| e > -tol)
    }
}

/// Dense unitary of a circuit (any gate set) on `circuit.n` qubits.
pub fn unitary_of_circuit(circuit: &Circuit) -> Result<DMatrix<C>> {
    check_cap(circuit.n, MAX_DENSITY_QUBITS)?;
    circuit.validate()?;
    let d = 1 << circuit.n;
    let mut u = DMatrix::zeros(d, d);
    for col in 0..d {
        let mut v = vec![C::new(0.0, 0.0); d];
        v[col] = C::new(1.0, 0.0);
        for g in &circuit.gates {
            apply_gate_raw(&mut v, circuit.n, g, 0, false);
        }
        for r in 0..d {
            u[(r, col)] = v[r];
        }
    }
    Ok(u)
}

/// Dense matrix of a Pauli operator.
pub fn pauli_matrix(p: &PauliOperator) -> DMatrix<C> {
    let d = 1 << p.num_qubits();
    DMatrix::from_row_slice(d, d, &p.to_dense())
}

/// Random density matrix of rank `rank` (Ginibre construction).
pub fn random_density<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    use rand_distr::{Distribution, StandardNormal};
    let d = 1 << n;
    let g = DMatrix::from_fn(d, rank.max(1), |_, _| {
        C::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let m = &g * g.adjoint();
    let t = m.trace();
    DensityMatrix::from_matrix(&(m / t))
}

pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DenseState> {
    use rand_distr::{Distribution, StandardNormal};
    let amps = (0..1usize << n).map(|_| C::new(StandardNormal.sample(rng), StandardNormal.sample(rng))).collect();
    DenseState::from_amplitudes(amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn hadamard_on_zero() {
        let mut s = DenseState::zero(1).unwrap();
        s.apply_gate(&Gate::H(0)).unwrap();
        for a in s.amplitudes() {
            assert!((a - C::new(R, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn qubit_zero_is_leftmost() {
        let mut s = DenseState::zero(2).unwrap();
        s.apply_gate(&Gate::X(0)).unwrap();
        assert!((s.amplitudes()[2].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singlet_from_h_cnot_on_11() {
        let mut s = DenseState::basis(2, 3).unwrap();
        s.apply_circuit(&Circuit::parse("H 0\nCNOT 0 1").unwrap()).unwrap();
        let a = s.amplitudes();
        assert!((a[1].re - R).abs() < 1e-12 && (a[2].re + R).abs() < 1e-12);
        assert!(a[0].norm() < 1e-12 && a[3].norm() < 1e-12);
    }

    #[test]
    fn density_matches_pure_evolution() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut s = random_state(3, &mut rng).unwrap();
        let mut rho = s.to_density().unwrap();
        let c = Circuit::parse("H 0\nCNOT 0 2\nS 1\nU0 2\nCZ 1 2\nT 0\nCCZ 0 1 2\nSWAP 0 1").unwrap();
        s.apply_circuit(&c).unwrap();
        rho.apply_circuit(&c).unwrap();
        assert!(rho.max_abs_diff(&s.to_density().unwrap()) < 1e-12);
        let p = PauliOperator::from_support(3, &[0, 2], 'Y');
        assert!((rho.expectation(&p) - s.expectation(&p)).norm() < 1e-12);
    }

    #[test]
    fn depolarize_matches_pauli_sum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rho = random_density(3, 3, &mut rng).unwrap();
        let q = 0.03;
        let mut fast = rho.clone();
        fast.depolarize_two(0, 2, q).unwrap();
        let mut slow = rho.clone();
        slow.scale(1.0 - 5.0 * q / 4.0);
        for code in 1..16 {
            let mut p = PauliOperator::identity(3);
            p.set(0, ['I', 'X', 'Y', 'Z'][code >> 2]);
            p.set(2, ['I', 'X', 'Y', 'Z'][code & 3]);
            let mut t = rho.clone();
            t.apply_pauli(&p).unwrap();
            slow.mix(1.0, &t, q / 12.0);
        }
        assert!(fast.max_abs_diff(&slow) < 1e-14);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = DensityMatrix::from_pure(&DenseState::basis(1, 1).unwrap()).unwrap();
        let b = DensityMatrix::maximally_mixed(2).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert!(ab.partial_trace_keep(&[0]).unwrap().max_abs_diff(&a) < 1e-15);
        assert!(ab.partial_trace_keep(&[2, 1]).unwrap().max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn capacity_is_enforced() {
        assert!(matches!(DenseState::zero(15), Err(Error::Capacity(_))));
        assert!(matches!(DensityMatrix::zero(12), Err(Error::Capacity(_))));
    }
}
