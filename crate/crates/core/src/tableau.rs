//! Clifford tableaus: Heisenberg images of `X_j` and `Z_j` under `U · U†`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::Rng;

use crate::circuit::{Circuit, Gate};
use crate::dense::{pauli_matrix, unitary_of_circuit};
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

/// In-place conjugation `P <- G P G†` for a Clifford gate.
pub fn conjugate_by_gate(p: &mut PauliOperator, g: &Gate) -> Result<()> {
    use Gate::*;
    let n = p.num_qubits();
    for q in g.qubits() {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, n });
        }
    }
    let flip = |p: &mut PauliOperator, cond: bool| {
        if cond {
            p.negate();
        }
    };
    match *g {
        I(_) => {}
        X(q) => {
            let z = p.z_bit(q);
            flip(p, z);
        }
        Z(q) => {
            let x = p.x_bit(q);
            flip(p, x);
        }
        Y(q) => {
            let (x, z) = (p.x_bit(q), p.z_bit(q));
            flip(p, x ^ z);
        }
        H(q) => {
            let (x, z) = (p.x_bit(q), p.z_bit(q));
            flip(p, x && z);
            p.set_bits(q, z, x);
        }
        S(q) => {
            let (x, z) = (p.x_bit(q), p.z_bit(q));
            flip(p, x && z);
            p.set_bits(q, x, z ^ x);
        }
        Sdg(q) => {
            let (x, z) = (p.x_bit(q), p.z_bit(q));
            flip(p, x && !z);
            p.set_bits(q, x, z ^ x);
        }
        U0(q) => {
            let (x, z) = (p.x_bit(q), p.z_bit(q));
            p.set_bits(q, x ^ z, x);
        }
        U0dg(q) => {
            let (x, z) = (p.x_bit(q), p.z_bit(q));
            p.set_bits(q, z, x ^ z);
        }
        Cnot(c, t) => {
            let (xc, zc, xt, zt) = (p.x_bit(c), p.z_bit(c), p.x_bit(t), p.z_bit(t));
            flip(p, xc && zt && !(xt ^ zc));
            p.set_bits(t, xt ^ xc, zt);
            p.set_bits(c, xc, zc ^ zt);
        }
        Cz(a, b) => {
            conjugate_by_gate(p, &H(b))?;
            conjugate_by_gate(p, &Cnot(a, b))?;
            conjugate_by_gate(p, &H(b))?;
        }
        Swap(a, b) => {
            let (xa, za, xb, zb) = (p.x_bit(a), p.z_bit(a), p.x_bit(b), p.z_bit(b));
            p.set_bits(a, xb, zb);
            p.set_bits(b, xa, za);
        }
        T(_) | Tdg(_) | Ccz(..) => return Err(Error::NotClifford(g.name().to_string())),
    }
    Ok(())
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CliffordTableau {
    n: usize,
    xs: Vec<PauliOperator>,
    zs: Vec<PauliOperator>,
}

impl std::fmt::Debug for CliffordTableau {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for j in 0..self.n {
            writeln!(f, "X{j} -> {}  Z{j} -> {}", self.xs[j], self.zs[j])?;
        }
        Ok(())
    }
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        CliffordTableau {
            n,
            xs: (0..n).map(|j| PauliOperator::x_on(n, j)).collect(),
            zs: (0..n).map(|j| PauliOperator::z_on(n, j)).collect(),
        }
    }

    /// Builds a tableau from explicit images, rejecting non-symplectic input.
    pub fn from_images(xs: Vec<PauliOperator>, zs: Vec<PauliOperator>) -> Result<Self> {
        let n = xs.len();
        if zs.len() != n {
            return Err(Error::DimensionMismatch(n, zs.len()));
        }
        for p in xs.iter().chain(&zs) {
            if p.num_qubits() != n {
                return Err(Error::DimensionMismatch(n, p.num_qubits()));
            }
        }
        let t = CliffordTableau { n, xs, zs };
        if !t.is_symplectic() {
            return Err(Error::NotClifford("images violate commutation relations".into()));
        }
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn image_x(&self, j: usize) -> &PauliOperator {
        &self.xs[j]
    }

    pub fn image_z(&self, j: usize) -> &PauliOperator {
        &self.zs[j]
    }

    pub fn is_symplectic(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            if !self.xs[i].is_hermitian() || !self.zs[i].is_hermitian() {
                return false;
            }
            for j in 0..n {
                if self.xs[i].commutes(&self.zs[j]) == (i == j) {
                    return false;
                }
                if j > i && (!self.xs[i].commutes(&self.xs[j]) || !self.zs[i].commutes(&self.zs[j])) {
                    return false;
                }
            }
        }
        true
    }

    /// Composition with a gate applied after the current operation.
    pub fn apply(&mut self, g: &Gate) -> Result<()> {
        for p in self.xs.iter_mut().chain(self.zs.iter_mut()) {
            conjugate_by_gate(p, g)?;
        }
        Ok(())
    }

    pub fn from_circuit(circuit: &Circuit) -> Result<Self> {
        circuit.validate()?;
        let mut t = Self::identity(circuit.n);
        for g in &circuit.gates {
            t.apply(g)?;
        }
        Ok(t)
    }

    pub fn from_gate(n: usize, g: &Gate) -> Result<Self> {
        let mut t = Self::identity(n);
        t.apply(g)?;
        Ok(t)
    }

    /// `U P U†` with the phase carried exactly.
    pub fn conjugate(&self, p: &PauliOperator) -> Result<PauliOperator> {
        if p.num_qubits() != self.n {
            return Err(Error::DimensionMismatch(self.n, p.num_qubits()));
        }
        Ok(self.conjugate_unchecked(p))
    }

    pub(crate) fn conjugate_unchecked(&self, p: &PauliOperator) -> PauliOperator {
        let mut out = PauliOperator::identity(self.n);
        let mut e = p.phase() as u32;
        for j in 0..self.n {
            let (x, z) = (p.x_bit(j), p.z_bit(j));
            if x && z {
                e += 1;
            }
            if x {
                out.mul_assign_right(&self.xs[j]);
            }
            if z {
                out.mul_assign_right(&self.zs[j]);
            }
        }
        out.set_phase(((out.phase() as u32 + e) & 3) as u8);
        out
    }

    /// The operation `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &CliffordTableau) -> Result<CliffordTableau> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        Ok(CliffordTableau {
            n: self.n,
            xs: self.xs.iter().map(|p| other.conjugate_unchecked(p)).collect(),
            zs: self.zs.iter().map(|p| other.conjugate_unchecked(p)).collect(),
        })
    }

    pub fn inverse(&self) -> CliffordTableau {
        let n = self.n;
        let mut xs = Vec::with_capacity(n);
        let mut zs = Vec::with_capacity(n);
        for j in 0..n {
            // The preimage's X/Z content on qubit k follows from symplectic
            // products with the images of Z_k and X_k.
            let mut px = PauliOperator::identity(n);
            let mut pz = PauliOperator::identity(n);
            for k in 0..n {
                px.set_bits(k, self.zs[k].z_bit(j), self.xs[k].z_bit(j));
                pz.set_bits(k, self.zs[k].x_bit(j), self.xs[k].x_bit(j));
            }
            if self.conjugate_unchecked(&px).phase() != 0 {
                px.negate();
            }
            if self.conjugate_unchecked(&pz).phase() != 0 {
                pz.negate();
            }
            xs.push(px);
            zs.push(pz);
        }
        CliffordTableau { n, xs, zs }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    /// Gate list from {H, S, SDG, CNOT, SWAP, X, Z} realising this tableau.
    pub fn to_circuit(&self) -> Circuit {
        let n = self.n;
        let mut w = self.clone();
        let mut ops: Vec<Gate> = Vec::new();
        let mut push = |w: &mut CliffordTableau, g: Gate| {
            w.apply(&g).expect("synthesis gate in range");
            ops.push(g);
        };
        for i in 0..n {
            let k = (i..n).find(|&k| w.xs[i].get(k) != 'I').expect("symplectic tableau");
            match w.xs[i].get(k) {
                'Z' => push(&mut w, Gate::H(k)),
                'Y' => push(&mut w, Gate::S(k)),
                _ => {}
            }
            if k != i {
                push(&mut w, Gate::Swap(i, k));
            }
            for l in i + 1..n {
                match w.xs[i].get(l) {
                    'I' => continue,
                    'Z' => push(&mut w, Gate::H(l)),
                    'Y' => push(&mut w, Gate::S(l)),
                    _ => {}
                }
                push(&mut w, Gate::Cnot(i, l));
            }
            if w.zs[i].get(i) == 'Y' {
                push(&mut w, Gate::H(i));
                push(&mut w, Gate::S(i));
                push(&mut w, Gate::H(i));
            }
            for l in i + 1..n {
                match w.zs[i].get(l) {
                    'I' => continue,
                    'X' => push(&mut w, Gate::H(l)),
                    'Y' => {
                        push(&mut w, Gate::S(l));
                        push(&mut w, Gate::H(l));
                    }
                    _ => {}
                }
                push(&mut w, Gate::Cnot(l, i));
            }
            if w.xs[i].phase() != 0 {
                push(&mut w, Gate::Z(i));
            }
            if w.zs[i].phase() != 0 {
                push(&mut w, Gate::X(i));
            }
        }
        debug_assert!(w.is_identity());
        Circuit { n, gates: ops.iter().rev().map(Gate::inverse).collect() }
    }
    /// Dense unitary realising this tableau, up to global phase.
    pub fn to_unitary(&self) -> Result<DMatrix<C>> {
        unitary_of_circuit(&self.to_circuit())
    }

    /// Reads off the Heisenberg images of a dense unitary, failing when it is
    /// not Clifford.
    pub fn from_unitary(u: &DMatrix<C>) -> Result<CliffordTableau> {
        let d = u.nrows();
        let n = d.trailing_zeros() as usize;
        if u.ncols() != d || d != 1 << n {
            return Err(Error::InvalidArgument("unitary must be 2^n square".into()));
        }
        let image = |p: &PauliOperator| -> Result<PauliOperator> {
            let m = u * pauli_matrix(p) * u.adjoint();
            pauli_from_matrix(&m, n)
                .ok_or_else(|| Error::NotClifford(format!("image of {p} is not a Pauli operator")))
        };
        let xs = (0..n).map(|j| image(&PauliOperator::x_on(n, j))).collect::<Result<Vec<_>>>()?;
        let zs = (0..n).map(|j| image(&PauliOperator::z_on(n, j))).collect::<Result<Vec<_>>>()?;
        Self::from_images(xs, zs)
    }

    /// A tableau from a random {H, S, CNOT} word of length `8 n^2 + 8`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CliffordTableau {
        let mut t = Self::identity(n);
        for _ in 0..8 * n * n + 8 {
            let a = rng.random_range(0..n);
            let g = match rng.random_range(0..3) {
                0 => Gate::H(a),
                1 => Gate::S(a),
                _ if n > 1 => {
                    let mut b = rng.random_range(0..n - 1);
                    if b >= a {
                        b += 1;
                    }
                    Gate::Cnot(a, b)
                }
                _ => Gate::X(a),
            };
            t.apply(&g).expect("in range");
        }
        t
    }
}

/// Recognises a signed Hermitian Pauli from its dense matrix.
pub(crate) fn pauli_from_matrix(m: &DMatrix<C>, n: usize) -> Option<PauliOperator> {
    let d = 1usize << n;
    let xm = (0..d).find(|&r| m[(r, 0)].norm() > 0.5)?;
    let base = m[(xm, 0)];
    let mut p = PauliOperator::identity(n);
    for q in 0..n {
        let col = 1usize << (n - 1 - q);
        let v = m[(col ^ xm, col)];
        let z = (v + base).norm() < 1e-6;
        p.set_bits(q, (xm >> (n - 1 - q)) & 1 == 1, z);
    }
    let y = (p.x_index_mask() & p.z_index_mask()).count_ones();
    // base = i^{phase + y}
    let k = [C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(-1.0, 0.0), C::new(0.0, -1.0)]
        .iter()
        .position(|w| (w - base).norm() < 1e-6)?;
    p.set_phase(((k as u32 + 4 - (y & 3)) & 3) as u8);
    let diff = (pauli_matrix(&p) - m).iter().map(|v| v.norm()).fold(0.0, f64::max);
    (diff < 1e-8).then_some(p)
}
