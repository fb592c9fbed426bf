//! Clifford frame over `n` qubits plus an exact register for the `k` qubits
//! that start in non-stabilizer states.
//!
//! The represented state is `F (|0…0⟩⟨0…0| ⊗ ρ_M) F†`. Instead of `F` we keep
//! the Heisenberg rows `F† X_j F` and `F† Z_j F`, which is what measurement
//! needs.

use rand::Rng;

use crate::circuit::Gate;
use crate::dense::{DenseState, DensityMatrix};
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::tableau::conjugate_by_gate;

pub const MAX_MAGIC_QUBITS: usize = 12;

#[derive(Clone, Debug)]
pub enum Register {
    Pure(DenseState),
    Mixed(DensityMatrix),
}

impl Register {
    pub fn num_qubits(&self) -> usize {
        match self {
            Register::Pure(s) => s.num_qubits(),
            Register::Mixed(r) => r.num_qubits(),
        }
    }

    pub fn expectation(&self, p: &PauliOperator) -> f64 {
        match self {
            Register::Pure(s) => s.expectation(p).re,
            Register::Mixed(r) => r.expectation(p).re,
        }
    }

    /// `ρ <- Π ρ Π / prob` with `Π = (I + s P)/2`.
    fn project(&mut self, p: &PauliOperator, s: f64, prob: f64) -> Result<()> {
        match self {
            Register::Pure(st) => {
                let mut moved = st.clone();
                moved.apply_pauli(p)?;
                let amps: Vec<_> = st
                    .amplitudes()
                    .iter()
                    .zip(moved.amplitudes())
                    .map(|(a, b)| (a + b * s) * 0.5)
                    .collect();
                *st = DenseState::from_amplitudes(amps)?;
            }
            Register::Mixed(r) => {
                let d = r.dim();
                let pm = crate::dense::pauli_matrix(p);
                let rm = r.to_matrix();
                let id = nalgebra::DMatrix::<num_complex::Complex64>::identity(d, d);
                let proj = (&id + &pm * num_complex::Complex64::new(s, 0.0)) * num_complex::Complex64::new(0.5, 0.0);
                let out = &proj * rm * &proj / num_complex::Complex64::new(prob, 0.0);
                *r = DensityMatrix::from_matrix(&out)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct HybridState {
    n: usize,
    magic: Vec<usize>,
    slot: Vec<Option<usize>>,
    rows_x: Vec<PauliOperator>,
    rows_z: Vec<PauliOperator>,
    reg: Register,
}

impl HybridState {
    /// All qubits in `|0⟩` except `magic`, which hold `reg` (in that order).
    pub fn new(n: usize, magic: Vec<usize>, reg: Register) -> Result<Self> {
        if magic.len() > MAX_MAGIC_QUBITS {
            return Err(Error::Capacity(format!(
                "{} magic qubits exceeds the register limit of {MAX_MAGIC_QUBITS}",
                magic.len()
            )));
        }
        if reg.num_qubits() != magic.len() {
            return Err(Error::DimensionMismatch(magic.len(), reg.num_qubits()));
        }
        let mut slot = vec![None; n];
        for (i, &q) in magic.iter().enumerate() {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n });
            }
            if slot[q].is_some() {
                return Err(Error::InvalidArgument(format!("magic qubit {q} listed twice")));
            }
            slot[q] = Some(i);
        }
        Ok(HybridState {
            n,
            magic,
            slot,
            rows_x: (0..n).map(|j| PauliOperator::x_on(n, j)).collect(),
            rows_z: (0..n).map(|j| PauliOperator::z_on(n, j)).collect(),
            reg,
        })
    }

    /// Product input: each listed qubit starts in its own one-qubit state.
    pub fn from_product(n: usize, inputs: &[(usize, DenseState)]) -> Result<Self> {
        let mut reg = DenseState::zero(0)?;
        for (_, s) in inputs {
            if s.num_qubits() != 1 {
                return Err(Error::InvalidArgument("product inputs must be one-qubit states".into()));
            }
            reg = reg.tensor(s)?;
        }
        Self::new(n, inputs.iter().map(|(q, _)| *q).collect(), Register::Pure(reg))
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn magic_qubits(&self) -> &[usize] {
        &self.magic
    }

    pub fn register(&self) -> &Register {
        &self.reg
    }

    /// `F† P F` for a Pauli on the physical qubits.
    pub fn heisenberg(&self, p: &PauliOperator) -> PauliOperator {
        let mut out = PauliOperator::identity(self.n);
        let mut e = p.phase() as u32;
        for j in p.support() {
            let (x, z) = (p.x_bit(j), p.z_bit(j));
            if x && z {
                e += 1;
            }
            if x {
                out.mul_assign_right(&self.rows_x[j]);
            }
            if z {
                out.mul_assign_right(&self.rows_z[j]);
            }
        }
        out.set_phase(((out.phase() as u32 + e) & 3) as u8);
        out
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        let qs = g.qubits();
        for &q in &qs {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { index: q, n: self.n });
            }
        }
        if !g.is_clifford() {
            return Err(Error::NotClifford(format!("{g} in the hybrid backend")));
        }
        let inv = g.inverse();
        let mut updates = Vec::with_capacity(2 * qs.len());
        for &q in &qs {
            for is_x in [true, false] {
                // Local generator pulled back through the gate: G† A G.
                let mut a = if is_x { PauliOperator::x_on(self.n, q) } else { PauliOperator::z_on(self.n, q) };
                conjugate_by_gate(&mut a, &inv)?;
                updates.push((q, is_x, self.heisenberg(&a)));
            }
        }
        for (q, is_x, row) in updates {
            if is_x {
                self.rows_x[q] = row;
            } else {
                self.rows_z[q] = row;
            }
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, e: &PauliOperator) -> Result<()> {
        if e.num_qubits() != self.n {
            return Err(Error::DimensionMismatch(self.n, e.num_qubits()));
        }
        for j in e.support() {
            if e.z_bit(j) {
                self.rows_x[j].negate();
            }
            if e.x_bit(j) {
                self.rows_z[j].negate();
            }
        }
        Ok(())
    }

    /// Splits `F† P F` into a verdict: `Err(j)` if it flips stabilized qubit
    /// `j`, otherwise the register factor with the sign folded in.
    fn split(&self, q: &PauliOperator) -> std::result::Result<PauliOperator, usize> {
        for j in q.support() {
            if q.x_bit(j) && self.slot[j].is_none() {
                return Err(j);
            }
        }
        Ok(q.restrict(&self.magic))
    }

    pub fn expectation(&self, p: &PauliOperator) -> f64 {
        match self.split(&self.heisenberg(p)) {
            Err(_) => 0.0,
            Ok(pm) => self.reg.expectation(&pm),
        }
    }

    /// Measures Hermitian `p`; `forced` fixes the outcome. Returns the outcome
    /// and its probability. A forced outcome of probability below `1e-14` is
    /// reported with probability 0 and leaves the state untouched.
    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        p: &PauliOperator,
        forced: Option<u8>,
        rng: &mut R,
    ) -> Result<(u8, f64)> {
        match forced {
            Some(b) => self.measure_with(p, true, |_| b),
            None => self.measure_with(p, false, |p0| u8::from(rng.random::<f64>() >= p0)),
        }
    }

    /// Forces outcome `b` of `p`, returning its probability.
    pub fn force_pauli(&mut self, p: &PauliOperator, b: u8) -> Result<f64> {
        Ok(self.measure_with(p, true, |_| b)?.1)
    }

    fn measure_with(&mut self, p: &PauliOperator, forced: bool, choose: impl FnOnce(f64) -> u8) -> Result<(u8, f64)> {
        if p.num_qubits() != self.n {
            return Err(Error::DimensionMismatch(self.n, p.num_qubits()));
        }
        if !p.is_hermitian() {
            return Err(Error::InvalidArgument(format!("{p} is not Hermitian")));
        }
        let q = self.heisenberg(p);
        match self.split(&q) {
            Err(j) => {
                let b = choose(0.5);
                self.random_update(&q, j, b);
                Ok((b, 0.5))
            }
            Ok(pm) => {
                let ev = self.reg.expectation(&pm);
                let p0 = ((1.0 + ev) / 2.0).clamp(0.0, 1.0);
                let b = choose(p0);
                let prob = if b == 0 { p0 } else { 1.0 - p0 };
                if prob < 1e-14 {
                    if forced {
                        return Ok((b, 0.0));
                    }
                    return Err(Error::Numerical("measurement branch with vanishing probability".into()));
                }
                let s = if b == 0 { 1.0 } else { -1.0 };
                if prob < 1.0 - 1e-15 {
                    self.reg.project(&pm, s, prob)?;
                }
                Ok((b, prob))
            }
        }
    }

    pub fn measure_z<R: Rng + ?Sized>(&mut self, qubit: usize, rng: &mut R) -> Result<(u8, f64)> {
        if qubit >= self.n {
            return Err(Error::QubitOutOfRange { index: qubit, n: self.n });
        }
        self.measure_pauli(&PauliOperator::z_on(self.n, qubit), None, rng)
    }

    pub fn force_z(&mut self, qubit: usize, b: u8) -> Result<f64> {
        if qubit >= self.n {
            return Err(Error::QubitOutOfRange { index: qubit, n: self.n });
        }
        self.force_pauli(&PauliOperator::z_on(self.n, qubit), b)
    }

    /// Frame update for a random outcome: the post-measurement state equals
    /// `V σ V` with `V = (Z_j + sQ)/√2`, which maps each row `R` to
    /// `R`, `s·R·Q·Z_j`, `s·R·Z_j·Q` or `-R` by its commutation pattern.
    fn random_update(&mut self, q: &PauliOperator, j: usize, b: u8) {
        let zj = PauliOperator::z_on(self.n, j);
        let neg = b == 1;
        for row in self.rows_x.iter_mut().chain(self.rows_z.iter_mut()) {
            let a = row.x_bit(j);
            let c = !row.commutes(q);
            match (a, c) {
                (false, false) => {}
                (true, true) => row.negate(),
                (true, false) => {
                    row.mul_assign_right(q);
                    row.mul_assign_right(&zj);
                    if neg {
                        row.negate();
                    }
                }
                (false, true) => {
                    row.mul_assign_right(&zj);
                    row.mul_assign_right(q);
                    if neg {
                        row.negate();
                    }
                }
            }
        }
    }

    /// Exact joint distribution of Z measurements on `qubits`
    /// (`qubits[0]` is the most significant bit of the index).
    pub fn outcome_distribution(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; 1 << qubits.len()];
        self.branch(qubits, 0, 0, 1.0, &mut out)?;
        Ok(out)
    }

    fn branch(&self, qubits: &[usize], depth: usize, idx: usize, w: f64, out: &mut [f64]) -> Result<()> {
        if depth == qubits.len() {
            out[idx] += w;
            return Ok(());
        }
        for b in 0..2u8 {
            let mut next = self.clone();
            let p = next.force_z(qubits[depth], b)?;
            if p > 0.0 {
                next.branch(qubits, depth + 1, (idx << 1) | b as usize, w * p, out)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Circuit;
    use num_complex::Complex64 as C;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t_state() -> DenseState {
        // Bloch vector (1,1,1)/√3.
        let theta = (1.0f64 / 3.0f64.sqrt()).acos();
        let ph = C::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        DenseState::from_amplitudes(vec![C::new((theta / 2.0).cos(), 0.0), ph * (theta / 2.0).sin()]).unwrap()
    }

    #[test]
    fn t_input_offset() {
        let h = HybridState::from_product(1, &[(0, t_state())]).unwrap();
        let d = h.outcome_distribution(&[0]).unwrap();
        let p0 = 0.5 * (1.0 - 1.0 / 3.0f64.sqrt());
        assert!((d[1] - p0).abs() < 1e-12);
        assert!((d[0] - (1.0 - p0)).abs() < 1e-12);
    }

    #[test]
    fn pure_clifford_matches_dense() {
        let c = Circuit::parse("H 0\nCNOT 0 1\nS 1\nH 2\nCZ 1 2\nU0 0\nSWAP 0 2").unwrap();
        let mut h = HybridState::new(3, vec![], Register::Pure(DenseState::zero(0).unwrap())).unwrap();
        for g in &c.gates {
            h.apply_gate(g).unwrap();
        }
        let dense = DenseState::from_circuit(&c).unwrap().probabilities();
        let hd = h.outcome_distribution(&[0, 1, 2]).unwrap();
        for (a, b) in dense.iter().zip(&hd) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn random_circuits_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let n = 4;
            let inputs = vec![(1, crate::dense::random_state(1, &mut rng).unwrap()), (3, t_state())];
            let mut h = HybridState::from_product(n, &inputs).unwrap();
            let mut d = DenseState::zero(n).unwrap();
            for (q, s) in &inputs {
                // Rotate |0⟩ into the input state with the dense unitary.
                let a = s.amplitudes();
                let m = [a[0], -a[1].conj(), a[1], a[0].conj()];
                let mut v = d.amplitudes().to_vec();
                let mask = 1 << (n - 1 - q);
                for i in 0..v.len() {
                    if i & mask == 0 {
                        let (x, y) = (v[i], v[i | mask]);
                        v[i] = m[0] * x + m[1] * y;
                        v[i | mask] = m[2] * x + m[3] * y;
                    }
                }
                d = DenseState::from_amplitudes(v).unwrap();
            }
            for _ in 0..25 {
                let a = rng.random_range(0..n);
                let b = (a + rng.random_range(1..n)) % n;
                let g = match rng.random_range(0..6) {
                    0 => Gate::H(a),
                    1 => Gate::S(a),
                    2 => Gate::Cnot(a, b),
                    3 => Gate::Cz(a, b),
                    4 => Gate::U0(a),
                    _ => Gate::Y(a),
                };
                h.apply_gate(&g).unwrap();
                d.apply_gate(&g).unwrap();
            }
            // A mid-circuit measurement branch, then more gates.
            let pd = d.prob_one(0).unwrap();
            let ph = 1.0 - h.force_z(0, 0).unwrap();
            assert!((pd - ph).abs() < 1e-10);
            if pd < 1.0 - 1e-9 {
                d.project_z(0, 0).unwrap();
                for g in [Gate::H(0), Gate::Cnot(0, 2), Gate::S(2)] {
                    h.apply_gate(&g).unwrap();
                    d.apply_gate(&g).unwrap();
                }
                let hd = h.outcome_distribution(&[0, 1, 2, 3]).unwrap();
                for (x, y) in d.probabilities().iter().zip(&hd) {
                    assert!((x - y).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn capacity_limit() {
        let reg = Register::Pure(DenseState::zero(13).unwrap());
        assert!(matches!(HybridState::new(20, (0..13).collect(), reg), Err(Error::Capacity(_))));
    }
}
