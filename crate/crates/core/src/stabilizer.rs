//! Stabilizer groups, canonical forms, symplectic completion and the
//! enumeration of small-n stabilizer states.

use std::collections::{HashMap, VecDeque};

use crate::circuit::{Circuit, Gate};
use crate::dense::DenseState;
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::pauli::PauliOperator;
use crate::tableau::CliffordTableau;

/// Symplectic product: true when the operators anticommute.
#[inline]
pub fn anticommute(a: &PauliOperator, b: &PauliOperator) -> bool {
    !a.commutes(b)
}

/// Row-reduces a list of Paulis (columns ordered x_0..x_{n-1}, z_0..z_{n-1}),
/// multiplying operators so signs stay exact. Identity rows are dropped.
pub fn row_reduce(ops: &[PauliOperator]) -> Vec<PauliOperator> {
    let Some(first) = ops.first() else { return Vec::new() };
    let n = first.num_qubits();
    let mut rows: Vec<PauliOperator> = ops.to_vec();
    let col = |p: &PauliOperator, c: usize| if c < n { p.x_bit(c) } else { p.z_bit(c - n) };
    let mut r = 0;
    for c in 0..2 * n {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| col(&rows[i], c)) else { continue };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && col(row, c) {
                row.mul_assign_right(&pivot);
            }
        }
        r += 1;
    }
    rows.truncate(r);
    rows
}

fn symplectic_rank(ops: &[PauliOperator]) -> usize {
    row_reduce(&ops.iter().map(PauliOperator::unsigned).collect::<Vec<_>>()).len()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StabilizerGroup {
    n: usize,
    generators: Vec<PauliOperator>,
}

impl StabilizerGroup {
    /// Validates Hermiticity, commutation and independence.
    pub fn new(generators: Vec<PauliOperator>) -> Result<Self> {
        let n = generators.first().map_or(0, PauliOperator::num_qubits);
        Self::with_qubits(n, generators)
    }

    pub fn with_qubits(n: usize, generators: Vec<PauliOperator>) -> Result<Self> {
        for g in &generators {
            if g.num_qubits() != n {
                return Err(Error::DimensionMismatch(n, g.num_qubits()));
            }
            if !g.is_hermitian() || g.is_identity_word() {
                return Err(Error::InvalidArgument(format!("generator {g} must be a non-trivial Hermitian Pauli")));
            }
        }
        if generators.len() > n {
            return Err(Error::InvalidArgument("more generators than qubits".into()));
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                if anticommute(a, b) {
                    return Err(Error::InvalidArgument(format!("generators {a} and {b} anticommute")));
                }
            }
        }
        if symplectic_rank(&generators) != generators.len() {
            return Err(Error::InvalidArgument("generators are not independent".into()));
        }
        Ok(StabilizerGroup { n, generators })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Reduced row echelon generators: equal groups give equal forms.
    pub fn canonical(&self) -> Vec<PauliOperator> {
        row_reduce(&self.generators)
    }

    /// Sign `s` with `s·p` in the group, or `None` if `±p` is not a member.
    pub fn sign_of(&self, p: &PauliOperator) -> Option<i8> {
        let n = self.n;
        let mut rest = p.unsigned();
        let mut acc = PauliOperator::identity(n);
        for g in self.canonical() {
            let c = (0..2 * n).find(|&c| if c < n { g.x_bit(c) } else { g.z_bit(c - n) }).unwrap();
            let hit = if c < n { rest.x_bit(c) } else { rest.z_bit(c - n) };
            if hit {
                rest.mul_assign_right(&g);
                acc.mul_assign_right(&g);
            }
        }
        if !rest.is_identity_word() {
            return None;
        }
        // acc equals ±p (the unsigned word); compare phases.
        let d = (acc.phase() + 4 - p.phase()) & 3;
        match d {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn contains(&self, p: &PauliOperator) -> bool {
        self.sign_of(p) == Some(1)
    }

    /// A Clifford `W` with `W Z_i W† = g_i` for each generator.
    pub fn encoding_tableau(&self) -> Result<CliffordTableau> {
        complete_to_tableau(self.n, &self.generators)
    }

    /// Circuit preparing the stabilized state from `|0…0⟩` (full rank only).
    pub fn state_circuit(&self) -> Result<Circuit> {
        if self.len() != self.n {
            return Err(Error::InvalidArgument("state preparation needs n generators".into()));
        }
        Ok(self.encoding_tableau()?.to_circuit())
    }

    /// Projector `Π (I + g)/2` as a dense matrix.
    pub fn projector(&self) -> nalgebra::DMatrix<num_complex::Complex64> {
        let d = 1 << self.n;
        let mut m = nalgebra::DMatrix::identity(d, d);
        for g in &self.generators {
            let p = crate::dense::pauli_matrix(g);
            m = &m * (nalgebra::DMatrix::identity(d, d) + p) * num_complex::Complex64::new(0.5, 0.0);
        }
        m
    }
}

/// Extends commuting independent Hermitian Paulis `gens` to a full tableau
/// with `Z_i -> gens[i]`. Destabilizers and the remaining pairs are chosen by
/// linear solves and symplectic Gram–Schmidt.
pub fn complete_to_tableau(n: usize, gens: &[PauliOperator]) -> Result<CliffordTableau> {
    let k = gens.len();
    StabilizerGroup::with_qubits(n, gens.to_vec())?;
    // Λ(d, g) = d_x · g_z + d_z · g_x, so rows are (g_z | g_x).
    let m = BitMatrix::from_rows(
        gens.iter()
            .map(|g| (0..n).map(|q| g.z_bit(q)).chain((0..n).map(|q| g.x_bit(q))).collect())
            .collect(),
    );
    let mut ds = Vec::with_capacity(k);
    for j in 0..k {
        let e: Vec<bool> = (0..k).map(|i| i == j).collect();
        let sol = m.solve(&e).ok_or_else(|| Error::Numerical("no destabilizer".into()))?;
        ds.push(PauliOperator::from_bits(n, &sol[..n], &sol[n..], 0));
    }
    for j in 0..k {
        for i in 0..j {
            if anticommute(&ds[i], &ds[j]) {
                let g = gens[i].clone();
                ds[j].mul_assign_right(&g);
            }
        }
        ds[j] = ds[j].unsigned();
    }
    let mut pairs: Vec<(PauliOperator, PauliOperator)> = ds.into_iter().zip(gens.iter().cloned()).collect();
    let basis: Vec<PauliOperator> =
        (0..n).flat_map(|q| [PauliOperator::x_on(n, q), PauliOperator::z_on(n, q)]).collect();
    while pairs.len() < n {
        let proj = |v: &PauliOperator, pairs: &[(PauliOperator, PauliOperator)]| {
            let mut out = v.clone();
            for (a, b) in pairs {
                let (ca, cb) = (anticommute(v, b), anticommute(v, a));
                if ca {
                    out.mul_assign_right(a);
                }
                if cb {
                    out.mul_assign_right(b);
                }
            }
            out.unsigned()
        };
        let cands: Vec<PauliOperator> =
            basis.iter().map(|v| proj(v, &pairs)).filter(|v| !v.is_identity_word()).collect();
        let v = cands.first().ok_or_else(|| Error::Numerical("symplectic completion stalled".into()))?.clone();
        let w = cands
            .iter()
            .find(|w| anticommute(&v, w))
            .ok_or_else(|| Error::Numerical("symplectic completion stalled".into()))?
            .clone();
        pairs.push((v, w));
    }
    let (xs, zs): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    CliffordTableau::from_images(xs, zs)
}

#[derive(Clone, Debug)]
pub struct StabilizerStateSet {
    pub n: usize,
    pub groups: Vec<StabilizerGroup>,
    pub circuits: Vec<Circuit>,
    pub states: Vec<DenseState>,
}

impl StabilizerStateSet {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Index of the state equal to `psi` up to global phase.
    pub fn find(&self, psi: &DenseState) -> Option<usize> {
        self.states.iter().position(|s| s.overlap(psi) > 1.0 - 1e-9)
    }
}

/// `2^n ∏_{k=1..n} (2^k + 1)`.
pub fn stabilizer_state_count(n: u32) -> u64 {
    (1..=n).fold(1u64 << n, |acc, k| acc * ((1u64 << k) + 1))
}

/// All stabilizer states on `n ≤ 3` qubits, found by breadth-first search from
/// `|0…0⟩` under {H, S, CNOT} with canonical-form deduplication.
pub fn enumerate_stabilizer_states(n: usize) -> Result<StabilizerStateSet> {
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidArgument(format!("stabilizer enumeration supports n in 1..=3, got {n}")));
    }
    let mut gates = Vec::new();
    for q in 0..n {
        gates.push(Gate::H(q));
        gates.push(Gate::S(q));
        for t in 0..n {
            if t != q {
                gates.push(Gate::Cnot(q, t));
            }
        }
    }
    let start: Vec<PauliOperator> = (0..n).map(|q| PauliOperator::z_on(n, q)).collect();
    let mut seen: HashMap<Vec<PauliOperator>, usize> = HashMap::new();
    let mut gens_list = vec![start.clone()];
    let mut circuits = vec![Circuit::new(n)];
    seen.insert(row_reduce(&start), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in &gates {
            let mut next = gens_list[i].clone();
            for p in next.iter_mut() {
                crate::tableau::conjugate_by_gate(p, g)?;
            }
            let key = row_reduce(&next);
            if seen.contains_key(&key) {
                continue;
            }
            let mut c = circuits[i].clone();
            c.push(*g);
            seen.insert(key, gens_list.len());
            queue.push_back(gens_list.len());
            gens_list.push(next);
            circuits.push(c);
        }
    }
    let states = circuits.iter().map(DenseState::from_circuit).collect::<Result<Vec<_>>>()?;
    let groups = gens_list
        .into_iter()
        .map(|g| StabilizerGroup::with_qubits(n, g))
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilizerStateSet { n, groups, circuits, states })
}

/// True when `psi` is a stabilizer state (checked against its Pauli spectrum).
pub fn is_stabilizer_state(psi: &DenseState, tol: f64) -> bool {
    let n = psi.num_qubits();
    let d = (1u64 << n) as f64;
    // A pure state is a stabilizer state iff exactly 2^n Paulis (with I) have
    // expectation ±1, equivalently Σ ⟨P⟩^4 = d.
    let sum: f64 = PauliOperator::all_hermitian(n)
        .iter()
        .take(1 << (2 * n))
        .map(|p| psi.expectation(p).re.powi(4))
        .sum();
    (sum - d).abs() < tol * d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn counts_match_closed_form() {
        assert_eq!(stabilizer_state_count(1), 6);
        assert_eq!(stabilizer_state_count(2), 60);
        assert_eq!(stabilizer_state_count(3), 1080);
        for n in 1..=3 {
            let set = enumerate_stabilizer_states(n).unwrap();
            assert_eq!(set.states.len() as u64, stabilizer_state_count(n as u32));
            assert!(set.states[0].probabilities()[0] > 1.0 - 1e-12);
        }
        assert!(enumerate_stabilizer_states(4).is_err());
    }

    #[test]
    fn enumerated_states_are_stabilized_and_distinct() {
        let set = enumerate_stabilizer_states(2).unwrap();
        for (g, s) in set.groups.iter().zip(&set.states) {
            for gen in g.generators() {
                assert!((s.expectation(gen).re - 1.0).abs() < 1e-12);
            }
        }
        for i in 0..set.states.len() {
            for j in 0..i {
                assert!(set.states[i].overlap(&set.states[j]) < 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn membership_with_signs() {
        let g = StabilizerGroup::new(vec![p("XX"), p("-ZZ")]).unwrap();
        assert_eq!(g.sign_of(&p("YY")), Some(1));
        assert!(g.contains(&p("YY")));
        assert_eq!(g.sign_of(&p("-XX")), Some(-1));
        assert_eq!(g.sign_of(&p("XZ")), None);
    }

    #[test]
    fn rejects_bad_generators() {
        assert!(StabilizerGroup::new(vec![p("XI"), p("ZI")]).is_err());
        assert!(StabilizerGroup::new(vec![p("ZZ"), p("-ZZ")]).is_err());
        assert!(StabilizerGroup::new(vec![p("ZI"), p("IZ"), p("ZZ")]).is_err());
    }

    #[test]
    fn completion_maps_z_to_generators() {
        let gens = vec![p("XXXX"), p("-ZZZZ"), p("ZIII")];
        assert!(StabilizerGroup::new(gens.clone()).is_err());
        let gens = vec![p("XXXX"), p("-ZZZZ"), p("ZZII")];
        let t = complete_to_tableau(4, &gens).unwrap();
        for (i, g) in gens.iter().enumerate() {
            assert_eq!(t.image_z(i), g);
        }
    }

    #[test]
    fn state_circuit_prepares_the_state() {
        let g = StabilizerGroup::new(vec![p("-XX"), p("ZZ")]).unwrap();
        let s = DenseState::from_circuit(&g.state_circuit().unwrap()).unwrap();
        assert!((s.expectation(&p("XX")).re + 1.0).abs() < 1e-12);
        assert!((s.expectation(&p("ZZ")).re - 1.0).abs() < 1e-12);
        assert!(is_stabilizer_state(&s, 1e-8));
    }
}
