//! Removing `|0>` ancillas from Clifford measurement circuits.
//!
//! A circuit `U` on `n + m` qubits acts on `ρ ⊗ |0><0|^m`, and every qubit is
//! measured in Z. Measuring `Z_i` after `U` is the same as measuring
//! `g_i = U† Z_i U` on the input. Eliminating one ancilla rewrites the `g_i`
//! so that `n` of them no longer touch it. Those become the Heisenberg images
//! of a smaller Clifford `V`. The outcome of the last generator is either fixed
//! by a parity of the others or a fair coin. The full outcome is an
//! invertible affine function of `V`'s outcomes plus one extra slot per
//! ancilla.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::pauli::PauliOperator;
use crate::stabilizer::{anticommute, complete_to_tableau};
use crate::tableau::CliffordTableau;

/// How the generators act on the eliminated ancilla.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AncillaCase {
    /// Every generator acts as I or Z. One outcome is a fixed parity of the
    /// others.
    IdentityOrZ,
    /// Every generator acts as I or X.
    BitFlip,
    /// Every generator acts as I or Y.
    BitPhaseFlip,
    /// At least two different non-identity actions, one of them X or Y.
    Mixed,
}

impl AncillaCase {
    pub fn is_random(self) -> bool {
        self != AncillaCase::IdentityOrZ
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    /// Always 0.
    Zero,
    /// A fresh uniform bit.
    Random,
}

/// `outcome = matrix · (measured ++ slots) + offset` over GF(2). The matrix
/// is square and invertible.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostProcess {
    pub measured: usize,
    pub slots: Vec<Slot>,
    pub matrix: BitMatrix,
    pub offset: Vec<bool>,
    /// One entry per eliminated ancilla, innermost (last qubit) first.
    pub cases: Vec<AncillaCase>,
}

impl PostProcess {
    pub fn identity(n: usize) -> Self {
        PostProcess {
            measured: n,
            slots: Vec::new(),
            matrix: BitMatrix::identity(n),
            offset: vec![false; n],
            cases: Vec::new(),
        }
    }

    pub fn outputs(&self) -> usize {
        self.matrix.rows()
    }

    pub fn random_slots(&self) -> usize {
        self.slots.iter().filter(|s| **s == Slot::Random).count()
    }

    pub fn is_deterministic(&self) -> bool {
        self.random_slots() == 0
    }

    fn evaluate(&self, measured: &[bool], extra: &[bool]) -> Vec<bool> {
        let input: Vec<bool> = measured.iter().chain(extra).copied().collect();
        self.matrix.mul_vec(&input).into_iter().zip(&self.offset).map(|(a, b)| a ^ b).collect()
    }

    /// Full outcome for one run of the reduced circuit.
    pub fn apply<R: Rng + ?Sized>(&self, measured: &[bool], rng: &mut R) -> Result<Vec<bool>> {
        if measured.len() != self.measured {
            return Err(Error::DimensionMismatch(self.measured, measured.len()));
        }
        let extra: Vec<bool> =
            self.slots.iter().map(|s| matches!(s, Slot::Random) && rng.random::<bool>()).collect();
        Ok(self.evaluate(measured, &extra))
    }

    /// Pushes a distribution over the reduced outcomes (big-endian index) to
    /// the full outcome space. Random slots are summed with weight `2^-r`.
    pub fn push_forward(&self, dist: &[f64]) -> Result<Vec<f64>> {
        if dist.len() != 1 << self.measured {
            return Err(Error::DimensionMismatch(1 << self.measured, dist.len()));
        }
        let r = self.random_slots();
        let scale = 0.5f64.powi(r as i32);
        let mut out = vec![0.0; 1 << self.outputs()];
        for (idx, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let measured = index_bits(idx, self.measured);
            for coin in 0..1usize << r {
                let mut c = 0;
                let extra: Vec<bool> = self
                    .slots
                    .iter()
                    .map(|s| match s {
                        Slot::Zero => false,
                        Slot::Random => {
                            c += 1;
                            coin >> (c - 1) & 1 == 1
                        }
                    })
                    .collect();
                out[bits_index(&self.evaluate(&measured, &extra))] += p * scale;
            }
        }
        Ok(out)
    }

    /// `self` after `inner`: `inner` maps the final measured bits and its slot
    /// to the bits `self` expects as measured.
    fn compose(&self, inner: &PostProcess) -> PostProcess {
        assert_eq!(inner.outputs(), self.measured);
        let n_out = self.outputs();
        let k = inner.measured;
        let (ki, ks) = (inner.matrix.cols(), self.slots.len());
        let mut matrix = BitMatrix::zeros(n_out, ki + ks);
        for r in 0..n_out {
            for c in 0..ki {
                let v = (0..self.measured).fold(false, |acc, t| acc ^ (self.matrix.get(r, t) & inner.matrix.get(t, c)));
                matrix.set(r, c, v);
            }
            for c in 0..ks {
                matrix.set(r, ki + c, self.matrix.get(r, self.measured + c));
            }
        }
        let shift = (0..n_out).map(|r| {
            (0..self.measured).fold(false, |acc, t| acc ^ (self.matrix.get(r, t) & inner.offset[t]))
        });
        let offset = shift.zip(&self.offset).map(|(a, b)| a ^ b).collect();
        let mut cases = self.cases.clone();
        cases.extend(&inner.cases);
        PostProcess {
            measured: k,
            slots: inner.slots.iter().chain(&self.slots).copied().collect(),
            matrix,
            offset,
            cases,
        }
    }
}

/// Qubit 0 is the most significant bit.
pub fn index_bits(idx: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| idx >> (n - 1 - i) & 1 == 1).collect()
}

pub fn bits_index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| acc << 1 | b as usize)
}

fn ancilla_case(actions: &[char]) -> AncillaCase {
    let has = |c| actions.contains(&c);
    match (has('X'), has('Y'), has('Z')) {
        (false, false, _) => AncillaCase::IdentityOrZ,
        (true, false, false) => AncillaCase::BitFlip,
        (false, true, false) => AncillaCase::BitPhaseFlip,
        _ => AncillaCase::Mixed,
    }
}

/// Removes the last qubit, which must start in `|0>`.
pub fn eliminate_one_ancilla(u: &CliffordTableau) -> Result<(CliffordTableau, PostProcess)> {
    if !u.is_symplectic() {
        return Err(Error::InvalidArgument("tableau is not symplectic".into()));
    }
    let total = u.num_qubits();
    if total == 0 {
        return Err(Error::InvalidArgument("no ancilla to eliminate".into()));
    }
    let n = total - 1;
    let a = n;
    let inv = u.inverse();
    let mut g: Vec<PauliOperator> = (0..total).map(|i| inv.image_z(i).clone()).collect();
    let actions: Vec<char> = g.iter().map(|p| p.get(a)).collect();
    let case = ancilla_case(&actions);
    let keep: Vec<usize> = (0..n).collect();

    let mut matrix = BitMatrix::zeros(total, total);
    let mut offset = vec![false; total];
    let pivot;
    let slot;
    if case == AncillaCase::IdentityOrZ {
        // Some signed product of generators is Z on the ancilla alone. Its
        // value on |0> is +1, so the product's sign fixes a parity.
        let rows = BitMatrix::from_rows(
            (0..2 * total)
                .map(|q| {
                    g.iter().map(|p| if q < total { p.x_bit(q) } else { p.z_bit(q - total) }).collect()
                })
                .collect(),
        );
        let target: Vec<bool> = (0..2 * total).map(|q| q == total + a).collect();
        let subset = rows
            .solve(&target)
            .ok_or_else(|| Error::Numerical("ancilla Z is not in the measured group".into()))?;
        let mut prod = PauliOperator::identity(total);
        for (i, &s) in subset.iter().enumerate() {
            if s {
                prod.mul_assign_right(&g[i]);
            }
        }
        debug_assert_eq!(prod.unsigned(), PauliOperator::z_on(total, a));
        pivot = subset.iter().position(|&s| s).expect("nonempty subset");
        let mut col = 0;
        for i in 0..total {
            if i == pivot {
                continue;
            }
            matrix.set(i, col, true);
            if subset[i] {
                matrix.set(pivot, col, true);
            }
            col += 1;
        }
        matrix.set(pivot, n, true);
        offset[pivot] = prod.sign() < 0;
        slot = Slot::Zero;
    } else {
        // Multiply the pivot into every other generator with X or Y on the
        // ancilla. The rest then act as I or Z there and the pivot's outcome
        // is a fair coin.
        pivot = actions.iter().position(|&c| c == 'X' || c == 'Y').expect("case has X or Y");
        let gp = g[pivot].clone();
        let mut col = 0;
        for i in 0..total {
            if i == pivot {
                continue;
            }
            matrix.set(i, col, true);
            if actions[i] == 'X' || actions[i] == 'Y' {
                g[i].mul_assign_right(&gp);
                matrix.set(i, n, true);
            }
            col += 1;
        }
        matrix.set(pivot, n, true);
        slot = Slot::Random;
    }

    let h: Vec<PauliOperator> = (0..total).filter(|&i| i != pivot).map(|i| g[i].restrict(&keep)).collect();
    for (i, p) in h.iter().enumerate() {
        if !p.is_hermitian() || h[..i].iter().any(|q| anticommute(p, q)) {
            return Err(Error::Numerical("reduced generators do not commute".into()));
        }
    }
    let v = if n == 0 { CliffordTableau::identity(0) } else { complete_to_tableau(n, &h)?.inverse() };
    let post = PostProcess { measured: n, slots: vec![slot], matrix, offset, cases: vec![case] };
    Ok((v, post))
}

/// Removes the last `m` qubits, all starting in `|0>`, one at a time.
pub fn eliminate_ancillas(u: &CliffordTableau, m: usize) -> Result<(CliffordTableau, PostProcess)> {
    if m > u.num_qubits() {
        return Err(Error::InvalidArgument(format!("{m} ancillas on {} qubits", u.num_qubits())));
    }
    let mut v = u.clone();
    let mut post = PostProcess::identity(u.num_qubits());
    for _ in 0..m {
        let (w, step) = eliminate_one_ancilla(&v)?;
        post = post.compose(&step);
        v = w;
    }
    Ok((v, post))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, Gate};
    use crate::dense::{random_density, DensityMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn full_distribution(u: &CliffordTableau, rho: &DensityMatrix, m: usize) -> Vec<f64> {
        let mut full = rho.tensor(&DensityMatrix::zero(m).unwrap()).unwrap();
        full.apply_unitary(&u.to_unitary().unwrap()).unwrap();
        full.diagonal()
    }

    fn reduced_distribution(v: &CliffordTableau, post: &PostProcess, rho: &DensityMatrix) -> Vec<f64> {
        let mut r = rho.clone();
        if v.num_qubits() > 0 {
            r.apply_unitary(&v.to_unitary().unwrap()).unwrap();
        }
        post.push_forward(&r.diagonal()).unwrap()
    }

    fn tv(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
    }

    #[test]
    fn identity_appends_zero() {
        let (v, post) = eliminate_one_ancilla(&CliffordTableau::identity(2)).unwrap();
        assert!(v.is_identity());
        assert_eq!(post.cases, vec![AncillaCase::IdentityOrZ]);
        assert_eq!(post.slots, vec![Slot::Zero]);
        assert_eq!(post.matrix, BitMatrix::identity(2));
        assert_eq!(post.offset, vec![false, false]);
    }

    #[test]
    fn hadamard_on_ancilla_adds_coin() {
        let u = CliffordTableau::from_gate(2, &Gate::H(1)).unwrap();
        let (v, post) = eliminate_one_ancilla(&u).unwrap();
        assert!(v.is_identity());
        assert_eq!(post.cases, vec![AncillaCase::BitFlip]);
        assert_eq!(post.slots, vec![Slot::Random]);
        assert_eq!(post.push_forward(&[1.0, 0.0]).unwrap(), vec![0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn no_ancillas_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = CliffordTableau::random(3, &mut rng);
        let (v, post) = eliminate_ancillas(&u, 0).unwrap();
        assert_eq!(v, u);
        assert_eq!(post, PostProcess::identity(3));
    }

    #[test]
    fn random_single_ancilla_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = std::collections::HashSet::new();
        for t in 0..200 {
            let n = 1 + t % 3;
            let u = CliffordTableau::random(n + 1, &mut rng);
            let rho = random_density(n, 1 << n, &mut rng).unwrap();
            let (v, post) = eliminate_one_ancilla(&u).unwrap();
            seen.insert(post.cases[0]);
            assert!(post.matrix.inverse().is_some());
            let d = tv(&full_distribution(&u, &rho, 1), &reduced_distribution(&v, &post, &rho));
            assert!(d < 1e-9, "trial {t}: tv {d}");
        }
        assert_eq!(seen.len(), 4, "cases seen: {seen:?}");
    }

    #[test]
    fn ghz_with_parity_ancilla() {
        // Prepare a GHZ-like pair, copy its parity onto the ancilla.
        let c = Circuit::from_gates(
            3,
            vec![Gate::H(0), Gate::Cnot(0, 1), Gate::Cnot(0, 2), Gate::Cnot(1, 2), Gate::H(1)],
        )
        .unwrap();
        let u = CliffordTableau::from_circuit(&c).unwrap();
        let (v, post) = eliminate_ancillas(&u, 1).unwrap();
        assert_eq!(v.num_qubits(), 2);
        let rho = DensityMatrix::zero(2).unwrap();
        let d = tv(&full_distribution(&u, &rho, 1), &reduced_distribution(&v, &post, &rho));
        assert!(d < 1e-12);
    }

    #[test]
    fn composed_post_process_sums_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = CliffordTableau::random(4, &mut rng);
        let (_, post) = eliminate_ancillas(&u, 2).unwrap();
        let out = post.push_forward(&[0.25; 4]).unwrap();
        assert_eq!(out.iter().sum::<f64>(), 1.0);
        assert_eq!(post.cases.len(), 2);
    }

    #[test]
    fn sampled_outcomes_follow_push_forward() {
        let u = CliffordTableau::from_gate(2, &Gate::H(1)).unwrap();
        let (_, post) = eliminate_one_ancilla(&u).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ones = (0..4000).filter(|_| post.apply(&[true], &mut rng).unwrap()[1]).count();
        assert!((ones as f64 / 4000.0 - 0.5).abs() < 0.05);
    }
}
