//! Twirling groups of magic states, Pauli equivalence classes, numerical
//! irreducible decompositions and the Bell / single-copy applicability checks.

use std::collections::{HashMap, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::circuit::Circuit;
use crate::dense::{unitary_of_circuit, DenseState, DensityMatrix};
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::stabilizer::StabilizerStateSet;
use crate::tableau::CliffordTableau;

pub const DEFAULT_GROUP_CAP: usize = 100_000;
const MEMBERSHIP_TOL: f64 = 1e-8;
const ALGEBRA_TOL: f64 = 1e-9;
const FIXED_POINT_TOL: f64 = 1e-10;

fn zero() -> C {
    C::new(0.0, 0.0)
}

fn max_abs(m: &DMatrix<C>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// A finite group of Cliffords, stored at tableau level. Each element keeps a
/// representative unitary: the product of generator matrices along the first
/// word that reached it in the breadth-first closure.
#[derive(Clone, Debug)]
pub struct TwirlingGroup {
    n: usize,
    generators: Vec<CliffordTableau>,
    elements: Vec<CliffordTableau>,
    unitaries: Vec<DMatrix<C>>,
}

impl TwirlingGroup {
    /// Closure of dense Clifford generators (each is verified to be Clifford).
    pub fn from_unitaries(n: usize, gens: Vec<DMatrix<C>>, cap: usize) -> Result<Self> {
        let d = 1 << n;
        let mut tabs = Vec::with_capacity(gens.len());
        for g in &gens {
            if g.nrows() != d || g.ncols() != d {
                return Err(Error::DimensionMismatch(d, g.nrows()));
            }
            tabs.push(CliffordTableau::from_unitary(g)?);
        }
        let mut index: HashMap<CliffordTableau, usize> = HashMap::new();
        let mut elements = vec![CliffordTableau::identity(n)];
        let mut unitaries = vec![DMatrix::identity(d, d)];
        index.insert(elements[0].clone(), 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (t, u) in tabs.iter().zip(&gens) {
                let next = elements[i].then(t)?;
                if index.contains_key(&next) {
                    continue;
                }
                if elements.len() >= cap {
                    return Err(Error::Capacity(format!("group closure exceeds {cap} elements")));
                }
                index.insert(next.clone(), elements.len());
                queue.push_back(elements.len());
                unitaries.push(u * &unitaries[i]);
                elements.push(next);
            }
        }
        Ok(TwirlingGroup { n, generators: tabs, elements, unitaries })
    }

    pub fn from_circuits(n: usize, gens: &[Circuit], cap: usize) -> Result<Self> {
        let us = gens
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.n = n;
                unitary_of_circuit(&c)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_unitaries(n, us, cap)
    }

    pub fn trivial(n: usize) -> Self {
        Self::from_unitaries(n, vec![], 1).expect("trivial group")
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[CliffordTableau] {
        &self.elements
    }

    pub fn generators(&self) -> &[CliffordTableau] {
        &self.generators
    }

    pub fn unitaries(&self) -> &[DMatrix<C>] {
        &self.unitaries
    }

    /// True if every element maps `psi` to itself up to phase.
    pub fn fixes(&self, psi: &DenseState) -> bool {
        let v = state_vector(psi);
        self.unitaries.iter().all(|u| (v.adjoint() * u * &v)[(0, 0)].norm() > 1.0 - FIXED_POINT_TOL)
    }

    /// `(1/|G|) Σ U ρ U†`.
    pub fn twirl(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.num_qubits() != self.n {
            return Err(Error::DimensionMismatch(self.n, rho.num_qubits()));
        }
        let m = rho.to_matrix();
        DensityMatrix::from_matrix(&self.average(&m))
    }

    fn average(&self, m: &DMatrix<C>) -> DMatrix<C> {
        let d = m.nrows();
        let mut acc = DMatrix::from_element(d, d, zero());
        for u in &self.unitaries {
            acc += u * m * u.adjoint();
        }
        acc / C::new(self.order() as f64, 0.0)
    }
}

pub fn twirl_density(rho: &DensityMatrix, group: &TwirlingGroup) -> Result<DensityMatrix> {
    group.twirl(rho)
}

pub fn close_group(n: usize, generators: &[Circuit], cap: usize) -> Result<TwirlingGroup> {
    TwirlingGroup::from_circuits(n, generators, cap)
}

fn state_vector(psi: &DenseState) -> DMatrix<C> {
    DMatrix::from_column_slice(psi.amplitudes().len(), 1, psi.amplitudes())
}

#[derive(Clone, Debug, Serialize)]
pub struct PauliClassPartition {
    pub classes: Vec<Vec<PauliOperator>>,
    /// Index of the class holding the negatives (itself when `K = -K`).
    pub negation: Vec<usize>,
}

impl PauliClassPartition {
    pub fn class_of(&self, p: &PauliOperator) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(p))
    }

    /// Classes `K` with `-K` a different class, each listed once.
    pub fn signed_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.classes.len()).filter(|&i| self.negation[i] > i).map(|i| (i, self.negation[i])).collect()
    }
}

/// Orbits of all signed Hermitian Paulis under conjugation by the group.
pub fn pauli_classes(group: &TwirlingGroup) -> PauliClassPartition {
    let all = PauliOperator::all_hermitian(group.n);
    let mut class_of: HashMap<PauliOperator, usize> = HashMap::new();
    let mut classes: Vec<Vec<PauliOperator>> = Vec::new();
    for p in &all {
        if class_of.contains_key(p) {
            continue;
        }
        let id = classes.len();
        let mut orbit = vec![p.clone()];
        class_of.insert(p.clone(), id);
        let mut i = 0;
        while i < orbit.len() {
            for g in &group.generators {
                let q = g.conjugate_unchecked(&orbit[i]);
                if !class_of.contains_key(&q) {
                    class_of.insert(q.clone(), id);
                    orbit.push(q);
                }
            }
            i += 1;
        }
        classes.push(orbit);
    }
    let negation = classes.iter().map(|c| class_of[&c[0].negated()]).collect();
    PauliClassPartition { classes, negation }
}

#[derive(Clone, Debug)]
pub struct IrrepDecomposition {
    /// `projectors[0]` is `|ψ⟩⟨ψ|`.
    pub projectors: Vec<DMatrix<C>>,
    pub dims: Vec<usize>,
    /// Equal labels mark equivalent irreps; `labels[0] == 0`.
    pub labels: Vec<usize>,
    /// `characters[j][g] = Tr(Π_j U_g)` on the group's representatives.
    pub characters: Vec<Vec<C>>,
}

impl IrrepDecomposition {
    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    /// Components `1..` grouped by equivalence label.
    pub fn equivalence_classes(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<(usize, Vec<usize>)> = Vec::new();
        for j in 1..self.len() {
            match out.iter_mut().find(|(l, _)| *l == self.labels[j]) {
                Some((_, v)) => v.push(j),
                None => out.push((self.labels[j], vec![j])),
            }
        }
        out.into_iter().map(|(_, v)| v).collect()
    }
}

fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<C> {
    let g = DMatrix::from_fn(d, d, |_, _| C::new(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    (&g + g.adjoint()) * C::new(0.5, 0.0)
}

/// Eigenspace projectors of a Hermitian matrix, clustering close eigenvalues.
fn eigenspaces(m: &DMatrix<C>) -> Vec<DMatrix<C>> {
    let d = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut out: Vec<DMatrix<C>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &i in &order {
        let lam = eig.eigenvalues[i];
        let v = eig.eigenvectors.column(i);
        let outer = &v * v.adjoint();
        if (lam - last).abs() > 1e-6 * (1.0 + lam.abs()) || out.is_empty() {
            out.push(outer);
        } else {
            *out.last_mut().unwrap() += outer;
        }
        last = lam;
    }
    out
}

fn rank_of_projector(p: &DMatrix<C>) -> usize {
    let d = p.nrows();
    (0..d).map(|i| p[(i, i)].re).sum::<f64>().round() as usize
}

fn split_once(group: &TwirlingGroup, pi0: &DMatrix<C>, rng: &mut ChaCha8Rng) -> Vec<DMatrix<C>> {
    let d = pi0.nrows();
    let q = DMatrix::<C>::identity(d, d) - pi0;
    let a = group.average(&random_hermitian(d, rng));
    // Park span{ψ} on an eigenvalue far from the complement's spectrum.
    let shift = C::new(10.0 * (1.0 + max_abs(&a) * d as f64), 0.0);
    let m = &q * a * &q + pi0 * shift;
    let mut spaces = eigenspaces(&m);
    // The last cluster is span{ψ}.
    spaces.pop();
    spaces
}

/// Decomposes the group's action into invariant irreducible subspaces with
/// `span{ψ}` first, and labels equivalent irreps by character comparison.
pub fn irrep_decompose(group: &TwirlingGroup, psi: &DenseState) -> Result<IrrepDecomposition> {
    if psi.num_qubits() != group.n {
        return Err(Error::DimensionMismatch(group.n, psi.num_qubits()));
    }
    if !group.fixes(psi) {
        return Err(Error::InvalidArgument("state is not fixed by the twirling group".into()));
    }
    let d = 1 << group.n;
    let v = state_vector(psi);
    let pi0 = &v * v.adjoint();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7f4a_7c15);
    let mut rest = None;
    for _ in 0..8 {
        let a = split_once(group, &pi0, &mut rng);
        let b = split_once(group, &pi0, &mut rng);
        let mut da: Vec<usize> = a.iter().map(rank_of_projector).collect();
        let mut db: Vec<usize> = b.iter().map(rank_of_projector).collect();
        da.sort_unstable();
        db.sort_unstable();
        if da == db {
            rest = Some(a);
            break;
        }
    }
    let rest = rest.ok_or_else(|| Error::Numerical("random splittings never agreed".into()))?;
    let mut projectors = vec![pi0];
    projectors.extend(rest);
    // Refinement check.
    let id = DMatrix::<C>::identity(d, d);
    let mut sum = DMatrix::from_element(d, d, zero());
    for (i, p) in projectors.iter().enumerate() {
        sum += p;
        for (j, q) in projectors.iter().enumerate() {
            let prod = p * q;
            let want = if i == j { p.clone() } else { DMatrix::from_element(d, d, zero()) };
            if max_abs(&(prod - want)) > ALGEBRA_TOL {
                return Err(Error::Numerical("irrep projectors are not orthogonal".into()));
            }
        }
        for u in &group.unitaries {
            if max_abs(&(u * p - p * u)) > ALGEBRA_TOL {
                return Err(Error::Numerical("irrep projector is not invariant".into()));
            }
        }
    }
    if max_abs(&(sum - id)) > ALGEBRA_TOL {
        return Err(Error::Numerical("irrep projectors do not resolve the identity".into()));
    }
    let dims: Vec<usize> = projectors.iter().map(rank_of_projector).collect();
    let characters: Vec<Vec<C>> =
        projectors.iter().map(|p| group.unitaries.iter().map(|u| (p * u).trace()).collect()).collect();
    let mut labels: Vec<usize> = Vec::with_capacity(projectors.len());
    for j in 0..projectors.len() {
        let same = (0..j).find(|&i| {
            dims[i] == dims[j]
                && characters[i].iter().zip(&characters[j]).all(|(a, b)| (a - b).norm() < MEMBERSHIP_TOL)
        });
        labels.push(match same {
            Some(i) => labels[i],
            None => labels.iter().max().map_or(0, |m| m + 1),
        });
    }
    Ok(IrrepDecomposition { projectors, dims, labels, characters })
}

/// Bell-measurement applicability: no one-dimensional component beyond
/// `span{ψ}` may carry the character of `span{ψ}`.
pub fn check_bell_applicability(decomp: &IrrepDecomposition) -> bool {
    (1..decomp.len()).all(|j| !(decomp.dims[j] == 1 && decomp.labels[j] == decomp.labels[0]))
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentWitness {
    /// Irrep indices covered (several when equivalent irreps are merged).
    pub components: Vec<usize>,
    /// Indices into the stabilizer-state set.
    pub states: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub enum SingleCopyVerdict {
    Yes(Vec<ComponentWitness>),
    No { failing: Vec<usize> },
}

impl SingleCopyVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, SingleCopyVerdict::Yes(_))
    }
}

fn in_range(p: &DMatrix<C>, s: &DMatrix<C>) -> bool {
    let w = (s.adjoint() * p * s)[(0, 0)].re;
    w > 1.0 - MEMBERSHIP_TOL
}

fn orbit_span(group: &TwirlingGroup, s: &DMatrix<C>) -> DMatrix<C> {
    let cols: Vec<DMatrix<C>> = group.unitaries.iter().map(|u| u * s).collect();
    let m = DMatrix::from_fn(s.nrows(), cols.len(), |r, c| cols[c][(r, 0)]);
    span_projector(&m)
}

fn span_projector(m: &DMatrix<C>) -> DMatrix<C> {
    let gram = m * m.adjoint();
    let eig = gram.clone().symmetric_eigen();
    let d = m.nrows();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let mut p = DMatrix::from_element(d, d, zero());
    for i in 0..d {
        if eig.eigenvalues[i] > 1e-10 * top {
            let v = eig.eigenvectors.column(i);
            p += &v * v.adjoint();
        }
    }
    p
}

/// Single-copy applicability: every irreducible component (up to re-choosing
/// the decomposition inside equivalent blocks) must contain a stabilizer
/// state. Returns the witnesses on success.
pub fn check_single_copy_applicability(
    group: &TwirlingGroup,
    decomp: &IrrepDecomposition,
    stabs: &StabilizerStateSet,
) -> SingleCopyVerdict {
    let vecs: Vec<DMatrix<C>> = stabs.states.iter().map(state_vector).collect();
    let mut witnesses = Vec::new();
    let mut failing = Vec::new();
    for class in decomp.equivalence_classes() {
        if class.len() == 1 {
            let p = &decomp.projectors[class[0]];
            let hits: Vec<usize> = (0..vecs.len()).filter(|&i| in_range(p, &vecs[i])).collect();
            if hits.is_empty() {
                failing.push(class[0]);
            } else {
                witnesses.push(ComponentWitness { components: class, states: hits });
            }
            continue;
        }
        let d = decomp.dims[class[0]];
        let block: DMatrix<C> = class.iter().map(|&j| decomp.projectors[j].clone()).sum();
        let mut chosen: Vec<usize> = Vec::new();
        let mut span = DMatrix::from_element(block.nrows(), block.nrows(), zero());
        for (i, s) in vecs.iter().enumerate() {
            if chosen.len() == class.len() {
                break;
            }
            if !in_range(&block, s) {
                continue;
            }
            let orb = orbit_span(group, s);
            if rank_of_projector(&orb) != d {
                continue;
            }
            // Keep it if it is independent of the spans chosen so far.
            let joined = span_projector(&DMatrix::from_fn(block.nrows(), 2 * block.nrows(), |r, c| {
                if c < block.nrows() {
                    span[(r, c)]
                } else {
                    orb[(r, c - block.nrows())]
                }
            }));
            if rank_of_projector(&joined) == (chosen.len() + 1) * d {
                chosen.push(i);
                span = joined;
            }
        }
        if chosen.len() == class.len() {
            witnesses.push(ComponentWitness { components: class, states: chosen });
        } else {
            failing.extend(class);
        }
    }
    if failing.is_empty() {
        SingleCopyVerdict::Yes(witnesses)
    } else {
        SingleCopyVerdict::No { failing }
    }
}

impl SingleCopyVerdict {
    /// Component dimension for each witness measured by the estimator: one
    /// per single component, one per chosen state in a merged class.
    pub fn witness_dims(&self, decomp: &IrrepDecomposition) -> Vec<usize> {
        match self {
            SingleCopyVerdict::No { .. } => Vec::new(),
            SingleCopyVerdict::Yes(ws) => ws
                .iter()
                .flat_map(|w| {
                    let d = decomp.dims[w.components[0]];
                    let k = if w.components.len() == 1 { 1 } else { w.states.len() };
                    std::iter::repeat_n(d, k)
                })
                .collect(),
        }
    }
}

/// Applicability of both schemes to a magic state, with one witness circuit
/// per measured witness.
#[derive(Clone, Debug, Serialize)]
pub struct TwirlReport {
    pub state: MagicState,
    pub group_order: usize,
    pub dims: Vec<usize>,
    pub bell: bool,
    pub single_copy: bool,
    pub witness_dims: Vec<usize>,
    /// Preparation circuits of the witnesses, in circuit text.
    pub witnesses: Vec<String>,
}

pub fn twirl_report(state: MagicState) -> Result<TwirlReport> {
    let group = state.group()?;
    let decomp = irrep_decompose(&group, &state.state())?;
    let stabs = crate::stabilizer::enumerate_stabilizer_states(state.num_qubits())?;
    let verdict = check_single_copy_applicability(&group, &decomp, &stabs);
    let witnesses = match &verdict {
        SingleCopyVerdict::Yes(ws) => ws
            .iter()
            .flat_map(|w| {
                let take = if w.components.len() == 1 { 1 } else { w.states.len() };
                w.states[..take].iter().map(|&i| stabs.circuits[i].to_text()).collect::<Vec<_>>()
            })
            .collect(),
        SingleCopyVerdict::No { .. } => Vec::new(),
    };
    Ok(TwirlReport {
        state,
        group_order: group.order(),
        dims: decomp.dims.clone(),
        bell: check_bell_applicability(&decomp),
        single_copy: verdict.is_yes(),
        witness_dims: verdict.witness_dims(&decomp),
        witnesses,
    })
}

/// Magic states with built-in twirling groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MagicState {
    T,
    H,
    Cz,
    Ccz,
    PlusPlusPlus,
}

impl std::str::FromStr for MagicState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T" => Ok(MagicState::T),
            "H" => Ok(MagicState::H),
            "CZ" => Ok(MagicState::Cz),
            "CCZ" => Ok(MagicState::Ccz),
            "+++" | "PLUS3" => Ok(MagicState::PlusPlusPlus),
            _ => Err(Error::InvalidArgument(format!("unknown magic state `{s}`"))),
        }
    }
}

/// `(I + (x X + y Y + z Z))/2` pure state with the given unit Bloch vector.
pub fn bloch_state(x: f64, y: f64, z: f64) -> DenseState {
    let theta = z.clamp(-1.0, 1.0).acos();
    let phi = y.atan2(x);
    DenseState::from_amplitudes(vec![C::new((theta / 2.0).cos(), 0.0), C::from_polar((theta / 2.0).sin(), phi)])
        .expect("valid amplitudes")
}

pub fn t_state() -> DenseState {
    let r = 1.0 / 3.0f64.sqrt();
    bloch_state(r, r, r)
}

pub fn t_perp_state() -> DenseState {
    let r = -1.0 / 3.0f64.sqrt();
    bloch_state(r, r, r)
}

pub fn h_state() -> DenseState {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    bloch_state(r, r, 0.0)
}

pub fn h_perp_state() -> DenseState {
    let r = -std::f64::consts::FRAC_1_SQRT_2;
    bloch_state(r, r, 0.0)
}

impl MagicState {
    pub fn num_qubits(self) -> usize {
        match self {
            MagicState::T | MagicState::H => 1,
            MagicState::Cz => 2,
            MagicState::Ccz | MagicState::PlusPlusPlus => 3,
        }
    }

    pub fn state(self) -> DenseState {
        let r = C::new(1.0, 0.0);
        match self {
            MagicState::T => t_state(),
            MagicState::H => h_state(),
            MagicState::Cz => DenseState::from_amplitudes(vec![r, r, r, zero()]).unwrap(),
            MagicState::Ccz => DenseState::from_circuit(&Circuit::parse("H 0\nH 1\nH 2\nCCZ 0 1 2").unwrap()).unwrap(),
            MagicState::PlusPlusPlus => DenseState::from_circuit(&Circuit::parse("H 0\nH 1\nH 2").unwrap()).unwrap(),
        }
    }

    /// Generator circuits of the twirling group.
    pub fn generator_circuits(self) -> Vec<Circuit> {
        let p = |s: &str| Circuit::parse(s).expect("static circuit");
        match self {
            MagicState::T => vec![p("U0 0")],
            MagicState::H => vec![p("X 0\nS 0")],
            MagicState::Cz => vec![p("CZ 0 1"), p("SWAP 0 1"), p("CNOT 0 1\nX 1")],
            MagicState::PlusPlusPlus | MagicState::Ccz => plus3_generators(),
        }
    }

    pub fn group(self) -> Result<TwirlingGroup> {
        let n = self.num_qubits();
        match self {
            MagicState::Ccz => {
                let ccz = unitary_of_circuit(&Circuit::parse("CCZ 0 1 2").unwrap())?;
                let gens = plus3_generators()
                    .iter()
                    .map(|c| unitary_of_circuit(c).map(|u| &ccz * u * &ccz))
                    .collect::<Result<Vec<_>>>()?;
                TwirlingGroup::from_unitaries(n, gens, DEFAULT_GROUP_CAP)
            }
            _ => TwirlingGroup::from_circuits(n, &self.generator_circuits(), DEFAULT_GROUP_CAP),
        }
    }
}

fn plus3_generators() -> Vec<Circuit> {
    let mut out = Vec::new();
    for i in 0..3 {
        out.push(Circuit::parse(&format!("QUBITS 3\nX {i}")).unwrap());
    }
    for j in 0..3 {
        for k in 0..3 {
            if j != k {
                out.push(Circuit::parse(&format!("QUBITS 3\nCNOT {j} {k}")).unwrap());
            }
        }
    }
    out
}
