//! Stabilizer code definitions, the Steane and [[8,3,2]] building blocks and
//! 5-to-1 distillation at the logical level.

use std::collections::{HashSet, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::Serialize;

use crate::circuit::{Circuit, Gate};
use crate::dense::{pauli_matrix, DenseState, DensityMatrix};
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::stabilizer::{complete_to_tableau, StabilizerGroup};
use crate::tableau::CliffordTableau;
use crate::twirling::t_state;

pub const STEANE_FIXTURE: &str = include_str!("../fixtures/steane.code");
pub const C832_FIXTURE: &str = include_str!("../fixtures/c832.code");

#[derive(Clone, Debug, Serialize)]
pub struct CodeDefinition {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub stabilizers: Vec<PauliOperator>,
    pub logical_x: Vec<PauliOperator>,
    pub logical_z: Vec<PauliOperator>,
    /// Upper-case names of the logical gates with a transversal realisation.
    pub transversal: Vec<String>,
}

impl CodeDefinition {
    /// Parses `key value` lines: `name`, `stabilizer`, `logical_x`,
    /// `logical_z` (one operator per line) and `transversal` (gate names).
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = String::new();
        let (mut stabs, mut lx, mut lz, mut tr) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let (key, rest) = line.split_once(char::is_whitespace).ok_or_else(|| err(format!("missing value in `{line}`")))?;
            let rest = rest.trim();
            let pauli = || rest.parse::<PauliOperator>().map_err(|e| err(e.to_string()));
            match key {
                "name" => name = rest.to_string(),
                "stabilizer" => stabs.push(pauli()?),
                "logical_x" => lx.push(pauli()?),
                "logical_z" => lz.push(pauli()?),
                "transversal" => tr.extend(rest.split_whitespace().map(|s| s.to_ascii_uppercase())),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        let n = stabs.first().map(|s: &PauliOperator| s.num_qubits()).ok_or_else(|| Error::Parse {
            line: 0,
            msg: "code has no stabilizers".into(),
        })?;
        let code = CodeDefinition { name, n, k: lx.len(), stabilizers: stabs, logical_x: lx, logical_z: lz, transversal: tr };
        code.validate()?;
        Ok(code)
    }

    pub fn validate(&self) -> Result<()> {
        StabilizerGroup::with_qubits(self.n, self.stabilizers.clone())?;
        if self.logical_z.len() != self.k || self.stabilizers.len() + self.k != self.n {
            return Err(Error::InvalidArgument(format!(
                "{}: {} stabilizers and {} logical pairs do not fit {} qubits",
                self.name,
                self.stabilizers.len(),
                self.k,
                self.n
            )));
        }
        for l in self.logical_x.iter().chain(&self.logical_z) {
            if l.num_qubits() != self.n || !l.is_hermitian() {
                return Err(Error::InvalidArgument(format!("bad logical operator {l}")));
            }
            if let Some(s) = self.stabilizers.iter().find(|s| !s.commutes(l)) {
                return Err(Error::InvalidArgument(format!("logical {l} anticommutes with {s}")));
            }
        }
        for i in 0..self.k {
            for j in 0..self.k {
                if self.logical_x[i].commutes(&self.logical_z[j]) == (i == j) {
                    return Err(Error::InvalidArgument(format!("logical pair ({i},{j}) has the wrong commutation")));
                }
                if !self.logical_x[i].commutes(&self.logical_x[j]) || !self.logical_z[i].commutes(&self.logical_z[j]) {
                    return Err(Error::InvalidArgument("logical operators of one type must commute".into()));
                }
            }
        }
        Ok(())
    }

    /// Physical operator for a logical Pauli on the `k` logical qubits.
    pub fn logical_pauli(&self, p: &PauliOperator) -> Result<PauliOperator> {
        if p.num_qubits() != self.k {
            return Err(Error::DimensionMismatch(self.k, p.num_qubits()));
        }
        let mut out = PauliOperator::identity(self.n);
        let mut phase = p.phase() as u32;
        for i in 0..self.k {
            let (x, z) = (p.x_bit(i), p.z_bit(i));
            if x {
                out.mul_assign_right(&self.logical_x[i]);
            }
            if z {
                out.mul_assign_right(&self.logical_z[i]);
            }
            // Y = i X Z
            if x && z {
                phase += 1;
            }
        }
        out.set_phase(((out.phase() as u32 + phase) & 3) as u8);
        Ok(out)
    }

    /// Dense projector onto the code space.
    pub fn projector(&self) -> DMatrix<C> {
        let d = 1 << self.n;
        let id = DMatrix::<C>::identity(d, d);
        let mut p = id.clone();
        for s in &self.stabilizers {
            p = (&id + pauli_matrix(s)) * C::new(0.5, 0.0) * p;
        }
        p
    }

    /// `Π ρ Π`, normalised; returns the pre-normalisation trace as well.
    pub fn project(&self, rho: &DensityMatrix) -> Result<(f64, DensityMatrix)> {
        if rho.num_qubits() != self.n {
            return Err(Error::DimensionMismatch(self.n, rho.num_qubits()));
        }
        let p = self.projector();
        let m = &p * rho.to_matrix() * &p;
        let tr = m.trace().re;
        if tr <= 1e-15 {
            return Err(Error::Numerical("projection onto the code space has zero trace".into()));
        }
        Ok((tr, DensityMatrix::from_matrix(&(m / C::new(tr, 0.0)))?))
    }

    /// Decoded `k`-qubit state of a code-space density matrix, by linear
    /// inversion of all logical Pauli expectations.
    pub fn logical_density(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.num_qubits() != self.n {
            return Err(Error::DimensionMismatch(self.n, rho.num_qubits()));
        }
        let d = 1 << self.k;
        let mut m = DMatrix::from_element(d, d, C::new(0.0, 0.0));
        for p in PauliOperator::all_hermitian(self.k).into_iter().take(1 << (2 * self.k)) {
            let ev = rho.expectation(&self.logical_pauli(&p)?).re;
            m += pauli_matrix(&p) * C::new(ev / d as f64, 0.0);
        }
        DensityMatrix::from_matrix(&m)
    }
}

pub fn steane() -> CodeDefinition {
    CodeDefinition::parse(STEANE_FIXTURE).expect("bundled Steane fixture")
}

pub fn c832() -> CodeDefinition {
    CodeDefinition::parse(C832_FIXTURE).expect("bundled [[8,3,2]] fixture")
}

/// Z-check supports used for detection on a Steane readout.
pub const STEANE_Z_CHECKS: [[usize; 4]; 3] = [[3, 4, 5, 6], [1, 2, 5, 6], [0, 2, 4, 6]];

/// Encodes the state on qubit 0 into a Steane block with qubits 1–6 in `|0⟩`.
pub fn steane_encoder() -> Circuit {
    use Gate::*;
    Circuit::from_gates(
        7,
        vec![
            Cnot(0, 5),
            Cnot(0, 6),
            H(1),
            H(3),
            H(4),
            Cnot(1, 2),
            Cnot(1, 5),
            Cnot(1, 6),
            Cnot(3, 0),
            Cnot(3, 2),
            Cnot(3, 5),
            Cnot(4, 0),
            Cnot(4, 2),
            Cnot(4, 6),
        ],
    )
    .expect("static encoder")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DetectionVerdict {
    pub accepted: bool,
    pub syndrome: [u8; 3],
    /// Only set when accepted.
    pub logical: Option<u8>,
}

/// Error detection on a transversal Z readout of one Steane block.
pub fn steane_detect(bits: &[u8]) -> Result<DetectionVerdict> {
    if bits.len() != 7 {
        return Err(Error::DimensionMismatch(7, bits.len()));
    }
    let mut syndrome = [0u8; 3];
    for (s, sup) in syndrome.iter_mut().zip(STEANE_Z_CHECKS) {
        *s = sup.iter().fold(0, |a, &q| a ^ (bits[q] & 1));
    }
    let accepted = syndrome == [0; 3];
    let logical = accepted.then(|| bits.iter().fold(0, |a, &b| a ^ (b & 1)));
    Ok(DetectionVerdict { accepted, syndrome, logical })
}

/// A logical gate realised on physical qubits: the circuit runs first, then
/// qubit `q` is relabelled as `permutation[q]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalImplementation {
    pub circuit: Circuit,
    pub permutation: Vec<usize>,
}

impl LogicalImplementation {
    fn gates(circuit: Circuit) -> Self {
        let n = circuit.n;
        LogicalImplementation { circuit, permutation: (0..n).collect() }
    }

    /// `P ↦ P` with qubit `q` moved to `permutation[q]`.
    pub fn relabel(&self, p: &PauliOperator) -> PauliOperator {
        let n = p.num_qubits();
        let mut out = PauliOperator::identity(n);
        for q in 0..n {
            out.set(self.permutation[q], p.get(q));
        }
        out.set_phase(p.phase());
        out
    }
}

/// Transversal realisation of a logical gate. Steane logical qubit `b` lives
/// on block `b` (qubits `7b..7b+7`); the [[8,3,2]] code has one block.
pub fn transversal_logical(code: &CodeDefinition, gate: &Gate, n_blocks: usize) -> Result<LogicalImplementation> {
    if !code.transversal.iter().any(|g| g == gate.name()) {
        return Err(Error::InvalidArgument(format!("{} is not transversal in {}", gate.name(), code.name)));
    }
    match code.name.as_str() {
        "steane" => steane_transversal(gate, n_blocks),
        "c832" => c832_transversal(code, gate),
        _ => pauli_transversal(code, gate),
    }
}

fn steane_transversal(gate: &Gate, n_blocks: usize) -> Result<LogicalImplementation> {
    use Gate::*;
    let n = 7 * n_blocks;
    for &b in &gate.qubits() {
        if b >= n_blocks {
            return Err(Error::QubitOutOfRange { index: b, n: n_blocks });
        }
    }
    let mut c = Circuit::new(n);
    for j in 0..7 {
        let q = |b: usize| 7 * b + j;
        // Physical S acts as logical S† on this code.
        let gs: Vec<Gate> = match *gate {
            I(_) => vec![],
            X(b) => vec![X(q(b))],
            Y(b) => vec![Y(q(b))],
            Z(b) => vec![Z(q(b))],
            H(b) => vec![H(q(b))],
            S(b) => vec![Sdg(q(b))],
            Sdg(b) => vec![S(q(b))],
            U0(b) => vec![S(q(b)), H(q(b))],
            U0dg(b) => vec![H(q(b)), Sdg(q(b))],
            Cnot(a, b) => vec![Cnot(q(a), q(b))],
            Cz(a, b) => vec![Cz(q(a), q(b))],
            Swap(a, b) => vec![Swap(q(a), q(b))],
            _ => return Err(Error::InvalidArgument(format!("{} is not transversal in steane", gate.name()))),
        };
        for g in gs {
            c.push(g);
        }
    }
    Ok(LogicalImplementation::gates(c))
}

fn pauli_transversal(code: &CodeDefinition, gate: &Gate) -> Result<LogicalImplementation> {
    let (q, ch) = match *gate {
        Gate::I(q) => (q, 'I'),
        Gate::X(q) => (q, 'X'),
        Gate::Y(q) => (q, 'Y'),
        Gate::Z(q) => (q, 'Z'),
        _ => return Err(Error::InvalidArgument(format!("{} has no transversal realisation in {}", gate.name(), code.name))),
    };
    if q >= code.k {
        return Err(Error::QubitOutOfRange { index: q, n: code.k });
    }
    let mut lp = PauliOperator::identity(code.k);
    lp.set(q, ch);
    let phys = code.logical_pauli(&lp)?;
    let mut c = Circuit::new(code.n);
    for j in phys.support() {
        c.push(Gate::parse(&phys.get(j).to_string(), &[j])?);
    }
    Ok(LogicalImplementation::gates(c))
}

/// `T ⊗ T† ⊗ T† ⊗ T ⊗ T† ⊗ T ⊗ T ⊗ T†` on the cube.
pub fn c832_ccz() -> Circuit {
    let pattern = [true, false, false, true, false, true, true, false];
    let gates = pattern.iter().enumerate().map(|(q, &t)| if t { Gate::T(q) } else { Gate::Tdg(q) }).collect();
    Circuit::from_gates(8, gates).expect("static circuit")
}

fn c832_transversal(code: &CodeDefinition, gate: &Gate) -> Result<LogicalImplementation> {
    match *gate {
        Gate::Ccz(a, b, c) => {
            let mut qs = [a, b, c];
            qs.sort_unstable();
            if qs != [0, 1, 2] {
                return Err(Error::QubitOutOfRange { index: a.max(b).max(c), n: 3 });
            }
            Ok(LogicalImplementation::gates(c832_ccz()))
        }
        Gate::Cnot(c, t) => {
            let swaps: [(usize, usize); 2] = match (c, t) {
                (0, 1) => [(0, 4), (1, 5)],
                (1, 0) => [(0, 2), (1, 3)],
                (0, 2) => [(0, 4), (2, 6)],
                (2, 0) => [(0, 1), (2, 3)],
                (1, 2) => [(0, 2), (4, 6)],
                (2, 1) => [(0, 1), (4, 5)],
                _ => return Err(Error::QubitOutOfRange { index: c.max(t), n: 3 }),
            };
            let mut perm: Vec<usize> = (0..8).collect();
            for (a, b) in swaps {
                perm.swap(a, b);
            }
            Ok(LogicalImplementation { circuit: Circuit::new(8), permutation: perm })
        }
        _ => pauli_transversal(code, gate),
    }
}

/// Non-fault-tolerant encoder of `|+++⟩_L` on the cube from `|0⟩^8`. The
/// CNOTs commute; their order fixes where a mid-circuit `Z` fault spreads,
/// and this one leaves every such spread visible to the ancilla checks.
pub fn c832_plus_encoder() -> Circuit {
    use Gate::*;
    let mut g = vec![H(3), H(5), H(6), H(7)];
    for (c, t) in [(3, 0), (7, 2), (3, 2), (5, 1), (5, 4), (6, 2), (6, 4), (5, 0), (7, 4), (3, 1), (7, 1), (6, 0)] {
        g.push(Cnot(c, t));
    }
    Circuit::from_gates(8, g).expect("static encoder")
}

/// Support of the two ancilla-measured checks `(X₁X₃)_L` and `G₁G₃`.
pub const C832_CHECK_SUPPORT: [usize; 4] = [1, 3, 4, 6];

/// Ten-qubit preparation of `|CCZ⟩_L`: encoder, then the X-type check
/// through ancilla 8 interleaved with the Z-type check through ancilla 9,
/// then transversal CCZ. Both ancillas are read out in Z at the end; accept
/// when both give 0. With this interleaving a `Z` hook from ancilla 9 always
/// flips ancilla 8, so no single fault leaves an undetected logical error.
pub fn c832_prepare_circuit() -> Circuit {
    use Gate::*;
    let mut c = Circuit::new(10);
    for g in c832_plus_encoder().gates {
        c.push(g);
    }
    c.push(H(8));
    for g in [Cnot(8, 6), Cnot(6, 9), Cnot(4, 9), Cnot(8, 4), Cnot(8, 3), Cnot(1, 9), Cnot(3, 9), Cnot(8, 1)] {
        c.push(g);
    }
    c.push(H(8));
    for g in c832_ccz().gates {
        c.push(g);
    }
    c
}

/// Ancilla-free `|CCZ⟩_L` preparation (encoder then transversal CCZ).
pub fn c832_ideal_ccz_state() -> Result<DenseState> {
    let mut c = c832_plus_encoder();
    c.extend(&c832_ccz());
    DenseState::from_circuit(&c)
}

/// Words over {H, S} for the 24 single-qubit Cliffords (up to phase).
pub fn single_qubit_cliffords() -> Vec<Vec<Gate>> {
    let mut seen = HashSet::new();
    let mut words: Vec<Vec<Gate>> = vec![vec![]];
    seen.insert(CliffordTableau::identity(1));
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in [Gate::H(0), Gate::S(0)] {
            let mut w = words[i].clone();
            w.push(g);
            let t = CliffordTableau::from_circuit(&Circuit::from_gates(1, w.clone()).expect("1 qubit"))
                .expect("Clifford word");
            if seen.insert(t) {
                queue.push_back(words.len());
                words.push(w);
            }
        }
    }
    words
}

/// Outcomes of logical qubits 1–4 that accept the 5-to-1 distillation.
pub const MSD_ACCEPT_PATTERN: [u8; 4] = [1, 0, 1, 1];

/// Stabilizers of the five-qubit code used by the distillation.
pub fn five_qubit_code_stabilizers() -> Vec<PauliOperator> {
    ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"].iter().map(|s| s.parse().expect("static Pauli")).collect()
}

/// Logical-level 5-to-1 distillation circuit: decode the five-qubit code
/// onto qubit 0, flip qubits 1–4 so the accepted syndrome reads
/// (1, 0, 1, 1), and rotate the output so ideal `|T⟩` inputs return `|T⟩`.
pub fn msd_circuit() -> Result<Circuit> {
    let mut gens = vec!["ZZZZZ".parse::<PauliOperator>()?];
    gens.extend(five_qubit_code_stabilizers());
    let enc = complete_to_tableau(5, &gens)?;
    let mut c = enc.inverse().to_circuit();
    for (k, &b) in MSD_ACCEPT_PATTERN.iter().enumerate() {
        if b == 1 {
            c.push(Gate::X(k + 1));
        }
    }
    let t = DensityMatrix::from_pure(&t_state())?;
    let (_, out) = msd_apply(&c, &[t.clone(), t.clone(), t.clone(), t.clone(), t])?;
    let target = t_state();
    let fix = single_qubit_cliffords()
        .into_iter()
        .find(|w| {
            let mut o = out.clone();
            w.iter().all(|g| o.apply_gate(g).is_ok()) && o.fidelity_pure(&target) > 1.0 - 1e-9
        })
        .ok_or_else(|| Error::Numerical("distilled output is not Clifford-equivalent to |T>".into()))?;
    for g in fix {
        c.push(g);
    }
    Ok(c)
}

fn msd_apply(c: &Circuit, inputs: &[DensityMatrix]) -> Result<(f64, DensityMatrix)> {
    if inputs.len() != 5 || inputs.iter().any(|r| r.num_qubits() != 1) {
        return Err(Error::InvalidArgument("distillation takes five one-qubit inputs".into()));
    }
    let mut rho = inputs[0].clone();
    for r in &inputs[1..] {
        rho = rho.tensor(r)?;
    }
    rho.apply_circuit(c)?;
    let mut acc = 1.0;
    for (k, &b) in MSD_ACCEPT_PATTERN.iter().enumerate() {
        acc = rho.project_z_unnormalized(k + 1, b)?;
    }
    if acc <= 1e-15 {
        return Ok((0.0, DensityMatrix::maximally_mixed(1)?));
    }
    let mut out = rho.partial_trace_keep(&[0])?;
    out.normalize()?;
    Ok((acc, out))
}

#[derive(Clone, Debug)]
pub struct MsdResult {
    pub accept_probability: f64,
    /// Normalised output; maximally mixed when acceptance is impossible.
    pub output: DensityMatrix,
}

/// Exact logical-level 5-to-1 distillation of five one-qubit inputs.
pub fn msd_5to1(inputs: &[DensityMatrix]) -> Result<MsdResult> {
    let (accept_probability, output) = msd_apply(&msd_circuit()?, inputs)?;
    Ok(MsdResult { accept_probability, output })
}
