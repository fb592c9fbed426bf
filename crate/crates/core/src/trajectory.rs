//! Noisy circuits and seeded trajectory sampling on either backend.
//!
//! Noise placement: a preparation channel after every qubit's initial
//! preparation, a gate channel after every gate on the gate's qubits, and a
//! classical read-out flip on every measured bit. Idle qubits are noiseless.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Gate;
use crate::dense::DenseState;
use crate::error::{Error, Result};
use crate::hybrid::HybridState;
use crate::noise::{flip_measurement, sample_pauli_noise, trajectory_rng, trajectory_seed, ChannelKind, NoiseModel};
use crate::pauli::PauliOperator;

#[derive(Clone, Debug)]
pub enum Input {
    Zero,
    Plus,
    /// Arbitrary one-qubit state (a magic input on the hybrid backend).
    State(DenseState),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Gate(Gate),
    Measure(usize),
}

/// Accept only if the listed measurement bits XOR to `expected`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityCheck {
    pub bits: Vec<usize>,
    pub expected: u8,
}

#[derive(Clone, Debug)]
pub struct NoisyCircuit {
    pub n: usize,
    pub inputs: Vec<Input>,
    pub ops: Vec<Op>,
    pub checks: Vec<ParityCheck>,
}

impl NoisyCircuit {
    pub fn new(n: usize) -> Self {
        NoisyCircuit { n, inputs: vec![Input::Zero; n], ops: Vec::new(), checks: Vec::new() }
    }

    pub fn gate(&mut self, g: Gate) -> &mut Self {
        self.ops.push(Op::Gate(g));
        self
    }

    /// Appends a measurement and returns its index in the record.
    pub fn measure(&mut self, q: usize) -> usize {
        self.ops.push(Op::Measure(q));
        self.num_measurements() - 1
    }

    pub fn num_measurements(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o, Op::Measure(_))).count()
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.len() != self.n {
            return Err(Error::DimensionMismatch(self.n, self.inputs.len()));
        }
        for op in &self.ops {
            let qs = match op {
                Op::Gate(g) => g.qubits(),
                Op::Measure(q) => vec![*q],
            };
            for q in qs {
                if q >= self.n {
                    return Err(Error::QubitOutOfRange { index: q, n: self.n });
                }
            }
        }
        let m = self.num_measurements();
        for c in &self.checks {
            if let Some(&b) = c.bits.iter().find(|&&b| b >= m) {
                return Err(Error::InvalidArgument(format!("check refers to measurement {b} of {m}")));
            }
        }
        for i in &self.inputs {
            if let Input::State(s) = i {
                if s.num_qubits() != 1 {
                    return Err(Error::InvalidArgument("inputs must be one-qubit states".into()));
                }
            }
        }
        Ok(())
    }

    pub fn magic_inputs(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| matches!(self.inputs[q], Input::State(_))).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Dense,
    Hybrid,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub id: u64,
    pub seed: u64,
    pub accepted: bool,
    pub bits: Vec<u8>,
    /// Bit `i` is set when check `i` failed.
    pub aux_flags: u64,
}

impl TrajectoryRecord {
    /// Bits packed most significant first, as hex.
    pub fn bits_hex(&self) -> String {
        if self.bits.is_empty() {
            return "0".into();
        }
        let pad = (4 - self.bits.len() % 4) % 4;
        let padded: Vec<u8> = std::iter::repeat_n(0u8, pad).chain(self.bits.iter().copied()).collect();
        padded.chunks(4).map(|c| format!("{:x}", c.iter().fold(0u8, |a, &b| (a << 1) | b))).collect()
    }
}

/// The operations a backend must provide to run a noisy circuit.
trait Sim {
    fn gate(&mut self, g: &Gate) -> Result<()>;
    fn pauli(&mut self, p: &PauliOperator) -> Result<()>;
    fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<u8>;
}

impl Sim for DenseState {
    fn gate(&mut self, g: &Gate) -> Result<()> {
        self.apply_gate(g)
    }
    fn pauli(&mut self, p: &PauliOperator) -> Result<()> {
        self.apply_pauli(p)
    }
    fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<u8> {
        Ok(self.measure_z(q, rng)?.0)
    }
}

impl Sim for HybridState {
    fn gate(&mut self, g: &Gate) -> Result<()> {
        self.apply_gate(g)
    }
    fn pauli(&mut self, p: &PauliOperator) -> Result<()> {
        self.apply_pauli(p)
    }
    fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<u8> {
        Ok(self.measure_z(q, rng)?.0)
    }
}

fn noise_on<S: Sim, R: Rng + ?Sized>(
    sim: &mut S,
    n: usize,
    kind: ChannelKind,
    q: f64,
    qubits: &[usize],
    rng: &mut R,
) -> Result<()> {
    if q == 0.0 {
        return Ok(());
    }
    let e = sample_pauli_noise(kind, q, rng)?;
    if !e.is_identity_word() {
        sim.pauli(&e.embed(n, qubits))?;
    }
    Ok(())
}

fn run<S: Sim, R: Rng + ?Sized>(sim: &mut S, c: &NoisyCircuit, noise: &NoiseModel, rng: &mut R) -> Result<Vec<u8>> {
    for q in 0..c.n {
        noise_on(sim, c.n, ChannelKind::Prep, noise.q_prep(), &[q], rng)?;
    }
    let mut bits = Vec::with_capacity(c.num_measurements());
    for op in &c.ops {
        match op {
            Op::Gate(g) => {
                sim.gate(g)?;
                let qs = g.qubits();
                match qs.len() {
                    1 => noise_on(sim, c.n, ChannelKind::Gate1, noise.q1(), &qs, rng)?,
                    2 => noise_on(sim, c.n, ChannelKind::Gate2, noise.q2(), &qs, rng)?,
                    // Three-qubit gates only appear in ideal logical-level circuits.
                    _ => {}
                }
            }
            Op::Measure(q) => {
                let b = sim.measure(*q, rng)?;
                bits.push(flip_measurement(b, noise.p_meas(), rng));
            }
        }
    }
    Ok(bits)
}

fn dense_input(c: &NoisyCircuit) -> Result<DenseState> {
    let mut s = DenseState::zero(0)?;
    for i in &c.inputs {
        let one = match i {
            Input::Zero => DenseState::basis(1, 0)?,
            Input::Plus => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                DenseState::from_amplitudes(vec![r.into(), r.into()])?
            }
            Input::State(v) => v.clone(),
        };
        s = s.tensor(&one)?;
    }
    Ok(s)
}

fn hybrid_input(c: &NoisyCircuit) -> Result<HybridState> {
    let magic: Vec<(usize, DenseState)> = c
        .inputs
        .iter()
        .enumerate()
        .filter_map(|(q, i)| match i {
            Input::State(s) => Some((q, s.clone())),
            _ => None,
        })
        .collect();
    let mut h = HybridState::from_product(c.n, &magic)?;
    for (q, i) in c.inputs.iter().enumerate() {
        if matches!(i, Input::Plus) {
            h.apply_gate(&Gate::H(q))?;
        }
    }
    Ok(h)
}

/// Runs trajectory `id` of a run seeded by `master`.
pub fn simulate_trajectory(
    c: &NoisyCircuit,
    noise: &NoiseModel,
    backend: Backend,
    master: u64,
    id: u64,
) -> Result<TrajectoryRecord> {
    c.validate()?;
    let seed = trajectory_seed(master, id);
    let mut rng = trajectory_rng(master, id);
    let bits = match backend {
        Backend::Dense => run(&mut dense_input(c)?, c, noise, &mut rng)?,
        Backend::Hybrid => run(&mut hybrid_input(c)?, c, noise, &mut rng)?,
    };
    Ok(record(c, id, seed, bits))
}

/// Dense trajectory that also returns the final (collapsed) state.
pub fn simulate_dense_with_state(
    c: &NoisyCircuit,
    noise: &NoiseModel,
    master: u64,
    id: u64,
) -> Result<(TrajectoryRecord, DenseState)> {
    c.validate()?;
    let seed = trajectory_seed(master, id);
    let mut rng = trajectory_rng(master, id);
    let mut st = dense_input(c)?;
    let bits = run(&mut st, c, noise, &mut rng)?;
    Ok((record(c, id, seed, bits), st))
}

fn record(c: &NoisyCircuit, id: u64, seed: u64, bits: Vec<u8>) -> TrajectoryRecord {
    let mut aux = 0u64;
    for (i, chk) in c.checks.iter().enumerate() {
        let par = chk.bits.iter().fold(0u8, |a, &b| a ^ bits[b]);
        if par != chk.expected {
            aux |= 1 << i.min(63);
        }
    }
    TrajectoryRecord { id, seed, accepted: aux == 0, bits, aux_flags: aux }
}

pub const TRAJECTORY_CSV_HEADER: &str = "trajectory_id,seed,accepted,outcome_bits,aux_flags";

pub fn write_trajectory_csv<W: Write>(records: &[TrajectoryRecord], mut w: W) -> Result<()> {
    writeln!(w, "{TRAJECTORY_CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{},{},{},{},{:x}", r.id, r.seed, u8::from(r.accepted), r.bits_hex(), r.aux_flags)?;
    }
    Ok(())
}
