//! Pauli noise channels, read-out flips and per-trajectory seeding.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

pub const MAX_P: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    Gate1,
    Gate2,
    Prep,
}

impl ChannelKind {
    pub fn arity(self) -> usize {
        match self {
            ChannelKind::Gate2 => 2,
            _ => 1,
        }
    }

    /// Total probability of a non-identity Pauli.
    pub fn error_rate(self, q: f64) -> f64 {
        match self {
            ChannelKind::Gate2 => 15.0 * q / 12.0,
            _ => 1.5 * q,
        }
    }

    fn max_q(self) -> f64 {
        match self {
            ChannelKind::Gate2 => 0.8,
            _ => 2.0 / 3.0,
        }
    }
}

/// Single-parameter circuit noise: `p/5` per one-qubit gate, `p` per
/// two-qubit gate, `p/2` per preparation and `p/2` read-out flips.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
}

impl NoiseModel {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=MAX_P).contains(&p) || p.is_nan() {
            return Err(Error::InvalidArgument(format!("noise parameter {p} outside [0, {MAX_P}]")));
        }
        Ok(NoiseModel { p })
    }

    pub fn noiseless() -> Self {
        NoiseModel { p: 0.0 }
    }

    pub fn q1(&self) -> f64 {
        self.p / 5.0
    }

    pub fn q2(&self) -> f64 {
        self.p
    }

    pub fn q_prep(&self) -> f64 {
        self.p / 2.0
    }

    pub fn p_meas(&self) -> f64 {
        self.p / 2.0
    }

    pub fn strength(&self, kind: ChannelKind) -> f64 {
        match kind {
            ChannelKind::Gate1 => self.q1(),
            ChannelKind::Gate2 => self.q2(),
            ChannelKind::Prep => self.q_prep(),
        }
    }
}

/// Every branch of the channel with its probability (identity first).
pub fn channel_branches(kind: ChannelKind, q: f64) -> Result<Vec<(PauliOperator, f64)>> {
    check_q(kind, q)?;
    let k = kind.arity();
    let others = (1usize << (2 * k)) - 1;
    let each = kind.error_rate(q) / others as f64;
    let mut out = vec![(PauliOperator::identity(k), 1.0 - kind.error_rate(q))];
    for code in 1..=others {
        out.push((pauli_from_code(k, code), each));
    }
    Ok(out)
}

fn check_q(kind: ChannelKind, q: f64) -> Result<()> {
    if !(0.0..=kind.max_q()).contains(&q) || q.is_nan() {
        return Err(Error::InvalidArgument(format!("channel strength {q} invalid for {kind:?}")));
    }
    Ok(())
}

/// Code `c` in `1..4^k` read as base-4 digits (I, X, Y, Z), qubit 0 first.
pub(crate) fn pauli_from_code(k: usize, code: usize) -> PauliOperator {
    let mut p = PauliOperator::identity(k);
    for q in 0..k {
        p.set(q, ['I', 'X', 'Y', 'Z'][(code >> (2 * (k - 1 - q))) & 3]);
    }
    p
}

/// One draw from the channel, as a Pauli on the channel's 1 or 2 qubits.
pub fn sample_pauli_noise<R: Rng + ?Sized>(kind: ChannelKind, q: f64, rng: &mut R) -> Result<PauliOperator> {
    check_q(kind, q)?;
    let k = kind.arity();
    let rate = kind.error_rate(q);
    if q == 0.0 || rng.random::<f64>() >= rate {
        return Ok(PauliOperator::identity(k));
    }
    let others = (1usize << (2 * k)) - 1;
    Ok(pauli_from_code(k, rng.random_range(1..=others)))
}

pub fn flip_measurement<R: Rng + ?Sized>(bit: u8, p_meas: f64, rng: &mut R) -> u8 {
    if p_meas > 0.0 && rng.random::<f64>() < p_meas {
        bit ^ 1
    } else {
        bit
    }
}

/// Stream seed for trajectory `i` of a run keyed by `master`. Independent of
/// the order in which trajectories are executed.
pub fn trajectory_seed(master: u64, i: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(i);
    rng.next_u64()
}

pub fn trajectory_rng(master: u64, i: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trajectory_seed(master, i))
}
