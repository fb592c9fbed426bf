//! Fidelity estimators (tomography baseline, Bell measurement, single-copy)
//! and the Chernoff-bound sample planner.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::dense::DensityMatrix;
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::dense::DenseState;

/// Probability of outcome 1 when measuring `Z` on the ideal `|T⟩`.
pub fn t_outcome_offset() -> f64 {
    0.5 * (1.0 - 1.0 / 3.0f64.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Bell,
    SingleCopy,
    Tomography,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Bell => "bell",
            Scheme::SingleCopy => "single-copy",
            Scheme::Tomography => "tomography",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bell" => Ok(Scheme::Bell),
            "single-copy" | "single_copy" | "singlecopy" => Ok(Scheme::SingleCopy),
            "tomography" | "tomo" => Ok(Scheme::Tomography),
            other => Err(Error::InvalidArgument(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkEstimate {
    pub scheme: Scheme,
    /// Clamped to `[0, 1]`.
    pub epsilon_hat: f64,
    /// Unclamped estimator value.
    pub epsilon_raw: f64,
    pub std_err: f64,
    pub shots_used: u64,
    /// `(hits, shots)` per witness; empty for the other schemes.
    pub witness_counts: Vec<(u64, u64)>,
    pub clamped: bool,
}

fn clamp_unit(x: f64) -> (f64, bool) {
    let c = x.clamp(0.0, 1.0);
    (c, c != x)
}

/// `CNOT(i, i+n)` then `H_i` on every pair, followed by measuring all `2n`
/// qubits. Outcome `11` on a pair projects onto the singlet.
pub fn build_bell_circuit(n: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidArgument("Bell circuit needs at least one qubit per copy".into()));
    }
    let mut c = Circuit::new(2 * n);
    for i in 0..n {
        c.push(Gate::Cnot(i, i + n));
    }
    for i in 0..n {
        c.push(Gate::H(i));
    }
    Ok(c)
}

/// Parity of `Σ x_i x_{i+n}` for a `2n`-bit outcome.
pub fn bell_parity(bits: &[u8], n: usize) -> Result<u8> {
    if bits.len() != 2 * n {
        return Err(Error::DimensionMismatch(2 * n, bits.len()));
    }
    Ok((0..n).fold(0u8, |acc, i| acc ^ (bits[i] & bits[i + n] & 1)))
}

/// Exact odd-parity probability of the Bell measurement on `ρ₁ ⊗ ρ₂`.
pub fn bell_odd_probability(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    let n = rho1.num_qubits();
    if rho2.num_qubits() != n {
        return Err(Error::DimensionMismatch(n, rho2.num_qubits()));
    }
    let mut joint = rho1.tensor(rho2)?;
    joint.apply_circuit(&build_bell_circuit(n)?)?;
    let diag = joint.diagonal();
    let mut p = 0.0;
    for (idx, w) in diag.iter().enumerate() {
        let bits: Vec<u8> = (0..2 * n).map(|q| ((idx >> (2 * n - 1 - q)) & 1) as u8).collect();
        if bell_parity(&bits, n)? == 1 {
            p += w;
        }
    }
    Ok(p)
}

pub fn bell_estimate(parities: &[u8]) -> Result<BenchmarkEstimate> {
    if parities.is_empty() {
        return Err(Error::InvalidArgument("no Bell rounds".into()));
    }
    let rounds = parities.len() as u64;
    let odd = parities.iter().filter(|&&b| b & 1 == 1).count() as u64;
    Ok(bell_estimate_from_counts(odd, rounds))
}

pub fn bell_estimate_from_counts(odd: u64, rounds: u64) -> BenchmarkEstimate {
    let e = odd as f64 / rounds as f64;
    BenchmarkEstimate {
        scheme: Scheme::Bell,
        epsilon_hat: e,
        epsilon_raw: e,
        std_err: (e * (1.0 - e) / rounds as f64).sqrt(),
        shots_used: 2 * rounds,
        witness_counts: Vec::new(),
        clamped: false,
    }
}

/// `ε̂ = Σ (hits_i / shots_i) · d_i`.
pub fn single_copy_estimate(counts: &[(u64, u64)], dims: &[usize]) -> Result<BenchmarkEstimate> {
    if counts.len() != dims.len() {
        return Err(Error::DimensionMismatch(dims.len(), counts.len()));
    }
    if counts.is_empty() || counts.iter().any(|&(h, s)| s == 0 || h > s) {
        return Err(Error::InvalidArgument("every witness needs shots with hits ≤ shots".into()));
    }
    let mut raw = 0.0;
    let mut var = 0.0;
    for (&(h, s), &d) in counts.iter().zip(dims) {
        let lam = h as f64 / s as f64;
        raw += lam * d as f64;
        var += (d * d) as f64 * lam * (1.0 - lam) / s as f64;
    }
    let (e, clamped) = clamp_unit(raw);
    Ok(BenchmarkEstimate {
        scheme: Scheme::SingleCopy,
        epsilon_hat: e,
        epsilon_raw: raw,
        std_err: var.sqrt(),
        shots_used: counts.iter().map(|c| c.1).sum(),
        witness_counts: counts.to_vec(),
        clamped,
    })
}

/// `ε̂ = √3 (mean − p₀)` from `Z` outcomes of twirled single-qubit `|T⟩` copies.
pub fn tomography_baseline(samples: &[u8]) -> Result<BenchmarkEstimate> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no tomography samples".into()));
    }
    let ones = samples.iter().filter(|&&b| b & 1 == 1).count() as u64;
    Ok(tomography_from_counts(ones, samples.len() as u64))
}

pub fn tomography_from_counts(ones: u64, shots: u64) -> BenchmarkEstimate {
    let m = ones as f64 / shots as f64;
    let raw = 3.0f64.sqrt() * (m - t_outcome_offset());
    let (e, clamped) = clamp_unit(raw);
    BenchmarkEstimate {
        scheme: Scheme::Tomography,
        epsilon_hat: e,
        epsilon_raw: raw,
        std_err: 3.0f64.sqrt() * (m * (1.0 - m) / shots as f64).sqrt(),
        shots_used: shots,
        witness_counts: Vec::new(),
        clamped,
    }
}

/// One Pauli's tally for multi-qubit linear-inversion tomography.
#[derive(Clone, Debug)]
pub struct PauliTally {
    pub pauli: PauliOperator,
    /// Shots with eigenvalue `-1`.
    pub minus: u64,
    pub shots: u64,
}

/// Infidelity to `psi` of the linear-inversion estimate
/// `ρ̂ = (I + Σ ⟨P⟩̂ P) / 2^n` built from non-identity Pauli tallies.
pub fn pauli_tomography_estimate(psi: &DenseState, tallies: &[PauliTally]) -> Result<BenchmarkEstimate> {
    if tallies.is_empty() {
        return Err(Error::InvalidArgument("no Pauli tallies".into()));
    }
    let d = (1u64 << psi.num_qubits()) as f64;
    let mut fid = 1.0 / d;
    let mut var = 0.0;
    for t in tallies {
        if t.shots == 0 || t.minus > t.shots {
            return Err(Error::InvalidArgument(format!("bad tally for {}", t.pauli)));
        }
        let ideal = psi.expectation(&t.pauli).re;
        let q = t.minus as f64 / t.shots as f64;
        let mean = 1.0 - 2.0 * q;
        fid += ideal * mean / d;
        var += (ideal / d).powi(2) * 4.0 * q * (1.0 - q) / t.shots as f64;
    }
    let raw = 1.0 - fid;
    let (e, clamped) = clamp_unit(raw);
    Ok(BenchmarkEstimate {
        scheme: Scheme::Tomography,
        epsilon_hat: e,
        epsilon_raw: raw,
        std_err: var.sqrt(),
        shots_used: tallies.iter().map(|t| t.shots).sum(),
        witness_counts: Vec::new(),
        clamped,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub scheme: Scheme,
    pub r: f64,
    pub delta: f64,
    pub epsilon_guess: f64,
    /// Copies per witness for single-copy, a single entry otherwise.
    pub n_required: Vec<u64>,
    pub total_copies: u64,
    /// Bell rounds (two copies each); `None` for the other schemes.
    pub rounds: Option<u64>,
}

/// Sample counts from the Chernoff (Bell, single-copy) or Hoeffding
/// (tomography) bounds. `dims` lists the component dimensions used by the
/// single-copy scheme and is ignored otherwise.
pub fn plan_samples(r: f64, delta: f64, epsilon: f64, scheme: Scheme, dims: &[usize]) -> Result<SamplePlan> {
    let open_unit = |x: f64| x > 0.0 && x < 1.0;
    if !open_unit(r) || !open_unit(delta) || !open_unit(epsilon) {
        return Err(Error::InvalidArgument("r, delta and epsilon must lie in (0, 1)".into()));
    }
    let (n_required, rounds) = match scheme {
        Scheme::Bell => {
            let n = (3.0 / (r * r * epsilon) * ((1.0 / delta).ln() + 2f64.ln())).ceil() as u64;
            let copies = n + n % 2;
            (vec![copies], Some(copies / 2))
        }
        Scheme::SingleCopy => {
            if dims.is_empty() || dims.contains(&0) {
                return Err(Error::InvalidArgument("single-copy planning needs component dimensions".into()));
            }
            let k = dims.len() as f64;
            let per = dims
                .iter()
                .map(|&d| (3.0 * k * d as f64 / (r * r * epsilon) * ((k / delta).ln() + 2f64.ln())).ceil() as u64)
                .collect();
            (per, None)
        }
        Scheme::Tomography => {
            let n = (3.0 * (2.0 / delta).ln() / (2.0 * r * r * epsilon * epsilon)).ceil() as u64;
            (vec![n], None)
        }
    };
    let total_copies = n_required.iter().sum();
    Ok(SamplePlan { scheme, r, delta, epsilon_guess: epsilon, n_required, total_copies, rounds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_examples() {
        assert_eq!(bell_parity(&[0, 0], 1).unwrap(), 0);
        assert_eq!(bell_parity(&[1, 1], 1).unwrap(), 1);
        assert_eq!(bell_parity(&[1, 1, 0, 1], 2).unwrap(), 1);
        assert!(bell_parity(&[1, 1, 0], 2).is_err());
    }

    #[test]
    fn estimator_examples() {
        let e = bell_estimate(&[0; 10]).unwrap();
        assert_eq!(e.epsilon_hat, 0.0);
        assert_eq!(e.shots_used, 20);
        let e = bell_estimate(&[1, 0, 0, 1, 0, 0, 0, 0]).unwrap();
        assert_eq!(e.epsilon_hat, 0.25);
        assert!(bell_estimate(&[]).is_err());

        let e = single_copy_estimate(&[(3, 100), (4, 200)], &[1, 2]).unwrap();
        assert!((e.epsilon_hat - 0.07).abs() < 1e-15);
        assert_eq!(e.shots_used, 300);
        assert_eq!(single_copy_estimate(&[(0, 10)], &[7]).unwrap().epsilon_hat, 0.0);
        assert!(single_copy_estimate(&[(0, 10)], &[7, 1]).is_err());
    }

    #[test]
    fn tomography_offsets() {
        let p0 = t_outcome_offset();
        let n = 1_000_000u64;
        let at = |m: f64| tomography_from_counts((m * n as f64).round() as u64, n);
        assert!(at(p0).epsilon_hat.abs() < 1e-5);
        let eps = 0.03;
        assert!((at(p0 + eps / 3f64.sqrt()).epsilon_hat - eps).abs() < 1e-5);
        let under = at(p0 - 0.01);
        assert!(under.clamped && under.epsilon_hat == 0.0 && under.epsilon_raw < 0.0);
    }

    #[test]
    fn planner_examples() {
        let p = plan_samples(0.5, 0.32, 0.01, Scheme::Bell, &[]).unwrap();
        assert_eq!(p.n_required, vec![2200]);
        assert_eq!(p.rounds, Some(1100));
        let a = plan_samples(0.3, 0.1, 0.02, Scheme::Tomography, &[]).unwrap().total_copies;
        let b = plan_samples(0.3, 0.1, 0.01, Scheme::Tomography, &[]).unwrap().total_copies;
        assert!((b as f64 / a as f64 - 4.0).abs() < 1e-3);
        let (r, d, e) = (0.2, 0.05, 0.001);
        let s = plan_samples(r, d, e, Scheme::SingleCopy, &[7]).unwrap();
        assert_eq!(s.n_required[0], (21.0 / (r * r * e) * ((1.0 / d).ln() + 2f64.ln())).ceil() as u64);
        assert!(plan_samples(1.2, 0.1, 0.01, Scheme::Bell, &[]).is_err());
        assert!(plan_samples(0.2, 0.1, 0.01, Scheme::SingleCopy, &[]).is_err());
    }

    #[test]
    fn bell_singlet_and_orthogonal_inputs() {
        let zero = DensityMatrix::from_pure(&DenseState::basis(1, 0).unwrap()).unwrap();
        let one = DensityMatrix::from_pure(&DenseState::basis(1, 1).unwrap()).unwrap();
        assert!((bell_odd_probability(&zero, &one).unwrap() - 0.5).abs() < 1e-12);
        assert!(bell_odd_probability(&zero, &zero).unwrap().abs() < 1e-12);
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in [Scheme::Bell, Scheme::SingleCopy, Scheme::Tomography] {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
    }
}
