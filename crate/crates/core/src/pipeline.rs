//! Noisy state-preparation pipelines.
//!
//! The Steane 5-to-1 factory is sampled by fault count. Location `i` faults
//! with probability `r_i = c_i p`; a fault set `S` of size `k` is drawn with
//! probability `Π_S c_i h_i / e_k(c h)`, where `e_k` is the elementary
//! symmetric sum and `h_i > 1` boosts locations whose lone fault survives
//! distillation and changes its outcome. The true law is
//! `Π_j (1 - r_j) Π_S r_i/(1 - r_i)`, so each sample is reweighted exactly
//! to every `p` on the grid. Distillation read-outs are forced to the
//! accepting values, so each sample carries its exact acceptance weight
//! instead of a coin flip.
//!
//! Benchmarking happens after distillation. Every fault there is a Pauli just
//! before a `Z` read-out, so it acts as a (possibly correlated) bit flip and
//! is folded in analytically. The benchmark statistics are exact functions of
//! the accepted output state, which the pool averages through a fixed list of
//! Pauli expectations.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::Serialize;

use crate::circuit::{Circuit, Gate};
use crate::codes::{c832, c832_prepare_circuit, msd_circuit, steane, steane_encoder, transversal_logical, MSD_ACCEPT_PATTERN, STEANE_Z_CHECKS};
use crate::dense::{DenseState, DensityMatrix};
use crate::error::{Error, Result};
use crate::hybrid::HybridState;
use crate::noise::{pauli_from_code, trajectory_rng, trajectory_seed, ChannelKind, NoiseModel};
use crate::pauli::{pauli_mul, PauliOperator};
use crate::protocols::bell_odd_probability;
use crate::tableau::CliffordTableau;
use crate::trajectory::{simulate_dense_with_state, NoisyCircuit, Op, ParityCheck};
use crate::twirling::{t_perp_state, t_state, MagicState};

/// Fault-count tail mass left out of the strata.
pub const TAIL_MASS: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LocationKind {
    Prep,
    Gate1,
    Gate2,
    Readout,
}

impl LocationKind {
    /// Fault probability divided by `p`.
    pub fn rate(self) -> f64 {
        let m = NoiseModel { p: 1.0 };
        match self {
            LocationKind::Prep => ChannelKind::Prep.error_rate(m.q_prep()),
            LocationKind::Gate1 => ChannelKind::Gate1.error_rate(m.q1()),
            LocationKind::Gate2 => ChannelKind::Gate2.error_rate(m.q2()),
            LocationKind::Readout => m.p_meas(),
        }
    }

    pub fn variants(self) -> usize {
        match self {
            LocationKind::Gate2 => 15,
            LocationKind::Readout => 1,
            _ => 3,
        }
    }

    fn after_gate(arity: usize) -> Option<Self> {
        match arity {
            1 => Some(LocationKind::Gate1),
            2 => Some(LocationKind::Gate2),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FaultLocation {
    pub kind: LocationKind,
    pub qubits: Vec<usize>,
}

impl FaultLocation {
    /// Pauli for variant `v` in `1..=variants`, on `n` qubits.
    fn pauli(&self, n: usize, v: usize) -> PauliOperator {
        pauli_from_code(self.qubits.len(), v).embed(n, &self.qubits)
    }
}

/// `P(k faults)` for `k = 0..=kmax` with independent fault probabilities.
pub fn fault_count_distribution(probs: &[f64], kmax: usize) -> Vec<f64> {
    let mut d = vec![0.0; kmax + 1];
    d[0] = 1.0;
    for &r in probs {
        for k in (0..=kmax).rev() {
            let stay = d[k] * (1.0 - r);
            let up = if k > 0 { d[k - 1] * r } else { 0.0 };
            d[k] = stay + up;
        }
    }
    d
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrataPlan {
    pub kmax: usize,
    /// Samples per fault count.
    pub counts: Vec<usize>,
}

impl StrataPlan {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Chooses the truncation and the per-stratum sample counts for a grid.
/// `k = 0` is deterministic and gets one sample; `k = 1` gets a quarter of
/// the budget; higher strata get the budget times their largest share of the
/// `k ≥ 2` mass over the grid, which is where infidelity lives.
pub fn plan_strata(rates: &[f64], grid: &[f64], budget: usize, min_per_stratum: usize) -> Result<StrataPlan> {
    if grid.is_empty() || budget == 0 {
        return Err(Error::InvalidArgument("stratified sampling needs a grid and a budget".into()));
    }
    let cap = rates.len().min(200);
    let dists: Vec<Vec<f64>> = grid
        .iter()
        .map(|&p| fault_count_distribution(&rates.iter().map(|c| c * p).collect::<Vec<_>>(), cap))
        .collect();
    let mut kmax = cap;
    for k in 0..=cap {
        let worst_tail = dists.iter().map(|d| 1.0 - d[..=k].iter().sum::<f64>()).fold(0.0, f64::max);
        if worst_tail < TAIL_MASS {
            kmax = k;
            break;
        }
    }
    let kmax = kmax.max(2);
    let mut counts = vec![1usize; kmax + 1];
    if kmax >= 1 {
        counts[1] = budget.div_ceil(4).max(min_per_stratum);
    }
    for k in 2..=kmax {
        let share = dists
            .iter()
            .map(|d| {
                let above: f64 = d[2..].iter().sum();
                if above > 0.0 {
                    d[k] / above
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max);
        counts[k] = ((budget as f64 * share).ceil() as usize).clamp(min_per_stratum, budget);
    }
    Ok(StrataPlan { kmax, counts })
}

/// Draws `k` distinct locations with probability proportional to the product
/// of their rates (whole-draw rejection keeps the law exact), each with a
/// uniformly chosen non-identity variant.
pub fn draw_faults<R: Rng + ?Sized>(
    locs: &[FaultLocation],
    picker: &WeightedIndex<f64>,
    k: usize,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    'retry: loop {
        let mut chosen: Vec<usize> = Vec::with_capacity(k);
        for _ in 0..k {
            let i = picker.sample(rng);
            if chosen.contains(&i) {
                continue 'retry;
            }
            chosen.push(i);
        }
        return chosen
            .into_iter()
            .map(|i| (i, rng.random_range(1..=locs[i].kind.variants())))
            .collect();
    }
}

#[derive(Clone, Debug)]
enum Step {
    Gate(Gate),
    Fault(usize),
}

/// Physical circuit of the Steane-encoded 5-to-1 factory with its fault
/// locations. Block `b` occupies qubits `7b..7b+7`; the magic inputs start on
/// the first qubit of each block.
#[derive(Clone, Debug)]
pub struct FactoryProgram {
    pub n: usize,
    magic: Vec<usize>,
    steps: Vec<Step>,
    pub locations: Vec<FaultLocation>,
    /// (block, accepted logical value) for each distillation read-out.
    measured: Vec<(usize, u8)>,
    readout: Vec<Option<usize>>,
    pub output_block: usize,
}

impl FactoryProgram {
    pub fn steane_5to1() -> Result<Self> {
        let code = steane();
        let n = 35;
        let mut steps = Vec::new();
        let mut locations = Vec::new();
        let mut push_loc = |steps: &mut Vec<Step>, kind: LocationKind, qubits: Vec<usize>| {
            steps.push(Step::Fault(locations.len()));
            locations.push(FaultLocation { kind, qubits });
        };
        for q in 0..n {
            push_loc(&mut steps, LocationKind::Prep, vec![q]);
        }
        let add_gate = |steps: &mut Vec<Step>, g: Gate, push_loc: &mut dyn FnMut(&mut Vec<Step>, LocationKind, Vec<usize>)| {
            steps.push(Step::Gate(g));
            if let Some(kind) = LocationKind::after_gate(g.arity()) {
                push_loc(steps, kind, g.qubits());
            }
        };
        let enc = steane_encoder();
        for b in 0..5 {
            let map: Vec<usize> = (7 * b..7 * b + 7).collect();
            for g in &enc.gates {
                add_gate(&mut steps, g.remap(&map), &mut push_loc);
            }
        }
        // Logical qubit i currently sits on block pos[i]; logical SWAPs relabel.
        let mut pos: Vec<usize> = (0..5).collect();
        for g in &msd_circuit()?.gates {
            if let Gate::Swap(a, b) = *g {
                pos.swap(a, b);
                continue;
            }
            let imp = transversal_logical(&code, &g.remap(&pos), 5)?;
            for pg in imp.circuit.gates {
                add_gate(&mut steps, pg, &mut push_loc);
            }
        }
        let mut readout = vec![None; n];
        let mut measured = Vec::new();
        for (k, &bit) in MSD_ACCEPT_PATTERN.iter().enumerate() {
            let b = pos[k + 1];
            measured.push((b, bit));
            for q in 7 * b..7 * b + 7 {
                readout[q] = Some(locations.len());
                locations.push(FaultLocation { kind: LocationKind::Readout, qubits: vec![q] });
            }
        }
        Ok(FactoryProgram {
            n,
            magic: (0..5).map(|b| 7 * b).collect(),
            steps,
            locations,
            measured,
            readout,
            output_block: pos[0],
        })
    }

    pub fn rates(&self) -> Vec<f64> {
        self.locations.iter().map(|l| l.kind.rate()).collect()
    }

    pub fn output_qubits(&self) -> Vec<usize> {
        (7 * self.output_block..7 * self.output_block + 7).collect()
    }

    /// Flags each location where some single fault is accepted by the
    /// distillation with a weight different from the fault-free one. Pairs of
    /// such faults are what the infidelity is made of at low `p`.
    pub fn single_fault_scan(&self) -> Result<Vec<bool>> {
        let (w0, _) = self.run(&[], &[])?;
        (0..self.locations.len())
            .map(|i| {
                for v in 1..=self.locations[i].kind.variants() {
                    let (w, _) = self.run(&[(i, v)], &[])?;
                    if w > 0.0 && (w - w0).abs() > 1e-9 {
                        return Ok(true);
                    }
                }
                Ok(false)
            })
            .collect()
    }

    /// Runs one fault configuration. Returns the acceptance weight and, when
    /// it is positive, the expectations of `probes` on the output block.
    pub fn run(&self, faults: &[(usize, usize)], probes: &[PauliOperator]) -> Result<(f64, Vec<f64>)> {
        let mut variant = vec![0usize; self.locations.len()];
        for &(i, v) in faults {
            variant[i] = v;
        }
        let t = t_state();
        let inputs: Vec<(usize, DenseState)> = self.magic.iter().map(|&q| (q, t.clone())).collect();
        let mut st = HybridState::from_product(self.n, &inputs)?;
        for step in &self.steps {
            match step {
                Step::Gate(g) => st.apply_gate(g)?,
                Step::Fault(i) => {
                    if variant[*i] != 0 {
                        st.apply_pauli(&self.locations[*i].pauli(self.n, variant[*i]))?;
                    }
                }
            }
        }
        let flip = |q: usize| -> u8 { self.readout[q].map_or(0, |i| u8::from(variant[i] != 0)) };
        let mut w = 1.0;
        for &(b, bit) in &self.measured {
            let base = 7 * b;
            for sup in STEANE_Z_CHECKS {
                let qs: Vec<usize> = sup.iter().map(|&j| base + j).collect();
                let target = qs.iter().fold(0, |a, &q| a ^ flip(q));
                w *= st.force_pauli(&PauliOperator::from_support(self.n, &qs, 'Z'), target)?;
                if w == 0.0 {
                    return Ok((0.0, Vec::new()));
                }
            }
            let qs: Vec<usize> = (base..base + 7).collect();
            let target = qs.iter().fold(bit, |a, &q| a ^ flip(q));
            w *= st.force_pauli(&PauliOperator::from_support(self.n, &qs, 'Z'), target)?;
            if w == 0.0 {
                return Ok((0.0, Vec::new()));
            }
        }
        let out = self.output_qubits();
        let e = probes.iter().map(|p| st.expectation(&p.embed(self.n, &out))).collect();
        Ok((w, e))
    }
}

/// Signed reference to an interned Pauli: `sign · ⟨raw[index]⟩`.
type Term = (usize, f64);

/// A short noisy circuit that ends in `Z` read-outs, reduced to the
/// distribution of flips on a set of read-out parities.
#[derive(Clone, Debug)]
struct FlipModel {
    parities: usize,
    /// (fault rate per unit p, parity vectors of its variants).
    locs: Vec<(f64, Vec<usize>)>,
}

impl FlipModel {
    fn new(tail: &Circuit, parity_masks: &[Vec<usize>]) -> Result<Self> {
        let n = tail.n;
        let vector = |p: &PauliOperator| -> usize {
            parity_masks
                .iter()
                .enumerate()
                .filter(|(_, m)| m.iter().filter(|&&q| p.x_bit(q)).count() % 2 == 1)
                .fold(0, |a, (t, _)| a | (1 << t))
        };
        let mut locs = Vec::new();
        for (i, g) in tail.gates.iter().enumerate() {
            let Some(kind) = LocationKind::after_gate(g.arity()) else { continue };
            let rest = CliffordTableau::from_circuit(&Circuit::from_gates(n, tail.gates[i + 1..].to_vec())?)?;
            let loc = FaultLocation { kind, qubits: g.qubits() };
            let vs = (1..=kind.variants()).map(|v| vector(&rest.conjugate_unchecked(&loc.pauli(n, v)))).collect();
            locs.push((kind.rate(), vs));
        }
        for q in 0..n {
            locs.push((LocationKind::Readout.rate(), vec![vector(&PauliOperator::x_on(n, q))]));
        }
        Ok(FlipModel { parities: parity_masks.len(), locs })
    }

    fn distribution(&self, p: f64) -> Vec<f64> {
        let size = 1 << self.parities;
        let mut d = vec![0.0; size];
        d[0] = 1.0;
        for (rate, vs) in &self.locs {
            let r = rate * p;
            let each = r / vs.len() as f64;
            let mut next: Vec<f64> = d.iter().map(|x| x * (1.0 - r)).collect();
            for &v in vs {
                for (s, &x) in d.iter().enumerate() {
                    next[s ^ v] += x * each;
                }
            }
            d = next;
        }
        d
    }
}

fn xor_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i ^ j] += x * y;
        }
    }
    out
}

/// Per-copy outcome probabilities of one benchmarking unit (a copy for
/// tomography, a round of two copies for Bell).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CopyOutcomes {
    pub reject: f64,
    pub zero: f64,
    pub one: f64,
}

impl CopyOutcomes {
    pub fn accept(&self) -> f64 {
        self.zero + self.one
    }

    fn from_observed(obs: &[f64], pass: impl Fn(usize) -> bool, bit: impl Fn(usize) -> bool) -> Self {
        let (mut zero, mut one) = (0.0, 0.0);
        for (v, &x) in obs.iter().enumerate() {
            let x = x.max(0.0);
            if pass(v) {
                if bit(v) {
                    one += x;
                } else {
                    zero += x;
                }
            }
        }
        let total: f64 = obs.iter().map(|x| x.max(0.0)).sum();
        let (zero, one) = (zero / total, one / total);
        CopyOutcomes { reject: (1.0 - zero - one).max(0.0), zero, one }
    }
}

/// Steane read-out analysis of the distilled block: the Pauli expectations
/// needed for the true infidelity (after a perfect code-space projection) and
/// for both benchmarking schemes. Read-out parity `t` of a block is a check
/// for `t < 3` and the logical value for `t = 3`.
#[derive(Clone, Debug)]
pub struct SteaneReadout {
    raw: Vec<PauliOperator>,
    stab: Vec<Term>,
    stab_logical: [Vec<Term>; 3],
    /// Per twirl choice, `⟨M_T⟩` for the 16 products of the four parities.
    tomo: Vec<Vec<Term>>,
    /// Bell: `⟨M_T⟩ = c_T ⟨A_T⟩ ⟨B_T⟩`; per twirl choice, the terms for A and B.
    bell_sign: Vec<f64>,
    bell_a: Vec<Vec<Term>>,
    bell_b: Vec<Vec<Term>>,
    tomo_flips: Vec<FlipModel>,
    bell_flips: Vec<FlipModel>,
}

/// Twirl choices `I`, `U0`, `U0†` as transversal physical gates on a block.
fn twirl_gates(choice: usize, base: usize) -> Vec<Gate> {
    (base..base + 7)
        .flat_map(|q| match choice {
            0 => vec![],
            1 => vec![Gate::S(q), Gate::H(q)],
            _ => vec![Gate::H(q), Gate::Sdg(q)],
        })
        .collect()
}

fn block_parities(base: usize) -> Vec<Vec<usize>> {
    let mut m: Vec<Vec<usize>> = STEANE_Z_CHECKS.iter().map(|s| s.iter().map(|&j| base + j).collect()).collect();
    m.push((base..base + 7).collect());
    m
}

fn parity_product(n: usize, masks: &[Vec<usize>], t: usize) -> PauliOperator {
    let mut p = PauliOperator::identity(n);
    for (i, m) in masks.iter().enumerate() {
        if t >> i & 1 == 1 {
            p.mul_assign_right(&PauliOperator::from_support(n, m, 'Z'));
        }
    }
    p
}

impl SteaneReadout {
    pub fn new() -> Result<Self> {
        let mut raw = Vec::new();
        let mut index: HashMap<PauliOperator, usize> = HashMap::new();
        let mut intern = |p: &PauliOperator| -> Result<Term> {
            if !p.is_hermitian() {
                return Err(Error::Numerical(format!("non-Hermitian probe {p}")));
            }
            let key = p.unsigned();
            let i = *index.entry(key.clone()).or_insert_with(|| {
                raw.push(key);
                raw.len() - 1
            });
            Ok((i, p.sign() as f64))
        };

        let code = steane();
        let mut group = vec![PauliOperator::identity(7)];
        for g in &code.stabilizers {
            let more: Vec<PauliOperator> = group.iter().map(|s| pauli_mul(s, g)).collect::<Result<_>>()?;
            group.extend(more);
        }
        let stab = group.iter().map(&mut intern).collect::<Result<Vec<_>>>()?;
        let mut stab_logical: [Vec<Term>; 3] = Default::default();
        for (slot, c) in stab_logical.iter_mut().zip(['X', 'Y', 'Z']) {
            let l = code.logical_pauli(&PauliOperator::single(1, 0, c))?;
            *slot = group.iter().map(|s| intern(&pauli_mul(s, &l)?)).collect::<Result<_>>()?;
        }

        let masks7 = block_parities(0);
        let mut tomo = Vec::new();
        let mut tomo_flips = Vec::new();
        let mut pullback = Vec::new();
        for g in 0..3 {
            let w = Circuit::from_gates(7, twirl_gates(g, 0))?;
            let back = CliffordTableau::from_circuit(&w)?.inverse();
            tomo.push(
                (0..16)
                    .map(|t| intern(&back.conjugate_unchecked(&parity_product(7, &masks7, t))))
                    .collect::<Result<Vec<_>>>()?,
            );
            tomo_flips.push(FlipModel::new(&w, &masks7)?);
            pullback.push(back);
        }

        let mut bell_circuit = Circuit::new(14);
        for j in 0..7 {
            bell_circuit.push(Gate::Cnot(j, 7 + j));
        }
        for j in 0..7 {
            bell_circuit.push(Gate::H(j));
        }
        let bell_back = CliffordTableau::from_circuit(&bell_circuit)?.inverse();
        let mut masks14 = block_parities(0);
        masks14.extend(block_parities(7));
        let left: Vec<usize> = (0..7).collect();
        let right: Vec<usize> = (7..14).collect();
        let mut bell_sign = Vec::new();
        let mut halves = Vec::new();
        for t in 0..256 {
            let m = bell_back.conjugate_unchecked(&parity_product(14, &masks14, t));
            let mut a = m.restrict(&left);
            a.set_phase(0);
            let mut b = m.restrict(&right);
            b.set_phase(0);
            let sign = match m.phase() {
                0 => 1.0,
                2 => -1.0,
                _ => return Err(Error::Numerical("non-Hermitian Bell parity".into())),
            };
            bell_sign.push(sign);
            halves.push((a, b));
        }
        let mut bell_a = Vec::new();
        let mut bell_b = Vec::new();
        for back in &pullback {
            bell_a.push(halves.iter().map(|(a, _)| intern(&back.conjugate_unchecked(a))).collect::<Result<Vec<_>>>()?);
            bell_b.push(halves.iter().map(|(_, b)| intern(&back.conjugate_unchecked(b))).collect::<Result<Vec<_>>>()?);
        }
        let mut bell_flips = Vec::new();
        for ga in 0..3 {
            for gb in 0..3 {
                let mut tail = Circuit::new(14);
                for g in twirl_gates(ga, 0).into_iter().chain(twirl_gates(gb, 7)) {
                    tail.push(g);
                }
                tail.extend(&bell_circuit);
                bell_flips.push(FlipModel::new(&tail, &masks14)?);
            }
        }
        Ok(SteaneReadout { raw, stab, stab_logical, tomo, bell_sign, bell_a, bell_b, tomo_flips, bell_flips })
    }

    /// Seven-qubit Paulis whose expectations the pool averages.
    pub fn probes(&self) -> &[PauliOperator] {
        &self.raw
    }

    fn value(e: &[f64], t: Term) -> f64 {
        t.1 * e[t.0]
    }

    /// Infidelity to logical `|T⟩` after projecting onto the code space, from
    /// averaged probe values.
    pub fn infidelity(&self, e: &[f64]) -> f64 {
        let sum = |ts: &[Term]| ts.iter().map(|&t| Self::value(e, t)).sum::<f64>();
        let norm = sum(&self.stab);
        if norm <= 0.0 {
            return 1.0;
        }
        let bloch: f64 = self.stab_logical.iter().map(|ts| sum(ts)).sum::<f64>() / 3f64.sqrt();
        let v = 1.0 - 0.5 * (norm + bloch) / norm; v.clamp(0.0, 1.0)
    }

    /// Tomography copy: twirl, transversal `Z` read-out, detection on the
    /// three checks, logical bit from the total parity.
    pub fn tomography(&self, e: &[f64], p: f64) -> CopyOutcomes {
        let mut obs = vec![0.0; 16];
        for g in 0..3 {
            let truth: Vec<f64> = (0..16)
                .map(|v: usize| {
                    (0..16usize)
                        .map(|t| {
                            let s = if (v & t).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                            s * Self::value(e, self.tomo[g][t])
                        })
                        .sum::<f64>()
                        / 16.0
                })
                .collect();
            for (o, x) in obs.iter_mut().zip(xor_convolve(&truth, &self.tomo_flips[g].distribution(p))) {
                *o += x / 3.0;
            }
        }
        CopyOutcomes::from_observed(&obs, |v| v & 0b0111 == 0, |v| v & 0b1000 != 0)
    }

    /// Bell round on two independent copies: both twirled, transversal CNOT
    /// and H, detection on both blocks, outcome = AND of the logical bits.
    pub fn bell(&self, e: &[f64], p: f64) -> CopyOutcomes {
        let mut obs = vec![0.0; 256];
        for ga in 0..3 {
            for gb in 0..3 {
                let chars: Vec<f64> = (0..256)
                    .map(|t| {
                        self.bell_sign[t] * Self::value(e, self.bell_a[ga][t]) * Self::value(e, self.bell_b[gb][t])
                    })
                    .collect();
                let truth = walsh_inverse(&chars);
                let flips = self.bell_flips[3 * ga + gb].distribution(p);
                for (o, x) in obs.iter_mut().zip(xor_convolve(&truth, &flips)) {
                    *o += x / 9.0;
                }
            }
        }
        CopyOutcomes::from_observed(&obs, |v| v & 0x77 == 0, |v| v & 0x08 != 0 && v & 0x80 != 0)
    }
}

/// `P(v) = 2^-m Σ_T (-1)^{v·T} χ(T)` by the fast Walsh–Hadamard transform.
fn walsh_inverse(chars: &[f64]) -> Vec<f64> {
    let mut a = chars.to_vec();
    let n = a.len();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (x, y) = (a[j], a[j + h]);
                a[j] = x + y;
                a[j + h] = x - y;
            }
        }
        h *= 2;
    }
    a.iter().map(|x| x / n as f64).collect()
}

/// Running sums for one stratum at one grid point.
#[derive(Clone, Debug)]
struct StratumSums {
    n: usize,
    uw: f64,
    uwe: Vec<f64>,
}

impl StratumSums {
    fn new(r: usize) -> Self {
        StratumSums { n: 0, uw: 0.0, uwe: vec![0.0; r] }
    }

    fn merge(&mut self, o: &StratumSums) {
        self.n += o.n;
        self.uw += o.uw;
        for (a, b) in self.uwe.iter_mut().zip(&o.uwe) {
            *a += b;
        }
    }
}

/// Boost applied to locations flagged by the single-fault scan.
pub const DANGER_BOOST: f64 = 50.0;

/// `e_k(x)` for `k = 0..=kmax`.
fn elementary_symmetric(x: &[f64], kmax: usize) -> Vec<f64> {
    let mut e = vec![0.0; kmax + 1];
    e[0] = 1.0;
    for &v in x {
        for k in (1..=kmax).rev() {
            e[k] += e[k - 1] * v;
        }
    }
    e
}

/// One pooled sample, kept for the trajectory CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoolRecord {
    pub id: u64,
    pub seed: u64,
    pub faults: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactoryPoint {
    pub p: f64,
    pub accept_msd: f64,
    pub epsilon_true: f64,
    pub tomography: CopyOutcomes,
    pub bell: CopyOutcomes,
}

#[derive(Clone, Debug)]
pub struct FactoryPool {
    pub plan: StrataPlan,
    pub points: Vec<FactoryPoint>,
    pub records: Vec<PoolRecord>,
}

const CHUNK: usize = 128;

/// Builds the stratified pool for the Steane factory over a `p` grid and
/// evaluates every grid point. Results depend only on `seed`, not on
/// `threads`: samples are seeded by index and merged in index order.
pub fn run_factory_pool(grid: &[f64], budget: usize, seed: u64, threads: usize) -> Result<FactoryPool> {
    for &p in grid {
        NoiseModel::new(p)?;
    }
    let program = FactoryProgram::steane_5to1()?;
    let readout = SteaneReadout::new()?;
    let rates = program.rates();
    let plan = plan_strata(&rates, grid, budget, 64)?;
    let boost: Vec<f64> =
        program.single_fault_scan()?.into_iter().map(|d| if d { DANGER_BOOST } else { 1.0 }).collect();
    let proposal: Vec<f64> = rates.iter().zip(&boost).map(|(c, h)| c * h).collect();
    let esym = elementary_symmetric(&proposal, plan.kmax);
    let picker = WeightedIndex::new(&proposal).map_err(|e| Error::Numerical(e.to_string()))?;
    let r = readout.probes().len();

    let mut jobs = Vec::new();
    let mut offset = 0u64;
    for (k, &count) in plan.counts.iter().enumerate() {
        for start in (0..count).step_by(CHUNK) {
            jobs.push((k, offset + start as u64, (count - start).min(CHUNK)));
        }
        offset += count as u64;
    }

    let run_job = |&(k, first, len): &(usize, u64, usize)| -> Result<(Vec<StratumSums>, Vec<PoolRecord>)> {
        let mut sums = vec![StratumSums::new(r); grid.len()];
        let mut recs = Vec::with_capacity(len);
        for id in first..first + len as u64 {
            let mut rng = trajectory_rng(seed, id);
            let faults = draw_faults(&program.locations, &picker, k, &mut rng);
            let (w, e) = program.run(&faults, readout.probes())?;
            for (s, &p) in sums.iter_mut().zip(grid) {
                // Target over proposal, up to the stratum constants applied later.
                let u: f64 = faults.iter().map(|&(i, _)| p / (boost[i] * (1.0 - rates[i] * p))).product();
                s.n += 1;
                s.uw += u * w;
                if w > 0.0 {
                    for (a, x) in s.uwe.iter_mut().zip(&e) {
                        *a += u * w * x;
                    }
                }
            }
            recs.push(PoolRecord { id, seed: trajectory_seed(seed, id), faults: k, weight: w });
        }
        Ok((sums, recs))
    };

    let results: Vec<Mutex<Option<Result<(Vec<StratumSums>, Vec<PoolRecord>)>>>> =
        jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads.max(1) {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                if j >= jobs.len() {
                    break;
                }
                let out = run_job(&jobs[j]);
                *results[j].lock().expect("result slot") = Some(out);
            });
        }
    });

    let mut strata: Vec<Vec<StratumSums>> = vec![vec![StratumSums::new(r); grid.len()]; plan.kmax + 1];
    let mut records = Vec::with_capacity(plan.total());
    for (job, slot) in jobs.iter().zip(results) {
        let (sums, recs) = slot.into_inner().expect("result slot").expect("every job ran")?;
        for (acc, s) in strata[job.0].iter_mut().zip(&sums) {
            acc.merge(s);
        }
        records.extend(recs);
    }

    let mut points = Vec::new();
    for (gi, &p) in grid.iter().enumerate() {
        let none: f64 = rates.iter().map(|c| (1.0 - c * p).ln()).sum::<f64>().exp();
        let mut ew = 0.0;
        let mut ewe = vec![0.0; r];
        for (k, st) in strata.iter().enumerate() {
            let s = &st[gi];
            if s.n == 0 {
                continue;
            }
            let f = none * esym[k] / s.n as f64;
            ew += f * s.uw;
            for (a, x) in ewe.iter_mut().zip(&s.uwe) {
                *a += f * x;
            }
        }
        if ew <= 0.0 {
            return Err(Error::Numerical(format!("no accepted distillation samples at p = {p}")));
        }
        let e: Vec<f64> = ewe.iter().map(|x| x / ew).collect();
        points.push(FactoryPoint {
            p,
            accept_msd: ew,
            epsilon_true: readout.infidelity(&e),
            tomography: readout.tomography(&e, p),
            bell: readout.bell(&e, p),
        });
    }
    Ok(FactoryPool { plan, points, records })
}

/// Exact output of the noisy ten-qubit `[[8,3,2]]` preparation.
#[derive(Clone, Debug)]
pub struct C832Point {
    pub p: f64,
    pub accept: f64,
    /// Weight of the accepted state inside the code space.
    pub in_code: f64,
    pub epsilon_true: f64,
    /// Logical three-qubit state after a perfect code-space projection.
    pub logical: DensityMatrix,
}

/// Noisy circuit for the `[[8,3,2]]` preparation with both ancilla checks.
pub fn c832_noisy_circuit() -> NoisyCircuit {
    let prep = c832_prepare_circuit();
    let mut c = NoisyCircuit::new(prep.n);
    for g in prep.gates {
        c.gate(g);
    }
    let m8 = c.measure(8);
    let m9 = c.measure(9);
    c.checks = vec![ParityCheck { bits: vec![m8], expected: 0 }, ParityCheck { bits: vec![m9], expected: 0 }];
    c
}

/// Density-matrix evolution of the preparation with the circuit noise model,
/// post-selected on both ancillas reading 0 (read-out flips included).
/// Returns the acceptance probability and the normalised eight-qubit state.
pub fn c832_channel(noise: &NoiseModel) -> Result<(f64, DensityMatrix)> {
    let c = c832_noisy_circuit();
    let mut rho = DensityMatrix::zero(c.n)?;
    for q in 0..c.n {
        rho.depolarize_one(q, noise.q_prep())?;
    }
    for op in &c.ops {
        if let Op::Gate(g) = op {
            rho.apply_gate(g)?;
            match g.qubits()[..] {
                [a] => rho.depolarize_one(a, noise.q1())?,
                [a, b] => rho.depolarize_two(a, b, noise.q2())?,
                _ => {}
            }
        }
    }
    let f = noise.p_meas();
    let mut acc = DensityMatrix::zero(c.n)?;
    acc.scale(0.0);
    for t8 in 0..2u8 {
        for t9 in 0..2u8 {
            let mut branch = rho.clone();
            branch.project_z_unnormalized(8, t8)?;
            branch.project_z_unnormalized(9, t9)?;
            let w = (if t8 == 0 { 1.0 - f } else { f }) * (if t9 == 0 { 1.0 - f } else { f });
            acc.mix(1.0, &branch, w);
        }
    }
    let mut data = acc.partial_trace_keep(&(0..8).collect::<Vec<_>>())?;
    let accept = data.normalize()?;
    Ok((accept, data))
}

/// One sampled trajectory of the preparation: the acceptance flag and, when
/// accepted, the eight-qubit data state.
pub fn c832_trajectory(noise: &NoiseModel, master: u64, id: u64) -> Result<(bool, Option<DenseState>)> {
    let (rec, st) = simulate_dense_with_state(&c832_noisy_circuit(), noise, master, id)?;
    if !rec.accepted {
        return Ok((false, None));
    }
    // Ancillas are collapsed; keep the amplitudes on their measured values.
    let a8 = usize::from(st.prob_one(8)? > 0.5);
    let a9 = usize::from(st.prob_one(9)? > 0.5);
    let amps = (0..256).map(|i| st.amplitudes()[(i << 2) | (a8 << 1) | a9]).collect();
    Ok((true, Some(DenseState::from_amplitudes(amps)?)))
}

/// Projects an eight-qubit state onto the code space and reads out the
/// logical state and its infidelity to `|CCZ⟩`.
pub fn c832_logical(rho: &DensityMatrix) -> Result<(f64, DensityMatrix, f64)> {
    let code = c832();
    let (trace, projected) = code.project(rho)?;
    let logical = code.logical_density(&projected)?;
    let eps = 1.0 - logical.fidelity_pure(&MagicState::Ccz.state());
    Ok((trace, logical, eps.clamp(0.0, 1.0)))
}

pub fn c832_point(p: f64) -> Result<C832Point> {
    let noise = NoiseModel::new(p)?;
    let (accept, rho) = c832_channel(&noise)?;
    let (in_code, logical, epsilon_true) = c832_logical(&rho)?;
    Ok(C832Point { p, accept, in_code, epsilon_true, logical })
}

/// `(1-ε)|T⟩⟨T| + ε|T⊥⟩⟨T⊥|`, the twirl-invariant single-qubit state used by
/// the protocol-level experiment.
pub fn noisy_t_density(eps: f64) -> Result<DensityMatrix> {
    let mut rho = DensityMatrix::from_pure(&t_state())?;
    rho.mix(1.0 - eps, &DensityMatrix::from_pure(&t_perp_state())?, eps);
    Ok(rho)
}

/// Exact per-unit outcomes for the protocol-level experiment.
pub fn protocol_unit_outcomes(eps: f64) -> Result<(CopyOutcomes, CopyOutcomes)> {
    let rho = noisy_t_density(eps)?;
    let one = rho.prob_z(0, 1)?;
    let odd = bell_odd_probability(&rho, &rho)?;
    Ok((
        CopyOutcomes { reject: 0.0, zero: 1.0 - one, one },
        CopyOutcomes { reject: 0.0, zero: 1.0 - odd, one: odd },
    ))
}
