//! Experiment configuration, shot sampling, bootstrap errors, power-law fits
//! and CSV reporting.
//!
//! Every pipeline is reduced to exact per-unit outcome probabilities first
//! (the stratified factory pool, the `[[8,3,2]]` density-matrix channel, or
//! the closed-form protocol unit). Benchmarking shots are then multinomial
//! draws from those probabilities.

use std::fmt;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::dense::{DenseState, DensityMatrix};
use crate::error::{Error, Result};
use crate::noise::{trajectory_rng, trajectory_seed, NoiseModel, MAX_P};
use crate::pauli::PauliOperator;
use crate::pipeline::{c832_noisy_circuit, c832_point, protocol_unit_outcomes, run_factory_pool, CopyOutcomes};
use crate::protocols::{
    bell_estimate_from_counts, pauli_tomography_estimate, single_copy_estimate, tomography_from_counts,
    PauliTally, Scheme,
};
use crate::trajectory::{simulate_trajectory, write_trajectory_csv, Backend, TrajectoryRecord};
use crate::twirling::MagicState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SteaneTomography,
    SteaneBell,
    C832Tomography,
    C832SingleCopy,
    ProtocolUnit,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::SteaneTomography,
        ExperimentKind::SteaneBell,
        ExperimentKind::C832Tomography,
        ExperimentKind::C832SingleCopy,
        ExperimentKind::ProtocolUnit,
    ];

    fn name(self) -> &'static str {
        match self {
            ExperimentKind::SteaneTomography => "steane-tomography",
            ExperimentKind::SteaneBell => "steane-bell",
            ExperimentKind::C832Tomography => "c832-tomography",
            ExperimentKind::C832SingleCopy => "c832-single-copy",
            ExperimentKind::ProtocolUnit => "protocol-unit",
        }
    }

    fn uses_factory(self) -> bool {
        matches!(self, ExperimentKind::SteaneTomography | ExperimentKind::SteaneBell)
    }

    fn uses_c832(self) -> bool {
        matches!(self, ExperimentKind::C832Tomography | ExperimentKind::C832SingleCopy)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// A declarative experiment. Parsed from a flat `key = value` file; `#`
/// starts a comment and lists are comma separated.
///
/// For the Steane experiments `trajectories` is the budget of the factory
/// pool shared by the whole `p` grid. The `[[8,3,2]]` preparation is
/// evaluated exactly, and `trajectories` only sets how many sampled
/// trajectories go to `trajectory_csv`. For `protocol-unit` each `p` is the
/// infidelity of the input state itself.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiments: Vec<ExperimentKind>,
    pub p: Vec<f64>,
    pub trajectories: usize,
    /// Accepted benchmarking copies per row (two per Bell round). Copies
    /// consumed including detection rejects are `shots / accept_rate_detect`.
    pub shots: Vec<u64>,
    pub seed: u64,
    pub threads: usize,
    pub bootstrap: usize,
    pub output: Option<PathBuf>,
    pub trajectory_csv: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiments: Vec::new(),
            p: Vec::new(),
            trajectories: 100_000,
            shots: vec![1_000_000],
            seed: 1,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            bootstrap: 1000,
            output: None,
            trajectory_csv: None,
        }
    }
}

fn parse_list<T>(key: &str, v: &str, one: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| one(s).ok_or_else(|| Error::Config(format!("bad value `{s}` for `{key}`"))))
        .collect()
}

/// Counts may be written as `1e6`.
fn parse_count(s: &str) -> Option<u64> {
    s.parse::<u64>().ok().or_else(|| {
        let f = s.parse::<f64>().ok()?;
        (f.is_finite() && f >= 0.0 && f.fract() == 0.0 && f < 1.8e19).then_some(f as u64)
    })
}

fn one_count(key: &str, v: &str) -> Result<u64> {
    parse_count(v.trim()).ok_or_else(|| Error::Config(format!("bad value `{v}` for `{key}`")))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", ln + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", ln + 1)));
            }
            match key {
                "experiment" => cfg.experiments = parse_list(key, value, |s| s.parse().ok())?,
                "p" => cfg.p = parse_list(key, value, |s| s.parse().ok())?,
                "trajectories" => cfg.trajectories = one_count(key, value)? as usize,
                "shots" => cfg.shots = parse_list(key, value, parse_count)?,
                "seed" => cfg.seed = one_count(key, value)?,
                "threads" => cfg.threads = one_count(key, value)? as usize,
                "bootstrap" => cfg.bootstrap = one_count(key, value)? as usize,
                "output" => cfg.output = Some(PathBuf::from(value)),
                "trajectory_csv" => cfg.trajectory_csv = Some(PathBuf::from(value)),
                other => return Err(Error::Config(format!("line {}: unknown key `{other}`", ln + 1))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiments.is_empty() {
            return Err(Error::Config("no experiment given".into()));
        }
        if self.p.is_empty() {
            return Err(Error::Config("empty p grid".into()));
        }
        if let Some(p) = self.p.iter().find(|p| !(0.0..=MAX_P).contains(*p) || p.is_nan()) {
            return Err(Error::Config(format!("p = {p} outside [0, {MAX_P}]")));
        }
        if self.trajectories == 0 {
            return Err(Error::Config("trajectories must be positive".into()));
        }
        if self.shots.is_empty() || self.shots.contains(&0) {
            return Err(Error::Config("shots must be a list of positive counts".into()));
        }
        if self.bootstrap < 2 {
            return Err(Error::Config("bootstrap needs at least 2 resamples".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be positive".into()));
        }
        Ok(())
    }
}

/// One row of the results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub p: f64,
    pub scheme: Scheme,
    pub shots: u64,
    pub accept_rate_msd: f64,
    pub accept_rate_detect: f64,
    pub epsilon_true: f64,
    pub epsilon_hat: f64,
    pub std_hat: f64,
    pub seed: u64,
}

pub fn write_results_csv<W: Write>(rows: &[ResultRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_results_csv<R: Read>(r: R) -> Result<Vec<ResultRow>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(|e| Error::Config(format!("results file: {e}"))))
        .collect()
}

/// Independent multinomial groups: each entry lists category counts.
type Tallies = Vec<Vec<u64>>;

fn multinomial<R: Rng + ?Sized>(n: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut left = n;
    let mut mass = 1.0;
    let mut out = Vec::with_capacity(probs.len());
    for (i, &p) in probs.iter().enumerate() {
        if i + 1 == probs.len() {
            out.push(left);
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = if left == 0 || q == 0.0 {
            0
        } else {
            Binomial::new(left, q).expect("valid binomial").sample(rng)
        };
        out.push(k);
        left -= k;
        mass -= p;
    }
    out
}

/// Sample standard deviation of `stat` over multinomial resamples of each
/// group at its observed frequencies. Resamples where `stat` is undefined are
/// skipped.
pub fn bootstrap_std<R: Rng + ?Sized>(
    tallies: &[Vec<u64>],
    resamples: usize,
    rng: &mut R,
    stat: impl Fn(&[Vec<u64>]) -> Option<f64>,
) -> f64 {
    let freqs: Vec<(u64, Vec<f64>)> = tallies
        .iter()
        .map(|g| {
            let n: u64 = g.iter().sum();
            (n, g.iter().map(|&c| if n > 0 { c as f64 / n as f64 } else { 0.0 }).collect())
        })
        .collect();
    let values: Vec<f64> = (0..resamples)
        .filter_map(|_| {
            let t: Tallies = freqs.iter().map(|(n, f)| multinomial(*n, f, rng)).collect();
            stat(&t)
        })
        .collect();
    if values.len() < 2 {
        return f64::NAN;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Exact description of one benchmarking unit at one `p`, ready for shot
/// sampling.
enum Unit {
    /// A copy (tomography) or a round of two copies (Bell) with reject,
    /// zero and one probabilities.
    Copy { scheme: Scheme, outcomes: CopyOutcomes },
    /// Single-copy witness hit probability `λ`, with `ε̂ = dim · λ̂`.
    Witness { hit: f64, dim: usize },
    /// Logical Pauli tomography: per-Pauli `-1` probabilities.
    Paulis { paulis: Vec<PauliOperator>, minus: Vec<f64>, ideal: DenseState },
}

struct PointModel {
    p: f64,
    accept_msd: f64,
    accept_detect: f64,
    epsilon_true: f64,
    unit: Unit,
}

impl Unit {
    fn scheme(&self) -> Scheme {
        match self {
            Unit::Copy { scheme, .. } => *scheme,
            Unit::Witness { .. } => Scheme::SingleCopy,
            Unit::Paulis { .. } => Scheme::Tomography,
        }
    }

    /// Counts for `shots` accepted copies. Rejected copies only enter
    /// through the reported acceptance rate.
    fn sample<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Result<Tallies> {
        match self {
            Unit::Copy { scheme, outcomes } => {
                let units = if *scheme == Scheme::Bell { shots / 2 } else { shots };
                if units == 0 {
                    return Err(Error::Capacity("a Bell round needs two shots".into()));
                }
                if outcomes.accept() <= 0.0 {
                    return Err(Error::Capacity("no benchmarking unit passes error detection".into()));
                }
                let one = outcomes.one / outcomes.accept();
                Ok(vec![multinomial(units, &[1.0 - one, one], rng)])
            }
            Unit::Witness { hit, .. } => Ok(vec![multinomial(shots, &[1.0 - hit, *hit], rng)]),
            Unit::Paulis { minus, .. } => {
                let k = minus.len() as u64;
                if shots < k {
                    return Err(Error::Capacity(format!("Pauli tomography needs at least {k} shots")));
                }
                Ok(minus
                    .iter()
                    .enumerate()
                    .map(|(i, &q)| {
                        let n = shots / k + u64::from((i as u64) < shots % k);
                        multinomial(n, &[1.0 - q, q], rng)
                    })
                    .collect())
            }
        }
    }

    /// Raw (unclamped) estimate from `[zero, one]` tallies.
    fn estimate(&self, t: &[Vec<u64>]) -> Option<f64> {
        match self {
            Unit::Copy { scheme, .. } => {
                let (zero, one) = (t[0][0], t[0][1]);
                Some(match scheme {
                    Scheme::Bell => bell_estimate_from_counts(one, zero + one).epsilon_raw,
                    _ => tomography_from_counts(one, zero + one).epsilon_raw,
                })
            }
            Unit::Witness { dim, .. } => {
                single_copy_estimate(&[(t[0][1], t[0][0] + t[0][1])], &[*dim]).ok().map(|e| e.epsilon_raw)
            }
            Unit::Paulis { paulis, ideal, .. } => {
                let tallies: Vec<PauliTally> = paulis
                    .iter()
                    .zip(t)
                    .map(|(p, g)| PauliTally { pauli: p.clone(), minus: g[1], shots: g[0] + g[1] })
                    .collect();
                pauli_tomography_estimate(ideal, &tallies).ok().map(|e| e.epsilon_raw)
            }
        }
    }
}

fn twirled_witness_probability(logical: &DensityMatrix) -> Result<f64> {
    let twirled = MagicState::Ccz.group()?.twirl(logical)?;
    let witness = DenseState::from_circuit(&Circuit::parse("QUBITS 3\nX 2\nH 2")?)?;
    Ok(twirled.fidelity_pure(&witness))
}

fn c832_models(kind: ExperimentKind, grid: &[f64]) -> Result<Vec<PointModel>> {
    let ideal = MagicState::Ccz.state();
    let paulis: Vec<PauliOperator> = PauliOperator::all_hermitian(3).into_iter().filter(|p| !p.is_identity_word() && p.phase() == 0).collect();
    grid.iter()
        .map(|&p| {
            let pt = c832_point(p)?;
            let detect = pt.in_code;
            let unit = match kind {
                ExperimentKind::C832SingleCopy => {
                    Unit::Witness { hit: twirled_witness_probability(&pt.logical)?, dim: 7 }
                }
                _ => Unit::Paulis {
                    minus: paulis.iter().map(|q| 0.5 * (1.0 - pt.logical.expectation(q).re)).collect(),
                    paulis: paulis.clone(),
                    ideal: ideal.clone(),
                },
            };
            Ok(PointModel { p, accept_msd: pt.accept, accept_detect: detect, epsilon_true: pt.epsilon_true, unit })
        })
        .collect()
}

/// Everything `run_experiment` produces.
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub trajectories: Vec<TrajectoryRecord>,
}

/// Stream index of row sampling, kept apart from trajectory streams.
const ROW_STREAM: u64 = 1 << 40;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut models: Vec<(ExperimentKind, Vec<PointModel>)> = Vec::new();
    let mut trajectories = Vec::new();
    let pool = if cfg.experiments.iter().any(|k| k.uses_factory()) {
        Some(run_factory_pool(&cfg.p, cfg.trajectories, cfg.seed, cfg.threads)?)
    } else {
        None
    };
    if let (Some(pool), Some(_)) = (&pool, &cfg.trajectory_csv) {
        trajectories.extend(pool.records.iter().map(|r| TrajectoryRecord {
            id: r.id,
            seed: r.seed,
            accepted: r.weight > 0.0,
            bits: Vec::new(),
            aux_flags: r.faults as u64,
        }));
    }
    if cfg.trajectory_csv.is_some() && cfg.experiments.iter().any(|k| k.uses_c832()) {
        let c = c832_noisy_circuit();
        let base = trajectories.len() as u64;
        for (i, &p) in cfg.p.iter().enumerate() {
            let noise = NoiseModel::new(p)?;
            for t in 0..cfg.trajectories as u64 {
                let id = base + i as u64 * cfg.trajectories as u64 + t;
                trajectories.push(simulate_trajectory(&c, &noise, Backend::Dense, cfg.seed, id)?);
            }
        }
    }

    for &kind in &cfg.experiments {
        let points = match kind {
            ExperimentKind::SteaneTomography | ExperimentKind::SteaneBell => {
                let pool = pool.as_ref().expect("pool built for factory experiments");
                pool.points
                    .iter()
                    .map(|pt| {
                        let (scheme, outcomes) = if kind == ExperimentKind::SteaneBell {
                            (Scheme::Bell, pt.bell)
                        } else {
                            (Scheme::Tomography, pt.tomography)
                        };
                        PointModel {
                            p: pt.p,
                            accept_msd: pt.accept_msd,
                            accept_detect: outcomes.accept(),
                            epsilon_true: pt.epsilon_true,
                            unit: Unit::Copy { scheme, outcomes },
                        }
                    })
                    .collect()
            }
            ExperimentKind::C832Tomography | ExperimentKind::C832SingleCopy => c832_models(kind, &cfg.p)?,
            ExperimentKind::ProtocolUnit => {
                let mut v = Vec::new();
                for &eps in &cfg.p {
                    let (tomo, bell) = protocol_unit_outcomes(eps)?;
                    for (scheme, outcomes) in [(Scheme::Tomography, tomo), (Scheme::Bell, bell)] {
                        v.push(PointModel {
                            p: eps,
                            accept_msd: 1.0,
                            accept_detect: 1.0,
                            epsilon_true: eps,
                            unit: Unit::Copy { scheme, outcomes },
                        });
                    }
                }
                v
            }
        };
        models.push((kind, points));
    }

    let mut rows = Vec::new();
    let mut stream = ROW_STREAM;
    for (_, points) in &models {
        for pm in points {
            for &shots in &cfg.shots {
                let seed = trajectory_seed(cfg.seed, stream);
                let mut rng: ChaCha8Rng = trajectory_rng(cfg.seed, stream);
                stream += 1;
                let t = pm.unit.sample(shots, &mut rng)?;
                let raw = pm.unit.estimate(&t).ok_or_else(|| {
                    Error::Numerical(format!("estimator undefined at p = {} with {shots} shots", pm.p))
                })?;
                let std_hat = bootstrap_std(&t, cfg.bootstrap, &mut rng, |x| pm.unit.estimate(x));
                rows.push(ResultRow {
                    p: pm.p,
                    scheme: pm.unit.scheme(),
                    shots,
                    accept_rate_msd: pm.accept_msd,
                    accept_rate_detect: pm.accept_detect,
                    epsilon_true: pm.epsilon_true,
                    epsilon_hat: raw.clamp(0.0, 1.0),
                    std_hat,
                    seed,
                });
            }
        }
    }
    Ok(ExperimentOutput { rows, trajectories })
}

/// Runs the experiment and writes the results (and trajectories, when
/// requested) to the configured paths. Results go to `fallback` when no
/// output path is set.
pub fn run_and_write<W: Write>(cfg: &ExperimentConfig, fallback: W) -> Result<ExperimentOutput> {
    let out = run_experiment(cfg)?;
    match &cfg.output {
        Some(path) => write_results_csv(&out.rows, std::fs::File::create(path)?)?,
        None => write_results_csv(&out.rows, fallback)?,
    }
    if let Some(path) = &cfg.trajectory_csv {
        write_trajectory_csv(&out.trajectories, std::io::BufWriter::new(std::fs::File::create(path)?))?;
    }
    Ok(out)
}

/// `y ≈ a x^b` fitted on logs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    /// RMS of the log residuals.
    pub residual: f64,
}

impl FitResult {
    pub fn eval(&self, x: f64) -> f64 {
        self.a * x.powf(self.b)
    }
}

/// Least squares on `(ln x, ln y)`. Repeated `x` values simply enter the sum
/// separately, so the fit passes through their log-mean.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!("power-law fit needs at least 3 points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::InvalidArgument(format!("power-law fit needs positive data, got ({x}, {y})")));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument("power-law fit needs at least two distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let ln_a = my - b * mx;
    let residual = (lx.iter().zip(&ly).map(|(x, y)| (y - ln_a - b * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(FitResult { a: ln_a.exp(), b, residual })
}

/// Copies needed for `Std[ε̂] = r ε` under a fit `Std = a N^b`:
/// `N = ⌈(r ε / a)^{1/b}⌉`.
pub fn overhead_from_fit(fit: &FitResult, r: f64, epsilon: f64) -> Result<u64> {
    if !(fit.b < 0.0) || !(fit.a > 0.0) {
        return Err(Error::InvalidArgument(format!("need a > 0 and b < 0, got a = {}, b = {}", fit.a, fit.b)));
    }
    if !(r > 0.0 && epsilon > 0.0) {
        return Err(Error::InvalidArgument("r and epsilon must be positive".into()));
    }
    let target = r * epsilon;
    if target >= fit.a {
        return Err(Error::InvalidArgument(format!("target {target} is not below the prefactor {}", fit.a)));
    }
    let n = (target / fit.a).powf(1.0 / fit.b);
    if !n.is_finite() || n >= u64::MAX as f64 {
        return Err(Error::Capacity(format!("required sample size {n:e} does not fit in 64 bits")));
    }
    // Guard against `x.0000000001` from rounding in the power.
    let rounded = n.round();
    Ok(if (n - rounded).abs() <= 1e-9 * n { rounded as u64 } else { n.ceil() as u64 })
}

/// Fits `std_hat` against `shots` for every run of consecutive rows sharing
/// `(scheme, p)`. Runs with fewer than three rows report the fit error.
pub fn fit_results(rows: &[ResultRow]) -> Vec<(Scheme, f64, Result<FitResult>)> {
    rows.chunk_by(|a, b| a.scheme == b.scheme && a.p == b.p)
        .map(|run| {
            let pts: Vec<(f64, f64)> = run.iter().map(|r| (r.shots as f64, r.std_hat)).collect();
            (run[0].scheme, run[0].p, fit_power_law(&pts))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (1..6).map(|i| (i as f64, 2.0 * (i as f64).powi(3))).collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.a - 2.0).abs() < 1e-9 && (f.b - 3.0).abs() < 1e-9);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn noisy_inverse_square_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let normal = rand_distr::Normal::new(0.0, 0.01).unwrap();
        let pts: Vec<(f64, f64)> = (0..12)
            .map(|i| {
                let n = 10f64.powf(2.0 + i as f64 / 2.0);
                (n, 0.7 * n.powf(-0.5) * (1.0 + normal.sample(&mut rng)))
            })
            .collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.b + 0.5).abs() < 0.02, "b = {}", f.b);
    }

    #[test]
    fn repeated_x_uses_log_mean() {
        let pts = [(1.0, 1.0), (2.0, 2.0), (2.0, 8.0), (4.0, 16.0)];
        let f = fit_power_law(&pts).unwrap();
        let g = fit_power_law(&[(1.0, 1.0), (2.0, 4.0), (2.0, 4.0), (4.0, 16.0)]).unwrap();
        assert!((f.a - g.a).abs() < 1e-12 && (f.b - g.b).abs() < 1e-12);
        assert!(fit_power_law(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, -1.0), (3.0, 1.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn overhead_examples() {
        let f = FitResult { a: 1.0, b: -0.5, residual: 0.0 };
        assert_eq!(overhead_from_fit(&f, 0.1, 0.01).unwrap(), 1_000_000);
        let n1 = overhead_from_fit(&f, 0.1, 0.01).unwrap();
        let n2 = overhead_from_fit(&f, 0.2, 0.01).unwrap();
        assert_eq!(n1, 4 * n2);
        let g = FitResult { a: 0.37, b: -0.52, residual: 0.0 };
        let n = overhead_from_fit(&g, 0.5, 0.003).unwrap() as f64;
        assert!((g.eval(n) / (0.5 * 0.003) - 1.0).abs() < 1e-3);
        assert!(overhead_from_fit(&FitResult { a: 1.0, b: 0.5, residual: 0.0 }, 0.1, 0.01).is_err());
        assert!(overhead_from_fit(&f, 10.0, 0.5).is_err());
    }

    #[test]
    fn config_parsing() {
        let cfg = ExperimentConfig::parse(
            "# demo\nexperiment = protocol-unit, c832-single-copy\np = 0.01,0.02\nshots = 1e4, 20000\nseed=9\nbootstrap = 50\n",
        )
        .unwrap();
        assert_eq!(cfg.experiments, vec![ExperimentKind::ProtocolUnit, ExperimentKind::C832SingleCopy]);
        assert_eq!(cfg.shots, vec![10_000, 20_000]);
        assert_eq!(cfg.seed, 9);
        for bad in ["experiment = nope\np = 0.01", "experiment = protocol-unit\np = 0.5", "experiment = protocol-unit", "p = 0.01\nfoo = 1\nexperiment = protocol-unit", "experiment = protocol-unit\np = 0.01\nshots = 0"] {
            assert!(matches!(ExperimentConfig::parse(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn multinomial_conserves_and_matches_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let probs = [0.2, 0.5, 0.3];
        let mut acc = [0u64; 3];
        for _ in 0..200 {
            let d = multinomial(1000, &probs, &mut rng);
            assert_eq!(d.iter().sum::<u64>(), 1000);
            for (a, x) in acc.iter_mut().zip(&d) {
                *a += x;
            }
        }
        for (a, p) in acc.iter().zip(probs) {
            assert!((*a as f64 / 200_000.0 - p).abs() < 0.01);
        }
    }

    #[test]
    fn bootstrap_matches_binomial_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 10_000u64;
        let t = vec![vec![0, n - 300, 300]];
        let s = bootstrap_std(&t, 1000, &mut rng, |x| Some(x[0][2] as f64 / n as f64));
        let exact = (0.03f64 * 0.97 / n as f64).sqrt();
        assert!((s / exact - 1.0).abs() < 0.1, "{s} vs {exact}");
    }

    #[test]
    fn protocol_unit_rows_are_reproducible() {
        let cfg = ExperimentConfig::parse("experiment = protocol-unit\np = 0, 0.05\nshots = 20000\nbootstrap = 100\nseed = 3").unwrap();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        let mut ca = Vec::new();
        let mut cb = Vec::new();
        write_results_csv(&a.rows, &mut ca).unwrap();
        write_results_csv(&b.rows, &mut cb).unwrap();
        assert_eq!(ca, cb);
        assert_eq!(a.rows.len(), 4);
        let bell0 = &a.rows[1];
        assert_eq!((bell0.scheme, bell0.epsilon_hat, bell0.accept_rate_msd), (Scheme::Bell, 0.0, 1.0));
        assert!(a.rows[0].epsilon_hat < 0.03);
        let back = read_results_csv(ca.as_slice()).unwrap();
        assert_eq!(back, a.rows);
    }
}
