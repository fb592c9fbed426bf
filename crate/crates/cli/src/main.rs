use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use magicbench::ancilla::{eliminate_ancillas, PostProcess};
use magicbench::harness::{fit_results, overhead_from_fit, read_results_csv, run_and_write, ExperimentConfig};
use magicbench::protocols::{plan_samples, Scheme};
use magicbench::twirling::{twirl_report, MagicState};
use magicbench::{Circuit, CliffordTableau, Error};

#[derive(Parser)]
#[command(name = "magicbench", version, about = "Benchmark magic-state fidelity with twirled Bell and single-copy schemes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments of a config file and write the results CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit Std[ε̂] = a N^b per (scheme, p) group of a results CSV.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        /// Relative precision for the overhead extrapolation.
        #[arg(long)]
        r: Option<f64>,
        /// Target infidelity for the overhead; defaults to each group's true value.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Sample counts needed for relative precision r at confidence 1 - delta.
    PlanSamples {
        #[arg(long)]
        scheme: Scheme,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        epsilon: f64,
        /// State whose witnesses set the single-copy dimensions.
        #[arg(long, default_value = "CCZ")]
        state: MagicState,
    },
    /// Decide which benchmarking schemes apply to a magic state.
    TwirlCheck {
        #[arg(long)]
        state: MagicState,
        #[arg(long)]
        scheme: Option<Scheme>,
    },
    /// Remove the last m |0> ancillas of a Clifford measurement circuit.
    AncillaReduce {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        ancillas: usize,
        /// Reduced circuit path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Post-processing JSON path; printed to stdout when absent.
        #[arg(long)]
        post: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct FitLine {
    scheme: Scheme,
    p: f64,
    a: f64,
    b: f64,
    residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    overhead: Option<u64>,
}

#[derive(Serialize)]
struct Reduction<'a> {
    qubits: usize,
    ancillas: usize,
    post: &'a PostProcess,
}

fn json<T: Serialize>(v: &T) -> Result<String, Error> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))
}

fn read(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate { config } => {
            let cfg = ExperimentConfig::parse(&read(&config)?)?;
            run_and_write(&cfg, std::io::stdout().lock())?;
        }
        Command::Fit { input, r, epsilon } => {
            let file = std::fs::File::open(&input).map_err(|e| Error::Config(format!("{}: {e}", input.display())))?;
            let rows = read_results_csv(file)?;
            let mut out = Vec::new();
            for (scheme, p, fit) in fit_results(&rows) {
                let fit = fit?;
                let eps = epsilon.or_else(|| rows.iter().find(|x| x.scheme == scheme && x.p == p).map(|x| x.epsilon_true));
                let overhead = match (r, eps) {
                    (Some(r), Some(e)) if e > 0.0 => Some(overhead_from_fit(&fit, r, e)?),
                    _ => None,
                };
                out.push(FitLine { scheme, p, a: fit.a, b: fit.b, residual: fit.residual, overhead });
            }
            println!("{}", json(&out)?);
        }
        Command::PlanSamples { scheme, r, delta, epsilon, state } => {
            let dims = if scheme == Scheme::SingleCopy {
                let rep = twirl_report(state)?;
                if !rep.single_copy {
                    return Err(Error::InvalidArgument(format!("single-copy scheme does not apply to {state:?}")));
                }
                rep.witness_dims
            } else {
                Vec::new()
            };
            println!("{}", json(&plan_samples(r, delta, epsilon, scheme, &dims)?)?);
        }
        Command::TwirlCheck { state, scheme } => {
            let rep = twirl_report(state)?;
            let yes = |b: bool| if b { "Yes" } else { "No" };
            println!("state: {state:?}");
            println!("group order: {}", rep.group_order);
            println!("irrep dims: {:?}", rep.dims);
            if scheme != Some(Scheme::SingleCopy) {
                println!("bell: {}", yes(rep.bell));
            }
            if scheme != Some(Scheme::Bell) {
                println!("single-copy: {}", yes(rep.single_copy));
                for (w, d) in rep.witnesses.iter().zip(&rep.witness_dims) {
                    println!("witness (dim {d}):\n{}", w.trim_end());
                }
            }
        }
        Command::AncillaReduce { input, ancillas, out, post } => {
            let circuit = Circuit::parse(&read(&input)?)?;
            if !circuit.is_clifford() {
                return Err(Error::NotClifford("ancilla elimination needs a Clifford circuit".into()));
            }
            let u = CliffordTableau::from_circuit(&circuit)?;
            let (v, pp) = eliminate_ancillas(&u, ancillas)?;
            let text = v.to_circuit().to_text();
            let desc = json(&Reduction { qubits: v.num_qubits(), ancillas, post: &pp })?;
            match out {
                Some(path) => std::fs::write(path, &text)?,
                None => print!("{text}"),
            }
            match post {
                Some(path) => std::fs::write(path, desc + "\n")?,
                None => println!("{desc}"),
            }
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Capacity(_) => 3,
        Error::Config(_)
        | Error::Parse { .. }
        | Error::InvalidArgument(_)
        | Error::UnknownGate(_)
        | Error::QubitOutOfRange { .. }
        | Error::NotClifford(_)
        | Error::DimensionMismatch(..) => 2,
        Error::Numerical(_) | Error::Io(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("magicbench: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
