//! Magic-state benchmarking toolkit.
//!
//! Pauli and Clifford algebra, dense and hybrid simulators, state twirling,
//! Bell and single-copy fidelity estimators, the Steane and [[8,3,2]] code
//! pipelines, ancilla elimination and the Monte Carlo harness.

pub mod error;
pub mod gf2;
pub mod pauli;
pub mod circuit;
pub mod tableau;
pub mod dense;
pub mod stabilizer;
pub mod noise;
pub mod hybrid;
pub mod trajectory;
pub mod twirling;
pub mod protocols;
pub mod codes;
pub mod pipeline;
pub mod ancilla;
pub mod harness;

pub use circuit::{Circuit, Gate};
pub use error::{Error, Result};
pub use pauli::{pauli_mul, PauliOperator};
pub use tableau::CliffordTableau;
