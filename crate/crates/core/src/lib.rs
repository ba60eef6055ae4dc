//! Decide CNF satisfiability by compiling the formula into a reversible
//! NOT/CNOT/CCNOT circuit and simulating it on a uniform superposition of
//! all assignments.
//!
//! The flow is:
//!
//! 1. [`formula`]: parse DIMACS into a [`Formula`];
//! 2. [`compiler`]: synthesize the circuit `U_f` that writes the formula value
//!    into a result qubit, using dust (ancilla) qubits for intermediate values;
//! 3. [`simulator`]: prepare `|0..0>`, apply the Hadamard layer to the
//!    variable qubits, run `U_f`, apply `V_θ` and read `β² = <E>`, the
//!    fraction of satisfying assignments;
//! 4. [`analysis`]: compare dust and gate counts with the closed-form bounds.
//!
//! [`pipeline::run`] ties these together and cross-checks the model count
//! against exhaustive enumeration.
//!
//! Classical simulation is exponential in `n` (one sparse entry per
//! assignment); nothing here makes SAT tractable.

pub mod analysis;
pub mod circuit;
pub mod cli;
pub mod compiler;
pub mod formula;
pub mod pipeline;
pub mod simulator;

pub use analysis::ComplexityReport;
pub use circuit::{Circuit, Gate, GateKind, QubitLayout};
pub use compiler::{compile, predict_dust, CompilationArtifact};
pub use formula::{parse_dimacs, Assignment, Clause, Formula, Literal};
pub use pipeline::{run, PipelineOptions, PipelineReport};
pub use simulator::{decide, DenseState, PolarizedResult, SimConfig, SparseState, Verdict};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] formula::ParseError),
    #[error(transparent)]
    Formula(#[from] formula::FormulaError),
    #[error(transparent)]
    Circuit(#[from] circuit::CircuitError),
    #[error(transparent)]
    Compile(#[from] compiler::CompileError),
    #[error(transparent)]
    Sim(#[from] simulator::SimError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
