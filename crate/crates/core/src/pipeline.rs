//! End-to-end run: compile, prepare, Hadamard layer, circuit, `V_θ`, decide,
//! then cross-check against the brute-force counter and, optionally, the
//! dense simulator.

use std::time::Instant;

use serde::Serialize;

use crate::analysis::ComplexityReport;
use crate::circuit::{Circuit, Gate, QubitLayout};
use crate::compiler::compile;
use crate::formula::{brute_force_count_capped, Formula};
use crate::simulator::{
    decide, DenseState, LiteralPolarization, SimConfig, SparseState, DEFAULT_BRANCH_CAP,
    DEFAULT_QUBIT_CAP, DEFAULT_THETA, DENSE_QUBIT_CAP,
};
use crate::Error;

/// Dense and sparse amplitudes must agree to this per entry.
pub const DENSE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub theta: f64,
    /// Cap on `n` for both the simulator and the oracle.
    pub max_vars: usize,
    pub qubit_cap: usize,
    pub oracle: bool,
    pub dense_check: bool,
    /// Also report the unnormalised, literal `V_θ` result factor.
    pub literal_v_theta: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            theta: DEFAULT_THETA,
            max_vars: DEFAULT_BRANCH_CAP,
            qubit_cap: DEFAULT_QUBIT_CAP,
            oracle: true,
            dense_check: false,
            literal_v_theta: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum VerdictLabel {
    Sat,
    Unsat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QubitCounts {
    pub vars: usize,
    pub dust: usize,
    pub result: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OracleCheck {
    Checked { model_count: u64, agrees: bool },
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DenseCheck {
    Checked {
        max_deviation: f64,
        tolerance: f64,
        agrees: bool,
    },
    Skipped {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub verdict: VerdictLabel,
    pub model_count: u64,
    pub beta_squared: f64,
    /// `<v_f|E|v_f>`, before `V_θ`.
    pub expectation_e: f64,
    /// `<V_θ v_f|E|V_θ v_f>`.
    pub expectation_e_polarized: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub qubits: QubitCounts,
    pub gate_count: usize,
    pub branches: usize,
    pub complexity: ComplexityReport,
    pub oracle: OracleCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense_check: Option<DenseCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub literal_v_theta: Option<LiteralPolarization>,
    pub wall_time_ms: f64,
}

impl PipelineReport {
    /// False when a cross-check ran and disagreed.
    pub fn checks_pass(&self) -> bool {
        let oracle_ok = !matches!(self.oracle, OracleCheck::Checked { agrees: false, .. });
        let dense_ok = !matches!(
            self.dense_check,
            Some(DenseCheck::Checked { agrees: false, .. })
        );
        oracle_ok && dense_ok
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub report: PipelineReport,
    pub circuit: Circuit,
    /// `|v_f>`.
    pub final_state: SparseState,
}

/// Circuit used when there are no clauses: the empty conjunction is true, so
/// the result qubit is simply set.
pub fn constant_true_circuit(n: usize) -> Circuit {
    let layout = QubitLayout::new(n, 0);
    Circuit::from_parts_unchecked(layout, vec![Gate::not(layout.result_index())])
}

pub fn run(formula: &Formula, options: &PipelineOptions) -> Result<PipelineOutcome, Error> {
    let start = Instant::now();
    let n = formula.num_vars();

    let (circuit, complexity) = if formula.num_clauses() == 0 {
        let c = constant_true_circuit(n);
        let report = ComplexityReport::new(n, 0, 0, c.len(), true);
        (c, report)
    } else {
        let artifact = compile(formula)?;
        let report = ComplexityReport::for_compilation(formula, &artifact);
        (artifact.circuit, report)
    };
    let layout = *circuit.layout();

    let config = SimConfig {
        qubit_cap: options.qubit_cap,
        branch_cap: options.max_vars,
    };
    let state = SparseState::prepare(layout, &config)?.apply_hadamard_layer();
    state.check_invariants()?;
    let final_state = state.apply_circuit(&circuit)?;
    final_state.check_invariants()?;

    let expectation_e = final_state.measure_projection_e();
    let polarized = final_state.apply_v_theta(options.theta)?;
    let verdict = decide(&polarized)?;

    let oracle = if !options.oracle {
        OracleCheck::Skipped {
            reason: "disabled".into(),
        }
    } else {
        match brute_force_count_capped(formula, options.max_vars) {
            Ok(count) => OracleCheck::Checked {
                model_count: count,
                agrees: count == verdict.model_count,
            },
            Err(e) => OracleCheck::Skipped {
                reason: e.to_string(),
            },
        }
    };

    let dense_check = options.dense_check.then(|| {
        if layout.total() > DENSE_QUBIT_CAP {
            return DenseCheck::Skipped {
                reason: format!(
                    "{} qubits exceed the dense cap of {DENSE_QUBIT_CAP}",
                    layout.total()
                ),
            };
        }
        let mut dense = DenseState::prepare(layout).expect("size checked above");
        dense.apply_hadamard_layer();
        dense.apply_circuit(&circuit).expect("same layout");
        let max_deviation = dense
            .max_deviation(&final_state)
            .expect("dense registers fit a tensor index");
        DenseCheck::Checked {
            max_deviation,
            tolerance: DENSE_TOLERANCE,
            agrees: max_deviation <= DENSE_TOLERANCE,
        }
    });

    let literal_v_theta = options
        .literal_v_theta
        .then(|| final_state.apply_v_theta_literal(options.theta));

    let report = PipelineReport {
        verdict: if verdict.satisfiable {
            VerdictLabel::Sat
        } else {
            VerdictLabel::Unsat
        },
        model_count: verdict.model_count,
        beta_squared: polarized.expectation_e(),
        expectation_e,
        expectation_e_polarized: polarized.expectation_e(),
        alpha: polarized.alpha,
        beta: polarized.beta,
        theta: polarized.theta,
        qubits: QubitCounts {
            vars: layout.n_vars(),
            dust: layout.n_dust(),
            result: 1,
            total: layout.total(),
        },
        gate_count: circuit.len(),
        branches: final_state.len(),
        complexity,
        oracle,
        dense_check,
        literal_v_theta,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(PipelineOutcome {
        report,
        circuit,
        final_state,
    })
}
