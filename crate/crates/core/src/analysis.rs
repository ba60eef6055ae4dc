//! Closed-form resource formulas for the SAT circuit, side by side with what
//! the compiler actually emitted.
//!
//! * `N1 = ⌈log₂ n⌉ + 2mn` — input size;
//! * `N2 = 4mn − 1` — dust bits;
//! * `N3 = 11mn − 3m` — gate steps.
//!
//! The formulas are upper bounds. They assume every clause has at most `n`
//! literals; reports for formulas outside that regime carry a warning.

use serde::Serialize;

use crate::compiler::CompilationArtifact;
use crate::formula::Formula;

/// `⌈log₂ n⌉ + 2mn`.
pub fn n1(n: usize, m: usize) -> u64 {
    let log = if n <= 1 {
        0
    } else {
        u64::from(usize::BITS - (n - 1).leading_zeros())
    };
    log + 2 * (m as u64) * (n as u64)
}

/// `4mn − 1`; zero when `m = 0`.
pub fn n2(n: usize, m: usize) -> u64 {
    (4 * (m as u64) * (n as u64)).saturating_sub(1)
}

/// `11mn − 3m`.
pub fn n3(n: usize, m: usize) -> u64 {
    let (n, m) = (n as u64, m as u64);
    11 * m * n - 3 * m
}

/// The step tally behind `N3` before simplification:
/// `1 + 3mn + 4m(2n − 1) + m − 1` (Hadamard layer, literal substitution,
/// clause ORs, clause AND).
pub fn n3_tally(n: usize, m: usize) -> i64 {
    let (n, m) = (n as i64, m as i64);
    1 + 3 * m * n + 4 * m * (2 * n - 1) + m - 1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplexityReport {
    pub n: usize,
    pub m: usize,
    pub n1_input_size: u64,
    pub n2_dust_bound: u64,
    pub n3_step_bound: u64,
    pub actual_dust: usize,
    pub actual_gates: usize,
    /// Every clause has at most `n` literals.
    pub in_regime: bool,
    pub within_bounds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ComplexityReport {
    pub fn new(n: usize, m: usize, actual_dust: usize, actual_gates: usize, in_regime: bool) -> Self {
        let n2_dust_bound = n2(n, m);
        let n3_step_bound = n3(n, m);
        let within_bounds =
            actual_dust as u64 <= n2_dust_bound && actual_gates as u64 <= n3_step_bound;
        let warning = (!in_regime).then(|| {
            "a clause has more than n literals; the bounds assume |C_j| <= n".to_string()
        });
        ComplexityReport {
            n,
            m,
            n1_input_size: n1(n, m),
            n2_dust_bound,
            n3_step_bound,
            actual_dust,
            actual_gates,
            in_regime,
            within_bounds,
            warning,
        }
    }

    pub fn for_compilation(formula: &Formula, artifact: &CompilationArtifact) -> Self {
        Self::new(
            formula.num_vars(),
            formula.num_clauses(),
            artifact.dust_used,
            artifact.gate_count,
            formula.max_clause_len() <= formula.num_vars(),
        )
    }
}
