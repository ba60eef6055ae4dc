//! Synthesis of the formula circuit `U_f`.
//!
//! Three phases, with dust qubits allocated in first-use order:
//!
//! 1. literal load: every literal occurrence gets a fresh dust qubit `d`,
//!    `CNOT(var -> d)`, followed by `NOT(d)` when the literal is negated;
//! 2. clause OR: loaded qubits are folded left to right, `a ∨ b` landing in a
//!    fresh qubit `c` through `CNOT(a->c) CNOT(b->c) CCNOT(a,b->c)`;
//! 3. conjunction: clause outputs are folded with CCNOT, the last fold
//!    targeting the result qubit (a single clause is copied with CNOT).
//!
//! Variable qubits are only ever used as controls. Dust is left in place.

use thiserror::Error;

use crate::circuit::{Circuit, Gate, QubitLayout};
use crate::formula::{Clause, Formula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("formula has no clauses; the constant-true case is handled by the pipeline")]
    NoClauses,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompilationArtifact {
    pub circuit: Circuit,
    pub dust_used: usize,
    pub gate_count: usize,
    /// Dust qubits spent on each clause (loads plus OR folds).
    pub per_clause_dust: Vec<usize>,
}

/// Dust for one clause of `k` literals: `k` loads and `k - 1` OR folds.
fn clause_dust(k: usize) -> usize {
    2 * k - 1
}

/// Dust qubits [`compile`] will allocate for `formula`.
pub fn predict_dust(formula: &Formula) -> usize {
    let m = formula.num_clauses();
    if m == 0 {
        return 0;
    }
    let loads: usize = formula.clauses().iter().map(Clause::len).sum();
    let folds: usize = formula
        .clauses()
        .iter()
        .map(|c| c.len().saturating_sub(1))
        .sum();
    loads + folds + m.saturating_sub(2)
}

/// Gates [`compile`] will emit for `formula`.
pub fn predict_gates(formula: &Formula) -> usize {
    if formula.num_clauses() == 0 {
        return 0;
    }
    let per_clause: usize = formula
        .clauses()
        .iter()
        .map(|c| {
            let negations = c.literals().iter().filter(|l| l.is_negated()).count();
            c.len() + negations + 3 * (c.len() - 1)
        })
        .sum();
    per_clause + formula.num_clauses().max(2) - 1
}

pub fn compile(formula: &Formula) -> Result<CompilationArtifact, CompileError> {
    let m = formula.num_clauses();
    if m == 0 {
        return Err(CompileError::NoClauses);
    }
    let n = formula.num_vars();
    let dust = predict_dust(formula);
    let layout = QubitLayout::new(n, dust);

    // Each clause owns a contiguous block of dust, fixed up front; the
    // conjunction intermediates follow the last clause block.
    let per_clause_dust: Vec<usize> = formula
        .clauses()
        .iter()
        .map(|c| clause_dust(c.len()))
        .collect();
    let mut offset = n;
    let mut gates = Vec::with_capacity(predict_gates(formula));
    let mut outputs = Vec::with_capacity(m);
    for (clause, &size) in formula.clauses().iter().zip(&per_clause_dust) {
        outputs.push(emit_clause(clause, &layout, offset, &mut gates));
        offset += size;
    }

    let result = layout.result_index();
    if m == 1 {
        gates.push(Gate::cnot(outputs[0], result));
    } else {
        let mut acc = outputs[0];
        for (i, &out) in outputs.iter().enumerate().skip(1) {
            let target = if i == m - 1 {
                result
            } else {
                let d = offset;
                offset += 1;
                d
            };
            gates.push(Gate::ccnot(acc, out, target));
            acc = target;
        }
    }
    debug_assert_eq!(offset, n + dust);

    let gate_count = gates.len();
    Ok(CompilationArtifact {
        circuit: Circuit::from_parts_unchecked(layout, gates),
        dust_used: dust,
        gate_count,
        per_clause_dust,
    })
}

/// Emit one clause into dust starting at `first`; returns the qubit holding
/// the clause value.
fn emit_clause(clause: &Clause, layout: &QubitLayout, first: usize, gates: &mut Vec<Gate>) -> usize {
    let mut next = first;
    let mut fresh = || {
        let d = next;
        next += 1;
        d
    };
    let loaded: Vec<usize> = clause
        .literals()
        .iter()
        .map(|lit| {
            let d = fresh();
            gates.push(Gate::cnot(layout.var_qubit(lit.variable()), d));
            if lit.is_negated() {
                gates.push(Gate::not(d));
            }
            d
        })
        .collect();
    let mut acc = loaded[0];
    for &b in &loaded[1..] {
        let c = fresh();
        gates.push(Gate::cnot(acc, c));
        gates.push(Gate::cnot(b, c));
        gates.push(Gate::ccnot(acc, b, c));
        acc = c;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Assignment, Formula};

    fn worked() -> Formula {
        Formula::from_dimacs_clauses(3, &[&[1], &[2, 3], &[1, -3], &[-1, -2, 3]]).unwrap()
    }

    /// Classical truth table of the circuit, read off the result bit.
    fn result_bits(f: &Formula) -> Vec<bool> {
        let art = compile(f).unwrap();
        let q = art.circuit.layout().total();
        let n = f.num_vars();
        (0..1u64 << n)
            .map(|a| {
                let out = art.circuit.permute_index(a << (q - n));
                assert_eq!(out >> (q - n), a, "variable register changed");
                out & 1 == 1
            })
            .collect()
    }

    #[test]
    fn worked_example_truth_table() {
        let bits = result_bits(&worked());
        let sat: Vec<u64> = (0..8).filter(|&i| bits[i as usize]).collect();
        assert_eq!(sat, vec![0b101, 0b111]);
    }

    #[test]
    fn worked_example_counts() {
        let art = compile(&worked()).unwrap();
        // loads 1+2+2+3, folds 0+1+1+2, conjunction intermediates 4-2
        assert_eq!(predict_dust(&worked()), 14);
        assert_eq!(art.dust_used, 14);
        assert_eq!(art.circuit.layout().n_dust(), 14);
        assert_eq!(art.per_clause_dust, vec![1, 3, 3, 5]);
        // 8 loads + 3 negations + 4 folds * 3 + 3 conjunction CCNOTs
        assert_eq!(art.gate_count, 26);
        assert_eq!(art.gate_count, art.circuit.len());
        assert!(art.circuit.preserves_variables());
    }

    #[test]
    fn single_unit_clause() {
        let f = Formula::from_dimacs_clauses(1, &[&[1]]).unwrap();
        let art = compile(&f).unwrap();
        assert_eq!(art.dust_used, 1);
        assert_eq!(predict_dust(&f), 1);
        assert_eq!(art.circuit.gates(), &[Gate::cnot(0, 1), Gate::cnot(1, 2)]);
        assert_eq!(result_bits(&f), vec![false, true]);
    }

    #[test]
    fn two_clauses_fold_straight_into_result() {
        let f = Formula::from_dimacs_clauses(2, &[&[1], &[-2]]).unwrap();
        let art = compile(&f).unwrap();
        assert_eq!(art.dust_used, 2);
        assert_eq!(art.circuit.gates().last(), Some(&Gate::ccnot(2, 3, 4)));
        assert_eq!(result_bits(&f), vec![false, false, true, false]);
    }

    #[test]
    fn tautology_compiles_normally() {
        let f = Formula::from_dimacs_clauses(1, &[&[1, -1]]).unwrap();
        assert_eq!(result_bits(&f), vec![true, true]);
    }

    #[test]
    fn no_clauses_is_rejected() {
        let f = Formula::new(2, vec![]).unwrap();
        assert_eq!(compile(&f), Err(CompileError::NoClauses));
        assert_eq!(predict_dust(&f), 0);
    }

    #[test]
    fn dust_is_allocated_in_first_use_order() {
        let art = compile(&worked()).unwrap();
        let layout = *art.circuit.layout();
        let mut high_water = layout.n_vars();
        for g in art.circuit.gates() {
            let t = g.target();
            if t != layout.result_index() && t >= high_water {
                assert_eq!(t, high_water, "dust qubit skipped");
                high_water += 1;
            }
        }
        assert_eq!(high_water, layout.n_vars() + layout.n_dust());
    }

    #[test]
    fn exhaustive_small_formulas() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let n = 1 + (rand::Rng::gen_range(&mut rng, 0..4));
            let m = 1 + (rand::Rng::gen_range(&mut rng, 0..5));
            let f = crate::formula::random_formula(&mut rng, n, m, n);
            let bits = result_bits(&f);
            for (i, &b) in bits.iter().enumerate() {
                let a = Assignment::from_index(n, i as u64);
                assert_eq!(b, f.eval(&a).unwrap());
            }
            assert_eq!(compile(&f).unwrap().gate_count, predict_gates(&f));
        }
    }
}
