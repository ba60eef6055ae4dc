//! CNF formulas, DIMACS parsing, classical evaluation and the brute-force
//! model counter used as a verification oracle.
//!
//! Variables are numbered from 1 as in DIMACS. Assignments are indexed in
//! tensor order: for an `n`-variable formula, assignment index `i` sets
//! `x_k` to bit `n - k` of `i`, so `x_1` is the most significant bit.

use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Largest variable count the brute-force counter accepts by default.
pub const DEFAULT_ORACLE_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("variable index must be at least 1")]
    ZeroVariable,
    #[error("empty clause")]
    EmptyClause,
    #[error("duplicate literal {0} in clause")]
    DuplicateLiteral(Literal),
    #[error("formula must have at least one variable")]
    NoVariables,
    #[error("literal {literal} refers to variable beyond n = {n}")]
    VariableOutOfRange { literal: Literal, n: usize },
    #[error("assignment has {got} values, formula has {expected} variables")]
    AssignmentLength { expected: usize, got: usize },
    #[error("brute-force enumeration capped at {cap} variables, formula has {n}")]
    OracleCapExceeded { n: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed problem line (expected `p cnf <vars> <clauses>`)")]
    MalformedHeader { line: usize },
    #[error("line {line}: second problem line")]
    DuplicateHeader { line: usize },
    #[error("no `p cnf` problem line found")]
    MissingHeader,
    #[error("line {line}: clause data before the problem line")]
    ClauseBeforeHeader { line: usize },
    #[error("line {line}: invalid literal token `{token}`")]
    InvalidToken { line: usize, token: String },
    #[error("line {line}: zero variable index in literal `{token}`")]
    ZeroVariable { line: usize, token: String },
    #[error("line {line}: literal {literal} exceeds declared variable count {n}")]
    LiteralOutOfRange { line: usize, literal: i64, n: usize },
    #[error("line {line}: empty clause")]
    EmptyClause { line: usize },
    #[error("line {line}: duplicate literal {literal} in clause")]
    DuplicateLiteral { line: usize, literal: i64 },
    #[error("line {line}: clause not terminated by 0")]
    UnterminatedClause { line: usize },
    #[error("line {line}: header declares {declared} clauses, found {found}")]
    ClauseCountMismatch {
        line: usize,
        declared: usize,
        found: usize,
    },
    #[error("line {line}: header declares zero variables")]
    NoVariables { line: usize },
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::MissingHeader => None,
            ParseError::MalformedHeader { line }
            | ParseError::DuplicateHeader { line }
            | ParseError::ClauseBeforeHeader { line }
            | ParseError::InvalidToken { line, .. }
            | ParseError::ZeroVariable { line, .. }
            | ParseError::LiteralOutOfRange { line, .. }
            | ParseError::EmptyClause { line }
            | ParseError::DuplicateLiteral { line, .. }
            | ParseError::UnterminatedClause { line }
            | ParseError::ClauseCountMismatch { line, .. }
            | ParseError::NoVariables { line } => Some(*line),
        }
    }
}

/// A variable `x_k` or its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    variable: usize,
    negated: bool,
}

impl Literal {
    pub fn new(variable: usize, negated: bool) -> Result<Self, FormulaError> {
        if variable == 0 {
            return Err(FormulaError::ZeroVariable);
        }
        Ok(Literal { variable, negated })
    }

    pub fn positive(variable: usize) -> Result<Self, FormulaError> {
        Self::new(variable, false)
    }

    pub fn negative(variable: usize) -> Result<Self, FormulaError> {
        Self::new(variable, true)
    }

    /// From a signed DIMACS literal (`-3` is `¬x_3`).
    pub fn from_dimacs(value: i64) -> Result<Self, FormulaError> {
        Self::new(value.unsigned_abs() as usize, value < 0)
    }

    /// 1-based variable index.
    pub fn variable(self) -> usize {
        self.variable
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.variable as i64;
        if self.negated {
            -v
        } else {
            v
        }
    }

    #[inline]
    pub fn eval(self, assignment: &Assignment) -> bool {
        assignment.value(self.variable) != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// Disjunction of literals. Never empty, never holds the same literal twice.
/// A variable may appear in both polarities (a tautology).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Result<Self, FormulaError> {
        if literals.is_empty() {
            return Err(FormulaError::EmptyClause);
        }
        let mut seen = HashSet::with_capacity(literals.len());
        for &lit in &literals {
            if !seen.insert(lit) {
                return Err(FormulaError::DuplicateLiteral(lit));
            }
        }
        Ok(Clause { literals })
    }

    pub fn from_dimacs(values: &[i64]) -> Result<Self, FormulaError> {
        let literals = values
            .iter()
            .map(|&v| Literal::from_dimacs(v))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(literals)
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    /// Always false; clauses are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn is_tautology(&self) -> bool {
        self.literals
            .iter()
            .any(|l| self.literals.contains(&Literal { negated: !l.negated, ..*l }))
    }

    /// Join of the literal truth values.
    pub fn eval(&self, assignment: &Assignment) -> bool {
        self.literals.iter().any(|l| l.eval(assignment))
    }
}

/// Evaluate a clause under an assignment.
pub fn eval_clause(clause: &Clause, assignment: &Assignment) -> bool {
    clause.eval(assignment)
}

/// A CNF instance over variables `x_1..x_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Formula {
    n: usize,
    clauses: Vec<Clause>,
}

impl Formula {
    pub fn new(n: usize, clauses: Vec<Clause>) -> Result<Self, FormulaError> {
        if n == 0 {
            return Err(FormulaError::NoVariables);
        }
        for clause in &clauses {
            if let Some(&literal) = clause.literals.iter().find(|l| l.variable > n) {
                return Err(FormulaError::VariableOutOfRange { literal, n });
            }
        }
        Ok(Formula { n, clauses })
    }

    /// Convenience constructor from signed DIMACS literals.
    pub fn from_dimacs_clauses(n: usize, clauses: &[&[i64]]) -> Result<Self, FormulaError> {
        let clauses = clauses
            .iter()
            .map(|c| Clause::from_dimacs(c))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(n, clauses)
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Largest clause length, 0 for an empty clause list.
    pub fn max_clause_len(&self) -> usize {
        self.clauses.iter().map(Clause::len).max().unwrap_or(0)
    }

    /// Meet of the clause values; the empty clause list evaluates to true.
    pub fn eval(&self, assignment: &Assignment) -> Result<bool, FormulaError> {
        if assignment.len() != self.n {
            return Err(FormulaError::AssignmentLength {
                expected: self.n,
                got: assignment.len(),
            });
        }
        Ok(self.clauses.iter().all(|c| c.eval(assignment)))
    }

    /// Render as DIMACS CNF text.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.n, self.clauses.len());
        for clause in &self.clauses {
            for lit in &clause.literals {
                out.push_str(&lit.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dimacs())
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_dimacs(s)
    }
}

pub fn eval_formula(formula: &Formula, assignment: &Assignment) -> Result<bool, FormulaError> {
    formula.eval(assignment)
}

/// Truth values for `x_1..x_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    /// Decode a tensor-order index: `x_1` is the most significant of `n` bits.
    pub fn from_index(n: usize, index: u64) -> Self {
        let values = (0..n).map(|k| (index >> (n - 1 - k)) & 1 == 1).collect();
        Assignment { values }
    }

    pub fn to_index(&self) -> u64 {
        self.values
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }

    /// Value of the 1-based variable `x_k`.
    #[inline]
    pub fn value(&self, variable: usize) -> bool {
        self.values[variable - 1]
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl From<Vec<bool>> for Assignment {
    fn from(values: Vec<bool>) -> Self {
        Assignment::new(values)
    }
}

/// Count satisfying assignments by exhaustive enumeration.
pub fn brute_force_count(formula: &Formula) -> Result<u64, FormulaError> {
    brute_force_count_capped(formula, DEFAULT_ORACLE_CAP)
}

pub fn brute_force_count_capped(formula: &Formula, cap: usize) -> Result<u64, FormulaError> {
    let n = formula.num_vars();
    if n > cap || n >= 64 {
        return Err(FormulaError::OracleCapExceeded { n, cap });
    }
    // Integer counts per worker, so the total is independent of scheduling.
    let count = (0..1u64 << n)
        .into_par_iter()
        .filter(|&i| {
            let a = Assignment::from_index(n, i);
            formula.clauses.iter().all(|c| c.eval(&a))
        })
        .count();
    Ok(count as u64)
}

/// Parse DIMACS CNF text.
///
/// Accepts `c` comment lines, one `p cnf <n> <m>` line, and clauses of signed
/// literals each terminated by `0` (a clause may span lines). A line starting
/// with `%` ends the input.
pub fn parse_dimacs(text: &str) -> Result<Formula, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut seen: HashSet<Literal> = HashSet::new();
    let mut clause_start = 0;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::DuplicateHeader { line: line_no });
            }
            header = Some(parse_header(line, line_no)?);
            continue;
        }
        let Some((n, _)) = header else {
            return Err(ParseError::ClauseBeforeHeader { line: line_no });
        };
        for token in line.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| ParseError::InvalidToken {
                line: line_no,
                token: token.to_string(),
            })?;
            if value == 0 {
                if token.starts_with('-') {
                    return Err(ParseError::ZeroVariable {
                        line: line_no,
                        token: token.to_string(),
                    });
                }
                if current.is_empty() {
                    return Err(ParseError::EmptyClause { line: line_no });
                }
                clauses.push(Clause {
                    literals: std::mem::take(&mut current),
                });
                seen.clear();
                continue;
            }
            if value.unsigned_abs() as usize > n {
                return Err(ParseError::LiteralOutOfRange {
                    line: line_no,
                    literal: value,
                    n,
                });
            }
            let literal = Literal {
                variable: value.unsigned_abs() as usize,
                negated: value < 0,
            };
            if !seen.insert(literal) {
                return Err(ParseError::DuplicateLiteral {
                    line: line_no,
                    literal: value,
                });
            }
            if current.is_empty() {
                clause_start = line_no;
            }
            current.push(literal);
        }
    }

    let Some((n, m)) = header else {
        return Err(ParseError::MissingHeader);
    };
    if !current.is_empty() {
        return Err(ParseError::UnterminatedClause { line: clause_start });
    }
    if clauses.len() != m {
        return Err(ParseError::ClauseCountMismatch {
            line: last_line,
            declared: m,
            found: clauses.len(),
        });
    }
    Ok(Formula { n, clauses })
}

fn parse_header(line: &str, line_no: usize) -> Result<(usize, usize), ParseError> {
    let malformed = || ParseError::MalformedHeader { line: line_no };
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
        return Err(malformed());
    }
    let n: usize = fields[2].parse().map_err(|_| malformed())?;
    let m: usize = fields[3].parse().map_err(|_| malformed())?;
    if n == 0 {
        return Err(ParseError::NoVariables { line: line_no });
    }
    Ok((n, m))
}

/// Random CNF instance: `m` clauses, each over `1..=max_len` distinct
/// variables with random polarities.
pub fn random_formula<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    m: usize,
    max_len: usize,
) -> Formula {
    assert!(n >= 1, "random_formula needs n >= 1");
    let max_len = max_len.clamp(1, n);
    let mut vars: Vec<usize> = (1..=n).collect();
    let clauses = (0..m)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            vars.shuffle(rng);
            let literals = vars[..len]
                .iter()
                .map(|&v| Literal {
                    variable: v,
                    negated: rng.gen_bool(0.5),
                })
                .collect();
            Clause { literals }
        })
        .collect();
    Formula { n, clauses }
}

/// Random 3-literal clauses over distinct variables (fewer when `n < 3`).
pub fn random_3cnf<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Formula {
    assert!(n >= 1, "random_3cnf needs n >= 1");
    let k = n.min(3);
    let mut vars: Vec<usize> = (1..=n).collect();
    let clauses = (0..m)
        .map(|_| {
            vars.shuffle(rng);
            let literals = vars[..k]
                .iter()
                .map(|&v| Literal {
                    variable: v,
                    negated: rng.gen_bool(0.5),
                })
                .collect();
            Clause { literals }
        })
        .collect();
    Formula { n, clauses }
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: &str = "p cnf 3 4\n1 0\n2 3 0\n1 -3 0\n-1 -2 3 0";

    fn worked() -> Formula {
        parse_dimacs(WORKED).unwrap()
    }

    fn a(bits: &[u8]) -> Assignment {
        Assignment::new(bits.iter().map(|&b| b == 1).collect())
    }

    #[test]
    fn parses_worked_example() {
        let f = worked();
        let expected =
            Formula::from_dimacs_clauses(3, &[&[1], &[2, 3], &[1, -3], &[-1, -2, 3]]).unwrap();
        assert_eq!(f, expected);
        assert_eq!(f.num_vars(), 3);
        assert_eq!(f.num_clauses(), 4);
        assert!(f.clauses()[3].literals()[0].is_negated());
    }

    #[test]
    fn parses_empty_clause_set() {
        let f = parse_dimacs("p cnf 1 0\n").unwrap();
        assert_eq!(f.num_vars(), 1);
        assert_eq!(f.num_clauses(), 0);
    }

    #[test]
    fn rejects_out_of_range_literal() {
        let err = parse_dimacs("p cnf 2 1\n1 -3 0").unwrap_err();
        assert_eq!(
            err,
            ParseError::LiteralOutOfRange {
                line: 2,
                literal: -3,
                n: 2
            }
        );
    }

    #[test]
    fn parse_error_paths_carry_lines() {
        let cases: &[(&str, usize)] = &[
            ("p cnf x 1\n1 0", 1),
            ("p dnf 1 1\n1 0", 1),
            ("p cnf 1 1\n1 0\np cnf 1 1", 3),
            ("1 0\np cnf 1 1", 1),
            ("p cnf 2 1\n1 a 0", 2),
            ("p cnf 2 1\n1 -0", 2),
            ("p cnf 2 2\n1 0\n0", 3),
            ("p cnf 2 1\n1 1 0", 2),
            ("p cnf 2 1\n1\n2", 2),
            ("p cnf 2 2\n1 0", 2),
            ("c hello\np cnf 0 0", 2),
        ];
        for (text, line) in cases {
            let err = parse_dimacs(text).unwrap_err();
            assert_eq!(err.line(), Some(*line), "{text:?} -> {err}");
        }
        assert_eq!(parse_dimacs("c only\n"), Err(ParseError::MissingHeader));
    }

    #[test]
    fn clause_may_span_lines_and_trailer_is_ignored() {
        let f = parse_dimacs("c x\np cnf 3 2\n1 2\n 3 0 -1\n0\n%\n0\n").unwrap();
        assert_eq!(f, Formula::from_dimacs_clauses(3, &[&[1, 2, 3], &[-1]]).unwrap());
    }

    #[test]
    fn validation_rules() {
        assert_eq!(Clause::new(vec![]), Err(FormulaError::EmptyClause));
        assert!(matches!(
            Clause::from_dimacs(&[2, 2]),
            Err(FormulaError::DuplicateLiteral(_))
        ));
        assert!(Clause::from_dimacs(&[2, -2]).unwrap().is_tautology());
        assert_eq!(Literal::new(0, false), Err(FormulaError::ZeroVariable));
        assert!(matches!(
            Formula::from_dimacs_clauses(2, &[&[3]]),
            Err(FormulaError::VariableOutOfRange { n: 2, .. })
        ));
        assert_eq!(Formula::new(0, vec![]), Err(FormulaError::NoVariables));
    }

    #[test]
    fn clause_evaluation() {
        let f = worked();
        assert!(!eval_clause(&f.clauses()[0], &a(&[0, 1, 1])));
        assert!(eval_clause(&f.clauses()[3], &a(&[1, 1, 1])));
        assert!(!eval_clause(&f.clauses()[2], &a(&[0, 0, 1])));
        assert!(!eval_clause(&f.clauses()[2], &a(&[0, 1, 1])));
    }

    #[test]
    fn formula_evaluation() {
        let f = worked();
        assert!(eval_formula(&f, &a(&[1, 0, 1])).unwrap());
        assert!(!eval_formula(&f, &a(&[0, 0, 0])).unwrap());
        let empty = Formula::new(2, vec![]).unwrap();
        for i in 0..4 {
            assert!(empty.eval(&Assignment::from_index(2, i)).unwrap());
        }
        assert!(matches!(
            f.eval(&a(&[1, 0])),
            Err(FormulaError::AssignmentLength { .. })
        ));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_count(&worked()).unwrap(), 2);
        let unit = Formula::from_dimacs_clauses(1, &[&[1]]).unwrap();
        assert_eq!(brute_force_count(&unit).unwrap(), 1);
        let contra = Formula::from_dimacs_clauses(1, &[&[1], &[-1]]).unwrap();
        assert_eq!(brute_force_count(&contra).unwrap(), 0);
        let big = Formula::new(30, vec![]).unwrap();
        assert_eq!(
            brute_force_count(&big),
            Err(FormulaError::OracleCapExceeded { n: 30, cap: 24 })
        );
    }

    #[test]
    fn assignment_index_is_tensor_order() {
        let x = Assignment::from_index(3, 0b101);
        assert_eq!(x.values(), &[true, false, true]);
        assert_eq!(x.to_index(), 0b101);
    }

    #[test]
    fn dimacs_serialization_reparses() {
        let f = worked();
        assert_eq!(parse_dimacs(&f.to_dimacs()).unwrap(), f);
    }
}
