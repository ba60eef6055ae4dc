//! Reversible gate IR over NOT, CNOT and CCNOT.
//!
//! Qubits are addressed by absolute position in the register
//! `|x_1 .. x_n, y_1 .. y_l ; f>`: variable qubits first, then dust
//! (ancilla) qubits, then the single result qubit.
//!
//! Two bit conventions appear here:
//! * a *tensor index* (`u64`, only for `q <= 64`) reads the register as a
//!   binary number with qubit 0 as the most significant bit;
//! * *packed words* (`[u64]`, any `q`) store qubit `k` at bit `k % 64` of
//!   word `k / 64`. The sparse simulator uses this form.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("qubit {index} out of range for {qubits} qubits")]
    IndexOutOfRange { index: usize, qubits: usize },
    #[error("gate {gate} uses a qubit more than once")]
    DuplicateIndex { gate: Gate },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Register layout: `n_vars` variable qubits, `n_dust` dust qubits, one
/// result qubit at the end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitLayout {
    n_vars: usize,
    n_dust: usize,
}

impl QubitLayout {
    pub fn new(n_vars: usize, n_dust: usize) -> Self {
        QubitLayout { n_vars, n_dust }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_dust(&self) -> usize {
        self.n_dust
    }

    /// Total qubit count `n + l + 1`.
    pub fn total(&self) -> usize {
        self.n_vars + self.n_dust + 1
    }

    pub fn result_index(&self) -> usize {
        self.total() - 1
    }

    pub fn var_qubit(&self, variable: usize) -> usize {
        debug_assert!(variable >= 1 && variable <= self.n_vars);
        variable - 1
    }

    pub fn dust_qubit(&self, i: usize) -> usize {
        debug_assert!(i < self.n_dust);
        self.n_vars + i
    }

    pub fn is_var_qubit(&self, qubit: usize) -> bool {
        qubit < self.n_vars
    }

    /// Number of `u64` words needed to pack one basis state.
    pub fn words(&self) -> usize {
        self.total().div_ceil(64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Not,
    Cnot,
    Ccnot,
}

/// Permutation gate: flips `target` iff every control is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    Not { target: usize },
    Cnot { control: usize, target: usize },
    Ccnot { controls: [usize; 2], target: usize },
}

impl Gate {
    pub fn not(target: usize) -> Self {
        Gate::Not { target }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn ccnot(c1: usize, c2: usize, target: usize) -> Self {
        Gate::Ccnot {
            controls: [c1, c2],
            target,
        }
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Not { .. } => GateKind::Not,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Ccnot { .. } => GateKind::Ccnot,
        }
    }

    pub fn controls(&self) -> &[usize] {
        match self {
            Gate::Not { .. } => &[],
            Gate::Cnot { control, .. } => std::slice::from_ref(control),
            Gate::Ccnot { controls, .. } => controls,
        }
    }

    pub fn target(&self) -> usize {
        match *self {
            Gate::Not { target } | Gate::Cnot { target, .. } | Gate::Ccnot { target, .. } => {
                target
            }
        }
    }

    /// Check that all indices are distinct and below `qubits`.
    pub fn validate(&self, qubits: usize) -> Result<(), CircuitError> {
        let t = self.target();
        for &i in self.controls().iter().chain(std::iter::once(&t)) {
            if i >= qubits {
                return Err(CircuitError::IndexOutOfRange { index: i, qubits });
            }
        }
        let c = self.controls();
        if c.contains(&t) || (c.len() == 2 && c[0] == c[1]) {
            return Err(CircuitError::DuplicateIndex { gate: *self });
        }
        Ok(())
    }

    /// Image of a tensor index under this gate, for a `qubits`-qubit register.
    #[inline]
    pub fn permute_index(&self, index: u64, qubits: usize) -> u64 {
        let bit = |k: usize| 1u64 << (qubits - 1 - k);
        if self.controls().iter().all(|&c| index & bit(c) != 0) {
            index ^ bit(self.target())
        } else {
            index
        }
    }

    /// Apply in place to a packed basis state.
    #[inline]
    pub fn apply_packed(&self, words: &mut [u64]) {
        #[inline(always)]
        fn get(words: &[u64], k: usize) -> bool {
            (words[k >> 6] >> (k & 63)) & 1 == 1
        }
        let fire = match *self {
            Gate::Not { .. } => true,
            Gate::Cnot { control, .. } => get(words, control),
            Gate::Ccnot { controls: [a, b], .. } => get(words, a) && get(words, b),
        };
        if fire {
            let t = self.target();
            words[t >> 6] ^= 1u64 << (t & 63);
        }
    }
}

/// Image of `basis_index` (tensor order) under `gate` on `qubits` qubits.
pub fn gate_permutation(gate: &Gate, basis_index: u64, qubits: usize) -> u64 {
    gate.permute_index(basis_index, qubits)
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Not { target } => write!(f, "x {target}"),
            Gate::Cnot { control, target } => write!(f, "cx {control} {target}"),
            Gate::Ccnot {
                controls: [a, b],
                target,
            } => write!(f, "ccx {a} {b} {target}"),
        }
    }
}

/// Ordered gate list over a fixed layout. The first gate applies first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    layout: QubitLayout,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(layout: QubitLayout, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        let q = layout.total();
        for g in &gates {
            g.validate(q)?;
        }
        Ok(Circuit { layout, gates })
    }

    pub(crate) fn from_parts_unchecked(layout: QubitLayout, gates: Vec<Gate>) -> Self {
        debug_assert!(gates.iter().all(|g| g.validate(layout.total()).is_ok()));
        Circuit { layout, gates }
    }

    pub fn empty(layout: QubitLayout) -> Self {
        Circuit {
            layout,
            gates: Vec::new(),
        }
    }

    pub fn layout(&self) -> &QubitLayout {
        &self.layout
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// True iff no gate targets a variable qubit, i.e. the variable register
    /// is read-only.
    pub fn preserves_variables(&self) -> bool {
        self.gates
            .iter()
            .all(|g| !self.layout.is_var_qubit(g.target()))
    }

    /// Inverse circuit. Every gate is self-inverse, so this is the reversed
    /// gate order.
    pub fn inverse(&self) -> Self {
        Circuit {
            layout: self.layout,
            gates: self.gates.iter().rev().copied().collect(),
        }
    }

    /// Run on one packed basis state.
    pub fn apply_packed(&self, words: &mut [u64]) {
        for g in &self.gates {
            g.apply_packed(words);
        }
    }

    /// Run on a tensor index (`q <= 64`).
    pub fn permute_index(&self, index: u64) -> u64 {
        let q = self.layout.total();
        self.gates
            .iter()
            .fold(index, |i, g| g.permute_index(i, q))
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind() == kind).count()
    }

    /// Text form: a `qubits <q> vars <n> dust <l>` header, then one gate per
    /// line. No trailing newline.
    pub fn serialize(&self) -> String {
        let mut out = format!(
            "qubits {} vars {} dust {}",
            self.layout.total(),
            self.layout.n_vars,
            self.layout.n_dust
        );
        for g in &self.gates {
            out.push('\n');
            out.push_str(&g.to_string());
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CircuitError> {
        parse_circuit(text)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

impl FromStr for Circuit {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_circuit(s)
    }
}

pub fn serialize_circuit(circuit: &Circuit) -> String {
    circuit.serialize()
}

/// Parse the text form written by [`serialize_circuit`]. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let mut layout: Option<QubitLayout> = None;
    let mut gates = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| CircuitError::Parse { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let Some(layout) = layout else {
            layout = Some(parse_header(&fields).map_err(err)?);
            continue;
        };
        let nums = fields[1..]
            .iter()
            .map(|s| s.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| err(format!("bad qubit index in `{trimmed}`")))?;
        let gate = match (fields[0], nums.as_slice()) {
            ("x", &[t]) => Gate::not(t),
            ("cx", &[c, t]) => Gate::cnot(c, t),
            ("ccx", &[a, b, t]) => Gate::ccnot(a, b, t),
            _ => return Err(err(format!("malformed gate `{trimmed}`"))),
        };
        gate.validate(layout.total())
            .map_err(|e| err(e.to_string()))?;
        gates.push(gate);
    }

    let layout = layout.ok_or(CircuitError::Parse {
        line: 0,
        message: "missing `qubits` header".into(),
    })?;
    Ok(Circuit { layout, gates })
}

fn parse_header(fields: &[&str]) -> Result<QubitLayout, String> {
    let bad = || format!("malformed header `{}`", fields.join(" "));
    if fields.len() != 6 || fields[0] != "qubits" || fields[2] != "vars" || fields[4] != "dust" {
        return Err(bad());
    }
    let q: usize = fields[1].parse().map_err(|_| bad())?;
    let n: usize = fields[3].parse().map_err(|_| bad())?;
    let l: usize = fields[5].parse().map_err(|_| bad())?;
    if q != n + l + 1 {
        return Err(format!("qubits {q} != vars {n} + dust {l} + 1"));
    }
    Ok(QubitLayout::new(n, l))
}
