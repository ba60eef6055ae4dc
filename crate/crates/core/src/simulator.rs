//! State evolution for the SAT pipeline.
//!
//! After the Hadamard layer every operation is a permutation of basis
//! states, so the state is stored sparsely: one packed basis state and one
//! amplitude per branch. The cost of a gate is proportional to the number of
//! branches (at most `2^n`), not to the `2^(n + l + 1)` dimension of the
//! register. Keys are kept unique; permutations preserve that.
//!
//! [`DenseState`] is a plain `2^q` amplitude vector used to cross-check the
//! sparse engine on small registers.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{Circuit, Gate, QubitLayout};

/// Default limit on register width for the sparse engine.
pub const DEFAULT_QUBIT_CAP: usize = 4096;
/// Default limit on variable count (the branch count is `2^n`).
pub const DEFAULT_BRANCH_CAP: usize = 24;
/// Widest register the dense engine accepts.
pub const DENSE_QUBIT_CAP: usize = 22;
/// Tolerance for norm checks and other equalities.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Largest distance from an integer accepted when rounding a model count.
pub const COUNT_ROUNDING_TOLERANCE: f64 = 1e-6;
/// Default phase for `V_θ`.
pub const DEFAULT_THETA: f64 = std::f64::consts::FRAC_PI_4;

const PAR_MIN_LEN: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("register of {qubits} qubits exceeds the cap of {cap}")]
    QubitCapExceeded { qubits: usize, cap: usize },
    #[error("{n} variables exceed the branch cap of {cap} (2^{n} branches)")]
    BranchCapExceeded { n: usize, cap: usize },
    #[error("state has {state} qubits but the circuit expects {circuit}")]
    LayoutMismatch { state: usize, circuit: usize },
    #[error("{qubits}-qubit register does not fit a 64-bit tensor index")]
    IndexTooWide { qubits: usize },
    #[error("model count estimate {value} is not within {COUNT_ROUNDING_TOLERANCE} of an integer")]
    NonIntegralCount { value: f64 },
    #[error("state norm drifted to {norm_sqr}")]
    NormDrift { norm_sqr: f64 },
    #[error("{entries} sparse entries exceed the 2^{n_vars} branch bound")]
    TooManyEntries { entries: usize, n_vars: usize },
    #[error("state has no amplitude")]
    EmptyState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub qubit_cap: usize,
    pub branch_cap: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            qubit_cap: DEFAULT_QUBIT_CAP,
            branch_cap: DEFAULT_BRANCH_CAP,
        }
    }
}

#[inline]
fn bit(words: &[u64], k: usize) -> bool {
    (words[k >> 6] >> (k & 63)) & 1 == 1
}

#[inline]
fn set_bit(words: &mut [u64], k: usize, value: bool) {
    let mask = 1u64 << (k & 63);
    if value {
        words[k >> 6] |= mask;
    } else {
        words[k >> 6] &= !mask;
    }
}

/// Sparse amplitude map keyed by packed basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    layout: QubitLayout,
    words: usize,
    keys: Vec<u64>,
    amps: Vec<Complex64>,
}

impl SparseState {
    /// `|0 .. 0>` on the given layout.
    pub fn prepare(layout: QubitLayout, config: &SimConfig) -> Result<Self, SimError> {
        if layout.total() > config.qubit_cap {
            return Err(SimError::QubitCapExceeded {
                qubits: layout.total(),
                cap: config.qubit_cap,
            });
        }
        if layout.n_vars() > config.branch_cap || layout.n_vars() >= 64 {
            return Err(SimError::BranchCapExceeded {
                n: layout.n_vars(),
                cap: config.branch_cap,
            });
        }
        let words = layout.words();
        Ok(SparseState {
            layout,
            words,
            keys: vec![0; words],
            amps: vec![Complex64::new(1.0, 0.0)],
        })
    }

    pub fn layout(&self) -> &QubitLayout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Packed basis state of entry `i`.
    pub fn key(&self, i: usize) -> &[u64] {
        &self.keys[i * self.words..(i + 1) * self.words]
    }

    pub fn amplitude_at(&self, i: usize) -> Complex64 {
        self.amps[i]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u64], Complex64)> + '_ {
        self.keys.chunks_exact(self.words).zip(self.amps.iter().copied())
    }

    pub fn qubit(&self, i: usize, k: usize) -> bool {
        bit(self.key(i), k)
    }

    pub fn result_bit(&self, i: usize) -> bool {
        self.qubit(i, self.layout.result_index())
    }

    /// Variable register of entry `i` as a tensor-order index (`x_1` high).
    pub fn variable_index(&self, i: usize) -> u64 {
        let key = self.key(i);
        (0..self.layout.n_vars()).fold(0u64, |acc, k| (acc << 1) | u64::from(bit(key, k)))
    }

    /// Entry `i` written as `x_1,..,x_n,y_1,..,y_l;f`.
    pub fn label(&self, i: usize) -> String {
        let q = self.layout.total();
        let mut out = String::with_capacity(2 * q);
        for k in 0..q - 1 {
            if k > 0 {
                out.push(',');
            }
            out.push(if self.qubit(i, k) { '1' } else { '0' });
        }
        out.push(';');
        out.push(if self.result_bit(i) { '1' } else { '0' });
        out
    }

    /// Σ |amplitude|².
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Amplitude of a packed basis state, zero when absent.
    pub fn amplitude(&self, key: &[u64]) -> Complex64 {
        self.iter()
            .find(|(k, _)| *k == key)
            .map(|(_, a)| a)
            .unwrap_or_default()
    }

    /// Tensor-index view, for registers of at most 64 qubits.
    pub fn to_index_map(&self) -> Result<BTreeMap<u64, Complex64>, SimError> {
        let q = self.layout.total();
        if q > 64 {
            return Err(SimError::IndexTooWide { qubits: q });
        }
        Ok((0..self.len())
            .map(|i| {
                let key = self.key(i);
                let index = (0..q).fold(0u64, |acc, k| (acc << 1) | u64::from(bit(key, k)));
                (index, self.amps[i])
            })
            .collect())
    }

    /// Norm within [`NORM_TOLERANCE`] of 1 and no more than `2^n` entries.
    pub fn check_invariants(&self) -> Result<(), SimError> {
        let norm_sqr = self.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(SimError::NormDrift { norm_sqr });
        }
        let n_vars = self.layout.n_vars();
        if self.len() as u128 > 1u128 << n_vars {
            return Err(SimError::TooManyEntries {
                entries: self.len(),
                n_vars,
            });
        }
        Ok(())
    }

    /// Apply `(1/√2)[[1,1],[1,-1]]` to every variable qubit.
    pub fn apply_hadamard_layer(self) -> Self {
        if self.len() == 1 {
            self.hadamard_from_basis_state()
        } else {
            self.hadamard_general()
        }
    }

    // Single basis state |b>: the image is Σ_x (-1)^{x·b} |x> / √2^n.
    fn hadamard_from_basis_state(self) -> Self {
        let n = self.layout.n_vars();
        let words = self.words;
        let base = self.keys.clone();
        let base_vars = (0..n).fold(0u64, |acc, k| (acc << 1) | u64::from(bit(&base, k)));
        let scale = self.amps[0] * (0.5f64).powf(n as f64 / 2.0);
        let count = 1usize << n;

        let mut keys = vec![0u64; count * words];
        keys.par_chunks_mut(words)
            .with_min_len(PAR_MIN_LEN)
            .enumerate()
            .for_each(|(x, key)| {
                key.copy_from_slice(&base);
                for k in 0..n {
                    set_bit(key, k, (x >> (n - 1 - k)) & 1 == 1);
                }
            });
        let amps = (0..count)
            .into_par_iter()
            .with_min_len(PAR_MIN_LEN)
            .map(|x| {
                if (x as u64 & base_vars).count_ones() % 2 == 1 {
                    -scale
                } else {
                    scale
                }
            })
            .collect();
        SparseState {
            layout: self.layout,
            words,
            keys,
            amps,
        }
    }

    // Qubit-by-qubit with merging; for states that are not a single basis
    // state. Entries are re-sorted so the result does not depend on hashing.
    fn hadamard_general(self) -> Self {
        let words = self.words;
        let mut entries: Vec<(Vec<u64>, Complex64)> =
            self.iter().map(|(k, a)| (k.to_vec(), a)).collect();
        for k in 0..self.layout.n_vars() {
            let mut merged: HashMap<Vec<u64>, Complex64> = HashMap::with_capacity(2 * entries.len());
            for (key, amp) in entries {
                let one = bit(&key, k);
                let a = amp * FRAC_1_SQRT_2;
                let mut k0 = key.clone();
                set_bit(&mut k0, k, false);
                let mut k1 = key;
                set_bit(&mut k1, k, true);
                *merged.entry(k0).or_default() += a;
                *merged.entry(k1).or_default() += if one { -a } else { a };
            }
            entries = merged
                .into_iter()
                .filter(|(_, a)| a.norm_sqr() > 1e-30)
                .collect();
            entries.sort_by(|a, b| a.0.iter().rev().cmp(b.0.iter().rev()));
        }
        let mut keys = Vec::with_capacity(entries.len() * words);
        let mut amps = Vec::with_capacity(entries.len());
        for (key, amp) in entries {
            keys.extend_from_slice(&key);
            amps.push(amp);
        }
        SparseState {
            layout: self.layout,
            words,
            keys,
            amps,
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        self.keys
            .par_chunks_mut(self.words)
            .with_min_len(PAR_MIN_LEN)
            .for_each(|key| gate.apply_packed(key));
    }

    fn check_layout(&self, circuit: &Circuit) -> Result<(), SimError> {
        if circuit.layout() != &self.layout {
            return Err(SimError::LayoutMismatch {
                state: self.layout.total(),
                circuit: circuit.layout().total(),
            });
        }
        Ok(())
    }

    /// Relabel every branch through the whole circuit. Amplitudes are
    /// untouched.
    pub fn apply_circuit(mut self, circuit: &Circuit) -> Result<Self, SimError> {
        self.check_layout(circuit)?;
        self.keys
            .par_chunks_mut(self.words)
            .with_min_len(PAR_MIN_LEN / 16)
            .for_each(|key| circuit.apply_packed(key));
        Ok(self)
    }

    /// Gate-at-a-time variant; `observe` sees the state after each gate.
    pub fn apply_circuit_stepwise<F>(&mut self, circuit: &Circuit, mut observe: F) -> Result<(), SimError>
    where
        F: FnMut(usize, &SparseState) -> Result<(), SimError>,
    {
        self.check_layout(circuit)?;
        for (step, gate) in circuit.gates().iter().enumerate() {
            self.apply_gate(gate);
            observe(step, self)?;
        }
        Ok(())
    }

    /// `<v|E|v>` for `E = I ⊗ .. ⊗ I ⊗ |1><1|` on the result qubit.
    pub fn measure_projection_e(&self) -> f64 {
        let r = self.layout.result_index();
        self.keys
            .chunks_exact(self.words)
            .zip(&self.amps)
            .filter(|(k, _)| bit(k, r))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// `V_θ` with branch merging and renormalisation.
    ///
    /// Each of the first `n + l` qubits goes to `(|0> + |1>)/√2` whatever its
    /// value, so all branches share that factor and only the result qubit
    /// distinguishes them. Its factor is `α|0> + β e^{iθ}|1>` with
    /// `α² = Σ_{f=0} |amp|²` and `β² = Σ_{f=1} |amp|²`.
    pub fn apply_v_theta(&self, theta: f64) -> Result<PolarizedResult, SimError> {
        let r = self.layout.result_index();
        let mut zero = 0.0;
        let mut one = 0.0;
        let mut satisfying_count = 0u64;
        for (key, amp) in self.iter() {
            if bit(key, r) {
                one += amp.norm_sqr();
                satisfying_count += 1;
            } else {
                zero += amp.norm_sqr();
            }
        }
        let total = zero + one;
        if total <= 0.0 {
            return Err(SimError::EmptyState);
        }
        Ok(PolarizedResult {
            alpha: (zero / total).sqrt(),
            beta: (one / total).sqrt(),
            theta,
            n_vars: self.layout.n_vars(),
            satisfying_count,
        })
    }

    /// `V_θ` applied exactly as written, without renormalisation.
    ///
    /// The operator sends every branch to the same `n + l` qubit prefix, so
    /// amplitudes add coherently: the result factor is
    /// `Σ_{f=0} amp |0> + e^{iθ} Σ_{f=1} amp |1>`.
    pub fn apply_v_theta_literal(&self, theta: f64) -> LiteralPolarization {
        let r = self.layout.result_index();
        let mut zero = Complex64::new(0.0, 0.0);
        let mut one = Complex64::new(0.0, 0.0);
        for (key, amp) in self.iter() {
            if bit(key, r) {
                one += amp;
            } else {
                zero += amp;
            }
        }
        let one = one * Complex64::from_polar(1.0, theta);
        LiteralPolarization {
            zero,
            one,
            norm_sqr: zero.norm_sqr() + one.norm_sqr(),
        }
    }
}

/// Result-qubit factor `α|0> + β e^{iθ}|1>` after `V_θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarizedResult {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub n_vars: usize,
    /// Branches whose result bit is 1.
    pub satisfying_count: u64,
}

impl PolarizedResult {
    /// `<V_θ v_f|E|V_θ v_f>`.
    pub fn expectation_e(&self) -> f64 {
        self.beta * self.beta
    }

    pub fn result_factor(&self) -> [Complex64; 2] {
        [
            Complex64::new(self.alpha, 0.0),
            Complex64::from_polar(self.beta, self.theta),
        ]
    }
}

/// Unnormalised result factor from [`SparseState::apply_v_theta_literal`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiteralPolarization {
    pub zero: Complex64,
    pub one: Complex64,
    pub norm_sqr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub satisfiable: bool,
    pub model_count: u64,
}

/// Satisfiable iff `round(β² 2^n) >= 1`.
pub fn decide(result: &PolarizedResult) -> Result<Verdict, SimError> {
    let estimate = result.beta * result.beta * (result.n_vars as f64).exp2();
    let rounded = estimate.round();
    if (estimate - rounded).abs() >= COUNT_ROUNDING_TOLERANCE {
        return Err(SimError::NonIntegralCount { value: estimate });
    }
    let model_count = rounded as u64;
    Ok(Verdict {
        satisfiable: model_count >= 1,
        model_count,
    })
}

/// Full `2^q` amplitude vector in tensor order (qubit 0 most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    layout: QubitLayout,
    amps: Vec<Complex64>,
}

impl DenseState {
    pub fn prepare(layout: QubitLayout) -> Result<Self, SimError> {
        let q = layout.total();
        if q > DENSE_QUBIT_CAP {
            return Err(SimError::QubitCapExceeded {
                qubits: q,
                cap: DENSE_QUBIT_CAP,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << q];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(DenseState { layout, amps })
    }

    pub fn layout(&self) -> &QubitLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    fn stride(&self, qubit: usize) -> usize {
        1 << (self.layout.total() - 1 - qubit)
    }

    pub fn apply_hadamard(&mut self, qubit: usize) {
        let s = self.stride(qubit);
        for block in self.amps.chunks_exact_mut(2 * s) {
            let (lo, hi) = block.split_at_mut(s);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = (x + y) * FRAC_1_SQRT_2;
                *b = (x - y) * FRAC_1_SQRT_2;
            }
        }
    }

    pub fn apply_hadamard_layer(&mut self) {
        for k in 0..self.layout.n_vars() {
            self.apply_hadamard(k);
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        let t = self.stride(gate.target());
        let mask = gate
            .controls()
            .iter()
            .fold(0usize, |m, &c| m | self.stride(c));
        for i in 0..self.amps.len() {
            if i & t == 0 && i & mask == mask {
                self.amps.swap(i, i | t);
            }
        }
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<(), SimError> {
        if circuit.layout() != &self.layout {
            return Err(SimError::LayoutMismatch {
                state: self.layout.total(),
                circuit: circuit.layout().total(),
            });
        }
        for g in circuit.gates() {
            self.apply_gate(g);
        }
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn measure_projection_e(&self) -> f64 {
        // result qubit is the least significant bit
        self.amps.iter().skip(1).step_by(2).map(|a| a.norm_sqr()).sum()
    }

    /// Largest per-amplitude distance to a sparse state on the same layout.
    pub fn max_deviation(&self, sparse: &SparseState) -> Result<f64, SimError> {
        let map = sparse.to_index_map()?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| (a - map.get(&(i as u64)).copied().unwrap_or_default()).norm())
            .fold(0.0, f64::max))
    }
}
