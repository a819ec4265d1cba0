//! The recurrent cell's variational circuit.
//!
//! Layout on `n` qubits:
//! 1. `H` on every qubit.
//! 2. `RY(arctan x_i)` then `RZ(arctan x_i²)` on qubit `i`.
//! 3. Per layer: CNOT ring `i → (i+1) mod n`, CNOT ring `i → (i+2) mod n`,
//!    then `ROT(α, β, γ)` on every qubit.
//! 4. `⟨Z⟩` read out on every qubit.
//!
//! The encoding is applied once; only step 3 repeats. For `n = 2` the
//! stride-2 ring is skipped (it would be self loops), for `n = 1` both are.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevec::{Gate, Pauli, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub n_qubits: usize,
    pub n_layers: usize,
}

impl CircuitSpec {
    pub fn new(n_qubits: usize, n_layers: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > crate::statevec::MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        if n_layers == 0 {
            return Err(Error::Config("circuit needs at least one layer".into()));
        }
        Ok(Self { n_qubits, n_layers })
    }

    /// Number of trainable angles: three per qubit per layer.
    pub fn param_count(&self) -> usize {
        3 * self.n_qubits * self.n_layers
    }

    /// Number of gates emitted by [`build_circuit`], counting ROT as one gate.
    pub fn gate_count(&self) -> usize {
        3 * self.n_qubits + self.n_layers * (entangling_pairs(self.n_qubits).len() + self.n_qubits)
    }

    fn param_index(&self, layer: usize, qubit: usize, component: usize) -> usize {
        (layer * self.n_qubits + qubit) * 3 + component
    }
}

/// Trainable angles laid out `[layer][qubit][α, β, γ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqcParams {
    spec: CircuitSpec,
    angles: Vec<f64>,
}

impl VqcParams {
    pub fn new(spec: CircuitSpec, angles: Vec<f64>) -> Result<Self> {
        if angles.len() != spec.param_count() {
            return Err(Error::Shape {
                op: "VqcParams::new",
                detail: format!("expected {} angles, got {}", spec.param_count(), angles.len()),
            });
        }
        Ok(Self { spec, angles })
    }

    pub fn zeros(spec: CircuitSpec) -> Self {
        Self {
            spec,
            angles: vec![0.0; spec.param_count()],
        }
    }

    /// Uniform in `[-π/2, π/2]` per angle.
    pub fn random<R: Rng + ?Sized>(spec: CircuitSpec, rng: &mut R) -> Self {
        let angles = (0..spec.param_count())
            .map(|_| rng.gen_range(-FRAC_PI_2..=FRAC_PI_2))
            .collect();
        Self { spec, angles }
    }

    pub fn spec(&self) -> CircuitSpec {
        self.spec
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn angles_mut(&mut self) -> &mut [f64] {
        &mut self.angles
    }

    pub fn rot(&self, layer: usize, qubit: usize) -> (f64, f64, f64) {
        let i = self.spec.param_index(layer, qubit, 0);
        (self.angles[i], self.angles[i + 1], self.angles[i + 2])
    }
}

pub(crate) fn entangling_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    if n >= 2 {
        pairs.extend((0..n).map(|i| (i, (i + 1) % n)));
    }
    if n >= 3 {
        pairs.extend((0..n).map(|i| (i, (i + 2) % n)));
    }
    pairs
}

pub fn encoding_angles(x: f64) -> (f64, f64) {
    (x.atan(), (x * x).atan())
}

fn check_input(spec: &CircuitSpec, input: &[f64]) -> Result<()> {
    if input.len() != spec.n_qubits {
        return Err(Error::Shape {
            op: "vqc",
            detail: format!("input length {} != {} qubits", input.len(), spec.n_qubits),
        });
    }
    Ok(())
}

fn check_params(spec: &CircuitSpec, params: &[f64]) -> Result<()> {
    if params.len() != spec.param_count() {
        return Err(Error::Shape {
            op: "vqc",
            detail: format!("expected {} angles, got {}", spec.param_count(), params.len()),
        });
    }
    Ok(())
}

/// Emits the full gate sequence for one input.
pub fn build_circuit(spec: &CircuitSpec, input: &[f64], params: &VqcParams) -> Result<Vec<Gate>> {
    check_input(spec, input)?;
    check_params(spec, params.angles())?;
    let n = spec.n_qubits;
    let mut gates = Vec::with_capacity(spec.gate_count());
    gates.extend((0..n).map(Gate::H));
    for (q, &x) in input.iter().enumerate() {
        let (ry, rz) = encoding_angles(x);
        gates.push(Gate::Ry(q, ry));
        gates.push(Gate::Rz(q, rz));
    }
    let pairs = entangling_pairs(n);
    for layer in 0..spec.n_layers {
        gates.extend(pairs.iter().map(|&(control, target)| Gate::Cnot { control, target }));
        for q in 0..n {
            let (a, b, c) = params.rot(layer, q);
            gates.push(Gate::Rot(q, a, b, c));
        }
    }
    Ok(gates)
}

/// Per-qubit `⟨Z⟩` of the circuit applied to `|0…0⟩`.
pub fn run_vqc(spec: &CircuitSpec, input: &[f64], params: &VqcParams) -> Result<Vec<f64>> {
    check_params(spec, params.angles())?;
    run_raw(spec, input, params.angles())
}

pub(crate) fn run_raw(spec: &CircuitSpec, input: &[f64], params: &[f64]) -> Result<Vec<f64>> {
    check_input(spec, input)?;
    check_params(spec, params)?;
    Ok(Program::new(spec, input, params).forward().expectations_z())
}

#[derive(Debug, Clone, Copy)]
enum Prim {
    H(usize),
    Ry(usize, usize),
    Rz(usize, usize),
    Cnot(usize, usize),
}

/// Circuit lowered to primitive gates whose angles live in a flat slot array:
/// slots `2i`, `2i+1` are the encoding angles of qubit `i`, slot `2n + k` is
/// trainable angle `k`.
struct Program {
    spec: CircuitSpec,
    prims: Vec<Prim>,
    angles: Vec<f64>,
}

impl Program {
    fn new(spec: &CircuitSpec, input: &[f64], params: &[f64]) -> Self {
        let n = spec.n_qubits;
        let mut angles = Vec::with_capacity(2 * n + params.len());
        for &x in input {
            let (ry, rz) = encoding_angles(x);
            angles.push(ry);
            angles.push(rz);
        }
        angles.extend_from_slice(params);

        let pairs = entangling_pairs(n);
        let mut prims = Vec::with_capacity(3 * n + spec.n_layers * (pairs.len() + 3 * n));
        prims.extend((0..n).map(Prim::H));
        for q in 0..n {
            prims.push(Prim::Ry(q, 2 * q));
            prims.push(Prim::Rz(q, 2 * q + 1));
        }
        for layer in 0..spec.n_layers {
            prims.extend(pairs.iter().map(|&(c, t)| Prim::Cnot(c, t)));
            for q in 0..n {
                let base = 2 * n + spec.param_index(layer, q, 0);
                prims.push(Prim::Rz(q, base));
                prims.push(Prim::Ry(q, base + 1));
                prims.push(Prim::Rz(q, base + 2));
            }
        }
        Self {
            spec: *spec,
            prims,
            angles,
        }
    }

    fn n_encoding_prims(&self) -> usize {
        3 * self.spec.n_qubits
    }

    fn encoded_state(&self) -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singles: Vec<[Complex64; 2]> = (0..self.spec.n_qubits)
            .map(|q| {
                let (s, c) = (self.angles[2 * q] / 2.0).sin_cos();
                // RY(θ)·H|0⟩
                let a0 = h * (c - s);
                let a1 = h * (s + c);
                let (zs, zc) = (self.angles[2 * q + 1] / 2.0).sin_cos();
                [Complex64::new(zc, -zs) * a0, Complex64::new(zc, zs) * a1]
            })
            .collect();
        StateVector::product(&singles).expect("qubit count validated by CircuitSpec")
    }

    fn apply(&self, state: &mut StateVector, prim: Prim, sign: f64) {
        match prim {
            Prim::H(q) => state.apply_h(q),
            Prim::Ry(q, s) => state.apply_ry(q, sign * self.angles[s]),
            Prim::Rz(q, s) => state.apply_rz(q, sign * self.angles[s]),
            Prim::Cnot(c, t) => state.apply_cnot(c, t),
        }
    }

    fn forward(&self) -> StateVector {
        let mut state = self.encoded_state();
        for &p in &self.prims[self.n_encoding_prims()..] {
            self.apply(&mut state, p, 1.0);
        }
        state
    }

    /// Reverse sweep returning `∂(Σ_q upstream[q]·⟨Z_q⟩)/∂slot` for every slot.
    fn adjoint(&self, upstream: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut psi = self.forward();
        let outputs = psi.expectations_z();
        let mut lambda = psi.clone();
        lambda.apply_weighted_z_sum(upstream);
        let mut grads = vec![0.0; self.angles.len()];
        // The leading H column carries no angle; stop once past the first rotation.
        let first_rotation = self.spec.n_qubits;
        for (idx, &p) in self.prims.iter().enumerate().rev() {
            match p {
                Prim::Ry(q, s) => grads[s] = psi.pauli_inner(&lambda, q, Pauli::Y).im,
                Prim::Rz(q, s) => grads[s] = psi.pauli_inner(&lambda, q, Pauli::Z).im,
                _ => {}
            }
            if idx == first_rotation {
                break;
            }
            self.apply(&mut psi, p, -1.0);
            self.apply(&mut lambda, p, -1.0);
        }
        (outputs, grads)
    }

    /// Two-term shift rule on every slot; returns the same contraction as
    /// [`Program::adjoint`].
    fn parameter_shift(&mut self, upstream: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let outputs = self.forward().expectations_z();
        let mut grads = vec![0.0; self.angles.len()];
        for s in 0..self.angles.len() {
            let original = self.angles[s];
            self.angles[s] = original + FRAC_PI_2;
            let plus = self.forward().expectations_z();
            self.angles[s] = original - FRAC_PI_2;
            let minus = self.forward().expectations_z();
            self.angles[s] = original;
            grads[s] = plus
                .iter()
                .zip(&minus)
                .zip(upstream)
                .map(|((p, m), g)| g * (p - m) / 2.0)
                .sum();
        }
        (outputs, grads)
    }
}

/// How gradients of circuit expectations are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradMethod {
    /// Reverse sweep over the statevector; one forward plus one backward pass.
    #[default]
    Adjoint,
    /// Two extra circuit evaluations per angle.
    ParameterShift,
}

/// Result of differentiating `Σ_q upstream[q]·⟨Z_q⟩` through one circuit run.
#[derive(Debug, Clone, PartialEq)]
pub struct VqcGradient {
    pub outputs: Vec<f64>,
    pub d_input: Vec<f64>,
    pub d_params: Vec<f64>,
}

/// Vector-Jacobian product of the circuit with respect to both its inputs
/// (through the arctan encoding) and its trainable angles.
pub fn vqc_vjp(
    spec: &CircuitSpec,
    input: &[f64],
    params: &[f64],
    upstream: &[f64],
    method: GradMethod,
) -> Result<VqcGradient> {
    check_input(spec, input)?;
    check_params(spec, params)?;
    if upstream.len() != spec.n_qubits {
        return Err(Error::Shape {
            op: "vqc_vjp",
            detail: format!("upstream length {} != {} qubits", upstream.len(), spec.n_qubits),
        });
    }
    let mut program = Program::new(spec, input, params);
    let (outputs, slot_grads) = match method {
        GradMethod::Adjoint => program.adjoint(upstream),
        GradMethod::ParameterShift => program.parameter_shift(upstream),
    };
    let n = spec.n_qubits;
    let d_input = input
        .iter()
        .enumerate()
        .map(|(q, &x)| {
            let x2 = x * x;
            slot_grads[2 * q] / (1.0 + x2) + slot_grads[2 * q + 1] * 2.0 * x / (1.0 + x2 * x2)
        })
        .collect();
    Ok(VqcGradient {
        outputs,
        d_input,
        d_params: slot_grads[2 * n..].to_vec(),
    })
}

/// Text diagram of a gate list, one row per qubit.
pub fn render_circuit(n_qubits: usize, gates: &[Gate]) -> String {
    let mut rows: Vec<String> = (0..n_qubits).map(|q| format!("q{q}: ")).collect();
    let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    for r in &mut rows {
        while r.len() < width {
            r.push(' ');
        }
    }
    for gate in gates {
        let mut cells: Vec<String> = vec![String::new(); n_qubits];
        match *gate {
            Gate::H(q) => cells[q] = "H".into(),
            Gate::Ry(q, t) => cells[q] = format!("RY({t:.2})"),
            Gate::Rz(q, t) => cells[q] = format!("RZ({t:.2})"),
            Gate::Rot(q, a, b, c) => cells[q] = format!("R({a:.2},{b:.2},{c:.2})"),
            Gate::Cnot { control, target } => {
                cells[control] = "●".into();
                cells[target] = "⊕".into();
            }
        }
        let w = cells.iter().map(|c| c.chars().count()).max().unwrap_or(0);
        for (row, cell) in rows.iter_mut().zip(&cells) {
            row.push('─');
            let pad = w - cell.chars().count();
            if cell.is_empty() {
                row.push_str(&"─".repeat(w));
            } else {
                let _ = write!(row, "{cell}{}", "─".repeat(pad));
            }
        }
    }
    let mut out = String::new();
    for row in rows {
        out.push_str(&row);
        out.push_str("─\n");
    }
    out
}
