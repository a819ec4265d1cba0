//! Dense statevector simulation for the small gate set used by the recurrent
//! circuits: H, RY, RZ, CNOT and the general rotation ROT.
//!
//! Conventions:
//! - `RY(θ) = exp(-iθY/2)`, `RZ(θ) = exp(-iθZ/2)`.
//! - `ROT(α, β, γ) = RZ(γ)·RY(β)·RZ(α)`, so α acts first.
//! - Qubit 0 is the most significant bit of the amplitude index.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 20;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

type Mat2 = [Complex64; 4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    Ry(usize, f64),
    Rz(usize, f64),
    Cnot {
        control: usize,
        target: usize,
    },
    /// General rotation `RZ(γ)·RY(β)·RZ(α)` on one qubit.
    Rot(usize, f64, f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    H,
    Ry,
    Rz,
    Cnot,
    Rot,
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::Ry(..) => GateKind::Ry,
            Gate::Rz(..) => GateKind::Rz,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Rot(..) => GateKind::Rot,
        }
    }

    /// Qubits touched, control first for CNOT.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::Ry(q, _) | Gate::Rz(q, _) | Gate::Rot(q, ..) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }

    pub fn angles(&self) -> Vec<f64> {
        match *self {
            Gate::H(_) | Gate::Cnot { .. } => vec![],
            Gate::Ry(_, t) | Gate::Rz(_, t) => vec![t],
            Gate::Rot(_, a, b, c) => vec![a, b, c],
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::H(_) | Gate::Cnot { .. } => *self,
            Gate::Ry(q, t) => Gate::Ry(q, -t),
            Gate::Rz(q, t) => Gate::Rz(q, -t),
            Gate::Rot(q, a, b, c) => Gate::Rot(q, -c, -b, -a),
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= n_qubits {
                return Err(Error::QubitIndex { index: q, n_qubits });
            }
        }
        if let Gate::Cnot { control, target } = *self {
            if control == target {
                return Err(Error::ControlIsTarget(control));
            }
        }
        Ok(())
    }

    /// 2×2 unitary in row-major order for single-qubit gates.
    pub fn matrix(&self) -> Option<[Complex64; 4]> {
        match *self {
            Gate::H(_) => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                Some([h, h, h, -h])
            }
            Gate::Ry(_, t) => Some(ry_matrix(t)),
            Gate::Rz(_, t) => Some(rz_matrix(t)),
            Gate::Rot(_, a, b, c) => Some(mat_mul(&rz_matrix(c), &mat_mul(&ry_matrix(b), &rz_matrix(a)))),
            Gate::Cnot { .. } => None,
        }
    }
}

fn ry_matrix(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(c, 0.0),
    ]
}

fn rz_matrix(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [Complex64::new(c, -s), ZERO, ZERO, Complex64::new(c, s)]
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

/// Pauli generator of a rotation, used for gradient inner products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// `|0…0⟩` on `n_qubits` qubits.
pub fn zero_state(n_qubits: usize) -> Result<StateVector> {
    StateVector::zero(n_qubits)
}

/// Pure form of [`StateVector::apply`].
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

/// `⟨Z⟩` of one qubit, computed exactly from the amplitudes.
pub fn expectation_z(state: &StateVector, qubit: usize) -> Result<f64> {
    state.expectation_z(qubit)
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        Ok(Self { n_qubits, amplitudes })
    }

    /// Tensor product of single-qubit states, qubit 0 first.
    pub fn product(qubits: &[[Complex64; 2]]) -> Result<Self> {
        let n = qubits.len();
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::QubitCount(n));
        }
        let mut amplitudes = Vec::with_capacity(1 << n);
        amplitudes.push(ONE);
        for q in qubits {
            let prev = std::mem::take(&mut amplitudes);
            amplitudes.reserve(prev.len() * 2);
            for a in prev {
                amplitudes.push(a * q[0]);
                amplitudes.push(a * q[1]);
            }
        }
        Ok(Self {
            n_qubits: n,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes. The caller is responsible for normalisation.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::Shape {
                op: "from_amplitudes",
                detail: format!("length {len} is not 2^n with n >= 1"),
            });
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            Err(Error::QubitIndex {
                index: qubit,
                n_qubits: self.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            Gate::H(q) => self.apply_h(q),
            Gate::Rz(q, t) => self.apply_rz(q, t),
            Gate::Ry(q, t) => self.apply_ry(q, t),
            Gate::Cnot { control, target } => self.apply_cnot(control, target),
            Gate::Rot(q, ..) => {
                let m = gate.matrix().expect("single-qubit gate");
                self.apply_matrix(q, &m)
            }
        }
        Ok(())
    }

    // The unchecked kernels below assume indices were validated by the caller.

    pub(crate) fn apply_matrix(&mut self, qubit: usize, m: &Mat2) {
        let stride = self.mask(qubit);
        let amps = &mut self.amplitudes;
        for block in (0..amps.len()).step_by(stride << 1) {
            for i in block..block + stride {
                let a0 = amps[i];
                let a1 = amps[i + stride];
                amps[i] = m[0] * a0 + m[1] * a1;
                amps[i + stride] = m[2] * a0 + m[3] * a1;
            }
        }
    }

    pub(crate) fn apply_h(&mut self, qubit: usize) {
        let stride = self.mask(qubit);
        let amps = &mut self.amplitudes;
        for block in (0..amps.len()).step_by(stride << 1) {
            for i in block..block + stride {
                let a0 = amps[i];
                let a1 = amps[i + stride];
                amps[i] = (a0 + a1) * FRAC_1_SQRT_2;
                amps[i + stride] = (a0 - a1) * FRAC_1_SQRT_2;
            }
        }
    }

    pub(crate) fn apply_ry(&mut self, qubit: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let stride = self.mask(qubit);
        let amps = &mut self.amplitudes;
        for block in (0..amps.len()).step_by(stride << 1) {
            for i in block..block + stride {
                let a0 = amps[i];
                let a1 = amps[i + stride];
                amps[i] = a0 * c - a1 * s;
                amps[i + stride] = a0 * s + a1 * c;
            }
        }
    }

    pub(crate) fn apply_rz(&mut self, qubit: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let lo = Complex64::new(c, -s);
        let hi = Complex64::new(c, s);
        let stride = self.mask(qubit);
        let amps = &mut self.amplitudes;
        for block in (0..amps.len()).step_by(stride << 1) {
            for i in block..block + stride {
                amps[i] *= lo;
                amps[i + stride] *= hi;
            }
        }
    }

    pub(crate) fn apply_cnot(&mut self, control: usize, target: usize) {
        let cmask = self.mask(control);
        let tmask = self.mask(target);
        for i in 0..self.amplitudes.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amplitudes.swap(i, i | tmask);
            }
        }
    }

    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit);
        let value = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum::<f64>();
        Ok(value.clamp(-1.0, 1.0))
    }

    /// `⟨Z_q⟩` for every qubit in one pass over the amplitudes.
    pub fn expectations_z(&self) -> Vec<f64> {
        let n = self.n_qubits;
        let mut out = vec![0.0; n];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            for (q, o) in out.iter_mut().enumerate() {
                if i & (1 << (n - 1 - q)) == 0 {
                    *o += p;
                } else {
                    *o -= p;
                }
            }
        }
        for o in &mut out {
            *o = o.clamp(-1.0, 1.0);
        }
        out
    }

    /// Multiplies every amplitude by `Σ_q weights[q]·z_q(i)`, i.e. applies the
    /// diagonal observable `Σ_q weights[q] Z_q`.
    pub(crate) fn apply_weighted_z_sum(&mut self, weights: &[f64]) {
        let n = self.n_qubits;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            let mut w = 0.0;
            for (q, &g) in weights.iter().enumerate() {
                if i & (1 << (n - 1 - q)) == 0 {
                    w += g;
                } else {
                    w -= g;
                }
            }
            *a *= w;
        }
    }

    /// `⟨bra|P_q|self⟩` for a Pauli `P` on `qubit`.
    pub(crate) fn pauli_inner(&self, bra: &StateVector, qubit: usize, pauli: Pauli) -> Complex64 {
        let stride = self.mask(qubit);
        let ket = &self.amplitudes;
        let bra = &bra.amplitudes;
        let mut acc = ZERO;
        for block in (0..ket.len()).step_by(stride << 1) {
            for i in block..block + stride {
                let j = i + stride;
                match pauli {
                    // Z|0⟩ = |0⟩, Z|1⟩ = -|1⟩
                    Pauli::Z => acc += bra[i].conj() * ket[i] - bra[j].conj() * ket[j],
                    // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩
                    Pauli::Y => {
                        acc += bra[i].conj() * ket[j] * Complex64::new(0.0, -1.0)
                            + bra[j].conj() * ket[i] * Complex64::new(0.0, 1.0)
                    }
                }
            }
        }
        acc
    }
}
