//! Independent reference implementations used across the integration tests.
//!
//! Circuits are evaluated by multiplying dense `2^n × 2^n` unitaries built
//! from Kronecker products without touching the crate's simulator. The
//! hybrid-model helpers at the bottom drive the crate's own forward pass so
//! finite differences can be compared with the tape.

#![allow(dead_code)]

use num_complex::Complex64 as C;
use qdrqn::autograd::Tape;
use qdrqn::drqn::{compute_loss, Transition};
use qdrqn::recurrent::DressedModel;
use qdrqn::vqc::GradMethod;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Matrix = Vec<Vec<C>>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn identity(dim: usize) -> Matrix {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
                .collect()
        })
        .collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![c(0.0, 0.0); m]; n];
    for i in 0..n {
        for l in 0..k {
            let x = a[i][l];
            if x == c(0.0, 0.0) {
                continue;
            }
            for j in 0..m {
                out[i][j] += x * b[l][j];
            }
        }
    }
    out
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn dagger(a: &Matrix) -> Matrix {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i].conj()).collect()).collect()
}

pub fn hadamard() -> Matrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]]
}

pub fn ry(theta: f64) -> Matrix {
    let (s, co) = (theta / 2.0).sin_cos();
    vec![vec![c(co, 0.0), c(-s, 0.0)], vec![c(s, 0.0), c(co, 0.0)]]
}

pub fn rz(theta: f64) -> Matrix {
    let (s, co) = (theta / 2.0).sin_cos();
    vec![vec![c(co, -s), c(0.0, 0.0)], vec![c(0.0, 0.0), c(co, s)]]
}

/// `RZ(γ)·RY(β)·RZ(α)`.
pub fn rot(alpha: f64, beta: f64, gamma: f64) -> Matrix {
    matmul(&rz(gamma), &matmul(&ry(beta), &rz(alpha)))
}

/// Lifts a one-qubit matrix onto `n` qubits; qubit 0 is the most significant.
pub fn embed(single: &Matrix, qubit: usize, n: usize) -> Matrix {
    let mut out = identity(1);
    for q in 0..n {
        let factor = if q == qubit { single.clone() } else { identity(2) };
        out = kron(&out, &factor);
    }
    out
}

pub fn cnot(control: usize, target: usize, n: usize) -> Matrix {
    let dim = 1 << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let mut out = vec![vec![c(0.0, 0.0); dim]; dim];
    for col in 0..dim {
        let row = if col & bit(control) != 0 {
            col ^ bit(target)
        } else {
            col
        };
        out[row][col] = c(1.0, 0.0);
    }
    out
}

pub fn apply(u: &Matrix, psi: &[C]) -> Vec<C> {
    u.iter()
        .map(|row| row.iter().zip(psi).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn basis_zero(n: usize) -> Vec<C> {
    let mut v = vec![c(0.0, 0.0); 1 << n];
    v[0] = c(1.0, 0.0);
    v
}

pub fn z_expectation(psi: &[C], qubit: usize, n: usize) -> f64 {
    let bit = 1usize << (n - 1 - qubit);
    psi.iter()
        .enumerate()
        .map(|(i, a)| if i & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}

fn ring(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    if n >= 2 {
        for i in 0..n {
            pairs.push((i, (i + 1) % n));
        }
    }
    if n >= 3 {
        for i in 0..n {
            pairs.push((i, (i + 2) % n));
        }
    }
    pairs
}

/// Dense unitary of the whole variational circuit for one input.
pub fn vqc_unitary(n: usize, layers: usize, input: &[f64], angles: &[f64]) -> Matrix {
    let mut u = identity(1 << n);
    let mut then = |g: Matrix| u = matmul(&g, &u);
    for q in 0..n {
        then(embed(&hadamard(), q, n));
    }
    for (q, &x) in input.iter().enumerate() {
        then(embed(&ry(x.atan()), q, n));
        then(embed(&rz((x * x).atan()), q, n));
    }
    for l in 0..layers {
        for (a, b) in ring(n) {
            then(cnot(a, b, n));
        }
        for q in 0..n {
            let k = 3 * (l * n + q);
            then(embed(&rot(angles[k], angles[k + 1], angles[k + 2]), q, n));
        }
    }
    u
}

pub fn vqc(n: usize, layers: usize, input: &[f64], angles: &[f64]) -> Vec<f64> {
    let psi = apply(&vqc_unitary(n, layers, input, angles), &basis_zero(n));
    (0..n).map(|q| z_expectation(&psi, q, n)).collect()
}

/// Left-multiplies `m` by a one-qubit `u` acting on `qubit`.
fn lmul_qubit(m: &mut Matrix, u: &Matrix, qubit: usize, n: usize) {
    let bit = 1usize << (n - 1 - qubit);
    for r0 in (0..m.len()).filter(|r| r & bit == 0) {
        let r1 = r0 | bit;
        for col in 0..m.len() {
            let (a, b) = (m[r0][col], m[r1][col]);
            m[r0][col] = u[0][0] * a + u[0][1] * b;
            m[r1][col] = u[1][0] * a + u[1][1] * b;
        }
    }
}

/// `u†·m·u` for `u` acting on one qubit.
fn conjugate_qubit(m: &Matrix, u: &Matrix, qubit: usize, n: usize) -> Matrix {
    let ud = dagger(u);
    let mut out = m.clone();
    lmul_qubit(&mut out, &ud, qubit, n);
    // x·u = (u†·x†)†
    let mut t = dagger(&out);
    lmul_qubit(&mut t, &ud, qubit, n);
    dagger(&t)
}

fn conjugate_cnot(m: &Matrix, control: usize, target: usize, n: usize) -> Matrix {
    let (cb, tb) = (1usize << (n - 1 - control), 1usize << (n - 1 - target));
    let p = |i: usize| if i & cb != 0 { i ^ tb } else { i };
    (0..m.len())
        .map(|r| (0..m.len()).map(|c| m[p(r)][p(c)]).collect())
        .collect()
}

fn pauli_z() -> Matrix {
    vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]]
}

fn pauli_y() -> Matrix {
    vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]
}

/// Angle indices of the trainable part of a circuit whose value can never
/// influence `⟨Z_m⟩` for any `m` in `measured`, whatever the input.
///
/// Each rotation `exp(-iθG/2)` is dead exactly when its generator `G`
/// commutes with every measured observable pulled back through the gates that
/// follow it.
pub fn dead_angles(n: usize, layers: usize, angles: &[f64], measured: &[usize]) -> Vec<usize> {
    enum Prim {
        Cnot(usize, usize),
        Rot {
            qubit: usize,
            y: bool,
            theta: f64,
            index: usize,
        },
    }
    let mut prims = Vec::new();
    for l in 0..layers {
        for (a, b) in ring(n) {
            prims.push(Prim::Cnot(a, b));
        }
        for q in 0..n {
            let k = 3 * (l * n + q);
            for (j, y) in [(0, false), (1, true), (2, false)] {
                prims.push(Prim::Rot {
                    qubit: q,
                    y,
                    theta: angles[k + j],
                    index: k + j,
                });
            }
        }
    }
    let mut observables: Vec<Matrix> = measured.iter().map(|&m| embed(&pauli_z(), m, n)).collect();
    let mut dead = Vec::new();
    for prim in prims.iter().rev() {
        match *prim {
            Prim::Cnot(a, b) => {
                for o in &mut observables {
                    *o = conjugate_cnot(o, a, b, n);
                }
            }
            Prim::Rot { qubit, y, theta, index } => {
                // o and g are Hermitian, so o·g = (g·o)† and [g, o] = 0 iff g·o is Hermitian.
                let g = if y { pauli_y() } else { pauli_z() };
                let commutes = observables.iter().all(|o| {
                    let mut go = o.clone();
                    lmul_qubit(&mut go, &g, qubit, n);
                    let dim = go.len();
                    (0..dim).all(|r| (0..dim).all(|c| (go[r][c] - go[c][r].conj()).norm() < 1e-10))
                });
                if commutes {
                    dead.push(index);
                }
                let u = if y { ry(theta) } else { rz(theta) };
                for o in &mut observables {
                    *o = conjugate_qubit(o, &u, qubit, n);
                }
            }
        }
    }
    dead.sort_unstable();
    dead
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One QLSTM step composed directly from the gate equations.
/// `circuits` holds forget, input, candidate, output and readout angles.
pub fn qlstm_step(
    hidden: usize,
    layers: usize,
    circuits: &[Vec<f64>],
    x: &[f64],
    h: &[f64],
    c_prev: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let v: Vec<f64> = h.iter().chain(x).copied().collect();
    let n = v.len();
    let f: Vec<f64> = vqc(n, layers, &v, &circuits[0]).into_iter().map(sigmoid).collect();
    let i: Vec<f64> = vqc(n, layers, &v, &circuits[1]).into_iter().map(sigmoid).collect();
    let g: Vec<f64> = vqc(n, layers, &v, &circuits[2]).into_iter().map(f64::tanh).collect();
    let c_new: Vec<f64> = (0..n).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
    let o: Vec<f64> = vqc(n, layers, &v, &circuits[3]).into_iter().map(sigmoid).collect();
    let gated: Vec<f64> = (0..n).map(|k| o[k] * c_new[k].tanh()).collect();
    let h_new = vqc(n, layers, &gated, &circuits[4])[..hidden].to_vec();
    (h_new, c_new)
}

/// Central finite differences of `f` at `x` with step `h`.
pub fn finite_difference<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + h;
            let up = f(&probe);
            probe[k] = x[k] - h;
            let down = f(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Indices where `analytic` and `numeric` disagree beyond
/// `max(rel·max(|a|,|n|), abs_floor)`.
pub fn gradient_mismatches(analytic: &[f64], numeric: &[f64], rel: f64, abs_floor: f64) -> Vec<(usize, f64, f64)> {
    analytic
        .iter()
        .zip(numeric)
        .enumerate()
        .filter(|(_, (a, n))| (*a - *n).abs() > (rel * a.abs().max(n.abs())).max(abs_floor))
        .map(|(i, (a, n))| (i, *a, *n))
        .collect()
}

/// A small dressed model, a frozen target, and a batch of ragged windows.
pub struct HybridCase {
    pub policy: DressedModel,
    pub target: DressedModel,
    pub batch: Vec<Vec<Transition>>,
    pub gamma: f64,
}

pub fn random_window<R: Rng>(obs_dim: usize, len: usize, rng: &mut R) -> Vec<Transition> {
    let mut obs: Vec<f64> = (0..obs_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (0..len)
        .map(|t| {
            let next: Vec<f64> = (0..obs_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            Transition {
                state: std::mem::replace(&mut obs, next.clone()),
                action: rng.gen_range(0..2),
                reward: 1.0,
                next_state: next,
                done: t + 1 == len && rng.gen_bool(0.5),
            }
        })
        .collect()
}

impl HybridCase {
    /// Quantum core on at most four qubits, or a small LSTM core when
    /// `quantum` is false; windows of length one to three.
    pub fn random(seed: u64, obs_dim: usize, quantum: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes = [(1, 1), (2, 1), (1, 2), (2, 2), (1, 3), (3, 1)];
        let (input, hidden) = sizes[rng.gen_range(0..sizes.len())];
        let layers = rng.gen_range(1..=2);
        let build = |rng: &mut ChaCha8Rng| {
            if quantum {
                DressedModel::qlstm(obs_dim, input, hidden, layers, rng).unwrap()
            } else {
                DressedModel::lstm(obs_dim, input, hidden + 1, rng).unwrap()
            }
        };
        let policy = build(&mut rng);
        let target = build(&mut rng);
        let windows = rng.gen_range(1..=3);
        let batch = (0..windows)
            .map(|_| {
                let len = rng.gen_range(1..=3);
                random_window(obs_dim, len, &mut rng)
            })
            .collect();
        Self {
            policy,
            target,
            batch,
            gamma: 0.9,
        }
    }

    fn windows(&self) -> Vec<&[Transition]> {
        self.batch.iter().map(Vec::as_slice).collect()
    }

    pub fn loss_at(&self, flat: &[f64]) -> f64 {
        let mut model = self.policy.clone();
        model.set_flat_params(flat).unwrap();
        let mut tape = Tape::new();
        let bound = model.bind(&mut tape, true).unwrap();
        let loss = compute_loss(&mut tape, &bound, &self.target, &self.windows(), self.gamma).unwrap();
        tape.value(loss).values()[0]
    }

    pub fn gradient(&self, method: GradMethod) -> (f64, Vec<f64>) {
        let mut tape = Tape::checked().with_grad_method(method);
        let bound = self.policy.bind(&mut tape, true).unwrap();
        let loss = compute_loss(&mut tape, &bound, &self.target, &self.windows(), self.gamma).unwrap();
        tape.backward(loss).unwrap();
        (tape.value(loss).values()[0], bound.grads(&tape))
    }

    /// Mismatching components between the adjoint gradient and central
    /// differences with step `1e-4`.
    pub fn fd_mismatches(&self) -> Vec<(usize, f64, f64)> {
        let flat = self.policy.flat_params();
        let (_, analytic) = self.gradient(GradMethod::Adjoint);
        let numeric = finite_difference(|p| self.loss_at(p), &flat, 1e-4);
        gradient_mismatches(&analytic, &numeric, 1e-5, 1e-7)
    }
}
