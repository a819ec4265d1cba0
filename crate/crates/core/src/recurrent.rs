//! Recurrent Q-networks: the QLSTM cell, the classical LSTM baseline, and the
//! dressed model that sandwiches either core between linear layers.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autograd::{Tape, Tensor, Var};
use crate::error::{shape_err, Error, Result};
use crate::vqc::{CircuitSpec, VqcParams};

pub const N_ACTIONS: usize = 2;

/// Fully connected layer `y = x·Wᵀ + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Linear {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weight: Tensor::zeros(outputs, inputs),
            bias: Tensor::zeros(1, outputs),
        }
    }

    /// Weights and biases uniform in `±1/√inputs`.
    pub fn random<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let mut layer = Self::zeros(inputs, outputs);
        let k = 1.0 / (inputs as f64).sqrt();
        fill_uniform(layer.weight.values_mut(), k, rng);
        fill_uniform(layer.bias.values_mut(), k, rng);
        layer
    }

    pub fn inputs(&self) -> usize {
        self.weight.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.rows()
    }

    fn bind(&self, tape: &mut Tape, trainable: bool, vars: &mut Vec<Var>) -> Result<BoundLinear> {
        let weight = leaf(tape, self.weight.clone(), trainable, vars)?;
        let bias = leaf(tape, self.bias.clone(), trainable, vars)?;
        Ok(BoundLinear { weight, bias })
    }
}

fn fill_uniform<R: Rng + ?Sized>(values: &mut [f64], bound: f64, rng: &mut R) {
    for v in values {
        *v = rng.gen_range(-bound..=bound);
    }
}

fn leaf(tape: &mut Tape, t: Tensor, trainable: bool, vars: &mut Vec<Var>) -> Result<Var> {
    let v = if trainable { tape.param(t)? } else { tape.constant(t)? };
    vars.push(v);
    Ok(v)
}

#[derive(Debug, Clone, Copy)]
struct BoundLinear {
    weight: Var,
    bias: Var,
}

impl BoundLinear {
    fn forward(&self, tape: &mut Tape, x: Var) -> Result<Var> {
        tape.linear(x, self.weight, self.bias)
    }
}

/// LSTM cell whose forget, input, candidate, output and readout blocks are
/// variational circuits on `input_size + hidden_size` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QlstmCell {
    input_size: usize,
    hidden_size: usize,
    spec: CircuitSpec,
    /// Forget, input, candidate, output, readout.
    vqcs: Vec<VqcParams>,
}

impl QlstmCell {
    pub fn new<R: Rng + ?Sized>(input_size: usize, hidden_size: usize, n_layers: usize, rng: &mut R) -> Result<Self> {
        let spec = Self::spec_for(input_size, hidden_size, n_layers)?;
        let vqcs = (0..5).map(|_| VqcParams::random(spec, rng)).collect();
        Ok(Self {
            input_size,
            hidden_size,
            spec,
            vqcs,
        })
    }

    pub fn from_params(input_size: usize, hidden_size: usize, vqcs: Vec<VqcParams>) -> Result<Self> {
        let n_layers = vqcs.first().map_or(1, |p| p.spec().n_layers);
        let spec = Self::spec_for(input_size, hidden_size, n_layers)?;
        if vqcs.len() != 5 || vqcs.iter().any(|p| p.spec() != spec) {
            return Err(shape_err("QlstmCell", "need five circuits sharing one spec"));
        }
        Ok(Self {
            input_size,
            hidden_size,
            spec,
            vqcs,
        })
    }

    fn spec_for(input_size: usize, hidden_size: usize, n_layers: usize) -> Result<CircuitSpec> {
        if input_size == 0 || hidden_size == 0 {
            return Err(Error::Config("QLSTM sizes must be positive".into()));
        }
        CircuitSpec::new(input_size + hidden_size, n_layers)
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    /// Width of the cell state, one entry per qubit.
    pub fn cell_size(&self) -> usize {
        self.spec.n_qubits
    }

    pub fn spec(&self) -> CircuitSpec {
        self.spec
    }

    pub fn circuits(&self) -> &[VqcParams] {
        &self.vqcs
    }

    pub fn param_count(&self) -> usize {
        5 * self.spec.param_count()
    }

    /// One step on single vectors, returning `(h_t, c_t)`.
    pub fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut tape = Tape::new();
        let mut vars = Vec::new();
        let core = Core::Qlstm(self.clone()).bind(&mut tape, false, &mut vars)?;
        let (xv, hv, cv) = row_inputs(&mut tape, x, h_prev, c_prev)?;
        let (h, c) = core.step(&mut tape, xv, hv, cv)?;
        Ok((tape.value(h).values().to_vec(), tape.value(c).values().to_vec()))
    }
}

/// Standard four-gate LSTM with separate input and recurrent biases, gate
/// order input, forget, candidate, output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCell {
    input_size: usize,
    hidden_size: usize,
    pub w_ih: Tensor,
    pub w_hh: Tensor,
    pub b_ih: Tensor,
    pub b_hh: Tensor,
}

impl LstmCell {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        Self {
            input_size,
            hidden_size,
            w_ih: Tensor::zeros(4 * hidden_size, input_size),
            w_hh: Tensor::zeros(4 * hidden_size, hidden_size),
            b_ih: Tensor::zeros(1, 4 * hidden_size),
            b_hh: Tensor::zeros(1, 4 * hidden_size),
        }
    }

    /// Input-path tensors uniform in `±1/√input_size`, recurrent-path tensors
    /// in `±1/√hidden_size`.
    pub fn random<R: Rng + ?Sized>(input_size: usize, hidden_size: usize, rng: &mut R) -> Self {
        let mut cell = Self::zeros(input_size, hidden_size);
        let ki = 1.0 / (input_size as f64).sqrt();
        let kh = 1.0 / (hidden_size as f64).sqrt();
        fill_uniform(cell.w_ih.values_mut(), ki, rng);
        fill_uniform(cell.w_hh.values_mut(), kh, rng);
        fill_uniform(cell.b_ih.values_mut(), ki, rng);
        fill_uniform(cell.b_hh.values_mut(), kh, rng);
        cell
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    pub fn param_count(&self) -> usize {
        4 * (self.hidden_size * (self.input_size + self.hidden_size) + 2 * self.hidden_size)
    }

    pub fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut tape = Tape::new();
        let mut vars = Vec::new();
        let core = Core::Lstm(self.clone()).bind(&mut tape, false, &mut vars)?;
        let (xv, hv, cv) = row_inputs(&mut tape, x, h_prev, c_prev)?;
        let (h, c) = core.step(&mut tape, xv, hv, cv)?;
        Ok((tape.value(h).values().to_vec(), tape.value(c).values().to_vec()))
    }
}

fn row_inputs(tape: &mut Tape, x: &[f64], h: &[f64], c: &[f64]) -> Result<(Var, Var, Var)> {
    Ok((
        tape.constant(Tensor::row(x.to_vec()))?,
        tape.constant(Tensor::row(h.to_vec()))?,
        tape.constant(Tensor::row(c.to_vec()))?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Core {
    Qlstm(QlstmCell),
    Lstm(LstmCell),
}

impl Core {
    pub fn input_size(&self) -> usize {
        match self {
            Core::Qlstm(c) => c.input_size,
            Core::Lstm(c) => c.input_size,
        }
    }

    pub fn hidden_size(&self) -> usize {
        match self {
            Core::Qlstm(c) => c.hidden_size,
            Core::Lstm(c) => c.hidden_size,
        }
    }

    pub fn cell_size(&self) -> usize {
        match self {
            Core::Qlstm(c) => c.cell_size(),
            Core::Lstm(c) => c.hidden_size,
        }
    }

    fn tensors(&self) -> Vec<&[f64]> {
        match self {
            Core::Qlstm(c) => c.vqcs.iter().map(|p| p.angles()).collect(),
            Core::Lstm(c) => vec![c.w_ih.values(), c.w_hh.values(), c.b_ih.values(), c.b_hh.values()],
        }
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            Core::Qlstm(c) => c.vqcs.iter_mut().map(|p| p.angles_mut()).collect(),
            Core::Lstm(c) => vec![
                c.w_ih.values_mut(),
                c.w_hh.values_mut(),
                c.b_ih.values_mut(),
                c.b_hh.values_mut(),
            ],
        }
    }

    fn bind(&self, tape: &mut Tape, trainable: bool, vars: &mut Vec<Var>) -> Result<BoundCore> {
        match self {
            Core::Qlstm(c) => {
                let bound = c
                    .vqcs
                    .iter()
                    .map(|p| leaf(tape, Tensor::row(p.angles().to_vec()), trainable, vars))
                    .collect::<Result<Vec<_>>>()?;
                let vqcs: [Var; 5] = bound.try_into().expect("QlstmCell holds five circuits");
                Ok(BoundCore::Qlstm {
                    spec: c.spec,
                    hidden_size: c.hidden_size,
                    input_size: c.input_size,
                    vqcs,
                })
            }
            Core::Lstm(c) => Ok(BoundCore::Lstm {
                hidden_size: c.hidden_size,
                input_size: c.input_size,
                w_ih: leaf(tape, c.w_ih.clone(), trainable, vars)?,
                w_hh: leaf(tape, c.w_hh.clone(), trainable, vars)?,
                b_ih: leaf(tape, c.b_ih.clone(), trainable, vars)?,
                b_hh: leaf(tape, c.b_hh.clone(), trainable, vars)?,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum BoundCore {
    Qlstm {
        spec: CircuitSpec,
        input_size: usize,
        hidden_size: usize,
        vqcs: [Var; 5],
    },
    Lstm {
        input_size: usize,
        hidden_size: usize,
        w_ih: Var,
        w_hh: Var,
        b_ih: Var,
        b_hh: Var,
    },
}

impl BoundCore {
    fn check(&self, tape: &Tape, x: Var, h: Var, c: Var) -> Result<()> {
        let (input, hidden, cell) = match *self {
            BoundCore::Qlstm {
                spec,
                input_size,
                hidden_size,
                ..
            } => (input_size, hidden_size, spec.n_qubits),
            BoundCore::Lstm {
                input_size,
                hidden_size,
                ..
            } => (input_size, hidden_size, hidden_size),
        };
        let rows = tape.shape(x).0;
        if tape.shape(x) != (rows, input) || tape.shape(h) != (rows, hidden) || tape.shape(c) != (rows, cell) {
            return Err(shape_err(
                "recurrent step",
                format!(
                    "x {:?}, h {:?}, c {:?}; expected widths {input}, {hidden}, {cell}",
                    tape.shape(x),
                    tape.shape(h),
                    tape.shape(c)
                ),
            ));
        }
        Ok(())
    }

    fn step(&self, tape: &mut Tape, x: Var, h_prev: Var, c_prev: Var) -> Result<(Var, Var)> {
        self.check(tape, x, h_prev, c_prev)?;
        match *self {
            BoundCore::Qlstm {
                spec,
                hidden_size,
                vqcs,
                ..
            } => {
                let v = tape.concat_cols(h_prev, x)?;
                let f = tape.vqc_block(v, vqcs[0], spec)?;
                let f = tape.sigmoid(f)?;
                let i = tape.vqc_block(v, vqcs[1], spec)?;
                let i = tape.sigmoid(i)?;
                let cand = tape.vqc_block(v, vqcs[2], spec)?;
                let cand = tape.tanh(cand)?;
                let keep = tape.mul(f, c_prev)?;
                let write = tape.mul(i, cand)?;
                let c = tape.add(keep, write)?;
                let o = tape.vqc_block(v, vqcs[3], spec)?;
                let o = tape.sigmoid(o)?;
                let tc = tape.tanh(c)?;
                let gated = tape.mul(o, tc)?;
                let h_full = tape.vqc_block(gated, vqcs[4], spec)?;
                let h = tape.slice_cols(h_full, 0, hidden_size)?;
                Ok((h, c))
            }
            BoundCore::Lstm {
                hidden_size: n,
                w_ih,
                w_hh,
                b_ih,
                b_hh,
                ..
            } => {
                let a = tape.linear(x, w_ih, b_ih)?;
                let b = tape.linear(h_prev, w_hh, b_hh)?;
                let gates = tape.add(a, b)?;
                let i = tape.slice_cols(gates, 0, n)?;
                let i = tape.sigmoid(i)?;
                let f = tape.slice_cols(gates, n, 2 * n)?;
                let f = tape.sigmoid(f)?;
                let g = tape.slice_cols(gates, 2 * n, 3 * n)?;
                let g = tape.tanh(g)?;
                let o = tape.slice_cols(gates, 3 * n, 4 * n)?;
                let o = tape.sigmoid(o)?;
                let keep = tape.mul(f, c_prev)?;
                let write = tape.mul(i, g)?;
                let c = tape.add(keep, write)?;
                let tc = tape.tanh(c)?;
                let h = tape.mul(o, tc)?;
                Ok((h, c))
            }
        }
    }
}

/// Model family and size, named as on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModelKind {
    /// 8-qubit QLSTM with the given number of circuit layers.
    Qlstm { layers: usize },
    /// Classical LSTM with the given hidden width.
    Lstm { hidden: usize },
}

impl ModelKind {
    pub const PAPER_GRID: [ModelKind; 4] = [
        ModelKind::Qlstm { layers: 1 },
        ModelKind::Qlstm { layers: 2 },
        ModelKind::Lstm { hidden: 8 },
        ModelKind::Lstm { hidden: 16 },
    ];

    pub fn is_quantum(&self) -> bool {
        matches!(self, ModelKind::Qlstm { .. })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Qlstm { layers } => write!(f, "qlstm-{layers}"),
            ModelKind::Lstm { hidden } => write!(f, "lstm-{hidden}"),
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "unknown model '{s}' (expected qlstm-<layers> or lstm-<hidden>)"
            ))
        };
        let (family, size) = s.split_once('-').ok_or_else(bad)?;
        let size: usize = size.parse().map_err(|_| bad())?;
        if size == 0 {
            return Err(bad());
        }
        match family {
            "qlstm" => Ok(ModelKind::Qlstm { layers: size }),
            "lstm" => Ok(ModelKind::Lstm { hidden: size }),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for ModelKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ModelKind> for String {
    fn from(k: ModelKind) -> String {
        k.to_string()
    }
}

/// QLSTM width used for every quantum model: 4 inputs + 4 hidden = 8 qubits.
pub const QLSTM_INPUT: usize = 4;
pub const QLSTM_HIDDEN: usize = 4;

/// Recurrent state carried between environment steps.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

/// `obs → Linear → core → Linear → Q-values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DressedModel {
    pub pre: Linear,
    pub core: Core,
    pub post: Linear,
}

impl DressedModel {
    pub fn new<R: Rng + ?Sized>(kind: ModelKind, obs_dim: usize, rng: &mut R) -> Result<Self> {
        match kind {
            ModelKind::Qlstm { layers } => Self::qlstm(obs_dim, QLSTM_INPUT, QLSTM_HIDDEN, layers, rng),
            ModelKind::Lstm { hidden } => Self::lstm(obs_dim, hidden, hidden, rng),
        }
    }

    pub fn qlstm<R: Rng + ?Sized>(
        obs_dim: usize,
        input_size: usize,
        hidden_size: usize,
        n_layers: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let pre = Linear::random(obs_dim, input_size, rng);
        let core = Core::Qlstm(QlstmCell::new(input_size, hidden_size, n_layers, rng)?);
        let post = Linear::random(hidden_size, N_ACTIONS, rng);
        Self::from_parts(pre, core, post)
    }

    pub fn lstm<R: Rng + ?Sized>(obs_dim: usize, input_size: usize, hidden_size: usize, rng: &mut R) -> Result<Self> {
        if obs_dim == 0 || input_size == 0 || hidden_size == 0 {
            return Err(Error::Config("LSTM sizes must be positive".into()));
        }
        let pre = Linear::random(obs_dim, input_size, rng);
        let core = Core::Lstm(LstmCell::random(input_size, hidden_size, rng));
        let post = Linear::random(hidden_size, N_ACTIONS, rng);
        Self::from_parts(pre, core, post)
    }

    pub fn from_parts(pre: Linear, core: Core, post: Linear) -> Result<Self> {
        if pre.outputs() != core.input_size() || post.inputs() != core.hidden_size() || pre.inputs() == 0 {
            return Err(shape_err(
                "DressedModel",
                format!(
                    "pre {}→{}, core in {} hidden {}, post {}→{}",
                    pre.inputs(),
                    pre.outputs(),
                    core.input_size(),
                    core.hidden_size(),
                    post.inputs(),
                    post.outputs()
                ),
            ));
        }
        Ok(Self { pre, core, post })
    }

    pub fn obs_dim(&self) -> usize {
        self.pre.inputs()
    }

    pub fn n_actions(&self) -> usize {
        self.post.outputs()
    }

    pub fn zero_hidden(&self) -> HiddenState {
        HiddenState {
            h: vec![0.0; self.core.hidden_size()],
            c: vec![0.0; self.core.cell_size()],
        }
    }

    fn tensors(&self) -> Vec<&[f64]> {
        let mut out = vec![self.pre.weight.values(), self.pre.bias.values()];
        out.extend(self.core.tensors());
        out.push(self.post.weight.values());
        out.push(self.post.bias.values());
        out
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = vec![self.pre.weight.values_mut(), self.pre.bias.values_mut()];
        out.extend(self.core.tensors_mut());
        out.push(self.post.weight.values_mut());
        out.push(self.post.bias.values_mut());
        out
    }

    /// All trainable scalars in binding order.
    pub fn flat_params(&self) -> Vec<f64> {
        self.tensors().concat()
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        let total = count_parameters(self);
        if flat.len() != total {
            return Err(shape_err(
                "set_flat_params",
                format!("{} values for {total} parameters", flat.len()),
            ));
        }
        let mut offset = 0;
        for t in self.tensors_mut() {
            t.copy_from_slice(&flat[offset..offset + t.len()]);
            offset += t.len();
        }
        Ok(())
    }

    /// Registers every parameter on `tape`, trainable or constant.
    pub fn bind(&self, tape: &mut Tape, trainable: bool) -> Result<BoundModel> {
        let mut vars = Vec::new();
        let pre = self.pre.bind(tape, trainable, &mut vars)?;
        let core = self.core.bind(tape, trainable, &mut vars)?;
        let post = self.post.bind(tape, trainable, &mut vars)?;
        Ok(BoundModel {
            pre,
            core,
            post,
            obs_dim: self.obs_dim(),
            hidden_size: self.core.hidden_size(),
            cell_size: self.core.cell_size(),
            vars,
        })
    }

    /// One environment step on a single observation.
    pub fn step(&self, obs: &[f64], state: &HiddenState) -> Result<([f64; N_ACTIONS], HiddenState)> {
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape, false)?;
        let (o, h, c) = row_inputs(&mut tape, obs, &state.h, &state.c)?;
        let (q, h, c) = bound.step(&mut tape, o, h, c)?;
        let qv = tape.value(q).values();
        Ok((
            [qv[0], qv[1]],
            HiddenState {
                h: tape.value(h).values().to_vec(),
                c: tape.value(c).values().to_vec(),
            },
        ))
    }

    /// Q-values for every observation, starting from a zero hidden state.
    pub fn forward_sequence(&self, observations: &[Vec<f64>]) -> Result<Vec<[f64; N_ACTIONS]>> {
        let mut state = self.zero_hidden();
        let mut out = Vec::with_capacity(observations.len());
        for obs in observations {
            let (q, next) = self.step(obs, &state)?;
            out.push(q);
            state = next;
        }
        Ok(out)
    }
}

/// Exact trainable scalar count: classical weights and biases plus circuit
/// angles.
pub fn count_parameters(model: &DressedModel) -> usize {
    model.tensors().iter().map(|t| t.len()).sum()
}

/// A [`DressedModel`] whose parameters live on a tape.
#[derive(Debug, Clone)]
pub struct BoundModel {
    pre: BoundLinear,
    core: BoundCore,
    post: BoundLinear,
    obs_dim: usize,
    hidden_size: usize,
    cell_size: usize,
    vars: Vec<Var>,
}

impl BoundModel {
    /// Zero `(h, c)` for a batch of `rows`.
    pub fn zero_state(&self, tape: &mut Tape, rows: usize) -> Result<(Var, Var)> {
        Ok((
            tape.constant(Tensor::zeros(rows, self.hidden_size))?,
            tape.constant(Tensor::zeros(rows, self.cell_size))?,
        ))
    }

    /// Returns `(q, h, c)` for a `rows × obs_dim` batch of observations.
    pub fn step(&self, tape: &mut Tape, obs: Var, h: Var, c: Var) -> Result<(Var, Var, Var)> {
        if tape.shape(obs).1 != self.obs_dim {
            return Err(shape_err(
                "forward",
                format!("observation width {} != {}", tape.shape(obs).1, self.obs_dim),
            ));
        }
        let x = self.pre.forward(tape, obs)?;
        let (h, c) = self.core.step(tape, x, h, c)?;
        let q = self.post.forward(tape, h)?;
        Ok((q, h, c))
    }

    /// Runs a batch of equal-length sequences (`obs[t]` is `rows × obs_dim`)
    /// from a zero state and returns the Q-values at every step.
    pub fn forward_sequence(&self, tape: &mut Tape, obs: &[Var]) -> Result<Vec<Var>> {
        let Some(first) = obs.first() else {
            return Ok(Vec::new());
        };
        let rows = tape.shape(*first).0;
        let (mut h, mut c) = self.zero_state(tape, rows)?;
        let mut out = Vec::with_capacity(obs.len());
        for &o in obs {
            let (q, h2, c2) = self.step(tape, o, h, c)?;
            out.push(q);
            h = h2;
            c = c2;
        }
        Ok(out)
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    /// Flat gradient in [`DressedModel::flat_params`] order; zero where no
    /// gradient reached.
    pub fn grads(&self, tape: &Tape) -> Vec<f64> {
        let mut out = Vec::new();
        for &v in &self.vars {
            match tape.grad(v) {
                Some(g) => out.extend_from_slice(g),
                None => out.extend(std::iter::repeat_n(0.0, tape.value(v).len())),
            }
        }
        out
    }
}
