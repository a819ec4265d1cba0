//! Minimal reverse-mode engine over row-major matrices.
//!
//! A [`Tape`] records every operation as it runs; [`Tape::backward`] walks the
//! records once in reverse and accumulates gradients into the leaves. Node ids
//! are handed out in creation order, which is already a topological order.

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::vqc::{self, CircuitSpec, GradMethod};

/// Dense 2-D array, `rows × cols`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Tensor {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(shape_err(
                "Tensor::new",
                format!("{} values for shape {rows}x{cols}", values.len()),
            ));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn row(values: Vec<f64>) -> Self {
        Self {
            rows: 1,
            cols: values.len(),
            values,
        }
    }

    pub fn scalar(v: f64) -> Self {
        Self::row(vec![v])
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(shape_err("Tensor::from_rows", "ragged rows"));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            values: rows.concat(),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn row_slice(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Sigmoid,
    Tanh,
    Arctan,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Linear {
        input: Var,
        weight: Var,
        bias: Var,
    },
    Unary(UnaryOp, Var),
    Binary(BinaryOp, Var, Var),
    Scale(Var, f64),
    SliceCols {
        input: Var,
        start: usize,
    },
    ConcatCols(Var, Var),
    Gather {
        input: Var,
        index: Vec<usize>,
    },
    Sum(Var),
    Vqc {
        inputs: Var,
        params: Var,
        spec: CircuitSpec,
    },
}

#[derive(Debug, Clone)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
    grad: Option<Vec<f64>>,
}

/// Records operations for a single forward/backward pass.
#[derive(Debug, Clone)]
pub struct Tape {
    nodes: Vec<Node>,
    checked: bool,
    grad_method: GradMethod,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Tape {
    /// Unchecked tape with adjoint circuit gradients.
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            checked: false,
            grad_method: GradMethod::Adjoint,
        }
    }

    /// Checked tapes reject non-finite values when nodes are created.
    pub fn checked() -> Self {
        Self {
            checked: true,
            ..Self::new()
        }
    }

    pub fn with_checked(mut self, checked: bool) -> Self {
        self.checked = checked;
        self
    }

    pub fn with_grad_method(mut self, method: GradMethod) -> Self {
        self.grad_method = method;
        self
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool, name: &'static str) -> Result<Var> {
        if self.checked && !value.all_finite() {
            return Err(Error::NonFinite(name));
        }
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
            grad: None,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Trainable leaf.
    pub fn param(&mut self, value: Tensor) -> Result<Var> {
        self.push(value, Op::Leaf, true, "param")
    }

    /// Leaf that never receives a gradient.
    pub fn constant(&mut self, value: Tensor) -> Result<Var> {
        self.push(value, Op::Leaf, false, "constant")
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    /// Accumulated gradient of a node, present after a backward pass reached it.
    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        self.nodes[v.0].grad.as_deref()
    }

    pub fn zero_grad(&mut self) {
        for n in &mut self.nodes {
            n.grad = None;
        }
    }

    /// `input · weightᵀ + bias` for `input: b×n`, `weight: m×n`, `bias: 1×m`.
    pub fn linear(&mut self, input: Var, weight: Var, bias: Var) -> Result<Var> {
        let (x, w, b) = (self.value(input), self.value(weight), self.value(bias));
        if x.cols != w.cols || b.rows != 1 || b.cols != w.rows {
            return Err(shape_err(
                "linear",
                format!("input {:?}, weight {:?}, bias {:?}", x.shape(), w.shape(), b.shape()),
            ));
        }
        let (rows, n, m) = (x.rows, x.cols, w.rows);
        let mut out = Vec::with_capacity(rows * m);
        for r in 0..rows {
            let xr = &x.values[r * n..(r + 1) * n];
            for j in 0..m {
                let wj = &w.values[j * n..(j + 1) * n];
                out.push(b.values[j] + xr.iter().zip(wj).map(|(a, c)| a * c).sum::<f64>());
            }
        }
        let rg = self.rg(input) || self.rg(weight) || self.rg(bias);
        self.push(
            Tensor::new(rows, m, out)?,
            Op::Linear { input, weight, bias },
            rg,
            "linear",
        )
    }

    pub fn unary(&mut self, op: UnaryOp, x: Var) -> Result<Var> {
        let t = self.value(x);
        let f: fn(f64) -> f64 = match op {
            UnaryOp::Sigmoid => sigmoid,
            UnaryOp::Tanh => f64::tanh,
            UnaryOp::Arctan => f64::atan,
            UnaryOp::Square => |v| v * v,
        };
        let out = Tensor {
            rows: t.rows,
            cols: t.cols,
            values: t.values.iter().map(|&v| f(v)).collect(),
        };
        let rg = self.rg(x);
        self.push(out, Op::Unary(op, x), rg, "unary")
    }

    pub fn sigmoid(&mut self, x: Var) -> Result<Var> {
        self.unary(UnaryOp::Sigmoid, x)
    }

    pub fn tanh(&mut self, x: Var) -> Result<Var> {
        self.unary(UnaryOp::Tanh, x)
    }

    pub fn arctan(&mut self, x: Var) -> Result<Var> {
        self.unary(UnaryOp::Arctan, x)
    }

    pub fn square(&mut self, x: Var) -> Result<Var> {
        self.unary(UnaryOp::Square, x)
    }

    /// Same-shape elementwise arithmetic.
    pub fn binary(&mut self, op: BinaryOp, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(shape_err(
                "elementwise",
                format!("{:?} vs {:?}", ta.shape(), tb.shape()),
            ));
        }
        let values = ta
            .values
            .iter()
            .zip(&tb.values)
            .map(|(&x, &y)| match op {
                BinaryOp::Add => x + y,
                BinaryOp::Sub => x - y,
                BinaryOp::Mul => x * y,
            })
            .collect();
        let out = Tensor {
            rows: ta.rows,
            cols: ta.cols,
            values,
        };
        let rg = self.rg(a) || self.rg(b);
        self.push(out, Op::Binary(op, a, b), rg, "binary")
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(BinaryOp::Add, a, b)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(BinaryOp::Sub, a, b)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(BinaryOp::Mul, a, b)
    }

    pub fn scale(&mut self, x: Var, k: f64) -> Result<Var> {
        let t = self.value(x);
        let out = Tensor {
            rows: t.rows,
            cols: t.cols,
            values: t.values.iter().map(|v| v * k).collect(),
        };
        let rg = self.rg(x);
        self.push(out, Op::Scale(x, k), rg, "scale")
    }

    /// Columns `start..end` of every row.
    pub fn slice_cols(&mut self, x: Var, start: usize, end: usize) -> Result<Var> {
        let t = self.value(x);
        if start > end || end > t.cols {
            return Err(shape_err("slice_cols", format!("{start}..{end} of {} columns", t.cols)));
        }
        let mut values = Vec::with_capacity(t.rows * (end - start));
        for r in 0..t.rows {
            values.extend_from_slice(&t.values[r * t.cols + start..r * t.cols + end]);
        }
        let out = Tensor {
            rows: t.rows,
            cols: end - start,
            values,
        };
        let rg = self.rg(x);
        self.push(out, Op::SliceCols { input: x, start }, rg, "slice_cols")
    }

    /// Row-wise `[a | b]`.
    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.rows != tb.rows {
            return Err(shape_err(
                "concat_cols",
                format!("{:?} vs {:?}", ta.shape(), tb.shape()),
            ));
        }
        let cols = ta.cols + tb.cols;
        let mut values = Vec::with_capacity(ta.rows * cols);
        for r in 0..ta.rows {
            values.extend_from_slice(ta.row_slice(r));
            values.extend_from_slice(tb.row_slice(r));
        }
        let out = Tensor {
            rows: ta.rows,
            cols,
            values,
        };
        let rg = self.rg(a) || self.rg(b);
        self.push(out, Op::ConcatCols(a, b), rg, "concat_cols")
    }

    /// Picks column `index[r]` from row `r`, giving a `b×1` column.
    pub fn gather(&mut self, x: Var, index: &[usize]) -> Result<Var> {
        let t = self.value(x);
        if index.len() != t.rows || index.iter().any(|&i| i >= t.cols) {
            return Err(shape_err(
                "gather",
                format!("{} indices into {:?}", index.len(), t.shape()),
            ));
        }
        let values = index
            .iter()
            .enumerate()
            .map(|(r, &c)| t.values[r * t.cols + c])
            .collect();
        let out = Tensor {
            rows: t.rows,
            cols: 1,
            values,
        };
        let rg = self.rg(x);
        self.push(
            out,
            Op::Gather {
                input: x,
                index: index.to_vec(),
            },
            rg,
            "gather",
        )
    }

    /// Sum of all entries as a `1×1` tensor.
    pub fn sum(&mut self, x: Var) -> Result<Var> {
        let s = self.value(x).values.iter().sum();
        let rg = self.rg(x);
        self.push(Tensor::scalar(s), Op::Sum(x), rg, "sum")
    }

    /// Runs the circuit on every row of `inputs: b×n_qubits` with trainable
    /// angles `params: 1×(3·n_qubits·n_layers)`; output row `i` holds the
    /// per-qubit `⟨Z⟩` for input row `i`.
    pub fn vqc_block(&mut self, inputs: Var, params: Var, spec: CircuitSpec) -> Result<Var> {
        let (x, p) = (self.value(inputs), self.value(params));
        if x.cols != spec.n_qubits || p.len() != spec.param_count() {
            return Err(shape_err(
                "vqc_block",
                format!(
                    "inputs {:?}, params {:?} for {} qubits x {} layers",
                    x.shape(),
                    p.shape(),
                    spec.n_qubits,
                    spec.n_layers
                ),
            ));
        }
        let mut values = Vec::with_capacity(x.rows * spec.n_qubits);
        for r in 0..x.rows {
            values.extend(vqc::run_raw(&spec, x.row_slice(r), &p.values)?);
        }
        let out = Tensor {
            rows: x.rows,
            cols: spec.n_qubits,
            values,
        };
        let rg = self.rg(inputs) || self.rg(params);
        self.push(out, Op::Vqc { inputs, params, spec }, rg, "vqc_block")
    }

    /// Back-propagates from a `1×1` root and adds the result to the stored
    /// gradients of every node that requires one.
    pub fn backward(&mut self, root: Var) -> Result<()> {
        if self.value(root).len() != 1 {
            return Err(shape_err(
                "backward",
                format!("root must be scalar, got {:?}", self.shape(root)),
            ));
        }
        let mut adj: Vec<Option<Vec<f64>>> = vec![None; root.0 + 1];
        adj[root.0] = Some(vec![1.0]);

        for id in (0..=root.0).rev() {
            let Some(g) = adj[id].take() else { continue };
            if !self.nodes[id].requires_grad {
                continue;
            }
            self.propagate(id, &g, &mut adj)?;
            let node = &mut self.nodes[id];
            match &mut node.grad {
                Some(acc) => acc.iter_mut().zip(&g).for_each(|(a, b)| *a += b),
                None => node.grad = Some(g),
            }
        }
        Ok(())
    }

    fn propagate(&self, id: usize, g: &[f64], adj: &mut [Option<Vec<f64>>]) -> Result<()> {
        let node = &self.nodes[id];
        let mut send = |v: Var, contrib: Vec<f64>| {
            if !self.nodes[v.0].requires_grad {
                return;
            }
            match &mut adj[v.0] {
                Some(acc) => acc.iter_mut().zip(&contrib).for_each(|(a, b)| *a += b),
                slot => *slot = Some(contrib),
            }
        };
        match &node.op {
            Op::Leaf => {}
            Op::Linear { input, weight, bias } => {
                let (x, w) = (self.value(*input), self.value(*weight));
                let (rows, n, m) = (x.rows, x.cols, w.rows);
                if self.rg(*input) {
                    let mut dx = vec![0.0; rows * n];
                    for r in 0..rows {
                        for j in 0..m {
                            let gj = g[r * m + j];
                            if gj != 0.0 {
                                let wj = &w.values[j * n..(j + 1) * n];
                                for (d, wv) in dx[r * n..(r + 1) * n].iter_mut().zip(wj) {
                                    *d += gj * wv;
                                }
                            }
                        }
                    }
                    send(*input, dx);
                }
                if self.rg(*weight) {
                    let mut dw = vec![0.0; m * n];
                    for r in 0..rows {
                        let xr = &x.values[r * n..(r + 1) * n];
                        for j in 0..m {
                            let gj = g[r * m + j];
                            if gj != 0.0 {
                                for (d, xv) in dw[j * n..(j + 1) * n].iter_mut().zip(xr) {
                                    *d += gj * xv;
                                }
                            }
                        }
                    }
                    send(*weight, dw);
                }
                if self.rg(*bias) {
                    let mut db = vec![0.0; m];
                    for r in 0..rows {
                        for j in 0..m {
                            db[j] += g[r * m + j];
                        }
                    }
                    send(*bias, db);
                }
            }
            Op::Unary(op, x) => {
                let xin = &self.value(*x).values;
                let out = &node.value.values;
                let d = g
                    .iter()
                    .zip(xin.iter().zip(out))
                    .map(|(&gi, (&xi, &yi))| {
                        gi * match op {
                            UnaryOp::Sigmoid => yi * (1.0 - yi),
                            UnaryOp::Tanh => 1.0 - yi * yi,
                            UnaryOp::Arctan => 1.0 / (1.0 + xi * xi),
                            UnaryOp::Square => 2.0 * xi,
                        }
                    })
                    .collect();
                send(*x, d);
            }
            Op::Binary(op, a, b) => match op {
                BinaryOp::Add => {
                    send(*a, g.to_vec());
                    send(*b, g.to_vec());
                }
                BinaryOp::Sub => {
                    send(*a, g.to_vec());
                    send(*b, g.iter().map(|v| -v).collect());
                }
                BinaryOp::Mul => {
                    let (va, vb) = (&self.value(*a).values, &self.value(*b).values);
                    if self.rg(*a) {
                        send(*a, g.iter().zip(vb).map(|(x, y)| x * y).collect());
                    }
                    if self.rg(*b) {
                        send(*b, g.iter().zip(va).map(|(x, y)| x * y).collect());
                    }
                }
            },
            Op::Scale(x, k) => send(*x, g.iter().map(|v| v * k).collect()),
            Op::SliceCols { input, start } => {
                let t = self.value(*input);
                let w = node.value.cols;
                let mut d = vec![0.0; t.len()];
                for r in 0..t.rows {
                    d[r * t.cols + start..r * t.cols + start + w].copy_from_slice(&g[r * w..(r + 1) * w]);
                }
                send(*input, d);
            }
            Op::ConcatCols(a, b) => {
                let (ca, cb) = (self.value(*a).cols, self.value(*b).cols);
                let rows = node.value.rows;
                let mut da = Vec::with_capacity(rows * ca);
                let mut db = Vec::with_capacity(rows * cb);
                for r in 0..rows {
                    let gr = &g[r * (ca + cb)..(r + 1) * (ca + cb)];
                    da.extend_from_slice(&gr[..ca]);
                    db.extend_from_slice(&gr[ca..]);
                }
                send(*a, da);
                send(*b, db);
            }
            Op::Gather { input, index } => {
                let t = self.value(*input);
                let mut d = vec![0.0; t.len()];
                for (r, &c) in index.iter().enumerate() {
                    d[r * t.cols + c] = g[r];
                }
                send(*input, d);
            }
            Op::Sum(x) => send(*x, vec![g[0]; self.value(*x).len()]),
            Op::Vqc { inputs, params, spec } => {
                let (x, p) = (self.value(*inputs), self.value(*params));
                let n = spec.n_qubits;
                let mut dx = Vec::with_capacity(x.len());
                let mut dp = vec![0.0; p.len()];
                for r in 0..x.rows {
                    let up = &g[r * n..(r + 1) * n];
                    if up.iter().all(|&v| v == 0.0) {
                        dx.extend(std::iter::repeat_n(0.0, n));
                        continue;
                    }
                    let vjp = vqc::vqc_vjp(spec, x.row_slice(r), &p.values, up, self.grad_method)?;
                    dx.extend(vjp.d_input);
                    dp.iter_mut().zip(&vjp.d_params).for_each(|(a, b)| *a += b);
                }
                send(*inputs, dx);
                send(*params, dp);
            }
        }
        Ok(())
    }
}
