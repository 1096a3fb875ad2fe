use alloc::vec;
use alloc::vec::Vec;

use super::array::gemm;
use super::params::{ParamGrads, ParamId, Params};
use super::{Array2, NnError};
use crate::math;

/// Handle to a node of a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(usize);

impl Var {
    pub fn id(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Constant,
    Linear { x: Var, w: Var, b: Var },
    Relu(Var),
    Sigmoid(Var),
    SoftmaxRows(Var),
    SoftmaxCols(Var),
    MatMul(Var, Var),
    Transpose(Var),
    ConcatCols(Vec<Var>),
    Reshape(Var),
    TileRows { x: Var, times: usize },
    MaxPoolGroups { x: Var, argmax: Vec<usize> },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    Square(Var),
    SumAll(Var),
    MeanAll(Var),
    GatherRows { x: Var, index: Vec<usize> },
    RowNorms(Var),
}

#[derive(Debug, Clone)]
struct Node {
    value: Array2,
    op: Op,
}

/// A reverse-mode differentiable computation over [`Array2`] values.
///
/// Nodes are appended in evaluation order, so every node's parents have
/// smaller ids and a reverse sweep is a valid topological order. A graph is
/// built for one evaluation and then discarded.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    nodes: Vec<Node>,
    grads: Vec<Option<Array2>>,
    params: Vec<(Var, ParamId)>,
    frozen: bool,
}

fn shape_err(op: &'static str, a: &Array2, b: &Array2) -> NnError {
    NnError::Shape { op, left: a.shape(), right: b.shape() }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Array2, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Array2 {
        &self.nodes[v.0].value
    }

    /// Gradient of the last [`backward`](Self::backward) loss with respect
    /// to `v`, if `v` was reached.
    pub fn grad(&self, v: Var) -> Option<&Array2> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// A differentiable input.
    pub fn input(&mut self, value: Array2) -> Var {
        self.push(value, Op::Leaf)
    }

    /// A value that receives no gradient.
    pub fn constant(&mut self, value: Array2) -> Var {
        self.push(value, Op::Constant)
    }

    /// While frozen, [`param`](Self::param) inserts constants, so a network
    /// can be evaluated inside a graph without collecting its gradients.
    pub fn set_frozen(&mut self, frozen: bool) {
        self.frozen = frozen;
    }

    /// A leaf holding a copy of a trainable parameter (a constant while the
    /// graph is frozen).
    pub fn param(&mut self, params: &Params, id: ParamId) -> Var {
        if self.frozen {
            return self.constant(params.value(id).clone());
        }
        let v = self.push(params.value(id).clone(), Op::Leaf);
        self.params.push((v, id));
        v
    }

    /// Shared per-point affine map: `x (n x i) * w (i x o) + b (1 x o)`.
    pub fn linear(&mut self, x: Var, w: Var, b: Var) -> Result<Var, NnError> {
        let (xv, wv, bv) = (self.value(x), self.value(w), self.value(b));
        if xv.cols() != wv.rows() {
            return Err(shape_err("linear", xv, wv));
        }
        if bv.rows() != 1 || bv.cols() != wv.cols() {
            return Err(shape_err("linear(bias)", wv, bv));
        }
        let n = xv.rows();
        let o = wv.cols();
        let mut out = Array2::zeros(n, o);
        for r in 0..n {
            out.row_mut(r).copy_from_slice(bv.data());
        }
        gemm(n, xv.cols(), o, xv.data(), xv.cols() as isize, 1, wv.data(), o as isize, 1, 1.0, out.data_mut());
        Ok(self.push(out, Op::Linear { x, w, b }))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let out = self.value(x).map(|v| if v > 0.0 { v } else { 0.0 });
        self.push(out, Op::Relu(x))
    }

    /// Logistic function, kept strictly inside `(0, 1)` for finite inputs.
    pub fn sigmoid(&mut self, x: Var) -> Var {
        let out = self.value(x).map(|v| {
            let s = if v >= 0.0 {
                1.0 / (1.0 + math::exp(-v))
            } else {
                let e = math::exp(v);
                e / (1.0 + e)
            };
            s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
        });
        self.push(out, Op::Sigmoid(x))
    }

    /// Softmax along each row (max-subtracted).
    pub fn softmax_rows(&mut self, x: Var) -> Var {
        let mut out = self.value(x).clone();
        for r in 0..out.rows() {
            softmax_in_place(out.row_mut(r));
        }
        self.push(out, Op::SoftmaxRows(x))
    }

    /// Softmax along each column.
    pub fn softmax_cols(&mut self, x: Var) -> Var {
        let mut t = self.value(x).transpose();
        for r in 0..t.rows() {
            softmax_in_place(t.row_mut(r));
        }
        self.push(t.transpose(), Op::SoftmaxCols(x))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        let out = self.value(a).matmul(self.value(b))?;
        Ok(self.push(out, Op::MatMul(a, b)))
    }

    pub fn transpose(&mut self, x: Var) -> Var {
        let out = self.value(x).transpose();
        self.push(out, Op::Transpose(x))
    }

    /// Horizontal concatenation; all parts must have the same row count.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var, NnError> {
        let first = parts.first().ok_or(NnError::Empty { op: "concat_cols" })?;
        let rows = self.value(*first).rows();
        let mut cols = 0;
        for &p in parts {
            let v = self.value(p);
            if v.rows() != rows {
                return Err(shape_err("concat_cols", self.value(*first), v));
            }
            cols += v.cols();
        }
        let mut out = Array2::zeros(rows, cols);
        for r in 0..rows {
            let mut offset = 0;
            for &p in parts {
                let v = self.value(p);
                out.row_mut(r)[offset..offset + v.cols()].copy_from_slice(v.row(r));
                offset += v.cols();
            }
        }
        Ok(self.push(out, Op::ConcatCols(parts.to_vec())))
    }

    /// Row-major reshape to `rows x cols`.
    pub fn reshape(&mut self, x: Var, rows: usize, cols: usize) -> Result<Var, NnError> {
        let v = self.value(x);
        if v.rows() * v.cols() != rows * cols {
            return Err(NnError::Shape { op: "reshape", left: v.shape(), right: (rows, cols) });
        }
        let out = Array2::from_vec(rows, cols, v.data().to_vec())?;
        Ok(self.push(out, Op::Reshape(x)))
    }

    /// Stacks `times` copies of `x` vertically; copy `i` occupies rows
    /// `i * n .. (i + 1) * n`.
    pub fn tile_rows(&mut self, x: Var, times: usize) -> Result<Var, NnError> {
        if times == 0 {
            return Err(NnError::Empty { op: "tile_rows" });
        }
        let v = self.value(x);
        let mut data = Vec::with_capacity(v.data().len() * times);
        for _ in 0..times {
            data.extend_from_slice(v.data());
        }
        let out = Array2::from_vec(v.rows() * times, v.cols(), data)?;
        Ok(self.push(out, Op::TileRows { x, times }))
    }

    /// Column-wise maximum over consecutive groups of `group` rows.
    pub fn max_pool_groups(&mut self, x: Var, group: usize) -> Result<Var, NnError> {
        let v = self.value(x);
        if group == 0 || v.rows() % group != 0 {
            return Err(NnError::Shape { op: "max_pool_groups", left: v.shape(), right: (group, 1) });
        }
        let groups = v.rows() / group;
        let cols = v.cols();
        let mut out = Array2::zeros(groups, cols);
        let mut argmax = vec![0usize; groups * cols];
        for g in 0..groups {
            for c in 0..cols {
                let mut best = g * group;
                let mut best_v = v.get(best, c);
                for r in g * group + 1..(g + 1) * group {
                    let val = v.get(r, c);
                    if val > best_v {
                        best_v = val;
                        best = r;
                    }
                }
                out.set(g, c, best_v);
                argmax[g * cols + c] = best;
            }
        }
        Ok(self.push(out, Op::MaxPoolGroups { x, argmax }))
    }

    /// Column-wise maximum over all rows (`1 x cols`).
    pub fn max_over_rows(&mut self, x: Var) -> Result<Var, NnError> {
        let rows = self.value(x).rows();
        self.max_pool_groups(x, rows)
    }

    fn binary(&mut self, a: Var, b: Var, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Array2, NnError> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() {
            return Err(shape_err(op, av, bv));
        }
        let data = av.data().iter().zip(bv.data()).map(|(&x, &y)| f(x, y)).collect();
        Array2::from_vec(av.rows(), av.cols(), data)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        let out = self.binary(a, b, "add", |x, y| x + y)?;
        Ok(self.push(out, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        let out = self.binary(a, b, "sub", |x, y| x - y)?;
        Ok(self.push(out, Op::Sub(a, b)))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        let out = self.binary(a, b, "mul", |x, y| x * y)?;
        Ok(self.push(out, Op::Mul(a, b)))
    }

    pub fn scale(&mut self, x: Var, s: f64) -> Var {
        let out = self.value(x).map(|v| v * s);
        self.push(out, Op::Scale(x, s))
    }

    pub fn add_scalar(&mut self, x: Var, s: f64) -> Var {
        let out = self.value(x).map(|v| v + s);
        self.push(out, Op::AddScalar(x))
    }

    pub fn square(&mut self, x: Var) -> Var {
        let out = self.value(x).map(|v| v * v);
        self.push(out, Op::Square(x))
    }

    pub fn sum_all(&mut self, x: Var) -> Var {
        let out = Array2::scalar(self.value(x).sum());
        self.push(out, Op::SumAll(x))
    }

    pub fn mean_all(&mut self, x: Var) -> Var {
        let v = self.value(x);
        let n = (v.rows() * v.cols()).max(1) as f64;
        let out = Array2::scalar(v.sum() / n);
        self.push(out, Op::MeanAll(x))
    }

    /// Rows of `x` picked by `index` (repeats allowed).
    pub fn gather_rows(&mut self, x: Var, index: &[usize]) -> Result<Var, NnError> {
        let v = self.value(x);
        if let Some(&bad) = index.iter().find(|&&i| i >= v.rows()) {
            return Err(NnError::Shape { op: "gather_rows", left: v.shape(), right: (bad, 0) });
        }
        let mut out = Array2::zeros(index.len(), v.cols());
        for (r, &i) in index.iter().enumerate() {
            out.row_mut(r).copy_from_slice(v.row(i));
        }
        Ok(self.push(out, Op::GatherRows { x, index: index.to_vec() }))
    }

    /// Euclidean norm of each row (`rows x 1`).
    pub fn row_norms(&mut self, x: Var) -> Var {
        let v = self.value(x);
        let data = (0..v.rows()).map(|r| math::sqrt(v.row(r).iter().map(|a| a * a).sum())).collect();
        let out = Array2::from_vec(v.rows(), 1, data).expect("row count");
        self.push(out, Op::RowNorms(x))
    }

    /// Populates gradients of every ancestor of the scalar `loss`.
    pub fn backward(&mut self, loss: Var) -> Result<(), NnError> {
        let shape = self.value(loss).shape();
        if shape != (1, 1) {
            return Err(NnError::NonScalarLoss { rows: shape.0, cols: shape.1 });
        }
        self.grads = vec![None; self.nodes.len()];
        self.grads[loss.0] = Some(Array2::scalar(1.0));
        for id in (0..=loss.0).rev() {
            let Some(g) = self.grads[id].take() else { continue };
            self.propagate(id, &g);
            self.grads[id] = Some(g);
        }
        Ok(())
    }

    fn accumulate(&mut self, v: Var, delta: Array2) {
        if matches!(self.nodes[v.0].op, Op::Constant) {
            return;
        }
        match &mut self.grads[v.0] {
            Some(g) => g.add_assign(&delta),
            slot @ None => *slot = Some(delta),
        }
    }

    /// Adds `a^T b` or `a b^T` products directly into a parent's gradient.
    fn accumulate_product(&mut self, v: Var, f: impl FnOnce(&mut Array2)) {
        if matches!(self.nodes[v.0].op, Op::Constant) {
            return;
        }
        let (r, c) = self.nodes[v.0].value.shape();
        let g = self.grads[v.0].get_or_insert_with(|| Array2::zeros(r, c));
        f(g);
    }

    fn propagate(&mut self, id: usize, g: &Array2) {
        let op = self.nodes[id].op.clone();
        match op {
            Op::Leaf | Op::Constant => {}
            Op::Linear { x, w, b } => {
                let n = g.rows();
                let o = g.cols();
                let i = self.value(w).rows();
                // dx = g w^T
                let wv = self.nodes[w.0].value.clone();
                self.accumulate_product(x, |dx| {
                    gemm(n, o, i, g.data(), o as isize, 1, wv.data(), 1, o as isize, 1.0, dx.data_mut())
                });
                // dw = x^T g
                let xv = self.nodes[x.0].value.clone();
                self.accumulate_product(w, |dw| {
                    gemm(i, n, o, xv.data(), 1, i as isize, g.data(), o as isize, 1, 1.0, dw.data_mut())
                });
                let mut db = Array2::zeros(1, o);
                for r in 0..n {
                    for (d, v) in db.data_mut().iter_mut().zip(g.row(r)) {
                        *d += v;
                    }
                }
                self.accumulate(b, db);
            }
            Op::Relu(x) => {
                let xv = self.value(x);
                let data = xv.data().iter().zip(g.data()).map(|(&v, &d)| if v > 0.0 { d } else { 0.0 }).collect();
                let delta = Array2::from_vec(g.rows(), g.cols(), data).expect("shape");
                self.accumulate(x, delta);
            }
            Op::Sigmoid(x) => {
                let y = &self.nodes[id].value;
                let data = y.data().iter().zip(g.data()).map(|(&s, &d)| d * s * (1.0 - s)).collect();
                let delta = Array2::from_vec(g.rows(), g.cols(), data).expect("shape");
                self.accumulate(x, delta);
            }
            Op::SoftmaxRows(x) => {
                let y = &self.nodes[id].value;
                let mut delta = Array2::zeros(y.rows(), y.cols());
                for r in 0..y.rows() {
                    softmax_backward(y.row(r), g.row(r), delta.row_mut(r));
                }
                self.accumulate(x, delta);
            }
            Op::SoftmaxCols(x) => {
                let yt = self.nodes[id].value.transpose();
                let gt = g.transpose();
                let mut delta = Array2::zeros(yt.rows(), yt.cols());
                for r in 0..yt.rows() {
                    softmax_backward(yt.row(r), gt.row(r), delta.row_mut(r));
                }
                self.accumulate(x, delta.transpose());
            }
            Op::MatMul(a, b) => {
                let (m, k) = self.value(a).shape();
                let n = self.value(b).cols();
                let bv = self.nodes[b.0].value.clone();
                // da = g b^T
                self.accumulate_product(a, |da| {
                    gemm(m, n, k, g.data(), n as isize, 1, bv.data(), 1, n as isize, 1.0, da.data_mut())
                });
                let av = self.nodes[a.0].value.clone();
                // db = a^T g
                self.accumulate_product(b, |db| {
                    gemm(k, m, n, av.data(), 1, k as isize, g.data(), n as isize, 1, 1.0, db.data_mut())
                });
            }
            Op::Transpose(x) => self.accumulate(x, g.transpose()),
            Op::ConcatCols(parts) => {
                let mut offset = 0;
                for p in parts {
                    let cols = self.value(p).cols();
                    let mut delta = Array2::zeros(g.rows(), cols);
                    for r in 0..g.rows() {
                        delta.row_mut(r).copy_from_slice(&g.row(r)[offset..offset + cols]);
                    }
                    offset += cols;
                    self.accumulate(p, delta);
                }
            }
            Op::Reshape(x) => {
                let (r, c) = self.value(x).shape();
                self.accumulate(x, Array2::from_vec(r, c, g.data().to_vec()).expect("shape"));
            }
            Op::TileRows { x, times } => {
                let (r, c) = self.value(x).shape();
                let mut delta = Array2::zeros(r, c);
                for t in 0..times {
                    let block = &g.data()[t * r * c..(t + 1) * r * c];
                    for (d, v) in delta.data_mut().iter_mut().zip(block) {
                        *d += v;
                    }
                }
                self.accumulate(x, delta);
            }
            Op::MaxPoolGroups { x, argmax } => {
                let (r, c) = self.value(x).shape();
                let mut delta = Array2::zeros(r, c);
                for (k, &src) in argmax.iter().enumerate() {
                    let col = k % c;
                    let v = delta.get(src, col) + g.data()[k];
                    delta.set(src, col, v);
                }
                self.accumulate(x, delta);
            }
            Op::Add(a, b) => {
                self.accumulate(a, g.clone());
                self.accumulate(b, g.clone());
            }
            Op::Sub(a, b) => {
                self.accumulate(a, g.clone());
                self.accumulate(b, g.map(|v| -v));
            }
            Op::Mul(a, b) => {
                let av = self.value(a);
                let bv = self.value(b);
                let da = Array2::from_vec(g.rows(), g.cols(), g.data().iter().zip(bv.data()).map(|(d, y)| d * y).collect())
                    .expect("shape");
                let db = Array2::from_vec(g.rows(), g.cols(), g.data().iter().zip(av.data()).map(|(d, x)| d * x).collect())
                    .expect("shape");
                self.accumulate(a, da);
                self.accumulate(b, db);
            }
            Op::Scale(x, s) => self.accumulate(x, g.map(|v| v * s)),
            Op::AddScalar(x) => self.accumulate(x, g.clone()),
            Op::Square(x) => {
                let xv = self.value(x);
                let data = xv.data().iter().zip(g.data()).map(|(&v, &d)| 2.0 * v * d).collect();
                let delta = Array2::from_vec(g.rows(), g.cols(), data).expect("shape");
                self.accumulate(x, delta);
            }
            Op::SumAll(x) => {
                let (r, c) = self.value(x).shape();
                self.accumulate(x, Array2::filled(r, c, g.item()));
            }
            Op::MeanAll(x) => {
                let (r, c) = self.value(x).shape();
                let n = (r * c).max(1) as f64;
                self.accumulate(x, Array2::filled(r, c, g.item() / n));
            }
            Op::GatherRows { x, index } => {
                let (r, c) = self.value(x).shape();
                let mut delta = Array2::zeros(r, c);
                for (k, &i) in index.iter().enumerate() {
                    for (d, v) in delta.row_mut(i).iter_mut().zip(g.row(k)) {
                        *d += v;
                    }
                }
                self.accumulate(x, delta);
            }
            Op::RowNorms(x) => {
                let xv = self.value(x);
                let norms = &self.nodes[id].value;
                let mut delta = Array2::zeros(xv.rows(), xv.cols());
                for r in 0..xv.rows() {
                    let n = norms.get(r, 0);
                    if n > 0.0 {
                        let s = g.get(r, 0) / n;
                        for (d, v) in delta.row_mut(r).iter_mut().zip(xv.row(r)) {
                            *d = s * v;
                        }
                    }
                }
                self.accumulate(x, delta);
            }
        }
    }

    /// Gradients of every parameter leaf, summed per parameter.
    pub fn param_grads(&self) -> ParamGrads {
        let mut out = ParamGrads::default();
        for &(v, id) in &self.params {
            if let Some(g) = self.grad(v) {
                out.add(id, g);
            }
        }
        out
    }
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = math::exp(*v - max);
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

fn softmax_backward(y: &[f64], g: &[f64], out: &mut [f64]) {
    let dot: f64 = y.iter().zip(g).map(|(a, b)| a * b).sum();
    for ((o, &yi), &gi) in out.iter_mut().zip(y).zip(g) {
        *o = yi * (gi - dot);
    }
}
