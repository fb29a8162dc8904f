use rand::distributions::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::rng::rng_from;

pub const NET_FORMAT_VERSION: u32 = 1;

/// Elementwise activation. `Tanh` and `Relu` are valid hidden activations;
/// `Linear`, `Sigmoid` and `Softplus` are valid output activations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
    Linear,
    Sigmoid,
    Softplus,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
            Activation::Linear => x,
            Activation::Sigmoid => sigmoid(x),
            Activation::Softplus => softplus(x),
        }
    }

    /// Derivative expressed through the pre-activation `x` and output `y`.
    #[inline]
    fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Softplus => sigmoid(x),
        }
    }

    fn is_hidden(self) -> bool {
        matches!(self, Activation::Tanh | Activation::Relu)
    }

    fn is_output(self) -> bool {
        matches!(
            self,
            Activation::Linear | Activation::Sigmoid | Activation::Softplus
        )
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `ln(1 + e^x)`.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_nested(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn from_nested(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            check_len("matrix row", n_cols, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }
}

/// A fully connected network. Layer `k` maps width `layer_sizes[k]` to
/// `layer_sizes[k + 1]`; every layer but the last uses the hidden activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NetDocument", try_from = "NetDocument")]
pub struct DenseNet {
    layer_sizes: Vec<usize>,
    hidden: Activation,
    output: Activation,
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
}

/// Cached activations from one forward pass, consumed by backprop.
#[derive(Debug, Clone)]
pub struct Trace {
    /// `pre[k]` is the pre-activation of layer `k`.
    pre: Vec<Vec<f64>>,
    /// `post[0]` is the input; `post[k + 1]` is the output of layer `k`.
    post: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.post.last().expect("trace holds at least the input")
    }

    pub fn input(&self) -> &[f64] {
        &self.post[0]
    }

    /// Pre-activations per layer, hidden layers first.
    pub fn pre_activations(&self) -> &[Vec<f64>] {
        &self.pre
    }
}

impl DenseNet {
    /// Builds a network with weights uniform in `±sqrt(6 / (fan_in + fan_out))`
    /// and zero biases. Identical seeds give bit-identical networks.
    pub fn new(
        layer_sizes: &[usize],
        hidden: Activation,
        output: Activation,
        seed: u64,
    ) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes, hidden, output)?;
        let mut rng = rng_from(seed);
        for w in &mut net.weights {
            let bound = (6.0 / (w.rows + w.cols) as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound);
            for x in &mut w.data {
                *x = dist.sample(&mut rng);
            }
        }
        Ok(net)
    }

    /// All weights and biases zero.
    pub fn zeros(layer_sizes: &[usize], hidden: Activation, output: Activation) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Config(format!(
                "layer_sizes needs at least 2 entries, got {}",
                layer_sizes.len()
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::Config(format!(
                "layer sizes must be positive: {layer_sizes:?}"
            )));
        }
        if !hidden.is_hidden() {
            return Err(Error::Config(format!(
                "{hidden:?} is not a hidden activation"
            )));
        }
        if !output.is_output() {
            return Err(Error::Config(format!(
                "{output:?} is not an output activation"
            )));
        }
        let weights = layer_sizes
            .windows(2)
            .map(|w| Matrix::zeros(w[1], w[0]))
            .collect();
        let biases = layer_sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            hidden,
            output,
            weights,
            biases,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden
    }

    pub fn output_activation(&self) -> Activation {
        self.output
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [Matrix] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.biases
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().map(|w| w.data.len()).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Parameters flattened layer by layer, weights (row-major) before biases.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(&w.data);
            out.extend_from_slice(b);
        }
        out
    }

    pub fn set_params_flat(&mut self, params: &[f64]) -> Result<()> {
        check_len("flat parameter vector", self.n_params(), params.len())?;
        let mut offset = 0;
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            let n = w.data.len();
            w.data.copy_from_slice(&params[offset..offset + n]);
            offset += n;
            let n = b.len();
            b.copy_from_slice(&params[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .all(|w| w.data.iter().all(|x| x.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|x| x.is_finite()))
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        check_len("network input", self.input_width(), input.len())?;
        if input.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite network input {input:?}")));
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        Ok(self.forward_unchecked(input))
    }

    /// Forward pass without validation or trace allocation.
    pub(crate) fn forward_unchecked(&self, input: &[f64]) -> Vec<f64> {
        let mut current = input.to_vec();
        let last = self.n_layers() - 1;
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let act = if k == last { self.output } else { self.hidden };
            current = (0..w.rows)
                .map(|r| act.apply(dot(w.row(r), &current) + b[r]))
                .collect();
        }
        current
    }

    pub fn forward_trace(&self, input: &[f64]) -> Result<Trace> {
        self.check_input(input)?;
        Ok(self.trace_unchecked(input))
    }

    pub(crate) fn trace_unchecked(&self, input: &[f64]) -> Trace {
        let mut pre = Vec::with_capacity(self.n_layers());
        let mut post = Vec::with_capacity(self.n_layers() + 1);
        post.push(input.to_vec());
        let last = self.n_layers() - 1;
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let act = if k == last { self.output } else { self.hidden };
            let x = &post[k];
            let z: Vec<f64> = (0..w.rows).map(|r| dot(w.row(r), x) + b[r]).collect();
            post.push(z.iter().map(|&v| act.apply(v)).collect());
            pre.push(z);
        }
        Trace { pre, post }
    }

    /// Gradients of `upstream · output` with respect to every parameter and
    /// the input.
    pub fn backprop(&self, input: &[f64], upstream: &[f64]) -> Result<Gradients> {
        self.check_input(input)?;
        check_len("backprop upstream", self.output_width(), upstream.len())?;
        let trace = self.trace_unchecked(input);
        let mut grads = Gradients::zeros_like(self);
        let dx = self.backprop_trace(&trace, upstream, Some(&mut grads), true);
        grads.input = dx;
        Ok(grads)
    }

    /// Reverse pass over a cached trace. Parameter gradients are accumulated
    /// into `acc` when given; the input gradient is returned when requested.
    pub(crate) fn backprop_trace(
        &self,
        trace: &Trace,
        upstream: &[f64],
        mut acc: Option<&mut Gradients>,
        want_input: bool,
    ) -> Option<Vec<f64>> {
        let last = self.n_layers() - 1;
        let mut delta: Vec<f64> = upstream
            .iter()
            .zip(&trace.pre[last])
            .zip(&trace.post[last + 1])
            .map(|((&u, &x), &y)| u * self.output.derivative(x, y))
            .collect();
        for k in (0..=last).rev() {
            let w = &self.weights[k];
            let a = &trace.post[k];
            if let Some(g) = acc.as_deref_mut() {
                let gw = &mut g.weights[k];
                for (r, &d) in delta.iter().enumerate() {
                    if d != 0.0 {
                        let row = &mut gw.data[r * w.cols..(r + 1) * w.cols];
                        for (gx, &ax) in row.iter_mut().zip(a) {
                            *gx += d * ax;
                        }
                    }
                }
                for (gb, &d) in g.biases[k].iter_mut().zip(&delta) {
                    *gb += d;
                }
            }
            if k == 0 && !want_input {
                return None;
            }
            let mut da = vec![0.0; w.cols];
            for (r, &d) in delta.iter().enumerate() {
                if d != 0.0 {
                    for (dx, &wx) in da.iter_mut().zip(w.row(r)) {
                        *dx += d * wx;
                    }
                }
            }
            if k == 0 {
                return Some(da);
            }
            delta = da
                .iter()
                .zip(&trace.pre[k - 1])
                .zip(&trace.post[k])
                .map(|((&g, &x), &y)| g * self.hidden.derivative(x, y))
                .collect();
        }
        unreachable!("loop returns at layer 0")
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Parameter-shaped gradient buffers, optionally carrying the input gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
    pub input: Option<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Self {
            weights: net
                .weights
                .iter()
                .map(|w| Matrix::zeros(w.rows, w.cols))
                .collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            input: None,
        }
    }

    pub fn is_congruent(&self, net: &DenseNet) -> bool {
        self.weights.len() == net.weights.len()
            && self
                .weights
                .iter()
                .zip(&net.weights)
                .all(|(g, w)| g.rows == w.rows && g.cols == w.cols)
            && self
                .biases
                .iter()
                .zip(&net.biases)
                .all(|(g, b)| g.len() == b.len())
    }

    /// Same layout as [`DenseNet::params_flat`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(&w.data);
            out.extend_from_slice(b);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.data.iter().chain(b.iter()))
    }

    pub(crate) fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| w.data.iter_mut().chain(b.iter_mut()))
    }

    pub fn scale(&mut self, factor: f64) {
        self.iter_mut().for_each(|x| *x *= factor);
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
            && self
                .input
                .as_ref()
                .is_none_or(|v| v.iter().all(|x| x.is_finite()))
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Versioned JSON form of a [`DenseNet`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetDocument {
    pub version: u32,
    pub layer_sizes: Vec<usize>,
    pub activations: ActivationPair,
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ActivationPair {
    pub hidden: Activation,
    pub output: Activation,
}

impl From<DenseNet> for NetDocument {
    fn from(net: DenseNet) -> Self {
        Self {
            version: NET_FORMAT_VERSION,
            layer_sizes: net.layer_sizes,
            activations: ActivationPair {
                hidden: net.hidden,
                output: net.output,
            },
            weights: net.weights.iter().map(Matrix::to_nested).collect(),
            biases: net.biases,
        }
    }
}

impl TryFrom<NetDocument> for DenseNet {
    type Error = Error;

    fn try_from(doc: NetDocument) -> Result<Self> {
        if doc.version != NET_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported network format version {}",
                doc.version
            )));
        }
        let mut net = DenseNet::zeros(
            &doc.layer_sizes,
            doc.activations.hidden,
            doc.activations.output,
        )?;
        check_len("weight layers", net.weights.len(), doc.weights.len())?;
        check_len("bias layers", net.biases.len(), doc.biases.len())?;
        for (k, (w, b)) in doc.weights.iter().zip(doc.biases).enumerate() {
            let m = Matrix::from_nested(w)?;
            check_len("weight rows", net.weights[k].rows, m.rows)?;
            check_len("weight cols", net.weights[k].cols, m.cols)?;
            check_len("bias length", net.biases[k].len(), b.len())?;
            net.weights[k] = m;
            net.biases[k] = b;
        }
        if !net.is_finite() {
            return Err(Error::Domain("network parameters must be finite".into()));
        }
        Ok(net)
    }
}
