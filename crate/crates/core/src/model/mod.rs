//! Masked graph convolution over K hops feeding a gated recurrent cell whose
//! previous cell state is first mixed across neighbouring links.
//!
//! Per time step, with `⊙` the element-wise product and `S_k` the hop-k mask:
//!
//! ```text
//! g_k  = (W_k ⊙ S_k) x                 k = 1..K
//! G    = [g_1, ..., g_K]
//! i    = σ(U_i G + R_i h + b_i)         (same form for f, o)
//! c~   = tanh(U_c G + R_c h + b_c)
//! C*   = (W_C ⊙ S_K) C
//! C'   = f ⊙ C* + i ⊙ c~
//! h'   = o ⊙ tanh(C')
//! ```
//!
//! The hidden size equals the number of links and the final hidden state is
//! the (normalized) prediction.

mod checkpoint;

pub use checkpoint::{read_checkpoint, write_checkpoint};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{BinaryMask, MaskKind};

pub const DEFAULT_INIT_SCALE: f64 = 0.05;
pub const FORGET_BIAS_INIT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input,
    Forget,
    Output,
    Candidate,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Input, Gate::Forget, Gate::Output, Gate::Candidate];

    pub fn name(self) -> &'static str {
        match self {
            Gate::Input => "input",
            Gate::Forget => "forget",
            Gate::Output => "output",
            Gate::Candidate => "candidate",
        }
    }
}

/// Weights of one gate: `input` is N×(K·N), `hidden` is N×N.
#[derive(Debug, Clone, PartialEq)]
pub struct GateParams {
    pub input: Array2<f64>,
    pub hidden: Array2<f64>,
    pub bias: Array1<f64>,
}

/// All trainable tensors. The same layout carries gradients and optimizer
/// accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// Graph-convolution weights, one N×N matrix per hop.
    pub conv: Vec<Array2<f64>>,
    /// Indexed by `Gate as usize`.
    pub gates: [GateParams; 4],
    /// Cell-state mixing weights, N×N.
    pub cell: Array2<f64>,
}

/// A named, flat view of one parameter tensor.
pub struct ParamBlock<'a> {
    pub name: String,
    pub values: &'a [f64],
}

pub struct ParamBlockMut<'a> {
    pub name: String,
    pub values: &'a mut [f64],
}

impl Params {
    pub fn zeros(n: usize, k: usize) -> Self {
        let gate = || GateParams {
            input: Array2::zeros((n, k * n)),
            hidden: Array2::zeros((n, n)),
            bias: Array1::zeros(n),
        };
        Self {
            conv: (0..k).map(|_| Array2::zeros((n, n))).collect(),
            gates: [gate(), gate(), gate(), gate()],
            cell: Array2::zeros((n, n)),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.cell.nrows(), self.conv.len())
    }

    pub fn gate(&self, gate: Gate) -> &GateParams {
        &self.gates[gate as usize]
    }

    pub fn gate_mut(&mut self, gate: Gate) -> &mut GateParams {
        &mut self.gates[gate as usize]
    }

    /// Blocks in a fixed order: conv hops, then per gate input/hidden/bias, then cell.
    pub fn blocks(&self) -> Vec<ParamBlock<'_>> {
        let mut out = Vec::with_capacity(self.conv.len() + 13);
        for (k, w) in self.conv.iter().enumerate() {
            out.push(ParamBlock {
                name: format!("conv.{}", k + 1),
                values: w.as_slice().expect("standard layout"),
            });
        }
        for (gate, p) in Gate::ALL.iter().zip(&self.gates) {
            for (part, values) in [
                ("input", p.input.as_slice()),
                ("hidden", p.hidden.as_slice()),
                ("bias", p.bias.as_slice()),
            ] {
                out.push(ParamBlock {
                    name: format!("{}.{part}", gate.name()),
                    values: values.expect("standard layout"),
                });
            }
        }
        out.push(ParamBlock {
            name: "cell".into(),
            values: self.cell.as_slice().expect("standard layout"),
        });
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<ParamBlockMut<'_>> {
        let mut out = Vec::with_capacity(self.conv.len() + 13);
        for (k, w) in self.conv.iter_mut().enumerate() {
            out.push(ParamBlockMut {
                name: format!("conv.{}", k + 1),
                values: w.as_slice_mut().expect("standard layout"),
            });
        }
        for (gate, p) in Gate::ALL.iter().zip(self.gates.iter_mut()) {
            let name = gate.name();
            out.push(ParamBlockMut {
                name: format!("{name}.input"),
                values: p.input.as_slice_mut().expect("standard layout"),
            });
            out.push(ParamBlockMut {
                name: format!("{name}.hidden"),
                values: p.hidden.as_slice_mut().expect("standard layout"),
            });
            out.push(ParamBlockMut {
                name: format!("{name}.bias"),
                values: p.bias.as_slice_mut().expect("standard layout"),
            });
        }
        out.push(ParamBlockMut {
            name: "cell".into(),
            values: self.cell.as_slice_mut().expect("standard layout"),
        });
        out
    }

    pub fn len(&self) -> usize {
        self.blocks().iter().map(|b| b.values.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.values.iter().all(|v| v.is_finite()))
    }

    /// `self += other`, block by block.
    pub fn add_assign(&mut self, other: &Params) {
        for (a, b) in self.blocks_mut().into_iter().zip(other.blocks()) {
            a.values.iter_mut().zip(b.values).for_each(|(x, y)| *x += y);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for b in self.blocks_mut() {
            b.values.iter_mut().for_each(|x| *x *= factor);
        }
    }

    /// Euclidean norm over every entry.
    pub fn norm(&self) -> f64 {
        self.blocks()
            .iter()
            .flat_map(|b| b.values.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Recurrent state carried between time steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub hidden: Array1<f64>,
    pub cell: Array1<f64>,
}

impl ModelState {
    pub fn zeros(n: usize) -> Self {
        Self {
            hidden: Array1::zeros(n),
            cell: Array1::zeros(n),
        }
    }
}

/// Masks plus parameters. Off-mask entries of the convolution and cell
/// weights are kept at exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GltModel {
    masks: Vec<BinaryMask>,
    supports: Vec<Array2<f64>>,
    params: Params,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl GltModel {
    /// Assembles a model from masks (hop 1..K, in order) and parameters.
    /// Off-mask weights are zeroed.
    pub fn from_parts(masks: Vec<BinaryMask>, params: Params) -> Result<Self> {
        let k = masks.len();
        if k == 0 {
            return Err(Error::BadShape("a model needs at least one hop mask".into()));
        }
        let n = masks[0].size();
        for m in &masks {
            if m.size() != n {
                return Err(Error::BadShape(format!("mask sizes {} and {n} differ", m.size())));
            }
            if m.kind() == MaskKind::Glt {
                return Err(Error::BadParams("model masks must be binary; clip GLT masks first".into()));
            }
        }
        if params.conv.len() != k {
            return Err(Error::BadShape(format!("{} conv blocks for {k} hops", params.conv.len())));
        }
        let expected = Params::zeros(n, k);
        for (a, b) in params.blocks().iter().zip(expected.blocks()) {
            if a.values.len() != b.values.len() {
                return Err(Error::BadShape(format!("block {} has {} entries, expected {}", a.name, a.values.len(), b.values.len())));
            }
        }
        let shapes_ok = params.conv.iter().all(|w| w.dim() == (n, n))
            && params.cell.dim() == (n, n)
            && params.gates.iter().all(|g| g.input.dim() == (n, k * n) && g.hidden.dim() == (n, n) && g.bias.len() == n);
        if !shapes_ok {
            return Err(Error::BadShape("parameter shapes do not match masks".into()));
        }
        let supports = masks.iter().map(BinaryMask::support).collect();
        let mut model = Self { masks, supports, params };
        model.freeze_masked();
        Ok(model)
    }

    pub fn num_links(&self) -> usize {
        self.params.cell.nrows()
    }

    pub fn hops(&self) -> usize {
        self.masks.len()
    }

    pub fn masks(&self) -> &[BinaryMask] {
        &self.masks
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Mutable parameter access. Callers must follow up with
    /// [`GltModel::freeze_masked`] if they may have written off-mask entries.
    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    /// Support of hop `k` (1-based).
    pub fn support(&self, hop: usize) -> &Array2<f64> {
        &self.supports[hop - 1]
    }

    fn cell_support(&self) -> &Array2<f64> {
        self.supports.last().expect("at least one hop")
    }

    /// Zeroes every off-mask entry of the convolution and cell weights.
    pub fn freeze_masked(&mut self) {
        let cell_support = self.supports.last().expect("at least one hop").clone();
        freeze(&mut self.params, &self.supports, &cell_support);
    }

    /// Zeroes off-mask entries of a gradient (or any tensor set shaped like the params).
    pub fn mask_gradients(&self, grads: &mut Params) {
        freeze(grads, &self.supports, self.cell_support());
    }

    /// True when every off-mask weight is exactly zero.
    pub fn masks_respected(&self) -> bool {
        let off_zero = |w: &Array2<f64>, s: &Array2<f64>| w.iter().zip(s).all(|(&w, &s)| s != 0.0 || w == 0.0);
        self.params.conv.iter().zip(&self.supports).all(|(w, s)| off_zero(w, s))
            && off_zero(&self.params.cell, self.cell_support())
    }

    fn check_hop(&self, hop: usize) -> Result<()> {
        if hop < 1 || hop > self.hops() {
            return Err(Error::BadHop { hop, k: self.hops() });
        }
        Ok(())
    }

    fn check_len(&self, what: &str, len: usize, expected: usize) -> Result<()> {
        if len != expected {
            return Err(Error::ShapeMismatch(format!("{what} has length {len}, expected {expected}")));
        }
        Ok(())
    }

    pub(crate) fn effective(&self) -> EffectiveWeights {
        EffectiveWeights {
            conv: self.params.conv.iter().zip(&self.supports).map(|(w, s)| w * s).collect(),
            cell: &self.params.cell * self.cell_support(),
        }
    }

    /// `(W_k ⊙ S_k) x` for hop `hop` (1-based).
    pub fn graph_convolve(&self, x: ArrayView1<'_, f64>, hop: usize) -> Result<Array1<f64>> {
        self.check_hop(hop)?;
        self.check_len("input", x.len(), self.num_links())?;
        Ok((&self.params.conv[hop - 1] * self.support(hop)).dot(&x))
    }

    /// Hop outputs concatenated in hop order, length K·N.
    pub fn stack_hops(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        self.check_len("input", x.len(), self.num_links())?;
        Ok(self.effective().stack(x))
    }

    pub fn lstm_step(&self, features: ArrayView1<'_, f64>, state: &ModelState) -> Result<ModelState> {
        let n = self.num_links();
        self.check_len("hop features", features.len(), self.hops() * n)?;
        self.check_len("hidden state", state.hidden.len(), n)?;
        self.check_len("cell state", state.cell.len(), n)?;
        let cache = self.step(&self.effective().cell, features, state.hidden.view(), state.cell.view());
        let next = ModelState {
            hidden: cache.hidden,
            cell: cache.cell,
        };
        if next.hidden.iter().chain(&next.cell).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("recurrent state".into()));
        }
        Ok(next)
    }

    /// Runs the window rows in time order from a zero state and returns the
    /// final hidden state.
    pub fn forward(&self, window: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        Ok(self.trace(window)?.prediction().clone())
    }

    /// Forward pass keeping every intermediate needed for backpropagation.
    pub(crate) fn trace(&self, window: ArrayView2<'_, f64>) -> Result<Trace> {
        let n = self.num_links();
        if window.ncols() != n || window.nrows() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "window is {:?}, expected M×{n} with M ≥ 1",
                window.dim()
            )));
        }
        let eff = self.effective();
        let mut steps: Vec<StepCache> = Vec::with_capacity(window.nrows());
        let zero = Array1::zeros(n);
        for x in window.rows() {
            let features = eff.stack(x);
            let (h, c) = match steps.last() {
                Some(prev) => (prev.hidden.view(), prev.cell.view()),
                None => (zero.view(), zero.view()),
            };
            let mut cache = self.step(&eff.cell, features.view(), h, c);
            cache.features = features;
            steps.push(cache);
        }
        let last = steps.last().expect("non-empty window");
        if last.hidden.iter().chain(&last.cell).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("forward pass".into()));
        }
        Ok(Trace { steps })
    }

    fn step(&self, cell_weights: &Array2<f64>, features: ArrayView1<'_, f64>, h: ArrayView1<'_, f64>, c: ArrayView1<'_, f64>) -> StepCache {
        let pre = |gate: Gate| {
            let p = self.params.gate(gate);
            p.input.dot(&features) + p.hidden.dot(&h) + &p.bias
        };
        let input = pre(Gate::Input).mapv_into(sigmoid);
        let forget = pre(Gate::Forget).mapv_into(sigmoid);
        let output = pre(Gate::Output).mapv_into(sigmoid);
        let candidate = pre(Gate::Candidate).mapv_into(f64::tanh);
        let mixed = cell_weights.dot(&c);
        let cell = &forget * &mixed + &input * &candidate;
        let tanh_cell = cell.mapv(f64::tanh);
        let hidden = &output * &tanh_cell;
        StepCache {
            features: Array1::zeros(0),
            prev_hidden: h.to_owned(),
            prev_cell: c.to_owned(),
            mixed,
            input,
            forget,
            output,
            candidate,
            cell,
            tanh_cell,
            hidden,
        }
    }
}

fn freeze(params: &mut Params, supports: &[Array2<f64>], cell_support: &Array2<f64>) {
    for (w, s) in params.conv.iter_mut().zip(supports) {
        Zip::from(w).and(s).for_each(|w, &s| {
            if s == 0.0 {
                *w = 0.0;
            }
        });
    }
    Zip::from(&mut params.cell).and(cell_support).for_each(|w, &s| {
        if s == 0.0 {
            *w = 0.0;
        }
    });
}

/// Masked weights used by one forward pass.
pub(crate) struct EffectiveWeights {
    pub conv: Vec<Array2<f64>>,
    pub cell: Array2<f64>,
}

impl EffectiveWeights {
    fn stack(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        let n = x.len();
        let mut out = Array1::zeros(self.conv.len() * n);
        for (k, w) in self.conv.iter().enumerate() {
            out.slice_mut(ndarray::s![k * n..(k + 1) * n]).assign(&w.dot(&x));
        }
        out
    }
}

pub(crate) struct StepCache {
    pub features: Array1<f64>,
    pub prev_hidden: Array1<f64>,
    pub prev_cell: Array1<f64>,
    pub mixed: Array1<f64>,
    pub input: Array1<f64>,
    pub forget: Array1<f64>,
    pub output: Array1<f64>,
    pub candidate: Array1<f64>,
    pub cell: Array1<f64>,
    pub tanh_cell: Array1<f64>,
    pub hidden: Array1<f64>,
}

pub(crate) struct Trace {
    pub steps: Vec<StepCache>,
}

impl Trace {
    pub fn prediction(&self) -> &Array1<f64> {
        &self.steps.last().expect("non-empty trace").hidden
    }
}

/// Draws every weight uniformly from `[-scale, scale]`, zeroes off-mask
/// convolution and cell weights, sets the forget-gate bias to 1 and the
/// other biases to 0. Deterministic per seed.
pub fn init_params(masks: Vec<BinaryMask>, seed: u64, scale: f64) -> Result<GltModel> {
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(Error::BadParams(format!("init scale {scale}")));
    }
    let k = masks.len();
    let n = masks.first().map_or(0, BinaryMask::size);
    let mut params = Params::zeros(n, k);
    if scale > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for block in params.blocks_mut() {
            if block.name.ends_with(".bias") {
                continue;
            }
            for v in block.values.iter_mut() {
                *v = rng.random_range(-scale..=scale);
            }
        }
    }
    params.gate_mut(Gate::Forget).bias.fill(FORGET_BIAS_INIT);
    GltModel::from_parts(masks, params)
}
