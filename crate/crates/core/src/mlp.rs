//! Feedforward logistic network trained by full-batch gradient descent with
//! an adaptive (bold-driver) learning rate, plus the curve classifier built
//! on top of it: training, decoding, evaluation, topology sweeps and model
//! persistence.

use std::ops::RangeInclusive;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureConfig, FeatureVector};
use crate::filters::logistic;
use crate::stroke::{CurveClass, PressureProfile};

pub const MODEL_FILE_VERSION: u64 = 1;
pub const N_CLASSES: usize = 3;
pub const MAX_HIDDEN: usize = 100;

/// Fully connected logistic network. Parameters live in one flat vector,
/// layer by layer: the `n_out x n_in` weight matrix row-major, then the
/// `n_out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

struct LayerView {
    n_in: usize,
    n_out: usize,
    w: usize,
    b: usize,
}

impl Network {
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Topology(format!("layer sizes must be positive, at least two layers: {sizes:?}")));
        }
        let n = sizes.windows(2).map(|w| w[1] * (w[0] + 1)).sum();
        Ok(Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; n],
        })
    }

    /// Weights and biases drawn uniformly from `[-0.5, 0.5]`.
    pub fn random(sizes: &[usize], seed: u64) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in &mut net.params {
            *p = rng.random_range(-0.5..=0.5);
        }
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_inputs(&self) -> usize {
        self.sizes[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                actual: params.len(),
            });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    fn layers(&self) -> Vec<LayerView> {
        let mut off = 0;
        self.sizes
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let v = LayerView {
                    n_in,
                    n_out,
                    w: off,
                    b: off + n_in * n_out,
                };
                off += n_out * (n_in + 1);
                v
            })
            .collect()
    }

    /// Weight matrix (row-major) and bias vector of layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let v = &self.layers()[l];
        (
            &self.params[v.w..v.b],
            &self.params[v.b..v.b + v.n_out],
        )
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.n_inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.n_inputs(),
                actual: input.len(),
            });
        }
        let mut a = input.to_vec();
        for v in self.layers() {
            a = self.layer_out(&v, &a);
        }
        Ok(a)
    }

    fn layer_out(&self, v: &LayerView, input: &[f64]) -> Vec<f64> {
        let w = &self.params[v.w..v.b];
        let b = &self.params[v.b..v.b + v.n_out];
        (0..v.n_out)
            .map(|j| {
                let row = &w[j * v.n_in..(j + 1) * v.n_in];
                let z = row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>() + b[j];
                logistic(z)
            })
            .collect()
    }

    /// Mean squared error over all samples and outputs.
    pub fn batch_mse(&self, batch: &Batch) -> f64 {
        let mut sse = 0.0;
        for (x, t) in batch.rows() {
            let y = self.forward(x).expect("batch width checked on construction");
            sse += y.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
        sse / (batch.len() * self.n_outputs()) as f64
    }

    /// Batch MSE and its gradient with respect to [`parameters`](Self::parameters).
    pub fn batch_gradient(&self, batch: &Batch) -> (f64, Vec<f64>) {
        let layers = self.layers();
        let mut grad = vec![0.0; self.params.len()];
        let scale = 1.0 / (batch.len() * self.n_outputs()) as f64;
        let mut sse = 0.0;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(layers.len() + 1);
        for (x, t) in batch.rows() {
            acts.clear();
            acts.push(x.to_vec());
            for v in &layers {
                let next = self.layer_out(v, acts.last().unwrap());
                acts.push(next);
            }
            let out = acts.last().unwrap();
            let mut delta: Vec<f64> = out
                .iter()
                .zip(t)
                .map(|(&y, &target)| {
                    let e = y - target;
                    sse += e * e;
                    2.0 * e * scale * y * (1.0 - y)
                })
                .collect();
            for (l, v) in layers.iter().enumerate().rev() {
                let input = &acts[l];
                for j in 0..v.n_out {
                    let dj = delta[j];
                    let row = &mut grad[v.w + j * v.n_in..v.w + (j + 1) * v.n_in];
                    for (g, a) in row.iter_mut().zip(input) {
                        *g += dj * a;
                    }
                    grad[v.b + j] += dj;
                }
                if l > 0 {
                    let w = &self.params[v.w..v.b];
                    delta = (0..v.n_in)
                        .map(|i| {
                            let back: f64 = (0..v.n_out).map(|j| w[j * v.n_in + i] * delta[j]).sum();
                            back * input[i] * (1.0 - input[i])
                        })
                        .collect();
                }
            }
        }
        (sse * scale, grad)
    }
}

/// Inputs and targets for full-batch training.
#[derive(Debug, Clone)]
pub struct Batch {
    inputs: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
}

impl Batch {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(Error::Dataset(format!(
                "batch needs matching non-empty inputs/targets ({} vs {})",
                inputs.len(),
                targets.len()
            )));
        }
        let (wi, wt) = (inputs[0].len(), targets[0].len());
        for (x, t) in inputs.iter().zip(&targets) {
            if x.len() != wi {
                return Err(Error::DimensionMismatch { expected: wi, actual: x.len() });
            }
            if t.len() != wt {
                return Err(Error::DimensionMismatch { expected: wt, actual: t.len() });
            }
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    fn rows(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.inputs
            .iter()
            .zip(&self.targets)
            .map(|(x, t)| (x.as_slice(), t.as_slice()))
    }

    fn check_network(&self, net: &Network) -> Result<()> {
        if self.inputs[0].len() != net.n_inputs() {
            return Err(Error::DimensionMismatch {
                expected: net.n_inputs(),
                actual: self.inputs[0].len(),
            });
        }
        if self.targets[0].len() != net.n_outputs() {
            return Err(Error::DimensionMismatch {
                expected: net.n_outputs(),
                actual: self.targets[0].len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub max_iterations: usize,
    pub target_mse: f64,
    pub lr_initial: f64,
    pub lr_up: f64,
    pub lr_down: f64,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            max_iterations: 30_000,
            target_mse: 1e-4,
            lr_initial: 0.5,
            lr_up: 1.05,
            lr_down: 0.5,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_mse > 0.0 && self.lr_initial > 0.0 && self.lr_up > 1.0 && self.lr_down > 0.0 && self.lr_down < 1.0) {
            return Err(Error::param(format!(
                "training needs target_mse > 0, lr_initial > 0, lr_up > 1, 0 < lr_down < 1; got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TargetReached,
    MaxIterations,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    /// Accepted MSE after each epoch; entry 0 is the initial MSE.
    pub mse_trace: Vec<f64>,
    pub final_mse: f64,
    pub epochs: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub final_lr: f64,
    pub stop: StopReason,
}

/// Bold-driver full-batch descent. Each epoch tries one step; an improving
/// step is kept and grows the rate, a worse one is rolled back and shrinks it.
pub fn train_network(net: &mut Network, batch: &Batch, cfg: &TrainingConfig) -> Result<TrainReport> {
    cfg.validate()?;
    batch.check_network(net)?;
    let (mut mse, mut grad) = net.batch_gradient(batch);
    if !mse.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: 0 });
    }
    let mut lr = cfg.lr_initial;
    let mut trace = Vec::with_capacity(cfg.max_iterations + 1);
    trace.push(mse);
    let (mut accepted, mut rejected, mut epochs) = (0, 0, 0);
    let mut stop = StopReason::MaxIterations;
    let mut trial = net.clone();
    while epochs < cfg.max_iterations {
        if mse <= cfg.target_mse {
            stop = StopReason::TargetReached;
            break;
        }
        epochs += 1;
        for ((t, p), g) in trial.params.iter_mut().zip(&net.params).zip(&grad) {
            *t = p - lr * g;
        }
        let (trial_mse, trial_grad) = trial.batch_gradient(batch);
        if !trial_mse.is_finite() {
            return Err(Error::NonFiniteLoss { epoch: epochs });
        }
        if trial_mse < mse {
            std::mem::swap(net, &mut trial);
            mse = trial_mse;
            grad = trial_grad;
            lr *= cfg.lr_up;
            accepted += 1;
        } else {
            lr *= cfg.lr_down;
            rejected += 1;
        }
        trace.push(mse);
    }
    if mse <= cfg.target_mse {
        stop = StopReason::TargetReached;
    }
    Ok(TrainReport {
        mse_trace: trace,
        final_mse: mse,
        epochs,
        accepted,
        rejected,
        final_lr: lr,
        stop,
    })
}

/// Classifier layer sizes: `n_features : hidden... : 3` with one or two
/// hidden layers of 1..=100 neurons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkTopology(Vec<usize>);

impl NetworkTopology {
    pub fn new(sizes: Vec<usize>, n_features: usize) -> Result<Self> {
        if sizes.len() < 3 || sizes.len() > 4 {
            return Err(Error::Topology(format!(
                "need 1 or 2 hidden layers, got layer sizes {sizes:?}"
            )));
        }
        if sizes[0] != n_features {
            return Err(Error::Topology(format!(
                "input layer must have {n_features} neurons, got {}",
                sizes[0]
            )));
        }
        if *sizes.last().unwrap() != N_CLASSES {
            return Err(Error::Topology(format!(
                "output layer must have {N_CLASSES} neurons, got {}",
                sizes.last().unwrap()
            )));
        }
        if let Some(h) = sizes[1..sizes.len() - 1].iter().find(|h| !(1..=MAX_HIDDEN).contains(*h)) {
            return Err(Error::Topology(format!("hidden layer size {h} outside [1, {MAX_HIDDEN}]")));
        }
        Ok(Self(sizes))
    }

    pub fn single_hidden(n_features: usize, hidden: usize) -> Result<Self> {
        Self::new(vec![n_features, hidden, N_CLASSES], n_features)
    }

    /// Parses `50:35:3` style strings.
    pub fn parse(s: &str, n_features: usize) -> Result<Self> {
        let sizes = s
            .split(':')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Topology(format!("bad layer size `{t}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sizes, n_features)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }
}

impl std::fmt::Display for NetworkTopology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(":"))
    }
}

/// Hidden-layer size suggested by the two-thirds rule of thumb,
/// `2/3 * (inputs + outputs)` rounded down.
pub fn two_thirds_rule(n_inputs: usize, n_outputs: usize) -> usize {
    2 * (n_inputs + n_outputs) / 3
}

/// Trained curve classifier: network plus the feature settings it was
/// trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    topology: NetworkTopology,
    network: Network,
    feature: FeatureConfig,
}

/// Decoded class with the raw output activations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub class: CurveClass,
    pub scores: [f64; 3],
}

impl MlpModel {
    pub fn new(topology: NetworkTopology, network: Network, feature: FeatureConfig) -> Result<Self> {
        feature.validate()?;
        if network.sizes() != topology.sizes() {
            return Err(Error::Topology(format!(
                "network sizes {:?} do not match topology {topology}",
                network.sizes()
            )));
        }
        if topology.sizes()[0] != feature.n_features {
            return Err(Error::Topology(format!(
                "topology input {} does not match n_features {}",
                topology.sizes()[0],
                feature.n_features
            )));
        }
        Ok(Self {
            topology,
            network,
            feature,
        })
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn feature_config(&self) -> &FeatureConfig {
        &self.feature
    }

    pub fn forward(&self, features: &FeatureVector) -> Result<[f64; 3]> {
        let out = self.network.forward(features.as_slice())?;
        Ok([out[0], out[1], out[2]])
    }

    pub fn classify(&self, profile: &PressureProfile) -> Result<Classification> {
        let features = extract_features(profile, &self.feature)?;
        let scores = self.forward(&features)?;
        Ok(Classification {
            class: decode(&scores),
            scores,
        })
    }
}

/// Argmax over the three scores; ties go to the earlier class in
/// spiral, forward, backward order.
pub fn decode(scores: &[f64; 3]) -> CurveClass {
    let mut best = 0;
    for i in 1..N_CLASSES {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    CurveClass::ALL[best]
}

fn dataset_batch(data: &LabeledDataset, cfg: &FeatureConfig) -> Result<Batch> {
    let mut inputs = Vec::with_capacity(data.len());
    let mut targets = Vec::with_capacity(data.len());
    for (profile, class) in data.items() {
        inputs.push(extract_features(profile, cfg)?.as_slice().to_vec());
        targets.push(class.one_hot().to_vec());
    }
    Batch::new(inputs, targets)
}

/// Trains a classifier from seeded random initial weights.
pub fn train(
    data: &LabeledDataset,
    topology: &NetworkTopology,
    feature: &FeatureConfig,
    cfg: &TrainingConfig,
) -> Result<(MlpModel, TrainReport)> {
    data.check_trainable()?;
    let batch = dataset_batch(data, feature)?;
    train_on_batch(&batch, topology, feature, cfg)
}

fn train_on_batch(
    batch: &Batch,
    topology: &NetworkTopology,
    feature: &FeatureConfig,
    cfg: &TrainingConfig,
) -> Result<(MlpModel, TrainReport)> {
    let mut net = Network::random(topology.sizes(), cfg.seed)?;
    let report = train_network(&mut net, batch, cfg)?;
    Ok((MlpModel::new(topology.clone(), net, *feature)?, report))
}

/// Runs `restarts` trainings with seeds `cfg.seed, cfg.seed + 1, ...` and
/// keeps the one with the lowest final MSE (earliest on ties).
pub fn train_with_restarts(
    data: &LabeledDataset,
    topology: &NetworkTopology,
    feature: &FeatureConfig,
    cfg: &TrainingConfig,
    restarts: usize,
) -> Result<(MlpModel, TrainReport)> {
    data.check_trainable()?;
    let batch = dataset_batch(data, feature)?;
    let mut best: Option<(MlpModel, TrainReport)> = None;
    for r in 0..restarts.max(1) {
        let run_cfg = TrainingConfig {
            seed: cfg.seed.wrapping_add(r as u64),
            ..*cfg
        };
        let (model, report) = train_on_batch(&batch, topology, feature, &run_cfg)?;
        if best.as_ref().is_none_or(|(_, b)| report.final_mse < b.final_mse) {
            best = Some((model, report));
        }
    }
    Ok(best.expect("at least one run"))
}

/// Confusion matrix indexed `[true class][predicted class]` in
/// spiral, forward, backward order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Evaluation {
    pub confusion: [[usize; 3]; 3],
}

impl Evaluation {
    pub fn row_total(&self, class: CurveClass) -> usize {
        self.confusion[class.index()].iter().sum()
    }

    pub fn correct(&self, class: CurveClass) -> usize {
        self.confusion[class.index()][class.index()]
    }

    pub fn count(&self, truth: CurveClass, predicted: CurveClass) -> usize {
        self.confusion[truth.index()][predicted.index()]
    }

    /// `None` when the class has no test items.
    pub fn accuracy(&self, class: CurveClass) -> Option<f64> {
        let total = self.row_total(class);
        (total > 0).then(|| self.correct(class) as f64 / total as f64)
    }

    pub fn overall_accuracy(&self) -> f64 {
        let total: usize = CurveClass::ALL.iter().map(|&c| self.row_total(c)).sum();
        let correct: usize = CurveClass::ALL.iter().map(|&c| self.correct(c)).sum();
        correct as f64 / total.max(1) as f64
    }
}

pub fn evaluate(model: &MlpModel, data: &LabeledDataset) -> Result<Evaluation> {
    let mut confusion = [[0usize; 3]; 3];
    for (profile, class) in data.items() {
        let predicted = model.classify(profile)?.class;
        confusion[class.index()][predicted.index()] += 1;
    }
    Ok(Evaluation { confusion })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub topology: String,
    pub hidden: usize,
    pub final_mse: f64,
    pub epochs: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    /// Sorted by final MSE, then hidden size.
    pub rows: Vec<SweepRow>,
    pub two_thirds_candidate: usize,
}

/// Trains one single-hidden-layer classifier per hidden size in `hidden`,
/// all from the same seed and config.
pub fn topology_sweep(
    data: &LabeledDataset,
    feature: &FeatureConfig,
    cfg: &TrainingConfig,
    hidden: RangeInclusive<usize>,
) -> Result<SweepReport> {
    if *hidden.start() < 1 || *hidden.end() > MAX_HIDDEN || hidden.is_empty() {
        return Err(Error::param(format!(
            "hidden range {}..={} must lie within [1, {MAX_HIDDEN}]",
            hidden.start(),
            hidden.end()
        )));
    }
    data.check_trainable()?;
    let batch = dataset_batch(data, feature)?;
    let mut rows = Vec::new();
    for h in hidden {
        let topology = NetworkTopology::single_hidden(feature.n_features, h)?;
        let (_, report) = train_on_batch(&batch, &topology, feature, cfg)?;
        rows.push(SweepRow {
            topology: topology.to_string(),
            hidden: h,
            final_mse: report.final_mse,
            epochs: report.epochs,
        });
    }
    rows.sort_by(|a, b| a.final_mse.total_cmp(&b.final_mse).then(a.hidden.cmp(&b.hidden)));
    Ok(SweepReport {
        rows,
        two_thirds_candidate: two_thirds_rule(feature.n_features, N_CLASSES),
    })
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u64,
    topology: Vec<usize>,
    activation: String,
    feature: FeatureConfig,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

/// Serializes a model. Floats use the shortest representation that parses
/// back to the identical bits.
pub fn model_to_json(model: &MlpModel) -> String {
    let layers = model.network.sizes().len() - 1;
    let (weights, biases) = (0..layers)
        .map(|l| {
            let (w, b) = model.network.layer(l);
            (w.to_vec(), b.to_vec())
        })
        .unzip();
    let file = ModelFile {
        version: MODEL_FILE_VERSION,
        topology: model.topology.sizes().to_vec(),
        activation: "logistic".into(),
        feature: model.feature,
        weights,
        biases,
    };
    serde_json::to_string(&file).expect("model serializes")
}

pub fn model_from_json(text: &str) -> Result<MlpModel> {
    let malformed = |reason: String| Error::Malformed { what: "model file", reason };
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| malformed("missing integer `version`".into()))?;
    if version != MODEL_FILE_VERSION {
        return Err(Error::VersionMismatch {
            what: "model file",
            found: version,
            expected: MODEL_FILE_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;
    if file.activation != "logistic" {
        return Err(malformed(format!("unsupported activation `{}`", file.activation)));
    }
    file.feature.validate().map_err(|e| malformed(e.to_string()))?;
    let topology = NetworkTopology::new(file.topology, file.feature.n_features)?;
    let sizes = topology.sizes();
    let layers = sizes.len() - 1;
    if file.weights.len() != layers || file.biases.len() != layers {
        return Err(malformed(format!("expected {layers} weight and bias arrays")));
    }
    let mut params = Vec::new();
    for l in 0..layers {
        let (n_in, n_out) = (sizes[l], sizes[l + 1]);
        if file.weights[l].len() != n_in * n_out || file.biases[l].len() != n_out {
            return Err(malformed(format!(
                "layer {l}: expected {n_out}x{n_in} weights and {n_out} biases"
            )));
        }
        params.extend_from_slice(&file.weights[l]);
        params.extend_from_slice(&file.biases[l]);
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(malformed("non-finite parameter".into()));
    }
    let mut network = Network::zeros(sizes)?;
    network.set_parameters(&params)?;
    MlpModel::new(topology, network, file.feature)
}

pub fn save_model(model: &MlpModel, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
