//! Linear-chain conditional random field.
//!
//! A sequence `y` over a sentence `x` scores
//! `sum_t unary[t][y_t] + sum_{t>0} transition[y_{t-1}][y_t]`, where the
//! unary score sums the weights of the observation features (template
//! expansions) fired at `t` paired with `y_t`. `P(y|x)` is the softmax of
//! that score over all label sequences. All inference runs in log space.
//!
//! Training maximizes the conditional log-likelihood minus a Gaussian
//! prior `sum_k w_k^2 / (2 rho^2)` by batch gradient ascent with a
//! backtracking line search, starting from all-zero weights.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::features::{BioTag, TokenRecord};
use crate::template::Template;

/// Ordered label inventory; order fixes tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    labels: Vec<String>,
}

impl LabelSet {
    pub fn new<I>(labels: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::Input("label set is empty".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || labels[..i].contains(l) {
                return Err(Error::Input(format!("invalid or duplicate label {l:?}")));
            }
        }
        Ok(LabelSet { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::Input(format!("label {label:?} is not in the label set")))
    }
}

impl Default for LabelSet {
    /// `[O, B-MWE, I-MWE]`.
    fn default() -> Self {
        LabelSet {
            labels: BioTag::ALL.iter().map(|t| t.as_str().to_string()).collect(),
        }
    }
}

/// Identifies one weight.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureKey {
    /// Observation feature string paired with the current label.
    Observation { feature: String, label: String },
    /// Label bigram.
    Transition { prev: String, cur: String },
}

/// Trained (or hand-built) model.
#[derive(Debug, Clone)]
pub struct CrfModel {
    labels: LabelSet,
    template: Template,
    rho: f64,
    features: Vec<String>,
    index: HashMap<String, usize>,
    /// `feature_id * L + label`
    observation: Vec<f64>,
    /// `prev * L + cur`
    transition: Vec<f64>,
}

impl PartialEq for CrfModel {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
            && self.template == other.template
            && self.rho == other.rho
            && self.features == other.features
            && self.observation == other.observation
            && self.transition == other.transition
    }
}

impl CrfModel {
    /// Model with no observation features and zero transitions.
    pub fn new(labels: LabelSet, template: Template, rho: f64) -> Result<Self> {
        Self::from_parts(labels, template, rho, Vec::new(), Vec::new(), None)
    }

    /// Assemble from raw parts. `observation` is row-major
    /// `[feature][label]`; `transition` defaults to zeros.
    pub fn from_parts(
        labels: LabelSet,
        template: Template,
        rho: f64,
        features: Vec<String>,
        observation: Vec<f64>,
        transition: Option<Vec<f64>>,
    ) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::Input(format!("rho must be positive and finite, got {rho}")));
        }
        let l = labels.len();
        if observation.len() != features.len() * l {
            return Err(Error::Input("observation weight count does not match features × labels".into()));
        }
        let transition = transition.unwrap_or_else(|| vec![0.0; l * l]);
        if transition.len() != l * l {
            return Err(Error::Input("transition weight count must be labels²".into()));
        }
        if observation.iter().chain(&transition).any(|w| !w.is_finite()) {
            return Err(Error::Input("weights must be finite".into()));
        }
        let mut index = HashMap::with_capacity(features.len());
        for (i, f) in features.iter().enumerate() {
            if index.insert(f.clone(), i).is_some() {
                return Err(Error::Input(format!("duplicate feature {f:?}")));
            }
        }
        Ok(CrfModel { labels, template, rho, features, index, observation, transition })
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn template(&self) -> &Template {
        &self.template
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Materialized observation feature strings, in id order.
    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn observation_weights(&self) -> &[f64] {
        &self.observation
    }

    pub fn transition_weights(&self) -> &[f64] {
        &self.transition
    }

    pub fn transitions_enabled(&self) -> bool {
        self.template.include_label_bigram
    }

    pub fn feature_id(&self, feature: &str) -> Option<usize> {
        self.index.get(feature).copied()
    }

    /// Weight for `key`; unknown keys read as zero.
    pub fn weight(&self, key: &FeatureKey) -> f64 {
        let l = self.labels.len();
        match key {
            FeatureKey::Observation { feature, label } => {
                match (self.feature_id(feature), self.labels.index_of(label)) {
                    (Some(f), Some(y)) => self.observation[f * l + y],
                    _ => 0.0,
                }
            }
            FeatureKey::Transition { prev, cur } => {
                match (self.labels.index_of(prev), self.labels.index_of(cur)) {
                    (Some(a), Some(b)) => self.transition[a * l + b],
                    _ => 0.0,
                }
            }
        }
    }

    /// Set a weight, materializing a new observation feature if needed.
    pub fn set_weight(&mut self, key: &FeatureKey, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::Input("weights must be finite".into()));
        }
        let l = self.labels.len();
        match key {
            FeatureKey::Observation { feature, label } => {
                let y = self.labels.require(label)?;
                let f = self.materialize(feature);
                self.observation[f * l + y] = value;
            }
            FeatureKey::Transition { prev, cur } => {
                let a = self.labels.require(prev)?;
                let b = self.labels.require(cur)?;
                self.transition[a * l + b] = value;
            }
        }
        Ok(())
    }

    fn materialize(&mut self, feature: &str) -> usize {
        if let Some(id) = self.feature_id(feature) {
            return id;
        }
        let id = self.features.len();
        self.features.push(feature.to_string());
        self.index.insert(feature.to_string(), id);
        self.observation.extend(std::iter::repeat_n(0.0, self.labels.len()));
        id
    }

    /// Every materialized weight in deterministic order: observations by
    /// feature id then label, then transitions row-major.
    pub fn weights(&self) -> impl Iterator<Item = (FeatureKey, f64)> + '_ {
        let l = self.labels.len();
        let obs = self.observation.iter().enumerate().map(move |(i, &w)| {
            (
                FeatureKey::Observation {
                    feature: self.features[i / l].clone(),
                    label: self.labels.get(i % l).to_string(),
                },
                w,
            )
        });
        let trans = self.transition.iter().enumerate().map(move |(i, &w)| {
            (
                FeatureKey::Transition {
                    prev: self.labels.get(i / l).to_string(),
                    cur: self.labels.get(i % l).to_string(),
                },
                w,
            )
        });
        obs.chain(trans)
    }

    /// Sum of squared weights that take part in the Gaussian prior.
    fn squared_norm(&self) -> f64 {
        let obs: f64 = self.observation.iter().map(|w| w * w).sum();
        let trans: f64 = if self.transitions_enabled() {
            self.transition.iter().map(|w| w * w).sum()
        } else {
            0.0
        };
        obs + trans
    }

    /// Feature ids fired at each position; unknown features are dropped.
    fn compile(&self, rows: &[TokenRecord]) -> Vec<Vec<u32>> {
        (0..rows.len())
            .map(|t| {
                self.template
                    .macros
                    .iter()
                    .filter_map(|m| self.feature_id(&m.expand(rows, t)).map(|id| id as u32))
                    .collect()
            })
            .collect()
    }

    fn gold_indices(&self, rows: &[TokenRecord]) -> Result<Vec<usize>> {
        rows.iter().map(|r| self.labels.require(r.label.as_str())).collect()
    }
}

/// Score table for one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    len: usize,
    num_labels: usize,
    unary: Vec<f64>,
    transition: Vec<f64>,
}

/// Per-position and per-edge posterior probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    num_labels: usize,
    /// `t * L + y`
    pub unary: Vec<f64>,
    /// `(t - 1) * L * L + prev * L + cur`, for t in 1..T
    pub pairwise: Vec<f64>,
}

impl Marginals {
    pub fn at(&self, t: usize, y: usize) -> f64 {
        self.unary[t * self.num_labels + y]
    }

    pub fn edge(&self, t: usize, prev: usize, cur: usize) -> f64 {
        let l = self.num_labels;
        self.pairwise[(t - 1) * l * l + prev * l + cur]
    }
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

impl Lattice {
    /// `unary` is row-major `T × L`, `transition` is `L × L`.
    pub fn new(len: usize, num_labels: usize, unary: Vec<f64>, transition: Vec<f64>) -> Result<Self> {
        if num_labels == 0 || unary.len() != len * num_labels || transition.len() != num_labels * num_labels {
            return Err(Error::Input("lattice dimensions do not match".into()));
        }
        if unary.iter().chain(&transition).any(|v| !v.is_finite()) {
            return Err(Error::Input("lattice entries must be finite".into()));
        }
        Ok(Lattice { len, num_labels, unary, transition })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn unary(&self, t: usize, y: usize) -> f64 {
        self.unary[t * self.num_labels + y]
    }

    pub fn transition(&self, prev: usize, cur: usize) -> f64 {
        self.transition[prev * self.num_labels + cur]
    }

    /// Add `delta` to every unary score at position `t`.
    pub fn shift_position(&mut self, t: usize, delta: f64) {
        let l = self.num_labels;
        for v in &mut self.unary[t * l..(t + 1) * l] {
            *v += delta;
        }
    }

    /// Unnormalized log score of a label sequence.
    pub fn score(&self, labels: &[usize]) -> f64 {
        debug_assert_eq!(labels.len(), self.len);
        let mut s = 0.0;
        for (t, &y) in labels.iter().enumerate() {
            s += self.unary(t, y);
            if t > 0 {
                s += self.transition(labels[t - 1], y);
            }
        }
        s
    }

    /// Forward log-messages, `t * L + y`.
    pub fn forward(&self) -> Vec<f64> {
        let l = self.num_labels;
        let mut alpha = vec![0.0; self.len * l];
        if self.len == 0 {
            return alpha;
        }
        alpha[..l].copy_from_slice(&self.unary[..l]);
        let mut buf = vec![0.0; l];
        for t in 1..self.len {
            for y in 0..l {
                for (p, b) in buf.iter_mut().enumerate() {
                    *b = alpha[(t - 1) * l + p] + self.transition(p, y);
                }
                alpha[t * l + y] = self.unary(t, y) + log_sum_exp(&buf);
            }
        }
        alpha
    }

    /// Backward log-messages, `t * L + y`.
    pub fn backward(&self) -> Vec<f64> {
        let l = self.num_labels;
        let mut beta = vec![0.0; self.len * l];
        let mut buf = vec![0.0; l];
        for t in (0..self.len.saturating_sub(1)).rev() {
            for p in 0..l {
                for (y, b) in buf.iter_mut().enumerate() {
                    *b = self.transition(p, y) + self.unary(t + 1, y) + beta[(t + 1) * l + y];
                }
                beta[t * l + p] = log_sum_exp(&buf);
            }
        }
        beta
    }

    /// `log Z` by the forward recursion.
    pub fn log_partition(&self) -> f64 {
        if self.len == 0 {
            return 0.0;
        }
        let l = self.num_labels;
        let alpha = self.forward();
        log_sum_exp(&alpha[(self.len - 1) * l..])
    }

    /// `log Z` by the backward recursion.
    pub fn log_partition_backward(&self) -> f64 {
        if self.len == 0 {
            return 0.0;
        }
        let beta = self.backward();
        let first: Vec<f64> = (0..self.num_labels).map(|y| self.unary(0, y) + beta[y]).collect();
        log_sum_exp(&first)
    }

    /// Posterior marginals and `log Z`.
    pub fn marginals(&self) -> (Marginals, f64) {
        let l = self.num_labels;
        let alpha = self.forward();
        let beta = self.backward();
        let log_z = if self.len == 0 { 0.0 } else { log_sum_exp(&alpha[(self.len - 1) * l..]) };
        let unary = alpha.iter().zip(&beta).map(|(a, b)| (a + b - log_z).exp()).collect();
        let mut pairwise = Vec::with_capacity(self.len.saturating_sub(1) * l * l);
        for t in 1..self.len {
            for p in 0..l {
                for y in 0..l {
                    let v = alpha[(t - 1) * l + p] + self.transition(p, y) + self.unary(t, y) + beta[t * l + y];
                    pairwise.push((v - log_z).exp());
                }
            }
        }
        (Marginals { num_labels: l, unary, pairwise }, log_z)
    }

    /// Highest-scoring sequence and its score. Ties go to the lower label
    /// index.
    pub fn viterbi(&self) -> (Vec<usize>, f64) {
        if self.len == 0 {
            return (Vec::new(), 0.0);
        }
        let l = self.num_labels;
        let mut delta = self.unary[..l].to_vec();
        let mut back = vec![0usize; self.len * l];
        for t in 1..self.len {
            let mut next = vec![0.0; l];
            for y in 0..l {
                let mut best = 0;
                let mut best_score = delta[0] + self.transition(0, y);
                for (p, &d) in delta.iter().enumerate().skip(1) {
                    let s = d + self.transition(p, y);
                    if s > best_score {
                        best = p;
                        best_score = s;
                    }
                }
                back[t * l + y] = best;
                next[y] = best_score + self.unary(t, y);
            }
            delta = next;
        }
        let mut last = 0;
        for y in 1..l {
            if delta[y] > delta[last] {
                last = y;
            }
        }
        let best_score = delta[last];
        let mut path = vec![0; self.len];
        path[self.len - 1] = last;
        for t in (1..self.len).rev() {
            path[t - 1] = back[t * l + path[t]];
        }
        (path, best_score)
    }
}

fn lattice_from_ids(model: &CrfModel, compiled: &[Vec<u32>], observation: &[f64], transition: &[f64]) -> Lattice {
    let l = model.labels.len();
    let mut unary = vec![0.0; compiled.len() * l];
    for (t, feats) in compiled.iter().enumerate() {
        let row = &mut unary[t * l..(t + 1) * l];
        for &f in feats {
            let w = &observation[f as usize * l..(f as usize + 1) * l];
            for (u, wy) in row.iter_mut().zip(w) {
                *u += wy;
            }
        }
    }
    let transition = if model.transitions_enabled() {
        transition.to_vec()
    } else {
        vec![0.0; l * l]
    };
    Lattice { len: compiled.len(), num_labels: l, unary, transition }
}

/// Score table of `rows` under `model`.
pub fn build_lattice(model: &CrfModel, rows: &[TokenRecord]) -> Lattice {
    let compiled = model.compile(rows);
    lattice_from_ids(model, &compiled, &model.observation, &model.transition)
}

/// `log P(labels | rows)`.
pub fn sequence_log_prob(model: &CrfModel, rows: &[TokenRecord], labels: &[&str]) -> Result<f64> {
    if labels.len() != rows.len() {
        return Err(Error::Input(format!(
            "{} labels for a sentence of {} tokens",
            labels.len(),
            rows.len()
        )));
    }
    let idx: Vec<usize> = labels.iter().map(|l| model.labels.require(l)).collect::<Result<_>>()?;
    let lattice = build_lattice(model, rows);
    Ok(lattice.score(&idx) - lattice.log_partition())
}

/// Penalized conditional log-likelihood of the gold labels in `data`.
pub fn regularized_objective(model: &CrfModel, data: &[Vec<TokenRecord>]) -> Result<f64> {
    let mut total = 0.0;
    for rows in data {
        let gold = model.gold_indices(rows)?;
        let lattice = build_lattice(model, rows);
        total += lattice.score(&gold) - lattice.log_partition();
    }
    Ok(total - model.squared_norm() / (2.0 * model.rho * model.rho))
}

/// Dense objective and gradient over compiled sentences.
struct Problem<'a> {
    model: &'a CrfModel,
    sentences: Vec<(Vec<Vec<u32>>, Vec<usize>)>,
    num_features: usize,
}

impl Problem<'_> {
    fn dimension(&self) -> usize {
        let l = self.model.labels.len();
        self.num_features * l + if self.model.transitions_enabled() { l * l } else { 0 }
    }

    fn split<'w>(&self, w: &'w [f64]) -> (&'w [f64], &'w [f64]) {
        w.split_at(self.num_features * self.model.labels.len())
    }

    /// Objective value and gradient at `w`.
    fn evaluate(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let l = self.model.labels.len();
        let (obs, trans) = self.split(w);
        let zeros = vec![0.0; l * l];
        let trans = if trans.is_empty() { &zeros[..] } else { trans };
        let off = self.num_features * l;
        let with_trans = self.model.transitions_enabled();
        let mut grad = vec![0.0; w.len()];
        let mut value = 0.0;
        for (feats, gold) in &self.sentences {
            let lattice = lattice_from_ids(self.model, feats, obs, trans);
            let (marg, log_z) = lattice.marginals();
            value += lattice.score(gold) - log_z;
            for (t, fs) in feats.iter().enumerate() {
                for &f in fs {
                    let base = f as usize * l;
                    grad[base + gold[t]] += 1.0;
                    for y in 0..l {
                        grad[base + y] -= marg.at(t, y);
                    }
                }
            }
            if with_trans {
                for t in 1..gold.len() {
                    grad[off + gold[t - 1] * l + gold[t]] += 1.0;
                    for (k, p) in marg.pairwise[(t - 1) * l * l..t * l * l].iter().enumerate() {
                        grad[off + k] -= p;
                    }
                }
            }
        }
        let inv_var = 1.0 / (self.model.rho * self.model.rho);
        let mut sq = 0.0;
        for (g, wk) in grad.iter_mut().zip(w) {
            *g -= wk * inv_var;
            sq += wk * wk;
        }
        (value - 0.5 * sq * inv_var, grad)
    }
}

/// Gradient of [`regularized_objective`] for every materialized weight
/// plus every observation feature that fires in `data`.
pub fn gradient(model: &CrfModel, data: &[Vec<TokenRecord>]) -> Result<BTreeMap<FeatureKey, f64>> {
    let mut extended = model.clone();
    for rows in data {
        for t in 0..rows.len() {
            for f in extended.template.expand(rows, t) {
                extended.materialize(&f);
            }
        }
    }
    let mut sentences = Vec::with_capacity(data.len());
    for rows in data {
        sentences.push((extended.compile(rows), extended.gold_indices(rows)?));
    }
    let num_features = extended.features.len();
    let problem = Problem { model: &extended, sentences, num_features };
    let mut w = extended.observation.clone();
    if extended.transitions_enabled() {
        w.extend_from_slice(&extended.transition);
    }
    let (_, grad) = problem.evaluate(&w);
    let l = extended.labels.len();
    let mut out = BTreeMap::new();
    for (i, g) in grad.iter().enumerate() {
        let key = if i < num_features * l {
            FeatureKey::Observation {
                feature: extended.features[i / l].clone(),
                label: extended.labels.get(i % l).to_string(),
            }
        } else {
            let k = i - num_features * l;
            FeatureKey::Transition {
                prev: extended.labels.get(k / l).to_string(),
                cur: extended.labels.get(k % l).to_string(),
            }
        };
        out.insert(key, *g);
    }
    Ok(out)
}

/// Optimizer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Standard deviation of the Gaussian prior.
    pub rho: f64,
    pub max_iterations: usize,
    /// Stop once the gradient infinity-norm falls below this.
    pub gradient_tolerance: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { rho: 10.0, max_iterations: 200, gradient_tolerance: 1e-4 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::Config(format!("rho must be positive, got {}", self.rho)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        if !(self.gradient_tolerance.is_finite() && self.gradient_tolerance > 0.0) {
            return Err(Error::Config("gradient_tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Optimizer trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub iterations: usize,
    pub converged: bool,
    /// Objective at the start and after every accepted step.
    pub objective_trace: Vec<f64>,
    pub final_gradient_norm: f64,
}

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;

/// Train from zero weights on the gold labels of `data`.
pub fn train(data: &[Vec<TokenRecord>], template: &Template, config: &TrainConfig) -> Result<CrfModel> {
    train_with_report(data, template, config).map(|(m, _)| m)
}

pub fn train_with_report(
    data: &[Vec<TokenRecord>],
    template: &Template,
    config: &TrainConfig,
) -> Result<(CrfModel, TrainReport)> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Input("training data is empty".into()));
    }
    if let Some(i) = data.iter().position(Vec::is_empty) {
        return Err(Error::Input(format!("training sentence {i} is empty")));
    }
    let mut model = CrfModel::new(LabelSet::default(), template.clone(), config.rho)?;
    for rows in data {
        for t in 0..rows.len() {
            for f in template.expand(rows, t) {
                model.materialize(&f);
            }
        }
    }
    let mut sentences = Vec::with_capacity(data.len());
    for rows in data {
        sentences.push((model.compile(rows), model.gold_indices(rows)?));
    }
    let num_features = model.features.len();
    let problem = Problem { model: &model, sentences, num_features };

    let mut w = vec![0.0; problem.dimension()];
    let (mut value, mut grad) = problem.evaluate(&w);
    let mut trace = vec![value];
    let mut step = 1.0 / inf_norm(&grad).max(1.0);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iterations {
        if inf_norm(&grad) < config.gradient_tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let g_sq: f64 = grad.iter().map(|g| g * g).sum();
        let mut alpha = step;
        let accepted = loop {
            let trial: Vec<f64> = w.iter().zip(&grad).map(|(wk, gk)| wk + alpha * gk).collect();
            let (v, g) = problem.evaluate(&trial);
            if v.is_finite() && v >= value + ARMIJO * alpha * g_sq {
                break Some((trial, v, g));
            }
            alpha *= 0.5;
            if alpha < MIN_STEP {
                break None;
            }
        };
        let Some((next_w, next_value, next_grad)) = accepted else {
            break;
        };
        // Barzilai-Borwein trial step for the next iteration.
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..w.len() {
            let s = next_w[i] - w[i];
            let y = grad[i] - next_grad[i];
            ss += s * s;
            sy += s * y;
        }
        step = if sy > 0.0 && (ss / sy).is_finite() { ss / sy } else { alpha * 2.0 };
        w = next_w;
        value = next_value;
        grad = next_grad;
        trace.push(value);
    }
    if !converged && inf_norm(&grad) < config.gradient_tolerance {
        converged = true;
    }
    let final_gradient_norm = inf_norm(&grad);
    drop(problem);

    let l = model.labels.len();
    let (obs, trans) = w.split_at(num_features * l);
    model.observation.copy_from_slice(obs);
    if model.transitions_enabled() {
        model.transition.copy_from_slice(trans);
    }
    let report = TrainReport { iterations, converged, objective_trace: trace, final_gradient_norm };
    Ok((model, report))
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Best label indices for `rows`.
pub fn decode_indices(model: &CrfModel, rows: &[TokenRecord]) -> Vec<usize> {
    build_lattice(model, rows).viterbi().0
}

/// Best label sequence for `rows`.
pub fn viterbi_decode(model: &CrfModel, rows: &[TokenRecord]) -> Vec<String> {
    decode_indices(model, rows)
        .into_iter()
        .map(|y| model.labels.get(y).to_string())
        .collect()
}

/// Decode into BIO tags; fails if the model uses labels outside BIO.
pub fn tag_sentence(model: &CrfModel, rows: &[TokenRecord]) -> Result<Vec<BioTag>> {
    decode_indices(model, rows)
        .into_iter()
        .map(|y| model.labels.get(y).parse())
        .collect()
}
