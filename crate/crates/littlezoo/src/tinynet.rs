//! Minimal from-scratch numerical kernel for the learned competence
//! regressor: a token-embedding mean-pool encoder, a Tanh hidden layer,
//! a sigmoid output, binary cross-entropy and Adam, all in 64-bit floats.
//!
//! Layout: `embed (V x d)` -> mean over tokens -> `enc (d x d)` + Tanh ->
//! `head (h x d)` + Tanh -> `out (1 x h)` + sigmoid. The encoder output
//! (after the Tanh) is the goal's latent vector.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::maths;

/// Reserved id for out-of-vocabulary tokens.
pub const UNK_TOKEN: u32 = 0;

/// Lowercased alphanumeric tokens of `text`.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            for lower in ch.to_lowercase() {
                current.push(lower);
            }
        } else if !current.is_empty() {
            tokens.push(core::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Token vocabulary, id 0 reserved for unknown tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tokenizer {
    ids: alloc::collections::BTreeMap<String, u32>,
}

impl Tokenizer {
    /// Builds the vocabulary from a corpus of texts (sorted for
    /// reproducibility).
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a str>) -> Tokenizer {
        let mut unique: alloc::collections::BTreeSet<String> = alloc::collections::BTreeSet::new();
        for text in texts {
            unique.extend(tokenize(text));
        }
        let ids = unique
            .into_iter()
            .enumerate()
            .map(|(index, token)| (token, index as u32 + 1))
            .collect();
        Tokenizer { ids }
    }

    /// Vocabulary size including the unknown token.
    pub fn vocab_size(&self) -> usize {
        self.ids.len() + 1
    }

    /// Tokens in id order (id 1 first); id 0 is the unknown token.
    pub fn tokens_in_id_order(&self) -> Vec<String> {
        let mut tokens: Vec<(&String, &u32)> = self.ids.iter().collect();
        tokens.sort_by_key(|(_, id)| **id);
        tokens.into_iter().map(|(token, _)| token.clone()).collect()
    }

    /// Rebuilds a tokenizer from [`Tokenizer::tokens_in_id_order`] output.
    pub fn from_tokens_in_id_order(tokens: Vec<String>) -> Tokenizer {
        Tokenizer {
            ids: tokens
                .into_iter()
                .enumerate()
                .map(|(index, token)| (token, index as u32 + 1))
                .collect(),
        }
    }

    /// Encodes `text`; empty text maps to a single unknown token.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return vec![UNK_TOKEN];
        }
        tokens
            .iter()
            .map(|t| self.ids.get(t).copied().unwrap_or(UNK_TOKEN))
            .collect()
    }
}

/// A named parameter segment inside the flat store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Flat 64-bit parameter storage with a named-segment index and a version
/// counter bumped on every optimizer step.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStore {
    values: Vec<f64>,
    segments: Vec<Segment>,
    version: u64,
}

/// Numerical-kernel errors.
#[derive(Debug, Clone, PartialEq)]
pub enum NetError {
    ShapeMismatch(String),
    /// Training targets must be exactly 0.0 or 1.0.
    NonBinaryOutcome(f64),
    EmptyBatch,
}

impl core::fmt::Display for NetError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            NetError::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
            NetError::NonBinaryOutcome(v) => write!(f, "outcome {v} is not binary"),
            NetError::EmptyBatch => write!(f, "training batch is empty"),
        }
    }
}

impl core::error::Error for NetError {}

impl ParamStore {
    /// Allocates zeroed segments with the given `(name, rows, cols)` shapes.
    pub fn build(shapes: &[(&str, usize, usize)]) -> ParamStore {
        let mut segments = Vec::with_capacity(shapes.len());
        let mut offset = 0;
        for (name, rows, cols) in shapes {
            segments.push(Segment {
                name: name.to_string(),
                offset,
                rows: *rows,
                cols: *cols,
            });
            offset += rows * cols;
        }
        ParamStore {
            values: vec![0.0; offset],
            segments,
            version: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    fn segment_index(&self, name: &str) -> Option<usize> {
        self.segments.iter().position(|s| s.name == name)
    }

    pub fn seg(&self, name: &str) -> &[f64] {
        let segment = &self.segments[self.segment_index(name).expect("segment exists")];
        &self.values[segment.offset..segment.offset + segment.len()]
    }

    pub fn seg_mut(&mut self, name: &str) -> &mut [f64] {
        let index = self.segment_index(name).expect("segment exists");
        let segment = self.segments[index].clone();
        &mut self.values[segment.offset..segment.offset + segment.len()]
    }

    /// Seeded uniform initialization in `[-scale, scale]`.
    pub fn init_uniform<R: Rng>(&mut self, rng: &mut R, scale: f64) {
        for value in &mut self.values {
            *value = rng.random_range(-scale..=scale);
        }
    }

    /// Immutable deep copy of the parameter values.
    pub fn snapshot(&self, episode: u64) -> Snapshot {
        Snapshot {
            values: self.values.clone(),
            segments: self.segments.clone(),
            version: self.version,
            episode,
        }
    }

    /// Restores a snapshot's values; shapes must match.
    pub fn restore(&mut self, snapshot: &Snapshot) -> Result<(), NetError> {
        if snapshot.segments != self.segments {
            return Err(NetError::ShapeMismatch(
                "snapshot segment table differs from the store".into(),
            ));
        }
        self.values.copy_from_slice(&snapshot.values);
        self.version = snapshot.version;
        Ok(())
    }

    fn bump_version(&mut self) {
        self.version += 1;
    }
}

/// Deep copy of a parameter store at a point in time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub values: Vec<f64>,
    pub segments: Vec<Segment>,
    pub version: u64,
    pub episode: u64,
}

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam first/second moment state matching a parameter store.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    config: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    steps: u64,
}

impl AdamState {
    pub fn new(config: AdamConfig, parameter_count: usize) -> AdamState {
        AdamState {
            config,
            m: vec![0.0; parameter_count],
            v: vec![0.0; parameter_count],
            steps: 0,
        }
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    /// Persistence view: first moments, second moments, step count.
    pub fn state(&self) -> (&[f64], &[f64], u64) {
        (&self.m, &self.v, self.steps)
    }

    pub fn from_state(config: AdamConfig, m: Vec<f64>, v: Vec<f64>, steps: u64) -> Option<AdamState> {
        if m.len() != v.len() {
            return None;
        }
        Some(AdamState {
            config,
            m,
            v,
            steps,
        })
    }

    /// One Adam step with bias correction. Bumps the store version.
    pub fn step(&mut self, params: &mut ParamStore, grads: &[f64]) -> Result<(), NetError> {
        if grads.len() != params.len() || self.m.len() != params.len() {
            return Err(NetError::ShapeMismatch(format!(
                "gradient length {} vs parameter length {}",
                grads.len(),
                params.len()
            )));
        }
        self.steps += 1;
        let c = &self.config;
        let bias1 = 1.0 - powi(c.beta1, self.steps);
        let bias2 = 1.0 - powi(c.beta2, self.steps);
        let values = params.values_mut();
        for i in 0..values.len() {
            let g = grads[i];
            self.m[i] = c.beta1 * self.m[i] + (1.0 - c.beta1) * g;
            self.v[i] = c.beta2 * self.v[i] + (1.0 - c.beta2) * g * g;
            let m_hat = self.m[i] / bias1;
            let v_hat = self.v[i] / bias2;
            values[i] -= c.learning_rate * m_hat / (maths::sqrt(v_hat) + c.epsilon);
        }
        params.bump_version();
        Ok(())
    }
}

fn powi(base: f64, exp: u64) -> f64 {
    let mut result = 1.0;
    let mut base = base;
    let mut exp = exp;
    while exp > 0 {
        if exp & 1 == 1 {
            result *= base;
        }
        base *= base;
        exp >>= 1;
    }
    result
}

/// Network dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetDims {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden_units: usize,
}

/// The competence regressor: parameters plus dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct CompetenceNet {
    dims: NetDims,
    store: ParamStore,
}

/// Intermediate activations kept for the backward pass.
struct ForwardTrace {
    embedding_mean: Vec<f64>,
    encoder_out: Vec<f64>,
    hidden_out: Vec<f64>,
    logit: f64,
    probability: f64,
}

impl CompetenceNet {
    pub fn new<R: Rng>(dims: NetDims, init_scale: f64, rng: &mut R) -> CompetenceNet {
        let mut store = ParamStore::build(&[
            ("embed", dims.vocab_size, dims.embed_dim),
            ("enc_w", dims.embed_dim, dims.embed_dim),
            ("enc_b", dims.embed_dim, 1),
            ("head_w", dims.hidden_units, dims.embed_dim),
            ("head_b", dims.hidden_units, 1),
            ("out_w", 1, dims.hidden_units),
            ("out_b", 1, 1),
        ]);
        store.init_uniform(rng, init_scale);
        CompetenceNet { dims, store }
    }

    pub fn dims(&self) -> NetDims {
        self.dims
    }

    pub fn store(&self) -> &ParamStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    pub fn version(&self) -> u64 {
        self.store.version()
    }

    pub fn snapshot(&self, episode: u64) -> Snapshot {
        self.store.snapshot(episode)
    }

    pub fn restore(&mut self, snapshot: &Snapshot) -> Result<(), NetError> {
        self.store.restore(snapshot)
    }

    /// Success probability for a tokenized goal, in (0, 1).
    pub fn forward(&self, tokens: &[u32]) -> f64 {
        forward_values(self.dims, self.store.values(), self.store.segments(), tokens).probability
    }

    /// Forward pass under a snapshot's parameters.
    pub fn forward_snapshot(&self, snapshot: &Snapshot, tokens: &[u32]) -> Result<f64, NetError> {
        if snapshot.segments != *self.store.segments() {
            return Err(NetError::ShapeMismatch(
                "snapshot does not match the network shape".into(),
            ));
        }
        Ok(forward_values(self.dims, &snapshot.values, &snapshot.segments, tokens).probability)
    }

    /// Encoder output (the goal latent).
    pub fn latent(&self, tokens: &[u32]) -> Vec<f64> {
        forward_values(self.dims, self.store.values(), self.store.segments(), tokens).encoder_out
    }

    /// One Adam step on the mean binary cross-entropy of `batch`; returns
    /// the pre-step mean loss.
    pub fn train_batch(
        &mut self,
        adam: &mut AdamState,
        batch: &[(&[u32], f64)],
    ) -> Result<f64, NetError> {
        if batch.is_empty() {
            return Err(NetError::EmptyBatch);
        }
        for (_, outcome) in batch {
            if *outcome != 0.0 && *outcome != 1.0 {
                return Err(NetError::NonBinaryOutcome(*outcome));
            }
        }
        let mut grads = vec![0.0; self.store.len()];
        let mut loss_sum = 0.0;
        let scale = 1.0 / batch.len() as f64;
        for (tokens, target) in batch {
            loss_sum += self.accumulate_gradients(tokens, *target, scale, &mut grads);
        }
        adam.step(&mut self.store, &grads)?;
        Ok(loss_sum * scale)
    }

    /// Backpropagates one example, scaling gradients by `scale`.
    /// Returns the example's BCE loss.
    fn accumulate_gradients(
        &self,
        tokens: &[u32],
        target: f64,
        scale: f64,
        grads: &mut [f64],
    ) -> f64 {
        let dims = self.dims;
        let segments = self.store.segments().to_vec();
        let trace = forward_values(dims, self.store.values(), &segments, tokens);
        // Stable BCE from the logit.
        let z = trace.logit;
        let loss = if z >= 0.0 {
            z - z * target + maths::ln(1.0 + maths::exp(-z))
        } else {
            -z * target + maths::ln(1.0 + maths::exp(z))
        };

        let seg = |name: &str| {
            let s = segments.iter().find(|s| s.name == name).unwrap();
            (s.offset, s.rows, s.cols)
        };
        let values = self.store.values();
        let d = dims.embed_dim;
        let h = dims.hidden_units;

        // d(loss)/d(logit) for sigmoid + BCE.
        let dz = (trace.probability - target) * scale;

        let (out_w_off, _, _) = seg("out_w");
        let (out_b_off, _, _) = seg("out_b");
        let (head_w_off, _, _) = seg("head_w");
        let (head_b_off, _, _) = seg("head_b");
        let (enc_w_off, _, _) = seg("enc_w");
        let (enc_b_off, _, _) = seg("enc_b");
        let (embed_off, _, _) = seg("embed");

        grads[out_b_off] += dz;
        let mut d_pre_hidden = vec![0.0; h];
        for j in 0..h {
            grads[out_w_off + j] += dz * trace.hidden_out[j];
            let dh = dz * values[out_w_off + j];
            d_pre_hidden[j] = dh * (1.0 - trace.hidden_out[j] * trace.hidden_out[j]);
        }
        let mut d_encoder = vec![0.0; d];
        for j in 0..h {
            let dp = d_pre_hidden[j];
            if dp == 0.0 {
                continue;
            }
            grads[head_b_off + j] += dp;
            let row = head_w_off + j * d;
            for i in 0..d {
                grads[row + i] += dp * trace.encoder_out[i];
                d_encoder[i] += dp * values[row + i];
            }
        }
        let mut d_embedding_mean = vec![0.0; d];
        for i in 0..d {
            let dp = d_encoder[i] * (1.0 - trace.encoder_out[i] * trace.encoder_out[i]);
            grads[enc_b_off + i] += dp;
            let row = enc_w_off + i * d;
            for k in 0..d {
                grads[row + k] += dp * trace.embedding_mean[k];
                d_embedding_mean[k] += dp * values[row + k];
            }
        }
        let token_scale = 1.0 / tokens.len() as f64;
        for &token in tokens {
            let row = embed_off + token as usize * d;
            for k in 0..d {
                grads[row + k] += d_embedding_mean[k] * token_scale;
            }
        }
        loss
    }
}

fn forward_values(
    dims: NetDims,
    values: &[f64],
    segments: &[Segment],
    tokens: &[u32],
) -> ForwardTrace {
    debug_assert!(!tokens.is_empty(), "tokenizer yields at least UNK");
    let seg = |name: &str| segments.iter().find(|s| s.name == name).unwrap().offset;
    let d = dims.embed_dim;
    let h = dims.hidden_units;
    let embed = seg("embed");
    let enc_w = seg("enc_w");
    let enc_b = seg("enc_b");
    let head_w = seg("head_w");
    let head_b = seg("head_b");
    let out_w = seg("out_w");
    let out_b = seg("out_b");

    let mut embedding_mean = vec![0.0; d];
    for &token in tokens {
        let row = embed + token as usize * d;
        for k in 0..d {
            embedding_mean[k] += values[row + k];
        }
    }
    let inv = 1.0 / tokens.len() as f64;
    for value in &mut embedding_mean {
        *value *= inv;
    }

    let mut encoder_out = vec![0.0; d];
    for i in 0..d {
        let row = enc_w + i * d;
        let mut acc = values[enc_b + i];
        for k in 0..d {
            acc += values[row + k] * embedding_mean[k];
        }
        encoder_out[i] = maths::tanh(acc);
    }

    let mut hidden_out = vec![0.0; h];
    for j in 0..h {
        let row = head_w + j * d;
        let mut acc = values[head_b + j];
        for i in 0..d {
            acc += values[row + i] * encoder_out[i];
        }
        hidden_out[j] = maths::tanh(acc);
    }

    let mut logit = values[out_b];
    for j in 0..h {
        logit += values[out_w + j] * hidden_out[j];
    }
    ForwardTrace {
        embedding_mean,
        encoder_out,
        hidden_out,
        logit,
        probability: maths::sigmoid(logit),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngs::{stream_rng, Stream};

    fn small_net(seed: u64) -> CompetenceNet {
        let dims = NetDims {
            vocab_size: 7,
            embed_dim: 5,
            hidden_units: 6,
        };
        CompetenceNet::new(dims, 0.05, &mut stream_rng(seed, Stream::Estimator))
    }

    #[test]
    fn tokenize_lowercases_and_splits_on_punctuation() {
        assert_eq!(
            tokenize("Goal: Grow lion\nYou see: water, carrot seed"),
            ["goal", "grow", "lion", "you", "see", "water", "carrot", "seed"]
        );
        assert!(tokenize("  ,.:!  ").is_empty());
    }

    #[test]
    fn unknown_tokens_map_to_unk() {
        let tokenizer = Tokenizer::build(["grow lion", "grasp bed"]);
        assert_eq!(tokenizer.encode(""), [UNK_TOKEN]);
        let ids = tokenizer.encode("grow dragon");
        assert_ne!(ids[0], UNK_TOKEN);
        assert_eq!(ids[1], UNK_TOKEN);
    }

    #[test]
    fn zero_head_outputs_exactly_one_half() {
        let mut net = small_net(3);
        for name in ["head_w", "head_b", "out_w", "out_b"] {
            net.store_mut().seg_mut(name).fill(0.0);
        }
        assert_eq!(net.forward(&[1, 2, 3]), 0.5);
        assert_eq!(net.forward(&[4]), 0.5);
    }

    #[test]
    fn forward_is_pure_and_order_invariant() {
        let net = small_net(4);
        let a = net.forward(&[1, 2, 5]);
        assert_eq!(a, net.forward(&[1, 2, 5]));
        // Mean pooling ignores token order.
        assert_eq!(a, net.forward(&[5, 1, 2]));
    }

    #[test]
    fn overfits_a_constant_positive_batch() {
        let mut net = small_net(5);
        let mut adam = AdamState::new(
            AdamConfig {
                learning_rate: 0.05,
                ..AdamConfig::default()
            },
            net.store().len(),
        );
        let tokens: &[u32] = &[1, 2, 3];
        for _ in 0..400 {
            net.train_batch(&mut adam, &[(tokens, 1.0)]).unwrap();
        }
        assert!((net.forward(tokens) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn balanced_batch_converges_to_one_half() {
        let mut net = small_net(6);
        let mut adam = AdamState::new(
            AdamConfig {
                learning_rate: 0.05,
                ..AdamConfig::default()
            },
            net.store().len(),
        );
        let tokens: &[u32] = &[2, 4];
        for _ in 0..600 {
            net.train_batch(&mut adam, &[(tokens, 0.0), (tokens, 1.0)])
                .unwrap();
        }
        assert!((net.forward(tokens) - 0.5).abs() < 1e-2);
    }

    #[test]
    fn non_binary_outcomes_are_rejected() {
        let mut net = small_net(7);
        let mut adam = AdamState::new(AdamConfig::default(), net.store().len());
        let result = net.train_batch(&mut adam, &[(&[1][..], 0.25)]);
        assert_eq!(result, Err(NetError::NonBinaryOutcome(0.25)));
        assert_eq!(
            net.train_batch(&mut adam, &[]),
            Err(NetError::EmptyBatch)
        );
    }

    #[test]
    fn snapshot_restore_is_bit_exact() {
        let mut net = small_net(8);
        let mut adam = AdamState::new(AdamConfig::default(), net.store().len());
        let tokens: &[u32] = &[1, 3];
        let before = net.forward(tokens);
        let snapshot = net.snapshot(0);
        for _ in 0..10 {
            net.train_batch(&mut adam, &[(tokens, 1.0)]).unwrap();
        }
        assert_ne!(net.forward(tokens), before);
        net.restore(&snapshot).unwrap();
        assert_eq!(net.forward(tokens).to_bits(), before.to_bits());
        // Snapshot of a snapshot carries identical values.
        assert_eq!(net.snapshot(0).values, snapshot.values);
    }

    #[test]
    fn restoring_mismatched_shapes_fails() {
        let mut net = small_net(9);
        let other = CompetenceNet::new(
            NetDims {
                vocab_size: 7,
                embed_dim: 4,
                hidden_units: 6,
            },
            0.05,
            &mut stream_rng(9, Stream::Estimator),
        );
        assert!(matches!(
            net.restore(&other.snapshot(0)),
            Err(NetError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn zero_learning_rate_leaves_outputs_unchanged() {
        let mut net = small_net(10);
        let mut adam = AdamState::new(
            AdamConfig {
                learning_rate: 0.0,
                ..AdamConfig::default()
            },
            net.store().len(),
        );
        let tokens: &[u32] = &[1, 2];
        let before = net.forward(tokens);
        net.train_batch(&mut adam, &[(tokens, 1.0)]).unwrap();
        assert_eq!(net.forward(tokens), before);
        assert_eq!(net.version(), 1, "version still advances");
    }

    #[test]
    fn seeded_init_gives_a_near_uninformed_prior() {
        for seed in 0..20 {
            let net = small_net(seed);
            for tokens in [&[1u32, 2][..], &[3, 4, 5], &[6]] {
                let p = net.forward(tokens);
                assert!((0.4..0.6).contains(&p), "seed {seed}: {p}");
            }
        }
    }

    /// Central finite differences as the gradient oracle.
    fn numeric_gradients(net: &CompetenceNet, tokens: &[u32], target: f64) -> Vec<f64> {
        let h = 1e-5;
        let mut grads = vec![0.0; net.store().len()];
        let mut probe = net.clone();
        for i in 0..grads.len() {
            let original = probe.store().values()[i];
            probe.store_mut().values_mut()[i] = original + h;
            let plus = bce(probe.forward(tokens), target);
            probe.store_mut().values_mut()[i] = original - h;
            let minus = bce(probe.forward(tokens), target);
            probe.store_mut().values_mut()[i] = original;
            grads[i] = (plus - minus) / (2.0 * h);
        }
        grads
    }

    fn bce(p: f64, y: f64) -> f64 {
        -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        for seed in 0..5 {
            let net = small_net(100 + seed);
            let tokens: Vec<u32> = vec![(seed % 7) as u32, ((seed + 3) % 7) as u32, 1];
            let target = f64::from((seed % 2) as u32);
            let mut analytic = vec![0.0; net.store().len()];
            net.accumulate_gradients(&tokens, target, 1.0, &mut analytic);
            let numeric = numeric_gradients(&net, &tokens, target);
            for (i, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
                let denom = a.abs().max(n.abs()).max(1e-6);
                assert!(
                    ((a - n) / denom).abs() < 1e-4,
                    "seed {seed} param {i}: analytic {a} vs numeric {n}"
                );
            }
        }
    }

    #[test]
    fn parameters_stay_finite_under_long_training() {
        let mut net = small_net(11);
        let mut adam = AdamState::new(
            AdamConfig {
                learning_rate: 0.01,
                ..AdamConfig::default()
            },
            net.store().len(),
        );
        let batches: [(&[u32], f64); 2] = [(&[1, 2], 1.0), (&[3], 0.0)];
        for step in 0..100_000 {
            net.train_batch(&mut adam, &[batches[step % 2]]).unwrap();
        }
        assert!(net.store().values().iter().all(|v| v.is_finite()));
    }
}
