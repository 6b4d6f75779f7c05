//! Hashed-feature logistic regression that scores conversation coherence.
//!
//! [`featurize`] turns a conversation into sparse bucket counts taken from
//! its graphs (concepts, parent/child concept pairs, role bigrams, predicate
//! argument frames, argument kinds, depth and sentence-count buckets,
//! negation and question markers, features across utterance boundaries) and
//! from surface text when present. Feature names
//! are hashed with FNV-1a into `2^bits` buckets.
//!
//! [`train`] fits a [`LinearModel`] by SGD on the L2-regularized logistic
//! loss, and [`LinearModel::score`] returns the probability of the coherent
//! class.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::amr::{self, is_predicate, AmrGraph, PronounInventory, AMR_UNKNOWN};
use crate::dialogue::{Conversation, Label};
use crate::rng::{fnv1a64, SplitMix64};

pub const DEFAULT_BITS: u32 = 18;
const MAGIC: &[u8; 7] = b"DEAMLM1";

#[derive(Debug, thiserror::Error)]
pub enum ProxyError {
    #[error("training data needs both coherent and incoherent examples")]
    SingleClass,
    #[error("training data is empty")]
    Empty,
    #[error("conversation `{0}` has no label")]
    Unlabeled(String),
    #[error("feature dimension {got} does not match the model's {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("bucket bits must be in 1..=30, got {0}")]
    Bits(u32),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a model file: {0}")]
    Format(String),
}

/// Sparse bucket counts over `dim` buckets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    dim: usize,
    counts: BTreeMap<usize, u32>,
}

impl FeatureVector {
    pub fn new(dim: usize) -> Self {
        FeatureVector { dim, counts: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of nonzero buckets.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn get(&self, bucket: usize) -> u32 {
        self.counts.get(&bucket).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.counts.iter().map(|(&i, &c)| (i, c))
    }

    /// Hashes `feature` into its bucket and counts it.
    pub fn add(&mut self, feature: &str) {
        let bucket = (fnv1a64(feature.as_bytes()) & (self.dim as u64 - 1)) as usize;
        *self.counts.entry(bucket).or_insert(0) += 1;
    }

    /// Counts scaled to unit Euclidean length.
    pub fn normalized(&self) -> Vec<(usize, f64)> {
        let norm = self.counts.values().map(|&c| f64::from(c).powi(2)).sum::<f64>().sqrt();
        self.iter().map(|(i, c)| (i, f64::from(c) / norm)).collect()
    }
}

fn depth_bucket(depth: usize) -> usize {
    depth.min(8)
}

fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric() && c != '\'').filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

/// Coarse class of a concept.
fn kind(concept: &str, pronouns: &PronounInventory) -> &'static str {
    if is_predicate(concept) {
        "pred"
    } else if pronouns.contains(concept) {
        "pron"
    } else if concept == AMR_UNKNOWN {
        "unk"
    } else {
        "other"
    }
}

fn graph_features(graph: &AmrGraph, pronouns: &PronounInventory, out: &mut FeatureVector) {
    let concept = |v: &str| graph.concept(v).unwrap_or_default();
    for n in graph.nodes() {
        out.add(&format!("c:{}", n.concept));
        if is_predicate(&n.concept) {
            // argument frame, e.g. `frame::ARG0:ARG1`
            let mut roles: Vec<&str> = graph
                .outgoing(&n.variable)
                .map(|e| e.role.as_str())
                .filter(|r| amr::role_in_family(r, ":ARG"))
                .collect();
            roles.sort_unstable();
            out.add(&format!("frame:{}", roles.concat()));
        }
    }
    for e in graph.edges() {
        let (source, target) = (concept(&e.source), concept(&e.target));
        out.add(&format!("r:{}", e.role));
        out.add(&format!("cc:{source}>{target}"));
        out.add(&format!("cr:{source}{}", e.role));
        out.add(&format!("ak:{}{}{}", kind(source, pronouns), e.role, kind(target, pronouns)));
    }
    for pair in graph.edges().windows(2) {
        out.add(&format!("rr:{}|{}", pair[0].role, pair[1].role));
    }
    for a in graph.attributes() {
        if a.role == amr::POLARITY {
            out.add("neg");
            out.add(&format!("neg:{}", concept(&a.source)));
        }
    }
    if graph.nodes().iter().any(|n| n.concept == AMR_UNKNOWN) {
        out.add("q");
    }
    out.add(&format!("d:{}", depth_bucket(amr::depth(graph))));
    out.add(&format!("snt:{}", amr::sentence_units(graph).len().min(8)));
}

/// Features of a whole conversation into `2^bits` buckets.
pub fn featurize_with(conv: &Conversation, bits: u32) -> FeatureVector {
    let mut out = FeatureVector::new(1 << bits);
    let n = conv.utterances.len();
    out.add(&format!("len:{}", n.min(32)));
    let mut said: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut asserted: BTreeSet<&str> = BTreeSet::new();
    let mut negated: BTreeSet<&str> = BTreeSet::new();
    let pronouns = PronounInventory::default();
    let mut pronouns_used: BTreeSet<&str> = BTreeSet::new();
    for (i, u) in conv.utterances.iter().enumerate() {
        let graph = &u.amr;
        graph_features(graph, &pronouns, &mut out);
        pronouns_used.extend(graph.nodes().iter().map(|n| n.concept.as_str()).filter(|c| pronouns.contains(c)));
        if i == 0 {
            out.add(&format!("first:{}", graph.root_concept()));
            if graph.nodes().iter().any(|n| n.concept == AMR_UNKNOWN) {
                out.add("opens-with-question");
            }
        }
        if i + 1 == n {
            out.add(&format!("last:{}", graph.root_concept()));
        }
        let concepts: BTreeSet<&str> = graph.nodes().iter().map(|n| n.concept.as_str()).collect();
        // repeated predicates by the same speaker
        let own = said.entry(u.speaker.as_str()).or_default();
        for c in concepts.iter().filter(|c| is_predicate(c)) {
            if own.contains(c) {
                out.add("repeat");
                out.add(&format!("repeat:{c}"));
            }
        }
        own.extend(concepts.iter().copied());
        for node in graph.nodes() {
            if graph.is_negated(&node.variable) {
                negated.insert(&node.concept);
            } else {
                asserted.insert(&node.concept);
            }
        }
        if let Some(text) = &u.text {
            let toks = tokens(text);
            for t in &toks {
                out.add(&format!("t:{t}"));
            }
            for w in toks.windows(2) {
                out.add(&format!("tt:{} {}", w[0], w[1]));
            }
        }
        if i > 0 {
            let prev = &conv.utterances[i - 1];
            let pg = &prev.amr;
            out.add(&format!("x:{}>{}", pg.root_concept(), graph.root_concept()));
            let last_role = pg.edges().last().map_or("-", |e| e.role.as_str());
            let first_role = graph.edges().first().map_or("-", |e| e.role.as_str());
            out.add(&format!("xr:{last_role}|{first_role}"));
            out.add(if prev.speaker == u.speaker { "xs:same" } else { "xs:diff" });
            let before: BTreeSet<&str> = pg.nodes().iter().map(|n| n.concept.as_str()).collect();
            out.add(&format!("xshare:{}", before.intersection(&concepts).count().min(6)));
            out.add(&format!("xd:{}>{}", depth_bucket(amr::depth(pg)), depth_bucket(amr::depth(graph))));
            if let (Some(a), Some(b)) = (&prev.text, &u.text) {
                let (a, b) = (tokens(a), tokens(b));
                if let (Some(x), Some(y)) = (a.last(), b.first()) {
                    out.add(&format!("tx:{x}|{y}"));
                }
            }
        }
    }
    out.add(&format!("pronouns:{}", pronouns_used.len()));
    for c in asserted.intersection(&negated) {
        out.add("flip");
        out.add(&format!("flip:{c}"));
    }
    out
}

/// [`featurize_with`] at the default `2^18` buckets.
pub fn featurize(conv: &Conversation) -> FeatureVector {
    featurize_with(conv, DEFAULT_BITS)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyper {
    pub bits: u32,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper { bits: DEFAULT_BITS, epochs: 50, learning_rate: 1.0, l2: 1e-6, seed: 0 }
    }
}

/// One training or evaluation instance: normalized features and label
/// (`1.0` coherent, `0.0` incoherent).
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: Vec<(usize, f64)>,
    pub target: f64,
}

impl Example {
    pub fn new(features: &FeatureVector, coherent: bool) -> Self {
        Example { features: features.normalized(), target: if coherent { 1.0 } else { 0.0 } }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Training settings; absent for models read from disk.
    pub meta: Option<Hyper>,
}

impl LinearModel {
    pub fn zeros(dim: usize) -> Self {
        LinearModel { weights: vec![0.0; dim], bias: 0.0, meta: None }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn bits(&self) -> u32 {
        self.dim().trailing_zeros()
    }

    pub fn margin(&self, features: &[(usize, f64)]) -> f64 {
        self.bias + features.iter().map(|&(i, x)| self.weights[i] * x).sum::<f64>()
    }

    /// Probability of the coherent class, strictly inside (0, 1) for
    /// moderate margins.
    pub fn score_features(&self, features: &FeatureVector) -> f64 {
        sigmoid(self.margin(&features.normalized()))
    }

    pub fn score(&self, conv: &Conversation) -> f64 {
        self.score_features(&featurize_with(conv, self.bits()))
    }

    /// Mean logistic loss plus `l2 / 2 * |w|^2`, with its gradient in the
    /// weights and the bias.
    pub fn loss_and_gradient(&self, examples: &[Example], l2: f64) -> (f64, Vec<f64>, f64) {
        let n = examples.len().max(1) as f64;
        let mut loss = 0.0;
        let mut grad: Vec<f64> = self.weights.iter().map(|w| l2 * w).collect();
        let mut grad_bias = 0.0;
        for ex in examples {
            let z = self.margin(&ex.features);
            loss += softplus(z) - ex.target * z;
            let g = (sigmoid(z) - ex.target) / n;
            for &(i, x) in &ex.features {
                grad[i] += g * x;
            }
            grad_bias += g;
        }
        let penalty = 0.5 * l2 * self.weights.iter().map(|w| w * w).sum::<f64>();
        (loss / n + penalty, grad, grad_bias)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.dim() as u64).to_le_bytes())?;
        w.write_all(&self.bias.to_le_bytes())?;
        for x in &self.weights {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(MAGIC.len() + 16 + 8 * self.dim());
        self.write_to(&mut out).expect("writing to a Vec");
        out
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, ProxyError> {
        let mut magic = [0u8; 7];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(ProxyError::Format("bad magic bytes".into()));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let dim = u64::from_le_bytes(word);
        if !dim.is_power_of_two() || dim > 1 << 30 {
            return Err(ProxyError::Format(format!("dimension {dim} is not a power of two up to 2^30")));
        }
        r.read_exact(&mut word)?;
        let bias = f64::from_le_bytes(word);
        let mut weights = Vec::with_capacity(dim as usize);
        for _ in 0..dim {
            r.read_exact(&mut word)?;
            weights.push(f64::from_le_bytes(word));
        }
        if r.read(&mut word)? != 0 {
            return Err(ProxyError::Format("trailing bytes".into()));
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(ProxyError::Format("non-finite parameter".into()));
        }
        Ok(LinearModel { weights, bias, meta: None })
    }
}

/// Fits a model to featurized examples by plain SGD, visiting examples in a
/// seeded random order each epoch.
pub fn train_examples(examples: &[Example], dim: usize, hyper: &Hyper) -> Result<LinearModel, ProxyError> {
    if examples.is_empty() {
        return Err(ProxyError::Empty);
    }
    let positives = examples.iter().filter(|e| e.target > 0.5).count();
    if positives == 0 || positives == examples.len() {
        return Err(ProxyError::SingleClass);
    }
    if let Some(&(i, _)) = examples.iter().flat_map(|e| e.features.iter()).find(|(i, _)| *i >= dim) {
        return Err(ProxyError::Dimension { expected: dim, got: i + 1 });
    }
    // w = scale * v makes the L2 shrink O(1) per step.
    let mut v = vec![0.0; dim];
    let mut scale = 1.0;
    let mut bias = 0.0;
    let mut rng = SplitMix64::new(hyper.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut t = 0usize;
    for _ in 0..hyper.epochs {
        rng.shuffle(&mut order);
        for &k in &order {
            let ex = &examples[k];
            let lr = hyper.learning_rate / (1.0 + hyper.learning_rate * hyper.l2 * t as f64);
            let z = bias + scale * ex.features.iter().map(|&(i, x)| v[i] * x).sum::<f64>();
            let g = sigmoid(z) - ex.target;
            scale *= 1.0 - lr * hyper.l2;
            for &(i, x) in &ex.features {
                v[i] -= lr * g * x / scale;
            }
            bias -= lr * g;
            if scale < 1e-9 {
                v.iter_mut().for_each(|x| *x *= scale);
                scale = 1.0;
            }
            t += 1;
        }
    }
    Ok(LinearModel { weights: v.into_iter().map(|x| x * scale).collect(), bias, meta: Some(*hyper) })
}

/// Featurizes labelled conversations and trains on them.
pub fn train(conversations: &[Conversation], hyper: &Hyper) -> Result<LinearModel, ProxyError> {
    if !(1..=30).contains(&hyper.bits) {
        return Err(ProxyError::Bits(hyper.bits));
    }
    let examples = conversations
        .iter()
        .map(|c| match c.label {
            Some(label) => Ok(Example::new(&featurize_with(c, hyper.bits), label == Label::Coherent)),
            None => Err(ProxyError::Unlabeled(c.id.clone())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    train_examples(&examples, 1 << hyper.bits, hyper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amr::parse;
    use crate::dialogue::Utterance;
    use crate::fixtures;

    fn single(concept: &str) -> Conversation {
        Conversation::new("c", vec![Utterance::new("A", parse(&format!("(x / {concept})")).unwrap())])
    }

    #[test]
    fn featurize_is_deterministic_and_nonempty() {
        let c = fixtures::sesame_street();
        assert_eq!(featurize(&c), featurize(&c));
        let f = featurize(&single("i"));
        assert!(!f.is_empty());
        assert!(f.iter().all(|(i, n)| i < f.dim() && n >= 1));
    }

    #[test]
    fn order_matters() {
        let c = fixtures::sesame_street();
        let mut swapped = c.clone();
        swapped.utterances.swap(0, 1);
        assert_ne!(featurize(&c), featurize(&swapped));
    }

    #[test]
    fn zero_model_scores_half() {
        let m = LinearModel::zeros(1 << 10);
        assert_eq!(m.score(&fixtures::sesame_street()), 0.5);
    }

    fn separable(dim: usize) -> Vec<Example> {
        // positives live on even buckets, negatives on odd ones
        (0..20)
            .map(|k| {
                let parity = k % 2;
                let features: Vec<(usize, f64)> =
                    (0..3).map(|j| ((k * 6 + j * 2 + parity) % dim, 1.0 / 3f64.sqrt())).collect();
                Example { features, target: if parity == 0 { 1.0 } else { 0.0 } }
            })
            .collect()
    }

    #[test]
    fn separable_fixture_is_learned() {
        let dim = 1 << 8;
        let hyper = Hyper { epochs: 50, ..Hyper::default() };
        let data = separable(dim);
        let model = train_examples(&data, dim, &hyper).unwrap();
        for ex in &data {
            let p = sigmoid(model.margin(&ex.features));
            assert_eq!(p > 0.5, ex.target > 0.5);
        }
        assert_eq!(model, train_examples(&data, dim, &hyper).unwrap());
    }

    #[test]
    fn single_class_is_rejected() {
        let data: Vec<Example> = separable(64).into_iter().filter(|e| e.target > 0.5).collect();
        assert!(matches!(train_examples(&data, 64, &Hyper::default()), Err(ProxyError::SingleClass)));
        assert!(matches!(train_examples(&[], 64, &Hyper::default()), Err(ProxyError::Empty)));
        assert!(matches!(train(&[single("a")], &Hyper::default()), Err(ProxyError::Unlabeled(_))));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let dim = 16;
        let mut rng = SplitMix64::new(4);
        let data: Vec<Example> = (0..6)
            .map(|_| Example {
                features: rng.sample_indices(dim, 4).into_iter().map(|i| (i, rng.next_f64() - 0.5)).collect(),
                target: if rng.bernoulli(0.5) { 1.0 } else { 0.0 },
            })
            .collect();
        let mut model = LinearModel::zeros(dim);
        model.weights.iter_mut().for_each(|w| *w = 2.0 * rng.next_f64() - 1.0);
        model.bias = 0.3;
        let l2 = 0.01;
        let (_, grad, grad_bias) = model.loss_and_gradient(&data, l2);
        let h = 1e-6;
        for (i, &g) in grad.iter().enumerate() {
            let mut plus = model.clone();
            plus.weights[i] += h;
            let mut minus = model.clone();
            minus.weights[i] -= h;
            let numeric = (plus.loss_and_gradient(&data, l2).0 - minus.loss_and_gradient(&data, l2).0) / (2.0 * h);
            assert!((numeric - g).abs() <= 1e-6 * numeric.abs().max(g.abs()).max(1e-3));
        }
        let mut plus = model.clone();
        plus.bias += h;
        let mut minus = model.clone();
        minus.bias -= h;
        let numeric = (plus.loss_and_gradient(&data, l2).0 - minus.loss_and_gradient(&data, l2).0) / (2.0 * h);
        assert!((numeric - grad_bias).abs() <= 1e-6 * numeric.abs().max(1e-3));
    }

    #[test]
    fn persistence_round_trip() {
        let mut m = LinearModel::zeros(8);
        m.bias = -0.25;
        m.weights[3] = 1.5;
        let bytes = m.to_bytes();
        assert_eq!(&bytes[..7], b"DEAMLM1");
        assert_eq!(bytes.len(), 7 + 8 + 8 + 64);
        assert_eq!(LinearModel::read_from(bytes.as_slice()).unwrap(), m);
        assert!(LinearModel::read_from(&bytes[..20]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(LinearModel::read_from(extra.as_slice()).is_err());
        assert!(LinearModel::read_from(&b"NOTMODEL........"[..]).is_err());
    }
}
