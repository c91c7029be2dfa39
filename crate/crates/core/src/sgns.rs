//! Skip-gram with negative sampling.
//!
//! For a center word `c` with input vector `v_c` and a context word `o`, the
//! loss of one pair is
//!
//! ```text
//! ℓ = −log σ(u_o·v_c) − Σ_j log σ(−u_{n_j}·v_c)
//! ```
//!
//! where `u` are output vectors and the `n_j` are drawn from the unigram
//! distribution raised to the power 3/4. Training is plain SGD with a
//! learning rate decaying linearly to zero, single-threaded and fully
//! determined by the seed.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

const NEGATIVE_POWER: f64 = 0.75;

/// Retained words, ordered by descending count then ascending word.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocab {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    /// Cumulative negative-sampling distribution, ending at 1.
    cumulative: Vec<f64>,
}

impl Vocab {
    pub fn from_counts(counts: &BTreeMap<String, u64>, min_count: u64) -> Result<Self> {
        if min_count < 1 {
            return Err(Error::validation("min_count must be >= 1"));
        }
        let mut entries: Vec<(&String, u64)> =
            counts.iter().filter(|(_, &c)| c >= min_count).map(|(w, &c)| (w, c)).collect();
        if entries.is_empty() {
            return Err(Error::validation(format!("no word occurs at least {min_count} times")));
        }
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

        let words: Vec<String> = entries.iter().map(|(w, _)| (*w).clone()).collect();
        let counts: Vec<u64> = entries.iter().map(|(_, c)| *c).collect();
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let mass: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(NEGATIVE_POWER)).collect();
        let total: f64 = mass.iter().sum();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = mass
            .iter()
            .map(|m| {
                acc += m;
                acc / total
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Vocab { words, counts, index, cumulative })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Probability of drawing each word as a negative.
    pub fn negative_probabilities(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cumulative
            .iter()
            .map(|&c| {
                let p = c - prev;
                prev = c;
                p
            })
            .collect()
    }

    pub fn sample_negative(&self, rng: &mut SplitMix64) -> usize {
        let u = rng.next_f64();
        self.cumulative.partition_point(|&c| c <= u).min(self.len() - 1)
    }

    /// Sentences as word ids, dropping out-of-vocabulary tokens.
    pub fn encode_sentences<S: AsRef<str>>(&self, sentences: &[Vec<S>]) -> Vec<Vec<usize>> {
        sentences.iter().map(|s| s.iter().filter_map(|w| self.id(w.as_ref())).collect()).collect()
    }
}

/// Counts words in `sentences` and keeps those seen at least `min_count` times.
pub fn build_vocab<S: AsRef<str>>(sentences: &[Vec<S>], min_count: u64) -> Result<Vocab> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for w in sentences.iter().flatten() {
        *counts.entry(w.as_ref().to_owned()).or_insert(0) += 1;
    }
    Vocab::from_counts(&counts, min_count)
}

/// Word-to-vector map: the learned encoding.
#[derive(Clone, Debug, PartialEq)]
pub struct WordVectors {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl WordVectors {
    pub fn new(dim: usize, words: Vec<String>, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("vector dimension must be >= 1"));
        }
        if data.len() != dim * words.len() {
            return Err(Error::validation("vector data does not match vocabulary size"));
        }
        let index: HashMap<String, usize> = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        if index.len() != words.len() {
            return Err(Error::validation("duplicate word in vector table"));
        }
        Ok(WordVectors { dim, words, index, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.vector(i))
    }

    /// The word's vector, or zeros for unknown words.
    pub fn encode(&self, word: &str) -> Vec<f64> {
        self.get(word).map_or_else(|| vec![0.0; self.dim], <[f64]>::to_vec)
    }

    /// Text format: a `<count> <dim>` header, then `<word> <f1> ... <fD>`
    /// per line with 17 significant digits.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim)?;
        for (i, w) in self.words.iter().enumerate() {
            let mut line = w.clone();
            for x in self.vector(i) {
                line.push(' ');
                line.push_str(&format!("{x:.16e}"));
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        out.flush()
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::Parse { path: "<vectors>".into(), line, msg };
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| bad(1, "empty vector file".into()))?.map_err(|e| Error::io("<vectors>", e))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(1, format!("bad header: {e}")))?;
        let [count, dim] = dims[..] else { return Err(bad(1, "header must be '<count> <dim>'".into())) };
        let mut words = Vec::with_capacity(count);
        let mut data = Vec::with_capacity(count * dim);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io("<vectors>", e))?;
            let mut tokens = line.split(' ');
            let word = tokens.next().filter(|w| !w.is_empty()).ok_or_else(|| bad(i + 2, "missing word".into()))?;
            let values: Vec<f64> = tokens
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(i + 2, format!("bad number: {e}")))?;
            if values.len() != dim {
                return Err(bad(i + 2, format!("expected {dim} values, got {}", values.len())));
            }
            words.push(word.to_owned());
            data.extend(values);
        }
        if words.len() != count {
            return Err(bad(1, format!("header announces {count} words, file has {}", words.len())));
        }
        WordVectors::new(dim, words, data)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub dim: usize,
    pub window: usize,
    pub lr0: f64,
    pub epochs: usize,
    pub negatives: usize,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams { dim: 2, window: 5, lr0: 0.01, epochs: 1000, negatives: 5, seed: 0 }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.dim >= 1, "dimension D must be >= 1"),
            (self.window >= 1, "window w must be >= 1"),
            (self.epochs >= 1, "epochs must be >= 1"),
            (self.negatives >= 1, "negatives k must be >= 1"),
            (self.lr0 > 0.0 && self.lr0.is_finite(), "learning rate must be positive"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::validation(*msg)),
            None => Ok(()),
        }
    }
}

/// 1000 epochs below a million tokens, 5 above.
pub fn default_epochs(token_count: usize) -> usize {
    if token_count < 1_000_000 {
        1000
    } else {
        5
    }
}

/// Trained input and output vectors with the hyperparameters used.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    pub params: TrainParams,
    pub input: WordVectors,
    pub output: Vec<f64>,
}

impl EmbeddingModel {
    pub fn encode(&self, word: &str) -> Vec<f64> {
        self.input.encode(word)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainStats {
    /// Mean pair loss of each epoch.
    pub epoch_loss: Vec<f64>,
    pub pairs: u64,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log σ(x)` without overflow.
pub fn log_sigmoid(x: f64) -> f64 {
    x.min(0.0) - (-x.abs()).exp().ln_1p()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Logistic gradient factor `σ(u·v) − y` and the loss term of one target.
#[inline]
fn logistic_term(u: &[f64], v: &[f64], positive: bool) -> (f64, f64) {
    let score = dot(u, v);
    if positive {
        (sigmoid(score) - 1.0, -log_sigmoid(score))
    } else {
        (sigmoid(score), -log_sigmoid(-score))
    }
}

/// Loss of one (center, context, negatives) example.
pub fn pair_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    logistic_term(context, center, true).1 + negatives.iter().map(|n| logistic_term(n, center, false).1).sum::<f64>()
}

/// Analytic gradients of [`pair_loss`] with respect to the center input
/// vector and to every output vector (context first, then negatives).
pub fn pair_gradients(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut grad_center = vec![0.0; center.len()];
    let mut grad_outputs = Vec::with_capacity(1 + negatives.len());
    for (u, positive) in std::iter::once((context, true)).chain(negatives.iter().map(|n| (*n, false))) {
        let (g, _) = logistic_term(u, center, positive);
        for (gc, x) in grad_center.iter_mut().zip(u) {
            *gc += g * x;
        }
        grad_outputs.push(center.iter().map(|x| g * x).collect());
    }
    (grad_center, grad_outputs)
}

struct Trainer<'a> {
    vocab: &'a Vocab,
    dim: usize,
    negatives: usize,
    input: Vec<f64>,
    output: Vec<f64>,
    scratch: Vec<f64>,
    rng: SplitMix64,
}

impl Trainer<'_> {
    /// One SGD step on (center, context) plus sampled negatives; returns the
    /// pair loss before the update.
    fn step(&mut self, center: usize, context: usize, lr: f64) -> f64 {
        let d = self.dim;
        self.scratch.iter_mut().for_each(|x| *x = 0.0);
        let mut loss = 0.0;
        let can_sample = self.vocab.len() > 1;
        for k in 0..=self.negatives {
            let (target, positive) = if k == 0 {
                (context, true)
            } else if can_sample {
                let mut n = self.vocab.sample_negative(&mut self.rng);
                while n == context {
                    n = self.vocab.sample_negative(&mut self.rng);
                }
                (n, false)
            } else {
                break;
            };
            let v = &self.input[center * d..(center + 1) * d];
            let u = &mut self.output[target * d..(target + 1) * d];
            let (g, l) = logistic_term(u, v, positive);
            loss += l;
            for i in 0..d {
                self.scratch[i] += g * u[i];
                u[i] -= lr * g * v[i];
            }
        }
        let v = &mut self.input[center * d..(center + 1) * d];
        for i in 0..d {
            v[i] -= lr * self.scratch[i];
        }
        loss
    }
}

/// Trains SGNS vectors on `sentences`. Unknown tokens are skipped.
pub fn train<S: AsRef<str>>(
    sentences: &[Vec<S>],
    vocab: &Vocab,
    params: &TrainParams,
) -> Result<(EmbeddingModel, TrainStats)> {
    params.validate()?;
    let d = params.dim;
    let mut rng = SplitMix64::new(params.seed);
    let half = 0.5 / d as f64;
    let input: Vec<f64> = (0..vocab.len() * d).map(|_| rng.uniform(-half, half)).collect();
    let mut t = Trainer {
        vocab,
        dim: d,
        negatives: params.negatives,
        input,
        output: vec![0.0; vocab.len() * d],
        scratch: vec![0.0; d],
        rng,
    };

    let ids = vocab.encode_sentences(sentences);
    let positions: usize = ids.iter().map(Vec::len).sum();
    let total = (params.epochs * positions) as f64;
    let mut processed = 0usize;
    let mut stats = TrainStats::default();
    for _ in 0..params.epochs {
        let (mut loss, mut pairs) = (0.0, 0u64);
        for sentence in &ids {
            for (i, &center) in sentence.iter().enumerate() {
                let lr = params.lr0 * (1.0 - processed as f64 / total);
                let reach = 1 + t.rng.below(params.window);
                let lo = i.saturating_sub(reach);
                let hi = (i + reach).min(sentence.len() - 1);
                for (j, &context) in sentence.iter().enumerate().take(hi + 1).skip(lo) {
                    if j != i {
                        loss += t.step(center, context, lr);
                        pairs += 1;
                    }
                }
                processed += 1;
            }
        }
        stats.epoch_loss.push(if pairs > 0 { loss / pairs as f64 } else { 0.0 });
        stats.pairs += pairs;
    }

    let input = WordVectors::new(d, vocab.words().to_vec(), t.input)?;
    Ok((EmbeddingModel { params: *params, input, output: t.output }, stats))
}
