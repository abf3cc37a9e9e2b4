//! Collapsed Gibbs sampling for LDA-style models.
//!
//! The same sampler runs on real documents (LDA) and on pseudo-documents
//! (WNTM, CWIBTD). Each token's topic is resampled from
//!
//! ```text
//! P(z = k | rest) ∝ (n_dk + α) (n_wk + β) / (n_k + Vβ)
//! ```
//!
//! with the token's own counts removed first. Tokens are visited in document
//! order, and randomness comes from a `Xoshiro256PlusPlus` seeded from the config, so
//! a (seed, config, input) triple fully determines the chain.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::WordId;

#[derive(Debug, Error, PartialEq)]
pub enum SamplerError {
    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),
    #[error("no documents to train on")]
    EmptyInput,
    #[error("token {token} has word id {word} outside vocabulary of size {vocab_size}")]
    WordOutOfRange {
        token: usize,
        word: WordId,
        vocab_size: usize,
    },
    #[error("sampling weights sum to {sum} at token {token}")]
    Numerical { token: usize, sum: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(topics: usize, alpha: f64, beta: f64) -> Self {
        Self {
            topics,
            alpha,
            beta,
            iterations: 2000,
            seed: 0,
        }
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// `iterations >= 1`, positive finite hyperparameters, and `topics >= 1`.
    /// A single topic is accepted as a degenerate case.
    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.topics == 0 {
            return Err(SamplerError::InvalidConfig(
                "topics must be at least 1".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(SamplerError::InvalidConfig(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(SamplerError::InvalidConfig(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if self.iterations == 0 {
            return Err(SamplerError::InvalidConfig(
                "iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Topic assignments and the count matrices derived from them. Tokens of all
/// documents are stored contiguously; `doc_offsets[d]..doc_offsets[d + 1]`
/// spans document `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicModelState {
    words: Vec<WordId>,
    doc_offsets: Vec<usize>,
    z: Vec<u32>,
    /// docs × topics, row-major
    n_dk: Vec<u32>,
    /// words × topics, row-major
    n_wk: Vec<u32>,
    n_k: Vec<u64>,
    vocab_size: usize,
    topics: usize,
}

impl TopicModelState {
    pub fn num_docs(&self) -> usize {
        self.doc_offsets.len() - 1
    }

    pub fn num_topics(&self) -> usize {
        self.topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn total_tokens(&self) -> usize {
        self.words.len()
    }

    pub fn doc_len(&self, d: usize) -> usize {
        self.doc_offsets[d + 1] - self.doc_offsets[d]
    }

    /// Topic assignments of document `d`'s tokens.
    pub fn assignments(&self, d: usize) -> &[u32] {
        &self.z[self.doc_offsets[d]..self.doc_offsets[d + 1]]
    }

    pub fn doc_topic_counts(&self, d: usize) -> &[u32] {
        &self.n_dk[d * self.topics..(d + 1) * self.topics]
    }

    pub fn word_topic_counts(&self, w: WordId) -> &[u32] {
        let w = w as usize;
        &self.n_wk[w * self.topics..(w + 1) * self.topics]
    }

    pub fn topic_counts(&self) -> &[u64] {
        &self.n_k
    }

    /// Recomputes every count from the assignments and compares, then checks
    /// the three conservation identities. Returns a description of the first
    /// violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let k = self.topics;
        let mut n_dk = vec![0u32; self.n_dk.len()];
        let mut n_wk = vec![0u32; self.n_wk.len()];
        let mut n_k = vec![0u64; k];
        for d in 0..self.num_docs() {
            for t in self.doc_offsets[d]..self.doc_offsets[d + 1] {
                let z = self.z[t] as usize;
                if z >= k {
                    return Err(format!("token {t} has topic {z} >= {k}"));
                }
                n_dk[d * k + z] += 1;
                n_wk[self.words[t] as usize * k + z] += 1;
                n_k[z] += 1;
            }
        }
        if n_dk != self.n_dk {
            return Err("doc-topic counts disagree with assignments".into());
        }
        if n_wk != self.n_wk {
            return Err("word-topic counts disagree with assignments".into());
        }
        if n_k != self.n_k {
            return Err("topic totals disagree with assignments".into());
        }
        for d in 0..self.num_docs() {
            let s: u64 = self.doc_topic_counts(d).iter().map(|&c| c as u64).sum();
            if s != self.doc_len(d) as u64 {
                return Err(format!(
                    "doc {d}: topic counts sum to {s}, length {}",
                    self.doc_len(d)
                ));
            }
        }
        for topic in 0..k {
            let s: u64 = (0..self.vocab_size)
                .map(|w| self.n_wk[w * k + topic] as u64)
                .sum();
            if s != self.n_k[topic] {
                return Err(format!(
                    "topic {topic}: word counts sum to {s}, total {}",
                    self.n_k[topic]
                ));
            }
        }
        let total: u64 = self.n_k.iter().sum();
        if total != self.total_tokens() as u64 {
            return Err(format!(
                "topic totals sum to {total}, {} tokens",
                self.total_tokens()
            ));
        }
        Ok(())
    }
}

/// Row-stochastic matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl StochasticMatrix {
    pub fn from_rows(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), rows * cols, "matrix shape mismatch");
        Self { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest `|Σ row − 1|` over all rows.
    pub fn max_row_sum_error(&self) -> f64 {
        (0..self.rows)
            .map(|i| (self.row(i).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// `φ_z[w] = P(w | z)`: topics × words.
pub type Phi = StochasticMatrix;
/// `θ_d[z] = P(z | d)`: documents (or pseudo-documents) × topics.
pub type Theta = StochasticMatrix;

pub struct GibbsSampler {
    config: SamplerConfig,
    state: TopicModelState,
    rng: Xoshiro256PlusPlus,
    weights: Vec<f64>,
    sweeps: usize,
}

impl GibbsSampler {
    /// Assigns every token a uniformly random topic and builds the counts.
    pub fn new<D: AsRef<[WordId]>>(
        docs: &[D],
        vocab_size: usize,
        config: SamplerConfig,
    ) -> Result<Self, SamplerError> {
        config.validate()?;
        if docs.is_empty() {
            return Err(SamplerError::EmptyInput);
        }
        let k = config.topics;
        let total: usize = docs.iter().map(|d| d.as_ref().len()).sum();
        let mut words = Vec::with_capacity(total);
        let mut doc_offsets = Vec::with_capacity(docs.len() + 1);
        doc_offsets.push(0);
        for d in docs {
            for &w in d.as_ref() {
                if w as usize >= vocab_size {
                    return Err(SamplerError::WordOutOfRange {
                        token: words.len(),
                        word: w,
                        vocab_size,
                    });
                }
                words.push(w);
            }
            doc_offsets.push(words.len());
        }
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(config.seed);
        let mut z = Vec::with_capacity(total);
        let mut n_dk = vec![0u32; docs.len() * k];
        let mut n_wk = vec![0u32; vocab_size * k];
        let mut n_k = vec![0u64; k];
        for d in 0..docs.len() {
            for t in doc_offsets[d]..doc_offsets[d + 1] {
                let topic = rng.gen_range(0..k);
                z.push(topic as u32);
                n_dk[d * k + topic] += 1;
                n_wk[words[t] as usize * k + topic] += 1;
                n_k[topic] += 1;
            }
        }
        Ok(GibbsSampler {
            config,
            state: TopicModelState {
                words,
                doc_offsets,
                z,
                n_dk,
                n_wk,
                n_k,
                vocab_size,
                topics: k,
            },
            rng,
            weights: vec![0.0; k],
            sweeps: 0,
        })
    }

    pub fn state(&self) -> &TopicModelState {
        &self.state
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps
    }

    /// Resamples every token once.
    pub fn sweep(&mut self) -> Result<(), SamplerError> {
        // fixed topic counts let the per-topic loops unroll
        match self.config.topics {
            2 => self.sweep_fixed::<2>(),
            3 => self.sweep_fixed::<3>(),
            4 => self.sweep_fixed::<4>(),
            5 => self.sweep_fixed::<5>(),
            6 => self.sweep_fixed::<6>(),
            7 => self.sweep_fixed::<7>(),
            8 => self.sweep_fixed::<8>(),
            10 => self.sweep_fixed::<10>(),
            12 => self.sweep_fixed::<12>(),
            16 => self.sweep_fixed::<16>(),
            _ => self.sweep_dyn(),
        }?;
        self.sweeps += 1;
        Ok(())
    }

    fn sweep_fixed<const K: usize>(&mut self) -> Result<(), SamplerError> {
        let alpha = self.config.alpha;
        let beta = self.config.beta;
        let v_beta = self.state.vocab_size as f64 * beta;
        let st = &mut self.state;
        let mut inv_denom = [0.0f64; K];
        for (inv, &n) in inv_denom.iter_mut().zip(&st.n_k) {
            *inv = 1.0 / (n as f64 + v_beta);
        }
        let mut weights = [0.0f64; K];
        for d in 0..st.doc_offsets.len() - 1 {
            let dk: &mut [u32; K] = (&mut st.n_dk[d * K..(d + 1) * K])
                .try_into()
                .expect("K topics per row");
            for t in st.doc_offsets[d]..st.doc_offsets[d + 1] {
                let w = st.words[t] as usize;
                let old = st.z[t] as usize;
                let wk: &mut [u32; K] = (&mut st.n_wk[w * K..(w + 1) * K])
                    .try_into()
                    .expect("K topics per row");
                dk[old] -= 1;
                wk[old] -= 1;
                st.n_k[old] -= 1;
                inv_denom[old] = 1.0 / (st.n_k[old] as f64 + v_beta);

                let mut sum = 0.0;
                for i in 0..K {
                    sum += (dk[i] as f64 + alpha) * (wk[i] as f64 + beta) * inv_denom[i];
                    weights[i] = sum;
                }
                if !(sum.is_finite() && sum > 0.0) {
                    return Err(SamplerError::Numerical { token: t, sum });
                }
                let u = self.rng.gen::<f64>() * sum;
                // first cumulative weight exceeding u; the final bucket absorbs rounding
                let new = weights.iter().position(|&c| u < c).unwrap_or(K - 1);

                st.z[t] = new as u32;
                dk[new] += 1;
                wk[new] += 1;
                st.n_k[new] += 1;
                inv_denom[new] = 1.0 / (st.n_k[new] as f64 + v_beta);
            }
        }
        Ok(())
    }

    fn sweep_dyn(&mut self) -> Result<(), SamplerError> {
        let k = self.config.topics;
        let alpha = self.config.alpha;
        let beta = self.config.beta;
        let v_beta = self.state.vocab_size as f64 * beta;
        let st = &mut self.state;
        let weights = &mut self.weights[..k];
        // 1 / (n_k + Vβ), refreshed for the two topics a move touches
        let mut inv_denom: Vec<f64> = st.n_k.iter().map(|&n| 1.0 / (n as f64 + v_beta)).collect();
        for d in 0..st.doc_offsets.len() - 1 {
            let dk = &mut st.n_dk[d * k..(d + 1) * k];
            for t in st.doc_offsets[d]..st.doc_offsets[d + 1] {
                let w = st.words[t] as usize;
                let old = st.z[t] as usize;
                let wk = &mut st.n_wk[w * k..(w + 1) * k];
                dk[old] -= 1;
                wk[old] -= 1;
                st.n_k[old] -= 1;
                inv_denom[old] = 1.0 / (st.n_k[old] as f64 + v_beta);

                for (((p, &a), &b), &inv) in weights
                    .iter_mut()
                    .zip(dk.iter())
                    .zip(wk.iter())
                    .zip(&inv_denom)
                {
                    *p = (a as f64 + alpha) * (b as f64 + beta) * inv;
                }
                let mut sum = 0.0;
                for p in weights.iter_mut() {
                    sum += *p;
                    *p = sum;
                }
                if !(sum.is_finite() && sum > 0.0) {
                    return Err(SamplerError::Numerical { token: t, sum });
                }
                let u = self.rng.gen::<f64>() * sum;
                let new = weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                st.z[t] = new as u32;
                dk[new] += 1;
                wk[new] += 1;
                st.n_k[new] += 1;
                inv_denom[new] = 1.0 / (st.n_k[new] as f64 + v_beta);
            }
        }
        Ok(())
    }

    /// Normalized collapsed conditional for token `t` with its own
    /// assignment removed. Does not modify the state.
    pub fn conditional(&self, t: usize) -> Vec<f64> {
        let k = self.config.topics;
        let st = &self.state;
        let d = st.doc_offsets.partition_point(|&o| o <= t) - 1;
        let w = st.words[t] as usize;
        let old = st.z[t] as usize;
        let v_beta = st.vocab_size as f64 * self.config.beta;
        let mut p: Vec<f64> = (0..k)
            .map(|topic| {
                let own = (topic == old) as u32;
                let ndk = (st.n_dk[d * k + topic] - own) as f64;
                let nwk = (st.n_wk[w * k + topic] - own) as f64;
                let nk = (st.n_k[topic] - own as u64) as f64;
                (ndk + self.config.alpha) * (nwk + self.config.beta) / (nk + v_beta)
            })
            .collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        p
    }

    /// `φ̂_z[w] = (n_wk + β) / (n_k + Vβ)`.
    pub fn phi(&self) -> Phi {
        let st = &self.state;
        let (k, v) = (st.topics, st.vocab_size);
        let beta = self.config.beta;
        let v_beta = v as f64 * beta;
        let mut values = vec![0.0; k * v];
        for topic in 0..k {
            let denom = st.n_k[topic] as f64 + v_beta;
            for w in 0..v {
                values[topic * v + w] = (st.n_wk[w * k + topic] as f64 + beta) / denom;
            }
        }
        StochasticMatrix::from_rows(k, v, values)
    }

    /// `θ̂_d[z] = (n_dk + α) / (Len(d) + Kα)`.
    pub fn theta(&self) -> Theta {
        let st = &self.state;
        let k = st.topics;
        let alpha = self.config.alpha;
        let mut values = Vec::with_capacity(st.num_docs() * k);
        for d in 0..st.num_docs() {
            let denom = st.doc_len(d) as f64 + k as f64 * alpha;
            values.extend(
                st.doc_topic_counts(d)
                    .iter()
                    .map(|&c| (c as f64 + alpha) / denom),
            );
        }
        StochasticMatrix::from_rows(st.num_docs(), k, values)
    }
}

/// Final state and point estimates of one chain.
#[derive(Debug, Clone)]
pub struct TrainedTopics {
    pub state: TopicModelState,
    pub phi: Phi,
    pub theta: Theta,
}

/// Runs `config.iterations` sweeps from a random start and returns the
/// estimates of the final state. No burn-in or sample averaging.
pub fn train<D: AsRef<[WordId]>>(
    docs: &[D],
    vocab_size: usize,
    config: SamplerConfig,
) -> Result<TrainedTopics, SamplerError> {
    let mut sampler = GibbsSampler::new(docs, vocab_size, config)?;
    for _ in 0..config.iterations {
        sampler.sweep()?;
    }
    Ok(TrainedTopics {
        phi: sampler.phi(),
        theta: sampler.theta(),
        state: sampler.state,
    })
}
