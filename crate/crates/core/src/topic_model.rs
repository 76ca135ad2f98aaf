//! Collapsed Gibbs sampling for LDA over the modeled tokens of a corpus, and
//! the per-token topic membership vectors derived from it.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`, which produces the same stream on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, TokenIndex, Vocabulary};
use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct TopicModelConfig<T> {
    pub k: usize,
    /// Symmetric document-topic prior.
    pub alpha: T,
    /// Symmetric topic-word prior.
    pub beta: T,
    pub sweeps: usize,
    /// Posteriors average the states after each of the last this-many sweeps.
    pub samples_to_average: usize,
    pub seed: u64,
}

impl<T: Real> Default for TopicModelConfig<T> {
    fn default() -> Self {
        TopicModelConfig {
            k: 10,
            alpha: T::from_f64_lossy(0.1),
            beta: T::from_f64_lossy(0.01),
            sweeps: 500,
            samples_to_average: 100,
            seed: 0,
        }
    }
}

impl<T: Real> TopicModelConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidConfig("K must be >= 1".into()));
        }
        if !(self.alpha > T::zero()) || !(self.beta > T::zero()) {
            return Err(Error::InvalidConfig("alpha and beta must be positive".into()));
        }
        if self.samples_to_average > self.sweeps {
            return Err(Error::InvalidConfig(
                "samples_to_average must not exceed sweeps".into(),
            ));
        }
        Ok(())
    }
}

/// The sampler's view of a corpus: word id and document of every modeled
/// token, in corpus order.
#[derive(Debug, Clone)]
pub struct TopicData {
    index: TokenIndex,
    words: Vec<usize>,
    docs: Vec<usize>,
    vocab_size: usize,
}

impl TopicData {
    pub fn new(corpus: &Corpus, vocab: &Vocabulary) -> Result<Self> {
        if vocab.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if vocab.modeled_mask().len() != corpus.len() {
            return Err(Error::LengthMismatch {
                expected: corpus.len(),
                actual: vocab.modeled_mask().len(),
            });
        }
        let index = TokenIndex::from_mask(vocab.modeled_mask());
        let mut words = Vec::with_capacity(index.len());
        let mut docs = Vec::with_capacity(index.len());
        for t in 0..index.len() {
            let (d, pos) = index.locate(t).expect("index in range");
            let term = &corpus.documents()[d].tokens[pos].text;
            words.push(vocab.id(term).expect("modeled token is in vocabulary"));
            docs.push(d);
        }
        Ok(TopicData {
            index,
            words,
            docs,
            vocab_size: vocab.len(),
        })
    }

    pub fn index(&self) -> &TokenIndex {
        &self.index
    }

    pub fn num_tokens(&self) -> usize {
        self.words.len()
    }

    pub fn num_docs(&self) -> usize {
        self.index.num_docs()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn word(&self, t: usize) -> usize {
        self.words[t]
    }

    pub fn doc(&self, t: usize) -> usize {
        self.docs[t]
    }
}

/// Topic assignments with their count matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicState {
    k: usize,
    vocab_size: usize,
    z: Vec<usize>,
    n_dk: Vec<u32>,
    n_kw: Vec<u32>,
    n_k: Vec<u32>,
}

impl TopicState {
    /// State with the given assignments and counts rebuilt from them.
    pub fn from_assignments(data: &TopicData, k: usize, z: Vec<usize>) -> Result<Self> {
        if z.len() != data.num_tokens() {
            return Err(Error::LengthMismatch {
                expected: data.num_tokens(),
                actual: z.len(),
            });
        }
        if let Some(&bad) = z.iter().find(|&&topic| topic >= k) {
            return Err(Error::OutOfRange { index: bad, len: k });
        }
        let mut state = TopicState {
            k,
            vocab_size: data.vocab_size(),
            z: Vec::new(),
            n_dk: vec![0; data.num_docs() * k],
            n_kw: vec![0; k * data.vocab_size()],
            n_k: vec![0; k],
        };
        for (t, &topic) in z.iter().enumerate() {
            state.add(data.doc(t), data.word(t), topic);
        }
        state.z = z;
        Ok(state)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignments(&self) -> &[usize] {
        &self.z
    }

    pub fn n_dk(&self, d: usize, k: usize) -> u32 {
        self.n_dk[d * self.k + k]
    }

    pub fn n_kw(&self, k: usize, w: usize) -> u32 {
        self.n_kw[k * self.vocab_size + w]
    }

    pub fn n_k(&self, k: usize) -> u32 {
        self.n_k[k]
    }

    fn add(&mut self, d: usize, w: usize, topic: usize) {
        self.n_dk[d * self.k + topic] += 1;
        self.n_kw[topic * self.vocab_size + w] += 1;
        self.n_k[topic] += 1;
    }

    fn remove(&mut self, d: usize, w: usize, topic: usize) {
        self.n_dk[d * self.k + topic] -= 1;
        self.n_kw[topic * self.vocab_size + w] -= 1;
        self.n_k[topic] -= 1;
    }
}

/// A single Gibbs chain. Owns its state and generator.
#[derive(Debug, Clone)]
pub struct GibbsSampler<T> {
    config: TopicModelConfig<T>,
    data: TopicData,
    state: TopicState,
    rng: ChaCha8Rng,
    weights: Vec<T>,
}

impl<T: Real> GibbsSampler<T> {
    /// Draws each modeled token's topic uniformly from the seeded generator.
    pub fn new(corpus: &Corpus, vocab: &Vocabulary, config: TopicModelConfig<T>) -> Result<Self> {
        Self::from_data(TopicData::new(corpus, vocab)?, config)
    }

    pub fn from_data(data: TopicData, config: TopicModelConfig<T>) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let z = (0..data.num_tokens())
            .map(|_| rng.random_range(0..config.k))
            .collect();
        let state = TopicState::from_assignments(&data, config.k, z)?;
        Ok(GibbsSampler {
            weights: vec![T::zero(); config.k],
            config,
            data,
            state,
            rng,
        })
    }

    pub fn state(&self) -> &TopicState {
        &self.state
    }

    pub fn data(&self) -> &TopicData {
        &self.data
    }

    pub fn config(&self) -> &TopicModelConfig<T> {
        &self.config
    }

    /// Resample every modeled token once, in corpus order, from
    /// `p(z=k) ∝ (n_dk + α)(n_kw + β) / (n_k + Vβ)` with the token's own
    /// assignment removed from the counts.
    pub fn sweep(&mut self) {
        let k_count = self.config.k;
        let alpha = self.config.alpha;
        let beta = self.config.beta;
        let v_beta = T::from_count(self.data.vocab_size) * beta;

        for t in 0..self.data.num_tokens() {
            let d = self.data.doc(t);
            let w = self.data.word(t);
            let old = self.state.z[t];
            self.state.remove(d, w, old);

            let mut total = T::zero();
            for k in 0..k_count {
                let doc_part = T::from_count(self.state.n_dk(d, k) as usize) + alpha;
                let word_part = T::from_count(self.state.n_kw(k, w) as usize) + beta;
                let topic_part = T::from_count(self.state.n_k(k) as usize) + v_beta;
                total = total + doc_part * word_part / topic_part;
                self.weights[k] = total;
            }
            let u = T::from_f64_lossy(self.rng.random::<f64>()) * total;
            let new = self
                .weights
                .iter()
                .position(|&c| u < c)
                .unwrap_or(k_count - 1);

            self.state.add(d, w, new);
            self.state.z[t] = new;
        }
    }

    /// Run `config.sweeps` sweeps and average the last `samples_to_average` states.
    pub fn run(mut self) -> Result<TopicPosterior<T>> {
        let mut acc = PosteriorAccumulator::new(&self.data, self.config.k);
        let burn_in = self.config.sweeps - self.config.samples_to_average;
        for i in 0..self.config.sweeps {
            self.sweep();
            if i >= burn_in {
                acc.push(&self.state, &self.data, &self.config);
            }
        }
        acc.finish()
    }
}

/// Averaged estimates from a list of sampler states.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicPosterior<T> {
    /// One K-vector per modeled token, corpus order.
    pub psi: Vec<Vec<T>>,
    /// K × V.
    pub phi_mean: Vec<Vec<T>>,
    /// D × K.
    pub theta_mean: Vec<Vec<T>>,
    pub num_samples: usize,
}

impl<T: Real> TopicPosterior<T> {
    pub fn k(&self) -> usize {
        self.phi_mean.len()
    }

    /// `psi` split per document.
    pub fn psi_by_doc<'a>(&'a self, index: &TokenIndex) -> Vec<&'a [Vec<T>]> {
        (0..index.num_docs())
            .map(|d| &self.psi[index.doc_range(d)])
            .collect()
    }
}

/// Running sums for [`estimate_posteriors`].
#[derive(Debug, Clone)]
pub struct PosteriorAccumulator<T> {
    k: usize,
    samples: usize,
    psi_counts: Vec<u32>,
    phi_sum: Vec<Vec<T>>,
    theta_sum: Vec<Vec<T>>,
}

impl<T: Real> PosteriorAccumulator<T> {
    pub fn new(data: &TopicData, k: usize) -> Self {
        PosteriorAccumulator {
            k,
            samples: 0,
            psi_counts: vec![0; data.num_tokens() * k],
            phi_sum: vec![vec![T::zero(); data.vocab_size()]; k],
            theta_sum: vec![vec![T::zero(); k]; data.num_docs()],
        }
    }

    pub fn push(&mut self, state: &TopicState, data: &TopicData, config: &TopicModelConfig<T>) {
        let k_count = self.k;
        for (t, &topic) in state.assignments().iter().enumerate() {
            self.psi_counts[t * k_count + topic] += 1;
        }
        let v = data.vocab_size();
        let v_beta = T::from_count(v) * config.beta;
        for k in 0..k_count {
            let denom = T::from_count(state.n_k(k) as usize) + v_beta;
            for w in 0..v {
                let num = T::from_count(state.n_kw(k, w) as usize) + config.beta;
                self.phi_sum[k][w] = self.phi_sum[k][w] + num / denom;
            }
        }
        let k_alpha = T::from_count(k_count) * config.alpha;
        for d in 0..data.num_docs() {
            let n_d: usize = (0..k_count).map(|k| state.n_dk(d, k) as usize).sum();
            let denom = T::from_count(n_d) + k_alpha;
            for k in 0..k_count {
                let num = T::from_count(state.n_dk(d, k) as usize) + config.alpha;
                self.theta_sum[d][k] = self.theta_sum[d][k] + num / denom;
            }
        }
        self.samples += 1;
    }

    pub fn finish(self) -> Result<TopicPosterior<T>> {
        if self.samples == 0 {
            return Err(Error::InvalidConfig(
                "at least one sample is required".into(),
            ));
        }
        let s = T::from_count(self.samples);
        let psi = self
            .psi_counts
            .chunks(self.k.max(1))
            .map(|row| row.iter().map(|&c| T::from_count(c as usize) / s).collect())
            .collect();
        let mean = |rows: Vec<Vec<T>>| -> Vec<Vec<T>> {
            rows.into_iter()
                .map(|row| row.into_iter().map(|x| x / s).collect())
                .collect()
        };
        Ok(TopicPosterior {
            psi,
            phi_mean: mean(self.phi_sum),
            theta_mean: mean(self.theta_sum),
            num_samples: self.samples,
        })
    }
}

/// Average indicator vectors and smoothed point estimates over `samples`.
pub fn estimate_posteriors<T: Real>(
    samples: &[TopicState],
    data: &TopicData,
    config: &TopicModelConfig<T>,
) -> Result<TopicPosterior<T>> {
    if samples.is_empty() {
        return Err(Error::InvalidConfig("empty sample list".into()));
    }
    let mut acc = PosteriorAccumulator::new(data, config.k);
    for state in samples {
        if state.k() != config.k || state.assignments().len() != data.num_tokens() {
            return Err(Error::LengthMismatch {
                expected: data.num_tokens(),
                actual: state.assignments().len(),
            });
        }
        acc.push(state, data, config);
    }
    acc.finish()
}

/// `P(z = k | w, θ_d, φ) ∝ θ_{d,k} φ_{k,w}`, normalized.
pub fn token_posterior<T: Real>(theta_d: &[T], phi: &[Vec<T>], w: usize) -> Result<Vec<T>> {
    if theta_d.len() != phi.len() {
        return Err(Error::LengthMismatch {
            expected: phi.len(),
            actual: theta_d.len(),
        });
    }
    let mut unnormalized = Vec::with_capacity(phi.len());
    for (theta, row) in theta_d.iter().zip(phi) {
        let p = row.get(w).ok_or(Error::OutOfRange {
            index: w,
            len: row.len(),
        })?;
        unnormalized.push(*theta * *p);
    }
    let total: T = unnormalized.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::ZeroProbability);
    }
    Ok(unnormalized.into_iter().map(|x| x / total).collect())
}

/// The `n` most probable terms of topic `k`, descending, ties by term id.
pub fn top_words<T: Real>(
    phi_mean: &[Vec<T>],
    terms: &[String],
    k: usize,
    n: usize,
) -> Result<Vec<(String, T)>> {
    let row = phi_mean.get(k).ok_or(Error::OutOfRange {
        index: k,
        len: phi_mean.len(),
    })?;
    let mut ids: Vec<usize> = (0..row.len()).collect();
    ids.sort_by(|&a, &b| {
        row[b]
            .partial_cmp(&row[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    Ok(ids
        .into_iter()
        .take(n)
        .map(|w| (terms[w].clone(), row[w]))
        .collect())
}
