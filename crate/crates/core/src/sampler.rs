//! Collapsed Gibbs sampling for latent Dirichlet allocation.
//!
//! The latent per-document and per-topic distributions are integrated
//! out; the sampler tracks only the per-token topic assignments `z` and
//! four count tables. A sweep visits every token in canonical order
//! (document order, then position within the document), removes the
//! token from the counts, draws a new topic from its conditional
//! distribution, and reinserts it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{TokenCorpus, Vocabulary};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dirichlet smoothing parameters and the topic count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams<R> {
    pub k: usize,
    pub alpha: R,
    pub beta: R,
}

impl<R: Real> Hyperparams<R> {
    /// The conventional choice: `alpha = 50/k`, `beta = 0.1`.
    pub fn with_defaults(k: usize) -> Self {
        Hyperparams {
            k,
            alpha: R::from_f64_lossy(50.0) / R::from_usize_lossy(k.max(1)),
            beta: R::from_f64_lossy(0.1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidHyperparams("topic count must be at least 1".into()));
        }
        if !(self.alpha > R::zero()) || !self.alpha.is_finite() {
            return Err(Error::InvalidHyperparams("alpha must be positive and finite".into()));
        }
        if !(self.beta > R::zero()) || !self.beta.is_finite() {
            return Err(Error::InvalidHyperparams("beta must be positive and finite".into()));
        }
        Ok(())
    }
}

/// Sweep budget for one chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingSchedule {
    pub sweeps: u32,
    pub burn_in: u32,
    /// Spacing between retained post-burn-in samples.
    pub thin: u32,
}

impl Default for SamplingSchedule {
    fn default() -> Self {
        SamplingSchedule {
            sweeps: 1000,
            burn_in: 200,
            thin: 1,
        }
    }
}

impl SamplingSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.thin < 1 {
            return Err(Error::InvalidSchedule("thin must be at least 1".into()));
        }
        if self.sweeps <= self.burn_in {
            return Err(Error::InvalidSchedule(format!(
                "sweeps ({}) must exceed burn_in ({})",
                self.sweeps, self.burn_in
            )));
        }
        if self.sweeps - self.burn_in < self.thin {
            return Err(Error::InvalidSchedule(format!(
                "no retained sample: sweeps - burn_in ({}) is less than thin ({})",
                self.sweeps - self.burn_in,
                self.thin
            )));
        }
        Ok(())
    }

    /// Estimators are averaged over retained samples unless the schedule
    /// degenerates to "use the final state".
    pub fn averages_samples(&self) -> bool {
        self.burn_in > 0 || self.thin > 1
    }

    fn retains(&self, sweep: u32) -> bool {
        sweep > self.burn_in && (sweep - self.burn_in) % self.thin == 0
    }
}

/// Mutable chain state: topic assignments plus count tables.
#[derive(Debug, Clone)]
pub struct SamplerState<R> {
    hp: Hyperparams<R>,
    vocab_size: usize,
    /// Per-document topic assignments, aligned with the corpus token order.
    z: Vec<Vec<u32>>,
    /// topic-by-term counts, row-major `k * vocab_size`.
    n_topic_term: Vec<u32>,
    /// document-by-topic counts, row-major `docs * k`.
    n_doc_topic: Vec<u32>,
    n_topic: Vec<u32>,
    n_doc: Vec<u32>,
    /// Global token index = doc_offsets[d] + position.
    doc_offsets: Vec<usize>,
    rng_seed: u64,
    sweep_index: u64,
    rng: ChaCha8Rng,
}

impl<R: Real> SamplerState<R> {
    /// Assigns every token a uniformly random topic and builds the count
    /// tables. Bit-reproducible for a fixed seed.
    pub fn init(corpus: &TokenCorpus, hp: Hyperparams<R>, seed: u64) -> Result<Self> {
        hp.validate()?;
        if corpus.docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if hp.k as u64 > corpus.n_total {
            log::warn!(
                "topic count {} exceeds corpus size {}; the fit is degenerate",
                hp.k,
                corpus.n_total
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = corpus
            .docs
            .iter()
            .map(|doc| {
                doc.token_ids
                    .iter()
                    .map(|_| rng.random_range(0..hp.k as u32))
                    .collect()
            })
            .collect();
        Self::from_parts(corpus, hp, z, seed, rng)
    }

    /// Builds a state from explicit assignments. Counts are derived from
    /// `z`, so the result always satisfies the consistency invariants.
    pub fn from_assignments(
        corpus: &TokenCorpus,
        hp: Hyperparams<R>,
        z: Vec<Vec<u32>>,
        seed: u64,
    ) -> Result<Self> {
        hp.validate()?;
        if z.len() != corpus.docs.len()
            || z.iter()
                .zip(&corpus.docs)
                .any(|(zd, doc)| zd.len() != doc.token_ids.len())
        {
            return Err(Error::InvalidHyperparams(
                "assignment shape does not match the corpus".into(),
            ));
        }
        if z.iter().flatten().any(|&t| t as usize >= hp.k) {
            return Err(Error::InvalidHyperparams(
                "assignment refers to a topic outside 0..k".into(),
            ));
        }
        let rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_parts(corpus, hp, z, seed, rng)
    }

    fn from_parts(
        corpus: &TokenCorpus,
        hp: Hyperparams<R>,
        z: Vec<Vec<u32>>,
        seed: u64,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        let k = hp.k;
        let vocab_size = corpus
            .docs
            .iter()
            .flat_map(|d| d.token_ids.iter())
            .max()
            .map(|&v| v as usize + 1)
            .unwrap_or(0);
        let docs = corpus.docs.len();

        let mut state = SamplerState {
            hp,
            vocab_size,
            z,
            n_topic_term: vec![0; k * vocab_size],
            n_doc_topic: vec![0; docs * k],
            n_topic: vec![0; k],
            n_doc: vec![0; docs],
            doc_offsets: Vec::with_capacity(docs),
            rng_seed: seed,
            sweep_index: 0,
            rng,
        };

        let mut offset = 0usize;
        for (d, doc) in corpus.docs.iter().enumerate() {
            state.doc_offsets.push(offset);
            offset += doc.token_ids.len();
            for (&v, &t) in doc.token_ids.iter().zip(&state.z[d]) {
                state.n_topic_term[t as usize * vocab_size + v as usize] += 1;
                state.n_doc_topic[d * k + t as usize] += 1;
                state.n_topic[t as usize] += 1;
                state.n_doc[d] += 1;
            }
        }
        Ok(state)
    }

    pub fn k(&self) -> usize {
        self.hp.k
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn hyperparams(&self) -> Hyperparams<R> {
        self.hp
    }

    pub fn assignments(&self) -> &[Vec<u32>] {
        &self.z
    }

    pub fn topic_term_counts(&self) -> &[u32] {
        &self.n_topic_term
    }

    pub fn doc_topic_counts(&self) -> &[u32] {
        &self.n_doc_topic
    }

    pub fn topic_totals(&self) -> &[u32] {
        &self.n_topic
    }

    pub fn doc_totals(&self) -> &[u32] {
        &self.n_doc
    }

    pub fn sweep_index(&self) -> u64 {
        self.sweep_index
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn token_count(&self) -> usize {
        self.doc_offsets.last().map_or(0, |&o| o) + self.z.last().map_or(0, |z| z.len())
    }

    fn locate(&self, token_index: usize) -> (usize, usize) {
        let d = self.doc_offsets.partition_point(|&o| o <= token_index) - 1;
        (d, token_index - self.doc_offsets[d])
    }

    /// Full conditional over topics for one token, with that token's own
    /// assignment excluded from every count. Entries are positive and sum
    /// to one.
    pub fn conditional_distribution(&self, corpus: &TokenCorpus, token_index: usize) -> Vec<R> {
        let (d, i) = self.locate(token_index);
        let v = corpus.docs[d].token_ids[i] as usize;
        let current = self.z[d][i] as usize;

        let k = self.hp.k;
        let mut weights = vec![R::zero(); k];
        let doc_denom = R::from_u32(self.n_doc[d] - 1).unwrap()
            + R::from_usize_lossy(k) * self.hp.alpha;
        for t in 0..k {
            let held_out = u32::from(t == current);
            weights[t] = self.topic_weight(
                t,
                v,
                d,
                self.n_topic_term[t * self.vocab_size + v] - held_out,
                self.n_topic[t] - held_out,
                self.n_doc_topic[d * k + t] - held_out,
                doc_denom,
            );
        }
        let total: R = weights.iter().copied().sum();
        for w in &mut weights {
            *w /= total;
        }
        weights
    }

    #[inline]
    #[allow(clippy::too_many_arguments)]
    fn topic_weight(
        &self,
        _t: usize,
        _v: usize,
        _d: usize,
        n_tt: u32,
        n_t: u32,
        n_dt: u32,
        doc_denom: R,
    ) -> R {
        let term = (R::from_u32(n_tt).unwrap() + self.hp.beta)
            / (R::from_u32(n_t).unwrap() + R::from_usize_lossy(self.vocab_size) * self.hp.beta);
        let doc = (R::from_u32(n_dt).unwrap() + self.hp.alpha) / doc_denom;
        term * doc
    }

    /// One full Gibbs sweep over the corpus.
    pub fn sweep(&mut self, corpus: &TokenCorpus) {
        debug_assert_eq!(self.z.len(), corpus.docs.len());
        let k = self.hp.k;
        let vocab_size = self.vocab_size;
        let k_alpha = R::from_usize_lossy(k) * self.hp.alpha;
        let mut weights = vec![R::zero(); k];

        for (d, doc) in corpus.docs.iter().enumerate() {
            let doc_denom = R::from_u32(self.n_doc[d] - 1).unwrap() + k_alpha;
            for (i, &token) in doc.token_ids.iter().enumerate() {
                let v = token as usize;
                let old = self.z[d][i] as usize;
                self.n_topic_term[old * vocab_size + v] -= 1;
                self.n_doc_topic[d * k + old] -= 1;
                self.n_topic[old] -= 1;

                let mut total = R::zero();
                for t in 0..k {
                    let w = self.topic_weight(
                        t,
                        v,
                        d,
                        self.n_topic_term[t * vocab_size + v],
                        self.n_topic[t],
                        self.n_doc_topic[d * k + t],
                        doc_denom,
                    );
                    weights[t] = w;
                    total += w;
                }

                let threshold = R::from_f64_lossy(self.rng.random::<f64>()) * total;
                let mut cumulative = R::zero();
                let mut new = k - 1;
                for (t, &w) in weights.iter().enumerate() {
                    cumulative += w;
                    if cumulative > threshold {
                        new = t;
                        break;
                    }
                }

                self.z[d][i] = new as u32;
                self.n_topic_term[new * vocab_size + v] += 1;
                self.n_doc_topic[d * k + new] += 1;
                self.n_topic[new] += 1;
            }
        }
        self.sweep_index += 1;
    }

    /// Collapsed joint log probability of tokens and assignments given
    /// the priors, computed from the count tables with log-gamma sums.
    /// Invariant under topic relabeling.
    pub fn log_likelihood(&self) -> R {
        let k = self.hp.k;
        let v = self.vocab_size;
        let d = self.z.len();
        let alpha = self.hp.alpha;
        let beta = self.hp.beta;
        let k_alpha = R::from_usize_lossy(k) * alpha;
        let v_beta = R::from_usize_lossy(v) * beta;

        let ln_gamma_beta = beta.ln_gamma();
        let mut total = R::from_usize_lossy(k)
            * (v_beta.ln_gamma() - R::from_usize_lossy(v) * ln_gamma_beta);
        for t in 0..k {
            let mut zero_cells = 0usize;
            for &count in &self.n_topic_term[t * v..(t + 1) * v] {
                if count == 0 {
                    zero_cells += 1;
                } else {
                    total += (R::from_u32(count).unwrap() + beta).ln_gamma();
                }
            }
            total += R::from_usize_lossy(zero_cells) * ln_gamma_beta;
            total -= (R::from_u32(self.n_topic[t]).unwrap() + v_beta).ln_gamma();
        }

        let ln_gamma_alpha = alpha.ln_gamma();
        total += R::from_usize_lossy(d)
            * (k_alpha.ln_gamma() - R::from_usize_lossy(k) * ln_gamma_alpha);
        for (doc, &n_d) in self.n_doc.iter().enumerate() {
            for &count in &self.n_doc_topic[doc * k..(doc + 1) * k] {
                if count == 0 {
                    total += ln_gamma_alpha;
                } else {
                    total += (R::from_u32(count).unwrap() + alpha).ln_gamma();
                }
            }
            total -= (R::from_u32(n_d).unwrap() + k_alpha).ln_gamma();
        }
        total
    }

    /// Smoothed estimators from the current counts:
    /// `theta[d][t] = (n_dt + alpha) / (n_d + k*alpha)` and
    /// `phi[t][v] = (n_tv + beta) / (n_t + V*beta)`.
    pub fn estimators(&self) -> (Vec<R>, Vec<R>) {
        let mut theta = vec![R::zero(); self.z.len() * self.hp.k];
        let mut phi = vec![R::zero(); self.hp.k * self.vocab_size];
        self.add_estimators_into(&mut theta, &mut phi);
        (theta, phi)
    }

    fn add_estimators_into(&self, theta: &mut [R], phi: &mut [R]) {
        let k = self.hp.k;
        let v = self.vocab_size;
        let k_alpha = R::from_usize_lossy(k) * self.hp.alpha;
        let v_beta = R::from_usize_lossy(v) * self.hp.beta;

        for (d, &n_d) in self.n_doc.iter().enumerate() {
            let denom = R::from_u32(n_d).unwrap() + k_alpha;
            for t in 0..k {
                theta[d * k + t] +=
                    (R::from_u32(self.n_doc_topic[d * k + t]).unwrap() + self.hp.alpha) / denom;
            }
        }
        for t in 0..k {
            let denom = R::from_u32(self.n_topic[t]).unwrap() + v_beta;
            for term in 0..v {
                phi[t * v + term] +=
                    (R::from_u32(self.n_topic_term[t * v + term]).unwrap() + self.hp.beta) / denom;
            }
        }
    }
}

/// A fitted model: row-stochastic `phi` (topics over terms) and `theta`
/// (documents over topics).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel<R> {
    pub hyperparams: Hyperparams<R>,
    pub seed: u64,
    pub schedule: SamplingSchedule,
    pub sweeps_run: u32,
    pub vocab_sha256: String,
    pub vocab_size: usize,
    pub doc_ids: Vec<String>,
    /// Row-major `k * vocab_size`.
    pub phi: Vec<R>,
    /// Row-major `doc_ids.len() * k`.
    pub theta: Vec<R>,
}

impl<R: Real> TopicModel<R> {
    pub fn k(&self) -> usize {
        self.hyperparams.k
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn phi_row(&self, topic: usize) -> &[R] {
        &self.phi[topic * self.vocab_size..(topic + 1) * self.vocab_size]
    }

    pub fn theta_row(&self, doc: usize) -> &[R] {
        &self.theta[doc * self.k()..(doc + 1) * self.k()]
    }

    pub fn phi_at(&self, topic: usize, term: usize) -> R {
        self.phi[topic * self.vocab_size + term]
    }

    /// Relabels topics: row `perm[t]` of the result is row `t` of `self`,
    /// and theta columns move with them. Everything observable is
    /// invariant under this.
    pub fn permute_topics(&self, perm: &[usize]) -> TopicModel<R> {
        let k = self.k();
        assert_eq!(perm.len(), k, "permutation length must equal k");
        let mut seen = vec![false; k];
        for &p in perm {
            assert!(p < k && !seen[p], "not a permutation of 0..k");
            seen[p] = true;
        }

        let mut phi = vec![R::zero(); self.phi.len()];
        for t in 0..k {
            phi[perm[t] * self.vocab_size..(perm[t] + 1) * self.vocab_size]
                .copy_from_slice(self.phi_row(t));
        }
        let mut theta = vec![R::zero(); self.theta.len()];
        for d in 0..self.num_docs() {
            for t in 0..k {
                theta[d * k + perm[t]] = self.theta[d * k + t];
            }
        }
        TopicModel {
            phi,
            theta,
            ..self.clone()
        }
    }
}

/// One point of the per-sweep likelihood trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint<R> {
    pub sweep: u32,
    pub log_likelihood: R,
}

/// A fitted model plus its convergence trace.
#[derive(Debug, Clone)]
pub struct FitOutcome<R> {
    pub model: TopicModel<R>,
    pub trace: Vec<TracePoint<R>>,
}

/// Runs a full chain and extracts the estimators. When the schedule has a
/// burn-in or thinning, theta and phi are averaged over the retained
/// samples; otherwise they come from the final state.
pub fn fit<R: Real>(
    corpus: &TokenCorpus,
    vocabulary: &Vocabulary,
    hp: Hyperparams<R>,
    seed: u64,
    schedule: SamplingSchedule,
) -> Result<FitOutcome<R>> {
    schedule.validate()?;
    let mut state = SamplerState::init(corpus, hp, seed)?;
    if state.vocab_size() != vocabulary.len() {
        return Err(Error::ModelMismatch(format!(
            "corpus uses {} distinct term ids but the vocabulary has {} terms",
            state.vocab_size(),
            vocabulary.len()
        )));
    }

    let averaging = schedule.averages_samples();
    let mut acc_theta = vec![R::zero(); corpus.docs.len() * hp.k];
    let mut acc_phi = vec![R::zero(); hp.k * vocabulary.len()];
    let mut samples = 0u32;
    let mut trace = Vec::with_capacity(schedule.sweeps as usize);

    for sweep in 1..=schedule.sweeps {
        state.sweep(corpus);
        let log_likelihood = state.log_likelihood();
        trace.push(TracePoint {
            sweep,
            log_likelihood,
        });
        log::debug!("sweep {sweep}: log-likelihood {log_likelihood}");
        if averaging && schedule.retains(sweep) {
            state.add_estimators_into(&mut acc_theta, &mut acc_phi);
            samples += 1;
        }
    }

    let (theta, phi) = if averaging {
        let scale = R::one() / R::from_u32(samples).unwrap();
        for value in acc_theta.iter_mut().chain(acc_phi.iter_mut()) {
            *value *= scale;
        }
        (acc_theta, acc_phi)
    } else {
        state.estimators()
    };

    let model = TopicModel {
        hyperparams: hp,
        seed,
        schedule,
        sweeps_run: schedule.sweeps,
        vocab_sha256: vocabulary.sha256(),
        vocab_size: vocabulary.len(),
        doc_ids: corpus.doc_ids(),
        phi,
        theta,
    };
    Ok(FitOutcome { model, trace })
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile<R> {
    format_version: u32,
    model: TopicModel<R>,
}

impl<R: Real + Serialize + serde::de::DeserializeOwned> TopicModel<R> {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let writer = std::io::BufWriter::new(file);
        serde_json::to_writer(
            writer,
            &ModelFile {
                format_version: MODEL_FORMAT_VERSION,
                model: self.clone(),
            },
        )?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let reader = std::io::BufReader::new(file);
        let parsed: ModelFile<R> = serde_json::from_reader(reader)?;
        if parsed.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "format_version {} unsupported (expected {MODEL_FORMAT_VERSION})",
                parsed.format_version
            )));
        }
        let model = parsed.model;
        if model.phi.len() != model.k() * model.vocab_size
            || model.theta.len() != model.num_docs() * model.k()
        {
            return Err(Error::ModelFormat(
                "phi/theta dimensions do not match the header".into(),
            ));
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Doc;

    pub(crate) fn corpus_from_tokens(token_docs: &[Vec<u32>]) -> TokenCorpus {
        let docs: Vec<Doc> = token_docs
            .iter()
            .enumerate()
            .map(|(i, token_ids)| Doc {
                doc_id: format!("DOC{i}"),
                country: "Peru".into(),
                year: 1900 + i as i32,
                covariates: Vec::new(),
                token_ids: token_ids.clone(),
            })
            .collect();
        let n_total = docs.iter().map(|d| d.token_ids.len() as u64).sum();
        TokenCorpus {
            covariate_names: Vec::new(),
            docs,
            n_total,
        }
    }

    #[test]
    fn init_single_token_single_topic() {
        let corpus = corpus_from_tokens(&[vec![0]]);
        let state: SamplerState<f64> =
            SamplerState::init(&corpus, Hyperparams::with_defaults(1), 7).unwrap();
        assert_eq!(state.assignments(), &[vec![0]]);
        assert_eq!(state.topic_totals(), &[1]);
        assert_eq!(state.doc_totals(), &[1]);
    }

    #[test]
    fn init_is_deterministic() {
        let corpus = corpus_from_tokens(&[vec![0, 1, 2, 1], vec![2, 2, 0]]);
        let hp = Hyperparams::with_defaults(3);
        let a: SamplerState<f64> = SamplerState::init(&corpus, hp, 42).unwrap();
        let b: SamplerState<f64> = SamplerState::init(&corpus, hp, 42).unwrap();
        assert_eq!(a.assignments(), b.assignments());
        assert_eq!(a.topic_term_counts(), b.topic_term_counts());
        let c: SamplerState<f64> = SamplerState::init(&corpus, hp, 43).unwrap();
        assert_ne!(a.assignments(), c.assignments());
    }

    #[test]
    fn conditional_matches_direct_evaluation() {
        // Excluded-token counts: topic 0 has 3 occurrences of the term
        // (5 total), 2 assignments in the doc; topic 1 has none of the
        // term (1 total), 1 assignment in the doc; 3 other tokens in the
        // doc. alpha = 25, beta = 0.1, V = 2.
        let corpus = corpus_from_tokens(&[vec![0, 0, 0, 1], vec![0, 1, 1]]);
        let z = vec![vec![0, 0, 0, 1], vec![0, 0, 0]];
        let hp = Hyperparams {
            k: 2,
            alpha: 25.0,
            beta: 0.1,
        };
        let state = SamplerState::from_assignments(&corpus, hp, z, 0).unwrap();
        let dist = state.conditional_distribution(&corpus, 0);

        let w0 = (3.1 / 5.2) * (27.0 / 53.0);
        let w1 = (0.1 / 1.2) * (26.0 / 53.0);
        assert!((dist[0] - w0 / (w0 + w1)).abs() < 1e-15);
        assert!((dist[1] - w1 / (w0 + w1)).abs() < 1e-15);
        assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_single_topic_is_certain() {
        let corpus = corpus_from_tokens(&[vec![0, 1, 0]]);
        let state: SamplerState<f64> =
            SamplerState::init(&corpus, Hyperparams::with_defaults(1), 3).unwrap();
        for idx in 0..3 {
            assert_eq!(state.conditional_distribution(&corpus, idx), vec![1.0]);
        }
    }

    #[test]
    fn conditional_symmetric_state_is_uniform() {
        // Two mirrored documents make every per-topic count equal.
        let corpus = corpus_from_tokens(&[vec![0, 1], vec![0, 1]]);
        let z = vec![vec![0, 1], vec![1, 0]];
        let hp = Hyperparams {
            k: 2,
            alpha: 0.5,
            beta: 0.1,
        };
        let state = SamplerState::from_assignments(&corpus, hp, z, 0).unwrap();
        for idx in 0..4 {
            let dist = state.conditional_distribution(&corpus, idx);
            assert!((dist[0] - 0.5).abs() < 1e-15, "{dist:?}");
            assert!((dist[1] - 0.5).abs() < 1e-15, "{dist:?}");
        }
    }

    #[test]
    fn sweep_single_topic_only_advances_index() {
        let corpus = corpus_from_tokens(&[vec![0, 1, 1], vec![1, 0]]);
        let mut state: SamplerState<f64> =
            SamplerState::init(&corpus, Hyperparams::with_defaults(1), 5).unwrap();
        let before = state.clone();
        state.sweep(&corpus);
        assert_eq!(state.assignments(), before.assignments());
        assert_eq!(state.topic_term_counts(), before.topic_term_counts());
        assert_eq!(state.sweep_index(), 1);
    }

    #[test]
    fn sweep_is_deterministic() {
        let corpus = corpus_from_tokens(&[vec![0, 1, 2, 3, 0, 1], vec![3, 2, 1]]);
        let hp = Hyperparams::with_defaults(4);
        let mut a: SamplerState<f64> = SamplerState::init(&corpus, hp, 11).unwrap();
        let mut b: SamplerState<f64> = SamplerState::init(&corpus, hp, 11).unwrap();
        for _ in 0..20 {
            a.sweep(&corpus);
            b.sweep(&corpus);
        }
        assert_eq!(a.assignments(), b.assignments());
        assert_eq!(a.doc_topic_counts(), b.doc_topic_counts());
    }

    #[test]
    fn theta_estimator_matches_hand_value() {
        // One document, ten tokens all assigned topic 0, k = 2, alpha = 25.
        let corpus = corpus_from_tokens(&[vec![0; 10]]);
        let hp = Hyperparams {
            k: 2,
            alpha: 25.0,
            beta: 0.1,
        };
        let state = SamplerState::from_assignments(&corpus, hp, vec![vec![0; 10]], 0).unwrap();
        let (theta, _) = state.estimators();
        assert!((theta[0] - 35.0 / 60.0).abs() < 1e-15);
        assert!((theta[1] - 25.0 / 60.0).abs() < 1e-15);
    }

    #[test]
    fn single_topic_fit_gives_smoothed_frequencies() {
        let corpus = corpus_from_tokens(&[vec![0, 0, 1], vec![0, 2]]);
        let vocab = Vocabulary::from_terms(["a".into(), "b".into(), "c".into()]);
        let hp = Hyperparams {
            k: 1,
            alpha: 50.0,
            beta: 0.1,
        };
        let schedule = SamplingSchedule {
            sweeps: 3,
            burn_in: 0,
            thin: 1,
        };
        let outcome = fit(&corpus, &vocab, hp, 9, schedule).unwrap();
        let model = outcome.model;
        let expected = |n: f64| (n + 0.1) / (5.0 + 3.0 * 0.1);
        assert!((model.phi_at(0, 0) - expected(3.0)).abs() < 1e-15);
        assert!((model.phi_at(0, 1) - expected(1.0)).abs() < 1e-15);
        assert!((model.phi_at(0, 2) - expected(1.0)).abs() < 1e-15);
        assert!(model.theta.iter().all(|&t| t == 1.0));
    }

    #[test]
    fn fit_rejects_bad_schedules() {
        let corpus = corpus_from_tokens(&[vec![0, 1]]);
        let vocab = Vocabulary::from_terms(["a".into(), "b".into()]);
        let hp: Hyperparams<f64> = Hyperparams::with_defaults(2);
        for schedule in [
            SamplingSchedule { sweeps: 5, burn_in: 5, thin: 1 },
            SamplingSchedule { sweeps: 5, burn_in: 0, thin: 0 },
            SamplingSchedule { sweeps: 10, burn_in: 8, thin: 5 },
        ] {
            assert!(fit(&corpus, &vocab, hp, 1, schedule).is_err(), "{schedule:?}");
        }
    }

    #[test]
    fn log_likelihood_is_invariant_under_relabeling() {
        let corpus = corpus_from_tokens(&[vec![0, 1, 2, 0], vec![2, 1, 1]]);
        let hp = Hyperparams {
            k: 3,
            alpha: 0.7,
            beta: 0.2,
        };
        let z = vec![vec![0, 1, 2, 2], vec![0, 0, 1]];
        let state = SamplerState::from_assignments(&corpus, hp, z.clone(), 0).unwrap();

        // Relabel 0 -> 2, 1 -> 0, 2 -> 1.
        let perm = [2u32, 0, 1];
        let z_relabeled: Vec<Vec<u32>> = z
            .iter()
            .map(|zd| zd.iter().map(|&t| perm[t as usize]).collect())
            .collect();
        let relabeled = SamplerState::from_assignments(&corpus, hp, z_relabeled, 0).unwrap();

        let a: f64 = state.log_likelihood();
        let b: f64 = relabeled.log_likelihood();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        assert!(a.is_finite());
    }

    #[test]
    fn log_likelihood_single_token_closed_form() {
        // One token, one topic: the assignment side contributes nothing
        // and the token side telescopes to ln(beta) - ln(V*beta).
        let corpus = corpus_from_tokens(&[vec![0]]);
        let hp = Hyperparams {
            k: 1,
            alpha: 2.0,
            beta: 0.1,
        };
        let state = SamplerState::from_assignments(&corpus, hp, vec![vec![0]], 0).unwrap();
        let expected = 0.1f64.ln() - 0.1f64.ln();
        let got: f64 = state.log_likelihood();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn averaged_fit_rows_are_stochastic() {
        let corpus = corpus_from_tokens(&[vec![0, 1, 2, 1, 0], vec![2, 0, 1], vec![1, 1, 2]]);
        let vocab = Vocabulary::from_terms(["a".into(), "b".into(), "c".into()]);
        let hp: Hyperparams<f64> = Hyperparams::with_defaults(3);
        let schedule = SamplingSchedule {
            sweeps: 30,
            burn_in: 10,
            thin: 2,
        };
        let model = fit(&corpus, &vocab, hp, 21, schedule).unwrap().model;
        for d in 0..model.num_docs() {
            let sum: f64 = model.theta_row(d).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
        for t in 0..model.k() {
            let sum: f64 = model.phi_row(t).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
        assert!(model.phi.iter().chain(model.theta.iter()).all(|&x| x > 0.0));
    }

    #[test]
    fn fit_is_bit_reproducible() {
        let corpus = corpus_from_tokens(&[vec![0, 1, 2, 3], vec![3, 2, 1, 0], vec![0, 2]]);
        let vocab = Vocabulary::from_terms(
            ["a", "b", "c", "d"].iter().map(|s| s.to_string()),
        );
        let hp: Hyperparams<f64> = Hyperparams::with_defaults(2);
        let schedule = SamplingSchedule {
            sweeps: 25,
            burn_in: 5,
            thin: 1,
        };
        let a = fit(&corpus, &vocab, hp, 99, schedule).unwrap().model;
        let b = fit(&corpus, &vocab, hp, 99, schedule).unwrap().model;
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = fit(&corpus, &vocab, hp, 100, schedule).unwrap().model;
        assert_ne!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
    }

    #[test]
    fn permute_topics_round_trips() {
        let corpus = corpus_from_tokens(&[vec![0, 1, 2], vec![2, 2, 1]]);
        let vocab = Vocabulary::from_terms(["a".into(), "b".into(), "c".into()]);
        let hp: Hyperparams<f64> = Hyperparams::with_defaults(3);
        let schedule = SamplingSchedule {
            sweeps: 10,
            burn_in: 0,
            thin: 1,
        };
        let model = fit(&corpus, &vocab, hp, 4, schedule).unwrap().model;
        let perm = [2usize, 0, 1];
        let permuted = model.permute_topics(&perm);
        assert_eq!(permuted.phi_row(2), model.phi_row(0));
        assert_eq!(permuted.theta[2], model.theta[0 * 3 + 0]);
        let inverse = [1usize, 2, 0];
        assert_eq!(permuted.permute_topics(&inverse), model);
    }

    #[test]
    fn model_save_load_round_trip() {
        let corpus = corpus_from_tokens(&[vec![0, 1], vec![1, 0]]);
        let vocab = Vocabulary::from_terms(["a".into(), "b".into()]);
        let hp: Hyperparams<f64> = Hyperparams::with_defaults(2);
        let schedule = SamplingSchedule {
            sweeps: 5,
            burn_in: 0,
            thin: 1,
        };
        let model = fit(&corpus, &vocab, hp, 1, schedule).unwrap().model;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save(&path).unwrap();
        let loaded: TopicModel<f64> = TopicModel::load(&path).unwrap();
        assert_eq!(loaded, model);
    }
}
