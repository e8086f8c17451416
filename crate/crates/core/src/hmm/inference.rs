//! Exact inference for [`HmmModel`]: likelihood, MAP decoding, smoothing and
//! ancestral sampling. All recursions run in natural-log space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{HmmModel, StochasticVector};
use crate::scalar::{log_sum_exp, safe_ln, strictly_better, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InferenceError {
    #[error("empty observation sequence")]
    EmptySequence,
    #[error("observation {symbol} at position {position} is out of range (model has {n_symbols} symbols)")]
    SymbolOutOfRange { symbol: usize, position: usize, n_symbols: usize },
    #[error("observation sequence has zero probability under the model")]
    ZeroProbability,
    #[error("sample length must be at least 1")]
    ZeroLength,
    #[error("unknown activity symbol {0:?}")]
    UnknownSymbol(String),
}

/// A decoded or sampled hidden-state sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatePath<T> {
    pub states: Vec<usize>,
    /// Natural-log joint probability of the states together with the
    /// observations they were decoded from (or sampled with).
    pub log_probability: T,
}

impl<T> StatePath<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Which per-step decoder to apply to an observation sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoder {
    #[default]
    Viterbi,
    Posterior,
}

impl std::str::FromStr for Decoder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "viterbi" => Ok(Decoder::Viterbi),
            "posterior" | "posterior-argmax" => Ok(Decoder::Posterior),
            other => Err(format!("unknown decoder {other:?} (expected viterbi or posterior)")),
        }
    }
}

impl<T: Scalar> HmmModel<T> {
    fn check_observations(&self, observations: &[usize]) -> Result<(), InferenceError> {
        if observations.is_empty() {
            return Err(InferenceError::EmptySequence);
        }
        let m = self.n_symbols();
        match observations.iter().enumerate().find(|(_, &o)| o >= m) {
            Some((position, &symbol)) => {
                Err(InferenceError::SymbolOutOfRange { symbol, position, n_symbols: m })
            }
            None => Ok(()),
        }
    }

    /// Log forward table with an arbitrary per-step emission score.
    pub(crate) fn forward_table_with<F>(&self, len: usize, emit: F) -> Vec<Vec<T>>
    where
        F: Fn(usize, usize) -> T,
    {
        let n = self.n_states();
        let mut alpha: Vec<Vec<T>> = Vec::with_capacity(len);
        alpha.push((0..n).map(|i| self.log_initial[i] + emit(i, 0)).collect());
        let mut scratch = vec![T::zero(); n];
        for t in 1..len {
            let prev = &alpha[t - 1];
            let row = (0..n)
                .map(|j| {
                    for (i, s) in scratch.iter_mut().enumerate() {
                        *s = prev[i] + self.log_a(i, j);
                    }
                    log_sum_exp(&scratch) + emit(j, t)
                })
                .collect();
            alpha.push(row);
        }
        alpha
    }

    fn backward_table(&self, observations: &[usize]) -> Vec<Vec<T>> {
        let n = self.n_states();
        let len = observations.len();
        let mut beta = vec![vec![T::zero(); n]; len];
        let mut scratch = vec![T::zero(); n];
        for t in (0..len - 1).rev() {
            let o = observations[t + 1];
            for i in 0..n {
                for (j, s) in scratch.iter_mut().enumerate() {
                    *s = self.log_a(i, j) + self.log_b(j, o) + beta[t + 1][j];
                }
                beta[t][i] = log_sum_exp(&scratch);
            }
        }
        beta
    }

    /// `ln P(O | model)`, summed over every hidden path.
    pub fn forward_likelihood(&self, observations: &[usize]) -> Result<T, InferenceError> {
        self.check_observations(observations)?;
        let alpha = self.forward_table_with(observations.len(), |i, t| self.log_b(i, observations[t]));
        Ok(log_sum_exp(alpha.last().expect("non-empty")))
    }

    /// Max-product recursion. At every step the predecessor (and the final
    /// state) with the highest score wins, the lowest index on ties. Scores
    /// within [`Scalar::tie_tolerance`] of each other are ties, so among
    /// equally probable paths the one chosen is smallest comparing from the
    /// last step backwards.
    pub(crate) fn viterbi_with<F>(&self, len: usize, emit: F) -> StatePath<T>
    where
        F: Fn(usize, usize) -> T,
    {
        let n = self.n_states();
        let mut delta: Vec<T> = (0..n).map(|i| self.log_initial[i] + emit(i, 0)).collect();
        let mut back: Vec<Vec<usize>> = Vec::with_capacity(len);
        let mut next = vec![T::zero(); n];
        for t in 1..len {
            let mut ptr = vec![0usize; n];
            for j in 0..n {
                let mut best = 0;
                let mut best_score = delta[0] + self.log_a(0, j);
                for (i, &d) in delta.iter().enumerate().skip(1) {
                    let s = d + self.log_a(i, j);
                    if strictly_better(s, best_score) {
                        best = i;
                        best_score = s;
                    }
                }
                ptr[j] = best;
                next[j] = best_score + emit(j, t);
            }
            back.push(ptr);
            std::mem::swap(&mut delta, &mut next);
        }
        let mut last = 0;
        for i in 1..n {
            if strictly_better(delta[i], delta[last]) {
                last = i;
            }
        }
        let log_probability = delta[last];
        let mut states = vec![0usize; len];
        states[len - 1] = last;
        for t in (1..len).rev() {
            states[t - 1] = back[t - 1][states[t]];
        }
        StatePath { states, log_probability }
    }

    /// Most probable hidden path for the observations.
    pub fn viterbi_decode(&self, observations: &[usize]) -> Result<StatePath<T>, InferenceError> {
        self.check_observations(observations)?;
        Ok(self.viterbi_with(observations.len(), |i, t| self.log_b(i, observations[t])))
    }

    /// Smoothed per-step state distributions `P(Q_t = i | O)`.
    pub fn posterior_marginals(
        &self,
        observations: &[usize],
    ) -> Result<Vec<StochasticVector<T>>, InferenceError> {
        self.check_observations(observations)?;
        let alpha = self.forward_table_with(observations.len(), |i, t| self.log_b(i, observations[t]));
        if log_sum_exp(alpha.last().expect("non-empty")) == T::neg_infinity() {
            return Err(InferenceError::ZeroProbability);
        }
        let beta = self.backward_table(observations);
        let out = alpha
            .iter()
            .zip(&beta)
            .map(|(a, b)| {
                let joint: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x + y).collect();
                // normalise per step; equals the global likelihood up to rounding
                let z = log_sum_exp(&joint);
                StochasticVector::new_unchecked(joint.iter().map(|&g| (g - z).exp()).collect())
            })
            .collect();
        Ok(out)
    }

    /// Per-step argmax of the smoothed marginals.
    pub fn posterior_decode(&self, observations: &[usize]) -> Result<StatePath<T>, InferenceError> {
        let states: Vec<usize> = self.posterior_marginals(observations)?.iter().map(|g| g.argmax()).collect();
        let log_probability = self.path_log_probability(&states, observations)?;
        Ok(StatePath { states, log_probability })
    }

    pub fn decode(&self, observations: &[usize], decoder: Decoder) -> Result<StatePath<T>, InferenceError> {
        match decoder {
            Decoder::Viterbi => self.viterbi_decode(observations),
            Decoder::Posterior => self.posterior_decode(observations),
        }
    }

    /// `ln P(states, observations)` for one explicit path.
    pub fn path_log_probability(&self, states: &[usize], observations: &[usize]) -> Result<T, InferenceError> {
        self.check_observations(observations)?;
        assert_eq!(states.len(), observations.len(), "path and observations differ in length");
        let mut lp = self.log_initial[states[0]] + self.log_b(states[0], observations[0]);
        for t in 1..states.len() {
            lp = lp + self.log_a(states[t - 1], states[t]) + self.log_b(states[t], observations[t]);
        }
        Ok(lp)
    }

    /// Draws a state path (from `Π`, then `A`) and its symbols (from `B`).
    /// Deterministic in `(model, length, seed)`.
    pub fn sample_path(&self, length: usize, seed: u64) -> Result<(StatePath<T>, Vec<usize>), InferenceError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_path_with(length, &mut rng)
    }

    /// As [`HmmModel::sample_path`], drawing from a caller-supplied generator.
    pub fn sample_path_with<R: Rng + ?Sized>(
        &self,
        length: usize,
        rng: &mut R,
    ) -> Result<(StatePath<T>, Vec<usize>), InferenceError> {
        if length == 0 {
            return Err(InferenceError::ZeroLength);
        }
        let mut states = Vec::with_capacity(length);
        let mut symbols = Vec::with_capacity(length);
        let mut state = draw(self.initial().entries(), rng);
        let mut lp = safe_ln(self.initial()[state]);
        for t in 0..length {
            if t > 0 {
                let prev = state;
                state = draw(self.transition().row(prev).entries(), rng);
                lp = lp + self.log_a(prev, state);
            }
            let symbol = draw(self.emission().row(state).entries(), rng);
            lp = lp + self.log_b(state, symbol);
            states.push(state);
            symbols.push(symbol);
        }
        Ok((StatePath { states, log_probability: lp }, symbols))
    }
}

/// Inverse-CDF draw from a categorical distribution.
fn draw<T: Scalar, R: Rng + ?Sized>(probs: &[T], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        let p = p.as_f64();
        if p > 0.0 {
            last_positive = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    // rounding left the cumulative sum just under 1
    last_positive
}
