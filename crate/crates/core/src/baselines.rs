//! Sampling approximations to the Bayesian response.
//!
//! A bank of `K` opponent strategies is drawn once from the prior. Because
//! the samples come from the prior, each one's posterior weight is just the
//! likelihood of the observed public actions. BBR averages the bank under
//! those weights, MAP takes the heaviest sample and Thompson draws one.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::game::OpponentStrategy;
use crate::logspace::normalize_log_weights;
use crate::posterior::{DirichletPrior, ObservationCounts};

/// Draw from `Dirichlet(alpha)` by normalizing independent `Gamma(alpha_i, 1)` draws.
pub fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let gammas = alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).map_err(|_| Error::NonPositiveArgument(a)))
        .collect::<Result<Vec<_>>>()?;
    loop {
        let y: Vec<f64> = gammas.iter().map(|g| g.sample(rng)).collect();
        let total: f64 = y.iter().sum();
        // An all-zero draw has probability zero but can happen after underflow
        // for tiny shapes.
        if total > 0.0 {
            return Ok(y.into_iter().map(|v| v / total).collect());
        }
    }
}

/// One opponent strategy drawn from the prior, row by row.
pub fn sample_opponent<R: Rng + ?Sized>(prior: &DirichletPrior, rng: &mut R) -> OpponentStrategy {
    let rows = prior
        .alpha()
        .iter()
        .map(|row| sample_dirichlet(row, rng).expect("prior parameters are positive"))
        .collect();
    OpponentStrategy::new(rows).expect("Dirichlet draws are distributions")
}

/// Strategies sampled from the prior and kept fixed for a whole match.
#[derive(Debug, Clone)]
pub struct SampleBank {
    samples: Vec<OpponentStrategy>,
}

impl SampleBank {
    pub fn draw<R: Rng + ?Sized>(prior: &DirichletPrior, k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptySupport);
        }
        Ok(Self {
            samples: (0..k).map(|_| sample_opponent(prior, rng)).collect(),
        })
    }

    pub fn from_samples(samples: Vec<OpponentStrategy>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySupport);
        }
        Ok(Self { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[OpponentStrategy] {
        &self.samples
    }

    /// Normalized posterior weight of each sample.
    pub fn weights(&self, pi: &[f64], obs: &ObservationCounts) -> Result<Vec<f64>> {
        let log_w: Vec<f64> = self
            .samples
            .iter()
            .map(|q| observation_likelihood(q, pi, obs))
            .collect();
        normalize_log_weights(&log_w).ok_or(Error::ImpossibleObservations)
    }
}

/// Log-likelihood of the public action counts: `sum_j theta_j ln(sum_i pi_i q_ij)`.
/// `-inf` when an observed action has zero probability.
pub fn observation_likelihood(q: &OpponentStrategy, pi: &[f64], obs: &ObservationCounts) -> f64 {
    q.action_marginals(pi)
        .iter()
        .zip(obs.theta())
        .filter(|(_, &t)| t > 0)
        .map(|(p, &t)| t as f64 * p.ln())
        .sum()
}

/// Likelihood-weighted average of the bank.
pub fn bbr_model(
    bank: &SampleBank,
    pi: &[f64],
    obs: &ObservationCounts,
) -> Result<OpponentStrategy> {
    let w = bank.weights(pi, obs)?;
    let first = &bank.samples[0];
    let mut rows = vec![vec![0.0; first.n_actions()]; first.n_states()];
    for (wk, q) in w.iter().zip(&bank.samples) {
        for (acc, row) in rows.iter_mut().zip(q.rows()) {
            for (a, x) in acc.iter_mut().zip(row) {
                *a += wk * x;
            }
        }
    }
    // Re-normalize away accumulated rounding.
    for row in &mut rows {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
    OpponentStrategy::new(rows)
}

/// A maximum-likelihood sample, ties broken uniformly at random.
pub fn map_model<R: Rng + ?Sized>(
    bank: &SampleBank,
    pi: &[f64],
    obs: &ObservationCounts,
    rng: &mut R,
) -> Result<OpponentStrategy> {
    let log_w: Vec<f64> = bank
        .samples
        .iter()
        .map(|q| observation_likelihood(q, pi, obs))
        .collect();
    let best = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return Err(Error::ImpossibleObservations);
    }
    let ties: Vec<usize> = (0..log_w.len()).filter(|&k| log_w[k] == best).collect();
    let pick = ties[rng.random_range(0..ties.len())];
    Ok(bank.samples[pick].clone())
}

/// One sample drawn in proportion to its posterior weight.
pub fn thompson_model<R: Rng + ?Sized>(
    bank: &SampleBank,
    pi: &[f64],
    obs: &ObservationCounts,
    rng: &mut R,
) -> Result<OpponentStrategy> {
    let w = bank.weights(pi, obs)?;
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (k, wk) in w.iter().enumerate() {
        cum += wk;
        if u < cum {
            return Ok(bank.samples[k].clone());
        }
    }
    // u landed in the rounding gap above the final cumulative weight.
    let last = w
        .iter()
        .rposition(|&x| x > 0.0)
        .expect("weights are normalized");
    Ok(bank.samples[last].clone())
}
