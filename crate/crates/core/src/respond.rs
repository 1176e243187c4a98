//! Response functions and the Bayesian meta-agent.
//!
//! Our payoff is linear in the opponent's conditional action probabilities,
//! so the payoff of any fixed strategy against a distribution over opponent
//! strategies equals its payoff against the distribution's mean. Responding
//! to the posterior therefore reduces to responding to the posterior mean.

use crate::error::{Error, Result};
use crate::game::{expected_payoff_unchecked, GameSpec, OpponentStrategy, OurStrategy};
use crate::posterior::{
    posterior_mean_multi_obs_with, DirichletPrior, ObservationCounts, PosteriorConfig,
};

/// Maps an opponent model to a strategy for us.
pub trait Responder {
    fn respond(&self, game: &GameSpec, model: &OpponentStrategy) -> Result<OurStrategy>;
}

/// Full best response; ties go to the lowest action index.
#[derive(Debug, Clone, Copy, Default)]
pub struct BestResponder;

impl Responder for BestResponder {
    fn respond(&self, game: &GameSpec, model: &OpponentStrategy) -> Result<OurStrategy> {
        best_response(game, model).map(|(s, _)| s)
    }
}

/// Plays the same strategy whatever the model says.
#[derive(Debug, Clone)]
pub struct FixedResponder(pub OurStrategy);

impl Responder for FixedResponder {
    fn respond(&self, game: &GameSpec, _model: &OpponentStrategy) -> Result<OurStrategy> {
        game.check_ours(&self.0)?;
        Ok(self.0.clone())
    }
}

/// Best response to `model` and its expected value.
///
/// After seeing action `j`, the states are weighted by `pi_i q_ij` and we
/// pick the action with the highest weighted payoff. An action the model
/// never plays gets our lowest-index action.
pub fn best_response(g: &GameSpec, model: &OpponentStrategy) -> Result<(OurStrategy, f64)> {
    g.check_opponent(model)?;
    let choice: Vec<usize> = (0..g.n_opp_actions())
        .map(|j| {
            let mut best = 0;
            let mut best_val = f64::NEG_INFINITY;
            for k in 0..g.n_our_actions() {
                // Unnormalized: dividing by P(j) does not change the argmax.
                let v: f64 = (0..g.n_states())
                    .map(|i| g.pi()[i] * model.prob(i, j) * g.payoff(i, j, k))
                    .sum();
                if v > best_val {
                    best = k;
                    best_val = v;
                }
            }
            best
        })
        .collect();
    let ours = OurStrategy::pure(&choice, g.n_our_actions());
    let value = expected_payoff_unchecked(g, &ours, model);
    Ok((ours, value))
}

/// Finite distribution over opponent strategies.
#[derive(Debug, Clone)]
pub struct StrategyDistribution {
    support: Vec<(f64, OpponentStrategy)>,
}

impl StrategyDistribution {
    pub fn new(support: Vec<(f64, OpponentStrategy)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        let weights: Vec<f64> = support.iter().map(|(w, _)| *w).collect();
        crate::game::check_distribution(&weights, "strategy weights")?;
        let (n, m) = (support[0].1.n_states(), support[0].1.n_actions());
        if support
            .iter()
            .any(|(_, s)| s.n_states() != n || s.n_actions() != m)
        {
            return Err(Error::Dimension(
                "support strategies differ in shape".into(),
            ));
        }
        Ok(Self { support })
    }

    pub fn support(&self) -> &[(f64, OpponentStrategy)] {
        &self.support
    }
}

/// Probability-weighted average of the support strategies.
pub fn mean_strategy(d: &StrategyDistribution) -> Result<OpponentStrategy> {
    let first = &d.support.first().ok_or(Error::EmptySupport)?.1;
    let (n, m) = (first.n_states(), first.n_actions());
    let mut rows = vec![vec![0.0; m]; n];
    for (w, s) in &d.support {
        for (acc, row) in rows.iter_mut().zip(s.rows()) {
            for (a, q) in acc.iter_mut().zip(row) {
                *a += w * q;
            }
        }
    }
    OpponentStrategy::new(rows)
}

/// One step of the meta-agent: recompute the posterior mean from the
/// original prior and all observations so far, then respond to it.
pub fn meta_agent_step(
    g: &GameSpec,
    prior: &DirichletPrior,
    cumulative_obs: &ObservationCounts,
    responder: &dyn Responder,
) -> Result<OurStrategy> {
    meta_agent_step_with(
        g,
        prior,
        cumulative_obs,
        responder,
        &PosteriorConfig::default(),
    )
}

pub fn meta_agent_step_with(
    g: &GameSpec,
    prior: &DirichletPrior,
    cumulative_obs: &ObservationCounts,
    responder: &dyn Responder,
    config: &PosteriorConfig,
) -> Result<OurStrategy> {
    let model = posterior_mean_multi_obs_with(prior, g.pi(), cumulative_obs, config)?;
    responder.respond(g, &model)
}

/// Stateful wrapper around [`meta_agent_step`] that keeps the running counts.
pub struct MetaAgent<R: Responder> {
    game: GameSpec,
    prior: DirichletPrior,
    counts: ObservationCounts,
    responder: R,
    config: PosteriorConfig,
}

impl<R: Responder> MetaAgent<R> {
    pub fn new(
        game: GameSpec,
        prior: DirichletPrior,
        responder: R,
        config: PosteriorConfig,
    ) -> Result<Self> {
        if prior.n_states() != game.n_states() || prior.n_actions() != game.n_opp_actions() {
            return Err(Error::Dimension("prior does not match the game".into()));
        }
        let counts = ObservationCounts::zeros(game.n_opp_actions());
        Ok(Self {
            game,
            prior,
            counts,
            responder,
            config,
        })
    }

    pub fn observe(&mut self, action: usize) {
        self.counts.record(action);
    }

    pub fn counts(&self) -> &ObservationCounts {
        &self.counts
    }

    /// Current posterior-mean model of the opponent.
    pub fn model(&self) -> Result<OpponentStrategy> {
        posterior_mean_multi_obs_with(&self.prior, self.game.pi(), &self.counts, &self.config)
    }

    pub fn strategy(&self) -> Result<OurStrategy> {
        meta_agent_step_with(
            &self.game,
            &self.prior,
            &self.counts,
            &self.responder,
            &self.config,
        )
    }
}
