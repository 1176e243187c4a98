//! Exact Bayesian best response in one-shot games where the opponent's
//! private state is never revealed.
//!
//! The opponent's conditional strategy has an independent Dirichlet prior per
//! private state. After observing only public actions, [`posterior`] computes
//! the exact posterior-mean strategy, and [`respond`] best-responds to it.
//! [`baselines`] holds the sampling approximations it is compared with and
//! [`harness`] runs the comparisons.

pub mod baselines;
pub mod betaprod;
pub mod composition;
pub mod error;
pub mod game;
pub mod harness;
pub mod logspace;
pub mod oracle;
pub mod posterior;
pub mod respond;
pub mod uniform;

pub use error::{Error, Result};
pub use game::{expected_payoff, make_motivating_game, GameSpec, OpponentStrategy, OurStrategy};
pub use posterior::{
    posterior_mean_multi_obs, posterior_mean_single_obs, BetaMode, DirichletPrior,
    ObservationCounts, PosteriorConfig,
};
pub use respond::{
    best_response, mean_strategy, meta_agent_step, BestResponder, Responder, StrategyDistribution,
};
