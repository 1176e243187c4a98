use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{sample_opponent, SampleBank};
use crate::error::{Error, Result};
use crate::game::{make_motivating_game, motivating_nash_ours, GameSpec};
use crate::harness::config::{AgentKind, ExperimentConfig, GameId};
use crate::harness::matches::{
    run_match, substream, Agent, EbbrAgent, MatchResult, SamplingAgent, StaticAgent, Stream,
    RNG_NAME,
};
use crate::posterior::{
    posterior_mean_multi_obs_with, posterior_mean_single_obs_with, BetaMode, DirichletPrior,
    ObservationCounts, PosteriorConfig,
};

/// Format with six significant digits, in the style of C's `%g`.
pub fn fmt_sig6(x: f64) -> String {
    const SIG: i32 = 6;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // Exponent after rounding to SIG digits.
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..SIG).contains(&exp) {
        let decimals = (SIG - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mantissa), sign, exp.abs())
    }
}

fn build_game(id: GameId) -> GameSpec {
    match id {
        GameId::Motivating => make_motivating_game(),
    }
}

/// Summary of one agent at one round setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentSummary {
    pub agent: AgentKind,
    pub rounds: u32,
    pub opponents: usize,
    pub mean_payoff: f64,
    pub ci95: f64,
    pub nonfinite_rate: f64,
    pub seed: u64,
    /// Per-opponent mean payoffs in opponent order (NaN where flagged).
    #[serde(skip)]
    pub payoffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableReport {
    pub config: ExperimentConfig,
    pub rows: Vec<AgentSummary>,
}

impl TableReport {
    pub fn get(&self, agent: AgentKind, rounds: u32) -> Option<&AgentSummary> {
        self.rows
            .iter()
            .find(|r| r.agent == agent && r.rounds == rounds)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "agent",
            "rounds",
            "opponents",
            "mean_payoff",
            "ci95",
            "nonfinite_rate",
            "seed",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.agent.name().to_string(),
                r.rounds.to_string(),
                r.opponents.to_string(),
                fmt_sig6(r.mean_payoff),
                fmt_sig6(r.ci95),
                fmt_sig6(r.nonfinite_rate),
                r.seed.to_string(),
            ])?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
            .expect("csv output is utf-8");
        Ok(format!(
            "# rng={RNG_NAME} streams=seed/opponent/purpose\n{body}"
        ))
    }
}

/// Sample mean and 95% normal-approximation half width.
pub fn mean_ci95(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, 1.96 * (var / n as f64).sqrt())
}

fn make_agent(
    kind: AgentKind,
    game: &GameSpec,
    prior: &DirichletPrior,
    true_opp: &crate::game::OpponentStrategy,
    bank: Option<&SampleBank>,
    config: &ExperimentConfig,
    opponent: u64,
) -> Result<Box<dyn Agent>> {
    let post = PosteriorConfig {
        mode: config.beta_mode.unwrap_or_default(),
        ..PosteriorConfig::default()
    };
    Ok(match kind {
        AgentKind::Ebbr => Box::new(EbbrAgent::new(game.clone(), prior.clone(), post)),
        AgentKind::Bbr | AgentKind::Map | AgentKind::Thompson => {
            let stream = if kind == AgentKind::Map {
                Stream::Map
            } else {
                Stream::Thompson
            };
            Box::new(SamplingAgent::new(
                kind,
                game.clone(),
                bank.expect("bank drawn for sampling agents").clone(),
                substream(config.seed, opponent, stream),
            )?)
        }
        AgentKind::FullBr => Box::new(StaticAgent::full_best_response(game, true_opp)?),
        AgentKind::Nash => match config.game {
            GameId::Motivating => {
                Box::new(StaticAgent::new(AgentKind::Nash, motivating_nash_ours()))
            }
        },
    })
}

/// All agents against opponent `index` at one round setting. Every agent
/// faces the same opponent and the same dealt hands.
fn play_opponent(
    game: &GameSpec,
    prior: &DirichletPrior,
    config: &ExperimentConfig,
    rounds: u32,
    index: usize,
) -> Result<Vec<MatchResult>> {
    let opponent = index as u64;
    let true_opp = sample_opponent(prior, &mut substream(config.seed, opponent, Stream::Truth));
    let bank = if config.agents.iter().any(|a| a.uses_samples()) {
        Some(SampleBank::draw(
            prior,
            config.samples_k,
            &mut substream(config.seed, opponent, Stream::Bank),
        )?)
    } else {
        None
    };
    config
        .agents
        .iter()
        .map(|&kind| {
            let mut agent = make_agent(
                kind,
                game,
                prior,
                &true_opp,
                bank.as_ref(),
                config,
                opponent,
            )?;
            let mut deal = substream(config.seed, opponent, Stream::Deal);
            run_match(game, agent.as_mut(), &true_opp, rounds, index, &mut deal)
        })
        .collect()
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Play every configured agent against freshly sampled opponents for each
/// round setting.
///
/// Opponent `k` and everything it draws come from substreams keyed by
/// `(seed, k)`, and results are reduced in opponent order, so the report
/// depends only on the configuration, not on the worker count.
pub fn run_table(config: &ExperimentConfig) -> Result<TableReport> {
    config.validate()?;
    let game = build_game(config.game);
    let prior = DirichletPrior::new(config.alpha.clone())?;
    if prior.n_states() != game.n_states() || prior.n_actions() != game.n_opp_actions() {
        return Err(Error::Config("alpha does not match the game".into()));
    }
    let mut rows = Vec::new();
    for &rounds in &config.rounds {
        let opponents = config.opponents_for(rounds);
        let per_opponent: Vec<Vec<MatchResult>> = with_pool(config.workers, || {
            (0..opponents)
                .into_par_iter()
                .map(|k| play_opponent(&game, &prior, config, rounds, k))
                .collect::<Result<Vec<_>>>()
        })??;
        for (a, &agent) in config.agents.iter().enumerate() {
            let payoffs: Vec<f64> = per_opponent.iter().map(|r| r[a].mean_payoff).collect();
            let finite: Vec<f64> = payoffs.iter().copied().filter(|x| !x.is_nan()).collect();
            let (mean, ci95) = mean_ci95(&finite);
            rows.push(AgentSummary {
                agent,
                rounds,
                opponents,
                mean_payoff: mean,
                ci95,
                nonfinite_rate: (opponents - finite.len()) as f64 / opponents as f64,
                seed: config.seed,
                payoffs,
            });
        }
    }
    Ok(TableReport {
        config: config.clone(),
        rows,
    })
}

/// Which posterior-timing protocol to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TimingProtocol {
    /// One sighting of the big bet; every pseudo-count drawn from `U{1, n}`.
    SingleObservation,
    /// Pseudo-counts fixed by the config; both action counts drawn from `U{1, n}`.
    MultiObservation,
}

impl TimingProtocol {
    pub fn name(self) -> &'static str {
        match self {
            TimingProtocol::SingleObservation => "single",
            TimingProtocol::MultiObservation => "multi",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub protocol: TimingProtocol,
    pub n: u64,
    pub beta_mode: BetaMode,
    pub trials: usize,
    pub mean_time_ms: f64,
    pub nonfinite_rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub rows: Vec<TimingRow>,
}

impl TimingReport {
    pub fn get(&self, n: u64, mode: BetaMode) -> Option<&TimingRow> {
        self.rows.iter().find(|r| r.n == n && r.beta_mode == mode)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "protocol",
            "n",
            "beta_mode",
            "trials",
            "mean_time_ms",
            "nonfinite_rate",
            "seed",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.protocol.name().to_string(),
                r.n.to_string(),
                match r.beta_mode {
                    BetaMode::Log => "log".to_string(),
                    BetaMode::Direct => "direct".to_string(),
                },
                r.trials.to_string(),
                fmt_sig6(r.mean_time_ms),
                fmt_sig6(r.nonfinite_rate),
                r.seed.to_string(),
            ])?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
            .expect("csv output is utf-8");
        Ok(format!("# rng={RNG_NAME} streams=seed/size\n{body}"))
    }
}

enum Trial {
    Single(DirichletPrior),
    Multi(ObservationCounts),
}

/// Time posterior evaluations on random instances and count non-finite
/// results, for each size and each requested beta mode. Both modes see the
/// same instances.
pub fn run_timing(config: &ExperimentConfig, protocol: TimingProtocol) -> Result<TimingReport> {
    let game = build_game(config.game);
    let pi = game.pi().to_vec();
    let base_prior = DirichletPrior::new(config.alpha.clone())?;
    let modes = match config.beta_mode {
        Some(m) => vec![m],
        None => vec![BetaMode::Log, BetaMode::Direct],
    };
    let mut rows = Vec::new();
    for &n in &config.sizes {
        if n == 0 {
            return Err(Error::Config("timing sizes must be positive".into()));
        }
        let mut rng = substream(config.seed, n, Stream::Truth);
        let trials: Vec<Trial> = (0..config.trials)
            .map(|_| match protocol {
                TimingProtocol::SingleObservation => {
                    let alpha = (0..2)
                        .map(|_| (0..2).map(|_| rng.random_range(1..=n) as f64).collect())
                        .collect();
                    Trial::Single(DirichletPrior::new(alpha).expect("positive"))
                }
                TimingProtocol::MultiObservation => Trial::Multi(ObservationCounts::new(vec![
                    rng.random_range(1..=n),
                    rng.random_range(1..=n),
                ])),
            })
            .collect();
        for &mode in &modes {
            let post = PosteriorConfig {
                horizon: 2 * n,
                max_terms: u128::MAX,
                mode,
            };
            let mut nonfinite = 0usize;
            let start = Instant::now();
            for t in &trials {
                let r = match t {
                    Trial::Single(prior) => posterior_mean_single_obs_with(prior, &pi, 0, mode),
                    Trial::Multi(obs) => {
                        posterior_mean_multi_obs_with(&base_prior, &pi, obs, &post)
                    }
                };
                match r {
                    Ok(_) => {}
                    Err(Error::NonFinite) => nonfinite += 1,
                    Err(e) => return Err(e),
                }
            }
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let count = trials.len().max(1);
            rows.push(TimingRow {
                protocol,
                n,
                beta_mode: mode,
                trials: trials.len(),
                mean_time_ms: elapsed / count as f64,
                nonfinite_rate: nonfinite as f64 / count as f64,
                seed: config.seed,
            });
        }
    }
    Ok(TimingReport { rows })
}
