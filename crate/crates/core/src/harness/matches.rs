use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::baselines::{bbr_model, map_model, thompson_model, SampleBank};
use crate::error::{Error, Result};
use crate::game::{expected_payoff_unchecked, GameSpec, OpponentStrategy, OurStrategy};
use crate::harness::config::AgentKind;
use crate::posterior::{DirichletPrior, ObservationCounts, PosteriorConfig};
use crate::respond::{best_response, meta_agent_step_with, BestResponder, Responder};

/// Name of the generator behind every random stream in the harness.
pub const RNG_NAME: &str = "ChaCha8";

/// Independent random streams per simulated opponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Truth = 0,
    Deal = 1,
    Bank = 2,
    Map = 3,
    Thompson = 4,
}

const STREAMS_PER_OPPONENT: u64 = 8;

/// Stream `purpose` for `opponent`, derived only from `(seed, opponent, purpose)`.
pub fn substream(seed: u64, opponent: u64, purpose: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(opponent * STREAMS_PER_OPPONENT + purpose as u64);
    rng
}

/// A player that picks a strategy from the public action counts seen so far.
pub trait Agent {
    fn kind(&self) -> AgentKind;
    fn strategy(&mut self, counts: &ObservationCounts) -> Result<OurStrategy>;
}

/// Best response to the exact posterior mean.
pub struct EbbrAgent {
    game: GameSpec,
    prior: DirichletPrior,
    config: PosteriorConfig,
}

impl EbbrAgent {
    pub fn new(game: GameSpec, prior: DirichletPrior, config: PosteriorConfig) -> Self {
        Self {
            game,
            prior,
            config,
        }
    }
}

impl Agent for EbbrAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::Ebbr
    }

    fn strategy(&mut self, counts: &ObservationCounts) -> Result<OurStrategy> {
        meta_agent_step_with(
            &self.game,
            &self.prior,
            counts,
            &BestResponder,
            &self.config,
        )
    }
}

/// BBR, MAP or Thompson over a fixed sample bank.
pub struct SamplingAgent {
    kind: AgentKind,
    game: GameSpec,
    bank: SampleBank,
    rng: ChaCha8Rng,
}

impl SamplingAgent {
    pub fn new(kind: AgentKind, game: GameSpec, bank: SampleBank, rng: ChaCha8Rng) -> Result<Self> {
        if !kind.uses_samples() {
            return Err(Error::Config(format!("{kind} does not use a sample bank")));
        }
        Ok(Self {
            kind,
            game,
            bank,
            rng,
        })
    }
}

impl Agent for SamplingAgent {
    fn kind(&self) -> AgentKind {
        self.kind
    }

    fn strategy(&mut self, counts: &ObservationCounts) -> Result<OurStrategy> {
        let pi = self.game.pi();
        let model = match self.kind {
            AgentKind::Bbr => bbr_model(&self.bank, pi, counts)?,
            AgentKind::Map => map_model(&self.bank, pi, counts, &mut self.rng)?,
            _ => thompson_model(&self.bank, pi, counts, &mut self.rng)?,
        };
        BestResponder.respond(&self.game, &model)
    }
}

/// Plays one strategy regardless of observations (Nash, or the omniscient
/// best response).
pub struct StaticAgent {
    kind: AgentKind,
    strategy: OurStrategy,
}

impl StaticAgent {
    pub fn new(kind: AgentKind, strategy: OurStrategy) -> Self {
        Self { kind, strategy }
    }

    /// Best response computed from the opponent's actual strategy.
    pub fn full_best_response(game: &GameSpec, true_opp: &OpponentStrategy) -> Result<Self> {
        let (s, _) = best_response(game, true_opp)?;
        Ok(Self::new(AgentKind::FullBr, s))
    }
}

impl Agent for StaticAgent {
    fn kind(&self) -> AgentKind {
        self.kind
    }

    fn strategy(&mut self, _counts: &ObservationCounts) -> Result<OurStrategy> {
        Ok(self.strategy.clone())
    }
}

/// Outcome of one agent against one opponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub agent: AgentKind,
    pub opponent: usize,
    /// Average expected payoff per hand, in chips.
    pub mean_payoff: f64,
    pub rounds: u32,
    /// The agent's model went non-finite; the payoff is NaN and the match is
    /// left out of averages.
    pub nonfinite: bool,
}

fn sample_index<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (k, &x) in p.iter().enumerate() {
        cum += x;
        if u < cum {
            return k;
        }
    }
    p.iter().rposition(|&x| x > 0.0).unwrap_or(0)
}

/// Play `rounds` hands against `true_opp`.
///
/// Before each hand the agent picks a strategy from the counts so far and is
/// credited with that strategy's expected payoff against `true_opp`. The hand
/// is then dealt from `rng` and only the opponent's action is recorded; the
/// private state and the realized payoff stay hidden. With `rounds == 0` the
/// initial strategy is scored once.
pub fn run_match<R: Rng + ?Sized>(
    g: &GameSpec,
    agent: &mut dyn Agent,
    true_opp: &OpponentStrategy,
    rounds: u32,
    opponent: usize,
    rng: &mut R,
) -> Result<MatchResult> {
    g.check_opponent(true_opp)?;
    let mut counts = ObservationCounts::zeros(g.n_opp_actions());
    let hands = rounds.max(1);
    let mut total = 0.0;
    for _ in 0..hands {
        let strategy = match agent.strategy(&counts) {
            Ok(s) => s,
            Err(Error::NonFinite) => {
                return Ok(MatchResult {
                    agent: agent.kind(),
                    opponent,
                    mean_payoff: f64::NAN,
                    rounds,
                    nonfinite: true,
                })
            }
            Err(e) => return Err(e),
        };
        g.check_ours(&strategy)?;
        total += expected_payoff_unchecked(g, &strategy, true_opp);
        if rounds > 0 {
            let state = sample_index(g.pi(), rng);
            let action = sample_index(true_opp.row(state), rng);
            counts.record(action);
        }
    }
    Ok(MatchResult {
        agent: agent.kind(),
        opponent,
        mean_payoff: total / hands as f64,
        rounds,
        nonfinite: false,
    })
}
