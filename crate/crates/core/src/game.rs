//! One-shot games with a hidden opponent state.
//!
//! Chance deals the opponent one of `n` private states with probabilities
//! `pi`. The opponent then takes one of `m` public actions, and we respond
//! with one of `k` actions after seeing only the public action. Payoffs are
//! stored from our side of the table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for "sums to one" checks on probability vectors.
pub const PROB_TOL: f64 = 1e-12;

pub(crate) fn check_distribution(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidProbability(format!("{what} is empty")));
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite() || **x < 0.0 || **x > 1.0) {
        return Err(Error::InvalidProbability(format!(
            "{what} has entry {x} outside [0, 1]"
        )));
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidProbability(format!("{what} sums to {s}")));
    }
    Ok(())
}

fn check_rows(rows: &[Vec<f64>], what: &str) -> Result<()> {
    let width = rows.first().map(Vec::len).unwrap_or(0);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(Error::Dimension(format!(
                "{what} row {i} has {} entries, expected {width}",
                r.len()
            )));
        }
        check_distribution(r, &format!("{what} row {i}"))?;
    }
    Ok(())
}

/// Conditional action probabilities of the opponent, `q[i][j] = P(action j | state i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct OpponentStrategy {
    q: Vec<Vec<f64>>,
}

impl OpponentStrategy {
    pub fn new(q: Vec<Vec<f64>>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::Dimension("opponent strategy has no states".into()));
        }
        check_rows(&q, "opponent strategy")?;
        Ok(Self { q })
    }

    /// Every state plays every action with equal probability.
    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Self {
            q: vec![vec![1.0 / n_actions as f64; n_actions]; n_states],
        }
    }

    pub fn n_states(&self) -> usize {
        self.q.len()
    }

    pub fn n_actions(&self) -> usize {
        self.q[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.q[state]
    }

    pub fn prob(&self, state: usize, action: usize) -> f64 {
        self.q[state][action]
    }

    /// Marginal probability of each public action under the state prior.
    pub fn action_marginals(&self, pi: &[f64]) -> Vec<f64> {
        (0..self.n_actions())
            .map(|j| pi.iter().zip(&self.q).map(|(p, row)| p * row[j]).sum())
            .collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for OpponentStrategy {
    type Error = Error;
    fn try_from(q: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(q)
    }
}

impl From<OpponentStrategy> for Vec<Vec<f64>> {
    fn from(s: OpponentStrategy) -> Self {
        s.q
    }
}

/// Our response: one distribution over our actions per observed opponent action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct OurStrategy {
    r: Vec<Vec<f64>>,
}

impl OurStrategy {
    pub fn new(r: Vec<Vec<f64>>) -> Result<Self> {
        if r.is_empty() {
            return Err(Error::Dimension("our strategy has no rows".into()));
        }
        check_rows(&r, "our strategy")?;
        Ok(Self { r })
    }

    /// Pure strategy: action `choice[j]` after observing opponent action `j`.
    pub fn pure(choice: &[usize], n_our_actions: usize) -> Self {
        let r = choice
            .iter()
            .map(|&k| {
                let mut row = vec![0.0; n_our_actions];
                row[k] = 1.0;
                row
            })
            .collect();
        Self { r }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.r
    }

    pub fn prob(&self, observed: usize, ours: usize) -> f64 {
        self.r[observed][ours]
    }

    /// The action index with all the mass after `observed`, if the row is pure.
    pub fn pure_action(&self, observed: usize) -> Option<usize> {
        let row = &self.r[observed];
        row.iter().position(|&p| p == 1.0)
    }
}

impl TryFrom<Vec<Vec<f64>>> for OurStrategy {
    type Error = Error;
    fn try_from(r: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(r)
    }
}

impl From<OurStrategy> for Vec<Vec<f64>> {
    fn from(s: OurStrategy) -> Self {
        s.r
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GameSpecDoc {
    pi: Vec<f64>,
    payoff: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    state_labels: Vec<String>,
    #[serde(default)]
    opp_action_labels: Vec<String>,
    #[serde(default)]
    our_action_labels: Vec<String>,
}

/// A one-shot game, payoffs to us indexed `payoff[state][opp_action][our_action]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameSpecDoc", into = "GameSpecDoc")]
pub struct GameSpec {
    pi: Vec<f64>,
    payoff: Vec<Vec<Vec<f64>>>,
    state_labels: Vec<String>,
    opp_action_labels: Vec<String>,
    our_action_labels: Vec<String>,
    max_abs_payoff: f64,
}

impl GameSpec {
    pub fn new(pi: Vec<f64>, payoff: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        Self::with_labels(pi, payoff, Vec::new(), Vec::new(), Vec::new())
    }

    pub fn with_labels(
        pi: Vec<f64>,
        payoff: Vec<Vec<Vec<f64>>>,
        state_labels: Vec<String>,
        opp_action_labels: Vec<String>,
        our_action_labels: Vec<String>,
    ) -> Result<Self> {
        check_distribution(&pi, "pi")?;
        let n = pi.len();
        if payoff.len() != n {
            return Err(Error::Dimension(format!(
                "payoff has {} states, pi has {n}",
                payoff.len()
            )));
        }
        let m = payoff[0].len();
        let k = payoff[0].first().map(Vec::len).unwrap_or(0);
        if m == 0 || k == 0 {
            return Err(Error::Dimension("payoff table is empty".into()));
        }
        let mut max_abs = 0.0f64;
        for (i, by_action) in payoff.iter().enumerate() {
            if by_action.len() != m {
                return Err(Error::Dimension(format!(
                    "payoff[{i}] has {} actions",
                    by_action.len()
                )));
            }
            for (j, ours) in by_action.iter().enumerate() {
                if ours.len() != k {
                    return Err(Error::Dimension(format!(
                        "payoff[{i}][{j}] has {} entries",
                        ours.len()
                    )));
                }
                for &u in ours {
                    if !u.is_finite() {
                        return Err(Error::Dimension(format!("payoff[{i}][{j}] is not finite")));
                    }
                    max_abs = max_abs.max(u.abs());
                }
            }
        }
        for (labels, want, what) in [
            (&state_labels, n, "state_labels"),
            (&opp_action_labels, m, "opp_action_labels"),
            (&our_action_labels, k, "our_action_labels"),
        ] {
            if !labels.is_empty() && labels.len() != want {
                return Err(Error::Dimension(format!(
                    "{what} has {} entries, expected {want}",
                    labels.len()
                )));
            }
        }
        Ok(Self {
            pi,
            payoff,
            state_labels,
            opp_action_labels,
            our_action_labels,
            max_abs_payoff: max_abs,
        })
    }

    pub fn n_states(&self) -> usize {
        self.pi.len()
    }

    pub fn n_opp_actions(&self) -> usize {
        self.payoff[0].len()
    }

    pub fn n_our_actions(&self) -> usize {
        self.payoff[0][0].len()
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn payoff(&self, state: usize, opp_action: usize, ours: usize) -> f64 {
        self.payoff[state][opp_action][ours]
    }

    /// Largest payoff magnitude in the table.
    pub fn max_abs_payoff(&self) -> f64 {
        self.max_abs_payoff
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn opp_action_labels(&self) -> &[String] {
        &self.opp_action_labels
    }

    pub fn our_action_labels(&self) -> &[String] {
        &self.our_action_labels
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("game spec serializes")
    }

    pub(crate) fn check_opponent(&self, opp: &OpponentStrategy) -> Result<()> {
        if opp.n_states() != self.n_states() || opp.n_actions() != self.n_opp_actions() {
            return Err(Error::Dimension(format!(
                "opponent strategy is {}x{}, game is {}x{}",
                opp.n_states(),
                opp.n_actions(),
                self.n_states(),
                self.n_opp_actions()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_ours(&self, ours: &OurStrategy) -> Result<()> {
        let r = ours.rows();
        if r.len() != self.n_opp_actions() || r[0].len() != self.n_our_actions() {
            return Err(Error::Dimension(format!(
                "our strategy is {}x{}, game is {}x{}",
                r.len(),
                r[0].len(),
                self.n_opp_actions(),
                self.n_our_actions()
            )));
        }
        Ok(())
    }
}

impl TryFrom<GameSpecDoc> for GameSpec {
    type Error = Error;
    fn try_from(d: GameSpecDoc) -> Result<Self> {
        Self::with_labels(
            d.pi,
            d.payoff,
            d.state_labels,
            d.opp_action_labels,
            d.our_action_labels,
        )
    }
}

impl From<GameSpec> for GameSpecDoc {
    fn from(g: GameSpec) -> Self {
        GameSpecDoc {
            pi: g.pi,
            payoff: g.payoff,
            state_labels: g.state_labels,
            opp_action_labels: g.opp_action_labels,
            our_action_labels: g.our_action_labels,
        }
    }
}

/// Index of the king in the motivating game.
pub const KING: usize = 0;
/// Index of the jack in the motivating game.
pub const JACK: usize = 1;
/// Big bet ($10).
pub const BIG: usize = 0;
/// Small bet ($1).
pub const SMALL: usize = 1;
pub const CALL: usize = 0;
pub const FOLD: usize = 1;

/// The King/Jack betting game played against a Queen.
///
/// A fold concedes the $2 pot (-1 to us). A call settles the $2 pot plus the
/// bet at showdown, so calling a bet of size `b` wins or loses `1 + b`.
pub fn make_motivating_game() -> GameSpec {
    let showdown = |bet: f64, we_win: bool| if we_win { 1.0 + bet } else { -(1.0 + bet) };
    let mut payoff = vec![vec![vec![0.0; 2]; 2]; 2];
    for (state, we_win) in [(KING, false), (JACK, true)] {
        for (action, bet) in [(BIG, 10.0), (SMALL, 1.0)] {
            payoff[state][action][CALL] = showdown(bet, we_win);
            payoff[state][action][FOLD] = -1.0;
        }
    }
    GameSpec::with_labels(
        vec![0.5, 0.5],
        payoff,
        vec!["K".into(), "J".into()],
        vec!["b".into(), "s".into()],
        vec!["call".into(), "fold".into()],
    )
    .expect("motivating game is well formed")
}

/// Equilibrium response of the caller: call a big bet a quarter of the time,
/// always call a small bet.
pub fn motivating_nash_ours() -> OurStrategy {
    OurStrategy::new(vec![vec![0.25, 0.75], vec![1.0, 0.0]]).expect("valid")
}

/// Equilibrium bettor: always bet big with a king, bet big 5/6 of the time with a jack.
pub fn motivating_nash_opponent() -> OpponentStrategy {
    OpponentStrategy::new(vec![vec![1.0, 0.0], vec![5.0 / 6.0, 1.0 / 6.0]]).expect("valid")
}

/// Expected payoff to us of `ours` against `opp`.
pub fn expected_payoff(g: &GameSpec, ours: &OurStrategy, opp: &OpponentStrategy) -> Result<f64> {
    g.check_opponent(opp)?;
    g.check_ours(ours)?;
    Ok(expected_payoff_unchecked(g, ours, opp))
}

pub(crate) fn expected_payoff_unchecked(
    g: &GameSpec,
    ours: &OurStrategy,
    opp: &OpponentStrategy,
) -> f64 {
    let mut total = 0.0;
    for (i, &p) in g.pi.iter().enumerate() {
        let mut by_state = 0.0;
        for (j, &q) in opp.row(i).iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            let resp: f64 = ours.rows()[j]
                .iter()
                .zip(&g.payoff[i][j])
                .map(|(r, u)| r * u)
                .sum();
            by_state += q * resp;
        }
        total += p * by_state;
    }
    total
}
