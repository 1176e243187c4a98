use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::posterior::BetaMode;

/// Agents compared in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgentKind {
    /// Exact Bayesian best response.
    #[serde(rename = "EBBR", alias = "ebbr")]
    Ebbr,
    /// Best response to the likelihood-weighted sample bank.
    #[serde(rename = "BBR", alias = "bbr")]
    Bbr,
    /// Best response to the most likely bank sample.
    #[serde(rename = "MAP", alias = "map")]
    Map,
    /// Best response to a bank sample drawn by posterior weight.
    #[serde(rename = "Thompson", alias = "thompson")]
    Thompson,
    /// Best response to the opponent's true strategy.
    #[serde(rename = "FullBR", alias = "fullbr")]
    FullBr,
    /// Static equilibrium strategy.
    #[serde(rename = "Nash", alias = "nash")]
    Nash,
}

impl AgentKind {
    pub const ALL: [AgentKind; 6] = [
        AgentKind::Ebbr,
        AgentKind::Bbr,
        AgentKind::Map,
        AgentKind::Thompson,
        AgentKind::FullBr,
        AgentKind::Nash,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Ebbr => "EBBR",
            AgentKind::Bbr => "BBR",
            AgentKind::Map => "MAP",
            AgentKind::Thompson => "Thompson",
            AgentKind::FullBr => "FullBR",
            AgentKind::Nash => "Nash",
        }
    }

    pub fn uses_samples(self) -> bool {
        matches!(self, AgentKind::Bbr | AgentKind::Map | AgentKind::Thompson)
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        AgentKind::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown agent {s:?}")))
    }
}

/// Games the harness knows how to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameId {
    #[default]
    Motivating,
}

/// Everything a table run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameId,
    /// Dirichlet pseudo-counts `alpha[state][action]`.
    pub alpha: Vec<Vec<f64>>,
    pub agents: Vec<AgentKind>,
    /// Round settings; 0 scores the initial strategy only.
    pub rounds: Vec<u32>,
    /// Opponents per round setting. Unset: 10 000 for the initial column and
    /// 1 000 otherwise.
    pub opponents: Option<usize>,
    /// Sample bank size for BBR, MAP and Thompson.
    pub samples_k: usize,
    pub seed: u64,
    /// Unset: log mode for matches, both modes for timing runs.
    pub beta_mode: Option<BetaMode>,
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    pub workers: Option<usize>,
    /// Timing runs: trials per size.
    pub trials: usize,
    /// Timing runs: the `n` of `U{1, n}`.
    pub sizes: Vec<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::table3()
    }
}

impl ExperimentConfig {
    pub const DEFAULT_SEED: u64 = 20_180_531;

    pub fn table3() -> Self {
        Self {
            game: GameId::Motivating,
            alpha: vec![vec![2.0; 2]; 2],
            agents: AgentKind::ALL.to_vec(),
            rounds: vec![0, 10, 25],
            opponents: None,
            samples_k: 1000,
            seed: Self::DEFAULT_SEED,
            beta_mode: None,
            out: None,
            workers: None,
            trials: 0,
            sizes: Vec::new(),
        }
    }

    pub fn table4() -> Self {
        Self {
            rounds: vec![0, 10, 25, 100],
            samples_k: 10,
            ..Self::table3()
        }
    }

    pub fn table1() -> Self {
        Self {
            trials: 10_000,
            sizes: vec![10, 20, 50, 100, 200, 500],
            ..Self::table3()
        }
    }

    pub fn table2() -> Self {
        Self {
            trials: 100,
            sizes: vec![10, 20, 50, 100, 200, 500, 1000],
            ..Self::table3()
        }
    }

    pub fn opponents_for(&self, rounds: u32) -> usize {
        self.opponents
            .unwrap_or(if rounds == 0 { 10_000 } else { 1_000 })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.opponents == Some(0) {
            return Err(Error::Config("opponents must be at least 1".into()));
        }
        if self.samples_k == 0 && self.agents.iter().any(|a| a.uses_samples()) {
            return Err(Error::Config("samples_k must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        crate::posterior::DirichletPrior::new(self.alpha.clone())?;
        Ok(())
    }
}
