//! Match simulation and table reproduction.

mod config;
mod matches;
mod tables;

pub use config::{AgentKind, ExperimentConfig, GameId};
pub use matches::{
    run_match, substream, Agent, EbbrAgent, MatchResult, SamplingAgent, StaticAgent, Stream,
    RNG_NAME,
};
pub use tables::{
    fmt_sig6, mean_ci95, run_table, run_timing, AgentSummary, TableReport, TimingProtocol,
    TimingReport, TimingRow,
};
