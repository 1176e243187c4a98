use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ebbr_core::baselines::{sample_opponent, SampleBank};
use ebbr_core::game::motivating_nash_ours;
use ebbr_core::harness::{
    run_match, run_table, run_timing, substream, AgentKind, EbbrAgent, ExperimentConfig,
    SamplingAgent, StaticAgent, Stream, TimingProtocol,
};
use ebbr_core::posterior::posterior_mean_multi_obs_with;
use ebbr_core::{
    make_motivating_game, BetaMode, DirichletPrior, ObservationCounts, PosteriorConfig,
};

#[derive(Parser)]
#[command(
    name = "ebbr",
    version,
    about = "Exact Bayesian best response experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-observation posterior timing and non-finite rates.
    Table1(TimingArgs),
    /// Multi-observation posterior timing and non-finite rates.
    Table2(TimingArgs),
    /// Agent comparison with a large sample bank.
    Table3(Common),
    /// Agent comparison with a small sample bank.
    Table4(Common),
    /// Posterior-mean opponent strategy after observed action counts.
    Posterior(PosteriorArgs),
    /// One agent against one sampled opponent.
    Match(MatchArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    opponents: Option<usize>,
    /// Comma-separated round settings.
    #[arg(long, value_delimiter = ',')]
    rounds: Option<Vec<u32>>,
    #[arg(long)]
    samples_k: Option<usize>,
    #[arg(long)]
    beta_mode: Option<BetaMode>,
    /// JSON file with ExperimentConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated agent names.
    #[arg(long, value_delimiter = ',')]
    agents: Option<Vec<AgentKind>>,
}

#[derive(Args)]
struct TimingArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated values of n.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<u64>>,
}

#[derive(Args)]
struct PosteriorArgs {
    /// Pseudo-counts, rows separated by ';', e.g. "10,3;4,9".
    #[arg(long, default_value = "2,2;2,2")]
    alpha: String,
    /// Observed count per opponent action, e.g. "1,0".
    #[arg(long, value_delimiter = ',')]
    counts: Vec<u64>,
    /// Private-state probabilities; defaults to the built-in game's.
    #[arg(long, value_delimiter = ',')]
    pi: Option<Vec<f64>>,
    #[arg(long, default_value = "log")]
    beta_mode: BetaMode,
    #[arg(long)]
    horizon: Option<u64>,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long, default_value = "EBBR")]
    agent: AgentKind,
    /// Index of the sampled opponent.
    #[arg(long, default_value_t = 0)]
    opponent: u64,
    #[arg(long, default_value_t = 25)]
    rounds: u32,
    #[arg(long, default_value_t = ExperimentConfig::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    samples_k: usize,
    #[arg(long, default_value = "log")]
    beta_mode: BetaMode,
}

fn build_config(base: ExperimentConfig, c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_json(&text)?
        }
        None => base,
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if c.opponents.is_some() {
        cfg.opponents = c.opponents;
    }
    if let Some(r) = &c.rounds {
        cfg.rounds = r.clone();
    }
    if let Some(k) = c.samples_k {
        cfg.samples_k = k;
    }
    if c.beta_mode.is_some() {
        cfg.beta_mode = c.beta_mode;
    }
    if c.out.is_some() {
        cfg.out = c.out.clone();
    }
    if c.workers.is_some() {
        cfg.workers = c.workers;
    }
    if let Some(a) = &c.agents {
        cfg.agents = a.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_alpha(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .with_context(|| format!("bad alpha entry {x:?}"))
                })
                .collect()
        })
        .collect()
}

fn timing(base: ExperimentConfig, args: &TimingArgs, protocol: TimingProtocol) -> Result<()> {
    let mut cfg = build_config(base, &args.common)?;
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = &args.sizes {
        cfg.sizes = s.clone();
    }
    let report = run_timing(&cfg, protocol)?;
    emit(cfg.out.as_ref(), &report.to_csv()?)
}

fn table(base: ExperimentConfig, c: &Common) -> Result<()> {
    let cfg = build_config(base, c)?;
    let report = run_table(&cfg)?;
    emit(cfg.out.as_ref(), &report.to_csv()?)
}

fn posterior(args: &PosteriorArgs) -> Result<()> {
    let prior = DirichletPrior::new(parse_alpha(&args.alpha)?)?;
    let pi = match &args.pi {
        Some(p) => p.clone(),
        None => make_motivating_game().pi().to_vec(),
    };
    let counts = if args.counts.is_empty() {
        vec![0; prior.n_actions()]
    } else {
        args.counts.clone()
    };
    let mut config = PosteriorConfig {
        mode: args.beta_mode,
        ..PosteriorConfig::default()
    };
    if let Some(h) = args.horizon {
        config.horizon = h;
    }
    let obs = ObservationCounts::new(counts);
    let mean = posterior_mean_multi_obs_with(&prior, &pi, &obs, &config)?;
    println!("{}", serde_json::to_string(&mean)?);
    Ok(())
}

fn play(args: &MatchArgs) -> Result<()> {
    let game = make_motivating_game();
    let prior = DirichletPrior::symmetric(2, 2, 2.0)?;
    let true_opp = sample_opponent(
        &prior,
        &mut substream(args.seed, args.opponent, Stream::Truth),
    );
    let mut agent: Box<dyn ebbr_core::harness::Agent> = match args.agent {
        AgentKind::Ebbr => Box::new(EbbrAgent::new(
            game.clone(),
            prior.clone(),
            PosteriorConfig {
                mode: args.beta_mode,
                ..PosteriorConfig::default()
            },
        )),
        AgentKind::Bbr | AgentKind::Map | AgentKind::Thompson => {
            if args.samples_k == 0 {
                bail!("--samples-k must be at least 1");
            }
            let bank = SampleBank::draw(
                &prior,
                args.samples_k,
                &mut substream(args.seed, args.opponent, Stream::Bank),
            )?;
            let stream = if args.agent == AgentKind::Map {
                Stream::Map
            } else {
                Stream::Thompson
            };
            Box::new(SamplingAgent::new(
                args.agent,
                game.clone(),
                bank,
                substream(args.seed, args.opponent, stream),
            )?)
        }
        AgentKind::FullBr => Box::new(StaticAgent::full_best_response(&game, &true_opp)?),
        AgentKind::Nash => Box::new(StaticAgent::new(AgentKind::Nash, motivating_nash_ours())),
    };
    let mut deal = substream(args.seed, args.opponent, Stream::Deal);
    let result = run_match(
        &game,
        agent.as_mut(),
        &true_opp,
        args.rounds,
        args.opponent as usize,
        &mut deal,
    )?;
    println!(
        "{}",
        serde_json::json!({ "opponent_strategy": true_opp, "seed": args.seed, "result": result })
    );
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Table1(a) => timing(
            ExperimentConfig::table1(),
            a,
            TimingProtocol::SingleObservation,
        ),
        Command::Table2(a) => timing(
            ExperimentConfig::table2(),
            a,
            TimingProtocol::MultiObservation,
        ),
        Command::Table3(c) => table(ExperimentConfig::table3(), c),
        Command::Table4(c) => table(ExperimentConfig::table4(), c),
        Command::Posterior(a) => posterior(a),
        Command::Match(a) => play(a),
    }
}
