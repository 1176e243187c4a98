//! Exact posterior-mean opponent strategy when only public actions are seen.
//!
//! Each private state `i` carries an independent Dirichlet prior over the
//! opponent's actions. We observe action counts `theta` but never the state
//! that produced them, so the likelihood of a history is
//! `prod_j (sum_i pi_i q_ij)^theta_j`. Expanding the powers gives one term per
//! assignment `rho` of sightings to states, weighted by the multinomial
//! coefficient and `prod pi_i^rho_ij`, and each term integrates in closed form
//! to a product of beta functions over the states' rows of `alpha + rho`.
//! The mean of `q_ij` adds one more unit to cell `(i, j)` of that product.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::betaprod::{beta_direct, log_beta_unchecked};
use crate::composition::{assignment_count, Assignments};
use crate::error::{Error, Result};
use crate::game::{check_distribution, OpponentStrategy};
use crate::logspace::LogSum;

/// Pseudo-counts `alpha[state][action]`, all positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DirichletPrior {
    alpha: Vec<Vec<f64>>,
}

impl DirichletPrior {
    pub fn new(alpha: Vec<Vec<f64>>) -> Result<Self> {
        let m = alpha.first().map(Vec::len).unwrap_or(0);
        if m == 0 {
            return Err(Error::Dimension(
                "prior needs at least one state and action".into(),
            ));
        }
        for (i, row) in alpha.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Dimension(format!(
                    "prior row {i} has {} actions, expected {m}",
                    row.len()
                )));
            }
            for (j, &a) in row.iter().enumerate() {
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::NonPositiveAlpha {
                        row: i,
                        col: j,
                        value: a,
                    });
                }
            }
        }
        Ok(Self { alpha })
    }

    /// Same pseudo-count in every cell.
    pub fn symmetric(n_states: usize, n_actions: usize, value: f64) -> Result<Self> {
        Self::new(vec![vec![value; n_actions]; n_states])
    }

    pub fn alpha(&self) -> &[Vec<f64>] {
        &self.alpha
    }

    pub fn n_states(&self) -> usize {
        self.alpha.len()
    }

    pub fn n_actions(&self) -> usize {
        self.alpha[0].len()
    }

    /// `alpha_ij / sum_j alpha_ij` row by row.
    pub fn mean(&self) -> OpponentStrategy {
        let rows = self
            .alpha
            .iter()
            .map(|row| {
                let s: f64 = row.iter().sum();
                row.iter().map(|a| a / s).collect()
            })
            .collect();
        OpponentStrategy::new(rows).expect("normalized rows")
    }
}

impl TryFrom<Vec<Vec<f64>>> for DirichletPrior {
    type Error = Error;
    fn try_from(alpha: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<DirichletPrior> for Vec<Vec<f64>> {
    fn from(p: DirichletPrior) -> Self {
        p.alpha
    }
}

/// How many times each public action has been seen.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObservationCounts {
    theta: Vec<u64>,
}

impl ObservationCounts {
    pub fn new(theta: Vec<u64>) -> Self {
        Self { theta }
    }

    pub fn zeros(n_actions: usize) -> Self {
        Self {
            theta: vec![0; n_actions],
        }
    }

    /// A single sighting of `action`.
    pub fn single(n_actions: usize, action: usize) -> Self {
        let mut c = Self::zeros(n_actions);
        c.record(action);
        c
    }

    pub fn record(&mut self, action: usize) {
        self.theta[action] += 1;
    }

    pub fn theta(&self) -> &[u64] {
        &self.theta
    }

    pub fn total(&self) -> u64 {
        self.theta.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }
}

/// How beta functions are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaMode {
    /// Log-gamma differences accumulated with a running log-sum-exp.
    #[default]
    Log,
    /// Plain gamma quotients summed in linear space. Overflows for large
    /// arguments; kept to reproduce that failure mode.
    Direct,
}

impl std::str::FromStr for BetaMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(BetaMode::Log),
            "direct" => Ok(BetaMode::Direct),
            other => Err(Error::Config(format!("unknown beta mode {other:?}"))),
        }
    }
}

/// Limits and evaluation mode for posterior computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorConfig {
    /// Largest admissible total number of observations.
    pub horizon: u64,
    /// Largest admissible number of state assignments to sum over.
    pub max_terms: u128,
    pub mode: BetaMode,
}

impl Default for PosteriorConfig {
    fn default() -> Self {
        Self {
            horizon: 1000,
            max_terms: 100_000_000,
            mode: BetaMode::Log,
        }
    }
}

fn validate(prior: &DirichletPrior, pi: &[f64], n_obs: usize) -> Result<()> {
    check_distribution(pi, "pi")?;
    if pi.len() != prior.n_states() {
        return Err(Error::Dimension(format!(
            "pi has {} states, prior has {}",
            pi.len(),
            prior.n_states()
        )));
    }
    if n_obs != prior.n_actions() {
        return Err(Error::Dimension(format!(
            "observations cover {n_obs} actions, prior has {}",
            prior.n_actions()
        )));
    }
    Ok(())
}

fn finish_rows(rows: Vec<Vec<f64>>) -> Result<OpponentStrategy> {
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    OpponentStrategy::new(rows).map_err(|_| Error::NonFinite)
}

/// Normalize per-state log numerators into conditional probabilities.
fn rows_from_log(acc: &[Vec<LogSum>]) -> Result<OpponentStrategy> {
    let rows = acc
        .iter()
        .map(|cells| {
            let logs: Vec<f64> = cells.iter().map(LogSum::value).collect();
            let mut z = LogSum::new();
            logs.iter().for_each(|&l| z.push(l));
            let z = z.value();
            logs.iter().map(|l| (l - z).exp()).collect()
        })
        .collect();
    finish_rows(rows)
}

fn rows_from_linear(num: Vec<Vec<f64>>) -> Result<OpponentStrategy> {
    let rows = num
        .into_iter()
        .map(|cells| {
            let z: f64 = cells.iter().sum();
            cells.into_iter().map(|c| c / z).collect()
        })
        .collect();
    finish_rows(rows)
}

fn shifted(alpha: &[Vec<f64>], cells: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let mut g = alpha.to_vec();
    for &(i, j) in cells {
        g[i][j] += 1.0;
    }
    g
}

/// Posterior mean after a single sighting of action `j_star`, default settings.
pub fn posterior_mean_single_obs(
    prior: &DirichletPrior,
    pi: &[f64],
    j_star: usize,
) -> Result<OpponentStrategy> {
    posterior_mean_single_obs_with(prior, pi, j_star, BetaMode::Log)
}

/// Posterior mean after a single sighting of action `j_star`.
///
/// Cell `(s, a)` of the result is proportional to
/// `sum_i pi_i prod_rows B(alpha + e(i, j_star) + e(s, a))`: the sighting is
/// attributed to each state `i` in turn and the mean adds a unit at `(s, a)`.
pub fn posterior_mean_single_obs_with(
    prior: &DirichletPrior,
    pi: &[f64],
    j_star: usize,
    mode: BetaMode,
) -> Result<OpponentStrategy> {
    validate(prior, pi, prior.n_actions())?;
    let (n, m) = (prior.n_states(), prior.n_actions());
    if j_star >= m {
        return Err(Error::Dimension(format!(
            "action {j_star} out of range for {m} actions"
        )));
    }
    let alpha = prior.alpha();
    match mode {
        BetaMode::Log => {
            let mut acc = vec![vec![LogSum::new(); m]; n];
            for (s, row) in acc.iter_mut().enumerate() {
                for (a, cell) in row.iter_mut().enumerate() {
                    for (i, &p) in pi.iter().enumerate() {
                        if p == 0.0 {
                            continue;
                        }
                        let g = shifted(alpha, &[(i, j_star), (s, a)]);
                        let lb: f64 = g.iter().map(|r| log_beta_unchecked(r)).sum();
                        cell.push(p.ln() + lb);
                    }
                }
            }
            rows_from_log(&acc)
        }
        BetaMode::Direct => {
            let mut num = vec![vec![0.0; m]; n];
            for (s, row) in num.iter_mut().enumerate() {
                for (a, cell) in row.iter_mut().enumerate() {
                    for (i, &p) in pi.iter().enumerate() {
                        let g = shifted(alpha, &[(i, j_star), (s, a)]);
                        let b: f64 = g.iter().map(|r| beta_direct(r).value).product();
                        *cell += p * b;
                    }
                }
            }
            rows_from_linear(num)
        }
    }
}

/// Posterior mean given cumulative counts, default settings.
pub fn posterior_mean_multi_obs(
    prior: &DirichletPrior,
    pi: &[f64],
    obs: &ObservationCounts,
) -> Result<OpponentStrategy> {
    posterior_mean_multi_obs_with(prior, pi, obs, &PosteriorConfig::default())
}

/// Posterior mean given cumulative counts `obs`, always conditioned on the
/// original prior.
///
/// Sums over every assignment of the sightings to hidden states. The number
/// of assignments is `prod_j C(theta_j + n - 1, n - 1)`; it is checked
/// against `config.max_terms` before any work is done.
pub fn posterior_mean_multi_obs_with(
    prior: &DirichletPrior,
    pi: &[f64],
    obs: &ObservationCounts,
    config: &PosteriorConfig,
) -> Result<OpponentStrategy> {
    validate(prior, pi, obs.len())?;
    let total = obs.total();
    if total > config.horizon {
        return Err(Error::HorizonExceeded {
            total,
            horizon: config.horizon,
        });
    }
    let count = assignment_count(obs.theta(), prior.n_states())?;
    if count > config.max_terms {
        return Err(Error::TooManyTerms {
            count,
            limit: config.max_terms,
        });
    }
    match config.mode {
        BetaMode::Log => multi_log(prior, pi, obs),
        BetaMode::Direct => multi_direct(prior, pi, obs),
    }
}

/// `ln Gamma(base + k)` for `k = 0..=len-1`.
fn ln_gamma_ladder(base: f64, len: u64) -> Vec<f64> {
    (0..len).map(|k| ln_gamma(base + k as f64)).collect()
}

fn multi_log(
    prior: &DirichletPrior,
    pi: &[f64],
    obs: &ObservationCounts,
) -> Result<OpponentStrategy> {
    let (n, m) = (prior.n_states(), prior.n_actions());
    let alpha = prior.alpha();
    let theta = obs.theta();
    let total = obs.total();

    // Every gamma argument is alpha plus a small integer, so tabulate.
    let cell_lg: Vec<Vec<Vec<f64>>> = alpha
        .iter()
        .map(|row| {
            row.iter()
                .zip(theta)
                .map(|(&a, &t)| ln_gamma_ladder(a, t + 2))
                .collect()
        })
        .collect();
    let row_lg: Vec<Vec<f64>> = alpha
        .iter()
        .map(|row| ln_gamma_ladder(row.iter().sum(), total + 2))
        .collect();
    let max_theta = theta.iter().copied().max().unwrap_or(0);
    let ln_fact = ln_gamma_ladder(1.0, max_theta + 1);
    let ln_pi: Vec<f64> = pi.iter().map(|p| p.ln()).collect();
    let multinomial_const: f64 = theta.iter().map(|&t| ln_fact[t as usize]).sum();

    let mut acc = vec![vec![LogSum::new(); m]; n];
    let mut row_beta = vec![0.0; n];
    let mut row_used = vec![0u64; n];
    let mut it = Assignments::new(theta, n);
    while it.step() {
        let cols = &it.columns;
        let mut log_w = multinomial_const;
        for (i, lb) in row_beta.iter_mut().enumerate() {
            let mut used = 0u64;
            let mut s = 0.0;
            for (j, col) in cols.iter().enumerate() {
                let r = col[i];
                if r > 0 {
                    log_w += r as f64 * ln_pi[i] - ln_fact[r as usize];
                }
                used += r;
                s += cell_lg[i][j][r as usize];
            }
            row_used[i] = used;
            *lb = s - row_lg[i][used as usize];
        }
        if log_w == f64::NEG_INFINITY {
            continue;
        }
        let base = log_w + row_beta.iter().sum::<f64>();
        for (s_state, cells) in acc.iter_mut().enumerate() {
            let used = row_used[s_state] as usize;
            let row_shift = row_lg[s_state][used + 1] - row_lg[s_state][used];
            for (a, cell) in cells.iter_mut().enumerate() {
                let r = cols[a][s_state] as usize;
                let cell_shift = cell_lg[s_state][a][r + 1] - cell_lg[s_state][a][r];
                cell.push(base + cell_shift - row_shift);
            }
        }
    }
    rows_from_log(&acc)
}

fn multi_direct(
    prior: &DirichletPrior,
    pi: &[f64],
    obs: &ObservationCounts,
) -> Result<OpponentStrategy> {
    let (n, m) = (prior.n_states(), prior.n_actions());
    let alpha = prior.alpha();
    let theta = obs.theta();
    let mut num = vec![vec![0.0; m]; n];
    let mut it = Assignments::new(theta, n);
    while it.step() {
        let cols = &it.columns;
        let mut coeff = 1.0;
        for (j, col) in cols.iter().enumerate() {
            // Multinomial coefficient as a running product of binomials.
            let mut left = theta[j];
            for (i, &r) in col.iter().enumerate() {
                coeff *= binomial_f64(left, r) * pi[i].powi(r as i32);
                left -= r;
            }
        }
        let gamma: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..m).map(|j| alpha[i][j] + cols[j][i] as f64).collect())
            .collect();
        for (s, cells) in num.iter_mut().enumerate() {
            for (a, cell) in cells.iter_mut().enumerate() {
                let g = shifted(&gamma, &[(s, a)]);
                let b: f64 = g.iter().map(|r| beta_direct(r).value).product();
                *cell += coeff * b;
            }
        }
    }
    rows_from_linear(num)
}

fn binomial_f64(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_prior() -> DirichletPrior {
        DirichletPrior::new(vec![vec![10.0, 3.0], vec![4.0, 9.0]]).unwrap()
    }

    #[test]
    fn worked_example_single_sighting() {
        let post = posterior_mean_single_obs(&worked_prior(), &[0.5, 0.5], 0).unwrap();
        assert!(
            (post.prob(1, 0) - 0.3218210361).abs() < 1e-9,
            "{}",
            post.prob(1, 0)
        );
        assert!((worked_prior().mean().prob(1, 0) - 4.0 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn single_state_is_conjugate() {
        let prior = DirichletPrior::new(vec![vec![2.5, 4.0]]).unwrap();
        let post = posterior_mean_single_obs(&prior, &[1.0], 0).unwrap();
        assert!((post.prob(0, 0) - 3.5 / 7.5).abs() < 1e-13);
    }

    #[test]
    fn single_and_multi_agree_at_one_sighting() {
        let prior = DirichletPrior::symmetric(2, 2, 2.0).unwrap();
        let a = posterior_mean_single_obs(&prior, &[0.5, 0.5], 0).unwrap();
        let b = posterior_mean_multi_obs(&prior, &[0.5, 0.5], &ObservationCounts::new(vec![1, 0]))
            .unwrap();
        for (ra, rb) in a.rows().iter().zip(b.rows()) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn no_observations_returns_prior_mean() {
        let prior = DirichletPrior::new(vec![vec![1.5, 2.0, 7.0], vec![3.0, 1.0, 1.0]]).unwrap();
        let post =
            posterior_mean_multi_obs(&prior, &[0.3, 0.7], &ObservationCounts::zeros(3)).unwrap();
        let mean = prior.mean();
        for (ra, rb) in post.rows().iter().zip(mean.rows()) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn direct_mode_agrees_when_small() {
        let obs = ObservationCounts::new(vec![3, 2]);
        let cfg = PosteriorConfig {
            mode: BetaMode::Direct,
            ..Default::default()
        };
        let a = posterior_mean_multi_obs(&worked_prior(), &[0.5, 0.5], &obs).unwrap();
        let b = posterior_mean_multi_obs_with(&worked_prior(), &[0.5, 0.5], &obs, &cfg).unwrap();
        for (ra, rb) in a.rows().iter().zip(b.rows()) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() < 1e-10);
            }
        }
        let s = posterior_mean_single_obs_with(&worked_prior(), &[0.5, 0.5], 0, BetaMode::Direct)
            .unwrap();
        assert!((s.prob(1, 0) - 0.3218210361).abs() < 1e-9);
    }

    #[test]
    fn direct_mode_overflows_for_large_priors() {
        let prior = DirichletPrior::new(vec![vec![150.0, 120.0], vec![180.0, 90.0]]).unwrap();
        let err =
            posterior_mean_single_obs_with(&prior, &[0.5, 0.5], 0, BetaMode::Direct).unwrap_err();
        assert_eq!(err, Error::NonFinite);
        assert!(posterior_mean_single_obs(&prior, &[0.5, 0.5], 0).is_ok());
    }

    #[test]
    fn horizon_and_term_limits() {
        let prior = DirichletPrior::symmetric(2, 2, 2.0).unwrap();
        let cfg = PosteriorConfig {
            horizon: 10,
            ..Default::default()
        };
        let err = posterior_mean_multi_obs_with(
            &prior,
            &[0.5, 0.5],
            &ObservationCounts::new(vec![6, 5]),
            &cfg,
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::HorizonExceeded {
                total: 11,
                horizon: 10
            }
        );
        assert!(err.to_string().contains("10"));

        let cfg = PosteriorConfig {
            max_terms: 30,
            ..Default::default()
        };
        let err = posterior_mean_multi_obs_with(
            &prior,
            &[0.5, 0.5],
            &ObservationCounts::new(vec![5, 5]),
            &cfg,
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::TooManyTerms {
                count: 36,
                limit: 30
            }
        );
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            DirichletPrior::new(vec![vec![1.0, 0.0]]),
            Err(Error::NonPositiveAlpha { row: 0, col: 1, .. })
        ));
        assert!(DirichletPrior::new(vec![vec![1.0, -2.0]]).is_err());
        let prior = worked_prior();
        assert!(posterior_mean_single_obs(&prior, &[0.7, 0.7], 0).is_err());
        assert!(posterior_mean_single_obs(&prior, &[1.0], 0).is_err());
        assert!(posterior_mean_single_obs(&prior, &[0.5, 0.5], 2).is_err());
        assert!(
            posterior_mean_multi_obs(&prior, &[0.5, 0.5], &ObservationCounts::zeros(3)).is_err()
        );
    }

    #[test]
    fn zero_probability_state_is_skipped() {
        // With pi = (1, 0) every sighting belongs to state 0.
        let prior = worked_prior();
        let post =
            posterior_mean_multi_obs(&prior, &[1.0, 0.0], &ObservationCounts::new(vec![2, 1]))
                .unwrap();
        assert!((post.prob(0, 0) - 12.0 / 16.0).abs() < 1e-13);
        assert!((post.prob(1, 0) - 4.0 / 13.0).abs() < 1e-13);
    }
}
