//! Brute-force posterior means by numeric integration.
//!
//! Only for two-action games with at most three hidden states: each state's
//! strategy is then a single number `x_i = q_i0` in `[0, 1]` and the
//! posterior is integrated with the midpoint rule on a product grid. Nothing
//! here shares code with the closed-form posterior.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{check_distribution, OpponentStrategy};

/// Midpoint grid resolution per hidden state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points: 2000 }
    }
}

impl GridSpec {
    pub const MIN_POINTS: usize = 100;

    pub fn new(points: usize) -> Result<Self> {
        if points < Self::MIN_POINTS {
            return Err(Error::OracleLimits(format!(
                "grid needs at least {} points per axis, got {points}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> usize {
        self.points
    }
}

/// Posterior mean of the opponent strategy by integrating
/// `prod_i x_i^(a_i0 - 1) (1 - x_i)^(a_i1 - 1) * P0^t0 * (1 - P0)^t1`
/// with `P0 = sum_i pi_i x_i`.
pub fn oracle_posterior_mean(
    alpha: &[Vec<f64>],
    pi: &[f64],
    theta: &[u64],
    grid: GridSpec,
) -> Result<OpponentStrategy> {
    let n = alpha.len();
    if n == 0 || n > 3 {
        return Err(Error::OracleLimits(format!(
            "oracle supports 1 to 3 states, got {n}"
        )));
    }
    if alpha.iter().any(|r| r.len() != 2) || theta.len() != 2 {
        return Err(Error::OracleLimits(
            "oracle supports exactly two actions".into(),
        ));
    }
    if alpha.iter().flatten().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(Error::OracleLimits("alpha must be positive".into()));
    }
    check_distribution(pi, "pi")?;
    if pi.len() != n {
        return Err(Error::Dimension("pi does not match alpha".into()));
    }

    let g = grid.points;
    let h = 1.0 / g as f64;
    let xs: Vec<f64> = (0..g).map(|k| (k as f64 + 0.5) * h).collect();
    // Per-state log prior density on the grid, unnormalized.
    let prior_log: Vec<Vec<f64>> = alpha
        .iter()
        .map(|a| {
            xs.iter()
                .map(|&x| (a[0] - 1.0) * x.ln() + (a[1] - 1.0) * (1.0 - x).ln())
                .collect()
        })
        .collect();
    let (t0, t1) = (theta[0] as f64, theta[1] as f64);

    let points_per_slice = g.pow(n as u32 - 1);
    let log_density = |first: usize, rest: usize, coords: &mut [usize; 3]| -> f64 {
        coords[0] = first;
        let mut r = rest;
        for c in coords.iter_mut().take(n).skip(1) {
            *c = r % g;
            r /= g;
        }
        let mut lp = 0.0;
        let mut p0 = 0.0;
        for i in 0..n {
            lp += prior_log[i][coords[i]];
            p0 += pi[i] * xs[coords[i]];
        }
        let p0 = p0.clamp(0.0, 1.0);
        if t0 > 0.0 {
            lp += t0 * p0.ln();
        }
        if t1 > 0.0 {
            lp += t1 * (1.0 - p0).ln();
        }
        lp
    };

    let max = (0..g)
        .into_par_iter()
        .map(|first| {
            let mut coords = [0usize; 3];
            (0..points_per_slice)
                .map(|rest| log_density(first, rest, &mut coords))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NonFinite);
    }

    // (mass, first moments) per slice, reduced in slice order.
    let slices: Vec<(f64, [f64; 3])> = (0..g)
        .into_par_iter()
        .map(|first| {
            let mut coords = [0usize; 3];
            let mut mass = 0.0;
            let mut moments = [0.0; 3];
            for rest in 0..points_per_slice {
                let w = (log_density(first, rest, &mut coords) - max).exp();
                mass += w;
                for i in 0..n {
                    moments[i] += w * xs[coords[i]];
                }
            }
            (mass, moments)
        })
        .collect();
    let mut mass = 0.0;
    let mut moments = [0.0; 3];
    for (m, mo) in slices {
        mass += m;
        for i in 0..3 {
            moments[i] += mo[i];
        }
    }
    let rows = (0..n)
        .map(|i| {
            let p = moments[i] / mass;
            vec![p, 1.0 - p]
        })
        .collect();
    OpponentStrategy::new(rows)
}
