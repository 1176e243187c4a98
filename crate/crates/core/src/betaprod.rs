//! Beta functions and products of beta functions.
//!
//! The production path evaluates `ln B(x) = sum ln Gamma(x_i) - ln Gamma(sum x_i)`.
//! For integer arguments there is also an entropy form: with column total
//! `g = sum x_i` and empirical distribution `p_i = x_i / g`,
//!
//! ```text
//! ln B(x) = -g H(p) - (n-1)/2 ln g - 1/2 sum ln p_i + d
//! ```
//!
//! where `d = sum c(x_i) - c(g)` and `c(z) = ln Gamma(z) - (z ln z - z - ln(z)/2)`
//! lies in `[ln(2 pi)/2, 1]` for every positive integer `z`. Each column's `d`
//! is therefore confined to `[n ln(2 pi)/2 - 1, n - ln(2 pi)/2]`, which makes
//! the entropy form a certified bracket around the exact value.

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

/// `ln(2 pi) / 2`.
pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn check_positive(x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveArgument(x))
    }
}

/// `ln B(x)` for a vector of positive arguments.
pub fn log_beta(args: &[f64]) -> Result<f64> {
    if args.is_empty() {
        return Err(Error::Dimension(
            "beta function needs at least one argument".into(),
        ));
    }
    for &x in args {
        check_positive(x)?;
    }
    Ok(log_beta_unchecked(args))
}

pub(crate) fn log_beta_unchecked(args: &[f64]) -> f64 {
    let total: f64 = args.iter().sum();
    args.iter().map(|&x| ln_gamma(x)).sum::<f64>() - ln_gamma(total)
}

/// Result of evaluating `B(x)` with plain gamma functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectBeta {
    pub value: f64,
    pub finite: bool,
}

/// `B(x) = prod Gamma(x_i) / Gamma(sum x_i)` without any log-space protection.
///
/// Gamma overflows `f64` a little above 170, after which the quotient
/// becomes `inf/inf` or `x/inf`. The overflow is reported, not raised.
pub fn beta_direct(args: &[f64]) -> DirectBeta {
    let total: f64 = args.iter().sum();
    let num: f64 = args.iter().map(|&x| gamma(x)).product();
    let value = num / gamma(total);
    DirectBeta {
        value,
        finite: value.is_finite(),
    }
}

/// A product of beta functions; each column holds the arguments of one factor.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMatrix {
    columns: Vec<Vec<f64>>,
}

impl GammaMatrix {
    pub fn new(columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = columns.first().map(Vec::len).unwrap_or(0);
        if n == 0 {
            return Err(Error::Dimension("gamma matrix is empty".into()));
        }
        for c in &columns {
            if c.len() != n {
                return Err(Error::Dimension(
                    "gamma matrix columns differ in length".into(),
                ));
            }
            for &x in c {
                check_positive(x)?;
            }
        }
        Ok(Self { columns })
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Number of arguments per factor.
    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    /// Column totals `g_j = sum_i x_ij`.
    pub fn column_sums(&self) -> Vec<f64> {
        self.columns.iter().map(|c| c.iter().sum()).collect()
    }
}

/// `sum_j ln B(column j)`.
pub fn log_beta_product(g: &GammaMatrix) -> f64 {
    g.columns.iter().map(|c| log_beta_unchecked(c)).sum()
}

/// Entropy view of one column.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnEntropy {
    pub total: f64,
    pub distribution: Vec<f64>,
    pub entropy: f64,
    pub d_lower: f64,
    pub d_upper: f64,
}

impl ColumnEntropy {
    /// The entropy-form value without the `d` constant.
    pub fn core(&self) -> f64 {
        let n = self.distribution.len() as f64;
        -self.total * self.entropy
            - 0.5 * (n - 1.0) * self.total.ln()
            - 0.5 * self.distribution.iter().map(|p| p.ln()).sum::<f64>()
    }
}

/// Per-column empirical distribution, entropy and admissible range of `d`.
pub fn entropy_decomposition(g: &GammaMatrix) -> Vec<ColumnEntropy> {
    let n = g.n() as f64;
    g.columns
        .iter()
        .map(|c| {
            let total: f64 = c.iter().sum();
            let distribution: Vec<f64> = c.iter().map(|x| x / total).collect();
            let entropy = -distribution.iter().map(|p| p * p.ln()).sum::<f64>();
            ColumnEntropy {
                total,
                distribution,
                entropy,
                d_lower: n * HALF_LN_2PI - 1.0,
                d_upper: n - HALF_LN_2PI,
            }
        })
        .collect()
}

/// Point estimate and certified bracket for `ln prod_j B(column j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StirlingEstimate {
    pub approx: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Entropy-form evaluation of a beta product with integer arguments.
///
/// `approx` takes each column's `d` at the low end of its range, which is
/// the asymptotically tight end for large arguments.
pub fn log_beta_product_stirling(g: &GammaMatrix) -> Result<StirlingEstimate> {
    for c in &g.columns {
        if let Some(&x) = c.iter().find(|x| x.fract() != 0.0 || **x < 1.0) {
            return Err(Error::NonIntegerArgument(x));
        }
    }
    let mut est = StirlingEstimate {
        approx: 0.0,
        lower: 0.0,
        upper: 0.0,
    };
    for col in entropy_decomposition(g) {
        let core = col.core();
        est.approx += core + col.d_lower;
        est.lower += core + col.d_lower;
        est.upper += core + col.d_upper;
    }
    Ok(est)
}
