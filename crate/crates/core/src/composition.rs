//! Weak compositions: ways to split a count over a fixed number of parts.

use crate::error::{Error, Result};

/// Moves `c` to its lexicographic successor among vectors with the same sum.
/// Returns `false` (leaving `c` untouched) when `c` is already the last one.
pub(crate) fn advance(c: &mut [u64]) -> bool {
    let Some(k) = c.iter().rposition(|&x| x > 0) else {
        return false;
    };
    if k == 0 {
        return false;
    }
    let rest = c[k] - 1;
    c[k - 1] += 1;
    c[k] = 0;
    let last = c.len() - 1;
    c[last] = rest;
    true
}

fn first(total: u64, parts: usize) -> Vec<u64> {
    let mut c = vec![0; parts];
    c[parts - 1] = total;
    c
}

/// Streams every length-`parts` vector of non-negative integers summing to
/// `total`, in lexicographic order. Holds one vector at a time.
#[derive(Debug, Clone)]
pub struct Compositions {
    current: Vec<u64>,
    started: bool,
    finished: bool,
}

impl Iterator for Compositions {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.finished {
            return None;
        }
        if !self.started {
            self.started = true;
        } else if !advance(&mut self.current) {
            self.finished = true;
            return None;
        }
        Some(self.current.clone())
    }
}

/// All weak compositions of `total` into `parts` parts.
///
/// # Panics
/// If `parts` is zero.
pub fn enumerate_compositions(total: u64, parts: usize) -> Compositions {
    assert!(parts >= 1, "a composition needs at least one part");
    Compositions {
        current: first(total, parts),
        started: false,
        finished: false,
    }
}

/// `C(total + parts - 1, parts - 1)`, or `None` on overflow.
pub fn composition_count(total: u64, parts: usize) -> Option<u128> {
    let k = parts.checked_sub(1)? as u128;
    let n = total as u128 + k;
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Assignment of observed action counts to hidden states:
/// `rho[i][j]` of the `theta[j]` sightings of action `j` came from state `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    pub rho: Vec<Vec<u64>>,
}

impl Composition {
    pub fn column_sums(&self) -> Vec<u64> {
        let m = self.rho.first().map(Vec::len).unwrap_or(0);
        (0..m)
            .map(|j| self.rho.iter().map(|r| r[j]).sum())
            .collect()
    }
}

/// Number of state assignments for the observation vector `theta`.
pub fn assignment_count(theta: &[u64], n_states: usize) -> Result<u128> {
    theta.iter().try_fold(1u128, |acc, &t| {
        composition_count(t, n_states)
            .and_then(|c| acc.checked_mul(c))
            .ok_or(Error::CompositionOverflow)
    })
}

/// Odometer over the per-action compositions; the last action varies fastest.
#[derive(Debug, Clone)]
pub(crate) struct Assignments {
    /// `columns[j][i]` = sightings of action `j` attributed to state `i`.
    pub(crate) columns: Vec<Vec<u64>>,
    started: bool,
    finished: bool,
}

impl Assignments {
    pub(crate) fn new(theta: &[u64], n_states: usize) -> Self {
        Self {
            columns: theta.iter().map(|&t| first(t, n_states)).collect(),
            started: false,
            finished: false,
        }
    }

    /// Advance to the next assignment; `false` once exhausted.
    pub(crate) fn step(&mut self) -> bool {
        if self.finished {
            return false;
        }
        if !self.started {
            self.started = true;
            return true;
        }
        for j in (0..self.columns.len()).rev() {
            if advance(&mut self.columns[j]) {
                return true;
            }
            let total = self.columns[j].iter().sum();
            let n = self.columns[j].len();
            self.columns[j] = first(total, n);
        }
        self.finished = true;
        false
    }
}

/// Every state assignment of `theta`, as full matrices.
pub fn enumerate_assignments(theta: &[u64], n_states: usize) -> impl Iterator<Item = Composition> {
    let mut it = Assignments::new(theta, n_states);
    std::iter::from_fn(move || {
        if !it.step() {
            return None;
        }
        let rho = (0..n_states)
            .map(|i| it.columns.iter().map(|c| c[i]).collect())
            .collect();
        Some(Composition { rho })
    })
}
