//! Causal time-slot pairing as a maximum-weight partial bipartite matching.
//!
//! Receive slots are rows and transmit slots columns. Because both degree
//! constraints are inequalities a slot may stay unmatched, so the assignment
//! runs on weights clamped at zero: every partial matching extends to a
//! perfect one through zero-weight (or inadmissible) entries, and dropping
//! those entries afterwards recovers the optimal partial matching.

use std::collections::HashSet;

use crate::channel::{pair_allowed, RateMatrix};
use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;

/// Relative weight of the smaller-delay tie-break, per slot of delay and
/// normalized by `N` so the total perturbation stays below `1e-12 * max R`.
const DELAY_TIE_BREAK: f64 = 1e-12;

/// Receive/transmit slot pairs, 0-based, sorted by receive slot.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
}

impl Pairing {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        Self { pairs }
    }

    /// Instant relaying: every slot forwards what it receives.
    pub fn identity(n: usize) -> Self {
        Self {
            pairs: (0..n).map(|k| (k, k)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Sum of the paired rates; inadmissible pairs count as zero.
    pub fn value(&self, rates: &RateMatrix) -> f64 {
        self.pairs
            .iter()
            .map(|&(i, j)| rates.get(i, j).unwrap_or(0.0))
            .sum()
    }

    pub fn delays(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|&(i, j)| j - i)
    }

    /// Lookup tables: for each slot, the pair index where it receives and
    /// where it transmits.
    pub fn roles(&self, n: usize) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
        let mut recv = vec![None; n];
        let mut send = vec![None; n];
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            recv[i] = Some(p);
            send[j] = Some(p);
        }
        (recv, send)
    }
}

/// Checks causality, the delay bound and the at-most-once constraints.
pub fn validate(pairing: &Pairing, config: &ScenarioConfig) -> bool {
    let n = config.slots;
    let mut recv = HashSet::new();
    let mut send = HashSet::new();
    pairing.pairs.iter().all(|&(i, j)| {
        i < n && j < n && pair_allowed(i, j, config.max_delay) && recv.insert(i) && send.insert(j)
    })
}

/// Maximizes the total rate over all admissible partial matchings.
///
/// Among optimal matchings the one with the smaller total delay is preferred.
pub fn solve_pairing(rates: &RateMatrix) -> Result<Pairing> {
    let n = rates.size();
    if n == 0 {
        return Err(Error::InvalidArgument("empty rate matrix".into()));
    }
    let delta = DELAY_TIE_BREAK * rates.max_value() / n as f64;
    let weight = |i: usize, j: usize| match rates.get(i, j) {
        Some(r) if r > 0.0 => (r - delta * (j - i) as f64).max(0.0),
        _ => 0.0,
    };
    let mut cost = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            cost[i * n + j] = -weight(i, j);
        }
    }
    let assignment = min_cost_assignment(n, &cost);
    let pairs = assignment
        .into_iter()
        .enumerate()
        .filter(|&(i, j)| weight(i, j) > 0.0)
        .collect();
    Ok(Pairing::new(pairs))
}

/// Dense O(n^3) Hungarian method with potentials on a row-major `n x n`
/// cost table. Returns the column assigned to each row.
fn min_cost_assignment(n: usize, cost: &[f64]) -> Vec<usize> {
    // 1-based internally; index 0 is the virtual start column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let row = &cost[(i0 - 1) * n..i0 * n];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            assignment[row_of[j] - 1] = j - 1;
        }
    }
    assignment
}
