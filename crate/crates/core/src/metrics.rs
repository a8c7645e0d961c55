//! Per-round quality measures of a load vector.
//!
//! For heterogeneous graphs the balanced reference of node `i` is
//! `m * s_i / s`, where `m` is the total load; otherwise it is the plain
//! average. Reductions run over fixed node blocks and are combined in block
//! order, so results do not depend on the number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::load::Load;

pub const DEFAULT_WINDOW: usize = 100;
pub const DEFAULT_TOL: f64 = 1.0;

pub(crate) const BLOCK: usize = 4096;

/// Metric snapshot for one round. The load fields describe the state at
/// the end of the round; `min_transient` describes the state mid-round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    pub total_load: f64,
    pub max_above_avg: f64,
    pub max_local_diff: f64,
    pub potential_over_n: f64,
    pub min_load: f64,
    pub min_transient: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Potential {
    pub phi: f64,
    pub phi_over_n: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImbalanceVerdict {
    pub converged_at: Option<usize>,
    pub remaining_imbalance: f64,
}

/// Exact sum for discrete loads, block-ordered sum otherwise.
pub fn total_load<L: Load>(x: &[L]) -> f64 {
    if L::DISCRETE {
        let parts: Vec<i128> = x
            .par_chunks(BLOCK)
            .map(|c| c.iter().map(|v| v.to_f64() as i128).sum())
            .collect();
        parts.into_iter().sum::<i128>() as f64
    } else {
        let parts: Vec<f64> = x
            .par_chunks(BLOCK)
            .map(|c| c.iter().map(|v| v.to_f64()).sum())
            .collect();
        parts.into_iter().sum()
    }
}

fn balanced_share(graph: &Graph, total: f64) -> impl Fn(usize) -> f64 + Sync + '_ {
    let homogeneous = graph.is_homogeneous();
    let avg = total / graph.n() as f64;
    let per_speed = total / graph.total_speed();
    move |i| {
        if homogeneous {
            avg
        } else {
            per_speed * graph.speed(i)
        }
    }
}

fn block_reduce<L: Load>(
    x: &[L],
    identity: f64,
    f: impl Fn(usize, f64) -> f64 + Sync,
    combine: impl Fn(f64, f64) -> f64 + Sync + Copy,
) -> f64 {
    let parts: Vec<f64> = x
        .par_chunks(BLOCK)
        .enumerate()
        .map(|(b, c)| {
            c.iter()
                .enumerate()
                .fold(identity, |acc, (k, v)| combine(acc, f(b * BLOCK + k, v.to_f64())))
        })
        .collect();
    parts.into_iter().fold(identity, combine)
}

/// `max_v (x_v - xbar_v)`.
pub fn max_above_average<L: Load>(x: &[L], graph: &Graph) -> f64 {
    let share = balanced_share(graph, total_load(x));
    block_reduce(x, f64::NEG_INFINITY, |i, v| v - share(i), f64::max)
}

/// `max_v |x_v - xbar_v|`.
pub fn linf_deviation<L: Load>(x: &[L], graph: &Graph) -> f64 {
    let share = balanced_share(graph, total_load(x));
    block_reduce(x, 0.0, |i, v| (v - share(i)).abs(), f64::max)
}

/// `max_{u,v} |x_u - x_v|` over edges.
pub fn max_local_difference<L: Load>(x: &[L], graph: &Graph) -> f64 {
    block_reduce(
        x,
        0.0,
        |i, v| {
            graph
                .neighbors(i)
                .filter(|&j| j > i)
                .map(|j| (v - x[j].to_f64()).abs())
                .fold(0.0, f64::max)
        },
        f64::max,
    )
}

/// Sum of squared deviations from the balanced vector, and that sum over `n`.
pub fn potential<L: Load>(x: &[L], graph: &Graph) -> Potential {
    let share = balanced_share(graph, total_load(x));
    let phi = block_reduce(x, 0.0, |i, v| (v - share(i)).powi(2), |a, b| a + b);
    Potential {
        phi,
        phi_over_n: phi / graph.n() as f64,
    }
}

pub fn min_load<L: Load>(x: &[L]) -> f64 {
    block_reduce(x, f64::INFINITY, |_, v| v, f64::min)
}

pub fn min_transient<L: Load>(transient: &[L]) -> f64 {
    min_load(transient)
}

pub fn record<L: Load>(round: u64, x: &[L], transient: &[L], graph: &Graph) -> RoundRecord {
    RoundRecord {
        round,
        total_load: total_load(x),
        max_above_avg: max_above_average(x, graph),
        max_local_diff: max_local_difference(x, graph),
        potential_over_n: potential(x, graph).phi_over_n,
        min_load: min_load(x),
        min_transient: min_transient(transient),
    }
}

/// First round `r` after which the best value of `series` improves by less
/// than `tol` within `[r, r + window)`; the remaining imbalance is the median
/// of the series over that window.
pub fn remaining_imbalance(series: &[f64], window: usize, tol: f64) -> Result<ImbalanceVerdict> {
    if window == 0 || series.len() < window {
        return Err(Error::HistoryTooShort {
            available: series.len(),
            requested: window.max(1),
        });
    }
    let mut prefix_min = Vec::with_capacity(series.len());
    let mut best = f64::INFINITY;
    for &v in series {
        best = best.min(v);
        prefix_min.push(best);
    }
    for r in 0..=series.len() - window {
        if prefix_min[r] - prefix_min[r + window - 1] < tol {
            return Ok(ImbalanceVerdict {
                converged_at: Some(r),
                remaining_imbalance: median(&series[r..r + window]),
            });
        }
    }
    Ok(ImbalanceVerdict {
        converged_at: None,
        remaining_imbalance: median(&series[series.len() - window..]),
    })
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.is_empty() {
        f64::NAN
    } else if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}
