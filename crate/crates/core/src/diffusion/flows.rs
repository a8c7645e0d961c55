//! Per-edge flow schedules, rounding to integral flows, and flow application.
//!
//! All per-slot buffers are indexed like [`Graph`] slots. Work is split into
//! fixed blocks of consecutive nodes; every node writes only its own slots,
//! so results do not depend on how blocks are distributed over threads.

use rand::Rng;
use rayon::prelude::*;

use super::rng::node_rng;
use super::{RoundingErrors, ScheduledFlows};
use crate::graph::Graph;
use crate::load::Load;
use crate::metrics::BLOCK;

/// Calls `f(i, own_slots_a, own_slots_b)` for every node, in parallel over
/// node blocks.
pub(crate) fn par_nodes2<A: Send, B: Send>(
    graph: &Graph,
    a: &mut [A],
    b: &mut [B],
    f: impl Fn(usize, &mut [A], &mut [B]) + Sync,
) {
    let offsets = graph.offsets();
    let n = graph.n();
    let mut jobs = Vec::with_capacity(n.div_ceil(BLOCK));
    let (mut rest_a, mut rest_b) = (a, b);
    for start in (0..n).step_by(BLOCK) {
        let end = (start + BLOCK).min(n);
        let len = offsets[end] - offsets[start];
        let (ha, ta) = rest_a.split_at_mut(len);
        let (hb, tb) = rest_b.split_at_mut(len);
        jobs.push((start, end, ha, hb));
        rest_a = ta;
        rest_b = tb;
    }
    jobs.into_par_iter().for_each(|(start, end, mut ha, mut hb)| {
        for i in start..end {
            let deg = graph.degree(i);
            let (na, ta) = ha.split_at_mut(deg);
            let (nb, tb) = hb.split_at_mut(deg);
            f(i, na, nb);
            ha = ta;
            hb = tb;
        }
    });
}

pub(crate) fn par_nodes<A: Send>(graph: &Graph, a: &mut [A], f: impl Fn(usize, &mut [A]) + Sync) {
    let mut unit = vec![(); a.len()];
    par_nodes2(graph, a, &mut unit, |i, na, _| f(i, na));
}

/// First-order schedule `alpha_ij (x_i/s_i - x_j/s_j)` into `out`.
pub fn fos_flows_into<L: Load>(graph: &Graph, x: &[L], out: &mut [f64]) {
    let s = graph.speeds();
    par_nodes(graph, out, |i, own| {
        let xi = x[i].to_f64() / s[i];
        for (k, slot) in graph.slots(i).enumerate() {
            let j = graph.target(slot);
            own[k] = graph.alpha(slot) * (xi - x[j].to_f64() / s[j]);
        }
    });
}

/// Second-order schedule `(beta-1) y_prev + beta alpha_ij (x_i/s_i - x_j/s_j)`.
pub fn sos_flows_into<L: Load>(graph: &Graph, x: &[L], y_prev: &[L], beta: f64, out: &mut [f64]) {
    let s = graph.speeds();
    let keep = beta - 1.0;
    let offsets = graph.offsets();
    par_nodes(graph, out, |i, own| {
        let xi = x[i].to_f64() / s[i];
        let base = offsets[i];
        for (k, slot) in graph.slots(i).enumerate() {
            let j = graph.target(slot);
            let push = (beta * graph.alpha(slot)) * (xi - x[j].to_f64() / s[j]);
            own[k] = keep * y_prev[base + k].to_f64() + push;
        }
    });
}

pub fn fos_flows<L: Load>(graph: &Graph, x: &[L]) -> ScheduledFlows {
    let mut out = vec![0.0; graph.slot_count()];
    fos_flows_into(graph, x, &mut out);
    ScheduledFlows(out)
}

pub fn sos_flows<L: Load>(graph: &Graph, x: &[L], y_prev: &[L], beta: f64) -> ScheduledFlows {
    let mut out = vec![0.0; graph.slot_count()];
    sos_flows_into(graph, x, y_prev, beta, &mut out);
    ScheduledFlows(out)
}

/// Floor the positive side of every edge. Both slots of an edge are derived
/// from the positive schedule, so the result is exactly antisymmetric.
pub fn round_floor_into(graph: &Graph, schedule: &[f64], flows: &mut [i64], errors: &mut [f64]) {
    let offsets = graph.offsets();
    par_nodes2(graph, flows, errors, |i, f, e| {
        for k in 0..f.len() {
            let slot = offsets[i] + k;
            let y = schedule[slot];
            let (sign, pos) = if y > 0.0 {
                (1, y)
            } else if y < 0.0 {
                (-1, schedule[graph.reverse(slot)])
            } else {
                (0, 0.0)
            };
            let fl = pos.floor();
            f[k] = sign * fl as i64;
            e[k] = sign as f64 * (pos - fl);
        }
    });
}

/// Randomized rounding. Each node floors its positive outgoing flows, then
/// sends `ceil(r)` extra tokens where `r` is the sum of the fractional parts.
/// A token draws `w` uniform in `[0, ceil(r))`: if `w >= r` it stays, else it
/// goes to the neighbor whose cumulative fractional interval contains `w`.
///
/// `scratch_flows` and `scratch_errors` hold the positive-side results before
/// they are mirrored onto the reverse slots.
#[allow(clippy::too_many_arguments)]
pub fn round_randomized_into(
    graph: &Graph,
    schedule: &[f64],
    seed: u64,
    round: u64,
    flows: &mut [i64],
    errors: &mut [f64],
    scratch_flows: &mut [i64],
    scratch_errors: &mut [f64],
) {
    let offsets = graph.offsets();
    par_nodes2(graph, scratch_flows, scratch_errors, |i, f, e| {
        let own = &schedule[offsets[i]..offsets[i] + f.len()];
        let mut r = 0.0;
        for k in 0..own.len() {
            if own[k] > 0.0 {
                let fl = own[k].floor();
                f[k] = fl as i64;
                e[k] = own[k] - fl;
                r += e[k];
            } else {
                f[k] = 0;
                e[k] = 0.0;
            }
        }
        if r > 0.0 {
            let tokens = r.ceil();
            let mut rng = node_rng(seed, i as u64, round);
            for _ in 0..tokens as u64 {
                let w = rng.random::<f64>() * tokens;
                if w >= r {
                    continue;
                }
                let mut cum = 0.0;
                let mut dest = None;
                for k in 0..own.len() {
                    if e[k] > 0.0 {
                        cum += e[k];
                        dest = Some(k);
                        if w < cum {
                            break;
                        }
                    }
                }
                // cum may fall short of r by rounding; the last candidate absorbs it
                f[dest.expect("r > 0 implies a fractional flow")] += 1;
            }
            for k in 0..own.len() {
                if own[k] > 0.0 {
                    e[k] -= (f[k] - own[k].floor() as i64) as f64;
                }
            }
        }
    });
    par_nodes2(graph, flows, errors, |i, f, e| {
        for k in 0..f.len() {
            let slot = offsets[i] + k;
            let y = schedule[slot];
            if y > 0.0 {
                f[k] = scratch_flows[slot];
                e[k] = scratch_errors[slot];
            } else if y < 0.0 {
                let rev = graph.reverse(slot);
                f[k] = -scratch_flows[rev];
                e[k] = -scratch_errors[rev];
            } else {
                f[k] = 0;
                e[k] = 0.0;
            }
        }
    });
}

pub fn round_floor(graph: &Graph, schedule: &ScheduledFlows) -> (Vec<i64>, RoundingErrors) {
    let mut flows = vec![0; graph.slot_count()];
    let mut errors = vec![0.0; graph.slot_count()];
    round_floor_into(graph, &schedule.0, &mut flows, &mut errors);
    (flows, RoundingErrors(errors))
}

pub fn round_randomized(graph: &Graph, schedule: &ScheduledFlows, seed: u64, round: u64) -> (Vec<i64>, RoundingErrors) {
    let m = graph.slot_count();
    let mut flows = vec![0; m];
    let mut errors = vec![0.0; m];
    let mut sf = vec![0; m];
    let mut se = vec![0.0; m];
    round_randomized_into(graph, &schedule.0, seed, round, &mut flows, &mut errors, &mut sf, &mut se);
    (flows, RoundingErrors(errors))
}

/// Send all flows: `transient_i = x_i - sum of positive outgoing flows`,
/// `next_i = x_i - sum of all outgoing flows`.
pub fn apply_flows_into<L: Load>(graph: &Graph, x: &[L], flows: &[L], next: &mut [L], transient: &mut [L]) {
    let offsets = graph.offsets();
    let zero = L::zero();
    next.par_chunks_mut(BLOCK)
        .zip(transient.par_chunks_mut(BLOCK))
        .enumerate()
        .for_each(|(b, (nc, tc))| {
            for k in 0..nc.len() {
                let i = b * BLOCK + k;
                let mut sent = zero;
                let mut net = zero;
                for &f in &flows[offsets[i]..offsets[i + 1]] {
                    if f > zero {
                        sent += f;
                    }
                    net += f;
                }
                tc[k] = x[i] - sent;
                nc[k] = x[i] - net;
            }
        });
}

pub fn apply_flows<L: Load>(graph: &Graph, x: &[L], flows: &[L]) -> (Vec<L>, Vec<L>) {
    let mut next = vec![L::zero(); x.len()];
    let mut transient = vec![L::zero(); x.len()];
    apply_flows_into(graph, x, flows, &mut next, &mut transient);
    (next, transient)
}

/// True if `values[slot] == -values[reverse(slot)]` for every slot.
pub fn is_antisymmetric<T>(graph: &Graph, values: &[T]) -> bool
where
    T: Copy + PartialEq + std::ops::Neg<Output = T>,
{
    (0..graph.slot_count()).all(|slot| values[slot] == -values[graph.reverse(slot)])
}
