//! Error propagation matrices, edge contributions, the exact deviation
//! between discrete and continuous runs, and explicit load bounds.
//!
//! A unit of load moved across edge `(i, j)` in some round changes the later
//! trajectory linearly. For the first-order scheme the response after `s`
//! further rounds is `M^s`; for the second-order scheme it is `Q(s)` with
//! `Q(0) = I`, `Q(1) = beta M`, `Q(s) = beta M Q(s-1) + (1 - beta) Q(s-2)`.
//! Both are polynomials in `M`, so row `k` of either can be advanced with
//! sparse row-times-`M` products instead of dense matrix powers.

use nalgebra::DMatrix;

use crate::diffusion::{Rounding, Scheme, SchemeConfig, Simulator};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectral::{self, DEFAULT_DENSE_CAP};

pub const DEFAULT_UPSILON_TOL: f64 = 1e-12;

/// `Q(0..=T)` stored densely.
#[derive(Clone, Debug)]
pub struct QSeries {
    pub beta: f64,
    pub matrices: Vec<DMatrix<f64>>,
}

impl QSeries {
    pub fn horizon(&self) -> usize {
        self.matrices.len() - 1
    }

    pub fn column_sums(&self, t: usize) -> Vec<f64> {
        self.matrices[t].row_sum().iter().copied().collect()
    }
}

fn check_cap(graph: &Graph) -> Result<()> {
    if graph.n() > DEFAULT_DENSE_CAP {
        return Err(Error::DenseCapExceeded {
            n: graph.n(),
            cap: DEFAULT_DENSE_CAP,
        });
    }
    Ok(())
}

pub fn q_series(graph: &Graph, beta: f64, horizon: usize) -> Result<QSeries> {
    check_cap(graph)?;
    let n = graph.n();
    let m = graph.diffusion_matrix();
    let mut matrices = vec![DMatrix::identity(n, n)];
    if horizon >= 1 {
        matrices.push(&m * beta);
    }
    for t in 2..=horizon {
        let next = &m * &matrices[t - 1] * beta + &matrices[t - 2] * (1.0 - beta);
        matrices.push(next);
    }
    Ok(QSeries { beta, matrices })
}

/// Closed form of the scalar sequence `g(0) = 1`, `g(1) = beta mu`,
/// `g(t) = beta mu g(t-1) + (1 - beta) g(t-2)` for an eigenvalue `mu` of `M`,
/// valid when `beta` is optimal for `lambda`.
pub fn gamma_closed_form(mu: f64, lambda: f64, beta: f64, t: u32) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidLambda(lambda));
    }
    let expected = spectral::beta_opt(lambda)?;
    if (beta - expected).abs() > 1e-9 * expected {
        return Err(Error::InvalidBeta(beta));
    }
    let eps = 1e-12;
    let sigma = beta - 1.0;
    let r = sigma.max(0.0).sqrt();
    let ti = t as i32;
    if (mu - 1.0).abs() <= eps {
        return Ok((1.0 - sigma.powi(ti + 1)) / (2.0 - beta));
    }
    if (mu.abs() - lambda).abs() <= eps {
        return Ok((mu.signum() * r).powi(ti) * f64::from(t + 1));
    }
    if mu.abs() < lambda {
        let theta = (lambda * lambda - mu * mu).sqrt().atan2(mu);
        return Ok(r.powi(ti) * ((f64::from(t) + 1.0) * theta).sin() / theta.sin());
    }
    Err(Error::InvalidConfig(format!(
        "eigenvalue {mu} outside the range covered by lambda = {lambda}"
    )))
}

/// The same sequence by direct recursion.
pub fn gamma_recursion(mu: f64, beta: f64, t: u32) -> f64 {
    let (mut prev, mut cur) = (1.0, beta * mu);
    if t == 0 {
        return prev;
    }
    for _ in 1..t {
        let next = beta * mu * cur + (1.0 - beta) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `Q(t)` rebuilt from its spectral decomposition with [`gamma_closed_form`];
/// uses the optimal beta for the graph.
pub fn q_from_spectrum(graph: &Graph, t: u32) -> Result<DMatrix<f64>> {
    check_cap(graph)?;
    let lambda = spectral::lambda2(graph)?.lambda;
    let beta = spectral::beta_opt(lambda)?;
    let basis = spectral::eigenbasis(graph)?;
    let n = graph.n();
    let mut q = DMatrix::zeros(n, n);
    let inv: Vec<f64> = graph.speeds().iter().map(|s| 1.0 / s).collect();
    for (j, &mu) in basis.values().iter().enumerate() {
        // snap eigenvalues that equal lambda up to solver noise
        let mu_c = if (mu.abs() - lambda).abs() < 1e-10 { mu.signum() * lambda } else { mu };
        let mu_c = if j == 0 { 1.0 } else { mu_c };
        let g = gamma_closed_form(mu_c, lambda, beta, t)?;
        // right eigenvector v of M, left eigenvector S^-1 v
        let v = basis.vector(j);
        for a in 0..n {
            for b in 0..n {
                q[(a, b)] += g * v[a] * v[b] * inv[b];
            }
        }
    }
    Ok(q)
}

/// `out = r M` for a row vector `r`.
fn row_times_m(graph: &Graph, r: &[f64], out: &mut [f64]) {
    for j in 0..graph.n() {
        let mut acc = 0.0;
        for slot in graph.slots(j) {
            acc += graph.alpha(slot) * (r[graph.target(slot)] - r[j]);
        }
        out[j] = r[j] + acc / graph.speed(j);
    }
}

/// Generates row `k` of `M^s` (first order) or `Q(s)` (second order) for
/// `s = 0, 1, 2, ...`.
struct ResponseRows<'g> {
    graph: &'g Graph,
    scheme: Scheme,
    beta: f64,
    prev: Vec<f64>,
    cur: Vec<f64>,
    scratch: Vec<f64>,
    s: usize,
}

impl<'g> ResponseRows<'g> {
    fn new(graph: &'g Graph, scheme: Scheme, beta: f64, k: usize) -> Self {
        let n = graph.n();
        let mut cur = vec![0.0; n];
        cur[k] = 1.0;
        ResponseRows {
            graph,
            scheme,
            beta,
            prev: vec![0.0; n],
            cur,
            scratch: vec![0.0; n],
            s: 0,
        }
    }

    fn current(&self) -> &[f64] {
        &self.cur
    }

    fn advance(&mut self) {
        row_times_m(self.graph, &self.cur, &mut self.scratch);
        match self.scheme {
            Scheme::Fos => {}
            Scheme::Sos => {
                let first = self.s == 0;
                for (i, v) in self.scratch.iter_mut().enumerate() {
                    *v = if first {
                        self.beta * *v
                    } else {
                        self.beta * *v + (1.0 - self.beta) * self.prev[i]
                    };
                }
            }
        }
        std::mem::swap(&mut self.prev, &mut self.cur);
        std::mem::swap(&mut self.cur, &mut self.scratch);
        self.s += 1;
    }
}

fn response_rows(graph: &Graph, scheme: Scheme, beta: f64, k: usize, horizon: usize) -> Vec<Vec<f64>> {
    let mut gen = ResponseRows::new(graph, scheme, beta, k);
    let mut rows = Vec::with_capacity(horizon + 1);
    rows.push(gen.current().to_vec());
    for _ in 0..horizon {
        gen.advance();
        rows.push(gen.current().to_vec());
    }
    rows
}

/// Effect on node `k` after `s` rounds of moving one unit across each edge.
/// Edges are listed once, oriented `i < j` as in [`Graph::edges`].
#[derive(Clone, Debug)]
pub struct ContributionTable {
    pub k: usize,
    pub edges: Vec<(usize, usize)>,
    /// `values[s][e]` for edge index `e`.
    pub values: Vec<Vec<f64>>,
}

impl ContributionTable {
    /// Contribution of the directed edge `(i, j)` at `s`; antisymmetric.
    pub fn get(&self, i: usize, j: usize, s: usize) -> Option<f64> {
        let (a, b, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        let e = self.edges.iter().position(|&p| p == (a, b))?;
        Some(sign * self.values[s][e])
    }
}

fn diffs(graph: &Graph, row: &[f64]) -> Vec<f64> {
    graph.edges().map(|(i, j, _)| row[i] - row[j]).collect()
}

/// First order: row `k` of `M^s` differenced over each edge. Second order:
/// the same with `Q(s-1)`, and zero at `s = 0`.
pub fn contributions(graph: &Graph, scheme: Scheme, beta: f64, k: usize, horizon: usize) -> Result<ContributionTable> {
    check_cap(graph)?;
    if k >= graph.n() {
        return Err(Error::NodeOutOfRange { node: k, n: graph.n() });
    }
    let edges: Vec<(usize, usize)> = graph.edges().map(|(i, j, _)| (i, j)).collect();
    let rows = response_rows(graph, scheme, beta, k, horizon);
    let values = (0..=horizon)
        .map(|s| match scheme {
            Scheme::Fos => diffs(graph, &rows[s]),
            Scheme::Sos if s == 0 => vec![0.0; edges.len()],
            Scheme::Sos => diffs(graph, &rows[s - 1]),
        })
        .collect();
    Ok(ContributionTable { k, edges, values })
}

/// Predicted `x_D(t)_k - x_C(t)_k` for paired runs of the same scheme from
/// the same start, given the per-slot rounding errors of rounds `0..t` of the
/// discrete run. A unit injected in round `t - s` has passed through `s - 1`
/// further rounds by the end of round `t - 1`, so the response row used for
/// lag `s` is that of `s - 1`. Runs that switch scheme midway are not covered.
pub fn deviation_rhs(graph: &Graph, scheme: Scheme, beta: f64, errors: &[Vec<f64>], k: usize, t: usize) -> Result<f64> {
    if errors.len() < t {
        return Err(Error::HistoryTooShort {
            available: errors.len(),
            requested: t,
        });
    }
    if k >= graph.n() {
        return Err(Error::NodeOutOfRange { node: k, n: graph.n() });
    }
    if t == 0 {
        return Ok(0.0);
    }
    let rows = response_rows(graph, scheme, beta, k, t - 1);
    let mut total = 0.0;
    for s in 1..=t {
        let row = &rows[s - 1];
        let e = &errors[t - s];
        for (i, j, slot) in graph.edges() {
            total += e[slot] * (row[i] - row[j]);
        }
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpsilonOptions {
    pub tol: f64,
    pub t_max: usize,
}

impl UpsilonOptions {
    /// Default tolerance and a horizon of `ceil(50 / (1 - lambda))` rounds.
    pub fn for_lambda(lambda: f64) -> Self {
        UpsilonOptions {
            tol: DEFAULT_UPSILON_TOL,
            t_max: (50.0 / (1.0 - lambda)).ceil() as usize,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpsilonReport {
    pub value: f64,
    /// Largest number of terms needed over all target nodes.
    pub truncated_at: usize,
}

/// Square root of the largest, over target nodes `k`, sum over `s` and `i` of
/// the squared worst-neighbor contribution. Each per-`k` series stops once a
/// term falls below `tol` times the running sum.
pub fn upsilon(graph: &Graph, scheme: Scheme, beta: f64, opts: UpsilonOptions) -> Result<UpsilonReport> {
    check_cap(graph)?;
    let n = graph.n();
    let term = |row: &[f64]| -> f64 {
        (0..n)
            .map(|i| graph.neighbors(i).map(|j| (row[i] - row[j]).powi(2)).fold(0.0, f64::max))
            .sum()
    };
    let mut best = 0.0f64;
    let mut truncated_at = 0;
    let mut converged = true;
    for k in 0..n {
        let mut gen = ResponseRows::new(graph, scheme, beta, k);
        let mut acc = 0.0;
        let mut s = 0;
        let mut done = false;
        while s <= opts.t_max {
            let value = match scheme {
                Scheme::Fos => {
                    let v = term(gen.current());
                    gen.advance();
                    v
                }
                Scheme::Sos if s == 0 => 0.0,
                Scheme::Sos => {
                    let v = term(gen.current());
                    gen.advance();
                    v
                }
            };
            acc += value;
            s += 1;
            if value < opts.tol * acc {
                done = true;
                break;
            }
        }
        converged &= done;
        truncated_at = truncated_at.max(s);
        best = best.max(acc);
    }
    if !converged {
        return Err(Error::UpsilonNotConverged {
            partial: best.sqrt(),
            t_max: opts.t_max,
        });
    }
    Ok(UpsilonReport {
        value: best.sqrt(),
        truncated_at,
    })
}

/// Explicit first-order bound on the refined local divergence:
/// `sqrt(4 d ceil(t1) + 8 d s_max lambda^(2 ceil(t1)) / (1 - lambda))` with
/// `t1 = ln(s_max) / (2 - 2 lambda)`.
pub fn fos_upsilon_bound(max_degree: usize, s_max: f64, lambda: f64) -> f64 {
    let d = max_degree as f64;
    let t1 = (s_max.ln() / (2.0 - 2.0 * lambda)).ceil();
    (4.0 * d * t1 + 8.0 * d * s_max * lambda.powf(2.0 * t1) / (1.0 - lambda)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NegativeLoadVariant {
    /// Loads at the end of a round.
    EndOfRound,
    /// Transient loads of the continuous second-order process.
    TransientContinuous,
    /// Transient loads of the discrete second-order process on a graph with
    /// maximum degree `max_degree`.
    TransientDiscrete { max_degree: usize },
}

/// Lower bound on loads given `delta0 = max_i |x_i(0) - xbar_i|`.
pub fn negative_load_floor(n: usize, delta0: f64, lambda: f64, variant: NegativeLoadVariant) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidLambda(lambda));
    }
    let base = (n as f64).sqrt() * delta0;
    let gap = (1.0 - lambda).sqrt();
    Ok(match variant {
        NegativeLoadVariant::EndOfRound => -base,
        NegativeLoadVariant::TransientContinuous => -(base + 16.0 * base / gap),
        NegativeLoadVariant::TransientDiscrete { max_degree } => {
            let d2 = (max_degree * max_degree) as f64;
            -(base + 16.0 * (base + d2) / gap)
        }
    })
}

/// Finite-size stand-in for the asymptotic premise of the discrete transient
/// bound: `d / (1 - lambda)^(3/4) <= sqrt(n)` and `s_max <= n^2`.
pub fn discrete_premise_holds(n: usize, max_degree: usize, lambda: f64, s_max: f64) -> bool {
    let nf = n as f64;
    max_degree as f64 / (1.0 - lambda).powf(0.75) <= nf.sqrt() && s_max <= nf * nf
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeviationBound {
    /// Second order with floor or ceiling rounding: `16 d sqrt(2 n s_max) / (1 - lambda)`.
    SosDeterministic,
    /// First order with randomized rounding, `d sqrt(log n log s_max / (1 - lambda))`; monitored only.
    FosRandomized,
    /// Second order with randomized rounding, `d log s_max sqrt(log n) / (1 - lambda)^(3/4)`; monitored only.
    SosRandomized,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub quantity: String,
    pub bound: f64,
    pub observed: f64,
    pub satisfied: bool,
    /// False for order-of-magnitude expressions whose constant is unknown;
    /// for those only `ratio` is meaningful.
    pub enforced: bool,
}

impl BoundReport {
    pub fn ratio(&self) -> f64 {
        self.observed / self.bound
    }
}

/// Value of a deviation bound expression. Logarithms are natural and
/// `log s_max` is floored at 1 so homogeneous graphs do not collapse to zero.
pub fn deviation_bound(kind: DeviationBound, n: usize, max_degree: usize, lambda: f64, s_max: f64) -> f64 {
    let d = max_degree as f64;
    let nf = n as f64;
    let log_s = s_max.ln().max(1.0);
    match kind {
        DeviationBound::SosDeterministic => 16.0 * d * (2.0 * nf * s_max).sqrt() / (1.0 - lambda),
        DeviationBound::FosRandomized => d * (nf.ln() * log_s / (1.0 - lambda)).sqrt(),
        DeviationBound::SosRandomized => d * log_s * nf.ln().sqrt() / (1.0 - lambda).powf(0.75),
    }
}

/// Compare `max_{t,k} |x_D(t)_k - x_C(t)_k|` over two load histories with a
/// deviation bound.
pub fn deviation_bound_check(
    discrete: &[Vec<f64>],
    continuous: &[Vec<f64>],
    kind: DeviationBound,
    graph: &Graph,
    lambda: f64,
) -> Result<BoundReport> {
    if discrete.len() != continuous.len() {
        return Err(Error::DimensionMismatch {
            expected: continuous.len(),
            actual: discrete.len(),
        });
    }
    let mut observed = 0.0f64;
    for (a, b) in discrete.iter().zip(continuous) {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: b.len(),
                actual: a.len(),
            });
        }
        for (p, q) in a.iter().zip(b) {
            observed = observed.max((p - q).abs());
        }
    }
    let bound = deviation_bound(kind, graph.n(), graph.max_degree(), lambda, graph.max_speed());
    let enforced = kind == DeviationBound::SosDeterministic;
    Ok(BoundReport {
        quantity: format!("{kind:?}"),
        bound,
        observed,
        satisfied: observed <= bound,
        enforced,
    })
}

/// Load histories of a discrete run and its continuous counterpart from the
/// same start, plus the discrete run's per-round rounding errors.
/// `discrete[t]` and `continuous[t]` hold the loads at the start of round `t`.
#[derive(Clone, Debug)]
pub struct PairedRun {
    pub discrete: Vec<Vec<f64>>,
    pub continuous: Vec<Vec<f64>>,
    pub errors: Vec<Vec<f64>>,
    pub min_discrete_transient: f64,
}

pub fn paired_run(graph: &Graph, config: &SchemeConfig, beta: f64, x0: &[i64]) -> Result<PairedRun> {
    let mut discrete = Simulator::with_beta(graph, config.clone(), beta, x0.to_vec())?;
    let continuous_config = SchemeConfig {
        rounding: Rounding::None,
        ..config.clone()
    };
    let x0f: Vec<f64> = x0.iter().map(|&v| v as f64).collect();
    let mut continuous = Simulator::with_beta(graph, continuous_config, beta, x0f.clone())?;
    let mut out = PairedRun {
        discrete: vec![x0f.clone()],
        continuous: vec![x0f],
        errors: Vec::new(),
        min_discrete_transient: f64::INFINITY,
    };
    for _ in 0..config.rounds {
        let rec = discrete.step();
        continuous.step();
        out.min_discrete_transient = out.min_discrete_transient.min(rec.min_transient);
        out.errors.push(discrete.errors().to_vec());
        out.discrete.push(discrete.loads().iter().map(|&v| v as f64).collect());
        out.continuous.push(continuous.loads().to_vec());
    }
    Ok(out)
}
