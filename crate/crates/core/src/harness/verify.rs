//! Numeric checks of the theory module against simulated runs.

use std::fmt;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diffusion::{BetaChoice, Rounding, Scheme, SchemeConfig, Simulator};
use crate::error::Result;
use crate::graph::Graph;
use crate::spectral;
use crate::theory::{self, DeviationBound, NegativeLoadVariant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    LemmaDeterministic,
    QSeries,
    Gamma,
    NegativeLoad,
    DeviationBound,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::LemmaDeterministic => "lemma-deterministic",
            Suite::QSeries => "q-series",
            Suite::Gamma => "gamma",
            Suite::NegativeLoad => "negative-load",
            Suite::DeviationBound => "deviation-bound",
            Suite::All => "all",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Seeds per graph, scheme and rounding for the identity check.
    pub seeds: u64,
    pub horizon: usize,
    /// Random graphs for the Q and gamma checks.
    pub instances: usize,
    pub q_horizon: usize,
    pub negative_load_runs: usize,
    pub negative_load_rounds: u64,
    pub bound_horizon: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            seeds: 20,
            horizon: 20,
            instances: 50,
            q_horizon: 30,
            negative_load_runs: 100,
            negative_load_rounds: 300,
            bound_horizon: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {} {}: {}", self.suite, self.name, self.detail)
    }
}

pub fn write_report_csv(path: &Path, lines: &[CheckLine]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "suite,check,passed,detail")?;
    for l in lines {
        writeln!(f, "{},{},{},\"{}\"", l.suite, l.name, l.passed, l.detail.replace('"', "'"))?;
    }
    f.flush()?;
    Ok(())
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<CheckLine>> {
    Ok(match suite {
        Suite::LemmaDeterministic => lemma_deterministic(opts)?,
        Suite::QSeries => q_series_checks(opts)?,
        Suite::Gamma => gamma_checks(opts)?,
        Suite::NegativeLoad => negative_load(opts)?,
        Suite::DeviationBound => deviation_bound(opts)?,
        Suite::All => {
            let mut all = Vec::new();
            for s in [
                Suite::LemmaDeterministic,
                Suite::QSeries,
                Suite::Gamma,
                Suite::NegativeLoad,
                Suite::DeviationBound,
            ] {
                all.extend(run_suite(s, opts)?);
            }
            all
        }
    })
}

/// K2, the 4-cycle, the 3x3 torus and a 4-node path with speeds 1..4.
pub fn canonical_graphs() -> Result<Vec<(&'static str, Graph)>> {
    Ok(vec![
        ("K2", Graph::complete(2)?),
        ("C4", Graph::cycle(4)?),
        ("torus3x3", Graph::torus2d(3, 3)?),
        ("path4-speeds", Graph::path(4)?.with_speeds(vec![1.0, 2.0, 3.0, 4.0])?),
    ])
}

/// Connected graph on 2..=32 nodes: a random tree plus random extra edges;
/// odd instances get integer speeds in 1..=4.
pub fn random_connected_graph(instance: u64, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ instance.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let n = rng.random_range(2..=32usize);
    let p = rng.random_range(0.0..0.3);
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((rng.random_range(0..i), i));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) && !edges.contains(&(i, j)) {
                edges.push((i, j));
            }
        }
    }
    let g = Graph::from_edges(n, &edges)?;
    if instance % 2 == 1 {
        let speeds = (0..n).map(|_| rng.random_range(1..=4) as f64).collect();
        g.with_speeds(speeds)
    } else {
        Ok(g)
    }
}

fn random_loads(n: usize, seed: u64) -> Vec<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(0..=50)).collect()
}

fn config(scheme: Scheme, rounding: Rounding, rounds: u64, seed: u64) -> SchemeConfig {
    SchemeConfig {
        scheme,
        beta: BetaChoice::Auto,
        rounding,
        switch_at: None,
        rounds,
        seed,
    }
}

/// Largest mismatch between the predicted and the simulated deviation over
/// all nodes and rounds `1..=horizon`.
pub fn identity_residual(graph: &Graph, scheme: Scheme, rounding: Rounding, horizon: usize, seed: u64) -> Result<f64> {
    let cfg = config(scheme, rounding, horizon as u64, seed);
    let beta = cfg.resolve_beta(graph)?;
    let x0 = random_loads(graph.n(), seed.wrapping_add(1));
    let run = theory::paired_run(graph, &cfg, beta, &x0)?;
    let mut worst = 0.0f64;
    for t in 1..=horizon {
        for k in 0..graph.n() {
            let predicted = theory::deviation_rhs(graph, scheme, beta, &run.errors, k, t)?;
            let actual = run.discrete[t][k] - run.continuous[t][k];
            worst = worst.max((predicted - actual).abs());
        }
    }
    Ok(worst)
}

fn lemma_deterministic(opts: &VerifyOptions) -> Result<Vec<CheckLine>> {
    let mut out = Vec::new();
    for (name, g) in canonical_graphs()? {
        for scheme in [Scheme::Fos, Scheme::Sos] {
            for rounding in [Rounding::Floor, Rounding::Randomized] {
                let mut worst = 0.0f64;
                for s in 0..opts.seeds {
                    worst = worst.max(identity_residual(&g, scheme, rounding, opts.horizon, opts.seed + s)?);
                }
                out.push(CheckLine {
                    suite: "lemma-deterministic",
                    name: format!("{name}/{scheme}/{rounding}"),
                    passed: worst <= 1e-9,
                    detail: format!("max residual {worst:.3e} over {} seeds, t <= {}", opts.seeds, opts.horizon),
                });
            }
        }
    }
    Ok(out)
}

fn snap(mu: f64, lambda: f64) -> f64 {
    if (mu.abs() - lambda).abs() < 1e-10 {
        mu.signum() * lambda
    } else {
        mu
    }
}

fn q_series_checks(opts: &VerifyOptions) -> Result<Vec<CheckLine>> {
    let mut sums_worst = 0.0f64;
    let mut spectrum_worst = 0.0f64;
    for inst in 0..opts.instances as u64 {
        let g = random_connected_graph(inst, opts.seed)?;
        let beta = spectral::beta_opt(spectral::lambda2(&g)?.lambda)?;
        let q = theory::q_series(&g, beta, opts.q_horizon)?;
        for t in 0..=opts.q_horizon {
            let sums = q.column_sums(t);
            let lo = sums.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            sums_worst = sums_worst.max(hi - lo);
            let spec = theory::q_from_spectrum(&g, t as u32)?;
            spectrum_worst = spectrum_worst.max((&spec - &q.matrices[t]).abs().max());
        }
    }
    Ok(vec![
        CheckLine {
            suite: "q-series",
            name: "equal-column-sums".into(),
            passed: sums_worst <= 1e-10,
            detail: format!("max spread {sums_worst:.3e} over {} graphs", opts.instances),
        },
        CheckLine {
            suite: "q-series",
            name: "spectral-reconstruction".into(),
            passed: spectrum_worst <= 1e-8,
            detail: format!("max entry error {spectrum_worst:.3e}"),
        },
    ])
}

fn gamma_checks(opts: &VerifyOptions) -> Result<Vec<CheckLine>> {
    let mut closed_worst = 0.0f64;
    let mut bound_excess = f64::NEG_INFINITY;
    for inst in 0..opts.instances as u64 {
        let g = random_connected_graph(inst, opts.seed)?;
        let lambda = spectral::lambda2(&g)?.lambda;
        let beta = spectral::beta_opt(lambda)?;
        let basis = spectral::eigenbasis(&g)?;
        let r = (beta - 1.0).max(0.0).sqrt();
        for (j, &mu) in basis.values().iter().enumerate() {
            let mu = if j == 0 { 1.0 } else { snap(mu, lambda) };
            for t in 0..=opts.q_horizon as u32 {
                let closed = theory::gamma_closed_form(mu, lambda, beta, t)?;
                let rec = theory::gamma_recursion(mu, beta, t);
                closed_worst = closed_worst.max((closed - rec).abs());
                if j > 0 {
                    let bound = r.powi(t as i32) * f64::from(t + 1);
                    bound_excess = bound_excess.max(rec.abs() - bound);
                }
            }
        }
    }
    Ok(vec![
        CheckLine {
            suite: "gamma",
            name: "closed-form-vs-recursion".into(),
            passed: closed_worst <= 1e-9,
            detail: format!("max difference {closed_worst:.3e} over {} graphs", opts.instances),
        },
        CheckLine {
            suite: "gamma",
            name: "eigenvalue-bound".into(),
            passed: bound_excess <= 1e-9,
            detail: format!("max excess over bound {bound_excess:.3e}"),
        },
    ])
}

/// Cycles and tori with at most 64 nodes.
pub fn small_graphs() -> Result<Vec<(String, Graph)>> {
    let mut out = Vec::new();
    for n in [3, 4, 5, 8, 16, 31, 64] {
        out.push((format!("cycle{n}"), Graph::cycle(n)?));
    }
    for (w, h) in [(3, 3), (4, 4), (5, 3), (6, 6), (8, 8)] {
        out.push((format!("torus{w}x{h}"), Graph::torus2d(w, h)?));
    }
    Ok(out)
}

/// Lowest end-of-round and transient loads of one randomized second-order
/// run from a corner start, with the matching floors.
#[derive(Clone, Copy, Debug)]
pub struct NegativeLoadRun {
    pub min_load: f64,
    pub min_transient: f64,
    pub end_floor: f64,
    pub transient_floor: f64,
}

pub fn negative_load_run(graph: &Graph, rounds: u64, seed: u64) -> Result<NegativeLoadRun> {
    let n = graph.n();
    let cfg = config(Scheme::Sos, Rounding::Randomized, rounds, seed);
    let lambda = spectral::lambda2(graph)?.lambda;
    let mut x0 = vec![0i64; n];
    x0[0] = 1000 * n as i64;
    let total = 1000.0 * n as f64;
    let s = graph.total_speed();
    let delta0 = (0..n)
        .map(|i| (x0[i] as f64 - total * graph.speed(i) / s).abs())
        .fold(0.0, f64::max);
    let mut sim = Simulator::new(graph, cfg, x0)?;
    let mut min_load = f64::INFINITY;
    let mut min_transient = f64::INFINITY;
    for rec in sim.run_with(|_, _| Ok(()))? {
        min_load = min_load.min(rec.min_load);
        min_transient = min_transient.min(rec.min_transient);
    }
    Ok(NegativeLoadRun {
        min_load,
        min_transient,
        end_floor: theory::negative_load_floor(n, delta0, lambda, NegativeLoadVariant::EndOfRound)?,
        transient_floor: theory::negative_load_floor(
            n,
            delta0,
            lambda,
            NegativeLoadVariant::TransientDiscrete {
                max_degree: graph.max_degree(),
            },
        )?,
    })
}

fn negative_load(opts: &VerifyOptions) -> Result<Vec<CheckLine>> {
    let graphs = small_graphs()?;
    let mut end_ok = true;
    let mut transient_ok = true;
    let mut end_margin = f64::INFINITY;
    let mut transient_margin = f64::INFINITY;
    for r in 0..opts.negative_load_runs {
        let (_, g) = &graphs[r % graphs.len()];
        let run = negative_load_run(g, opts.negative_load_rounds, opts.seed + r as u64)?;
        end_ok &= run.min_load >= run.end_floor;
        transient_ok &= run.min_transient >= run.transient_floor;
        end_margin = end_margin.min(run.min_load - run.end_floor);
        transient_margin = transient_margin.min(run.min_transient - run.transient_floor);
    }
    Ok(vec![
        CheckLine {
            suite: "negative-load",
            name: "end-of-round".into(),
            passed: end_ok,
            detail: format!("{} runs, smallest margin {end_margin:.3}", opts.negative_load_runs),
        },
        CheckLine {
            suite: "negative-load",
            name: "transient".into(),
            passed: transient_ok,
            detail: format!("{} runs, smallest margin {transient_margin:.3}", opts.negative_load_runs),
        },
    ])
}

fn deviation_bound(opts: &VerifyOptions) -> Result<Vec<CheckLine>> {
    let mut out = Vec::new();
    for (name, g) in canonical_graphs()? {
        let lambda = spectral::lambda2(&g)?.lambda;
        let mut worst_ratio = 0.0f64;
        let mut ok = true;
        for s in 0..opts.seeds {
            let cfg = config(Scheme::Sos, Rounding::Floor, opts.bound_horizon, opts.seed + s);
            let beta = cfg.resolve_beta(&g)?;
            let x0 = random_loads(g.n(), opts.seed + s + 1);
            let run = theory::paired_run(&g, &cfg, beta, &x0)?;
            let rep = theory::deviation_bound_check(
                &run.discrete,
                &run.continuous,
                DeviationBound::SosDeterministic,
                &g,
                lambda,
            )?;
            ok &= rep.satisfied;
            worst_ratio = worst_ratio.max(rep.ratio());
        }
        out.push(CheckLine {
            suite: "deviation-bound",
            name: format!("{name}/sos/floor"),
            passed: ok,
            detail: format!("max observed/bound {worst_ratio:.3e}, t <= {}", opts.bound_horizon),
        });
    }
    Ok(out)
}
