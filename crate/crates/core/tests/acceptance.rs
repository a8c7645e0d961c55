//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. The 1000x1000 torus variants are slow and only run
//! with `--ignored` or `--include-ignored`; without them the scaled 100x100
//! variants stand in.

use std::cell::Cell;
use std::path::Path;
use std::time::Instant;

use difflb::diffusion::{BetaChoice, Rounding, Scheme, SchemeConfig, Simulator};
use difflb::harness::verify::{canonical_graphs, random_connected_graph};
use difflb::metrics::remaining_imbalance;
use difflb::{spectral, theory, Graph};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

thread_local! {
    /// Conservation and antisymmetry over every trajectory of criteria 5 to 8.
    static INVARIANTS_OK: Cell<bool> = const { Cell::new(true) };
    static INVARIANT_ROUNDS: Cell<u64> = const { Cell::new(0) };
}

// ---- oracles ----

/// Diffusion matrix built straight from the neighbor lists.
fn dense_m(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut out = 0.0;
        for j in g.neighbors(i) {
            let a = 1.0 / (g.degree(i).max(g.degree(j)) + 1) as f64;
            m[(i, j)] = a / g.speed(j);
            out += a;
        }
        m[(i, i)] = 1.0 - out / g.speed(i);
    }
    m
}

/// Eigenvalues of `M` via its symmetrization, sorted by decreasing magnitude.
fn dense_eigenvalues(g: &Graph) -> Vec<f64> {
    let m = dense_m(g);
    let n = g.n();
    let b = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * (g.speed(j) / g.speed(i)).sqrt());
    let b = (&b + b.transpose()) * 0.5;
    let mut v: Vec<f64> = SymmetricEigen::new(b).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    v
}

fn dense_lambda(g: &Graph) -> f64 {
    dense_eigenvalues(g)[1].abs()
}

fn beta_of(lambda: f64) -> f64 {
    2.0 / (1.0 + (1.0 - lambda * lambda).sqrt())
}

fn torus_lambda(w: usize, h: usize) -> f64 {
    let mut best = 0.0f64;
    for a in 0..w {
        for b in 0..h {
            if a == 0 && b == 0 {
                continue;
            }
            let ca = (2.0 * std::f64::consts::PI * a as f64 / w as f64).cos();
            let cb = (2.0 * std::f64::consts::PI * b as f64 / h as f64).cos();
            best = best.max(((1.0 + 2.0 * ca + 2.0 * cb) / 5.0).abs());
        }
    }
    best
}

fn sos_config(rounding: Rounding, rounds: u64, seed: u64) -> SchemeConfig {
    SchemeConfig {
        scheme: Scheme::Sos,
        beta: BetaChoice::Auto,
        rounding,
        switch_at: None,
        rounds,
        seed,
    }
}

fn corner(n: usize) -> Vec<i64> {
    let mut x = vec![0i64; n];
    x[0] = 1000 * n as i64;
    x
}

/// Run a discrete process while checking conservation and antisymmetry
/// after every round; `observe` sees each round's loads.
fn checked_run(
    g: &Graph,
    cfg: SchemeConfig,
    beta: f64,
    x0: Vec<i64>,
    mut observe: impl FnMut(u64, &[i64]),
) -> Vec<difflb::metrics::RoundRecord> {
    let total: i64 = x0.iter().sum();
    let mut sim = Simulator::with_beta(g, cfg, beta, x0).unwrap();
    let mut ok = true;
    let records = sim
        .run_with(|s, rec| {
            ok &= s.loads().iter().sum::<i64>() == total;
            ok &= (0..g.slot_count()).all(|slot| {
                let r = g.reverse(slot);
                s.flows()[slot] == -s.flows()[r] && s.errors()[slot] == -s.errors()[r]
            });
            observe(rec.round, s.loads());
            Ok(())
        })
        .unwrap();
    INVARIANTS_OK.with(|c| c.set(c.get() && ok));
    INVARIANT_ROUNDS.with(|c| c.set(c.get() + records.len() as u64));
    records
}

// ---- criteria ----

fn c1_beta_goldens() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, g, lambda_oracle, golden) in [
        ("torus1000", Graph::torus2d(1000, 1000).unwrap(), torus_lambda(1000, 1000), 1.9920836447),
        ("torus100", Graph::torus2d(100, 100).unwrap(), torus_lambda(100, 100), 1.9235874877),
        ("hypercube20", Graph::hypercube(20).unwrap(), 1.0 - 2.0 / 21.0, 1.4026054847),
    ] {
        let beta = spectral::beta_opt(spectral::lambda2(&g).unwrap().lambda).unwrap();
        let fine = (beta - golden).abs() <= 1e-6 && (beta - beta_of(lambda_oracle)).abs() <= 1e-12;
        ok &= fine;
        notes.push(format!("{name} {beta:.10}"));
    }
    for (name, golden, make) in [
        (
            "regular(1e6,19)",
            1.0651965147,
            Box::new(|s| Graph::random_regular(1_000_000, 19, s)) as Box<dyn Fn(u64) -> difflb::Result<Graph>>,
        ),
        (
            "geometric(1e4)",
            1.9554636334,
            Box::new(|s| Graph::random_geometric(10_000, (10_000f64).ln().powf(0.25), s)),
        ),
    ] {
        let mut worst = 0.0f64;
        for seed in 1..=5 {
            let g = make(seed).unwrap();
            let beta = spectral::beta_opt(spectral::lambda2(&g).unwrap().lambda).unwrap();
            worst = worst.max((beta - golden).abs() / golden);
        }
        ok &= worst <= 0.05;
        notes.push(format!("{name} worst rel err {worst:.2e}"));
    }
    outcome(ok, notes.join(", "))
}

fn c2_deviation_identity() -> Outcome {
    let mut worst_sim = 0.0f64;
    let mut worst_formula = 0.0f64;
    let horizon = 20;
    for (_, g) in canonical_graphs().unwrap() {
        let m = dense_m(&g);
        let n = g.n();
        let beta_sos = beta_of(dense_lambda(&g));
        for scheme in [Scheme::Fos, Scheme::Sos] {
            for rounding in [Rounding::Floor, Rounding::Randomized] {
                for seed in 0..20u64 {
                    let cfg = SchemeConfig {
                        scheme,
                        beta: BetaChoice::Value(beta_sos),
                        rounding,
                        switch_at: None,
                        rounds: horizon,
                        seed,
                    };
                    let beta = cfg.resolve_beta(&g).unwrap();
                    let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
                    let x0: Vec<i64> = (0..n).map(|_| rng.random_range(0..=60)).collect();
                    let run = theory::paired_run(&g, &cfg, beta, &x0).unwrap();
                    // delta(t+1) = M delta(t) + u(t) first order, second order
                    // delta(t+1) = beta M delta(t) + (1 - beta) delta(t-1) + u(t)
                    let mut prev = DVector::zeros(n);
                    let mut cur = DVector::zeros(n);
                    for t in 0..horizon as usize {
                        let u = DVector::from_fn(n, |k, _| g.slots(k).map(|s| run.errors[t][s]).sum::<f64>());
                        let next = if scheme == Scheme::Sos && t > 0 {
                            &m * &cur * beta + &prev * (1.0 - beta) + u
                        } else {
                            &m * &cur + u
                        };
                        prev = cur;
                        cur = next;
                        for k in 0..n {
                            let sim = run.discrete[t + 1][k] - run.continuous[t + 1][k];
                            let formula = theory::deviation_rhs(&g, scheme, beta, &run.errors, k, t + 1).unwrap();
                            worst_sim = worst_sim.max((sim - cur[k]).abs());
                            worst_formula = worst_formula.max((formula - cur[k]).abs());
                        }
                    }
                }
            }
        }
    }
    outcome(
        worst_sim <= 1e-9 && worst_formula <= 1e-9,
        format!("max |sim - oracle| {worst_sim:.2e}, max |formula - oracle| {worst_formula:.2e}"),
    )
}

fn c3_q_series() -> Outcome {
    let mut spread = 0.0f64;
    let mut closed = 0.0f64;
    let mut excess = f64::NEG_INFINITY;
    for inst in 0..50u64 {
        let g = random_connected_graph(inst, 77).unwrap();
        let n = g.n();
        let m = dense_m(&g);
        let mus = dense_eigenvalues(&g);
        let lambda = mus[1].abs();
        let beta = beta_of(lambda);
        let mut q = vec![DMatrix::identity(n, n), &m * beta];
        for t in 2..=30 {
            let next = &m * &q[t - 1] * beta + &q[t - 2] * (1.0 - beta);
            q.push(next);
        }
        for qt in &q {
            let sums: Vec<f64> = (0..n).map(|c| qt.column(c).sum()).collect();
            let lo = sums.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            spread = spread.max(hi - lo);
        }
        let r = (beta - 1.0).sqrt();
        for (j, &mu) in mus.iter().enumerate() {
            let mu = if j == 0 {
                1.0
            } else if (mu.abs() - lambda).abs() < 1e-10 {
                mu.signum() * lambda
            } else {
                mu
            };
            let (mut g0, mut g1) = (1.0, beta * mu);
            for t in 0..=30u32 {
                let rec = if t == 0 { g0 } else { g1 };
                let c = theory::gamma_closed_form(mu, lambda, beta, t).unwrap();
                closed = closed.max((c - rec).abs());
                if j > 0 {
                    excess = excess.max(rec.abs() - r.powi(t as i32) * f64::from(t + 1));
                }
                if t > 0 {
                    let next = beta * mu * g1 + (1.0 - beta) * g0;
                    g0 = g1;
                    g1 = next;
                }
            }
        }
    }
    outcome(
        spread <= 1e-10 && closed <= 1e-9 && excess <= 1e-9,
        format!("column-sum spread {spread:.2e}, closed form err {closed:.2e}, bound excess {excess:.2e}"),
    )
}

fn first_below(records: &[difflb::metrics::RoundRecord], threshold: f64) -> Option<u64> {
    records.iter().find(|r| r.potential_over_n < threshold).map(|r| r.round)
}

fn c5_sos_beats_fos() -> Outcome {
    let g = Graph::torus2d(100, 100).unwrap();
    let beta = beta_of(torus_lambda(100, 100));
    let mut ok = true;
    let mut notes = Vec::new();
    for seed in 1..=5u64 {
        let fos_cfg = SchemeConfig {
            scheme: Scheme::Fos,
            ..sos_config(Rounding::Randomized, 30_000, seed)
        };
        let fos = first_below(&checked_run(&g, fos_cfg, beta, corner(g.n()), |_, _| {}), 1.0);
        // SOS only has to get there before FOS does
        let budget = fos.map_or(30_000, |r| r + 1);
        let sos = first_below(
            &checked_run(&g, sos_config(Rounding::Randomized, budget, seed), beta, corner(g.n()), |_, _| {}),
            1.0,
        );
        let fine = match (sos, fos) {
            (Some(s), Some(f)) => s < f,
            (Some(_), None) => true,
            _ => false,
        };
        ok &= fine;
        let show = |r: Option<u64>| r.map_or("never".to_string(), |v| v.to_string());
        notes.push(format!("seed {seed}: sos {} fos {}", show(sos), show(fos)));
    }
    outcome(ok, notes.join("; "))
}

/// Mean of `series[range]`.
fn mean(series: &[f64]) -> f64 {
    series.iter().sum::<f64>() / series.len() as f64
}

fn switched_runs(side: usize, switch: u64, rounds: u64, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let g = Graph::torus2d(side, side).unwrap();
    let beta = beta_of(torus_lambda(side, side));
    let cfg = SchemeConfig {
        switch_at: Some(switch),
        ..sos_config(Rounding::Randomized, rounds, seed)
    };
    let switched = checked_run(&g, cfg, beta, corner(g.n()), |_, _| {});
    let pure = checked_run(&g, sos_config(Rounding::Randomized, rounds, seed), beta, corner(g.n()), |_, _| {});
    (
        switched.iter().map(|r| r.max_above_avg).collect(),
        switched.iter().map(|r| r.max_local_diff).collect(),
        pure.iter().map(|r| r.max_above_avg).collect(),
    )
}

fn c6_switch_long() -> Outcome {
    let g = Graph::torus2d(1000, 1000).unwrap();
    let beta = beta_of(torus_lambda(1000, 1000));
    let cfg = SchemeConfig {
        switch_at: Some(3000),
        ..sos_config(Rounding::Randomized, 4000, 1)
    };
    let recs = checked_run(&g, cfg, beta, corner(g.n()), |_, _| {});
    let last = recs.last().unwrap();
    outcome(
        last.max_local_diff <= 5.0 && last.max_above_avg <= 8.0,
        format!(
            "final max_local_diff {}, max_above_avg {}",
            last.max_local_diff, last.max_above_avg
        ),
    )
}

fn c6_switch_proxy(
    above: &[f64],
    local: &[f64],
    switch: usize,
) -> Outcome {
    let pre_a = mean(&above[switch - 100..switch]);
    let pre_l = mean(&local[switch - 100..switch]);
    let post_a = mean(&above[above.len() - 100..]);
    let post_l = mean(&local[local.len() - 100..]);
    outcome(
        post_a < pre_a && post_l < pre_l,
        format!("100x100, mean over 100 rounds before switch / at end: max_above_avg {pre_a:.2} -> {post_a:.2}, max_local_diff {pre_l:.2} -> {post_l:.2}"),
    )
}

fn c7_plateau_proxy(switched_above: &[f64], pure_above: &[f64], switch: usize) -> Outcome {
    let s = remaining_imbalance(&switched_above[switch..], 100, 1.0).unwrap();
    let p = remaining_imbalance(&pure_above[switch..], 100, 1.0).unwrap();
    outcome(
        p.remaining_imbalance > s.remaining_imbalance,
        format!(
            "100x100 remaining imbalance after round {switch}: pure sos {}, switched {}",
            p.remaining_imbalance, s.remaining_imbalance
        ),
    )
}

/// Rounds whose max local difference is strictly above each of the
/// previous ten rounds.
fn spikes(local: &[f64]) -> Vec<usize> {
    (10..local.len())
        .filter(|&r| local[r - 10..r].iter().all(|&v| local[r] > v))
        .collect()
}

/// Pure SOS from a corner; returns the max-above-average series, the local
/// difference series and the first round after which `center` holds load.
fn wavefront_run(side: usize, rounds: u64, center: usize) -> (Vec<f64>, Vec<f64>, Option<usize>) {
    let g = Graph::torus2d(side, side).unwrap();
    let beta = beta_of(torus_lambda(side, side));
    let mut arrival = None;
    let recs = checked_run(&g, sos_config(Rounding::Randomized, rounds, 1), beta, corner(g.n()), |r, x| {
        if arrival.is_none() && x[center] != 0 {
            arrival = Some(r as usize);
        }
    });
    (
        recs.iter().map(|r| r.max_above_avg).collect(),
        recs.iter().map(|r| r.max_local_diff).collect(),
        arrival,
    )
}

fn wavefront_outcome(local: &[f64], arrival: Option<usize>, label: &str) -> Outcome {
    let Some(a) = arrival else {
        return outcome(false, format!("{label}: center never reached"));
    };
    let near: Vec<usize> = spikes(local).into_iter().filter(|&r| r + 100 >= a && r <= a + 100).collect();
    outcome(
        !near.is_empty(),
        format!("{label}: center loaded after round {a}, spikes within 100 rounds: {near:?}"),
    )
}

fn c9_negative_load() -> Outcome {
    let mut graphs = Vec::new();
    for n in [3, 4, 5, 8, 16, 31, 64] {
        graphs.push(Graph::cycle(n).unwrap());
    }
    for (w, h) in [(3, 3), (4, 4), (5, 3), (6, 6), (8, 8)] {
        graphs.push(Graph::torus2d(w, h).unwrap());
    }
    let mut ok = true;
    let mut end_margin = f64::INFINITY;
    let mut tr_margin = f64::INFINITY;
    for run in 0..100u64 {
        let g = &graphs[run as usize % graphs.len()];
        let n = g.n() as f64;
        let lambda = dense_lambda(g);
        let beta = beta_of(lambda);
        let x0 = corner(g.n());
        let delta0 = 1000.0 * n - 1000.0;
        let d = g.max_degree() as f64;
        let end_floor = -n.sqrt() * delta0;
        let tr_floor = -(n.sqrt() * delta0 + 16.0 * (n.sqrt() * delta0 + d * d) / (1.0 - lambda).sqrt());
        let cfg = sos_config(Rounding::Randomized, 300, run);
        let mut sim = Simulator::with_beta(g, cfg, beta, x0).unwrap();
        for rec in sim.run_with(|_, _| Ok(())).unwrap() {
            ok &= rec.min_load >= end_floor && rec.min_transient >= tr_floor;
            end_margin = end_margin.min(rec.min_load - end_floor);
            tr_margin = tr_margin.min(rec.min_transient - tr_floor);
        }
    }
    outcome(
        ok,
        format!("100 runs, smallest margins: end of round {end_margin:.1}, transient {tr_margin:.1}"),
    )
}

fn c10_deterministic_bound() -> Outcome {
    let mut ok = true;
    let mut worst_ratio = 0.0f64;
    for (_, g) in canonical_graphs().unwrap() {
        let lambda = dense_lambda(&g);
        let beta = beta_of(lambda);
        let n = g.n() as f64;
        let s_max = g.speeds().iter().copied().fold(0.0, f64::max);
        let bound = 16.0 * g.max_degree() as f64 * (2.0 * n * s_max).sqrt() / (1.0 - lambda);
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
            let x0: Vec<i64> = (0..g.n()).map(|_| rng.random_range(0..=60)).collect();
            let run = theory::paired_run(&g, &sos_config(Rounding::Floor, 100, seed), beta, &x0).unwrap();
            let observed = run
                .discrete
                .iter()
                .zip(&run.continuous)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).abs()))
                .fold(0.0, f64::max);
            ok &= observed <= bound;
            worst_ratio = worst_ratio.max(observed / bound);
        }
    }
    outcome(ok, format!("max observed/bound {worst_ratio:.3e} over t <= 100"))
}

fn c11_coefficients() -> Outcome {
    let mut worst = 0.0f64;
    for g in [Graph::cycle(4).unwrap(), Graph::torus2d(10, 10).unwrap()] {
        let basis = spectral::eigenbasis(&g).unwrap();
        let cfg = SchemeConfig {
            scheme: Scheme::Fos,
            rounding: Rounding::None,
            ..sos_config(Rounding::None, 60, 0)
        };
        let mut x0 = vec![0.0; g.n()];
        x0[0] = 1000.0 * g.n() as f64;
        let mut sim = Simulator::<f64>::new(&g, cfg, x0).unwrap();
        let mut a = basis.coefficients(sim.loads()).unwrap();
        for _ in 0..60 {
            sim.step();
            let next = basis.coefficients(sim.loads()).unwrap();
            for (i, &mu) in basis.values().iter().enumerate() {
                worst = worst.max((next[i] - mu * a[i]).abs());
            }
            a = next;
        }
    }
    outcome(worst <= 1e-8, format!("max |a(t+1) - mu a(t)| {worst:.2e}"))
}

fn c12_reproducibility() -> Outcome {
    let base = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for workers in [1, 2, 8] {
        let out = base.path().join(format!("w{workers}"));
        let code = difflb::harness::run_cli([
            "difflb",
            "run",
            "--graph",
            "torus2d:100x100",
            "--rounds",
            "300",
            "--seed",
            "11",
            "--frame-stride",
            "50",
            "--workers",
            &workers.to_string(),
            "--out",
            out.to_str().unwrap(),
        ]);
        if code != 0 {
            return outcome(false, format!("run with {workers} workers exited {code}"));
        }
        outputs.push(out);
    }
    let files = |dir: &Path| -> Vec<(String, Vec<u8>)> {
        let mut v = vec![("metrics.csv".to_string(), std::fs::read(dir.join("metrics.csv")).unwrap())];
        let mut frames: Vec<_> = std::fs::read_dir(dir.join("frames"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        frames.sort();
        for f in frames {
            v.push((f.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(f).unwrap()));
        }
        v
    };
    let reference = files(&outputs[0]);
    let same = outputs[1..].iter().all(|d| files(d) == reference);
    outcome(
        same && reference.len() == 8,
        format!("{} files compared across 1, 2 and 8 workers", reference.len()),
    )
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    // a name filter that does not select this target
    if let Some(filter) = args.iter().find(|a| !a.starts_with('-')) {
        if !"acceptance".contains(filter.as_str()) {
            return;
        }
    }
    let long = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");

    let mut failed = 0;
    let mut report = |id: &str, name: &str, o: Outcome, started: Instant| {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {id:<4} {tag} {name} ({:.1}s): {}",
            started.elapsed().as_secs_f64(),
            o.detail
        );
    };
    let skip = |id: &str, name: &str| println!("criterion {id:<4} SKIP {name}: long variant, pass --include-ignored");

    let t = Instant::now();
    report("1", "beta golden values", c1_beta_goldens(), t);
    let t = Instant::now();
    report("2", "deviation identity", c2_deviation_identity(), t);
    let t = Instant::now();
    report("3", "Q-series invariants", c3_q_series(), t);
    let t = Instant::now();
    report("5", "SOS reaches potential/n < 1 before FOS", c5_sos_beats_fos(), t);

    let t = Instant::now();
    let (sw_above, sw_local, pure_above) = switched_runs(100, 500, 2000, 1);
    report("6", "switch to FOS drops imbalance (100x100)", c6_switch_proxy(&sw_above, &sw_local, 500), t);
    let t = Instant::now();
    report("7", "SOS plateau above switched run (100x100)", c7_plateau_proxy(&sw_above, &pure_above, 500), t);
    let t = Instant::now();
    let (_, local, arrival) = wavefront_run(100, 600, 50 * 100 + 50);
    let o = wavefront_outcome(&local, arrival, "100x100 monitoring");
    println!(
        "criterion 8p   INFO wavefront spike (100x100, monitoring only) ({:.1}s): {}",
        t.elapsed().as_secs_f64(),
        o.detail
    );

    if long {
        let t = Instant::now();
        report("6L", "switch to FOS on 1000x1000", c6_switch_long(), t);
        let t = Instant::now();
        let (above, local, arrival) = wavefront_run(1000, 5000, 500 * 1000 + 500);
        let low = above.iter().copied().fold(f64::INFINITY, f64::min);
        report(
            "7L",
            "SOS plateau on 1000x1000",
            outcome(low >= 10.0, format!("lowest max_above_avg in 5000 rounds {low}")),
            t,
        );
        let t = Instant::now();
        report("8L", "wavefront spike on 1000x1000", wavefront_outcome(&local, arrival, "1000x1000"), t);
    } else {
        skip("6L", "switch to FOS on 1000x1000");
        skip("7L", "SOS plateau on 1000x1000");
        skip("8L", "wavefront spike on 1000x1000");
    }

    let t = Instant::now();
    let ok = INVARIANTS_OK.with(Cell::get);
    let rounds = INVARIANT_ROUNDS.with(Cell::get);
    report(
        "4",
        "conservation and antisymmetry",
        outcome(ok && rounds > 0, format!("checked {rounds} rounds of criteria 5 to 8")),
        t,
    );
    let t = Instant::now();
    report("9", "negative load bounds", c9_negative_load(), t);
    let t = Instant::now();
    report("10", "deterministic SOS deviation bound", c10_deterministic_bound(), t);
    let t = Instant::now();
    report("11", "coefficient dynamics", c11_coefficients(), t);
    let t = Instant::now();
    report("12", "reproducibility across workers", c12_reproducibility(), t);

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
