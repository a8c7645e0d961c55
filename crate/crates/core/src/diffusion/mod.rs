//! First- and second-order diffusion, continuous and discrete.
//!
//! A round computes a fractional schedule on every directed edge from the
//! current loads (and, for the second-order scheme, the previous round's
//! flows), turns it into realized flows, and applies them. Continuous
//! processes realize the schedule as is; discrete processes round it to
//! integers. The second-order scheme always runs its very first round as a
//! first-order round, and a configured switch round turns it into a
//! first-order process for good.

mod flows;
mod rng;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub use flows::{
    apply_flows, apply_flows_into, fos_flows, fos_flows_into, is_antisymmetric, round_floor, round_floor_into,
    round_randomized, round_randomized_into, sos_flows, sos_flows_into,
};
pub use rng::node_rng;

use crate::error::{Error, Result};
use crate::graph::{read_values, Graph};
use crate::load::{convert, Load};
use crate::metrics::{self, RoundRecord};
use crate::spectral;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Fos,
    Sos,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BetaChoice {
    /// Optimal value for the graph's second eigenvalue.
    Auto,
    Value(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    /// Continuous process, flows are real.
    None,
    Floor,
    Randomized,
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fos" => Ok(Scheme::Fos),
            "sos" => Ok(Scheme::Sos),
            _ => Err(Error::InvalidConfig(format!("unknown scheme '{s}', expected fos or sos"))),
        }
    }
}

impl FromStr for BetaChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(BetaChoice::Auto);
        }
        s.parse::<f64>()
            .map(BetaChoice::Value)
            .map_err(|_| Error::InvalidConfig(format!("beta must be 'auto' or a number, got '{s}'")))
    }
}

impl FromStr for Rounding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Rounding::None),
            "floor" => Ok(Rounding::Floor),
            "randomized" => Ok(Rounding::Randomized),
            _ => Err(Error::InvalidConfig(format!(
                "unknown rounding '{s}', expected none, floor or randomized"
            ))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Fos => "fos",
            Scheme::Sos => "sos",
        })
    }
}

impl fmt::Display for Rounding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rounding::None => "none",
            Rounding::Floor => "floor",
            Rounding::Randomized => "randomized",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub beta: BetaChoice,
    pub rounding: Rounding,
    /// Round at which a second-order process turns first-order.
    pub switch_at: Option<u64>,
    pub rounds: u64,
    pub seed: u64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            scheme: Scheme::Sos,
            beta: BetaChoice::Auto,
            rounding: Rounding::Randomized,
            switch_at: None,
            rounds: 1000,
            seed: 0,
        }
    }
}

impl SchemeConfig {
    /// The effective beta: the configured value, or the optimal one for `graph`.
    pub fn resolve_beta(&self, graph: &Graph) -> Result<f64> {
        let beta = match self.beta {
            BetaChoice::Value(b) => b,
            BetaChoice::Auto => spectral::beta_opt(spectral::lambda2(graph)?.lambda)?,
        };
        if !(beta > 0.0 && beta < 2.0) {
            return Err(Error::InvalidBeta(beta));
        }
        Ok(beta)
    }

    /// Scheme in effect during `round`.
    pub fn scheme_at(&self, round: u64) -> Scheme {
        match self.scheme {
            Scheme::Sos if round > 0 && self.switch_at.is_none_or(|s| round < s) => Scheme::Sos,
            _ => Scheme::Fos,
        }
    }
}

/// Fractional flow per directed edge, indexed by graph slot.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduledFlows(pub Vec<f64>);

/// Schedule minus realized flow per directed edge, indexed by graph slot.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundingErrors(pub Vec<f64>);

#[derive(Clone, Debug, PartialEq)]
pub struct LoadState<L> {
    pub x: Vec<L>,
    /// Realized flow of the previous round per slot.
    pub y_prev: Vec<L>,
    pub round: u64,
}

/// How a load kind turns a schedule into realized flows.
pub trait Realize: Load {
    fn check_rounding(rounding: Rounding) -> Result<()>;

    #[allow(clippy::too_many_arguments)]
    fn realize(
        graph: &Graph,
        rounding: Rounding,
        schedule: &[f64],
        seed: u64,
        round: u64,
        flows: &mut [Self],
        errors: &mut [f64],
        scratch: &mut Scratch,
    );
}

/// Buffers used only by randomized rounding.
#[derive(Default)]
pub struct Scratch {
    flows: Vec<i64>,
    errors: Vec<f64>,
}

impl Realize for f64 {
    fn check_rounding(rounding: Rounding) -> Result<()> {
        match rounding {
            Rounding::None => Ok(()),
            r => Err(Error::InvalidConfig(format!("rounding '{r}' needs integral loads"))),
        }
    }

    fn realize(
        _: &Graph,
        _: Rounding,
        schedule: &[f64],
        _: u64,
        _: u64,
        flows: &mut [f64],
        errors: &mut [f64],
        _: &mut Scratch,
    ) {
        flows.copy_from_slice(schedule);
        errors.fill(0.0);
    }
}

impl Realize for i64 {
    fn check_rounding(rounding: Rounding) -> Result<()> {
        match rounding {
            Rounding::None => Err(Error::InvalidConfig("integral loads need a rounding scheme".into())),
            _ => Ok(()),
        }
    }

    fn realize(
        graph: &Graph,
        rounding: Rounding,
        schedule: &[f64],
        seed: u64,
        round: u64,
        flows: &mut [i64],
        errors: &mut [f64],
        scratch: &mut Scratch,
    ) {
        match rounding {
            Rounding::Floor => round_floor_into(graph, schedule, flows, errors),
            Rounding::Randomized => {
                scratch.flows.resize(schedule.len(), 0);
                scratch.errors.resize(schedule.len(), 0.0);
                round_randomized_into(
                    graph,
                    schedule,
                    seed,
                    round,
                    flows,
                    errors,
                    &mut scratch.flows,
                    &mut scratch.errors,
                );
            }
            Rounding::None => unreachable!("rejected by check_rounding"),
        }
    }
}

/// Round-by-round driver that keeps the buffers of the last round around
/// for inspection.
pub struct Simulator<'g, L: Realize> {
    graph: &'g Graph,
    config: SchemeConfig,
    beta: f64,
    state: LoadState<L>,
    schedule: Vec<f64>,
    flows: Vec<L>,
    errors: Vec<f64>,
    transient: Vec<L>,
    next: Vec<L>,
    scratch: Scratch,
}

impl<'g, L: Realize> Simulator<'g, L> {
    pub fn new(graph: &'g Graph, config: SchemeConfig, x0: Vec<L>) -> Result<Self> {
        let beta = config.resolve_beta(graph)?;
        Self::with_beta(graph, config, beta, x0)
    }

    /// Like [`Simulator::new`] with an already resolved beta.
    pub fn with_beta(graph: &'g Graph, config: SchemeConfig, beta: f64, x0: Vec<L>) -> Result<Self> {
        L::check_rounding(config.rounding)?;
        if !(beta > 0.0 && beta < 2.0) {
            return Err(Error::InvalidBeta(beta));
        }
        let n = graph.n();
        if x0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: x0.len(),
            });
        }
        let m = graph.slot_count();
        Ok(Simulator {
            graph,
            config,
            beta,
            transient: x0.clone(),
            next: vec![L::zero(); n],
            state: LoadState {
                x: x0,
                y_prev: vec![L::zero(); m],
                round: 0,
            },
            schedule: vec![0.0; m],
            flows: vec![L::zero(); m],
            errors: vec![0.0; m],
            scratch: Scratch::default(),
        })
    }

    /// Continue from a state saved with [`Simulator::into_state`].
    pub fn from_state(graph: &'g Graph, config: SchemeConfig, beta: f64, state: LoadState<L>) -> Result<Self> {
        if state.y_prev.len() != graph.slot_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.slot_count(),
                actual: state.y_prev.len(),
            });
        }
        let mut sim = Self::with_beta(graph, config, beta, state.x.clone())?;
        sim.state = state;
        Ok(sim)
    }

    pub fn into_state(self) -> LoadState<L> {
        self.state
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn state(&self) -> &LoadState<L> {
        &self.state
    }

    pub fn round(&self) -> u64 {
        self.state.round
    }

    pub fn loads(&self) -> &[L] {
        &self.state.x
    }

    /// Schedule of the last executed round.
    pub fn schedule(&self) -> &[f64] {
        &self.schedule
    }

    /// Realized flows of the last executed round.
    pub fn flows(&self) -> &[L] {
        &self.flows
    }

    /// Rounding errors of the last executed round (zero when continuous).
    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    /// Loads after sending, before receiving, in the last executed round.
    pub fn transient(&self) -> &[L] {
        &self.transient
    }

    /// Flows, errors and schedule of the last round are antisymmetric.
    pub fn check_antisymmetry(&self) -> bool {
        is_antisymmetric(self.graph, &self.schedule)
            && is_antisymmetric(self.graph, &self.flows)
            && is_antisymmetric(self.graph, &self.errors)
    }

    /// Execute one round and return its metrics.
    pub fn step(&mut self) -> RoundRecord {
        let t = self.state.round;
        match self.config.scheme_at(t) {
            Scheme::Fos => fos_flows_into(self.graph, &self.state.x, &mut self.schedule),
            Scheme::Sos => sos_flows_into(
                self.graph,
                &self.state.x,
                &self.state.y_prev,
                self.beta,
                &mut self.schedule,
            ),
        }
        L::realize(
            self.graph,
            self.config.rounding,
            &self.schedule,
            self.config.seed,
            t,
            &mut self.flows,
            &mut self.errors,
            &mut self.scratch,
        );
        apply_flows_into(self.graph, &self.state.x, &self.flows, &mut self.next, &mut self.transient);
        std::mem::swap(&mut self.state.x, &mut self.next);
        self.state.y_prev.copy_from_slice(&self.flows);
        self.state.round = t + 1;
        metrics::record(t, &self.state.x, &self.transient, self.graph)
    }

    /// Run until the configured round budget is used up, calling `observe`
    /// after every round.
    pub fn run_with(&mut self, mut observe: impl FnMut(&Self, &RoundRecord) -> Result<()>) -> Result<Vec<RoundRecord>> {
        let mut records = Vec::with_capacity(self.config.rounds.saturating_sub(self.state.round) as usize);
        while self.state.round < self.config.rounds {
            let rec = self.step();
            observe(self, &rec)?;
            records.push(rec);
        }
        Ok(records)
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<L> {
    pub beta: f64,
    pub records: Vec<RoundRecord>,
    pub final_state: LoadState<L>,
}

pub fn run<L: Realize>(graph: &Graph, config: &SchemeConfig, x0: Vec<L>) -> Result<Trajectory<L>> {
    let mut sim = Simulator::new(graph, config.clone(), x0)?;
    let records = sim.run_with(|_, _| Ok(()))?;
    Ok(Trajectory {
        beta: sim.beta,
        records,
        final_state: sim.state,
    })
}

/// Initial load placement.
#[derive(Clone, Debug, PartialEq)]
pub enum InitKind {
    /// `factor * n` tokens on node 0, nothing elsewhere.
    Corner(f64),
    Uniform(f64),
    /// One value per line; `#` lines are ignored.
    File(PathBuf),
}

impl FromStr for InitKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("init must be corner:F, uniform:V or file:PATH, got '{s}'"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "corner" => arg.parse().map(InitKind::Corner).map_err(|_| bad()),
            "uniform" => arg.parse().map(InitKind::Uniform).map_err(|_| bad()),
            "file" => Ok(InitKind::File(PathBuf::from(arg))),
            _ => Err(bad()),
        }
    }
}

pub fn initial_load(kind: &InitKind, graph: &Graph) -> Result<Vec<f64>> {
    let n = graph.n();
    let x = match kind {
        InitKind::Corner(f) => {
            let mut x = vec![0.0; n];
            x[0] = f * n as f64;
            x
        }
        InitKind::Uniform(v) => vec![*v; n],
        InitKind::File(path) => {
            let x = read_values(path)?;
            if x.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: x.len(),
                });
            }
            x
        }
    };
    Ok(x)
}

/// Initial loads converted to kind `L`; fails for fractional discrete loads.
pub fn initial_load_as<L: Load>(kind: &InitKind, graph: &Graph) -> Result<Vec<L>> {
    let x = initial_load(kind, graph)?;
    convert(&x).ok_or_else(|| Error::InvalidConfig("initial load is not integral".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn cfg(scheme: Scheme, beta: f64, rounding: Rounding, rounds: u64) -> SchemeConfig {
        SchemeConfig {
            scheme,
            beta: BetaChoice::Value(beta),
            rounding,
            switch_at: None,
            rounds,
            seed: 11,
        }
    }

    #[test]
    fn continuous_fos_matches_matrix() {
        let g = Graph::cycle(4).unwrap();
        let m = g.diffusion_matrix();
        let mut x = DVector::from_vec(vec![7.0, -1.0, 2.5, 0.0]);
        let mut sim = Simulator::new(&g, cfg(Scheme::Fos, 1.0, Rounding::None, 10), x.as_slice().to_vec()).unwrap();
        for _ in 0..10 {
            sim.step();
            x = &m * x;
            for (a, b) in sim.loads().iter().zip(x.iter()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn continuous_sos_matches_matrix() {
        let g = Graph::cycle(4).unwrap();
        let m = g.diffusion_matrix();
        let beta = 1.6;
        let x0 = DVector::from_vec(vec![7.0, -1.0, 2.5, 0.0]);
        let mut prev = x0.clone();
        let mut cur = &m * &x0;
        let mut sim = Simulator::new(&g, cfg(Scheme::Sos, beta, Rounding::None, 12), x0.as_slice().to_vec()).unwrap();
        sim.step();
        for _ in 0..11 {
            sim.step();
            let next = &m * &cur * beta + &prev * (1.0 - beta);
            prev = cur;
            cur = next;
            for (a, b) in sim.loads().iter().zip(cur.iter()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn discrete_conserves_and_is_antisymmetric() {
        let g = Graph::torus2d(5, 4).unwrap();
        for rounding in [Rounding::Floor, Rounding::Randomized] {
            let x0 = initial_load_as::<i64>(&InitKind::Corner(50.0), &g).unwrap();
            let mut sim = Simulator::new(&g, cfg(Scheme::Sos, 1.7, rounding, 60), x0).unwrap();
            for _ in 0..60 {
                let rec = sim.step();
                assert_eq!(rec.total_load, 1000.0);
                assert!(sim.check_antisymmetry());
            }
        }
    }

    #[test]
    fn k2_fos_one_round() {
        let g = Graph::path(2).unwrap();
        let t = run(&g, &cfg(Scheme::Fos, 1.0, Rounding::Floor, 5), vec![2i64, 0]).unwrap();
        assert_eq!(t.final_state.x, vec![1, 1]);
        assert!(t.records.iter().all(|r| r.max_above_avg == 0.0));
    }

    #[test]
    fn switch_at_zero_is_fos() {
        let g = Graph::torus2d(4, 4).unwrap();
        let x0 = initial_load_as::<i64>(&InitKind::Corner(30.0), &g).unwrap();
        let mut sos = cfg(Scheme::Sos, 1.8, Rounding::Randomized, 40);
        sos.switch_at = Some(0);
        let fos = SchemeConfig {
            scheme: Scheme::Fos,
            ..sos.clone()
        };
        let a = run(&g, &sos, x0.clone()).unwrap();
        let b = run(&g, &fos, x0).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.final_state.x, b.final_state.x);
    }

    #[test]
    fn scheme_at_rounds() {
        let mut c = cfg(Scheme::Sos, 1.5, Rounding::None, 10);
        assert_eq!(c.scheme_at(0), Scheme::Fos);
        assert_eq!(c.scheme_at(1), Scheme::Sos);
        c.switch_at = Some(5);
        assert_eq!(c.scheme_at(4), Scheme::Sos);
        assert_eq!(c.scheme_at(5), Scheme::Fos);
    }

    #[test]
    fn initial_loads() {
        let g = Graph::torus2d(3, 3).unwrap();
        let x = initial_load(&InitKind::Corner(1000.0), &g).unwrap();
        assert_eq!(x[0], 9000.0);
        assert!(x[1..].iter().all(|&v| v == 0.0));
        for f in [10.0, 100.0, 1000.0] {
            let x = initial_load(&InitKind::Corner(f), &g).unwrap();
            assert_eq!(x.iter().sum::<f64>() / 9.0, f);
        }
        let x = initial_load_as::<i64>(&InitKind::Uniform(5.0), &g).unwrap();
        assert_eq!(metrics::max_above_average(&x, &g), 0.0);
        assert!(initial_load_as::<i64>(&InitKind::Uniform(0.5), &g).is_err());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.txt");
        std::fs::write(&path, "# n=3\n1\n2\n").unwrap();
        assert!(matches!(
            initial_load(&InitKind::File(path.clone()), &g),
            Err(Error::DimensionMismatch { .. })
        ));
        std::fs::write(&path, "# n=9 round=0\n1\n2\n3\n4\n5\n6\n7\n8\n9\n").unwrap();
        assert_eq!(initial_load(&InitKind::File(path), &g).unwrap()[8], 9.0);
    }

    #[test]
    fn config_parsing() {
        assert_eq!("sos".parse::<Scheme>().unwrap(), Scheme::Sos);
        assert_eq!("auto".parse::<BetaChoice>().unwrap(), BetaChoice::Auto);
        assert_eq!("1.5".parse::<BetaChoice>().unwrap(), BetaChoice::Value(1.5));
        assert_eq!("floor".parse::<Rounding>().unwrap(), Rounding::Floor);
        assert_eq!("corner:10".parse::<InitKind>().unwrap(), InitKind::Corner(10.0));
        assert!("corner".parse::<InitKind>().is_err());
        assert!("sideways".parse::<Scheme>().is_err());
    }

    #[test]
    fn rejects_mismatched_kinds() {
        let g = Graph::path(2).unwrap();
        assert!(Simulator::new(&g, cfg(Scheme::Fos, 1.0, Rounding::Floor, 1), vec![1.0, 0.0]).is_err());
        assert!(Simulator::new(&g, cfg(Scheme::Fos, 1.0, Rounding::None, 1), vec![1i64, 0]).is_err());
        assert!(Simulator::new(&g, cfg(Scheme::Fos, 2.0, Rounding::None, 1), vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn resume_from_state() {
        let g = Graph::torus2d(4, 3).unwrap();
        let c = cfg(Scheme::Sos, 1.6, Rounding::Randomized, 20);
        let x0: Vec<i64> = (0..12).map(|i| i * 7 % 5).collect();
        let mut straight = Simulator::new(&g, c.clone(), x0.clone()).unwrap();
        straight.run_with(|_, _| Ok(())).unwrap();

        let mut first = Simulator::new(&g, SchemeConfig { rounds: 9, ..c.clone() }, x0).unwrap();
        first.run_with(|_, _| Ok(())).unwrap();
        let mut second = Simulator::from_state(&g, c, 1.6, first.into_state()).unwrap();
        second.run_with(|_, _| Ok(())).unwrap();
        assert_eq!(second.state(), straight.state());
    }
}
