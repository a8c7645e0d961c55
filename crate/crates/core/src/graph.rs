//! Benchmark network families and the diffusion weights defined on them.
//!
//! A [`Graph`] is an immutable CSR adjacency structure. Every undirected edge
//! `{i, j}` is stored twice, once in the neighbor list of each endpoint; the
//! position of an entry in the flat neighbor array is called a *slot*. Slots
//! are the unit of storage for everything that lives on directed edges
//! (scheduled flows, rounding errors, previous-round flows), and
//! [`Graph::reverse`] maps a slot `(i, j)` to its twin `(j, i)`.
//!
//! Diffusion weights follow the usual choice `alpha(i, j) = 1 / (max(d_i, d_j) + 1)`
//! and are kept as exact rationals. With per-node speeds `s_i` the diffusion
//! matrix is `M = I - L S^-1`, where `L` is the alpha-weighted Laplacian.

use std::collections::VecDeque;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest hypercube dimension accepted by [`Graph::hypercube`].
pub const MAX_HYPERCUBE_DIM: u32 = 30;

const REGULAR_ATTEMPTS: usize = 100;

/// Exact rational edge weight `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgeWeight {
    pub num: u32,
    pub den: u32,
}

impl EdgeWeight {
    /// `1 / (max(d_i, d_j) + 1)`.
    pub fn max_degree_rule(deg_i: usize, deg_j: usize) -> Self {
        EdgeWeight {
            num: 1,
            den: (deg_i.max(deg_j) + 1) as u32,
        }
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }
}

/// Which generator produced a graph. Used to pick closed-form spectra.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Torus2d { width: usize, height: usize },
    Hypercube { dimension: u32 },
    RandomRegular { degree: usize, seed: u64 },
    RandomGeometric { radius: f64, seed: u64 },
    Cycle,
    Path,
    Complete,
    Custom,
}

/// One row of the diffusion matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionRow {
    pub diagonal: f64,
    pub off_diagonal: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    reverse: Vec<u32>,
    weights: Vec<EdgeWeight>,
    alpha: Vec<f64>,
    speeds: Vec<f64>,
    family: Family,
}

impl Graph {
    /// Build from per-node neighbor lists. Lists are sorted; the structure
    /// must be symmetric, simple and connected.
    pub fn from_adjacency(mut adjacency: Vec<Vec<usize>>, family: Family) -> Result<Self> {
        let n = adjacency.len();
        if n < 2 {
            return Err(Error::InvalidGraph(format!("need at least 2 nodes, got {n}")));
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidGraph("too many nodes".into()));
        }
        for (i, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("parallel edge at node {i}")));
            }
            if list.binary_search(&i).is_ok() {
                return Err(Error::InvalidGraph(format!("self-loop at node {i}")));
            }
            if let Some(&j) = list.iter().find(|&&j| j >= n) {
                return Err(Error::NodeOutOfRange { node: j, n });
            }
        }

        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for list in &adjacency {
            offsets.push(offsets.last().unwrap() + list.len());
        }
        let slots = *offsets.last().unwrap();
        if slots > u32::MAX as usize {
            return Err(Error::InvalidGraph("too many edges".into()));
        }
        let neighbors: Vec<u32> = adjacency.iter().flatten().map(|&j| j as u32).collect();
        drop(adjacency);

        let mut reverse = vec![0u32; slots];
        for i in 0..n {
            for slot in offsets[i]..offsets[i + 1] {
                let j = neighbors[slot] as usize;
                let back = &neighbors[offsets[j]..offsets[j + 1]];
                match back.binary_search(&(i as u32)) {
                    Ok(pos) => reverse[slot] = (offsets[j] + pos) as u32,
                    Err(_) => {
                        return Err(Error::InvalidGraph(format!(
                            "adjacency not symmetric: {i} -> {j} without {j} -> {i}"
                        )))
                    }
                }
            }
        }

        let degree = |v: usize| offsets[v + 1] - offsets[v];
        let mut weights = Vec::with_capacity(slots);
        for i in 0..n {
            for slot in offsets[i]..offsets[i + 1] {
                weights.push(EdgeWeight::max_degree_rule(degree(i), degree(neighbors[slot] as usize)));
            }
        }
        let alpha = weights.iter().map(|w| w.to_f64()).collect();

        let graph = Graph {
            offsets,
            neighbors,
            reverse,
            weights,
            alpha,
            speeds: vec![1.0; n],
            family,
        };
        if !graph.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(graph)
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::NodeOutOfRange { node: i.max(j), n });
            }
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        Self::from_adjacency(adjacency, Family::Custom)
    }

    /// Two-dimensional torus, row-major ids, periodic 4-neighborhood.
    pub fn torus2d(width: usize, height: usize) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::InvalidGraph(format!(
                "torus dimensions must be at least 3, got {width}x{height}"
            )));
        }
        let n = width * height;
        let adjacency = (0..n)
            .map(|id| {
                let (row, col) = (id / width, id % width);
                let up = ((row + height - 1) % height) * width + col;
                let down = ((row + 1) % height) * width + col;
                let left = row * width + (col + width - 1) % width;
                let right = row * width + (col + 1) % width;
                vec![up, down, left, right]
            })
            .collect();
        Self::from_adjacency(adjacency, Family::Torus2d { width, height })
    }

    pub fn hypercube(dimension: u32) -> Result<Self> {
        if dimension == 0 || dimension > MAX_HYPERCUBE_DIM {
            return Err(Error::InvalidGraph(format!(
                "hypercube dimension must be in 1..={MAX_HYPERCUBE_DIM}, got {dimension}"
            )));
        }
        let n = 1usize << dimension;
        let adjacency = (0..n)
            .map(|v| (0..dimension).map(|b| v ^ (1 << b)).collect())
            .collect();
        Self::from_adjacency(adjacency, Family::Hypercube { dimension })
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGraph(format!("cycle needs at least 3 nodes, got {n}")));
        }
        let adjacency = (0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect();
        Self::from_adjacency(adjacency, Family::Cycle)
    }

    pub fn path(n: usize) -> Result<Self> {
        let adjacency = (0..n)
            .map(|i| {
                let mut list = Vec::with_capacity(2);
                if i > 0 {
                    list.push(i - 1);
                }
                if i + 1 < n {
                    list.push(i + 1);
                }
                list
            })
            .collect();
        Self::from_adjacency(adjacency, Family::Path)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let adjacency = (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect();
        Self::from_adjacency(adjacency, Family::Complete)
    }

    /// Simple `d`-regular graph from the configuration model.
    ///
    /// Stubs are paired by a uniform shuffle. Self-loops and parallel edges
    /// left by the pairing are removed with degree-preserving double-edge
    /// switches against uniformly chosen simple edges. A disconnected result
    /// is discarded and the pairing redrawn.
    pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Self> {
        if d == 0 || d >= n || (n * d) % 2 != 0 {
            return Err(Error::InvalidGraph(format!(
                "random regular graph needs 0 < d < n and n*d even, got n={n}, d={d}"
            )));
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidGraph("too many nodes".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..REGULAR_ATTEMPTS {
            let Some(adjacency) = ConfigurationModel::sample(n, d, &mut rng) else {
                continue;
            };
            match Self::from_adjacency(adjacency, Family::RandomRegular { degree: d, seed }) {
                Ok(graph) => return Ok(graph),
                Err(Error::InvalidGraph(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::GenerationFailed {
            n,
            d,
            attempts: REGULAR_ATTEMPTS,
        })
    }

    /// Random geometric graph on `[0, sqrt(n)]^2`.
    ///
    /// Nodes within euclidean distance `radius` are joined. Afterwards every
    /// node outside the largest component is linked to its nearest node inside
    /// the largest component.
    pub fn random_geometric(n: usize, radius: f64, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGraph(format!("need at least 2 nodes, got {n}")));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidGraph(format!("radius must be positive, got {radius}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let side = (n as f64).sqrt();
        let points: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random::<f64>() * side, rng.random::<f64>() * side))
            .collect();
        Ok(Self::geometric_from_points(&points, radius, Family::RandomGeometric { radius, seed })?)
    }

    pub(crate) fn geometric_from_points(points: &[(f64, f64)], radius: f64, family: Family) -> Result<Self> {
        let n = points.len();
        let side = points
            .iter()
            .fold(0.0f64, |m, &(x, y)| m.max(x).max(y))
            .max(radius);
        let cells = ((side / radius).floor() as usize).clamp(1, 4096);
        let cell_of = |c: f64| ((c / side * cells as f64) as usize).min(cells - 1);
        let mut grid: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
        for (v, &(x, y)) in points.iter().enumerate() {
            grid[cell_of(y) * cells + cell_of(x)].push(v);
        }

        let r2 = radius * radius;
        let dist2 = |a: usize, b: usize| {
            let (dx, dy) = (points[a].0 - points[b].0, points[a].1 - points[b].1);
            dx * dx + dy * dy
        };
        let mut adjacency = vec![Vec::new(); n];
        for (v, &(x, y)) in points.iter().enumerate() {
            let (cx, cy) = (cell_of(x), cell_of(y));
            for gy in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
                for gx in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
                    for &u in &grid[gy * cells + gx] {
                        if u != v && dist2(u, v) <= r2 {
                            adjacency[v].push(u);
                        }
                    }
                }
            }
        }

        let component = components(&adjacency);
        let count = component.iter().max().map_or(0, |&c| c + 1);
        let mut sizes = vec![0usize; count];
        for &c in &component {
            sizes[c] += 1;
        }
        // components are numbered by smallest member, so max_by_key's last-wins
        // tie rule is avoided by scanning explicitly
        let mut giant = 0;
        for c in 1..count {
            if sizes[c] > sizes[giant] {
                giant = c;
            }
        }
        let giant_nodes: Vec<usize> = (0..n).filter(|&v| component[v] == giant).collect();
        for v in 0..n {
            if component[v] == giant {
                continue;
            }
            let nearest = giant_nodes
                .iter()
                .copied()
                .min_by(|&a, &b| dist2(v, a).total_cmp(&dist2(v, b)).then(a.cmp(&b)))
                .expect("giant component is nonempty");
            if !adjacency[v].contains(&nearest) {
                adjacency[v].push(nearest);
                adjacency[nearest].push(v);
            }
        }
        Self::from_adjacency(adjacency, family)
    }

    /// Replace node speeds. All speeds must be finite and at least 1.
    pub fn with_speeds(mut self, speeds: Vec<f64>) -> Result<Self> {
        if speeds.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: speeds.len(),
            });
        }
        if let Some((i, s)) = speeds.iter().enumerate().find(|(_, s)| !(s.is_finite() && **s >= 1.0)) {
            return Err(Error::InvalidSpeeds(format!("speed of node {i} is {s}, must be >= 1")));
        }
        self.speeds = speeds;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn slot_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    pub fn neighbors(&self, i: usize) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.neighbors[self.offsets[i]..self.offsets[i + 1]]
            .iter()
            .map(|&j| j as usize)
    }

    /// Slot range owned by node `i`.
    pub fn slots(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn target(&self, slot: usize) -> usize {
        self.neighbors[slot] as usize
    }

    pub fn reverse(&self, slot: usize) -> usize {
        self.reverse[slot] as usize
    }

    pub fn weight(&self, slot: usize) -> EdgeWeight {
        self.weights[slot]
    }

    pub fn alpha(&self, slot: usize) -> f64 {
        self.alpha[slot]
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn speed(&self, i: usize) -> f64 {
        self.speeds[i]
    }

    pub fn max_speed(&self) -> f64 {
        self.speeds.iter().copied().fold(1.0, f64::max)
    }

    pub fn total_speed(&self) -> f64 {
        self.speeds.iter().sum()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.speeds.iter().all(|&s| s == 1.0)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Undirected edges as `(i, j)` with `i < j`, each paired with the slot of `(i, j)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.n()).flat_map(move |i| {
            self.slots(i)
                .filter(move |&slot| self.target(slot) > i)
                .map(move |slot| (i, self.target(slot), slot))
        })
    }

    /// Slot of the directed edge `(i, j)`, if `j` is a neighbor of `i`.
    pub fn slot_of(&self, i: usize, j: usize) -> Option<usize> {
        let range = self.slots(i);
        self.neighbors[range.clone()]
            .binary_search(&(j as u32))
            .ok()
            .map(|pos| range.start + pos)
    }

    /// Row `i` of `M` (homogeneous) or of `I - L S^-1` (heterogeneous).
    pub fn diffusion_row(&self, i: usize) -> Result<DiffusionRow> {
        if i >= self.n() {
            return Err(Error::NodeOutOfRange { node: i, n: self.n() });
        }
        let s_i = self.speeds[i];
        let mut outflow = 0.0;
        let off_diagonal = self
            .slots(i)
            .map(|slot| {
                let j = self.target(slot);
                outflow += self.alpha[slot];
                (j, self.alpha[slot] / self.speeds[j])
            })
            .collect();
        Ok(DiffusionRow {
            diagonal: 1.0 - outflow / s_i,
            off_diagonal,
        })
    }

    /// Dense diffusion matrix. Intended for small graphs only.
    pub fn diffusion_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let row = self.diffusion_row(i).expect("node in range");
            m[(i, i)] = row.diagonal;
            for (j, v) in row.off_diagonal {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Dense `S^-1/2 M S^1/2`, the symmetric matrix similar to `M`.
    pub fn symmetrized_diffusion_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut b = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut outflow = 0.0;
            for slot in self.slots(i) {
                let j = self.target(slot);
                outflow += self.alpha[slot];
                b[(i, j)] = self.alpha[slot] / (self.speeds[i] * self.speeds[j]).sqrt();
            }
            b[(i, i)] = 1.0 - outflow / self.speeds[i];
        }
        b
    }

    /// `out = B v` for the symmetrized operator, without forming `B`.
    pub(crate) fn apply_symmetrized(&self, v: &[f64], out: &mut [f64]) {
        let homogeneous = self.is_homogeneous();
        for i in 0..self.n() {
            let mut outflow = 0.0;
            let mut acc = 0.0;
            for slot in self.slots(i) {
                let j = self.target(slot);
                let a = self.alpha[slot];
                outflow += a;
                acc += if homogeneous {
                    a * v[j]
                } else {
                    a / (self.speeds[i] * self.speeds[j]).sqrt() * v[j]
                };
            }
            out[i] = (1.0 - outflow / self.speeds[i]) * v[i] + acc;
        }
    }

    fn is_connected(&self) -> bool {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for u in self.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == n
    }

    /// Debug export: one `i j` line per undirected edge, `i < j`.
    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(fs::File::create(path)?);
        for (i, j, _) in self.edges() {
            writeln!(out, "{i} {j}")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Speed file: one decimal per line, line `k` holds the speed of node `k`.
pub fn read_speeds(path: &Path) -> Result<Vec<f64>> {
    read_values(path)
}

/// One decimal per line; blank lines and lines starting with `#` are skipped.
pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(k, line)| {
            line.trim().parse::<f64>().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: k + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Component label per node; labels are assigned in order of smallest member.
fn components(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = next;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &u in &adjacency[v] {
                if label[u] == usize::MAX {
                    label[u] = next;
                    queue.push_back(u);
                }
            }
        }
        next += 1;
    }
    label
}

/// Flat `n * d` stub table used while repairing a configuration-model pairing.
struct ConfigurationModel {
    d: usize,
    partners: Vec<u32>,
    edges: Vec<(u32, u32)>,
}

impl ConfigurationModel {
    fn sample(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<usize>>> {
        let mut stubs: Vec<u32> = (0..n as u32).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        stubs.shuffle(rng);
        let edges: Vec<(u32, u32)> = stubs.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        drop(stubs);

        let mut fill = vec![0usize; n];
        let mut partners = vec![0u32; n * d];
        for &(u, v) in &edges {
            partners[u as usize * d + fill[u as usize]] = v;
            fill[u as usize] += 1;
            partners[v as usize * d + fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        let mut model = ConfigurationModel { d, partners, edges };
        if !model.repair(rng) {
            return None;
        }
        Some(
            (0..n)
                .map(|v| model.list(v).iter().map(|&u| u as usize).collect())
                .collect(),
        )
    }

    fn list(&self, v: usize) -> &[u32] {
        &self.partners[v * self.d..(v + 1) * self.d]
    }

    fn multiplicity(&self, u: u32, v: u32) -> usize {
        self.list(u as usize).iter().filter(|&&w| w == v).count()
    }

    fn is_bad(&self, (u, v): (u32, u32)) -> bool {
        u == v || self.multiplicity(u, v) > 1
    }

    fn replace_one(&mut self, node: u32, old: u32, new: u32) {
        let d = self.d;
        let list = &mut self.partners[node as usize * d..(node as usize + 1) * d];
        let pos = list.iter().position(|&w| w == old).expect("stub present");
        list[pos] = new;
    }

    /// Switch every bad edge against a random simple edge. Returns false when
    /// the switch budget runs out.
    fn repair(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let m = self.edges.len();
        let budget = 1000 + 100 * m.min(1 << 20);
        let mut tries = 0;
        let mut b = 0;
        while b < m {
            if !self.is_bad(self.edges[b]) {
                b += 1;
                continue;
            }
            tries += 1;
            if tries > budget {
                return false;
            }
            let (u, v) = self.edges[b];
            let g = rng.random_range(0..m);
            let (mut x, mut y) = self.edges[g];
            if g == b || self.is_bad((x, y)) {
                continue;
            }
            if rng.random::<bool>() {
                std::mem::swap(&mut x, &mut y);
            }
            // new edges (u, x) and (v, y) must be simple and absent
            if u == x || v == y || self.multiplicity(u, x) > 0 || self.multiplicity(v, y) > 0 {
                continue;
            }
            if (u.min(x), u.max(x)) == (v.min(y), v.max(y)) {
                continue;
            }
            self.replace_one(u, v, x);
            self.replace_one(v, u, y);
            self.replace_one(x, y, u);
            self.replace_one(y, x, v);
            self.edges[b] = (u, x);
            self.edges[g] = (v, y);
            // a switch can only fix edges, but the other copy of a former
            // multi-edge earlier in the list is now simple, so no rescan needed
        }
        self.edges.iter().all(|&e| !self.is_bad(e))
    }
}
