//! Second eigenvalue, relaxation parameter and eigenvector coefficients.
//!
//! All eigen computations work on the symmetric matrix `B = S^-1/2 M S^1/2`,
//! which equals `M` for homogeneous graphs and is similar to it otherwise.
//! Eigenpairs are ordered by decreasing magnitude of the eigenvalue, so index
//! 0 is always the stationary direction.

use std::fmt;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Family, Graph};

/// Graphs up to this size get a dense eigensolve.
pub const DEFAULT_DENSE_CAP: usize = 4096;

const ITERATIVE_TOL: f64 = 1e-12;
const POWER_MAX_SWEEPS: usize = 100_000;
const LANCZOS_MAX_STEPS: usize = 100_000;
const LANCZOS_CHECK_EVERY: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumSource {
    ClosedForm,
    Dense,
    Iterative,
}

impl fmt::Display for SpectrumSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectrumSource::ClosedForm => "closed-form",
            SpectrumSource::Dense => "dense",
            SpectrumSource::Iterative => "iterative",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spectrum {
    /// Second largest eigenvalue magnitude of the diffusion matrix.
    pub lambda: f64,
    pub source: SpectrumSource,
}

/// `2 / (1 + sqrt(1 - lambda^2))`.
pub fn beta_opt(lambda: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidLambda(lambda));
    }
    Ok(2.0 / (1.0 + (1.0 - lambda * lambda).sqrt()))
}

pub fn lambda2(graph: &Graph) -> Result<Spectrum> {
    lambda2_with_cap(graph, DEFAULT_DENSE_CAP)
}

pub fn lambda2_with_cap(graph: &Graph, dense_cap: usize) -> Result<Spectrum> {
    if let Some(lambda) = closed_form_lambda(graph) {
        return Ok(Spectrum {
            lambda,
            source: SpectrumSource::ClosedForm,
        });
    }
    if graph.n() <= dense_cap {
        return Ok(Spectrum {
            lambda: lambda_dense(graph),
            source: SpectrumSource::Dense,
        });
    }
    Ok(Spectrum {
        lambda: lambda_lanczos(graph, 0)?,
        source: SpectrumSource::Iterative,
    })
}

/// Closed-form second eigenvalue magnitude for homogeneous tori and hypercubes.
pub fn closed_form_lambda(graph: &Graph) -> Option<f64> {
    if !graph.is_homogeneous() {
        return None;
    }
    match *graph.family() {
        Family::Torus2d { width, height } => {
            let cw: Vec<f64> = (0..width).map(|a| cycle_eigenvalue(a, width)).collect();
            let ch: Vec<f64> = (0..height).map(|b| cycle_eigenvalue(b, height)).collect();
            let mut best = 0.0f64;
            for (b, &y) in ch.iter().enumerate() {
                for (a, &x) in cw.iter().enumerate() {
                    if a != 0 || b != 0 {
                        best = best.max(((1.0 + x + y) / 5.0).abs());
                    }
                }
            }
            Some(best)
        }
        Family::Hypercube { dimension } => {
            let d = f64::from(dimension);
            Some((1..=dimension).map(|k| (1.0 - 2.0 * f64::from(k) / (d + 1.0)).abs()).fold(0.0, f64::max))
        }
        _ => None,
    }
}

fn cycle_eigenvalue(a: usize, len: usize) -> f64 {
    2.0 * (2.0 * std::f64::consts::PI * a as f64 / len as f64).cos()
}

fn lambda_dense(graph: &Graph) -> f64 {
    let eig = SymmetricEigen::new(graph.symmetrized_diffusion_matrix());
    let mut mags: Vec<f64> = eig.eigenvalues.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    mags[1]
}

/// Unit stationary vector of `B`, proportional to `sqrt(s)`.
fn stationary_vector(graph: &Graph) -> Vec<f64> {
    let norm = graph.total_speed().sqrt();
    graph.speeds().iter().map(|s| s.sqrt() / norm).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn random_start(n: usize, seed: u64, stationary: &[f64]) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let c = dot(&v, stationary);
    axpy(-c, stationary, &mut v);
    normalize(&mut v);
    v
}

/// Number of eigenvalues of the symmetric tridiagonal matrix `(a, b)` below `x`.
fn sturm_count(a: &[f64], b: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..a.len() {
        let off = if i == 0 { 0.0 } else { b[i - 1] * b[i - 1] };
        q = a[i] - x - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (a[i].abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest and largest eigenvalue of a symmetric tridiagonal matrix by
/// bisection inside its Gershgorin interval.
fn tridiagonal_extremes(a: &[f64], b: &[f64]) -> (f64, f64) {
    let k = a.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..k {
        let r = if i > 0 { b[i - 1].abs() } else { 0.0 } + if i + 1 < k { b[i].abs() } else { 0.0 };
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    let bisect = |index: usize| {
        let (mut l, mut h) = (lo, hi);
        while h - l > 1e-15 * (l.abs().max(h.abs()).max(1e-300)) {
            let mid = 0.5 * (l + h);
            if mid <= l || mid >= h {
                break;
            }
            if sturm_count(a, b, mid) > index {
                h = mid;
            } else {
                l = mid;
            }
        }
        0.5 * (l + h)
    };
    (bisect(0), bisect(k - 1))
}

/// Second eigenvalue magnitude by Lanczos on the stationary complement.
///
/// Only the three-term recurrence is kept. Loss of orthogonality duplicates
/// converged Ritz values but does not move the extreme ones, so the largest
/// Ritz magnitude is tracked until it stops changing.
pub fn lambda_lanczos(graph: &Graph, seed: u64) -> Result<f64> {
    let n = graph.n();
    let u = stationary_vector(graph);
    let mut q = random_start(n, seed, &u);
    let mut q_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    let mut beta_prev = 0.0;

    for step in 0..LANCZOS_MAX_STEPS {
        graph.apply_symmetrized(&q, &mut w);
        let a = dot(&w, &q);
        alphas.push(a);
        for ((wi, qi), pi) in w.iter_mut().zip(&q).zip(&q_prev) {
            *wi -= a * qi + beta_prev * pi;
        }
        // rounding keeps reintroducing the stationary direction
        let c = dot(&w, &u);
        axpy(-c, &u, &mut w);
        let b = normalize(&mut w);
        if step % LANCZOS_CHECK_EVERY == 0 || b < 1e-13 {
            let (lo, hi) = tridiagonal_extremes(&alphas, &betas);
            let top = lo.abs().max(hi.abs());
            if b < 1e-13 {
                return Ok(top);
            }
            history.push(top);
            if let [.., older, _, last] = history[..] {
                if (last - older).abs() <= ITERATIVE_TOL * last.max(1e-300) {
                    return Ok(last);
                }
            }
        }
        betas.push(b);
        beta_prev = b;
        std::mem::swap(&mut q_prev, &mut q);
        std::mem::swap(&mut q, &mut w);
    }
    Err(Error::NoConvergence {
        iterations: LANCZOS_MAX_STEPS,
    })
}

/// Second eigenvalue magnitude by power iteration with deflation of the
/// stationary vector. Slow when the spectral gap is small; kept as an
/// independent cross-check of [`lambda_lanczos`].
pub fn lambda_power(graph: &Graph, seed: u64, max_sweeps: Option<usize>) -> Result<f64> {
    let n = graph.n();
    let u = stationary_vector(graph);
    let mut v = random_start(n, seed, &u);
    let mut w = vec![0.0; n];
    let mut estimate = 0.0;
    let sweeps = max_sweeps.unwrap_or(POWER_MAX_SWEEPS);
    // iterate on B^2 so that +mu and -mu of equal magnitude cannot alternate
    for sweep in 0..sweeps {
        graph.apply_symmetrized(&v, &mut w);
        graph.apply_symmetrized(&w, &mut v);
        let c = dot(&v, &u);
        axpy(-c, &u, &mut v);
        let next = normalize(&mut v).sqrt();
        if next == 0.0 {
            return Ok(0.0);
        }
        if sweep > 0 && ((next - estimate) / next).abs() < ITERATIVE_TOL {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::NoConvergence { iterations: sweeps })
}

#[derive(Clone, Debug)]
enum Basis {
    /// Columns of `u` are orthonormal eigenvectors of `B`; `sqrt_speeds` maps
    /// them to eigenvectors of `M`.
    Dense { u: DMatrix<f64>, sqrt_speeds: Vec<f64> },
    /// Products of real cycle Fourier modes; `modes[k] = (col mode, row mode)`.
    Torus {
        width: usize,
        height: usize,
        along_row: DMatrix<f64>,
        along_col: DMatrix<f64>,
        modes: Vec<(usize, usize)>,
    },
}

/// Eigenvectors and eigenvalues of the diffusion matrix, sorted by
/// decreasing eigenvalue magnitude.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    values: Vec<f64>,
    basis: Basis,
}

pub fn eigenbasis(graph: &Graph) -> Result<EigenBasis> {
    eigenbasis_with_cap(graph, DEFAULT_DENSE_CAP)
}

pub fn eigenbasis_with_cap(graph: &Graph, cap: usize) -> Result<EigenBasis> {
    if let (Family::Torus2d { width, height }, true) = (graph.family(), graph.is_homogeneous()) {
        return Ok(torus_basis(*width, *height));
    }
    let n = graph.n();
    if n > cap {
        return Err(Error::DenseCapExceeded { n, cap });
    }
    let eig = SymmetricEigen::new(graph.symmetrized_diffusion_matrix());
    let order = sorted_order(eig.eigenvalues.as_slice());
    let mut u = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).clone_owned();
        fix_sign(v.as_mut_slice());
        u.set_column(col, &v);
    }
    Ok(EigenBasis {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        basis: Basis::Dense {
            u,
            sqrt_speeds: graph.speeds().iter().map(|s| s.sqrt()).collect(),
        },
    })
}

/// Indices sorted by |value| descending, then value descending, then index.
fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then(values[b].total_cmp(&values[a]))
            .then(a.cmp(&b))
    });
    order
}

fn fix_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-9) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Real orthonormal Fourier basis of the cycle of length `len`, as columns,
/// with the matching eigenvalues of its adjacency matrix.
fn cycle_fourier(len: usize) -> (DMatrix<f64>, Vec<f64>) {
    let mut m = DMatrix::zeros(len, len);
    let mut values = Vec::with_capacity(len);
    let tau = 2.0 * std::f64::consts::PI;
    let scale = (2.0 / len as f64).sqrt();
    let mut col = 0;
    let mut push = |m: &mut DMatrix<f64>, f: &dyn Fn(usize) -> f64, value: f64| {
        for k in 0..len {
            m[(k, col)] = f(k);
        }
        values.push(value);
        col += 1;
    };
    push(&mut m, &|_| 1.0 / (len as f64).sqrt(), 2.0);
    for a in 1..len.div_ceil(2) {
        let w = tau * a as f64 / len as f64;
        push(&mut m, &|k| scale * (w * k as f64).cos(), cycle_eigenvalue(a, len));
        push(&mut m, &|k| scale * (w * k as f64).sin(), cycle_eigenvalue(a, len));
    }
    if len % 2 == 0 {
        push(
            &mut m,
            &|k| if k % 2 == 0 { 1.0 } else { -1.0 } / (len as f64).sqrt(),
            -2.0,
        );
    }
    (m, values)
}

fn torus_basis(width: usize, height: usize) -> EigenBasis {
    let (along_row, vw) = cycle_fourier(width);
    let (along_col, vh) = cycle_fourier(height);
    let mut modes = Vec::with_capacity(width * height);
    let mut raw = Vec::with_capacity(width * height);
    for (q, y) in vh.iter().enumerate() {
        for (p, x) in vw.iter().enumerate() {
            modes.push((p, q));
            raw.push((1.0 + x + y) / 5.0);
        }
    }
    let order = sorted_order(&raw);
    EigenBasis {
        values: order.iter().map(|&i| raw[i]).collect(),
        basis: Basis::Torus {
            width,
            height,
            along_row,
            along_col,
            modes: order.iter().map(|&i| modes[i]).collect(),
        },
    }
}

impl EigenBasis {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvector `j` of `M`. Orthonormal for homogeneous graphs.
    pub fn vector(&self, j: usize) -> Vec<f64> {
        match &self.basis {
            Basis::Dense { u, sqrt_speeds } => u.column(j).iter().zip(sqrt_speeds).map(|(v, s)| v * s).collect(),
            Basis::Torus {
                width,
                height,
                along_row,
                along_col,
                modes,
            } => {
                let (p, q) = modes[j];
                let mut v = Vec::with_capacity(width * height);
                for row in 0..*height {
                    for col in 0..*width {
                        v.push(along_row[(col, p)] * along_col[(row, q)]);
                    }
                }
                v
            }
        }
    }

    /// Coefficients `a` with `V a = x`.
    pub fn coefficients(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: x.len(),
            });
        }
        Ok(match &self.basis {
            Basis::Dense { u, sqrt_speeds } => {
                let scaled = DVector::from_iterator(x.len(), x.iter().zip(sqrt_speeds).map(|(v, s)| v / s));
                u.tr_mul(&scaled).as_slice().to_vec()
            }
            Basis::Torus {
                width,
                height,
                along_row,
                along_col,
                modes,
            } => {
                // X is height x width; coefficient grid is along_col^T X along_row
                let grid = DMatrix::from_row_slice(*height, *width, x);
                let c = along_col.tr_mul(&grid) * along_row;
                modes.iter().map(|&(p, q)| c[(q, p)]).collect()
            }
        })
    }

    /// `V a`.
    pub fn reconstruct(&self, a: &[f64]) -> Result<Vec<f64>> {
        if a.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: a.len(),
            });
        }
        Ok(match &self.basis {
            Basis::Dense { u, sqrt_speeds } => {
                let y = u * DVector::from_column_slice(a);
                y.iter().zip(sqrt_speeds).map(|(v, s)| v * s).collect()
            }
            Basis::Torus {
                width,
                height,
                along_row,
                along_col,
                modes,
            } => {
                let mut c = DMatrix::zeros(*height, *width);
                for (&(p, q), &v) in modes.iter().zip(a) {
                    c[(q, p)] = v;
                }
                let grid = along_col * c * along_row.transpose();
                let mut out = Vec::with_capacity(width * height);
                for row in 0..*height {
                    out.extend(grid.row(row).iter());
                }
                out
            }
        })
    }
}

/// Index of the largest `|a_i|` among the non-stationary coefficients
/// (`i >= 1`); ties go to the smallest index. `None` if there are none.
pub fn leading_coefficient(a: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for i in 1..a.len() {
        if best.is_none_or(|b| a[i].abs() > a[b].abs()) {
            best = Some(i);
        }
    }
    best
}

/// One line of the coefficient trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientSample {
    pub round: u64,
    /// Zero-based index into the sorted basis.
    pub leading_index: usize,
    pub max_abs_coefficient: f64,
    /// Coefficient of the fourth eigenvector (zero-based index 3).
    pub a4: f64,
}

pub fn coefficient_sample(round: u64, a: &[f64]) -> CoefficientSample {
    let leading_index = leading_coefficient(a).unwrap_or(0);
    CoefficientSample {
        round,
        leading_index,
        max_abs_coefficient: a.get(leading_index).map_or(0.0, |v| v.abs()),
        a4: a.get(3).copied().unwrap_or(0.0),
    }
}

/// CSV with columns `round,leading_index,max_abs_coefficient,a4`; the index
/// column is one-based so that it lines up with the `a4` naming.
pub fn write_coefficient_trace(path: &Path, samples: &[CoefficientSample]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "round,leading_index,max_abs_coefficient,a4")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{:e},{:e}",
            s.round,
            s.leading_index + 1,
            s.max_abs_coefficient,
            s.a4
        )?;
    }
    out.flush()?;
    Ok(())
}
