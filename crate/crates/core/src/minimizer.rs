//! Multistart projected-gradient minimization of the Riesz s-energy in a
//! cube or ball, a brute-force grid oracle for tiny `N`, and empirical
//! measure diagnostics.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::geometry::{lex_cmp, Configuration};
use crate::riesz::{kernel_from_sq, riesz_energy};

/// Compact set the points are confined to; both kinds are centred at the
/// origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Cube { dimension: usize, rib: f64 },
    Ball { dimension: usize, radius: f64 },
}

impl Domain {
    pub fn cube(dimension: usize, rib: f64) -> Result<Self> {
        let d = Domain::Cube { dimension, rib };
        d.validate()?;
        Ok(d)
    }

    pub fn ball(dimension: usize, radius: f64) -> Result<Self> {
        let d = Domain::Ball { dimension, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let (d, size) = match *self {
            Domain::Cube { dimension, rib } => (dimension, rib),
            Domain::Ball { dimension, radius } => (dimension, radius),
        };
        if d == 0 {
            return config("domain dimension must be >= 1");
        }
        if !(size > 0.0) || !size.is_finite() {
            return config(format!("domain size must be finite and > 0, got {size}"));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        match *self {
            Domain::Cube { dimension, .. } | Domain::Ball { dimension, .. } => dimension,
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Domain::Cube { dimension, rib } => rib * (dimension as f64).sqrt(),
            Domain::Ball { radius, .. } => 2.0 * radius,
        }
    }

    /// Membership with an absolute slack of `1e-12` times the domain size.
    pub fn contains(&self, x: &[f64]) -> bool {
        match *self {
            Domain::Cube { rib, .. } => {
                let h = 0.5 * rib * (1.0 + 2e-12);
                x.iter().all(|v| v.abs() <= h)
            }
            Domain::Ball { radius, .. } => x.iter().map(|v| v * v).sum::<f64>().sqrt() <= radius * (1.0 + 1e-12),
        }
    }

    /// Euclidean projection of one point onto the domain, in place.
    pub fn project(&self, x: &mut [f64]) {
        match *self {
            Domain::Cube { rib, .. } => {
                let h = 0.5 * rib;
                for v in x.iter_mut() {
                    *v = v.clamp(-h, h);
                }
            }
            Domain::Ball { radius, .. } => {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > radius {
                    let k = radius / norm;
                    for v in x.iter_mut() {
                        *v *= k;
                    }
                }
            }
        }
    }

    fn sample_point<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        match *self {
            Domain::Cube { rib, .. } => {
                for v in out.iter_mut() {
                    *v = rib * (rng.gen::<f64>() - 0.5);
                }
            }
            Domain::Ball { dimension, radius } => {
                let mut norm2 = 0.0;
                while norm2 == 0.0 {
                    norm2 = 0.0;
                    for v in out.iter_mut() {
                        *v = rng.sample(StandardNormal);
                        norm2 += *v * *v;
                    }
                }
                let scale = radius * rng.gen::<f64>().powf(1.0 / dimension as f64) / norm2.sqrt();
                for v in out.iter_mut() {
                    *v *= scale;
                }
            }
        }
    }

    /// Zero the components of `g` that point out of the domain at active
    /// constraints, leaving the projected gradient.
    fn project_gradient(&self, x: &[f64], g: &mut [f64]) {
        let d = self.dimension();
        match *self {
            Domain::Cube { rib, .. } => {
                let h = 0.5 * rib;
                for (v, gv) in x.iter().zip(g.iter_mut()) {
                    // descent direction -g would leave the box
                    if (*v >= h && *gv < 0.0) || (*v <= -h && *gv > 0.0) {
                        *gv = 0.0;
                    }
                }
            }
            Domain::Ball { radius, .. } => {
                for (p, gp) in x.chunks_exact(d).zip(g.chunks_exact_mut(d)) {
                    let n2: f64 = p.iter().map(|v| v * v).sum();
                    if n2.sqrt() >= radius * (1.0 - 1e-12) {
                        let dot: f64 = p.iter().zip(gp.iter()).map(|(a, b)| a * b).sum();
                        if dot < 0.0 {
                            let k = dot / n2;
                            for (gv, pv) in gp.iter_mut().zip(p) {
                                *gv -= k * pv;
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Options of [`minimize_configuration`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeOptions {
    /// Number of random starts; `None` means `8 + 2 N`.
    pub starts: Option<usize>,
    pub max_iters: usize,
    /// Runs stop once the projected-gradient norm is below `grad_tol * N`.
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            starts: None,
            max_iters: 50_000,
            grad_tol: 1e-9,
            seed: 1,
        }
    }
}

impl MinimizeOptions {
    pub fn starts_for(&self, n: usize) -> usize {
        self.starts.unwrap_or(8 + 2 * n)
    }

    fn validate(&self) -> Result<()> {
        if self.starts == Some(0) {
            return config("starts must be >= 1");
        }
        if self.max_iters == 0 {
            return config("max_iters must be >= 1");
        }
        if !(self.grad_tol >= 0.0) {
            return config("grad_tol must be >= 0");
        }
        Ok(())
    }
}

/// Best configuration found by [`minimize_configuration`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizationResult {
    pub domain: Domain,
    pub exponent: f64,
    pub n: usize,
    pub configuration: Configuration,
    pub energy: f64,
    /// `E / N^2`, or 0 when `N < 2`.
    pub normalized_energy: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub starts: usize,
    pub best_start: usize,
    /// Always `"best found"`: the energy is an upper bound on the minimum.
    pub status: String,
}

/// Why a descent run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Projected-gradient norm reached the tolerance.
    Gradient,
    /// Relative energy decrease stayed below `1e-15` for 30 iterations.
    Stalled,
    /// No step passed the line search.
    LineSearch,
    MaxIterations,
    /// Nothing to optimize (fewer than two points).
    Trivial,
}

const ARMIJO: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const STALL_WINDOW: usize = 30;

/// Energy and gradient of the flat coordinate vector, or `None` when a pair
/// is closer than `floor`.
fn energy_gradient(x: &[f64], d: usize, s: f64, floor2: f64, grad: &mut [f64]) -> Option<f64> {
    let n = x.len() / d;
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut energy = 0.0;
    let mut diff = [0.0f64; 16];
    let mut diff_vec;
    let buf: &mut [f64] = if d <= 16 {
        &mut diff[..d]
    } else {
        diff_vec = vec![0.0; d];
        &mut diff_vec
    };
    for i in 0..n {
        let xi = &x[i * d..(i + 1) * d];
        for j in i + 1..n {
            let xj = &x[j * d..(j + 1) * d];
            let mut r2 = 0.0;
            for k in 0..d {
                buf[k] = xi[k] - xj[k];
                r2 += buf[k] * buf[k];
            }
            if !(r2 >= floor2) || r2 == 0.0 {
                return None;
            }
            let kval = kernel_from_sq(r2, s);
            energy += kval;
            let coef = s * kval / r2;
            for k in 0..d {
                grad[i * d + k] -= coef * buf[k];
                grad[j * d + k] += coef * buf[k];
            }
        }
    }
    Some(energy)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[derive(Debug, Clone)]
struct Run {
    coords: Vec<f64>,
    iterations: usize,
    gradient_norm: f64,
    converged: bool,
    stop: StopReason,
}

/// Projected gradient descent with Barzilai–Borwein trial steps and Armijo
/// backtracking.
fn descend(mut x: Vec<f64>, dom: &Domain, s: f64, opts: &MinimizeOptions) -> Run {
    let d = dom.dimension();
    let n = x.len() / d;
    let diam = dom.diameter();
    let floor = 1e-8 * diam;
    let floor2 = floor * floor;
    let tol = opts.grad_tol * n as f64;
    let mut g = vec![0.0; x.len()];
    let mut pg = vec![0.0; x.len()];
    let mut gt = vec![0.0; x.len()];
    let mut xt = vec![0.0; x.len()];

    let mut e = match energy_gradient(&x, d, s, 0.0, &mut g) {
        Some(e) => e,
        None => {
            return Run { coords: x, iterations: 0, gradient_norm: f64::INFINITY, converged: false, stop: StopReason::LineSearch };
        }
    };
    let ginf = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut alpha = if ginf > 0.0 { 0.01 * diam / ginf } else { 1.0 };
    let mut stall = 0;
    let mut iterations = 0;
    let mut converged = false;
    let mut stop = StopReason::MaxIterations;
    let mut gnorm;
    loop {
        pg.copy_from_slice(&g);
        dom.project_gradient(&x, &mut pg);
        gnorm = norm(&pg);
        if gnorm <= tol {
            converged = true;
            stop = StopReason::Gradient;
            break;
        }
        if iterations >= opts.max_iters {
            break;
        }
        iterations += 1;

        let mut a = alpha;
        let mut accepted = None;
        while a > 0.0 && a.is_finite() {
            let mut dir_dot = 0.0;
            for ((t, xv), gv) in xt.iter_mut().zip(&x).zip(&g) {
                *t = xv - a * gv;
            }
            for p in xt.chunks_exact_mut(d) {
                dom.project(p);
            }
            for ((t, xv), gv) in xt.iter().zip(&x).zip(&g) {
                dir_dot += gv * (t - xv);
            }
            if !(dir_dot < 0.0) {
                break;
            }
            if let Some(et) = energy_gradient(&xt, d, s, floor2, &mut gt) {
                if et <= e + ARMIJO * dir_dot {
                    accepted = Some((et, a));
                    break;
                }
            }
            a *= SHRINK;
            if a < 1e-300 {
                break;
            }
        }
        let Some((et, a_used)) = accepted else {
            stop = StopReason::LineSearch;
            break;
        };
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..x.len() {
            let sk = xt[i] - x[i];
            let yk = gt[i] - g[i];
            ss += sk * sk;
            sy += sk * yk;
        }
        alpha = if sy > 0.0 && ss > 0.0 { ss / sy } else { 2.0 * a_used };
        if (e - et) <= 1e-15 * e.abs() {
            stall += 1;
        } else {
            stall = 0;
        }
        std::mem::swap(&mut x, &mut xt);
        std::mem::swap(&mut g, &mut gt);
        e = et;
        if stall >= STALL_WINDOW {
            pg.copy_from_slice(&g);
            dom.project_gradient(&x, &mut pg);
            gnorm = norm(&pg);
            converged = gnorm <= tol;
            stop = StopReason::Stalled;
            break;
        }
    }
    Run { coords: x, iterations, gradient_norm: gnorm, converged, stop }
}

fn check_exponent(s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return domain(format!("minimization needs a finite exponent s > 0, got {s}"));
    }
    Ok(())
}

/// `d/dx_i E_s = -s sum_{j != i} (x_i - x_j) / |x_i - x_j|^{s + 2}`.
pub fn riesz_gradient(gamma: &Configuration, s: f64) -> Result<Vec<Vec<f64>>> {
    check_exponent(s)?;
    if let Some((i, j)) = gamma.find_coincident() {
        return Err(Error::CoincidentPoints { i, j });
    }
    let d = gamma.dimension();
    let mut g = vec![0.0; gamma.as_flat().len()];
    energy_gradient(gamma.as_flat(), d, s, 0.0, &mut g).expect("points are distinct");
    Ok(g.chunks_exact(d.max(1)).map(<[f64]>::to_vec).collect())
}

fn sorted_flat(coords: &[f64], d: usize) -> Vec<f64> {
    let mut pts: Vec<&[f64]> = coords.chunks_exact(d).collect();
    pts.sort_by(|a, b| lex_cmp(a, b));
    pts.concat()
}

fn flat_cmp(a: &[f64], b: &[f64]) -> Ordering {
    lex_cmp(a, b)
}

struct Candidate {
    energy: f64,
    sorted: Vec<f64>,
    run: Run,
    start: usize,
}

fn finish(dom: &Domain, s: f64, n: usize, starts: usize, best: Candidate) -> Result<MinimizationResult> {
    let d = dom.dimension();
    let configuration = Configuration::from_flat(d, best.sorted)?;
    let energy = riesz_energy(&configuration, s)?;
    let normalized_energy = if n >= 2 { energy / (n * n) as f64 } else { 0.0 };
    Ok(MinimizationResult {
        domain: *dom,
        exponent: s,
        n,
        configuration,
        energy,
        normalized_energy,
        iterations: best.run.iterations,
        gradient_norm: best.run.gradient_norm,
        converged: best.run.converged,
        stop_reason: best.run.stop,
        starts,
        best_start: best.start,
        status: "best found".into(),
    })
}

/// Pick the lowest energy; energies within `1e-12` relative are tied and
/// resolved by the lexicographically smallest sorted configuration.
fn reduce(candidates: Vec<Candidate>) -> Candidate {
    let mut it = candidates.into_iter();
    let mut best = it.next().expect("at least one start");
    for c in it {
        let tie = 1e-12 * best.energy.abs().max(c.energy.abs()).max(f64::MIN_POSITIVE);
        let better = if (c.energy - best.energy).abs() <= tie {
            flat_cmp(&c.sorted, &best.sorted) == Ordering::Less
        } else {
            c.energy < best.energy
        };
        if better {
            best = c;
        }
    }
    best
}

/// Multistart minimization of the Riesz `s`-energy of `n` points in `dom`.
///
/// Start `k` draws its initial points from the ChaCha8 stream `k` of
/// `opts.seed`, so the result does not depend on thread scheduling.
pub fn minimize_configuration(n: usize, dom: &Domain, s: f64, opts: &MinimizeOptions) -> Result<MinimizationResult> {
    dom.validate()?;
    opts.validate()?;
    check_exponent(s)?;
    let d = dom.dimension();
    let starts = opts.starts_for(n);
    if n == 0 {
        let empty = Candidate {
            energy: 0.0,
            sorted: Vec::new(),
            run: Run { coords: Vec::new(), iterations: 0, gradient_norm: 0.0, converged: true, stop: StopReason::Trivial },
            start: 0,
        };
        return finish(dom, s, 0, starts, empty);
    }
    let candidates: Vec<Candidate> = (0..starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            let mut x = vec![0.0; n * d];
            for p in x.chunks_exact_mut(d) {
                dom.sample_point(&mut rng, p);
            }
            let run = descend(x, dom, s, opts);
            let mut scratch = vec![0.0; run.coords.len()];
            let energy = energy_gradient(&run.coords, d, s, 0.0, &mut scratch).unwrap_or(f64::INFINITY);
            Candidate { energy, sorted: sorted_flat(&run.coords, d), run, start: k }
        })
        .collect();
    finish(dom, s, n, starts, reduce(candidates))
}

/// Exhaustive search over a tensor grid for `n <= 4` points, followed by a
/// single projected-gradient polish from the best grid configuration.
///
/// Cube grids include the faces; ball grids keep the points of the
/// circumscribing cube grid that lie in the ball.
pub fn brute_force_min(n: usize, dom: &Domain, s: f64, grid_per_axis: usize) -> Result<MinimizationResult> {
    dom.validate()?;
    check_exponent(s)?;
    let d = dom.dimension();
    if n > 4 {
        return config(format!("brute force supports N <= 4, got {n}"));
    }
    if grid_per_axis < 8 {
        return config(format!("grid_per_axis must be >= 8, got {grid_per_axis}"));
    }
    if d * n > 8 {
        return config(format!("brute force needs d * N <= 8, got {}", d * n));
    }
    let half = match *dom {
        Domain::Cube { rib, .. } => 0.5 * rib,
        Domain::Ball { radius, .. } => radius,
    };
    let axis: Vec<f64> = (0..grid_per_axis)
        .map(|k| -half + 2.0 * half * k as f64 / (grid_per_axis - 1) as f64)
        .collect();
    let total = grid_per_axis.pow(d as u32);
    let mut grid: Vec<Vec<f64>> = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut p = vec![0.0; d];
        for c in p.iter_mut() {
            *c = axis[idx % grid_per_axis];
            idx /= grid_per_axis;
        }
        if dom.contains(&p) {
            grid.push(p);
        }
    }
    if grid.len() < n {
        return config("grid has fewer points than N");
    }
    let opts = MinimizeOptions { starts: Some(1), ..MinimizeOptions::default() };
    if n <= 1 {
        let coords = if n == 1 { grid[0].clone() } else { Vec::new() };
        let c = Candidate {
            energy: 0.0,
            sorted: coords.clone(),
            run: Run { coords, iterations: 0, gradient_norm: 0.0, converged: true, stop: StopReason::Trivial },
            start: 0,
        };
        return finish(dom, s, n, 1, c);
    }

    let m = grid.len();
    let kernel: Vec<f64> = (0..m * m)
        .map(|ij| {
            let (i, j) = (ij / m, ij % m);
            if i == j {
                f64::INFINITY
            } else {
                let r2: f64 = grid[i].iter().zip(&grid[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                kernel_from_sq(r2, s)
            }
        })
        .collect();

    // greedy farthest-point seed for the incumbent
    let mut chosen = vec![0usize];
    while chosen.len() < n {
        let next = (0..m)
            .filter(|k| !chosen.contains(k))
            .min_by(|&a, &b| {
                let ea: f64 = chosen.iter().map(|&c| kernel[a * m + c]).sum();
                let eb: f64 = chosen.iter().map(|&c| kernel[b * m + c]).sum();
                ea.total_cmp(&eb)
            })
            .expect("grid larger than N");
        chosen.push(next);
    }
    let mut best_energy: f64 = pair_sum(&chosen, &kernel, m);
    let mut best = chosen.clone();

    // depth-first search over increasing index tuples with bound pruning
    let mut stack = vec![0usize; n];
    search(&kernel, m, n, 0, 0, 0.0, &mut stack, &mut best_energy, &mut best);

    let mut x: Vec<f64> = best.iter().flat_map(|&k| grid[k].iter().copied()).collect();
    let run = descend(std::mem::take(&mut x), dom, s, &opts);
    let mut scratch = vec![0.0; run.coords.len()];
    let energy = energy_gradient(&run.coords, d, s, 0.0, &mut scratch).unwrap_or(f64::INFINITY);
    let c = Candidate { energy, sorted: sorted_flat(&run.coords, d), run, start: 0 };
    finish(dom, s, n, 1, c)
}

fn pair_sum(idx: &[usize], kernel: &[f64], m: usize) -> f64 {
    let mut e = 0.0;
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            e += kernel[idx[a] * m + idx[b]];
        }
    }
    e
}

#[allow(clippy::too_many_arguments)]
fn search(
    kernel: &[f64],
    m: usize,
    n: usize,
    depth: usize,
    from: usize,
    partial: f64,
    stack: &mut Vec<usize>,
    best_energy: &mut f64,
    best: &mut Vec<usize>,
) {
    if depth == n {
        if partial < *best_energy {
            *best_energy = partial;
            best.copy_from_slice(stack);
        }
        return;
    }
    for k in from..=(m - (n - depth)) {
        let add: f64 = stack[..depth].iter().map(|&c| kernel[c * m + k]).sum();
        let e = partial + add;
        // all kernel values are positive, so partial sums only grow
        if e >= *best_energy {
            continue;
        }
        stack[depth] = k;
        search(kernel, m, n, depth + 1, k + 1, e, stack, best_energy, best);
    }
}

/// Normalized minimal energies for a list of `N`, with a monotonicity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ESequence {
    pub values: Vec<(usize, f64)>,
    /// `N` values at which `e` dropped by more than the tolerance.
    pub violations: Vec<usize>,
    pub tolerance: f64,
}

impl ESequence {
    pub fn monotone(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const MONOTONICITY_TOLERANCE: f64 = 1e-6;

/// `e^(N) = E / N^2` of the best found configuration for each `N`.
///
/// For `s = 0` the energy does not depend on positions and
/// `e^(N) = (1 - 1/N) / 2` is returned without minimizing.
pub fn e_sequence(dom: &Domain, s: f64, n_list: &[usize], opts: &MinimizeOptions) -> Result<ESequence> {
    if let Some(&n) = n_list.iter().find(|&&n| n < 2) {
        return domain(format!("e-sequence needs N >= 2, got {n}"));
    }
    if !(s >= 0.0) {
        return domain(format!("exponent must be >= 0, got {s}"));
    }
    let mut values = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let e = if s == 0.0 {
            0.5 * (1.0 - 1.0 / n as f64)
        } else {
            minimize_configuration(n, dom, s, opts)?.normalized_energy
        };
        values.push((n, e));
    }
    let mut order: Vec<(usize, f64)> = values.clone();
    order.sort_by_key(|v| v.0);
    let violations = order
        .windows(2)
        .filter(|w| w[1].0 > w[0].0 && w[1].1 < w[0].1 - MONOTONICITY_TOLERANCE)
        .map(|w| w[1].0)
        .collect();
    Ok(ESequence { values, violations, tolerance: MONOTONICITY_TOLERANCE })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramKind {
    /// Equal-volume radial shells, innermost first.
    RadialShells,
    /// `bins^d` congruent sub-cubes in row-major order (first axis fastest).
    Cells,
}

/// Empirical measure `mu_N` evaluated on a partition of the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub kind: HistogramKind,
    pub bins: usize,
    /// Outer radii of the shells (radial histograms only).
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub fractions: Vec<f64>,
}

/// Counts of points per equal-volume radial shell (ball) or per sub-cube
/// (cube with `bins` slices per axis). Points outside are assigned to the
/// nearest bin.
pub fn spatial_histogram(gamma: &Configuration, dom: &Domain, bins: usize) -> Result<Histogram> {
    dom.validate()?;
    if bins < 2 {
        return config(format!("bins must be >= 2, got {bins}"));
    }
    let d = dom.dimension();
    if gamma.dimension() != d {
        return config("configuration and domain dimensions differ");
    }
    let (kind, edges, mut counts) = match *dom {
        Domain::Ball { radius, .. } => {
            let edges: Vec<f64> = (1..=bins).map(|k| radius * (k as f64 / bins as f64).powf(1.0 / d as f64)).collect();
            (HistogramKind::RadialShells, edges, vec![0usize; bins])
        }
        Domain::Cube { .. } => (HistogramKind::Cells, Vec::new(), vec![0usize; bins.pow(d as u32)]),
    };
    for p in gamma.points() {
        let idx = match *dom {
            Domain::Ball { radius, .. } => {
                let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                let k = (bins as f64 * (r / radius).powi(d as i32)).floor() as usize;
                k.min(bins - 1)
            }
            Domain::Cube { rib, .. } => {
                let mut idx = 0;
                for (axis, &v) in p.iter().enumerate() {
                    let t = ((v / rib + 0.5) * bins as f64).floor();
                    let k = (t.max(0.0) as usize).min(bins - 1);
                    idx += k * bins.pow(axis as u32);
                }
                idx
            }
        };
        counts[idx] += 1;
    }
    let total = gamma.len().max(1) as f64;
    let fractions = counts.iter().map(|&c| c as f64 / total).collect();
    Ok(Histogram { kind, bins, edges, counts, fractions })
}
