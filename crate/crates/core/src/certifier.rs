//! Stability, superstability and strong superstability certificates for
//! radial pair potentials, with an empirical falsification harness.
//!
//! A certificate for rib `lambda` asserts
//! `U(gamma) >= sum_Delta [A |gamma_Delta|^p - B |gamma_Delta|]`
//! over the cubic partition of rib `lambda`, for every finite configuration.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::geometry::{random_configuration_with, total_energy, CompensatedSum, Configuration, CubicPartition, SamplingBox};
use crate::minimizer::{minimize_configuration, Domain, MinimizeOptions};
use crate::potentials::{PairPotential, DEFAULT_SAMPLE_COUNT};
use crate::quadrature::{integrate, integrate_to_infinity};
use crate::riesz::{constant_cd, constant_csd, cube_energy_integral_lower_bound, pigeonhole_energy_lower_bound, RegimeTag};
use crate::special::unit_sphere_area;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Unstable,
    Unknown,
    S,
    SS,
    SSS,
}

impl Classification {
    pub fn is_certified(&self) -> bool {
        matches!(self, Classification::S | Classification::SS | Classification::SSS)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::Unstable => "Unstable",
            Classification::Unknown => "Unknown",
            Classification::S => "S",
            Classification::SS => "SS",
            Classification::SSS => "SSS",
        };
        f.write_str(s)
    }
}

// ---------------------------------------------------------------------------
// v0

/// Attraction budget `v0(lambda)` of a partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct V0Estimate {
    /// Sampled `sup_x sum_Delta sup_{y in Delta} |Phi^-(|x - y|)|` over cells
    /// with `|k|_inf <= truncation_cells`.
    pub value: f64,
    /// Analytic bound on the contribution of cells beyond the truncation.
    pub remainder: f64,
    /// `sum_k sup |Phi^-(r)|` over the distance range between the reference
    /// cell and cell `k`, for the same truncation; dominates `value`.
    pub cell_bound: f64,
    /// `max(value, cell_bound) + remainder`, the figure used by certificates.
    pub upper: f64,
    pub rib: f64,
    pub truncation_cells: usize,
    /// Cells with `|k|_inf <= near_cells` enter `value` pointwise; cells
    /// further out enter through their cell-pair bound.
    pub near_cells: usize,
}

/// Tuning of [`compute_v0_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct V0Options {
    /// `None` picks the truncation automatically.
    pub truncation_cells: Option<usize>,
    /// Samples per axis of each target cell (plus the point nearest to `x`).
    pub cell_samples_per_axis: usize,
    /// Samples per axis of the reference half-cell for the outer supremum.
    pub reference_samples_per_axis: usize,
    /// Interior samples of each radial interval in the cell-pair bound.
    pub radial_samples: usize,
    /// Largest lattice block `(2T + 1)^d` considered by the automatic choice.
    pub cell_budget: usize,
    /// Automatic truncation stops once `remainder <= this * cell_bound`.
    pub relative_remainder: f64,
}

impl Default for V0Options {
    fn default() -> Self {
        Self {
            truncation_cells: None,
            cell_samples_per_axis: 5,
            reference_samples_per_axis: 3,
            radial_samples: 64,
            cell_budget: 4_000_000,
            relative_remainder: 0.01,
        }
    }
}

// number of shells added explicitly before the integral tail bound
const EXPLICIT_SHELLS: usize = 1000;
// work cap for the pointwise part: cells * samples * reference points
const POINTWISE_BUDGET: f64 = 2e7;

fn minimum_truncation(p: &PairPotential, lambda: f64) -> usize {
    (p.tail_radius() / lambda).ceil() as usize + 1
}

/// Bound on `sum_{|k|_inf > t} sup_{x in Delta_0, y in Delta_k} |Phi^-(|x - y|)|`
/// from the tail bound `phi1 / r^{d + eps}`.
///
/// Shell `m` holds `(2m+1)^d - (2m-1)^d` cells at distance at least
/// `lambda (m - 1)`. Shells up to `M = max(t + 1000, 4)` are summed directly;
/// beyond, `(2m+1)^d - (2m-1)^d <= 2d 3^{d-1} (m-1)^{d-1}` turns the sum into
/// an integral.
pub fn far_tail_remainder(p: &PairPotential, lambda: f64, t: usize) -> f64 {
    if let Some(rc) = p.range() {
        if lambda * t as f64 > rc {
            return 0.0;
        }
    }
    let d = p.dimension() as i32;
    let df = d as f64;
    let b = p.bounds();
    let exp = df + b.tail_exponent;
    let m_top = (t + EXPLICIT_SHELLS).max(4);
    let mut acc = CompensatedSum::default();
    for m in t + 1..=m_top {
        let mf = m as f64;
        let cells = (2.0 * mf + 1.0).powi(d) - (2.0 * mf - 1.0).powi(d);
        acc.add(cells * b.tail_strength / (lambda * (mf - 1.0)).powf(exp));
    }
    let c = 2.0 * df * 3f64.powi(d - 1) * b.tail_strength / lambda.powf(exp);
    acc.add(c * ((m_top - 1) as f64).powf(-b.tail_exponent) / b.tail_exponent);
    acc.value()
}

/// `sup_{r in [a, b]} |Phi^-(r)|`, sampled at the ends, at known
/// breakpoints and at `samples` interior points.
fn radial_sup(p: &PairPotential, a: f64, b: f64, samples: usize, breaks: &[f64]) -> Result<f64> {
    let mut best = p.negative_magnitude(a)?.max(p.negative_magnitude(b)?);
    for k in 1..=samples {
        let r = a + (b - a) * k as f64 / (samples + 1) as f64;
        best = best.max(p.negative_magnitude(r)?);
    }
    for &r in breaks.iter().filter(|&&r| r > a && r < b) {
        best = best.max(p.negative_magnitude(r)?);
        let above = r * (1.0 + 1e-12);
        if above < b {
            best = best.max(p.negative_magnitude(above)?);
        }
    }
    Ok(best)
}

/// Nondecreasing tuples in `[0, t]^d` with the number of lattice vectors
/// they represent under coordinate permutations and sign flips.
fn symmetric_cells(d: usize, t: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(d: usize, t: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, f64)>) {
        if cur.len() == d {
            let mut mult = (1..=d).product::<usize>() as f64;
            let mut run = 1usize;
            for i in 1..=d {
                if i < d && cur[i] == cur[i - 1] {
                    run += 1;
                } else {
                    mult /= (1..=run).product::<usize>() as f64;
                    run = 1;
                }
            }
            mult *= 2f64.powi(cur.iter().filter(|&&a| a > 0).count() as i32);
            out.push((cur.clone(), mult));
            return;
        }
        for a in from..=t {
            cur.push(a);
            rec(d, t, a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, t, 0, &mut Vec::with_capacity(d), &mut out);
    out
}

/// Per-tuple cell-pair bounds, in the order of [`symmetric_cells`].
fn cell_pair_terms(p: &PairPotential, lambda: f64, t: usize, samples: usize) -> Result<Vec<(usize, f64)>> {
    let d = p.dimension();
    let breaks = p.breakpoints();
    let floor = 1e-12 * lambda;
    symmetric_cells(d, t)
        .into_par_iter()
        .map(|(k, mult)| {
            let lo: f64 = k.iter().map(|&a| (a.saturating_sub(1) as f64).powi(2)).sum::<f64>().sqrt() * lambda;
            let hi: f64 = k.iter().map(|&a| (a as f64 + 1.0).powi(2)).sum::<f64>().sqrt() * lambda;
            let sup = radial_sup(p, lo.max(floor), hi, samples, &breaks)?;
            Ok((*k.iter().max().unwrap_or(&0), mult * sup))
        })
        .collect()
}

fn lattice_block(d: usize, t: usize) -> Vec<Vec<i64>> {
    let side = 2 * t + 1;
    let total = side.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            (0..d)
                .map(|_| {
                    let a = (idx % side) as i64 - t as i64;
                    idx /= side;
                    a
                })
                .collect()
        })
        .collect()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Pointwise sampled `sup_x sum_{|k|_inf <= t} sup_{y in Delta_k} |Phi^-|`.
fn pointwise_near(p: &PairPotential, lambda: f64, t: usize, opts: &V0Options) -> Result<f64> {
    let d = p.dimension();
    let floor = 1e-12 * lambda;
    // by reflection symmetry the outer sup may be restricted to [0, lambda/2]^d
    let axis = linspace(0.0, 0.5 * lambda, opts.reference_samples_per_axis.max(1));
    let xs: Vec<Vec<f64>> = lattice_block(d, 0)
        .into_iter()
        .flat_map(|_| {
            let n = axis.len();
            (0..n.pow(d as u32)).map(move |mut idx| {
                (0..d)
                    .map(|_| {
                        let v = idx % n;
                        idx /= n;
                        v
                    })
                    .collect::<Vec<usize>>()
            })
        })
        .map(|ix| ix.into_iter().map(|i| axis[i]).collect())
        .collect();
    let cells = lattice_block(d, t);
    let cs = opts.cell_samples_per_axis.max(2);
    let unit = linspace(-0.5, 0.5, cs);
    let mut best = 0.0f64;
    for x in &xs {
        let terms: Vec<f64> = cells
            .par_iter()
            .map(|k| {
                let mut sup = 0.0f64;
                let mut y = vec![0.0; d];
                let mut probe = |y: &[f64]| -> Result<()> {
                    let r = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    if r > floor {
                        sup = sup.max(p.negative_magnitude(r)?);
                    }
                    Ok(())
                };
                for mut idx in 0..cs.pow(d as u32) {
                    for (i, yi) in y.iter_mut().enumerate() {
                        *yi = lambda * (k[i] as f64 + unit[idx % cs]);
                        idx /= cs;
                    }
                    probe(&y)?;
                }
                // point of the closed cell nearest to x
                for (i, yi) in y.iter_mut().enumerate() {
                    let c = lambda * k[i] as f64;
                    *yi = x[i].clamp(c - 0.5 * lambda, c + 0.5 * lambda);
                }
                probe(&y)?;
                Ok(sup)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut acc = CompensatedSum::default();
        for v in terms {
            acc.add(v);
        }
        best = best.max(acc.value());
    }
    Ok(best)
}

/// [`compute_v0_with`] using default sampling and the given truncation.
pub fn compute_v0(p: &PairPotential, lambda: f64, truncation_cells: Option<usize>) -> Result<V0Estimate> {
    compute_v0_with(p, lambda, &V0Options { truncation_cells, ..V0Options::default() })
}

/// Estimate `v0(lambda) = sup_x sum_Delta sup_{y in Delta} |Phi^-(|x - y|)|`.
pub fn compute_v0_with(p: &PairPotential, lambda: f64, opts: &V0Options) -> Result<V0Estimate> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return config(format!("rib must be finite and > 0, got {lambda}"));
    }
    p.bounds().validate()?;
    let d = p.dimension();
    let t_min = minimum_truncation(p, lambda);
    let t = match opts.truncation_cells {
        Some(t) if t < t_min => {
            return config(format!("truncation_cells must be >= ceil(R/lambda) + 1 = {t_min}, got {t}"));
        }
        Some(t) => t,
        None => {
            let base: f64 = cell_pair_terms(p, lambda, t_min, opts.radial_samples)?.iter().map(|v| v.1).sum();
            let mut t = t_min;
            let fits = |t: usize| ((2 * t + 1) as f64).powi(d as i32) <= opts.cell_budget as f64;
            while far_tail_remainder(p, lambda, t) > opts.relative_remainder * base && fits(2 * t) {
                t *= 2;
            }
            t
        }
    };

    let per_cell = (opts.cell_samples_per_axis.max(2) as f64).powi(d as i32) + 1.0;
    let refs = (opts.reference_samples_per_axis.max(1) as f64).powi(d as i32);
    let mut near = t;
    while near > 0 && ((2 * near + 1) as f64).powi(d as i32) * per_cell * refs > POINTWISE_BUDGET {
        near -= 1;
    }

    let terms = cell_pair_terms(p, lambda, t, opts.radial_samples)?;
    let mut all = CompensatedSum::default();
    let mut outer = CompensatedSum::default();
    for &(k_max, v) in &terms {
        all.add(v);
        if k_max > near {
            outer.add(v);
        }
    }
    let value = pointwise_near(p, lambda, near, opts)? + outer.value();
    let cell_bound = all.value();
    let remainder = far_tail_remainder(p, lambda, t);
    Ok(V0Estimate {
        value,
        remainder,
        cell_bound,
        upper: value.max(cell_bound) + remainder,
        rib: lambda,
        truncation_cells: t,
        near_cells: near,
    })
}

// ---------------------------------------------------------------------------
// checks and constants

/// Outcome of the cell-energy versus attraction comparison at one rib.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsCheck {
    pub lambda: f64,
    /// `phi0` times the lower bound of the cube's minimal energy integral.
    pub lhs: f64,
    /// `v0 / 2` from the upper v0 estimate.
    pub rhs: f64,
    pub holds: bool,
    /// `sqrt(d) lambda <= core_radius`, so every pair inside one cell feels
    /// the core bound; required before the check can certify.
    pub cell_within_core: bool,
    pub v0: V0Estimate,
    /// `int |Phi^-| dx / lambda^d`, the small-rib approximation of `v0`;
    /// diagnostic only.
    pub v0_volume_approximation: Option<f64>,
}

impl SsCheck {
    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }
}

fn check_sub_critical(p: &PairPotential) -> Result<()> {
    if p.core_exponent() >= p.dimension() as f64 {
        return domain("the cell-energy check needs s < d; use the s >= d constants instead");
    }
    Ok(())
}

/// Compare the cell energy lower bound `phi0 I_s(mu*; Delta)` with `v0 / 2`.
///
/// A false result means "not established at this rib", not instability.
pub fn check_ss_condition(p: &PairPotential, lambda: f64) -> Result<SsCheck> {
    check_sub_critical(p)?;
    let v0 = compute_v0(p, lambda, None)?;
    check_ss_with_v0(p, lambda, v0)
}

pub fn check_ss_with_v0(p: &PairPotential, lambda: f64, v0: V0Estimate) -> Result<SsCheck> {
    check_sub_critical(p)?;
    let d = p.dimension();
    let lhs = cube_energy_integral_lower_bound(d, p.core_exponent(), lambda)? * p.core_strength();
    let rhs = 0.5 * v0.upper;
    Ok(SsCheck {
        lambda,
        lhs,
        rhs,
        holds: lhs > rhs,
        cell_within_core: (d as f64).sqrt() * lambda <= p.core_radius(),
        v0,
        v0_volume_approximation: negative_part_integral(p).ok().map(|i| i / lambda.powi(d as i32)),
    })
}

/// `int_{R^d} |Phi^-(|x|)| dx`, by quadrature split at the breakpoints.
pub fn negative_part_integral(p: &PairPotential) -> Result<f64> {
    let d = p.dimension();
    let f = |r: f64| -> Result<f64> { Ok(p.negative_magnitude(r)? * r.powi(d as i32 - 1)) };
    let mut knots = vec![0.0];
    knots.extend(p.breakpoints());
    let mut total = 0.0;
    for w in knots.windows(2) {
        total += integrate(f, w[0], w[1], 1e-12, 1e-9, 2000)?.value;
    }
    let last = *knots.last().expect("non-empty");
    total += integrate_to_infinity(f, last, 1e-12, 1e-9, 2000)?.value;
    Ok(unit_sphere_area(d) * total)
}

/// Threshold and `B` from a sequence of normalized minimal cell energies.
///
/// `N0` is the least `N` with `i_lower - e(N) < epsilon`, and
/// `B = max{(e(N0) - e(2)) N0, v0 / 2}`. The sequence must contain `N = 2`.
pub fn compute_b_theorem1(i_lower: f64, epsilon: f64, e_values: &[(usize, f64)], v0: f64) -> Result<(usize, f64)> {
    if !(epsilon > 0.0) {
        return domain(format!("epsilon must be > 0, got {epsilon}"));
    }
    let mut sorted = e_values.to_vec();
    sorted.sort_by_key(|v| v.0);
    let e2 = match sorted.iter().find(|v| v.0 == 2) {
        Some(v) => v.1,
        None => return config("e-values must include N = 2"),
    };
    let Some(&(n0, e_n0)) = sorted.iter().find(|v| v.0 >= 2 && i_lower - v.1 < epsilon) else {
        return Err(Error::Threshold("threshold not reached within the e-values; increase N_max or epsilon".into()));
    };
    Ok((n0, ((e_n0 - e2) * n0 as f64).max(0.5 * v0)))
}

/// Threshold and `B` for `s = d`.
///
/// `N0` is the least `N >= 2` with `(C_d - epsilon) ln N > v0 / 2` and
/// `B = v0/2 + sum_{i=2}^{N0-1} (C_d - epsilon) i ln i`.
pub fn compute_b_theorem2(d: usize, lambda: f64, phi0: f64, epsilon: f64, v0: f64) -> Result<(usize, f64)> {
    let cd = constant_cd(d, lambda, phi0)?;
    if !(epsilon > 0.0) || epsilon >= cd {
        return domain(format!("epsilon must lie in (0, C_d) = (0, {cd}), got {epsilon}"));
    }
    if !(v0 >= 0.0) || !v0.is_finite() {
        return domain(format!("v0 must be finite and >= 0, got {v0}"));
    }
    let slope = cd - epsilon;
    let half = 0.5 * v0;
    let guess = (half / slope).exp().floor();
    if !(guess < 1e15) {
        return domain("threshold N0 exceeds 1e15");
    }
    let mut n0 = (guess as usize).max(2);
    while n0 > 2 && slope * ((n0 - 1) as f64).ln() > half {
        n0 -= 1;
    }
    while slope * (n0 as f64).ln() <= half {
        n0 += 1;
    }
    let mut acc = CompensatedSum::default();
    acc.add(half);
    for i in 2..n0 {
        let x = i as f64;
        acc.add(slope * x * x.ln());
    }
    Ok((n0, acc.value()))
}

/// Volume-form constant `A_Lambda = A lambda^d`.
pub fn ginibre_constants(a: f64, lambda: f64, d: usize) -> Result<f64> {
    if !(a >= 0.0) || !(lambda > 0.0) {
        return domain("ginibre constants need A >= 0 and lambda > 0");
    }
    Ok(a * lambda.powi(d as i32))
}

/// `sup_{n >= 1} n (c - phi0 g(n) / n^2)` with `g` the pigeonhole energy
/// bound; `None` if the supremum is not located below `2^40` points.
fn pigeonhole_b(d: usize, s: f64, lambda: f64, phi0: f64, c: f64) -> Option<(f64, usize)> {
    let h = |n: usize| phi0 * pigeonhole_energy_lower_bound(d, s, lambda, n) / (n as f64 * n as f64);
    let mut best = c.max(0.0);
    const EXACT: usize = 4096;
    for n in 2..=EXACT {
        let gap = c - h(n);
        if gap <= 0.0 {
            return Some((best, n));
        }
        best = best.max(n as f64 * gap);
    }
    // h is nondecreasing, so each dyadic block is bounded by its left end
    let mut lo = EXACT;
    for _ in 0..28 {
        let gap = c - h(lo);
        if gap <= 0.0 {
            return Some((best, lo));
        }
        best = best.max(2.0 * lo as f64 * gap);
        lo *= 2;
    }
    None
}

// ---------------------------------------------------------------------------
// certify

/// One named check in a certificate's evidence trail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub name: String,
    /// Non-finite values are stored as `null` with an explanation in `detail`.
    pub value: Option<f64>,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

impl Evidence {
    fn new(name: impl Into<String>, value: f64, holds: bool) -> Self {
        let (value, detail) = if value.is_finite() {
            (Some(value), None)
        } else {
            (None, Some(format!("value {value}")))
        };
        Self { name: name.into(), value, holds, detail }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        let text = detail.into();
        self.detail = Some(match self.detail.take() {
            Some(prev) => format!("{prev}; {text}"),
            None => text,
        });
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct V0Summary {
    pub value: f64,
    pub remainder: f64,
    pub upper: f64,
    pub truncation_cells: usize,
}

impl From<V0Estimate> for V0Summary {
    fn from(v: V0Estimate) -> Self {
        Self { value: v.value, remainder: v.remainder, upper: v.upper, truncation_cells: v.truncation_cells }
    }
}

/// Classification with constants `(A, B, p, lambda)` and the evidence trail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub classification: Classification,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub p: f64,
    pub lambda: Option<f64>,
    pub v0: Option<V0Summary>,
    pub regime: RegimeTag,
    pub dimension: usize,
    pub core_exponent: f64,
    pub epsilon: Option<f64>,
    #[serde(rename = "N0")]
    pub n0: Option<usize>,
    pub evidence: Vec<Evidence>,
}

/// Options of [`certify`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyOptions {
    /// Ribs tried in the given order; `None` means
    /// `core_radius * 2^{-k}`, `k = 0..8`.
    pub lambda_grid: Option<Vec<f64>>,
    /// `None` chooses `0` for `s = 0`, a quarter of the margin for
    /// `0 < s < d` and `C_d / 10` for `s = d`; unused for `s > d`.
    pub epsilon: Option<f64>,
    /// Largest `N` minimized when building e-values for `0 < s < d`.
    pub budget: usize,
    pub minimize: MinimizeOptions,
    pub v0: V0Options,
    pub sample_count: usize,
    pub quadrature_points: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            lambda_grid: None,
            epsilon: None,
            budget: 48,
            minimize: MinimizeOptions { starts: Some(12), ..MinimizeOptions::default() },
            v0: V0Options::default(),
            sample_count: DEFAULT_SAMPLE_COUNT,
            quadrature_points: 1024,
        }
    }
}

pub fn default_lambda_grid(p: &PairPotential) -> Vec<f64> {
    (0..8).map(|k| p.core_radius() * 0.5f64.powi(k)).collect()
}

struct Accepted {
    classification: Classification,
    a: f64,
    b: f64,
    p: f64,
    lambda: f64,
    v0: V0Estimate,
    epsilon: Option<f64>,
    n0: Option<usize>,
}

enum Attempt {
    Certified(Accepted),
    Rejected,
    BudgetExhausted,
}

/// Classify `p` and compute certificate constants.
pub fn certify(p: &PairPotential, opts: &CertifyOptions) -> Result<StabilityCertificate> {
    let d = p.dimension();
    let s = p.core_exponent();
    let phi0 = p.core_strength();
    let regime = RegimeTag::classify(d, s);
    let mut evidence = Vec::new();

    let grid = match &opts.lambda_grid {
        Some(g) => {
            if g.is_empty() || g.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
                return config("lambda grid must be non-empty with finite positive ribs");
            }
            g.clone()
        }
        None => default_lambda_grid(p),
    };
    if opts.budget < 2 {
        return config("budget must be >= 2");
    }

    let assumption = p.validate_assumption_a(opts.sample_count)?;
    let mut ev = Evidence::new("assumption_a_sampled", assumption.sample_count as f64, assumption.passed)
        .with_detail(assumption.note.clone());
    if let Some(v) = &assumption.first_violation {
        ev = ev.with_detail(format!("first violation at r = {} ({:?} region)", v.radius, v.region));
    }
    evidence.push(ev);

    let mut outcome = None;
    let mut exhausted = false;
    if assumption.passed {
        for &lambda in &grid {
            let within = (d as f64).sqrt() * lambda <= p.core_radius();
            evidence.push(
                Evidence::new(format!("cell_within_core@{lambda}"), (d as f64).sqrt() * lambda, within)
                    .with_detail("cell diameter must not exceed the core radius"),
            );
            if !within {
                continue;
            }
            let v0 = compute_v0_with(p, lambda, &opts.v0)?;
            evidence.push(Evidence::new(format!("v0@{lambda}"), v0.upper, true).with_detail(format!(
                "sampled value {}, cell bound {}, remainder {}, truncation {}",
                v0.value, v0.cell_bound, v0.remainder, v0.truncation_cells
            )));
            let attempt = if s > d as f64 {
                attempt_hypersingular(p, lambda, v0, &mut evidence)?
            } else if s == d as f64 {
                attempt_critical(p, lambda, v0, opts, &mut evidence)?
            } else {
                attempt_sub_critical(p, lambda, v0, opts, &mut evidence)?
            };
            match attempt {
                Attempt::Certified(acc) => {
                    outcome = Some(acc);
                    break;
                }
                Attempt::Rejected => {}
                Attempt::BudgetExhausted => {
                    exhausted = true;
                    break;
                }
            }
        }
    }

    if let Some(acc) = outcome {
        return Ok(StabilityCertificate {
            classification: acc.classification,
            a: acc.a,
            b: acc.b,
            p: acc.p,
            lambda: Some(acc.lambda),
            v0: Some(acc.v0.into()),
            regime,
            dimension: d,
            core_exponent: s,
            epsilon: acc.epsilon,
            n0: acc.n0,
            evidence,
        });
    }

    let mut classification = Classification::Unknown;
    if exhausted {
        evidence.push(Evidence::new("budget", opts.budget as f64, false).with_detail("e-value budget exhausted"));
    } else {
        let nec = p.necessary_conditions(opts.quadrature_points)?;
        evidence.push(
            Evidence::new("bounded_below", nec.lower_bound, nec.bounded_below)
                .with_detail("heuristic: value is the sampled infimum on (0, 100 R]"),
        );
        let integral_ev = Evidence::new("integral_nonneg", nec.integral, nec.integral_nonneg)
            .with_detail(format!("quadrature error {}", nec.integral_error));
        evidence.push(integral_ev);
        if !nec.passed() {
            classification = Classification::Unstable;
        }
    }
    let _ = phi0;
    Ok(StabilityCertificate {
        classification,
        a: 0.0,
        b: 0.0,
        p: 2.0,
        lambda: None,
        v0: None,
        regime,
        dimension: d,
        core_exponent: s,
        epsilon: opts.epsilon,
        n0: None,
        evidence,
    })
}

fn attempt_hypersingular(p: &PairPotential, lambda: f64, v0: V0Estimate, evidence: &mut Vec<Evidence>) -> Result<Attempt> {
    let d = p.dimension() as f64;
    let s = p.core_exponent();
    let c = constant_csd(p.dimension(), s, lambda, p.core_strength())?;
    // max over N >= 2 of N^{1 - s/d} sits at N = 2
    let a = c - 0.5 * v0.upper * 2f64.powf(1.0 - s / d);
    evidence.push(Evidence::new(format!("C_sd@{lambda}"), c, true));
    evidence.push(Evidence::new(format!("A_positive@{lambda}"), a, a > 0.0));
    if !(a > 0.0) {
        return Ok(Attempt::Rejected);
    }
    // a cell holding one point only pays its share v0/2 of attraction
    let b = a + 0.5 * v0.upper;
    evidence.push(
        Evidence::new("B_theorem", 0.5 * v0.upper, true).with_detail("v0/2; certificate B raised to A + v0/2 for singleton cells"),
    );
    Ok(Attempt::Certified(Accepted {
        classification: Classification::SSS,
        a,
        b,
        p: 1.0 + s / d,
        lambda,
        v0,
        epsilon: None,
        n0: None,
    }))
}

fn attempt_critical(
    p: &PairPotential,
    lambda: f64,
    v0: V0Estimate,
    opts: &CertifyOptions,
    evidence: &mut Vec<Evidence>,
) -> Result<Attempt> {
    let d = p.dimension();
    let phi0 = p.core_strength();
    let cd = constant_cd(d, lambda, phi0)?;
    let eps = opts.epsilon.unwrap_or(0.1 * cd);
    if !(eps > 0.0 && eps < cd) {
        evidence.push(Evidence::new(format!("epsilon_in_range@{lambda}"), eps, false));
        return Ok(Attempt::Rejected);
    }
    let (n0, b_theorem) = compute_b_theorem2(d, lambda, phi0, eps, v0.upper)?;
    let a = (cd - eps) * (n0 as f64).ln() - 0.5 * v0.upper;
    evidence.push(Evidence::new(format!("C_d@{lambda}"), cd, true));
    evidence.push(Evidence::new("B_theorem", b_theorem, true).with_detail(format!("N0 = {n0}")));
    evidence.push(Evidence::new(format!("A_positive@{lambda}"), a, a > 0.0));
    if !(a > 0.0) {
        return Ok(Attempt::Rejected);
    }
    let c = a + 0.5 * v0.upper;
    match pigeonhole_b(d, p.core_exponent(), lambda, phi0, c) {
        Some((b, n_cross)) => {
            evidence.push(
                Evidence::new("B_pigeonhole", b, true)
                    .with_detail(format!("cell energy bound exceeds A + v0/2 from N = {n_cross} on")),
            );
            Ok(Attempt::Certified(Accepted {
                classification: Classification::SS,
                a,
                b: b.max(c),
                p: 2.0,
                lambda,
                v0,
                epsilon: Some(eps),
                n0: Some(n0),
            }))
        }
        None => {
            evidence.push(Evidence::new("B_pigeonhole", f64::NAN, false).with_detail("no crossing below 2^40 points"));
            Ok(Attempt::Rejected)
        }
    }
}

fn attempt_sub_critical(
    p: &PairPotential,
    lambda: f64,
    v0: V0Estimate,
    opts: &CertifyOptions,
    evidence: &mut Vec<Evidence>,
) -> Result<Attempt> {
    let d = p.dimension();
    let s = p.core_exponent();
    let phi0 = p.core_strength();
    let check = check_ss_with_v0(p, lambda, v0)?;
    let mut ev = Evidence::new(format!("ss_condition@{lambda}"), check.margin(), check.holds)
        .with_detail(format!("lhs {}, rhs {}", check.lhs, check.rhs));
    if let Some(approx) = check.v0_volume_approximation {
        ev = ev.with_detail(format!("volume approximation of v0: {approx}"));
    }
    evidence.push(ev);
    if !check.holds {
        return Ok(Attempt::Rejected);
    }
    let margin = check.margin() / phi0;
    let eps = opts.epsilon.unwrap_or(if s == 0.0 { 0.0 } else { 0.25 * margin });
    if !(eps >= 0.0) || eps >= margin || (s > 0.0 && eps == 0.0) {
        evidence.push(Evidence::new(format!("epsilon_below_margin@{lambda}"), eps, false));
        return Ok(Attempt::Rejected);
    }
    let a = check.lhs - check.rhs - phi0 * eps;
    let singleton = a + 0.5 * v0.upper;

    if s == 0.0 {
        // E_0 = n(n-1)/2 exactly, so n (A + v0/2 - phi0 e(n)) = phi0 (1/2 - n eps)
        let b = singleton.max(0.5 * phi0);
        evidence.push(Evidence::new("B_theorem", 0.5 * v0.upper, true).with_detail("v0/2 with N0 = 2"));
        evidence.push(Evidence::new("B_singleton", singleton, true).with_detail("A + v0/2"));
        return Ok(Attempt::Certified(Accepted {
            classification: Classification::SS,
            a,
            b,
            p: 2.0,
            lambda,
            v0,
            epsilon: Some(eps),
            n0: Some(2),
        }));
    }

    let i_lower = check.lhs / phi0;
    let dom = Domain::cube(d, lambda)?;
    // two points at opposite corners of the cell
    let diameter = (d as f64).sqrt() * lambda;
    let mut e_values = vec![(2usize, 0.25 * diameter.powf(-s))];
    let mut found = i_lower - e_values[0].1 < eps;
    let mut n = 3;
    while !found && n <= opts.budget {
        let r = minimize_configuration(n, &dom, s, &opts.minimize)?;
        e_values.push((n, r.normalized_energy));
        found = i_lower - r.normalized_energy < eps;
        n += 1;
    }
    if !found {
        return Ok(Attempt::BudgetExhausted);
    }
    let (n0, b_theorem) = compute_b_theorem1(i_lower, eps, &e_values, v0.upper)?;
    let e_n0 = e_values.iter().find(|v| v.0 == n0).map(|v| v.1).unwrap_or(0.0);
    let b_cells = phi0 * (e_n0 - e_values[0].1) * n0 as f64;
    evidence.push(
        Evidence::new("B_theorem", b_theorem, true)
            .with_detail(format!("N0 = {n0}; e-values are best-found upper bounds from the minimizer")),
    );
    Ok(Attempt::Certified(Accepted {
        classification: Classification::SS,
        a,
        b: b_cells.max(singleton),
        p: 2.0,
        lambda,
        v0,
        epsilon: Some(eps),
        n0: Some(n0),
    }))
}

// ---------------------------------------------------------------------------
// falsification harness

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessOptions {
    pub trials: usize,
    /// Sizes are drawn uniformly from `2..=n_max`.
    pub n_max: usize,
    pub box_rib: f64,
    pub seed: u64,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self { trials: 10_000, n_max: 20, box_rib: 10.0, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    pub configuration: Configuration,
    pub energy: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsificationReport {
    pub trials: usize,
    pub violations: usize,
    /// `min (U - bound)`; `None` when no trial ran.
    pub min_slack: Option<f64>,
    pub counterexample: Option<Counterexample>,
}

impl FalsificationReport {
    pub fn passed(&self) -> Option<bool> {
        (self.trials > 0).then_some(self.violations == 0)
    }
}

/// `sum_Delta [A n_Delta^p - B n_Delta]` for the certificate's partition.
pub fn certificate_bound(gamma: &Configuration, cert: &StabilityCertificate) -> Result<f64> {
    let occ = match cert.lambda {
        Some(l) => CubicPartition::new(gamma.dimension(), l)?.occupancy(gamma),
        None => return config("certificate has no rib"),
    };
    let mut acc = CompensatedSum::default();
    for n in occ.counts() {
        let nf = n as f64;
        acc.add(cert.a * nf.powf(cert.p) - cert.b * nf);
    }
    Ok(acc.value())
}

/// Draw random configurations and compare `U(gamma)` with the certified bound.
pub fn empirical_bound_test(p: &PairPotential, cert: &StabilityCertificate, opts: &HarnessOptions) -> Result<FalsificationReport> {
    if !cert.classification.is_certified() {
        return config(format!("cannot test a certificate classified {}", cert.classification));
    }
    if opts.n_max < 2 {
        return config("n_max must be >= 2");
    }
    let b = SamplingBox::new(p.dimension(), opts.box_rib)?;
    let results: Vec<(f64, f64, f64, Configuration)> = (0..opts.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(t as u64);
            let n = rng.gen_range(2..=opts.n_max);
            let gamma = random_configuration_with(n, &b, &mut rng);
            let energy = total_energy(&gamma, p)?;
            let bound = certificate_bound(&gamma, cert)?;
            let scale = energy.abs() + bound.abs() + 1.0;
            Ok((energy - bound, scale, bound, gamma))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut violations = 0;
    let mut min_slack: Option<f64> = None;
    let mut counterexample = None;
    for (t, (slack, scale, bound, gamma)) in results.into_iter().enumerate() {
        min_slack = Some(min_slack.map_or(slack, |m| m.min(slack)));
        if slack < -1e-10 * scale {
            violations += 1;
            if counterexample.is_none() {
                counterexample = Some(Counterexample { trial: t, energy: slack + bound, bound, configuration: gamma });
            }
        }
    }
    Ok(FalsificationReport { trials: opts.trials, violations, min_slack, counterexample })
}
