//! Riesz energies and closed-form potential-theory constants on balls and
//! cubes.
//!
//! Constants here are pure geometry (`phi0 = lambda = 1` unless a rib and
//! strength are passed explicitly).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::geometry::{distance, CompensatedSum, Configuration};
use crate::special::{gamma, unit_sphere_area, zeta};

/// Dimension and exponent of a Riesz kernel `|x - y|^{-s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszParams {
    pub dimension: usize,
    pub exponent: f64,
}

impl RieszParams {
    pub fn new(dimension: usize, exponent: f64) -> Result<Self> {
        if dimension == 0 {
            return config("dimension must be >= 1");
        }
        if !(exponent >= 0.0) || !exponent.is_finite() {
            return config(format!("Riesz exponent must be finite and >= 0, got {exponent}"));
        }
        Ok(Self { dimension, exponent })
    }

    pub fn regime(&self) -> RegimeTag {
        RegimeTag::classify(self.dimension, self.exponent)
    }
}

/// Qualitative behaviour of minimal configurations for a given `(d, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeTag {
    /// `s = 0`: every configuration has the same energy.
    Flat,
    /// `0 < s <= d - 2`: the equilibrium measure lives on the boundary.
    Boundary,
    /// `d - 2 < s < d`: the equilibrium measure has an interior density.
    Interior,
    /// `s = d`: energy grows like `N^2 ln N`.
    Critical,
    /// `s > d`: energy grows like `N^{1 + s/d}`.
    Hypersingular,
}

impl RegimeTag {
    pub fn classify(dimension: usize, s: f64) -> Self {
        let d = dimension as f64;
        if s == 0.0 {
            RegimeTag::Flat
        } else if s <= d - 2.0 {
            RegimeTag::Boundary
        } else if s < d {
            RegimeTag::Interior
        } else if s == d {
            RegimeTag::Critical
        } else {
            RegimeTag::Hypersingular
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeTag::Flat => "flat",
            RegimeTag::Boundary => "boundary",
            RegimeTag::Interior => "interior",
            RegimeTag::Critical => "critical",
            RegimeTag::Hypersingular => "hypersingular",
        }
    }
}

/// `|x - y|^{-s}` computed from the squared distance.
#[inline]
pub(crate) fn kernel_from_sq(r2: f64, s: f64) -> f64 {
    if s == 2.0 {
        1.0 / r2
    } else if s == 1.0 {
        1.0 / r2.sqrt()
    } else {
        r2.powf(-0.5 * s)
    }
}

/// `E_s(gamma) = sum_{pairs} |x - y|^{-s}`.
pub fn riesz_energy(gamma: &Configuration, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return domain(format!("Riesz exponent must be >= 0, got {s}"));
    }
    let n = gamma.len();
    let mut acc = CompensatedSum::default();
    for i in 0..n {
        for j in i + 1..n {
            let r = distance(gamma.point(i), gamma.point(j));
            if r == 0.0 {
                return Err(Error::CoincidentPoints { i, j });
            }
            acc.add(if s == 0.0 { 1.0 } else { kernel_from_sq(r * r, s) });
        }
    }
    Ok(acc.value())
}

/// `E / N^2`.
pub fn normalized_energy(energy: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return domain(format!("normalized energy needs N >= 2, got {n}"));
    }
    let nf = n as f64;
    Ok(energy / (nf * nf))
}

fn check_sub_critical(d: usize, s: f64, r: f64) -> Result<()> {
    if d == 0 {
        return config("dimension must be >= 1");
    }
    if !(s >= 0.0) {
        return domain(format!("Riesz exponent must be >= 0, got {s}"));
    }
    if s >= d as f64 {
        return domain("energy integral infinite for s >= d");
    }
    if !(r > 0.0) {
        return domain(format!("radius must be > 0, got {r}"));
    }
    Ok(())
}

/// Minimal energy integral `I_s(mu*; B^d(0, r))` for `0 <= s < d`, in the
/// closed forms quoted in the literature.
///
/// For `d - 2 < s < d` the quoted closed form carries `Gamma(1 + d/2)` in
/// the denominator; this function evaluates it as quoted. It differs from the
/// energy of the equilibrium density by the factor `2/d` (see
/// [`equilibrium_energy_ball`]), so it jumps at `s = d - 2` and is not a lower
/// bound when `d = 1`.
pub fn energy_integral_ball(d: usize, s: f64, r: f64) -> Result<f64> {
    check_sub_critical(d, s, r)?;
    if s == 0.0 {
        return Ok(0.5);
    }
    let df = d as f64;
    let value = if s <= df - 2.0 {
        2f64.powf(df - s - 3.0) * gamma((df - s - 1.0) / 2.0) * gamma(df / 2.0)
            / (PI.sqrt() * gamma(df - 1.0 - s / 2.0))
    } else {
        gamma(1.0 + s / 2.0) * gamma((df - s) / 2.0) / (2.0 * gamma(1.0 + df / 2.0))
    };
    Ok(r.powf(-s) * value)
}

/// `(1/2) * W` where `W` is the (constant) potential of the interior
/// equilibrium density on the ball; equal to [`energy_integral_ball`] in the
/// boundary regime.
///
/// In the interior regime this is `Gamma(1+s/2) Gamma((d-s)/2) / (2 Gamma(d/2)) / r^s`,
/// which is continuous with the boundary formula at `s = d - 2`.
pub fn equilibrium_energy_ball(d: usize, s: f64, r: f64) -> Result<f64> {
    check_sub_critical(d, s, r)?;
    let df = d as f64;
    if s == 0.0 || s <= df - 2.0 {
        return energy_integral_ball(d, s, r);
    }
    Ok(r.powf(-s) * gamma(1.0 + s / 2.0) * gamma((df - s) / 2.0) / (2.0 * gamma(df / 2.0)))
}

/// Minimizing measure of the energy integral on a ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MinimizingMeasure {
    /// Normalized surface measure on the sphere of radius `radius`.
    SurfaceUniform { radius: f64, surface_area: f64 },
    /// Density with respect to Lebesgue measure at the queried point.
    Density { value: f64 },
}

/// `A(d, s) = Gamma(1 + s/2) / (pi^{d/2} Gamma(1 - (d - s)/2))`.
pub fn interior_density_constant(d: usize, s: f64) -> f64 {
    let df = d as f64;
    gamma(1.0 + s / 2.0) / (PI.powf(df / 2.0) * gamma(1.0 - (df - s) / 2.0))
}

/// The minimizing measure on `B^d(0, r)` evaluated at `x`.
pub fn minimizing_density_ball(d: usize, s: f64, r: f64, x: &[f64]) -> Result<MinimizingMeasure> {
    check_sub_critical(d, s, r)?;
    if x.len() != d {
        return config(format!("point has {} coordinates, expected {d}", x.len()));
    }
    let x2: f64 = x.iter().map(|v| v * v).sum();
    if x2.sqrt() > r {
        return domain(format!("point at radius {} lies outside the ball of radius {r}", x2.sqrt()));
    }
    let df = d as f64;
    if s <= df - 2.0 {
        return Ok(MinimizingMeasure::SurfaceUniform {
            radius: r,
            surface_area: unit_sphere_area(d) * r.powf(df - 1.0),
        });
    }
    let gap = r * r - x2;
    let value = interior_density_constant(d, s) / gap.powf((df - s) / 2.0);
    Ok(MinimizingMeasure::Density { value })
}

/// `C_d = pi^{d/2} / (d Gamma(d/2)) * phi0 / lambda^d`.
pub fn constant_cd(d: usize, lambda: f64, phi0: f64) -> Result<f64> {
    if d == 0 || !(lambda > 0.0) || !(phi0 > 0.0) {
        return domain("constant_cd needs d >= 1, lambda > 0, phi0 > 0");
    }
    let df = d as f64;
    Ok(PI.powf(df / 2.0) / (df * gamma(df / 2.0)) * phi0 / lambda.powf(df))
}

/// `C_{s,d} = (1/lambda^s) 2^{-(2s+1)} (2 pi^{d/2} / (d Gamma(d/2)))^{s/d} phi0`.
pub fn constant_csd(d: usize, s: f64, lambda: f64, phi0: f64) -> Result<f64> {
    if d == 0 || !(lambda > 0.0) || !(phi0 > 0.0) {
        return domain("constant_csd needs d >= 1, lambda > 0, phi0 > 0");
    }
    let df = d as f64;
    if !(s > df) {
        return domain(format!("constant_csd needs s > d, got s = {s}, d = {d}"));
    }
    let shape = 2.0 * PI.powf(df / 2.0) / (df * gamma(df / 2.0));
    Ok(lambda.powf(-s) * 2f64.powf(-(2.0 * s + 1.0)) * shape.powf(s / df) * phi0)
}

/// Lower bound `C_{s,d} N^{1 + s/d}` on the `s`-energy (times `phi0`) of any
/// `N` points in a cube of rib `lambda`.
pub fn hypersingular_lower_bound(d: usize, s: f64, lambda: f64, phi0: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return domain(format!("hypersingular bound needs N >= 2, got {n}"));
    }
    let c = constant_csd(d, s, lambda, phi0)?;
    Ok(c * (n as f64).powf(1.0 + s / d as f64))
}

/// `lim_N E_s([0,1]; N) / N^{1+s} = zeta(s)` on the unit interval.
pub fn d1_zeta_limit(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return domain(format!("zeta limit needs s > 1, got {s}"));
    }
    Ok(zeta(s))
}

/// Lower bound for `I_s(mu*; Delta)` on a cube of rib `lambda`, from the
/// circumscribed ball of radius `sqrt(d) lambda / 2`.
///
/// Uses the smaller of [`energy_integral_ball`] and
/// [`equilibrium_energy_ball`] so the value stays a lower bound in `d = 1`.
pub fn cube_energy_integral_lower_bound(d: usize, s: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return domain(format!("rib must be > 0, got {lambda}"));
    }
    let r = (d as f64).sqrt() * lambda / 2.0;
    let quoted = energy_integral_ball(d, s, r)?;
    let equilibrium = equilibrium_energy_ball(d, s, r)?;
    Ok(quoted.min(equilibrium))
}

/// Rigorous lower bound on `E_s` for `n` points in a cube of rib `lambda`.
///
/// Splitting the cube into `k^d` sub-cubes of diameter `D/k` forces at least
/// `n^2/(2k^d) - n/2` pairs within distance `D/k`; integrating the layer-cake
/// representation `E_s = int s t^{-s-1} #{pairs <= t} dt` over the scales
/// `k = 1..floor(n^{1/d})` gives the bound. `bound / n^2` is nondecreasing in `n`.
pub fn pigeonhole_energy_lower_bound(d: usize, s: f64, lambda: f64, n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    if s == 0.0 {
        return nf * (nf - 1.0) / 2.0;
    }
    let diameter = (d as f64).sqrt() * lambda;
    let mut total = 0.0;
    let mut k: u64 = 1;
    loop {
        let cells = (k as f64).powi(d as i32);
        if cells > nf {
            break;
        }
        let pairs = nf * nf / (2.0 * cells) - nf / 2.0;
        let kf = k as f64;
        let weight = (kf / diameter).powf(s) - ((kf - 1.0) / diameter).powf(s);
        total += pairs.max(0.0) * weight;
        k += 1;
    }
    total
}
