//! Radial pair potentials and the structural checks applied to them.
//!
//! A [`PairPotential`] couples a profile `r -> Phi(r)` with the bound
//! metadata of [`CoreTailBounds`]: a repulsive core `Phi(r) >= phi0 / r^s` for
//! `r <= lambda` and an integrable attractive tail
//! `Phi(r) >= -phi1 / r^{d + eps}` for `r >= R`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, Estimate};
use crate::special::unit_sphere_area;

/// Default number of radii used by [`PairPotential::validate_assumption_a`].
pub const DEFAULT_SAMPLE_COUNT: usize = 4096;

/// Relative slack allowed when a sampled value is compared with a bound.
const BOUND_SLACK: f64 = 1e-12;

/// User-supplied radial profile.
pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Core and tail bound metadata carried by every potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoreTailBounds {
    /// Exponent `s >= 0` of the core bound.
    pub core_exponent: f64,
    /// Coefficient `phi0 > 0` of the core bound.
    pub core_strength: f64,
    /// Radius `lambda` inside which the core bound holds.
    pub core_radius: f64,
    /// Radius `R > lambda` beyond which the tail bound holds.
    pub tail_radius: f64,
    /// Coefficient `phi1 > 0` of the tail bound.
    pub tail_strength: f64,
    /// Excess decay exponent `eps > 0` of the tail bound.
    pub tail_exponent: f64,
}

impl CoreTailBounds {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.core_exponent,
            self.core_strength,
            self.core_radius,
            self.tail_radius,
            self.tail_strength,
            self.tail_exponent,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return config("potential metadata must be finite");
        }
        if self.core_exponent < 0.0 {
            return config(format!("core_exponent must be >= 0, got {}", self.core_exponent));
        }
        if self.core_strength <= 0.0 || self.tail_strength <= 0.0 || self.tail_exponent <= 0.0 {
            return config("core_strength, tail_strength and tail_exponent must be > 0");
        }
        if self.core_radius <= 0.0 {
            return config(format!("core_radius must be > 0, got {}", self.core_radius));
        }
        if self.tail_radius <= self.core_radius {
            return config(format!(
                "tail_radius ({}) must exceed core_radius ({})",
                self.tail_radius, self.core_radius
            ));
        }
        Ok(())
    }

    /// The core bound `phi0 / r^s`.
    pub fn core_bound(&self, r: f64) -> f64 {
        self.core_strength * r.powf(-self.core_exponent)
    }

    /// The tail bound `-phi1 / r^{d + eps}`.
    pub fn tail_bound(&self, r: f64, dimension: usize) -> f64 {
        -self.tail_strength * r.powf(-(dimension as f64 + self.tail_exponent))
    }
}

/// Tabulated profile with linear interpolation.
///
/// Below the first radius the core bound is used, above the last radius the
/// profile is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    radii: Vec<f64>,
    values: Vec<f64>,
}

impl Table {
    pub fn new(rows: Vec<(f64, f64)>) -> Result<Self> {
        if rows.len() < 2 {
            return config("potential table needs at least two rows");
        }
        let (radii, values): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
        if radii.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return config("potential table contains non-finite entries");
        }
        if radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
            return config("potential table radii must be positive and strictly increasing");
        }
        Ok(Self { radii, values })
    }

    /// Read a two-column CSV `r,phi` (a header row is allowed).
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)?;
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Parse(format!("{}: row {} must have two columns", path.display(), line + 1)));
            }
            let r = record[0].parse::<f64>();
            let v = record[1].parse::<f64>();
            match (r, v) {
                (Ok(r), Ok(v)) => rows.push((r, v)),
                _ if line == 0 => continue,
                _ => return Err(Error::Parse(format!("{}: row {} is not numeric", path.display(), line + 1))),
            }
        }
        Self::new(rows)
    }

    fn eval(&self, r: f64, bounds: &CoreTailBounds) -> f64 {
        let first = self.radii[0];
        let last = *self.radii.last().expect("non-empty");
        if r < first {
            return bounds.core_bound(r);
        }
        if r > last {
            return 0.0;
        }
        let k = self.radii.partition_point(|&x| x <= r);
        if k >= self.radii.len() {
            return *self.values.last().expect("non-empty");
        }
        let (r0, r1) = (self.radii[k - 1], self.radii[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * (r - r0) / (r1 - r0)
    }

    pub fn last_radius(&self) -> f64 {
        *self.radii.last().expect("non-empty")
    }
}

#[derive(Clone)]
enum Profile {
    Riesz,
    SquareWell { height: f64, core: f64, depth: f64, well: f64 },
    LjLike { strength: f64, sigma: f64, exponent: f64, cutoff: Option<f64> },
    Table(Arc<Table>),
    Custom(RadialFn),
}

/// A radial two-body interaction with its core/tail metadata.
#[derive(Clone)]
pub struct PairPotential {
    profile: Profile,
    dimension: usize,
    bounds: CoreTailBounds,
    label: String,
}

impl fmt::Debug for PairPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PairPotential")
            .field("label", &self.label)
            .field("dimension", &self.dimension)
            .field("bounds", &self.bounds)
            .finish()
    }
}

fn check_dimension(dimension: usize) -> Result<()> {
    if dimension == 0 {
        return config("dimension must be >= 1");
    }
    Ok(())
}

impl PairPotential {
    /// `Phi(r) = phi0 / r^s - phi1 * 1[r > R] / r^{d + eps}`.
    pub fn riesz(dimension: usize, bounds: CoreTailBounds) -> Result<Self> {
        check_dimension(dimension)?;
        bounds.validate()?;
        Ok(Self {
            profile: Profile::Riesz,
            dimension,
            bounds,
            label: "riesz".into(),
        })
    }

    /// Step repulsion of `height` for `r <= core_radius`, a well of depth
    /// `well_depth` on `(core_radius, well_radius]`, zero beyond.
    pub fn square_well(dimension: usize, height: f64, core_radius: f64, well_depth: f64, well_radius: f64) -> Result<Self> {
        check_dimension(dimension)?;
        if !(height > 0.0) || !(core_radius > 0.0) || !(well_depth >= 0.0) {
            return config("square well needs height > 0, core_radius > 0, well_depth >= 0");
        }
        if well_depth > 0.0 && !(well_radius > core_radius) {
            return config("square well with a well needs well_radius > core_radius");
        }
        let d = dimension as f64;
        let (tail_radius, tail_strength) = if well_depth > 0.0 {
            (well_radius, well_depth * well_radius.powf(d + 1.0))
        } else {
            (2.0 * core_radius, 1.0)
        };
        let bounds = CoreTailBounds {
            core_exponent: 0.0,
            core_strength: height,
            core_radius,
            tail_radius,
            tail_strength,
            tail_exponent: 1.0,
        };
        bounds.validate()?;
        Ok(Self {
            profile: Profile::SquareWell {
                height,
                core: core_radius,
                depth: well_depth,
                well: if well_depth > 0.0 { well_radius } else { core_radius },
            },
            dimension,
            bounds,
            label: "square_well".into(),
        })
    }

    /// `Phi(r) = e [(sigma/r)^{2m} - (sigma/r)^m]`, optionally truncated to zero
    /// beyond `cutoff`. The core bound is `phi0 = e sigma^{2m} / 2` on
    /// `r <= sigma 2^{-1/m}` with exponent `2m`.
    pub fn lj_like(dimension: usize, exponent: f64, strength: f64, sigma: f64, cutoff: Option<f64>) -> Result<Self> {
        check_dimension(dimension)?;
        if !(exponent > 0.0) || !(strength > 0.0) || !(sigma > 0.0) {
            return config("lj_like needs exponent, strength and sigma > 0");
        }
        let d = dimension as f64;
        let (tail_strength, tail_exponent) = match cutoff {
            Some(rc) => {
                if !(rc > sigma) {
                    return config("lj_like cutoff must exceed sigma");
                }
                // -e sigma^m r^{-m} >= -phi1 r^{-(d+1)} on [sigma, rc]
                let worst = sigma.powf(d + 1.0 - exponent).max(rc.powf(d + 1.0 - exponent));
                (strength * sigma.powf(exponent) * worst, 1.0)
            }
            None => {
                if !(exponent > d) {
                    return config("untruncated lj_like needs exponent > dimension for an integrable tail");
                }
                (strength * sigma.powf(exponent), exponent - d)
            }
        };
        let bounds = CoreTailBounds {
            core_exponent: 2.0 * exponent,
            core_strength: 0.5 * strength * sigma.powf(2.0 * exponent),
            core_radius: sigma * 2f64.powf(-1.0 / exponent),
            tail_radius: sigma,
            tail_strength,
            tail_exponent,
        };
        bounds.validate()?;
        Ok(Self {
            profile: Profile::LjLike { strength, sigma, exponent, cutoff },
            dimension,
            bounds,
            label: "lj_like".into(),
        })
    }

    pub fn from_table(dimension: usize, table: Table, bounds: CoreTailBounds) -> Result<Self> {
        check_dimension(dimension)?;
        bounds.validate()?;
        Ok(Self {
            profile: Profile::Table(Arc::new(table)),
            dimension,
            bounds,
            label: "custom-table".into(),
        })
    }

    /// Wrap an arbitrary profile. The closure must be free of side effects.
    pub fn custom<F>(dimension: usize, bounds: CoreTailBounds, label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_dimension(dimension)?;
        bounds.validate()?;
        Ok(Self {
            profile: Profile::Custom(Arc::new(f)),
            dimension,
            bounds,
            label: label.into(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn bounds(&self) -> &CoreTailBounds {
        &self.bounds
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn core_exponent(&self) -> f64 {
        self.bounds.core_exponent
    }

    pub fn core_strength(&self) -> f64 {
        self.bounds.core_strength
    }

    pub fn core_radius(&self) -> f64 {
        self.bounds.core_radius
    }

    pub fn tail_radius(&self) -> f64 {
        self.bounds.tail_radius
    }

    pub fn tail_strength(&self) -> f64 {
        self.bounds.tail_strength
    }

    pub fn tail_exponent(&self) -> f64 {
        self.bounds.tail_exponent
    }

    /// Radius beyond which the profile is identically zero, if any.
    pub fn range(&self) -> Option<f64> {
        match &self.profile {
            Profile::SquareWell { well, .. } => Some(*well),
            Profile::LjLike { cutoff, .. } => *cutoff,
            Profile::Table(t) => Some(t.last_radius()),
            Profile::Riesz | Profile::Custom(_) => None,
        }
    }

    /// Radii where the profile is known to jump or kink, in increasing order.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![self.bounds.core_radius, self.bounds.tail_radius];
        match &self.profile {
            Profile::SquareWell { core, well, .. } => pts.extend([*core, *well]),
            Profile::LjLike { sigma, cutoff, .. } => {
                pts.push(*sigma);
                pts.extend(*cutoff);
            }
            Profile::Table(t) => pts.extend(t.radii.iter().copied()),
            Profile::Riesz | Profile::Custom(_) => {}
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Raw profile value; may be non-finite for a misbehaving custom profile.
    pub fn evaluate(&self, r: f64) -> f64 {
        match &self.profile {
            Profile::Riesz => {
                let b = &self.bounds;
                let core = b.core_bound(r);
                if r > b.tail_radius {
                    core + b.tail_bound(r, self.dimension)
                } else {
                    core
                }
            }
            Profile::SquareWell { height, core, depth, well } => {
                if r <= *core {
                    *height
                } else if r <= *well {
                    -*depth
                } else {
                    0.0
                }
            }
            Profile::LjLike { strength, sigma, exponent, cutoff } => {
                if cutoff.is_some_and(|rc| r > rc) {
                    return 0.0;
                }
                let q = (sigma / r).powf(*exponent);
                strength * (q * q - q)
            }
            Profile::Table(t) => t.eval(r, &self.bounds),
            Profile::Custom(f) => f(r),
        }
    }

    /// Profile value, rejecting non-finite results.
    pub fn try_evaluate(&self, r: f64) -> Result<f64> {
        let value = self.evaluate(r);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Evaluation { r, value })
        }
    }

    /// `(max{0, Phi(r)}, min{0, Phi(r)})`.
    pub fn split_pos_neg(&self, r: f64) -> Result<(f64, f64)> {
        if !(r > 0.0) {
            return domain(format!("split_pos_neg needs r > 0, got {r}"));
        }
        let v = self.try_evaluate(r)?;
        Ok((v.max(0.0), v.min(0.0)))
    }

    /// `|Phi^-(r)|`, the magnitude of the attractive part.
    pub fn negative_magnitude(&self, r: f64) -> Result<f64> {
        Ok(-self.split_pos_neg(r)?.1)
    }

    fn sample_grid(&self, sample_count: usize) -> Vec<f64> {
        let lo = self.bounds.core_radius * 1e-4;
        let hi = 100.0 * self.bounds.tail_radius;
        log_grid(lo, hi, sample_count)
    }

    /// Sampled check of the core and tail bounds on a log-spaced grid
    /// between `1e-4 lambda` and `100 R`.
    pub fn validate_assumption_a(&self, sample_count: usize) -> Result<AssumptionReport> {
        if sample_count < 2 {
            return config("sample_count must be >= 2");
        }
        let b = self.bounds;
        let mut first_violation = None;
        for r in self.sample_grid(sample_count) {
            let v = self.try_evaluate(r)?;
            let violation = if r <= b.core_radius {
                let bound = b.core_bound(r);
                (v < bound - BOUND_SLACK * bound.abs() || v < 0.0).then_some((BoundRegion::Core, bound))
            } else if r >= b.tail_radius {
                let bound = b.tail_bound(r, self.dimension);
                (v < bound - BOUND_SLACK * bound.abs()).then_some((BoundRegion::Tail, bound))
            } else {
                None
            };
            if let Some((region, bound)) = violation {
                first_violation = Some(BoundViolation { radius: r, value: v, bound, region });
                break;
            }
        }
        Ok(AssumptionReport {
            passed: first_violation.is_none(),
            sample_count,
            first_violation,
            note: "sampled check on a log-spaced grid, not a proof".into(),
        })
    }

    /// Lower-boundedness and the sign of `int_{R^d} Phi(|x|) dx`.
    pub fn necessary_conditions(&self, quadrature_points: usize) -> Result<NecessaryReport> {
        if quadrature_points < 16 {
            return config("quadrature_points must be >= 16");
        }
        let b = self.bounds;
        let d = self.dimension;

        // infimum on a grid over (0, 100 R]
        let grid = log_grid(b.core_radius * 1e-9, 100.0 * b.tail_radius, quadrature_points);
        let mut lower_bound = f64::INFINITY;
        for &r in &grid {
            lower_bound = lower_bound.min(self.try_evaluate(r)?);
        }
        let bounded_below = !self.diverges_downward_at_origin()?;

        let core_holds = self.validate_assumption_a(quadrature_points)?.passed;
        let core_divergent = core_holds && b.core_exponent >= d as f64;

        let radial = |r: f64| -> Result<f64> { Ok(self.try_evaluate(r)? * r.powi(d as i32 - 1)) };
        let (abs_tol, rel_tol) = (1e-10, 1e-8);
        let segments = quadrature_points;
        let middle = integrate(radial, b.core_radius, b.tail_radius, abs_tol, rel_tol, segments)?;
        let tail = integrate_to_infinity(radial, b.tail_radius, abs_tol, rel_tol, segments)?;
        let (integral, error) = if core_divergent {
            (f64::INFINITY, 0.0)
        } else {
            let core = integrate(radial, 0.0, b.core_radius, abs_tol, rel_tol, segments)?;
            let area = unit_sphere_area(d);
            let Estimate { value, error } = sum_estimates(&[core, middle, tail]);
            (area * value, area * error)
        };
        let integral_nonneg = integral + error >= 0.0;
        Ok(NecessaryReport {
            bounded_below,
            lower_bound,
            integral,
            integral_error: error,
            core_divergent,
            integral_nonneg,
        })
    }

    /// Heuristic detection of `Phi -> -inf` as `r -> 0`: twelve decades
    /// below the core radius, strictly decreasing and below `-1e6` scale.
    fn diverges_downward_at_origin(&self) -> Result<bool> {
        let lambda = self.bounds.core_radius;
        let reference = self.try_evaluate(lambda)?.abs().max(1.0);
        let mut prev = self.try_evaluate(lambda * 0.1)?;
        for k in 2..=12 {
            let v = self.try_evaluate(lambda * 10f64.powi(-k))?;
            if v >= prev {
                return Ok(false);
            }
            prev = v;
        }
        Ok(prev < -1e6 * reference)
    }
}

fn sum_estimates(parts: &[Estimate]) -> Estimate {
    Estimate {
        value: parts.iter().map(|e| e.value).sum(),
        error: parts.iter().map(|e| e.error).sum(),
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub(crate) fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundRegion {
    Core,
    Tail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub radius: f64,
    pub value: f64,
    pub bound: f64,
    pub region: BoundRegion,
}

/// Outcome of [`PairPotential::validate_assumption_a`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub passed: bool,
    pub sample_count: usize,
    pub first_violation: Option<BoundViolation>,
    pub note: String,
}

/// Outcome of [`PairPotential::necessary_conditions`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessaryReport {
    pub bounded_below: bool,
    /// Smallest sampled value of the profile.
    pub lower_bound: f64,
    /// `int Phi(|x|) dx`; `+inf` for a non-integrable positive core.
    pub integral: f64,
    pub integral_error: f64,
    pub core_divergent: bool,
    pub integral_nonneg: bool,
}

impl NecessaryReport {
    pub fn passed(&self) -> bool {
        self.bounded_below && self.integral_nonneg
    }
}

/// Key-value description of a potential, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum PotentialConfig {
    #[serde(rename = "riesz")]
    Riesz {
        dimension: usize,
        core_exponent: f64,
        core_strength: f64,
        core_radius: f64,
        tail_radius: f64,
        tail_strength: f64,
        tail_exponent: f64,
    },
    #[serde(rename = "square_well")]
    SquareWell {
        dimension: usize,
        core_strength: f64,
        core_radius: f64,
        #[serde(default)]
        well_depth: f64,
        #[serde(default)]
        well_radius: Option<f64>,
    },
    #[serde(rename = "lj_like")]
    LjLike {
        dimension: usize,
        exponent: f64,
        strength: f64,
        sigma: f64,
        #[serde(default)]
        cutoff: Option<f64>,
    },
    #[serde(rename = "custom-table")]
    CustomTable {
        dimension: usize,
        table: String,
        core_exponent: f64,
        core_strength: f64,
        core_radius: f64,
        tail_radius: f64,
        tail_strength: f64,
        tail_exponent: f64,
    },
}

impl PotentialConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Read a config file; a `custom-table` path is resolved relative to the
    /// directory of the config file.
    pub fn load(path: &Path) -> Result<PairPotential> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let cfg = Self::from_toml_str(&text)?;
        cfg.build(path.parent())
    }

    pub fn build(&self, base_dir: Option<&Path>) -> Result<PairPotential> {
        match self {
            PotentialConfig::Riesz {
                dimension,
                core_exponent,
                core_strength,
                core_radius,
                tail_radius,
                tail_strength,
                tail_exponent,
            } => PairPotential::riesz(
                *dimension,
                CoreTailBounds {
                    core_exponent: *core_exponent,
                    core_strength: *core_strength,
                    core_radius: *core_radius,
                    tail_radius: *tail_radius,
                    tail_strength: *tail_strength,
                    tail_exponent: *tail_exponent,
                },
            ),
            PotentialConfig::SquareWell {
                dimension,
                core_strength,
                core_radius,
                well_depth,
                well_radius,
            } => PairPotential::square_well(
                *dimension,
                *core_strength,
                *core_radius,
                *well_depth,
                well_radius.unwrap_or(*core_radius),
            ),
            PotentialConfig::LjLike {
                dimension,
                exponent,
                strength,
                sigma,
                cutoff,
            } => PairPotential::lj_like(*dimension, *exponent, *strength, *sigma, *cutoff),
            PotentialConfig::CustomTable {
                dimension,
                table,
                core_exponent,
                core_strength,
                core_radius,
                tail_radius,
                tail_strength,
                tail_exponent,
            } => {
                let path = match base_dir {
                    Some(dir) => dir.join(table),
                    None => Path::new(table).to_path_buf(),
                };
                PairPotential::from_table(
                    *dimension,
                    Table::from_csv(&path)?,
                    CoreTailBounds {
                        core_exponent: *core_exponent,
                        core_strength: *core_strength,
                        core_radius: *core_radius,
                        tail_radius: *tail_radius,
                        tail_strength: *tail_strength,
                        tail_exponent: *tail_exponent,
                    },
                )
            }
        }
    }
}
