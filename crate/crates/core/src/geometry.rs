//! Finite configurations, the cubic partition of space and pair energies.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::potentials::PairPotential;

/// A finite set of points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigurationJson", into = "ConfigurationJson")]
pub struct Configuration {
    dimension: usize,
    coords: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ConfigurationJson {
    dimension: usize,
    points: Vec<Vec<f64>>,
}

impl TryFrom<ConfigurationJson> for Configuration {
    type Error = Error;

    fn try_from(value: ConfigurationJson) -> Result<Self> {
        Configuration::from_points(value.dimension, value.points)
    }
}

impl From<Configuration> for ConfigurationJson {
    fn from(c: Configuration) -> Self {
        ConfigurationJson {
            dimension: c.dimension,
            points: c.points().map(<[f64]>::to_vec).collect(),
        }
    }
}

impl Configuration {
    /// An empty configuration in dimension `d`.
    pub fn empty(dimension: usize) -> Self {
        Self {
            dimension,
            coords: Vec::new(),
        }
    }

    /// Build from flat row-major coordinates.
    pub fn from_flat(dimension: usize, coords: Vec<f64>) -> Result<Self> {
        if dimension == 0 {
            return config("dimension must be >= 1");
        }
        if !coords.len().is_multiple_of(dimension) {
            return config(format!(
                "{} coordinates do not split into points of dimension {dimension}",
                coords.len()
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return domain("configuration coordinates must be finite");
        }
        Ok(Self { dimension, coords })
    }

    pub fn from_points<P: AsRef<[f64]>>(dimension: usize, points: impl IntoIterator<Item = P>) -> Result<Self> {
        let mut coords = Vec::new();
        for (i, p) in points.into_iter().enumerate() {
            let p = p.as_ref();
            if p.len() != dimension {
                return config(format!("point {i} has {} coordinates, expected {dimension}", p.len()));
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dimension, coords)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dimension)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.coords
    }

    /// Sub-configuration made of the given point indices, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(indices.len() * self.dimension);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        Self {
            dimension: self.dimension,
            coords,
        }
    }

    /// Points reordered lexicographically by coordinates.
    pub fn sorted(&self) -> Self {
        let mut pts: Vec<&[f64]> = self.points().collect();
        pts.sort_by(|a, b| lex_cmp(a, b));
        Self {
            dimension: self.dimension,
            coords: pts.concat(),
        }
    }

    /// Every point shifted by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Self {
        assert_eq!(offset.len(), self.dimension);
        let coords = self
            .coords
            .chunks_exact(self.dimension)
            .flat_map(|p| p.iter().zip(offset).map(|(x, o)| x + o))
            .collect();
        Self {
            dimension: self.dimension,
            coords,
        }
    }

    /// First coincident pair, if any.
    pub fn find_coincident(&self) -> Option<(usize, usize)> {
        let n = self.len();
        for i in 0..n {
            for j in i + 1..n {
                if self.point(i) == self.point(j) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// CSV with header `x1,...,xd` and 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let header: Vec<String> = (1..=self.dimension).map(|k| format!("x{k}")).collect();
        w.write_record(&header)?;
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let dimension = r.headers()?.len();
        let mut coords = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != dimension {
                return Err(Error::Parse(format!("row {} has {} columns, expected {dimension}", line + 2, rec.len())));
            }
            for field in rec.iter() {
                coords.push(field.parse::<f64>().map_err(|e| Error::Parse(format!("row {}: {e}", line + 2)))?);
            }
        }
        Self::from_flat(dimension, coords)
    }
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Integer lattice vector labelling a cell.
pub type CellIndex = Vec<i64>;

/// Half-open cubes of rib `lambda` centred at `lambda * r`, `r` in `Z^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicPartition {
    dimension: usize,
    rib: f64,
}

impl CubicPartition {
    pub fn new(dimension: usize, rib: f64) -> Result<Self> {
        if dimension == 0 {
            return config("dimension must be >= 1");
        }
        if !(rib > 0.0) || !rib.is_finite() {
            return config(format!("partition rib must be a positive finite number, got {rib}"));
        }
        Ok(Self { dimension, rib })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rib(&self) -> f64 {
        self.rib
    }

    /// Lower edge `lambda (r - 1/2)` of cell `r` along one axis.
    fn lower(&self, r: i64) -> f64 {
        self.rib * (r as f64 - 0.5)
    }

    fn axis_index(&self, x: f64) -> i64 {
        let mut r = (x / self.rib).round() as i64;
        // settle on the computed inequality lambda(r-1/2) <= x < lambda(r+1/2)
        while self.lower(r) > x {
            r -= 1;
        }
        while x >= self.lower(r + 1) {
            r += 1;
        }
        r
    }

    /// The unique `r` with `lambda (r^i - 1/2) <= x^i < lambda (r^i + 1/2)`.
    pub fn cell_index(&self, x: &[f64]) -> CellIndex {
        debug_assert_eq!(x.len(), self.dimension);
        x.iter().map(|&xi| self.axis_index(xi)).collect()
    }

    /// Whether `x` satisfies the defining inequalities of cell `r`.
    pub fn contains(&self, r: &[i64], x: &[f64]) -> bool {
        r.iter().zip(x).all(|(&ri, &xi)| self.lower(ri) <= xi && xi < self.lower(ri + 1))
    }

    /// Groups the points of `gamma` by cell, preserving input order.
    pub fn occupancy(&self, gamma: &Configuration) -> CellOccupancy {
        let mut cells: BTreeMap<CellIndex, Vec<usize>> = BTreeMap::new();
        for (i, p) in gamma.points().enumerate() {
            cells.entry(self.cell_index(p)).or_default().push(i);
        }
        CellOccupancy { cells }
    }
}

/// Nonempty cells of a partition with the indices of the points they hold.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellOccupancy {
    cells: BTreeMap<CellIndex, Vec<usize>>,
}

impl CellOccupancy {
    pub fn cells(&self) -> &BTreeMap<CellIndex, Vec<usize>> {
        &self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Occupation numbers `|gamma_Delta|` in cell order.
    pub fn counts(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.values().map(Vec::len)
    }

    pub fn total(&self) -> usize {
        self.counts().sum()
    }
}

/// Neumaier compensated sum, accumulated in insertion order.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    /// `value()` together with the exact rounding error it drops.
    fn split(&self) -> (f64, f64) {
        let hi = self.sum + self.compensation;
        let z = hi - self.sum;
        let lo = (self.sum - (hi - z)) + (self.compensation - z);
        (hi, lo)
    }
}

fn pair_value(gamma: &Configuration, p: &PairPotential, i: usize, j: usize) -> Result<f64> {
    let r = distance(gamma.point(i), gamma.point(j));
    if r == 0.0 {
        return Err(Error::CoincidentPoints { i, j });
    }
    p.try_evaluate(r)
}

fn check_dims(gamma: &Configuration, p: &PairPotential) -> Result<()> {
    if gamma.dimension() != p.dimension() {
        return config(format!(
            "configuration dimension {} differs from potential dimension {}",
            gamma.dimension(),
            p.dimension()
        ));
    }
    Ok(())
}

/// `U(gamma) = sum_{i<j} Phi(|x_i - x_j|)`, summed in lexicographic pair
/// order with compensation.
pub fn total_energy(gamma: &Configuration, p: &PairPotential) -> Result<f64> {
    check_dims(gamma, p)?;
    let n = gamma.len();
    let mut acc = CompensatedSum::default();
    for i in 0..n {
        for j in i + 1..n {
            acc.add(pair_value(gamma, p, i, j)?);
        }
    }
    Ok(acc.value())
}

/// Same value as [`total_energy`] for a potential of finite range, visiting
/// only pairs in neighbouring cells of a partition with rib `cutoff`.
///
/// Pairs are accumulated in the same lexicographic order as the direct sum,
/// so the two results agree bit for bit.
pub fn total_energy_cell_list(gamma: &Configuration, p: &PairPotential, cutoff: f64) -> Result<f64> {
    check_dims(gamma, p)?;
    match p.range() {
        Some(range) if range <= cutoff => {}
        _ => return config("cell-list energy needs a potential with finite range <= cutoff"),
    }
    let d = gamma.dimension();
    let part = CubicPartition::new(d, cutoff)?;
    let occ = part.occupancy(gamma);
    let cell_of: Vec<CellIndex> = gamma.points().map(|x| part.cell_index(x)).collect();
    let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); gamma.len()];
    let offsets = neighbour_offsets(d);
    for (i, cell) in cell_of.iter().enumerate() {
        for off in &offsets {
            let key: CellIndex = cell.iter().zip(off).map(|(a, b)| a + b).collect();
            if let Some(members) = occ.cells().get(&key) {
                neighbours[i].extend(members.iter().copied().filter(|&j| j > i));
            }
        }
        neighbours[i].sort_unstable();
    }
    let mut acc = CompensatedSum::default();
    for (i, js) in neighbours.iter().enumerate() {
        for &j in js {
            acc.add(pair_value(gamma, p, i, j)?);
        }
    }
    Ok(acc.value())
}

fn neighbour_offsets(d: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-1..=1).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    out
}

/// Intra-cell energies (cells with at least two points) and the cross-cell
/// remainder of the total energy.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyDecomposition {
    pub intra: BTreeMap<CellIndex, f64>,
    pub inter: f64,
    // rounding lost when the per-cell and cross-cell sums were stored as f64
    residual: f64,
}

impl EnergyDecomposition {
    pub fn intra_total(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        for v in self.intra.values() {
            acc.add(*v);
        }
        acc.value()
    }

    pub fn total(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        for v in self.intra.values() {
            acc.add(*v);
        }
        acc.add(self.inter);
        acc.add(self.residual);
        acc.value()
    }
}

pub fn energy_decomposition(gamma: &Configuration, p: &PairPotential, part: &CubicPartition) -> Result<EnergyDecomposition> {
    check_dims(gamma, p)?;
    let cell_of: Vec<CellIndex> = gamma.points().map(|x| part.cell_index(x)).collect();
    let mut intra_acc: BTreeMap<CellIndex, CompensatedSum> = BTreeMap::new();
    let mut inter = CompensatedSum::default();
    let n = gamma.len();
    for i in 0..n {
        for j in i + 1..n {
            let v = pair_value(gamma, p, i, j)?;
            if cell_of[i] == cell_of[j] {
                intra_acc.entry(cell_of[i].clone()).or_default().add(v);
            } else {
                inter.add(v);
            }
        }
    }
    let mut residual = CompensatedSum::default();
    let intra = intra_acc
        .into_iter()
        .map(|(k, v)| {
            let (hi, lo) = v.split();
            residual.add(lo);
            (k, hi)
        })
        .collect();
    let (inter, lo) = inter.split();
    residual.add(lo);
    Ok(EnergyDecomposition { intra, inter, residual: residual.value() })
}

/// Largest pairwise distance.
pub fn max_pair_distance(gamma: &Configuration) -> Result<f64> {
    let n = gamma.len();
    if n < 2 {
        return domain("max_pair_distance needs at least two points");
    }
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            best = best.max(distance(gamma.point(i), gamma.point(j)));
        }
    }
    Ok(best)
}

/// Axis-aligned cube `[origin, origin + rib)^d` used for random sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingBox {
    pub dimension: usize,
    pub rib: f64,
    pub origin: Vec<f64>,
}

impl SamplingBox {
    /// The cube `[0, rib)^d`.
    pub fn new(dimension: usize, rib: f64) -> Result<Self> {
        if dimension == 0 || !(rib > 0.0) || !rib.is_finite() {
            return config("sampling box needs dimension >= 1 and a positive rib");
        }
        Ok(Self {
            dimension,
            rib,
            origin: vec![0.0; dimension],
        })
    }

    pub fn with_origin(mut self, origin: Vec<f64>) -> Result<Self> {
        if origin.len() != self.dimension || origin.iter().any(|v| !v.is_finite()) {
            return config("sampling box origin must be a finite vector of the box dimension");
        }
        self.origin = origin;
        Ok(self)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.origin).all(|(&xi, &o)| xi >= o && xi < o + self.rib)
    }
}

/// `n` uniform points in the box from a ChaCha8 stream seeded with `seed`.
/// Points closer than `1e-12 * rib` to an earlier point are redrawn.
pub fn random_configuration(n: usize, sampling_box: &SamplingBox, seed: u64) -> Configuration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_configuration_with(n, sampling_box, &mut rng)
}

pub(crate) fn random_configuration_with<R: Rng>(n: usize, b: &SamplingBox, rng: &mut R) -> Configuration {
    let d = b.dimension;
    let min_sep = 1e-12 * b.rib;
    let mut coords: Vec<f64> = Vec::with_capacity(n * d);
    let mut candidate = vec![0.0; d];
    while coords.len() < n * d {
        for (c, o) in candidate.iter_mut().zip(&b.origin) {
            // keep the half-open upper face excluded
            let mut v = o + b.rib * rng.gen::<f64>();
            if v >= o + b.rib {
                v = o + b.rib * (1.0 - f64::EPSILON);
            }
            *c = v;
        }
        let too_close = coords.chunks_exact(d).any(|q| distance(q, &candidate) < min_sep);
        if !too_close {
            coords.extend_from_slice(&candidate);
        }
    }
    Configuration { dimension: d, coords }
}
