//! Minimal Riesz-energy configurations, potential-theory constants, and
//! superstability certificates for radial pair potentials.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certifier;
pub mod error;
pub mod geometry;
pub mod minimizer;
pub mod potentials;
pub mod quadrature;
pub mod riesz;
pub mod special;

pub use certifier::{Classification, StabilityCertificate};
pub use error::{Error, Result};
pub use geometry::{
    energy_decomposition, max_pair_distance, random_configuration, total_energy, total_energy_cell_list, CellIndex,
    CellOccupancy, Configuration, CubicPartition, EnergyDecomposition, SamplingBox,
};
pub use minimizer::{Domain, MinimizationResult, MinimizeOptions};
pub use potentials::{AssumptionReport, CoreTailBounds, NecessaryReport, PairPotential, PotentialConfig, Table};
pub use riesz::{RegimeTag, RieszParams};
