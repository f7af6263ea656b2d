//! Finite-population dynamics driven by exact pairwise payoffs.

pub mod coevolve;
pub mod fixation;
pub mod lattice;
pub mod population;
pub mod region;

pub use coevolve::{coevolve, CoevolveParams, CoevolveTrajectory, PayoffKernel};
pub use fixation::{fixation_monte_carlo, fixation_probability, FixationEstimate};
pub use lattice::{
    lattice_simulate, EpochMetrics, LatticeParams, LatticeRun, LatticeState, Neighborhood,
    UpdateRule,
};
pub use population::{
    evolve_ensemble, evolve_trajectory, expected_payoff, fermi, fermi_step, moran_step,
    EvolutionParams, PayoffMatrix, PopulationState, Process, Trajectory,
};
pub use region::{max_phi_multiplayer, zd_region_scan, RegionGrid, RegionMap};
