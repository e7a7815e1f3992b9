//! Scattering on the real line through the Shabat-Zakharov coefficient system.
//!
//! The wavefunction of `psi'' + k(x)^2 psi = 0` is written in terms of two
//! position-dependent coefficients `(a, b)` relative to a freely chosen gauge, and the
//! coefficients are evolved by a first-order 2x2 system. The crate provides the
//! potentials, gauges, two independent solvers for the system, reference solvers,
//! rigorous transmission bounds with a gauge optimizer, and a config-driven runner.

pub mod bounds;
pub mod config;
pub mod error;
pub mod gauges;
pub mod interp;
pub mod mat2;
pub mod oracle;
pub mod par;
pub mod potentials;
pub mod quadrature;
pub mod run;
pub mod system;

pub use error::{Error, Result};
pub use mat2::Mat2;
pub use par::Execution;
pub use bounds::{bound_report, optimize_gauge, theta_field, theta_integral, verify_bounds, BoundReport, GaugeFamily};
pub use config::{parse_config, read_config, Mode, RunConfig};
pub use gauges::{
    gauge_antiphase, gauge_blend, gauge_constant, gauge_special_delta, gauge_tabulated, gauge_wkb, gauge_with_chi,
    rho_pair, GaugeTriple, RhoPair,
};
pub use oracle::{analytic_reflectionless, analytic_square_barrier, direct_integrate, OracleResult};
pub use potentials::{truncate_domain, wavenumber_field, DomainGrid, EnergySpec, PotentialProfile, WaveNumberField};
pub use system::{
    evolve, probability_current, reconstruct_psi, rhs_matrix, scattering_amplitudes, transfer_matrix,
    CoefficientState, ScatteringAmplitudes, TransferMatrix, WavefunctionSample,
};
