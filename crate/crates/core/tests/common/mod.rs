#![allow(dead_code)]

use sz_scatter::config::GaugeSpec;
use sz_scatter::gauges::GaugeTriple;
use sz_scatter::potentials::{truncate_domain, wavenumber_field, DomainGrid, EnergySpec, PotentialProfile, WaveNumberField};

pub const TAIL_TOL: f64 = 1e-10;
pub const ODE_TOL: f64 = 1e-12;

pub struct Case {
    pub label: String,
    pub potential: PotentialProfile,
    pub energy: f64,
    pub field: WaveNumberField,
    pub grid: DomainGrid,
}

impl Case {
    pub fn new(label: String, potential: PotentialProfile, energy: f64) -> Self {
        let e = EnergySpec::new(energy);
        let field = wavenumber_field(&potential, &e).unwrap();
        let grid = truncate_domain(&potential, &e, TAIL_TOL).unwrap();
        Self { label, potential, energy, field, grid }
    }

    pub fn spec(&self) -> EnergySpec {
        EnergySpec::new(self.energy)
    }

    /// Admissible real preset gauges at this case, with their labels.
    pub fn gauges(&self) -> Vec<GaugeTriple> {
        GAUGES
            .iter()
            .filter_map(|s| s.parse::<GaugeSpec>().unwrap().build(&self.field, &self.grid).ok())
            .collect()
    }
}

pub const GAUGES: &[&str] = &[
    "constant",
    "wkb",
    "special_delta@constant",
    "special_delta@wkb",
    "antiphase@constant",
    "antiphase@wkb",
    "chi(0.3)@constant",
];

/// Square barrier `V0 = 1, L = 1` at `E = 0.5, 2, 5`; Gaussian `V0 = 1, sigma = 1` at
/// `E = 0.5, 2`; Poschl-Teller `ell = 1, 2` at `E = 0.5, 1, 10`.
pub fn suite() -> Vec<Case> {
    let mut cases = Vec::new();
    for e in [0.5, 2.0, 5.0] {
        cases.push(Case::new(format!("square_barrier E={e}"), PotentialProfile::square_barrier(1.0, 1.0, 0.0).unwrap(), e));
    }
    for e in [0.5, 2.0] {
        cases.push(Case::new(format!("gaussian E={e}"), PotentialProfile::gaussian(1.0, 1.0, 0.0).unwrap(), e));
    }
    for ell in [1, 2] {
        for e in [0.5, 1.0, 10.0] {
            cases.push(Case::new(format!("poschl_teller l={ell} E={e}"), PotentialProfile::poschl_teller(ell, 1.0).unwrap(), e));
        }
    }
    cases
}
