//! The first-order coefficient system for `(a, b)`.
//!
//! For a gauge `(phi, Delta, chi)` and `theta = phi + Delta` the coefficients obey
//!
//! ```text
//! d/dx [a]   1   [ i(rho2 - 2 phi' Delta')        (rho1 + i rho2) e^{-2i theta} ] [a]
//!      [b] = --- [ (rho1 - i rho2) e^{+2i theta}   -i(rho2 - 2 phi' Delta')       ] [b]
//!            2phi'
//! ```
//!
//! Two independent routes solve it: adaptive Dormand-Prince stepping ([`evolve`]) and
//! the ordered product of midpoint-frozen step exponentials ([`transfer_matrix`]).
//! Wherever a gauge function jumps, `(a, b)` is carried across by continuity of
//! `psi` and `psi'`.

mod evolve;
mod product;

pub use evolve::{evolve, evolve_through, evolve_trajectory};
pub use product::{product_at_level, transfer_matrix, transfer_matrix_with, ProductOptions, TransferMatrix};

use crate::error::{Error, Result};
use crate::gauges::{half_rho2_over_phi_prime, rho1_of, rho2_of, GaugeSample, GaugeTriple, RhoPair};
use crate::mat2::{Mat2, I};
use crate::potentials::{
    truncate_domain, wavenumber_field, DomainGrid, EnergySpec, PotentialProfile, Side, DEFAULT_TAIL_TOLERANCE,
};
use num_complex::Complex64;

/// Position-dependent Bogoliubov coefficients at `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientState {
    pub x: f64,
    pub a: Complex64,
    pub b: Complex64,
}

impl CoefficientState {
    pub fn new(x: f64, a: Complex64, b: Complex64) -> Self {
        Self { x, a, b }
    }

    /// `|a|^2 - |b|^2`, the current for real gauges.
    pub fn norm_difference(&self) -> f64 {
        self.a.norm_sqr() - self.b.norm_sqr()
    }

    pub(crate) fn vector(&self) -> [Complex64; 2] {
        [self.a, self.b]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefunctionSample {
    pub x: f64,
    pub psi: Complex64,
    pub psi_prime: Complex64,
}

/// Asymptotic amplitudes for the transmitted-wave boundary condition at `x_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringAmplitudes {
    /// `a(x_max)`.
    pub alpha: Complex64,
    /// `b(x_max)`.
    pub beta: Complex64,
    pub transmission: f64,
    pub reflection: f64,
}

fn checked_sample(g: &GaugeTriple, x: f64, side: Side) -> Result<GaugeSample> {
    let s = g.sample(x, side);
    g.check_nondegenerate(x, &s)?;
    Ok(s)
}

pub(crate) fn generator_at(r: &RhoPair, x: f64, side: Side) -> Result<Mat2> {
    let s = checked_sample(&r.gauge, x, side)?;
    let rho1 = rho1_of(&s);
    let rho2 = rho2_of(r.field.k_squared_at(x, side), &s);
    let diag = I * (half_rho2_over_phi_prime(rho2, s.phi_prime) - s.delta_prime);
    let two_phi_prime = s.phi_prime * 2.0;
    let phase = (I * s.phase() * 2.0).exp();
    Ok(Mat2::new(
        diag,
        (rho1 + I * rho2) / (phase * two_phi_prime),
        (rho1 - I * rho2) * phase / two_phi_prime,
        -diag,
    ))
}

/// The 2x2 generator `d(a,b)/dx = G(x) (a,b)` at `x` (right-hand limit at jumps).
pub fn rhs_matrix(r: &RhoPair, x: f64) -> Result<Mat2> {
    generator_at(r, x, Side::Right)
}

/// `2(phi + Delta)`, the exponent carried by the off-diagonal entries of the generator.
pub fn generator_phase_exponent(g: &GaugeTriple, x: f64) -> Complex64 {
    g.sample(x, Side::Right).phase() * 2.0
}

/// Maps `(a, b)` to `(psi, psi')`.
pub(crate) fn basis_matrix(g: &GaugeTriple, x: f64, side: Side) -> Result<Mat2> {
    let s = checked_sample(g, x, side)?;
    let root = s.phi_prime.sqrt();
    let up = (I * s.phase()).exp();
    let down = (-I * s.phase()).exp();
    Ok(Mat2::new(
        up / root,
        down / root,
        I * root * up + s.chi * up / root,
        -I * root * down + s.chi * down / root,
    ))
}

/// Carries `(a, b)` across `x` from the `from` side to the `to` side.
pub(crate) fn jump_matrix(g: &GaugeTriple, x: f64, from: Side, to: Side) -> Result<Mat2> {
    let before = basis_matrix(g, x, from)?;
    let after = basis_matrix(g, x, to)?;
    let inv = after.inverse().ok_or(Error::GaugeDegenerate {
        x,
        magnitude: 0.0,
        threshold: g.degeneracy_floor(),
    })?;
    Ok(inv * before)
}

pub fn reconstruct_psi(g: &GaugeTriple, s: &CoefficientState) -> Result<WavefunctionSample> {
    reconstruct_psi_at(g, s, Side::Right)
}

/// `psi = [a e^{i theta} + b e^{-i theta}] / sqrt(phi')`,
/// `psi' = i sqrt(phi') [a e^{i theta} - b e^{-i theta}] + chi psi`.
pub fn reconstruct_psi_at(g: &GaugeTriple, s: &CoefficientState, side: Side) -> Result<WavefunctionSample> {
    let v = basis_matrix(g, s.x, side)?.apply(s.vector());
    Ok(WavefunctionSample { x: s.x, psi: v[0], psi_prime: v[1] })
}

/// Inverse of [`reconstruct_psi`]: the coefficients representing `(psi, psi')` at `x`.
pub fn coefficients_from_psi(g: &GaugeTriple, w: &WavefunctionSample, side: Side) -> Result<CoefficientState> {
    let s = checked_sample(g, w.x, side)?;
    let root = s.phi_prime.sqrt();
    let drift = (w.psi_prime - s.chi * w.psi) / (I * root);
    let up = (I * s.phase()).exp();
    let down = (-I * s.phase()).exp();
    Ok(CoefficientState {
        x: w.x,
        a: (w.psi * root + drift) * 0.5 / up,
        b: (w.psi * root - drift) * 0.5 / down,
    })
}

/// Probability current `Im(psi* psi')` from the coefficients, valid for complex gauges:
///
/// ```text
/// J = Re(u) [|a|^2 e^{-2 Im theta} - |b|^2 e^{+2 Im theta}]
///     - 2 Im(u) Im(a b* e^{2i Re theta}) + Im(chi) |psi|^2,    u = phi'/|phi'|
/// ```
///
/// which reduces to `|a|^2 - |b|^2` for real gauges.
pub fn probability_current(g: &GaugeTriple, s: &CoefficientState) -> f64 {
    let gs = g.sample(s.x, Side::Right);
    let theta = gs.phase();
    let unit = gs.phi_prime / gs.phi_prime.norm();
    let growth = (2.0 * theta.im).exp();
    let moving = s.a.norm_sqr() / growth - s.b.norm_sqr() * growth;
    let cross = (s.a * s.b.conj() * (I * 2.0 * theta.re).exp()).im;
    let mut j = unit.re * moving - 2.0 * unit.im * cross;
    if gs.chi.im != 0.0 {
        let psi = (s.a * (I * theta).exp() + s.b * (-I * theta).exp()) / gs.phi_prime.sqrt();
        j += gs.chi.im * psi.norm_sqr();
    }
    j
}

/// Coefficients of the unit-flux plane wave `e^{i theta(x)} e^{i k (x' - x)}/sqrt(k)` at `x`,
/// phase-matched to the gauge so that asymptotically matched gauges start at `(1, 0)`.
pub fn transmitted_state(g: &GaugeTriple, x: f64, k: f64) -> Result<CoefficientState> {
    let theta = g.sample(x, Side::Right).phase().re;
    let root = k.sqrt();
    let psi = Complex64::from_polar(1.0 / root, theta);
    let w = WavefunctionSample { x, psi, psi_prime: I * k * psi };
    coefficients_from_psi(g, &w, Side::Right)
}

/// Amplitudes `(A, B)` of `psi = [A e^{ik(x'-x)} + B e^{-ik(x'-x)}]/sqrt(k)` at `x`.
pub fn plane_wave_amplitudes(w: &WavefunctionSample, k: f64) -> (Complex64, Complex64) {
    let root = k.sqrt();
    let drift = w.psi_prime / (I * root);
    ((w.psi * root + drift) * 0.5, (w.psi * root - drift) * 0.5)
}

/// Scattering on a prepared window: unit-flux transmitted wave at `grid.x_min`,
/// evolved to `grid.x_max` and decomposed into plane waves there.
pub fn scattering_on_grid(r: &RhoPair, grid: &DomainGrid, tol: f64) -> Result<ScatteringAmplitudes> {
    let s0 = transmitted_state(&r.gauge, grid.x_min, r.field.k_left)?;
    let s1 = evolve(r, &s0, grid.x_max, tol)?;
    let w = reconstruct_psi_at(&r.gauge, &s1, Side::Left)?;
    let (incident, reflected) = plane_wave_amplitudes(&w, r.field.k_right);
    let inc = incident.norm_sqr();
    Ok(ScatteringAmplitudes {
        alpha: s1.a,
        beta: s1.b,
        transmission: 1.0 / inc,
        reflection: reflected.norm_sqr() / inc,
    })
}

pub fn scattering_amplitudes(
    p: &PotentialProfile,
    e: &EnergySpec,
    g: &GaugeTriple,
    tol: f64,
) -> Result<ScatteringAmplitudes> {
    let w = wavenumber_field(p, e)?;
    let grid = truncate_domain(p, e, DEFAULT_TAIL_TOLERANCE)?;
    scattering_on_grid(&crate::gauges::rho_pair(g, &w), &grid, tol)
}

/// Wavefunction samples along `xs` (monotone), starting from `s0`.
pub fn psi_along(r: &RhoPair, s0: &CoefficientState, xs: &[f64], tol: f64) -> Result<Vec<WavefunctionSample>> {
    evolve_through(r, s0, xs, tol)?
        .iter()
        .map(|s| reconstruct_psi(&r.gauge, s))
        .collect()
}

/// Largest `|psi''_h + k^2 psi|` over `centers`, with `psi''_h` the three-point second
/// difference at spacing `h` and `psi` reconstructed from the coefficient evolution.
/// Centers must avoid potential jumps by more than `h`.
pub fn schrodinger_residual(
    r: &RhoPair,
    s0: &CoefficientState,
    centers: &[f64],
    h: f64,
    tol: f64,
) -> Result<f64> {
    let mut xs: Vec<f64> = centers.iter().flat_map(|&c| [c - h, c, c + h]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.first().is_some_and(|&x| x < s0.x) {
        return Err(Error::invalid("residual points must lie to the right of the initial state"));
    }
    let psi = psi_along(r, s0, &xs, tol)?;
    let at = |x: f64| {
        let i = xs.binary_search_by(|p| p.total_cmp(&x)).expect("sampled point");
        psi[i].psi
    };
    Ok(centers
        .iter()
        .map(|&c| {
            let second = (at(c + h) - at(c) * 2.0 + at(c - h)) / (h * h);
            (second + at(c) * r.field.k_squared(c)).norm()
        })
        .fold(0.0, f64::max))
}
