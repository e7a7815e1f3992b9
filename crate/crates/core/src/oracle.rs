//! Reference results that share nothing with the gauge machinery: a direct Cash-Karp
//! integration of `psi'' + k^2 psi = 0` and closed-form transmissions.

use crate::error::{Error, Result};
use crate::mat2::I;
use crate::potentials::{DomainGrid, EnergySpec, PotentialProfile, Side};
use crate::quadrature::split_points;
use crate::system::WavefunctionSample;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    DirectIntegration,
    AnalyticSquareBarrier,
    AnalyticReflectionless,
}

impl OracleMethod {
    pub fn name(self) -> &'static str {
        match self {
            OracleMethod::DirectIntegration => "direct_integration",
            OracleMethod::AnalyticSquareBarrier => "analytic_square_barrier",
            OracleMethod::AnalyticReflectionless => "analytic_reflectionless",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub transmission: f64,
    pub reflection: f64,
    /// Accepted integration points, in increasing `x`. Empty for closed forms.
    pub psi_samples: Vec<WavefunctionSample>,
    pub method: OracleMethod,
}

fn open_channels(p: &PotentialProfile, e: &EnergySpec) -> Result<(f64, f64)> {
    e.validate()?;
    let f = e.k_factor();
    let kl2 = f * (e.energy - p.v_left);
    let kr2 = f * (e.energy - p.v_right);
    if kl2 <= 0.0 {
        return Err(Error::AsymptoticallyClosedChannel { edge: "left", k_squared: kl2 });
    }
    if kr2 <= 0.0 {
        return Err(Error::AsymptoticallyClosedChannel { edge: "right", k_squared: kr2 });
    }
    Ok((kl2.sqrt(), kr2.sqrt()))
}

type State = [Complex64; 2];

// Cash-Karp 5(4) tableau.
const C: [f64; 6] = [0.0, 0.2, 0.3, 0.6, 1.0, 0.875];
const A: [[f64; 5]; 6] = [
    [0.0; 5],
    [0.2, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [0.3, -0.9, 1.2, 0.0, 0.0],
    [-11.0 / 54.0, 2.5, -70.0 / 27.0, 35.0 / 27.0, 0.0],
    [1631.0 / 55296.0, 175.0 / 512.0, 575.0 / 13824.0, 44275.0 / 110592.0, 253.0 / 4096.0],
];
const B5: [f64; 6] = [37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0];
const B4: [f64; 6] = [2825.0 / 27648.0, 0.0, 18575.0 / 48384.0, 13525.0 / 55296.0, 277.0 / 14336.0, 0.25];

struct Equation<'a> {
    p: &'a PotentialProfile,
    factor: f64,
    energy: f64,
    hi: f64,
}

impl Equation<'_> {
    fn rhs(&self, x: f64, y: State) -> State {
        let side = if x >= self.hi { Side::Left } else { Side::Right };
        let k2 = self.factor * (self.energy - self.p.limit(x, side));
        [y[1], -y[0] * k2]
    }
}

fn cash_karp(eq: &Equation, x: f64, y: State, h: f64) -> (State, State) {
    let mut k = [[Complex64::default(); 2]; 6];
    for i in 0..6 {
        let mut yi = y;
        for j in 0..i {
            for c in 0..2 {
                yi[c] += k[j][c] * (h * A[i][j]);
            }
        }
        k[i] = eq.rhs(x + C[i] * h, yi);
    }
    let mut hi = y;
    let mut err = [Complex64::default(); 2];
    for j in 0..6 {
        for c in 0..2 {
            hi[c] += k[j][c] * (h * B5[j]);
            err[c] += k[j][c] * (h * (B5[j] - B4[j]));
        }
    }
    (hi, err)
}

fn integrate(
    eq: &Equation,
    x0: f64,
    x1: f64,
    mut y: State,
    tol: f64,
    max_step: f64,
    span: f64,
    out: &mut Vec<WavefunctionSample>,
) -> Result<State> {
    let dir = (x1 - x0).signum();
    let mut h = (max_step * 0.25).min((x1 - x0).abs());
    let mut x = x0;
    while x != x1 {
        let remaining = (x1 - x).abs();
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let (y_new, err) = cash_karp(eq, x, y, dir * step);
        let scale = |c: usize| tol * (1.0 + y[c].norm().max(y_new[c].norm()));
        let e = (0..2).map(|c| err[c].norm() / scale(c)).fold(0.0, f64::max);
        if !e.is_finite() {
            return Err(Error::NonConvergence { what: "direct integration", detail: format!("non-finite at x = {x}") });
        }
        let grow = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        if e <= 1.0 {
            x = if last { x1 } else { x + dir * step };
            y = y_new;
            out.push(WavefunctionSample { x, psi: y[0], psi_prime: y[1] });
            h = (step * grow).min(max_step);
        } else {
            h = step * grow.min(1.0);
            if h < 1e-14 * span {
                return Err(Error::StepUnderflow { x, step: h });
            }
        }
    }
    Ok(y)
}

/// Integrates `(psi, psi')` from the outgoing wave `e^{ik_R (x - x_max)}` at `x_max`
/// back to `x_min` and matches `A e^{ik_L (x - x_min)} + B e^{-ik_L (x - x_min)}` there.
pub fn direct_integrate(p: &PotentialProfile, e: &EnergySpec, grid: &DomainGrid, tol: f64) -> Result<OracleResult> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    if !(grid.x_max > grid.x_min) {
        return Err(Error::invalid("empty integration window"));
    }
    let (kl, kr) = open_channels(p, e)?;
    let mut y: State = [Complex64::new(1.0, 0.0), I * kr];
    let mut samples = vec![WavefunctionSample { x: grid.x_max, psi: y[0], psi_prime: y[1] }];
    let pts = split_points(grid.x_max, grid.x_min, &p.breakpoints());
    for w in pts.windows(2) {
        let eq = Equation { p, factor: e.k_factor(), energy: e.energy, hi: w[0] };
        y = integrate(&eq, w[0], w[1], y, tol, grid.max_step, grid.width(), &mut samples)?;
    }
    samples.reverse();
    let right_moving = (y[0] + y[1] / (I * kl)) * 0.5;
    let left_moving = (y[0] - y[1] / (I * kl)) * 0.5;
    let inc = right_moving.norm_sqr();
    Ok(OracleResult {
        transmission: kr / (kl * inc),
        reflection: left_moving.norm_sqr() / inc,
        psi_samples: samples,
        method: OracleMethod::DirectIntegration,
    })
}

/// `(sin(q L)/(q L))^2` for `q^2 = q2`, continued to `sinh` for `q2 < 0`.
fn sinc_squared(q2: f64, length: f64) -> f64 {
    let z = q2.abs().sqrt() * length;
    if z < 1e-8 {
        1.0 - q2.signum() * z * z / 3.0
    } else if q2 > 0.0 {
        (z.sin() / z).powi(2)
    } else {
        (z.sinh() / z).powi(2)
    }
}

/// Closed-form transmission of a rectangular barrier of height `v0` and width `width`,
/// `T = [1 + (k1^2 - k2^2)^2 L^2 sinc^2(k2 L) / (4 k1^2)]^{-1}`, which covers
/// `E > V0`, `E < V0` and the limit `E = V0` in one expression.
pub fn analytic_square_barrier(v0: f64, width: f64, e: &EnergySpec) -> Result<OracleResult> {
    let p = PotentialProfile::square_barrier(v0, width, 0.0)?;
    let (k1, _) = open_channels(&p, e)?;
    let k1_sq = k1 * k1;
    let k2_sq = e.k_factor() * (e.energy - v0);
    let gap = k1_sq - k2_sq;
    let t = 1.0 / (1.0 + gap * gap * width * width * sinc_squared(k2_sq, width) / (4.0 * k1_sq));
    Ok(OracleResult {
        transmission: t,
        reflection: 1.0 - t,
        psi_samples: Vec::new(),
        method: OracleMethod::AnalyticSquareBarrier,
    })
}

/// The Poschl-Teller well `-ell(ell+1) sech^2(x)` (with `2m/hbar^2 = 1`) transmits fully.
pub fn analytic_reflectionless(ell: u32, e: &EnergySpec) -> Result<OracleResult> {
    e.validate()?;
    if ell == 0 {
        return Err(Error::invalid("ell must be at least 1"));
    }
    if e.energy <= 0.0 {
        return Err(Error::AsymptoticallyClosedChannel { edge: "left", k_squared: e.k_factor() * e.energy });
    }
    Ok(OracleResult {
        transmission: 1.0,
        reflection: 0.0,
        psi_samples: Vec::new(),
        method: OracleMethod::AnalyticReflectionless,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::truncate_domain;

    fn run(p: &PotentialProfile, energy: f64) -> OracleResult {
        let e = EnergySpec::new(energy);
        let grid = truncate_domain(p, &e, 1e-10).unwrap();
        direct_integrate(p, &e, &grid, 1e-12).unwrap()
    }

    #[test]
    fn free_space_transmits() {
        let r = run(&PotentialProfile::free(), 1.3);
        assert!((r.transmission - 1.0).abs() < 1e-12 && r.reflection < 1e-20);
    }

    #[test]
    fn analytic_barrier_values() {
        let t = analytic_square_barrier(1.0, 1.0, &EnergySpec::new(2.0)).unwrap().transmission;
        assert!((t - 1.0 / (1.0 + 1f64.sin().powi(2) / 8.0)).abs() < 1e-15);
        assert!((t - 0.918_687).abs() < 1e-6);
        let t = analytic_square_barrier(1.0, 1.0, &EnergySpec::new(0.5)).unwrap().transmission;
        assert!((t - 1.0 / (1.0 + 0.5f64.sqrt().sinh().powi(2))).abs() < 1e-15);
        let at = analytic_square_barrier(1.0, 1.0, &EnergySpec::new(1.0)).unwrap().transmission;
        let near = analytic_square_barrier(1.0, 1.0, &EnergySpec::new(1.0 + 1e-7)).unwrap().transmission;
        assert!((at - 1.0 / 1.25).abs() < 1e-15 && (at - near).abs() < 1e-6);
        let high = analytic_square_barrier(1.0, 1.0, &EnergySpec::new(1e6)).unwrap().transmission;
        assert!(high > 1.0 - 1e-12);
    }

    #[test]
    fn direct_matches_analytic_barrier() {
        let p = PotentialProfile::square_barrier(1.0, 1.0, 0.0).unwrap();
        for energy in [0.5, 1.0, 2.0, 5.0] {
            let direct = run(&p, energy);
            let exact = analytic_square_barrier(1.0, 1.0, &EnergySpec::new(energy)).unwrap();
            assert!((direct.transmission - exact.transmission).abs() < 1e-9, "E = {energy}");
            assert!((direct.transmission + direct.reflection - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn poschl_teller_is_reflectionless() {
        for ell in [1, 2] {
            let r = run(&PotentialProfile::poschl_teller(ell, 1.0).unwrap(), 1.0);
            assert!(r.reflection < 1e-7, "ell = {ell}: {}", r.reflection);
        }
    }

    #[test]
    fn samples_are_ordered_and_span_the_grid() {
        let p = PotentialProfile::gaussian(1.0, 1.0, 0.0).unwrap();
        let r = run(&p, 2.0);
        assert!(r.psi_samples.windows(2).all(|w| w[0].x < w[1].x));
    }
}
