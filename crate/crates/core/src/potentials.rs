//! Potential profiles, the local wavenumber field `k^2(x) = 2m(E - V(x))/hbar^2`,
//! and truncation of the real line to a finite working window.

use crate::error::{Error, Result};
use crate::interp::{self, MonotoneCubic};
use std::path::Path;

/// Which one-sided limit to take at a point where a profile may jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// `V0` on `[center - width/2, center + width/2]`, zero elsewhere.
    SquareBarrier { v0: f64, width: f64, center: f64 },
    /// `V0 exp(-(x - center)^2 / (2 sigma^2))`.
    Gaussian { v0: f64, sigma: f64, center: f64 },
    /// `-ell(ell+1)/scale^2 sech^2(x/scale)`, reflectionless when `2m/hbar^2 = 1`.
    PoschlTeller { ell: u32, scale: f64 },
    /// Monotone cubic through the samples, clamped to the end values outside.
    Tabulated(MonotoneCubic),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    pub kind: PotentialKind,
    /// Limit of `V` as `x -> -inf`.
    pub v_left: f64,
    /// Limit of `V` as `x -> +inf`.
    pub v_right: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {v}")))
    }
}

impl PotentialProfile {
    pub fn square_barrier(v0: f64, width: f64, center: f64) -> Result<Self> {
        finite("v0", v0)?;
        positive("width", width)?;
        finite("center", center)?;
        Ok(Self { kind: PotentialKind::SquareBarrier { v0, width, center }, v_left: 0.0, v_right: 0.0 })
    }

    pub fn gaussian(v0: f64, sigma: f64, center: f64) -> Result<Self> {
        finite("v0", v0)?;
        positive("sigma", sigma)?;
        finite("center", center)?;
        Ok(Self { kind: PotentialKind::Gaussian { v0, sigma, center }, v_left: 0.0, v_right: 0.0 })
    }

    pub fn poschl_teller(ell: u32, scale: f64) -> Result<Self> {
        if ell == 0 {
            return Err(Error::invalid("ell must be a positive integer"));
        }
        positive("scale", scale)?;
        Ok(Self { kind: PotentialKind::PoschlTeller { ell, scale }, v_left: 0.0, v_right: 0.0 })
    }

    /// Free particle, `V = 0` everywhere.
    pub fn free() -> Self {
        Self {
            kind: PotentialKind::Gaussian { v0: 0.0, sigma: 1.0, center: 0.0 },
            v_left: 0.0,
            v_right: 0.0,
        }
    }

    /// The asymptotes are the end sample values, so the clamp is continuous.
    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self> {
        let table = MonotoneCubic::new(samples)?;
        let v_left = table.first().1;
        let v_right = table.last().1;
        Ok(Self { kind: PotentialKind::Tabulated(table), v_left, v_right })
    }

    pub fn from_table_file(path: &Path) -> Result<Self> {
        Self::tabulated(&interp::read_table(path)?)
    }

    /// `V(x)`. At a jump of the square barrier the closed interval convention applies.
    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::SquareBarrier { v0, width, center } => {
                if (x - center).abs() <= 0.5 * width {
                    *v0
                } else {
                    0.0
                }
            }
            _ => self.limit(x, Side::Right),
        }
    }

    /// One-sided limit of `V` at `x`; differs from [`value`](Self::value) only at jumps.
    pub fn limit(&self, x: f64, side: Side) -> f64 {
        match &self.kind {
            PotentialKind::SquareBarrier { v0, width, center } => {
                let lo = center - 0.5 * width;
                let hi = center + 0.5 * width;
                let inside = match side {
                    Side::Left => x > lo && x <= hi,
                    Side::Right => x >= lo && x < hi,
                };
                if inside {
                    *v0
                } else {
                    0.0
                }
            }
            PotentialKind::Gaussian { v0, sigma, center } => {
                let u = (x - center) / sigma;
                v0 * (-0.5 * u * u).exp()
            }
            PotentialKind::PoschlTeller { ell, scale } => {
                let l = *ell as f64;
                let s = 1.0 / (x / scale).cosh();
                -l * (l + 1.0) / (scale * scale) * s * s
            }
            PotentialKind::Tabulated(t) => t.eval(x),
        }
    }

    /// One-sided derivative `V'(x)`.
    pub fn derivative(&self, x: f64, side: Side) -> f64 {
        match &self.kind {
            PotentialKind::SquareBarrier { .. } => 0.0,
            PotentialKind::Gaussian { sigma, center, .. } => {
                -(x - center) / (sigma * sigma) * self.limit(x, side)
            }
            PotentialKind::PoschlTeller { ell, scale } => {
                let l = *ell as f64;
                let u = x / scale;
                let s = 1.0 / u.cosh();
                2.0 * l * (l + 1.0) / scale.powi(3) * s * s * u.tanh()
            }
            PotentialKind::Tabulated(t) => {
                let (x0, _) = t.first();
                let (x1, _) = t.last();
                let outside = match side {
                    Side::Left => x <= x0 || x > x1,
                    Side::Right => x < x0 || x >= x1,
                };
                if outside {
                    0.0
                } else {
                    t.derivative(x)
                }
            }
        }
    }

    /// Points where `V` or `V'` may jump. Integrators never step across these.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            PotentialKind::SquareBarrier { width, center, .. } => {
                vec![center - 0.5 * width, center + 0.5 * width]
            }
            PotentialKind::Tabulated(t) => vec![t.first().0, t.last().0],
            _ => Vec::new(),
        }
    }

    /// Breakpoints plus every point where higher derivatives may jump.
    pub fn knots(&self) -> Vec<f64> {
        match &self.kind {
            PotentialKind::Tabulated(t) => t.positions().to_vec(),
            _ => self.breakpoints(),
        }
    }

    pub fn is_discontinuous(&self) -> bool {
        matches!(&self.kind, PotentialKind::SquareBarrier { v0, .. } if *v0 != 0.0)
    }

    /// Length over which the profile changes appreciably.
    pub fn feature_scale(&self) -> f64 {
        match &self.kind {
            PotentialKind::SquareBarrier { width, .. } => *width,
            PotentialKind::Gaussian { sigma, .. } => *sigma,
            PotentialKind::PoschlTeller { scale, .. } => *scale,
            PotentialKind::Tabulated(t) => {
                let xs = t.positions();
                (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64
            }
        }
    }
}

pub fn evaluate_potential(p: &PotentialProfile, x: f64) -> f64 {
    p.value(x)
}

/// Energy and units. Defaults `hbar = 1`, `mass = 1/2`, so that `k^2 = E - V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySpec {
    pub energy: f64,
    pub hbar: f64,
    pub mass: f64,
}

impl EnergySpec {
    pub fn new(energy: f64) -> Self {
        Self { energy, hbar: 1.0, mass: 0.5 }
    }

    pub fn with_units(energy: f64, hbar: f64, mass: f64) -> Result<Self> {
        let e = Self { energy, hbar, mass };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        finite("energy", self.energy)?;
        positive("hbar", self.hbar)?;
        positive("mass", self.mass)
    }

    /// `2m / hbar^2`.
    pub fn k_factor(&self) -> f64 {
        2.0 * self.mass / (self.hbar * self.hbar)
    }
}

/// `k^2(x)` for a fixed potential and energy, plus the asymptotic wavenumbers.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveNumberField {
    pub potential: PotentialProfile,
    pub spec: EnergySpec,
    pub k_left: f64,
    pub k_right: f64,
}

impl WaveNumberField {
    pub fn k_squared(&self, x: f64) -> f64 {
        self.spec.k_factor() * (self.spec.energy - self.potential.value(x))
    }

    pub fn k_squared_at(&self, x: f64, side: Side) -> f64 {
        self.spec.k_factor() * (self.spec.energy - self.potential.limit(x, side))
    }

    /// `d(k^2)/dx`.
    pub fn k_squared_derivative(&self, x: f64, side: Side) -> f64 {
        -self.spec.k_factor() * self.potential.derivative(x, side)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.potential.breakpoints()
    }
}

pub fn wavenumber_field(p: &PotentialProfile, e: &EnergySpec) -> Result<WaveNumberField> {
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
    Ok(WaveNumberField { potential: p.clone(), spec: *e, k_left: kl2.sqrt(), k_right: kr2.sqrt() })
}

/// Finite window standing in for the whole real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub tail_tolerance: f64,
    pub max_step: f64,
}

impl DomainGrid {
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Uniform sample points no further apart than `max_step`, plus the given extra points.
    pub fn sample_points(&self, extra: &[f64]) -> Vec<f64> {
        let n = (self.width() / self.max_step).ceil().max(1.0) as usize;
        let mut pts: Vec<f64> = (0..=n)
            .map(|i| self.x_min + self.width() * i as f64 / n as f64)
            .chain(extra.iter().copied().filter(|&x| x >= self.x_min && x <= self.x_max))
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// Step cap used by the integrators: a tenth of a length unit, or an eighth of the feature scale.
pub fn default_max_step(p: &PotentialProfile) -> f64 {
    (p.feature_scale() / 8.0).min(0.1)
}

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;
/// Largest half-width `truncate_domain` will consider before reporting `NoDecay`.
pub const MAX_HALF_WIDTH: f64 = 1e4;

pub fn truncate_domain(p: &PotentialProfile, e: &EnergySpec, tol: f64) -> Result<DomainGrid> {
    truncate_domain_within(p, e, tol, MAX_HALF_WIDTH)
}

pub fn truncate_domain_within(
    p: &PotentialProfile,
    e: &EnergySpec,
    tol: f64,
    max_half_width: f64,
) -> Result<DomainGrid> {
    positive("tail tolerance", tol)?;
    let threshold = tol * e.energy.abs().max(1.0);
    let max_step = default_max_step(p);
    // Smooth profiles cross the threshold exactly at the analytic edge; nudge outward.
    let nudge = 1.0 + 1e-6;
    let (lo, hi) = match &p.kind {
        PotentialKind::SquareBarrier { v0, width, center } => {
            if *v0 == 0.0 {
                (center - max_step, center + max_step)
            } else {
                (center - 0.5 * width - max_step, center + 0.5 * width + max_step)
            }
        }
        PotentialKind::Gaussian { v0, sigma, center } => {
            if v0.abs() < threshold {
                (center - max_step, center + max_step)
            } else {
                let half = sigma * (2.0 * (v0.abs() / threshold).ln()).sqrt() * nudge;
                (center - half, center + half)
            }
        }
        PotentialKind::PoschlTeller { ell, scale } => {
            let l = *ell as f64;
            let amp = l * (l + 1.0) / (scale * scale);
            if amp < threshold {
                (-max_step, max_step)
            } else {
                let half = scale * (amp / threshold).sqrt().acosh() * nudge;
                (-half, half)
            }
        }
        PotentialKind::Tabulated(t) => {
            let xs = t.positions();
            let ys = t.values();
            let far_left = ys.iter().position(|y| (y - p.v_left).abs() >= threshold);
            let far_right = ys.iter().rposition(|y| (y - p.v_right).abs() >= threshold);
            match (far_left, far_right) {
                (Some(i), Some(j)) => (xs[i.saturating_sub(1)], xs[(j + 1).min(xs.len() - 1)]),
                _ => {
                    let mid = 0.5 * (xs[0] + xs[xs.len() - 1]);
                    (mid - max_step, mid + max_step)
                }
            }
        }
    };
    if (hi - lo) * 0.5 > max_half_width {
        return Err(Error::NoDecay { max_half_width });
    }
    let grid = DomainGrid { x_min: lo, x_max: hi, tail_tolerance: tol, max_step };
    if (p.value(lo) - p.v_left).abs() >= threshold || (p.value(hi) - p.v_right).abs() >= threshold {
        return Err(Error::NoDecay { max_half_width });
    }
    Ok(grid)
}
