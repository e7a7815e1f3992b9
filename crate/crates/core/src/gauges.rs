//! Gauge triples `(phi, Delta, chi)`, the derived pair `(rho1, rho2)`, and preset
//! constructors.
//!
//! A gauge is any set of auxiliary functions with `phi' != 0`. The wavefunction is
//! represented as
//!
//! ```text
//! psi = [a e^{+i(phi+Delta)} + b e^{-i(phi+Delta)}] / sqrt(phi')
//! ```
//!
//! and the gauge condition fixes `psi' = i sqrt(phi') [a e^{+i(..)} - b e^{-i(..)}] + chi psi`.
//! Phases built from integrals (`phi` of the WKB-like presets, `Delta` of the
//! diagonal-free preset) start at `x_min` of the grid they were built on.

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::potentials::{DomainGrid, Side, WaveNumberField};
use crate::quadrature::{ComplexFn, CumulativeIntegral};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// The seven gauge function values at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GaugeSample {
    pub phi: Complex64,
    pub phi_prime: Complex64,
    pub phi_double_prime: Complex64,
    pub delta: Complex64,
    pub delta_prime: Complex64,
    pub chi: Complex64,
    pub chi_prime: Complex64,
}

impl GaugeSample {
    /// The phase `phi + Delta` carried by the basis functions.
    pub fn phase(&self) -> Complex64 {
        self.phi + self.delta
    }

    fn is_real(&self) -> bool {
        [
            self.phi,
            self.phi_prime,
            self.phi_double_prime,
            self.delta,
            self.delta_prime,
            self.chi,
            self.chi_prime,
        ]
        .iter()
        .all(|z| z.im == 0.0)
    }
}

/// Source of gauge function values. `side` selects the one-sided limit at breakpoints.
pub trait GaugeFunctions: Send + Sync {
    fn sample(&self, x: f64, side: Side) -> GaugeSample;
}

impl<F> GaugeFunctions for F
where
    F: Fn(f64, Side) -> GaugeSample + Send + Sync,
{
    fn sample(&self, x: f64, side: Side) -> GaugeSample {
        self(x, side)
    }
}

/// `rho1 = phi'' + 2 chi phi'`.
pub fn rho1_of(s: &GaugeSample) -> Complex64 {
    s.phi_double_prime + 2.0 * s.chi * s.phi_prime
}

/// `rho2 = k^2 + chi^2 + chi' - phi'^2`.
pub fn rho2_of(k_squared: f64, s: &GaugeSample) -> Complex64 {
    k_squared + s.chi * s.chi + s.chi_prime - s.phi_prime * s.phi_prime
}

/// `rho2 / (2 phi')`. Shared by the diagonal-free gauge and the generator so that
/// their difference cancels bit for bit.
pub(crate) fn half_rho2_over_phi_prime(rho2: Complex64, phi_prime: Complex64) -> Complex64 {
    rho2 / (phi_prime * 2.0)
}

#[derive(Clone)]
pub struct GaugeTriple {
    id: String,
    funcs: Arc<dyn GaugeFunctions>,
    is_real: bool,
    breakpoints: Vec<f64>,
    phi_prime_jumps: Vec<f64>,
    degeneracy_floor: f64,
    delta_vanishes: bool,
}

impl fmt::Debug for GaugeTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaugeTriple")
            .field("id", &self.id)
            .field("is_real", &self.is_real)
            .field("breakpoints", &self.breakpoints)
            .field("degeneracy_floor", &self.degeneracy_floor)
            .finish()
    }
}

/// Relative threshold below which `|phi'|` counts as zero.
pub const DEGENERACY_RATIO: f64 = 1e-12;

impl GaugeTriple {
    /// Wraps arbitrary gauge functions, checking `phi' != 0` and (when `is_real`)
    /// vanishing imaginary parts at the grid samples and on both sides of every breakpoint.
    pub fn custom(
        id: impl Into<String>,
        funcs: Arc<dyn GaugeFunctions>,
        is_real: bool,
        breakpoints: Vec<f64>,
        grid: &DomainGrid,
    ) -> Result<Self> {
        let mut g = Self {
            id: id.into(),
            funcs,
            is_real,
            breakpoints,
            phi_prime_jumps: Vec::new(),
            degeneracy_floor: 0.0,
            delta_vanishes: false,
        };
        g.calibrate(grid)?;
        let pts = grid.sample_points(&g.breakpoints);
        let mut delta_zero = true;
        for &x in &pts {
            for side in [Side::Left, Side::Right] {
                let s = g.sample(x, side);
                if is_real && !s.is_real() {
                    return Err(Error::invalid(format!("gauge `{}` is flagged real but is complex at x = {x}", g.id)));
                }
                delta_zero &= s.delta == Complex64::new(0.0, 0.0) && s.delta_prime == Complex64::new(0.0, 0.0);
            }
        }
        g.delta_vanishes = delta_zero;
        g.phi_prime_jumps = g
            .breakpoints
            .iter()
            .copied()
            .filter(|&x| {
                let l = g.sample(x, Side::Left).phi_prime;
                let r = g.sample(x, Side::Right).phi_prime;
                (l - r).norm() > 1e-12 * l.norm().max(r.norm())
            })
            .collect();
        Ok(g)
    }

    /// Sets the degeneracy floor from the largest `|phi'|` on the grid and rejects
    /// gauges that fall below it anywhere on the grid.
    fn calibrate(&mut self, grid: &DomainGrid) -> Result<()> {
        let pts = grid.sample_points(&self.breakpoints);
        let mags: Vec<(f64, f64)> = pts
            .iter()
            .flat_map(|&x| [Side::Left, Side::Right].map(|s| (x, self.sample(x, s).phi_prime.norm())))
            .collect();
        let largest = mags.iter().map(|m| m.1).fold(0.0, f64::max);
        self.degeneracy_floor = DEGENERACY_RATIO * largest;
        if let Some(&(x, magnitude)) = mags.iter().find(|m| !(m.1 > self.degeneracy_floor)) {
            return Err(Error::GaugeDegenerate { x, magnitude, threshold: self.degeneracy_floor });
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    /// Positions where some gauge function (or its derivative) may jump.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Breakpoints at which `phi'` itself is discontinuous.
    pub fn phi_prime_jumps(&self) -> &[f64] {
        &self.phi_prime_jumps
    }

    pub fn degeneracy_floor(&self) -> f64 {
        self.degeneracy_floor
    }

    /// True when `Delta` and `Delta'` are identically zero.
    pub fn delta_vanishes(&self) -> bool {
        self.delta_vanishes
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    #[inline]
    pub fn sample(&self, x: f64, side: Side) -> GaugeSample {
        self.funcs.sample(x, side)
    }

    pub fn phi(&self, x: f64) -> Complex64 {
        self.sample(x, Side::Right).phi
    }
    pub fn phi_prime(&self, x: f64) -> Complex64 {
        self.sample(x, Side::Right).phi_prime
    }
    pub fn phi_double_prime(&self, x: f64) -> Complex64 {
        self.sample(x, Side::Right).phi_double_prime
    }
    pub fn delta(&self, x: f64) -> Complex64 {
        self.sample(x, Side::Right).delta
    }
    pub fn delta_prime(&self, x: f64) -> Complex64 {
        self.sample(x, Side::Right).delta_prime
    }
    pub fn chi(&self, x: f64) -> Complex64 {
        self.sample(x, Side::Right).chi
    }
    pub fn chi_prime(&self, x: f64) -> Complex64 {
        self.sample(x, Side::Right).chi_prime
    }

    /// `GaugeDegenerate` unless `|phi'|` clears the floor.
    pub fn check_nondegenerate(&self, x: f64, s: &GaugeSample) -> Result<()> {
        let magnitude = s.phi_prime.norm();
        if magnitude > self.degeneracy_floor && magnitude.is_finite() {
            Ok(())
        } else {
            Err(Error::GaugeDegenerate { x, magnitude, threshold: self.degeneracy_floor })
        }
    }
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// `phi = k_ref x`, `Delta = chi = 0`.
pub fn gauge_constant(k_ref: f64) -> Result<GaugeTriple> {
    if !(k_ref > 0.0 && k_ref.is_finite()) {
        return Err(Error::invalid(format!("k_ref must be positive, got {k_ref}")));
    }
    let funcs = move |x: f64, _side: Side| GaugeSample {
        phi: real(k_ref * x),
        phi_prime: real(k_ref),
        ..GaugeSample::default()
    };
    Ok(GaugeTriple {
        id: "constant".into(),
        funcs: Arc::new(funcs),
        is_real: true,
        breakpoints: Vec::new(),
        phi_prime_jumps: Vec::new(),
        degeneracy_floor: DEGENERACY_RATIO * k_ref,
        delta_vanishes: true,
    })
}

/// `phi' = (1 - s) k_ref + s k(x)`; the WKB gauge at `s = 1`, a constant gauge at `s = 0`.
struct BlendGauge {
    field: WaveNumberField,
    k_ref: f64,
    s: f64,
    x_min: f64,
    k_integral: Option<CumulativeIntegral>,
}

impl GaugeFunctions for BlendGauge {
    fn sample(&self, x: f64, side: Side) -> GaugeSample {
        let constant_part = (1.0 - self.s) * self.k_ref;
        let mut phi = constant_part * (x - self.x_min);
        let mut phi_prime = constant_part;
        let mut phi_double_prime = 0.0;
        if let Some(integral) = &self.k_integral {
            let k = self.field.k_squared_at(x, side).sqrt();
            phi += self.s * integral.eval(x).re;
            phi_prime += self.s * k;
            phi_double_prime = self.s * self.field.k_squared_derivative(x, side) / (2.0 * k);
        }
        GaugeSample {
            phi: real(phi),
            phi_prime: real(phi_prime),
            phi_double_prime: real(phi_double_prime),
            ..GaugeSample::default()
        }
    }
}

fn check_open(w: &WaveNumberField, grid: &DomainGrid) -> Result<()> {
    for x in grid.sample_points(&w.potential.knots()) {
        for side in [Side::Left, Side::Right] {
            let k_squared = w.k_squared_at(x, side);
            if !(k_squared > 0.0) {
                return Err(Error::TurningPoint { x, k_squared });
            }
        }
    }
    Ok(())
}

/// Member `s` of the family interpolating between `phi' = k_ref` and `phi' = k(x)`.
pub fn gauge_blend(w: &WaveNumberField, grid: &DomainGrid, k_ref: f64, s: f64) -> Result<GaugeTriple> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!("blend parameter must lie in [0, 1], got {s}")));
    }
    if !(k_ref > 0.0 && k_ref.is_finite()) {
        return Err(Error::invalid(format!("k_ref must be positive, got {k_ref}")));
    }
    let k_integral = if s > 0.0 {
        check_open(w, grid)?;
        let field = w.clone();
        let k: ComplexFn = Arc::new(move |x| real(field.k_squared_at(x, Side::Right).sqrt()));
        Some(CumulativeIntegral::new(k, grid.x_min, grid.x_max, &w.potential.knots(), grid.max_step))
    } else {
        None
    };
    let jumps = if s > 0.0 && w.potential.is_discontinuous() { w.breakpoints() } else { Vec::new() };
    let funcs = BlendGauge { field: w.clone(), k_ref, s, x_min: grid.x_min, k_integral };
    let mut g = GaugeTriple {
        id: format!("blend(s={s})"),
        funcs: Arc::new(funcs),
        is_real: true,
        breakpoints: if s > 0.0 { w.breakpoints() } else { Vec::new() },
        phi_prime_jumps: jumps,
        degeneracy_floor: 0.0,
        delta_vanishes: true,
    };
    g.calibrate(grid)?;
    Ok(g)
}

/// `phi' = k(x)`, `phi = int_{x_min}^x k`, `Delta = chi = 0`. Requires `k^2 > 0` on the grid.
/// At jumps of the potential `phi'` jumps too; the evolution then applies the matching
/// condition (continuity of `psi` and `psi'`) there.
pub fn gauge_wkb(w: &WaveNumberField, grid: &DomainGrid) -> Result<GaugeTriple> {
    let k_ref = w.k_left;
    Ok(gauge_blend(w, grid, k_ref, 1.0)?.with_id("wkb"))
}

struct SpecialDeltaGauge {
    base: GaugeTriple,
    field: WaveNumberField,
    delta: CumulativeIntegral,
}

impl GaugeFunctions for SpecialDeltaGauge {
    fn sample(&self, x: f64, side: Side) -> GaugeSample {
        let mut s = self.base.sample(x, side);
        let rho2 = rho2_of(self.field.k_squared_at(x, side), &s);
        s.delta = self.delta.eval(x);
        s.delta_prime = half_rho2_over_phi_prime(rho2, s.phi_prime);
        s
    }
}

/// Adds `Delta' = rho2 / (2 phi')` to a gauge with `Delta = 0`, which removes the
/// diagonal of the evolution generator.
pub fn gauge_special_delta(base: &GaugeTriple, w: &WaveNumberField, grid: &DomainGrid) -> Result<GaugeTriple> {
    if !base.delta_vanishes() {
        return Err(Error::invalid(format!("base gauge `{}` must have Delta = 0", base.id())));
    }
    let (b, f) = (base.clone(), w.clone());
    let integrand: ComplexFn = Arc::new(move |x| {
        let s = b.sample(x, Side::Right);
        half_rho2_over_phi_prime(rho2_of(f.k_squared_at(x, Side::Right), &s), s.phi_prime)
    });
    let mut knots = w.potential.knots();
    knots.extend_from_slice(base.breakpoints());
    let delta = CumulativeIntegral::new(integrand, grid.x_min, grid.x_max, &knots, grid.max_step);
    let mut breakpoints = base.breakpoints().to_vec();
    breakpoints.extend(w.breakpoints());
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    let mut g = GaugeTriple {
        id: format!("special_delta({})", base.id()),
        funcs: Arc::new(SpecialDeltaGauge { base: base.clone(), field: w.clone(), delta }),
        is_real: base.is_real(),
        breakpoints,
        phi_prime_jumps: base.phi_prime_jumps().to_vec(),
        degeneracy_floor: 0.0,
        delta_vanishes: false,
    };
    g.calibrate(grid)?;
    Ok(g)
}

/// `Delta = -phi`: every phase `e^{+-2i(phi+Delta)}` of the generator becomes 1.
pub fn gauge_antiphase(base: &GaugeTriple) -> GaugeTriple {
    let b = base.clone();
    let funcs = move |x: f64, side: Side| {
        let mut s = b.sample(x, side);
        s.delta = -s.phi;
        s.delta_prime = -s.phi_prime;
        s
    };
    GaugeTriple {
        id: format!("antiphase({})", base.id()),
        funcs: Arc::new(funcs),
        is_real: base.is_real(),
        breakpoints: base.breakpoints().to_vec(),
        phi_prime_jumps: base.phi_prime_jumps().to_vec(),
        degeneracy_floor: base.degeneracy_floor(),
        delta_vanishes: false,
    }
}

/// Replaces `chi` by the constant `c`.
pub fn gauge_with_chi(base: &GaugeTriple, c: f64) -> GaugeTriple {
    let b = base.clone();
    let funcs = move |x: f64, side: Side| GaugeSample {
        chi: real(c),
        chi_prime: real(0.0),
        ..b.sample(x, side)
    };
    GaugeTriple {
        id: format!("{}+chi({c})", base.id()),
        funcs: Arc::new(funcs),
        is_real: base.is_real(),
        breakpoints: base.breakpoints().to_vec(),
        phi_prime_jumps: base.phi_prime_jumps().to_vec(),
        degeneracy_floor: base.degeneracy_floor(),
        delta_vanishes: base.delta_vanishes(),
    }
}

struct TabulatedGauge {
    phi_prime: MonotoneCubic,
    phi: CumulativeIntegral,
    delta: Option<MonotoneCubic>,
    chi: Option<MonotoneCubic>,
}

impl GaugeFunctions for TabulatedGauge {
    fn sample(&self, x: f64, side: Side) -> GaugeSample {
        let d = |t: &MonotoneCubic| {
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
        };
        GaugeSample {
            phi: self.phi.eval(x),
            phi_prime: real(self.phi_prime.eval(x)),
            phi_double_prime: real(d(&self.phi_prime)),
            delta: real(self.delta.as_ref().map_or(0.0, |t| t.eval(x))),
            delta_prime: real(self.delta.as_ref().map_or(0.0, d)),
            chi: real(self.chi.as_ref().map_or(0.0, |t| t.eval(x))),
            chi_prime: real(self.chi.as_ref().map_or(0.0, d)),
        }
    }
}

/// Real gauge from user tables (monotone cubic interpolation, clamped outside the
/// tables). `phi` is the exact integral of the `phi'` interpolant from `x_min`;
/// derivatives come from the interpolants.
pub fn gauge_tabulated(
    phi_prime: &[(f64, f64)],
    delta: Option<&[(f64, f64)]>,
    chi: Option<&[(f64, f64)]>,
    grid: &DomainGrid,
) -> Result<GaugeTriple> {
    let phi_prime = MonotoneCubic::new(phi_prime)?;
    let delta = delta.map(MonotoneCubic::new).transpose()?;
    let chi = chi.map(MonotoneCubic::new).transpose()?;
    let mut knots: Vec<f64> = phi_prime.positions().to_vec();
    let mut breakpoints = vec![phi_prime.first().0, phi_prime.last().0];
    for t in delta.iter().chain(chi.iter()) {
        knots.extend_from_slice(t.positions());
        breakpoints.extend([t.first().0, t.last().0]);
    }
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    let pp = phi_prime.clone();
    let integrand: ComplexFn = Arc::new(move |x| real(pp.eval(x)));
    let phi = CumulativeIntegral::new(integrand, grid.x_min, grid.x_max, &knots, grid.max_step);
    GaugeTriple::custom(
        "tabulated",
        Arc::new(TabulatedGauge { phi_prime, phi, delta, chi }),
        true,
        breakpoints,
        grid,
    )
}

/// `(rho1, rho2)` of a gauge against a wavenumber field.
#[derive(Debug, Clone)]
pub struct RhoPair {
    pub gauge: GaugeTriple,
    pub field: WaveNumberField,
}

impl RhoPair {
    pub fn eval(&self, x: f64, side: Side) -> (Complex64, Complex64) {
        let s = self.gauge.sample(x, side);
        (rho1_of(&s), rho2_of(self.field.k_squared_at(x, side), &s))
    }

    pub fn rho1(&self, x: f64) -> Complex64 {
        self.eval(x, Side::Right).0
    }

    pub fn rho2(&self, x: f64) -> Complex64 {
        self.eval(x, Side::Right).1
    }

    /// Every point where the generator may jump: gauge and potential breakpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.gauge.breakpoints().to_vec();
        b.extend(self.field.breakpoints());
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Step cap for the integrators.
    pub fn max_step(&self) -> f64 {
        crate::potentials::default_max_step(&self.field.potential)
    }
}

pub fn rho_pair(g: &GaugeTriple, w: &WaveNumberField) -> RhoPair {
    RhoPair { gauge: g.clone(), field: w.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{truncate_domain, wavenumber_field, EnergySpec, PotentialProfile};

    fn setup(p: &PotentialProfile, e: f64) -> (WaveNumberField, DomainGrid) {
        let e = EnergySpec::new(e);
        (wavenumber_field(p, &e).unwrap(), truncate_domain(p, &e, 1e-10).unwrap())
    }

    #[test]
    fn constant_gauge_values() {
        let k = 2f64.sqrt();
        let g = gauge_constant(k).unwrap();
        assert_eq!(g.phi(1.0).re, k);
        assert_eq!(g.phi_prime(5.0).re, k);
        assert!(gauge_constant(0.0).is_err());
    }

    #[test]
    fn constant_gauge_rho_pairs() {
        let (w, _) = setup(&PotentialProfile::free(), 1.0);
        let r = rho_pair(&gauge_constant(1.0).unwrap(), &w);
        for x in [-2.0, 0.0, 3.1] {
            assert_eq!(r.rho1(x), Complex64::new(0.0, 0.0));
            assert_eq!(r.rho2(x), Complex64::new(0.0, 0.0));
        }
        let sq = PotentialProfile::square_barrier(1.0, 1.0, 0.0).unwrap();
        let (w, _) = setup(&sq, 2.0);
        let r = rho_pair(&gauge_constant(2f64.sqrt()).unwrap(), &w);
        assert!((r.rho2(0.0).re + 1.0).abs() < 1e-15);
        assert!(r.rho2(2.0).re.abs() < 1e-15);
    }

    #[test]
    fn constant_chi_rho_pair() {
        let p = PotentialProfile::gaussian(0.7, 1.0, 0.0).unwrap();
        let (w, _) = setup(&p, 2.0);
        let (k_ref, c) = (1.3, 0.25);
        let g = gauge_with_chi(&gauge_constant(k_ref).unwrap(), c);
        let r = rho_pair(&g, &w);
        for x in [-1.0, 0.2, 2.0] {
            let (r1, r2) = r.eval(x, Side::Right);
            assert!((r1.re - 2.0 * c * k_ref).abs() < 1e-15);
            assert!((r2.re - (w.k_squared(x) + c * c - k_ref * k_ref)).abs() < 1e-14);
        }
    }

    #[test]
    fn wkb_gauge_rho_pair() {
        let p = PotentialProfile::gaussian(1.0, 1.0, 0.0).unwrap();
        let (w, grid) = setup(&p, 2.0);
        let g = gauge_wkb(&w, &grid).unwrap();
        let r = rho_pair(&g, &w);
        for x in [-1.5, -0.3, 0.0, 0.8] {
            let k = w.k_squared(x).sqrt();
            let dk = w.k_squared_derivative(x, Side::Right) / (2.0 * k);
            assert!((r.rho1(x).re - dk).abs() < 1e-15);
            assert!(r.rho2(x).norm() < 1e-14);
        }
        assert_eq!(g.phi(grid.x_min).re, 0.0);
    }

    #[test]
    fn wkb_on_free_space_equals_constant() {
        let (w, grid) = setup(&PotentialProfile::free(), 2.0);
        let wkb = gauge_wkb(&w, &grid).unwrap();
        let c = gauge_constant(2f64.sqrt()).unwrap();
        for x in [-0.05, 0.0, 0.07] {
            assert!((wkb.phi_prime(x) - c.phi_prime(x)).norm() < 1e-15);
            assert_eq!(wkb.phi_double_prime(x), c.phi_double_prime(x));
            // Phases differ only by the origin.
            let shift = c.phi(grid.x_min);
            assert!((wkb.phi(x) + shift - c.phi(x)).norm() < 1e-14);
        }
    }

    #[test]
    fn wkb_square_barrier() {
        let sq = PotentialProfile::square_barrier(1.0, 1.0, 0.0).unwrap();
        let (w, grid) = setup(&sq, 2.0);
        let g = gauge_wkb(&w, &grid).unwrap();
        let r = rho_pair(&g, &w);
        for x in [-0.6, -0.2, 0.0, 0.3, 0.55] {
            assert!(r.rho2(x).norm() < 1e-14);
            assert_eq!(r.rho1(x).norm(), 0.0);
        }
        assert_eq!(g.phi_prime_jumps(), &[-0.5, 0.5]);

        let (w, grid) = setup(&sq, 0.5);
        assert!(matches!(gauge_wkb(&w, &grid), Err(Error::TurningPoint { .. })));
    }

    #[test]
    fn special_delta_examples() {
        let (w, grid) = setup(&PotentialProfile::free(), 1.5);
        let g = gauge_special_delta(&gauge_constant(1.5f64.sqrt()).unwrap(), &w, &grid).unwrap();
        for x in [-0.1, 0.0, 0.1] {
            assert!(g.delta(x).norm() < 1e-15);
        }

        let sq = PotentialProfile::square_barrier(1.0, 1.0, 0.0).unwrap();
        let (w, grid) = setup(&sq, 2.0);
        let g = gauge_special_delta(&gauge_constant(2f64.sqrt()).unwrap(), &w, &grid).unwrap();
        let inside = -1.0 / (2.0 * 2f64.sqrt());
        assert!((g.delta_prime(0.1).re - inside).abs() < 1e-15);
        assert!(g.delta_prime(0.9).re.abs() < 1e-15);
        // Delta accumulates linearly across the barrier.
        assert!((g.delta(grid.x_max).re - inside).abs() < 1e-13);
    }

    #[test]
    fn special_delta_needs_vanishing_delta() {
        let (w, grid) = setup(&PotentialProfile::free(), 1.0);
        let anti = gauge_antiphase(&gauge_constant(1.0).unwrap());
        assert!(gauge_special_delta(&anti, &w, &grid).is_err());
    }

    #[test]
    fn antiphase_phase_vanishes_exactly() {
        let p = PotentialProfile::poschl_teller(2, 1.0).unwrap();
        let (w, grid) = setup(&p, 0.5);
        let g = gauge_antiphase(&gauge_wkb(&w, &grid).unwrap());
        for x in grid.sample_points(&[]) {
            assert_eq!(g.sample(x, Side::Right).phase(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn degenerate_gauge_rejected() {
        let (_, grid) = setup(&PotentialProfile::free(), 1.0);
        let f = |x: f64, _: Side| GaugeSample { phi: real(x * x), phi_prime: real(2.0 * x), ..Default::default() };
        let err = GaugeTriple::custom("x^2", Arc::new(f), true, vec![], &grid).unwrap_err();
        assert!(matches!(err, Error::GaugeDegenerate { .. }));
    }

    #[test]
    fn real_flag_is_checked() {
        let (_, grid) = setup(&PotentialProfile::free(), 1.0);
        let f = |x: f64, _: Side| GaugeSample {
            phi: Complex64::new(x, 0.1 * x),
            phi_prime: Complex64::new(1.0, 0.1),
            ..Default::default()
        };
        assert!(GaugeTriple::custom("c", Arc::new(f), true, vec![], &grid).is_err());
        assert!(GaugeTriple::custom("c", Arc::new(f), false, vec![], &grid).is_ok());
    }

    #[test]
    fn tabulated_gauge_reproduces_tables() {
        let p = PotentialProfile::gaussian(1.0, 1.0, 0.0).unwrap();
        let (_, grid) = setup(&p, 2.0);
        let pp: Vec<(f64, f64)> = (0..=20).map(|i| (-5.0 + 0.5 * i as f64, 1.0 + 0.1 * (i as f64 * 0.3).sin())).collect();
        let chi: Vec<(f64, f64)> = vec![(-1.0, 0.0), (0.0, 0.2), (1.0, 0.0)];
        let g = gauge_tabulated(&pp, None, Some(&chi), &grid).unwrap();
        for (x, y) in &pp {
            assert_eq!(g.phi_prime(*x).re, *y);
        }
        assert_eq!(g.chi(0.0).re, 0.2);
        assert_eq!(g.phi(grid.x_min).re, 0.0);
        // phi' is clamped outside the table, so phi grows linearly there.
        let slope = (g.phi(grid.x_max).re - g.phi(grid.x_max - 0.5).re) / 0.5;
        assert!((slope - pp[20].1).abs() < 1e-12);
    }
}
