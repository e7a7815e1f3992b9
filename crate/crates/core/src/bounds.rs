//! Rigorous bounds on the Bogoliubov coefficients from a real gauge:
//!
//! ```text
//! theta = sqrt(rho1^2 + rho2^2) / (2 |phi'|),
//! |alpha| <= cosh(I),  |beta| <= sinh(I),  T >= sech^2(I),  R <= tanh^2(I),   I = int theta dx
//! ```
//!
//! plus a one-parameter search over gauges for the tightest of these bounds.

use crate::error::{Error, Result};
use crate::gauges::{gauge_blend, rho_pair, GaugeTriple, RhoPair};
use crate::oracle::OracleResult;
use crate::par::{self, Execution};
use crate::potentials::{
    truncate_domain, wavenumber_field, DomainGrid, EnergySpec, PotentialProfile, Side, WaveNumberField,
    DEFAULT_TAIL_TOLERANCE,
};
use crate::quadrature::integrate_piecewise;

/// Slack allowed when comparing exact probabilities against the bounds.
pub const VERIFY_SLACK: f64 = 1e-12;

/// The pointwise integrand `theta(x)` of one gauge.
#[derive(Debug, Clone)]
pub struct ThetaField {
    pair: RhoPair,
}

impl ThetaField {
    pub fn gauge_id(&self) -> &str {
        self.pair.gauge.id()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_at(x, Side::Right)
    }

    pub fn eval_at(&self, x: f64, side: Side) -> f64 {
        let (rho1, rho2) = self.pair.eval(x, side);
        let phi_prime = self.pair.gauge.sample(x, side).phi_prime;
        rho1.re.hypot(rho2.re) / (2.0 * phi_prime.re.abs())
    }

    /// Where `theta` may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pair.breakpoints()
    }
}

/// `theta` for a real gauge with continuous `phi'`.
pub fn theta_field(g: &GaugeTriple, w: &WaveNumberField) -> Result<ThetaField> {
    if !g.is_real() {
        return Err(Error::ComplexGaugeRejected { gauge_id: g.id().to_string() });
    }
    if let Some(&x) = g.phi_prime_jumps().first() {
        return Err(Error::DiscontinuousGauge { gauge_id: g.id().to_string(), x });
    }
    Ok(ThetaField { pair: rho_pair(g, w) })
}

/// `int theta` over the window, split wherever `theta` may jump.
pub fn theta_integral(t: &ThetaField, grid: &DomainGrid, tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let f = |x: f64| t.eval(x);
    let q = integrate_piecewise(&f, grid.x_min, grid.x_max, &t.breakpoints(), tol)?;
    if !q.value.is_finite() {
        return Err(Error::NonConvergence { what: "theta integral", detail: "non-finite value".into() });
    }
    Ok(q.value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub theta_integral: f64,
    /// Upper bound on `|alpha|`.
    pub alpha_bound: f64,
    /// Upper bound on `|beta|`.
    pub beta_bound: f64,
    pub t_lower: f64,
    pub r_upper: f64,
    pub gauge_id: String,
}

impl BoundReport {
    pub fn from_integral(theta_integral: f64, gauge_id: impl Into<String>) -> Self {
        let sech = 1.0 / theta_integral.cosh();
        let tanh = theta_integral.tanh();
        Self {
            theta_integral,
            alpha_bound: theta_integral.cosh(),
            beta_bound: theta_integral.sinh(),
            t_lower: sech * sech,
            r_upper: tanh * tanh,
            gauge_id: gauge_id.into(),
        }
    }
}

pub fn bound_report_on(g: &GaugeTriple, w: &WaveNumberField, grid: &DomainGrid, tol: f64) -> Result<BoundReport> {
    let t = theta_field(g, w)?;
    Ok(BoundReport::from_integral(theta_integral(&t, grid, tol)?, g.id()))
}

pub fn bound_report(p: &PotentialProfile, e: &EnergySpec, g: &GaugeTriple, tol: f64) -> Result<BoundReport> {
    let w = wavenumber_field(p, e)?;
    let grid = truncate_domain(p, e, DEFAULT_TAIL_TOLERANCE)?;
    bound_report_on(g, &w, &grid, tol)
}

/// A one-parameter set of real gauges; member `s = 0` is the baseline.
#[derive(Debug, Clone)]
pub enum GaugeFamily {
    /// `phi' = (1 - s) k_ref + s k(x)`, `s` in `[0, 1]`; `k_ref = None` uses the left
    /// asymptotic wavenumber.
    WavenumberBlend { k_ref: Option<f64>, scan_points: usize, s_tol: f64 },
    /// An explicit list indexed by position; the first entry is the baseline.
    Explicit(Vec<GaugeTriple>),
}

impl GaugeFamily {
    pub fn blend() -> Self {
        GaugeFamily::WavenumberBlend { k_ref: None, scan_points: 33, s_tol: 1e-6 }
    }
}

/// Result of [`optimize_gauge`].
#[derive(Debug, Clone)]
pub struct GaugeOptimum {
    pub gauge: GaugeTriple,
    pub report: BoundReport,
    /// Family parameter of the winner (the list index for explicit families).
    pub parameter: f64,
    pub baseline: BoundReport,
}

fn inadmissible(e: &Error) -> bool {
    matches!(
        e,
        Error::TurningPoint { .. }
            | Error::DiscontinuousGauge { .. }
            | Error::GaugeDegenerate { .. }
            | Error::ComplexGaugeRejected { .. }
    )
}

/// `Ok(None)` for members outside the admissible set.
fn member_report(
    build: impl Fn() -> Result<GaugeTriple>,
    w: &WaveNumberField,
    grid: &DomainGrid,
    tol: f64,
) -> Result<Option<(GaugeTriple, BoundReport)>> {
    let outcome = build().and_then(|g| bound_report_on(&g, w, grid, tol).map(|r| (g, r)));
    match outcome {
        Ok(v) => Ok(Some(v)),
        Err(e) if inadmissible(&e) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Index of the smallest integral; ties go to the earliest entry.
fn argmin(reports: &[Option<(GaugeTriple, BoundReport)>]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in reports.iter().enumerate() {
        if let Some((_, r)) = r {
            match best {
                Some(b) if reports[b].as_ref().unwrap().1.theta_integral <= r.theta_integral => {}
                _ => best = Some(i),
            }
        }
    }
    best
}

pub fn optimize_gauge(p: &PotentialProfile, e: &EnergySpec, family: &GaugeFamily, tol: f64) -> Result<GaugeOptimum> {
    let w = wavenumber_field(p, e)?;
    let grid = truncate_domain(p, e, DEFAULT_TAIL_TOLERANCE)?;
    optimize_gauge_on(&w, &grid, family, tol, Execution::default())
}

/// Coarse scan over the family (members evaluated concurrently), then golden-section
/// refinement around the best scan point.
pub fn optimize_gauge_on(
    w: &WaveNumberField,
    grid: &DomainGrid,
    family: &GaugeFamily,
    tol: f64,
    exec: Execution,
) -> Result<GaugeOptimum> {
    match family {
        GaugeFamily::Explicit(list) => {
            if list.is_empty() {
                return Err(Error::EmptyFamily);
            }
            let reports = par::map(exec, list, |g| member_report(|| Ok(g.clone()), w, grid, tol))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            let baseline = reports[0].as_ref().ok_or(Error::NoAdmissibleMember)?.1.clone();
            let i = argmin(&reports).ok_or(Error::NoAdmissibleMember)?;
            let (gauge, report) = reports[i].clone().expect("argmin is admissible");
            Ok(GaugeOptimum { gauge, report, parameter: i as f64, baseline })
        }
        GaugeFamily::WavenumberBlend { k_ref, scan_points, s_tol } => {
            if *scan_points == 0 {
                return Err(Error::EmptyFamily);
            }
            let k_ref = k_ref.unwrap_or(w.k_left);
            let member = |s: f64| member_report(|| gauge_blend(w, grid, k_ref, s), w, grid, tol);
            let n = (*scan_points).max(2);
            let params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let reports = par::map(exec, &params, |&s| member(s)).into_iter().collect::<Result<Vec<_>>>()?;
            let baseline = reports[0].as_ref().ok_or(Error::NoAdmissibleMember)?.1.clone();
            let i = argmin(&reports).ok_or(Error::NoAdmissibleMember)?;
            let (mut gauge, mut report) = reports[i].clone().expect("argmin is admissible");
            let mut parameter = params[i];

            let lo = params[i.saturating_sub(1)];
            let hi = params[(i + 1).min(n - 1)];
            if let Some(s) = golden_section(lo, hi, *s_tol, |s| {
                Ok(member(s)?.map_or(f64::INFINITY, |(_, r)| r.theta_integral))
            })? {
                if let Some((g, r)) = member(s)? {
                    if r.theta_integral < report.theta_integral {
                        gauge = g;
                        report = r;
                        parameter = s;
                    }
                }
            }
            Ok(GaugeOptimum { gauge, report, parameter, baseline })
        }
    }
}

/// Minimizer of a unimodal `f` on `[lo, hi]` to within `tol`; `None` for a degenerate bracket.
fn golden_section(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> Result<f64>) -> Result<Option<f64>> {
    if !(hi > lo) {
        return Ok(None);
    }
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = f(d)?;
        }
    }
    Ok(Some(if fc <= fd { c } else { d }))
}

/// Outcome of comparing exact probabilities against a bound report.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationRecord {
    pub gauge_id: String,
    pub transmission: f64,
    pub reflection: f64,
    pub t_lower: f64,
    pub r_upper: f64,
    /// `T - t_lower`.
    pub margin_t: f64,
    /// `r_upper - R`.
    pub margin_r: f64,
}

/// `BoundViolation` if `T < t_lower` or `R > r_upper` beyond [`VERIFY_SLACK`].
pub fn verify_bounds(report: &BoundReport, exact: &OracleResult) -> Result<VerificationRecord> {
    let record = VerificationRecord {
        gauge_id: report.gauge_id.clone(),
        transmission: exact.transmission,
        reflection: exact.reflection,
        t_lower: report.t_lower,
        r_upper: report.r_upper,
        margin_t: exact.transmission - report.t_lower,
        margin_r: report.r_upper - exact.reflection,
    };
    if record.margin_t < -VERIFY_SLACK || record.margin_r < -VERIFY_SLACK {
        return Err(Error::BoundViolation {
            gauge_id: record.gauge_id,
            transmission: record.transmission,
            t_lower: record.t_lower,
            reflection: record.reflection,
            r_upper: record.r_upper,
        });
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauges::{gauge_antiphase, gauge_constant, gauge_special_delta, gauge_wkb, gauge_with_chi};
    use crate::oracle::{analytic_square_barrier, OracleMethod};
    use std::f64::consts::PI;

    fn setup(p: &PotentialProfile, e: f64) -> (WaveNumberField, DomainGrid) {
        let e = EnergySpec::new(e);
        (wavenumber_field(p, &e).unwrap(), truncate_domain(p, &e, 1e-10).unwrap())
    }

    fn exact(t: f64, r: f64) -> OracleResult {
        OracleResult { transmission: t, reflection: r, psi_samples: vec![], method: OracleMethod::DirectIntegration }
    }

    #[test]
    fn theta_examples() {
        let gauss = PotentialProfile::gaussian(1.0, 1.0, 0.0).unwrap();
        let (w, grid) = setup(&gauss, 2.0);
        let wkb = theta_field(&gauge_wkb(&w, &grid).unwrap(), &w).unwrap();
        for x in [-1.5, -0.2, 0.9] {
            let k = w.k_squared(x).sqrt();
            let k_prime = w.k_squared_derivative(x, Side::Right) / (2.0 * k);
            assert!((wkb.eval(x) - k_prime.abs() / (2.0 * k)).abs() < 1e-14);
        }
        let k_ref = 1.2;
        let constant = theta_field(&gauge_constant(k_ref).unwrap(), &w).unwrap();
        for x in [-1.5, 0.0, 0.9] {
            let expected = (w.k_squared(x) - k_ref * k_ref).abs() / (2.0 * k_ref);
            assert!((constant.eval(x) - expected).abs() < 1e-14);
        }
        let (w, grid) = setup(&PotentialProfile::free(), 2.0);
        let t = theta_field(&gauge_constant(2f64.sqrt()).unwrap(), &w).unwrap();
        assert!(t.eval(0.0) < 1e-15);
        assert!(theta_integral(&t, &grid, 1e-12).unwrap() < 1e-15);
    }

    #[test]
    fn rejects_complex_and_discontinuous_gauges() {
        let sq = PotentialProfile::square_barrier(1.0, 1.0, 0.0).unwrap();
        let (w, grid) = setup(&sq, 2.0);
        assert!(matches!(
            theta_field(&gauge_wkb(&w, &grid).unwrap(), &w),
            Err(Error::DiscontinuousGauge { .. })
        ));
        let grid = DomainGrid { x_min: -1.0, x_max: 1.0, tail_tolerance: 1e-10, max_step: 0.1 };
        let complex = GaugeTriple::custom(
            "complex",
            std::sync::Arc::new(|x: f64, _: Side| crate::gauges::GaugeSample {
                phi: num_complex::Complex64::new(x, 0.1 * x),
                phi_prime: num_complex::Complex64::new(1.0, 0.1),
                ..Default::default()
            }),
            false,
            vec![],
            &grid,
        )
        .unwrap();
        assert!(matches!(theta_field(&complex, &w), Err(Error::ComplexGaugeRejected { .. })));
    }

    #[test]
    fn integral_examples() {
        let sq = PotentialProfile::square_barrier(1.0, 1.0, 0.0).unwrap();
        let e = EnergySpec::new(2.0);
        let r = bound_report(&sq, &e, &gauge_constant(2f64.sqrt()).unwrap(), 1e-12).unwrap();
        assert!((r.theta_integral - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!((r.t_lower - 0.884_724_065_480_852).abs() < 1e-12);
        let t = analytic_square_barrier(1.0, 1.0, &e).unwrap();
        verify_bounds(&r, &t).unwrap();

        let gauss = PotentialProfile::gaussian(1.0, 1.0, 0.0).unwrap();
        let r = bound_report(&gauss, &e, &gauge_constant(2f64.sqrt()).unwrap(), 1e-12).unwrap();
        assert!((r.theta_integral - PI.sqrt() / 2.0).abs() < 1e-9, "{}", r.theta_integral);
    }

    #[test]
    fn report_identities() {
        for i in [0.0, 0.1, 0.35, 1.7, 6.0] {
            let r = BoundReport::from_integral(i, "x");
            assert!((r.alpha_bound.powi(2) - r.beta_bound.powi(2) - 1.0).abs() < 1e-12 * r.alpha_bound.powi(2));
            assert!((r.t_lower + r.r_upper - 1.0).abs() < 1e-15);
        }
        let zero = BoundReport::from_integral(0.0, "x");
        assert_eq!((zero.t_lower, zero.r_upper), (1.0, 0.0));
    }

    #[test]
    fn theta_ignores_delta() {
        let gauss = PotentialProfile::gaussian(1.0, 1.0, 0.0).unwrap();
        let (w, grid) = setup(&gauss, 2.0);
        let base = gauge_with_chi(&gauge_wkb(&w, &grid).unwrap(), 0.2);
        let a = theta_field(&base, &w).unwrap();
        let b = theta_field(&gauge_special_delta(&base, &w, &grid).unwrap(), &w).unwrap();
        let c = theta_field(&gauge_antiphase(&base), &w).unwrap();
        for x in grid.sample_points(&[]) {
            assert_eq!(a.eval(x), b.eval(x));
            assert_eq!(a.eval(x), c.eval(x));
        }
    }

    #[test]
    fn verification_margins() {
        let r = BoundReport::from_integral(1.0 / (2.0 * 2f64.sqrt()), "constant");
        let v = verify_bounds(&r, &exact(1.0, 0.0)).unwrap();
        assert!((v.margin_t - (1.0 - r.t_lower)).abs() < 1e-15);
        let v = verify_bounds(&BoundReport::from_integral(0.0, "c"), &exact(1.0, 0.0)).unwrap();
        assert_eq!(v.margin_t, 0.0);
        let mut tight = BoundReport::from_integral(0.1, "synthetic");
        tight.t_lower = 0.99;
        assert!(matches!(verify_bounds(&tight, &exact(0.9187, 0.0813)), Err(Error::BoundViolation { .. })));
    }

    #[test]
    fn optimizer_never_loses_to_baseline() {
        let e = EnergySpec::new(2.0);
        let gauss = PotentialProfile::gaussian(1.0, 1.0, 0.0).unwrap();
        let opt = optimize_gauge(&gauss, &e, &GaugeFamily::blend(), 1e-10).unwrap();
        assert!(opt.report.theta_integral <= opt.baseline.theta_integral);
        assert!(opt.report.t_lower >= opt.baseline.t_lower);

        let free = optimize_gauge(&PotentialProfile::free(), &e, &GaugeFamily::blend(), 1e-10).unwrap();
        assert!(free.report.theta_integral < 1e-15);
        assert_eq!(free.parameter, 0.0);

        let sq = PotentialProfile::square_barrier(1.0, 1.0, 0.0).unwrap();
        let opt = optimize_gauge(&sq, &e, &GaugeFamily::blend(), 1e-10).unwrap();
        assert_eq!(opt.parameter, 0.0);
        let t = analytic_square_barrier(1.0, 1.0, &e).unwrap();
        assert!(opt.report.t_lower >= opt.baseline.t_lower && t.transmission >= opt.report.t_lower);

        assert!(matches!(
            optimize_gauge(&sq, &e, &GaugeFamily::Explicit(vec![]), 1e-10),
            Err(Error::EmptyFamily)
        ));
    }

    #[test]
    fn scan_is_deterministic_across_execution_modes() {
        let gauss = PotentialProfile::gaussian(1.0, 1.0, 0.0).unwrap();
        let (w, grid) = setup(&gauss, 2.0);
        let a = optimize_gauge_on(&w, &grid, &GaugeFamily::blend(), 1e-10, Execution::Sequential).unwrap();
        let b = optimize_gauge_on(&w, &grid, &GaugeFamily::blend(), 1e-10, Execution::Parallel).unwrap();
        assert_eq!(a.parameter, b.parameter);
        assert_eq!(a.report, b.report);
    }
}
