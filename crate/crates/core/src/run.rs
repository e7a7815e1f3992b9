//! Executes a [`RunConfig`]: per-energy work runs concurrently, rows come back in
//! energy order, and the CSV rendering is byte-for-byte reproducible apart from the
//! `runtime_ms` column.

use crate::bounds::{bound_report_on, optimize_gauge_on, verify_bounds, BoundReport, GaugeFamily};
use crate::config::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::gauges::rho_pair;
use crate::oracle::direct_integrate;
use crate::par::{self, Execution};
use crate::potentials::{truncate_domain, wavenumber_field, DomainGrid, WaveNumberField};
use crate::system::scattering_on_grid;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

pub const CSV_HEADER: &str =
    "energy,gauge_id,transmission,reflection,theta_integral,t_lower,r_upper,margin_t,oracle_t,runtime_ms";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_BOUND_VIOLATION: i32 = 4;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultRow {
    pub energy: f64,
    pub gauge_id: String,
    /// Label grouping rows into plot blocks: the configured gauge, or `optimized`.
    pub series: String,
    pub transmission: Option<f64>,
    pub reflection: Option<f64>,
    pub theta_integral: Option<f64>,
    pub t_lower: Option<f64>,
    pub r_upper: Option<f64>,
    pub margin_t: Option<f64>,
    pub oracle_t: Option<f64>,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub rows: Vec<ResultRow>,
    /// Non-fatal notes, e.g. gauges that are inadmissible at some energy.
    pub warnings: Vec<String>,
    /// Bound violations found in verify mode.
    pub violations: Vec<String>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.violations.is_empty() {
            EXIT_OK
        } else {
            EXIT_BOUND_VIOLATION
        }
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Validation { .. } | Error::InvalidInput(_) | Error::Io(_) => EXIT_CONFIG,
        Error::BoundViolation { .. } => EXIT_BOUND_VIOLATION,
        _ => EXIT_NUMERICAL,
    }
}

/// Errors that mean "this gauge does not apply here" rather than a failed computation.
fn inadmissible(e: &Error) -> bool {
    matches!(
        e,
        Error::TurningPoint { .. } | Error::DiscontinuousGauge { .. } | Error::ComplexGaugeRejected { .. }
    )
}

#[derive(Default)]
struct EnergyOutcome {
    rows: Vec<ResultRow>,
    warnings: Vec<String>,
    violations: Vec<String>,
}

fn oracle_transmission(c: &RunConfig, w: &WaveNumberField, grid: &DomainGrid) -> Result<crate::oracle::OracleResult> {
    direct_integrate(&w.potential, &w.spec, grid, c.tolerances.ode_tol)
}

fn apply_bounds(row: &mut ResultRow, report: &BoundReport) {
    row.theta_integral = Some(report.theta_integral);
    row.t_lower = Some(report.t_lower);
    row.r_upper = Some(report.r_upper);
}

fn evaluate_energy(c: &RunConfig, energy: f64) -> Result<EnergyOutcome> {
    let spec = c.energy_spec(energy);
    let w = wavenumber_field(&c.potential, &spec)?;
    let grid = truncate_domain(&c.potential, &spec, c.tolerances.tail_tol)?;
    let mut out = EnergyOutcome::default();

    if c.mode == Mode::Optimize {
        let start = Instant::now();
        let family = GaugeFamily::WavenumberBlend {
            k_ref: None,
            scan_points: c.optimizer.scan_points,
            s_tol: c.optimizer.s_tol,
        };
        let best = optimize_gauge_on(&w, &grid, &family, c.tolerances.quad_tol, Execution::default())?;
        let amp = scattering_on_grid(&rho_pair(&best.gauge, &w), &grid, c.tolerances.ode_tol)?;
        let exact = oracle_transmission(c, &w, &grid)?;
        let mut row = ResultRow {
            energy,
            gauge_id: best.gauge.id().to_string(),
            series: "optimized".into(),
            transmission: Some(amp.transmission),
            reflection: Some(amp.reflection),
            oracle_t: Some(exact.transmission),
            margin_t: Some(exact.transmission - best.report.t_lower),
            ..ResultRow::default()
        };
        apply_bounds(&mut row, &best.report);
        row.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        out.rows.push(row);
        return Ok(out);
    }

    let exact = if c.mode == Mode::Verify { Some(oracle_transmission(c, &w, &grid)?) } else { None };
    for spec in &c.gauges {
        let start = Instant::now();
        let label = spec.to_string();
        let mut row = ResultRow { energy, gauge_id: label.clone(), series: label.clone(), ..ResultRow::default() };
        let gauge = match spec.build(&w, &grid) {
            Ok(g) => g,
            Err(e) if inadmissible(&e) => {
                out.warnings.push(format!("E = {energy}: gauge `{label}` skipped: {e}"));
                row.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
                out.rows.push(row);
                continue;
            }
            Err(e) => return Err(e),
        };
        let amp = scattering_on_grid(&rho_pair(&gauge, &w), &grid, c.tolerances.ode_tol)?;
        row.transmission = Some(amp.transmission);
        row.reflection = Some(amp.reflection);
        if c.mode != Mode::Scatter {
            match bound_report_on(&gauge, &w, &grid, c.tolerances.quad_tol) {
                Ok(report) => {
                    apply_bounds(&mut row, &report);
                    if let Some(exact) = &exact {
                        row.oracle_t = Some(exact.transmission);
                        row.margin_t = Some(exact.transmission - report.t_lower);
                        if let Err(e) = verify_bounds(&report, exact) {
                            out.violations.push(format!("E = {energy}: {e}"));
                        }
                    }
                }
                Err(e) if inadmissible(&e) => {
                    out.warnings.push(format!("E = {energy}: no bound for `{label}`: {e}"));
                    row.oracle_t = exact.as_ref().map(|x| x.transmission);
                }
                Err(e) => return Err(e),
            }
        }
        row.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        out.rows.push(row);
    }
    Ok(out)
}

/// Runs every energy of the configuration. Numerical failures abort the run; bound
/// violations are collected so the table can still be written.
pub fn run(c: &RunConfig, exec: Execution) -> Result<RunReport> {
    let outcomes = par::map(exec, &c.energies, |&e| evaluate_energy(c, e));
    let mut report = RunReport::default();
    for o in outcomes {
        let o = o?;
        report.rows.extend(o.rows);
        report.warnings.extend(o.warnings);
        report.violations.extend(o.violations);
    }
    Ok(report)
}

fn number(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub fn render_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{:.3}",
            number(Some(r.energy)),
            r.gauge_id,
            number(r.transmission),
            number(r.reflection),
            number(r.theta_integral),
            number(r.t_lower),
            number(r.r_upper),
            number(r.margin_t),
            number(r.oracle_t),
            r.runtime_ms
        );
    }
    s
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    std::fs::write(path, render_csv(rows))?;
    Ok(())
}

/// One block per series: `energy transmission t_lower oracle_t`, missing values as `nan`.
pub fn render_plot_data(rows: &[ResultRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::invalid("no rows to plot"));
    }
    let mut series: Vec<&str> = Vec::new();
    for r in rows {
        if !series.contains(&r.series.as_str()) {
            series.push(&r.series);
        }
    }
    let value = |v: Option<f64>| v.map_or("nan".to_string(), |x| format!("{x:.16e}"));
    let mut s = String::new();
    for (i, name) in series.iter().enumerate() {
        if i > 0 {
            s.push_str("\n\n");
        }
        let _ = writeln!(s, "# gauge {name}");
        let _ = writeln!(s, "# energy transmission t_lower oracle_t");
        for r in rows.iter().filter(|r| r.series == *name) {
            let _ = writeln!(
                s,
                "{} {} {} {}",
                value(Some(r.energy)),
                value(r.transmission),
                value(r.t_lower),
                value(r.oracle_t)
            );
        }
    }
    Ok(s)
}

pub fn emit_plot_data(rows: &[ResultRow], path: &Path) -> Result<()> {
    let text = render_plot_data(rows)?;
    std::fs::write(path, text)?;
    Ok(())
}
