//! Transfer matrices as ordered products of midpoint-frozen step exponentials.
//!
//! The exponential midpoint rule is symmetric, so its global error expands in even
//! powers of the step. Successive halvings are combined by Romberg extrapolation in
//! `h^2`, and refinement stops once two consecutive diagonal entries of the table agree.

use super::{generator_at, jump_matrix};
use crate::error::{Error, Result};
use crate::gauges::RhoPair;
use crate::mat2::Mat2;
use crate::par::{ordered_product, Execution};
use crate::potentials::Side;
use crate::quadrature::split_points;

/// `E(x_to, x_from)`: maps `(a, b)` at `x_from` to `(a, b)` at `x_to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub entries: Mat2,
    pub x_from: f64,
    pub x_to: f64,
}

impl TransferMatrix {
    pub fn apply(&self, s: &super::CoefficientState) -> super::CoefficientState {
        let v = self.entries.apply(s.vector());
        super::CoefficientState { x: self.x_to, a: v[0], b: v[1] }
    }

    /// `self` after `earlier`; requires `earlier.x_to == self.x_from`.
    pub fn compose(&self, earlier: &TransferMatrix) -> Result<TransferMatrix> {
        if earlier.x_to != self.x_from {
            return Err(Error::invalid("transfer matrices do not share an endpoint"));
        }
        Ok(TransferMatrix { entries: self.entries * earlier.entries, x_from: earlier.x_from, x_to: self.x_to })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProductOptions {
    /// Steps at the coarsest level (distributed over breakpoint-free segments).
    pub n_min: usize,
    /// Entrywise agreement required between consecutive extrapolated levels.
    pub tol: f64,
    pub max_levels: usize,
    pub execution: Execution,
}

impl Default for ProductOptions {
    fn default() -> Self {
        Self { n_min: 64, tol: 1e-11, max_levels: 14, execution: Execution::default() }
    }
}

#[derive(Debug, Clone, Copy)]
enum Factor {
    Step { mid: f64, h: f64, side: Side },
    Jump { x: f64, from: Side, to: Side },
}

struct Plan {
    /// `(start, end, base step count)` per segment, in travel order.
    segments: Vec<(f64, f64, usize)>,
    /// Jump to apply after each segment (forward) or before it (backward).
    jumps: Vec<Option<f64>>,
    forward: bool,
}

fn plan(r: &RhoPair, x_from: f64, x_to: f64, n_min: usize) -> Plan {
    let breaks = r.breakpoints();
    let pts = split_points(x_from, x_to, &breaks);
    let total = (x_to - x_from).abs();
    let max_step = r.max_step();
    let forward = x_to >= x_from;
    let mut segments = Vec::new();
    let mut jumps = Vec::new();
    for w in pts.windows(2) {
        let len = (w[1] - w[0]).abs();
        let by_step = (len / max_step).ceil() as usize;
        let by_share = if total > 0.0 { (n_min as f64 * len / total).ceil() as usize } else { 0 };
        segments.push((w[0], w[1], by_step.max(by_share).max(1)));
        let jump_at = if forward { w[1] } else { w[0] };
        jumps.push(breaks.contains(&jump_at).then_some(jump_at));
    }
    Plan { segments, jumps, forward }
}

fn factors(plan: &Plan, refine: usize) -> Vec<Factor> {
    let mut out = Vec::new();
    for (&(a, b, n), jump) in plan.segments.iter().zip(&plan.jumps) {
        if !plan.forward {
            if let Some(x) = jump {
                out.push(Factor::Jump { x: *x, from: Side::Right, to: Side::Left });
            }
        }
        if a != b {
            let n = n * refine;
            let h = (b - a) / n as f64;
            for j in 0..n {
                // midpoints never land on a breakpoint, so either side is exact
                out.push(Factor::Step { mid: a + (j as f64 + 0.5) * h, h, side: Side::Right });
            }
        }
        if plan.forward {
            if let Some(x) = jump {
                out.push(Factor::Jump { x: *x, from: Side::Left, to: Side::Right });
            }
        }
    }
    out
}

fn evaluate(r: &RhoPair, fs: &[Factor], exec: Execution) -> Result<Mat2> {
    ordered_product(exec, fs.len(), |j| match fs[j] {
        Factor::Step { mid, h, side } => Ok(generator_at(r, mid, side)?.scale(h.into()).exp()),
        Factor::Jump { x, from, to } => jump_matrix(&r.gauge, x, from, to),
    })
}

/// The plain (unextrapolated) product with `2^level` times the base step count.
pub fn product_at_level(r: &RhoPair, x_from: f64, x_to: f64, n_min: usize, level: u32, exec: Execution) -> Result<Mat2> {
    let p = plan(r, x_from, x_to, n_min.max(1));
    evaluate(r, &factors(&p, 1usize << level), exec)
}

pub fn transfer_matrix(r: &RhoPair, x_from: f64, x_to: f64, n_min: usize, tol: f64) -> Result<TransferMatrix> {
    transfer_matrix_with(r, x_from, x_to, &ProductOptions { n_min, tol, ..ProductOptions::default() })
}

pub fn transfer_matrix_with(r: &RhoPair, x_from: f64, x_to: f64, opts: &ProductOptions) -> Result<TransferMatrix> {
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if !x_from.is_finite() || !x_to.is_finite() {
        return Err(Error::invalid("transfer matrix endpoints must be finite"));
    }
    let p = plan(r, x_from, x_to, opts.n_min.max(1));
    let done = |entries| Ok(TransferMatrix { entries, x_from, x_to });
    if x_from == x_to {
        return done(evaluate(r, &factors(&p, 1), opts.execution)?);
    }
    let mut previous: Vec<Mat2> = Vec::new();
    let mut last_diff = f64::INFINITY;
    for level in 0..opts.max_levels {
        let mut row = vec![evaluate(r, &factors(&p, 1usize << level), opts.execution)?];
        for j in 1..=level {
            let weight = 4f64.powi(j as i32);
            let finer = row[j - 1];
            let coarser = previous[j - 1];
            row.push((finer.scale((weight).into()) - coarser).scale((1.0 / (weight - 1.0)).into()));
        }
        let best = row[level];
        if !best.is_finite() {
            return Err(Error::NonConvergence { what: "transfer matrix", detail: "non-finite product".into() });
        }
        if level >= 2 {
            last_diff = best.max_abs_diff(&previous[level - 1]);
            if last_diff <= opts.tol * best.max_abs().max(1.0) {
                return done(best);
            }
        }
        previous = row;
    }
    Err(Error::NonConvergence {
        what: "transfer matrix",
        detail: format!("levels still differ by {last_diff:.3e} after {} refinements", opts.max_levels),
    })
}
