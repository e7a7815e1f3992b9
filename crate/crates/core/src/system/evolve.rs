//! Adaptive Dormand-Prince 5(4) stepping of the coefficient pair.
//!
//! States are always expressed in the right-hand basis at their position. Segments
//! between breakpoints are integrated separately; crossing a breakpoint applies the
//! jump matrix that keeps `psi` and `psi'` continuous.

use super::{generator_at, jump_matrix, CoefficientState};
use crate::error::{Error, Result};
use crate::gauges::RhoPair;
use crate::mat2::Mat2;
use crate::potentials::Side;
use crate::quadrature::split_points;
use num_complex::Complex64;

type Vec2 = [Complex64; 2];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const UNDERFLOW_RATIO: f64 = 1e-14;
const MAX_STEPS: usize = 10_000_000;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// `y + h * sum_j w[j] k[j]`.
fn combine(y: Vec2, h: f64, w: &[f64], k: &[Vec2]) -> Vec2 {
    let mut out = y;
    for (wj, kj) in w.iter().zip(k) {
        if *wj != 0.0 {
            out[0] += kj[0] * (h * wj);
            out[1] += kj[1] * (h * wj);
        }
    }
    out
}

struct Segment<'a> {
    r: &'a RhoPair,
    hi: f64,
}

impl Segment<'_> {
    fn rhs(&self, x: f64, y: Vec2) -> Result<Vec2> {
        let side = if x >= self.hi { Side::Left } else { Side::Right };
        Ok(generator_at(self.r, x, side)?.apply(y))
    }
}

/// One attempted step: the fifth-order solution, the scaled error norm and the last stage.
fn attempt(seg: &Segment, x: f64, y: Vec2, k1: Vec2, h: f64, tol: f64) -> Result<(Vec2, f64, Vec2)> {
    let mut k = [k1; 7];
    for i in 1..7 {
        let xi = if i >= 5 { x + h } else { x + C[i] * h };
        k[i] = seg.rhs(xi, combine(y, h, &A[i][..i], &k[..i]))?;
    }
    let y_new = combine(y, h, &A[6], &k[..6]);
    let err = combine([Complex64::default(); 2], h, &E, &k);
    let norm = (0..2)
        .map(|i| err[i].norm() / (tol + tol * y[i].norm().max(y_new[i].norm())))
        .fold(0.0, f64::max);
    Ok((y_new, norm, k[6]))
}

/// Integrates one breakpoint-free segment from `x0` to `x1`, calling `record` after
/// every accepted step.
fn integrate_segment(
    r: &RhoPair,
    x0: f64,
    x1: f64,
    mut y: Vec2,
    tol: f64,
    span: f64,
    record: &mut dyn FnMut(f64, Vec2),
) -> Result<Vec2> {
    let seg = Segment { r, hi: x0.max(x1) };
    let dir = (x1 - x0).signum();
    let length = (x1 - x0).abs();
    if length == 0.0 {
        return Ok(y);
    }
    let max_step = r.max_step();
    let mut h = (max_step * 0.25).min(length);
    let mut x = x0;
    let mut k1 = seg.rhs(x, y)?;
    for _ in 0..MAX_STEPS {
        let remaining = (x1 - x).abs();
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let (y_new, err, k7) = attempt(&seg, x, y, k1, dir * step, tol)?;
        if !y_new[0].is_finite() || !y_new[1].is_finite() {
            return Err(Error::NonConvergence {
                what: "coefficient evolution",
                detail: format!("non-finite state near x = {x}"),
            });
        }
        let factor = if err == 0.0 { MAX_FACTOR } else { (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR) };
        if err <= 1.0 {
            x = if last { x1 } else { x + dir * step };
            y = y_new;
            k1 = k7;
            record(x, y);
            if last {
                return Ok(y);
            }
            h = (step * factor).min(max_step);
        } else {
            h = step * factor.min(1.0);
            if h < UNDERFLOW_RATIO * span {
                return Err(Error::StepUnderflow { x, step: h });
            }
        }
    }
    Err(Error::NonConvergence {
        what: "coefficient evolution",
        detail: format!("more than {MAX_STEPS} steps"),
    })
}

fn cross(r: &RhoPair, x: f64, from: Side, to: Side, y: Vec2) -> Result<Vec2> {
    let j: Mat2 = jump_matrix(&r.gauge, x, from, to)?;
    Ok(j.apply(y))
}

fn drive(
    r: &RhoPair,
    s0: &CoefficientState,
    x_to: f64,
    tol: f64,
    record: &mut dyn FnMut(f64, Vec2),
) -> Result<CoefficientState> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    if !x_to.is_finite() || !s0.x.is_finite() {
        return Err(Error::invalid("evolution endpoints must be finite"));
    }
    let breaks = r.breakpoints();
    let is_break = |x: f64| breaks.contains(&x);
    let pts = split_points(s0.x, x_to, &breaks);
    let forward = x_to >= s0.x;
    let span = (x_to - s0.x).abs();
    let mut y = s0.vector();
    for w in pts.windows(2) {
        if !forward && is_break(w[0]) {
            y = cross(r, w[0], Side::Right, Side::Left, y)?;
        }
        y = integrate_segment(r, w[0], w[1], y, tol, span, record)?;
        if forward && is_break(w[1]) {
            y = cross(r, w[1], Side::Left, Side::Right, y)?;
            record(w[1], y);
        }
    }
    Ok(CoefficientState { x: x_to, a: y[0], b: y[1] })
}

/// Evolves `s0` to `x_to` (either direction) with local error control at `tol`.
pub fn evolve(r: &RhoPair, s0: &CoefficientState, x_to: f64, tol: f64) -> Result<CoefficientState> {
    drive(r, s0, x_to, tol, &mut |_, _| {})
}

/// Like [`evolve`], returning the state after every accepted step (starting with `s0`).
pub fn evolve_trajectory(r: &RhoPair, s0: &CoefficientState, x_to: f64, tol: f64) -> Result<Vec<CoefficientState>> {
    let mut out = vec![*s0];
    drive(r, s0, x_to, tol, &mut |x, y| {
        let s = CoefficientState { x, a: y[0], b: y[1] };
        // a repeated position is the same point re-expressed after a jump
        match out.last_mut() {
            Some(last) if last.x == x => *last = s,
            _ => out.push(s),
        }
    })?;
    Ok(out)
}

/// States at each of `xs`, evolved in sequence from `s0`.
pub fn evolve_through(r: &RhoPair, s0: &CoefficientState, xs: &[f64], tol: f64) -> Result<Vec<CoefficientState>> {
    let mut out = Vec::with_capacity(xs.len());
    let mut s = *s0;
    for &x in xs {
        s = evolve(r, &s, x, tol)?;
        out.push(s);
    }
    Ok(out)
}
