//! Monotone piecewise-cubic Hermite interpolation and the two-column table format.

use crate::error::{Error, Result};
use std::path::Path;

/// Shape-preserving cubic interpolant (Fritsch-Carlson slopes with harmonic-mean
/// interior weights). Outside the sample range it clamps to the end values.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid("a table needs at least two samples"));
        }
        if samples.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::invalid("table contains non-finite values"));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("table positions must be strictly increasing"));
        }
        let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();

        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes[0] = delta[0];
            slopes[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    slopes[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            slopes[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn first(&self) -> (f64, f64) {
        (self.xs[0], self.ys[0])
    }

    pub fn last(&self) -> (f64, f64) {
        let n = self.xs.len() - 1;
        (self.xs[n], self.ys[n])
    }

    pub fn positions(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    fn cell(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => (i - 1).min(self.xs.len() - 2),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (x0, y0) = self.first();
        let (x1, y1) = self.last();
        if x <= x0 {
            return y0;
        }
        if x >= x1 {
            return y1;
        }
        let k = self.cell(x);
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k] + h10 * h * self.slopes[k] + h01 * self.ys[k + 1] + h11 * h * self.slopes[k + 1]
    }

    /// Derivative of the interpolant; zero in the clamped region.
    pub fn derivative(&self, x: f64) -> f64 {
        let (x0, _) = self.first();
        let (x1, _) = self.last();
        if x < x0 || x > x1 {
            return 0.0;
        }
        let k = self.cell(x);
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        d00 * self.ys[k] + d10 * self.slopes[k] + d01 * self.ys[k + 1] + d11 * self.slopes[k + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

/// Parses whitespace-separated `(position, value)` rows; `#` starts a comment.
pub fn parse_table(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected two columns, found {}", fields.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("`{s}`: {e}"),
            })
        };
        rows.push((parse(fields[0])?, parse(fields[1])?));
    }
    Ok(rows)
}

pub fn read_table(path: &Path) -> Result<Vec<(f64, f64)>> {
    parse_table(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_samples_and_clamps() {
        let s = [(0.0, 1.0), (1.0, 3.0), (2.5, 2.0), (4.0, 2.0)];
        let m = MonotoneCubic::new(&s).unwrap();
        for (x, y) in s {
            assert_eq!(m.eval(x), y);
        }
        assert_eq!(m.eval(-10.0), 1.0);
        assert_eq!(m.eval(10.0), 2.0);
        assert_eq!(m.derivative(-10.0), 0.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s: Vec<(f64, f64)> = (0..12).map(|i| (i as f64 * 0.5, (i as f64 * 0.4).sin())).collect();
        let m = MonotoneCubic::new(&s).unwrap();
        let h = 1e-6;
        for &x in &[0.3, 1.1, 2.74, 4.9] {
            let fd = (m.eval(x + h) - m.eval(x - h)) / (2.0 * h);
            assert!((fd - m.derivative(x)).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_unsorted() {
        assert!(MonotoneCubic::new(&[(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(MonotoneCubic::new(&[(0.0, 1.0)]).is_err());
    }

    #[test]
    fn table_parsing() {
        let t = "# header\n0 1.5\n  1.0\t2 # trailing\n\n2 3e-1\n";
        assert_eq!(parse_table(t).unwrap(), vec![(0.0, 1.5), (1.0, 2.0), (2.0, 0.3)]);
        match parse_table("0 1\n1 2 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn monotone_data_gives_monotone_interpolant(steps in prop::collection::vec((0.1f64..2.0, 0.0f64..3.0), 2..12)) {
            let mut x = 0.0;
            let mut y = 0.0;
            let mut s = vec![(x, y)];
            for (dx, dy) in steps {
                x += dx;
                y += dy;
                s.push((x, y));
            }
            let m = MonotoneCubic::new(&s).unwrap();
            let mut prev = m.eval(0.0);
            for i in 1..=400 {
                let v = m.eval(x * i as f64 / 400.0);
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
