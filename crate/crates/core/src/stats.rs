//! Distances between an empirical distribution and a `SpectralMeasure`:
//! Kolmogorov-Smirnov and the 1-Wasserstein distance `integral |F_n - F|`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::measures::{SpectralMeasure, CDF_ACCEPT, CDF_TOL};
use crate::quad;

fn check_sorted(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Domain("empty sample".into()));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("sample contains non-finite values".into()));
    }
    if xs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("sample must be sorted ascending".into()));
    }
    Ok(())
}

/// `sup |F_n - F|` for a sorted sample, given the right-continuous `F` at
/// the sample points and its left limits.
pub fn ks_from_cdf(xs: &[f64], f_right: &[f64], f_left: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        d = d.max((f_right[i] - (j + 1) as f64 / n).abs());
        d = d.max((f_left[i] - i as f64 / n).abs());
        i = j + 1;
    }
    d
}

/// Kolmogorov-Smirnov distance of a sorted sample to `m`.
pub fn ks_distance(xs: &[f64], m: &SpectralMeasure) -> Result<f64> {
    check_sorted(xs)?;
    let right = crate::measures::cdf_sorted(m, xs)?;
    let left: Vec<f64> = xs.iter().zip(right.iter()).map(|(&x, &f)| if x == 0.0 { f - m.atom0 } else { f }).collect();
    let mut d = ks_from_cdf(xs, &right, &left);
    if m.atom0 > 0.0 {
        // both sides of the jump at 0, whether or not a sample sits there
        let n = xs.len() as f64;
        let below = xs.partition_point(|&x| x < 0.0) as f64 / n;
        let upto = xs.partition_point(|&x| x <= 0.0) as f64 / n;
        let f0 = crate::measures::cdf(m, 0.0)?;
        d = d.max((f0 - upto).abs()).max((f0 - m.atom0 - below).abs());
    }
    Ok(d)
}

/// Running `F(x)` and `M(x) = integral_{[lo, x]} y dmu(y)`.
struct Cumulative<'a> {
    m: &'a SpectralMeasure,
    x: f64,
    ac: f64,
    first: f64,
}

impl<'a> Cumulative<'a> {
    fn new(m: &'a SpectralMeasure, x: f64) -> Self {
        Cumulative { m, x, ac: 0.0, first: 0.0 }
    }

    fn cdf(&self, x: f64, ac: f64) -> f64 {
        let atom = if x >= 0.0 { self.m.atom0 } else { 0.0 };
        (atom + ac).min(1.0)
    }

    fn increment(&self, v: f64) -> Result<(f64, f64)> {
        if v <= self.x {
            return Ok((0.0, 0.0));
        }
        let a = quad::lenient(self.m.integrate_density(|_| 1.0, self.x, v, CDF_TOL), CDF_ACCEPT)?;
        let b = quad::lenient(self.m.integrate_density(|y| y, self.x, v, CDF_TOL), CDF_ACCEPT)?;
        Ok((a.value, b.value))
    }

    /// `(F(v), G(v))` with `G(v) = integral_{-inf}^{v} F`, without moving.
    fn peek(&self, v: f64) -> Result<(f64, f64)> {
        let (da, db) = self.increment(v)?;
        let f = self.cdf(v, self.ac + da);
        Ok((f, v * f - (self.first + db)))
    }

    fn advance(&mut self, v: f64) -> Result<()> {
        let (da, db) = self.increment(v)?;
        self.ac += da;
        self.first += db;
        self.x = self.x.max(v);
        Ok(())
    }
}

/// `W_1 = integral |F_n - F| dx` for a sorted sample; exact up to the
/// quadrature tolerance, with crossings of `F = F_n` located by bisection.
pub fn w1_distance(xs: &[f64], m: &SpectralMeasure) -> Result<f64> {
    check_sorted(xs)?;
    if !m.support.hi.is_finite() {
        return Err(Error::Domain("W1 needs a compactly supported measure".into()));
    }
    let lo = if m.atom0 > 0.0 { m.support.lo.min(0.0) } else { m.support.lo };
    let hi = m.support.hi;
    let n = xs.len();
    let mut pts: Vec<f64> = Vec::with_capacity(n + 2);
    pts.push(lo.min(xs[0]));
    pts.extend_from_slice(xs);
    pts.push(hi.max(xs[n - 1]));
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();

    let mut cum = Cumulative::new(m, pts[0]);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (u, v) = (w[0], w[1]);
        let c = xs.partition_point(|&x| x <= u) as f64 / n as f64;
        let (fu, gu) = cum.peek(u)?;
        let (fv, gv) = cum.peek(v)?;
        if (fu - c) * (fv - c) >= 0.0 {
            total += (gv - gu - c * (v - u)).abs();
        } else {
            let (mut a, mut b) = (u, v);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b || b - a <= 1e-15 * (1.0 + mid.abs()) {
                    break;
                }
                let (fm, _) = cum.peek(mid)?;
                if (fm - c) * (fu - c) > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let xs_ = 0.5 * (a + b);
            let (_, gx) = cum.peek(xs_)?;
            total += (gx - gu - c * (xs_ - u)).abs() + (gv - gx - c * (v - xs_)).abs();
        }
        cum.advance(v)?;
    }
    if !total.is_finite() {
        return Err(Error::Inconsistent(format!("W1 evaluated to {total}")));
    }
    Ok(total)
}
