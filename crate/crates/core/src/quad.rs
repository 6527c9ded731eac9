//! Numerical quadrature: double-exponential (tanh-sinh) rules for endpoint
//! singularities, adaptive Gauss-Kronrod for smooth integrands and the
//! Chebyshev-Gauss rule for the arcsine weight.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Integral value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

const TS_MAX_LEVEL: u32 = 11;
const TS_T_MAX: f64 = 6.6;

/// Tanh-sinh quadrature on a finite interval `[a, b]`.
///
/// The integrand is never evaluated at the endpoints, so integrable
/// algebraic or logarithmic singularities there are fine. Convergence is
/// declared when two successive step halvings agree to `tol` relative to
/// the L1 norm of the integrand.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    if a > b {
        let e = tanh_sinh(f, b, a, tol)?;
        return Ok(Estimate { value: -e.value, error: e.error });
    }
    let half = 0.5 * (b - a);
    let mid = a + half;

    let node_sum = |f: &mut F, t: f64| -> Result<(f64, f64)> {
        let u = FRAC_PI_2 * libm::sinh(t);
        let e = libm::exp(-2.0 * u);
        let delta = 2.0 * e / (1.0 + e);
        let w = FRAC_PI_2 * libm::cosh(t) * 4.0 * e / ((1.0 + e) * (1.0 + e));
        let mut s = 0.0;
        let mut s_abs = 0.0;
        let off = half * delta;
        let xl = a + off;
        if xl > a && xl < b {
            let v = f(xl);
            if !v.is_finite() {
                return Err(Error::Quadrature { value: f64::NAN, error: f64::INFINITY });
            }
            s += w * v;
            s_abs += w * v.abs();
        }
        let xr = b - off;
        if xr < b && xr > a {
            let v = f(xr);
            if !v.is_finite() {
                return Err(Error::Quadrature { value: f64::NAN, error: f64::INFINITY });
            }
            s += w * v;
            s_abs += w * v.abs();
        }
        Ok((s, s_abs))
    };

    let f0 = f(mid);
    if !f0.is_finite() {
        return Err(Error::Quadrature { value: f64::NAN, error: f64::INFINITY });
    }
    let mut sum = FRAC_PI_2 * f0;
    let mut sum_abs = FRAC_PI_2 * f0.abs();
    let mut k = 1;
    while (k as f64) <= TS_T_MAX {
        let (s, sa) = node_sum(&mut f, k as f64)?;
        sum += s;
        sum_abs += sa;
        k += 1;
    }
    let mut h = 1.0;
    let mut prev = half * h * sum;
    let mut prev_err = f64::INFINITY;
    for level in 1..=TS_MAX_LEVEL {
        h *= 0.5;
        let mut t = h;
        while t <= TS_T_MAX {
            let (s, sa) = node_sum(&mut f, t)?;
            sum += s;
            sum_abs += sa;
            t += 2.0 * h;
        }
        let cur = half * h * sum;
        let l1 = half * h * sum_abs;
        let err = (cur - prev).abs();
        if level >= 3 && (err <= tol.max(64.0 * f64::EPSILON) * l1 || err == 0.0) {
            // the rule doubles its correct digits per level, so the
            // previous difference squared is a realistic bound
            let refined = if prev_err.is_finite() && prev_err > 0.0 { err.min(err * err / prev_err) } else { err };
            return Ok(Estimate { value: cur, error: refined.max(f64::EPSILON * l1) });
        }
        prev_err = err;
        prev = cur;
    }
    Err(Error::Quadrature { value: prev, error: prev_err })
}

/// Tanh-sinh on `[a, +inf)` after the substitution `x = a + s/(1-s)`.
pub fn tanh_sinh_to_inf<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: f64) -> Result<Estimate> {
    tanh_sinh(
        |s| {
            let r = 1.0 - s;
            let x = a + s / r;
            if !x.is_finite() {
                return 0.0;
            }
            f(x) / (r * r)
        },
        0.0,
        1.0,
        tol,
    )
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on `[a, b]`.
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut parts: Vec<(f64, f64, f64, f64)> = alloc::vec![(a, b, v, e)];
    let mut total = v;
    let mut total_err = e;
    for _ in 0..4000 {
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(Estimate { value: total, error: total_err });
        }
        let (idx, _) = parts.iter().enumerate().fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, pv, pe) = parts.swap_remove(idx);
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        let (v1, e1) = gk15(&mut f, lo, m);
        let (v2, e2) = gk15(&mut f, m, hi);
        total += v1 + v2 - pv;
        total_err += e1 + e2 - pe;
        parts.push((lo, m, v1, e1));
        parts.push((m, hi, v2, e2));
    }
    if total_err <= abs_tol.max(rel_tol * total.abs()) {
        Ok(Estimate { value: total, error: total_err })
    } else {
        Err(Error::Quadrature { value: total, error: total_err })
    }
}

/// `(1/pi) * integral of f(x) / sqrt((b-x)(x-a))` over `[a, b]` with an
/// `n`-point Chebyshev-Gauss rule (exact weight, equal node weights).
pub fn chebyshev_gauss<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut s = 0.0;
    for k in 0..n {
        let x = mid + half * libm::cos((2 * k + 1) as f64 * PI / (2 * n) as f64);
        s += f(x);
    }
    s / n as f64
}

/// Chebyshev-Gauss with node tripling until two rules agree to `tol`.
pub fn chebyshev_gauss_adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    let mut n = 16;
    let mut prev = chebyshev_gauss(&mut f, a, b, n);
    while n < 1 << 20 {
        n *= 3;
        let cur = chebyshev_gauss(&mut f, a, b, n);
        let err = (cur - prev).abs();
        if err <= tol * (1.0 + cur.abs()) {
            return Ok(Estimate { value: cur, error: err });
        }
        prev = cur;
    }
    Err(Error::Quadrature { value: prev, error: f64::NAN })
}

/// Accepts a non-converged estimate whose error is below `abs_err`.
pub fn lenient(r: Result<Estimate>, abs_err: f64) -> Result<Estimate> {
    match r {
        Err(Error::Quadrature { value, error }) if value.is_finite() && error < abs_err => {
            Ok(Estimate { value, error })
        }
        other => other,
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub(crate) fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if hi - lo <= xtol || m <= lo || m >= hi {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = m;
            flo = fm;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_sinh_handles_endpoint_singularities() {
        let e = tanh_sinh(|x| 1.0 / libm::sqrt(x), 0.0, 1.0, 1e-12).unwrap();
        assert!((e.value - 2.0).abs() < 1e-12);
        let e = tanh_sinh(libm::log, 0.0, 1.0, 1e-12).unwrap();
        assert!((e.value + 1.0).abs() < 1e-12);
        let e = tanh_sinh(|x| libm::sqrt(1.0 - x * x), -1.0, 1.0, 1e-12).unwrap();
        assert!((e.value - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite() {
        let e = tanh_sinh_to_inf(|x| libm::exp(-x), 0.0, 1e-12).unwrap();
        assert!((e.value - 1.0).abs() < 1e-11);
        let e = tanh_sinh_to_inf(|x| 2.0 / ((x + 1.0) * (x + 1.0) * (x + 1.0)), 0.0, 1e-12).unwrap();
        assert!((e.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn kronrod_polynomial_exact() {
        let e = gauss_kronrod(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((e.value - 0.0).abs() < 1e-13);
        let e = gauss_kronrod(libm::sin, 0.0, PI, 1e-13, 1e-13).unwrap();
        assert!((e.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_weight() {
        // (1/pi) * int_{-1}^{1} x^2 / sqrt(1-x^2) = 1/2
        let v = chebyshev_gauss(|x| x * x, -1.0, 1.0, 8);
        assert!((v - 0.5).abs() < 1e-15);
    }
}
