//! Cauchy, R and S transforms in closed form, Stieltjes inversion and a
//! quadrature-based S-transform.
//!
//! Square roots follow the convention `arg(w) ∈ (0, 2π)`; see
//! [`principal_sqrt`]. R-transforms are taken on the branch analytic at the
//! origin with `R(0) = 0`.

use alloc::boxed::Box;
use alloc::format;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::{self, FreeMeixnerParams, GfgParams, MpParams, SpectralMeasure};
use crate::quad::Estimate;

pub type C64 = Complex64;

/// Square root with `arg(w)` taken in `(0, 2π)`, so `Im >= 0` always.
///
/// On the positive real axis the value is the limit from above the cut
/// (`principal_sqrt(4) = 2`); `principal_sqrt(0) = 0`.
pub fn principal_sqrt(w: C64) -> C64 {
    let (x, y) = (w.re, w.im);
    if x == 0.0 && y == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let r = libm::hypot(x, y);
    let s = libm::sqrt(0.5 * (r + x.abs()));
    if x >= 0.0 {
        let v = C64::new(s, y / (2.0 * s));
        if y < 0.0 {
            -v
        } else {
            v
        }
    } else {
        C64::new(y / (2.0 * s), s)
    }
}

/// Cauchy transform `G(z)` of `mu_{t,theta,lambda}` for `Im z > 0`.
pub fn cauchy_transform(p: &GfgParams, z: C64) -> Result<C64> {
    if !(z.im > 0.0) {
        return Err(Error::Domain(format!("Cauchy transform needs Im z > 0, got {z}")));
    }
    Ok(cauchy_closed_form(p, z))
}

pub(crate) fn cauchy_closed_form(p: &GfgParams, z: C64) -> C64 {
    let s = measures::support(p);
    let (t, th, l) = (p.t, p.theta, p.lambda);
    let root = principal_sqrt((z - s.lo) * (z - s.hi));
    let num = z * (t + 2.0 * th) - t * (t - th * (l - 1.0)) - root * t;
    num / (z * (z + p.shift()) * (2.0 * th))
}

/// Cauchy transform of the centered free Meixner law `nu_{s,a,b}`.
pub fn meixner_cauchy(q: &FreeMeixnerParams, z: C64) -> Result<C64> {
    if !(z.im > 0.0) {
        return Err(Error::Domain(format!("Cauchy transform needs Im z > 0, got {z}")));
    }
    let (s, a, b) = (q.s, q.a, q.b);
    if s == 0.0 {
        return Ok(z.inv());
    }
    let root = principal_sqrt((z - a) * (z - a) - 4.0 * (s + b));
    let num = z * (s + 2.0 * b) + s * a - root * s;
    Ok(num / ((z * z * b + z * (s * a) + s * s) * 2.0))
}

/// Epsilon ladder and acceptance tolerance for [`stieltjes_invert`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    pub eps: [f64; 3],
    pub tol: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig { eps: [1e-3, 1e-4, 1e-5], tol: 1e-6 }
    }
}

/// `lim_{eps -> 0} -Im G(x + i eps) / pi` by two levels of Richardson
/// extrapolation over a geometric epsilon ladder.
pub fn stieltjes_invert<G: Fn(C64) -> C64>(g: G, x: f64, cfg: &InversionConfig) -> Result<Estimate> {
    let f = |e: f64| -g(C64::new(x, e)).im / core::f64::consts::PI;
    let [e0, e1, e2] = cfg.eps;
    let (f0, f1, f2) = (f(e0), f(e1), f(e2));
    // the smoothing error is linear in eps to leading order, then quadratic
    let r = e0 / e1;
    let a = (r * f1 - f0) / (r - 1.0);
    let r2 = e1 / e2;
    let b = (r2 * f2 - f1) / (r2 - 1.0);
    // a and b carry second-order errors proportional to e0 e1 and e1 e2
    let rr = e0 / e2;
    let rich = (rr * b - a) / (rr - 1.0);
    let error = (rich - b).abs();
    if !rich.is_finite() || error > cfg.tol * (1.0 + rich.abs()) {
        return Err(Error::NonConvergence(format!(
            "Stieltjes inversion at x = {x}: extrapolants {a} and {b} disagree (estimate {rich}, spread {error})"
        )));
    }
    Ok(Estimate { value: rich, error })
}

/// Laws with a closed-form R-transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RFamily {
    Gfg(GfgParams),
    Mp(MpParams),
    /// Background driving process `Z_t`, parameters `(t, theta)`.
    Bdlp {
        t: f64,
        theta: f64,
    },
    /// Meixner-type free beta law `mu_p`.
    FreeBeta {
        p: f64,
    },
}

/// First real branch point of the generalized free gamma R-transform.
pub fn gfg_r_branch_point(theta: f64, lambda: f64) -> f64 {
    let s = libm::sqrt(lambda) + 1.0;
    1.0 / (theta * s * s)
}

/// `R_{mu_{1,theta,lambda}}`, so that `R_{mu_{t,theta,lambda}} = t * unit`.
pub fn gfg_unit_r(theta: f64, lambda: f64, z: C64) -> Result<C64> {
    if z.im > 0.0 {
        return gfg_unit_r(theta, lambda, z.conj()).map(|v| v.conj());
    }
    if z.im == 0.0 && z.re >= gfg_r_branch_point(theta, lambda) {
        return Err(Error::Branch(format!(
            "R-transform is real only left of {}, got z = {}",
            gfg_r_branch_point(theta, lambda),
            z.re
        )));
    }
    let az = z * (theta * (1.0 - lambda)) + 1.0;
    let w = az * az - z * (4.0 * theta);
    let root = if z.im == 0.0 { C64::new(libm::sqrt(w.re.max(0.0)), 0.0) } else { principal_sqrt(w) };
    // (1 + az - root) / (2 theta) rewritten without cancellation near z = 0
    Ok(z * 2.0 / (az + root))
}

pub fn r_transform(f: &RFamily, z: C64) -> Result<C64> {
    match *f {
        RFamily::Gfg(p) => Ok(gfg_unit_r(p.theta, p.lambda, z)? * p.t),
        RFamily::Mp(q) => {
            let d = C64::new(1.0, 0.0) - z * q.theta;
            if d.norm() == 0.0 {
                return Err(Error::Domain(format!("pole of the MP R-transform at z = {z}")));
            }
            Ok(z * (q.theta * q.lambda) / d)
        }
        RFamily::Bdlp { t, theta } => {
            if z.im > 0.0 {
                return r_transform(f, z.conj()).map(|v| v.conj());
            }
            let w = C64::new(1.0, 0.0) - z * (4.0 * theta);
            if z.im == 0.0 && w.re <= 0.0 {
                return Err(Error::Branch(format!("BDLP R-transform needs z < {}", 0.25 / theta)));
            }
            Ok(z * t / principal_sqrt(w))
        }
        RFamily::FreeBeta { p } => {
            let p3 = p * p * p;
            let w = z * z * ((3.0 * p + 2.0) * (3.0 * p + 2.0)) - z * (2.0 * p3 * p * p) + p3 * p3 * p * p;
            if w.re <= 0.0 {
                return Err(Error::Branch(format!("free beta R-transform: radicand {w} left the right half-plane")));
            }
            // [p(z - p^3) + sqrt(w)] / (2z) with the cancellation removed
            let root = w.sqrt();
            Ok(z * (2.0 * (2.0 * p + 1.0) * (p + 1.0)) / (root + (C64::new(p3, 0.0) - z) * p))
        }
    }
}

/// Laws with a closed-form S-transform on a real interval `(lower, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum SFamily {
    Gfg(GfgParams),
    Mp(MpParams),
    InverseMp(MpParams),
    Fbp {
        a: f64,
        b: f64,
    },
    FreeBeta {
        p: f64,
    },
    /// `mu^{<-1>}` of an atomless base law.
    Reversed(Box<SFamily>),
}

/// Left end of the interval on which the S-transform is defined.
pub fn s_domain_lower(f: &SFamily) -> f64 {
    match f {
        SFamily::Gfg(p) => -1.0 + measures::atom_mass(p),
        SFamily::Mp(q) => -(q.lambda.min(1.0)),
        SFamily::InverseMp(_) => -1.0,
        SFamily::Fbp { a, .. } => -(a.min(1.0)),
        SFamily::FreeBeta { .. } => -1.0,
        SFamily::Reversed(_) => -1.0,
    }
}

pub fn s_transform(f: &SFamily, z: f64) -> Result<f64> {
    let lower = s_domain_lower(f);
    if !(z > lower && z <= 0.0) {
        return Err(Error::Domain(format!("S-transform defined on ({lower}, 0], got z = {z}")));
    }
    Ok(match f {
        SFamily::Gfg(p) => {
            let (t, th) = (p.t, p.theta);
            (t - th * z) / (t * (t + th * (p.lambda - 1.0) * z))
        }
        SFamily::Mp(q) => 1.0 / (q.theta * (q.lambda + z)),
        SFamily::InverseMp(q) => {
            if q.lambda < 1.0 {
                return Err(Error::InvalidParams(format!("reversal of MP needs lambda >= 1, got {}", q.lambda)));
            }
            q.theta * (q.lambda - 1.0 - z)
        }
        SFamily::Fbp { a, b } => {
            if !(*a > 0.0 && *b > 1.0) {
                return Err(Error::InvalidParams(format!("free beta prime needs a > 0, b > 1, got ({a}, {b})")));
            }
            (b - 1.0 - z) / (a + z)
        }
        SFamily::FreeBeta { p } => {
            let p2 = p * p;
            p2 * p2 / ((1.0 + p + z) * (2.0 * p + 1.0 - z))
        }
        SFamily::Reversed(base) => {
            if s_domain_lower(base) > -1.0 {
                return Err(Error::Domain("reversal needs an atomless base law".into()));
            }
            let w = -z - 1.0;
            if w <= -1.0 {
                return Err(Error::Domain(format!("reversed S-transform undefined at z = {z}")));
            }
            1.0 / s_transform(base, w)?
        }
    })
}

/// `psi(u) = integral of u x / (1 - u x) d mu(x)` for `u < 0`.
pub fn psi(m: &SpectralMeasure, u: f64) -> Result<(f64, f64)> {
    let tol = 1e-13;
    let v = m.integrate_density(|x| u * x / (1.0 - u * x), m.support.lo, m.support.hi, tol)?;
    let d = m.integrate_density(|x| x / ((1.0 - u * x) * (1.0 - u * x)), m.support.lo, m.support.hi, tol)?;
    Ok((v.value, d.value))
}

/// S-transform by quadrature of `psi` on the negative half-line and a
/// safeguarded Newton inversion: `S(z) = (1 + z)/z * psi^{-1}(z)`.
pub fn numeric_s_transform(m: &SpectralMeasure, z: f64) -> Result<f64> {
    if m.support.lo < 0.0 {
        return Err(Error::Domain("numeric S-transform needs a measure on [0, inf)".into()));
    }
    let lower = -1.0 + m.atom0;
    if !(z > lower && z < 0.0) {
        return Err(Error::Domain(format!("z must lie in ({lower}, 0), got {z}")));
    }
    let mean = m.moment(1)?;
    if !(mean > 0.0) {
        return Err(Error::Domain("measure must have a positive mean".into()));
    }
    let mut hi = 0.0;
    let mut lo = -1.0 / mean;
    let mut expansions = 0;
    loop {
        let (v, _) = psi(m, lo)?;
        if v < z {
            break;
        }
        hi = lo;
        lo *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::NonConvergence(format!(
                "psi inversion: no bracket for z = {z}; psi({lo}) = {v} still above"
            )));
        }
    }
    let mut u = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, d) = psi(m, u)?;
        let r = v - z;
        if r.abs() <= 1e-15 * (1.0 + z.abs()) {
            return Ok((1.0 + z) / z * u);
        }
        if r > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let newton = u - r / d;
        u = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (hi - lo).abs() <= 1e-15 * lo.abs() {
            return Ok((1.0 + z) / z * u);
        }
    }
    Err(Error::NonConvergence(format!("psi inversion stalled in [{lo}, {hi}] for z = {z}")))
}

/// `|R(z S(z)) - z|` from the closed forms.
pub fn functional_identity_rs(f: &RFamily, z: f64) -> Result<f64> {
    let s = match *f {
        RFamily::Gfg(p) => SFamily::Gfg(p),
        RFamily::Mp(q) => SFamily::Mp(q),
        RFamily::FreeBeta { p } => SFamily::FreeBeta { p },
        RFamily::Bdlp { .. } => return Err(Error::Domain("no closed-form S-transform for this law".into())),
    };
    let w = z * s_transform(&s, z)?;
    Ok((r_transform(f, C64::new(w, 0.0))? - z).norm())
}

/// Mixed tolerance comparison `|a - b| <= atol + rtol max(|a|, |b|)`.
pub fn close(a: C64, b: C64, atol: f64, rtol: f64) -> bool {
    (a - b).norm() <= atol + rtol * a.norm().max(b.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_branch_examples() {
        let v = principal_sqrt(C64::new(-1.0, 0.0));
        assert!((v - C64::new(0.0, 1.0)).norm() < 1e-16);
        let v = principal_sqrt(C64::new(0.0, 1.0));
        let h = libm::sqrt(0.5);
        assert!((v - C64::new(h, h)).norm() < 1e-15);
        assert_eq!(principal_sqrt(C64::new(4.0, 0.0)), C64::new(2.0, 0.0));
        let v = principal_sqrt(C64::new(4.0, 1e-12));
        assert!((v - C64::new(2.0, 0.0)).norm() < 1e-12);
        // lower half-plane lands in the second quadrant
        let v = principal_sqrt(C64::new(1.0, -1.0));
        assert!(v.re < 0.0 && v.im > 0.0);
        assert!((v * v - C64::new(1.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn mp_r_example() {
        let r = r_transform(&RFamily::Mp(MpParams::new(1.0, 1.0).unwrap()), C64::new(-1.0, 0.0)).unwrap();
        assert!((r - C64::new(-0.5, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn gfg_s_example() {
        let p = GfgParams::new(1.0, 1.0, 1.0).unwrap();
        assert!((s_transform(&SFamily::Gfg(p), -0.5).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn literal_r_forms_agree_with_stable_forms() {
        let p = GfgParams::new(2.0, 0.5, 3.0).unwrap();
        let z = C64::new(-0.3, 0.0);
        let a = 1.0 + p.theta * (1.0 - p.lambda) * z.re;
        let lit = p.t * (a - libm::sqrt(a * a - 4.0 * p.theta * z.re)) / (2.0 * p.theta);
        let v = r_transform(&RFamily::Gfg(p), z).unwrap();
        assert!((v.re - lit).abs() < 1e-14);
        let pb: f64 = 0.7;
        let z: f64 = -0.05;
        let w = (3.0 * pb + 2.0).powi(2) * z * z - 2.0 * pb.powi(5) * z + pb.powi(8);
        let lit = (pb * (z - pb.powi(3)) + libm::sqrt(w)) / (2.0 * z);
        let v = r_transform(&RFamily::FreeBeta { p: pb }, C64::new(z, 0.0)).unwrap();
        assert!((v.re - lit).abs() < 1e-12);
    }

    #[test]
    fn branch_error_past_first_branch_point() {
        let p = GfgParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(r_transform(&RFamily::Gfg(p), C64::new(0.3, 0.0)), Err(Error::Branch(_))));
    }
}
