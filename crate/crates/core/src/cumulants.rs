//! Exact moments and free cumulants in arbitrary-precision rationals, with a
//! contour-integral Taylor oracle for cross-checking closed-form transforms.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::measures::GfgParams;
use crate::transforms::C64;

pub type Rational = BigRational;

/// Largest order accepted by the exact routines.
pub const MAX_EXACT_ORDER: usize = 512;
/// Largest order for the block-profile enumeration.
pub const MAX_PROFILE_ORDER: usize = 16;

/// `(t, theta, lambda)` as exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactParams {
    pub t: Rational,
    pub theta: Rational,
    pub lambda: Rational,
}

impl ExactParams {
    pub fn new(t: Rational, theta: Rational, lambda: Rational) -> Result<Self> {
        if !t.is_positive() || !theta.is_positive() || lambda < Rational::one() {
            return Err(Error::InvalidParams(format!(
                "need t > 0, theta > 0, lambda >= 1; got ({t}, {theta}, {lambda})"
            )));
        }
        Ok(ExactParams { t, theta, lambda })
    }

    /// Exact binary value of each float.
    pub fn from_params(p: &GfgParams) -> Result<Self> {
        ExactParams::new(rational_from_f64(p.t)?, rational_from_f64(p.theta)?, rational_from_f64(p.lambda)?)
    }

    pub fn to_params(&self) -> Result<GfgParams> {
        GfgParams::new(to_f64(&self.t), to_f64(&self.theta), to_f64(&self.lambda))
    }
}

pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::InvalidParams(format!("{x} is not a finite number")))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3"`, `"-3/2"` or a plain decimal such as `"0.125"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidParams(format!("cannot read {s:?} as a rational number"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let digits = alloc::format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(bad());
    }
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        Rational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Narayana number `N(n, r) = C(n, r) C(n, r-1) / n`.
pub fn narayana(n: u64, r: u64) -> BigInt {
    if r == 0 || r > n {
        return BigInt::zero();
    }
    binomial(n, r) * binomial(n, r - 1) / BigInt::from(n)
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("order must be at least 1".into()));
    }
    if n > MAX_EXACT_ORDER {
        return Err(Error::Domain(format!("order {n} exceeds the exact-arithmetic cap {MAX_EXACT_ORDER}")));
    }
    Ok(())
}

/// `m_n(pi_{theta,lambda}) = theta^n sum_r N(n, r) lambda^r`.
pub fn mp_moment(theta: &Rational, lambda: &Rational, n: usize) -> Result<Rational> {
    check_order(n)?;
    let mut sum = Rational::zero();
    let mut lp = Rational::one();
    for r in 1..=n as u64 {
        lp = &lp * lambda;
        sum += Rational::from_integer(narayana(n as u64, r)) * &lp;
    }
    Ok(num_traits::pow(theta.clone(), n) * sum)
}

/// `kappa_1 = t`, `kappa_{n+1} = t m_n(pi_{theta,lambda})`.
pub fn free_cumulant(p: &ExactParams, n: usize) -> Result<Rational> {
    check_order(n)?;
    if n == 1 {
        return Ok(p.t.clone());
    }
    Ok(&p.t * mp_moment(&p.theta, &p.lambda, n - 1)?)
}

pub fn free_cumulants(p: &ExactParams, n: usize) -> Result<Vec<Rational>> {
    (1..=n).map(|k| free_cumulant(p, k)).collect()
}

/// Block profile `(r_1, ..., r_n)` of a partition of `{1..n}`: `r_i` blocks
/// of size `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockProfile {
    pub r: Vec<u64>,
}

impl BlockProfile {
    pub fn blocks(&self) -> u64 {
        self.r.iter().sum()
    }

    pub fn elements(&self) -> u64 {
        self.r.iter().enumerate().map(|(i, r)| (i as u64 + 1) * r).sum()
    }

    /// Number of non-crossing partitions with this profile,
    /// `n! / (r_1! ... r_n! (n - m + 1)!)`.
    pub fn weight(&self) -> BigInt {
        let n = self.elements();
        let m = self.blocks();
        let den = self.r.iter().fold(factorial(n - m + 1), |a, r| a * factorial(*r));
        factorial(n) / den
    }
}

/// Every profile with `sum i r_i = n`.
pub fn block_profiles(n: usize) -> Vec<BlockProfile> {
    fn rec(rem: usize, max_part: usize, r: &mut Vec<u64>, out: &mut Vec<BlockProfile>) {
        if rem == 0 {
            out.push(BlockProfile { r: r.clone() });
            return;
        }
        for part in (1..=max_part.min(rem)).rev() {
            r[part - 1] += 1;
            rec(rem - part, part, r, out);
            r[part - 1] -= 1;
        }
    }
    let mut out = Vec::new();
    let mut r = vec![0u64; n];
    rec(n, n, &mut r, &mut out);
    out
}

/// `m_n = sum over profiles of P(r) prod kappa_i^{r_i}`.
pub fn moment_by_profiles(kappa: &[Rational], n: usize) -> Result<Rational> {
    if n > MAX_PROFILE_ORDER {
        return Err(Error::Domain(format!("profile enumeration is capped at n = {MAX_PROFILE_ORDER}")));
    }
    if kappa.len() < n {
        return Err(Error::Domain("not enough cumulants".into()));
    }
    let mut sum = Rational::zero();
    for prof in block_profiles(n) {
        let mut term = Rational::from_integer(prof.weight());
        for (i, &ri) in prof.r.iter().enumerate() {
            if ri > 0 {
                term *= num_traits::pow(kappa[i].clone(), ri as usize);
            }
        }
        sum += term;
    }
    Ok(sum)
}

/// Moments `m_1..m_n` from `M(z) = 1 + sum_s kappa_s z^s M(z)^s`.
pub fn moments_by_recursion(kappa: &[Rational], n: usize) -> Result<Vec<Rational>> {
    if kappa.len() < n {
        return Err(Error::Domain("not enough cumulants".into()));
    }
    let mut m = vec![Rational::one()];
    for k in 1..=n {
        // [z^{k-s}] M^s uses only m_0..m_{k-1}
        let mut acc = Rational::zero();
        let mut pow = vec![Rational::one()];
        for s in 1..=k {
            let deg = k - s;
            let mut next = vec![Rational::zero(); deg.max(k - 1) + 1];
            for (i, a) in pow.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, b) in m.iter().enumerate() {
                    if i + j < next.len() {
                        next[i + j] += a * b;
                    }
                }
            }
            pow = next;
            if deg < pow.len() {
                acc += &kappa[s - 1] * &pow[deg];
            }
        }
        m.push(acc);
    }
    m.remove(0);
    Ok(m)
}

/// `m_n(mu_{t,theta,lambda})`, evaluated by two independent routes which
/// must agree exactly (the profile route only for `n <= 16`).
pub fn moment(p: &ExactParams, n: usize) -> Result<Rational> {
    check_order(n)?;
    let kappa = free_cumulants(p, n)?;
    let rec = moments_by_recursion(&kappa, n)?.pop().unwrap_or_default();
    if n <= MAX_PROFILE_ORDER {
        let prof = moment_by_profiles(&kappa, n)?;
        if prof != rec {
            return Err(Error::Inconsistent(format!("moment {n}: profile sum {prof} but recursion {rec}")));
        }
    }
    Ok(rec)
}

pub fn moments(p: &ExactParams, n: usize) -> Result<Vec<Rational>> {
    check_order(n)?;
    let kappa = free_cumulants(p, n)?;
    let rec = moments_by_recursion(&kappa, n)?;
    for k in 1..=n.min(MAX_PROFILE_ORDER) {
        let prof = moment_by_profiles(&kappa, k)?;
        if prof != rec[k - 1] {
            return Err(Error::Inconsistent(format!("moment {k}: profile sum {prof} but recursion {}", rec[k - 1])));
        }
    }
    Ok(rec)
}

/// Free cumulants of the background driving process:
/// `kappa_1 = t`, `kappa_n = t (2 theta)^{n-1} (2n-3)!! / (n-1)!`.
pub fn bdlp_cumulant(t: &Rational, theta: &Rational, n: usize) -> Result<Rational> {
    check_order(n)?;
    if n == 1 {
        return Ok(t.clone());
    }
    let dfact = (1..=(2 * n as u64 - 3)).step_by(2).fold(BigInt::one(), |a, k| a * BigInt::from(k));
    let two_theta = theta * Rational::from_integer(BigInt::from(2));
    Ok(t * num_traits::pow(two_theta, n - 1) * Rational::new(dfact, factorial(n as u64 - 1)))
}

/// Correlation of the free gamma process at times `s` and `t`, from
/// `Cov = kappa_2(mu_{min(s,t),theta,lambda})` and the variances.
pub fn process_correlation(s: f64, t: f64, theta: f64, lambda: f64) -> Result<f64> {
    if !(s > 0.0 && t > 0.0 && theta > 0.0 && lambda >= 1.0) {
        return Err(Error::InvalidParams(format!(
            "need s, t, theta > 0 and lambda >= 1; got ({s}, {t}, {theta}, {lambda})"
        )));
    }
    let k2 = |u: f64| u * theta * lambda;
    let cov = k2(s.min(t));
    Ok(cov / libm::sqrt(k2(s) * k2(t)))
}

/// Taylor coefficients `a_1..a_n` with an error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Taylor {
    pub coeffs: Vec<C64>,
    pub error: f64,
}

/// Taylor coefficients of `f` (analytic on the disk of radius `r`, with
/// `f(0) = 0`) from discrete Cauchy integrals on `|z| = r/2`. The point
/// count is doubled once; the change is the error estimate.
pub fn series_oracle<F: Fn(C64) -> Result<C64>>(f: F, n: usize, r: f64, tol: f64) -> Result<Taylor> {
    if n == 0 || !(r > 0.0) {
        return Err(Error::Domain("need n >= 1 and a positive radius".into()));
    }
    let rho = 0.5 * r;
    let coeffs_at = |m: usize| -> Result<(Vec<C64>, f64)> {
        let vals: Vec<C64> =
            (0..m).map(|j| f(C64::from_polar(rho, 2.0 * PI * j as f64 / m as f64))).collect::<Result<_>>()?;
        let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut out = Vec::with_capacity(n);
        for k in 1..=n {
            let mut s = C64::new(0.0, 0.0);
            for (j, v) in vals.iter().enumerate() {
                let ang = -2.0 * PI * ((j * k) % m) as f64 / m as f64;
                s += v * C64::from_polar(1.0, ang);
            }
            out.push(s / (m as f64 * libm::pow(rho, k as f64)));
        }
        Ok((out, scale))
    };
    let m = (4 * n).max(64);
    let (a, scale) = coeffs_at(m)?;
    let (b, _) = coeffs_at(2 * m)?;
    let mut err: f64 = 0.0;
    for (k, (x, y)) in a.iter().zip(b.iter()).enumerate() {
        let scaled = (x - y).norm() * libm::pow(rho, (k + 1) as f64);
        err = err.max(scaled);
        if scaled > tol * scale {
            return Err(Error::NonConvergence(format!(
                "coefficient {} moved by {} when doubling the contour points",
                k + 1,
                (x - y).norm()
            )));
        }
    }
    Ok(Taylor { coeffs: b, error: err })
}

/// Exact rational as a decimal or fraction string (`"3/2"`, `"2"`).
pub fn format_rational(r: &Rational) -> alloc::string::String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        let g = r.numer().gcd(r.denom());
        debug_assert!(g.is_one());
        r.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| rat(x, 1)).collect()
    }

    #[test]
    fn catalan_moments() {
        let one = rat(1, 1);
        let m: Vec<Rational> = (1..=4).map(|n| mp_moment(&one, &one, n).unwrap()).collect();
        assert_eq!(m, ints(&[1, 2, 5, 14]));
        assert_eq!(mp_moment(&one, &rat(2, 1), 2).unwrap(), rat(6, 1));
    }

    #[test]
    fn profile_weights_count_noncrossing_partitions() {
        // sum of weights over profiles is the Catalan number
        for (n, c) in [(1, 1), (2, 2), (3, 5), (4, 14), (5, 42), (6, 132)] {
            let s = block_profiles(n).iter().fold(BigInt::zero(), |a, p| a + p.weight());
            assert_eq!(s, BigInt::from(c));
        }
    }

    #[test]
    fn bdlp_values() {
        let one = rat(1, 1);
        let v: Vec<Rational> = (1..=4).map(|n| bdlp_cumulant(&one, &one, n).unwrap()).collect();
        assert_eq!(v, ints(&[1, 2, 6, 20]));
    }

    #[test]
    fn parse() {
        assert_eq!(parse_rational("3/2").unwrap(), rat(3, 2));
        assert_eq!(parse_rational("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_rational("-2").unwrap(), rat(-2, 1));
        assert_eq!(parse_rational("1e-2").unwrap(), rat(1, 100));
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn series_of_geometric() {
        let t = series_oracle(|z| Ok(z / (C64::new(1.0, 0.0) - z)), 4, 1.0, 1e-10).unwrap();
        for c in t.coeffs {
            assert!((c - C64::new(1.0, 0.0)).norm() < 1e-13);
        }
    }
}
