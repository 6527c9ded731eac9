//! Finite free polynomials: Jacobi and Bessel families in normalized
//! elementary symmetric coordinates, the degree-`d` approximants of
//! `mu_{t,theta,lambda}`, a real-root solver and convergence diagnostics.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cumulants::{binomial, ExactParams, Rational};
use crate::error::{Error, Result};
use crate::measures::{GfgParams, SpectralMeasure};
use crate::stats;

/// `(x)_n = x (x - 1) ... (x - n + 1)`.
pub fn falling_factorial(x: &Rational, n: usize) -> Rational {
    let mut acc = Rational::one();
    let mut y = x.clone();
    for _ in 0..n {
        acc *= &y;
        y -= Rational::one();
    }
    acc
}

pub fn falling_factorial_f64(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |a, i| a * (x - i as f64))
}

/// Monic `p(x) = sum_k (-1)^k C(d, k) e_k x^{d-k}` stored through its
/// normalized coefficients `e_0 = 1, e_1, ..., e_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonicPolynomial {
    e_tilde: Vec<Rational>,
}

impl MonicPolynomial {
    pub fn from_e_tilde(e_tilde: Vec<Rational>) -> Result<Self> {
        if e_tilde.len() < 2 || !e_tilde[0].is_one() {
            return Err(Error::InvalidParams("need degree >= 1 and e_0 = 1".into()));
        }
        Ok(MonicPolynomial { e_tilde })
    }

    pub fn degree(&self) -> usize {
        self.e_tilde.len() - 1
    }

    pub fn e_tilde(&self) -> &[Rational] {
        &self.e_tilde
    }

    pub fn e_tilde_f64(&self) -> Vec<f64> {
        self.e_tilde.iter().map(crate::cumulants::to_f64).collect()
    }

    /// Coefficients of `x^d, x^{d-1}, ..., x^0`.
    pub fn coefficients(&self) -> Vec<Rational> {
        let d = self.degree() as u64;
        self.e_tilde
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let c = Rational::from_integer(binomial(d, k as u64)) * e;
                if k % 2 == 1 {
                    -c
                } else {
                    c
                }
            })
            .collect()
    }

    /// `(-1)^d p(-x)`.
    pub fn reflect(&self) -> Self {
        let e = self.e_tilde.iter().enumerate().map(|(k, e)| if k % 2 == 1 { -e } else { e.clone() }).collect();
        MonicPolynomial { e_tilde: e }
    }

    /// `c^d p(x/c)`, whose roots are `c` times those of `p`.
    pub fn dilate(&self, c: &Rational) -> Result<Self> {
        if c.is_zero() {
            return Err(Error::Domain("dilation by zero".into()));
        }
        let mut ck = Rational::one();
        let mut e = Vec::with_capacity(self.e_tilde.len());
        for x in &self.e_tilde {
            e.push(x * &ck);
            ck *= c;
        }
        Ok(MonicPolynomial { e_tilde: e })
    }

    /// `p'/d`: same normalized coefficients, one degree lower.
    pub fn derivative_normalized(&self) -> Option<Self> {
        if self.degree() < 2 {
            return None;
        }
        Some(MonicPolynomial { e_tilde: self.e_tilde[..self.e_tilde.len() - 1].to_vec() })
    }
}

fn ratio_family(d: usize, num: impl Fn(usize) -> Rational, ad: &Rational) -> Result<MonicPolynomial> {
    if d == 0 {
        return Err(Error::InvalidParams("degree must be at least 1".into()));
    }
    let mut e = Vec::with_capacity(d + 1);
    e.push(Rational::one());
    let mut den = Rational::one();
    let mut y = ad.clone();
    for k in 1..=d {
        den *= &y;
        if den.is_zero() {
            return Err(Error::Pole { k });
        }
        y -= Rational::one();
        e.push(num(k) / &den);
    }
    Ok(MonicPolynomial { e_tilde: e })
}

/// `e_k(J_d^{(a,b)}) = (bd)_k / (ad)_k`.
pub fn jacobi_poly(a: &Rational, b: &Rational, d: usize) -> Result<MonicPolynomial> {
    let dd = Rational::from_integer(BigInt::from(d));
    let bd = b * &dd;
    ratio_family(d, |k| falling_factorial(&bd, k), &(a * dd))
}

/// `e_k(B_d^{(a)}) = d^k / (ad)_k`.
pub fn bessel_poly(a: &Rational, d: usize) -> Result<MonicPolynomial> {
    let dd = Rational::from_integer(BigInt::from(d));
    ratio_family(d, |k| num_traits::pow(dd.clone(), k), &(a * &dd))
}

/// The degree-`d` approximant of `mu_{t,theta,lambda}`:
/// `D_{t(lambda-1)}` of the reflected Jacobi polynomial with
/// `A = -t/theta`, `B = t/(theta(lambda-1)) + 1/d`, or for `lambda = 1`
/// `D_{t^2/theta}` of the reflected Bessel polynomial with `a = -t/theta`.
pub fn build_p_d(p: &ExactParams, d: usize) -> Result<MonicPolynomial> {
    let one = Rational::one();
    let r = &p.t / &p.theta;
    if p.lambda == one {
        let c = &p.t * &r;
        return bessel_poly(&(-r), d)?.reflect().dilate(&c);
    }
    let lm1 = &p.lambda - &one;
    let b = &r / &lm1 + Rational::new(BigInt::one(), BigInt::from(d));
    jacobi_poly(&(-r), &b, d)?.reflect().dilate(&(&p.t * lm1))
}

/// `e_{k-1} / e_k`; tends to `S_mu(-k/d)` along `k/d -> z`.
pub fn finite_s_ratio(p: &MonicPolynomial, k: usize) -> Result<f64> {
    if k == 0 || k > p.degree() {
        return Err(Error::Domain(format!("need 1 <= k <= {}, got {k}", p.degree())));
    }
    let e = p.e_tilde();
    if e[k].is_zero() {
        return Err(Error::Domain(format!("e_{k} vanishes")));
    }
    Ok(crate::cumulants::to_f64(&(&e[k - 1] / &e[k])))
}

/// Normalized coefficients rebuilt from roots.
pub fn e_tilde_from_roots(roots: &[f64]) -> Vec<f64> {
    let d = roots.len();
    let mut e = vec![0.0; d + 1];
    e[0] = 1.0;
    for (i, &r) in roots.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += r * e[k - 1];
        }
    }
    for (k, v) in e.iter_mut().enumerate() {
        *v /= binomial(d as u64, k as u64).to_f64().unwrap_or(f64::INFINITY);
    }
    e
}

/// Binary floating point with an arbitrary-size mantissa: `m * 2^e`.
#[derive(Debug, Clone)]
struct BigFloat {
    m: BigInt,
    e: i64,
}

impl BigFloat {
    fn zero() -> Self {
        BigFloat { m: BigInt::zero(), e: 0 }
    }

    fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return BigFloat::zero();
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let mant = if exp == 0 { frac << 1 } else { frac | (1u64 << 52) };
        let m = BigInt::from(mant);
        BigFloat { m: if x < 0.0 { -m } else { m }, e: exp - 1075 }
    }

    fn from_rational(r: &Rational, prec: u64) -> Self {
        if r.is_zero() {
            return BigFloat::zero();
        }
        let (n, d) = (r.numer(), r.denom());
        let s = prec as i64 + d.bits() as i64 - n.bits() as i64 + 1;
        let m = if s >= 0 { (n << s as usize) / d } else { n / (d << (-s) as usize) };
        BigFloat { m, e: -s }
    }

    /// Position of the leading bit, `floor(log2 |x|) + 1`.
    fn top(&self) -> i64 {
        self.m.bits() as i64 + self.e
    }

    fn abs(&self) -> BigFloat {
        BigFloat { m: self.m.abs(), e: self.e }
    }

    fn signum(&self) -> i32 {
        if self.m.is_zero() {
            0
        } else if self.m.is_negative() {
            -1
        } else {
            1
        }
    }

    /// `(mantissa, exponent)` with the mantissa an `f64` of magnitude in
    /// `[0.5, 1)`, so huge or tiny values stay representable.
    fn parts(&self) -> (f64, i64) {
        if self.m.is_zero() {
            return (0.0, 0);
        }
        let bits = self.m.bits();
        let sh = bits.saturating_sub(64);
        let top = (&self.m >> sh as usize).to_f64().unwrap_or(0.0);
        let mant = libm::ldexp(top, -((bits - sh) as i32));
        (mant, self.e + bits as i64)
    }

    /// `self / other` as an `f64`.
    fn ratio(&self, other: &BigFloat) -> f64 {
        let (ma, ea) = self.parts();
        let (mb, eb) = other.parts();
        if mb == 0.0 {
            return f64::INFINITY;
        }
        let de = (ea - eb).clamp(-2000, 2000) as i32;
        libm::ldexp(ma / mb, de)
    }
}

/// One level of the derivative chain, coefficients leading first.
struct Level {
    coeffs: Vec<BigFloat>,
    abs_coeffs: Vec<BigFloat>,
}

impl Level {
    fn new(p: &MonicPolynomial, prec: u64) -> Self {
        let coeffs: Vec<BigFloat> = p.coefficients().iter().map(|c| BigFloat::from_rational(c, prec)).collect();
        let abs_coeffs = coeffs.iter().map(|c| c.abs()).collect();
        Level { coeffs, abs_coeffs }
    }

    fn horner(cs: &[BigFloat], x: f64, prec: u64) -> BigFloat {
        let xf = BigFloat::from_f64(x);
        let xm = xf.m.to_i64().unwrap_or(0);
        let gap = prec as i64 + 2;
        let mut acc = cs[0].clone();
        for c in &cs[1..] {
            acc.m *= xm;
            acc.e += xf.e;
            if acc.m.is_zero() || c.top() > acc.top() + gap {
                acc = c.clone();
                continue;
            }
            if !c.m.is_zero() && acc.top() <= c.top() + gap {
                if acc.e >= c.e {
                    acc.m <<= (acc.e - c.e) as usize;
                    acc.e = c.e;
                    acc.m += &c.m;
                } else {
                    acc.m += &c.m << (c.e - acc.e) as usize;
                }
            }
            let bits = acc.m.bits();
            if bits > prec {
                let sh = bits - prec;
                acc.m >>= sh as usize;
                acc.e += sh as i64;
            }
        }
        acc
    }

    fn eval(&self, x: f64, prec: u64) -> BigFloat {
        Level::horner(&self.coeffs, x, prec)
    }

    /// `sum |c_k| |x|^{m-k}`.
    fn scale(&self, x: f64, prec: u64) -> BigFloat {
        Level::horner(&self.abs_coeffs, x.abs(), prec)
    }

    /// Whether the sign of `value` at `x` is resolved at this precision.
    fn sign_is_reliable(&self, value: &BigFloat, x: f64, prec: u64) -> bool {
        if value.m.is_zero() {
            return false;
        }
        let m = self.coeffs.len() as i64;
        let slack = 64 - (m.leading_zeros() as i64) + 4;
        value.top() > self.scale(x, prec).top() - prec as i64 + slack
    }
}

/// Real roots of a real-rooted polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    /// Ascending.
    pub roots: Vec<f64>,
    /// Largest `|p(r)| / sum |c_k| |r|^{d-k}` over the roots (backward error).
    pub residual_max: f64,
    /// Smallest gap between consecutive roots.
    pub min_gap: f64,
    /// Set when roots coincide or nearly coincide.
    pub multiplicity_warning: bool,
    /// Working precision in bits.
    pub precision: u64,
}

const MAX_PRECISION_DOUBLINGS: u32 = 4;

enum LevelFailure {
    Precision,
    Fatal(Error),
}

/// Roots of `p`, assumed real. Works down the derivative chain: the roots
/// of `p^{(j)}` separate those of `p^{(j-1)}`, so each root sits in a known
/// sign-change bracket and is refined by Illinois steps to adjacent
/// doubles, with every evaluation done in `128 + 3d`-bit arithmetic
/// (doubled when a sign cannot be resolved).
pub fn roots(p: &MonicPolynomial) -> Result<RootSet> {
    let d = p.degree() as u64;
    let mut prec = 128 + 3 * d;
    for attempt in 0..=MAX_PRECISION_DOUBLINGS {
        match roots_at(p, prec, attempt == MAX_PRECISION_DOUBLINGS) {
            Ok(r) => return Ok(r),
            Err(LevelFailure::Precision) => prec *= 2,
            Err(LevelFailure::Fatal(e)) => return Err(e),
        }
    }
    Err(Error::NonConvergence(format!("could not resolve root signs at {prec} bits")))
}

fn roots_at(p: &MonicPolynomial, prec: u64, last_try: bool) -> core::result::Result<RootSet, LevelFailure> {
    let d = p.degree();
    let e = p.e_tilde();
    let e1 = crate::cumulants::to_f64(&e[1]);
    let mut current = vec![e1];
    let mut warn = false;
    // spread of the roots: (m-1) (e1^2 - e2) is their variance at level m
    let var = if d >= 2 {
        let v = &e[1] * &e[1] - &e[2];
        if v.is_negative() {
            return Err(LevelFailure::Fatal(Error::NotRealRooted("e1^2 < e2".into())));
        }
        crate::cumulants::to_f64(&v)
    } else {
        0.0
    };
    for m in 2..=d {
        let poly = MonicPolynomial { e_tilde: e[..=m].to_vec() };
        let level = Level::new(&poly, prec);
        let radius = (m as f64 - 1.0) * libm::sqrt(var);
        let pad = radius * 1e-3 + 1e-12 * (e1.abs() + radius) + f64::MIN_POSITIVE;
        let lo = e1 - radius - pad;
        let hi = e1 + radius + pad;
        let mut edges = Vec::with_capacity(m + 1);
        edges.push(lo.min(current[0]));
        edges.extend(current.iter().copied());
        edges.push(hi.max(current[current.len() - 1]));
        let vals: Vec<BigFloat> = edges.iter().map(|&x| level.eval(x, prec)).collect();
        for (i, v) in vals.iter().enumerate() {
            let interior = i > 0 && i + 1 < edges.len();
            if !level.sign_is_reliable(v, edges[i], prec) && (!interior || !last_try) && !last_try {
                return Err(LevelFailure::Precision);
            }
        }
        let mut next = Vec::with_capacity(m);
        for i in 0..m {
            let (a, b) = (edges[i], edges[i + 1]);
            let (fa, fb) = (&vals[i], &vals[i + 1]);
            if fa.signum() == 0 || (!level.sign_is_reliable(fa, a, prec) && i > 0) {
                warn = true;
                next.push(a);
                continue;
            }
            if fb.signum() == 0 || (!level.sign_is_reliable(fb, b, prec) && i + 1 < m) {
                warn = true;
                next.push(b);
                continue;
            }
            if fa.signum() == fb.signum() {
                return Err(LevelFailure::Fatal(Error::NotRealRooted(format!(
                    "no sign change of the degree-{m} derivative on [{a}, {b}]"
                ))));
            }
            next.push(illinois(&level, a, b, fa.clone(), fb.clone(), prec));
        }
        current = next;
    }
    if d == 1 {
        current = vec![e1];
    }
    current.sort_by(|a, b| a.total_cmp(b));
    let full = Level::new(p, prec);
    let residual_max = current
        .iter()
        .map(|&r| {
            let s = full.scale(r, prec);
            if s.m.is_zero() {
                0.0
            } else {
                full.eval(r, prec).abs().ratio(&s)
            }
        })
        .fold(0.0, f64::max);
    let span = current[current.len() - 1] - current[0];
    let min_gap = current.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if min_gap <= 1e-10 * span || (d > 1 && span == 0.0) {
        warn = true;
    }
    Ok(RootSet { roots: current, residual_max, min_gap, multiplicity_warning: warn, precision: prec })
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let b = x.to_bits();
    f64::from_bits(if x > 0.0 { b + 1 } else { b - 1 })
}

/// Bracketed Illinois iteration down to adjacent doubles.
fn illinois(level: &Level, mut a: f64, mut b: f64, mut fa: BigFloat, mut fb: BigFloat, prec: u64) -> f64 {
    let sa = fa.signum();
    // scaled copies used only for interpolation weights
    let (mut wa, mut wb) = (1.0f64, 1.0f64);
    let mut side = 0i32;
    let mut stalls = 0;
    for _ in 0..2000 {
        if next_up(a) >= b {
            break;
        }
        let mid = a + 0.5 * (b - a);
        let mut x = {
            // x = a + (b - a) fa / (fa - fb), fa and fb of opposite signs
            let r = fa.ratio(&fb) * (wa / wb);
            let t = r / (r - 1.0);
            a + (b - a) * t
        };
        if !(x > a && x < b) || !x.is_finite() || stalls >= 3 {
            x = mid;
            stalls = 0;
        }
        if x <= a || x >= b {
            break;
        }
        let fx = level.eval(x, prec);
        let sx = fx.signum();
        if sx == 0 {
            return x;
        }
        let old_width = b - a;
        if sx == sa {
            a = x;
            fa = fx;
            wa = 1.0;
            if side == -1 {
                wb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            wb = 1.0;
            if side == 1 {
                wa *= 0.5;
            }
            side = 1;
        }
        if b - a > 0.5 * old_width {
            stalls += 1;
        } else {
            stalls = 0;
        }
    }
    if fa.abs().ratio(&fb.abs()) * wa / wb <= 1.0 {
        a
    } else {
        b
    }
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub d: usize,
    pub w1: f64,
    pub ks: f64,
    pub min_root: f64,
    pub max_root: f64,
    pub residual_max: f64,
    pub warning: Option<String>,
}

/// W1 and KS distances from the root distribution of `p_d` to
/// `mu_{t,theta,lambda}` for each `d`.
pub fn convergence_study(p: &GfgParams, dims: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if dims.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("dimensions must be strictly ascending".into()));
    }
    let exact = ExactParams::from_params(p)?;
    let target = SpectralMeasure::gfg(p);
    dims.iter()
        .map(|&d| {
            let poly = build_p_d(&exact, d)?;
            let rs = roots(&poly)?;
            Ok(ConvergenceRow {
                d,
                w1: stats::w1_distance(&rs.roots, &target)?,
                ks: stats::ks_distance(&rs.roots, &target)?,
                min_root: rs.roots[0],
                max_root: rs.roots[rs.roots.len() - 1],
                residual_max: rs.residual_max,
                warning: rs.multiplicity_warning.then(|| "roots nearly coincide".into()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::rat;

    #[test]
    fn falling_factorials() {
        assert_eq!(falling_factorial(&rat(3, 1), 2), rat(6, 1));
        assert_eq!(falling_factorial(&rat(-2, 1), 3), rat(-24, 1));
        assert_eq!(falling_factorial(&rat(5, 1), 0), rat(1, 1));
    }

    #[test]
    fn jacobi_example() {
        let j = jacobi_poly(&rat(-1, 1), &rat(3, 2), 2).unwrap();
        assert_eq!(j.e_tilde(), &[rat(1, 1), rat(-3, 2), rat(1, 1)]);
        assert_eq!(j.coefficients(), vec![rat(1, 1), rat(3, 1), rat(1, 1)]);
        let r = roots(&j.reflect()).unwrap();
        let s5 = libm::sqrt(5.0);
        assert!((r.roots[0] - (3.0 - s5) / 2.0).abs() < 1e-15);
        assert!((r.roots[1] - (3.0 + s5) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn pole_detected() {
        assert!(matches!(jacobi_poly(&rat(1, 2), &rat(1, 1), 4), Err(Error::Pole { k: 3 })));
    }

    #[test]
    fn repeated_root_warns() {
        let p = MonicPolynomial::from_e_tilde(vec![rat(1, 1); 6]).unwrap();
        let r = roots(&p).unwrap();
        assert!(r.multiplicity_warning);
        assert!(r.roots.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn bigfloat_round_trip() {
        let x = BigFloat::from_rational(&rat(1, 3), 200);
        let (m, e) = x.parts();
        assert!((libm::ldexp(m, e as i32) - 1.0 / 3.0).abs() < 1e-16);
    }
}
