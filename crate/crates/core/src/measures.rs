//! Parameter types and real-line descriptions of the measure families:
//! densities, atoms, supports, modes and cumulative distribution functions.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;

/// Parameters `(t, theta, lambda)` of the generalized free gamma law
/// `mu_{t,theta,lambda}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GfgParams {
    pub t: f64,
    pub theta: f64,
    pub lambda: f64,
}

impl GfgParams {
    pub fn new(t: f64, theta: f64, lambda: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidParams(format!("t must be positive, got {t}")));
        }
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::InvalidParams(format!("theta must be positive, got {theta}")));
        }
        if !(lambda.is_finite() && lambda >= 1.0) {
            return Err(Error::InvalidParams(format!("lambda must be at least 1, got {lambda}")));
        }
        Ok(GfgParams { t, theta, lambda })
    }

    /// `1 + t/theta`, the value of lambda separating the atomless regime.
    pub fn boundary(&self) -> f64 {
        1.0 + self.t / self.theta
    }

    /// `t (lambda - 1)`.
    pub fn shift(&self) -> f64 {
        self.t * (self.lambda - 1.0)
    }

    /// `q = t / (theta (lambda - 1))`; infinite at lambda = 1.
    pub fn q(&self) -> f64 {
        self.t / (self.theta * (self.lambda - 1.0))
    }

    pub fn is_lambda_one(&self) -> bool {
        self.lambda == 1.0
    }
}

/// Marchenko-Pastur parameters: scale `theta`, shape `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpParams {
    pub theta: f64,
    pub lambda: f64,
}

impl MpParams {
    pub fn new(theta: f64, lambda: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0 && lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParams(format!(
                "Marchenko-Pastur needs theta > 0 and lambda > 0, got ({theta}, {lambda})"
            )));
        }
        Ok(MpParams { theta, lambda })
    }

    /// Edges `theta (sqrt(lambda) -+ 1)^2`.
    pub fn edges(&self) -> (f64, f64) {
        let s = libm::sqrt(self.lambda);
        (self.theta * (s - 1.0) * (s - 1.0), self.theta * (s + 1.0) * (s + 1.0))
    }

    pub fn atom(&self) -> f64 {
        (1.0 - self.lambda).max(0.0)
    }
}

/// Parameters of the centered free Meixner law `nu_{s,a,b}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeMeixnerParams {
    pub s: f64,
    pub a: f64,
    pub b: f64,
}

impl FreeMeixnerParams {
    /// Requires `s >= 0`, `b >= -1` and `s + b >= 0` (the last keeps the
    /// square-root argument's zeros real).
    pub fn new(s: f64, a: f64, b: f64) -> Result<Self> {
        if !(s >= 0.0 && b >= -1.0 && s + b >= 0.0 && a.is_finite() && s.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "free Meixner needs s >= 0, b >= -1, s + b >= 0; got ({s}, {a}, {b})"
            )));
        }
        Ok(FreeMeixnerParams { s, a, b })
    }

    /// Density of the absolutely continuous part.
    pub fn density(&self, x: f64) -> f64 {
        let r = 4.0 * (self.s + self.b) - (x - self.a) * (x - self.a);
        if r <= 0.0 {
            return 0.0;
        }
        let den = self.b * x * x + self.s * self.a * x + self.s * self.s;
        (self.s * libm::sqrt(r) / (2.0 * PI * den)).max(0.0)
    }

    pub fn support(&self) -> SupportInterval {
        let w = 2.0 * libm::sqrt(self.s + self.b);
        SupportInterval { lo: self.a - w, hi: self.a + w }
    }

    /// The shifted parameters with `mu_{t,theta,lambda} = nu * delta_t`.
    pub fn of_gfg(p: &GfgParams) -> Self {
        FreeMeixnerParams {
            s: p.t * p.theta * p.lambda,
            a: p.theta * (p.lambda + 1.0),
            b: p.theta * p.theta * p.lambda,
        }
    }
}

/// Closed interval `[lo, hi]`; `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SupportInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Edges `alpha^-` and `alpha^+` of the absolutely continuous part.
pub fn support(p: &GfgParams) -> SupportInterval {
    let (t, th, l) = (p.t, p.theta, p.lambda);
    let hi = th * (l + 1.0) + t + 2.0 * libm::sqrt(th * l * (th + t));
    // product of the edges is (theta(lambda-1) - t)^2; dividing avoids cancellation
    let g = th * (l - 1.0) - t;
    SupportInterval { lo: g * g / hi, hi }
}

/// Mass of the atom at the origin.
pub fn atom_mass(p: &GfgParams) -> f64 {
    if p.lambda <= p.boundary() {
        0.0
    } else {
        1.0 - p.t / (p.theta * (p.lambda - 1.0))
    }
}

/// Density of the absolutely continuous part of `mu_{t,theta,lambda}`.
pub fn gfg_density(p: &GfgParams, x: f64) -> f64 {
    let s = support(p);
    if !(x > s.lo && x < s.hi) || x <= 0.0 {
        return 0.0;
    }
    let r = (x - s.lo) * (s.hi - x);
    p.t * libm::sqrt(r) / (2.0 * PI * p.theta * x * (x + p.shift()))
}

/// Marchenko-Pastur density `k_{theta,lambda}` (absolutely continuous part).
pub fn mp_density(q: &MpParams, x: f64) -> f64 {
    let (lo, hi) = q.edges();
    if !(x > lo && x < hi) || x <= 0.0 {
        return 0.0;
    }
    libm::sqrt((hi - x) * (x - lo)) / (2.0 * PI * q.theta * x)
}

/// Mode of a unimodal `mu_{t,theta,lambda}`: the root of the cubic `k`
/// inside the support, or 0 on the boundary `lambda = 1 + t/theta`.
pub fn mode(p: &GfgParams) -> Result<f64> {
    let b = p.boundary();
    if p.lambda > b {
        return Err(Error::NotUnimodal { lambda: p.lambda, bound: b });
    }
    if p.lambda == b {
        return Ok(0.0);
    }
    let s = support(p);
    let (am, ap) = (s.lo, s.hi);
    let c = p.shift();
    let k =
        |x: f64| 2.0 * x * x * x - 3.0 * (ap + am) * x * x + (4.0 * ap * am - c * (ap + am)) * x + 2.0 * ap * am * c;
    Ok(quad::bisect(k, am, ap, 1e-12 * (ap - am)))
}

/// Structural properties decided by the parameters alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Structure {
    pub freely_selfdecomposable: bool,
    pub unimodal: bool,
    pub density_bounded: bool,
}

pub fn structural_predicates(p: &GfgParams) -> Structure {
    let b = p.boundary();
    Structure { freely_selfdecomposable: p.lambda == 1.0, unimodal: p.lambda <= b, density_bounded: p.lambda != b }
}

/// Measure families with a closed-form density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Gfg(GfgParams),
    Mp(MpParams),
    /// Free Levy density `t k_{theta,lambda}(x) / x`.
    LevyGfg(GfgParams),
    /// Free beta prime `f beta'(a, b)`, `a > 0`, `b > 1`.
    Fbp {
        a: f64,
        b: f64,
    },
    /// Free Levy density of `f beta'(a, b)`.
    LevyFbp {
        a: f64,
        b: f64,
    },
    /// Reversal of `pi_{theta,lambda}` for `lambda >= 1`.
    InverseMp(MpParams),
}

fn fbp_params(a: f64, b: f64) -> Result<GfgParams> {
    if !(a > 0.0 && b > 1.0) {
        return Err(Error::InvalidParams(format!("free beta prime needs a > 0 and b > 1, got ({a}, {b})")));
    }
    GfgParams::new(a / (b - 1.0), a / ((b - 1.0) * (b - 1.0)), (a + b - 1.0) / a)
}

impl Family {
    fn validate(&self) -> Result<()> {
        match self {
            Family::Gfg(p) | Family::LevyGfg(p) => GfgParams::new(p.t, p.theta, p.lambda).map(|_| ()),
            Family::Mp(q) => MpParams::new(q.theta, q.lambda).map(|_| ()),
            Family::Fbp { a, b } | Family::LevyFbp { a, b } => fbp_params(*a, *b).map(|_| ()),
            Family::InverseMp(q) => {
                MpParams::new(q.theta, q.lambda)?;
                if q.lambda < 1.0 {
                    return Err(Error::InvalidParams(format!(
                        "reversal needs an atomless MP law (lambda >= 1), got lambda = {}",
                        q.lambda
                    )));
                }
                Ok(())
            }
        }
    }

    /// Pointwise density; zero outside the support.
    pub fn density(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if !x.is_finite() {
            return Err(Error::Domain(format!("x must be finite, got {x}")));
        }
        Ok(match self {
            Family::Gfg(p) => gfg_density(p, x),
            Family::Mp(q) => mp_density(q, x),
            Family::LevyGfg(p) => {
                let q = MpParams { theta: p.theta, lambda: p.lambda };
                if x > 0.0 {
                    p.t * mp_density(&q, x) / x
                } else {
                    0.0
                }
            }
            Family::Fbp { a, b } => gfg_density(&fbp_params(*a, *b)?, x),
            Family::LevyFbp { a, b } => {
                let p = fbp_params(*a, *b)?;
                let q = MpParams { theta: p.theta, lambda: p.lambda };
                if x > 0.0 {
                    p.t * mp_density(&q, x) / x
                } else {
                    0.0
                }
            }
            Family::InverseMp(q) => {
                if x > 0.0 {
                    mp_density(q, 1.0 / x) / (x * x)
                } else {
                    0.0
                }
            }
        })
    }

    /// The probability measure for the families that are probability laws.
    pub fn measure(&self) -> Result<SpectralMeasure> {
        self.validate()?;
        match *self {
            Family::Gfg(p) => Ok(SpectralMeasure::gfg(&p)),
            Family::Mp(q) => Ok(SpectralMeasure::mp(&q)),
            Family::Fbp { a, b } => Ok(SpectralMeasure::gfg(&fbp_params(a, b)?)),
            Family::InverseMp(q) => {
                let (lo, hi) = q.edges();
                let hi_inv = if lo > 0.0 { 1.0 / lo } else { f64::INFINITY };
                Ok(SpectralMeasure::new(0.0, SupportInterval { lo: 1.0 / hi, hi: hi_inv }, move |x| {
                    if x > 0.0 {
                        mp_density(&q, 1.0 / x) / (x * x)
                    } else {
                        0.0
                    }
                }))
            }
            Family::LevyGfg(_) | Family::LevyFbp { .. } => {
                Err(Error::InvalidParams("a Levy density is not a probability measure".into()))
            }
        }
    }
}

type DensityFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A probability measure on the line: a possible atom at the origin plus an
/// absolutely continuous part with density supported on `support`.
///
/// `breaks` lists interior points where the density is not smooth; the
/// integration routines split there.
#[derive(Clone)]
pub struct SpectralMeasure {
    pub atom0: f64,
    pub support: SupportInterval,
    pub breaks: Vec<f64>,
    density: Arc<DensityFn>,
}

impl core::fmt::Debug for SpectralMeasure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SpectralMeasure")
            .field("atom0", &self.atom0)
            .field("support", &self.support)
            .field("breaks", &self.breaks)
            .finish()
    }
}

pub(crate) const CDF_TOL: f64 = 1e-13;
/// Largest quadrature error estimate accepted for a distribution value.
pub(crate) const CDF_ACCEPT: f64 = 1e-9;

impl SpectralMeasure {
    pub fn new<F>(atom0: f64, support: SupportInterval, density: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        SpectralMeasure { atom0, support, breaks: Vec::new(), density: Arc::new(density) }
    }

    pub fn with_breaks(mut self, mut breaks: Vec<f64>) -> Self {
        breaks.retain(|b| *b > self.support.lo && *b < self.support.hi);
        breaks.sort_by(|a, b| a.total_cmp(b));
        breaks.dedup();
        self.breaks = breaks;
        self
    }

    pub fn gfg(p: &GfgParams) -> Self {
        let p = *p;
        SpectralMeasure::new(atom_mass(&p), support(&p), move |x| gfg_density(&p, x))
    }

    pub fn mp(q: &MpParams) -> Self {
        let q = *q;
        let (lo, hi) = q.edges();
        SpectralMeasure::new(q.atom(), SupportInterval { lo, hi }, move |x| mp_density(&q, x))
    }

    /// Free Meixner law, assuming it has no atoms.
    pub fn free_meixner(q: &FreeMeixnerParams) -> Self {
        let q = *q;
        SpectralMeasure::new(0.0, q.support(), move |x| q.density(x))
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < self.support.lo || x > self.support.hi {
            0.0
        } else {
            (self.density)(x)
        }
    }

    /// Image under `x -> c x`, `c > 0`.
    pub fn dilate(&self, c: f64) -> Self {
        let d = self.density.clone();
        SpectralMeasure {
            atom0: self.atom0,
            support: SupportInterval { lo: c * self.support.lo, hi: c * self.support.hi },
            breaks: self.breaks.iter().map(|b| c * b).collect(),
            density: Arc::new(move |x| d(x / c) / c),
        }
    }

    /// Image under `x -> x + s`; only meaningful without an atom.
    pub fn translate(&self, s: f64) -> Self {
        let d = self.density.clone();
        SpectralMeasure {
            atom0: self.atom0,
            support: SupportInterval { lo: self.support.lo + s, hi: self.support.hi + s },
            breaks: self.breaks.iter().map(|b| b + s).collect(),
            density: Arc::new(move |x| d(x - s)),
        }
    }

    /// Convex combination `(1 - eps) self + eps other` of two atomless measures.
    pub fn mix(&self, other: &SpectralMeasure, eps: f64) -> Self {
        let (d1, d2) = (self.density.clone(), other.density.clone());
        let (s1, s2) = (self.support, other.support);
        let support = SupportInterval { lo: s1.lo.min(s2.lo), hi: s1.hi.max(s2.hi) };
        let mut breaks = self.breaks.clone();
        breaks.extend(other.breaks.iter().copied());
        breaks.extend([s1.lo, s1.hi, s2.lo, s2.hi]);
        SpectralMeasure {
            atom0: (1.0 - eps) * self.atom0 + eps * other.atom0,
            support,
            breaks: Vec::new(),
            density: Arc::new(move |x| {
                let a = if s1.contains(x) { d1(x) } else { 0.0 };
                let b = if s2.contains(x) { d2(x) } else { 0.0 };
                (1.0 - eps) * a + eps * b
            }),
        }
        .with_breaks(breaks)
    }

    fn pieces(&self, u: f64, v: f64) -> Vec<(f64, f64)> {
        let mut pts = Vec::with_capacity(self.breaks.len() + 2);
        pts.push(u);
        pts.extend(self.breaks.iter().copied().filter(|b| *b > u && *b < v));
        pts.push(v);
        pts.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// `integral of g(x) density(x)` over `[u, v] ∩ support`.
    ///
    /// On a finite support each half is integrated in the angle
    /// `x - edge = width sin^2(phi/2)` from its nearer edge, which removes
    /// square-root edge behaviour; a half-line support uses tanh-sinh
    /// directly with the semi-infinite map for the tail.
    pub fn integrate_density<G: Fn(f64) -> f64>(&self, g: G, u: f64, v: f64, tol: f64) -> Result<quad::Estimate> {
        let s = self.support;
        let u = u.max(s.lo);
        let v = v.min(s.hi);
        if !(v > u) {
            return Ok(quad::Estimate { value: 0.0, error: 0.0 });
        }
        let mut value = 0.0;
        let mut error = 0.0;
        let mut failed = false;
        // a non-converged piece is reported with the whole sum
        let mut acc = |e: Result<quad::Estimate>| -> Result<()> {
            match e {
                Ok(e) => {
                    value += e.value;
                    error += e.error;
                }
                Err(Error::Quadrature { value: v, error: r }) => {
                    value += v;
                    error += r;
                    failed = true;
                }
                Err(e) => return Err(e),
            }
            Ok(())
        };
        if s.hi.is_finite() {
            let (lo, hi) = (s.lo, s.hi);
            let w = hi - lo;
            let mid = lo + 0.5 * w;
            // angle measured from the nearer edge, so that node spacing
            // near either edge keeps full relative precision
            let ang = |d: f64| 2.0 * libm::asin(libm::sqrt((d / w).clamp(0.0, 1.0)));
            for (a, b) in self.pieces(u, v) {
                let mut parts = Vec::with_capacity(2);
                if a < mid {
                    parts.push((a, b.min(mid), true));
                }
                if b > mid {
                    parts.push((a.max(mid), b, false));
                }
                for (a, b, left) in parts {
                    let e = if left {
                        quad::tanh_sinh(
                            |th| {
                                let sh = libm::sin(0.5 * th);
                                let x = lo + w * sh * sh;
                                g(x) * self.density(x) * 0.5 * w * libm::sin(th)
                            },
                            ang(a - lo),
                            ang(b - lo),
                            tol,
                        )
                    } else {
                        quad::tanh_sinh(
                            |th| {
                                let sh = libm::sin(0.5 * th);
                                let x = hi - w * sh * sh;
                                g(x) * self.density(x) * 0.5 * w * libm::sin(th)
                            },
                            ang(hi - b),
                            ang(hi - a),
                            tol,
                        )
                    };
                    acc(e)?;
                }
            }
        } else {
            for (a, b) in self.pieces(u, v) {
                let e = if b.is_finite() {
                    quad::tanh_sinh(|x| g(x) * self.density(x), a, b, tol)
                } else {
                    quad::tanh_sinh_to_inf(|x| g(x) * self.density(x), a, tol)
                };
                acc(e)?;
            }
        }
        if failed {
            return Err(Error::Quadrature { value, error });
        }
        Ok(quad::Estimate { value, error })
    }

    /// Total mass, atom included.
    pub fn total_mass(&self) -> Result<f64> {
        Ok(self.atom0 + self.integrate_density(|_| 1.0, self.support.lo, self.support.hi, CDF_TOL)?.value)
    }

    /// `integral of x^k d mu` (the atom at 0 contributes only for k = 0).
    pub fn moment(&self, k: i32) -> Result<f64> {
        let ac = self.integrate_density(|x| libm::pow(x, k as f64), self.support.lo, self.support.hi, CDF_TOL)?;
        Ok(ac.value + if k == 0 { self.atom0 } else { 0.0 })
    }
}

/// Right-continuous distribution function.
pub fn cdf(m: &SpectralMeasure, x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("x is NaN".into()));
    }
    let atom = if x >= 0.0 { m.atom0 } else { 0.0 };
    if x <= m.support.lo {
        return Ok(atom);
    }
    let e = quad::lenient(m.integrate_density(|_| 1.0, m.support.lo, x, CDF_TOL), CDF_ACCEPT)?;
    Ok((atom + e.value).min(1.0))
}

/// Distribution function at ascending points, accumulated piece by piece.
pub fn cdf_sorted(m: &SpectralMeasure, xs: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    let mut last = m.support.lo;
    for &x in xs {
        if x < last && x > m.support.lo {
            return Err(Error::Domain("points must be ascending".into()));
        }
        if x > last {
            let e = quad::lenient(m.integrate_density(|_| 1.0, last, x, CDF_TOL), CDF_ACCEPT)?;
            acc += e.value;
            last = x.min(m.support.hi);
        }
        let atom = if x >= 0.0 { m.atom0 } else { 0.0 };
        out.push((atom + acc).min(1.0));
    }
    Ok(out)
}
