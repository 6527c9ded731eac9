//! Parameter dictionaries between the gamma, beta prime and Marchenko-Pastur
//! families, and the catalog of free convolution identities checked
//! pointwise on closed-form transforms.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::{One, Signed};

use crate::cumulants::{ExactParams, Rational};
use crate::error::{Error, Result};
use crate::measures::{self, FreeMeixnerParams, GfgParams, MpParams};
use crate::transforms::{self, gfg_r_branch_point, r_transform, s_transform, RFamily, SFamily, C64};

/// Default pass threshold for catalog checks.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Points per default grid.
pub const GRID_POINTS: usize = 50;
/// Margin kept from branch points and domain ends.
pub const GRID_MARGIN: f64 = 1e-3;

/// A law given as a dilation `D_scale` of a parametrized law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledParams<P> {
    pub scale: f64,
    pub params: P,
}

/// `eta(t, theta) = mu_{t theta, theta, 1}`.
pub fn eta(t: f64, theta: f64) -> Result<GfgParams> {
    GfgParams::new(t * theta, theta, 1.0)
}

/// `fbeta'(a, b) = mu_{a/(b-1), a/(b-1)^2, (a+b-1)/a}`.
pub fn fbp_to_gfg(a: f64, b: f64) -> Result<GfgParams> {
    check_fbp(a, b)?;
    let c = b - 1.0;
    GfgParams::new(a / c, a / (c * c), (a + b - 1.0) / a)
}

fn check_fbp(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b > 1.0) {
        return Err(Error::Domain(format!("free beta prime needs a > 0, b > 1; got ({a}, {b})")));
    }
    Ok(())
}

/// Free beta prime parameters `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbpParams {
    pub a: f64,
    pub b: f64,
}

/// `mu_{t,theta,lambda} = D_{t(lambda-1)}(fbeta'(t/(theta(lambda-1)), 1 + t/theta))`.
pub fn gfg_to_fbp(p: &GfgParams) -> Result<ScaledParams<FbpParams>> {
    if p.is_lambda_one() {
        return Err(Error::Domain("the beta prime form needs lambda > 1".into()));
    }
    Ok(ScaledParams { scale: p.shift(), params: FbpParams { a: p.q(), b: 1.0 + p.t / p.theta } })
}

/// `(t, theta, lambda)` of `D_c mu_{t,theta,lambda}`.
pub fn dilate_params(c: f64, p: &GfgParams) -> Result<GfgParams> {
    GfgParams::new(c * p.t, c * p.theta, p.lambda)
}

/// Reversal: `mu^{<-1>} = D_scale(mu_{t',theta',lambda'})`, for
/// `1 < lambda < 1 + t/theta` strictly.
pub fn reversed(p: &GfgParams) -> Result<ScaledParams<GfgParams>> {
    let (t, th, l) = (p.t, p.theta, p.lambda);
    let d = t - th * (l - 1.0);
    if !(l > 1.0 && d > 0.0) {
        return Err(Error::Domain(format!("reversal needs 1 < lambda < 1 + t/theta = {}; got {l}", p.boundary())));
    }
    let tp = (th + t) * (l - 1.0) / d;
    let thp = th * (th + t) * (l - 1.0) * (l - 1.0) / (d * d);
    let lp = t * l / ((th + t) * (l - 1.0));
    Ok(ScaledParams { scale: 1.0 / (t * (l - 1.0)), params: GfgParams::new(tp, thp, lp)? })
}

/// Exact counterparts of the dictionary maps.
pub mod exact {
    use super::*;

    pub fn fbp_to_gfg(a: &Rational, b: &Rational) -> Result<ExactParams> {
        let one = Rational::one();
        if !a.is_positive() || *b <= one {
            return Err(Error::Domain(format!("free beta prime needs a > 0, b > 1; got ({a}, {b})")));
        }
        let c = b - &one;
        ExactParams::new(a / &c, a / (&c * &c), (a + b - one) / a)
    }

    /// `(scale, a, b)`.
    pub fn gfg_to_fbp(p: &ExactParams) -> Result<(Rational, Rational, Rational)> {
        let one = Rational::one();
        if p.lambda == one {
            return Err(Error::Domain("the beta prime form needs lambda > 1".into()));
        }
        let c = &p.t * (&p.lambda - &one);
        let a = &p.t / (&p.theta * (&p.lambda - &one));
        let b = one + &p.t / &p.theta;
        Ok((c, a, b))
    }

    /// `(scale, params)`.
    pub fn reversed(p: &ExactParams) -> Result<(Rational, ExactParams)> {
        let one = Rational::one();
        let lm1 = &p.lambda - &one;
        let d = &p.t - &p.theta * &lm1;
        if !lm1.is_positive() || !d.is_positive() {
            return Err(Error::Domain("reversal needs 1 < lambda < 1 + t/theta strictly".into()));
        }
        let s = &p.theta + &p.t;
        let tp = &s * &lm1 / &d;
        let thp = &p.theta * &s * &lm1 * &lm1 / (&d * &d);
        let lp = &p.t * &p.lambda / (&s * &lm1);
        Ok((one / (&p.t * lm1), ExactParams::new(tp, thp, lp)?))
    }

    pub fn dilate(c: &Rational, p: &ExactParams) -> Result<ExactParams> {
        if !c.is_positive() {
            return Err(Error::Domain("dilation factor must be positive".into()));
        }
        ExactParams::new(c * &p.t, c * &p.theta, p.lambda.clone())
    }
}

/// `mu_{t,theta,1} = (pi_{theta/t^2, 1+t/theta})^{<-1>}`; returns that MP law.
pub fn inverse_mp_of_gfg1(p: &GfgParams) -> Result<MpParams> {
    if !p.is_lambda_one() {
        return Err(Error::Domain("only lambda = 1 is a reversed Marchenko-Pastur law".into()));
    }
    MpParams::new(p.theta / (p.t * p.t), 1.0 + p.t / p.theta)
}

/// `tau_p = pi_{p^-2, 1+p}`.
pub fn tau(p: f64) -> Result<MpParams> {
    if !(p > 0.0) {
        return Err(Error::Domain(format!("tau_p needs p > 0, got {p}")));
    }
    MpParams::new(1.0 / (p * p), 1.0 + p)
}

/// `tau_p^{boxplus 2^n}` as the reversal of `D_scale(eta(P, 1))`, with
/// `scale = (2^n + (2^n - 1)/p)^{-2}` and `P = 2^n p + 2^n - 1`.
/// Equivalently it is `D_{1/scale}(tau_P)`.
pub fn inverse_sum(p: f64, n: u32) -> Result<ScaledParams<GfgParams>> {
    if !(p > 0.0) || n > 60 {
        return Err(Error::Domain(format!("need p > 0 and n <= 60, got p = {p}, n = {n}")));
    }
    let k = libm::ldexp(1.0, n as i32);
    let c = k + (k - 1.0) / p;
    Ok(ScaledParams { scale: 1.0 / (c * c), params: eta(k * p + k - 1.0, 1.0)? })
}

/// Catalog entries. The string ids are stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdentityId {
    AddSemigroup,
    ScaleLaw,
    MultFormA,
    MultFormB,
    MeixnerShift,
    RatioLaw,
    InvSumLaw,
    HalfSumCor,
    FreeBetaS,
    FreeBetaRs,
    SReversal,
}

impl IdentityId {
    pub const ALL: [IdentityId; 11] = [
        IdentityId::AddSemigroup,
        IdentityId::ScaleLaw,
        IdentityId::MultFormA,
        IdentityId::MultFormB,
        IdentityId::MeixnerShift,
        IdentityId::RatioLaw,
        IdentityId::InvSumLaw,
        IdentityId::HalfSumCor,
        IdentityId::FreeBetaS,
        IdentityId::FreeBetaRs,
        IdentityId::SReversal,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            IdentityId::AddSemigroup => "ADD_SEMIGROUP",
            IdentityId::ScaleLaw => "SCALE_LAW",
            IdentityId::MultFormA => "MULT_FORM_A",
            IdentityId::MultFormB => "MULT_FORM_B",
            IdentityId::MeixnerShift => "MEIXNER_SHIFT",
            IdentityId::RatioLaw => "RATIO_LAW",
            IdentityId::InvSumLaw => "INV_SUM_LAW",
            IdentityId::HalfSumCor => "HALF_SUM_COR",
            IdentityId::FreeBetaS => "FREE_BETA_S",
            IdentityId::FreeBetaRs => "FREE_BETA_RS",
            IdentityId::SReversal => "S_REVERSAL",
        }
    }

    /// Whether the identity is stated for a `(t, theta, lambda)` triple.
    pub fn takes_gfg(&self) -> bool {
        matches!(
            self,
            IdentityId::AddSemigroup
                | IdentityId::ScaleLaw
                | IdentityId::MultFormA
                | IdentityId::MultFormB
                | IdentityId::MeixnerShift
        )
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase().replace('-', "_");
        IdentityId::ALL
            .iter()
            .find(|id| id.as_str() == up)
            .copied()
            .ok_or_else(|| Error::InvalidParams(format!("unknown identity {s:?}")))
    }
}

/// Parameters of one identity instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdentityParams {
    Gfg(GfgParams),
    /// `eta(p,1) boxtimes eta(q,1)^{<-1>}`.
    Ratio {
        p: f64,
        q: f64,
    },
    /// `tau_p^{boxplus 2^n}`.
    InvSum {
        p: f64,
        n: u32,
    },
    /// Harmonic-mean corollary with `m` summands.
    HalfSum {
        m: u32,
    },
    FreeBeta {
        p: f64,
    },
    /// `pi_{theta,lambda}` and its reversal.
    Mp(MpParams),
}

impl fmt::Display for IdentityParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdentityParams::Gfg(p) => write!(f, "t={} theta={} lambda={}", p.t, p.theta, p.lambda),
            IdentityParams::Ratio { p, q } => write!(f, "p={p} q={q}"),
            IdentityParams::InvSum { p, n } => write!(f, "p={p} n={n}"),
            IdentityParams::HalfSum { m } => write!(f, "m={m}"),
            IdentityParams::FreeBeta { p } => write!(f, "p={p}"),
            IdentityParams::Mp(q) => write!(f, "theta={} lambda={}", q.theta, q.lambda),
        }
    }
}

/// Evaluation points; real identities use points on the real axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformGrid {
    pub points: Vec<C64>,
}

impl TransformGrid {
    /// `n` equispaced points in `[lo + margin, hi - margin]`.
    pub fn real(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let m = GRID_MARGIN.min(0.25 * (hi - lo));
        let (a, b) = (lo + m, hi - m);
        if !(b > a) || n < 2 {
            return Err(Error::Domain(format!("empty grid on [{lo}, {hi}]")));
        }
        let h = (b - a) / (n - 1) as f64;
        Ok(TransformGrid { points: (0..n).map(|i| C64::new(a + h * i as f64, 0.0)).collect() })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Outcome of one identity check.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub id: IdentityId,
    pub params: IdentityParams,
    pub grid: TransformGrid,
    pub max_abs_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub warning: Option<String>,
}

fn gfg_of(id: IdentityId, params: &IdentityParams) -> Result<GfgParams> {
    match params {
        IdentityParams::Gfg(p) => Ok(*p),
        _ => Err(Error::Domain(format!("{id} takes a (t, theta, lambda) triple"))),
    }
}

fn need_lambda_above_one(id: IdentityId, p: &GfgParams) -> Result<()> {
    if p.is_lambda_one() {
        return Err(Error::Domain(format!("{id} needs lambda > 1")));
    }
    Ok(())
}

/// Half-sum corollary: `p = 1/(2(m-1))`, and `2 R_{tau_p}(z) = R_{tau_P}(4 m^2 z)`
/// with `P = m/(m-1)`.
fn half_sum_params(m: u32) -> Result<(f64, f64)> {
    if m < 2 {
        return Err(Error::Domain(format!("the corollary needs m >= 2, got {m}")));
    }
    let m = m as f64;
    Ok((0.5 / (m - 1.0), m / (m - 1.0)))
}

/// Points near which the identity's transforms are singular.
fn singular_points(id: IdentityId, params: &IdentityParams) -> Vec<f64> {
    match (id, params) {
        (IdentityId::AddSemigroup | IdentityId::ScaleLaw, IdentityParams::Gfg(p)) => {
            vec![gfg_r_branch_point(p.theta, p.lambda)]
        }
        (IdentityId::MultFormA | IdentityId::MultFormB, IdentityParams::Gfg(p)) => vec![-p.q().min(1.0), 0.0],
        (IdentityId::InvSumLaw, IdentityParams::InvSum { p, .. }) => vec![p * p],
        (IdentityId::HalfSumCor, IdentityParams::HalfSum { m }) => {
            half_sum_params(*m).map(|(p, _)| vec![p * p]).unwrap_or_default()
        }
        (IdentityId::RatioLaw | IdentityId::FreeBetaS | IdentityId::FreeBetaRs | IdentityId::SReversal, _) => {
            vec![-1.0, 0.0]
        }
        _ => Vec::new(),
    }
}

/// The grid used when none is supplied: 50 points inside the common domain
/// of all transforms involved.
pub fn default_grid(id: IdentityId, params: &IdentityParams) -> Result<TransformGrid> {
    let n = GRID_POINTS;
    match id {
        IdentityId::AddSemigroup | IdentityId::ScaleLaw => {
            let p = gfg_of(id, params)?;
            let z1 = gfg_r_branch_point(p.theta, p.lambda);
            TransformGrid::real(-4.0 * z1, z1, n)
        }
        IdentityId::MultFormA | IdentityId::MultFormB => {
            let p = gfg_of(id, params)?;
            need_lambda_above_one(id, &p)?;
            TransformGrid::real(-p.q().min(1.0), 0.0, n)
        }
        IdentityId::MeixnerShift => {
            let p = gfg_of(id, params)?;
            let s = measures::support(&p);
            let (a, b) = (s.lo - 1.0, s.hi + 1.0);
            let half = n / 2;
            let mut pts = Vec::with_capacity(n);
            for &y in &[0.05, 0.5] {
                for i in 0..half {
                    pts.push(C64::new(a + (b - a) * i as f64 / (half - 1) as f64, y));
                }
            }
            Ok(TransformGrid { points: pts })
        }
        IdentityId::InvSumLaw => match params {
            IdentityParams::InvSum { p, .. } => TransformGrid::real(-p * p, 0.5 * p * p, n),
            _ => Err(Error::Domain(format!("{id} takes (p, n)"))),
        },
        IdentityId::HalfSumCor => match params {
            IdentityParams::HalfSum { m } => {
                let (p, _) = half_sum_params(*m)?;
                TransformGrid::real(-p * p, 0.5 * p * p, n)
            }
            _ => Err(Error::Domain(format!("{id} takes m"))),
        },
        IdentityId::RatioLaw | IdentityId::FreeBetaS | IdentityId::FreeBetaRs | IdentityId::SReversal => {
            TransformGrid::real(-1.0, 0.0, n)
        }
    }
}

fn real_point(id: IdentityId, z: C64) -> Result<f64> {
    if z.im != 0.0 {
        return Err(Error::Domain(format!("{id} is checked on the real axis, got {z}")));
    }
    Ok(z.re)
}

/// `(lhs, rhs)` of the identity at one grid point.
fn sides(id: IdentityId, params: &IdentityParams, z: C64) -> Result<(C64, C64)> {
    let re = |v: f64| C64::new(v, 0.0);
    match id {
        IdentityId::AddSemigroup => {
            let p = gfg_of(id, params)?;
            let unit = GfgParams::new(1.0, p.theta, p.lambda)?;
            Ok((r_transform(&RFamily::Gfg(unit), z)? * p.t, r_transform(&RFamily::Gfg(p), z)?))
        }
        IdentityId::ScaleLaw => {
            let p = gfg_of(id, params)?;
            let base = GfgParams::new(p.t, 1.0, p.lambda)?;
            let lhs = r_transform(&RFamily::Gfg(p), z)?;
            let rhs = r_transform(&RFamily::Gfg(base), z * p.theta)? / p.theta;
            Ok((lhs, rhs))
        }
        IdentityId::MultFormA => {
            let p = gfg_of(id, params)?;
            need_lambda_above_one(id, &p)?;
            let x = real_point(id, z)?;
            let s1 = s_transform(&SFamily::Mp(MpParams::new(1.0, p.q())?), x)?;
            let s2 = s_transform(&SFamily::InverseMp(MpParams::new(1.0, 1.0 + p.t / p.theta)?), x)?;
            Ok((re(s_transform(&SFamily::Gfg(p), x)?), re(s1 * s2 / p.shift())))
        }
        IdentityId::MultFormB => {
            let p = gfg_of(id, params)?;
            need_lambda_above_one(id, &p)?;
            let x = real_point(id, z)?;
            let q = p.q();
            let s1 = s_transform(&SFamily::Gfg(GfgParams::new(p.t, p.theta, 1.0)?), x)?;
            let s2 = s_transform(&SFamily::Mp(MpParams::new(1.0 / q, q)?), x)?;
            Ok((re(s_transform(&SFamily::Gfg(p), x)?), re(s1 * s2)))
        }
        IdentityId::MeixnerShift => {
            let p = gfg_of(id, params)?;
            let lhs = transforms::cauchy_transform(&p, z)?;
            let rhs = transforms::meixner_cauchy(&FreeMeixnerParams::of_gfg(&p), z - p.t)?;
            Ok((lhs, rhs))
        }
        IdentityId::RatioLaw => {
            let (p, q) = match params {
                IdentityParams::Ratio { p, q } => (*p, *q),
                _ => return Err(Error::Domain(format!("{id} takes (p, q)"))),
            };
            let x = real_point(id, z)?;
            let a = s_transform(&SFamily::Gfg(eta(p, 1.0)?), x)?;
            let b = s_transform(&SFamily::Reversed(Box::new(SFamily::Gfg(eta(q, 1.0)?))), x)?;
            let target = GfgParams::new(p, 1.0, 1.0 + p / (1.0 + q))?;
            let c = (1.0 + q) / (q * q);
            Ok((re(a * b), re(s_transform(&SFamily::Gfg(target), x)? / c)))
        }
        IdentityId::InvSumLaw => {
            let (p, n) = match params {
                IdentityParams::InvSum { p, n } => (*p, *n),
                _ => return Err(Error::Domain(format!("{id} takes (p, n)"))),
            };
            let sum = inverse_sum(p, n)?;
            let big_p = sum.params.t;
            let lhs = r_transform(&RFamily::Mp(tau(p)?), z)? * libm::ldexp(1.0, n as i32);
            let rhs = r_transform(&RFamily::Mp(tau(big_p)?), z / sum.scale)?;
            Ok((lhs, rhs))
        }
        IdentityId::HalfSumCor => {
            let m = match params {
                IdentityParams::HalfSum { m } => *m,
                _ => return Err(Error::Domain(format!("{id} takes m"))),
            };
            let (p, big_p) = half_sum_params(m)?;
            let mf = m as f64;
            let lhs = r_transform(&RFamily::Mp(tau(p)?), z)? * 2.0;
            let rhs = r_transform(&RFamily::Mp(tau(big_p)?), z * (4.0 * mf * mf))?;
            Ok((lhs, rhs))
        }
        IdentityId::FreeBetaS => {
            let p = match params {
                IdentityParams::FreeBeta { p } => *p,
                _ => return Err(Error::Domain(format!("{id} takes p"))),
            };
            let x = real_point(id, z)?;
            let num = s_transform(&SFamily::Mp(tau(p)?), x)?;
            let q = 2.0 * p + 1.0;
            let den = s_transform(&SFamily::Gfg(eta(q, 1.0)?), x)? * q * q / (p * p);
            Ok((re(num / den), re(s_transform(&SFamily::FreeBeta { p }, x)?)))
        }
        IdentityId::FreeBetaRs => {
            let p = match params {
                IdentityParams::FreeBeta { p } => *p,
                _ => return Err(Error::Domain(format!("{id} takes p"))),
            };
            let x = real_point(id, z)?;
            let w = x * s_transform(&SFamily::FreeBeta { p }, x)?;
            Ok((r_transform(&RFamily::FreeBeta { p }, re(w))?, re(x)))
        }
        IdentityId::SReversal => {
            let q = match params {
                IdentityParams::Mp(q) => *q,
                _ => return Err(Error::Domain(format!("{id} takes (theta, lambda)"))),
            };
            let x = real_point(id, z)?;
            let lhs = s_transform(&SFamily::Reversed(Box::new(SFamily::Mp(q))), x)?;
            Ok((re(lhs), re(s_transform(&SFamily::InverseMp(q), x)?)))
        }
    }
}

/// Checks `id` at `params` on `grid` (or the default grid).
pub fn verify_identity(
    id: IdentityId,
    params: &IdentityParams,
    grid: Option<&TransformGrid>,
    tolerance: f64,
) -> Result<IdentityReport> {
    let grid = match grid {
        Some(g) => g.clone(),
        None => default_grid(id, params)?,
    };
    let sing = singular_points(id, params);
    let mut warning = None;
    let mut dev: f64 = 0.0;
    for &z in &grid.points {
        if let Some(s) = sing.iter().find(|&&s| (z - C64::new(s, 0.0)).norm() < GRID_MARGIN) {
            warning = Some(format!("grid point {z} lies within {GRID_MARGIN} of the singular point {s}"));
        }
        let (a, b) = sides(id, params, z)?;
        let d = (a - b).norm();
        if !d.is_finite() {
            return Err(Error::Domain(format!("{id}: non-finite value at {z}")));
        }
        dev = dev.max(d);
    }
    Ok(IdentityReport { id, params: *params, grid, max_abs_deviation: dev, tolerance, pass: dev <= tolerance, warning })
}

/// Ten `(t, theta, lambda)` triples with `lambda > 1`. The first sits on the
/// compound Poisson boundary `lambda = 1 + t/theta`.
pub fn default_gfg_triples() -> Vec<GfgParams> {
    [
        (1.0, 1.0, 2.0),
        (0.5, 1.0, 1.5),
        (2.0, 1.0, 3.0),
        (1.0, 0.5, 2.0),
        (1.0, 2.0, 1.25),
        (3.0, 1.0, 1.5),
        (0.7, 1.3, 4.0),
        (1.0, 1.0, 1.5),
        (2.0, 0.5, 1.2),
        (1.5, 2.0, 1.75),
    ]
    .iter()
    .map(|&(t, th, l)| GfgParams::new(t, th, l).expect("valid triple"))
    .collect()
}

/// Ten parameter sets per identity.
pub fn default_param_sets(id: IdentityId) -> Vec<IdentityParams> {
    const P: [f64; 10] = [0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0];
    match id {
        _ if id.takes_gfg() => default_gfg_triples().into_iter().map(IdentityParams::Gfg).collect(),
        IdentityId::RatioLaw => {
            let q = [1.0, 0.5, 2.0, 0.3, 1.0, 3.0, 0.75, 1.5, 0.2, 5.0];
            P.iter().zip(q.iter()).map(|(&p, &q)| IdentityParams::Ratio { p, q }).collect()
        }
        IdentityId::InvSumLaw => {
            let n = [1, 2, 3, 1, 1, 2, 4, 1, 3, 2];
            P.iter().zip(n.iter()).map(|(&p, &n)| IdentityParams::InvSum { p, n }).collect()
        }
        IdentityId::HalfSumCor => (2..12).map(|m| IdentityParams::HalfSum { m }).collect(),
        IdentityId::FreeBetaS | IdentityId::FreeBetaRs => P.iter().map(|&p| IdentityParams::FreeBeta { p }).collect(),
        IdentityId::SReversal => {
            let l = [1.0, 1.5, 2.0, 3.0, 1.25, 4.0, 2.5, 1.1, 6.0, 10.0];
            P.iter()
                .zip(l.iter())
                .map(|(&th, &l)| IdentityParams::Mp(MpParams::new(th, l).expect("valid MP")))
                .collect()
        }
        _ => Vec::new(),
    }
}

/// The identity ids that apply to a given triple; the rest are reported as
/// skipped by callers.
pub fn applies_to(id: IdentityId, p: &GfgParams) -> bool {
    match id {
        IdentityId::MultFormA | IdentityId::MultFormB => !p.is_lambda_one(),
        _ => id.takes_gfg(),
    }
}

/// Roots of the discriminant quadratic `(3p+2)^2 z^2 - 2 p^5 z + p^8`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidWitness {
    pub roots: [C64; 2],
    /// Largest `|quadratic(root)|` over the sum of the term magnitudes.
    pub residual: f64,
    pub is_fid: bool,
}

pub fn free_beta_fid_witness(p: f64) -> Result<FidWitness> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("need p > 0, got {p}")));
    }
    let p2 = p * p;
    let p4 = p2 * p2;
    let den = (3.0 * p + 2.0) * (3.0 * p + 2.0);
    let im = 2.0 * libm::sqrt((p + 1.0) * (2.0 * p + 1.0));
    let roots = [C64::new(p4 * p / den, p4 * im / den), C64::new(p4 * p / den, -p4 * im / den)];
    let (a, b, c) = (den, -2.0 * p4 * p, p4 * p4);
    let residual = roots
        .iter()
        .map(|z| {
            let v = z * z * a + z * b + c;
            v.norm() / (a * z.norm_sqr() + b.abs() * z.norm() + c)
        })
        .fold(0.0, f64::max);
    if roots[0].im == 0.0 {
        return Err(Error::Inconsistent(format!("discriminant roots are real at p = {p}")));
    }
    Ok(FidWitness { roots, residual, is_fid: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::rat;

    #[test]
    fn dictionary_examples() {
        assert_eq!(fbp_to_gfg(2.0, 2.0).unwrap(), GfgParams::new(2.0, 2.0, 1.5).unwrap());
        assert_eq!(eta(3.0, 1.0).unwrap(), GfgParams::new(3.0, 1.0, 1.0).unwrap());
        let s = inverse_sum(1.0, 1).unwrap();
        assert!((s.scale - 1.0 / 9.0).abs() < 1e-16);
        assert_eq!(s.params.t, 3.0);
    }

    #[test]
    fn exact_round_trips() {
        let (a, b) = (rat(3, 2), rat(7, 3));
        let g = exact::fbp_to_gfg(&a, &b).unwrap();
        let (_, a2, b2) = exact::gfg_to_fbp(&g).unwrap();
        assert_eq!((a2, b2), (a, b));

        let p = ExactParams::new(rat(2, 1), rat(1, 1), rat(3, 2)).unwrap();
        let (s1, r1) = exact::reversed(&p).unwrap();
        let (s2, r2) = exact::reversed(&r1).unwrap();
        assert_eq!(s2, rat(1, 1));
        assert_eq!(exact::dilate(&(s2 / s1), &r2).unwrap(), p);
    }

    #[test]
    fn reversed_boundary_is_a_domain_error() {
        assert!(reversed(&GfgParams::new(1.0, 1.0, 2.0).unwrap()).is_err());
        assert!(reversed(&GfgParams::new(1.0, 1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn witness_at_one() {
        let w = free_beta_fid_witness(1.0).unwrap();
        let expect = 2.0 * libm::sqrt(6.0) / 25.0;
        assert!((w.roots[0].im - expect).abs() < 1e-16);
        assert!((w.roots[0].re - 1.0 / 25.0).abs() < 1e-17);
    }

    #[test]
    fn ids_round_trip() {
        for id in IdentityId::ALL {
            assert_eq!(id.as_str().parse::<IdentityId>().unwrap(), id);
        }
    }
}

#[cfg(test)]
mod catalog_tests {
    use super::*;

    #[test]
    fn every_identity_passes_on_defaults() {
        for id in IdentityId::ALL {
            for ps in default_param_sets(id) {
                let r = verify_identity(id, &ps, None, IDENTITY_TOL).unwrap();
                assert!(r.pass, "{id} at {ps}: deviation {}", r.max_abs_deviation);
                assert!(r.grid.len() >= 50);
            }
        }
    }
}
