//! Random-matrix realizations of the laws in `fgamma_core`: Wishart
//! spectra, Haar-orthogonal conjugation for free sums and products, and
//! comparison of empirical spectra with closed forms.

use fgamma_core::convolution::{self, IdentityId};
use fgamma_core::measures::{self, FreeMeixnerParams, GfgParams, MpParams, SpectralMeasure};
use fgamma_core::stats;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Negative eigenvalues down to this (relative to the largest) are
/// treated as rounding and clamped to zero.
pub const PSD_FLOOR: f64 = 1e-10;
/// Eigenvalues below this multiple of `alpha^+` count towards the atom.
pub const ATOM_THRESHOLD: f64 = 1e-6;
pub const KS_THRESHOLD: f64 = 0.07;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EsdMeta {
    pub seed: u64,
    pub stream: u64,
    pub construction: String,
    pub matrix_dim: usize,
}

/// Sorted eigenvalues of one random matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    pub samples: Vec<f64>,
    pub meta: EsdMeta,
}

impl EmpiricalDistribution {
    fn new(mut samples: Vec<f64>, rng: RngStream, construction: impl Into<String>, dim: usize) -> Result<Self> {
        if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::Eigen(format!("non-finite eigenvalue {x}")));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalDistribution {
            samples,
            meta: EsdMeta { seed: rng.seed, stream: rng.stream, construction: construction.into(), matrix_dim: dim },
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EsdMap {
    Reciprocal,
    /// `x -> c x + shift`.
    Affine {
        c: f64,
        shift: f64,
    },
}

pub fn esd_map(e: &EmpiricalDistribution, map: EsdMap) -> Result<EmpiricalDistribution> {
    let samples: Vec<f64> = match map {
        EsdMap::Reciprocal => {
            if e.samples.contains(&0.0) {
                return Err(Error::Core(fgamma_core::Error::Domain("reciprocal of a zero eigenvalue".into())));
            }
            e.samples.iter().map(|x| 1.0 / x).collect()
        }
        EsdMap::Affine { c, shift } => e.samples.iter().map(|x| c * x + shift).collect(),
    };
    let rng = RngStream::new(e.meta.seed, e.meta.stream);
    let name = match map {
        EsdMap::Reciprocal => format!("reciprocal({})", e.meta.construction),
        EsdMap::Affine { c, shift } => format!("affine({}, {c}, {shift})", e.meta.construction),
    };
    EmpiricalDistribution::new(samples, rng, name, e.meta.matrix_dim)
}

fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    m.symmetric_eigenvalues().iter().copied().collect()
}

fn clamp_psd(mut v: Vec<f64>) -> Result<Vec<f64>> {
    let top = v.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    for x in v.iter_mut() {
        if *x < 0.0 {
            if *x < -PSD_FLOOR * top.max(1.0) {
                return Err(Error::NotPsd(*x));
            }
            *x = 0.0;
        }
    }
    Ok(v)
}

/// Eigenvalues of `(theta/N) X X^T` with `X` an `N x round(lambda N)`
/// standard Gaussian matrix.
pub fn sample_mp_esd(q: &MpParams, n: usize, rng: RngStream) -> Result<EmpiricalDistribution> {
    let m = (q.lambda * n as f64).round() as usize;
    if n == 0 || m == 0 {
        return Err(Error::Core(fgamma_core::Error::InvalidParams(format!(
            "need N >= 1 and lambda N >= 1, got N = {n}, lambda = {}",
            q.lambda
        ))));
    }
    let x = gaussian(n, m, &mut rng.rng());
    let w = (&x * x.transpose()) * (q.theta / n as f64);
    let ev = clamp_psd(eigenvalues(w))?;
    EmpiricalDistribution::new(ev, rng, format!("wishart(theta={}, lambda={})", q.theta, q.lambda), n)
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `diag(R)` moved into `Q`.
pub fn haar_orthogonal(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let qr = gaussian(n, n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn conjugated(b: &[f64], u: &DMatrix<f64>) -> DMatrix<f64> {
    let mut ub = u.clone();
    for (j, &bj) in b.iter().enumerate() {
        ub.column_mut(j).scale_mut(bj);
    }
    let mut m = ub * u.transpose();
    // restore exact symmetry lost to rounding
    let t = m.transpose();
    m += t;
    m * 0.5
}

/// Eigenvalues of `diag(a) + U diag(b) U^T` with `U` Haar. Taking the first
/// matrix diagonal loses nothing: conjugation invariance of `U` absorbs
/// its eigenvectors.
pub fn free_add_sample(a: &[f64], b: &[f64], rng: RngStream) -> Result<EmpiricalDistribution> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    let n = a.len();
    let u = haar_orthogonal(n, &mut rng.rng());
    let m = conjugated(b, &u) + DMatrix::from_diagonal(&DVector::from_column_slice(a));
    EmpiricalDistribution::new(eigenvalues(m), rng, "free_add", n)
}

/// Eigenvalues of `A^{1/2} U B U^T A^{1/2}` for diagonal `A`, `B >= 0`.
pub fn free_mult_sample(a: &[f64], b: &[f64], rng: RngStream) -> Result<EmpiricalDistribution> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    let a = clamp_psd(a.to_vec())?;
    let b = clamp_psd(b.to_vec())?;
    let n = a.len();
    let u = haar_orthogonal(n, &mut rng.rng());
    let mut m = conjugated(&b, &u);
    let s: Vec<f64> = a.iter().map(|x| x.sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] *= s[i] * s[j];
        }
    }
    let ev = clamp_psd(eigenvalues(m))?;
    EmpiricalDistribution::new(ev, rng, "free_mult", n)
}

/// Spectrum approximating `mu_{t,theta,lambda}`: the reciprocal Wishart
/// spectrum for `lambda = 1`, and for `lambda > 1` its free product with
/// `pi_{1/q, q}`.
pub fn gfg_spectrum(p: &GfgParams, n: usize, rng: RngStream) -> Result<EmpiricalDistribution> {
    let base = GfgParams::new(p.t, p.theta, 1.0)?;
    let w = sample_mp_esd(&convolution::inverse_mp_of_gfg1(&base)?, n, rng.child(0))?;
    let inv = esd_map(&w, EsdMap::Reciprocal)?;
    if p.is_lambda_one() {
        return Ok(inv);
    }
    let q = p.q();
    let b = sample_mp_esd(&MpParams::new(1.0 / q, q)?, n, rng.child(1))?;
    free_mult_sample(&inv.samples, &b.samples, rng.child(2))
}

/// Distances between an empirical spectrum and a measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub ks: f64,
    /// `None` for measures with unbounded support.
    pub w1: Option<f64>,
    /// Sample minus exact moments of orders 1 to 4.
    pub moment_gaps: Vec<f64>,
}

pub fn compare(e: &EmpiricalDistribution, m: &SpectralMeasure) -> Result<Comparison> {
    let ks = stats::ks_distance(&e.samples, m)?;
    let w1 = if m.support.hi.is_finite() { Some(stats::w1_distance(&e.samples, m)?) } else { None };
    let n = e.len() as f64;
    let mut moment_gaps = Vec::with_capacity(4);
    for k in 1..=4 {
        let sample = e.samples.iter().map(|x| x.powi(k)).sum::<f64>() / n;
        moment_gaps.push(sample - m.moment(k)?);
    }
    Ok(Comparison { ks, w1, moment_gaps })
}

/// Fraction of eigenvalues below `ATOM_THRESHOLD * alpha_plus` in modulus.
pub fn atom_fraction(e: &EmpiricalDistribution, alpha_plus: f64) -> f64 {
    let cut = ATOM_THRESHOLD * alpha_plus;
    e.samples.iter().filter(|x| x.abs() < cut).count() as f64 / e.len() as f64
}

/// Catalog identities that have a matrix construction.
pub const RMT_IDENTITIES: [IdentityId; 6] = [
    IdentityId::AddSemigroup,
    IdentityId::MultFormA,
    IdentityId::MultFormB,
    IdentityId::MeixnerShift,
    IdentityId::RatioLaw,
    IdentityId::InvSumLaw,
];

/// Parameters of a matrix construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RmtParams {
    Gfg(GfgParams),
    Ratio { p: f64, q: f64 },
    InvSum { p: f64, n: u32 },
}

impl RmtParams {
    pub fn default_for(id: IdentityId) -> Result<RmtParams> {
        let g = |t, th, l| GfgParams::new(t, th, l).map(RmtParams::Gfg).map_err(Error::from);
        match id {
            IdentityId::AddSemigroup | IdentityId::MeixnerShift => g(1.0, 1.0, 1.0),
            IdentityId::MultFormA => g(1.0, 1.0, 3.0),
            IdentityId::MultFormB => g(1.0, 1.0, 2.0),
            IdentityId::RatioLaw => Ok(RmtParams::Ratio { p: 1.0, q: 1.0 }),
            IdentityId::InvSumLaw => Ok(RmtParams::InvSum { p: 1.0, n: 1 }),
            _ => Err(Error::Usage(format!("{id} has no matrix construction"))),
        }
    }
}

impl std::fmt::Display for RmtParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RmtParams::Gfg(p) => write!(f, "t={} theta={} lambda={}", p.t, p.theta, p.lambda),
            RmtParams::Ratio { p, q } => write!(f, "p={p} q={q}"),
            RmtParams::InvSum { p, n } => write!(f, "p={p} n={n}"),
        }
    }
}

fn gfg_of(id: IdentityId, params: &RmtParams) -> Result<GfgParams> {
    match params {
        RmtParams::Gfg(p) => Ok(*p),
        _ => Err(Error::Usage(format!("{id} takes (t, theta, lambda)"))),
    }
}

/// One realization of the left side of `id` together with the closed-form
/// right side.
pub fn identity_sample(
    id: IdentityId,
    params: &RmtParams,
    n: usize,
    rng: RngStream,
) -> Result<(EmpiricalDistribution, SpectralMeasure)> {
    match id {
        IdentityId::AddSemigroup => {
            let p = gfg_of(id, params)?;
            let a = gfg_spectrum(&p, n, rng.child(0))?;
            let b = gfg_spectrum(&p, n, rng.child(1))?;
            let e = free_add_sample(&a.samples, &b.samples, rng.child(2))?;
            let target = GfgParams::new(2.0 * p.t, p.theta, p.lambda)?;
            Ok((e, SpectralMeasure::gfg(&target)))
        }
        IdentityId::MultFormA => {
            let p = gfg_of(id, params)?;
            if p.is_lambda_one() {
                return Err(Error::Core(fgamma_core::Error::Domain(format!("{id} needs lambda > 1"))));
            }
            let a = sample_mp_esd(&MpParams::new(1.0, p.q())?, n, rng.child(0))?;
            let w = sample_mp_esd(&MpParams::new(1.0, 1.0 + p.t / p.theta)?, n, rng.child(1))?;
            let b = esd_map(&w, EsdMap::Reciprocal)?;
            let prod = free_mult_sample(&a.samples, &b.samples, rng.child(2))?;
            let e = esd_map(&prod, EsdMap::Affine { c: p.shift(), shift: 0.0 })?;
            Ok((e, SpectralMeasure::gfg(&p)))
        }
        IdentityId::MultFormB => {
            let p = gfg_of(id, params)?;
            if p.is_lambda_one() {
                return Err(Error::Core(fgamma_core::Error::Domain(format!("{id} needs lambda > 1"))));
            }
            Ok((gfg_spectrum(&p, n, rng)?, SpectralMeasure::gfg(&p)))
        }
        IdentityId::MeixnerShift => {
            let p = gfg_of(id, params)?;
            let e = esd_map(&gfg_spectrum(&p, n, rng)?, EsdMap::Affine { c: 1.0, shift: -p.t })?;
            Ok((e, SpectralMeasure::free_meixner(&FreeMeixnerParams::of_gfg(&p))))
        }
        IdentityId::RatioLaw => {
            let (p, q) = match params {
                RmtParams::Ratio { p, q } => (*p, *q),
                _ => return Err(Error::Usage(format!("{id} takes (p, q)"))),
            };
            let a = gfg_spectrum(&convolution::eta(p, 1.0)?, n, rng.child(0))?;
            let b = esd_map(&gfg_spectrum(&convolution::eta(q, 1.0)?, n, rng.child(1))?, EsdMap::Reciprocal)?;
            let e = free_mult_sample(&a.samples, &b.samples, rng.child(2))?;
            let target = GfgParams::new(p, 1.0, 1.0 + p / (1.0 + q))?;
            Ok((e, SpectralMeasure::gfg(&target).dilate((1.0 + q) / (q * q))))
        }
        IdentityId::InvSumLaw => {
            let (p, k) = match params {
                RmtParams::InvSum { p, n } => (*p, *n),
                _ => return Err(Error::Usage(format!("{id} takes (p, n)"))),
            };
            let tau = convolution::tau(p)?;
            let copies = 1usize << k;
            let mut parts: Vec<EmpiricalDistribution> =
                (0..copies as u64).map(|i| sample_mp_esd(&tau, n, rng.child(i))).collect::<Result<_>>()?;
            let mut level = copies as u64;
            while parts.len() > 1 {
                let mut next = Vec::with_capacity(parts.len() / 2);
                for pair in parts.chunks(2) {
                    next.push(free_add_sample(&pair[0].samples, &pair[1].samples, rng.child(level))?);
                    level += 1;
                }
                parts = next;
            }
            let e = parts.pop().expect("at least one summand");
            let s = convolution::inverse_sum(p, k)?;
            let big = convolution::tau(s.params.t)?;
            Ok((e, SpectralMeasure::mp(&big).dilate(1.0 / s.scale)))
        }
        _ => Err(Error::Usage(format!("{id} has no matrix construction"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedResult {
    pub seed: u64,
    pub stream: u64,
    pub ks: f64,
    pub w1: Option<f64>,
    pub moment_gaps: Vec<f64>,
    pub atom_fraction: f64,
}

/// Per-seed comparisons and the majority verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmtReport {
    pub identity: String,
    pub params: String,
    pub dim: usize,
    pub ks_threshold: f64,
    pub expected_atom: f64,
    pub seeds: Vec<SeedResult>,
    pub pass: bool,
}

/// Runs `seeds` independent realizations, stream `i` for the `i`-th, in
/// parallel; results come back in stream order.
pub fn run_identity(id: IdentityId, params: &RmtParams, n: usize, seed: u64, seeds: usize) -> Result<RmtReport> {
    if seeds == 0 {
        return Err(Error::Usage("need at least one seed".into()));
    }
    let results: Vec<SeedResult> = (0..seeds as u64)
        .into_par_iter()
        .map(|i| -> Result<SeedResult> {
            let rng = RngStream::new(seed, i);
            let (mut e, target) = identity_sample(id, params, n, rng)?;
            let cut = ATOM_THRESHOLD * target.support.hi.max(1e-300);
            let atom_fraction = atom_fraction(&e, target.support.hi.max(1e-300));
            if target.atom0 > 0.0 {
                // null-space eigenvalues come out as +-1e-14 noise; the
                // distance to a law with an atom at 0 needs them at 0
                for x in e.samples.iter_mut().filter(|x| x.abs() < cut) {
                    *x = 0.0;
                }
            }
            let c = compare(&e, &target)?;
            Ok(SeedResult { seed, stream: i, ks: c.ks, w1: c.w1, moment_gaps: c.moment_gaps, atom_fraction })
        })
        .collect::<Result<_>>()?;
    let below = results.iter().filter(|r| r.ks < KS_THRESHOLD).count();
    let expected_atom = match (id, params) {
        (IdentityId::MultFormA | IdentityId::MultFormB, RmtParams::Gfg(p)) => measures::atom_mass(p),
        _ => 0.0,
    };
    Ok(RmtReport {
        identity: id.as_str().into(),
        params: params.to_string(),
        dim: n,
        ks_threshold: KS_THRESHOLD,
        expected_atom,
        seeds: results,
        pass: 2 * below > seeds,
    })
}
