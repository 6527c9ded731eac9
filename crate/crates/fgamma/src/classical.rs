//! Classical samplers and the Monte Carlo checks of the product
//! representations of the Gibbs laws `rho_{t,theta,lambda}`.

use fgamma_core::gibbs;
use fgamma_core::measures::GfgParams;
use fgamma_core::quad;
use fgamma_core::stats;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Knots of the tabulated Gibbs distribution function.
pub const GIBBS_KNOTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicalKind {
    Gamma {
        shape: f64,
        scale: f64,
    },
    /// `1/G` for `G ~ Gamma(shape, scale)`.
    InverseGamma {
        shape: f64,
        scale: f64,
    },
    /// `G_a / G_b` with independent unit-scale gammas.
    BetaPrime {
        a: f64,
        b: f64,
    },
    Gibbs(GfgParams),
}

fn gamma(shape: f64, scale: f64) -> Result<Gamma<f64>> {
    Gamma::new(shape, scale)
        .map_err(|e| Error::Core(fgamma_core::Error::InvalidParams(format!("gamma({shape}, {scale}): {e}"))))
}

/// Inverse-cdf sampler for `rho_{t,theta,lambda}`. The distribution
/// function is tabulated by quadrature in `u = x/(x + s)`, `s` the split
/// point of the density, and interpolated linearly in `u`.
#[derive(Debug, Clone)]
pub struct GibbsSampler {
    split: f64,
    cdf: Vec<f64>,
}

impl GibbsSampler {
    pub fn new(p: &GfgParams) -> Result<Self> {
        let split = if p.is_lambda_one() { p.t * p.t / p.theta } else { p.shift() };
        let pp = *p;
        let f = move |u: f64| {
            if !(u > 0.0 && u < 1.0) {
                return 0.0;
            }
            let r = 1.0 - u;
            gibbs::gibbs_density(&pp, split * u / r) * split / (r * r)
        };
        let mut cdf = Vec::with_capacity(GIBBS_KNOTS + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 0..GIBBS_KNOTS {
            let a = i as f64 / GIBBS_KNOTS as f64;
            let b = (i + 1) as f64 / GIBBS_KNOTS as f64;
            acc += quad::lenient(quad::tanh_sinh(f, a, b, 1e-12), 1e-12)?.value;
            cdf.push(acc);
        }
        if (acc - 1.0).abs() > 1e-8 {
            return Err(Error::Core(fgamma_core::Error::Quadrature { value: acc, error: (acc - 1.0).abs() }));
        }
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        Ok(GibbsSampler { split, cdf })
    }

    pub fn quantile(&self, v: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c <= v).clamp(1, GIBBS_KNOTS);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let frac = if c1 > c0 { ((v - c0) / (c1 - c0)).clamp(0.0, 1.0) } else { 0.5 };
        let u = (k - 1) as f64 / GIBBS_KNOTS as f64 + frac / GIBBS_KNOTS as f64;
        if u >= 1.0 {
            return f64::MAX;
        }
        self.split * u / (1.0 - u)
    }

    /// Distribution function from the table.
    pub fn cdf(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        if x.is_infinite() {
            return 1.0;
        }
        let v = x / (x + self.split) * GIBBS_KNOTS as f64;
        let k = (v.floor() as usize).min(GIBBS_KNOTS - 1);
        let frac = v - k as f64;
        self.cdf[k] + frac * (self.cdf[k + 1] - self.cdf[k])
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

/// `n` i.i.d. draws.
pub fn classical_sampler(kind: ClassicalKind, n: usize, stream: RngStream) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Usage("need n >= 1".into()));
    }
    let mut rng = stream.rng();
    Ok(match kind {
        ClassicalKind::Gamma { shape, scale } => {
            let g = gamma(shape, scale)?;
            (0..n).map(|_| g.sample(&mut rng)).collect()
        }
        ClassicalKind::InverseGamma { shape, scale } => {
            let g = gamma(shape, scale)?;
            (0..n).map(|_| 1.0 / g.sample(&mut rng)).collect()
        }
        ClassicalKind::BetaPrime { a, b } => {
            let (ga, gb) = (gamma(a, 1.0)?, gamma(b, 1.0)?);
            (0..n).map(|_| ga.sample(&mut rng) / gb.sample(&mut rng)).collect()
        }
        ClassicalKind::Gibbs(p) => {
            let s = GibbsSampler::new(&p)?;
            (0..n).map(|_| s.sample(&mut rng)).collect()
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ClassicalIdentity {
    /// `D_{t(lambda-1)}(gamma(q,1) * gamma(1+t/theta,1)^{-1})`.
    #[serde(rename = "RHO_MULT_A")]
    RhoMultA,
    /// `rho_{t,theta,1} * gamma(q, 1/q)`.
    #[serde(rename = "RHO_MULT_B")]
    RhoMultB,
    /// `rho_{t,theta,1} * gamma(1,1)` against `rho_{t,theta,1+t/theta}`.
    #[serde(rename = "RHO_ME")]
    RhoMe,
}

impl ClassicalIdentity {
    pub const ALL: [ClassicalIdentity; 3] =
        [ClassicalIdentity::RhoMultA, ClassicalIdentity::RhoMultB, ClassicalIdentity::RhoMe];

    pub fn as_str(&self) -> &'static str {
        match self {
            ClassicalIdentity::RhoMultA => "RHO_MULT_A",
            ClassicalIdentity::RhoMultB => "RHO_MULT_B",
            ClassicalIdentity::RhoMe => "RHO_ME",
        }
    }
}

impl std::str::FromStr for ClassicalIdentity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        ClassicalIdentity::ALL
            .into_iter()
            .find(|id| id.as_str() == norm)
            .ok_or_else(|| Error::Usage(format!("unknown classical identity {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalReport {
    pub identity: ClassicalIdentity,
    pub params: String,
    pub n: usize,
    pub ks: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// `max(0.02, 3 sqrt(ln 2 / n))`.
pub fn ks_threshold(n: usize) -> f64 {
    (3.0 * (std::f64::consts::LN_2 / n as f64).sqrt()).max(0.02)
}

/// Products of independent draws compared with the quadrature
/// distribution function of the target Gibbs law. `RHO_ME` uses only
/// `(t, theta)` of `p`.
pub fn verify_classical_identity(
    id: ClassicalIdentity,
    p: &GfgParams,
    n: usize,
    stream: RngStream,
) -> Result<ClassicalReport> {
    if n < 10_000 {
        return Err(Error::Usage(format!("classical identities need n >= 10^4, got {n}")));
    }
    let r = p.t / p.theta;
    let need_lambda = || -> Result<()> {
        if p.is_lambda_one() {
            return Err(Error::Core(fgamma_core::Error::Domain(format!("{} needs lambda > 1", id.as_str()))));
        }
        Ok(())
    };
    let base = GfgParams::new(p.t, p.theta, 1.0)?;
    let (samples, target) = match id {
        ClassicalIdentity::RhoMultA => {
            need_lambda()?;
            let a = classical_sampler(ClassicalKind::Gamma { shape: p.q(), scale: 1.0 }, n, stream.child(0))?;
            let b = classical_sampler(ClassicalKind::InverseGamma { shape: 1.0 + r, scale: 1.0 }, n, stream.child(1))?;
            let c = p.shift();
            (a.iter().zip(&b).map(|(x, y)| c * x * y).collect::<Vec<_>>(), *p)
        }
        ClassicalIdentity::RhoMultB => {
            need_lambda()?;
            let a = classical_sampler(ClassicalKind::Gibbs(base), n, stream.child(0))?;
            let q = p.q();
            let b = classical_sampler(ClassicalKind::Gamma { shape: q, scale: 1.0 / q }, n, stream.child(1))?;
            (a.iter().zip(&b).map(|(x, y)| x * y).collect(), *p)
        }
        ClassicalIdentity::RhoMe => {
            let a = classical_sampler(ClassicalKind::Gibbs(base), n, stream.child(0))?;
            let b = classical_sampler(ClassicalKind::Gamma { shape: 1.0, scale: 1.0 }, n, stream.child(1))?;
            (a.iter().zip(&b).map(|(x, y)| x * y).collect(), GfgParams::new(p.t, p.theta, 1.0 + r)?)
        }
    };
    let ks = ks_to_gibbs(samples, &target)?;
    let threshold = ks_threshold(n);
    Ok(ClassicalReport {
        identity: id,
        params: format!("t={} theta={} lambda={}", target.t, target.theta, target.lambda),
        n,
        ks,
        threshold,
        pass: ks < threshold,
    })
}

/// KS distance of a sample to `rho_{t,theta,lambda}`, with the
/// distribution function taken from the quadrature table.
pub fn ks_to_gibbs(mut samples: Vec<f64>, p: &GfgParams) -> Result<f64> {
    if samples.is_empty() || samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Usage("need a non-empty sample without NaN".into()));
    }
    samples.sort_by(f64::total_cmp);
    let table = GibbsSampler::new(p)?;
    let f: Vec<f64> = samples.iter().map(|&x| table.cdf(x)).collect();
    Ok(stats::ks_from_cdf(&samples, &f, &f))
}
