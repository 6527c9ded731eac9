//! Equilibrium-measure checks for the potential `V_{t,theta,lambda}`:
//! Hilbert transform, Euler-Lagrange residual, endpoint equations, the free
//! entropy functional and a perturbative maximality probe.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::{Cell, RefCell};
use core::f64::consts::PI;

use num_traits::Zero;

use crate::cumulants::{ExactParams, Rational};
use crate::error::{Error, Result};
use crate::gibbs::Potential;
use crate::measures::{self, GfgParams, MpParams, SpectralMeasure, SupportInterval};
use crate::quad;

fn check_confining(p: &GfgParams) -> Result<()> {
    if p.lambda >= p.boundary() {
        return Err(Error::Domain(format!(
            "needs 1 <= lambda < 1 + t/theta = {}, got lambda = {}",
            p.boundary(),
            p.lambda
        )));
    }
    Ok(())
}

/// Closed-form Hilbert transform of `mu_{t,theta,lambda}` on the open support.
pub fn hilbert_transform(p: &GfgParams, x: f64) -> Result<f64> {
    let s = measures::support(p);
    if !(x > s.lo && x < s.hi) {
        return Err(Error::Domain(format!("x = {x} is not inside ({}, {})", s.lo, s.hi)));
    }
    let (t, th) = (p.t, p.theta);
    let num = (t + 2.0 * th) * x - t * (t - th * (p.lambda - 1.0));
    Ok(num / (2.0 * th * x * (x + p.shift())))
}

/// Principal value `PV integral dmu(y)/(x - y)` by symmetric excision at
/// `eps` and `eps/10`, combined with one Richardson step.
pub fn pv_hilbert(m: &SpectralMeasure, x: f64, eps: f64, tol: f64) -> Result<f64> {
    let s = m.support;
    if !(x - eps > s.lo && x + eps < s.hi) {
        return Err(Error::Domain(format!("x = {x} too close to the support edges")));
    }
    let excised = |e: f64| -> Result<f64> {
        let a = m.integrate_density(|y| 1.0 / (x - y), s.lo, x - e, tol)?;
        let b = m.integrate_density(|y| 1.0 / (x - y), x + e, s.hi, tol)?;
        Ok(a.value + b.value)
    };
    let h1 = excised(eps)?;
    let h2 = excised(0.1 * eps)?;
    let atom = if m.atom0 > 0.0 { m.atom0 / x } else { 0.0 };
    Ok((10.0 * h2 - h1) / 9.0 + atom)
}

/// `H(x) - V'(x)/2`.
pub fn el_residual(p: &GfgParams, x: f64) -> Result<f64> {
    Ok(hilbert_transform(p, x)? - 0.5 * Potential::new(*p).derivative(x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndpointReport {
    /// `(1/pi) integral V'(x) / sqrt((b-x)(x-a))`, expected 0.
    pub eq0: f64,
    /// `(1/pi) integral x V'(x) / sqrt((b-x)(x-a))`, expected 2.
    pub eq2: f64,
    /// `a + b - 2(theta(lambda+1) + t)`, exact.
    pub sum_gap: Rational,
    /// `ab - (theta(lambda-1) - t)^2`, exact.
    pub prod_gap: Rational,
}

/// The two singular integral equations at arbitrary endpoints.
pub fn endpoint_integrals(p: &GfgParams, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    if !(0.0 < a && a < b) {
        return Err(Error::Domain(format!("need 0 < a < b, got ({a}, {b})")));
    }
    let v = Potential::new(*p);
    let e0 = quad::chebyshev_gauss_adaptive(|x| v.derivative(x), a, b, tol)?;
    let e2 = quad::chebyshev_gauss_adaptive(|x| x * v.derivative(x), a, b, tol)?;
    Ok((e0.value, e2.value))
}

pub fn endpoint_equations(p: &GfgParams) -> Result<EndpointReport> {
    check_confining(p)?;
    let s = measures::support(p);
    let (eq0, eq2) = endpoint_integrals(p, s.lo, s.hi, 1e-12)?;
    // edges are A -/+ sqrt(D): work in Q(sqrt D) with a + b = 2A, ab = A^2 - D
    let e = ExactParams::from_params(p)?;
    let one = Rational::from_integer(1.into());
    let two = Rational::from_integer(2.into());
    let four = Rational::from_integer(4.into());
    let big_a = &e.theta * (&e.lambda + &one) + &e.t;
    let big_d = four * &e.theta * &e.lambda * (&e.theta + &e.t);
    let sum = &two * &big_a;
    let prod = &big_a * &big_a - &big_d;
    let g = &e.theta * (&e.lambda - &one) - &e.t;
    let sum_gap = sum - two * (&e.theta * (&e.lambda + &one) + &e.t);
    let prod_gap = prod - &g * &g;
    Ok(EndpointReport { eq0, eq2, sum_gap, prod_gap })
}

/// `Sigma_V(mu)` split into its two terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyValue {
    pub logarithmic_energy: f64,
    pub potential_term: f64,
    pub total: f64,
    pub error: f64,
}

pub const ENTROPY_TOL: f64 = 1e-10;

// rounding can put a mapped node onto the singularity itself
fn safe_log(d: f64) -> f64 {
    if d > 0.0 {
        libm::log(d)
    } else {
        0.0
    }
}

/// `integral_{lo}^{x} log(x - y) f(y) dy`, piecewise between breaks and in
/// local coordinates so that `x - y` keeps full relative precision.
fn inner_log(m: &SpectralMeasure, x: f64, tol: f64) -> Result<quad::Estimate> {
    let lo = m.support.lo;
    let mut pts = vec![lo];
    pts.extend(m.breaks.iter().copied().filter(|b| *b > lo && *b < x));
    pts.push(x);
    let mut total = quad::Estimate { value: 0.0, error: 0.0 };
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = b - a;
        let last = b == x;
        let e = quad::tanh_sinh(
            |u| {
                let y = a + h * u;
                let d = if last { h * (1.0 - u) } else { x - y };
                safe_log(d) * m.density(y) * h
            },
            0.0,
            1.0,
            tol,
        );
        // pieces hugging an edge carry rounding noise far below any
        // quantity of interest
        let e = quad::lenient(e, 1e-15)?;
        total.value += e.value;
        total.error += e.error;
    }
    Ok(total)
}

/// `2 integral f(x) integral_{y<x} log(x - y) f(y) dy dx`.
pub fn log_energy(m: &SpectralMeasure, tol: f64) -> Result<quad::Estimate> {
    if m.atom0 > 0.0 {
        return Err(Error::Divergent("logarithmic energy of a measure with an atom is -infinity".into()));
    }
    let s = m.support;
    if !s.hi.is_finite() {
        return Err(Error::Domain("log energy is only implemented for compact supports".into()));
    }
    let inner_err = Cell::new(0.0f64);
    let failure = RefCell::new(None);
    let outer = m.integrate_density(
        |x| match inner_log(m, x, tol) {
            Ok(e) => {
                inner_err.set(inner_err.get().max(e.error));
                e.value
            }
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                0.0
            }
        },
        s.lo,
        s.hi,
        tol,
    );
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    let outer = outer?;
    Ok(quad::Estimate { value: 2.0 * outer.value, error: 2.0 * (outer.error + inner_err.get()) })
}

/// Free entropy `Sigma_V(m)` with `V = V_{t,theta,lambda}`.
pub fn free_entropy(p: &GfgParams, m: &SpectralMeasure) -> Result<EntropyValue> {
    check_confining(p)?;
    if m.support.lo < 0.0 {
        return Err(Error::Domain("measure must live on [0, inf)".into()));
    }
    let energy = log_energy(m, ENTROPY_TOL)?;
    let v = Potential::new(*p);
    let pot = m.integrate_density(|x| v.eval(x), m.support.lo, m.support.hi, ENTROPY_TOL)?;
    Ok(EntropyValue {
        logarithmic_energy: energy.value,
        potential_term: pot.value,
        total: energy.value - pot.value,
        error: energy.error + pot.error,
    })
}

/// `F(x) = 2 integral log|x - y| dmu(y) - V(x)`, constant on the support.
pub fn effective_potential(p: &GfgParams, x: f64) -> Result<f64> {
    let m = SpectralMeasure::gfg(p);
    let s = m.support;
    let l = m.integrate_density(|y| safe_log(x - y), s.lo, x, 1e-12)?;
    let r = m.integrate_density(|y| safe_log(y - x), x, s.hi, 1e-12)?;
    Ok(2.0 * (l.value + r.value) - Potential::new(*p).eval(x))
}

/// Sample standard deviation of `F` on `n` interior points.
pub fn effective_potential_spread(p: &GfgParams, n: usize) -> Result<f64> {
    check_confining(p)?;
    let s = measures::support(p);
    let vals: Vec<f64> =
        (1..=n).map(|i| effective_potential(p, s.lo + s.width() * i as f64 / (n + 1) as f64)).collect::<Result<_>>()?;
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    Ok(libm::sqrt(var))
}

/// Barycentric interpolant on Chebyshev points of the second kind.
#[derive(Debug, Clone)]
struct ChebPiece {
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl ChebPiece {
    fn build<F: Fn(f64) -> Result<f64>>(f: F, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let nodes: Vec<f64> = (0..=n).map(|j| mid - half * libm::cos(PI * j as f64 / n as f64)).collect();
        let values = nodes.iter().map(|&x| f(x)).collect::<Result<_>>()?;
        Ok(ChebPiece { lo, hi, nodes, values })
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.nodes.len() - 1;
        let (mut num, mut den) = (0.0, 0.0);
        for (j, (&xj, &fj)) in self.nodes.iter().zip(self.values.iter()).enumerate() {
            let d = x - xj;
            if d == 0.0 {
                return fj;
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                w *= 0.5;
            }
            num += w * fj / d;
            den += w / d;
        }
        num / den
    }
}

/// Chebyshev nodes per piece of a tabulated smoothing.
const SMOOTHING_NODES: usize = 128;

/// Gaussian-kernel smoothing, kernel truncated at `4h` and renormalized.
/// The smoothed density is tabulated on Chebyshev pieces split where the
/// kernel window crosses the support edges; the interpolant, clipped at 0
/// and renormalized, is the returned measure.
pub fn gaussian_smoothing(m: &SpectralMeasure, h: f64) -> Result<SpectralMeasure> {
    if m.atom0 > 0.0 || !m.support.hi.is_finite() || !(h > 0.0) {
        return Err(Error::Domain("smoothing needs an atomless compactly supported measure and h > 0".into()));
    }
    let s = m.support;
    let w = 4.0 * h;
    let kernel_mass = libm::erf(4.0 / core::f64::consts::SQRT_2);
    let norm = 1.0 / (h * libm::sqrt(2.0 * PI) * kernel_mass);
    let conv = |x: f64| -> Result<f64> {
        let g = |y: f64| {
            let u = (x - y) / h;
            libm::exp(-0.5 * u * u)
        };
        quad::lenient(m.integrate_density(g, x - w, x + w, 1e-12), 1e-15).map(|e| e.value * norm)
    };
    let mut cuts = vec![s.lo - w, s.lo + w, s.hi - w, s.hi + w];
    cuts.extend(m.breaks.iter().flat_map(|b| [b - w, b + w]));
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();
    let pieces: Vec<ChebPiece> = cuts
        .windows(2)
        .filter(|c| c[1] > c[0])
        .map(|c| ChebPiece::build(conv, c[0], c[1], SMOOTHING_NODES))
        .collect::<Result<_>>()?;
    let eval = move |x: f64| {
        let i = pieces.partition_point(|p| p.hi < x).min(pieces.len() - 1);
        let p = &pieces[i];
        if x < p.lo || x > p.hi {
            0.0
        } else {
            p.eval(x).max(0.0)
        }
    };
    let support = SupportInterval { lo: s.lo - w, hi: s.hi + w };
    let raw = SpectralMeasure::new(0.0, support, eval.clone()).with_breaks(cuts.clone());
    let mass = raw.total_mass()?;
    Ok(SpectralMeasure::new(0.0, support, move |x| eval(x) / mass).with_breaks(cuts))
}

/// One perturbation family of the probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeFamily {
    pub name: String,
    pub magnitudes: Vec<f64>,
    pub entropies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximalityReport {
    pub candidate: EntropyValue,
    pub families: Vec<ProbeFamily>,
    /// Smallest `candidate - perturbed` over all probes.
    pub min_margin: f64,
    pub pass: bool,
}

/// Magnitudes for each family.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpec {
    pub dilations: Vec<f64>,
    /// Multiples of the left edge `alpha^-`.
    pub translations: Vec<f64>,
    pub mixtures: Vec<f64>,
    /// Bandwidths as multiples of `alpha^-/5`.
    pub smoothings: Vec<f64>,
    pub margin: f64,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec {
            dilations: vec![0.8, 0.9, 1.1, 1.2, 1.25],
            translations: vec![-0.5, -0.2, 0.2, 0.5, 1.0],
            mixtures: vec![0.1, 0.2, 0.3, 0.5, 0.8],
            smoothings: vec![0.4, 0.55, 0.7, 0.85, 1.0],
            margin: 1e-6,
        }
    }
}

/// Entropies of perturbations of `mu_{t,theta,lambda}`; passes when every
/// probe scores below the candidate by more than `spec.margin`. This does
/// not establish uniqueness, it only fails to refute it.
pub fn maximality_probe(p: &GfgParams, spec: &ProbeSpec) -> Result<MaximalityReport> {
    check_confining(p)?;
    let mu = SpectralMeasure::gfg(p);
    let candidate = free_entropy(p, &mu)?;
    let lo = mu.support.lo;
    let reference = SpectralMeasure::mp(&MpParams::new(0.25 * p.t, 4.0)?);
    let mut families = Vec::new();
    let mut run = |name: &str, mags: &[f64], make: &dyn Fn(f64) -> Result<SpectralMeasure>| -> Result<()> {
        let mut entropies = Vec::with_capacity(mags.len());
        for &c in mags {
            let m = make(c)?;
            if m.support.lo <= 0.0 {
                return Err(Error::Domain(format!("{name} perturbation {c} leaves (0, inf)")));
            }
            entropies.push(free_entropy(p, &m)?.total);
        }
        families.push(ProbeFamily { name: name.into(), magnitudes: mags.to_vec(), entropies });
        Ok(())
    };
    run("dilation", &spec.dilations, &|c| Ok(mu.dilate(c)))?;
    run("translation", &spec.translations, &|c| Ok(mu.translate(c * lo)))?;
    run("mixture", &spec.mixtures, &|e| Ok(mu.mix(&reference, e)))?;
    run("smoothing", &spec.smoothings, &|c| gaussian_smoothing(&mu, c * lo / 5.0))?;
    let min_margin =
        families.iter().flat_map(|f| f.entropies.iter()).map(|e| candidate.total - e).fold(f64::INFINITY, f64::min);
    Ok(MaximalityReport { candidate, families, min_margin, pass: min_margin > spec.margin })
}

/// Whether both exact gaps vanish.
pub fn gaps_vanish(r: &EndpointReport) -> bool {
    r.sum_gap.is_zero() && r.prod_gap.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(t: f64, th: f64, l: f64) -> GfgParams {
        GfgParams::new(t, th, l).unwrap()
    }

    #[test]
    fn hilbert_example() {
        assert!((hilbert_transform(&g(1.0, 1.0, 1.0), 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(hilbert_transform(&g(1.0, 1.0, 1.0), 10.0).is_err());
    }

    #[test]
    fn endpoint_example() {
        let r = endpoint_equations(&g(1.0, 1.0, 1.5)).unwrap();
        assert!(r.eq0.abs() < 1e-8, "{}", r.eq0);
        assert!((r.eq2 - 2.0).abs() < 1e-8, "{}", r.eq2);
        assert!(gaps_vanish(&r));
    }

    #[test]
    fn atom_is_divergent() {
        let p = g(1.0, 1.0, 3.0);
        let m = SpectralMeasure::gfg(&p);
        assert!(matches!(log_energy(&m, 1e-8), Err(Error::Divergent(_))));
    }
}
