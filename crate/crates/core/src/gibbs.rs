//! Gibbs measures `exp(-V)/Z` attached to the generalized free gamma laws,
//! their closed-form normalizers, dictionary densities and Pearson ODE.

use alloc::format;
use alloc::vec;

use crate::error::{Error, Result};
use crate::measures::{GfgParams, SpectralMeasure, SupportInterval};
use crate::quad::{self, Estimate};

fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

/// The confining potential `V_{t,theta,lambda}` on `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential {
    pub params: GfgParams,
}

impl Potential {
    pub fn new(params: GfgParams) -> Self {
        Potential { params }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = &self.params;
        let r = p.t / p.theta;
        if p.is_lambda_one() {
            (2.0 + r) * libm::log(x) + p.t * p.t / (p.theta * x)
        } else {
            let q = p.q();
            (1.0 - q) * libm::log(x) + (1.0 + r + q) * libm::log(x + p.shift())
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let p = &self.params;
        let r = p.t / p.theta;
        if p.is_lambda_one() {
            (2.0 + r) / x - p.t * p.t / (p.theta * x * x)
        } else {
            let q = p.q();
            (1.0 - q) / x + (1.0 + r + q) / (x + p.shift())
        }
    }
}

/// `ln Z`; for `lambda > 1` the prefactor is `(t(lambda-1))^{-1-t/theta}`.
pub fn log_partition_function(p: &GfgParams) -> f64 {
    let r = p.t / p.theta;
    if p.is_lambda_one() {
        -(1.0 + r) * libm::log(p.t * p.t / p.theta) + libm::lgamma(1.0 + r)
    } else {
        -(1.0 + r) * libm::log(p.shift()) + ln_beta(p.q(), 1.0 + r)
    }
}

pub fn partition_function(p: &GfgParams) -> f64 {
    libm::exp(log_partition_function(p))
}

/// `Z` by adaptive quadrature of `exp(-V)`, split at `t(lambda-1)` (or at
/// `t^2/theta` when `lambda = 1`).
pub fn partition_function_quadrature(p: &GfgParams, tol: f64) -> Result<Estimate> {
    let v = Potential::new(*p);
    let split = if p.is_lambda_one() { p.t * p.t / p.theta } else { p.shift() };
    let f = |x: f64| if x > 0.0 { libm::exp(-v.eval(x)) } else { 0.0 };
    let a = quad::tanh_sinh(f, 0.0, split, tol)?;
    let b = quad::tanh_sinh_to_inf(f, split, tol)?;
    Ok(Estimate { value: a.value + b.value, error: a.error + b.error })
}

pub fn gibbs_density(p: &GfgParams, x: f64) -> f64 {
    if !(x > 0.0) || x.is_infinite() {
        return 0.0;
    }
    libm::exp(-Potential::new(*p).eval(x) - log_partition_function(p))
}

/// `rho_{t,theta,lambda}` as a measure on `(0, inf)`.
pub fn gibbs_measure(p: &GfgParams) -> SpectralMeasure {
    let pp = *p;
    let split = if p.is_lambda_one() { p.t * p.t / p.theta } else { p.shift() };
    SpectralMeasure::new(0.0, SupportInterval { lo: 0.0, hi: f64::INFINITY }, move |x| gibbs_density(&pp, x))
        .with_breaks(vec![split])
}

/// Density of `1/G` for `G ~ Gamma(shape, scale)`.
pub fn inverse_gamma_density(shape: f64, scale: f64, x: f64) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    let ln = -(shape + 1.0) * libm::log(x) - 1.0 / (scale * x) - libm::lgamma(shape) - shape * libm::log(scale);
    libm::exp(ln)
}

/// Density of `D_c` of the beta prime law `beta'(a, b)`.
pub fn scaled_beta_prime_density(c: f64, a: f64, b: f64, x: f64) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    let u = x / c;
    let ln = (a - 1.0) * libm::log(u) - (a + b) * libm::log1p(u) - ln_beta(a, b);
    libm::exp(ln) / c
}

/// Closed-form classical law that `rho` should coincide with.
pub fn dictionary_density(p: &GfgParams, x: f64) -> f64 {
    let r = p.t / p.theta;
    if p.is_lambda_one() {
        inverse_gamma_density(1.0 + r, p.theta / (p.t * p.t), x)
    } else {
        scaled_beta_prime_density(p.shift(), p.q(), 1.0 + r, x)
    }
}

/// Pearson ODE in polynomial form, `D(x) (log rho)'(x) + N(x)`, with
/// `N/D` the displayed rational coefficient. Vanishes identically.
pub fn pearson_residual(p: &GfgParams, x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("Pearson residual needs x > 0, got {x}")));
    }
    let (t, th) = (p.t, p.theta);
    let k = 2.0 * th + t;
    let (num, den) = if p.is_lambda_one() {
        (x - t * t / k, th / k * x * x)
    } else {
        let l = p.lambda;
        let h = x + 0.5 * p.shift();
        (h - t * t * (l + 1.0) / (2.0 * k), th / k * h * h - t * t * th * (l - 1.0) * (l - 1.0) / (4.0 * k))
    };
    let dlog = -Potential::new(*p).derivative(x);
    Ok(den * dlog + num)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(t: f64, th: f64, l: f64) -> GfgParams {
        GfgParams::new(t, th, l).unwrap()
    }

    #[test]
    fn partition_examples() {
        assert!((partition_function(&g(1.0, 1.0, 1.0)) - 1.0).abs() < 1e-14);
        assert!((partition_function(&g(1.0, 1.0, 2.0)) - 0.5).abs() < 1e-14);
        assert!((partition_function(&g(2.0, 1.0, 1.0)) - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn density_example() {
        assert!((gibbs_density(&g(1.0, 1.0, 2.0), 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn pearson_examples() {
        assert!(pearson_residual(&g(1.0, 1.0, 1.0), 1.0).unwrap().abs() < 1e-12);
        assert!(pearson_residual(&g(1.0, 1.0, 2.0), 2.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for p in [g(1.0, 1.0, 1.0), g(2.0, 0.5, 1.5), g(0.3, 2.0, 4.0)] {
            let v = Potential::new(p);
            for &x in &[0.1, 1.0, 7.5] {
                let h = 1e-5 * x;
                let fd = (v.eval(x + h) - v.eval(x - h)) / (2.0 * h);
                assert!((fd - v.derivative(x)).abs() <= 1e-6 * v.derivative(x).abs().max(1.0));
            }
        }
    }
}
