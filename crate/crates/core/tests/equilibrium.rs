use fgamma_core::convolution::fbp_to_gfg;
use fgamma_core::equilibrium::*;
use fgamma_core::measures::{support, GfgParams, SpectralMeasure};

fn g(t: f64, th: f64, l: f64) -> GfgParams {
    GfgParams::new(t, th, l).unwrap()
}

fn confining() -> Vec<GfgParams> {
    vec![g(1.0, 1.0, 1.0), g(1.0, 1.0, 1.5), g(2.0, 0.5, 1.5), g(3.0, 1.0, 2.5), g(0.5, 0.25, 1.0), g(1.0, 2.0, 1.2)]
}

fn interior(p: &GfgParams, n: usize) -> Vec<f64> {
    let s = support(p);
    (1..=n).map(|i| s.lo + s.width() * i as f64 / (n + 1) as f64).collect()
}

#[test]
fn hilbert_matches_principal_value() {
    for p in confining() {
        let m = SpectralMeasure::gfg(&p);
        for x in interior(&p, 5) {
            let h = hilbert_transform(&p, x).unwrap();
            let pv = pv_hilbert(&m, x, 1e-3, 1e-12).unwrap();
            assert!((h - pv).abs() < 1e-6, "{p:?} x={x}: {h} vs {pv}");
        }
    }
}

#[test]
fn euler_lagrange_residual() {
    for p in confining() {
        for x in interior(&p, 50) {
            assert!(el_residual(&p, x).unwrap().abs() < 1e-10);
        }
    }
    let p = g(2.0, 0.5, 1.5);
    let s = support(&p);
    for x in [s.lo + 1e-3 * s.width(), s.hi - 1e-3 * s.width()] {
        assert!(el_residual(&p, x).unwrap().abs() < 1e-8);
    }
}

#[test]
fn hilbert_rejects_edges() {
    let p = g(1.0, 1.0, 1.0);
    let s = support(&p);
    assert!(hilbert_transform(&p, s.lo).is_err());
    assert!(hilbert_transform(&p, s.hi + 1.0).is_err());
}

#[test]
fn endpoint_integrals_and_sensitivity() {
    for p in confining() {
        let r = endpoint_equations(&p).unwrap();
        assert!(r.eq0.abs() < 1e-8, "{p:?} {r:?}");
        assert!((r.eq2 - 2.0).abs() < 1e-8, "{p:?} {r:?}");
        assert!(gaps_vanish(&r));
    }
    let p = g(1.0, 1.0, 1.5);
    let s = support(&p);
    let (eq0, _) = endpoint_integrals(&p, s.lo * 1.01, s.hi, 1e-12).unwrap();
    assert!(eq0.abs() > 1e-3, "{eq0}");
}

#[test]
fn effective_potential_is_flat() {
    for p in [g(1.0, 1.0, 1.0), g(1.0, 1.0, 1.5)] {
        let s = effective_potential_spread(&p, 30).unwrap();
        assert!(s < 1e-4, "{p:?} {s}");
    }
}

#[test]
fn entropy_regression_value() {
    // 2 ln 2 - 3, first obtained by double quadrature
    let p = g(1.0, 1.0, 1.0);
    let e = free_entropy(&p, &SpectralMeasure::gfg(&p)).unwrap();
    assert!((e.total - (2.0 * std::f64::consts::LN_2 - 3.0)).abs() < 1e-8, "{e:?}");
    assert!((e.total - (e.logarithmic_energy - e.potential_term)).abs() < 1e-15);
    assert!(e.error < 1e-6);
}

#[test]
fn atom_has_divergent_energy() {
    let p = g(1.0, 1.0, 3.0);
    let m = SpectralMeasure::gfg(&p);
    assert!(m.atom0 > 0.0);
    assert!(log_energy(&m, ENTROPY_TOL).is_err());
}

#[test]
fn maximality_at_unit_parameters() {
    let r = maximality_probe(&g(1.0, 1.0, 1.0), &ProbeSpec::default()).unwrap();
    assert_eq!(r.families.iter().map(|f| f.entropies.len()).sum::<usize>(), 20);
    assert!(r.pass, "{r:?}");
}

#[test]
fn zero_mixture_is_the_candidate() {
    let p = g(1.0, 1.0, 1.0);
    let spec =
        ProbeSpec { dilations: vec![1.0], translations: vec![], mixtures: vec![0.0], smoothings: vec![], margin: 1e-6 };
    let r = maximality_probe(&p, &spec).unwrap();
    for f in &r.families {
        for e in &f.entropies {
            assert!((e - r.candidate.total).abs() < 1e-12);
        }
    }
    assert!(!r.pass);
}

#[test]
fn free_beta_prime_maximality() {
    let p = fbp_to_gfg(2.0, 3.0).unwrap();
    assert!(p.lambda < 1.0 + p.t / p.theta);
    let spec = ProbeSpec { smoothings: vec![0.4, 1.0], ..ProbeSpec::default() };
    let r = maximality_probe(&p, &spec).unwrap();
    assert!(r.pass, "{r:?}");
}
