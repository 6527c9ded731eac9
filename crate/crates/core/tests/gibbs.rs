use fgamma_core::gibbs::*;
use fgamma_core::measures::GfgParams;

fn g(t: f64, th: f64, l: f64) -> GfgParams {
    GfgParams::new(t, th, l).unwrap()
}

fn grid() -> Vec<GfgParams> {
    vec![
        g(1.0, 1.0, 1.0),
        g(1.0, 1.0, 2.0),
        g(2.0, 1.0, 1.0),
        g(0.5, 2.0, 1.5),
        g(3.0, 0.5, 4.0),
        g(1.0, 1.0, 3.0),
        g(0.2, 0.3, 1.2),
        g(5.0, 1.0, 1.0),
    ]
}

#[test]
fn partition_function_matches_quadrature() {
    for p in grid() {
        let z = partition_function(&p);
        let q = partition_function_quadrature(&p, 1e-12).unwrap();
        assert!((z - q.value).abs() < 1e-6 * z, "{p:?}: {z} vs {}", q.value);
    }
}

#[test]
fn prefactor_uses_lambda_minus_one() {
    let z = partition_function(&g(1.0, 1.0, 2.0));
    assert!((z - 0.5).abs() < 1e-15);
    assert!((z - 1.0 / 18.0).abs() > 0.4);
}

#[test]
fn density_is_normalized() {
    for p in grid() {
        let m = gibbs_measure(&p);
        let total = m.total_mass().unwrap();
        assert!((total - 1.0).abs() < 1e-8, "{p:?}: {total}");
    }
}

#[test]
fn dictionary_matches_pointwise() {
    for p in grid() {
        for i in 0..60 {
            let x = 10f64.powf(-3.0 + 6.0 * i as f64 / 59.0);
            let a = gibbs_density(&p, x);
            let b = dictionary_density(&p, x);
            assert!((a - b).abs() <= 1e-12 * b.max(1e-300) + 1e-300, "{p:?} x={x}: {a} vs {b}");
        }
    }
}

#[test]
fn pearson_residual_vanishes() {
    for p in grid() {
        for i in 0..100 {
            let x = 10f64.powf(-2.0 + 4.0 * i as f64 / 99.0);
            let r = pearson_residual(&p, x).unwrap();
            assert!(r.abs() <= 1e-10, "{p:?} x={x}: {r}");
        }
    }
    assert!(pearson_residual(&g(1.0, 1.0, 1.0), 0.0).is_err());
}

#[test]
fn tail_order() {
    let p = g(1.0, 1.0, 1.0);
    let r = gibbs_density(&p, 2e6) / gibbs_density(&p, 1e6);
    assert!((r - 0.125).abs() < 1e-5);
}
