use fgamma_core::cumulants::*;
use fgamma_core::measures::SpectralMeasure;
use fgamma_core::transforms::{gfg_r_branch_point, r_transform, RFamily};

fn triples() -> Vec<ExactParams> {
    let mut out = Vec::new();
    for t in [rat(1, 2), rat(1, 1), rat(3, 1)] {
        for th in [rat(1, 3), rat(1, 1), rat(2, 1)] {
            for l in [rat(1, 1), rat(3, 2), rat(2, 1), rat(5, 1)] {
                out.push(ExactParams::new(t.clone(), th.clone(), l).unwrap());
            }
        }
    }
    out
}

#[test]
fn unit_moments_at_lambda_one() {
    let p = ExactParams::new(rat(1, 1), rat(1, 1), rat(1, 1)).unwrap();
    let m = moments(&p, 4).unwrap();
    assert_eq!(m, vec![rat(1, 1), rat(2, 1), rat(6, 1), rat(22, 1)]);
}

#[test]
fn cumulants_match_series_of_closed_form_r() {
    let ts = triples();
    assert_eq!(ts.len(), 36);
    for e in ts {
        let p = e.to_params().unwrap();
        let exact = free_cumulants(&e, 8).unwrap();
        let r = gfg_r_branch_point(p.theta, p.lambda);
        let f = RFamily::Gfg(p);
        let series = series_oracle(|z| r_transform(&f, z), 8, r, 1e-12).unwrap();
        for (k, c) in exact.iter().zip(series.coeffs.iter()) {
            let k = to_f64(k);
            assert!(c.im.abs() <= 1e-8 * k.abs());
            assert!((c.re - k).abs() <= 1e-8 * k.abs(), "{p:?}: {k} vs {c}");
        }
    }
}

#[test]
fn second_cumulant_and_moment() {
    for e in triples() {
        let k = free_cumulants(&e, 2).unwrap();
        assert_eq!(k[1], &e.t * &e.theta * &e.lambda);
        let m2 = moment(&e, 2).unwrap();
        assert_eq!(m2, &e.t * &e.t + &e.t * &e.theta * &e.lambda);
        // the shorter t^2 + theta t only holds on lambda = 1
        let short = &e.t * &e.t + &e.theta * &e.t;
        assert_eq!(m2 == short, e.lambda == rat(1, 1));
    }
}

#[test]
fn both_moment_routes_agree() {
    for e in triples().into_iter().step_by(5) {
        let k = free_cumulants(&e, 10).unwrap();
        let rec = moments_by_recursion(&k, 10).unwrap();
        for n in 1..=10 {
            assert_eq!(moment_by_profiles(&k, n).unwrap(), rec[n - 1]);
        }
    }
}

#[test]
fn moments_match_quadrature() {
    for e in triples().into_iter().step_by(7) {
        let p = e.to_params().unwrap();
        let m = SpectralMeasure::gfg(&p);
        let exact = moments(&e, 4).unwrap();
        for (n, v) in exact.iter().enumerate() {
            let q = m.moment(n as i32 + 1).unwrap();
            let v = to_f64(v);
            assert!((q - v).abs() <= 1e-9 * v, "{p:?} n={}: {q} vs {v}", n + 1);
        }
    }
}

#[test]
fn mp_moments_are_narayana_sums() {
    // theta = lambda = 1 gives Catalan numbers
    let cat = [1, 2, 5, 14, 42, 132];
    for (n, c) in cat.iter().enumerate() {
        assert_eq!(mp_moment(&rat(1, 1), &rat(1, 1), n + 1).unwrap(), rat(*c, 1));
    }
}

#[test]
fn correlation_of_the_process() {
    let c = process_correlation(1.0, 4.0, 1.0, 2.0).unwrap();
    assert!((c - 0.5).abs() < 1e-15);
    assert!(process_correlation(1.0, 1.0, 1.0, 0.5).is_err());
}
