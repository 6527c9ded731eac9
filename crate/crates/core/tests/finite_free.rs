use fgamma_core::cumulants::{rat, ExactParams};
use fgamma_core::finite_free::*;
use fgamma_core::measures::GfgParams;
use std::time::Instant;

fn exact(t: i64, th: i64, l: i64) -> ExactParams {
    ExactParams::new(rat(t, 1), rat(th, 1), rat(l, 1)).unwrap()
}

// extreme roots computed independently with 200-digit arithmetic
const TABLE: &[(i64, usize, f64, f64)] = &[
    (2, 16, 0.006779281378955939, 5.156798922357604),
    (2, 32, 0.0017400530709877839, 5.9199647583879855),
    (2, 64, 0.000441302509227545, 6.535009245882971),
    (2, 128, 0.00011115495575798057, 6.998177386303192),
    (1, 16, 0.20722122122832595, 3.720689310968687),
    (1, 32, 0.19285993209748623, 4.312965759585785),
    (1, 64, 0.18456180689963933, 4.776271964351039),
    (1, 128, 0.1796001427063769, 5.117181864203131),
];

#[test]
fn extreme_roots_match_high_precision_values() {
    for &(l, d, lo, hi) in TABLE {
        let t0 = Instant::now();
        let r = roots(&build_p_d(&exact(1, 1, l), d).unwrap()).unwrap();
        let (a, b) = (r.roots[0], r.roots[d - 1]);
        println!("lambda={l} d={d} {a:e} {b} res={:e} {:?}", r.residual_max, t0.elapsed());
        assert_eq!(r.roots.len(), d);
        assert!((a - lo).abs() <= 1e-12 * lo, "{a} vs {lo}");
        assert!((b - hi).abs() <= 1e-12 * hi, "{b} vs {hi}");
        assert!(r.residual_max < 1e-12);
        assert!(!r.multiplicity_warning);
        assert!(r.roots.iter().all(|&x| x > 0.0));
    }
}

#[test]
fn roots_reproduce_coefficients() {
    let p = build_p_d(&exact(2, 1, 3), 12).unwrap();
    let r = roots(&p).unwrap();
    let e = e_tilde_from_roots(&r.roots);
    for (a, b) in e.iter().zip(p.e_tilde_f64()) {
        assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0), "{a} {b}");
    }
}

#[test]
fn degree_one_at_unit_params() {
    let p = build_p_d(&exact(1, 1, 1), 1).unwrap();
    assert_eq!(p.e_tilde()[1], rat(1, 1));
    assert_eq!(roots(&p).unwrap().roots, vec![1.0]);
}

#[test]
fn bessel_example() {
    let b = bessel_poly(&rat(-2, 1), 2).unwrap();
    assert_eq!(b.e_tilde(), &[rat(1, 1), rat(-1, 2), rat(1, 5)]);
}

#[test]
fn mean_matches_first_moment() {
    // root mean t + theta (lambda - 1) / d, exactly t when lambda = 1
    for d in [1i64, 2, 5, 40] {
        for (t, th, l) in [(1, 1, 2), (3, 2, 5), (1, 1, 1)] {
            let mean = rat(t, 1) + rat(th * (l - 1), d);
            assert_eq!(build_p_d(&exact(t, th, l), d as usize).unwrap().e_tilde()[1], mean);
        }
    }
}

#[test]
fn convergence_shrinks_with_degree() {
    let p = GfgParams::new(1.0, 1.0, 2.0).unwrap();
    let rows = convergence_study(&p, &[8, 16, 32, 64]).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].w1 < w[0].w1, "{rows:?}");
    }
    assert!(rows.last().unwrap().w1 < 0.05);
}

#[test]
fn s_ratio_tends_to_s_transform() {
    use fgamma_core::transforms::{s_transform, SFamily};
    let p = GfgParams::new(1.0, 1.0, 2.0).unwrap();
    let poly = build_p_d(&ExactParams::from_params(&p).unwrap(), 400).unwrap();
    let ratio = finite_s_ratio(&poly, 200).unwrap();
    let s = s_transform(&SFamily::Gfg(p), -0.5).unwrap();
    assert!((ratio - s).abs() < 2e-2 * s.abs(), "{ratio} {s}");
}
