//! End-to-end acceptance checks, one test per criterion. Each prints a
//! single `criterion N: PASS|FAIL` line before asserting.

use std::time::{Duration, Instant};

use fgamma::classical::{self, ClassicalIdentity};
use fgamma::rmt::{self, RmtParams};
use fgamma::rng::{RngStream, DEFAULT_SEED};
use fgamma_core::convolution::{self, IdentityId, IDENTITY_TOL};
use fgamma_core::cumulants::{self, rat, ExactParams};
use fgamma_core::equilibrium::{self, ProbeSpec};
use fgamma_core::finite_free;
use fgamma_core::gibbs;
use fgamma_core::measures::{self, GfgParams, SpectralMeasure};
use fgamma_core::transforms::{self, InversionConfig, RFamily, SFamily};

fn g(t: f64, th: f64, l: f64) -> GfgParams {
    GfgParams::new(t, th, l).unwrap()
}

fn report(n: u32, what: &str, pass: bool, detail: String, started: Instant, budget: Duration) {
    let took = started.elapsed();
    let ok = pass && took <= budget;
    println!(
        "criterion {n}: {} {what} ({detail}; {:.1}s of {}s)",
        if ok { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        budget.as_secs()
    );
    assert!(pass, "criterion {n} failed: {detail}");
    assert!(took <= budget, "criterion {n} over budget: {took:?}");
}

#[test]
fn criterion_1_unit_moments() {
    let start = Instant::now();
    let p = ExactParams::new(rat(1, 1), rat(1, 1), rat(1, 1)).unwrap();
    let m = cumulants::moments(&p, 4).unwrap();
    let want = [1, 2, 6, 22].map(|k| rat(k, 1)).to_vec();
    let shown: Vec<String> = m.iter().map(cumulants::format_rational).collect();
    report(
        1,
        "exact moments at (1,1,1)",
        m == want,
        format!("m1..m4 = {}", shown.join(", ")),
        start,
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_2_cumulant_oracle() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut kappa2 = true;
    let mut short_rule_fails_off_one = true;
    let mut count = 0;
    for t in [rat(1, 2), rat(1, 1), rat(3, 1)] {
        for th in [rat(1, 3), rat(1, 1), rat(2, 1)] {
            for l in [rat(1, 1), rat(3, 2), rat(2, 1), rat(5, 1)] {
                let e = ExactParams::new(t.clone(), th.clone(), l.clone()).unwrap();
                let p = e.to_params().unwrap();
                let k = cumulants::free_cumulants(&e, 8).unwrap();
                let f = RFamily::Gfg(p);
                let r = transforms::gfg_r_branch_point(p.theta, p.lambda);
                let s = cumulants::series_oracle(|z| transforms::r_transform(&f, z), 8, r, 1e-12).unwrap();
                for (a, b) in k.iter().zip(&s.coeffs) {
                    let a = cumulants::to_f64(a);
                    worst = worst.max((b - a).norm() / a.abs());
                }
                kappa2 &= k[1] == &e.t * &e.theta * &e.lambda;
                let m2 = cumulants::moment(&e, 2).unwrap();
                let short = &e.t * &e.t + &e.theta * &e.t;
                short_rule_fails_off_one &= (m2 == short) == (l == rat(1, 1));
                count += 1;
            }
        }
    }
    let pass = count == 36 && worst <= 1e-8 && kappa2 && short_rule_fails_off_one;
    report(
        2,
        "free cumulants against series of R",
        pass,
        format!("{count} triples, worst relative gap {worst:.2e}, kappa2 = t theta lambda: {kappa2}, m2 = t^2 + theta t only at lambda = 1: {short_rule_fails_off_one}"),
        start,
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_3_normalization_and_inversion() {
    let start = Instant::now();
    let ten = [
        g(1.0, 1.0, 1.0),
        g(1.0, 1.0, 2.0),
        g(1.0, 1.0, 3.0),
        g(2.0, 0.5, 1.5),
        g(0.5, 2.0, 1.0),
        g(3.0, 1.0, 4.0),
        g(1.0, 0.25, 10.0),
        g(0.2, 1.0, 1.3),
        g(5.0, 2.0, 2.0),
        g(1.0, 3.0, 1.1),
    ];
    let cfg = InversionConfig::default();
    let (mut mass_gap, mut inv_gap): (f64, f64) = (0.0, 0.0);
    for p in ten {
        let m = SpectralMeasure::gfg(&p);
        mass_gap = mass_gap.max((m.total_mass().unwrap() - 1.0).abs());
        let s = measures::support(&p);
        for i in 1..=50 {
            let x = s.lo + s.width() * i as f64 / 51.0;
            let inv = transforms::stieltjes_invert(|z| transforms::cauchy_transform(&p, z).unwrap(), x, &cfg).unwrap();
            inv_gap = inv_gap.max((inv.value - measures::gfg_density(&p, x)).abs());
        }
    }
    report(
        3,
        "mass and Stieltjes inversion",
        mass_gap < 1e-8 && inv_gap < 1e-4,
        format!("mass gap {mass_gap:.2e}, inversion gap {inv_gap:.2e} over 10 triples x 50 points"),
        start,
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_4_identity_catalog() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut failures = Vec::new();
    for id in IdentityId::ALL {
        let sets = convolution::default_param_sets(id);
        assert_eq!(sets.len(), 10);
        for params in sets {
            let r = convolution::verify_identity(id, &params, None, IDENTITY_TOL).unwrap();
            assert_eq!(r.grid.len(), 50);
            worst = worst.max(r.max_abs_deviation);
            if !r.pass {
                failures.push(format!("{id} {params}"));
            }
            checked += 1;
        }
    }
    report(
        4,
        "free identity catalog",
        failures.is_empty() && checked == 110,
        format!("{checked} checks, worst deviation {worst:.2e}, failures {failures:?}"),
        start,
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_5_random_matrices() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for id in [
        IdentityId::AddSemigroup,
        IdentityId::MultFormB,
        IdentityId::MeixnerShift,
        IdentityId::RatioLaw,
        IdentityId::InvSumLaw,
    ] {
        let params = RmtParams::default_for(id).unwrap();
        let r = rmt::run_identity(id, &params, 1000, DEFAULT_SEED, 3).unwrap();
        let ks: Vec<String> = r.seeds.iter().map(|s| format!("{:.4}", s.ks)).collect();
        lines.push(format!("{id} ks [{}]", ks.join(" ")));
        pass &= r.pass;
    }
    let id = IdentityId::MultFormA;
    let params = RmtParams::Gfg(g(1.0, 1.0, 3.0));
    let r = rmt::run_identity(id, &params, 1000, DEFAULT_SEED, 3).unwrap();
    let mut fr: Vec<f64> = r.seeds.iter().map(|s| s.atom_fraction).collect();
    fr.sort_by(f64::total_cmp);
    let atom_ok = (fr[1] - r.expected_atom).abs() < 0.03;
    lines.push(format!("atom of mu_(1,1,3): fractions {fr:?} vs {}", r.expected_atom));
    report(5, "random-matrix laws at N = 1000", pass && atom_ok, lines.join("; "), start, Duration::from_secs(300));
}

#[test]
fn criterion_6_gibbs() {
    let start = Instant::now();
    let sets =
        [g(1.0, 1.0, 1.0), g(1.0, 1.0, 2.0), g(2.0, 1.0, 1.0), g(0.5, 2.0, 1.5), g(3.0, 0.5, 4.0), g(1.0, 1.0, 3.0)];
    let mut z_gap: f64 = 0.0;
    let mut pearson: f64 = 0.0;
    for p in sets {
        let z = gibbs::partition_function(&p);
        let q = gibbs::partition_function_quadrature(&p, 1e-12).unwrap();
        z_gap = z_gap.max((z - q.value).abs() / z);
        let s = if p.is_lambda_one() { p.t * p.t / p.theta } else { p.shift() };
        for i in 1..=100 {
            let u = i as f64 / 101.0;
            pearson = pearson.max(gibbs::pearson_residual(&p, s * u / (1.0 - u)).unwrap().abs());
        }
    }
    let half = gibbs::partition_function(&g(1.0, 1.0, 2.0));
    let n = 100_000;
    let mut ks = Vec::new();
    for (k, (id, p)) in [
        (ClassicalIdentity::RhoMultB, g(1.0, 1.0, 2.0)),
        (ClassicalIdentity::RhoMultB, g(0.5, 2.0, 1.5)),
        (ClassicalIdentity::RhoMe, g(1.0, 1.0, 1.0)),
        (ClassicalIdentity::RhoMe, g(2.0, 0.5, 1.0)),
    ]
    .into_iter()
    .enumerate()
    {
        let r = classical::verify_classical_identity(id, &p, n, RngStream::new(DEFAULT_SEED, k as u64)).unwrap();
        ks.push((id.as_str(), r.ks));
    }
    let mc_ok = ks.iter().all(|(_, k)| *k < 0.02);
    let pass = z_gap < 1e-6 && (half - 0.5).abs() < 1e-12 && pearson <= 1e-10 && mc_ok;
    report(
        6,
        "Gibbs laws",
        pass,
        format!("Z relative gap {z_gap:.2e}, Z(1,1,2) = {half}, Pearson max {pearson:.2e}, Monte Carlo KS {ks:?}"),
        start,
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_7_equilibrium() {
    let start = Instant::now();
    let confining =
        [g(1.0, 1.0, 1.0), g(1.0, 1.0, 1.5), g(2.0, 0.5, 1.5), g(3.0, 1.0, 2.5), g(0.5, 0.25, 1.0), g(1.0, 2.0, 1.2)];
    let (mut el, mut ep): (f64, f64) = (0.0, 0.0);
    let mut exact_gaps = true;
    for p in confining {
        let s = measures::support(&p);
        for i in 1..=50 {
            let x = s.lo + s.width() * i as f64 / 51.0;
            el = el.max(equilibrium::el_residual(&p, x).unwrap().abs());
        }
        let r = equilibrium::endpoint_equations(&p).unwrap();
        ep = ep.max(r.eq0.abs()).max((r.eq2 - 2.0).abs());
        exact_gaps &= equilibrium::gaps_vanish(&r);
    }
    let spread = equilibrium::effective_potential_spread(&g(1.0, 1.0, 1.0), 30).unwrap();
    let probe = equilibrium::maximality_probe(&g(1.0, 1.0, 1.0), &ProbeSpec::default()).unwrap();
    let probes: usize = probe.families.iter().map(|f| f.entropies.len()).sum();
    let pass = el <= 1e-10 && ep < 1e-8 && exact_gaps && spread < 1e-4 && probe.pass && probes == 20;
    report(
        7,
        "equilibrium measure",
        pass,
        format!(
            "EL residual {el:.2e}, endpoint gap {ep:.2e}, potential spread {spread:.2e}, {probes} probes with min margin {:.2e}",
            probe.min_margin
        ),
        start,
        Duration::from_secs(180),
    );
}

#[test]
fn criterion_8_finite_free() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for (p, s_want) in [(g(1.0, 1.0, 2.0), 3.0), (g(1.0, 1.0, 1.0), 1.5)] {
        let rows = finite_free::convergence_study(&p, &[16, 32, 64, 128]).unwrap();
        let w1: Vec<f64> = rows.iter().map(|r| r.w1).collect();
        let decreasing = w1.windows(2).all(|w| w[1] < w[0]);
        let last = *w1.last().unwrap();
        let s = transforms::s_transform(&SFamily::Gfg(p), -0.5).unwrap();
        assert!((s - s_want).abs() < 1e-12);
        let poly = finite_free::build_p_d(&ExactParams::from_params(&p).unwrap(), 200).unwrap();
        let ratio = finite_free::finite_s_ratio(&poly, 100).unwrap();
        let s_ok = (ratio - s).abs() <= 2e-2;
        pass &= decreasing && last < 0.1 && s_ok;
        lines.push(format!(
            "({}, {}, {}): W1 {:?}, ratio at d = 200 {ratio:.4} vs S = {s} ({})",
            p.t,
            p.theta,
            p.lambda,
            w1.iter().map(|w| format!("{w:.4}")).collect::<Vec<_>>(),
            if s_ok { "ok" } else { "off by more than 2e-2" }
        ));
    }
    report(8, "finite free polynomials", pass, lines.join("; "), start, Duration::from_secs(60));
}

#[test]
fn criterion_9_fid_witness() {
    let start = Instant::now();
    let mut pass = true;
    let mut lines = Vec::new();
    for p in [0.1, 0.5, 1.0, 2.0, 10.0] {
        let w = convolution::free_beta_fid_witness(p).unwrap();
        let ok = w.roots.iter().all(|z| z.im.abs() > 0.0) && w.residual < 1e-14 && !w.is_fid;
        pass &= ok;
        lines.push(format!("p={p}: |Im| {:.3e}, residual {:.1e}", w.roots[0].im.abs(), w.residual));
    }
    report(9, "non-FID witness", pass, lines.join("; "), start, Duration::from_secs(1));
}
