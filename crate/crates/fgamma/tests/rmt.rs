use fgamma::rmt::*;
use fgamma::rng::RngStream;
use fgamma_core::measures::{MpParams, SpectralMeasure};
use fgamma_core::stats::ks_distance;

#[test]
fn wishart_spectrum_follows_marchenko_pastur() {
    let q = MpParams::new(1.0, 2.0).unwrap();
    let e = sample_mp_esd(&q, 2000, RngStream::new(11, 0)).unwrap();
    let ks = ks_distance(&e.samples, &SpectralMeasure::mp(&q)).unwrap();
    assert!(ks < 0.05, "{ks}");
    // the mean eigenvalue is theta lambda
    assert!((e.mean() - 2.0).abs() < 0.02, "{}", e.mean());
}

#[test]
fn free_sum_of_wisharts_adds_ratios() {
    // pi_{theta,a} boxplus pi_{theta,b} = pi_{theta,a+b}
    let (a, b) = (MpParams::new(1.0, 0.5).unwrap(), MpParams::new(1.0, 1.5).unwrap());
    let x = sample_mp_esd(&a, 1000, RngStream::new(5, 0)).unwrap();
    let y = sample_mp_esd(&b, 1000, RngStream::new(5, 1)).unwrap();
    let s = free_add_sample(&x.samples, &y.samples, RngStream::new(5, 2)).unwrap();
    let target = SpectralMeasure::mp(&MpParams::new(1.0, 2.0).unwrap());
    let ks = ks_distance(&s.samples, &target).unwrap();
    assert!(ks < 0.05, "{ks}");
}

#[test]
fn same_stream_same_spectrum() {
    let q = MpParams::new(0.5, 1.5).unwrap();
    let a = sample_mp_esd(&q, 200, RngStream::new(9, 3)).unwrap();
    let b = sample_mp_esd(&q, 200, RngStream::new(9, 3)).unwrap();
    let c = sample_mp_esd(&q, 200, RngStream::new(9, 4)).unwrap();
    assert_eq!(a.samples, b.samples);
    assert_ne!(a.samples, c.samples);
}

#[test]
fn atom_shows_up_as_null_space() {
    use fgamma_core::convolution::IdentityId;
    let p = RmtParams::Gfg(fgamma_core::measures::GfgParams::new(1.0, 1.0, 3.0).unwrap());
    let r = run_identity(IdentityId::MultFormA, &p, 400, 1, 1).unwrap();
    assert!((r.seeds[0].atom_fraction - 0.5).abs() < 0.03);
    assert!(r.pass, "{:?}", r.seeds);
}

#[test]
fn identities_without_matrices_are_rejected() {
    use fgamma_core::convolution::IdentityId;
    assert!(RmtParams::default_for(IdentityId::FreeBetaS).is_err());
}
