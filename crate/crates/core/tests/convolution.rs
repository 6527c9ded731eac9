use fgamma_core::convolution::*;
use fgamma_core::measures::{GfgParams, SpectralMeasure};
use fgamma_core::transforms::{numeric_s_transform, s_transform, SFamily};

#[test]
fn catalog_passes_on_default_sets() {
    for id in IdentityId::ALL {
        let sets = default_param_sets(id);
        assert_eq!(sets.len(), 10, "{id}");
        for params in sets {
            let r = verify_identity(id, &params, None, IDENTITY_TOL).unwrap();
            assert_eq!(r.grid.len(), GRID_POINTS);
            assert!(r.pass, "{id} at {params}: {}", r.max_abs_deviation);
        }
    }
}

#[test]
fn identity_names_round_trip() {
    for id in IdentityId::ALL {
        assert_eq!(id.as_str().parse::<IdentityId>().unwrap(), id);
    }
    assert_eq!("mult-form-a".parse::<IdentityId>().unwrap(), IdentityId::MultFormA);
    assert!("NOPE".parse::<IdentityId>().is_err());
}

#[test]
fn dilation_scales_s_by_quadrature() {
    // S of D_c mu is S_mu / c, checked on the numerically inverted psi
    let p = GfgParams::new(1.0, 1.0, 1.5).unwrap();
    let c = 2.5;
    let d = dilate_params(c, &p).unwrap();
    for z in [-0.2, -0.5, -0.8] {
        let num = numeric_s_transform(&SpectralMeasure::gfg(&p).dilate(c), z).unwrap();
        let closed = s_transform(&SFamily::Gfg(d), z).unwrap();
        let base = s_transform(&SFamily::Gfg(p), z).unwrap();
        assert!((num - closed).abs() < 1e-7 * closed);
        assert!((closed - base / c).abs() < 1e-14 * closed);
    }
}

#[test]
fn reversal_is_an_involution_up_to_scale() {
    for p in default_gfg_triples() {
        if p.lambda >= p.boundary() {
            assert!(reversed(&p).is_err());
            continue;
        }
        let r1 = reversed(&p).unwrap();
        let r2 = reversed(&r1.params).unwrap();
        let back = dilate_params(r2.scale / r1.scale, &r2.params).unwrap();
        for (a, b) in [(back.t, p.t), (back.theta, p.theta), (back.lambda, p.lambda)] {
            assert!((a - b).abs() < 1e-12 * b, "{p:?} -> {back:?}");
        }
    }
}

#[test]
fn free_beta_is_not_freely_infinitely_divisible() {
    for p in [0.1, 0.5, 1.0, 2.0, 10.0] {
        let w = free_beta_fid_witness(p).unwrap();
        assert!(w.roots.iter().all(|r| r.im.abs() > 0.0));
        assert!(w.residual < 1e-14, "{p}: {}", w.residual);
        assert!(!w.is_fid);
    }
}
