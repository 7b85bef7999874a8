use std::sync::Arc;

use super::*;
use crate::geomkit::{values, Signs};
use crate::rigid_cmap::RigidCmap;
use crate::special_kahler::Prepotential;

const FLAT_PT: [f64; 4] = [0.3, -0.2, 0.9, 0.4];

// x0, x1, u1, q̂ (4), s
const CMAP_PT: [f64; 8] = [1.1, 0.2, -0.15, 0.3, -0.4, 0.1, 0.25, 0.35];

fn cmap_input(s: Signs, c: f64, level: impl Fn(usize) -> Level) -> CorrespondenceInput {
    let f = Prepotential::quadratic_standard(1, s.eps1);
    let base = RigidCmap::new(f, s.eps2, c);
    let k = base.phase_variable();
    CorrespondenceInput::new(Arc::new(base), level(k)).unwrap()
}

fn assert_certified(r: &QkResiduals, what: &str) {
    let checks = [
        ("algebra", r.algebra, 1e-10),
        ("symmetry", r.symmetry, 1e-14),
        ("killing", r.killing, 1e-10),
        ("nu", (r.nu - r.nu_expected).abs(), 1e-9),
        ("weyl trace", r.weyl_trace, 1e-9),
        ("weyl Q", r.weyl_q_invariance, 1e-9),
        ("nijenhuis", r.nijenhuis, 1e-10),
        ("domega", r.domega, 1e-10),
        ("four form", r.four_form, 1e-10),
        ("moment map", r.moment_map, 1e-10),
        ("lie omega1", r.lie_omega1, 1e-10),
        ("lie omega23", r.lie_omega23, 1e-10),
        ("theta bar", r.theta_bar, 1e-10),
        ("projector", r.projector, 1e-10),
        ("frame", r.frame, 1e-10),
    ];
    for (name, v, tol) in checks {
        assert!(v < tol, "{what}: {name} residual {v:e}");
    }
}

#[test]
fn flat_model_hypotheses() {
    for s in Signs::all() {
        let r = base_residuals(&FlatModel::new(s), &FLAT_PT).unwrap();
        assert!(r.max() < 1e-12, "{s:?} {r:?}");
    }
}

#[test]
fn cmap_hypotheses() {
    for s in Signs::all() {
        let input = cmap_input(s, 0.3, |k| Level::coordinate(k, 0.0));
        let y = input.level.to_bundle(&input.embed(&CMAP_PT));
        let r = base_residuals(input.base.as_ref(), &y[..8]).unwrap();
        assert!(r.max() < 1e-10, "{s:?} {r:?}");
    }
}

#[test]
fn flat_model_bundle() {
    for s in Signs::all() {
        let input = flat_model(s, &FLAT_PT).unwrap();
        let mut p = FLAT_PT.to_vec();
        p.push(0.1);
        let bd = bundle_data(&input, &p, 2).unwrap();
        let r = bundle_residuals(&bd).unwrap();
        assert!(r.theta_kernel < 1e-12 && r.lemma < 1e-12 && r.connection < 1e-12, "{s:?} {r:?}");
        assert_eq!(flat_f1_plus_f(s, &FLAT_PT).unwrap(), 0.0);
    }
}

#[test]
fn flat_model_output_is_quaternionic_kahler() {
    for s in Signs::all() {
        let input = flat_model(s, &FLAT_PT).unwrap();
        let q = qk_point(&input, &[0.3, -0.2, 0.9, 0.1]).unwrap();
        assert_certified(&qk_residuals(&q).unwrap(), &format!("flat {s:?}"));
    }
}

#[test]
fn cmap_output_is_quaternionic_kahler() {
    for s in Signs::all() {
        for c in [-0.3, 0.0, 0.7] {
            let input = cmap_input(s, c, |k| Level::coordinate(k, 0.0));
            let q = qk_point(&input, &CMAP_PT).unwrap();
            let r = qk_residuals(&q).unwrap();
            assert_certified(&r, &format!("c-map {s:?} c = {c}"));
            let b = bundle_residuals(&q.bundle).unwrap();
            assert!(b.theta_kernel < 1e-14 && b.lemma < 1e-12 && b.connection < 1e-12);
        }
    }
}

#[test]
fn sheared_level_sets_have_nonzero_a() {
    for s in Signs::all() {
        let input = cmap_input(s, 0.3, |k| Level::sheared(k, 0.05, 0.4));
        let q = qk_point(&input, &CMAP_PT).unwrap();
        assert!(q.a.value().abs() > 0.1);
        assert_certified(&qk_residuals(&q).unwrap(), &format!("sheared c-map {s:?}"));
        let b = bundle_residuals(&q.bundle).unwrap();
        assert!(b.theta_kernel < 1e-14 && b.lemma < 1e-12 && b.normalisation < 1e-15);

        let flat = CorrespondenceInput::new(
            Arc::new(FlatModel::new(s)),
            Level::sheared(3, 0.4, -0.7),
        )
        .unwrap();
        let q = qk_point(&flat, &[0.3, -0.2, 0.9, 0.1]).unwrap();
        assert!(q.a.value().abs() > 0.1);
        assert_certified(&qk_residuals(&q).unwrap(), &format!("sheared flat {s:?}"));
    }
}

#[test]
fn cmap_explicit_bundle_formulas() {
    for s in Signs::all() {
        let c = 0.7;
        let input = cmap_input(s, c, |k| Level::coordinate(k, 0.0));
        let p = input.embed(&CMAP_PT);
        let bd = bundle_data(&input, &p, 1).unwrap();
        let base = RigidCmap::new(Prepotential::quadratic_standard(1, s.eps1), s.eps2, c);
        let sp = bd.f().space().clone();
        let y = crate::epsnum::seed(&sp, &p);
        let cf = base.fields_at(&y[..8]).unwrap();
        let th = cf.explicit_theta();
        for a in 0..4 {
            let (got, want) = (values(&bd.theta[a]), values(&th[a]));
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-13, "{s:?} theta{a}: {got:?} vs {want:?}");
            }
        }
        let (got, want) = (values(&bd.z1), values(&cf.explicit_z1p()));
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-13, "{s:?} Z1P: {got:?} vs {want:?}");
        }
        // displayed tensor equals 2ε₁σ g̃
        let sigma = bd.sigma().f();
        let lhs = cf.gtilde_rhs().value();
        let rhs = bd.gtilde.value() * (2.0 * s.eps1.f() * sigma);
        assert!((&lhs - &rhs).amax() < 1e-12, "{s:?}\n{lhs}\n{rhs}");
    }
}

#[test]
fn vanishing_moment_map_is_rejected() {
    let s = Signs::all()[0];
    let input = cmap_input(s, 0.0, |k| Level::coordinate(k, 0.0));
    let p = input.embed(&CMAP_PT);
    let y = &p[..8];
    let x = crate::rigid_cmap::CmapPoint::from_y(y, s.eps1);
    let f = Prepotential::quadratic_standard(1, s.eps1);
    let (nm, _) = f.n_and_r(&x.x).unwrap();
    let two_h = crate::special_kahler::hermitian_form(&nm, &x.x);
    let input = cmap_input(s, two_h, |k| Level::coordinate(k, 0.0));
    let err = qk_point(&input, &CMAP_PT).unwrap_err();
    assert!(matches!(err, crate::Error::Assumption(ref m) if m.contains("sigma")), "{err}");
}

#[test]
fn non_transversal_level_is_a_geometry_error() {
    let s = Signs::all()[1];
    let input = CorrespondenceInput::new(
        Arc::new(FlatModel::new(s)),
        Level::coordinate(4, 0.0),
    )
    .unwrap();
    let err = qk_point(&input, &FLAT_PT).unwrap_err();
    assert!(matches!(err, crate::Error::Geometry(_)), "{err}");
}

#[test]
fn shifted_moment_maps_both_certify() {
    for s in Signs::all() {
        for shift in [0.0, 0.35] {
            let input = flat_model_shifted(s, shift, &FLAT_PT).unwrap();
            let q = qk_point(&input, &[0.3, -0.2, 0.9, 0.1]).unwrap();
            assert_certified(&qk_residuals(&q).unwrap(), &format!("{s:?} shift {shift}"));
        }
    }
}

#[test]
fn perturbed_structure_is_not_integrable() {
    let s = Signs::all()[2];
    let input = cmap_input(s, 0.3, |k| Level::coordinate(k, 0.0));
    let q = qk_point(&input, &CMAP_PT).unwrap();
    assert!(perturbed_nijenhuis(&q, 0.5).unwrap() > 1e-3);
}

#[test]
fn induced_structures_match_the_full_point() {
    let s = Signs::all()[3];
    let input = cmap_input(s, -0.3, |k| Level::coordinate(k, 0.0));
    let ind = induced_structures(&input, &CMAP_PT).unwrap();
    let q = qk_point(&input, &CMAP_PT).unwrap();
    let g = qk_metric(&input, &CMAP_PT).unwrap();
    assert!((&g - q.g_value()).amax() < 1e-14);
    for a in 0..3 {
        assert!((&ind.j[a] - &q.j_values()[a]).amax() < 1e-13);
    }
}
