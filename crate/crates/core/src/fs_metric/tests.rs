use super::*;

// x0, x1, u1, q̂ (4), s
const PT1: [f64; 8] = [1.1, 0.2, -0.15, 0.3, -0.4, 0.1, 0.25, 0.35];
const PT0: [f64; 4] = [0.9, -0.3, 0.45, 0.2];
const CS: [f64; 3] = [-0.3, 0.0, 0.7];

fn fixtures() -> Vec<(Prepotential, Sign, Vec<f64>)> {
    let mut out = Vec::new();
    for s in Signs::all() {
        out.push((Prepotential::quadratic_standard(1, s.eps1), s.eps2, PT1.to_vec()));
        out.push((Prepotential::quadratic_standard(0, s.eps1), s.eps2, PT0.to_vec()));
    }
    out
}

#[test]
fn round_trip_and_rho() {
    for (f, e2, pt) in fixtures() {
        for c in CS {
            assert!(round_trip_residual(&f, e2, c, &pt).unwrap() < 1e-12);
            assert!(rho_identity_residual(&f, e2, c, &pt).unwrap() < 1e-12);
        }
    }
}

#[test]
fn fibre_phase_is_four_eps2_s() {
    for (f, e2, pt) in fixtures() {
        let fs = coordinate_map(&f, e2, 0.7, &pt).unwrap();
        assert_eq!(fs.phi_t, 4.0 * e2.f() * pt[pt.len() - 1]);
    }
}

#[test]
fn dc_kahler_pullback() {
    for (f, e2, pt) in fixtures() {
        let r = dc_kahler_residual(&f, e2, 0.7, &pt).unwrap();
        assert!(r < 1e-12, "{:?} {e2:?}: {r:e}", f.eps1());
    }
}

#[test]
fn pullback_matches_correspondence_output() {
    for (f, e2, pt) in fixtures() {
        for c in CS {
            let eq = fs_equivalence(&f, e2, c, &pt).unwrap();
            let tag = format!("{:?} c = {c}", eq.signs);
            assert!(eq.residual < 1e-12, "{tag}: {:e}\n{}\n{}", eq.residual, eq.g_prime, eq.fs_pullback);
            assert!(eq.display_residual < 1e-12, "{tag}: {:e}", eq.display_residual);
            assert!(eq.symmetry == 0.0, "{tag}");
        }
    }
}

#[test]
fn undeformed_limit() {
    for (f, e2, pt) in fixtures() {
        let fs = coordinate_map(&f, e2, 0.0, &pt).unwrap();
        let y = fs.to_chart();
        let sp = JetSpace::get(y.len(), 2).unwrap();
        let terms = fs_terms(&f, e2, &seed(&sp, &y), &Jet::constant(&sp, 0.0)).unwrap();
        assert_eq!(terms.deformation.value().amax(), 0.0);
        let d = (fs_eval(&f, e2, &fs).unwrap() - undeformed_fs(&f, e2, &fs).unwrap()).amax();
        assert!(d < 1e-13, "{d:e}");
    }
}

#[test]
fn summands_are_symmetric() {
    for (f, e2, pt) in fixtures() {
        let fs = coordinate_map(&f, e2, -0.3, &pt).unwrap();
        let y = fs.to_chart();
        let sp = JetSpace::get(y.len(), 2).unwrap();
        let terms = fs_terms(&f, e2, &seed(&sp, &y), &Jet::constant(&sp, -0.3)).unwrap();
        for t in terms.all() {
            let v = t.value();
            assert!((&v - v.transpose()).amax() < 1e-15);
        }
    }
}

#[test]
fn reduced_scalar_curvature() {
    for (f, e2, pt) in fixtures() {
        for c in CS {
            let fs = coordinate_map(&f, e2, c, &pt).unwrap();
            let nu = fs_nu(&f, e2, &fs).unwrap();
            assert!((nu + 2.0).abs() < 1e-8, "{:?} c = {c}: {nu}", f.eps1());
        }
    }
}

#[test]
fn smooth_in_c() {
    for (f, e2, pt) in fixtures() {
        let fs = coordinate_map(&f, e2, 0.4, &pt).unwrap();
        let r = c_derivative_residual(&f, e2, &fs, 1e-3).unwrap();
        assert!(r < 1e-6, "{r:e}");
    }
}

#[test]
fn domain_errors_name_the_inequality() {
    let f = Prepotential::quadratic_standard(1, Sign::MINUS);
    let mut p = FsPoint::from_chart(&[0.5, 0.0, 0.1, 0.1, 0.0, 0.0, 0.0, 0.0], 0.3, Sign::MINUS).unwrap();
    let cases = [(-0.4, "rho + c > 0"), (0.0, "rho != 0"), (-0.6, "rho + c > 0")];
    for (rho, msg) in cases {
        p.rho = rho;
        let e = fs_eval(&f, Sign::PLUS, &p).unwrap_err();
        assert!(matches!(e, Error::Domain(ref m) if m.contains(msg)), "{e}");
    }
    p.c = -0.3;
    p.rho = 0.6;
    let e = fs_eval(&f, Sign::PLUS, &p).unwrap_err();
    assert!(matches!(e, Error::Domain(ref m) if m.contains("rho + 2c != 0")), "{e}");
    p.rho = 0.2;
    let e = inverse_coordinate_map(&f, Sign::PLUS, &p).unwrap_err();
    assert!(matches!(e, Error::Domain(ref m) if m.contains("rho + c > 0")), "{e}");
}
