//! Property tests of the invariants that hold for every admissible input.

use proptest::prelude::*;

use hkqk::cli_verify::report::format_f64;
use hkqk::cli_verify::{Case, FixtureConfig, FixtureKind, Sample, SamplingBox};
use hkqk::epsnum::{compare_with_fd, default_step, derivative_tuples, EpsComplex, Jet, Sign};
use hkqk::fs_metric::{fs_equivalence, round_trip_residual};
use hkqk::geomkit::Signs;
use hkqk::hkqk_core::{qk_point, qk_residuals};
use hkqk::special_kahler::{homogeneity_check, Prepotential};

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::MINUS), Just(Sign::PLUS)]
}

fn signs() -> impl Strategy<Value = Signs> {
    (sign(), sign()).prop_map(|(a, b)| Signs::new(a, b))
}

fn ec(eps: Sign) -> impl Strategy<Value = EpsComplex<f64>> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(move |(a, b)| EpsComplex::new(a, b, eps))
}

fn close(a: &EpsComplex<f64>, b: &EpsComplex<f64>) -> bool {
    (a.re - b.re).abs() < 1e-12 && (a.im - b.im).abs() < 1e-12
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eps_complex_is_a_commutative_ring(
        (a, b, c) in sign().prop_flat_map(|e| (ec(e), ec(e), ec(e)))
    ) {
        let ab = a.try_mul(&b).unwrap();
        prop_assert!(close(&ab, &b.try_mul(&a).unwrap()));
        prop_assert!(close(&ab.try_mul(&c).unwrap(), &a.try_mul(&b.try_mul(&c).unwrap()).unwrap()));
        let lhs = a.try_mul(&(b.clone() + c.clone())).unwrap();
        prop_assert!(close(&lhs, &(ab.clone() + a.try_mul(&c).unwrap())));
        prop_assert!((ab.norm_sqr() - a.norm_sqr() * b.norm_sqr()).abs() < 1e-11);
    }

    #[test]
    fn unit_squares_to_eps(e in sign()) {
        let i = EpsComplex::unit(&1.0, e);
        let sq = i.try_mul(&i).unwrap();
        prop_assert_eq!((sq.re, sq.im), (e.f(), 0.0));
    }

    #[test]
    fn jets_match_finite_differences(x in -0.8..0.8f64, y in 0.2..1.5f64, order in 1usize..=3) {
        let field = |v: &[Jet]| Ok(vec![
            (&v[0] * &v[1]).exp() * v[1].ln(),
            (&v[0] + &v[1].scale(2.0)).sqrt(),
        ]);
        let tuples: Vec<_> = derivative_tuples(2, order).into_iter().filter(|t| t.len() == order).collect();
        let r = compare_with_fd(&field, &[x, y + 0.3], order, &tuples, default_step(order)).unwrap();
        prop_assert!(r.max_rel < 1e-6, "{:?}", r);
    }

    #[test]
    fn prepotentials_are_homogeneous_of_degree_two(
        e in sign(),
        re in proptest::collection::vec(0.2..1.5f64, 4),
        im in proptest::collection::vec(-0.5..0.5f64, 4),
        lambda in 0.3..3.0f64,
        cubic in any::<bool>(),
    ) {
        let f = if cubic { Prepotential::cubic(e) } else { Prepotential::quadratic_standard(3, e) };
        let x: Vec<_> = re.iter().zip(&im).map(|(a, b)| EpsComplex::new(*a, *b, e)).collect();
        // points outside the prepotential's domain are not part of the claim
        let Ok((hom, euler)) = homogeneity_check(&f, &x, lambda) else {
            return Ok(());
        };
        prop_assert!(hom < 1e-12 && euler < 1e-12, "{} {}", hom, euler);
    }

    #[test]
    fn floats_survive_the_report(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
    }
}

/// A point of `M′` for the quadratic `n = 1` fixture, or `None` when the
/// draw is not admissible.
fn cmap_sample(s: Signs, c: f64, v: &[f64]) -> Option<(Case, Sample)> {
    let fixture = FixtureConfig {
        name: FixtureKind::Quadratic,
        n: 1,
    };
    let case = Case::new(&fixture, s, c);
    let sample = Sample {
        pt: v.to_vec(),
        level_value: 0.0,
    };
    case.admissible(&sample, &[0.0, 0.3], &SamplingBox::default())
        .ok()
        .map(|()| (case, sample))
}

fn cmap_point() -> impl Strategy<Value = Vec<f64>> {
    (
        0.9..1.3f64,
        -0.4..0.4f64,
        -0.4..0.4f64,
        proptest::collection::vec(-0.5..0.5f64, 4),
        -0.5..0.5f64,
    )
        .prop_map(|(x0, x1, u1, q, s)| {
            let mut v = vec![x0, x1, u1];
            v.extend(q);
            v.push(s);
            v
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn output_is_quaternionic_kaehler(
        s in signs(),
        c in -0.3..0.7f64,
        tilt in 0.0..0.3f64,
        v in cmap_point(),
    ) {
        let Some((case, sample)) = cmap_sample(s, c, &v) else {
            return Ok(());
        };
        let q = qk_point(&case.input(&sample, tilt).unwrap(), &sample.pt).unwrap();
        let r = qk_residuals(&q).unwrap();
        prop_assert!(r.algebra < 1e-8, "{:?}", r);
        prop_assert!(r.killing < 1e-8 && r.nijenhuis < 1e-8, "{:?}", r);
        prop_assert!((r.nu - r.nu_expected).abs() < 1e-6, "{:?}", r);
    }

    #[test]
    fn closed_form_matches_and_inverts(
        s in signs(),
        c in -0.3..0.7f64,
        v in cmap_point(),
    ) {
        let Some((case, sample)) = cmap_sample(s, c, &v) else {
            return Ok(());
        };
        let f = case.prepotential().unwrap();
        let eq = fs_equivalence(f, s.eps2, c, &sample.pt).unwrap();
        prop_assert!(eq.residual < 1e-9, "{:?}", eq.residual);
        prop_assert!(round_trip_residual(f, s.eps2, c, &sample.pt).unwrap() < 1e-10);
    }
}
