use jost_core::jost::{closed_form_t, recurrence_residual};
use jost_core::matkit::{I, ONE};
use jost_core::oracle::{build_finite_section, count_below, oracle_eigs};
use jost_core::spectrum::{wronskian_identity_gap, DEFAULT_TAIL_TOL};
use jost_core::{compute_jost, CoefficientProfile, ComplexMatrix, C64};
use proptest::prelude::*;

fn matrix(m: usize, amp: f64) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-amp..amp, -amp..amp), m * m).prop_map(move |v| {
        ComplexMatrix::from_fn(m, |i, j| C64::new(v[i * m + j].0, v[i * m + j].1))
    })
}

fn hermitian(m: usize, amp: f64) -> impl Strategy<Value = ComplexMatrix> {
    matrix(m, amp).prop_map(|x| {
        let upper = |i: usize, j: usize| (x[(i, j)] + x[(j, i)].conj()) * 0.5;
        ComplexMatrix::from_fn(x.dim(), |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => upper(i, j),
            std::cmp::Ordering::Equal => C64::new(x[(i, i)].re, 0.0),
            std::cmp::Ordering::Greater => upper(j, i).conj(),
        })
    })
}

/// `c I + H` with `‖H‖_F ≤ 0.4`.
fn near(m: usize, c: f64) -> impl Strategy<Value = ComplexMatrix> {
    hermitian(m, 1.0).prop_map(move |h| {
        let f = h.frobenius_norm();
        let h = if f > 0.4 { h.scale_real(0.4 / f) } else { h };
        let mut out = ComplexMatrix::scalar(h.dim(), C64::new(c, 0.0));
        out.add_scaled(&h, ONE);
        out
    })
}

fn profile() -> impl Strategy<Value = CoefficientProfile> {
    (1usize..=2, 1usize..=3).prop_flat_map(|(m, n0)| {
        (
            prop::collection::vec(near(m, 1.0), n0 + 1),
            prop::collection::vec(near(m, -1.0), n0),
            prop::collection::vec(hermitian(m, 2.0), n0),
            prop::collection::vec(hermitian(m, 2.0), n0),
        )
            .prop_map(move |(a, b, p, q)| CoefficientProfile::new(m, a, b, p, q).unwrap())
    })
}

fn disc_point() -> impl Strategy<Value = C64> {
    (0.0f64..=1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, th)| C64::from_polar(r, th))
}

fn t_value() -> impl Strategy<Value = f64> {
    (0.05f64..0.95, any::<bool>()).prop_map(|(t, neg)| if neg { -t } else { t })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjoint_reverses_products(x in (1usize..=4).prop_flat_map(|m| (matrix(m, 2.0), matrix(m, 2.0)))) {
        let (a, b) = x;
        let lhs = (&a * &b).adjoint();
        let rhs = &b.adjoint() * &a.adjoint();
        prop_assert!((&lhs - &rhs).frobenius_norm() <= 1e-13 * (1.0 + lhs.frobenius_norm()));
    }

    #[test]
    fn inverse_and_determinant(x in (1usize..=4).prop_flat_map(|m| (matrix(m, 1.0), matrix(m, 1.0)))) {
        let (a, b) = x;
        let m = a.dim();
        let mut well = ComplexMatrix::scalar(m, C64::new(3.0, 0.0));
        well.add_scaled(&a, ONE);
        let inv = well.inverse().unwrap();
        prop_assert!((&(&well * &inv) - &ComplexMatrix::identity(m)).frobenius_norm() < 1e-12);
        let lhs = (&well * &b).det();
        let rhs = well.det() * b.det();
        prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + rhs.norm()));
    }

    #[test]
    fn hermitian_eigendecomposition_reconstructs(h in (1usize..=4).prop_flat_map(|m| hermitian(m, 3.0))) {
        let e = h.herm_eig().unwrap();
        let d = ComplexMatrix::from_real_diag(&e.values);
        let back = &(&e.vectors * &d) * &e.vectors.adjoint();
        prop_assert!((&back - &h).frobenius_norm() < 1e-12 * (1.0 + h.frobenius_norm()));
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn profile_json_round_trip(p in profile()) {
        prop_assert!(p.validate().ok);
        let back = CoefficientProfile::from_json(&p.to_json()).unwrap();
        prop_assert_eq!(back.digest(), p.digest());
        prop_assert_eq!(back, p);
    }

    #[test]
    fn recurrences_hold_on_the_disc(p in profile(), z in disc_point()) {
        let j = compute_jost(&p).unwrap();
        prop_assert!(recurrence_residual(&j, &p, z, p.n0() + 2).unwrap() < 1e-11);
    }

    #[test]
    fn zero_pattern_and_free_tail(p in profile()) {
        let j = compute_jost(&p).unwrap();
        prop_assert!(j.zero_pattern_excess() < 1e-14);
        prop_assert!(j.tail_is_free());
        for n in 1..=p.n0() + 1 {
            let (t11, t12, t22) = closed_form_t(&p, n).unwrap();
            prop_assert!((&t11 - &j.a_coeff(n, 1)).frobenius_norm() < 1e-10);
            prop_assert!((&t22 - &j.b_coeff(n, 0).scale(I)).frobenius_norm() < 1e-10);
            prop_assert!(t12.is_zero());
        }
    }

    #[test]
    fn wronskian_identity(p in profile(), t in t_value()) {
        let j = compute_jost(&p).unwrap();
        prop_assert!(wronskian_identity_gap(&j, &p, t, DEFAULT_TAIL_TOL).unwrap() < 1e-10);
    }

    #[test]
    fn sturm_count_matches_dense(p in profile(), sigma in -6.0f64..6.0) {
        let n = p.n0() + 6;
        let dense = oracle_eigs(&build_finite_section(&p, n).unwrap()).unwrap();
        let expect = dense.iter().filter(|&&x| x < sigma).count();
        let near_edge = dense.iter().any(|&x| (x - sigma).abs() < 1e-9);
        prop_assume!(!near_edge);
        prop_assert_eq!(count_below(&p, n, sigma).unwrap(), expect);
    }
}
