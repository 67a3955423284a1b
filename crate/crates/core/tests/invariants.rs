use ctrlgauge::model::normalize_full;
use ctrlgauge::{reach_region, strategy_space_dim, LdtSystem, NormalizationSpec, RegionKind, Zonotope};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn system(n: usize, r: usize) -> impl Strategy<Value = LdtSystem> {
    (
        prop::collection::vec(-2.0..2.0f64, n * n),
        prop::collection::vec(-2.0..2.0f64, n * r),
    )
        .prop_map(move |(a, b)| {
            LdtSystem::new("p", DMatrix::from_vec(n, n, a), DMatrix::from_vec(n, r, b)).unwrap()
        })
}

fn zonotope() -> impl Strategy<Value = Zonotope> {
    (2usize..=3, 1usize..=7).prop_flat_map(|(n, m)| {
        prop::collection::vec(-2.0..2.0f64, n * m)
            .prop_map(move |g| Zonotope::new(DMatrix::from_vec(n, m, g)).unwrap())
    })
}

fn positive(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1..10.0f64, len)
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn support_is_attained_at_a_vertex(z in zonotope(), d in prop::collection::vec(-1.0..1.0f64, 3)) {
        let d = DVector::from_iterator(z.dim(), d.into_iter().take(z.dim()));
        prop_assume!(d.norm() > 1e-3);
        let h = z.support(&d).unwrap();
        let best = z.vertices().iter().map(|v| v.dot(&d)).fold(f64::NEG_INFINITY, f64::max);
        let scale = z.magnitude() * d.norm() * z.len() as f64;
        prop_assert!((h - best).abs() <= 1e-9 * scale.max(1.0), "h={h} best={best}");
    }

    #[test]
    fn vertex_set_is_centrally_symmetric(z in zonotope()) {
        let verts = z.vertices();
        let tol = 1e-9 * z.magnitude().max(1.0) * z.len() as f64;
        for v in &verts {
            prop_assert!(verts.iter().any(|w| (w + v).amax() <= tol));
        }
    }

    #[test]
    fn region_volume_never_shrinks(sys in system(2, 1), horizon in 2usize..=8) {
        let fam = reach_region(&sys, horizon).unwrap();
        for k in 2..=horizon {
            let (prev, cur) = (fam.stage(k - 1).volume(), fam.stage(k).volume());
            prop_assert!(cur >= prev * (1.0 - 1e-12) - 1e-12, "stage {k}: {cur} < {prev}");
        }
    }

    #[test]
    fn shape_factors_ignore_axis_scaling(z in zonotope(), s in positive(3)) {
        let base = z.shape_report();
        prop_assume!(base.rank == z.dim());
        let scaled = z.scale_state(&s[..z.dim()]).unwrap().shape_report();
        prop_assert!((base.overall_shape_factor - scaled.overall_shape_factor).abs() <= 1e-9 * base.overall_shape_factor.max(1e-3));
        for (p, q) in base.planar_shape_factors.iter().zip(&scaled.planar_shape_factors) {
            prop_assert!((p.value - q.value).abs() <= 1e-9, "{p:?} vs {q:?}");
        }
    }

    #[test]
    fn identity_normalization_is_a_no_op(sys in system(3, 2)) {
        let out = normalize_full(&sys, &NormalizationSpec::identity(3, 2), false).unwrap();
        prop_assert_eq!(out.a(), sys.a());
        prop_assert_eq!(out.b(), sys.b());
    }

    #[test]
    fn normalization_is_a_similarity(sys in system(3, 1), x in positive(3), u in positive(1)) {
        let spec = NormalizationSpec { input_rated: u.clone(), state_rated: x.clone(), state_target: None };
        let out = normalize_full(&sys, &spec, false).unwrap();
        let p = DMatrix::from_diagonal(&DVector::from_vec(x.clone()));
        let p_inv = DMatrix::from_diagonal(&DVector::from_iterator(3, x.iter().map(|v| 1.0 / v)));
        let expect_a = &p_inv * sys.a() * &p;
        let expect_b = &p_inv * sys.b() * u[0];
        prop_assert!(max_abs_diff(out.a(), &expect_a) <= 1e-12 * expect_a.amax().max(1.0));
        prop_assert!(max_abs_diff(out.b(), &expect_b) <= 1e-12 * expect_b.amax().max(1.0));
        // similar matrices share their trace and determinant
        prop_assert!((out.a().trace() - sys.a().trace()).abs() <= 1e-9);
        prop_assert!((out.a().determinant() - sys.a().determinant()).abs() <= 1e-9 * sys.a().amax().powi(3).max(1.0));
    }

    #[test]
    fn normalizations_compose(sys in system(2, 1), x1 in positive(2), x2 in positive(2), u1 in positive(1), u2 in positive(1)) {
        let s1 = NormalizationSpec { input_rated: u1.clone(), state_rated: x1.clone(), state_target: None };
        let s2 = NormalizationSpec { input_rated: u2.clone(), state_rated: x2.clone(), state_target: None };
        let both = NormalizationSpec {
            input_rated: vec![u1[0] * u2[0]],
            state_rated: vec![x1[0] * x2[0], x1[1] * x2[1]],
            state_target: None,
        };
        let twice = normalize_full(&normalize_full(&sys, &s1, false).unwrap(), &s2, false).unwrap();
        let once = normalize_full(&sys, &both, false).unwrap();
        prop_assert!(max_abs_diff(twice.a(), once.a()) <= 1e-10 * once.a().amax().max(1.0));
        prop_assert!(max_abs_diff(twice.b(), once.b()) <= 1e-10 * once.b().amax().max(1.0));
    }

    #[test]
    fn strategy_dim_survives_state_rescaling(
        sys in system(2, 1),
        p in positive(2),
        horizon in 3usize..=7,
        w in prop::collection::vec(-1.0..1.0f64, 7),
        shrink in 0.2..1.0f64,
    ) {
        // a state of R(horizon) built directly from admissible inputs
        let fam = reach_region(&sys, horizon).unwrap();
        let g = fam.stage(horizon).generators();
        let u = DVector::from_iterator(horizon, w.into_iter().take(horizon).map(|v| v * shrink));
        let x0 = g * u;
        let spec = NormalizationSpec { input_rated: vec![1.0], state_rated: p.clone(), state_target: None };
        let scaled = normalize_full(&sys, &spec, false).unwrap();
        let y0: Vec<f64> = x0.iter().zip(&p).map(|(x, s)| x / s).collect();
        let d1 = strategy_space_dim(&sys, x0.as_slice(), horizon, RegionKind::Reach).unwrap();
        let d2 = strategy_space_dim(&scaled, &y0, horizon, RegionKind::Reach).unwrap();
        prop_assert_eq!(d1, d2);
    }
}
