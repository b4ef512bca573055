use cllab::boundary::{parametrize, MeshOptions};
use cllab::cpoint::c;
use cllab::geometry::{clinear_convexity_probe, levi_determinant, make_ball};
use cllab::lab::{read_table_csv, table_csv_string, Cell, Table};
use cllab::operators::{
    assemble, cl_denominator, ks_skew, lp_norm_weighted, DiagonalPolicy, KernelKind, MeasureTag,
    OperatorMatrix,
};
use cllab::{CPoint2, Exec, C64};
use proptest::prelude::*;
use proptest::test_runner::FileFailurePersistence;
use std::sync::OnceLock;

fn sphere_point() -> impl Strategy<Value = CPoint2> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("away from the origin", |x| {
            x.iter().map(|v| v * v).sum::<f64>() > 1e-2
        })
        .prop_map(|x| {
            let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            CPoint2::from_real(x.map(|v| v / n))
        })
}

fn ball_point() -> impl Strategy<Value = CPoint2> {
    (sphere_point(), 0.0f64..0.95).prop_map(|(p, r)| p * r)
}

fn cvec(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b)), n)
}

fn small_cl() -> &'static OperatorMatrix {
    static M: OnceLock<OperatorMatrix> = OnceLock::new();
    M.get_or_init(|| {
        let m = parametrize(&make_ball(), &MeshOptions::new(1), Exec::default()).unwrap();
        assemble(
            KernelKind::CauchyLeray,
            &m,
            MeasureTag::LerayLevi,
            DiagonalPolicy::default(),
            4096,
            Exec::default(),
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: Some(Box::new(FileFailurePersistence::WithSource("proptest-regressions"))),
        ..ProptestConfig::default()
    })]

    #[test]
    fn ball_probe_matches_closed_form(w in sphere_point(), z in sphere_point()) {
        prop_assume!(w.dist(&z) > 1e-4);
        let v = clinear_convexity_probe(&make_ball(), &w, &z).unwrap();
        let a = z.herm(&w);
        let exact = (1.0 - a).norm() / (2.0 * (1.0 - a.re));
        prop_assert!((v - exact).abs() <= 1e-9 * exact, "{v} {exact}");
        prop_assert!(v >= 0.5 - 1e-12);
    }

    #[test]
    fn ball_levi_determinant_is_one(w in sphere_point()) {
        prop_assert!((levi_determinant(&make_ball(), &w).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ball_denominator_has_positive_real_part_inside(z in ball_point(), w in sphere_point()) {
        let den = cl_denominator(&make_ball(), &z, &w).unwrap();
        prop_assert!(den.re > 0.0);
        prop_assert!((den - (1.0 - z.herm(&w))).norm() < 1e-14);
    }

    #[test]
    fn skew_part_is_skew_adjoint(f in cvec(32), g in cvec(32)) {
        let a = ks_skew(small_cl()).unwrap();
        let s = a.inner(&a.apply(&f), &g) + a.inner(&f, &a.apply(&g));
        prop_assert!(s.norm() < 1e-12);
    }

    #[test]
    fn lp_norm_is_homogeneous_and_mask_monotone(
        f in cvec(24),
        w in prop::collection::vec(0.01f64..2.0, 24),
        mask in prop::collection::vec(any::<bool>(), 24),
        p in 1.0f64..6.0,
        s in -3.0f64..3.0,
    ) {
        prop_assume!(mask.iter().any(|&b| b));
        let full = lp_norm_weighted(&f, &w, p, None).unwrap();
        let part = lp_norm_weighted(&f, &w, p, Some(&mask)).unwrap();
        prop_assert!(part <= full * (1.0 + 1e-12));
        let scaled: Vec<C64> = f.iter().map(|v| v * s).collect();
        let ns = lp_norm_weighted(&scaled, &w, p, None).unwrap();
        prop_assert!((ns - s.abs() * full).abs() <= 1e-12 * (1.0 + full));
    }

    #[test]
    fn csv_tables_round_trip(
        rows in prop::collection::vec((any::<i64>(), -1e300f64..1e300, "[a-z:=,. ]{0,12}", any::<bool>()), 0..12)
    ) {
        let mut t = Table::new("t", &["i", "x", "s", "b"]);
        for (i, x, s, b) in rows {
            t.push(vec![Cell::Int(i), Cell::Num(x), Cell::Text(format!("id {s}")), Cell::Flag(b)]);
        }
        let back = read_table_csv("t", table_csv_string(&t).unwrap().as_bytes()).unwrap();
        prop_assert_eq!(back, t);
    }
}
