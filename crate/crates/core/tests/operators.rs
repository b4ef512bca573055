use approx::assert_relative_eq;
use cllab::boundary::{parametrize, BoundaryMesh, MeshOptions};
use cllab::cpoint::c;
use cllab::geometry::{make_ball, make_ellipsoid, DomainSpec};
use cllab::operators::{
    apply_boundary_offsupport, apply_interior, assemble, cl_denominator, dbar_check,
    idempotence_defect, ks_skew, lp_norm, monomial, opnorm_p, self_adjointness_defect,
    spectral_norm_weighted, szego_direct, szego_ks, BoundaryFunction, CandidateOptions,
    DiagonalPolicy, HolomorphicBasis, KernelKind, MeasureTag, PowerOptions,
};
use cllab::{CPoint2, Exec, LabError, C64};
use std::f64::consts::PI;

fn mesh(d: &DomainSpec, n: usize) -> BoundaryMesh {
    parametrize(d, &MeshOptions::new(n), Exec::default()).unwrap()
}

/// Szegő kernel of the unit ball in C² against Σ.
fn ball_szego(z: &CPoint2, w: &CPoint2) -> C64 {
    let s = 1.0 - (z.z1 * w.z1.conj() + z.z2 * w.z2.conj());
    1.0 / (2.0 * PI * PI * s * s)
}

fn one(m: &BoundaryMesh) -> BoundaryFunction {
    BoundaryFunction::from_fn(m, |_| c(1.0, 0.0)).unwrap()
}

#[test]
fn ball_denominator_is_one_minus_hermitian_product() {
    let d = make_ball();
    let m = mesh(&d, 1);
    let z = CPoint2::real(0.2, -0.3, 0.1, 0.4);
    for w in m.nodes.iter().take(16) {
        let expected = 1.0 - (z.z1 * w.z1.conj() + z.z2 * w.z2.conj());
        assert!((cl_denominator(&d, &z, w).unwrap() - expected).norm() < 1e-14);
        assert_eq!(cl_denominator(&d, w, w).unwrap(), c(0.0, 0.0));
    }
}

#[test]
fn d24_denominator_is_quartic_along_the_flat_direction() {
    let d = make_ellipsoid(2.0, 4.0).unwrap();
    let w = CPoint2::real(0.0, 0.0, 1.0, 0.0);
    let mut prev = f64::INFINITY;
    for k in 2..10 {
        let y = 0.5f64.powi(k);
        let z = CPoint2::new(c(0.0, y), c((1.0 - y.powi(4)).sqrt(), 0.0));
        let q = cl_denominator(&d, &z, &w).unwrap().norm() / w.dist(&z).powi(2);
        assert!(q < prev);
        prev = q;
    }
    assert!(prev < 1e-4);
}

#[test]
fn ball_cauchy_leray_kernel_is_the_szego_kernel() {
    let d = make_ball();
    let m = mesh(&d, 2);
    let z = CPoint2::real(0.1, 0.4, -0.3, 0.2);
    for i in 0..m.len() {
        let k = KernelKind::CauchyLeray.weighted(&m, i, &z).unwrap() / m.sigma_weights[i];
        let want = ball_szego(&z, &m.nodes[i]);
        assert!(
            (k - want).norm() <= 1e-10 * want.norm(),
            "node {i}: {k} vs {want}"
        );
    }
}

#[test]
fn ball_kernel_is_hermitian_between_nodes() {
    let m = mesh(&make_ball(), 1);
    for i in 0..m.len() {
        for j in 0..m.len() {
            if i == j {
                continue;
            }
            let kij = KernelKind::CauchyLeray
                .weighted(&m, j, &m.nodes[i])
                .unwrap()
                / m.sigma_weights[j];
            let kji = KernelKind::CauchyLeray
                .weighted(&m, i, &m.nodes[j])
                .unwrap()
                / m.sigma_weights[i];
            assert!((kij - kji.conj()).norm() <= 1e-10 * kij.norm());
        }
    }
}

#[test]
fn bochner_martinelli_reproduces_holomorphic_data() {
    let d = make_ball();
    let z = CPoint2::real(0.3, 0.0, 0.2, 0.0);
    let mut errs = Vec::new();
    for n in [4, 8, 16] {
        let m = mesh(&d, n);
        let v = apply_interior(
            KernelKind::BochnerMartinelli,
            &d,
            &m,
            &one(&m),
            &z,
            Exec::default(),
        )
        .unwrap();
        errs.push((v.value - 1.0).norm());
    }
    assert!(
        errs[2] < 1e-3 && errs[2] < errs[1] && errs[1] < errs[0],
        "{errs:?}"
    );

    let d = make_ellipsoid(2.0, 4.0).unwrap();
    let m = mesh(&d, 8);
    let z = CPoint2::real(0.2, 0.1, 0.1, -0.2);
    let f = BoundaryFunction::from_fn(&m, monomial(1, 0)).unwrap();
    let v = apply_interior(
        KernelKind::BochnerMartinelli,
        &d,
        &m,
        &f,
        &z,
        Exec::default(),
    )
    .unwrap();
    assert!((v.value - z.z1).norm() < 1e-3);
}

#[test]
fn cauchy_leray_reproduces_a_monomial_and_annihilates_conj_z1_on_the_ball() {
    let d = make_ball();
    let m = mesh(&d, 16);
    let z = CPoint2::real(0.3, 0.0, 0.2, 0.0);
    let f = BoundaryFunction::from_fn(&m, monomial(2, 1)).unwrap();
    let v = apply_interior(KernelKind::CauchyLeray, &d, &m, &f, &z, Exec::default()).unwrap();
    assert!((v.value - 0.018).norm() < 1e-6);
    assert!(!v.near_mesh);
    let g = BoundaryFunction::from_fn(&m, |p| p.z1.conj()).unwrap();
    let v = apply_interior(KernelKind::CauchyLeray, &d, &m, &g, &z, Exec::default()).unwrap();
    assert!(v.value.norm() < 1e-10);
}

#[test]
fn interior_application_rejects_boundary_and_exterior_points() {
    let d = make_ball();
    let m = mesh(&d, 1);
    for z in [
        CPoint2::real(1.0, 0.0, 0.0, 0.0),
        CPoint2::real(0.0, 0.0, 1.5, 0.0),
    ] {
        assert!(matches!(
            apply_interior(
                KernelKind::CauchyLeray,
                &d,
                &m,
                &one(&m),
                &z,
                Exec::default()
            ),
            Err(LabError::NotInterior { .. })
        ));
    }
    let short = BoundaryFunction {
        values: vec![c(1.0, 0.0); 3],
    };
    assert!(apply_interior(
        KernelKind::CauchyLeray,
        &d,
        &m,
        &short,
        &CPoint2::ZERO,
        Exec::default()
    )
    .is_err());
}

fn cap(p: &CPoint2) -> C64 {
    c((p.z1.re - 0.3).max(0.0).powi(3), 0.0)
}

#[test]
fn off_support_values_are_finite_and_stable_under_refinement() {
    let d = make_ball();
    let coarse = mesh(&d, 8);
    let fine = mesh(&d, 16);
    let target = CPoint2::real(-1.0, 0.0, 0.0, 0.0);
    let node = (0..coarse.len())
        .min_by(|&a, &b| {
            coarse.nodes[a]
                .dist(&target)
                .total_cmp(&coarse.nodes[b].dist(&target))
        })
        .unwrap();
    let f = BoundaryFunction::from_fn(&coarse, cap).unwrap();
    let support: Vec<bool> = coarse.nodes.iter().map(|p| p.z1.re > 0.3).collect();
    let v = apply_boundary_offsupport(KernelKind::CauchyLeray, &coarse, &f, &support, node, 1.0)
        .unwrap();
    assert!(v.value.is_finite() && v.abs_sum >= v.value.norm());
    assert!(v.support_distance >= 1.0);

    let z = coarse.nodes[node];
    let at = |m: &BoundaryMesh| -> C64 {
        (0..m.len())
            .map(|j| cap(&m.nodes[j]) * KernelKind::CauchyLeray.weighted(m, j, &z).unwrap())
            .sum()
    };
    let (v4, v16) = (at(&mesh(&d, 4)), at(&fine));
    let (d1, d2) = ((v.value - v4).norm(), (v16 - v.value).norm());
    assert!(
        d2 <= 0.5 * d1 && d2 <= 5e-3 * v16.norm(),
        "{v4} {} {v16}",
        v.value
    );

    let zero = BoundaryFunction::zeros(&coarse);
    let v0 =
        apply_boundary_offsupport(KernelKind::CauchyLeray, &coarse, &zero, &support, node, 1.0)
            .unwrap();
    assert_eq!(v0.value, c(0.0, 0.0));
    assert!(matches!(
        apply_boundary_offsupport(KernelKind::CauchyLeray, &coarse, &f, &support, node, 2.5),
        Err(LabError::SupportDistance { .. })
    ));
}

#[test]
fn assembled_rows_reproduce_constants_near_the_boundary() {
    let d = make_ball();
    let mut devs = Vec::new();
    for n in [1, 2, 3] {
        let m = mesh(&d, n);
        let cm = assemble(
            KernelKind::CauchyLeray,
            &m,
            MeasureTag::Sigma,
            DiagonalPolicy::default(),
            4096,
            Exec::default(),
        )
        .unwrap();
        let ones = vec![c(1.0, 0.0); m.len()];
        let dev = cm
            .apply(&ones)
            .iter()
            .map(|v| (v - 1.0).norm())
            .fold(0.0, f64::max);
        devs.push(dev);
        assert_eq!(
            cm.apply(&vec![c(0.0, 0.0); m.len()]),
            vec![c(0.0, 0.0); m.len()]
        );
    }
    assert!(devs[2] < devs[0] && devs[2] < 0.1, "{devs:?}");
}

#[test]
fn assembly_policies_and_guards() {
    let d = make_ball();
    let m = mesh(&d, 1);
    let zd = assemble(
        KernelKind::CauchyLeray,
        &m,
        MeasureTag::Sigma,
        DiagonalPolicy::ZeroDiagonal,
        4096,
        Exec::default(),
    )
    .unwrap();
    assert!((0..m.len()).all(|i| zd.matrix[(i, i)] == c(0.0, 0.0)));
    assert!(matches!(
        assemble(
            KernelKind::CauchyLeray,
            &m,
            MeasureTag::Sigma,
            DiagonalPolicy::default(),
            8,
            Exec::default()
        ),
        Err(LabError::MemoryGuard { nodes: 32, cap: 8 })
    ));
    assert!(assemble(
        KernelKind::CauchyLeray,
        &m,
        MeasureTag::Sigma,
        DiagonalPolicy::EpsilonShift { factor: -1.0 },
        4096,
        Exec::default()
    )
    .is_err());
}

#[test]
fn adjoint_matches_weighted_conjugate_transpose() {
    let m = mesh(&make_ball(), 1);
    let cm = assemble(
        KernelKind::BochnerMartinelli,
        &m,
        MeasureTag::LerayLevi,
        DiagonalPolicy::default(),
        4096,
        Exec::default(),
    )
    .unwrap();
    let adj = cm.adjoint().unwrap();
    let f: Vec<C64> = (0..m.len())
        .map(|i| c(i as f64 * 0.1, 1.0 - i as f64 * 0.05))
        .collect();
    let g: Vec<C64> = (0..m.len())
        .map(|i| c((i as f64).sin(), (i as f64).cos()))
        .collect();
    let lhs = cm.inner(&cm.apply(&f), &g);
    let rhs = cm.inner(&f, &adj.apply(&g));
    assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
}

#[test]
fn skew_part_vanishes_for_self_adjoint_input() {
    let m = mesh(&make_ball(), 1);
    let cm = assemble(
        KernelKind::CauchyLeray,
        &m,
        MeasureTag::Sigma,
        DiagonalPolicy::default(),
        4096,
        Exec::default(),
    )
    .unwrap();
    let p = szego_direct(&m, MeasureTag::Sigma, 2, 1e10)
        .unwrap()
        .projector;
    let a = ks_skew(&p).unwrap();
    assert!(a.matrix.iter().all(|v| v.norm() < 1e-12));
    let a = ks_skew(&cm).unwrap();
    let f: Vec<C64> = (0..m.len())
        .map(|i| c(1.0 / (1.0 + i as f64), 0.3))
        .collect();
    let g: Vec<C64> = (0..m.len()).map(|i| c(0.2, i as f64)).collect();
    let s = a.inner(&a.apply(&f), &g) + a.inner(&f, &a.apply(&g));
    assert!(s.norm() < 1e-12);
}

#[test]
fn basis_projection_oracle() {
    let m = mesh(&make_ball(), 2);
    let p = szego_direct(&m, MeasureTag::Sigma, 3, 1e10).unwrap();
    assert_eq!(p.degree, 3);
    let z1: Vec<C64> = m.nodes.iter().map(|q| q.z1).collect();
    let res = p
        .projector
        .apply(&z1)
        .iter()
        .zip(&z1)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(res <= 1e-10);
    let cz1: Vec<C64> = z1.iter().map(|v| v.conj()).collect();
    let coef = HolomorphicBasis::new(&m, 3)
        .coefficients(&m.sigma_weights, &cz1)
        .unwrap();
    assert!(coef.iter().all(|v| v.norm() <= 1e-8));
    let opts = PowerOptions::default();
    assert!(idempotence_defect(&p.projector, opts).lower <= 1e-12);
    assert!(self_adjointness_defect(&p.projector, opts).unwrap().lower <= 1e-12);
    // degree lowering when the Gram matrix degenerates
    let coarse = mesh(&make_ball(), 1);
    let q = szego_direct(&coarse, MeasureTag::Sigma, 8, 1e10).unwrap();
    assert!(q.degree < 8 && q.condition <= 1e10);
}

#[test]
fn kerzman_stein_on_the_ball() {
    let m = mesh(&make_ball(), 2);
    let cm = assemble(
        KernelKind::CauchyLeray,
        &m,
        MeasureTag::Sigma,
        DiagonalPolicy::default(),
        4096,
        Exec::default(),
    )
    .unwrap();
    let ks = szego_ks(&cm, Some(3), PowerOptions::default()).unwrap();
    assert!(ks.a_norm.lower < 1e-12);
    assert!(ks.neumann.unwrap().residual < 1e-12);
    assert!(
        self_adjointness_defect(&ks.s, PowerOptions::default())
            .unwrap()
            .lower
            < 1e-12
    );
}

#[test]
fn cauchy_leray_l2_norm_on_the_ball_is_bounded_and_settles() {
    let d = make_ball();
    let mut norms = Vec::new();
    for n in [1, 2, 3] {
        let m = mesh(&d, n);
        let cm = assemble(
            KernelKind::CauchyLeray,
            &m,
            MeasureTag::Sigma,
            DiagonalPolicy::default(),
            4096,
            Exec::default(),
        )
        .unwrap();
        let b = opnorm_p(&cm, 2.0, None, None, &CandidateOptions::default()).unwrap();
        assert!(b.upper.unwrap() >= b.lower);
        norms.push(b.lower);
    }
    assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
    assert!(norms.iter().all(|&v| (1.0..1.2).contains(&v)), "{norms:?}");
    let m = mesh(&d, 1);
    let id = assemble(
        KernelKind::CauchyLeray,
        &m,
        MeasureTag::Sigma,
        DiagonalPolicy::default(),
        4096,
        Exec::default(),
    )
    .unwrap()
    .identity_like();
    assert_relative_eq!(
        spectral_norm_weighted(&id, None, None, PowerOptions::default())
            .unwrap()
            .lower,
        1.0,
        epsilon = 1e-12
    );
}

#[test]
fn constant_has_l2_norm_root_of_sphere_area() {
    let d = make_ball();
    let m = mesh(&d, 16);
    let n = lp_norm(&one(&m), &m, 2.0, MeasureTag::Sigma, None).unwrap();
    assert!((n - (2.0 * PI * PI).sqrt()).abs() < 1e-3);
    let empty = vec![false; m.len()];
    assert!(matches!(
        lp_norm(&one(&m), &m, 2.0, MeasureTag::Sigma, Some(&empty)),
        Err(LabError::EmptyMask)
    ));
}

#[test]
fn cauchy_leray_outputs_are_holomorphic_on_d15() {
    let d = make_ellipsoid(1.5, 2.0).unwrap();
    let m = mesh(&d, 8);
    let f = BoundaryFunction::from_fn(&m, |p| p.z1.conj() * p.z2).unwrap();
    let z = CPoint2::real(0.1, -0.2, -0.3, 0.1);
    let dbar = dbar_check(
        &d,
        |p| Ok(apply_interior(KernelKind::CauchyLeray, &d, &m, &f, p, Exec::default())?.value),
        &z,
        1e-4,
    )
    .unwrap();
    assert!(dbar <= 1e-4, "{dbar}");
}
