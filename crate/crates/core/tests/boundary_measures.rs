use cllab::boundary::forms::leray_levi_form;
use cllab::boundary::{
    atlas, density_ratio_report, parametrize, parametrize_charts, Chart, ChartKind, MeshOptions,
    PhiMap, QuadratureRule,
};
use cllab::geometry::{
    make_ball, make_ball_radius, make_ellipsoid, make_model_graph, make_worm, ModelKind,
};
use cllab::Exec;
use std::f64::consts::{FRAC_PI_2, PI};

const SPHERE_AREA: f64 = 2.0 * PI * PI;

#[test]
fn ball_nodes_lie_on_the_sphere() {
    let d = make_ball();
    let m = parametrize(&d, &MeshOptions::new(4), Exec::default()).unwrap();
    assert_eq!(m.len(), 2048);
    for p in &m.nodes {
        assert!((p.norm_sqr() - 1.0).abs() <= 1e-10);
    }
    assert_eq!(m.normalization_faults, 0);
}

#[test]
fn ball_sigma_converges_to_sphere_area_at_second_order() {
    let d = make_ball();
    let errs: Vec<f64> = [2, 4, 8]
        .iter()
        .map(|&n| {
            let m = parametrize(&d, &MeshOptions::new(n), Exec::default()).unwrap();
            (m.total_sigma() - SPHERE_AREA).abs() / SPHERE_AREA
        })
        .collect();
    for w in errs.windows(2) {
        assert!((w[0] / w[1]).log2() > 1.8, "{errs:?}");
    }
}

#[test]
fn ball_sigma_density_matches_closed_form_element() {
    // on the unit sphere with w = (cos φ e^{ia}, sin φ e^{iθ}) the volume
    // element is cos φ sin φ dφ da dθ
    let d = make_ball();
    let m = parametrize(&d, &MeshOptions::new(2), Exec::Sequential).unwrap();
    for i in 0..m.len() {
        let phi = m.param_coords[i][0];
        let xi_width = 2.0 * PI / 4.0;
        let expected = phi.cos() * phi.sin() * m.param_weights[i] * xi_width;
        assert!((m.sigma_weights[i] - expected).abs() <= 1e-6 * expected);
    }
}

#[test]
fn gauss_legendre_upgrade_is_more_accurate_on_the_ball() {
    let d = make_ball();
    let mid = parametrize(&d, &MeshOptions::new(3), Exec::default()).unwrap();
    let opts = MeshOptions {
        quadrature: QuadratureRule::GaussLegendre,
        ..MeshOptions::new(3)
    };
    let gl = parametrize(&d, &opts, Exec::default()).unwrap();
    let e_mid = (mid.total_sigma() - SPHERE_AREA).abs();
    let e_gl = (gl.total_sigma() - SPHERE_AREA).abs();
    assert!(
        e_gl < 1e-5 * SPHERE_AREA && e_gl < 1e-2 * e_mid,
        "{e_gl} {e_mid}"
    );
}

#[test]
fn dilated_ball_scales_sigma_by_eight() {
    let m1 = parametrize(&make_ball(), &MeshOptions::new(3), Exec::default()).unwrap();
    let m2 = parametrize(
        &make_ball_radius(2.0).unwrap(),
        &MeshOptions::new(3),
        Exec::default(),
    )
    .unwrap();
    let r = m2.total_sigma() / m1.total_sigma();
    assert!((r - 8.0).abs() < 1e-10);
}

#[test]
fn ball_lambda_is_positive_constant_multiple_of_sigma() {
    let d = make_ball();
    let m = parametrize(&d, &MeshOptions::new(3), Exec::default()).unwrap();
    let ratios: Vec<f64> = (0..m.len())
        .map(|i| m.lambda_weights[i] / m.sigma_weights[i])
        .collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(lo > 0.0);
    assert!(hi / lo - 1.0 <= 1e-6);
    let expected = 1.0 / (8.0 * PI.powi(4));
    assert!((lo / expected - 1.0).abs() < 1e-12);
    let rep = density_ratio_report(&d, &m).unwrap();
    assert!(rep.spread - 1.0 <= 1e-6);
}

#[test]
fn cl_weights_integrate_to_one_on_the_ball() {
    let opts = MeshOptions {
        quadrature: QuadratureRule::GaussLegendre,
        ..MeshOptions::new(3)
    };
    let m = parametrize(&make_ball(), &opts, Exec::default()).unwrap();
    let t = m.total_cl();
    assert!((t.re - 1.0).abs() < 1e-4 && t.im.abs() < 1e-12, "{t}");
}

#[test]
fn flipped_chart_leaves_densities_unchanged() {
    let d = make_ball();
    let opts = MeshOptions::new(2);
    let charts = atlas(&d, 2, 4.0).unwrap();
    let mut flipped = charts.clone();
    flipped[1].flipped = true;
    let a = parametrize_charts(&d, charts, &opts, Exec::Sequential).unwrap();
    let b = parametrize_charts(&d, flipped, &opts, Exec::Sequential).unwrap();
    let n0 = a.charts[0].node_count();
    assert!(a.orientation[n0..]
        .iter()
        .zip(&b.orientation[n0..])
        .all(|(x, y)| *x == -*y));
    // nodes are visited in reversed φ order in the flipped chart
    let sum = |m: &cllab::boundary::BoundaryMesh, w: &Vec<f64>| -> f64 {
        (n0..m.len()).map(|i| w[i]).sum()
    };
    assert!((sum(&a, &a.lambda_weights) - sum(&b, &b.lambda_weights)).abs() < 1e-15);
    assert!((sum(&a, &a.sigma_weights) - sum(&b, &b.sigma_weights)).abs() < 1e-13);
    let raw = |m: &cllab::boundary::BoundaryMesh| {
        let f = m.pull_back(|p| leray_levi_form(&d.derivatives(p).unwrap()));
        f.coefficients[n0..].iter().map(|c| c.re).sum::<f64>()
    };
    assert!((raw(&a) + raw(&b)).abs() < 1e-10 * raw(&a).abs());
}

#[test]
fn two_charts_give_the_same_form_integral_on_their_overlap() {
    // the band 0.4 < φ < 1.1 parametrized by φ and by cos²φ
    let d = make_ball();
    let opts = MeshOptions {
        quadrature: QuadratureRule::GaussLegendre,
        ..MeshOptions::new(32)
    };
    let base = |phi_map, bounds: (f64, f64)| Chart {
        name: format!("{phi_map:?}"),
        kind: ChartKind::HopfRay {
            phi_map,
            gamma: 1.0,
        },
        bounds: [bounds, (0.0, 4.0), (0.0, 2.0 * PI)],
        periodic: [false, true, true],
        periodic_offset: [0.5; 3],
        counts: [12, 8, 8],
        flipped: false,
    };
    let (p0, p1) = (0.4f64, 1.1f64);
    let a = parametrize_charts(
        &d,
        vec![base(PhiMap::Linear, (p0, p1))],
        &opts,
        Exec::default(),
    )
    .unwrap();
    let b = parametrize_charts(
        &d,
        vec![base(
            PhiMap::CosSquared,
            (p1.cos().powi(2), p0.cos().powi(2)),
        )],
        &opts,
        Exec::default(),
    )
    .unwrap();
    let form = |p: &cllab::CPoint2| leray_levi_form(&d.derivatives(p).unwrap());
    let ia = a.pull_back(form).integrate(&a);
    let ib = b.pull_back(form).integrate(&b);
    assert!((ia - ib).norm() <= 1e-8 * ia.norm(), "{ia} {ib}");
}

#[test]
fn d15_mesh_avoids_the_axis_and_has_finite_lambda() {
    let d = make_ellipsoid(1.5, 2.0).unwrap();
    let m = parametrize(&d, &MeshOptions::new(3), Exec::default()).unwrap();
    assert!(m.nodes.iter().all(|p| p.z1.re != 0.0));
    assert!(m.lambda_weights.iter().all(|l| l.is_finite() && *l >= 0.0));
    assert_eq!(m.normalization_faults, 0);
}

#[test]
fn d24_ratio_spread_is_finite() {
    let d = make_ellipsoid(2.0, 4.0).unwrap();
    let m = parametrize(&d, &MeshOptions::new(3), Exec::default()).unwrap();
    let rep = density_ratio_report(&d, &m).unwrap();
    assert!(rep.ratio_min > 0.0 && rep.ratio_max.is_finite());
}

#[test]
fn worm_annulus_nodes_have_vanishing_lambda() {
    let d = make_worm(2.2, 1.0).unwrap();
    let m = parametrize(&d, &MeshOptions::new(3), Exec::default()).unwrap();
    assert_eq!(m.normalization_faults, 0);
    let a = 2.2 - FRAC_PI_2;
    let mut annulus = 0;
    for i in 0..m.len() {
        let [t, _, psi] = m.param_coords[i];
        if t.abs() <= a && psi == 0.0 {
            annulus += 1;
            assert!(m.nodes[i].z2.norm() < 1e-12);
            assert!(m.lambda_weights[i] <= 1e-6 * m.sigma_weights[i]);
        }
    }
    assert!(annulus > 0);
    let rep = density_ratio_report(&d, &m).unwrap();
    assert!(rep.degenerate_nodes > 0);
}

#[test]
fn model_meshes_build() {
    for kind in [ModelKind::Parabolic, ModelKind::Power(1.5)] {
        let d = make_model_graph(kind).unwrap();
        let m = parametrize(&d, &MeshOptions::new(2), Exec::default()).unwrap();
        assert_eq!(m.len(), 256);
        assert!(m.sigma_weights.iter().all(|s| *s > 0.0));
        assert!(!m.covers_boundary());
    }
}
