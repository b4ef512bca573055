use cllab::boundary::{parametrize, MeshOptions};
use cllab::geometry::{make_ball, make_ellipsoid};
use cllab::operators::{
    apply_interior, assemble, BoundaryFunction, DiagonalPolicy, KernelKind, MeasureTag,
};
use cllab::{CPoint2, Exec};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn mesh_build(c: &mut Criterion) {
    let d = make_ellipsoid(2.0, 4.0).unwrap();
    let mut g = c.benchmark_group("mesh_build");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 8), &exec, |b, &exec| {
            b.iter(|| parametrize(&d, &MeshOptions::new(8), exec).unwrap())
        });
    }
    g.finish();
}

fn assembly(c: &mut Criterion) {
    let m = parametrize(&make_ball(), &MeshOptions::new(3), Exec::default()).unwrap();
    let mut g = c.benchmark_group("cauchy_leray_assembly");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, m.len()), &exec, |b, &exec| {
            b.iter(|| {
                assemble(
                    KernelKind::CauchyLeray,
                    &m,
                    MeasureTag::Sigma,
                    DiagonalPolicy::default(),
                    m.len(),
                    exec,
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

fn interior_apply(c: &mut Criterion) {
    let d = make_ball();
    let m = parametrize(&d, &MeshOptions::new(16), Exec::default()).unwrap();
    let f = BoundaryFunction::from_fn(&m, |p| p.z1 * p.z2).unwrap();
    let z = CPoint2::real(0.3, 0.0, 0.2, 0.0);
    let mut g = c.benchmark_group("interior_apply");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, m.len()), &exec, |b, &exec| {
            b.iter(|| {
                apply_interior(KernelKind::CauchyLeray, &d, &m, &f, black_box(&z), exec).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, mesh_build, assembly, interior_apply);
criterion_main!(benches);
