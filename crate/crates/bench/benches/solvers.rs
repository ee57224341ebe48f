use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dbar_core::bie::{scattering_at, BieOptions, ScatteringGrid, TruncationSpec};
use dbar_core::dbar::{DbarOptions, DbarSolver};
use dbar_core::forward::{assemble_dn, nodal_values, DiskMesh};
use dbar_core::green::{FaddeevGreen, GreenOptions};
use dbar_core::ls::{LsKernel, LsOptions, PotentialField, solve_with_kernel};
use dbar_core::profiles::case1;
use dbar_core::{Energy, PeriodicGrid, SpectralLambda, C64};

fn e() -> Energy {
    Energy::real(-1.0)
}

fn green(c: &mut Criterion) {
    let g = FaddeevGreen::new(SpectralLambda::real(2.0).unwrap(), e(), &GreenOptions::default()).unwrap();
    let pts: Vec<C64> = (0..64).map(|k| C64::from_polar(0.05 + 0.03 * k as f64, 0.7 * k as f64)).collect();
    c.bench_function("green_64_points", |b| {
        b.iter(|| pts.iter().map(|&z| g.eval(black_box(z)).unwrap()).sum::<C64>())
    });
}

fn ls(c: &mut Criterion) {
    let grid = PeriodicGrid::z_grid(6, 2.1).unwrap();
    let lam = SpectralLambda::real(2.0).unwrap();
    let opts = LsOptions::default();
    let q = PotentialField::from_profile(grid, &case1()).unwrap();
    c.bench_function("ls_kernel_64", |b| b.iter(|| LsKernel::build(grid, lam, e(), &opts.green).unwrap()));
    let k = LsKernel::build(grid, lam, e(), &opts.green).unwrap();
    c.bench_function("ls_solve_64", |b| b.iter(|| solve_with_kernel(black_box(&q), &k, &opts).unwrap()));
}

fn fem_and_bie(c: &mut Criterion) {
    let mesh = DiskMesh::with_triangles(16_000).unwrap();
    let p = case1();
    let q = nodal_values(&mesh, |z| C64::new(p.value(z.norm()) + 1.0, 0.0));
    let q0 = nodal_values(&mesh, |_| C64::new(1.0, 0.0));
    let mut g = c.benchmark_group("slow");
    g.sample_size(10);
    g.bench_function("fem_dn_16k", |b| b.iter(|| assemble_dn(&mesh, &q, 8).unwrap()));
    let lq = assemble_dn(&mesh, &q, 8).unwrap();
    let l0 = assemble_dn(&mesh, &q0, 8).unwrap();
    let lam = SpectralLambda::new(C64::new(2.0, 1.0)).unwrap();
    g.bench_function("bie_single_lambda", |b| {
        b.iter(|| scattering_at(&lq, &l0, lam, e(), &BieOptions::default()).unwrap())
    });
    g.finish();
}

fn dbar(c: &mut Criterion) {
    let spec = TruncationSpec::circular(4.0).unwrap();
    let grid = PeriodicGrid::new(6, 8.4).unwrap();
    let mut t = ScatteringGrid::zeros(grid);
    for i in 0..grid.len() {
        let l = grid.point_at(i);
        if spec.in_outer(l) {
            t.values[i] = C64::new((-l.norm_sqr() / 8.0).exp(), 0.0);
            t.mask[i] = true;
        }
    }
    let solver = DbarSolver::new(grid, DbarOptions::default());
    c.bench_function("dbar_solve_64", |b| b.iter(|| solver.solve(&t, black_box(C64::new(0.2, 0.1)), e()).unwrap()));
}

criterion_group!(benches, green, ls, fem_and_bie, dbar);
criterion_main!(benches);
