use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ctrlgauge::control::{verify_theorem1_with, TheoremOptions};
use ctrlgauge::oracle::suite::random_system;
use ctrlgauge::oracle::{mc_volume, OracleConfig};
use ctrlgauge::rng::SplitMix64;
use ctrlgauge::{reach_region, Exec, LdtSystem, RegionKind};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn system(n: usize, seed: u64) -> LdtSystem {
    random_system(&mut SplitMix64::new(seed), n, 1, 1.2)
}

fn exact_volume(c: &mut Criterion) {
    let sys = system(3, 7);
    let z = reach_region(&sys, 16).unwrap().stage(16).clone();
    let mut group = c.benchmark_group("volume_3d_m16");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(z.volume_with(exec)))
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let sys = system(3, 11);
    let g = reach_region(&sys, 8).unwrap().stage(8).generators().clone();
    let cfg = OracleConfig {
        mc_samples: 200_000,
        ..OracleConfig::default()
    };
    let mut group = c.benchmark_group("mc_volume_200k");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(mc_volume(&g, &cfg, exec).unwrap()))
        });
    }
    group.finish();
}

fn theorem(c: &mut Criterion) {
    let a = system(2, 3);
    let b = LdtSystem::new("scaled", a.a().clone(), a.b() * 1.5).unwrap();
    let mut group = c.benchmark_group("verify_theorem1_n2_h6");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = TheoremOptions {
            samples: 50,
            kind: RegionKind::Reach,
            seed: 1,
            exec,
        };
        group.bench_function(BenchmarkId::from_parameter(name), |bch| {
            bch.iter(|| black_box(verify_theorem1_with(&a, &b, 6, &opts).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, exact_volume, monte_carlo, theorem);
criterion_main!(benches);
