use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use preserverlab::canon::{area_canon_highd, comm_canon_general, CanonConfig};
use preserverlab::check::{check_area, check_comm_norm, CheckConfig};
use preserverlab::exec::Execution;
use preserverlab::gauge::GaugeNorm;
use preserverlab::harness::{
    identity_suite, Family, Kernels, MapSpec, RealMatrixSource, Rule, UnitarySource,
};
use preserverlab::maps::{BlackBoxMap, Space};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn rotation(d: usize) -> BlackBoxMap {
    MapSpec {
        space: Space::RealEuclidean { dim: d },
        family: Family::SignedLinear {
            matrix: RealMatrixSource::Haar { haar_seed: 1 },
            sign_rule: Rule::SeededHash { seed: 2 },
        },
    }
    .make_map()
    .unwrap()
}

fn conjugation(d: usize) -> BlackBoxMap {
    MapSpec {
        space: Space::Hermitian { dim: d },
        family: Family::ConjugationAffine {
            unitary: UnitarySource::Haar { haar_seed: 3 },
            antiunitary: true,
            tau_rule: Rule::SeededHash { seed: 4 },
            f_rule: Rule::Trace,
        },
    }
    .make_map()
    .unwrap()
}

fn checks(c: &mut Criterion) {
    let mut group = c.benchmark_group("check_area_d6_4000");
    let map = rotation(6);
    for (name, exec) in MODES {
        let cfg = CheckConfig::new(4000, 1e-8, 7).with_exec(exec);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| check_area(map.as_vector().unwrap(), &cfg).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("check_comm_norm_d4_2000");
    let map = conjugation(4);
    for (name, exec) in MODES {
        let cfg = CheckConfig::new(2000, 1e-8, 7).with_exec(exec);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                check_comm_norm(map.as_matrix().unwrap(), &GaugeNorm::Schatten(1.0), &cfg).unwrap()
            })
        });
    }
    group.finish();
}

fn canonicalization(c: &mut Criterion) {
    let mut group = c.benchmark_group("area_canon_d8");
    let map = rotation(8);
    for (name, exec) in MODES {
        let cfg = CanonConfig::new(5).with_exec(exec);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| area_canon_highd(map.as_vector().unwrap(), &cfg).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("comm_canon_d4");
    let map = conjugation(4);
    for (name, exec) in MODES {
        let cfg = CanonConfig::new(5).with_exec(exec);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                comm_canon_general(map.as_matrix().unwrap(), &GaugeNorm::Operator, &cfg).unwrap()
            })
        });
    }
    group.finish();
}

fn suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("identity_suite");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| identity_suite(0, &Kernels::default(), exec))
        });
    }
    group.finish();
}

criterion_group!(benches, checks, canonicalization, suite);
criterion_main!(benches);
