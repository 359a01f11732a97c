use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hom_superres::estimator::{batch_precision, BatchSpec};
use hom_superres::fisher::fi_twophoton_spatial;
use hom_superres::sampler::sample_events_with;
use hom_superres::{Exec, QuadratureSpec, SourceModel, SourceScene, Strategy};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn sampling(c: &mut Criterion) {
    let scene = SourceScene::new(0.0, 0.5, 0.92).unwrap();
    let mut g = c.benchmark_group("sample_events_100k");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sample_events_with(&scene, SourceModel::ThermalPair, 100_000, 1, exec).unwrap())
        });
    }
    g.finish();
}

fn batches(c: &mut Criterion) {
    let scene = SourceScene::new(0.0, 0.5, 0.92).unwrap();
    let mut g = c.benchmark_group("batch_precision_spatial");
    g.sample_size(10);
    for (name, exec) in MODES {
        let mut spec = BatchSpec::new(200, 16, 1);
        spec.exec = exec;
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| batch_precision(&scene, SourceModel::ThermalPair, Strategy::TwoPhotonSpatial, &spec).unwrap())
        });
    }
    g.finish();
}

fn fisher_scan(c: &mut Criterion) {
    let quad = QuadratureSpec::default();
    let eps: Vec<f64> = (1..=16).map(|i| 0.05 * i as f64).collect();
    let mut g = c.benchmark_group("fisher_scan_16");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                exec.map(eps.len(), |i| {
                    let s = SourceScene::new(0.0, eps[i], 0.92).unwrap();
                    fi_twophoton_spatial(&s, SourceModel::ThermalPair, &quad).unwrap()
                })
            })
        });
    }
    g.finish();
}

criterion_group!(benches, sampling, batches, fisher_scan);
criterion_main!(benches);
