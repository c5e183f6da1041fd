// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Sequential versus data-parallel timings for the enumeration-heavy kernels.
//! Build with `--no-default-features` to benchmark the sequential fallback alone.

use bipolymer::coloring::{ColorClass, ColoringModel};
use bipolymer::expansion::xi_coefficients;
use bipolymer::hardcore::{HardcoreModel, HardcoreParams};
use bipolymer::oracle::{count_is, OracleBudget};
use bipolymer::polymer::enumerate_polymers;
use bipolymer::random::{sample_graph, SampleConfig};
use bipolymer::{par, BigRational, Side};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn pools() -> Vec<(&'static str, usize)> {
    // zero keeps the ambient pool
    vec![("sequential", 1), ("parallel", 0)]
}

fn bench_polymers(c: &mut Criterion) {
    let g = sample_graph(&SampleConfig::new(12, 3, 1).unwrap());
    let lambda = BigRational::new(1.into(), 2.into());
    let model = HardcoreModel::new(&g, HardcoreParams::new(lambda, Side::L, 6).unwrap());
    let x = ColorClass::prefix(3, 1).unwrap();
    let small = sample_graph(&SampleConfig::new(5, 3, 1).unwrap());
    let coloring = ColoringModel::new(&small, x, 4);
    let mut group = c.benchmark_group("enumerate_polymers");
    for (name, threads) in pools() {
        group.bench_function(BenchmarkId::new("hardcore", name), |b| {
            b.iter(|| par::with_threads(threads, || enumerate_polymers(&model, usize::MAX).unwrap()))
        });
        group.bench_function(BenchmarkId::new("coloring", name), |b| {
            b.iter(|| par::with_threads(threads, || enumerate_polymers(&coloring, usize::MAX).unwrap()))
        });
    }
    group.finish();
}

fn bench_coefficients(c: &mut Criterion) {
    let g = sample_graph(&SampleConfig::new(10, 3, 2).unwrap());
    let model = HardcoreModel::new(&g, HardcoreParams::new(BigRational::from_integer(2.into()), Side::L, 5).unwrap());
    let mut group = c.benchmark_group("xi_coefficients");
    for (name, threads) in pools() {
        group.bench_function(BenchmarkId::new("order8", name), |b| {
            b.iter(|| par::with_threads(threads, || xi_coefficients(&model, 8, OracleBudget::DEFAULT).unwrap()))
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let g = sample_graph(&SampleConfig::new(16, 3, 3).unwrap());
    let lambda = BigRational::from_integer(1.into());
    let mut group = c.benchmark_group("count_is");
    for (name, threads) in pools() {
        group.bench_function(BenchmarkId::new("n16", name), |b| {
            b.iter(|| par::with_threads(threads, || count_is(&g, &lambda, OracleBudget::DEFAULT).unwrap()))
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_polymers, bench_coefficients, bench_oracle
}
criterion_main!(benches);
