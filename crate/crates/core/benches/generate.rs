//! Generation throughput: rayon per-agent stage vs the sequential driver.
//!
//! Outputs are identical (asserted in the unit tests); this measures only
//! the speedup on the embarrassingly parallel per-agent work. Run with
//! `cargo bench -p evacgen`; `--no-default-features` leaves just the
//! sequential path.

use std::collections::BTreeMap;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use evacgen::generate::{generate, generate_sequential, GenerateOptions};
use evacgen::model::{
    scenario_from_parts, BehaviourParams, Location, ScenarioInputs, ScenarioOptions,
    SubgroupBuilder, TimeGrid,
};

fn bench_inputs(agents: u64) -> ScenarioInputs {
    let steps = 12;
    let activities = vec!["home".to_owned(), "work".to_owned(), "other".to_owned()];
    let rows: BTreeMap<String, Vec<f64>> = [
        ("home", vec![90.0, 90.0, 85.0, 75.0, 30.0, 20.0, 15.0, 10.0, 25.0, 50.0, 80.0, 85.0]),
        ("work", vec![5.0, 5.0, 10.0, 15.0, 50.0, 60.0, 60.0, 50.0, 40.0, 30.0, 10.0, 10.0]),
        ("other", vec![5.0, 5.0, 5.0, 10.0, 20.0, 20.0, 25.0, 40.0, 35.0, 20.0, 10.0, 5.0]),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_owned(), v))
    .collect();
    let durations: BTreeMap<String, usize> =
        [("home", 1), ("work", 2), ("other", 1)].into_iter().map(|(k, v)| (k.to_owned(), v)).collect();
    let tags: BTreeMap<String, Vec<String>> = [
        ("home", vec!["home".to_owned()]),
        ("work", vec!["any".to_owned()]),
        ("other", vec!["any".to_owned()]),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_owned(), v))
    .collect();

    let mut locations = Vec::new();
    let localities = 24;
    let per_locality = 80;
    for li in 0..localities {
        for p in 0..per_locality {
            locations.push(Location {
                id: format!("{li}-{p}"),
                x: (li % 6) as f64 * 8_000.0 + (p % 10) as f64 * 120.0,
                y: (li / 6) as f64 * 8_000.0 + (p / 10) as f64 * 120.0,
                locality: format!("L{li}"),
                allocation: 60,
                type_tags: ["home".to_owned(), "any".to_owned()].into_iter().collect(),
            });
        }
    }

    scenario_from_parts(
        TimeGrid::new(24.0, steps).unwrap(),
        activities,
        vec![SubgroupBuilder {
            name: "Resident".to_owned(),
            count: agents,
            travel_factor: 0.3,
            durations,
            distribution: rows,
            location_tags: tags,
            behaviour: BehaviourParams {
                prob_of_dependant: 0.0,
                stay: true,
                prob_of_go_home: 0.0,
                threshold_min: 0.1,
                threshold_max: 0.8,
                dependant_radius_m: 2000.0,
            },
        }],
        locations,
        ScenarioOptions::default(),
    )
    .unwrap()
}

fn bench_generation(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate");
    group.sample_size(10);
    for agents in [2_000u64, 10_000] {
        let inputs = bench_inputs(agents);
        let options = GenerateOptions {
            seed: 42,
            annotate: false,
        };
        group.bench_with_input(BenchmarkId::new("default", agents), &inputs, |b, inputs| {
            b.iter(|| generate(inputs, None, options).unwrap())
        });
        group.bench_with_input(
            BenchmarkId::new("sequential", agents),
            &inputs,
            |b, inputs| b.iter(|| generate_sequential(inputs, None, options).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_generation);
criterion_main!(benches);
