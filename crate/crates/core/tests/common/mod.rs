//! Shared fixtures for integration tests: programmatic scenario builders and
//! paths to the checked-in Surf Coast data.

use std::collections::BTreeMap;
use std::path::PathBuf;

use evacgen::model::{
    scenario_from_parts, BehaviourParams, Location, ScenarioInputs, ScenarioOptions,
    SubgroupBuilder, TimeGrid,
};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn surfcoast_config() -> PathBuf {
    data_dir().join("surfcoast/config.json")
}

pub fn surfcoast_refuges() -> PathBuf {
    data_dir().join("surfcoast/refuges.csv")
}

pub fn anglesea_scenario(name: &str) -> PathBuf {
    data_dir().join(format!("anglesea/{name}"))
}

pub fn behaviour_defaults() -> BehaviourParams {
    BehaviourParams {
        prob_of_dependant: 0.0,
        stay: true,
        prob_of_go_home: 0.0,
        threshold_min: 0.1,
        threshold_max: 0.8,
        dependant_radius_m: 2000.0,
    }
}

/// Evenly laid-out localities, every location tagged `home` and `any` with a
/// uniform allocation.
pub fn uniform_locations(localities: usize, per_locality: usize, allocation: u32) -> Vec<Location> {
    let mut out = Vec::new();
    for li in 0..localities {
        for p in 0..per_locality {
            out.push(Location {
                id: format!("{li}-{p}"),
                x: (li % 8) as f64 * 10_000.0 + (p % 10) as f64 * 150.0,
                y: (li / 8) as f64 * 10_000.0 + (p / 10) as f64 * 150.0,
                locality: format!("L{li}"),
                allocation,
                type_tags: ["home".to_owned(), "any".to_owned()].into_iter().collect(),
            });
        }
    }
    out
}

pub struct SubgroupSetup {
    pub name: &'static str,
    pub count: u64,
    pub travel_factor: f64,
    /// (activity, duration, distribution row, tags)
    pub rows: Vec<(&'static str, usize, Vec<f64>, Vec<&'static str>)>,
    pub behaviour: BehaviourParams,
}

/// Assemble inputs from per-subgroup rows over a shared activity list.
pub fn build_inputs(
    steps: usize,
    activities: &[&str],
    subgroups: Vec<SubgroupSetup>,
    locations: Vec<Location>,
) -> ScenarioInputs {
    let builders = subgroups
        .into_iter()
        .map(|sg| {
            let mut durations = BTreeMap::new();
            let mut distribution = BTreeMap::new();
            let mut tags = BTreeMap::new();
            for (name, duration, row, row_tags) in sg.rows {
                durations.insert(name.to_owned(), duration);
                distribution.insert(name.to_owned(), row);
                if !row_tags.is_empty() {
                    tags.insert(
                        name.to_owned(),
                        row_tags.iter().map(|t| t.to_string()).collect(),
                    );
                }
            }
            SubgroupBuilder {
                name: sg.name.to_owned(),
                count: sg.count,
                travel_factor: sg.travel_factor,
                durations,
                distribution,
                location_tags: tags,
                behaviour: sg.behaviour,
            }
        })
        .collect();
    scenario_from_parts(
        TimeGrid::new(24.0, steps).unwrap(),
        activities.iter().map(|a| a.to_string()).collect(),
        builders,
        locations,
        ScenarioOptions::default(),
    )
    .unwrap()
}

/// The worked Resident activity table (percent columns), work spanning two
/// steps.
pub fn resident_rows() -> Vec<(&'static str, usize, Vec<f64>, Vec<&'static str>)> {
    vec![
        (
            "home",
            1,
            vec![90.0, 90.0, 85.0, 75.0, 30.0, 20.0, 15.0, 10.0, 25.0, 50.0, 80.0, 85.0],
            vec!["home"],
        ),
        (
            "work",
            2,
            vec![5.0, 5.0, 10.0, 15.0, 50.0, 60.0, 60.0, 50.0, 40.0, 30.0, 10.0, 10.0],
            vec!["any"],
        ),
        (
            "beach",
            1,
            vec![0.0, 0.0, 0.0, 0.0, 5.0, 5.0, 10.0, 15.0, 5.0, 0.0, 0.0, 0.0],
            vec!["any"],
        ),
        (
            "shops",
            1,
            vec![0.0, 0.0, 0.0, 5.0, 10.0, 10.0, 10.0, 20.0, 25.0, 15.0, 5.0, 0.0],
            vec!["any"],
        ),
        (
            "other",
            1,
            vec![5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0],
            vec!["any"],
        ),
    ]
}

/// The worked VisitorDaytime table: work-free, all unit durations.
pub fn visitor_daytime_rows() -> Vec<(&'static str, usize, Vec<f64>, Vec<&'static str>)> {
    vec![
        (
            "home",
            1,
            vec![100.0, 100.0, 90.0, 20.0, 10.0, 5.0, 5.0, 10.0, 45.0, 65.0, 80.0, 100.0],
            vec!["home"],
        ),
        ("work", 1, vec![0.0; 12], vec![]),
        (
            "beach",
            1,
            vec![0.0, 0.0, 5.0, 10.0, 20.0, 35.0, 45.0, 40.0, 15.0, 10.0, 5.0, 0.0],
            vec!["any"],
        ),
        (
            "shops",
            1,
            vec![0.0, 0.0, 0.0, 10.0, 20.0, 20.0, 20.0, 15.0, 30.0, 15.0, 10.0, 0.0],
            vec!["any"],
        ),
        (
            "other",
            1,
            vec![0.0, 0.0, 5.0, 60.0, 50.0, 40.0, 30.0, 35.0, 10.0, 10.0, 5.0, 0.0],
            vec!["any"],
        ),
    ]
}
