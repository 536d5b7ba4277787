//! Per-agent bushfire-response attributes.
//!
//! Each agent draws INIT/ACT thresholds from its subgroup's interval,
//! a dependant (with a location near home), at most one go-home flag, and
//! evacuation/invacuation preference locations picked from a refuge set.
//! All draws come from the agent's own stream, so annotation is
//! deterministic and parallelisable.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::model::{BehaviourParams, Location, ScenarioInputs};
use crate::places::euclidean;
use crate::rng::{weighted_pick, Uniform01};
use crate::{Error, Result};

/// Locations tagged with this type are candidate dependant locations
/// (schools, retirement homes and the like).
pub const DEPENDANT_TAG: &str = "dependant";

/// A refuge point: invacuation/evacuation candidate with locality and
/// capacity.
#[derive(Clone, Debug, PartialEq)]
pub struct Refuge {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub locality: String,
    pub capacity: u32,
}

/// The loaded refuge file.
#[derive(Clone, Debug, Default)]
pub struct RefugeSet {
    pub refuges: Vec<Refuge>,
}

impl RefugeSet {
    pub fn is_empty(&self) -> bool {
        self.refuges.is_empty()
    }
}

/// Complete bushfire-response attribute block for one agent.
#[derive(Clone, Debug, PartialEq)]
pub struct BdiAttributes {
    pub bdi_agent_type: String,
    pub init_threshold: f64,
    pub act_threshold: f64,
    pub has_dependant: bool,
    pub dependant_location: Option<(f64, f64)>,
    pub go_home_after_dependants: bool,
    pub go_home_before_leaving: bool,
    /// Evacuation preference: locality name and its central point.
    pub evac_preference: (String, (f64, f64)),
    pub invac_preference: (f64, f64),
}

/// Draw the INIT/ACT pair. Subgroups that may stay and defend draw two
/// independent uniforms on the interval and order them; otherwise a single
/// draw serves as both thresholds.
pub fn draw_thresholds(params: &BehaviourParams, rng: &mut impl Uniform01) -> (f64, f64) {
    let (lo, hi) = (params.threshold_min, params.threshold_max);
    if params.stay {
        let a = rng.uniform(lo, hi);
        let b = rng.uniform(lo, hi);
        (a.min(b), a.max(b))
    } else {
        let t = rng.uniform(lo, hi);
        (t, t)
    }
}

/// Bernoulli dependant draw; on success the dependant sits at a tagged
/// location within the radius of home, failing that the nearest tagged
/// location, failing that a uniform point inside the radius.
pub fn assign_dependant(
    params: &BehaviourParams,
    home: (f64, f64),
    locations: &[Location],
    rng: &mut impl Uniform01,
) -> (bool, Option<(f64, f64)>) {
    if !rng.bernoulli(params.prob_of_dependant) {
        return (false, None);
    }
    let radius = params.dependant_radius_m;
    let tagged: Vec<&Location> = locations
        .iter()
        .filter(|l| l.type_tags.contains(DEPENDANT_TAG))
        .collect();
    let nearby: Vec<&Location> = tagged
        .iter()
        .copied()
        .filter(|l| euclidean(l.coords(), home) <= radius)
        .collect();
    if !nearby.is_empty() {
        let idx = (rng.next_f64() * nearby.len() as f64) as usize;
        return (true, Some(nearby[idx.min(nearby.len() - 1)].coords()));
    }
    if let Some(nearest) = tagged
        .iter()
        .min_by(|a, b| {
            euclidean(a.coords(), home)
                .partial_cmp(&euclidean(b.coords(), home))
                .unwrap()
        })
    {
        return (true, Some(nearest.coords()));
    }
    // no tagged locations at all: uniform point in the disk around home
    let r = radius * rng.next_f64().sqrt();
    let theta = TAU * rng.next_f64();
    (true, Some((home.0 + r * theta.cos(), home.1 + r * theta.sin())))
}

/// One Bernoulli(prob_of_go_home) trial sets exactly one flag: the
/// after-dependants variant when the agent has a dependant, otherwise the
/// before-leaving variant. Both stay false on failure.
pub fn choose_go_home_flags(
    params: &BehaviourParams,
    has_dependant: bool,
    rng: &mut impl Uniform01,
) -> (bool, bool) {
    if rng.bernoulli(params.prob_of_go_home) {
        if has_dependant {
            (true, false)
        } else {
            (false, true)
        }
    } else {
        (false, false)
    }
}

/// Nearest refuge within the home locality; when the home locality has no
/// refuge, the nearest refuge overall.
pub fn choose_invac_preference(
    home: (f64, f64),
    home_locality: &str,
    refuges: &RefugeSet,
) -> Result<(f64, f64)> {
    if refuges.is_empty() {
        return Err(Error::input("refuge set is empty"));
    }
    fn nearest<'a>(
        candidates: impl Iterator<Item = &'a Refuge>,
        home: (f64, f64),
    ) -> Option<&'a Refuge> {
        candidates.min_by(|a, b| {
            euclidean((a.x, a.y), home)
                .partial_cmp(&euclidean((b.x, b.y), home))
                .unwrap()
        })
    }
    let within = nearest(
        refuges.refuges.iter().filter(|r| r.locality == home_locality),
        home,
    );
    let pick = within
        .or_else(|| nearest(refuges.refuges.iter(), home))
        .expect("non-empty refuge set");
    Ok((pick.x, pick.y))
}

/// Candidate evacuation localities: refuges grouped by locality name, home
/// locality excluded, weighted by distance times total capacity (far and
/// large wins). The destination is the locality's central point.
pub fn choose_evac_preference(
    home_centroid: (f64, f64),
    home_locality: &str,
    inputs: &ScenarioInputs,
    refuges: &RefugeSet,
    rng: &mut impl Uniform01,
) -> Result<(String, (f64, f64))> {
    let mut groups: BTreeMap<&str, (u64, f64, f64, u32)> = BTreeMap::new();
    for r in &refuges.refuges {
        if r.locality == home_locality {
            continue;
        }
        let g = groups.entry(&r.locality).or_insert((0, 0.0, 0.0, 0));
        g.0 += r.capacity as u64;
        g.1 += r.x;
        g.2 += r.y;
        g.3 += 1;
    }
    let mut names = Vec::with_capacity(groups.len());
    let mut centres = Vec::with_capacity(groups.len());
    let mut weights = Vec::with_capacity(groups.len());
    for (name, (capacity, sx, sy, count)) in groups {
        // the matching input locality's centroid when the name is known,
        // else the mean of the group's refuge coordinates (out-of-region
        // evacuation targets)
        let centre = inputs
            .locality_index(name)
            .map(|i| inputs.localities[i].centroid)
            .unwrap_or((sx / count as f64, sy / count as f64));
        names.push(name.to_owned());
        centres.push(centre);
        weights.push(euclidean(home_centroid, centre) * capacity as f64);
    }
    let idx = weighted_pick(rng.next_f64(), &weights).ok_or_else(|| {
        Error::input(format!(
            "no evacuation candidate locality outside `{home_locality}` has refuge capacity"
        ))
    })?;
    Ok((names[idx].clone(), centres[idx]))
}

/// Draw the full attribute block for one agent.
pub fn annotate_agent(
    inputs: &ScenarioInputs,
    refuges: &RefugeSet,
    subgroup: usize,
    home_location: usize,
    rng: &mut impl Uniform01,
) -> Result<BdiAttributes> {
    let sg = &inputs.subgroups[subgroup];
    let home = inputs.locations[home_location].coords();
    let home_locality = &inputs.localities[inputs.location_locality[home_location]];

    let (init_threshold, act_threshold) = draw_thresholds(&sg.behaviour, rng);
    let (has_dependant, dependant_location) =
        assign_dependant(&sg.behaviour, home, &inputs.locations, rng);
    let (go_home_after_dependants, go_home_before_leaving) =
        choose_go_home_flags(&sg.behaviour, has_dependant, rng);
    let invac_preference = choose_invac_preference(home, &home_locality.name, refuges)?;
    let evac_preference = choose_evac_preference(
        home_locality.centroid,
        &home_locality.name,
        inputs,
        refuges,
        rng,
    )?;

    Ok(BdiAttributes {
        bdi_agent_type: format!("{}{}", inputs.options.bdi_agent_type_prefix, sg.name),
        init_threshold,
        act_threshold,
        has_dependant,
        dependant_location,
        go_home_after_dependants,
        go_home_before_leaving,
        evac_preference,
        invac_preference,
    })
}
