//! Location assignment: locality-centroid gravity selection and capped homes.
//!
//! Localities are weighted by inverse centroid distance times their total
//! allocation for the activity (a gravity model); the agent's own locality
//! competes through a pseudo-distance calibrated so that, under uniform
//! allocations, the agent stays put with probability 1 − g_s. Homes are
//! drawn from a mutable allocation ledger that enforces per-location caps.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::model::{ScenarioInputs, HOME_ACTIVITY};
use crate::rng::{weighted_pick, Uniform01};
use crate::schedule::DayPlanSkeleton;
use crate::{Error, Result};

/// Distance floor guarding against coincident centroids.
const MIN_CENTROID_DISTANCE: f64 = 1e-9;

static CENTROID_BUILDS: AtomicUsize = AtomicUsize::new(0);

/// Number of centroid-distance-matrix builds so far in this process; the
/// matrix is meant to be computed once per generation run.
pub fn centroid_build_count() -> usize {
    CENTROID_BUILDS.load(Ordering::Relaxed)
}

/// Pairwise locality-centroid distances, computed once per run.
#[derive(Clone, Debug)]
pub struct CentroidIndex {
    centroids: Vec<(f64, f64)>,
    dist: Vec<f64>,
    n: usize,
}

impl CentroidIndex {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn centroid(&self, i: usize) -> (f64, f64) {
        self.centroids[i]
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.n + b]
    }
}

pub fn euclidean(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Build the centroid distance matrix from the loaded localities.
pub fn compute_centroids(inputs: &ScenarioInputs) -> CentroidIndex {
    CENTROID_BUILDS.fetch_add(1, Ordering::Relaxed);
    let n = inputs.localities.len();
    let centroids: Vec<(f64, f64)> = inputs.localities.iter().map(|l| l.centroid).collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(centroids[i], centroids[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    CentroidIndex {
        centroids,
        dist,
        n,
    }
}

/// Synthetic self-distance of the current locality, relative to the eligible
/// other localities, such that after normalisation the agent stays with
/// probability 1 − g. Returns `None` when the agent must stay outright
/// (no eligible alternative, or g = 0).
pub fn pseudo_distance(g: f64, other_distances: impl IntoIterator<Item = f64>) -> Option<f64> {
    assert!((0.0..1.0).contains(&g), "travel factor must lie in [0,1)");
    let inv_sum: f64 = other_distances
        .into_iter()
        .map(|d| 1.0 / d.max(MIN_CENTROID_DISTANCE))
        .sum();
    if inv_sum == 0.0 || g == 0.0 {
        return None;
    }
    Some(g / ((1.0 - g) * inv_sum))
}

/// Per-locality eligible locations and allocation mass for one
/// (subgroup, activity) pair.
#[derive(Clone, Debug, Default)]
struct LocalitySlot {
    locations: Vec<u32>,
    /// Cumulative allocation weights over `locations`.
    cum_alloc: Vec<f64>,
    alloc_sum: f64,
}

/// Read-only context for activity-location assignment; built once per run.
pub struct PlaceContext<'a> {
    inputs: &'a ScenarioInputs,
    pub centroids: CentroidIndex,
    /// `[s][k][locality]` slots.
    slots: Vec<Vec<Vec<LocalitySlot>>>,
}

impl<'a> PlaceContext<'a> {
    pub fn new(inputs: &'a ScenarioInputs) -> Self {
        let centroids = compute_centroids(inputs);
        let locality_count = inputs.localities.len();
        let mut slots = Vec::with_capacity(inputs.subgroups.len());
        for s in 0..inputs.subgroups.len() {
            let mut per_activity = Vec::with_capacity(inputs.activities.len());
            for k in 0..inputs.activities.len() {
                let mut per_locality = vec![LocalitySlot::default(); locality_count];
                for &loc in inputs.eligible_locations(s, k) {
                    let slot = &mut per_locality[inputs.location_locality[loc]];
                    slot.alloc_sum += inputs.locations[loc].allocation as f64;
                    slot.locations.push(loc as u32);
                    slot.cum_alloc.push(slot.alloc_sum);
                }
                per_activity.push(per_locality);
            }
            slots.push(per_activity);
        }
        PlaceContext {
            inputs,
            centroids,
            slots,
        }
    }

    /// Gravity weight per locality for the next activity: inverse centroid
    /// distance times eligible allocation mass, with the current locality
    /// entering through its pseudo-distance. A one-hot vector on the current
    /// locality means the agent stays outright.
    pub fn locality_weights(
        &self,
        s: usize,
        k: usize,
        current_locality: usize,
        g: f64,
    ) -> Vec<f64> {
        let per_locality = &self.slots[s][k];
        let n = per_locality.len();
        let mut weights = vec![0.0; n];
        let current_mass = per_locality[current_locality].alloc_sum;
        let others: Vec<(usize, f64)> = (0..n)
            .filter(|&i| i != current_locality && per_locality[i].alloc_sum > 0.0)
            .map(|i| (i, self.centroids.distance(current_locality, i)))
            .collect();
        if current_mass > 0.0 {
            match pseudo_distance(g, others.iter().map(|&(_, d)| d)) {
                None => {
                    weights[current_locality] = 1.0;
                    return weights;
                }
                Some(d0) => {
                    weights[current_locality] = current_mass / d0;
                }
            }
        }
        for (i, d) in others {
            weights[i] = per_locality[i].alloc_sum / d.max(MIN_CENTROID_DISTANCE);
        }
        weights
    }

    /// Draw the locality hosting the next activity.
    pub fn choose_locality(
        &self,
        s: usize,
        k: usize,
        current_locality: usize,
        rng: &mut impl Uniform01,
    ) -> Result<usize> {
        let g = self.inputs.subgroups[s].travel_factor;
        let weights = self.locality_weights(s, k, current_locality, g);
        weighted_pick(rng.next_f64(), &weights).ok_or_else(|| {
            Error::input(format!(
                "no eligible location with allocation anywhere for subgroup {} activity `{}`",
                self.inputs.subgroups[s].name,
                self.inputs.activities.name(k)
            ))
        })
    }

    /// Draw a location inside a chosen locality, allocation-weighted by
    /// default or uniform when the scenario option asks for it.
    pub fn choose_location_within(
        &self,
        s: usize,
        k: usize,
        locality: usize,
        rng: &mut impl Uniform01,
    ) -> Result<usize> {
        let slot = &self.slots[s][k][locality];
        if slot.locations.is_empty() {
            return Err(Error::runtime(format!(
                "locality {} holds no eligible location for subgroup {} activity `{}`",
                self.inputs.localities[locality].name,
                self.inputs.subgroups[s].name,
                self.inputs.activities.name(k)
            )));
        }
        if self.inputs.options.uniform_within_locality {
            let idx = (rng.next_f64() * slot.locations.len() as f64) as usize;
            return Ok(slot.locations[idx.min(slot.locations.len() - 1)] as usize);
        }
        let target = rng.next_f64() * slot.alloc_sum;
        let idx = slot.cum_alloc.partition_point(|&c| c <= target);
        Ok(slot.locations[idx.min(slot.locations.len() - 1)] as usize)
    }

    /// Assign a location to every entry of a skeleton. Home entries (first,
    /// last, and any mid-day return) are pinned to the agent's home; other
    /// activities chain gravity draws from the agent's current location.
    pub fn assign_locations(
        &self,
        skeleton: &DayPlanSkeleton,
        home: usize,
        s: usize,
        rng: &mut impl Uniform01,
    ) -> Result<LocatedPlan> {
        let mut entries = Vec::with_capacity(skeleton.entries.len());
        let mut current = home;
        for entry in &skeleton.entries {
            let location = if entry.activity == HOME_ACTIVITY {
                home
            } else {
                let locality = self.choose_locality(
                    s,
                    entry.activity,
                    self.inputs.location_locality[current],
                    rng,
                )?;
                self.choose_location_within(s, entry.activity, locality, rng)?
            };
            current = location;
            entries.push(LocatedEntry {
                start_hours: entry.start_hours,
                activity: entry.activity,
                location,
            });
        }
        Ok(LocatedPlan { entries })
    }
}

/// A plan entry with its assigned location index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocatedEntry {
    pub start_hours: f64,
    pub activity: usize,
    pub location: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocatedPlan {
    pub entries: Vec<LocatedEntry>,
}

/// Mutable home-capacity ledger: remaining allocation per location plus
/// per-subgroup locality indices for the uniform home-locality draw.
/// Exhausted locations drop out; exhausted localities leave the draw.
pub struct AllocationLedger<'a> {
    inputs: &'a ScenarioInputs,
    remaining: Vec<u32>,
    /// `[s][locality]` home-eligible location indices.
    home_slots: Vec<Vec<Vec<u32>>>,
    /// `[s][locality]` remaining capacity sums.
    locality_remaining: Vec<Vec<u64>>,
    /// Subgroups whose home map contains each location.
    subgroups_of: Vec<Vec<u16>>,
    assigned: u64,
}

impl<'a> AllocationLedger<'a> {
    pub fn new(inputs: &'a ScenarioInputs) -> Self {
        let locality_count = inputs.localities.len();
        let remaining: Vec<u32> = inputs.locations.iter().map(|l| l.allocation).collect();
        let mut home_slots = vec![vec![Vec::new(); locality_count]; inputs.subgroups.len()];
        let mut locality_remaining = vec![vec![0u64; locality_count]; inputs.subgroups.len()];
        let mut subgroups_of = vec![Vec::new(); inputs.locations.len()];
        for s in 0..inputs.subgroups.len() {
            for &loc in inputs.eligible_locations(s, HOME_ACTIVITY) {
                let li = inputs.location_locality[loc];
                home_slots[s][li].push(loc as u32);
                locality_remaining[s][li] += inputs.locations[loc].allocation as u64;
                subgroups_of[loc].push(s as u16);
            }
        }
        AllocationLedger {
            inputs,
            remaining,
            home_slots,
            locality_remaining,
            subgroups_of,
            assigned: 0,
        }
    }

    pub fn remaining(&self, location: usize) -> u32 {
        self.remaining[location]
    }

    /// Total homes handed out so far.
    pub fn assigned(&self) -> u64 {
        self.assigned
    }

    /// Draw a home for one `s`-agent: locality uniform over those with
    /// remaining capacity, location weighted by remaining allocation (or
    /// uniform over non-exhausted locations when configured); the ledger is
    /// decremented and exhausted locations removed.
    pub fn assign_home(&mut self, s: usize, rng: &mut impl Uniform01) -> Result<usize> {
        let eligible: Vec<usize> = (0..self.inputs.localities.len())
            .filter(|&i| self.locality_remaining[s][i] > 0)
            .collect();
        if eligible.is_empty() {
            return Err(Error::input(format!(
                "home capacity exhausted for subgroup {}",
                self.inputs.subgroups[s].name
            )));
        }
        let pick = (rng.next_f64() * eligible.len() as f64) as usize;
        let locality = eligible[pick.min(eligible.len() - 1)];

        let slots = &self.home_slots[s][locality];
        let location = if self.inputs.options.uniform_within_locality {
            let live: Vec<u32> = slots
                .iter()
                .copied()
                .filter(|&l| self.remaining[l as usize] > 0)
                .collect();
            let idx = (rng.next_f64() * live.len() as f64) as usize;
            live[idx.min(live.len() - 1)] as usize
        } else {
            let weights: Vec<f64> = slots
                .iter()
                .map(|&l| self.remaining[l as usize] as f64)
                .collect();
            let idx = weighted_pick(rng.next_f64(), &weights).expect("positive locality capacity");
            slots[idx] as usize
        };

        self.remaining[location] -= 1;
        for &sg in &self.subgroups_of[location] {
            let li = self.inputs.location_locality[location];
            self.locality_remaining[sg as usize][li] -= 1;
        }
        self.assigned += 1;
        Ok(location)
    }
}
