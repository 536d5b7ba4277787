//! Activity scheduling: distribution tables to per-agent day plans.
//!
//! Per subgroup, the input distribution Δ is converted into a start-proportion
//! matrix Ξ (a recursion that subtracts agents still busy from earlier
//! starts), normalised column-wise into Ξ*, and cumulatively summed into C.
//! Per agent, one uniform draw per free step picks an activity from C's
//! column, duration weights block out the following steps, and activity
//! changes become start times jittered within half a step of the boundary.

use crate::model::{DistributionTable, TimeGrid, HOME_ACTIVITY};
use crate::rng::Uniform01;

/// Start proportions Ξ and their column-normalised form Ξ*.
#[derive(Clone, Debug)]
pub struct StartMatrix {
    /// `xi[k][n]`: proportion of the subgroup expected to begin activity `k`
    /// at step `n`; negatives from the recursion are clamped to 0.
    pub xi: Vec<Vec<f64>>,
    /// Column-normalised Ξ; zero for degenerate columns.
    pub xi_star: Vec<Vec<f64>>,
    /// Columns whose Ξ sum is zero: nothing new can start there.
    pub degenerate: Vec<bool>,
}

/// Column-wise cumulative form of Ξ*; the final row of every non-degenerate
/// column is exactly 1.
#[derive(Clone, Debug)]
pub struct CumulativeMatrix {
    pub c: Vec<Vec<f64>>,
    pub degenerate: Vec<bool>,
}

/// Outcome of activity selection: one activity per step. This is the Boolean
/// matrix B in compressed form (exactly one true per column by construction).
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionMatrix {
    pub chosen: Vec<usize>,
}

impl SelectionMatrix {
    /// Expand to the K×N Boolean form.
    pub fn bool_matrix(&self, activities: usize) -> Vec<Vec<bool>> {
        let mut b = vec![vec![false; self.chosen.len()]; activities];
        for (n, &k) in self.chosen.iter().enumerate() {
            b[k][n] = true;
        }
        b
    }
}

/// One plan entry: an activity beginning at `start_hours`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanEntry {
    pub start_hours: f64,
    pub activity: usize,
}

/// Time-ordered activity starts, bookended by the home activity at t=0 and
/// t=T so agents begin and end the day at home.
#[derive(Clone, Debug, PartialEq)]
pub struct DayPlanSkeleton {
    pub entries: Vec<PlanEntry>,
}

impl DayPlanSkeleton {
    /// Activity occupying each step, sampled at step midpoints. Inverse of
    /// the selection-to-skeleton construction.
    pub fn step_activities(&self, grid: &TimeGrid) -> Vec<usize> {
        (0..grid.steps)
            .map(|n| {
                let t = grid.step_midpoint(n);
                self.entries
                    .iter()
                    .rev()
                    .find(|e| e.start_hours <= t)
                    .map(|e| e.activity)
                    .unwrap_or(HOME_ACTIVITY)
            })
            .collect()
    }
}

/// Build Ξ from a distribution and duration weights: the start proportion at
/// step n is δ at n minus what started in the previous d−1 steps. Values are
/// clamped at zero as the recursion proceeds, so later steps subtract the
/// clamped amounts.
pub fn build_start_matrix(dist: &DistributionTable, durations: &[usize]) -> StartMatrix {
    let k_count = dist.activities();
    let steps = dist.steps();
    let mut xi = vec![vec![0.0; steps]; k_count];
    for k in 0..k_count {
        let d = durations[k];
        for n in 0..steps {
            let mut v = dist.value(k, n);
            for j in 1..d {
                if n >= j {
                    v -= xi[k][n - j];
                }
            }
            xi[k][n] = v.max(0.0);
        }
    }

    let mut xi_star = vec![vec![0.0; steps]; k_count];
    let mut degenerate = vec![false; steps];
    for n in 0..steps {
        let sum: f64 = (0..k_count).map(|k| xi[k][n]).sum();
        if sum > 0.0 {
            for k in 0..k_count {
                xi_star[k][n] = xi[k][n] / sum;
            }
        } else {
            degenerate[n] = true;
        }
    }
    StartMatrix {
        xi,
        xi_star,
        degenerate,
    }
}

/// Cumulative column sums of Ξ*. The last row of each non-degenerate column
/// is pinned to exactly 1 so a draw strictly below 1 always lands.
pub fn cumulative_matrix(start: &StartMatrix) -> CumulativeMatrix {
    let k_count = start.xi_star.len();
    let steps = start.degenerate.len();
    let mut c = vec![vec![0.0; steps]; k_count];
    for n in 0..steps {
        if start.degenerate[n] {
            continue;
        }
        let mut acc = 0.0;
        for k in 0..k_count {
            acc += start.xi_star[k][n];
            c[k][n] = acc;
        }
        c[k_count - 1][n] = 1.0;
    }
    CumulativeMatrix {
        c,
        degenerate: start.degenerate.clone(),
    }
}

/// Draw one activity per step from C, then propagate duration blocks: a
/// chosen activity of duration d occupies d consecutive steps (truncating at
/// the end of the period). Degenerate columns carry the previous activity
/// forward one step.
pub fn select_activities(
    c: &CumulativeMatrix,
    durations: &[usize],
    rng: &mut impl Uniform01,
) -> SelectionMatrix {
    let k_count = c.c.len();
    let steps = c.degenerate.len();
    let mut chosen = vec![usize::MAX; steps];
    let mut block = 0usize;
    for n in 0..steps {
        if block > 0 {
            chosen[n] = chosen[n - 1];
            block -= 1;
            continue;
        }
        if c.degenerate[n] {
            // nothing can start here; previous activity carries over
            chosen[n] = if n == 0 { HOME_ACTIVITY } else { chosen[n - 1] };
            continue;
        }
        let u = rng.next_f64();
        let mut pick = k_count - 1;
        for k in 0..k_count {
            if u < c.c[k][n] {
                pick = k;
                break;
            }
        }
        chosen[n] = pick;
        block = durations[pick] - 1;
    }
    SelectionMatrix { chosen }
}

/// Translate a selection into start times. Each activity change at step n
/// begins at the step boundary plus a uniform jitter of at most half a step,
/// avoiding periodic waves of departures. The home bookends are prepended
/// and appended; the step-1 column counts as a change only when it differs
/// from the home bookend.
pub fn sequence_plan(
    b: &SelectionMatrix,
    grid: &TimeGrid,
    rng: &mut impl Uniform01,
) -> DayPlanSkeleton {
    let step = grid.step_hours();
    let half = step / 2.0;
    let mut entries = vec![PlanEntry {
        start_hours: 0.0,
        activity: HOME_ACTIVITY,
    }];
    let mut previous = HOME_ACTIVITY;
    for (n, &activity) in b.chosen.iter().enumerate() {
        if activity != previous {
            let nominal = n as f64 * step;
            let t = (nominal + rng.symmetric() * half).clamp(MIN_INTERIOR_HOURS, grid.period_hours);
            entries.push(PlanEntry {
                start_hours: t,
                activity,
            });
        }
        previous = activity;
    }
    entries.push(PlanEntry {
        start_hours: grid.period_hours,
        activity: HOME_ACTIVITY,
    });
    DayPlanSkeleton { entries }
}

/// Lower clamp for interior start times; keeps them strictly after the t=0
/// bookend when jitter at step 1 would go negative.
const MIN_INTERIOR_HOURS: f64 = 1e-9;
