//! Output fidelity: reconstruct per-step activity occupancy from generated
//! plans and report signed percentage deviations from the input
//! distributions.

use std::path::Path;

use crate::io::PopulationDocument;
use crate::model::{DistributionTable, ScenarioInputs, TimeGrid};
use crate::{Error, Result};

/// Minimal view of one agent's plan for occupancy accounting.
#[derive(Clone, Debug)]
pub struct PlanView {
    pub subgroup: usize,
    /// (start hours, activity index), time-ordered.
    pub entries: Vec<(f64, usize)>,
}

/// Per-subgroup occupancy proportions `[k][n]` plus the agent count behind
/// them.
#[derive(Clone, Debug)]
pub struct OccupancyMatrix {
    pub proportions: Vec<Vec<f64>>,
    pub agents: u64,
}

/// Signed deviations `(output − input) × 100` in percentage points.
#[derive(Clone, Debug)]
pub struct ErrorMatrix {
    pub cells: Vec<Vec<f64>>,
}

impl ErrorMatrix {
    /// Largest absolute deviation and its (activity, step) cell.
    pub fn max_abs(&self) -> (f64, usize, usize) {
        let mut best = (0.0f64, 0usize, 0usize);
        for (k, row) in self.cells.iter().enumerate() {
            for (n, &v) in row.iter().enumerate() {
                if v.abs() > best.0.abs() {
                    best = (v, k, n);
                }
            }
        }
        best
    }
}

/// Count agents under the activity occupying each step (sampled at step
/// midpoints) and normalise per subgroup.
pub fn occupancy_matrix(
    plans: &[PlanView],
    subgroups: usize,
    activities: usize,
    grid: &TimeGrid,
) -> Result<Vec<OccupancyMatrix>> {
    let mut counts = vec![vec![vec![0u64; grid.steps]; activities]; subgroups];
    let mut totals = vec![0u64; subgroups];
    for plan in plans {
        if plan.subgroup >= subgroups {
            return Err(Error::input(format!(
                "plan references unknown subgroup index {}",
                plan.subgroup
            )));
        }
        totals[plan.subgroup] += 1;
        for n in 0..grid.steps {
            let t = grid.step_midpoint(n);
            let activity = plan
                .entries
                .iter()
                .rev()
                .find(|&&(start, _)| start <= t)
                .map(|&(_, k)| k)
                .unwrap_or(crate::model::HOME_ACTIVITY);
            if activity >= activities {
                return Err(Error::input(format!(
                    "plan references unknown activity index {activity}"
                )));
            }
            counts[plan.subgroup][activity][n] += 1;
        }
    }
    Ok(counts
        .into_iter()
        .zip(totals)
        .map(|(per_activity, agents)| OccupancyMatrix {
            proportions: per_activity
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|c| if agents == 0 { 0.0 } else { c as f64 / agents as f64 })
                        .collect()
                })
                .collect(),
            agents,
        })
        .collect())
}

/// Cell-wise `(occupancy − δ) × 100`.
pub fn distribution_error(
    occupancy: &OccupancyMatrix,
    dist: &DistributionTable,
) -> Result<ErrorMatrix> {
    if occupancy.proportions.len() != dist.activities()
        || occupancy
            .proportions
            .first()
            .map(|r| r.len() != dist.steps())
            .unwrap_or(true)
    {
        return Err(Error::input(format!(
            "occupancy shape {}×{} does not match distribution {}×{}",
            occupancy.proportions.len(),
            occupancy.proportions.first().map(Vec::len).unwrap_or(0),
            dist.activities(),
            dist.steps()
        )));
    }
    let cells = occupancy
        .proportions
        .iter()
        .enumerate()
        .map(|(k, row)| {
            row.iter()
                .enumerate()
                .map(|(n, &p)| (p - dist.value(k, n)) * 100.0)
                .collect()
        })
        .collect();
    Ok(ErrorMatrix { cells })
}

/// Build plan views from a population document, resolving subgroups from the
/// BDIAgentType attribute and activity names against the configured set.
pub fn plan_views_from_document(
    doc: &PopulationDocument,
    inputs: &ScenarioInputs,
) -> Result<Vec<PlanView>> {
    let mut views = Vec::with_capacity(doc.persons.len());
    for person in &doc.persons {
        let agent_type = person.attribute("BDIAgentType").ok_or_else(|| {
            Error::input(format!(
                "person {}: missing BDIAgentType attribute (cannot resolve subgroup)",
                person.id
            ))
        })?;
        let subgroup = inputs
            .subgroups
            .iter()
            .position(|sg| {
                agent_type == sg.name
                    || agent_type == format!("{}{}", inputs.options.bdi_agent_type_prefix, sg.name)
                    || agent_type.rsplit('.').next() == Some(sg.name.as_str())
            })
            .ok_or_else(|| {
                Error::input(format!(
                    "person {}: BDIAgentType `{agent_type}` matches no configured subgroup",
                    person.id
                ))
            })?;
        let mut entries = Vec::with_capacity(person.activities.len());
        let mut start = 0.0;
        for act in &person.activities {
            let k = inputs
                .activities
                .index_of(&act.activity_type)
                .ok_or_else(|| {
                    Error::input(format!(
                        "person {}: activity `{}` is not in the configured activity set",
                        person.id, act.activity_type
                    ))
                })?;
            entries.push((start, k));
            start = act
                .end_time_seconds
                .map(|s| s as f64 / 3600.0)
                .unwrap_or(start);
        }
        views.push(PlanView { subgroup, entries });
    }
    Ok(views)
}

/// Outcome of an error report: worst cell and pass/fail.
#[derive(Clone, Debug)]
pub struct ReportSummary {
    pub max_abs: f64,
    pub subgroup: String,
    pub activity: String,
    pub step: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl ReportSummary {
    pub fn line(&self) -> String {
        format!(
            "max |error| {:.2} pp at (subgroup {}, activity {}, step {}): {} (tolerance {} pp)",
            self.max_abs.abs(),
            self.subgroup,
            self.activity,
            self.step + 1,
            if self.pass { "PASS" } else { "FAIL" },
            self.tolerance
        )
    }
}

fn step_label(grid: &TimeGrid, n: usize) -> String {
    let start = (n as f64 * grid.step_hours() * 3600.0).round() as u32;
    let end = ((n + 1) as f64 * grid.step_hours() * 3600.0).round() as u32;
    format!(
        "{:02}:{:02}-{:02}:{:02}",
        start / 3600,
        (start % 3600) / 60,
        end / 3600,
        (end % 3600) / 60
    )
}

/// Write one CSV per subgroup (rows = activities, columns = step labels)
/// plus `summary.txt`, and judge the worst cell against the tolerance.
pub fn write_error_report(
    reports: &[(String, ErrorMatrix)],
    inputs: &ScenarioInputs,
    dir: &Path,
    tolerance_pp: f64,
) -> Result<ReportSummary> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::runtime(format!("cannot create {}: {e}", dir.display())))?;
    let grid = &inputs.grid;
    let mut worst: Option<ReportSummary> = None;
    let mut summary_lines = Vec::new();
    for (name, matrix) in reports {
        let path = dir.join(format!("errors_{name}.csv"));
        let mut body = String::from("activity");
        for n in 0..grid.steps {
            body.push(',');
            body.push_str(&step_label(grid, n));
        }
        body.push('\n');
        for (k, row) in matrix.cells.iter().enumerate() {
            body.push_str(inputs.activities.name(k));
            for v in row {
                body.push_str(&format!(",{v:.4}"));
            }
            body.push('\n');
        }
        std::fs::write(&path, body)
            .map_err(|e| Error::runtime(format!("cannot write {}: {e}", path.display())))?;

        let (value, k, n) = matrix.max_abs();
        summary_lines.push(format!(
            "{name}: max |error| {:.2} pp at (activity {}, step {})",
            value.abs(),
            inputs.activities.name(k),
            n + 1
        ));
        if worst
            .as_ref()
            .map(|w| value.abs() > w.max_abs.abs())
            .unwrap_or(true)
        {
            worst = Some(ReportSummary {
                max_abs: value,
                subgroup: name.clone(),
                activity: inputs.activities.name(k).to_owned(),
                step: n,
                tolerance: tolerance_pp,
                pass: value.abs() <= tolerance_pp,
            });
        }
    }
    let summary = worst.unwrap_or(ReportSummary {
        max_abs: 0.0,
        subgroup: String::new(),
        activity: String::new(),
        step: 0,
        tolerance: tolerance_pp,
        pass: true,
    });
    summary_lines.push(summary.line());
    std::fs::write(dir.join("summary.txt"), summary_lines.join("\n") + "\n")
        .map_err(|e| Error::runtime(format!("cannot write summary: {e}")))?;
    Ok(summary)
}
