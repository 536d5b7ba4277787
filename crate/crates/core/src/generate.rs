//! End-to-end population generation.
//!
//! Pipeline per run: per-subgroup probability matrices, a serial home pass
//! over the shared allocation ledger, then a per-agent stage (activity
//! selection, sequencing, location assignment, optional attribute
//! annotation) that is embarrassingly parallel because every agent draws
//! from its own seed-derived streams. With the `parallel` feature (default)
//! the per-agent stage runs on rayon; without it the same code runs
//! sequentially and produces identical output.

use crate::behaviour::{annotate_agent, BdiAttributes, RefugeSet};
use crate::io::{Person, PlanActivity, PopulationDocument, XmlAttribute};
use crate::model::{validate_inputs, ScenarioInputs};
use crate::places::{AllocationLedger, LocatedPlan, PlaceContext};
use crate::rng::{SimRng, Stream};
use crate::schedule::{build_start_matrix, cumulative_matrix, select_activities, sequence_plan};
use crate::validate::PlanView;
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Generation knobs: the master seed and whether to draw bushfire
/// attributes.
#[derive(Clone, Copy, Debug)]
pub struct GenerateOptions {
    pub seed: u64,
    pub annotate: bool,
}

/// One generated agent.
#[derive(Clone, Debug)]
pub struct Agent {
    pub id: u64,
    pub subgroup: usize,
    pub home: usize,
    pub plan: LocatedPlan,
    pub bdi: Option<BdiAttributes>,
}

/// The generated population, in stable agent-id order.
#[derive(Clone, Debug)]
pub struct Population {
    pub agents: Vec<Agent>,
}

struct Stage<'a> {
    inputs: &'a ScenarioInputs,
    refuges: Option<&'a RefugeSet>,
    context: PlaceContext<'a>,
    cumulative: Vec<crate::schedule::CumulativeMatrix>,
    roster: Vec<usize>,
    homes: Vec<usize>,
    options: GenerateOptions,
}

impl Stage<'_> {
    fn build_agent(&self, index: usize) -> Result<Agent> {
        let subgroup = self.roster[index];
        let sg = &self.inputs.subgroups[subgroup];
        let mut schedule_rng = SimRng::for_agent(self.options.seed, index as u64, Stream::Schedule);
        let selection = select_activities(
            &self.cumulative[subgroup],
            &sg.durations,
            &mut schedule_rng,
        );
        let skeleton = sequence_plan(&selection, &self.inputs.grid, &mut schedule_rng);

        let mut places_rng = SimRng::for_agent(self.options.seed, index as u64, Stream::Places);
        let plan =
            self.context
                .assign_locations(&skeleton, self.homes[index], subgroup, &mut places_rng)?;

        let bdi = if self.options.annotate {
            let refuges = self.refuges.expect("annotation requires refuges");
            let mut rng = SimRng::for_agent(self.options.seed, index as u64, Stream::Behaviour);
            Some(annotate_agent(
                self.inputs,
                refuges,
                subgroup,
                self.homes[index],
                &mut rng,
            )?)
        } else {
            None
        };

        Ok(Agent {
            id: index as u64,
            subgroup,
            home: self.homes[index],
            plan,
            bdi,
        })
    }
}

fn prepare<'a>(
    inputs: &'a ScenarioInputs,
    refuges: Option<&'a RefugeSet>,
    options: GenerateOptions,
) -> Result<Stage<'a>> {
    let report = validate_inputs(inputs);
    if !report.is_ok() {
        return Err(Error::input(report.errors.join("; ")));
    }
    if options.annotate && refuges.map(RefugeSet::is_empty).unwrap_or(true) {
        return Err(Error::input(
            "annotation requested but the refuge set is empty or missing",
        ));
    }

    let cumulative = inputs
        .subgroups
        .iter()
        .map(|sg| cumulative_matrix(&build_start_matrix(&sg.distribution, &sg.durations)))
        .collect();

    let mut roster = Vec::with_capacity(inputs.total_population() as usize);
    for (s, sg) in inputs.subgroups.iter().enumerate() {
        roster.extend(std::iter::repeat(s).take(sg.count as usize));
    }

    // home assignment mutates the shared ledger: one serial pass, in agent order
    let context = PlaceContext::new(inputs);
    let mut ledger = AllocationLedger::new(inputs);
    let mut homes = Vec::with_capacity(roster.len());
    for (index, &subgroup) in roster.iter().enumerate() {
        let mut rng = SimRng::for_agent(options.seed, index as u64, Stream::Home);
        homes.push(ledger.assign_home(subgroup, &mut rng)?);
    }

    Ok(Stage {
        inputs,
        refuges,
        context,
        cumulative,
        roster,
        homes,
        options,
    })
}

/// Generate the population. Runs the per-agent stage on rayon when the
/// `parallel` feature is enabled; output is identical either way.
pub fn generate(
    inputs: &ScenarioInputs,
    refuges: Option<&RefugeSet>,
    options: GenerateOptions,
) -> Result<Population> {
    let stage = prepare(inputs, refuges, options)?;
    #[cfg(feature = "parallel")]
    let agents = (0..stage.roster.len())
        .into_par_iter()
        .map(|i| stage.build_agent(i))
        .collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let agents = (0..stage.roster.len())
        .map(|i| stage.build_agent(i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Population { agents })
}

/// Sequential driver with identical output; the benchmark baseline and the
/// only path when the `parallel` feature is off.
pub fn generate_sequential(
    inputs: &ScenarioInputs,
    refuges: Option<&RefugeSet>,
    options: GenerateOptions,
) -> Result<Population> {
    let stage = prepare(inputs, refuges, options)?;
    let agents = (0..stage.roster.len())
        .map(|i| stage.build_agent(i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Population { agents })
}

fn format_seconds(hours: f64) -> u32 {
    (hours * 3600.0).round() as u32
}

fn point_text(p: (f64, f64)) -> String {
    format!("{},{}", p.0, p.1)
}

fn attribute_block(inputs: &ScenarioInputs, agent: &Agent) -> Vec<XmlAttribute> {
    let string = |name: &str, value: String| XmlAttribute {
        name: name.into(),
        class: "java.lang.String".into(),
        value,
    };
    let mut attrs = vec![string(
        "BDIAgentType",
        format!(
            "{}{}",
            inputs.options.bdi_agent_type_prefix, inputs.subgroups[agent.subgroup].name
        ),
    )];
    if let Some(bdi) = &agent.bdi {
        attrs.push(string(
            "HasDependantsAtLocation",
            bdi.dependant_location.map(point_text).unwrap_or_default(),
        ));
        attrs.push(XmlAttribute {
            name: "InitialResponseThreshold".into(),
            class: "java.lang.Double".into(),
            value: bdi.init_threshold.to_string(),
        });
        attrs.push(XmlAttribute {
            name: "FinalResponseThreshold".into(),
            class: "java.lang.Double".into(),
            value: bdi.act_threshold.to_string(),
        });
        attrs.push(XmlAttribute {
            name: "WillGoHomeAfterVisitingDependants".into(),
            class: "java.lang.Boolean".into(),
            value: bdi.go_home_after_dependants.to_string(),
        });
        attrs.push(XmlAttribute {
            name: "WillGoHomeBeforeLeaving".into(),
            class: "java.lang.Boolean".into(),
            value: bdi.go_home_before_leaving.to_string(),
        });
        attrs.push(string(
            "EvacLocationPreference",
            format!("{},{}", bdi.evac_preference.0, point_text(bdi.evac_preference.1)),
        ));
        attrs.push(string(
            "InvacLocationPreference",
            format!(",{}", point_text(bdi.invac_preference)),
        ));
    }
    attrs
}

/// Render the population as a document. Adjacent plan entries with the same
/// activity and location collapse into one emitted activity (the closing
/// home bookend folds into a trailing home block); each activity's end time
/// is the next one's start, with none on the last.
pub fn to_document(population: &Population, inputs: &ScenarioInputs) -> PopulationDocument {
    let persons = population
        .agents
        .iter()
        .map(|agent| {
            let mut blocks: Vec<(usize, usize, f64)> = Vec::new();
            for entry in &agent.plan.entries {
                match blocks.last() {
                    Some(&(activity, location, _))
                        if activity == entry.activity && location == entry.location => {}
                    _ => blocks.push((entry.activity, entry.location, entry.start_hours)),
                }
            }
            let activities: Vec<PlanActivity> = blocks
                .iter()
                .enumerate()
                .map(|(i, &(activity, location, _))| {
                    let loc = &inputs.locations[location];
                    PlanActivity {
                        activity_type: inputs.activities.name(activity).to_owned(),
                        x: loc.x,
                        y: loc.y,
                        end_time_seconds: blocks
                            .get(i + 1)
                            .map(|&(_, _, start)| format_seconds(start)),
                    }
                })
                .collect();
            let legs = activities.len().saturating_sub(1);
            Person {
                id: agent.id.to_string(),
                attributes: attribute_block(inputs, agent),
                selected: true,
                activities,
                leg_modes: vec![inputs.options.travel_mode.clone(); legs],
            }
        })
        .collect();
    PopulationDocument { persons }
}

/// Plan views for occupancy validation, straight from the generated plans.
pub fn plan_views(population: &Population) -> Vec<PlanView> {
    population
        .agents
        .iter()
        .map(|agent| PlanView {
            subgroup: agent.subgroup,
            entries: agent
                .plan
                .entries
                .iter()
                .map(|e| (e.start_hours, e.activity))
                .collect(),
        })
        .collect()
}
