//! Desk-scale scenario engine: alert delivery, barometers and goal-plan
//! execution over a generated population.
//!
//! The engine steps the day in fixed ticks. Each tick an agent advances
//! (along its daily plan, or straight-line toward its current goal),
//! perceives the fire, receives targeted messages, updates its two
//! barometers and compares the combined rank against its INIT/ACT
//! thresholds. Triggered goals follow the Initial-Response and Act-Now
//! trees. Every stochastic choice was pre-drawn into the agent's
//! attributes, so a run is fully deterministic.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::behaviour::RefugeSet;
use crate::io::{Person, PopulationDocument};
use crate::places::euclidean;
use crate::{Error, Result};

// --- alerts and barometers ---------------------------------------------------

/// Alert category: seen directly in the environment, or received from
/// authorities/media.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlertCategory {
    Environmental,
    Transmitted,
}

/// Totally ordered alert severities per category, each valued in [0,1];
/// 0 means no alert of that kind received.
#[derive(Clone, Debug)]
pub struct AlertAlphabet {
    environmental: Vec<(String, f64)>,
    transmitted: Vec<(String, f64)>,
}

impl Default for AlertAlphabet {
    fn default() -> Self {
        AlertAlphabet {
            environmental: vec![("Smoke".into(), 0.3), ("Fire".into(), 0.4)],
            transmitted: vec![
                ("Advice".into(), 0.1),
                ("WatchAndAct".into(), 0.2),
                ("EvacuateNow".into(), 0.3),
            ],
        }
    }
}

impl AlertAlphabet {
    pub fn value(&self, category: AlertCategory, name: &str) -> Result<f64> {
        let set = match category {
            AlertCategory::Environmental => &self.environmental,
            AlertCategory::Transmitted => &self.transmitted,
        };
        set.iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
            .ok_or_else(|| Error::input(format!("unknown alert name `{name}`")))
    }

    pub fn max_environmental(&self) -> f64 {
        self.environmental.iter().map(|&(_, v)| v).fold(0.0, f64::max)
    }

    pub fn max_transmitted(&self) -> f64 {
        self.transmitted.iter().map(|&(_, v)| v).fold(0.0, f64::max)
    }

    fn check(&self) -> Result<()> {
        for set in [&self.environmental, &self.transmitted] {
            for window in set.windows(2) {
                if window[0].1 > window[1].1 {
                    return Err(Error::input("alert severities must be non-decreasing"));
                }
            }
            for (name, v) in set {
                if !(0.0..=1.0).contains(v) {
                    return Err(Error::input(format!("alert `{name}` value {v} outside [0,1]")));
                }
            }
        }
        Ok(())
    }
}

/// Retained alert levels: the environmental side only ratchets upward, the
/// transmitted side always takes the latest message.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Barometer {
    pub env: f64,
    pub trans: f64,
}

/// Apply one alert to a barometer.
pub fn update_barometer(
    b: Barometer,
    alphabet: &AlertAlphabet,
    category: AlertCategory,
    alert: &str,
) -> Result<Barometer> {
    let value = alphabet.value(category, alert)?;
    Ok(match category {
        AlertCategory::Environmental => Barometer {
            env: b.env.max(value),
            ..b
        },
        AlertCategory::Transmitted => Barometer { trans: value, ..b },
    })
}

/// Combined threat score over the barometer pair; monotone in each argument.
pub trait RankingModel {
    fn rank(&self, env: f64, trans: f64) -> f64;
}

/// The applied instance: `r = e + τ`.
#[derive(Clone, Copy, Debug, Default)]
pub struct AdditiveRanking;

impl RankingModel for AdditiveRanking {
    fn rank(&self, env: f64, trans: f64) -> f64 {
        env + trans
    }
}

/// `r = e + τ` under the default ranking.
pub fn rank(env: f64, trans: f64) -> f64 {
    AdditiveRanking.rank(env, trans)
}

// --- scenario description ----------------------------------------------------

/// Message target: everyone, or agents inside a polygon at send time.
#[derive(Clone, Debug, PartialEq)]
pub enum Area {
    All,
    Polygon(Vec<(f64, f64)>),
}

impl<'de> Deserialize<'de> for Area {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Keyword(String),
            Polygon(Vec<[f64; 2]>),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Keyword(s) if s == "ALL" => Ok(Area::All),
            Raw::Keyword(s) => Err(serde::de::Error::custom(format!(
                "area must be \"ALL\" or a polygon, got `{s}`"
            ))),
            Raw::Polygon(points) => Ok(Area::Polygon(
                points.into_iter().map(|[x, y]| (x, y)).collect(),
            )),
        }
    }
}

impl Area {
    pub fn contains(&self, p: (f64, f64)) -> bool {
        match self {
            Area::All => true,
            Area::Polygon(poly) => point_in_polygon(p, poly),
        }
    }
}

/// Fire geometry at one timestamp: polygons and/or bare points.
#[derive(Clone, Debug, Deserialize)]
pub struct FireSnapshot {
    pub time: f64,
    #[serde(default)]
    pub polygons: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
}

/// One scheduled transmitted alert.
#[derive(Clone, Debug, Deserialize)]
pub struct Message {
    pub time: f64,
    pub area: Area,
    pub alert: String,
}

fn default_tick() -> u64 {
    60
}

fn default_speed() -> f64 {
    40.0
}

fn default_smoke_radius() -> f64 {
    5000.0
}

fn default_fire_radius() -> f64 {
    1000.0
}

fn default_nearby_radius() -> f64 {
    1000.0
}

#[derive(Clone, Debug, Default, Deserialize)]
struct AlphabetOverride {
    #[serde(default)]
    environmental: BTreeMap<String, f64>,
    #[serde(default)]
    transmitted: BTreeMap<String, f64>,
}

/// Scripted fire/alert scenario.
#[derive(Clone, Debug, Deserialize)]
pub struct FireScenario {
    #[serde(default = "default_tick")]
    pub tick_seconds: u64,
    /// Post-trigger straight-line travel speed.
    #[serde(default = "default_speed")]
    pub speed_kmh: f64,
    #[serde(default = "default_smoke_radius")]
    pub smoke_radius_m: f64,
    #[serde(default = "default_fire_radius")]
    pub fire_radius_m: f64,
    /// "Dependant is nearby" radius in the Initial-Response tree.
    #[serde(default = "default_nearby_radius")]
    pub nearby_radius_m: f64,
    #[serde(default)]
    pub fire: Vec<FireSnapshot>,
    #[serde(default)]
    pub messages: Vec<Message>,
    #[serde(default, rename = "alerts")]
    alphabet_override: Option<AlphabetOverride>,
    #[serde(skip, default)]
    pub alphabet: AlertAlphabet,
}

impl FireScenario {
    /// Parse a scenario JSON file and validate it.
    pub fn load(path: &Path) -> Result<FireScenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::input(format!("cannot read scenario {}: {e}", path.display())))?;
        let scenario: FireScenario = serde_json::from_str(&text)
            .map_err(|e| Error::input(format!("cannot parse scenario {}: {e}", path.display())))?;
        scenario.validated()
    }

    /// Validate invariants and resolve the alert alphabet. Consumes and
    /// returns the scenario so programmatic construction can share the path.
    pub fn validated(mut self) -> Result<FireScenario> {
        if self.tick_seconds == 0 {
            return Err(Error::input("tick_seconds must be positive"));
        }
        if !(self.speed_kmh > 0.0) {
            return Err(Error::input("speed_kmh must be positive"));
        }
        for (label, v) in [
            ("smoke_radius_m", self.smoke_radius_m),
            ("fire_radius_m", self.fire_radius_m),
            ("nearby_radius_m", self.nearby_radius_m),
        ] {
            if !(v > 0.0) {
                return Err(Error::input(format!("{label} must be positive")));
            }
        }
        let mut alphabet = AlertAlphabet::default();
        if let Some(over) = self.alphabet_override.take() {
            if !over.environmental.is_empty() {
                let mut env: Vec<(String, f64)> = over.environmental.into_iter().collect();
                env.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
                alphabet.environmental = env;
            }
            if !over.transmitted.is_empty() {
                let mut trans: Vec<(String, f64)> = over.transmitted.into_iter().collect();
                trans.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
                alphabet.transmitted = trans;
            }
        }
        alphabet.check()?;
        for required in ["Smoke", "Fire"] {
            alphabet
                .value(AlertCategory::Environmental, required)
                .map_err(|_| {
                    Error::input(format!(
                        "environmental alphabet must define `{required}` (fire perception emits it)"
                    ))
                })?;
        }
        for w in self.fire.windows(2) {
            if w[0].time > w[1].time {
                return Err(Error::input("fire snapshot timestamps must be non-decreasing"));
            }
        }
        for snap in &self.fire {
            for poly in &snap.polygons {
                if poly.len() < 3 {
                    return Err(Error::input("fire polygons need at least 3 vertices"));
                }
            }
        }
        self.messages
            .sort_by(|a, b| a.time.partial_cmp(&b.time).unwrap());
        for msg in &self.messages {
            alphabet.value(AlertCategory::Transmitted, &msg.alert)?;
        }
        self.alphabet = alphabet;
        Ok(self)
    }

    /// Fire geometry active at `time`: the latest snapshot not in the future.
    pub fn fire_at(&self, time: f64) -> Option<&FireSnapshot> {
        self.fire.iter().rev().find(|s| s.time <= time)
    }
}

// --- geometry -----------------------------------------------------------------

fn point_in_polygon(p: (f64, f64), poly: &[(f64, f64)]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[j];
        if ((yi > p.1) != (yj > p.1)) && (p.0 < (xj - xi) * (p.1 - yi) / (yj - yi) + xi) {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn dist_point_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return euclidean(p, a);
    }
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0);
    euclidean(p, (a.0 + t * dx, a.1 + t * dy))
}

/// Distance from a point to the fire geometry (zero inside a polygon).
pub fn distance_to_fire(p: (f64, f64), snapshot: &FireSnapshot) -> f64 {
    let mut best = f64::INFINITY;
    for poly in &snapshot.polygons {
        let pts: Vec<(f64, f64)> = poly.iter().map(|&[x, y]| (x, y)).collect();
        if point_in_polygon(p, &pts) {
            return 0.0;
        }
        for i in 0..pts.len() {
            best = best.min(dist_point_segment(p, pts[i], pts[(i + 1) % pts.len()]));
        }
    }
    for &[x, y] in &snapshot.points {
        best = best.min(euclidean(p, (x, y)));
    }
    best
}

/// Visual cue from the fire front: Fire within the fire radius, Smoke within
/// the smoke radius, nothing beyond.
pub fn perceive_environment(
    position: (f64, f64),
    scenario: &FireScenario,
    time: f64,
) -> Option<&'static str> {
    let snapshot = scenario.fire_at(time)?;
    let d = distance_to_fire(position, snapshot);
    if d <= scenario.fire_radius_m {
        Some("Fire")
    } else if d <= scenario.smoke_radius_m {
        Some("Smoke")
    } else {
        None
    }
}

/// Messages sent in the window `(since, until]` that reach an agent at
/// `position` (inside the target area, or the area is ALL).
pub fn deliver_transmitted<'a>(
    scenario: &'a FireScenario,
    since: f64,
    until: f64,
    position: (f64, f64),
) -> impl Iterator<Item = &'a Message> {
    scenario
        .messages
        .iter()
        .filter(move |m| m.time > since && m.time <= until && m.area.contains(position))
}

// --- agents -------------------------------------------------------------------

/// Parsed bushfire attributes as the engine needs them.
#[derive(Clone, Debug)]
pub struct AgentProfile {
    pub init_threshold: f64,
    pub act_threshold: f64,
    pub dependant: Option<(f64, f64)>,
    pub go_home_after_dependants: bool,
    pub go_home_before_leaving: bool,
    pub evac_name: String,
    pub evac_point: (f64, f64),
    pub invac_point: (f64, f64),
}

/// One agent as the engine sees it: a positioned daily plan plus attributes.
#[derive(Clone, Debug)]
pub struct SimAgent {
    pub id: String,
    /// (start seconds, coordinates) per plan entry, time-ordered.
    pub plan: Vec<(f64, (f64, f64))>,
    pub home: (f64, f64),
    pub profile: AgentProfile,
}

impl SimAgent {
    /// Position while following the daily plan: the location of the latest
    /// entry that has started (agents relocate at entry start).
    pub fn plan_position(&self, time: f64) -> (f64, f64) {
        self.plan
            .iter()
            .rev()
            .find(|&&(start, _)| start <= time)
            .map(|&(_, p)| p)
            .unwrap_or(self.home)
    }
}

fn parse_point(text: &str, what: &str, person: &str) -> Result<(f64, f64)> {
    let mut it = text.rsplitn(2, ',');
    let y = it.next().and_then(|v| v.trim().parse().ok());
    let x = it.next().and_then(|v| v.trim().parse().ok());
    match (x, y) {
        (Some(x), Some(y)) => Ok((x, y)),
        _ => Err(Error::input(format!(
            "person {person}: cannot parse {what} `{text}`"
        ))),
    }
}

/// Split `name,x,y` from the right so locality names may contain commas.
fn parse_named_point(text: &str, what: &str, person: &str) -> Result<(String, (f64, f64))> {
    let mut it = text.rsplitn(3, ',');
    let y = it.next().and_then(|v| v.trim().parse().ok());
    let x = it.next().and_then(|v| v.trim().parse().ok());
    let name = it.next().unwrap_or("").to_owned();
    match (x, y) {
        (Some(x), Some(y)) => Ok((name, (x, y))),
        _ => Err(Error::input(format!(
            "person {person}: cannot parse {what} `{text}`"
        ))),
    }
}

fn person_profile(person: &Person) -> Result<AgentProfile> {
    let need = |name: &str| -> Result<&str> {
        person.attribute(name).ok_or_else(|| {
            Error::input(format!(
                "person {}: population is not annotated (missing attribute `{name}`)",
                person.id
            ))
        })
    };
    let parse_f64 = |name: &str| -> Result<f64> {
        need(name)?
            .trim()
            .parse()
            .map_err(|_| Error::input(format!("person {}: bad value for `{name}`", person.id)))
    };
    let parse_bool = |name: &str| -> Result<bool> {
        match need(name)?.trim() {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(Error::input(format!(
                "person {}: bad boolean `{other}` for `{name}`",
                person.id
            ))),
        }
    };
    let dependant = match need("HasDependantsAtLocation")? {
        "" => None,
        text => Some(parse_point(text, "dependant location", &person.id)?),
    };
    let (evac_name, evac_point) = parse_named_point(
        need("EvacLocationPreference")?,
        "evacuation preference",
        &person.id,
    )?;
    let (_, invac_point) = parse_named_point(
        need("InvacLocationPreference")?,
        "invacuation preference",
        &person.id,
    )?;
    Ok(AgentProfile {
        init_threshold: parse_f64("InitialResponseThreshold")?,
        act_threshold: parse_f64("FinalResponseThreshold")?,
        dependant,
        go_home_after_dependants: parse_bool("WillGoHomeAfterVisitingDependants")?,
        go_home_before_leaving: parse_bool("WillGoHomeBeforeLeaving")?,
        evac_name,
        evac_point,
        invac_point,
    })
}

/// Build engine agents from an annotated population document.
pub fn sim_agents_from_document(doc: &PopulationDocument) -> Result<Vec<SimAgent>> {
    let mut agents = Vec::with_capacity(doc.persons.len());
    for person in &doc.persons {
        let profile = person_profile(person)?;
        let mut plan = Vec::with_capacity(person.activities.len());
        let mut start = 0.0;
        for act in &person.activities {
            plan.push((start, (act.x, act.y)));
            start = act.end_time_seconds.map(f64::from).unwrap_or(start);
        }
        let home = plan.first().map(|&(_, p)| p).unwrap_or((0.0, 0.0));
        agents.push(SimAgent {
            id: person.id.clone(),
            plan,
            home,
            profile,
        });
    }
    Ok(agents)
}

// --- engine -------------------------------------------------------------------

/// Event kinds in emission order within a tick.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    PerceiveEnv,
    ReceiveMsg,
    InitTriggered,
    ActTriggered,
    GoHome,
    GoToDependant,
    LeaveNow,
    Arrived,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::PerceiveEnv => "PerceiveEnv",
            EventKind::ReceiveMsg => "ReceiveMsg",
            EventKind::InitTriggered => "InitTriggered",
            EventKind::ActTriggered => "ActTriggered",
            EventKind::GoHome => "GoHome",
            EventKind::GoToDependant => "GoToDependant",
            EventKind::LeaveNow => "LeaveNow",
            EventKind::Arrived => "Arrived",
        }
    }
}

/// One log line: when, who, what, where.
#[derive(Clone, Debug)]
pub struct Event {
    pub time: u64,
    pub agent_id: String,
    pub kind: EventKind,
    pub x: f64,
    pub y: f64,
    pub detail: String,
}

/// Where an agent ended the run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    FollowingPlan,
    GoingToDependant,
    GoingHome,
    Leaving,
    Sheltering,
    Defending,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::FollowingPlan => "following_plan",
            Phase::GoingToDependant => "going_to_dependant",
            Phase::GoingHome => "going_home",
            Phase::Leaving => "leaving",
            Phase::Sheltering => "sheltering",
            Phase::Defending => "defending",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GoalKind {
    GoHome,
    GoToDependant,
    LeaveNow,
}

#[derive(Clone, Debug)]
struct Goal {
    kind: GoalKind,
    /// Resolved at start for LeaveNow (the fire keeps moving).
    target: Option<(f64, f64)>,
    detail: String,
}

struct AgentState {
    pos: (f64, f64),
    barometer: Barometer,
    init_fired: bool,
    act_fired: bool,
    queue: VecDeque<Goal>,
    active: Option<Goal>,
    interrupted: bool,
    phase: Phase,
}

/// Aggregate outcome written next to the event log.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub agents: usize,
    pub horizon_seconds: u64,
    pub init_triggered: usize,
    pub act_triggered: usize,
    pub leave_now_count: usize,
    pub median_leave_time_seconds: Option<u64>,
    pub final_phases: BTreeMap<String, usize>,
    /// Trigger decisions per hour-of-day bucket.
    pub decision_time_histogram: BTreeMap<String, usize>,
}

pub struct ScenarioOutcome {
    pub events: Vec<Event>,
    pub summary: Summary,
}

/// Cap on extra simulated time past the nominal horizon while agents finish
/// travelling.
const DRAIN_CAP_SECONDS: u64 = 24 * 3600;

/// Run the scripted scenario over the population. Deterministic: agents are
/// stepped in order each tick and all stochastic choices were pre-drawn into
/// attributes. `refuges`, when given, refine the evac-blocked fallback to
/// the nearest refuge from the agent's position.
pub fn run_scenario(
    agents: &[SimAgent],
    scenario: &FireScenario,
    refuges: Option<&RefugeSet>,
) -> ScenarioOutcome {
    let tick = scenario.tick_seconds;
    let speed_mps = scenario.speed_kmh / 3.6;
    let step_dist = speed_mps * tick as f64;

    let plan_end = agents
        .iter()
        .filter_map(|a| a.plan.last().map(|&(t, _)| t))
        .fold(0.0f64, f64::max);
    let fire_end = scenario.fire.last().map(|s| s.time).unwrap_or(0.0);
    let msg_end = scenario.messages.last().map(|m| m.time).unwrap_or(0.0);
    let horizon = plan_end.max(fire_end).max(msg_end).ceil() as u64;
    let hard_cap = horizon + DRAIN_CAP_SECONDS;

    let mut states: Vec<AgentState> = agents
        .iter()
        .map(|a| AgentState {
            pos: a.plan_position(0.0),
            barometer: Barometer::default(),
            init_fired: false,
            act_fired: false,
            queue: VecDeque::new(),
            active: None,
            interrupted: false,
            phase: Phase::FollowingPlan,
        })
        .collect();

    let mut events = Vec::new();
    let mut leave_times = Vec::new();
    let mut decisions: BTreeMap<String, usize> = BTreeMap::new();
    let mut init_count = 0usize;
    let mut act_count = 0usize;

    let mut now = 0u64;
    let mut prev = -1.0f64;
    loop {
        let t = now as f64;
        for (agent, st) in agents.iter().zip(states.iter_mut()) {
            let mut emit = |kind: EventKind, pos: (f64, f64), detail: String| {
                events.push(Event {
                    time: now,
                    agent_id: agent.id.clone(),
                    kind,
                    x: pos.0,
                    y: pos.1,
                    detail,
                });
            };

            // movement: straight-line toward the active goal, else follow plan
            if let Some(goal) = st.active.as_ref() {
                let target = goal.target.expect("active goal has a resolved target");
                let d = euclidean(st.pos, target);
                if d <= step_dist {
                    st.pos = target;
                    emit(EventKind::Arrived, target, goal.detail.clone());
                    st.active = None;
                } else {
                    let f = step_dist / d;
                    st.pos = (
                        st.pos.0 + (target.0 - st.pos.0) * f,
                        st.pos.1 + (target.1 - st.pos.1) * f,
                    );
                }
            } else if !st.interrupted {
                st.pos = agent.plan_position(t);
            }

            // start the next queued goal
            if st.active.is_none() {
                if let Some(mut goal) = st.queue.pop_front() {
                    if goal.target.is_none() {
                        // LeaveNow resolves its destination when it starts
                        let (target, detail) =
                            resolve_leave_target(agent, st.pos, scenario, refuges, t, speed_mps);
                        goal.target = Some(target);
                        goal.detail = detail;
                    }
                    let kind = match goal.kind {
                        GoalKind::GoHome => EventKind::GoHome,
                        GoalKind::GoToDependant => EventKind::GoToDependant,
                        GoalKind::LeaveNow => EventKind::LeaveNow,
                    };
                    st.phase = match goal.kind {
                        GoalKind::GoHome => Phase::GoingHome,
                        GoalKind::GoToDependant => Phase::GoingToDependant,
                        GoalKind::LeaveNow => Phase::Leaving,
                    };
                    emit(kind, st.pos, goal.detail.clone());
                    if kind == EventKind::LeaveNow {
                        leave_times.push(now);
                    }
                    let target = goal.target.unwrap();
                    if euclidean(st.pos, target) <= f64::EPSILON {
                        st.pos = target;
                        emit(EventKind::Arrived, target, goal.detail.clone());
                    } else {
                        st.active = Some(goal);
                    }
                }
            }
            if st.active.is_none() && st.queue.is_empty() && st.interrupted {
                st.phase = if st.act_fired {
                    Phase::Sheltering
                } else {
                    Phase::Defending
                };
            }

            // perception: the environmental barometer only ratchets upward
            if let Some(alert) = perceive_environment(st.pos, scenario, t) {
                let value = scenario
                    .alphabet
                    .value(AlertCategory::Environmental, alert)
                    .expect("perception alerts exist in the alphabet");
                if value > st.barometer.env {
                    st.barometer.env = value;
                    emit(EventKind::PerceiveEnv, st.pos, alert.to_owned());
                }
            }

            // targeted messages replace the transmitted level outright
            for msg in deliver_transmitted(scenario, prev, t, st.pos) {
                st.barometer.trans = scenario
                    .alphabet
                    .value(AlertCategory::Transmitted, &msg.alert)
                    .expect("validated at load");
                emit(EventKind::ReceiveMsg, st.pos, msg.alert.clone());
            }

            // threshold evaluation; Act-Now dominates a simultaneous crossing
            let r = rank(st.barometer.env, st.barometer.trans);
            let newly_act = r > agent.profile.act_threshold && !st.act_fired;
            let newly_init = r > agent.profile.init_threshold && !st.init_fired;
            if newly_init {
                emit(EventKind::InitTriggered, st.pos, format!("r={r}"));
                init_count += 1;
                *decisions.entry(hour_bucket(now)).or_default() += 1;
                st.init_fired = true;
                st.interrupted = true;
                execute_initial_response(agent, st, scenario, newly_act);
            }
            if newly_act {
                emit(EventKind::ActTriggered, st.pos, format!("r={r}"));
                act_count += 1;
                *decisions.entry(hour_bucket(now)).or_default() += 1;
                st.act_fired = true;
                st.init_fired = true;
                st.interrupted = true;
                execute_act_now(agent, st);
            }
        }

        prev = t;
        now += tick;
        let drained = states
            .iter()
            .all(|s| s.active.is_none() && s.queue.is_empty());
        if (now > horizon && drained) || now > hard_cap {
            break;
        }
    }

    let mut final_phases: BTreeMap<String, usize> = BTreeMap::new();
    for st in &states {
        *final_phases.entry(st.phase.as_str().to_owned()).or_default() += 1;
    }
    leave_times.sort_unstable();
    let median = if leave_times.is_empty() {
        None
    } else {
        Some(leave_times[leave_times.len() / 2])
    };
    let summary = Summary {
        agents: agents.len(),
        horizon_seconds: now,
        init_triggered: init_count,
        act_triggered: act_count,
        leave_now_count: leave_times.len(),
        median_leave_time_seconds: median,
        final_phases,
        decision_time_histogram: decisions,
    };
    ScenarioOutcome { events, summary }
}

fn hour_bucket(seconds: u64) -> String {
    format!("{:02}:00", (seconds / 3600) % 24)
}

/// Initial-Response tree. With a dependant: visit them (going home first,
/// per the go-home flag, when they are not nearby), then go home again per
/// the same flag. Without one: go home unless the Act-Now threshold is
/// already met this tick, in which case Act-Now takes over.
fn execute_initial_response(
    agent: &SimAgent,
    st: &mut AgentState,
    scenario: &FireScenario,
    act_met: bool,
) {
    let profile = &agent.profile;
    if let Some(dep) = profile.dependant {
        let nearby = euclidean(st.pos, dep) <= scenario.nearby_radius_m;
        if !nearby && profile.go_home_after_dependants {
            st.queue.push_back(Goal {
                kind: GoalKind::GoHome,
                target: Some(agent.home),
                detail: "home".into(),
            });
        }
        st.queue.push_back(Goal {
            kind: GoalKind::GoToDependant,
            target: Some(dep),
            detail: "dependant".into(),
        });
        if profile.go_home_after_dependants {
            st.queue.push_back(Goal {
                kind: GoalKind::GoHome,
                target: Some(agent.home),
                detail: "home".into(),
            });
        }
    } else if !act_met {
        st.queue.push_back(Goal {
            kind: GoalKind::GoHome,
            target: Some(agent.home),
            detail: "home".into(),
        });
    }
}

/// Act-Now tree: optionally go home first, then leave. Pending go-home goals
/// are superseded, but a pending dependant visit survives (it is guaranteed
/// even when INIT and ACT trigger together).
fn execute_act_now(agent: &SimAgent, st: &mut AgentState) {
    st.queue.retain(|g| g.kind == GoalKind::GoToDependant);
    if let Some(active) = st.active.as_ref() {
        if active.kind == GoalKind::GoHome {
            st.active = None;
        }
    }
    let at_home = euclidean(st.pos, agent.home) <= f64::EPSILON;
    if agent.profile.go_home_before_leaving && !at_home {
        st.queue.push_back(Goal {
            kind: GoalKind::GoHome,
            target: Some(agent.home),
            detail: "home".into(),
        });
    }
    st.queue.push_back(Goal {
        kind: GoalKind::LeaveNow,
        target: None,
        detail: String::new(),
    });
}

/// Destination for LeaveNow: the evacuation preference, unless the fire will
/// hold it (within the fire radius) at the agent's straight-line arrival
/// time, in which case the agent seeks refuge near its current position
/// (nearest refuge when a set is supplied, else the stored invac point).
fn resolve_leave_target(
    agent: &SimAgent,
    pos: (f64, f64),
    scenario: &FireScenario,
    refuges: Option<&RefugeSet>,
    now: f64,
    speed_mps: f64,
) -> ((f64, f64), String) {
    let evac = agent.profile.evac_point;
    let eta = now + euclidean(pos, evac) / speed_mps;
    let blocked = scenario
        .fire_at(eta)
        .map(|snap| distance_to_fire(evac, snap) <= scenario.fire_radius_m)
        .unwrap_or(false);
    if !blocked {
        return (evac, format!("evac:{}", agent.profile.evac_name));
    }
    if let Some(set) = refuges {
        if let Some(refuge) = set.refuges.iter().min_by(|a, b| {
            euclidean((a.x, a.y), pos)
                .partial_cmp(&euclidean((b.x, b.y), pos))
                .unwrap()
        }) {
            return ((refuge.x, refuge.y), format!("invac:{}", refuge.id));
        }
    }
    (agent.profile.invac_point, "invac".into())
}

/// Write the event log as CSV (`time,agent_id,kind,x,y,detail`).
pub fn write_events_csv(events: &[Event], path: &Path) -> Result<()> {
    let mut file = std::io::BufWriter::new(
        std::fs::File::create(path)
            .map_err(|e| Error::runtime(format!("cannot create {}: {e}", path.display())))?,
    );
    writeln!(file, "time,agent_id,kind,x,y,detail").map_err(Error::Io)?;
    for e in events {
        let detail = if e.detail.contains(',') || e.detail.contains('"') {
            format!("\"{}\"", e.detail.replace('"', "\"\""))
        } else {
            e.detail.clone()
        };
        writeln!(
            file,
            "{},{},{},{},{},{}",
            e.time,
            e.agent_id,
            e.kind.as_str(),
            e.x,
            e.y,
            detail
        )
        .map_err(Error::Io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alphabet() -> AlertAlphabet {
        AlertAlphabet::default()
    }

    #[test]
    fn rank_reference_values() {
        // Smoke + WatchAndAct
        assert_eq!(rank(0.3, 0.2), 0.5);
        assert_eq!(rank(0.0, 0.0), 0.0);
        // Fire + EvacuateNow is the lattice maximum
        assert!((rank(0.4, 0.3) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn rank_monotone_over_alert_lattice() {
        let env = [0.0, 0.3, 0.4];
        let trans = [0.0, 0.1, 0.2, 0.3];
        let mut max = 0.0f64;
        for &e in &env {
            for &t in &trans {
                max = max.max(rank(e, t));
                for &e2 in &env {
                    for &t2 in &trans {
                        if e2 >= e && t2 >= t {
                            assert!(rank(e2, t2) >= rank(e, t));
                        }
                    }
                }
            }
        }
        assert!((max - 0.7).abs() < 1e-12);
    }

    #[test]
    fn environmental_barometer_is_monotone() {
        let a = alphabet();
        let b = Barometer::default();
        let b = update_barometer(b, &a, AlertCategory::Environmental, "Smoke").unwrap();
        assert_eq!(b.env, 0.3);
        let b = update_barometer(b, &a, AlertCategory::Environmental, "Fire").unwrap();
        let b = update_barometer(b, &a, AlertCategory::Environmental, "Smoke").unwrap();
        assert_eq!(b.env, 0.4);
    }

    #[test]
    fn transmitted_barometer_tracks_latest() {
        let a = alphabet();
        let b = Barometer::default();
        let b = update_barometer(b, &a, AlertCategory::Transmitted, "WatchAndAct").unwrap();
        assert_eq!(b.trans, 0.2);
        let b = update_barometer(b, &a, AlertCategory::Transmitted, "Advice").unwrap();
        assert_eq!(b.trans, 0.1);
    }

    #[test]
    fn fresh_barometer_takes_fire() {
        let a = alphabet();
        let b = update_barometer(Barometer::default(), &a, AlertCategory::Environmental, "Fire")
            .unwrap();
        assert_eq!(b.env, 0.4);
    }

    #[test]
    fn unknown_alert_is_an_error() {
        let a = alphabet();
        assert!(
            update_barometer(Barometer::default(), &a, AlertCategory::Transmitted, "Rumour")
                .is_err()
        );
    }

    fn scenario_with_fire_at(x: f64, y: f64) -> FireScenario {
        serde_json::from_str::<FireScenario>(&format!(
            r#"{{ "fire": [ {{ "time": 0, "points": [[{x}, {y}]] }} ] }}"#
        ))
        .unwrap()
        .validated()
        .unwrap()
    }

    #[test]
    fn perception_bands() {
        let sc = scenario_with_fire_at(0.0, 0.0);
        assert_eq!(perceive_environment((3000.0, 0.0), &sc, 0.0), Some("Smoke"));
        assert_eq!(perceive_environment((500.0, 0.0), &sc, 0.0), Some("Fire"));
        assert_eq!(perceive_environment((10_000.0, 0.0), &sc, 0.0), None);
    }

    #[test]
    fn no_fire_before_first_snapshot() {
        let sc = serde_json::from_str::<FireScenario>(
            r#"{ "fire": [ { "time": 100, "points": [[0, 0]] } ] }"#,
        )
        .unwrap()
        .validated()
        .unwrap();
        assert_eq!(perceive_environment((0.0, 0.0), &sc, 50.0), None);
        assert_eq!(perceive_environment((0.0, 0.0), &sc, 100.0), Some("Fire"));
    }

    #[test]
    fn polygon_distance_zero_inside() {
        let snap = FireSnapshot {
            time: 0.0,
            polygons: vec![vec![[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]]],
            points: vec![],
        };
        assert_eq!(distance_to_fire((5.0, 5.0), &snap), 0.0);
        assert!((distance_to_fire((15.0, 5.0), &snap) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn message_targeting() {
        let sc = serde_json::from_str::<FireScenario>(
            r#"{ "messages": [
                { "time": 60, "area": [[0,0],[100,0],[100,100],[0,100]], "alert": "Advice" },
                { "time": 120, "area": "ALL", "alert": "EvacuateNow" }
            ] }"#,
        )
        .unwrap()
        .validated()
        .unwrap();
        let inside: Vec<_> = deliver_transmitted(&sc, 0.0, 60.0, (50.0, 50.0)).collect();
        assert_eq!(inside.len(), 1);
        let outside: Vec<_> = deliver_transmitted(&sc, 0.0, 60.0, (500.0, 50.0)).collect();
        assert!(outside.is_empty());
        let all: Vec<_> = deliver_transmitted(&sc, 60.0, 120.0, (500.0, 50.0)).collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].alert, "EvacuateNow");
    }

    #[test]
    fn scenario_validation_rejects_bad_input() {
        assert!(serde_json::from_str::<FireScenario>(r#"{ "tick_seconds": 0 }"#)
            .unwrap()
            .validated()
            .is_err());
        assert!(serde_json::from_str::<FireScenario>(
            r#"{ "messages": [ { "time": 1, "area": "ALL", "alert": "Nope" } ] }"#
        )
        .unwrap()
        .validated()
        .is_err());
        assert!(serde_json::from_str::<FireScenario>(
            r#"{ "fire": [ { "time": 5, "points": [[0,0]] }, { "time": 1, "points": [[0,0]] } ] }"#
        )
        .unwrap()
        .validated()
        .is_err());
    }

    fn profile(init: f64, act: f64) -> AgentProfile {
        AgentProfile {
            init_threshold: init,
            act_threshold: act,
            dependant: None,
            go_home_after_dependants: false,
            go_home_before_leaving: false,
            evac_name: "Refuge".into(),
            evac_point: (100_000.0, 0.0),
            invac_point: (0.0, 500.0),
        }
    }

    fn home_agent(id: &str, init: f64, act: f64) -> SimAgent {
        SimAgent {
            id: id.into(),
            plan: vec![(0.0, (0.0, 0.0)), (86_400.0, (0.0, 0.0))],
            home: (0.0, 0.0),
            profile: profile(init, act),
        }
    }

    fn null_scenario() -> FireScenario {
        serde_json::from_str::<FireScenario>("{}")
            .unwrap()
            .validated()
            .unwrap()
    }

    #[test]
    fn null_scenario_triggers_nothing() {
        let agents = vec![home_agent("0", 0.1, 0.2)];
        let outcome = run_scenario(&agents, &null_scenario(), None);
        assert_eq!(outcome.summary.init_triggered, 0);
        assert_eq!(outcome.summary.act_triggered, 0);
        assert!(outcome.events.is_empty());
        assert_eq!(outcome.summary.final_phases["following_plan"], 1);
    }

    #[test]
    fn broadcast_triggers_low_thresholds() {
        let sc = serde_json::from_str::<FireScenario>(
            r#"{ "messages": [ { "time": 600, "area": "ALL", "alert": "EvacuateNow" } ] }"#,
        )
        .unwrap()
        .validated()
        .unwrap();
        // ACT below 0.3 leaves; ACT above does not
        let agents = vec![home_agent("low", 0.1, 0.2), home_agent("high", 0.1, 0.5)];
        let outcome = run_scenario(&agents, &sc, None);
        assert_eq!(outcome.summary.leave_now_count, 1);
        let kinds: Vec<_> = outcome
            .events
            .iter()
            .filter(|e| e.agent_id == "low")
            .map(|e| e.kind)
            .collect();
        assert_eq!(
            kinds,
            vec![
                EventKind::ReceiveMsg,
                EventKind::InitTriggered,
                EventKind::ActTriggered,
                EventKind::LeaveNow,
                EventKind::Arrived,
            ]
        );
        // the high-ACT agent goes home (already home: immediate arrival)
        let high: Vec<_> = outcome
            .events
            .iter()
            .filter(|e| e.agent_id == "high")
            .map(|e| e.kind)
            .collect();
        assert_eq!(
            high,
            vec![
                EventKind::ReceiveMsg,
                EventKind::InitTriggered,
                EventKind::GoHome,
                EventKind::Arrived
            ]
        );
        assert_eq!(outcome.summary.final_phases["defending"], 1);
        assert_eq!(outcome.summary.final_phases["sheltering"], 1);
    }

    #[test]
    fn act_cap_never_leaves() {
        // maximum attainable rank is 0.7; ACT = 0.7 is never strictly exceeded
        let sc = serde_json::from_str::<FireScenario>(
            r#"{
                "fire": [ { "time": 0, "points": [[0, 0]] } ],
                "messages": [ { "time": 60, "area": "ALL", "alert": "EvacuateNow" } ]
            }"#,
        )
        .unwrap()
        .validated()
        .unwrap();
        let agents = vec![home_agent("defender", 0.1, 0.7)];
        let outcome = run_scenario(&agents, &sc, None);
        assert_eq!(outcome.summary.leave_now_count, 0);
        assert_eq!(outcome.summary.act_triggered, 0);
        assert_eq!(outcome.summary.init_triggered, 1);
    }

    #[test]
    fn events_deterministic_across_runs() {
        let sc = serde_json::from_str::<FireScenario>(
            r#"{
                "fire": [ { "time": 3600, "points": [[2000, 0]] } ],
                "messages": [ { "time": 1800, "area": "ALL", "alert": "WatchAndAct" } ]
            }"#,
        )
        .unwrap()
        .validated()
        .unwrap();
        let agents: Vec<SimAgent> = (0..20)
            .map(|i| {
                let mut a = home_agent(&i.to_string(), 0.15, 0.45);
                a.plan = vec![
                    (0.0, (i as f64 * 350.0, 0.0)),
                    (7200.0, (i as f64 * 350.0, 1000.0)),
                    (86_400.0, (i as f64 * 350.0, 0.0)),
                ];
                a.home = (i as f64 * 350.0, 0.0);
                a
            })
            .collect();
        let one = run_scenario(&agents, &sc, None);
        let two = run_scenario(&agents, &sc, None);
        let fmt = |events: &[Event]| {
            events
                .iter()
                .map(|e| {
                    format!(
                        "{}|{}|{}|{}|{}|{}",
                        e.time,
                        e.agent_id,
                        e.kind.as_str(),
                        e.x,
                        e.y,
                        e.detail
                    )
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(fmt(&one.events), fmt(&two.events));
    }

    #[test]
    fn environmental_barometer_never_decreases_in_run() {
        // fire appears, then the geometry moves away; env barometer must hold
        let sc = serde_json::from_str::<FireScenario>(
            r#"{ "fire": [
                { "time": 0, "points": [[400, 0]] },
                { "time": 600, "points": [[50000, 0]] }
            ] }"#,
        )
        .unwrap()
        .validated()
        .unwrap();
        let agents = vec![home_agent("0", 0.9, 0.95)];
        let outcome = run_scenario(&agents, &sc, None);
        let perceived: Vec<_> = outcome
            .events
            .iter()
            .filter(|e| e.kind == EventKind::PerceiveEnv)
            .map(|e| e.detail.clone())
            .collect();
        assert_eq!(perceived, vec!["Fire".to_owned()]);
    }

    #[test]
    fn parse_named_point_with_spaces_and_commas() {
        let (name, (x, y)) =
            parse_named_point("Lorne 34,759271.09,5729851.29", "evac", "0").unwrap();
        assert_eq!(name, "Lorne 34");
        assert_eq!((x, y), (759271.09, 5729851.29));
        let (name, _) = parse_named_point(",766728.61,5754449.11", "invac", "0").unwrap();
        assert_eq!(name, "");
    }
}
