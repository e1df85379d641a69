//! The receding-horizon controller: plan over the current effective view,
//! commit exactly one transition, advance the clock, repeat.
//!
//! The controller's memory is the traversed prefix, the remaining desired
//! states, and a clock that accumulates the cost of every committed state.
//! Before each planning instant, scenario events whose trigger time has
//! passed are folded into the signal state; the view is then derived with
//! two safeguards: failures of already-traversed states are ignored, and
//! visited states other than the current one are excluded so plans never
//! loop back through the prefix.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eds::{apply_update_excluding, EdsState, UpdateError};
use crate::model::{Automaton, Path, StateId};
use crate::objective::{PathScore, RiskProfile};
use crate::planner::{plan, PlanError, PlanRequest, Verdict};
use crate::sim::{ScenarioEvent, ScenarioScript};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunVerdict {
    /// Desired states remain and the last plan succeeded.
    Running,
    /// Every desired state has been visited in order.
    Sat,
    /// The last view admitted no path through the remaining desired states.
    Unsat,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum MpcError {
    #[error(transparent)]
    Update(#[from] UpdateError),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// Everything the controller carries between planning instants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ControllerMemory {
    /// The state the controller occupies now (last entry of `traversed`).
    pub current: StateId,
    /// Committed prefix, in visiting order, starting at the initial state.
    pub traversed: Vec<StateId>,
    /// Desired states not yet visited, still in the required order.
    pub remaining_desired: Vec<StateId>,
    /// Accumulated cost of every committed state, the initial one included.
    pub clock: f64,
    pub verdict: RunVerdict,
}

impl ControllerMemory {
    /// Fresh memory at the automaton's initial state. The clock starts at
    /// the initial state's cost, and desired states already satisfied by
    /// standing at the start are consumed immediately.
    pub fn init(total: &Automaton) -> Self {
        let current = total.initial().clone();
        let clock = total.state(&current).expect("initial state exists").cost;
        let mut remaining: VecDeque<StateId> = total.desired().iter().cloned().collect();
        while remaining.front() == Some(&current) {
            remaining.pop_front();
        }
        let verdict = if remaining.is_empty() {
            RunVerdict::Sat
        } else {
            RunVerdict::Running
        };
        Self {
            traversed: vec![current.clone()],
            current,
            remaining_desired: remaining.into(),
            clock,
            verdict,
        }
    }
}

/// What one planning instant decided.
#[derive(Clone, Debug, Serialize)]
pub struct StepOutcome {
    /// Signal state the view was derived from, after event application.
    pub eds_snapshot: EdsState,
    /// The committable optimum (lexicographically first of the tie set).
    pub planned_path: Path,
    /// Every tied-optimal path under the profile's mode.
    pub tie_paths: BTreeSet<Path>,
    /// Score of `planned_path`.
    pub score: PathScore,
    /// Second state of the planned path — the transition actually taken.
    pub committed_state: StateId,
    /// This step's contribution to the realized value: the weighted cost
    /// `(1 + λ·h/x)·P` of the state the controller departed from.
    pub value_contribution: f64,
    /// Armed redundant edges that left the departed state and were not
    /// taken — escape options this commitment passed by.
    pub escape_contribution: usize,
}

/// One planning instant: derive the view from the current signals, plan to
/// the remaining desired states, commit the first transition of the optimum.
///
/// Terminal memory (`Sat`/`Unsat`) passes through unchanged with no
/// outcome. A plan verdict of UNSAT marks the memory `Unsat` — the
/// controller is stranded and stays where it is.
pub fn step(
    total: &Automaton,
    memory: ControllerMemory,
    eds: &EdsState,
    profile: &RiskProfile,
) -> Result<(ControllerMemory, Option<StepOutcome>), MpcError> {
    if memory.verdict != RunVerdict::Running {
        return Ok((memory, None));
    }
    let traversed: BTreeSet<StateId> = memory.traversed.iter().cloned().collect();
    let mut excluded = traversed.clone();
    excluded.remove(&memory.current);
    let view = apply_update_excluding(total, eds, &memory.current, &traversed, &excluded)?;
    let request = PlanRequest {
        view: &view,
        start: memory.current.clone(),
        remaining_desired: memory.remaining_desired.clone(),
        profile: *profile,
    };
    let result = plan(&request)?;
    if result.verdict == Verdict::Unsat {
        let mut memory = memory;
        memory.verdict = RunVerdict::Unsat;
        return Ok((memory, None));
    }
    let planned_path = result.best_path().expect("SAT results carry a path").clone();
    if planned_path.sequence.len() < 2 {
        // Start coincides with the last remaining waypoint; nothing to do.
        let mut memory = memory;
        memory.verdict = RunVerdict::Sat;
        memory.remaining_desired.clear();
        return Ok((memory, None));
    }
    let committed_state = planned_path.sequence[1].clone();

    let from = &memory.current;
    let record = view.automaton.state(from).expect("root is in its view");
    let x = view.centrality[from] as f64;
    let value_contribution = (1.0 + profile.lambda * record.risk_factor / x) * record.cost;
    let escape_contribution = view
        .armed_out(from)
        .iter()
        .filter(|(_, t)| *t != committed_state)
        .count();

    let mut memory = memory;
    memory.traversed.push(committed_state.clone());
    memory.clock += total
        .state(&committed_state)
        .expect("planned states are in the automaton")
        .cost;
    while memory.remaining_desired.first() == Some(&committed_state) {
        memory.remaining_desired.remove(0);
    }
    if memory.remaining_desired.is_empty() {
        memory.verdict = RunVerdict::Sat;
    }
    memory.current = committed_state.clone();

    let outcome = StepOutcome {
        eds_snapshot: eds.clone(),
        score: result.score.expect("SAT results carry a score"),
        tie_paths: result.optimal_paths,
        planned_path,
        committed_state,
        value_contribution,
        escape_contribution,
    };
    Ok((memory, Some(outcome)))
}

/// One planning instant as recorded in a run trace: the clock and state it
/// happened at, the events newly folded in, and the decision (absent when
/// the planner returned UNSAT and the run ended).
#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub clock: f64,
    pub current: StateId,
    pub applied_events: Vec<ScenarioEvent>,
    pub outcome: Option<StepOutcome>,
}

/// A complete scripted run: every planning instant, the final verdict, and
/// the realized path with its accumulated score.
#[derive(Clone, Debug, Serialize)]
pub struct RunTrace {
    pub profile: RiskProfile,
    pub steps: Vec<TraceStep>,
    pub final_verdict: RunVerdict,
    /// The traversed prefix (the whole desired tour when SAT).
    pub realized_path: Path,
    /// Sum of the per-step contributions. Cost, risk, and value equal a
    /// whole-path rescore; the escape count sums per-instant options, which
    /// depend on how views evolved during the run.
    pub realized_score: PathScore,
    /// Every event applied, in application order; after the run ends,
    /// events triggered up to the final clock are flushed in as well, so
    /// each scripted event at or before the final clock appears exactly
    /// once.
    pub wall_events: Vec<ScenarioEvent>,
}

impl RunTrace {
    /// Largest planning-instant tie set of the run (0 for a run with no
    /// successful instants).
    pub fn max_tie_set_size(&self) -> usize {
        self.steps
            .iter()
            .filter_map(|s| s.outcome.as_ref().map(|o| o.tie_paths.len()))
            .max()
            .unwrap_or(0)
    }
}

/// Drives the controller from the initial state until SAT or UNSAT,
/// applying each scripted event at the first planning instant whose clock
/// has reached its trigger time. The script must already be validated.
pub fn run_to_completion(
    total: &Automaton,
    script: &ScenarioScript,
    profile: &RiskProfile,
) -> Result<RunTrace, MpcError> {
    let mut memory = ControllerMemory::init(total);
    let mut eds = EdsState::new();
    let mut pending: VecDeque<&ScenarioEvent> = script.events.iter().collect();
    let mut steps = Vec::new();
    let mut wall_events = Vec::new();
    let mut cost_sum = 0.0;
    let mut risk_sum = 0.0;
    let mut value = 0.0;
    let mut escape_count = 0;

    let mut apply_due = |clock: f64, eds: &mut EdsState, wall: &mut Vec<ScenarioEvent>| {
        let mut applied = Vec::new();
        while pending.front().is_some_and(|e| e.trigger_time <= clock) {
            let event = pending.pop_front().expect("front checked");
            eds.set(event.state.clone(), event.value)
                .expect("validated scripts carry legal signal values");
            applied.push(event.clone());
            wall.push(event.clone());
        }
        applied
    };

    while memory.verdict == RunVerdict::Running {
        let applied_events = apply_due(memory.clock, &mut eds, &mut wall_events);
        let clock = memory.clock;
        let current = memory.current.clone();
        let (next, outcome) = step(total, memory, &eds, profile)?;
        memory = next;
        if let Some(o) = &outcome {
            let record = total.state(&current).expect("current is a state");
            let x = total
                .out_degree_centrality(&current)
                .expect("current is a state") as f64;
            cost_sum += record.cost;
            risk_sum += record.risk_factor / x * record.cost;
            value += o.value_contribution;
            escape_count += o.escape_contribution;
        }
        steps.push(TraceStep {
            clock,
            current,
            applied_events,
            outcome,
        });
    }
    // Flush events the run outlived so the record of what the environment
    // did is complete up to the final clock.
    apply_due(memory.clock, &mut eds, &mut wall_events);

    Ok(RunTrace {
        profile: *profile,
        steps,
        final_verdict: memory.verdict,
        realized_path: Path {
            sequence: memory.traversed,
            total_cost: cost_sum,
        },
        realized_score: PathScore {
            cost_sum,
            risk_sum,
            value,
            escape_count,
        },
        wall_events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EdgeRecord, Membership, RedundantPathRecord, StateRecord};
    use crate::objective::Mode;

    fn state(id: &str, cost: f64, membership: Membership) -> StateRecord {
        StateRecord {
            id: id.to_owned(),
            label: String::new(),
            cost,
            risk_factor: 1.0,
            membership,
        }
    }

    fn edge(source: &str, target: &str, membership: Membership, path: Option<&str>) -> EdgeRecord {
        EdgeRecord {
            source: source.to_owned(),
            target: target.to_owned(),
            cost: 0.0,
            membership,
            redundant_path_id: path.map(str::to_owned),
        }
    }

    /// a → b → c → g with a redundant bypass a → r → c; distinct costs so
    /// clock arithmetic is visible.
    fn line_with_bypass() -> Automaton {
        Automaton::new(
            vec![
                state("a", 2.0, Membership::Original),
                state("b", 1.0, Membership::Original),
                state("c", 0.5, Membership::Original),
                state("g", 4.0, Membership::Original),
                state("r", 0.25, Membership::Redundant),
            ],
            vec![
                edge("a", "b", Membership::Original, None),
                edge("b", "c", Membership::Original, None),
                edge("c", "g", Membership::Original, None),
                edge("a", "r", Membership::Redundant, Some("rp")),
                edge("r", "c", Membership::Redundant, Some("rp")),
            ],
            vec![RedundantPathRecord {
                id: "rp".to_owned(),
                sequence: vec!["a".into(), "r".into(), "c".into()],
            }],
            vec!["g".into()],
            "a".into(),
        )
        .unwrap()
    }

    #[test]
    fn init_starts_the_clock_and_consumes_satisfied_heads() {
        let total = line_with_bypass();
        let memory = ControllerMemory::init(&total);
        assert_eq!(memory.current, "a");
        assert_eq!(memory.traversed, vec!["a"]);
        assert_eq!(memory.clock, 2.0);
        assert_eq!(memory.remaining_desired, vec!["g"]);
        assert_eq!(memory.verdict, RunVerdict::Running);

        // A goal equal to the start is satisfied before the first step.
        let trivial = Automaton::new(
            vec![state("a", 1.5, Membership::Original)],
            vec![],
            vec![],
            vec!["a".into()],
            "a".into(),
        )
        .unwrap();
        let memory = ControllerMemory::init(&trivial);
        assert_eq!(memory.verdict, RunVerdict::Sat);
        assert_eq!(memory.traversed, vec!["a"]);
    }

    #[test]
    fn step_commits_one_state_and_advances_the_clock_by_its_cost() {
        let total = line_with_bypass();
        let memory = ControllerMemory::init(&total);
        let profile = RiskProfile::with_mode(Mode::Eq17);
        let (memory, outcome) = step(&total, memory, &EdsState::new(), &profile).unwrap();
        let outcome = outcome.unwrap();
        assert_eq!(outcome.committed_state, "b");
        assert_eq!(outcome.planned_path.sequence, vec!["a", "b", "c", "g"]);
        assert_eq!(memory.traversed, vec!["a", "b"]);
        assert_eq!(memory.current, "b");
        assert_eq!(memory.clock, 3.0); // 2.0 (a) + 1.0 (b)
        assert_eq!(memory.verdict, RunVerdict::Running);
        // The contribution is the weighted cost of the departed state: a has
        // centrality 2 (edges to b and r), so (1 + 1/2) * 2.0.
        assert_eq!(outcome.value_contribution, 3.0);
        // The bypass is armed (dormant, but it could still be enabled), so
        // departing a toward b passes one escape.
        assert_eq!(outcome.escape_contribution, 1);
    }

    #[test]
    fn failures_behind_the_controller_are_ignored() {
        let total = line_with_bypass();
        let profile = RiskProfile::with_mode(Mode::Eq17);
        let memory = ControllerMemory::init(&total);
        let (memory, _) = step(&total, memory, &EdsState::new(), &profile).unwrap();
        // a (already traversed) fails: the view from b must be unaffected.
        let eds = EdsState::from_pairs([("a", 1)]).unwrap();
        let (memory, outcome) = step(&total, memory, &eds, &profile).unwrap();
        assert_eq!(outcome.unwrap().committed_state, "c");
        assert_eq!(memory.verdict, RunVerdict::Running);
    }

    #[test]
    fn unsat_plans_strand_the_controller_in_place() {
        let total = line_with_bypass();
        let profile = RiskProfile::with_mode(Mode::Eq17);
        let memory = ControllerMemory::init(&total);
        let (memory, _) = step(&total, memory, &EdsState::new(), &profile).unwrap();
        // c fails while the controller stands at b: no route remains.
        let eds = EdsState::from_pairs([("c", 1)]).unwrap();
        let (memory, outcome) = step(&total, memory, &eds, &profile).unwrap();
        assert!(outcome.is_none());
        assert_eq!(memory.verdict, RunVerdict::Unsat);
        assert_eq!(memory.traversed, vec!["a", "b"]);
        // Terminal memory passes through untouched.
        let clock = memory.clock;
        let (memory, outcome) = step(&total, memory, &eds, &profile).unwrap();
        assert!(outcome.is_none());
        assert_eq!(memory.clock, clock);
        assert_eq!(memory.verdict, RunVerdict::Unsat);
    }

    #[test]
    fn escape_contributions_count_armed_exits_not_taken() {
        let total = line_with_bypass();
        let profile = RiskProfile::with_mode(Mode::CostOnly);
        // An auxiliary request at a arms and activates the bypass; cost_only
        // still prefers a→b→c (3.0 < 2.75? no: 2.0+1.0 vs 2.0+0.25 — the
        // bypass is cheaper), so it takes r and leaves no armed exit behind.
        let eds = EdsState::from_pairs([("a", -1)]).unwrap();
        let memory = ControllerMemory::init(&total);
        let (_, outcome) = step(&total, memory, &eds, &profile).unwrap();
        let outcome = outcome.unwrap();
        assert_eq!(outcome.committed_state, "r");
        assert_eq!(outcome.escape_contribution, 0);

        // redundancy_first prefers keeping the escape open: it walks the
        // line and passes the armed exit (a, r).
        let profile = RiskProfile::with_mode(Mode::RedundancyFirst);
        let memory = ControllerMemory::init(&total);
        let (_, outcome) = step(&total, memory, &eds, &profile).unwrap();
        let outcome = outcome.unwrap();
        assert_eq!(outcome.committed_state, "b");
        assert_eq!(outcome.escape_contribution, 1);
    }

    #[test]
    fn accumulated_score_matches_a_whole_path_rescore() {
        let total = line_with_bypass();
        let profile = RiskProfile::with_mode(Mode::Eq17);
        let script = crate::sim::ScenarioScript::empty("static");
        let trace = run_to_completion(&total, &script, &profile).unwrap();
        assert_eq!(trace.final_verdict, RunVerdict::Sat);
        let view = crate::eds::apply_update(
            &total,
            &EdsState::new(),
            total.initial(),
            &std::collections::BTreeSet::new(),
        )
        .unwrap();
        let rescored = crate::objective::score_path(
            &total,
            &view,
            &trace.realized_path,
            &profile,
        )
        .unwrap();
        assert!((trace.realized_score.value - rescored.value).abs() <= 1e-9);
        assert!((trace.realized_score.cost_sum - rescored.cost_sum).abs() <= 1e-9);
        assert!((trace.realized_score.risk_sum - rescored.risk_sum).abs() <= 1e-9);
    }
}
