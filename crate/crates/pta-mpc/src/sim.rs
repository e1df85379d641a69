//! Scenario scripting: timed signal events, script validation, and
//! whole-run simulation helpers, including the side-by-side comparison of
//! the cost-greedy and redundancy-seeking selection modes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Automaton, StateId};
use crate::mpc::{run_to_completion, MpcError, RunTrace, RunVerdict};
use crate::objective::{Mode, ObjectiveError, RiskProfile};

/// One timed signal change: at the first planning instant whose clock has
/// reached `trigger_time`, `state`'s signal becomes `value`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEvent {
    pub trigger_time: f64,
    pub state: StateId,
    pub value: i8,
}

/// A named, time-ordered list of signal events driving one simulated run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScript {
    pub name: String,
    #[serde(default)]
    pub events: Vec<ScenarioEvent>,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ScriptError {
    #[error("event {index}: trigger time {value} must be finite and nonnegative")]
    InvalidTriggerTime { index: usize, value: f64 },
    #[error("event {index}: trigger times must be nondecreasing ({value} after {previous})")]
    UnsortedEvents {
        index: usize,
        value: f64,
        previous: f64,
    },
    #[error("event {index}: signal value {value} is outside -1..=1")]
    InvalidSignalValue { index: usize, value: i8 },
    #[error("event {index}: state {id} is not in the automaton")]
    UnknownState { index: usize, id: StateId },
    #[error("event {index}: state {id} was already declared failed; failures are permanent")]
    RevivesFailedState { index: usize, id: StateId },
}

impl ScenarioScript {
    /// Empty script: the controller runs on the static automaton.
    pub fn empty(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            events: Vec::new(),
        }
    }

    /// Checks the whole script against an automaton: trigger times finite,
    /// nonnegative, and nondecreasing (equal times keep their written
    /// order); values in `{-1, 0, +1}`; states known; and no event may
    /// lower a state's signal after a failure — repeated `+1` is allowed,
    /// but failures never heal mid-run.
    pub fn validate(&self, total: &Automaton) -> Result<(), ScriptError> {
        let mut previous: Option<f64> = None;
        let mut failed: Vec<&StateId> = Vec::new();
        for (index, event) in self.events.iter().enumerate() {
            if !(event.trigger_time.is_finite() && event.trigger_time >= 0.0) {
                return Err(ScriptError::InvalidTriggerTime {
                    index,
                    value: event.trigger_time,
                });
            }
            if let Some(p) = previous {
                if event.trigger_time < p {
                    return Err(ScriptError::UnsortedEvents {
                        index,
                        value: event.trigger_time,
                        previous: p,
                    });
                }
            }
            previous = Some(event.trigger_time);
            if !(-1..=1).contains(&event.value) {
                return Err(ScriptError::InvalidSignalValue {
                    index,
                    value: event.value,
                });
            }
            if !total.contains_state(&event.state) {
                return Err(ScriptError::UnknownState {
                    index,
                    id: event.state.clone(),
                });
            }
            if event.value == 1 {
                failed.push(&event.state);
            } else if failed.contains(&&event.state) {
                return Err(ScriptError::RevivesFailedState {
                    index,
                    id: event.state.clone(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error("controller failed: {0}")]
    Mpc(#[from] MpcError),
}

/// Validates the script, then drives the controller through it.
pub fn run_scenario(
    total: &Automaton,
    script: &ScenarioScript,
    profile: &RiskProfile,
) -> Result<RunTrace, SimError> {
    script.validate(total)?;
    Ok(run_to_completion(total, script, profile)?)
}

/// One mode's end-of-run summary inside a comparison.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileOutcome {
    pub mode: Mode,
    pub verdict: RunVerdict,
    pub realized_path: Vec<StateId>,
    pub realized_value: f64,
}

impl ProfileOutcome {
    fn from_trace(mode: Mode, trace: &RunTrace) -> Self {
        Self {
            mode,
            verdict: trace.final_verdict,
            realized_path: trace.realized_path.sequence.clone(),
            realized_value: trace.realized_score.value,
        }
    }
}

/// The same scenario run under `cost_only` and `redundancy_first` at one
/// risk weight, with the first position where the realized paths part ways.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub lambda: f64,
    pub cost_only: ProfileOutcome,
    pub redundancy_first: ProfileOutcome,
    /// Index into the realized paths of the first differing state (`None`
    /// when both runs realized the identical sequence). A run that ends
    /// while the other continues diverges at the shorter run's length.
    pub divergence_step: Option<usize>,
}

/// Runs the script under both ends of the mode spectrum and reports where
/// their realized behavior first differs.
pub fn compare_profiles(
    total: &Automaton,
    script: &ScenarioScript,
    lambda: f64,
) -> Result<ComparisonReport, SimError> {
    let cost_trace = run_scenario(total, script, &RiskProfile::new(Mode::CostOnly, lambda)?)?;
    let redundancy_trace =
        run_scenario(total, script, &RiskProfile::new(Mode::RedundancyFirst, lambda)?)?;
    let a = &cost_trace.realized_path.sequence;
    let b = &redundancy_trace.realized_path.sequence;
    let divergence_step = (0..a.len().max(b.len())).find(|&i| a.get(i) != b.get(i));
    Ok(ComparisonReport {
        scenario: script.name.clone(),
        lambda,
        cost_only: ProfileOutcome::from_trace(Mode::CostOnly, &cost_trace),
        redundancy_first: ProfileOutcome::from_trace(Mode::RedundancyFirst, &redundancy_trace),
        divergence_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EdgeRecord, Membership, RedundantPathRecord, StateRecord};

    fn state(id: &str, membership: Membership) -> StateRecord {
        StateRecord {
            id: id.to_owned(),
            label: String::new(),
            cost: 1.0,
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

    /// a → b → c → g with a redundant bypass a → r → c.
    fn line_with_bypass() -> Automaton {
        Automaton::new(
            vec![
                state("a", Membership::Original),
                state("b", Membership::Original),
                state("c", Membership::Original),
                state("g", Membership::Original),
                state("r", Membership::Redundant),
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

    fn event(t: f64, state: &str, value: i8) -> ScenarioEvent {
        ScenarioEvent {
            trigger_time: t,
            state: state.to_owned(),
            value,
        }
    }

    #[test]
    fn validation_rejects_malformed_scripts() {
        let total = line_with_bypass();
        let ok = ScenarioScript {
            name: "ok".into(),
            events: vec![event(0.0, "b", 1), event(0.0, "c", -1), event(2.0, "b", 1)],
        };
        assert_eq!(ok.validate(&total), Ok(()));

        let cases = [
            (
                vec![event(-1.0, "b", 1)],
                ScriptError::InvalidTriggerTime {
                    index: 0,
                    value: -1.0,
                },
            ),
            (
                vec![event(2.0, "b", 1), event(1.0, "c", 1)],
                ScriptError::UnsortedEvents {
                    index: 1,
                    value: 1.0,
                    previous: 2.0,
                },
            ),
            (
                vec![event(0.0, "b", 2)],
                ScriptError::InvalidSignalValue { index: 0, value: 2 },
            ),
            (
                vec![event(0.0, "zz", 1)],
                ScriptError::UnknownState {
                    index: 0,
                    id: "zz".into(),
                },
            ),
            (
                vec![event(0.0, "b", 1), event(1.0, "b", 0)],
                ScriptError::RevivesFailedState {
                    index: 1,
                    id: "b".into(),
                },
            ),
        ];
        for (events, expected) in cases {
            let script = ScenarioScript {
                name: "bad".into(),
                events,
            };
            assert_eq!(script.validate(&total), Err(expected));
        }
    }

    #[test]
    fn empty_script_runs_the_static_optimum_to_completion() {
        let total = line_with_bypass();
        let trace = run_scenario(
            &total,
            &ScenarioScript::empty("static"),
            &RiskProfile::with_mode(Mode::Eq17),
        )
        .unwrap();
        assert_eq!(trace.final_verdict, RunVerdict::Sat);
        assert_eq!(
            trace.realized_path.sequence,
            vec!["a", "b", "c", "g"]
        );
        // Each planning instant must have reproduced the same optimum.
        let first = trace.steps[0].outcome.as_ref().unwrap();
        assert_eq!(first.planned_path.sequence, vec!["a", "b", "c", "g"]);
        assert!(trace.wall_events.is_empty());
    }

    #[test]
    fn midrun_failure_diverts_through_the_bypass() {
        let total = line_with_bypass();
        // b fails before the first instant; only the bypass remains.
        let script = ScenarioScript {
            name: "failure".into(),
            events: vec![event(0.0, "b", 1)],
        };
        let trace = run_scenario(&total, &script, &RiskProfile::with_mode(Mode::Eq17)).unwrap();
        assert_eq!(trace.final_verdict, RunVerdict::Sat);
        assert_eq!(trace.realized_path.sequence, vec!["a", "r", "c", "g"]);
        assert_eq!(trace.wall_events, script.events);
    }

    #[test]
    fn stranding_yields_unsat_and_a_partial_path() {
        let total = line_with_bypass();
        // c fails once the controller stands at b: both routes pass c.
        let script = ScenarioScript {
            name: "stranded".into(),
            events: vec![event(1.5, "c", 1)],
        };
        let trace = run_scenario(&total, &script, &RiskProfile::with_mode(Mode::Eq17)).unwrap();
        assert_eq!(trace.final_verdict, RunVerdict::Unsat);
        assert_eq!(trace.realized_path.sequence, vec!["a", "b"]);
        // The stranded instant is recorded, with the event that caused it.
        let last = trace.steps.last().unwrap();
        assert!(last.outcome.is_none());
        assert_eq!(last.applied_events, script.events);
        assert_eq!(trace.wall_events, script.events);
    }

    #[test]
    fn comparison_reports_the_first_divergence() {
        // One automaton where the modes agree: a single route, so the
        // realized paths are identical and there is no divergence.
        let same = compare_profiles(&line_with_bypass(), &ScenarioScript::empty("same"), 1.0)
            .unwrap();
        assert_eq!(same.divergence_step, None);
        assert_eq!(same.cost_only.realized_path, same.redundancy_first.realized_path);

        // And one where they part at the first commitment: a short route
        // with no redundancy against a longer route shadowed by an armed
        // bypass it could still escape through.
        let forked = Automaton::new(
            vec![
                state("a", Membership::Original),
                state("s", Membership::Original),
                state("l1", Membership::Original),
                state("l2", Membership::Original),
                state("g", Membership::Original),
                state("r", Membership::Redundant),
            ],
            vec![
                edge("a", "s", Membership::Original, None),
                edge("s", "g", Membership::Original, None),
                edge("a", "l1", Membership::Original, None),
                edge("l1", "l2", Membership::Original, None),
                edge("l2", "g", Membership::Original, None),
                edge("l1", "r", Membership::Redundant, Some("rp")),
                edge("r", "g", Membership::Redundant, Some("rp")),
            ],
            vec![RedundantPathRecord {
                id: "rp".to_owned(),
                sequence: vec!["l1".into(), "r".into(), "g".into()],
            }],
            vec!["g".into()],
            "a".into(),
        )
        .unwrap();
        let report = compare_profiles(&forked, &ScenarioScript::empty("forked"), 1.0).unwrap();
        assert_eq!(report.cost_only.verdict, RunVerdict::Sat);
        assert_eq!(report.cost_only.realized_path, vec!["a", "s", "g"]);
        assert_eq!(report.redundancy_first.verdict, RunVerdict::Sat);
        assert_eq!(
            report.redundancy_first.realized_path,
            vec!["a", "l1", "l2", "g"]
        );
        assert_eq!(report.divergence_step, Some(1));
    }
}
