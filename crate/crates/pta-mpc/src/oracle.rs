//! Independent brute-force reference implementations for tests and the CLI
//! self-check: naive view reconstruction, exhaustive path enumeration, and
//! direct objective evaluation.
//!
//! Nothing here shares logic with the update operator, the planner, or the
//! scoring module — reachability is a fixpoint sweep instead of a BFS,
//! values come from one direct fold instead of assembled component sums,
//! and selection is a full enumeration filtered by a reimplemented
//! comparison. The point is to disagree when the optimized code is wrong.
//! Instances are size-guarded; performance is explicitly not a goal.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::eds::{EdsState, EffectiveView, UpdateError};
use crate::model::{Automaton, Membership, Path, PathId, RedundantPathRecord, StateId};
use crate::objective::{Mode, PathScore, RiskProfile, EPSILON};
use crate::planner::{PlanResult, Verdict};

/// Enumeration over all simple paths is exponential; the oracle refuses
/// anything larger than the canonical views it exists to check.
pub const ORACLE_MAX_STATES: usize = 16;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum OracleError {
    #[error("oracle refuses instances over {ORACLE_MAX_STATES} states, got {count}")]
    InstanceTooLarge { count: usize },
}

/// One oracle-vs-subject comparison: verdicts, optimal values, and tie sets
/// from both sides, plus the verdict of the comparison itself.
#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    /// Free-form instance descriptor (seed, scenario, view summary).
    pub instance: String,
    pub oracle_verdict: Verdict,
    pub subject_verdict: Verdict,
    pub oracle_value: Option<f64>,
    pub subject_value: Option<f64>,
    pub oracle_paths: BTreeSet<Vec<StateId>>,
    pub subject_paths: BTreeSet<Vec<StateId>>,
    pub equal: bool,
}

/// Compares a subject plan against the oracle's: equal iff the verdicts
/// agree, the tie sets match as sets of state sequences, and every score
/// component matches to 1e-9 (escape counts exactly).
pub fn verify_plan(
    instance: impl Into<String>,
    oracle: &PlanResult,
    subject: &PlanResult,
) -> OracleReport {
    let paths =
        |r: &PlanResult| -> BTreeSet<Vec<StateId>> {
            r.optimal_paths.iter().map(|p| p.sequence.clone()).collect()
        };
    let oracle_paths = paths(oracle);
    let subject_paths = paths(subject);
    let scores_close = match (&oracle.score, &subject.score) {
        (None, None) => true,
        (Some(a), Some(b)) => {
            (a.value - b.value).abs() <= 1e-9
                && (a.cost_sum - b.cost_sum).abs() <= 1e-9
                && (a.risk_sum - b.risk_sum).abs() <= 1e-9
                && a.escape_count == b.escape_count
        }
        _ => false,
    };
    let equal =
        oracle.verdict == subject.verdict && oracle_paths == subject_paths && scores_close;
    OracleReport {
        instance: instance.into(),
        oracle_verdict: oracle.verdict,
        subject_verdict: subject.verdict,
        oracle_value: oracle.score.map(|s| s.value),
        subject_value: subject.score.map(|s| s.value),
        oracle_paths,
        subject_paths,
        equal,
    }
}

/// Fixpoint sweep: states reachable from `from` along `edges`, restricted
/// to `alive` states. Deliberately not a worklist algorithm.
fn naive_reach(
    edges: &[(StateId, StateId)],
    alive: &BTreeSet<StateId>,
    from: &str,
) -> BTreeSet<StateId> {
    let mut reached = BTreeSet::new();
    if !alive.contains(from) {
        return reached;
    }
    reached.insert(from.to_owned());
    loop {
        let mut grew = false;
        for (source, target) in edges {
            if reached.contains(source) && alive.contains(target) && !reached.contains(target) {
                reached.insert(target.clone());
                grew = true;
            }
        }
        if !grew {
            return reached;
        }
    }
}

/// Naive reconstruction of the update operator via repeated full-graph
/// reachability and explicit set algebra. Must agree with the update
/// module's output exactly.
pub fn oracle_update(
    total: &Automaton,
    eds: &EdsState,
    root: &str,
    traversed: &BTreeSet<StateId>,
) -> Result<EffectiveView, UpdateError> {
    if !total.contains_state(root) {
        return Err(UpdateError::UnknownRoot { id: root.to_owned() });
    }
    let failed: BTreeSet<StateId> = eds
        .iter()
        .filter(|(state, value)| {
            *value == 1 && total.contains_state(state) && !traversed.contains(*state)
        })
        .map(|(state, _)| state.clone())
        .collect();
    if failed.contains(root) {
        return Err(UpdateError::RootFailed { id: root.to_owned() });
    }
    let alive: BTreeSet<StateId> = total
        .state_ids()
        .filter(|id| !failed.contains(*id))
        .cloned()
        .collect();
    let all_edges: Vec<(StateId, StateId)> = total
        .edges()
        .map(|e| (e.source.clone(), e.target.clone()))
        .collect();

    // Arming, by definition: whole sequence alive, start anchor reachable
    // from the root, goal reachable from the end anchor — all over the full
    // edge set among alive states.
    let reach_root = naive_reach(&all_edges, &alive, root);
    let goal = total.desired().last().cloned();
    let mut armed: BTreeMap<PathId, RedundantPathRecord> = BTreeMap::new();
    for record in total.redundant_paths() {
        let whole_alive = record.sequence.iter().all(|s| alive.contains(s));
        let start_ok = reach_root.contains(record.start_anchor())
            || record.sequence.iter().any(|s| s == root);
        let goal_ok = match &goal {
            None => true,
            Some(g) => naive_reach(&all_edges, &alive, record.end_anchor()).contains(g),
        };
        if whole_alive && start_ok && goal_ok {
            armed.insert(record.id.clone(), record.clone());
        }
    }

    // Emergency case by the signal assignment itself: any live failure
    // signal counts, even for a state this automaton no longer contains.
    let failure_present = eds
        .iter()
        .any(|(state, value)| value == 1 && !traversed.contains(state));
    let mut traversable: BTreeSet<(StateId, StateId)> = total
        .edges()
        .filter(|e| e.membership == Membership::Original)
        .map(|e| (e.source.clone(), e.target.clone()))
        .collect();
    let mut active_states: BTreeSet<StateId> = BTreeSet::new();
    for record in armed.values() {
        if failure_present || eds.get(record.start_anchor()) == -1 {
            for (s, t) in record.edge_pairs() {
                traversable.insert((s.clone(), t.clone()));
            }
            active_states.extend(record.sequence.iter().cloned());
        }
    }

    let traversable_edges: Vec<(StateId, StateId)> = traversable.iter().cloned().collect();
    let keep = naive_reach(&traversable_edges, &alive, root);

    let states: Vec<_> = total
        .states()
        .filter(|s| keep.contains(&s.id))
        .cloned()
        .collect();
    let edges: Vec<_> = total
        .edges()
        .filter(|e| {
            keep.contains(&e.source)
                && keep.contains(&e.target)
                && traversable.contains(&(e.source.clone(), e.target.clone()))
        })
        .cloned()
        .collect();
    let edge_keys: BTreeSet<(StateId, StateId)> = edges
        .iter()
        .map(|e| (e.source.clone(), e.target.clone()))
        .collect();
    let redundant_paths: Vec<_> = total
        .redundant_paths()
        .filter(|r| {
            r.sequence.iter().all(|s| keep.contains(s))
                && r.edge_pairs()
                    .all(|(s, t)| edge_keys.contains(&(s.clone(), t.clone())))
        })
        .cloned()
        .collect();
    let desired: Vec<StateId> = total
        .desired()
        .iter()
        .filter(|d| keep.contains(*d))
        .cloned()
        .collect();
    let active_redundant_edges: BTreeSet<(StateId, StateId)> = edges
        .iter()
        .filter(|e| e.membership == Membership::Redundant)
        .map(|e| (e.source.clone(), e.target.clone()))
        .collect();

    let mut trimmed_states = failed;
    for record in total.states() {
        let candidate = record.membership == Membership::Original
            || active_states.contains(&record.id);
        if candidate && !keep.contains(&record.id) {
            trimmed_states.insert(record.id.clone());
        }
    }

    // Out-degree centrality counted by scanning the raw edge list.
    let mut centrality: BTreeMap<StateId, usize> =
        total.state_ids().map(|id| (id.clone(), 0)).collect();
    for (source, _) in &all_edges {
        *centrality.get_mut(source).expect("edge sources are states") += 1;
    }

    let automaton = Automaton::new_view(states, edges, redundant_paths, desired, root.to_owned())
        .expect("reachable subset of a valid automaton is valid");
    Ok(EffectiveView {
        automaton,
        root: root.to_owned(),
        active_redundant_edges,
        armed,
        trimmed_states,
        centrality,
        goal,
    })
}

/// Exhaustive reference planner: enumerate every simple path from `start`
/// that visits `desired` in order and ends at the last desired state, score
/// each with one direct fold, and keep the tied best under a reimplemented
/// mode comparison. Same result contract as the planner; callers pass a
/// `start` the view contains.
pub fn oracle_plan(
    view: &EffectiveView,
    start: &StateId,
    desired: &[StateId],
    profile: &RiskProfile,
) -> Result<PlanResult, OracleError> {
    let count = view.automaton.state_count();
    if count > ORACLE_MAX_STATES {
        return Err(OracleError::InstanceTooLarge { count });
    }
    let unsat = PlanResult {
        verdict: Verdict::Unsat,
        optimal_paths: BTreeSet::new(),
        score: None,
    };
    if !view.automaton.contains_state(start) {
        return Ok(unsat);
    }
    let mut waypoints = vec![start.clone()];
    for d in desired {
        if waypoints.last() != Some(d) {
            waypoints.push(d.clone());
        }
    }
    let distinct: BTreeSet<&StateId> = waypoints.iter().collect();
    if distinct.len() != waypoints.len() {
        return Ok(unsat);
    }

    let mut sequences: Vec<Vec<StateId>> = Vec::new();
    let mut prefix = vec![start.clone()];
    collect_ordered_paths(view, &waypoints, 1, &mut prefix, &mut sequences);

    let scored: Vec<(Vec<StateId>, PathScore)> = sequences
        .into_iter()
        .map(|seq| {
            let score = naive_score(view, &seq, profile);
            (seq, score)
        })
        .collect();
    let Some(best) = scored
        .iter()
        .map(|(_, s)| *s)
        .min_by(|a, b| naive_compare(a, b, profile.mode))
    else {
        return Ok(unsat);
    };
    let mut tied: Vec<(Vec<StateId>, PathScore)> = scored
        .into_iter()
        .filter(|(_, s)| naive_compare(s, &best, profile.mode) == Ordering::Equal)
        .collect();
    tied.sort_by(|(a, _), (b, _)| a.cmp(b));
    let score = tied[0].1;
    let optimal_paths: BTreeSet<Path> = tied
        .into_iter()
        .map(|(sequence, s)| Path {
            total_cost: s.cost_sum,
            sequence,
        })
        .collect();
    Ok(PlanResult {
        verdict: Verdict::Sat,
        optimal_paths,
        score: Some(score),
    })
}

fn collect_ordered_paths(
    view: &EffectiveView,
    waypoints: &[StateId],
    next_waypoint: usize,
    prefix: &mut Vec<StateId>,
    out: &mut Vec<Vec<StateId>>,
) {
    if next_waypoint == waypoints.len() {
        out.push(prefix.clone());
        return;
    }
    let current = prefix.last().expect("prefix starts nonempty").clone();
    for next in view.automaton.out_neighbors(&current) {
        if prefix.contains(next) {
            continue;
        }
        let advanced = match waypoints.iter().position(|w| w == next) {
            Some(pos) if pos > next_waypoint => continue,
            Some(pos) if pos == next_waypoint => next_waypoint + 1,
            _ => next_waypoint,
        };
        prefix.push(next.clone());
        collect_ordered_paths(view, waypoints, advanced, prefix, out);
        prefix.pop();
    }
}

/// One direct fold over the path: value is summed as (1 + λ·h/x)·P per
/// state, NOT assembled from the component sums.
fn naive_score(view: &EffectiveView, sequence: &[StateId], profile: &RiskProfile) -> PathScore {
    let mut cost_sum = 0.0;
    let mut risk_sum = 0.0;
    let mut value = 0.0;
    if sequence.len() >= 2 {
        for id in &sequence[..sequence.len() - 1] {
            let record = view.automaton.state(id).expect("path states are in the view");
            let x = view.centrality[id] as f64;
            let u = record.risk_factor / x;
            cost_sum += record.cost;
            risk_sum += u * record.cost;
            value += (1.0 + profile.lambda * u) * record.cost;
        }
    }
    let mut escape_count = 0;
    if sequence.len() >= 2 {
        let interior = &sequence[..sequence.len() - 1];
        for (s, t) in view.armed_edges() {
            let on_path = interior.contains(&s);
            let is_path_edge = sequence
                .windows(2)
                .any(|w| w[0] == s && w[1] == t);
            if on_path && !is_path_edge {
                escape_count += 1;
            }
        }
    }
    PathScore {
        cost_sum,
        risk_sum,
        value,
        escape_count,
    }
}

fn naive_compare(a: &PathScore, b: &PathScore, mode: Mode) -> Ordering {
    let close = |x: f64, y: f64| {
        if (x - y).abs() <= EPSILON {
            Ordering::Equal
        } else if x < y {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    };
    match mode {
        Mode::CostOnly => close(a.cost_sum, b.cost_sum),
        Mode::Eq17 => close(a.value, b.value),
        Mode::RedundancyFirst => match b.escape_count.cmp(&a.escape_count) {
            Ordering::Equal => close(a.value, b.value),
            unequal => unequal,
        },
    }
}
