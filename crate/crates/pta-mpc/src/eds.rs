//! Emergency-declaration signal bookkeeping and the update operator that
//! turns the total automaton plus the current signal assignment into the
//! effective view the planner works on.
//!
//! Signal values per state: `-1` requests a detour (auxiliary), `0` is
//! normal operation, `+1` declares the state failed. The update operator
//! ignores failures of states the controller has already traversed, arms
//! the redundant paths that can still help, selects the traversable edge
//! set, and trims everything unreachable from the planning root.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::model::{
    Automaton, EdgeRecord, Membership, PathId, RedundantPathRecord, StateId, StateRecord,
};

/// Per-state emergency declaration values in `{-1, 0, +1}`. Absent states
/// read as `0`; storing `0` erases the entry, so two assignments describing
/// the same signals compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct EdsState {
    values: BTreeMap<StateId, i8>,
}

impl EdsState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Convenience constructor from `(state, value)` pairs.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self, UpdateError>
    where
        I: IntoIterator<Item = (S, i8)>,
        S: Into<StateId>,
    {
        let mut eds = Self::new();
        for (state, value) in pairs {
            eds.set(state, value)?;
        }
        Ok(eds)
    }

    /// Sets one state's signal. Values outside `{-1, 0, +1}` are rejected.
    pub fn set(&mut self, state: impl Into<StateId>, value: i8) -> Result<(), UpdateError> {
        if !(-1..=1).contains(&value) {
            return Err(UpdateError::InvalidSignalValue { value });
        }
        let state = state.into();
        if value == 0 {
            self.values.remove(&state);
        } else {
            self.values.insert(state, value);
        }
        Ok(())
    }

    pub fn get(&self, state: &str) -> i8 {
        self.values.get(state).copied().unwrap_or(0)
    }

    /// The non-zero entries, sorted by state id.
    pub fn iter(&self) -> impl Iterator<Item = (&StateId, i8)> {
        self.values.iter().map(|(s, v)| (s, *v))
    }

    pub fn is_all_normal(&self) -> bool {
        self.values.is_empty()
    }
}

/// Operating case derived from the signal assignment: any `+1` means
/// emergency; otherwise any `-1` means auxiliary; otherwise normal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    Normal,
    Auxiliary,
    Emergency,
}

pub fn classify_case(eds: &EdsState) -> Case {
    let mut saw_auxiliary = false;
    for (_, value) in eds.iter() {
        if value == 1 {
            return Case::Emergency;
        }
        saw_auxiliary |= value == -1;
    }
    if saw_auxiliary {
        Case::Auxiliary
    } else {
        Case::Normal
    }
}

/// Errors from the update operator. A failed or unknown root means the
/// controller is stranded; callers map that to UNSAT.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum UpdateError {
    #[error("planning root {id} is not a state of the automaton")]
    UnknownRoot { id: StateId },
    #[error("planning root {id} is failed; the controller is stranded")]
    RootFailed { id: StateId },
    #[error("signal value must be -1, 0, or +1, got {value}")]
    InvalidSignalValue { value: i8 },
}

/// The effective automaton produced by the update operator: the traversable,
/// trimmed view plus the metadata planning needs (armed redundant paths,
/// active redundant edges, and a centrality snapshot taken from the total
/// automaton — never recomputed on the trimmed view).
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveView {
    /// Surviving states and traversable edges, rooted at the planning root
    /// (`automaton.initial() == root`). Redundant-path records are retained
    /// only when their whole sequence survived.
    pub automaton: Automaton,
    /// The state the view was computed from.
    pub root: StateId,
    /// Redundant edges that are currently traversable (present in
    /// `automaton`). Always a subset of the armed paths' edges.
    pub active_redundant_edges: BTreeSet<(StateId, StateId)>,
    /// Armed redundant paths, with their FULL records — kept even when
    /// interiors were trimmed, because escape counting is about which
    /// bypasses exist, not which are currently traversable.
    pub armed: BTreeMap<PathId, RedundantPathRecord>,
    /// States removed by the update: failed or excluded states, plus
    /// unreachable states of the original part and of active redundant
    /// paths. Dormant redundant states (on paths that are not active)
    /// are merely absent from the view, not removed, so they are not
    /// listed here.
    pub trimmed_states: BTreeSet<StateId>,
    /// Out-degree centralities of the TOTAL automaton, for risk ratios.
    pub centrality: BTreeMap<StateId, usize>,
    /// The final desired state of the total automaton (arming target).
    pub goal: Option<StateId>,
}

impl EffectiveView {
    /// Armed redundant edges as a deduplicated set of (source, target)
    /// pairs, across all armed records.
    pub fn armed_edges(&self) -> BTreeSet<(StateId, StateId)> {
        let mut edges = BTreeSet::new();
        for record in self.armed.values() {
            for (s, t) in record.edge_pairs() {
                edges.insert((s.clone(), t.clone()));
            }
        }
        edges
    }

    /// Armed redundant edges leaving `state`.
    pub fn armed_out(&self, state: &str) -> BTreeSet<(StateId, StateId)> {
        self.armed_edges()
            .into_iter()
            .filter(|(s, _)| s == state)
            .collect()
    }
}

/// Applies the update operator: marks failures (ignoring traversed states),
/// arms redundant paths whose whole sequence is alive with the start anchor
/// reachable from `root` and the goal reachable from their end anchor,
/// activates redundant edges (explicitly detoured paths, plus every armed
/// path once any failure is present), and trims states unreachable from
/// `root` over the traversable edges.
///
/// Signal entries for states `total` does not contain cannot mark or trim
/// anything, but a live `+1` entry still drives the emergency case and thus
/// path activation: the operating case belongs to the signal assignment,
/// not to one automaton. This makes the operator idempotent — re-applying
/// it to its own output (same signals, root, and traversal) reproduces the
/// same state and edge sets even though the failed states are already gone.
pub fn apply_update(
    total: &Automaton,
    eds: &EdsState,
    root: &str,
    traversed: &BTreeSet<StateId>,
) -> Result<EffectiveView, UpdateError> {
    apply_update_excluding(total, eds, root, traversed, &BTreeSet::new())
}

/// Same as [`apply_update`] with an extra exclusion set: excluded states are
/// removed alongside failed ones when the view is trimmed. The controller
/// uses this to plan over unvisited states only, so realized paths stay
/// simple even on cyclic automata.
///
/// Exclusions are planner bookkeeping, not world state: arming is decided
/// on the failure picture alone, so a bypass the controller is already
/// inside of (or whose entrance lies behind it) stays armed even though
/// the states behind the controller are out of the planning view.
pub(crate) fn apply_update_excluding(
    total: &Automaton,
    eds: &EdsState,
    root: &str,
    traversed: &BTreeSet<StateId>,
    excluded: &BTreeSet<StateId>,
) -> Result<EffectiveView, UpdateError> {
    if !total.contains_state(root) {
        return Err(UpdateError::UnknownRoot { id: root.to_owned() });
    }

    // (a) Failure marking with the traversal guard: failures behind the
    // controller never change the view.
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
    let mut removed = failed.clone();
    removed.extend(excluded.iter().cloned());
    removed.remove(root);
    // The emergency case is a property of the signal assignment, not of
    // this automaton: any live (non-traversed) failure signal enables every
    // armed path, even when it names a state the view no longer contains.
    // This keeps re-running the operator on its own output consistent with
    // the original run.
    let failure_present = eds
        .iter()
        .any(|(state, value)| value == 1 && !traversed.contains(state));

    // Reachability for arming runs over ALL edges (original and redundant)
    // among the non-failed states — exclusions do not affect what is armed.
    let forward = reachable_from(total, root, &failed, Direction::Forward);
    let goal = total.desired().last().cloned();
    let backward_of_goal = goal
        .as_ref()
        .filter(|g| !failed.contains(*g))
        .map(|g| reachable_from(total, g, &failed, Direction::Backward));

    // (c) Arming: whole sequence non-failed, start anchor reachable from
    // the root (trivially so when the root stands on the path itself), goal
    // still reachable from the end anchor (vacuous without a goal).
    let mut armed: BTreeMap<PathId, RedundantPathRecord> = BTreeMap::new();
    for record in total.redundant_paths() {
        if record.sequence.iter().any(|s| failed.contains(s)) {
            continue;
        }
        let entrance_reachable = forward.contains(record.start_anchor())
            || record.sequence.iter().any(|s| s == root);
        if !entrance_reachable {
            continue;
        }
        let goal_ok = match (&goal, &backward_of_goal) {
            (None, _) => true,
            (Some(_), None) => false, // the goal itself failed
            (Some(_), Some(back)) => back.contains(record.end_anchor()),
        };
        if !goal_ok {
            continue;
        }
        armed.insert(record.id.clone(), record.clone());
    }

    // (b) Traversable edges: originals always; redundant edges of armed
    // paths that are explicitly detoured (signal -1 at the start anchor) or
    // globally activated by any failure.
    let mut traversable: BTreeSet<(StateId, StateId)> = total
        .edges()
        .filter(|e| e.membership == Membership::Original)
        .map(|e| (e.source.clone(), e.target.clone()))
        .collect();
    let mut active_path_states: BTreeSet<StateId> = BTreeSet::new();
    for record in armed.values() {
        let enabled = failure_present || eds.get(record.start_anchor()) == -1;
        if enabled {
            for (s, t) in record.edge_pairs() {
                traversable.insert((s.clone(), t.clone()));
            }
            active_path_states.extend(record.sequence.iter().cloned());
        }
    }

    // (d) Trim closure: remove failed/excluded states, then everything not
    // reachable from the root over the traversable edges.
    let mut adjacency: BTreeMap<&StateId, Vec<&StateId>> = BTreeMap::new();
    for (source, target) in &traversable {
        if !removed.contains(source) && !removed.contains(target) {
            adjacency.entry(source).or_default().push(target);
        }
    }
    let mut keep: BTreeSet<StateId> = BTreeSet::new();
    keep.insert(root.to_owned());
    let mut queue = VecDeque::from([root.to_owned()]);
    while let Some(state) = queue.pop_front() {
        if let Some(targets) = adjacency.get(&state) {
            for target in targets {
                if keep.insert((*target).clone()) {
                    queue.push_back((*target).clone());
                }
            }
        }
    }
    // Removed = explicitly dropped states plus unreachable candidates; a
    // dormant redundant state was never part of the candidate view.
    let mut trimmed_states: BTreeSet<StateId> = removed.clone();
    for record in total.states() {
        if keep.contains(&record.id) {
            continue;
        }
        let candidate = record.membership == Membership::Original
            || active_path_states.contains(&record.id);
        if candidate {
            trimmed_states.insert(record.id.clone());
        }
    }

    // Assemble the view automaton from the survivors.
    let states: Vec<StateRecord> = total
        .states()
        .filter(|s| keep.contains(&s.id))
        .cloned()
        .collect();
    let edges: Vec<EdgeRecord> = total
        .edges()
        .filter(|e| {
            keep.contains(&e.source)
                && keep.contains(&e.target)
                && traversable.contains(&(e.source.clone(), e.target.clone()))
        })
        .cloned()
        .collect();
    let view_edge_keys: BTreeSet<(StateId, StateId)> = edges
        .iter()
        .map(|e| (e.source.clone(), e.target.clone()))
        .collect();
    let redundant_paths: Vec<RedundantPathRecord> = total
        .redundant_paths()
        .filter(|r| {
            r.sequence.iter().all(|s| keep.contains(s))
                && r.edge_pairs()
                    .all(|(s, t)| view_edge_keys.contains(&(s.clone(), t.clone())))
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

    let automaton = Automaton::new_view(states, edges, redundant_paths, desired, root.to_owned())
        .expect("trimmed subset of a valid automaton is valid");

    Ok(EffectiveView {
        automaton,
        root: root.to_owned(),
        active_redundant_edges,
        armed,
        trimmed_states,
        centrality: total.centralities(),
        goal,
    })
}

/// Redundant paths that remain usable within the view itself: both anchors
/// present, and the goal reachable from the end anchor over the view's own
/// (traversable) edges.
pub fn active_redundant_paths(view: &EffectiveView) -> BTreeSet<PathId> {
    let mut active = BTreeSet::new();
    for (id, record) in &view.armed {
        let start = record.start_anchor();
        let end = record.end_anchor();
        if !view.automaton.contains_state(start) || !view.automaton.contains_state(end) {
            continue;
        }
        let goal_ok = match &view.goal {
            None => true,
            Some(goal) => view
                .automaton
                .legal_states(end)
                .map(|legal| legal.contains(goal))
                .unwrap_or(false),
        };
        if goal_ok {
            active.insert(id.clone());
        }
    }
    active
}

enum Direction {
    Forward,
    Backward,
}

/// BFS over ALL edges of `total` among states not in `removed`, from
/// `start`, following edges forward or backward.
fn reachable_from(
    total: &Automaton,
    start: &str,
    removed: &BTreeSet<StateId>,
    direction: Direction,
) -> BTreeSet<StateId> {
    let mut adjacency: BTreeMap<&StateId, Vec<&StateId>> = BTreeMap::new();
    for edge in total.edges() {
        if removed.contains(&edge.source) || removed.contains(&edge.target) {
            continue;
        }
        match direction {
            Direction::Forward => adjacency.entry(&edge.source).or_default().push(&edge.target),
            Direction::Backward => adjacency.entry(&edge.target).or_default().push(&edge.source),
        }
    }
    let mut reached = BTreeSet::new();
    if removed.contains(start) {
        return reached;
    }
    reached.insert(start.to_owned());
    let mut queue = VecDeque::from([start.to_owned()]);
    while let Some(state) = queue.pop_front() {
        if let Some(targets) = adjacency.get(&state) {
            for target in targets {
                if reached.insert((*target).clone()) {
                    queue.push_back((*target).clone());
                }
            }
        }
    }
    reached
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(seq: &[&str]) -> Vec<StateId> {
        seq.iter().map(|s| s.to_string()).collect()
    }

    fn set(seq: &[&str]) -> BTreeSet<StateId> {
        seq.iter().map(|s| s.to_string()).collect()
    }

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

    /// a -> b -> c -> g with a bypass a -> r -> c.
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
                edge("a", "r", Membership::Redundant, Some("rp1")),
                edge("r", "c", Membership::Redundant, Some("rp1")),
            ],
            vec![RedundantPathRecord {
                id: "rp1".into(),
                sequence: ids(&["a", "r", "c"]),
            }],
            ids(&["g"]),
            "a".into(),
        )
        .unwrap()
    }

    #[test]
    fn classify_follows_emergency_precedence() {
        assert_eq!(classify_case(&EdsState::new()), Case::Normal);
        let aux = EdsState::from_pairs([("x", -1)]).unwrap();
        assert_eq!(classify_case(&aux), Case::Auxiliary);
        let mixed = EdsState::from_pairs([("x", -1), ("y", 1)]).unwrap();
        assert_eq!(classify_case(&mixed), Case::Emergency);
    }

    #[test]
    fn setting_zero_erases_the_entry() {
        let mut eds = EdsState::new();
        eds.set("a", 1).unwrap();
        eds.set("a", 0).unwrap();
        assert_eq!(eds, EdsState::new());
        assert!(eds.is_all_normal());
        assert!(eds.set("a", 2).is_err());
    }

    #[test]
    fn normal_case_restricts_to_original_reachable_part() {
        let total = line_with_bypass();
        let view = apply_update(&total, &EdsState::new(), "a", &BTreeSet::new()).unwrap();
        assert_eq!(view.automaton.state_count(), 4);
        assert!(!view.automaton.contains_state("r"));
        assert!(view.active_redundant_edges.is_empty());
        // The bypass stays armed even though it is not traversable, and its
        // dormant interior was never removed — nothing was trimmed.
        assert!(view.armed.contains_key("rp1"));
        assert!(view.trimmed_states.is_empty());
    }

    #[test]
    fn failure_activates_armed_bypasses_and_trims() {
        let total = line_with_bypass();
        let eds = EdsState::from_pairs([("b", 1)]).unwrap();
        let view = apply_update(&total, &eds, "a", &BTreeSet::new()).unwrap();
        assert!(!view.automaton.contains_state("b"));
        assert!(view.automaton.contains_state("r"));
        assert_eq!(
            view.active_redundant_edges,
            [("a", "r"), ("r", "c")]
                .iter()
                .map(|(s, t)| (s.to_string(), t.to_string()))
                .collect()
        );
        assert_eq!(view.trimmed_states, set(&["b"]));
        assert_eq!(active_redundant_paths(&view), ["rp1".to_string()].into());
    }

    #[test]
    fn auxiliary_signal_enables_one_bypass_without_failures() {
        let total = line_with_bypass();
        let eds = EdsState::from_pairs([("a", -1)]).unwrap();
        let view = apply_update(&total, &eds, "a", &BTreeSet::new()).unwrap();
        // No failure: original part intact, bypass traversable on request.
        assert!(view.automaton.contains_state("b"));
        assert!(view.automaton.contains_state("r"));
        assert_eq!(view.active_redundant_edges.len(), 2);
    }

    #[test]
    fn traversal_guard_ignores_failures_behind_the_controller() {
        let total = line_with_bypass();
        let traversed = set(&["a", "b"]);
        let clean = apply_update(&total, &EdsState::new(), "b", &traversed).unwrap();
        let guarded = apply_update(
            &total,
            &EdsState::from_pairs([("a", 1)]).unwrap(),
            "b",
            &traversed,
        )
        .unwrap();
        assert_eq!(clean, guarded);
    }

    #[test]
    fn failed_root_is_a_stranding_error() {
        let total = line_with_bypass();
        let eds = EdsState::from_pairs([("a", 1)]).unwrap();
        let err = apply_update(&total, &eds, "a", &BTreeSet::new()).unwrap_err();
        assert_eq!(err, UpdateError::RootFailed { id: "a".into() });
        let err = apply_update(&total, &EdsState::new(), "zz", &BTreeSet::new()).unwrap_err();
        assert_eq!(err, UpdateError::UnknownRoot { id: "zz".into() });
    }

    #[test]
    fn disarmed_when_goal_unreachable_from_end_anchor() {
        let total = line_with_bypass();
        // Failing g leaves rp1's end anchor with nowhere to go.
        let eds = EdsState::from_pairs([("g", 1)]).unwrap();
        let view = apply_update(&total, &eds, "a", &BTreeSet::new()).unwrap();
        assert!(view.armed.is_empty());
        assert!(view.active_redundant_edges.is_empty());
    }
}
