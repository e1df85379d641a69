//! Automaton data model: states, edges, redundant-path records, and the
//! structural queries (reachability, out-degree centrality, end parity,
//! path feasibility) that the update operator, objective, and planner are
//! built on.
//!
//! An automaton is a cost-weighted directed graph split into an *original*
//! part (the failure-free system) and a *redundant* part (bypass paths that
//! only become traversable under disturbance). Redundant paths are recorded
//! explicitly: their first and last states (the anchors) belong to the
//! original part, every interior state to the redundant part.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque state identifier. Identifiers are ordered (as strings) so that
/// every iteration order and tie-break in this crate is deterministic.
pub type StateId = String;

/// Identifier of a redundant-path record.
pub type PathId = String;

/// Whether a state or edge belongs to the failure-free system (`Original`)
/// or to a bypass that is only traversable under disturbance (`Redundant`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Original,
    Redundant,
}

/// A state location with its temporal cost and user-assigned risk factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub id: StateId,
    /// Human-readable name, e.g. a buffer or machine label. Informational.
    #[serde(default)]
    pub label: String,
    /// Temporal cost of occupying this state (time units). Nonnegative.
    pub cost: f64,
    /// User-assigned risk weight. Nonnegative, dimensionless.
    #[serde(default)]
    pub risk_factor: f64,
    pub membership: Membership,
}

/// A directed edge. Edge costs are accepted and round-tripped but carry no
/// weight in scoring or clock advancement (state costs cover the paths the
/// model is used for); they default to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub source: StateId,
    pub target: StateId,
    #[serde(default)]
    pub cost: f64,
    pub membership: Membership,
    /// For redundant-membership edges: the redundant path this edge is a
    /// segment of.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub redundant_path_id: Option<PathId>,
}

/// An ordered bypass `<anchor, interior..., anchor>`. Both anchors have
/// original membership; every interior state has redundant membership.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedundantPathRecord {
    pub id: PathId,
    pub sequence: Vec<StateId>,
}

impl RedundantPathRecord {
    /// First state of the sequence — where the bypass leaves the original system.
    pub fn start_anchor(&self) -> &StateId {
        &self.sequence[0]
    }

    /// Last state of the sequence — where the bypass rejoins the original system.
    pub fn end_anchor(&self) -> &StateId {
        &self.sequence[self.sequence.len() - 1]
    }

    /// The consecutive (source, target) pairs of the sequence.
    pub fn edge_pairs(&self) -> impl Iterator<Item = (&StateId, &StateId)> {
        self.sequence.iter().zip(self.sequence.iter().skip(1))
    }
}

/// Validation and lookup errors for the data model. Variant names double as
/// the names of the invariants they enforce.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum ModelError {
    #[error("state {id}: cost must be finite and nonnegative")]
    InvalidStateCost { id: StateId },
    #[error("state {id}: risk factor must be finite and nonnegative")]
    InvalidRiskFactor { id: StateId },
    #[error("duplicate state id: {id}")]
    DuplicateState { id: StateId },
    #[error("edge {from} -> {to}: cost must be finite and nonnegative")]
    InvalidEdgeCost { from: StateId, to: StateId },
    #[error("self-loop edge not allowed at {id}")]
    SelfLoop { id: StateId },
    #[error("duplicate edge: {from} -> {to}")]
    DuplicateEdge { from: StateId, to: StateId },
    #[error("edge endpoint is not a known state: {id}")]
    UnknownEdgeEndpoint { id: StateId },
    #[error("original-membership edge {from} -> {to} must join original-membership states")]
    OriginalEdgeEndpoints { from: StateId, to: StateId },
    #[error("original-membership edge {from} -> {to} cannot name a redundant path")]
    OriginalEdgeWithPath { from: StateId, to: StateId },
    #[error("edge {from} -> {to} names unknown redundant path {path}")]
    UnknownEdgePath {
        from: StateId,
        to: StateId,
        path: PathId,
    },
    #[error("edge {from} -> {to} is not a segment of redundant path {path}")]
    EdgePathMismatch {
        from: StateId,
        to: StateId,
        path: PathId,
    },
    #[error("duplicate redundant path id: {id}")]
    DuplicatePath { id: PathId },
    #[error("redundant path {id} must list at least two states")]
    PathTooShort { id: PathId },
    #[error("redundant path {id} repeats state {state}")]
    PathRepeatsState { id: PathId, state: StateId },
    #[error("redundant path {id}: anchors must be original-membership states, but {state} is not")]
    AnchorNotOriginal { id: PathId, state: StateId },
    #[error(
        "redundant path {id}: interior states must be redundant-membership, but {state} is not"
    )]
    InteriorNotRedundant { id: PathId, state: StateId },
    #[error("redundant path {id}: consecutive states {from} -> {to} need a redundant-membership edge")]
    MissingRedundantEdge {
        id: PathId,
        from: StateId,
        to: StateId,
    },
    #[error("initial state {id} is unknown")]
    UnknownInitial { id: StateId },
    #[error("initial state {id} must have original membership")]
    InitialNotOriginal { id: StateId },
    #[error("desired state {id} is unknown")]
    UnknownDesired { id: StateId },
    #[error("desired sequence repeats state {id}")]
    DuplicateDesired { id: StateId },
    #[error("unknown state: {id}")]
    UnknownState { id: StateId },
    #[error("path is not feasible in this automaton view: {}", .0.join(" -> "))]
    InfeasiblePath(Vec<StateId>),
    #[error("anchor {anchor} of redundant path {path} is not on the given path")]
    AnchorNotOnPath { anchor: StateId, path: PathId },
}

/// An ordered state sequence with its accumulated cost (sum of state costs
/// excluding the final state). Paths are simple: no state repeats.
///
/// Ordering and equality consider the sequence only, so tie sets can be
/// treated as ordinary ordered sets of paths.
#[derive(Clone, Debug, Serialize)]
pub struct Path {
    pub sequence: Vec<StateId>,
    pub total_cost: f64,
}

impl PartialEq for Path {
    fn eq(&self, other: &Self) -> bool {
        self.sequence == other.sequence
    }
}

impl Eq for Path {}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Path {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sequence.cmp(&other.sequence)
    }
}

impl Path {
    pub fn first(&self) -> Option<&StateId> {
        self.sequence.first()
    }

    pub fn last(&self) -> Option<&StateId> {
        self.sequence.last()
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    /// Position of `state` in the sequence, if present.
    pub fn position(&self, state: &str) -> Option<usize> {
        self.sequence.iter().position(|s| s == state)
    }
}

/// How strictly [`Automaton::build`] validates. Total automata (user input)
/// get the full invariant set; views derived during planning may be rooted
/// at a redundant state and may have lost desired states to trimming.
#[derive(Clone, Copy, PartialEq)]
enum Strictness {
    Total,
    View,
}

/// The complete model: states, edges, redundant-path records, the ordered
/// desired-state sequence, and the initial state. Immutable after
/// construction; derived views are new values.
#[derive(Clone, Debug, PartialEq)]
pub struct Automaton {
    states: BTreeMap<StateId, StateRecord>,
    edges: BTreeMap<(StateId, StateId), EdgeRecord>,
    redundant_paths: BTreeMap<PathId, RedundantPathRecord>,
    desired: Vec<StateId>,
    initial: StateId,
    /// Outgoing adjacency, precomputed at construction. Targets sorted.
    out: BTreeMap<StateId, Vec<StateId>>,
}

impl Automaton {
    /// Validates and builds a total automaton. Every structural invariant is
    /// checked; the error names the one that failed.
    pub fn new(
        states: Vec<StateRecord>,
        edges: Vec<EdgeRecord>,
        redundant_paths: Vec<RedundantPathRecord>,
        desired: Vec<StateId>,
        initial: StateId,
    ) -> Result<Self, ModelError> {
        Self::build(
            states,
            edges,
            redundant_paths,
            desired,
            initial,
            Strictness::Total,
        )
    }

    /// Builds a derived view: same checks except that the root may have
    /// redundant membership (the controller can stand on a bypass state)
    /// and a redundant edge may outlive its trimmed path record.
    pub(crate) fn new_view(
        states: Vec<StateRecord>,
        edges: Vec<EdgeRecord>,
        redundant_paths: Vec<RedundantPathRecord>,
        desired: Vec<StateId>,
        initial: StateId,
    ) -> Result<Self, ModelError> {
        Self::build(
            states,
            edges,
            redundant_paths,
            desired,
            initial,
            Strictness::View,
        )
    }

    fn build(
        states: Vec<StateRecord>,
        edges: Vec<EdgeRecord>,
        redundant_paths: Vec<RedundantPathRecord>,
        desired: Vec<StateId>,
        initial: StateId,
        strictness: Strictness,
    ) -> Result<Self, ModelError> {
        let mut state_map = BTreeMap::new();
        for record in states {
            if !(record.cost.is_finite() && record.cost >= 0.0) {
                return Err(ModelError::InvalidStateCost { id: record.id });
            }
            if !(record.risk_factor.is_finite() && record.risk_factor >= 0.0) {
                return Err(ModelError::InvalidRiskFactor { id: record.id });
            }
            let id = record.id.clone();
            if state_map.insert(id.clone(), record).is_some() {
                return Err(ModelError::DuplicateState { id });
            }
        }

        let mut path_map = BTreeMap::new();
        for record in redundant_paths {
            let id = record.id.clone();
            if record.sequence.len() < 2 {
                return Err(ModelError::PathTooShort { id });
            }
            let mut seen = BTreeSet::new();
            for state in &record.sequence {
                if !state_map.contains_key(state) {
                    return Err(ModelError::UnknownState { id: state.clone() });
                }
                if !seen.insert(state.clone()) {
                    return Err(ModelError::PathRepeatsState {
                        id,
                        state: state.clone(),
                    });
                }
            }
            for anchor in [record.start_anchor(), record.end_anchor()] {
                if state_map[anchor].membership != Membership::Original {
                    return Err(ModelError::AnchorNotOriginal {
                        id,
                        state: anchor.clone(),
                    });
                }
            }
            for interior in &record.sequence[1..record.sequence.len() - 1] {
                if state_map[interior].membership != Membership::Redundant {
                    return Err(ModelError::InteriorNotRedundant {
                        id,
                        state: interior.clone(),
                    });
                }
            }
            if path_map.insert(id.clone(), record).is_some() {
                return Err(ModelError::DuplicatePath { id });
            }
        }

        let mut edge_map: BTreeMap<(StateId, StateId), EdgeRecord> = BTreeMap::new();
        for record in edges {
            if !(record.cost.is_finite() && record.cost >= 0.0) {
                return Err(ModelError::InvalidEdgeCost {
                    from: record.source,
                    to: record.target,
                });
            }
            if record.source == record.target {
                return Err(ModelError::SelfLoop { id: record.source });
            }
            for endpoint in [&record.source, &record.target] {
                if !state_map.contains_key(endpoint) {
                    return Err(ModelError::UnknownEdgeEndpoint {
                        id: endpoint.clone(),
                    });
                }
            }
            match record.membership {
                Membership::Original => {
                    if record.redundant_path_id.is_some() {
                        return Err(ModelError::OriginalEdgeWithPath {
                            from: record.source,
                            to: record.target,
                        });
                    }
                    for endpoint in [&record.source, &record.target] {
                        if state_map[endpoint].membership != Membership::Original {
                            return Err(ModelError::OriginalEdgeEndpoints {
                                from: record.source.clone(),
                                to: record.target.clone(),
                            });
                        }
                    }
                }
                Membership::Redundant => {
                    if let Some(path) = &record.redundant_path_id {
                        match path_map.get(path) {
                            None => {
                                // A view may keep the tail edges of a bypass
                                // whose record was trimmed (the controller
                                // stands mid-bypass); a total automaton may
                                // not dangle.
                                if strictness == Strictness::Total {
                                    return Err(ModelError::UnknownEdgePath {
                                        from: record.source,
                                        to: record.target,
                                        path: path.clone(),
                                    });
                                }
                            }
                            Some(rp) => {
                                let on_path = rp
                                    .edge_pairs()
                                    .any(|(s, t)| s == &record.source && t == &record.target);
                                if !on_path {
                                    return Err(ModelError::EdgePathMismatch {
                                        from: record.source,
                                        to: record.target,
                                        path: path.clone(),
                                    });
                                }
                            }
                        }
                    }
                }
            }
            let key = (record.source.clone(), record.target.clone());
            if edge_map.insert(key.clone(), record).is_some() {
                return Err(ModelError::DuplicateEdge {
                    from: key.0,
                    to: key.1,
                });
            }
        }

        // Every consecutive pair of a redundant path must be backed by a
        // redundant-membership edge.
        for record in path_map.values() {
            for (source, target) in record.edge_pairs() {
                let ok = edge_map
                    .get(&(source.clone(), target.clone()))
                    .map(|e| e.membership == Membership::Redundant)
                    .unwrap_or(false);
                if !ok {
                    return Err(ModelError::MissingRedundantEdge {
                        id: record.id.clone(),
                        from: source.clone(),
                        to: target.clone(),
                    });
                }
            }
        }

        if !state_map.contains_key(&initial) {
            return Err(ModelError::UnknownInitial { id: initial });
        }
        if strictness == Strictness::Total
            && state_map[&initial].membership != Membership::Original
        {
            return Err(ModelError::InitialNotOriginal { id: initial });
        }

        let mut seen_desired = BTreeSet::new();
        for state in &desired {
            if !state_map.contains_key(state) {
                return Err(ModelError::UnknownDesired { id: state.clone() });
            }
            if !seen_desired.insert(state.clone()) {
                return Err(ModelError::DuplicateDesired { id: state.clone() });
            }
        }

        let mut out: BTreeMap<StateId, Vec<StateId>> = BTreeMap::new();
        for id in state_map.keys() {
            out.insert(id.clone(), Vec::new());
        }
        for (source, target) in edge_map.keys() {
            out.get_mut(source).unwrap().push(target.clone());
        }
        // BTreeMap iteration already yields (source, target) sorted, so each
        // adjacency list comes out sorted; assert the assumption cheaply.
        debug_assert!(out.values().all(|v| v.windows(2).all(|w| w[0] < w[1])));

        Ok(Self {
            states: state_map,
            edges: edge_map,
            redundant_paths: path_map,
            desired,
            initial,
            out,
        })
    }

    pub fn state(&self, id: &str) -> Option<&StateRecord> {
        self.states.get(id)
    }

    pub fn contains_state(&self, id: &str) -> bool {
        self.states.contains_key(id)
    }

    pub fn states(&self) -> impl Iterator<Item = &StateRecord> {
        self.states.values()
    }

    pub fn state_ids(&self) -> impl Iterator<Item = &StateId> {
        self.states.keys()
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn edge(&self, source: &str, target: &str) -> Option<&EdgeRecord> {
        self.edges.get(&(source.to_owned(), target.to_owned()))
    }

    pub fn edges(&self) -> impl Iterator<Item = &EdgeRecord> {
        self.edges.values()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn redundant_path(&self, id: &str) -> Option<&RedundantPathRecord> {
        self.redundant_paths.get(id)
    }

    pub fn redundant_paths(&self) -> impl Iterator<Item = &RedundantPathRecord> {
        self.redundant_paths.values()
    }

    pub fn desired(&self) -> &[StateId] {
        &self.desired
    }

    pub fn initial(&self) -> &StateId {
        &self.initial
    }

    /// Outgoing neighbors of `id`, sorted. Empty for unknown states.
    pub fn out_neighbors(&self, id: &str) -> &[StateId] {
        self.out.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of outgoing edges of `state` in this automaton. Meaningful as
    /// the risk denominator only when called on the TOTAL automaton: derived
    /// views carry a centrality snapshot instead of recomputing.
    pub fn out_degree_centrality(&self, state: &str) -> Result<usize, ModelError> {
        self.out
            .get(state)
            .map(Vec::len)
            .ok_or_else(|| ModelError::UnknownState {
                id: state.to_owned(),
            })
    }

    /// Out-degree centrality of every state, keyed by id.
    pub fn centralities(&self) -> BTreeMap<StateId, usize> {
        self.out
            .iter()
            .map(|(id, targets)| (id.clone(), targets.len()))
            .collect()
    }

    /// All states reachable from `root` along directed edges, `root`
    /// included. The complement of this set is the illegal (failed) part.
    pub fn legal_states(&self, root: &str) -> Result<BTreeSet<StateId>, ModelError> {
        if !self.states.contains_key(root) {
            return Err(ModelError::UnknownState {
                id: root.to_owned(),
            });
        }
        let mut reached = BTreeSet::new();
        reached.insert(root.to_owned());
        let mut queue = VecDeque::from([root.to_owned()]);
        while let Some(state) = queue.pop_front() {
            for next in self.out_neighbors(&state) {
                if reached.insert(next.clone()) {
                    queue.push_back(next.clone());
                }
            }
        }
        Ok(reached)
    }

    /// True iff every consecutive pair of `sequence` is an edge of this view
    /// and no state repeats. The empty sequence is trivially feasible; every
    /// state must be known.
    pub fn is_feasible_path(&self, sequence: &[StateId]) -> Result<bool, ModelError> {
        for state in sequence {
            if !self.states.contains_key(state) {
                return Err(ModelError::UnknownState { id: state.clone() });
            }
        }
        let mut seen = BTreeSet::new();
        for state in sequence {
            if !seen.insert(state) {
                return Ok(false);
            }
        }
        Ok(sequence
            .windows(2)
            .all(|pair| self.edges.contains_key(&(pair[0].clone(), pair[1].clone()))))
    }

    /// Builds a [`Path`] through this view, validating feasibility and
    /// accumulating the cost of every state except the last.
    pub fn path(&self, sequence: Vec<StateId>) -> Result<Path, ModelError> {
        if !self.is_feasible_path(&sequence)? {
            return Err(ModelError::InfeasiblePath(sequence));
        }
        let total_cost = sequence
            .iter()
            .take(sequence.len().saturating_sub(1))
            .map(|id| self.states[id].cost)
            .sum();
        Ok(Path {
            sequence,
            total_cost,
        })
    }

    /// The original (failure-free) part: original-membership states and
    /// edges only, redundant-path records dropped, desired filtered to
    /// surviving states.
    pub fn original_view(&self) -> Automaton {
        let states: Vec<StateRecord> = self
            .states
            .values()
            .filter(|s| s.membership == Membership::Original)
            .cloned()
            .collect();
        let edges: Vec<EdgeRecord> = self
            .edges
            .values()
            .filter(|e| e.membership == Membership::Original)
            .cloned()
            .collect();
        let keep: BTreeSet<&StateId> = states.iter().map(|s| &s.id).collect();
        let desired: Vec<StateId> = self
            .desired
            .iter()
            .filter(|d| keep.contains(d))
            .cloned()
            .collect();
        Self::new_view(states, edges, Vec::new(), desired, self.initial.clone())
            .expect("original part of a valid automaton is valid")
    }

    /// Two paths are equivalent with respect to a redundant path when both
    /// are feasible in the original part and their suffixes from the
    /// respective anchors each contain (as a subsequence) a common end
    /// parity of the desired sequence. With an empty desired sequence there
    /// is no end parity to share, so the answer is `false`.
    pub fn are_equivalent_paths(
        &self,
        u1: &Path,
        u2: &Path,
        redundant_path: &RedundantPathRecord,
    ) -> Result<bool, ModelError> {
        let start = redundant_path.start_anchor();
        let end = redundant_path.end_anchor();
        let pos1 = u1
            .position(start)
            .ok_or_else(|| ModelError::AnchorNotOnPath {
                anchor: start.clone(),
                path: redundant_path.id.clone(),
            })?;
        let pos2 = u2.position(end).ok_or_else(|| ModelError::AnchorNotOnPath {
            anchor: end.clone(),
            path: redundant_path.id.clone(),
        })?;

        let original = self.original_view();
        if !original.is_feasible_path(&u1.sequence).unwrap_or(false)
            || !original.is_feasible_path(&u2.sequence).unwrap_or(false)
        {
            return Ok(false);
        }

        let suffix1 = &u1.sequence[pos1..];
        let suffix2 = &u2.sequence[pos2..];
        for k in 0..self.desired.len() {
            let parity = &self.desired[k..];
            if is_subsequence(parity, suffix1) && is_subsequence(parity, suffix2) {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// True iff `candidate` equals a nonempty suffix of `sigma` (a suffix
/// beginning at some element of `sigma`). The empty candidate has no
/// starting element, so it is not an end parity.
pub fn end_parity(sigma: &[StateId], candidate: &[StateId]) -> bool {
    if candidate.is_empty() || candidate.len() > sigma.len() {
        return false;
    }
    &sigma[sigma.len() - candidate.len()..] == candidate
}

/// Order-preserving containment: every element of `needle` occurs in `hay`
/// in the same relative order.
fn is_subsequence(needle: &[StateId], hay: &[StateId]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}
