//! Exact optimal-path search over an effective view: find every tied-optimal
//! simple path from a start state through the remaining desired states in
//! order, under the active selection policy, or report UNSAT.
//!
//! The search decomposes the waypoint sequence into segments between
//! consecutive waypoints and solves each by label-correcting search with
//! dominance pruning. Per-segment optima concatenate into the global optimum
//! because every score component (cost, risk, escapes) is additive over
//! states and edges and the comparison keys are translation-invariant; when
//! every concatenation of segment optima repeats a state, the planner falls
//! back to a joint search over (state, next-waypoint) pairs, which is always
//! exact. Results equal exhaustive enumeration by construction and are
//! cross-checked against it in tests.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::eds::EffectiveView;
use crate::model::{Path, StateId};
use crate::objective::{policy_for_mode, PathScore, RiskProfile, SelectionPolicy};

/// Hard cap on view size: search labels track visited states in a 128-bit
/// set.
pub const MAX_VIEW_STATES: usize = 128;

/// Planning outcome kind. UNSAT is an answer, not an error: no feasible
/// path visits the remaining desired states in order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Sat,
    Unsat,
}

/// Errors for malformed requests, distinct from an UNSAT verdict.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum PlanError {
    #[error("start state {id} is not part of the view")]
    StartNotInView { id: StateId },
    #[error("view has {count} states; the planner supports at most {MAX_VIEW_STATES}")]
    ViewTooLarge { count: usize },
}

/// A planning request: the view to search, where the controller stands,
/// the desired states still ahead (in their original relative order), and
/// the scoring profile.
#[derive(Clone, Debug)]
pub struct PlanRequest<'a> {
    pub view: &'a EffectiveView,
    pub start: StateId,
    pub remaining_desired: Vec<StateId>,
    pub profile: RiskProfile,
}

/// The full tied-optimal answer. `optimal_paths` holds every path whose
/// score compares equal to the optimum under the request's policy (the
/// Pareto frontier of the lexicographic modes), sorted by state sequence.
#[derive(Clone, Debug, Serialize)]
pub struct PlanResult {
    pub verdict: Verdict,
    pub optimal_paths: BTreeSet<Path>,
    /// Score of the optimum; `None` iff UNSAT.
    pub score: Option<PathScore>,
}

impl PlanResult {
    fn unsat() -> Self {
        Self {
            verdict: Verdict::Unsat,
            optimal_paths: BTreeSet::new(),
            score: None,
        }
    }

    pub fn is_sat(&self) -> bool {
        self.verdict == Verdict::Sat
    }

    /// The committable optimum: lexicographically first path of the tie
    /// set, the deterministic pick when a caller must choose one.
    pub fn best_path(&self) -> Option<&Path> {
        self.optimal_paths.iter().next()
    }
}

/// Immutable per-request search context: indexed states, adjacency, score
/// contributions, and armed-edge lookups.
struct SearchContext<'a> {
    view: &'a EffectiveView,
    profile: RiskProfile,
    policy: &'static dyn SelectionPolicy,
    index: BTreeMap<&'a StateId, u32>,
    /// Per-state (cost, risk) contribution when the state is non-final.
    /// Risk is 0 for states that can never be extended from (no out-edges).
    contribution: BTreeMap<&'a StateId, (f64, f64)>,
    armed_edges: BTreeSet<(StateId, StateId)>,
    armed_out: BTreeMap<StateId, usize>,
}

impl<'a> SearchContext<'a> {
    fn new(view: &'a EffectiveView, profile: RiskProfile) -> Self {
        let automaton = &view.automaton;
        let index: BTreeMap<&StateId, u32> = automaton
            .state_ids()
            .enumerate()
            .map(|(i, id)| (id, i as u32))
            .collect();
        let contribution = automaton
            .states()
            .map(|record| {
                let centrality = view.centrality.get(&record.id).copied().unwrap_or(0);
                let risk = if centrality == 0 {
                    0.0
                } else {
                    record.risk_factor / centrality as f64 * record.cost
                };
                (&record.id, (record.cost, risk))
            })
            .collect();
        let armed_edges = view.armed_edges();
        let mut armed_out: BTreeMap<StateId, usize> = BTreeMap::new();
        for (source, _) in &armed_edges {
            *armed_out.entry(source.clone()).or_default() += 1;
        }
        Self {
            view,
            profile,
            policy: policy_for_mode(profile.mode),
            index,
            contribution,
            armed_edges,
            armed_out,
        }
    }

    fn bit(&self, id: &StateId) -> u128 {
        1u128 << self.index[id]
    }

    /// Accumulator deltas when stepping from `u` to `v`: `u` turns
    /// non-final, contributing its cost and risk, and every armed edge out
    /// of `u` except a taken one becomes an unused escape.
    fn step_delta(&self, u: &StateId, v: &StateId) -> (f64, f64, usize) {
        let (cost, risk) = self.contribution[u];
        let mut escapes = self.armed_out.get(u).copied().unwrap_or(0);
        if self.armed_edges.contains(&(u.clone(), v.clone())) {
            escapes -= 1;
        }
        (cost, risk, escapes)
    }

    fn score(&self, label: &Label) -> PathScore {
        PathScore::from_sums(label.cost, label.risk, label.escapes, &self.profile)
    }

    /// Keeps `fresh` in `bucket` unless a kept label with a strictly better
    /// key and a subset of visited states dominates it; symmetrically evicts
    /// kept labels `fresh` dominates. Equal-key labels always coexist, so
    /// complete tie sets survive pruning.
    fn admit(&self, bucket: &mut Vec<Label>, fresh: Label) -> Option<Label> {
        use std::cmp::Ordering;
        let fresh_score = self.score(&fresh);
        for kept in bucket.iter() {
            if kept.visited & fresh.visited == kept.visited
                && self.policy.compare(&self.score(kept), &fresh_score) == Ordering::Less
            {
                return None;
            }
        }
        bucket.retain(|kept| {
            !(fresh.visited & kept.visited == fresh.visited
                && self.policy.compare(&fresh_score, &self.score(kept)) == Ordering::Less)
        });
        bucket.push(fresh.clone());
        Some(fresh)
    }

    /// Reduces complete labels to the tied-optimal subset under the policy.
    fn tied_optima(&self, complete: Vec<Label>) -> Vec<Label> {
        use std::cmp::Ordering;
        let Some(best) = complete
            .iter()
            .map(|l| self.score(l))
            .min_by(|a, b| self.policy.compare(a, b).then(Ordering::Equal))
        else {
            return Vec::new();
        };
        complete
            .into_iter()
            .filter(|l| self.policy.compare(&self.score(l), &best) == Ordering::Equal)
            .collect()
    }
}

/// A partial path with its accumulated score components and visited-state
/// bitset.
#[derive(Clone, Debug)]
struct Label {
    at: StateId,
    cost: f64,
    risk: f64,
    escapes: usize,
    visited: u128,
    sequence: Vec<StateId>,
}

impl Label {
    fn seed(ctx: &SearchContext, start: &StateId) -> Self {
        Self {
            at: start.clone(),
            cost: 0.0,
            risk: 0.0,
            escapes: 0,
            visited: ctx.bit(start),
            sequence: vec![start.clone()],
        }
    }

    fn extend(&self, ctx: &SearchContext, v: &StateId) -> Self {
        let (cost, risk, escapes) = ctx.step_delta(&self.at, v);
        let mut sequence = self.sequence.clone();
        sequence.push(v.clone());
        Self {
            at: v.clone(),
            cost: self.cost + cost,
            risk: self.risk + risk,
            escapes: self.escapes + escapes,
            visited: self.visited | ctx.bit(v),
            sequence,
        }
    }
}

/// Plans the tied-optimal simple paths from `request.start` through
/// `request.remaining_desired` in order. Paths end at the last desired
/// state; with no remaining desired states the answer is the single-state
/// path at `start`.
pub fn plan(request: &PlanRequest) -> Result<PlanResult, PlanError> {
    let automaton = &request.view.automaton;
    if !automaton.contains_state(&request.start) {
        return Err(PlanError::StartNotInView {
            id: request.start.clone(),
        });
    }
    if automaton.state_count() > MAX_VIEW_STATES {
        return Err(PlanError::ViewTooLarge {
            count: automaton.state_count(),
        });
    }

    let Some(waypoints) = collapse_waypoints(&request.start, &request.remaining_desired) else {
        // A repeated waypoint can never be visited twice by a simple path.
        return Ok(PlanResult::unsat());
    };
    let ctx = SearchContext::new(request.view, request.profile);

    if waypoints.len() == 1 {
        let path = automaton
            .path(vec![request.start.clone()])
            .expect("single known state is a feasible path");
        let score = PathScore::from_sums(0.0, 0.0, 0, &request.profile);
        return Ok(PlanResult {
            verdict: Verdict::Sat,
            optimal_paths: BTreeSet::from([path]),
            score: Some(score),
        });
    }

    // Per-segment tied optima; any empty segment means UNSAT overall.
    let waypoint_set: BTreeSet<&StateId> = waypoints.iter().collect();
    let mut segments: Vec<Vec<Label>> = Vec::new();
    for pair in waypoints.windows(2) {
        let forbidden: BTreeSet<&StateId> = waypoint_set
            .iter()
            .copied()
            .filter(|w| **w != pair[0] && **w != pair[1])
            .collect();
        let complete = segment_search(&ctx, &pair[0], &pair[1], &forbidden);
        let tied = ctx.tied_optima(complete);
        if tied.is_empty() {
            return Ok(PlanResult::unsat());
        }
        segments.push(tied);
    }

    let combined = combine_segments(&ctx, &segments);
    let tied = if combined.is_empty() {
        // Every concatenation of segment optima repeated a state; only a
        // joint search over (state, next waypoint) stays exact here.
        ctx.tied_optima(joint_search(&ctx, &waypoints))
    } else {
        combined
    };
    Ok(assemble(&ctx, tied))
}

/// Every simple path from `start` that visits `desired` in order and ends
/// at the last desired state, with at most `bound` states. Brute-force
/// depth-first enumeration for tests and small instances; empty when none
/// exist (including an unknown or disconnected start).
pub fn enumerate_all_paths(
    view: &EffectiveView,
    start: &StateId,
    desired: &[StateId],
    bound: usize,
) -> BTreeSet<Path> {
    let automaton = &view.automaton;
    let mut found = BTreeSet::new();
    if !automaton.contains_state(start) || bound == 0 {
        return found;
    }
    let Some(waypoints) = collapse_waypoints(start, desired) else {
        return found;
    };
    let positions: BTreeMap<&StateId, usize> =
        waypoints.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut sequence = vec![start.clone()];
    let mut visited = BTreeSet::from([start.clone()]);
    dfs(
        automaton,
        &waypoints,
        &positions,
        bound,
        &mut sequence,
        &mut visited,
        1,
        &mut found,
    );
    found
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    automaton: &crate::model::Automaton,
    waypoints: &[StateId],
    positions: &BTreeMap<&StateId, usize>,
    bound: usize,
    sequence: &mut Vec<StateId>,
    visited: &mut BTreeSet<StateId>,
    next_waypoint: usize,
    found: &mut BTreeSet<Path>,
) {
    if next_waypoint == waypoints.len() {
        let path = automaton
            .path(sequence.clone())
            .expect("enumerated sequences follow edges and never repeat");
        found.insert(path);
        return;
    }
    if sequence.len() == bound {
        return;
    }
    let current = sequence.last().expect("sequence starts nonempty").clone();
    for next in automaton.out_neighbors(&current) {
        if visited.contains(next) {
            continue;
        }
        let advanced = match positions.get(next) {
            Some(&pos) if pos > next_waypoint => continue, // premature waypoint
            Some(&pos) if pos == next_waypoint => next_waypoint + 1,
            _ => next_waypoint,
        };
        sequence.push(next.clone());
        visited.insert(next.clone());
        dfs(
            automaton, waypoints, positions, bound, sequence, visited, advanced, found,
        );
        visited.remove(next);
        sequence.pop();
    }
}

/// `[start] + desired` with consecutive duplicates collapsed; `None` when a
/// state would have to be visited twice (unplannable for simple paths).
fn collapse_waypoints(start: &StateId, desired: &[StateId]) -> Option<Vec<StateId>> {
    let mut waypoints = vec![start.clone()];
    for d in desired {
        if waypoints.last() != Some(d) {
            waypoints.push(d.clone());
        }
    }
    let unique: BTreeSet<&StateId> = waypoints.iter().collect();
    (unique.len() == waypoints.len()).then_some(waypoints)
}

/// Label-correcting search for all non-dominated simple paths from `a` to
/// `b` whose interiors avoid `forbidden` (the other waypoints). Complete
/// labels are recorded at `b` and never extended past it.
fn segment_search(
    ctx: &SearchContext,
    a: &StateId,
    b: &StateId,
    forbidden: &BTreeSet<&StateId>,
) -> Vec<Label> {
    let mut buckets: BTreeMap<StateId, Vec<Label>> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let seed = Label::seed(ctx, a);
    buckets.entry(a.clone()).or_default().push(seed.clone());
    queue.push_back(seed);
    let mut complete = Vec::new();
    while let Some(label) = queue.pop_front() {
        for next in ctx.view.automaton.out_neighbors(&label.at) {
            if next == b {
                complete.push(label.extend(ctx, next));
                continue;
            }
            if forbidden.contains(next) || label.visited & ctx.bit(next) != 0 {
                continue;
            }
            let extended = label.extend(ctx, next);
            if let Some(admitted) = ctx.admit(buckets.entry(next.clone()).or_default(), extended)
            {
                queue.push_back(admitted);
            }
        }
    }
    complete
}

/// Exact search over (state, next-waypoint-index) labels, used when segment
/// concatenation cannot produce a simple path. Labels complete upon
/// consuming the final waypoint.
fn joint_search(ctx: &SearchContext, waypoints: &[StateId]) -> Vec<Label> {
    let positions: BTreeMap<&StateId, usize> =
        waypoints.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut buckets: BTreeMap<(StateId, usize), Vec<Label>> = BTreeMap::new();
    let mut queue: VecDeque<(Label, usize)> = VecDeque::new();
    let seed = Label::seed(ctx, &waypoints[0]);
    buckets
        .entry((waypoints[0].clone(), 1))
        .or_default()
        .push(seed.clone());
    queue.push_back((seed, 1));
    let mut complete = Vec::new();
    while let Some((label, next_waypoint)) = queue.pop_front() {
        for next in ctx.view.automaton.out_neighbors(&label.at) {
            if label.visited & ctx.bit(next) != 0 {
                continue;
            }
            let advanced = match positions.get(next) {
                Some(&pos) if pos > next_waypoint => continue, // premature waypoint
                Some(&pos) if pos == next_waypoint => next_waypoint + 1,
                _ => next_waypoint,
            };
            let extended = label.extend(ctx, next);
            if advanced == waypoints.len() {
                complete.push(extended);
                continue;
            }
            let bucket = buckets.entry((next.clone(), advanced)).or_default();
            if let Some(admitted) = ctx.admit(bucket, extended) {
                queue.push_back((admitted, advanced));
            }
        }
    }
    complete
}

/// Cartesian combinations of per-segment tied optima that form simple
/// paths. Nonempty means these ARE the global tie set: component sums reach
/// the unconstrained lower bound, which any simple path from suboptimal
/// segments exceeds.
fn combine_segments(ctx: &SearchContext, segments: &[Vec<Label>]) -> Vec<Label> {
    let mut partial: Vec<Label> = segments[0].clone();
    for tier in &segments[1..] {
        let mut grown = Vec::new();
        for prefix in &partial {
            for suffix in tier {
                // Segments share exactly the junction waypoint.
                let junction = ctx.bit(&suffix.sequence[0]);
                if prefix.visited & suffix.visited != junction {
                    continue;
                }
                let mut sequence = prefix.sequence.clone();
                sequence.extend_from_slice(&suffix.sequence[1..]);
                grown.push(Label {
                    at: suffix.at.clone(),
                    cost: prefix.cost + suffix.cost,
                    risk: prefix.risk + suffix.risk,
                    escapes: prefix.escapes + suffix.escapes,
                    visited: prefix.visited | suffix.visited,
                    sequence,
                });
            }
        }
        if grown.is_empty() {
            return Vec::new();
        }
        partial = grown;
    }
    partial
}

/// Wraps tied complete labels into the result: sorted paths plus the score
/// of the lexicographically first one.
fn assemble(ctx: &SearchContext, tied: Vec<Label>) -> PlanResult {
    if tied.is_empty() {
        return PlanResult::unsat();
    }
    let mut scored: Vec<(Path, PathScore)> = tied
        .into_iter()
        .map(|label| {
            let score = ctx.score(&label);
            let path = Path {
                sequence: label.sequence,
                total_cost: label.cost,
            };
            (path, score)
        })
        .collect();
    scored.sort_by(|(a, _), (b, _)| a.cmp(b));
    scored.dedup_by(|(a, _), (b, _)| a == b);
    let score = scored[0].1;
    PlanResult {
        verdict: Verdict::Sat,
        optimal_paths: scored.into_iter().map(|(p, _)| p).collect(),
        score: Some(score),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eds::{apply_update, EdsState};
    use crate::model::{Automaton, EdgeRecord, Membership, RedundantPathRecord, StateRecord};
    use crate::objective::Mode;

    fn state(id: &str, cost: f64, risk: f64, membership: Membership) -> StateRecord {
        StateRecord {
            id: id.to_owned(),
            label: String::new(),
            cost,
            risk_factor: risk,
            membership,
        }
    }

    fn edge(source: &str, target: &str) -> EdgeRecord {
        EdgeRecord {
            source: source.to_owned(),
            target: target.to_owned(),
            cost: 0.0,
            membership: Membership::Original,
            redundant_path_id: None,
        }
    }

    fn ids(seq: &[&str]) -> Vec<StateId> {
        seq.iter().map(|s| s.to_string()).collect()
    }

    fn normal_view(automaton: &Automaton) -> EffectiveView {
        apply_update(automaton, &EdsState::new(), automaton.initial(), &BTreeSet::new()).unwrap()
    }

    fn plan_simple(view: &EffectiveView, start: &str, desired: &[&str], mode: Mode) -> PlanResult {
        plan(&PlanRequest {
            view,
            start: start.to_owned(),
            remaining_desired: ids(desired),
            profile: RiskProfile::with_mode(mode),
        })
        .unwrap()
    }

    fn sequences(result: &PlanResult) -> Vec<Vec<StateId>> {
        result
            .optimal_paths
            .iter()
            .map(|p| p.sequence.clone())
            .collect()
    }

    /// Two equal-cost branches a -> {b, c} -> d and a costlier spur a -> e -> d.
    fn diamond() -> Automaton {
        Automaton::new(
            vec![
                state("a", 1.0, 0.0, Membership::Original),
                state("b", 2.0, 0.0, Membership::Original),
                state("c", 2.0, 0.0, Membership::Original),
                state("d", 1.0, 0.0, Membership::Original),
                state("e", 5.0, 0.0, Membership::Original),
            ],
            vec![
                edge("a", "b"),
                edge("a", "c"),
                edge("a", "e"),
                edge("b", "d"),
                edge("c", "d"),
                edge("e", "d"),
            ],
            vec![],
            ids(&["d"]),
            "a".into(),
        )
        .unwrap()
    }

    #[test]
    fn ties_are_returned_in_full() {
        let total = diamond();
        let view = normal_view(&total);
        let result = plan_simple(&view, "a", &["d"], Mode::Eq17);
        assert_eq!(result.verdict, Verdict::Sat);
        assert_eq!(
            sequences(&result),
            vec![ids(&["a", "b", "d"]), ids(&["a", "c", "d"])]
        );
        assert_eq!(result.score.unwrap().cost_sum, 3.0);
        assert_eq!(result.best_path().unwrap().sequence, ids(&["a", "b", "d"]));
    }

    #[test]
    fn single_waypoint_and_error_cases() {
        let total = diamond();
        let view = normal_view(&total);
        let result = plan_simple(&view, "d", &["d"], Mode::Eq17);
        assert_eq!(sequences(&result), vec![ids(&["d"])]);
        assert_eq!(result.score.unwrap().value, 0.0);

        let err = plan(&PlanRequest {
            view: &view,
            start: "zz".into(),
            remaining_desired: ids(&["d"]),
            profile: RiskProfile::with_mode(Mode::Eq17),
        })
        .unwrap_err();
        assert_eq!(err, PlanError::StartNotInView { id: "zz".into() });

        // d cannot be revisited after being left: unsat, not an error.
        let result = plan_simple(&view, "d", &["a"], Mode::Eq17);
        assert_eq!(result.verdict, Verdict::Unsat);
        assert!(result.optimal_paths.is_empty());
        assert!(result.score.is_none());
    }

    #[test]
    fn modes_select_different_optima_over_a_bypass() {
        // a -> b -> c -> g with a cheaper armed bypass a -> r -> c.
        let total = Automaton::new(
            vec![
                state("a", 2.0, 1.0, Membership::Original),
                state("b", 1.0, 2.0, Membership::Original),
                state("c", 1.0, 0.0, Membership::Original),
                state("g", 1.0, 0.0, Membership::Original),
                state("r", 0.5, 0.0, Membership::Redundant),
            ],
            vec![
                edge("a", "b"),
                edge("b", "c"),
                edge("c", "g"),
                EdgeRecord {
                    source: "a".into(),
                    target: "r".into(),
                    cost: 0.0,
                    membership: Membership::Redundant,
                    redundant_path_id: Some("rp1".into()),
                },
                EdgeRecord {
                    source: "r".into(),
                    target: "c".into(),
                    cost: 0.0,
                    membership: Membership::Redundant,
                    redundant_path_id: Some("rp1".into()),
                },
            ],
            vec![RedundantPathRecord {
                id: "rp1".into(),
                sequence: ids(&["a", "r", "c"]),
            }],
            ids(&["g"]),
            "a".into(),
        )
        .unwrap();
        let eds = EdsState::from_pairs([("a", -1)]).unwrap();
        let view = apply_update(&total, &eds, "a", &BTreeSet::new()).unwrap();

        let cheap = plan_simple(&view, "a", &["g"], Mode::CostOnly);
        assert_eq!(sequences(&cheap), vec![ids(&["a", "r", "c", "g"])]);

        // Keeping the bypass in reserve outweighs its cheaper cost.
        let averse = plan_simple(&view, "a", &["g"], Mode::RedundancyFirst);
        assert_eq!(sequences(&averse), vec![ids(&["a", "b", "c", "g"])]);
        assert_eq!(averse.score.unwrap().escape_count, 1);
    }

    #[test]
    fn waypoints_are_visited_in_order_and_end_the_path() {
        // a -> {b, c}, b <-> c, both -> g; desired ⟨c, b⟩ must end at b.
        let total = Automaton::new(
            vec![
                state("a", 1.0, 0.0, Membership::Original),
                state("b", 1.0, 0.0, Membership::Original),
                state("c", 1.0, 0.0, Membership::Original),
                state("g", 1.0, 0.0, Membership::Original),
            ],
            vec![
                edge("a", "b"),
                edge("a", "c"),
                edge("b", "c"),
                edge("c", "b"),
                edge("b", "g"),
                edge("c", "g"),
            ],
            vec![],
            ids(&["g"]),
            "a".into(),
        )
        .unwrap();
        let view = normal_view(&total);
        let result = plan_simple(&view, "a", &["c", "b"], Mode::Eq17);
        assert_eq!(sequences(&result), vec![ids(&["a", "c", "b"])]);
    }

    #[test]
    fn joint_fallback_beats_greedy_segment_concatenation() {
        // Segment optima a->x->m and m->x->b collide on x; the best simple
        // path a->y->m->x->b uses a SUBOPTIMAL first segment.
        let total = Automaton::new(
            vec![
                state("a", 1.0, 0.0, Membership::Original),
                state("x", 1.0, 0.0, Membership::Original),
                state("y", 3.0, 0.0, Membership::Original),
                state("m", 1.0, 0.0, Membership::Original),
                state("z", 4.0, 0.0, Membership::Original),
                state("b", 1.0, 0.0, Membership::Original),
            ],
            vec![
                edge("a", "x"),
                edge("a", "y"),
                edge("x", "m"),
                edge("y", "m"),
                edge("m", "x"),
                edge("m", "z"),
                edge("x", "b"),
                edge("z", "b"),
            ],
            vec![],
            ids(&["m", "b"]),
            "a".into(),
        )
        .unwrap();
        let view = normal_view(&total);
        let result = plan_simple(&view, "a", &["m", "b"], Mode::Eq17);
        assert_eq!(sequences(&result), vec![ids(&["a", "y", "m", "x", "b"])]);
        assert_eq!(result.score.unwrap().cost_sum, 6.0);
    }

    #[test]
    fn enumeration_lists_every_ordered_simple_path() {
        let total = diamond();
        let view = normal_view(&total);
        let all = enumerate_all_paths(&view, &"a".into(), &ids(&["d"]), 10);
        assert_eq!(all.len(), 3);
        let truncated = enumerate_all_paths(&view, &"a".into(), &ids(&["d"]), 2);
        assert!(truncated.is_empty());
        let none = enumerate_all_paths(&view, &"d".into(), &ids(&["a"]), 10);
        assert!(none.is_empty());
    }

    #[test]
    fn plan_matches_enumeration_on_the_diamond() {
        let total = diamond();
        let view = normal_view(&total);
        let result = plan_simple(&view, "a", &["d"], Mode::CostOnly);
        let all = enumerate_all_paths(&view, &"a".into(), &ids(&["d"]), 10);
        let best_cost = all.iter().map(|p| p.total_cost).fold(f64::MAX, f64::min);
        let tied: BTreeSet<_> = all.into_iter().filter(|p| p.total_cost == best_cost).collect();
        assert_eq!(result.optimal_paths, tied);
    }
}
