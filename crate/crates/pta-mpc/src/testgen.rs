//! Seeded instance families and agreement campaigns.
//!
//! The property suites and the CLI's self-check battery share the same
//! machinery: small random automata, random signal assignments, and drivers
//! that run the fast implementations side by side with the exhaustive
//! references from [`crate::oracle`]. Generated instances are sized so that
//! every derived view stays within [`ORACLE_MAX_STATES`], keeping the
//! references applicable to every case.

use std::collections::BTreeSet;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eds::{apply_update, EdsState, EffectiveView};
use crate::model::{
    Automaton, EdgeRecord, Membership, RedundantPathRecord, StateId, StateRecord,
};
use crate::objective::{Mode, ObjectiveError, RiskProfile};
use crate::oracle::{oracle_plan, oracle_update, verify_plan, ORACLE_MAX_STATES};
use crate::planner::{plan, PlanRequest};

/// Stream separators so one campaign seed draws independent instance,
/// signal, and walk randomness.
const SIGNAL_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const WALK_SALT: u64 = 0x6a09_e667_f3bc_c909;

/// Palettes for generated state weights. Small sets on purpose: repeated
/// values produce genuine score ties, which are the hard cases. Risk
/// factors are drawn as fixed multiples of the state cost; both palettes
/// hold dyadic values so the ratio is exact.
const COSTS: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 2.5];
const RISK_RATIOS: [f64; 3] = [0.5, 1.0, 2.0];
const LAMBDAS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

/// Hard bounds on the generated family: instance size and directed edge
/// density (edges over `n·(n−1)`).
const MAX_INSTANCE_STATES: usize = 12;
const MAX_EDGE_DENSITY: f64 = 0.4;

fn pick<T: Copy>(rng: &mut ChaCha8Rng, options: &[T]) -> T {
    options[rng.random_range(0..options.len())]
}

fn weighted_record(rng: &mut ChaCha8Rng, id: StateId, membership: Membership) -> StateRecord {
    let cost = pick(rng, &COSTS);
    StateRecord {
        id,
        label: String::new(),
        cost,
        risk_factor: pick(rng, &RISK_RATIOS) * cost,
        membership,
    }
}

fn original_edge(source: &StateId, target: &StateId) -> EdgeRecord {
    EdgeRecord {
        source: source.clone(),
        target: target.clone(),
        cost: 0.0,
        membership: Membership::Original,
        redundant_path_id: None,
    }
}

/// A random but always-valid instance, kept inside the campaign family
/// bounds: at most [`MAX_INSTANCE_STATES`] states, edge density at most
/// [`MAX_EDGE_DENSITY`], at most three bypass chains (one or two interior
/// states each), and risk factors that are fixed multiples of the state
/// cost. The original part is a line `s0 → … → s{n-1}` plus forward
/// shortcuts and occasional back edges (cycles); the goal is the last line
/// state, and some instances add one interior waypoint.
pub fn random_instance(seed: u64) -> Automaton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Up to three bypasses with two interiors each come on top of the line.
    let n = rng.random_range(4..=MAX_INSTANCE_STATES - 6);
    let ids: Vec<StateId> = (0..n).map(|i| format!("s{i}")).collect();

    let mut states: Vec<StateRecord> = ids
        .iter()
        .map(|id| weighted_record(&mut rng, id.clone(), Membership::Original))
        .collect();

    // Bypass chains first: their interiors count toward the density budget.
    let mut edges: Vec<EdgeRecord> = Vec::new();
    let mut redundant_paths: Vec<RedundantPathRecord> = Vec::new();
    for p in 0..rng.random_range(0..=3u32) {
        let a = rng.random_range(0..n - 1);
        let b = rng.random_range(a + 1..n);
        let path_id = format!("bp{p}");
        let mut sequence = vec![ids[a].clone()];
        for k in 0..rng.random_range(1..=2u32) {
            let interior: StateId = format!("r{p}{k}");
            states.push(weighted_record(
                &mut rng,
                interior.clone(),
                Membership::Redundant,
            ));
            sequence.push(interior);
        }
        sequence.push(ids[b].clone());
        for pair in sequence.windows(2) {
            edges.push(EdgeRecord {
                source: pair[0].clone(),
                target: pair[1].clone(),
                cost: 0.0,
                membership: Membership::Redundant,
                redundant_path_id: Some(path_id.clone()),
            });
        }
        redundant_paths.push(RedundantPathRecord {
            id: path_id,
            sequence,
        });
    }

    // Original line, then optional shortcuts and back edges under a budget
    // that keeps the whole instance below the density bound.
    for pair in ids.windows(2) {
        edges.push(original_edge(&pair[0], &pair[1]));
    }
    let budget = (MAX_EDGE_DENSITY * (states.len() * (states.len() - 1)) as f64) as usize;
    for i in 0..n {
        for j in i + 2..n {
            if edges.len() < budget && rng.random_bool(0.35) {
                edges.push(original_edge(&ids[i], &ids[j]));
            }
        }
    }
    for i in 2..n {
        if edges.len() < budget && rng.random_bool(0.1) {
            let j = rng.random_range(0..=i - 2);
            edges.push(original_edge(&ids[i], &ids[j]));
        }
    }

    let mut desired = Vec::new();
    if rng.random_bool(0.4) {
        desired.push(ids[rng.random_range(1..n - 1)].clone());
    }
    desired.push(ids[n - 1].clone());

    Automaton::new(states, edges, redundant_paths, desired, ids[0].clone())
        .unwrap_or_else(|e| panic!("seed {seed}: generated instance is invalid: {e}"))
}

/// A random signal assignment over the instance's states: mostly normal,
/// with a modest rate of failures (`+1`) and detour requests (`-1`).
pub fn random_signals(seed: u64, total: &Automaton) -> EdsState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eds = EdsState::new();
    for id in total.state_ids() {
        let roll: f64 = rng.random();
        let value = if roll < 0.12 {
            1
        } else if roll < 0.24 {
            -1
        } else {
            0
        };
        if value != 0 {
            eds.set(id.clone(), value).expect("±1 is a legal signal value");
        }
    }
    eds
}

/// A short random edge walk from the initial state: the states a controller
/// might already have traversed, in visiting order.
pub fn random_walk(seed: u64, total: &Automaton) -> Vec<StateId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut walk = vec![total.initial().clone()];
    for _ in 0..rng.random_range(0..=3u32) {
        let nexts = total.out_neighbors(walk.last().expect("walk starts nonempty"));
        if nexts.is_empty() {
            break;
        }
        walk.push(nexts[rng.random_range(0..nexts.len())].clone());
    }
    walk
}

/// Runs one update case on both implementations. `Ok(Some(view))` when both
/// produced the same view, `Ok(None)` when both agreed on an error, and a
/// description of the disagreement otherwise.
fn check_update(
    total: &Automaton,
    eds: &EdsState,
    root: &str,
    traversed: &BTreeSet<StateId>,
    instance: &str,
) -> Result<Option<EffectiveView>, String> {
    let subject = apply_update(total, eds, root, traversed);
    let reference = oracle_update(total, eds, root, traversed);
    match (subject, reference) {
        (Ok(s), Ok(r)) if s == r => Ok(Some(s)),
        (Ok(s), Ok(r)) => Err(format!(
            "{instance}: update diverges\n  fast:      {s:?}\n  reference: {r:?}"
        )),
        (Err(s), Err(r)) if s == r => Ok(None),
        (Err(s), Err(r)) => Err(format!(
            "{instance}: update errors diverge: {s} vs {r}"
        )),
        (Ok(_), Err(r)) => Err(format!(
            "{instance}: the reference rejected what the fast update accepted: {r}"
        )),
        (Err(s), Ok(_)) => Err(format!(
            "{instance}: the fast update rejected what the reference accepted: {s}"
        )),
    }
}

/// Runs one planning case on both implementations across all three modes.
/// Returns the number of checks performed, or the first disagreement.
fn check_plans(
    view: &EffectiveView,
    start: &StateId,
    remaining_desired: &[StateId],
    lambda: f64,
    instance: &str,
) -> Result<usize, String> {
    for mode in Mode::ALL {
        let profile =
            RiskProfile::new(mode, lambda).map_err(|e| format!("{instance}: {e}"))?;
        let label = format!("{instance} [{}]", mode.name());
        let subject = plan(&PlanRequest {
            view,
            start: start.clone(),
            remaining_desired: remaining_desired.to_vec(),
            profile,
        })
        .map_err(|e| format!("{label}: the planner refused the request: {e}"))?;
        let reference = oracle_plan(view, start, remaining_desired, &profile)
            .map_err(|e| format!("{label}: the reference refused the request: {e}"))?;
        let report = verify_plan(label, &reference, &subject);
        if !report.equal {
            return Err(format!("planning diverges: {report:#?}"));
        }
    }
    Ok(Mode::ALL.len())
}

/// The desired states still ahead after the walk, under the controller's
/// rule: a waypoint is consumed only by standing on it while it is next.
fn remaining_after(walk: &[StateId], desired: &[StateId]) -> Vec<StateId> {
    let mut next = 0;
    for visited in walk {
        while next < desired.len() && desired[next] == *visited {
            next += 1;
        }
    }
    desired[next..].to_vec()
}

/// Counters from a campaign run. A campaign panics on the first divergence,
/// so returned stats always describe an all-agreeing run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CampaignStats {
    /// Update cases where both sides produced (the same) view.
    pub views: usize,
    /// Update cases where both sides agreed on an error (e.g. failed root).
    pub rejected: usize,
    /// Planning checks performed (one per view and mode).
    pub plans: usize,
    /// Views skipped by the planner driver because they exceed the
    /// reference size limit. Zero for generated instances.
    pub skipped_plans: usize,
}

/// Drives the update operator against its exhaustive reference: one fresh
/// case (root at the initial state) and one mid-walk case per seed. Panics
/// on the first divergence, naming the seed.
pub fn run_update_campaign(seeds: Range<u64>) -> CampaignStats {
    let mut stats = CampaignStats::default();
    for seed in seeds {
        let total = random_instance(seed);
        let eds = random_signals(seed ^ SIGNAL_SALT, &total);
        let walk = random_walk(seed ^ WALK_SALT, &total);
        let cases = [
            (total.initial().clone(), BTreeSet::new()),
            (
                walk.last().expect("walk starts nonempty").clone(),
                walk.iter().cloned().collect(),
            ),
        ];
        for (root, traversed) in cases {
            let instance = format!("seed {seed}, root {root}");
            match check_update(&total, &eds, &root, &traversed, &instance) {
                Ok(Some(_)) => stats.views += 1,
                Ok(None) => stats.rejected += 1,
                Err(message) => panic!("{message}"),
            }
        }
    }
    stats
}

/// Drives the planner against its exhaustive reference over the fresh view
/// and the mid-walk view of each seed, across all three modes. Panics on
/// the first divergence, naming the seed.
pub fn run_planner_campaign(seeds: Range<u64>) -> CampaignStats {
    let mut stats = CampaignStats::default();
    for seed in seeds {
        let total = random_instance(seed);
        let eds = random_signals(seed ^ SIGNAL_SALT, &total);
        let walk = random_walk(seed ^ WALK_SALT, &total);
        let lambda = LAMBDAS[(seed % LAMBDAS.len() as u64) as usize];
        let fresh = vec![total.initial().clone()];
        for walk in [&fresh, &walk] {
            let root = walk.last().expect("walk starts nonempty");
            let traversed: BTreeSet<StateId> = walk.iter().cloned().collect();
            let view = match apply_update(&total, &eds, root, &traversed) {
                Ok(view) => view,
                Err(_) => {
                    stats.rejected += 1;
                    continue;
                }
            };
            stats.views += 1;
            if view.automaton.state_count() > ORACLE_MAX_STATES {
                stats.skipped_plans += 1;
                continue;
            }
            let remaining = remaining_after(walk, total.desired());
            let instance = format!("seed {seed}, root {root}, lambda {lambda}");
            match check_plans(&view, root, &remaining, lambda, &instance) {
                Ok(count) => stats.plans += count,
                Err(message) => panic!("{message}"),
            }
        }
    }
    stats
}

/// Outcome of the deterministic self-check battery. Divergences are
/// collected rather than panicking so a CLI caller can report them.
#[derive(Clone, Debug, Default)]
pub struct BatteryReport {
    /// Update cases checked against the reference.
    pub update_cases: usize,
    /// Planning checks performed (one per surviving view and mode).
    pub plan_cases: usize,
    /// Views whose planning check was skipped because they exceed the
    /// reference size limit.
    pub skipped_plans: usize,
    /// Human-readable description of every disagreement found.
    pub divergences: Vec<String>,
}

impl BatteryReport {
    pub fn is_clean(&self) -> bool {
        self.divergences.is_empty()
    }
}

/// Deterministic verification battery over a user-supplied automaton: the
/// all-normal assignment, every single-state failure, every single-state
/// detour request, and every failure pair, each checked against the
/// exhaustive references from the initial state. Views larger than the
/// reference size limit skip the planning check (counted, not hidden).
pub fn run_battery(total: &Automaton, lambda: f64) -> Result<BatteryReport, ObjectiveError> {
    // Validate once up front so the battery itself cannot fail mid-run.
    RiskProfile::new(Mode::Eq17, lambda)?;

    let single = |state: &StateId, value: i8| {
        let mut eds = EdsState::new();
        eds.set(state.clone(), value).expect("±1 is a legal signal value");
        eds
    };
    let non_initial: Vec<&StateId> = total
        .state_ids()
        .filter(|id| *id != total.initial())
        .collect();

    let mut cases: Vec<(String, EdsState)> =
        vec![("all signals normal".to_owned(), EdsState::new())];
    for state in &non_initial {
        cases.push((format!("failure at {state}"), single(state, 1)));
    }
    for state in total.state_ids() {
        cases.push((format!("detour request at {state}"), single(state, -1)));
    }
    for (i, a) in non_initial.iter().enumerate() {
        for b in &non_initial[i + 1..] {
            let mut eds = single(a, 1);
            eds.set((*b).clone(), 1).expect("±1 is a legal signal value");
            cases.push((format!("failures at {a} and {b}"), eds));
        }
    }

    let mut report = BatteryReport::default();
    let no_traversal = BTreeSet::new();
    for (instance, eds) in cases {
        report.update_cases += 1;
        let view = match check_update(total, &eds, total.initial(), &no_traversal, &instance) {
            Ok(Some(view)) => view,
            Ok(None) => continue,
            Err(message) => {
                report.divergences.push(message);
                continue;
            }
        };
        if view.automaton.state_count() > ORACLE_MAX_STATES {
            report.skipped_plans += 1;
            continue;
        }
        match check_plans(&view, total.initial(), total.desired(), lambda, &instance) {
            Ok(count) => report.plan_cases += count,
            Err(message) => report.divergences.push(message),
        }
    }
    Ok(report)
}
