//! Cost and risk evaluation of candidate paths: the weighted value
//! function, per-state uncertainty ratios, the redundancy-escape count used
//! for risk-averse selection, and the pluggable selection policies that
//! order candidate scores.
//!
//! A path's value is `cost_sum + lambda * risk_sum`, where `cost_sum` adds
//! the state costs of every state but the last and `risk_sum` adds
//! `(h_i / x_i) * P_i` over the same states — `h_i` the user risk factor,
//! `x_i` the state's out-degree centrality in the TOTAL automaton, `P_i`
//! the state cost. The escape count is the number of armed redundant edges
//! leaving the path without being part of it: how many bypasses stay in
//! reserve if something fails en route.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eds::EffectiveView;
use crate::model::{Automaton, ModelError, Path, StateId, StateRecord};

/// Comparison tolerance for floating-point score components. Distinct
/// candidate values on realistic inputs differ by far more than this, while
/// accumulated rounding error stays far below it.
pub const EPSILON: f64 = 1e-9;

/// Default risk weight: risk counts at par with cost.
pub const DEFAULT_LAMBDA: f64 = 1.0;

/// Selection mode names. These are the profile strings the CLI accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Order candidates by bare cost sum; risk is reported but ignored.
    CostOnly,
    /// Order candidates by the λ-weighted cost-plus-risk value.
    Eq17,
    /// Order by escape count (more is better), then by weighted value.
    RedundancyFirst,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::CostOnly, Mode::Eq17, Mode::RedundancyFirst];

    /// The wire/CLI name of the mode.
    pub fn name(self) -> &'static str {
        policy_for_mode(self).name()
    }
}

/// Errors from scoring. Input errors (infeasible path, unknown state) are
/// distinct from the domain error for dead-end interior states.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum ObjectiveError {
    #[error("risk weight must be finite and nonnegative, got {value}")]
    InvalidLambda { value: f64 },
    #[error("state {id} has no outgoing edges; only the final path state may be terminal")]
    TerminalInterior { id: StateId },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// How candidate paths are valued and compared: the risk weight and the
/// selection mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskProfile {
    /// Nonnegative weight on the risk sum. Cost and risk count at par by
    /// default.
    pub lambda: f64,
    pub mode: Mode,
}

impl RiskProfile {
    pub fn new(mode: Mode, lambda: f64) -> Result<Self, ObjectiveError> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(ObjectiveError::InvalidLambda { value: lambda });
        }
        Ok(Self { lambda, mode })
    }

    /// The given mode with the default risk weight.
    pub fn with_mode(mode: Mode) -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            mode,
        }
    }

    /// The weighted value of the given component sums.
    pub fn value(&self, cost_sum: f64, risk_sum: f64) -> f64 {
        cost_sum + self.lambda * risk_sum
    }
}

/// A scored path: component sums, the weighted value, and the escape count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathScore {
    /// Sum of state costs over all but the last path state.
    pub cost_sum: f64,
    /// Sum of (risk factor / centrality) * cost over the same states.
    pub risk_sum: f64,
    /// cost_sum + lambda * risk_sum, under the profile that produced it.
    pub value: f64,
    /// Armed redundant edges leaving the path that the path does not use.
    pub escape_count: usize,
}

impl PathScore {
    /// Assembles a score from accumulated sums; `value` is derived here so
    /// the identity `value = cost_sum + lambda * risk_sum` holds exactly.
    pub fn from_sums(
        cost_sum: f64,
        risk_sum: f64,
        escape_count: usize,
        profile: &RiskProfile,
    ) -> Self {
        Self {
            cost_sum,
            risk_sum,
            value: profile.value(cost_sum, risk_sum),
            escape_count,
        }
    }
}

/// Per-state risk ratio `h / x`: the user risk factor divided by the
/// state's out-degree centrality in the total automaton. Terminal states
/// (centrality 0) have no ratio; callers must exclude them.
pub fn uncertainty_ratio(state: &StateRecord, centrality: usize) -> Result<f64, ObjectiveError> {
    if centrality == 0 {
        return Err(ObjectiveError::TerminalInterior {
            id: state.id.clone(),
        });
    }
    Ok(state.risk_factor / centrality as f64)
}

/// Scores `path` in `view`: cost and risk sums over all but the last state
/// (centralities and state records read from `total`), the weighted value,
/// and the escape count against the view's armed redundant edges.
pub fn score_path(
    total: &Automaton,
    view: &EffectiveView,
    path: &Path,
    profile: &RiskProfile,
) -> Result<PathScore, ObjectiveError> {
    if !view.automaton.is_feasible_path(&path.sequence)? {
        return Err(ModelError::InfeasiblePath(path.sequence.clone()).into());
    }
    let mut cost_sum = 0.0;
    let mut risk_sum = 0.0;
    for id in path.sequence.iter().rev().skip(1) {
        let record = total
            .state(id)
            .ok_or_else(|| ModelError::UnknownState { id: id.clone() })?;
        let centrality = total.out_degree_centrality(id)?;
        cost_sum += record.cost;
        risk_sum += uncertainty_ratio(record, centrality)? * record.cost;
    }
    let escape_count = escape_count(view, &path.sequence);
    Ok(PathScore::from_sums(
        cost_sum,
        risk_sum,
        escape_count,
        profile,
    ))
}

/// Number of armed redundant edges whose source lies on `sequence` (final
/// state excluded) and which are not edges of `sequence` itself.
pub fn escape_count(view: &EffectiveView, sequence: &[StateId]) -> usize {
    if sequence.len() < 2 {
        return 0;
    }
    let on_path: BTreeSet<&StateId> = sequence[..sequence.len() - 1].iter().collect();
    let path_edges: BTreeSet<(&StateId, &StateId)> = sequence
        .iter()
        .zip(sequence.iter().skip(1))
        .collect();
    view.armed_edges()
        .iter()
        .filter(|(s, t)| on_path.contains(s) && !path_edges.contains(&(s, t)))
        .count()
}

/// Orders `a` against `b` under the profile's mode; `Less` means `a` is
/// preferred. `Equal` means tied on every key the mode considers — such
/// candidates together form the returned optimal set.
pub fn compare(a: &PathScore, b: &PathScore, profile: &RiskProfile) -> Ordering {
    policy_for_mode(profile.mode).compare(a, b)
}

fn cmp_approx(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= EPSILON {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// A named rule for ordering candidate scores. One implementation per mode;
/// the registry hands them out by name for CLI dispatch.
pub trait SelectionPolicy: Send + Sync {
    /// The wire/CLI name.
    fn name(&self) -> &'static str;
    /// The mode tag this policy implements.
    fn mode(&self) -> Mode;
    /// One-line description for help text.
    fn describe(&self) -> &'static str;
    /// Orders `a` against `b`; `Less` means `a` is preferred.
    fn compare(&self, a: &PathScore, b: &PathScore) -> Ordering;
}

struct CostOnlyPolicy;

impl SelectionPolicy for CostOnlyPolicy {
    fn name(&self) -> &'static str {
        "cost_only"
    }

    fn mode(&self) -> Mode {
        Mode::CostOnly
    }

    fn describe(&self) -> &'static str {
        "minimize plain cost; ignore risk and redundancy"
    }

    fn compare(&self, a: &PathScore, b: &PathScore) -> Ordering {
        cmp_approx(a.cost_sum, b.cost_sum)
    }
}

struct WeightedValuePolicy;

impl SelectionPolicy for WeightedValuePolicy {
    fn name(&self) -> &'static str {
        "eq17"
    }

    fn mode(&self) -> Mode {
        Mode::Eq17
    }

    fn describe(&self) -> &'static str {
        "minimize cost + lambda * risk"
    }

    fn compare(&self, a: &PathScore, b: &PathScore) -> Ordering {
        cmp_approx(a.value, b.value)
    }
}

struct RedundancyFirstPolicy;

impl SelectionPolicy for RedundancyFirstPolicy {
    fn name(&self) -> &'static str {
        "redundancy_first"
    }

    fn mode(&self) -> Mode {
        Mode::RedundancyFirst
    }

    fn describe(&self) -> &'static str {
        "maximize escape routes, then minimize cost + lambda * risk"
    }

    fn compare(&self, a: &PathScore, b: &PathScore) -> Ordering {
        b.escape_count
            .cmp(&a.escape_count)
            .then_with(|| cmp_approx(a.value, b.value))
    }
}

/// The policy implementing `mode`.
pub fn policy_for_mode(mode: Mode) -> &'static dyn SelectionPolicy {
    match mode {
        Mode::CostOnly => &CostOnlyPolicy,
        Mode::Eq17 => &WeightedValuePolicy,
        Mode::RedundancyFirst => &RedundancyFirstPolicy,
    }
}

/// Name-indexed lookup of the built-in selection policies.
pub struct PolicyRegistry {
    policies: Vec<&'static dyn SelectionPolicy>,
}

impl PolicyRegistry {
    /// All built-in policies, in mode-declaration order.
    pub fn builtin() -> Self {
        Self {
            policies: Mode::ALL.iter().map(|m| policy_for_mode(*m)).collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<&'static dyn SelectionPolicy> {
        self.policies.iter().copied().find(|p| p.name() == name)
    }

    pub fn policies(&self) -> impl Iterator<Item = &'static dyn SelectionPolicy> + '_ {
        self.policies.iter().copied()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.policies.iter().map(|p| p.name()).collect()
    }
}
