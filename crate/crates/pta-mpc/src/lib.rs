//! Risk-averse model-predictive control over priced timed automata that
//! carry built-in redundancy.
//!
//! The model is a cost-weighted digraph split into an original part and a
//! redundant part (bypass chains between original anchor states). At run
//! time, per-state emergency signals mark failures or request detours; the
//! update operator derives the effective view the planner sees, the planner
//! enumerates cost/risk-optimal paths to the desired states under one of
//! three selection policies, and the receding-horizon controller commits
//! one state at a time, replanning as signals arrive.

pub mod eds;
pub mod io;
pub mod model;
pub mod mpc;
pub mod objective;
pub mod oracle;
pub mod planner;
pub mod sim;
pub mod testgen;

pub use eds::{
    active_redundant_paths, apply_update, classify_case, Case, EdsState, EffectiveView,
    UpdateError,
};
pub use io::{
    automaton_hash, export_dot, load_automaton, load_scenario, parse_automaton, parse_scenario,
    parse_trace, render_trace, serialize_automaton, write_dot, write_trace, AutomatonDoc,
    IoError, TraceLine,
};
pub use objective::{
    compare, escape_count, policy_for_mode, score_path, uncertainty_ratio, Mode, ObjectiveError,
    PathScore, PolicyRegistry, RiskProfile, SelectionPolicy, DEFAULT_LAMBDA, EPSILON,
};
pub use oracle::{
    oracle_plan, oracle_update, verify_plan, OracleError, OracleReport, ORACLE_MAX_STATES,
};
pub use planner::{
    enumerate_all_paths, plan, PlanError, PlanRequest, PlanResult, Verdict, MAX_VIEW_STATES,
};
pub use model::{
    end_parity, Automaton, EdgeRecord, Membership, ModelError, Path, PathId,
    RedundantPathRecord, StateId, StateRecord,
};
pub use mpc::{
    run_to_completion, step, ControllerMemory, MpcError, RunTrace, RunVerdict, StepOutcome,
    TraceStep,
};
pub use sim::{
    compare_profiles, run_scenario, ComparisonReport, ProfileOutcome, ScenarioEvent,
    ScenarioScript, ScriptError, SimError,
};
pub use testgen::{
    random_instance, random_signals, random_walk, run_battery, run_planner_campaign,
    run_update_campaign, BatteryReport, CampaignStats,
};
