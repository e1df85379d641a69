//! File formats and exports: JSON automaton and scenario documents, a
//! canonical serialization with a content hash, the line-oriented run-trace
//! format, and DOT graph export for external renderers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{
    Automaton, EdgeRecord, Membership, ModelError, RedundantPathRecord, StateId, StateRecord,
};
use crate::mpc::{RunTrace, RunVerdict};
use crate::sim::{ScenarioEvent, ScenarioScript};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {reason}")]
    Read { path: String, reason: String },
    #[error("cannot write {path}: {reason}")]
    Write { path: String, reason: String },
    /// The document is not well-formed JSON of the expected shape; the
    /// message carries serde's line/column position, also exposed as fields.
    #[error("{path}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    /// The document parsed but violates a model invariant.
    #[error("{path}: {violation}")]
    Invalid {
        path: String,
        violation: ModelError,
    },
}

/// The on-disk shape of an automaton: five JSON sections. Collections are
/// serialized in sorted order, so the rendering is canonical and hashable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomatonDoc {
    pub states: Vec<StateRecord>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default)]
    pub redundant_paths: Vec<RedundantPathRecord>,
    #[serde(default)]
    pub desired: Vec<StateId>,
    pub initial: StateId,
}

impl From<&Automaton> for AutomatonDoc {
    fn from(automaton: &Automaton) -> Self {
        Self {
            states: automaton.states().cloned().collect(),
            edges: automaton.edges().cloned().collect(),
            redundant_paths: automaton.redundant_paths().cloned().collect(),
            desired: automaton.desired().to_vec(),
            initial: automaton.initial().clone(),
        }
    }
}

impl AutomatonDoc {
    pub fn into_automaton(self) -> Result<Automaton, ModelError> {
        Automaton::new(
            self.states,
            self.edges,
            self.redundant_paths,
            self.desired,
            self.initial,
        )
    }
}

fn read_file(path: impl AsRef<FsPath>) -> Result<(String, String), IoError> {
    let display = path.as_ref().display().to_string();
    match fs::read_to_string(&path) {
        Ok(text) => Ok((text, display)),
        Err(e) => Err(IoError::Read {
            path: display,
            reason: e.to_string(),
        }),
    }
}

fn parse_error(origin: &str, e: &serde_json::Error) -> IoError {
    IoError::Parse {
        path: origin.to_owned(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses and validates an automaton document. `origin` names the input in
/// error messages (a path, or a placeholder for in-memory text).
pub fn parse_automaton(text: &str, origin: &str) -> Result<Automaton, IoError> {
    let doc: AutomatonDoc = serde_json::from_str(text).map_err(|e| parse_error(origin, &e))?;
    doc.into_automaton().map_err(|violation| IoError::Invalid {
        path: origin.to_owned(),
        violation,
    })
}

pub fn load_automaton(path: impl AsRef<FsPath>) -> Result<Automaton, IoError> {
    let (text, origin) = read_file(path)?;
    parse_automaton(&text, &origin)
}

/// Parses a scenario script. Structural checks only — validating events
/// against a particular automaton is [`ScenarioScript::validate`]'s job.
pub fn parse_scenario(text: &str, origin: &str) -> Result<ScenarioScript, IoError> {
    serde_json::from_str(text).map_err(|e| parse_error(origin, &e))
}

pub fn load_scenario(path: impl AsRef<FsPath>) -> Result<ScenarioScript, IoError> {
    let (text, origin) = read_file(path)?;
    parse_scenario(&text, &origin)
}

/// Canonical JSON rendering: sorted collections, fixed field order, pretty
/// printed with a trailing newline. `parse ∘ serialize` is the identity.
pub fn serialize_automaton(automaton: &Automaton) -> String {
    let doc = AutomatonDoc::from(automaton);
    let mut text = serde_json::to_string_pretty(&doc).expect("document serialization is total");
    text.push('\n');
    text
}

/// SHA-256 of the canonical serialization, as lowercase hex. Two automata
/// hash equal iff their documents are identical.
pub fn automaton_hash(automaton: &Automaton) -> String {
    let digest = Sha256::digest(serialize_automaton(automaton).as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        write!(hex, "{byte:02x}").expect("writing to a String cannot fail");
    }
    hex
}

/// One line of the trace format. A trace document is one `header`, one
/// `step` per planning instant (with null decision fields on the stranded
/// final instant), and one `footer`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum TraceLine {
    Header {
        automaton_sha256: String,
        scenario: String,
        profile: String,
        lambda: f64,
    },
    Step {
        clock: f64,
        current: StateId,
        applied_events: Vec<ScenarioEvent>,
        planned_path: Option<Vec<StateId>>,
        value: Option<f64>,
        escape_count: Option<usize>,
        committed_state: Option<StateId>,
    },
    Footer {
        verdict: RunVerdict,
        realized_path: Vec<StateId>,
        realized_value: f64,
        /// Largest tie set any planning instant reported.
        tie_set_size: usize,
    },
}

/// Renders a run as the line-oriented trace document (one JSON object per
/// line). Deterministic: identical runs render byte-identically.
pub fn render_trace(automaton_sha256: &str, scenario: &str, trace: &RunTrace) -> String {
    let mut lines = vec![TraceLine::Header {
        automaton_sha256: automaton_sha256.to_owned(),
        scenario: scenario.to_owned(),
        profile: trace.profile.mode.name().to_owned(),
        lambda: trace.profile.lambda,
    }];
    for step in &trace.steps {
        lines.push(TraceLine::Step {
            clock: step.clock,
            current: step.current.clone(),
            applied_events: step.applied_events.clone(),
            planned_path: step
                .outcome
                .as_ref()
                .map(|o| o.planned_path.sequence.clone()),
            value: step.outcome.as_ref().map(|o| o.score.value),
            escape_count: step.outcome.as_ref().map(|o| o.score.escape_count),
            committed_state: step.outcome.as_ref().map(|o| o.committed_state.clone()),
        });
    }
    lines.push(TraceLine::Footer {
        verdict: trace.final_verdict,
        realized_path: trace.realized_path.sequence.clone(),
        realized_value: trace.realized_score.value,
        tie_set_size: trace.max_tie_set_size(),
    });
    let mut text = String::new();
    for line in &lines {
        text.push_str(&serde_json::to_string(line).expect("trace serialization is total"));
        text.push('\n');
    }
    text
}

/// Parses a trace document back into its lines (for tooling and tests).
pub fn parse_trace(text: &str, origin: &str) -> Result<Vec<TraceLine>, IoError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| parse_error(origin, &e)))
        .collect()
}

pub fn write_trace(
    path: impl AsRef<FsPath>,
    automaton_sha256: &str,
    scenario: &str,
    trace: &RunTrace,
) -> Result<(), IoError> {
    let display = path.as_ref().display().to_string();
    fs::write(&path, render_trace(automaton_sha256, scenario, trace)).map_err(|e| {
        IoError::Write {
            path: display,
            reason: e.to_string(),
        }
    })
}

fn dot_quote(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders the automaton as a DOT digraph: original states and edges solid,
/// redundant ones dashed (grouped per bypass), states the run saw fail
/// drawn with the `diagonals` style, and the realized path of the optional
/// trace highlighted. Output ordering is deterministic.
pub fn export_dot(total: &Automaton, trace: Option<&RunTrace>) -> String {
    let failed: std::collections::BTreeSet<&StateId> = trace
        .map(|t| {
            t.wall_events
                .iter()
                .filter(|e| e.value == 1)
                .map(|e| &e.state)
                .collect()
        })
        .unwrap_or_default();
    let realized: Vec<&StateId> = trace
        .map(|t| t.realized_path.sequence.iter().collect())
        .unwrap_or_default();
    let realized_edges: std::collections::BTreeSet<(&StateId, &StateId)> = realized
        .windows(2)
        .map(|w| (w[0], w[1]))
        .collect();

    let mut dot = String::new();
    dot.push_str("digraph automaton {\n");
    dot.push_str("  rankdir=LR;\n");
    dot.push_str("  node [shape=ellipse];\n");

    for record in total.states() {
        let mut attrs = Vec::new();
        let label = if record.label.is_empty() {
            record.id.clone()
        } else {
            format!("{}\\n{}", record.id, record.label)
        };
        attrs.push(format!("label=\"{}\"", dot_quote(&label)));
        let mut styles = Vec::new();
        if record.membership == Membership::Redundant {
            styles.push("dashed");
        }
        if failed.contains(&record.id) {
            styles.push("diagonals");
        }
        if !styles.is_empty() {
            attrs.push(format!("style=\"{}\"", styles.join(",")));
        }
        if realized.contains(&&record.id) {
            attrs.push("color=forestgreen".to_owned());
            attrs.push("penwidth=2".to_owned());
        }
        let _ = writeln!(
            dot,
            "  \"{}\" [{}];",
            dot_quote(&record.id),
            attrs.join(" ")
        );
    }

    let edge_line = |edge: &EdgeRecord, dot: &mut String| {
        let mut attrs = Vec::new();
        if edge.membership == Membership::Redundant {
            attrs.push("style=dashed".to_owned());
        }
        if realized_edges.contains(&(&edge.source, &edge.target)) {
            attrs.push("color=forestgreen".to_owned());
            attrs.push("penwidth=2".to_owned());
        }
        let rendered = if attrs.is_empty() {
            String::new()
        } else {
            format!(" [{}]", attrs.join(" "))
        };
        let _ = writeln!(
            dot,
            "  \"{}\" -> \"{}\"{};",
            dot_quote(&edge.source),
            dot_quote(&edge.target),
            rendered
        );
    };

    dot.push('\n');
    for edge in total.edges() {
        if edge.membership == Membership::Original {
            edge_line(edge, &mut dot);
        }
    }
    // Redundant edges grouped per bypass, each group under a comment.
    for record in total.redundant_paths() {
        let _ = writeln!(dot, "\n  /* redundant path {} */", dot_quote(&record.id));
        for (source, target) in record.edge_pairs() {
            let edge = total
                .edge(source, target)
                .expect("path pairs are backed by edges");
            edge_line(edge, &mut dot);
        }
    }
    // Redundant edges tied to no record (legal but untraversable).
    let grouped: std::collections::BTreeSet<(StateId, StateId)> = total
        .redundant_paths()
        .flat_map(|r| r.edge_pairs().map(|(s, t)| (s.clone(), t.clone())))
        .collect();
    let loose: Vec<&EdgeRecord> = total
        .edges()
        .filter(|e| {
            e.membership == Membership::Redundant
                && !grouped.contains(&(e.source.clone(), e.target.clone()))
        })
        .collect();
    if !loose.is_empty() {
        dot.push_str("\n  /* unattached redundant edges */\n");
        for edge in loose {
            edge_line(edge, &mut dot);
        }
    }
    dot.push_str("}\n");
    dot
}

pub fn write_dot(
    path: impl AsRef<FsPath>,
    total: &Automaton,
    trace: Option<&RunTrace>,
) -> Result<(), IoError> {
    let display = path.as_ref().display().to_string();
    fs::write(&path, export_dot(total, trace)).map_err(|e| IoError::Write {
        path: display,
        reason: e.to_string(),
    })
}
