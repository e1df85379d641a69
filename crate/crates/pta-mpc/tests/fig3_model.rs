//! Structural checks of the shipped factory-line fixture: seventeen states
//! (thirteen original, four redundant), twenty-two edges, four bypasses.

use pta_mpc::{load_automaton, Membership};

fn fixture() -> pta_mpc::Automaton {
    load_automaton(format!("{}/fixtures/fig3.json", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn shape_counts_match_the_factory_line() {
    let total = fixture();
    assert_eq!(total.state_count(), 17);
    assert_eq!(total.edge_count(), 22);
    assert_eq!(total.redundant_paths().count(), 4);
    assert_eq!(total.desired(), ["q6".to_owned()]);
    assert_eq!(total.initial(), "q1");

    let original = total
        .states()
        .filter(|s| s.membership == Membership::Original)
        .count();
    assert_eq!(original, 13);
    assert_eq!(total.state_count() - original, 4);

    let redundant_edges = total
        .edges()
        .filter(|e| e.membership == Membership::Redundant)
        .count();
    assert_eq!(redundant_edges, 8);
}

#[test]
fn out_degree_centralities_are_exact() {
    let total = fixture();
    let expected: &[(&str, usize)] = &[
        ("q1", 3),
        ("q2", 2),
        ("q3", 1),
        ("q4", 2),
        ("q5", 1),
        ("q6", 0),
        ("q7", 1),
        ("q8", 1),
        ("q9", 1),
        ("q10", 1),
        ("q11", 1),
        ("q12", 3),
        ("q13", 1),
        ("q14", 1),
        ("q15", 1),
        ("q16", 1),
        ("q17", 1),
    ];
    let centralities = total.centralities();
    assert_eq!(centralities.len(), 17);
    for (id, x) in expected {
        assert_eq!(centralities[*id], *x, "centrality of {id}");
    }
    // Out-degrees over all states sum to the edge count.
    assert_eq!(centralities.values().sum::<usize>(), total.edge_count());
}

#[test]
fn states_carry_uniform_costs_and_station_labels() {
    let total = fixture();
    for record in total.states() {
        assert_eq!(record.cost, 1.0, "cost of {}", record.id);
        assert_eq!(record.risk_factor, 1.0, "risk factor of {}", record.id);
        assert!(!record.label.is_empty(), "label of {}", record.id);
    }
    assert_eq!(total.state("q3").unwrap().label, "CNC1");
    assert_eq!(total.state("q6").unwrap().label, "Target buffer");
    assert_eq!(total.state("q12").unwrap().label, "CNC3");
    assert_eq!(total.state("q15").unwrap().label, "Emergency buffer 3");
}

#[test]
fn bypasses_anchor_on_original_states_with_redundant_interiors() {
    let total = fixture();
    let expected: &[(&str, &[&str])] = &[
        ("rp1", &["q2", "q14", "q7"]),
        ("rp2", &["q4", "q15", "q9"]),
        ("rp3", &["q12", "q16", "q9"]),
        ("rp4", &["q12", "q17", "q9"]),
    ];
    for (id, sequence) in expected {
        let record = total.redundant_path(id).unwrap();
        assert_eq!(record.sequence, *sequence);
        assert_eq!(
            total.state(record.start_anchor()).unwrap().membership,
            Membership::Original
        );
        assert_eq!(
            total.state(record.end_anchor()).unwrap().membership,
            Membership::Original
        );
        for interior in &record.sequence[1..record.sequence.len() - 1] {
            assert_eq!(
                total.state(interior).unwrap().membership,
                Membership::Redundant
            );
        }
    }
}
