use contextrec::graph::{ContextGraph, Entity};
use contextrec::ontology::{load_default_ontology, load_ontology, DEFAULT_ONTOLOGY};
use contextrec::AspectId;
use proptest::prelude::*;

#[test]
fn default_ontology_round_trips() {
    let a = load_ontology(DEFAULT_ONTOLOGY, true).unwrap();
    let text = a.serialize();
    let b = load_ontology(&text, true).unwrap();
    assert_eq!(a, b);
    assert_eq!(b.serialize(), text);
    assert_eq!(a, load_default_ontology());
}

fn label_lines(n: usize) -> String {
    let mut s = String::new();
    for i in 0..n {
        s.push_str(&format!("[[aspects.WA]]\nid = \"act{i}\"\nname = \"Activity {i}\"\n"));
        if i > 0 {
            s.push_str(&format!("parent = \"act{}\"\n", i / 2));
        }
    }
    s
}

proptest! {
    #[test]
    fn generated_ontologies_round_trip(n in 1usize..30, version in "[a-z0-9.]{1,8}") {
        let doc = format!("version = \"{version}\"\n{}", label_lines(n));
        let a = load_ontology(&doc, true).unwrap();
        prop_assert_eq!(a.vocabulary(AspectId::Wa).len(), n);
        let b = load_ontology(&a.serialize(), true).unwrap();
        prop_assert_eq!(a, b);
    }

    /// Random edit sequences never leave a relation pointing at a missing
    /// entity, and export/import is exact after every step.
    #[test]
    fn graph_referential_integrity(ops in prop::collection::vec((0u8..4, 0usize..6, 0usize..6, 0usize..3), 1..60)) {
        let mut g = ContextGraph::new();
        let labels = ["Attend", "LocatedIn", "With"];
        for (op, a, b, l) in ops {
            let (ida, idb) = (format!("e{a}"), format!("e{b}"));
            match op {
                0 => g.upsert_entity(Entity::new(&ida, "thing").with_attr("n", a.to_string())).unwrap(),
                1 => { g.remove_entity(&ida); }
                2 => {
                    let ok = g.assert_relation(&ida, labels[l], &idb);
                    prop_assert_eq!(ok.is_ok(), g.entity(&ida).is_some() && g.entity(&idb).is_some());
                }
                _ => { g.retract_relation(&ida, labels[l], &idb); }
            }
            for r in g.relations() {
                prop_assert!(g.entity(&r.source).is_some() && g.entity(&r.target).is_some());
            }
            let back = ContextGraph::import(&g.export()).unwrap();
            prop_assert_eq!(back.export(), g.export());
        }
    }
}

#[test]
fn lesson_scene_matches_ontology() {
    let g = ContextGraph::lesson_scene();
    g.check_against(&load_default_ontology()).unwrap();
    assert!(g.relations().any(|r| r.source == "shen" && r.label == "Attend" && r.target == "lesson"));
}
