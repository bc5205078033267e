use std::collections::BTreeMap;

use lgmono::alignment::{entry_monodromy, label_solutions};
use lgmono::catalog::{self, Catalog};
use lgmono::continuation::{MonodromyPermutation, PathMeta, Permutation, TrackOptions};
use lgmono::quiver::{
    build_quiver, divisor_subquiver, is_contained, monodromy_quiver, ArrowSpec, LabeledQuiver,
    QuiverEdge, QuiverError,
};
use lgmono::solver::{solve_all, SolveOptions};
use lgmono::toric::{self, ToricDivisor};

#[path = "common/figures.rs"]
mod figures;

use figures::{built_edges, figure_edges, FIGURES};

#[test]
fn collection_quivers_reproduce_drawn_figures() {
    let cat = Catalog::builtin();
    for (id, drawn) in FIGURES {
        let entry = cat.get(id).unwrap();
        assert_eq!(built_edges(entry), figure_edges(id, drawn), "{id}");
    }
}

#[test]
fn edge_counts() {
    let expected = [
        ("p2", 6),
        ("p1xp1", 8),
        ("bl1_p2", 11),
        ("bl2_p2", 14),
        ("bl3_p2", 12),
        ("p2bundle_k0", 18),
        ("p2bundle_k1", 17),
        ("p2bundle_k2", 16),
        ("p1bundle_k0", 18),
        ("p1bundle_k1", 16),
        ("p1xp1bundle_00", 24),
        ("p1xp1bundle_11", 21),
        ("p1xp1bundle_1m1", 21),
    ];
    let cat = Catalog::builtin();
    for (id, n) in expected {
        assert_eq!(cat.get(id).unwrap().quiver().edges.len(), n, "{id}");
    }
}

#[test]
fn divisor_subquivers_have_degree_at_most_one() {
    for entry in Catalog::builtin().entries() {
        let q = entry.quiver();
        for d in q.labels() {
            let sub = divisor_subquiver(&q, &d);
            assert!(!sub.edges.is_empty());
            for v in 0..q.vertices.len() {
                assert!(
                    sub.out_degree(v) <= 1,
                    "{} {} out of {}",
                    entry.id,
                    d,
                    q.vertices[v]
                );
                assert!(
                    sub.in_degree(v) <= 1,
                    "{} {} into {}",
                    entry.id,
                    d,
                    q.vertices[v]
                );
            }
        }
    }
}

#[test]
fn edge_labels_have_the_class_of_the_arrow() {
    for entry in Catalog::builtin().entries() {
        let pic = entry.picard();
        let q = entry.quiver();
        for e in &q.edges {
            let diff = entry.collection[e.target]
                .divisor
                .sub(&entry.collection[e.source].divisor);
            let want = toric::divisor_class(&pic, &diff).unwrap();
            let got = toric::divisor_class(&pic, &e.label).unwrap();
            assert_eq!(got, want, "{} {}", entry.id, e.name);
            assert!(e.label.is_effective());
        }
    }
}

#[test]
fn edge_names_are_sequential() {
    let q = catalog::get("bl1_p2").unwrap().quiver();
    for (i, e) in q.edges.iter().enumerate() {
        assert_eq!(e.name, format!("a{}", i + 1));
    }
}

#[test]
fn unrestricted_arrow_carries_the_whole_effective_basis() {
    let entry = catalog::get("bl1_p2").unwrap();
    let pic = entry.picard();
    let classes = entry.classes();
    let (e0, e1) = (
        entry.label_index("E0").unwrap(),
        entry.label_index("E1").unwrap(),
    );
    let q = build_quiver(&pic, &classes, &[ArrowSpec::pair(e0, e1)]).unwrap();
    let basis = toric::effective_basis(&pic, &classes[e1]).unwrap();
    let labels: Vec<ToricDivisor> = q.edges.iter().map(|e| e.label.clone()).collect();
    assert_eq!(labels, basis);
    assert_eq!(labels.len(), 3);
}

#[test]
fn build_quiver_errors() {
    let entry = catalog::get("p2").unwrap();
    let pic = entry.picard();
    let classes = entry.classes();
    assert_eq!(
        build_quiver(&pic, &classes, &[ArrowSpec::pair(1, 0)]),
        Err(QuiverError::EmptyHom { from: 1, to: 0 })
    );
    assert_eq!(
        build_quiver(&pic, &classes, &[ArrowSpec::pair(0, 7)]),
        Err(QuiverError::BadIndex(7))
    );
    let bad = ArrowSpec {
        source: 0,
        target: 2,
        labels: Some(vec![ToricDivisor(vec![1, 0, 0])]),
    };
    assert!(matches!(
        build_quiver(&pic, &classes, &[bad]),
        Err(QuiverError::LabelNotInBasis { .. })
    ));
}

#[test]
fn dot_and_json_exports() {
    let entry = catalog::get("p2").unwrap();
    let q = entry.quiver();
    let dot = q.to_dot(&entry.ray_names);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("->").count(), 6);
    assert!(dot.contains("label=\"n1\""));
    let json = q.to_json(&entry.ray_names);
    assert_eq!(json["edges"].as_array().unwrap().len(), 6);
    assert_eq!(json["vertices"][0], "E0");
}

fn mono(mapping: Vec<usize>) -> MonodromyPermutation {
    MonodromyPermutation {
        divisor: None,
        permutation: Permutation::new(mapping).unwrap(),
        meta: PathMeta {
            epsilon: 1.0,
            partition: None,
        },
    }
}

#[test]
fn identity_monodromy_quiver_is_all_self_loops() {
    let labels: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
    let q = monodromy_quiver(&mono(vec![0, 1, 2]), &labels);
    assert_eq!(q.edges.len(), 3);
    assert!(q.edges.iter().all(|e| e.source == e.target));
}

#[test]
fn edgeless_subquiver_is_contained() {
    let labels: Vec<String> = ["A", "B"].iter().map(|s| s.to_string()).collect();
    let sup = monodromy_quiver(&mono(vec![1, 0]), &labels);
    let c = is_contained(&LabeledQuiver::edgeless(labels), &sup, &[0, 1]);
    assert!(c.contained && c.violations.is_empty());
}

#[test]
fn bl1_v3_subquiver_sits_in_the_four_cycle() {
    let entry = catalog::get("bl1_p2").unwrap();
    let cs = solve_all(&entry.potential(), &SolveOptions::default()).unwrap();
    let map = label_solutions(&entry, &cs).unwrap();
    let d = entry.parse_divisor("n3").unwrap();
    let m = entry_monodromy(&entry, &cs, &d, &TrackOptions::default()).unwrap();
    let on_members = MonodromyPermutation {
        permutation: map.on_members(&m.permutation),
        ..m
    };
    let labels = entry.labels();
    assert_eq!(
        on_members.permutation.cycle_string_with(&labels),
        "(E0 E2 F1 E1)"
    );

    let sup = monodromy_quiver(&on_members, &labels);
    let sub = divisor_subquiver(&entry.quiver(), &d);
    let named: Vec<(&str, &str)> = sub
        .edges
        .iter()
        .map(|e| (labels[e.source].as_str(), labels[e.target].as_str()))
        .collect();
    assert_eq!(named, [("F1", "E1")]);
    let identity: Vec<usize> = (0..labels.len()).collect();
    assert!(is_contained(&sub, &sup, &identity).contained);

    // negative control: the same edge reversed
    let mut reversed = sub.clone();
    let e: &mut QuiverEdge = &mut reversed.edges[0];
    std::mem::swap(&mut e.source, &mut e.target);
    let c = is_contained(&reversed, &sup, &identity);
    assert!(!c.contained);
    assert_eq!(c.violations.len(), 1);
    assert_eq!(
        (
            c.violations[0].source.as_str(),
            c.violations[0].target.as_str()
        ),
        ("E1", "F1")
    );
}

#[test]
fn labels_in_first_appearance_order() {
    let entry = catalog::get("p1xp1").unwrap();
    let q = entry.quiver();
    let labels = q.labels();
    let mut seen = BTreeMap::new();
    for e in &q.edges {
        seen.entry(e.label.clone()).or_insert(e.name.clone());
    }
    assert_eq!(labels.len(), seen.len());
    assert_eq!(labels.len(), 4);
}

fn sub_edges(id: &str, d: &str) -> Vec<(String, String)> {
    let entry = catalog::get(id).unwrap();
    let q = entry.quiver();
    let sub = divisor_subquiver(&q, &entry.parse_divisor(d).unwrap());
    sub.edges
        .iter()
        .map(|e| (q.vertices[e.source].clone(), q.vertices[e.target].clone()))
        .collect()
}

#[test]
fn divisor_subquiver_examples() {
    let own = |v: &[(&str, &str)]| -> Vec<(String, String)> {
        v.iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    };
    assert_eq!(sub_edges("p2", "n1"), own(&[("E0", "E1"), ("E1", "E2")]));
    assert_eq!(sub_edges("bl2_p2", "n4"), own(&[("E1", "E2")]));
    assert!(sub_edges("p2", "2n1").is_empty());
}

#[test]
fn p2_monodromy_quiver_is_a_three_cycle() {
    let entry = catalog::get("p2").unwrap();
    let cs = solve_all(&entry.potential(), &SolveOptions::default()).unwrap();
    let map = label_solutions(&entry, &cs).unwrap();
    let m = entry_monodromy(
        &entry,
        &cs,
        &entry.parse_divisor("n1").unwrap(),
        &TrackOptions::default(),
    )
    .unwrap();
    let on_members = MonodromyPermutation {
        permutation: map.on_members(&m.permutation),
        ..m
    };
    let q = monodromy_quiver(&on_members, &entry.labels());
    let edges: Vec<(usize, usize)> = q.edges.iter().map(|e| (e.source, e.target)).collect();
    assert_eq!(edges, [(0, 1), (1, 2), (2, 0)]);
    assert!(q
        .edges
        .iter()
        .all(|e| e.label == entry.parse_divisor("n1").unwrap()));
}
