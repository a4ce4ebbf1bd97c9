#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use contextkg_core::graph::Ontology;
use contextkg_core::{derive_ontology, KnowledgeGraph};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

pub fn academic() -> (KnowledgeGraph, Ontology) {
    let kg = KnowledgeGraph::from_json(&fixture_text("academic.json")).expect("academic fixture loads");
    let onto = derive_ontology(&kg);
    (kg, onto)
}

pub fn ontologies() -> BTreeMap<String, Ontology> {
    serde_json::from_str(&fixture_text("ontologies.json")).expect("ontologies fixture parses")
}

/// Small linear congruential generator so generated graphs do not depend on
/// the engine's RNG choices.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }

    pub fn unit(&mut self) -> f64 {
        self.next() as f64 / (1u64 << 31) as f64
    }
}

/// Random Paper/Author/Concept graph with `papers` papers.
pub fn random_academic(papers: usize, seed: u64) -> KnowledgeGraph {
    let mut rng = Lcg(seed ^ 0x9e37_79b9);
    let authors = (papers * 3 / 2).max(2);
    let concepts = (papers / 2).max(2);
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for i in 0..papers {
        let year = 2010 + rng.below(10);
        let venue = ["VIS", "TVCG", "CHI"][rng.below(3)];
        nodes.push(serde_json::json!({
            "id": format!("P{i:04}"), "type": "Paper", "label": format!("Paper {i}"),
            "attributes": {"year": year, "venue": venue}
        }));
    }
    for i in 0..authors {
        nodes.push(serde_json::json!({"id": format!("A{i:04}"), "type": "Author", "label": format!("Author {i}")}));
    }
    for i in 0..concepts {
        nodes.push(serde_json::json!({"id": format!("C{i:04}"), "type": "Concept", "label": format!("Concept {i}")}));
    }
    let mut eid = 0;
    let mut edge = |s: String, t: String, r: &str, edges: &mut Vec<serde_json::Value>| {
        eid += 1;
        edges.push(serde_json::json!({"id": format!("E{eid:05}"), "source": s, "target": t, "relation": r}));
    };
    for a in 0..authors {
        let p = rng.below(papers);
        edge(format!("P{p:04}"), format!("A{a:04}"), "writtenBy", &mut edges);
    }
    for p in 0..papers {
        for _ in 0..1 + rng.below(2) {
            let a = rng.below(authors);
            edge(format!("P{p:04}"), format!("A{a:04}"), "writtenBy", &mut edges);
        }
        let c = rng.below(concepts);
        edge(format!("P{p:04}"), format!("C{c:04}"), "hasConcept", &mut edges);
    }
    let doc = serde_json::json!({"nodes": nodes, "edges": edges});
    KnowledgeGraph::from_json(&doc.to_string()).expect("generated graph loads")
}
