//! Synthetic graph generators.

use std::collections::BTreeSet;

use contextkg_core::KnowledgeGraph;
use serde_json::{json, Value};

use crate::graph::EdgeList;
use crate::rng::Lcg;

fn build(nodes: Vec<Value>, edges: Vec<Value>) -> KnowledgeGraph {
    KnowledgeGraph::from_json(&json!({"nodes": nodes, "edges": edges}).to_string()).expect("generated graph loads")
}

/// Papers with `year` and `venue`, authors and concepts: every author
/// wrote at least one paper, every paper has one or two further authors
/// and one concept. About `3 × papers` nodes.
pub fn random_academic(papers: usize, seed: u64) -> KnowledgeGraph {
    let mut rng = Lcg::new(seed);
    let authors = (papers * 3 / 2).max(2);
    let concepts = (papers / 2).max(2);
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for i in 0..papers {
        let year = 2010 + rng.below(10);
        let venue = ["VIS", "TVCG", "CHI", "EuroVis"][rng.below(4)];
        nodes.push(json!({
            "id": format!("P{i:04}"), "type": "Paper", "label": format!("Paper {i}"),
            "attributes": {"year": year, "venue": venue}
        }));
    }
    for i in 0..authors {
        nodes.push(json!({"id": format!("A{i:04}"), "type": "Author", "label": format!("Author {i}")}));
    }
    for i in 0..concepts {
        nodes.push(json!({"id": format!("C{i:04}"), "type": "Concept", "label": format!("Concept {i}")}));
    }
    let mut push = |s: String, t: String, r: &str| {
        let id = format!("E{:05}", edges.len());
        edges.push(json!({"id": id, "source": s, "target": t, "relation": r}));
    };
    for a in 0..authors {
        let p = rng.below(papers);
        push(format!("P{p:04}"), format!("A{a:04}"), "writtenBy");
    }
    for p in 0..papers {
        for _ in 0..1 + rng.below(2) {
            let a = rng.below(authors);
            push(format!("P{p:04}"), format!("A{a:04}"), "writtenBy");
        }
        let c = rng.below(concepts);
        push(format!("P{p:04}"), format!("C{c:04}"), "hasConcept");
    }
    build(nodes, edges)
}

/// Five year-clusters of ten papers and sixty authors; author `A{a}`
/// belongs to group `a mod 5` and writes one to three distinct papers of
/// that group only.
pub fn subcluster_graph(seed: u64) -> KnowledgeGraph {
    let mut rng = Lcg::new(seed);
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for c in 0..5 {
        for j in 0..10 {
            nodes.push(json!({
                "id": format!("P{c}{j}"), "type": "Paper", "label": format!("Paper {c}.{j}"),
                "attributes": {"year": 2000 + 5 * c}
            }));
        }
    }
    for a in 0..60 {
        nodes.push(json!({"id": format!("A{a:02}"), "type": "Author", "label": format!("Author {a}")}));
        let c = a % 5;
        let k = rng.range(1, 3);
        let mut papers = BTreeSet::new();
        while papers.len() < k {
            papers.insert(rng.below(10));
        }
        for j in papers {
            edges.push(json!({
                "id": format!("E{a:02}{j}"), "source": format!("P{c}{j}"), "target": format!("A{a:02}"),
                "relation": "writtenBy"
            }));
        }
    }
    build(nodes, edges)
}

/// Group of an author of [`subcluster_graph`].
pub fn subcluster_group(author_id: &str) -> usize {
    author_id[1..].parse::<usize>().expect("author id") % 5
}

/// A random simple graph on `n` nodes `v00…` with `m` edges (capped at
/// the complete graph) over two relations, and its edge list.
pub fn random_graph(n: usize, m: usize, rng: &mut Lcg) -> (KnowledgeGraph, EdgeList) {
    let m = m.min(n * (n - 1) / 2);
    let mut chosen = BTreeSet::new();
    while chosen.len() < m {
        let (a, b) = (rng.below(n), rng.below(n));
        if a != b {
            chosen.insert((a.min(b), a.max(b)));
        }
    }
    let nodes = (0..n)
        .map(|i| json!({"id": format!("v{i:02}"), "type": "T", "label": format!("v{i:02}")}))
        .collect();
    let list: Vec<(usize, usize)> = chosen.into_iter().collect();
    let edges = list
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            json!({"id": format!("e{k:03}"), "source": format!("v{a:02}"), "target": format!("v{b:02}"),
                   "relation": if rng.below(2) == 0 { "r" } else { "s" }})
        })
        .collect();
    (build(nodes, edges), EdgeList { n, edges: list })
}
