//! Path discovery between two nodes of the full graph (edges undirected).

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::graph::KnowledgeGraph;
use crate::preference::PathCriterion;

use super::ContextError;

/// Maximum number of paths returned by the enumerating criteria.
pub const PATH_CAP: usize = 10;
/// Maximum length of a homogeneous path.
pub const HOMOGENEOUS_DEPTH: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphPath {
    pub nodes: Vec<String>,
    pub edges: Vec<String>,
}

impl GraphPath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub criterion: PathCriterion,
    pub paths: Vec<GraphPath>,
    /// More paths existed than were returned.
    pub truncated: bool,
}

/// Index-level path: node indices and edge indices.
type RawPath = (Vec<usize>, Vec<usize>);

struct Adjacency {
    /// Per node: (neighbour, edge) sorted, self-loops dropped.
    lists: Vec<Vec<(usize, usize)>>,
}

impl Adjacency {
    fn new(kg: &KnowledgeGraph, keep: impl Fn(usize) -> bool) -> Self {
        let lists = (0..kg.nodes().len())
            .map(|v| {
                let mut l: Vec<(usize, usize)> = kg
                    .neighbors(v)
                    .filter(|&(e, w)| w != v && keep(e))
                    .map(|(e, w)| (w, e))
                    .collect();
                l.sort_unstable();
                l
            })
            .collect();
        Adjacency { lists }
    }

    fn distances_to(&self, target: usize, removed: &HashSet<usize>) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.lists.len()];
        dist[target] = 0;
        let mut queue = VecDeque::from([target]);
        while let Some(v) = queue.pop_front() {
            for &(w, e) in &self.lists[v] {
                if dist[w] == usize::MAX && !removed.contains(&e) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Shortest paths in lexicographic (node, edge) order, at most `limit`.
    fn shortest(&self, source: usize, target: usize, removed: &HashSet<usize>, limit: usize) -> Vec<RawPath> {
        let dist = self.distances_to(target, removed);
        let mut out = Vec::new();
        if dist[source] == usize::MAX {
            return out;
        }
        let mut nodes = vec![source];
        let mut edges = Vec::new();
        self.descend(&dist, target, removed, limit, &mut nodes, &mut edges, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &self,
        dist: &[usize],
        target: usize,
        removed: &HashSet<usize>,
        limit: usize,
        nodes: &mut Vec<usize>,
        edges: &mut Vec<usize>,
        out: &mut Vec<RawPath>,
    ) {
        if out.len() >= limit {
            return;
        }
        let v = *nodes.last().expect("non-empty");
        if v == target {
            out.push((nodes.clone(), edges.clone()));
            return;
        }
        for &(w, e) in &self.lists[v] {
            if removed.contains(&e) || dist[w] == usize::MAX || dist[w] + 1 != dist[v] {
                continue;
            }
            nodes.push(w);
            edges.push(e);
            self.descend(dist, target, removed, limit, nodes, edges, out);
            nodes.pop();
            edges.pop();
            if out.len() >= limit {
                return;
            }
        }
    }

    /// Simple paths of exactly `len` edges, lexicographic, at most `limit`.
    fn simple_of_length(&self, source: usize, target: usize, len: usize, limit: usize) -> Vec<RawPath> {
        let dist = self.distances_to(target, &HashSet::new());
        let mut out = Vec::new();
        if dist[source] == usize::MAX || dist[source] > len {
            return out;
        }
        let mut nodes = vec![source];
        let mut edges = Vec::new();
        let mut on_path = vec![false; self.lists.len()];
        on_path[source] = true;
        self.extend(&dist, target, len, limit, &mut nodes, &mut edges, &mut on_path, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        dist: &[usize],
        target: usize,
        len: usize,
        limit: usize,
        nodes: &mut Vec<usize>,
        edges: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Vec<RawPath>,
    ) {
        let v = *nodes.last().expect("non-empty");
        if edges.len() == len {
            if v == target {
                out.push((nodes.clone(), edges.clone()));
            }
            return;
        }
        if v == target {
            return;
        }
        let remaining = len - edges.len() - 1;
        for &(w, e) in &self.lists[v] {
            if on_path[w] || dist[w] == usize::MAX || dist[w] > remaining {
                continue;
            }
            on_path[w] = true;
            nodes.push(w);
            edges.push(e);
            self.extend(dist, target, len, limit, nodes, edges, on_path, out);
            edges.pop();
            nodes.pop();
            on_path[w] = false;
            if out.len() >= limit {
                return;
            }
        }
    }
}

fn sort_raw(paths: &mut [RawPath]) {
    paths.sort_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| a.0.cmp(&b.0)).then_with(|| a.1.cmp(&b.1)));
}

fn to_paths(kg: &KnowledgeGraph, raw: Vec<RawPath>) -> Vec<GraphPath> {
    raw.into_iter()
        .map(|(n, e)| GraphPath {
            nodes: n.into_iter().map(|i| kg.nodes()[i].id.clone()).collect(),
            edges: e.into_iter().map(|i| kg.edges()[i].id.clone()).collect(),
        })
        .collect()
}

/// Paths between two node ids under `criterion`.
///
/// * shortest — every minimum-hop path, at most [`PATH_CAP`];
/// * homogeneous — simple paths whose edges share one relation, at most
///   [`HOMOGENEOUS_DEPTH`] edges long, at most [`PATH_CAP`];
/// * disjoint — greedily take a shortest path and delete its edges until the
///   endpoints are separated; the paths are pairwise edge-disjoint.
///
/// Results are sorted by length, then node sequence (ids), then edge ids.
/// Node sequences compare by id since graph indices follow id order.
pub fn find_paths(
    kg: &KnowledgeGraph,
    source: &str,
    target: &str,
    criterion: PathCriterion,
) -> Result<PathResult, ContextError> {
    let s = kg.node_idx(source).ok_or_else(|| ContextError::UnknownNode(source.to_string()))?;
    let t = kg.node_idx(target).ok_or_else(|| ContextError::UnknownNode(target.to_string()))?;
    if s == t {
        return Err(ContextError::SameEndpoints(source.to_string()));
    }
    let (mut raw, truncated) = match criterion {
        PathCriterion::Shortest => {
            let adj = Adjacency::new(kg, |_| true);
            let mut raw = adj.shortest(s, t, &HashSet::new(), PATH_CAP + 1);
            let truncated = raw.len() > PATH_CAP;
            raw.truncate(PATH_CAP);
            (raw, truncated)
        }
        PathCriterion::Homogeneous => homogeneous(kg, s, t),
        PathCriterion::Disjoint => {
            let adj = Adjacency::new(kg, |_| true);
            let mut removed = HashSet::new();
            let mut raw = Vec::new();
            while let Some(path) = adj.shortest(s, t, &removed, 1).pop() {
                removed.extend(path.1.iter().copied());
                raw.push(path);
            }
            (raw, false)
        }
    };
    sort_raw(&mut raw);
    Ok(PathResult {
        criterion,
        paths: to_paths(kg, raw),
        truncated,
    })
}

fn homogeneous(kg: &KnowledgeGraph, s: usize, t: usize) -> (Vec<RawPath>, bool) {
    let mut relations: Vec<&str> = kg.edges().iter().map(|e| e.relation.as_str()).collect();
    relations.sort_unstable();
    relations.dedup();
    let adjacencies: Vec<Adjacency> = relations
        .iter()
        .map(|r| Adjacency::new(kg, |e| kg.edges()[e].relation == *r))
        .collect();
    let mut found: Vec<RawPath> = Vec::new();
    for len in 1..=HOMOGENEOUS_DEPTH {
        let mut level: Vec<RawPath> = Vec::new();
        for adj in &adjacencies {
            level.extend(adj.simple_of_length(s, t, len, PATH_CAP + 1));
        }
        sort_raw(&mut level);
        found.extend(level);
        if found.len() > PATH_CAP {
            break;
        }
    }
    let truncated = found.len() > PATH_CAP;
    found.truncate(PATH_CAP);
    (found, truncated)
}
