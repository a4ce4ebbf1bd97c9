//! Applying context directives to a layout.
//!
//! Directives only change the [`EmphasisState`] (and, for paths, may add the
//! path nodes that are not displayed yet); no existing node ever moves.
//! Every operation is idempotent.

mod paths;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::graph::{AttrKind, KnowledgeGraph};
use crate::layout::{ContextLayout, LayoutError, Point};
use crate::preference::{ContextDirective, EdgePredicate, NeighborMetric, PathCriterion};

pub use paths::{find_paths, GraphPath, PathResult, HOMOGENEOUS_DEPTH, PATH_CAP};

/// Largest node scale factor.
pub const MAX_SCALE: f64 = 2.5;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ContextError {
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("{name:?} matches several nodes: {candidates:?}")]
    AmbiguousNode { name: String, candidates: Vec<String> },
    #[error("source and target are the same node {0:?}")]
    SameEndpoints(String),
    #[error("attribute {attribute:?} of {node_type} is not numeric")]
    NonNumericMetric { node_type: String, attribute: String },
    #[error("no edge uses relation {0:?}")]
    UnknownRelation(String),
    #[error("no edge carries attribute {0:?}")]
    UnknownAttribute(String),
    #[error("edge directive needs a relation or an attribute")]
    EmptyPredicate,
    #[error("unknown bundle {0:?}")]
    UnknownBundle(String),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

/// Matching edges between one cluster and one connected node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub id: String,
    pub cluster: usize,
    pub node: String,
    /// Cluster centroid the bundle is drawn through.
    pub anchor: Point,
    pub edges: Vec<String>,
    pub expanded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathHighlight {
    pub criterion: PathCriterion,
    pub source: String,
    pub target: String,
    pub paths: Vec<GraphPath>,
    pub truncated: bool,
    /// Path nodes that were added to the layout for this highlight.
    pub injected: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmphasisState {
    /// Node id → scale factor in [1, 2.5].
    pub nodes: BTreeMap<String, f64>,
    /// Highlighted edge ids.
    pub edges: BTreeSet<String>,
    pub bundles: Vec<Bundle>,
    pub paths: Vec<PathHighlight>,
}

/// Resolves a node reference: exact id first, then a case-insensitive label.
pub fn resolve_node(kg: &KnowledgeGraph, reference: &str) -> Result<String, ContextError> {
    let r = reference.trim();
    if kg.node(r).is_some() {
        return Ok(r.to_string());
    }
    let lower = r.to_lowercase();
    let hits: Vec<String> = kg
        .nodes()
        .iter()
        .filter(|n| n.label.to_lowercase() == lower || n.id.to_lowercase() == lower)
        .map(|n| n.id.clone())
        .collect();
    match hits.len() {
        0 => Err(ContextError::UnknownNode(r.to_string())),
        1 => Ok(hits.into_iter().next().expect("one hit")),
        _ => Err(ContextError::AmbiguousNode {
            name: r.to_string(),
            candidates: hits,
        }),
    }
}

/// Scale `1 + 1.5·s/s_max` for every displayed node of `target_type`, where
/// `s` is the displayed-subgraph degree or a numeric attribute (missing or
/// negative values count as 0). With `s_max = 0` every scale is 1.
pub fn neighbor_scales(
    layout: &ContextLayout,
    kg: &KnowledgeGraph,
    metric: &NeighborMetric,
    target_type: &str,
) -> Result<BTreeMap<String, f64>, ContextError> {
    if let NeighborMetric::Attribute(a) = metric {
        if kg.attribute_kind(target_type, a) != Some(AttrKind::Numeric) {
            return Err(ContextError::NonNumericMetric {
                node_type: target_type.to_string(),
                attribute: a.clone(),
            });
        }
    }
    let mut degree: HashMap<&str, usize> = HashMap::new();
    for e in &layout.edges {
        *degree.entry(e.source.as_str()).or_default() += 1;
        *degree.entry(e.target.as_str()).or_default() += 1;
    }
    let scores: Vec<(&str, f64)> = layout
        .nodes
        .iter()
        .filter(|n| n.node_type == target_type)
        .map(|n| {
            let s = match metric {
                NeighborMetric::Degree => degree.get(n.id.as_str()).copied().unwrap_or(0) as f64,
                NeighborMetric::Attribute(a) => kg
                    .node(&n.id)
                    .and_then(|g| g.attributes.get(a))
                    .and_then(|v| v.as_f64())
                    .unwrap_or(0.0),
            };
            (n.id.as_str(), if s.is_finite() { s.max(0.0) } else { 0.0 })
        })
        .collect();
    let s_max = scores.iter().map(|(_, s)| *s).fold(0.0, f64::max);
    Ok(scores
        .into_iter()
        .map(|(id, s)| {
            let scale = if s_max > 0.0 { 1.0 + (MAX_SCALE - 1.0) * s / s_max } else { 1.0 };
            (id.to_string(), scale)
        })
        .collect())
}

fn edge_matches(kg: &KnowledgeGraph, edge_id: &str, p: &EdgePredicate) -> bool {
    let Some(e) = kg.edge(edge_id) else { return false };
    if let Some(r) = &p.relation {
        if &e.relation != r {
            return false;
        }
    }
    if let Some(a) = &p.attribute {
        let wanted = p.value.as_deref().unwrap_or("true");
        if !e.attributes.get(a).is_some_and(|v| v.matches(wanted)) {
            return false;
        }
    }
    true
}

/// Displayed edges matching `predicate`, plus bundles of two or more
/// matching edges between one cluster and one connected node. Bundles start
/// collapsed.
pub fn edge_emphasis(
    layout: &ContextLayout,
    kg: &KnowledgeGraph,
    predicate: &EdgePredicate,
) -> Result<(BTreeSet<String>, Vec<Bundle>), ContextError> {
    if predicate.relation.is_none() && predicate.attribute.is_none() {
        return Err(ContextError::EmptyPredicate);
    }
    if let Some(r) = &predicate.relation {
        if !kg.edges().iter().any(|e| &e.relation == r) {
            return Err(ContextError::UnknownRelation(r.clone()));
        }
    }
    if let Some(a) = &predicate.attribute {
        if !kg.edge_attribute_index().keys().any(|(_, attr)| attr == a) {
            return Err(ContextError::UnknownAttribute(a.clone()));
        }
    }
    let mut highlighted = BTreeSet::new();
    let mut groups: BTreeMap<(usize, String), Vec<String>> = BTreeMap::new();
    for e in &layout.edges {
        if !edge_matches(kg, &e.id, predicate) {
            continue;
        }
        highlighted.insert(e.id.clone());
        let (cs, ct) = (layout.cluster_of(&e.source), layout.cluster_of(&e.target));
        let key = match (cs, ct) {
            (Some(c), None) => Some((c, e.target.clone())),
            (None, Some(c)) => Some((c, e.source.clone())),
            _ => None,
        };
        if let Some(key) = key {
            groups.entry(key).or_default().push(e.id.clone());
        }
    }
    let bundles = groups
        .into_iter()
        .filter(|(_, edges)| edges.len() >= 2)
        .map(|((cluster, node), edges)| {
            let anchor = layout.cluster(cluster).map_or([0.0, 0.0], |c| [c.cx, c.cy]);
            Bundle {
                id: format!("c{cluster}:{node}"),
                cluster,
                node,
                anchor,
                edges,
                expanded: false,
            }
        })
        .collect();
    Ok((highlighted, bundles))
}

/// Applies a resolved directive to the layout's emphasis.
///
/// * neighbor — replaces the node scales;
/// * edge — replaces highlighted edges and bundles (bundles that were
///   already expanded stay expanded);
/// * path — runs [`find_paths`] on the full graph, adds missing path nodes
///   and replaces any earlier highlight for the same endpoints and criterion.
pub fn apply_directive(
    layout: &mut ContextLayout,
    kg: &KnowledgeGraph,
    directive: &ContextDirective,
) -> Result<(), ContextError> {
    match directive {
        ContextDirective::Neighbor { metric, target_type } => {
            let t = target_type.clone().unwrap_or_else(|| layout.interest_type.clone());
            layout.emphasis.nodes = neighbor_scales(layout, kg, metric, &t)?;
        }
        ContextDirective::Edge { predicate } => {
            let (edges, mut bundles) = edge_emphasis(layout, kg, predicate)?;
            let expanded: BTreeSet<&str> = layout
                .emphasis
                .bundles
                .iter()
                .filter(|b| b.expanded)
                .map(|b| b.id.as_str())
                .collect();
            for b in &mut bundles {
                b.expanded = expanded.contains(b.id.as_str());
            }
            layout.emphasis.edges = edges;
            layout.emphasis.bundles = bundles;
        }
        ContextDirective::Path {
            source,
            target,
            criterion,
        } => {
            let s = resolve_node(kg, source)?;
            let t = resolve_node(kg, target)?;
            let result = find_paths(kg, &s, &t, *criterion)?;
            let mut needed: Vec<String> = result.paths.iter().flat_map(|p| p.nodes.iter().cloned()).collect();
            needed.sort();
            needed.dedup();
            let mut injected = layout.inject_nodes(kg, &needed)?;
            // Nodes injected by an earlier application of this highlight.
            if let Some(prev) = layout
                .emphasis
                .paths
                .iter()
                .find(|p| p.source == s && p.target == t && p.criterion == *criterion)
            {
                injected.extend(prev.injected.iter().cloned());
                injected.sort();
                injected.dedup();
            }
            let highlight = PathHighlight {
                criterion: *criterion,
                source: s,
                target: t,
                paths: result.paths,
                truncated: result.truncated,
                injected,
            };
            match layout
                .emphasis
                .paths
                .iter_mut()
                .find(|p| p.source == highlight.source && p.target == highlight.target && p.criterion == highlight.criterion)
            {
                Some(slot) => *slot = highlight,
                None => layout.emphasis.paths.push(highlight),
            }
        }
    }
    Ok(())
}

/// Marks a bundle as expanded (idempotent).
pub fn expand_bundle(layout: &mut ContextLayout, bundle_id: &str) -> Result<(), ContextError> {
    let b = layout
        .emphasis
        .bundles
        .iter_mut()
        .find(|b| b.id == bundle_id)
        .ok_or_else(|| ContextError::UnknownBundle(bundle_id.to_string()))?;
    b.expanded = true;
    Ok(())
}
