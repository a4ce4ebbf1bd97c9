//! End-to-end query: extract → retrieve → cluster → sample → lay out.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::clustering::{
    cluster_numeric, cluster_text, label_clusters, Cluster, ClusterError, ClusterKind, ClusterSet, DbscanParams,
    EmbeddingProvider, KMeansParams,
};
use crate::config::EngineConfig;
use crate::graph::{query_instances, AttrKind, GraphError, InterestSubgraph, KnowledgeGraph, Ontology};
use crate::layout::{compute_layout, ContextLayout, LayoutError, LayoutInput, LayoutParams};
use crate::preference::{extract_preferences, extract_preferences_offline, LanguageModelClient, PreferenceError, UserPreference};
use crate::sampling::{sample_interest_nodes, Sample, SamplingError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Preference(#[from] PreferenceError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRequest {
    pub question: String,
    /// σ in [0, 1]; the configured default when absent.
    #[serde(default)]
    pub diversity: Option<f64>,
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Record per-iteration layout traces.
    #[serde(default)]
    pub trace: bool,
}

impl QueryRequest {
    pub fn new(question: impl Into<String>) -> Self {
        QueryRequest {
            question: question.into(),
            diversity: None,
            budget: None,
            seed: 0,
            trace: false,
        }
    }
}

/// The answer nodes that made it into the layout and their displayed edges.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnswerSubgraph {
    pub nodes: Vec<String>,
    pub edges: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub preference: UserPreference,
    /// Clusters over all interest nodes (before sampling).
    pub clusters: ClusterSet,
    pub sample: Sample,
    /// Connected nodes were dropped to respect the configured cap.
    pub connected_truncated: bool,
    pub answers: AnswerSubgraph,
    pub layout: ContextLayout,
}

/// Label of the cluster holding interest nodes without the attribute.
pub fn missing_label(attribute: &str) -> String {
    format!("(no {attribute})")
}

/// Clusters every interest node by `pref.attribute`. Nodes lacking the
/// attribute (or, for numeric attributes, holding an unparseable value) are
/// collected into a trailing cluster.
pub fn cluster_interest(
    kg: &KnowledgeGraph,
    sub: &InterestSubgraph,
    pref: &UserPreference,
    config: &EngineConfig,
    embedder: &dyn EmbeddingProvider,
    client: Option<&dyn LanguageModelClient>,
) -> Result<ClusterSet, PipelineError> {
    let kind = kg
        .attribute_kind(&pref.interest_type, &pref.attribute)
        .unwrap_or(AttrKind::Text);
    let mut raw: BTreeMap<String, String> = BTreeMap::new();
    let mut missing = Vec::new();
    let mut numeric = Vec::new();
    for id in &sub.interest {
        let node = kg.node(id).expect("interest node from graph");
        match node.attributes.get(&pref.attribute) {
            Some(v) => {
                if kind == AttrKind::Numeric {
                    match v.as_f64() {
                        Some(x) if x.is_finite() => numeric.push((id.clone(), x)),
                        _ => {
                            missing.push(id.clone());
                            continue;
                        }
                    }
                }
                raw.insert(id.clone(), v.render());
            }
            None => missing.push(id.clone()),
        }
    }
    let mut set = if raw.is_empty() {
        ClusterSet {
            attribute: pref.attribute.clone(),
            kind: if kind == AttrKind::Numeric { ClusterKind::Numeric } else { ClusterKind::Text },
            clusters: Vec::new(),
        }
    } else if kind == AttrKind::Numeric {
        let params = DbscanParams {
            eps: config.clustering.eps,
            min_pts: config.clustering.min_pts,
        };
        label_clusters(cluster_numeric(&pref.attribute, &numeric, params)?, &raw, client)
    } else {
        let texts: Vec<(String, String)> = raw.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        let params = KMeansParams {
            seed: config.clustering.seed,
            n_init: config.clustering.n_init,
            kmax: config.clustering.kmax,
            ..KMeansParams::default()
        };
        label_clusters(
            cluster_text(&pref.attribute, &texts, embedder, &params, config.layout.exec)?,
            &raw,
            client,
        )
    };
    if !missing.is_empty() {
        missing.sort();
        set.clusters.push(Cluster {
            id: 0,
            members: missing,
            label: missing_label(&pref.attribute),
            centroid: Vec::new(),
        });
    }
    set.renumber();
    Ok(set)
}

/// Connected nodes adjacent to the sampled interest nodes. Above `cap`,
/// nodes with more links to the sample are kept first (then higher degree,
/// then id).
pub fn select_connected(
    kg: &KnowledgeGraph,
    sampled: &BTreeSet<String>,
    pref: &UserPreference,
    cap: usize,
) -> (Vec<String>, bool) {
    let wanted: BTreeSet<&str> = pref.connected_types.iter().map(String::as_str).collect();
    let mut links: BTreeMap<String, usize> = BTreeMap::new();
    for id in sampled {
        let idx = kg.node_idx(id).expect("sampled node from graph");
        for (_, o) in kg.neighbors(idx) {
            let other = &kg.nodes()[o];
            if other.node_type != pref.interest_type && wanted.contains(other.node_type.as_str()) {
                *links.entry(other.id.clone()).or_default() += 1;
            }
        }
    }
    if links.len() <= cap {
        return (links.into_keys().collect(), false);
    }
    let mut ranked: Vec<(String, usize)> = links.into_iter().collect();
    ranked.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then_with(|| kg.degree(&b.0).cmp(&kg.degree(&a.0)))
            .then_with(|| a.0.cmp(&b.0))
    });
    ranked.truncate(cap);
    let mut keep: Vec<String> = ranked.into_iter().map(|(id, _)| id).collect();
    keep.sort();
    (keep, true)
}

/// Runs retrieval, clustering, sampling and layout for a known preference.
pub fn run_with_preference(
    kg: &KnowledgeGraph,
    ontology: &Ontology,
    pref: UserPreference,
    budget: usize,
    seed: u64,
    trace: bool,
    config: &EngineConfig,
    embedder: &dyn EmbeddingProvider,
    client: Option<&dyn LanguageModelClient>,
) -> Result<QueryOutcome, PipelineError> {
    let sub = query_instances(kg, &pref)?;
    let clusters = cluster_interest(kg, &sub, &pref, config, embedder, client)?;
    let degree: HashMap<String, usize> = sub.interest.iter().map(|id| (id.clone(), kg.degree(id))).collect();
    let sample = sample_interest_nodes(&clusters, &pref, &sub.answers, &degree, budget, pref.diversity, seed)?;
    let chosen: BTreeSet<String> = sample.ids.iter().cloned().collect();
    let shown = ClusterSet {
        attribute: clusters.attribute.clone(),
        kind: clusters.kind,
        clusters: clusters
            .clusters
            .iter()
            .map(|c| Cluster {
                members: c.members.iter().filter(|m| chosen.contains(*m)).cloned().collect(),
                ..c.clone()
            })
            .collect(),
    };
    let (connected, connected_truncated) = select_connected(kg, &chosen, &pref, config.sampling.connected_cap);
    let params = LayoutParams {
        spacing: config.layout.spacing,
        exec: config.layout.exec,
        connected_k_factor: config.layout.connected_k_factor,
        record_trace: trace,
    };
    let layout = compute_layout(
        &LayoutInput {
            kg,
            ontology,
            interest_type: &pref.interest_type,
            clusters: &shown,
            connected: &connected,
            answers: &sub.answers,
            seed,
        },
        &params,
    )?;
    let answer_nodes: Vec<String> = layout.nodes.iter().filter(|n| n.answer).map(|n| n.id.clone()).collect();
    let answer_set: BTreeSet<&str> = answer_nodes.iter().map(String::as_str).collect();
    let answer_edges = layout
        .edges
        .iter()
        .filter(|e| answer_set.contains(e.source.as_str()) || answer_set.contains(e.target.as_str()))
        .map(|e| e.id.clone())
        .collect();
    Ok(QueryOutcome {
        preference: pref,
        clusters,
        sample,
        connected_truncated,
        answers: AnswerSubgraph {
            nodes: answer_nodes,
            edges: answer_edges,
        },
        layout,
    })
}

/// Extracts the preference (with `client`, or offline without one) and runs
/// the rest of the pipeline.
pub fn run_query(
    kg: &KnowledgeGraph,
    ontology: &Ontology,
    request: &QueryRequest,
    config: &EngineConfig,
    embedder: &dyn EmbeddingProvider,
    client: Option<&dyn LanguageModelClient>,
) -> Result<QueryOutcome, PipelineError> {
    let mut pref = match client {
        Some(c) => extract_preferences(&request.question, ontology, c)?,
        None => extract_preferences_offline(&request.question, ontology)?,
    };
    pref.diversity = request.diversity.unwrap_or(config.sampling.sigma_default);
    let budget = request.budget.unwrap_or(config.sampling.budget);
    run_with_preference(
        kg,
        ontology,
        pref,
        budget,
        request.seed,
        request.trace,
        config,
        embedder,
        client,
    )
}
