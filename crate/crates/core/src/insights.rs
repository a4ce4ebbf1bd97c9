//! Structural features of a layout and the insight report built from them.
//!
//! [`encode_features`] extracts cluster sizes, hubs, bridging nodes, outlier
//! clusters and per-type degree statistics from the displayed subgraph.
//! [`generate_insights`] asks a language model to narrate them and falls back
//! to a deterministic renderer; [`validate_insights`] strips quoted names that
//! do not exist.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::graph::{KnowledgeGraph, Ontology};
use crate::layout::ContextLayout;
use crate::preference::prompts;
use crate::preference::{LanguageModelClient, Prompt, UserPreference};

/// Number of hubs reported.
pub const HUB_COUNT: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub id: usize,
    pub label: String,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub min: usize,
    pub median: f64,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hub {
    pub id: String,
    pub label: String,
    #[serde(rename = "type")]
    pub node_type: String,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bridge {
    pub id: String,
    pub label: String,
    /// Distinct clusters the node links to, ascending.
    pub clusters: Vec<usize>,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub interest_type: String,
    pub clusters: Vec<ClusterSummary>,
    pub degree_stats: BTreeMap<String, DegreeStats>,
    pub hubs: Vec<Hub>,
    pub bridges: Vec<Bridge>,
    /// Clusters no larger than `max(1, 0.25 · median size)`.
    pub outlier_clusters: Vec<usize>,
}

impl FeatureSummary {
    pub fn cluster_sizes(&self) -> BTreeMap<usize, usize> {
        self.clusters.iter().map(|c| (c.id, c.size)).collect()
    }
}

fn median(sorted: &[usize]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2] as f64,
        n => (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0,
    }
}

/// Features of the displayed subgraph; degree counts displayed edges only.
pub fn encode_features(layout: &ContextLayout) -> FeatureSummary {
    let mut degree: HashMap<&str, usize> = HashMap::new();
    let mut linked_clusters: HashMap<&str, BTreeSet<usize>> = HashMap::new();
    for e in &layout.edges {
        *degree.entry(e.source.as_str()).or_default() += 1;
        *degree.entry(e.target.as_str()).or_default() += 1;
        match (layout.cluster_of(&e.source), layout.cluster_of(&e.target)) {
            (Some(c), None) => {
                linked_clusters.entry(e.target.as_str()).or_default().insert(c);
            }
            (None, Some(c)) => {
                linked_clusters.entry(e.source.as_str()).or_default().insert(c);
            }
            _ => {}
        }
    }
    let deg = |id: &str| degree.get(id).copied().unwrap_or(0);

    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for n in &layout.nodes {
        if let Some(c) = n.cluster {
            *sizes.entry(c).or_default() += 1;
        }
    }
    let clusters: Vec<ClusterSummary> = sizes
        .iter()
        .map(|(&id, &size)| ClusterSummary {
            id,
            label: layout.cluster(id).map(|c| c.label.clone()).unwrap_or_default(),
            size,
        })
        .collect();
    let mut size_list: Vec<usize> = sizes.values().copied().collect();
    size_list.sort_unstable();
    let threshold = (0.25 * median(&size_list)).max(1.0);
    let outlier_clusters = sizes
        .iter()
        .filter(|(_, &s)| s as f64 <= threshold)
        .map(|(&c, _)| c)
        .collect();

    let mut by_type: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for n in &layout.nodes {
        by_type.entry(n.node_type.clone()).or_default().push(deg(&n.id));
    }
    let degree_stats = by_type
        .into_iter()
        .map(|(t, mut d)| {
            d.sort_unstable();
            let stats = DegreeStats {
                min: d[0],
                median: median(&d),
                max: d[d.len() - 1],
            };
            (t, stats)
        })
        .collect();

    let mut ranked: Vec<_> = layout.nodes.iter().map(|n| (deg(&n.id), n)).collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.id.cmp(&b.1.id)));
    let hubs = ranked
        .into_iter()
        .take(HUB_COUNT)
        .map(|(d, n)| Hub {
            id: n.id.clone(),
            label: n.label.clone(),
            node_type: n.node_type.clone(),
            degree: d,
        })
        .collect();

    let mut bridges: Vec<Bridge> = layout
        .nodes
        .iter()
        .filter_map(|n| {
            let cs = linked_clusters.get(n.id.as_str())?;
            (cs.len() >= 2).then(|| Bridge {
                id: n.id.clone(),
                label: n.label.clone(),
                clusters: cs.iter().copied().collect(),
                degree: deg(&n.id),
            })
        })
        .collect();
    bridges.sort_by(|a, b| {
        b.clusters
            .len()
            .cmp(&a.clusters.len())
            .then(b.degree.cmp(&a.degree))
            .then(a.id.cmp(&b.id))
    });

    FeatureSummary {
        interest_type: layout.interest_type.clone(),
        clusters,
        degree_stats,
        hubs,
        bridges,
        outlier_clusters,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsightBullet {
    pub text: String,
    /// Node ids, and clusters as `cluster:<id>`, mentioned in the text.
    pub refs: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InsightReport {
    pub bullets: Vec<InsightBullet>,
    pub fallback_used: bool,
    /// Quoted names removed because no such entity exists.
    pub validation_log: Vec<String>,
}

static QUOTED: LazyLock<Regex> = LazyLock::new(|| Regex::new(r#""([^"\n]+)"|“([^”\n]+)”"#).expect("valid regex"));

fn quoted_names(text: &str) -> Vec<(std::ops::Range<usize>, String)> {
    QUOTED
        .captures_iter(text)
        .map(|c| {
            let whole = c.get(0).expect("match");
            let inner = c.get(1).or_else(|| c.get(2)).expect("one group matches");
            (whole.range(), inner.as_str().trim().to_string())
        })
        .collect()
}

fn quote(s: &str) -> String {
    format!("\"{s}\"")
}

/// Names an entity of the layout resolves to.
fn refs_for(layout: &ContextLayout, name: &str) -> Vec<String> {
    let lower = name.to_lowercase();
    let mut out: Vec<String> = layout
        .nodes
        .iter()
        .filter(|n| n.label.to_lowercase() == lower || n.id.to_lowercase() == lower)
        .map(|n| n.id.clone())
        .collect();
    out.extend(
        layout
            .clusters
            .iter()
            .filter(|c| c.label.to_lowercase() == lower)
            .map(|c| format!("cluster:{}", c.id)),
    );
    out
}

fn bullet(layout: &ContextLayout, text: String) -> InsightBullet {
    let mut refs: Vec<String> = quoted_names(&text).iter().flat_map(|(_, n)| refs_for(layout, n)).collect();
    refs.sort();
    refs.dedup();
    InsightBullet { text, refs }
}

fn list<T>(items: &[T], render: impl Fn(&T) -> String) -> String {
    items.iter().map(render).collect::<Vec<_>>().join(", ")
}

/// One bullet per feature family, built only from the features themselves.
pub fn fallback_report(features: &FeatureSummary, layout: &ContextLayout) -> InsightReport {
    let mut bullets = Vec::new();
    let t = &features.interest_type;
    bullets.push(format!(
        "{} {} clusters are shown: {}.",
        features.clusters.len(),
        t,
        list(&features.clusters, |c| format!("{} ({} nodes)", quote(&c.label), c.size))
    ));
    if features.hubs.is_empty() {
        bullets.push("No node has a displayed connection.".to_string());
    } else {
        bullets.push(format!(
            "The most connected nodes are {}.",
            list(&features.hubs, |h| format!("{} ({}, degree {})", quote(&h.label), h.node_type, h.degree))
        ));
    }
    if features.bridges.is_empty() {
        bullets.push("No connected node links more than one cluster.".to_string());
    } else {
        let top = &features.bridges[..features.bridges.len().min(HUB_COUNT)];
        bullets.push(format!(
            "{} connected nodes bridge several clusters; the strongest are {}.",
            features.bridges.len(),
            list(top, |b| format!("{} ({} clusters)", quote(&b.label), b.clusters.len()))
        ));
    }
    bullets.push(format!(
        "Degree by type (min / median / max): {}.",
        features
            .degree_stats
            .iter()
            .map(|(t, s)| format!("{t} {} / {} / {}", s.min, s.median, s.max))
            .collect::<Vec<_>>()
            .join("; ")
    ));
    if !features.outlier_clusters.is_empty() {
        let small: Vec<&ClusterSummary> = features
            .clusters
            .iter()
            .filter(|c| features.outlier_clusters.contains(&c.id))
            .collect();
        bullets.push(format!(
            "Unusually small clusters: {}.",
            list(&small, |c| format!("{} ({} nodes)", quote(&c.label), c.size))
        ));
    }
    InsightReport {
        bullets: bullets.into_iter().map(|b| bullet(layout, b)).collect(),
        fallback_used: true,
        validation_log: Vec::new(),
    }
}

/// Bullet lines of a completion (`- `, `* `, `• ` or `1. ` prefixes).
fn parse_bullets(completion: &str) -> Vec<String> {
    static PREFIX: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*(?:[-*•]|\d+[.)])\s+(.*\S)\s*$").expect("valid regex"));
    completion
        .lines()
        .filter_map(|l| PREFIX.captures(l).map(|c| c[1].to_string()))
        .collect()
}

/// The prompt sent for an insight report.
pub fn insight_prompt(features: &FeatureSummary, question: &str, ontology: &Ontology) -> Prompt {
    let features_json = serde_json::to_string_pretty(features).expect("features serialize");
    Prompt {
        template: "insights.v1".to_string(),
        system: prompts::SYSTEM.to_string(),
        user: prompts::render(
            prompts::INSIGHTS,
            &[
                ("question", question),
                ("schema", &ontology.schema_summary()),
                ("features", &features_json),
            ],
        ),
    }
}

/// Asks `client` for a report; without a client, on error, or when the
/// completion has no bullets, the deterministic fallback is used. The
/// result is validated against the graph and layout.
pub fn generate_insights(
    features: &FeatureSummary,
    question: &str,
    _pref: &UserPreference,
    ontology: &Ontology,
    layout: &ContextLayout,
    kg: &KnowledgeGraph,
    client: Option<&dyn LanguageModelClient>,
) -> InsightReport {
    let from_model = client.and_then(|c| {
        let completion = c.complete(&insight_prompt(features, question, ontology)).ok()?;
        let lines = parse_bullets(&completion);
        (!lines.is_empty()).then(|| InsightReport {
            bullets: lines.into_iter().map(|l| bullet(layout, l)).collect(),
            fallback_used: false,
            validation_log: Vec::new(),
        })
    });
    let report = from_model.unwrap_or_else(|| fallback_report(features, layout));
    validate_insights(report, kg, layout)
}

/// Removes quoted names that match (case-insensitively) neither a node label
/// or id of the graph nor a cluster label of the layout, logs them, and
/// recomputes references. Idempotent.
pub fn validate_insights(report: InsightReport, kg: &KnowledgeGraph, layout: &ContextLayout) -> InsightReport {
    let known: BTreeSet<String> = kg
        .nodes()
        .iter()
        .flat_map(|n| [n.label.to_lowercase(), n.id.to_lowercase()])
        .chain(layout.clusters.iter().map(|c| c.label.to_lowercase()))
        .collect();
    let mut log = report.validation_log;
    let mut bullets = Vec::new();
    for b in report.bullets {
        let mut text = b.text.clone();
        let mut stripped = Vec::new();
        for (range, name) in quoted_names(&b.text).into_iter().rev() {
            if !known.contains(&name.to_lowercase()) {
                text.replace_range(range, "");
                stripped.push(name);
            }
        }
        if !stripped.is_empty() {
            stripped.reverse();
            log.extend(stripped);
            text = text.split_whitespace().collect::<Vec<_>>().join(" ");
            text = text.replace(" ,", ",").replace(" .", ".");
        }
        if !text.is_empty() {
            bullets.push(bullet(layout, text));
        }
    }
    InsightReport {
        bullets,
        fallback_used: report.fallback_used,
        validation_log: log,
    }
}
