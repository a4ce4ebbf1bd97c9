//! Knowledge-graph data model.
//!
//! A [`KnowledgeGraph`] is built from a self-describing JSON [`GraphDocument`]
//! and is immutable afterwards. The [`Ontology`] is its schema projection:
//! node types as vertices, observed `(source type, target type, relation)`
//! triples as edges. [`DistanceMatrix`] holds hop counts between types on the
//! undirected type graph and drives the global arrangement of type regions.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::preference::UserPreference;
use crate::text::{format_number, parse_number, values_equal};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("malformed graph document: {0}")]
    Malformed(String),
    #[error("duplicate node id `{0}`")]
    DuplicateNodeId(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdgeId(String),
    #[error("edge `{edge}` references missing node `{endpoint}`")]
    DanglingEndpoint { edge: String, endpoint: String },
    #[error("attribute `{attribute}` on `{owner}` mixes numeric and text values")]
    MixedAttributeKinds { owner: String, attribute: String },
    #[error("node `{0}` has an empty type or label")]
    EmptyField(String),
    #[error("edge `{0}` is a self-loop and self-loops are not enabled")]
    SelfLoop(String),
    #[error("ontology relation `{0}` references an undeclared type")]
    UndeclaredType(String),
    #[error("node type `{0}` does not occur in the graph")]
    UnknownInterestType(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrKind {
    Numeric,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttrValue {
    Number { value: f64, unit: Option<String> },
    Text(String),
}

impl AttrValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            AttrValue::Number { value, .. } => Some(*value),
            AttrValue::Text(_) => None,
        }
    }

    /// Display form; numbers drop a trailing `.0`.
    pub fn render(&self) -> String {
        match self {
            AttrValue::Number { value, .. } => format_number(*value),
            AttrValue::Text(s) => s.clone(),
        }
    }

    /// Whether this value equals a canonicalized preference value.
    pub fn matches(&self, wanted: &str) -> bool {
        values_equal(&self.render(), wanted)
    }

    fn to_json(&self) -> Value {
        match self {
            AttrValue::Number { value, unit } => {
                let num = if value.fract() == 0.0 && value.abs() < 9.0e15 {
                    Value::from(*value as i64)
                } else {
                    Value::from(*value)
                };
                match unit {
                    None => num,
                    Some(u) => serde_json::json!({ "value": num, "unit": u }),
                }
            }
            AttrValue::Text(s) => Value::String(s.clone()),
        }
    }
}

// ---------------------------------------------------------------------------
// Document format

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DocumentMeta {
    #[serde(default)]
    pub name: String,
    /// node type -> attribute -> declared kind
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attribute_kinds: BTreeMap<String, BTreeMap<String, AttrKind>>,
    /// relation -> attribute -> declared kind
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub edge_attribute_kinds: BTreeMap<String, BTreeMap<String, AttrKind>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_self_loops: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    #[serde(rename = "type")]
    pub node_type: String,
    pub label: String,
    #[serde(default)]
    pub attributes: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: String,
    pub source: String,
    pub target: String,
    pub relation: String,
    #[serde(default)]
    pub attributes: BTreeMap<String, Value>,
}

/// The JSON interchange format: `{meta, nodes, edges}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    #[serde(default)]
    pub meta: DocumentMeta,
    pub nodes: Vec<NodeRecord>,
    #[serde(default)]
    pub edges: Vec<EdgeRecord>,
}

impl GraphDocument {
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Graph

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub node_type: String,
    pub label: String,
    pub attributes: BTreeMap<String, AttrValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub source: String,
    pub target: String,
    pub relation: String,
    pub attributes: BTreeMap<String, AttrValue>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub allow_self_loops: bool,
}

/// Validated, immutable instance graph. Nodes and edges are stored sorted by id.
#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    name: String,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
    incident: Vec<Vec<usize>>,
    attribute_index: BTreeMap<(String, String), AttrKind>,
    edge_attribute_index: BTreeMap<(String, String), AttrKind>,
    allow_self_loops: bool,
}

enum RawValue {
    Num(f64, Option<String>),
    Str(String),
}

fn raw_value(v: &Value, owner: &str, attr: &str) -> Result<Option<RawValue>, GraphError> {
    Ok(match v {
        Value::Null => None,
        Value::Number(n) => Some(RawValue::Num(
            n.as_f64()
                .ok_or_else(|| GraphError::Malformed(format!("{owner}.{attr}: number out of range")))?,
            None,
        )),
        Value::String(s) => Some(RawValue::Str(s.clone())),
        Value::Bool(b) => Some(RawValue::Str(b.to_string())),
        Value::Object(map) => {
            let value = map.get("value").ok_or_else(|| {
                GraphError::Malformed(format!("{owner}.{attr}: object value needs a `value` field"))
            })?;
            let num = match value {
                Value::Number(n) => n.as_f64(),
                Value::String(s) => parse_number(s),
                _ => None,
            }
            .ok_or_else(|| GraphError::MixedAttributeKinds {
                owner: owner.to_string(),
                attribute: attr.to_string(),
            })?;
            let unit = map.get("unit").and_then(Value::as_str).map(str::to_string);
            Some(RawValue::Num(num, unit))
        }
        Value::Array(_) => {
            return Err(GraphError::Malformed(format!("{owner}.{attr}: arrays are not attribute values")))
        }
    })
}

/// Infers one kind per (owner, attribute) pair and converts raw values.
///
/// Explicit JSON numbers are numeric; strings are numeric only if every value
/// for the pair parses. A pair with a JSON number and an unparseable string is
/// rejected, as is any value that does not conform to a declared kind.
fn resolve_kinds(
    raw: &[(String, BTreeMap<String, RawValue>)],
    declared: &BTreeMap<String, BTreeMap<String, AttrKind>>,
) -> Result<(BTreeMap<(String, String), AttrKind>, Vec<BTreeMap<String, AttrValue>>), GraphError> {
    #[derive(Default)]
    struct Seen {
        json_number: bool,
        unparseable: bool,
    }
    let mut seen: BTreeMap<(String, String), Seen> = BTreeMap::new();
    for (owner, attrs) in raw {
        for (name, v) in attrs {
            let entry = seen.entry((owner.clone(), name.clone())).or_default();
            match v {
                RawValue::Num(..) => entry.json_number = true,
                RawValue::Str(s) => {
                    if parse_number(s).is_none() {
                        entry.unparseable = true;
                    }
                }
            }
        }
    }
    let mut kinds = BTreeMap::new();
    for ((owner, name), s) in &seen {
        let declared_kind = declared.get(owner).and_then(|m| m.get(name)).copied();
        let kind = match declared_kind {
            Some(AttrKind::Numeric) if s.unparseable => {
                return Err(GraphError::MixedAttributeKinds {
                    owner: owner.clone(),
                    attribute: name.clone(),
                })
            }
            Some(k) => k,
            None if s.json_number && s.unparseable => {
                return Err(GraphError::MixedAttributeKinds {
                    owner: owner.clone(),
                    attribute: name.clone(),
                })
            }
            None if s.unparseable => AttrKind::Text,
            None => AttrKind::Numeric,
        };
        kinds.insert((owner.clone(), name.clone()), kind);
    }
    let values = raw
        .iter()
        .map(|(owner, attrs)| {
            attrs
                .iter()
                .map(|(name, v)| {
                    let kind = kinds[&(owner.clone(), name.clone())];
                    let value = match (kind, v) {
                        (AttrKind::Numeric, RawValue::Num(x, unit)) => AttrValue::Number {
                            value: *x,
                            unit: unit.clone(),
                        },
                        (AttrKind::Numeric, RawValue::Str(s)) => AttrValue::Number {
                            value: parse_number(s).expect("checked parseable"),
                            unit: None,
                        },
                        (AttrKind::Text, RawValue::Num(x, _)) => AttrValue::Text(format_number(*x)),
                        (AttrKind::Text, RawValue::Str(s)) => AttrValue::Text(s.clone()),
                    };
                    (name.clone(), value)
                })
                .collect()
        })
        .collect();
    Ok((kinds, values))
}

/// Validates a document and builds the graph.
pub fn load_graph(doc: &GraphDocument) -> Result<KnowledgeGraph, GraphError> {
    load_graph_with(
        doc,
        LoadOptions {
            allow_self_loops: doc.meta.allow_self_loops,
        },
    )
}

pub fn load_graph_with(doc: &GraphDocument, opts: LoadOptions) -> Result<KnowledgeGraph, GraphError> {
    let mut node_ids = BTreeSet::new();
    for n in &doc.nodes {
        if n.id.is_empty() {
            return Err(GraphError::Malformed("node with empty id".into()));
        }
        if n.node_type.trim().is_empty() || n.label.trim().is_empty() {
            return Err(GraphError::EmptyField(n.id.clone()));
        }
        if !node_ids.insert(n.id.as_str()) {
            return Err(GraphError::DuplicateNodeId(n.id.clone()));
        }
    }
    let mut edge_ids = BTreeSet::new();
    for e in &doc.edges {
        if e.id.is_empty() {
            return Err(GraphError::Malformed("edge with empty id".into()));
        }
        if !edge_ids.insert(e.id.as_str()) {
            return Err(GraphError::DuplicateEdgeId(e.id.clone()));
        }
        for endpoint in [&e.source, &e.target] {
            if !node_ids.contains(endpoint.as_str()) {
                return Err(GraphError::DanglingEndpoint {
                    edge: e.id.clone(),
                    endpoint: endpoint.clone(),
                });
            }
        }
        if e.source == e.target && !opts.allow_self_loops {
            return Err(GraphError::SelfLoop(e.id.clone()));
        }
        if e.relation.trim().is_empty() {
            return Err(GraphError::Malformed(format!("edge `{}` has an empty relation", e.id)));
        }
    }

    let mut node_records: Vec<&NodeRecord> = doc.nodes.iter().collect();
    node_records.sort_by(|a, b| a.id.cmp(&b.id));
    let mut edge_records: Vec<&EdgeRecord> = doc.edges.iter().collect();
    edge_records.sort_by(|a, b| a.id.cmp(&b.id));

    let mut raw_nodes = Vec::with_capacity(node_records.len());
    for n in &node_records {
        let mut attrs = BTreeMap::new();
        for (k, v) in &n.attributes {
            if let Some(rv) = raw_value(v, &n.node_type, k)? {
                attrs.insert(k.clone(), rv);
            }
        }
        raw_nodes.push((n.node_type.clone(), attrs));
    }
    let (attribute_index, node_values) = resolve_kinds(&raw_nodes, &doc.meta.attribute_kinds)?;

    let mut raw_edges = Vec::with_capacity(edge_records.len());
    for e in &edge_records {
        let mut attrs = BTreeMap::new();
        for (k, v) in &e.attributes {
            if let Some(rv) = raw_value(v, &e.relation, k)? {
                attrs.insert(k.clone(), rv);
            }
        }
        raw_edges.push((e.relation.clone(), attrs));
    }
    let (edge_attribute_index, edge_values) = resolve_kinds(&raw_edges, &doc.meta.edge_attribute_kinds)?;

    let nodes: Vec<Node> = node_records
        .iter()
        .zip(node_values)
        .map(|(n, attributes)| Node {
            id: n.id.clone(),
            node_type: n.node_type.clone(),
            label: n.label.clone(),
            attributes,
        })
        .collect();
    let edges: Vec<Edge> = edge_records
        .iter()
        .zip(edge_values)
        .map(|(e, attributes)| Edge {
            id: e.id.clone(),
            source: e.source.clone(),
            target: e.target.clone(),
            relation: e.relation.clone(),
            attributes,
        })
        .collect();

    let node_index: HashMap<String, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();
    let edge_index: HashMap<String, usize> = edges.iter().enumerate().map(|(i, e)| (e.id.clone(), i)).collect();
    let mut incident = vec![Vec::new(); nodes.len()];
    for (ei, e) in edges.iter().enumerate() {
        incident[node_index[&e.source]].push(ei);
        if e.source != e.target {
            incident[node_index[&e.target]].push(ei);
        }
    }

    Ok(KnowledgeGraph {
        name: doc.meta.name.clone(),
        nodes,
        edges,
        node_index,
        edge_index,
        incident,
        attribute_index,
        edge_attribute_index,
        allow_self_loops: opts.allow_self_loops,
    })
}

impl KnowledgeGraph {
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        load_graph(&GraphDocument::from_json(text)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.node_index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edge_index.get(id).map(|&i| &self.edges[i])
    }

    pub fn node_idx(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    /// Indices of edges touching the node at `idx`.
    pub fn incident_edges(&self, idx: usize) -> &[usize] {
        &self.incident[idx]
    }

    /// `(edge index, neighbour node index)` pairs, treating edges as undirected.
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.incident[idx].iter().map(move |&ei| {
            let e = &self.edges[ei];
            let s = self.node_index[&e.source];
            let t = self.node_index[&e.target];
            (ei, if s == idx { t } else { s })
        })
    }

    pub fn degree(&self, id: &str) -> usize {
        self.node_idx(id).map_or(0, |i| self.incident[i].len())
    }

    pub fn attribute_kind(&self, node_type: &str, attribute: &str) -> Option<AttrKind> {
        self.attribute_index
            .get(&(node_type.to_string(), attribute.to_string()))
            .copied()
    }

    pub fn attribute_index(&self) -> &BTreeMap<(String, String), AttrKind> {
        &self.attribute_index
    }

    pub fn edge_attribute_index(&self) -> &BTreeMap<(String, String), AttrKind> {
        &self.edge_attribute_index
    }

    pub fn nodes_of_type<'a>(&'a self, node_type: &'a str) -> impl Iterator<Item = &'a Node> + 'a {
        self.nodes.iter().filter(move |n| n.node_type == node_type)
    }

    /// Canonical document: nodes and edges sorted by id, every attribute kind declared.
    pub fn to_document(&self) -> GraphDocument {
        let mut meta = DocumentMeta {
            name: self.name.clone(),
            allow_self_loops: self.allow_self_loops,
            ..Default::default()
        };
        for ((owner, attr), kind) in &self.attribute_index {
            meta.attribute_kinds
                .entry(owner.clone())
                .or_default()
                .insert(attr.clone(), *kind);
        }
        for ((owner, attr), kind) in &self.edge_attribute_index {
            meta.edge_attribute_kinds
                .entry(owner.clone())
                .or_default()
                .insert(attr.clone(), *kind);
        }
        GraphDocument {
            meta,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.id.clone(),
                    node_type: n.node_type.clone(),
                    label: n.label.clone(),
                    attributes: n.attributes.iter().map(|(k, v)| (k.clone(), v.to_json())).collect(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    id: e.id.clone(),
                    source: e.source.clone(),
                    target: e.target.clone(),
                    relation: e.relation.clone(),
                    attributes: e.attributes.iter().map(|(k, v)| (k.clone(), v.to_json())).collect(),
                })
                .collect(),
        }
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("graph documents always serialize")
    }
}

// ---------------------------------------------------------------------------
// Ontology

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(String, String, String)", into = "(String, String, String)")]
pub struct Relation {
    pub source: String,
    pub target: String,
    pub name: String,
}

impl From<(String, String, String)> for Relation {
    fn from((source, target, name): (String, String, String)) -> Self {
        Relation { source, target, name }
    }
}

impl From<Relation> for (String, String, String) {
    fn from(r: Relation) -> Self {
        (r.source, r.target, r.name)
    }
}

/// Schema graph of a knowledge graph.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Ontology {
    pub types: Vec<String>,
    pub relations: Vec<Relation>,
    /// node type -> attribute -> kind
    #[serde(default)]
    pub attributes: BTreeMap<String, BTreeMap<String, AttrKind>>,
    /// relation name -> edge attribute names
    #[serde(default)]
    pub edge_attributes: BTreeMap<String, BTreeSet<String>>,
}

impl Ontology {
    /// Builds an ontology from parts, checking that relations only mention declared types.
    pub fn new(
        types: Vec<String>,
        relations: Vec<Relation>,
        attributes: BTreeMap<String, BTreeMap<String, AttrKind>>,
    ) -> Result<Self, GraphError> {
        let onto = Ontology {
            types,
            relations,
            attributes,
            edge_attributes: BTreeMap::new(),
        };
        onto.validate()?;
        Ok(onto.normalized())
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        for r in &self.relations {
            if !self.has_type(&r.source) || !self.has_type(&r.target) {
                return Err(GraphError::UndeclaredType(r.name.clone()));
            }
        }
        Ok(())
    }

    fn normalized(mut self) -> Self {
        self.types.sort();
        self.types.dedup();
        self.relations.sort();
        self.relations.dedup();
        self
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn has_type(&self, t: &str) -> bool {
        self.types.iter().any(|x| x == t)
    }

    /// Declared type name matching `name` case-insensitively, up to plural forms.
    pub fn resolve_type(&self, name: &str) -> Option<&str> {
        let name = name.trim();
        self.types
            .iter()
            .find(|t| t.as_str() == name)
            .or_else(|| self.types.iter().find(|t| t.eq_ignore_ascii_case(name)))
            .or_else(|| self.types.iter().find(|t| crate::text::same_word(name, t)))
            .map(String::as_str)
    }

    pub fn attributes_of(&self, t: &str) -> impl Iterator<Item = (&String, &AttrKind)> {
        self.attributes.get(t).into_iter().flat_map(|m| m.iter())
    }

    pub fn attribute_kind(&self, t: &str, attr: &str) -> Option<AttrKind> {
        self.attributes.get(t).and_then(|m| m.get(attr)).copied()
    }

    /// Types sharing a relation with `t` (excluding `t` itself).
    pub fn adjacent_types(&self, t: &str) -> BTreeSet<&str> {
        self.relations
            .iter()
            .filter_map(|r| {
                if r.source == t && r.target != t {
                    Some(r.target.as_str())
                } else if r.target == t && r.source != t {
                    Some(r.source.as_str())
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn are_adjacent(&self, a: &str, b: &str) -> bool {
        self.relations
            .iter()
            .any(|r| (r.source == a && r.target == b) || (r.source == b && r.target == a))
    }

    pub fn relation_names(&self) -> BTreeSet<&str> {
        self.relations.iter().map(|r| r.name.as_str()).collect()
    }

    /// Whether the undirected type graph is connected.
    pub fn is_connected(&self) -> bool {
        if self.types.len() <= 1 {
            return true;
        }
        let dm = distance_matrix(self);
        let n = dm.len();
        let finite_max = hop_counts(self).iter().flatten().filter_map(|d| *d).max().unwrap_or(0);
        (0..n).all(|i| (0..n).all(|j| dm.get(i, j) <= finite_max as f64))
    }

    /// Plain-text schema listing used inside prompts.
    pub fn schema_summary(&self) -> String {
        let mut out = String::from("Node types:\n");
        for t in &self.types {
            let attrs: Vec<String> = self
                .attributes_of(t)
                .map(|(a, k)| format!("{a} ({})", if *k == AttrKind::Numeric { "numeric" } else { "text" }))
                .collect();
            out.push_str(&format!("- {t}: {}\n", attrs.join(", ")));
        }
        out.push_str("Relations:\n");
        for r in &self.relations {
            let edge_attrs: Vec<&str> = self
                .edge_attributes
                .get(&r.name)
                .map(|s| s.iter().map(String::as_str).collect())
                .unwrap_or_default();
            if edge_attrs.is_empty() {
                out.push_str(&format!("- {} -[{}]-> {}\n", r.source, r.name, r.target));
            } else {
                out.push_str(&format!(
                    "- {} -[{}]-> {} (edge attributes: {})\n",
                    r.source,
                    r.name,
                    r.target,
                    edge_attrs.join(", ")
                ));
            }
        }
        out
    }
}

/// Projects the instance graph onto its schema.
pub fn derive_ontology(kg: &KnowledgeGraph) -> Ontology {
    let types: BTreeSet<String> = kg.nodes.iter().map(|n| n.node_type.clone()).collect();
    let relations: BTreeSet<Relation> = kg
        .edges
        .iter()
        .map(|e| Relation {
            source: kg.node(&e.source).expect("validated").node_type.clone(),
            target: kg.node(&e.target).expect("validated").node_type.clone(),
            name: e.relation.clone(),
        })
        .collect();
    let mut attributes: BTreeMap<String, BTreeMap<String, AttrKind>> = BTreeMap::new();
    for ((t, a), k) in &kg.attribute_index {
        attributes.entry(t.clone()).or_default().insert(a.clone(), *k);
    }
    let mut edge_attributes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (rel, attr) in kg.edge_attribute_index.keys() {
        edge_attributes.entry(rel.clone()).or_default().insert(attr.clone());
    }
    Ontology {
        types: types.into_iter().collect(),
        relations: relations.into_iter().collect(),
        attributes,
        edge_attributes,
    }
}

// ---------------------------------------------------------------------------
// Distances

/// Symmetric matrix of ontological distances (hop counts) between types.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub order: Vec<String>,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_rows(order: Vec<String>, rows: &[Vec<f64>]) -> Self {
        let n = order.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = rows[i][j];
            }
        }
        DistanceMatrix { order, d }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.order.len() + j]
    }

    pub fn index_of(&self, t: &str) -> Option<usize> {
        self.order.iter().position(|x| x == t)
    }

    pub fn between(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.get(self.index_of(a)?, self.index_of(b)?))
    }
}

// BFS hop counts on the undirected type graph; None = unreachable.
fn hop_counts(ontology: &Ontology) -> Vec<Vec<Option<usize>>> {
    let n = ontology.types.len();
    let idx: HashMap<&str, usize> = ontology.types.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let mut adj = vec![BTreeSet::new(); n];
    for r in &ontology.relations {
        let (a, b) = (idx[r.source.as_str()], idx[r.target.as_str()]);
        if a != b {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    }
    (0..n)
        .map(|s| {
            let mut dist = vec![None; n];
            dist[s] = Some(0);
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                let du = dist[u].expect("queued nodes have a distance");
                for &v in &adj[u] {
                    if dist[v].is_none() {
                        dist[v] = Some(du + 1);
                        queue.push_back(v);
                    }
                }
            }
            dist
        })
        .collect()
}

/// Undirected shortest-path hop counts between types. Types in different
/// components are placed at (largest finite distance + 1).
pub fn distance_matrix(ontology: &Ontology) -> DistanceMatrix {
    let hops = hop_counts(ontology);
    let finite_max = hops.iter().flatten().filter_map(|d| *d).max().unwrap_or(0);
    let penalty = (finite_max + 1) as f64;
    let n = ontology.types.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = hops[i][j].map_or(penalty, |h| h as f64);
        }
    }
    DistanceMatrix {
        order: ontology.types.clone(),
        d,
    }
}

// ---------------------------------------------------------------------------
// Retrieval

/// Instances selected by a preference: every node of the interest type, their
/// one-hop neighbours of the connected types, and the edges between the two.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InterestSubgraph {
    pub interest_type: String,
    pub interest: Vec<String>,
    pub connected: Vec<String>,
    pub edges: Vec<String>,
    /// Interest nodes whose preferred attribute equals the preferred value.
    pub answers: BTreeSet<String>,
}

pub fn query_instances(kg: &KnowledgeGraph, pref: &UserPreference) -> Result<InterestSubgraph, GraphError> {
    let interest: Vec<&Node> = kg.nodes_of_type(&pref.interest_type).collect();
    if interest.is_empty() {
        return Err(GraphError::UnknownInterestType(pref.interest_type.clone()));
    }
    let wanted: BTreeSet<&str> = pref.connected_types.iter().map(String::as_str).collect();
    let mut connected = BTreeSet::new();
    let mut edges = BTreeSet::new();
    let mut answers = BTreeSet::new();
    for node in &interest {
        if node
            .attributes
            .get(&pref.attribute)
            .is_some_and(|v| v.matches(&pref.attribute_value))
        {
            answers.insert(node.id.clone());
        }
        let idx = kg.node_idx(&node.id).expect("node from graph");
        for (ei, other) in kg.neighbors(idx) {
            let other = &kg.nodes[other];
            if other.node_type != pref.interest_type && wanted.contains(other.node_type.as_str()) {
                connected.insert(other.id.clone());
                edges.insert(kg.edges[ei].id.clone());
            }
        }
    }
    Ok(InterestSubgraph {
        interest_type: pref.interest_type.clone(),
        interest: interest.iter().map(|n| n.id.clone()).collect(),
        connected: connected.into_iter().collect(),
        edges: edges.into_iter().collect(),
        answers,
    })
}
