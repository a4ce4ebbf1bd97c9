//! Preference understanding: what the user wants to see, and how follow-up
//! context descriptions refine it.
//!
//! Both tasks have a language-model path ([`extract_preferences`],
//! [`classify_context`]) and a deterministic offline path
//! ([`extract_preferences_offline`], [`classify_context_offline`]). The
//! model path uses a strict JSON contract with one repair round-trip.

mod classify;
pub mod llm;
mod offline;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::graph::{AttrKind, Ontology};
use crate::text::{canonical_value, identifier_words, same_word};

pub use classify::classify_context_offline;
pub use llm::{FnClient, LanguageModelClient, LlmError, MockClient, Prompt};
pub use offline::extract_preferences_offline;

pub const DEFAULT_DIVERSITY: f64 = 0.5;

fn default_diversity() -> f64 {
    DEFAULT_DIVERSITY
}

/// The four intent elements plus the diversity setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserPreference {
    pub interest_type: String,
    pub attribute: String,
    pub attribute_value: String,
    pub connected_types: Vec<String>,
    #[serde(default = "default_diversity")]
    pub diversity: f64,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PreferenceError {
    #[error("the question is empty")]
    EmptyQuestion,
    #[error("the ontology is empty")]
    EmptyOntology,
    #[error("question does not match a supported template: {0}")]
    NoTemplateMatch(String),
    #[error("unknown name `{0}`")]
    UnknownVocabulary(String),
    #[error("invalid preference: {0}")]
    Invalid(String),
    #[error("could not use the model output after repair: {}", log.join("; "))]
    ExtractionFailed { log: Vec<String> },
    #[error("could not classify the description: {0}")]
    Unclassifiable(String),
    #[error(transparent)]
    Client(#[from] LlmError),
}

impl UserPreference {
    /// Checks the preference against the ontology: known interest type and
    /// attribute, connected types adjacent, no duplicates, diversity in range.
    pub fn validate(&self, ontology: &Ontology) -> Result<(), PreferenceError> {
        if !ontology.has_type(&self.interest_type) {
            return Err(PreferenceError::Invalid(format!(
                "`{}` is not a node type",
                self.interest_type
            )));
        }
        if ontology.attribute_kind(&self.interest_type, &self.attribute).is_none() {
            return Err(PreferenceError::Invalid(format!(
                "`{}` is not an attribute of {}",
                self.attribute, self.interest_type
            )));
        }
        let mut seen = BTreeSet::new();
        for t in &self.connected_types {
            if t == &self.interest_type {
                return Err(PreferenceError::Invalid(format!(
                    "connected types must not repeat the interest type {t}"
                )));
            }
            if !seen.insert(t) {
                return Err(PreferenceError::Invalid(format!("connected type {t} listed twice")));
            }
            if !ontology.has_type(t) {
                return Err(PreferenceError::Invalid(format!("`{t}` is not a node type")));
            }
            if !ontology.are_adjacent(&self.interest_type, t) {
                return Err(PreferenceError::Invalid(format!(
                    "{t} has no relation to {}",
                    self.interest_type
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.diversity) {
            return Err(PreferenceError::Invalid(format!(
                "diversity {} outside [0, 1]",
                self.diversity
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Context directives

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NeighborMetric {
    Degree,
    Attribute(String),
}

impl From<String> for NeighborMetric {
    fn from(s: String) -> Self {
        if s.trim().eq_ignore_ascii_case("degree") {
            NeighborMetric::Degree
        } else {
            NeighborMetric::Attribute(s)
        }
    }
}

impl From<NeighborMetric> for String {
    fn from(m: NeighborMetric) -> Self {
        match m {
            NeighborMetric::Degree => "degree".into(),
            NeighborMetric::Attribute(a) => a,
        }
    }
}

impl Serialize for NeighborMetric {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&String::from(self.clone()))
    }
}

impl<'de> Deserialize<'de> for NeighborMetric {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(String::deserialize(d)?.into())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathCriterion {
    #[default]
    Shortest,
    Homogeneous,
    Disjoint,
}

impl PathCriterion {
    pub fn as_str(self) -> &'static str {
        match self {
            PathCriterion::Shortest => "shortest",
            PathCriterion::Homogeneous => "homogeneous",
            PathCriterion::Disjoint => "disjoint",
        }
    }

    /// Accepts "shortest", "Shortest paths", "edge-disjoint" and similar.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.to_lowercase();
        if s.contains("homogeneous") {
            Some(PathCriterion::Homogeneous)
        } else if s.contains("disjoint") {
            Some(PathCriterion::Disjoint)
        } else if s.contains("shortest") {
            Some(PathCriterion::Shortest)
        } else {
            None
        }
    }
}

impl fmt::Display for PathCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for PathCriterion {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for PathCriterion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        PathCriterion::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown path criterion `{s}`")))
    }
}

/// Edge selection: relation equality and/or edge-attribute equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgePredicate {
    #[serde(default)]
    pub relation: Option<String>,
    #[serde(default)]
    pub attribute: Option<String>,
    /// Wanted attribute value; `None` with an attribute means "true".
    #[serde(default)]
    pub value: Option<String>,
}

/// A classified refinement request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ContextDirective {
    Neighbor {
        metric: NeighborMetric,
        #[serde(default)]
        target_type: Option<String>,
    },
    Edge {
        #[serde(flatten)]
        predicate: EdgePredicate,
    },
    Path {
        source: String,
        target: String,
        #[serde(default)]
        criterion: PathCriterion,
    },
}

impl ContextDirective {
    pub fn kind(&self) -> &'static str {
        match self {
            ContextDirective::Neighbor { .. } => "neighbor",
            ContextDirective::Edge { .. } => "edge",
            ContextDirective::Path { .. } => "path",
        }
    }

    /// Checks names against the ontology and resolves them to their declared
    /// spelling. Node references in path directives are resolved later,
    /// against the graph.
    pub fn resolve(self, ontology: &Ontology, pref: &UserPreference) -> Result<Self, PreferenceError> {
        match self {
            ContextDirective::Neighbor { metric, target_type } => {
                let target = match target_type.as_deref().map(str::trim).filter(|t| !t.is_empty()) {
                    Some(t) => ontology
                        .resolve_type(t)
                        .ok_or_else(|| PreferenceError::UnknownVocabulary(t.to_string()))?
                        .to_string(),
                    None => pref.interest_type.clone(),
                };
                let metric = match metric {
                    NeighborMetric::Degree => NeighborMetric::Degree,
                    NeighborMetric::Attribute(a) => {
                        let name = resolve_attribute(ontology, &target, &a)
                            .ok_or_else(|| PreferenceError::UnknownVocabulary(a.clone()))?;
                        if ontology.attribute_kind(&target, &name) != Some(AttrKind::Numeric) {
                            return Err(PreferenceError::Invalid(format!(
                                "attribute {name} of {target} is not numeric"
                            )));
                        }
                        NeighborMetric::Attribute(name)
                    }
                };
                Ok(ContextDirective::Neighbor {
                    metric,
                    target_type: Some(target),
                })
            }
            ContextDirective::Edge { predicate } => {
                let relation = match predicate.relation.as_deref().filter(|r| !r.trim().is_empty()) {
                    Some(r) => Some(
                        resolve_name(ontology.relation_names().iter().copied(), r)
                            .ok_or_else(|| PreferenceError::UnknownVocabulary(r.to_string()))?,
                    ),
                    None => None,
                };
                let attribute = match predicate.attribute.as_deref().filter(|a| !a.trim().is_empty()) {
                    Some(a) => {
                        let all: BTreeSet<&str> = ontology
                            .edge_attributes
                            .values()
                            .flat_map(|s| s.iter().map(String::as_str))
                            .collect();
                        Some(
                            resolve_name(all.iter().copied(), a)
                                .ok_or_else(|| PreferenceError::UnknownVocabulary(a.to_string()))?,
                        )
                    }
                    None => None,
                };
                if relation.is_none() && attribute.is_none() {
                    return Err(PreferenceError::Invalid(
                        "edge context needs a relation or an edge attribute".into(),
                    ));
                }
                Ok(ContextDirective::Edge {
                    predicate: EdgePredicate {
                        relation,
                        value: predicate.value.filter(|_| attribute.is_some()),
                        attribute,
                    },
                })
            }
            ContextDirective::Path {
                source,
                target,
                criterion,
            } => {
                let (source, target) = (clean_reference(&source), clean_reference(&target));
                if source.is_empty() || target.is_empty() {
                    return Err(PreferenceError::Invalid("path context needs a source and a target".into()));
                }
                Ok(ContextDirective::Path {
                    source,
                    target,
                    criterion,
                })
            }
        }
    }
}

/// Strips quotes, articles and trailing punctuation from a node reference.
pub(crate) fn clean_reference(raw: &str) -> String {
    let mut s = raw.trim().trim_matches(|c: char| "\"'“”`".contains(c)).trim();
    s = s.trim_end_matches(|c: char| "?.!,;:".contains(c)).trim();
    for article in ["the ", "The "] {
        if let Some(rest) = s.strip_prefix(article) {
            s = rest.trim();
        }
    }
    s.trim_matches(|c: char| "\"'“”`".contains(c)).trim().to_string()
}

/// Finds `wanted` among `names`: exact, case-insensitive, then by identifier words.
fn resolve_name<'a>(names: impl Iterator<Item = &'a str> + Clone, wanted: &str) -> Option<String> {
    let wanted = wanted.trim();
    if let Some(n) = names.clone().find(|n| *n == wanted) {
        return Some(n.to_string());
    }
    if let Some(n) = names.clone().find(|n| n.eq_ignore_ascii_case(wanted)) {
        return Some(n.to_string());
    }
    let ww = identifier_words(wanted);
    names
        .into_iter()
        .find(|n| {
            let nw = identifier_words(n);
            nw.len() == ww.len() && nw.iter().zip(&ww).all(|(a, b)| same_word(a, b))
        })
        .map(str::to_string)
}

fn resolve_attribute(ontology: &Ontology, node_type: &str, wanted: &str) -> Option<String> {
    let names: Vec<&str> = ontology.attributes_of(node_type).map(|(a, _)| a.as_str()).collect();
    resolve_name(names.iter().copied(), wanted)
}

// ---------------------------------------------------------------------------
// Prompts

pub(crate) mod prompts {
    pub const EXTRACT: &str = include_str!("../../prompts/extract_preference.v1.txt");
    pub const REPAIR: &str = include_str!("../../prompts/repair.v1.txt");
    pub const CLASSIFY: &str = include_str!("../../prompts/classify_context.v1.txt");
    pub const INSIGHTS: &str = include_str!("../../prompts/insights.v1.txt");
    pub const CLUSTER_TOPIC: &str = include_str!("../../prompts/cluster_topic.v1.txt");

    pub const SYSTEM: &str = "You are a precise assistant for knowledge-graph exploration. Follow the output format exactly.";

    /// Substitutes `{{key}}` placeholders.
    pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
        let mut out = template.to_string();
        for (k, v) in vars {
            out = out.replace(&format!("{{{{{k}}}}}"), v);
        }
        out
    }
}

fn make_prompt(template: &str, user: String) -> Prompt {
    Prompt {
        template: template.to_string(),
        system: prompts::SYSTEM.to_string(),
        user,
    }
}

/// Asks the client, parses with `parse`, and on failure sends one repair
/// prompt quoting the problem.
fn complete_with_repair<T>(
    client: &dyn LanguageModelClient,
    prompt: Prompt,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<T, PreferenceError> {
    let first = client.complete(&prompt)?;
    let problem = match parse(&first) {
        Ok(v) => return Ok(v),
        Err(p) => p,
    };
    let mut log = vec![format!("attempt 1: {problem}")];
    let repair = make_prompt(
        "repair.v1",
        prompts::render(
            prompts::REPAIR,
            &[("previous", &first), ("problem", &problem), ("request", &prompt.user)],
        ),
    );
    let second = client.complete(&repair)?;
    match parse(&second) {
        Ok(v) => Ok(v),
        Err(p) => {
            log.push(format!("attempt 2: {p}"));
            Err(PreferenceError::ExtractionFailed { log })
        }
    }
}

#[derive(Deserialize)]
struct RawPreference {
    interest_type: String,
    attribute: String,
    attribute_value: Value,
    #[serde(default)]
    connected_types: Vec<String>,
}

fn parse_preference(text: &str, ontology: &Ontology, diversity: f64) -> Result<UserPreference, String> {
    let json = llm::extract_json_object(text).ok_or("no JSON object in the answer")?;
    let raw: RawPreference = serde_json::from_str(json).map_err(|e| format!("bad JSON: {e}"))?;
    let interest = ontology
        .resolve_type(&raw.interest_type)
        .ok_or_else(|| format!("`{}` is not a node type", raw.interest_type))?
        .to_string();
    let attribute = resolve_attribute(ontology, &interest, &raw.attribute)
        .ok_or_else(|| format!("`{}` is not an attribute of {interest}", raw.attribute))?;
    let value = match raw.attribute_value {
        Value::String(s) => s,
        Value::Number(n) => n.to_string(),
        other => return Err(format!("attribute_value must be a string, got {other}")),
    };
    let mut connected = Vec::new();
    for t in &raw.connected_types {
        let resolved = ontology
            .resolve_type(t)
            .ok_or_else(|| format!("`{t}` is not a node type"))?
            .to_string();
        if !connected.contains(&resolved) {
            connected.push(resolved);
        }
    }
    let pref = UserPreference {
        interest_type: interest,
        attribute,
        attribute_value: canonical_value(&value),
        connected_types: connected,
        diversity,
    };
    pref.validate(ontology).map_err(|e| e.to_string())?;
    Ok(pref)
}

/// Extracts the user preference with a language model.
pub fn extract_preferences(
    question: &str,
    ontology: &Ontology,
    client: &dyn LanguageModelClient,
) -> Result<UserPreference, PreferenceError> {
    if question.trim().is_empty() {
        return Err(PreferenceError::EmptyQuestion);
    }
    if ontology.is_empty() {
        return Err(PreferenceError::EmptyOntology);
    }
    let schema = ontology.schema_summary();
    let prompt = make_prompt(
        "extract_preference.v1",
        prompts::render(prompts::EXTRACT, &[("schema", &schema), ("question", question.trim())]),
    );
    complete_with_repair(client, prompt, |text| parse_preference(text, ontology, DEFAULT_DIVERSITY))
}

/// Classifies a context description with a language model.
pub fn classify_context(
    description: &str,
    pref: &UserPreference,
    ontology: &Ontology,
    client: &dyn LanguageModelClient,
) -> Result<ContextDirective, PreferenceError> {
    if description.trim().is_empty() {
        return Err(PreferenceError::Unclassifiable("the description is empty".into()));
    }
    let schema = ontology.schema_summary();
    let connected = pref.connected_types.join(", ");
    let prompt = make_prompt(
        "classify_context.v1",
        prompts::render(
            prompts::CLASSIFY,
            &[
                ("schema", &schema),
                ("interest_type", &pref.interest_type),
                ("attribute", &pref.attribute),
                ("connected_types", &connected),
                ("description", description.trim()),
            ],
        ),
    );
    complete_with_repair(client, prompt, |text| {
        let json = llm::extract_json_object(text).ok_or("no JSON object in the answer")?;
        let directive: ContextDirective = serde_json::from_str(json).map_err(|e| format!("bad JSON: {e}"))?;
        directive.resolve(ontology, pref).map_err(|e| e.to_string())
    })
    .map_err(|e| match e {
        PreferenceError::ExtractionFailed { log } => PreferenceError::Unclassifiable(log.join("; ")),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Relation;
    use std::collections::BTreeMap;

    pub(crate) fn academic() -> Ontology {
        let mut attrs: BTreeMap<String, BTreeMap<String, AttrKind>> = BTreeMap::new();
        attrs.entry("Paper".into()).or_default().insert("year".into(), AttrKind::Numeric);
        attrs.entry("Paper".into()).or_default().insert("venue".into(), AttrKind::Text);
        attrs.entry("Author".into()).or_default().insert("h_index".into(), AttrKind::Numeric);
        let rel = |s: &str, t: &str, n: &str| Relation {
            source: s.into(),
            target: t.into(),
            name: n.into(),
        };
        let mut o = Ontology::new(
            vec!["Author".into(), "Concept".into(), "Paper".into()],
            vec![rel("Paper", "Author", "writtenBy"), rel("Paper", "Concept", "hasConcept")],
            attrs,
        )
        .unwrap();
        o.edge_attributes
            .insert("writtenBy".into(), ["first_author".to_string()].into_iter().collect());
        o
    }

    fn pref() -> UserPreference {
        UserPreference {
            interest_type: "Paper".into(),
            attribute: "year".into(),
            attribute_value: "2018".into(),
            connected_types: vec!["Author".into()],
            diversity: 0.5,
        }
    }

    #[test]
    fn validation_rules() {
        let o = academic();
        assert!(pref().validate(&o).is_ok());
        let mut p = pref();
        p.connected_types = vec!["Paper".into()];
        assert!(p.validate(&o).is_err());
        let mut p = pref();
        p.connected_types = vec!["Author".into(), "Author".into()];
        assert!(p.validate(&o).is_err());
        let mut p = pref();
        p.attribute = "h_index".into();
        assert!(p.validate(&o).is_err());
        let mut p = pref();
        p.diversity = 1.5;
        assert!(p.validate(&o).is_err());
    }

    #[test]
    fn live_extraction_resolves_names_leniently() {
        let o = academic();
        let client = MockClient::new().with(
            "published in 2018",
            r#"```json
{"interest_type": "papers", "attribute": "Year", "attribute_value": 2018, "connected_types": ["authors"]}
```"#,
        );
        let p = extract_preferences("Find papers published in 2018 and their authors", &o, &client).unwrap();
        assert_eq!(p, pref());
    }

    #[test]
    fn live_extraction_repairs_once() {
        let o = academic();
        let client = MockClient::new().with_sequence(
            "2018",
            vec![
                "not json".into(),
                r#"{"interest_type": "Paper", "attribute": "year", "attribute_value": "2018", "connected_types": ["Author"]}"#
                    .into(),
            ],
        );
        let p = extract_preferences("Find papers published in 2018 and their authors", &o, &client).unwrap();
        assert_eq!(p.attribute_value, "2018");
        let prompts = client.prompts();
        assert_eq!(prompts.len(), 2);
        assert_eq!(prompts[1].template, "repair.v1");
        assert!(prompts[1].user.contains("no JSON object"));

        let stubborn = MockClient::new().with("2018", "still not json");
        match extract_preferences("papers in 2018", &o, &stubborn) {
            Err(PreferenceError::ExtractionFailed { log }) => assert_eq!(log.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn client_timeout_propagates() {
        let o = academic();
        let client = FnClient(|_: &Prompt| Err(LlmError::Timeout));
        assert_eq!(
            extract_preferences("papers in 2018", &o, &client),
            Err(PreferenceError::Client(LlmError::Timeout))
        );
    }

    #[test]
    fn directive_json_contract() {
        let d: ContextDirective =
            serde_json::from_str(r#"{"kind": "path", "source": "Paper A", "target": "B", "criterion": "Shortest paths"}"#)
                .unwrap();
        assert_eq!(
            d,
            ContextDirective::Path {
                source: "Paper A".into(),
                target: "B".into(),
                criterion: PathCriterion::Shortest
            }
        );
        let d: ContextDirective =
            serde_json::from_str(r#"{"kind": "edge", "attribute": "first_author", "value": "true"}"#).unwrap();
        let json = serde_json::to_value(&d).unwrap();
        assert_eq!(json["kind"], "edge");
        assert_eq!(json["attribute"], "first_author");
        let d: ContextDirective = serde_json::from_str(r#"{"kind": "neighbor", "metric": "degree"}"#).unwrap();
        assert_eq!(
            d.resolve(&academic(), &pref()).unwrap(),
            ContextDirective::Neighbor {
                metric: NeighborMetric::Degree,
                target_type: Some("Paper".into())
            }
        );
    }

    #[test]
    fn live_classification() {
        let o = academic();
        let client = MockClient::new().with(
            "most prolific",
            r#"{"kind": "neighbor", "metric": "degree", "target_type": "authors"}"#,
        );
        let d = classify_context("Show me which of these authors are the most prolific.", &pref(), &o, &client).unwrap();
        assert_eq!(
            d,
            ContextDirective::Neighbor {
                metric: NeighborMetric::Degree,
                target_type: Some("Author".into())
            }
        );
        let bad = MockClient::new().with("x", r#"{"kind": "edge", "relation": "nope"}"#);
        assert!(matches!(
            classify_context("x", &pref(), &o, &bad),
            Err(PreferenceError::Unclassifiable(_))
        ));
    }
}
