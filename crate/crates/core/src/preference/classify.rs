//! Deterministic classification of context descriptions.
//!
//! Precedence is Path > Edge > Neighbor: a description that names two
//! endpoints is a path request even if it also talks about "important"
//! nodes or relationships.

use std::sync::LazyLock;

use regex::Regex;

use crate::graph::{AttrKind, Ontology};
use crate::text::{identifier_words, same_word, terms};

use super::{clean_reference, ContextDirective, EdgePredicate, NeighborMetric, PathCriterion, PreferenceError, UserPreference};

static PATH_PATTERNS: LazyLock<Vec<Regex>> = LazyLock::new(|| {
    [
        r"(?i)\bhow\s+(?:is\s+|are\s+|does\s+|do\s+)?(.+?)\s+(?:is\s+|are\s+)?(?:connected|linked|related)\s+(?:to|with)\s+(.+?)\s*[?.!]*\s*$",
        r"(?i)\bbetween\s+(.+?)\s+and\s+(.+?)\s*[?.!]*\s*$",
        r"(?i)\bfrom\s+(.+?)\s+to\s+(.+?)\s*[?.!]*\s*$",
        r"(?i)\bconnect(?:s|ing)?\s+(.+?)\s+(?:and|to|with)\s+(.+?)\s*[?.!]*\s*$",
    ]
    .iter()
    .map(|p| Regex::new(p).expect("static pattern"))
    .collect()
});

const PATH_WORDS: &[&str] = &["path", "paths", "route", "routes"];
const HOMOGENEOUS_CUES: &[&str] = &["homogeneous", "same relation", "same relationship", "single relation", "one relation", "same edge type", "same type"];
const DISJOINT_CUES: &[&str] = &["disjoint", "independent", "non-overlapping", "non overlapping", "separate"];
const EDGE_WORDS: &[&str] = &["edge", "edges", "relationship", "relationships", "relation", "relations", "link", "links", "tie", "ties"];
const NEIGHBOR_WORDS: &[&str] = &[
    "most", "prolific", "important", "central", "top", "hub", "hubs", "influential", "highest", "largest", "biggest",
    "popular", "degree", "busiest", "key",
];

fn contains_words(terms: &[String], words: &[String]) -> bool {
    !words.is_empty()
        && terms
            .windows(words.len())
            .any(|w| w.iter().zip(words).all(|(t, x)| same_word(t, x)))
}

fn first_type_mention(terms: &[String], ontology: &Ontology) -> Option<String> {
    (0..terms.len()).find_map(|i| {
        ontology.types.iter().find(|t| {
            let w = identifier_words(t);
            i + w.len() <= terms.len() && terms[i..i + w.len()].iter().zip(&w).all(|(a, b)| same_word(a, b))
        })
    })
    .cloned()
}

fn path_directive(description: &str) -> Option<(String, String)> {
    PATH_PATTERNS.iter().find_map(|re| {
        let caps = re.captures(description)?;
        let source = clean_reference(caps.get(1)?.as_str());
        let target = clean_reference(caps.get(2)?.as_str());
        (!source.is_empty() && !target.is_empty()).then_some((source, target))
    })
}

pub fn classify_context_offline(
    description: &str,
    pref: &UserPreference,
    ontology: &Ontology,
) -> Result<ContextDirective, PreferenceError> {
    let description = description.trim();
    if description.is_empty() {
        return Err(PreferenceError::Unclassifiable("the description is empty".into()));
    }
    let lower = description.to_lowercase();
    let words: Vec<String> = terms(description).collect();
    let has = |list: &[&str]| words.iter().any(|w| list.contains(&w.as_str()));

    // Path
    let mentions_path = has(PATH_WORDS);
    if let Some((source, target)) = path_directive(description) {
        let criterion = if HOMOGENEOUS_CUES.iter().any(|c| lower.contains(c)) {
            PathCriterion::Homogeneous
        } else if DISJOINT_CUES.iter().any(|c| lower.contains(c)) {
            PathCriterion::Disjoint
        } else {
            PathCriterion::Shortest
        };
        return ContextDirective::Path {
            source,
            target,
            criterion,
        }
        .resolve(ontology, pref);
    }
    if mentions_path {
        return Err(PreferenceError::Unclassifiable(
            "a path request needs a source and a target node".into(),
        ));
    }

    // Edge
    let edge_attribute = ontology
        .edge_attributes
        .iter()
        .flat_map(|(rel, attrs)| attrs.iter().map(move |a| (rel, a)))
        .find(|(_, a)| contains_words(&words, &identifier_words(a)));
    let relation = ontology
        .relation_names()
        .into_iter()
        .find(|r| contains_words(&words, &identifier_words(r)));
    if has(EDGE_WORDS) || edge_attribute.is_some() {
        if edge_attribute.is_none() && relation.is_none() {
            return Err(PreferenceError::Unclassifiable(
                "the description does not name a relation or an edge attribute".into(),
            ));
        }
        return ContextDirective::Edge {
            predicate: EdgePredicate {
                relation: relation.map(str::to_string),
                attribute: edge_attribute.map(|(_, a)| a.clone()),
                value: edge_attribute.map(|_| "true".to_string()),
            },
        }
        .resolve(ontology, pref);
    }

    // Neighbor
    if has(NEIGHBOR_WORDS) {
        let target = first_type_mention(&words, ontology).unwrap_or_else(|| pref.interest_type.clone());
        let metric = ontology
            .attributes_of(&target)
            .filter(|(_, k)| **k == AttrKind::Numeric)
            .find(|(a, _)| contains_words(&words, &identifier_words(a)))
            .map(|(a, _)| NeighborMetric::Attribute(a.clone()))
            .unwrap_or(NeighborMetric::Degree);
        return ContextDirective::Neighbor {
            metric,
            target_type: Some(target),
        }
        .resolve(ontology, pref);
    }

    Err(PreferenceError::Unclassifiable(format!(
        "`{description}` is not a neighbor, edge or path request"
    )))
}
