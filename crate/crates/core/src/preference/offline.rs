//! Deterministic preference extraction from templated questions.
//!
//! Supported shapes, matched against the ontology vocabulary
//! (case-insensitive, singular or plural):
//!
//! * `Find <types> with <attribute> <value> and their <types>…`
//! * `Show <types> whose <attribute> is <value>, their <types>…`
//! * `Show <types> above <attribute> <value> …`
//! * `Show <Attribute> <value> <types> …` (value carries the attribute word)
//! * `Find <types> published in <number> …` (year-like attribute)
//!
//! The first type mentioned is the interest type; later distinct types are
//! the connected types. When several attributes are mentioned, the earliest
//! mention wins.

use crate::graph::{AttrKind, Ontology};
use crate::text::{canonical_value, identifier_words, parse_number, same_word, tokenize, Token};

use super::{PreferenceError, UserPreference, DEFAULT_DIVERSITY};

const VALUE_STOPS: &[&str] = &[
    "and", "their", "the", "with", "who", "which", "whose", "that", "they", "or", "along",
];
const FILLERS: &[&str] = &[
    "is", "are", "was", "were", "=", "of", "equal", "equals", "to", "in", "during", "since", "from", "at", "on",
    "as", "for",
];
const COMPARATORS: &[&str] = &[
    "above", "below", "over", "under", "greater", "less", "more", "fewer", "than", "least", "most", "exactly",
];
const YEAR_HINTS: &[&str] = &["in", "during", "since", "from", "after", "before"];

#[derive(Debug, Clone, Copy)]
struct Span {
    start: usize,
    len: usize,
}

fn words_match_at(tokens: &[Token], at: usize, words: &[String]) -> bool {
    !words.is_empty()
        && at + words.len() <= tokens.len()
        && words
            .iter()
            .enumerate()
            .all(|(k, w)| !tokens[at + k].is_punct() && same_word(&tokens[at + k].lower, w))
}

/// Type mentions in order: (span, declared type name).
fn type_mentions<'o>(tokens: &[Token], ontology: &'o Ontology) -> Vec<(Span, &'o str)> {
    let mut found = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let hit = ontology
            .types
            .iter()
            .map(|t| (identifier_words(t), t.as_str()))
            .filter(|(w, _)| words_match_at(tokens, i, w))
            .max_by_key(|(w, _)| w.len());
        match hit {
            Some((w, t)) => {
                found.push((Span { start: i, len: w.len() }, t));
                i += w.len();
            }
            None => i += 1,
        }
    }
    found
}

fn covered(spans: &[(Span, &str)], i: usize) -> bool {
    spans.iter().any(|(s, _)| i >= s.start && i < s.start + s.len)
}

/// Earliest attribute mention; full-name matches beat single-word matches at
/// the same position.
fn attribute_mention(
    tokens: &[Token],
    ontology: &Ontology,
    interest: &str,
    types: &[(Span, &str)],
) -> Option<(Span, String)> {
    let mut best: Option<(usize, usize, Span, String)> = None; // (start, -priority, span, name)
    for (name, _) in ontology.attributes_of(interest) {
        let words = identifier_words(name);
        for i in 0..tokens.len() {
            if covered(types, i) {
                continue;
            }
            let candidate = if words_match_at(tokens, i, &words) && !(i..i + words.len()).any(|k| covered(types, k)) {
                Some((Span { start: i, len: words.len() }, 0))
            } else if words.len() > 1
                && words
                    .iter()
                    .any(|w| w.len() > 1 && !tokens[i].is_punct() && same_word(&tokens[i].lower, w))
            {
                Some((Span { start: i, len: 1 }, 1))
            } else {
                None
            };
            if let Some((span, rank)) = candidate {
                let better = match &best {
                    None => true,
                    Some((s, r, _, _)) => (i, rank) < (*s, *r),
                };
                if better {
                    best = Some((i, rank, span, name.clone()));
                }
                break;
            }
        }
    }
    best.map(|(_, _, span, name)| (span, name))
}

fn is_stop(tokens: &[Token], i: usize, types: &[(Span, &str)]) -> bool {
    tokens[i].is_punct() || VALUE_STOPS.contains(&tokens[i].lower.as_str()) || covered(types, i)
}

fn join(tokens: &[Token]) -> String {
    tokens.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ")
}

/// Attribute used when the question only says "in 2018": a numeric
/// attribute whose name mentions a year or date, else the only numeric one.
fn year_like_attribute(ontology: &Ontology, interest: &str) -> Option<String> {
    let numeric: Vec<&String> = ontology
        .attributes_of(interest)
        .filter(|(_, k)| **k == AttrKind::Numeric)
        .map(|(a, _)| a)
        .collect();
    numeric
        .iter()
        .find(|a| identifier_words(a).iter().any(|w| w == "year" || w == "date"))
        .or(if numeric.len() == 1 { numeric.first() } else { None })
        .map(|a| a.to_string())
}

pub fn extract_preferences_offline(question: &str, ontology: &Ontology) -> Result<UserPreference, PreferenceError> {
    if question.trim().is_empty() {
        return Err(PreferenceError::EmptyQuestion);
    }
    if ontology.is_empty() {
        return Err(PreferenceError::EmptyOntology);
    }
    let tokens = tokenize(question);
    let types = type_mentions(&tokens, ontology);
    let Some(&(interest_span, interest)) = types.first() else {
        return Err(PreferenceError::NoTemplateMatch("no node type is mentioned".into()));
    };

    let mut connected: Vec<String> = Vec::new();
    for (_, t) in &types[1..] {
        if *t != interest && !connected.iter().any(|c| c == t) {
            connected.push(t.to_string());
        }
    }

    let (attribute, value) = match attribute_mention(&tokens, ontology, interest, &types) {
        Some((span, name)) => {
            let attr_token = &tokens[span.start];
            let before_type = span.start < interest_span.start;
            let mut i = span.start + span.len;
            if !before_type {
                while i < tokens.len()
                    && (FILLERS.contains(&tokens[i].lower.as_str()) || COMPARATORS.contains(&tokens[i].lower.as_str()))
                {
                    i += 1;
                }
            }
            let from = i;
            while i < tokens.len() && !is_stop(&tokens, i, &types) {
                i += 1;
            }
            let body = &tokens[from..i];
            if body.is_empty() {
                return Err(PreferenceError::NoTemplateMatch(format!("no value given for {name}")));
            }
            let textual = parse_number(&join(body)).is_none();
            // "Tier A conferences", "with Tier A*", "from Brand X": the
            // attribute word is part of the value's display form.
            let carries_attribute = textual && (before_type || (attr_token.is_capitalized() && span.start > 0));
            let value = if carries_attribute {
                join(&tokens[span.start..i])
            } else {
                join(body)
            };
            (name, value)
        }
        None => {
            let hint = tokens.windows(2).find(|w| {
                YEAR_HINTS.contains(&w[0].lower.as_str()) && parse_number(&w[1].text).is_some()
            });
            match (hint, year_like_attribute(ontology, interest)) {
                (Some(w), Some(attr)) => (attr, w[1].text.clone()),
                _ => {
                    return Err(PreferenceError::NoTemplateMatch(format!(
                        "no attribute of {interest} is mentioned"
                    )))
                }
            }
        }
    };

    if ontology.attribute_kind(interest, &attribute) == Some(AttrKind::Numeric) && parse_number(&value).is_none() {
        return Err(PreferenceError::NoTemplateMatch(format!(
            "`{value}` is not a number but {attribute} is numeric"
        )));
    }
    if let Some(t) = connected.iter().find(|t| !ontology.are_adjacent(interest, t)) {
        return Err(PreferenceError::UnknownVocabulary(format!("{t} is not related to {interest}")));
    }

    let pref = UserPreference {
        interest_type: interest.to_string(),
        attribute,
        attribute_value: canonical_value(&value),
        connected_types: connected,
        diversity: DEFAULT_DIVERSITY,
    };
    pref.validate(ontology)?;
    Ok(pref)
}
