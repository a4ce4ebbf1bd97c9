//! Cluster labels: formatted means for numbers, topics for text.

use std::collections::{BTreeMap, HashMap};

use crate::preference::prompts;
use crate::preference::{LanguageModelClient, Prompt};
use crate::text::{parse_number, terms};

use super::{ClusterKind, ClusterSet};

const STOP_WORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "by", "for", "from", "in", "is", "of", "on", "or", "the", "to", "with",
];

/// Number of decimals in the shortest round-trip representation of `v`.
pub(crate) fn decimals(v: f64) -> usize {
    let s = format!("{v}");
    match s.split_once('.') {
        Some((_, frac)) if !s.contains('e') => frac.len(),
        _ => 0,
    }
}

/// Mean formatted with `precision` decimals.
pub fn numeric_label(mean: f64, precision: usize) -> String {
    let s = format!("{mean:.precision$}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Three most frequent non-stop-word terms, ties broken alphabetically.
pub fn term_frequency_label(texts: &[&str]) -> String {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for t in texts {
        for term in terms(t) {
            if !STOP_WORDS.contains(&term.as_str()) {
                *counts.entry(term).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let top: Vec<String> = ranked.into_iter().take(3).map(|(t, _)| t).collect();
    if top.is_empty() {
        "(empty)".into()
    } else {
        top.join("/")
    }
}

fn topic_from_completion(text: &str) -> Option<String> {
    let line = text.lines().map(str::trim).find(|l| !l.is_empty())?;
    let line = line.trim_start_matches(['-', '*', ' ']).trim_matches(['"', '\'', '.', ' ']);
    let line = line.strip_prefix("Label:").unwrap_or(line).trim();
    let words: Vec<&str> = line.split_whitespace().take(4).collect();
    (!words.is_empty()).then(|| words.join(" "))
}

/// Relabels clusters from the members' raw attribute values (`node id → value`).
///
/// Numeric clusters get their mean at the observed precision. Text clusters
/// get a model-generated topic of at most four words when a client is given
/// and answers, otherwise the term-frequency label.
pub fn label_clusters(
    mut set: ClusterSet,
    raw_values: &BTreeMap<String, String>,
    client: Option<&dyn LanguageModelClient>,
) -> ClusterSet {
    match set.kind {
        ClusterKind::Numeric => {
            let precision = raw_values
                .values()
                .filter_map(|v| parse_number(v))
                .map(decimals)
                .max()
                .unwrap_or(0);
            for c in &mut set.clusters {
                let nums: Vec<f64> = c
                    .members
                    .iter()
                    .filter_map(|m| raw_values.get(m).and_then(|v| parse_number(v)))
                    .collect();
                if !nums.is_empty() {
                    c.label = numeric_label(nums.iter().sum::<f64>() / nums.len() as f64, precision);
                }
            }
        }
        ClusterKind::Text => {
            for c in &mut set.clusters {
                let texts: Vec<&str> = c
                    .members
                    .iter()
                    .filter_map(|m| raw_values.get(m).map(String::as_str))
                    .collect();
                if texts.is_empty() {
                    continue;
                }
                let fallback = term_frequency_label(&texts);
                c.label = client
                    .and_then(|client| {
                        let listing: String = texts.iter().take(20).map(|t| format!("- {t}\n")).collect();
                        let prompt = Prompt {
                            template: "cluster_topic.v1".into(),
                            system: prompts::SYSTEM.into(),
                            user: prompts::render(prompts::CLUSTER_TOPIC, &[("values", &listing)]),
                        };
                        client.complete(&prompt).ok()
                    })
                    .and_then(|t| topic_from_completion(&t))
                    .unwrap_or(fallback);
            }
        }
    }
    set
}
