//! Context-KG engine: turns a natural-language question over a typed
//! knowledge graph into a preference-driven, ontology-aware 2-D layout.
//!
//! The pipeline runs in stages that can also be used on their own:
//!
//! 1. [`preference`] extracts the user's intent (interest type, attribute,
//!    value, connected types) and classifies follow-up context requests.
//! 2. [`graph`] retrieves the interest subgraph.
//! 3. [`clustering`] groups interest nodes by the preferred attribute.
//! 4. [`sampling`] picks a bounded, diversity-controlled subset.
//! 5. [`layout`] places type regions, cluster arcs and nodes.
//! 6. [`context`] applies neighbor / edge / path emphasis.
//! 7. [`insights`] summarizes structure and renders a report.
//!
//! [`pipeline`] wires the stages together.

pub mod clustering;
pub mod config;
pub mod context;
pub mod graph;
pub mod insights;
pub mod layout;
pub mod par;
pub mod pipeline;
pub mod preference;
pub mod sampling;
pub mod text;

pub use graph::{derive_ontology, distance_matrix, load_graph, query_instances, KnowledgeGraph, Ontology};
pub use par::ExecMode;
pub use pipeline::{run_query, QueryOutcome, QueryRequest};
pub use preference::{ContextDirective, UserPreference};
