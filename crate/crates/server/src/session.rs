//! One exploration session: its graph, fixed seed, current query, the
//! ordered history of refinements and the model transcript.
//!
//! All operations here are synchronous and may block on model calls; the
//! HTTP layer runs them on blocking tasks, one at a time per session.

use std::time::{SystemTime, UNIX_EPOCH};

use contextkg_core::context::{apply_directive, expand_bundle, ContextError};
use contextkg_core::graph::{GraphDocument, GraphError, Ontology};
use contextkg_core::insights::{encode_features, generate_insights, InsightReport};
use contextkg_core::layout::{to_json, ContextLayout};
use contextkg_core::pipeline::{run_with_preference, AnswerSubgraph, PipelineError};
use contextkg_core::preference::{
    classify_context, classify_context_offline, extract_preferences, extract_preferences_offline, PreferenceError,
};
use contextkg_core::sampling::SamplePlan;
use contextkg_core::{ContextDirective, KnowledgeGraph, UserPreference};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::llm::{Models, Recorder, Transcript};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("the question is empty")]
    EmptyQuestion,
    #[error("no query has run in this session yet")]
    NoQuery,
    #[error(transparent)]
    Preference(#[from] PreferenceError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("snapshot version {0} is not supported")]
    SnapshotVersion(u32),
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

/// Where a session's graph came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphSource {
    Named(String),
    Document(GraphDocument),
}

/// A loaded, immutable graph with its ontology.
pub struct LoadedGraph {
    pub source: GraphSource,
    pub kg: KnowledgeGraph,
    pub ontology: Ontology,
}

impl LoadedGraph {
    pub fn name(&self) -> &str {
        match &self.source {
            GraphSource::Named(n) => n,
            GraphSource::Document(_) => self.kg.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryParams {
    pub question: String,
    #[serde(default)]
    pub diversity: Option<f64>,
    #[serde(default)]
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub params: QueryParams,
    pub preference: UserPreference,
    pub budget: usize,
}

/// A refinement applied after the query, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum HistoryEvent {
    Directive {
        description: String,
        directive: ContextDirective,
    },
    Expand {
        bundle: String,
    },
}

/// Everything needed to rebuild a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub version: u32,
    pub id: String,
    pub seed: u64,
    pub graph: GraphSource,
    pub created_ms: u64,
    pub updated_ms: u64,
    #[serde(default)]
    pub query: Option<QueryRecord>,
    #[serde(default)]
    pub history: Vec<HistoryEvent>,
    #[serde(default)]
    pub transcript: Transcript,
}

/// Results of the current query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryView {
    pub preference: UserPreference,
    pub answers: AnswerSubgraph,
    pub plan: SamplePlan,
    pub connected_truncated: bool,
}

pub struct SessionState {
    pub snapshot: Snapshot,
    pub view: Option<QueryView>,
    pub layout: Option<ContextLayout>,
    pub insight: Option<InsightReport>,
}

impl SessionState {
    pub fn new(id: String, seed: u64, graph: GraphSource) -> Self {
        let now = now_ms();
        SessionState {
            snapshot: Snapshot {
                version: SNAPSHOT_VERSION,
                id,
                seed,
                graph,
                created_ms: now,
                updated_ms: now,
                query: None,
                history: Vec::new(),
                transcript: Transcript::default(),
            },
            view: None,
            layout: None,
            insight: None,
        }
    }

    /// Exported layout JSON, if a query has run.
    pub fn layout_json(&self) -> Option<String> {
        self.layout.as_ref().map(to_json)
    }

    fn recorder(&self, models: &Models) -> Recorder {
        Recorder::live(models.clone(), self.snapshot.transcript.clone())
    }

    fn compute(
        &self,
        graph: &LoadedGraph,
        pref: UserPreference,
        budget: usize,
        config: &Config,
        recorder: &Recorder,
    ) -> Result<(QueryView, ContextLayout), SessionError> {
        let out = run_with_preference(
            &graph.kg,
            &graph.ontology,
            pref,
            budget,
            self.snapshot.seed,
            false,
            &config.engine,
            recorder.embedder(),
            recorder.chat(),
        )?;
        Ok((
            QueryView {
                preference: out.preference,
                answers: out.answers,
                plan: out.sample.plan,
                connected_truncated: out.connected_truncated,
            },
            out.layout,
        ))
    }

    /// Extract → retrieve → cluster → sample → lay out. Replaces the current
    /// layout and clears the refinement history.
    pub fn run_query(
        &mut self,
        graph: &LoadedGraph,
        params: QueryParams,
        config: &Config,
        models: &Models,
    ) -> Result<(), SessionError> {
        let question = params.question.trim();
        if question.is_empty() {
            return Err(SessionError::EmptyQuestion);
        }
        let recorder = self.recorder(models);
        let mut pref = match recorder.chat() {
            Some(c) => extract_preferences(question, &graph.ontology, c)?,
            None => extract_preferences_offline(question, &graph.ontology)?,
        };
        pref.diversity = params.diversity.unwrap_or(config.engine.sampling.sigma_default);
        let budget = params.budget.unwrap_or(config.engine.sampling.budget);
        let (view, layout) = self.compute(graph, pref.clone(), budget, config, &recorder)?;
        self.snapshot.query = Some(QueryRecord {
            params,
            preference: pref,
            budget,
        });
        self.snapshot.history.clear();
        self.snapshot.transcript = recorder.transcript();
        self.snapshot.updated_ms = now_ms();
        self.view = Some(view);
        self.layout = Some(layout);
        self.insight = None;
        Ok(())
    }

    /// Classifies a context description and applies it to the layout.
    pub fn apply_context(
        &mut self,
        graph: &LoadedGraph,
        description: &str,
        models: &Models,
    ) -> Result<ContextDirective, SessionError> {
        let (Some(layout), Some(view)) = (&self.layout, &self.view) else {
            return Err(SessionError::NoQuery);
        };
        let recorder = self.recorder(models);
        let directive = match recorder.chat() {
            Some(c) => classify_context(description, &view.preference, &graph.ontology, c)?,
            None => classify_context_offline(description, &view.preference, &graph.ontology)?,
        };
        let mut next = layout.clone();
        apply_directive(&mut next, &graph.kg, &directive)?;
        self.layout = Some(next);
        self.snapshot.history.push(HistoryEvent::Directive {
            description: description.trim().to_string(),
            directive: directive.clone(),
        });
        self.snapshot.transcript = recorder.transcript();
        self.snapshot.updated_ms = now_ms();
        Ok(directive)
    }

    pub fn expand(&mut self, bundle: &str) -> Result<(), SessionError> {
        let layout = self.layout.as_mut().ok_or(SessionError::NoQuery)?;
        expand_bundle(layout, bundle)?;
        self.snapshot.history.push(HistoryEvent::Expand {
            bundle: bundle.to_string(),
        });
        self.snapshot.updated_ms = now_ms();
        Ok(())
    }

    /// The insight report for the current layout, computed on first request.
    pub fn insights(&mut self, graph: &LoadedGraph, models: &Models) -> Result<InsightReport, SessionError> {
        if let Some(r) = &self.insight {
            return Ok(r.clone());
        }
        let (Some(layout), Some(record)) = (&self.layout, &self.snapshot.query) else {
            return Err(SessionError::NoQuery);
        };
        let recorder = self.recorder(models);
        let features = encode_features(layout);
        let report = generate_insights(
            &features,
            &record.params.question,
            &record.preference,
            &graph.ontology,
            layout,
            &graph.kg,
            recorder.chat(),
        );
        self.snapshot.transcript = recorder.transcript();
        self.insight = Some(report.clone());
        Ok(report)
    }

    /// Rebuilds a session from its snapshot: the stored preference is laid
    /// out again with the stored seed, then the history is re-applied. Model
    /// calls are answered from the transcript only.
    pub fn replay(snapshot: Snapshot, graph: &LoadedGraph, config: &Config) -> Result<Self, SessionError> {
        if snapshot.version != SNAPSHOT_VERSION {
            return Err(SessionError::SnapshotVersion(snapshot.version));
        }
        let mut state = SessionState {
            snapshot,
            view: None,
            layout: None,
            insight: None,
        };
        let Some(record) = state.snapshot.query.clone() else {
            return Ok(state);
        };
        let recorder = Recorder::replay(state.snapshot.transcript.clone());
        let (view, mut layout) = state.compute(graph, record.preference, record.budget, config, &recorder)?;
        for event in &state.snapshot.history {
            match event {
                HistoryEvent::Directive { directive, .. } => apply_directive(&mut layout, &graph.kg, directive)?,
                HistoryEvent::Expand { bundle } => expand_bundle(&mut layout, bundle)?,
            }
        }
        state.view = Some(view);
        state.layout = Some(layout);
        Ok(state)
    }
}
