//! HTTP session service over the Context-KG engine.
//!
//! A session binds an immutable graph to a fixed seed. Queries, context
//! refinements and bundle expansions mutate only the session's layout
//! state, never the graph, and every mutation is persisted as a JSON
//! snapshot that can be replayed after a restart.

pub mod api;
pub mod config;
pub mod llm;
pub mod session;
pub mod store;

pub use api::{router, AppState, StartupError};
pub use config::Config;
pub use llm::Models;
