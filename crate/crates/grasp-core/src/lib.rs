//! GRASP core: graph-based reasoning over secure coding practices (SCPs).
//!
//! The crate is organized around the stages of the pipeline:
//!
//! - [`graph`] — the SCP graph: an immutable DAG of natural-language
//!   practices with specificity and sequential edges, plus validation,
//!   transitive reduction, and deterministic topological ordering.
//! - [`provider`] — one contract for every model interaction: a live
//!   chat-completion client, a deterministic replay provider, a recording
//!   wrapper, a scripted provider for offline runs, and token/cost
//!   accounting.
//! - [`engine`] — the traversal state machine that refines a seed solution
//!   by walking the graph and applying relevant practices, plus the
//!   baseline and ablation strategies.
//! - [`builder`] — the model-assisted pipeline that turns a flat practice
//!   checklist into a validated graph with a human-review export.
//! - [`eval`] — validity checking, security analysis adapters, functional
//!   test execution, and the security-rate / secure-pass@k metrics.
//!
//! Graphs are immutable after construction and safe to share across
//! worker threads; providers are required to be `Send + Sync`.

pub mod builder;
pub mod digest;
pub mod engine;
pub mod eval;
pub mod graph;
pub mod provider;
pub mod rational;

pub use graph::{EdgeKind, NodeId, ScpEdge, ScpGraph, ScpNode};
pub use provider::{Provider, Reply, RequestContext, Step, Usage};
pub use rational::Rational;
