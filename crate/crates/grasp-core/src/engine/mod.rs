//! Strategy registry and the traversal state machine.
//!
//! Six strategies share one entry point, [`run_strategy`]:
//!
//! - `Base` — one plain generation from the task prompt.
//! - `ZeroShot` — one generation with the security-engineer preamble.
//! - `PlanAndSolve` — one structured prompt walking plan, vulnerable
//!   components, analysis, malicious inputs, mitigations, execution.
//! - `FlatScp` — one generation whose prompt appends every practice as an
//!   unordered list (no graph structure, no reasoning).
//! - `FullTraversal` — the graph without reasoning: every node applied in
//!   topological order, no relevance scoring.
//! - `Grasp` — the full gated traversal.

mod trace;
mod traverse;

pub use trace::{Gate, SnapshotId, Snapshots, TraceEntry, TraversalTrace};
pub use traverse::{full_traversal, grasp_traverse, Tau, Traversal, TraversalError};

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::eval::Scenario;
use crate::graph::ScpGraph;
use crate::provider::ops::generate_initial;
use crate::provider::{
    complete_with_retry, extract_code, PromptSet, Provider, ProviderError, RequestContext, Usage,
};

/// The closed set of strategies. Unknown names are rejected when
/// configuration is parsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyId {
    Base,
    ZeroShot,
    PlanAndSolve,
    Grasp,
    FlatScp,
    FullTraversal,
}

impl StrategyId {
    pub const ALL: [StrategyId; 6] = [
        StrategyId::Base,
        StrategyId::ZeroShot,
        StrategyId::PlanAndSolve,
        StrategyId::Grasp,
        StrategyId::FlatScp,
        StrategyId::FullTraversal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StrategyId::Base => "base",
            StrategyId::ZeroShot => "zero-shot",
            StrategyId::PlanAndSolve => "plan-and-solve",
            StrategyId::Grasp => "grasp",
            StrategyId::FlatScp => "flat-scp",
            StrategyId::FullTraversal => "full-traversal",
        }
    }

    /// Whether this strategy needs the practice graph.
    pub fn needs_graph(&self) -> bool {
        matches!(self, StrategyId::Grasp | StrategyId::FlatScp | StrategyId::FullTraversal)
    }
}

impl std::fmt::Display for StrategyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl FromStr for StrategyId {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, StrategyError> {
        let normalized = s.trim().to_ascii_lowercase().replace('_', "-");
        StrategyId::ALL
            .into_iter()
            .find(|id| id.name() == normalized)
            .ok_or_else(|| StrategyError::UnknownStrategy(s.to_string()))
    }
}

/// Strategy-level failures.
#[derive(Debug, thiserror::Error)]
pub enum StrategyError {
    #[error("unknown strategy {0:?} (expected one of: base, zero-shot, plan-and-solve, grasp, flat-scp, full-traversal)")]
    UnknownStrategy(String),
    #[error("strategy {0} requires a practice graph")]
    MissingGraph(StrategyId),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Traversal(#[from] TraversalError),
}

/// What a strategy produced for one sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyRun {
    pub code: String,
    /// Present for the traversal strategies only.
    pub traversal: Option<Traversal>,
    pub usage: Usage,
    /// Refinement steps: 1 for the single-prompt strategies, the
    /// traversal's iteration count otherwise.
    pub iterations: u32,
}

fn single_prompt(
    provider: &dyn Provider,
    prompts: &PromptSet,
    template: &str,
    scenario: &Scenario,
    bindings: &[(&str, &str)],
) -> Result<StrategyRun, StrategyError> {
    let prompt =
        prompts.render(template, bindings).map_err(|e| ProviderError::Config(e.to_string()))?;
    let ctx = RequestContext::seed(&scenario.id);
    let reply = complete_with_retry(provider, &ctx, &prompt)?;
    if reply.text.trim().is_empty() {
        return Err(ProviderError::EmptyReply(ctx.key()).into());
    }
    Ok(StrategyRun {
        code: extract_code(&reply.text),
        traversal: None,
        usage: reply.usage,
        iterations: 1,
    })
}

/// Run one strategy for one scenario. Graph-requiring strategies error
/// without a graph; the others ignore it.
pub fn run_strategy(
    strategy: StrategyId,
    scenario: &Scenario,
    graph: Option<&ScpGraph>,
    provider: &dyn Provider,
    prompts: &PromptSet,
    tau: Tau,
) -> Result<StrategyRun, StrategyError> {
    if strategy.needs_graph() && graph.is_none() {
        return Err(StrategyError::MissingGraph(strategy));
    }
    match strategy {
        StrategyId::Base => {
            let (code, usage) = generate_initial(provider, prompts, scenario)?;
            Ok(StrategyRun { code, traversal: None, usage, iterations: 1 })
        }
        StrategyId::ZeroShot => single_prompt(
            provider,
            prompts,
            "zero_shot",
            scenario,
            &[("scenario", &scenario.prompt)],
        ),
        StrategyId::PlanAndSolve => single_prompt(
            provider,
            prompts,
            "plan_and_solve",
            scenario,
            &[("scenario", &scenario.prompt)],
        ),
        StrategyId::FlatScp => {
            let graph = graph.expect("checked above");
            let practices: Vec<String> = graph.nodes().map(|n| format!("- {}", n.text)).collect();
            let listing = practices.join("\n");
            single_prompt(
                provider,
                prompts,
                "flat_scp",
                scenario,
                &[("scenario", &scenario.prompt), ("scp_text", &listing)],
            )
        }
        StrategyId::FullTraversal => {
            let traversal =
                full_traversal(scenario, graph.expect("checked above"), provider, prompts)?;
            Ok(StrategyRun {
                code: traversal.final_code.clone(),
                usage: traversal.usage,
                iterations: traversal.trace.iteration_count,
                traversal: Some(traversal),
            })
        }
        StrategyId::Grasp => {
            let traversal =
                grasp_traverse(scenario, graph.expect("checked above"), provider, prompts, tau)?;
            Ok(StrategyRun {
                code: traversal.final_code.clone(),
                usage: traversal.usage,
                iterations: traversal.trace.iteration_count,
                traversal: Some(traversal),
            })
        }
    }
}
