//! One contract for every model interaction in the pipeline.
//!
//! A [`Provider`] answers a single prompt with text plus token usage. The
//! pipeline steps above it — seed generation, relevance assessment,
//! practice application, final revision, and the graph-builder's
//! normalize/classify calls — are implemented once in [`ops`] and work
//! against any provider:
//!
//! - [`HttpProvider`] speaks a generic chat-completion wire shape, so any
//!   endpoint with that surface (or a proxy in front of one) works.
//! - [`ReplayProvider`] answers from a recorded transcript and is a pure
//!   function of (request context, fixture set).
//! - [`RecordingProvider`] wraps another provider and appends every call
//!   to a JSON Lines transcript that the replay provider can consume.
//! - [`ScriptedProvider`] produces canned scores and code, for offline
//!   runs and tests that do not want fixture files.
//!
//! Transport failures are retried with exponential backoff (two retries);
//! deterministic providers never retry.

mod context;
mod extract;
mod http;
pub mod ops;
mod prompts;
mod record;
mod replay;
mod scripted;
mod transcript;
mod usage;

pub use context::{RequestContext, Step};
pub use extract::{extract_code, extract_last_fenced_block, parse_relevance_score};
pub use http::{HttpConfig, HttpProvider};
pub use prompts::{PromptSet, TemplateError};
pub use record::RecordingProvider;
pub use replay::{ReplayMode, ReplayProvider};
pub use scripted::ScriptedProvider;
pub use transcript::{read_transcript, TranscriptEntry};
pub use usage::{Pricing, Usage};

use std::time::Duration;

/// One model reply: raw text plus the tokens it took.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub text: String,
    pub usage: Usage,
}

/// Provider failures, split by whether a retry can help.
#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    /// Transient transport problem (connection, 429/5xx). Retryable.
    #[error("transport error: {0}")]
    Transport(String),
    /// The endpoint answered but the reply was unusable.
    #[error("protocol error: {0}")]
    Protocol(String),
    /// Model returned an empty reply after retries.
    #[error("empty reply for {0}")]
    EmptyReply(String),
    /// Strict replay had no fixture for this request.
    #[error("replay miss: no fixture for {0}")]
    ReplayMiss(String),
    /// The request violated a precondition (empty prompt, bad scenario).
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    /// Configuration problem (missing API key, bad template).
    #[error("provider configuration: {0}")]
    Config(String),
}

impl ProviderError {
    pub fn is_transport(&self) -> bool {
        matches!(self, ProviderError::Transport(_))
    }
}

/// A model endpoint. Implementations must be callable from multiple
/// worker threads at once.
pub trait Provider: Send + Sync {
    /// Answer one prompt. `ctx` identifies the call for replay keying and
    /// transcript records; the prompt is the full rendered text.
    fn complete(&self, ctx: &RequestContext, prompt: &str) -> Result<Reply, ProviderError>;

    /// Deterministic providers always answer a given context the same way
    /// and are never retried.
    fn deterministic(&self) -> bool {
        false
    }
}

impl<P: Provider + ?Sized> Provider for &P {
    fn complete(&self, ctx: &RequestContext, prompt: &str) -> Result<Reply, ProviderError> {
        (**self).complete(ctx, prompt)
    }
    fn deterministic(&self) -> bool {
        (**self).deterministic()
    }
}

const MAX_TRANSPORT_RETRIES: u32 = 2;
const BACKOFF_BASE: Duration = Duration::from_millis(200);

/// Call a provider, retrying transport errors up to twice with
/// exponential backoff. Each retry bumps the context's attempt counter so
/// recorded transcripts key the calls apart.
pub fn complete_with_retry(
    provider: &dyn Provider,
    ctx: &RequestContext,
    prompt: &str,
) -> Result<Reply, ProviderError> {
    let mut ctx = ctx.clone();
    let mut retries = 0;
    loop {
        match provider.complete(&ctx, prompt) {
            Err(err)
                if err.is_transport()
                    && !provider.deterministic()
                    && retries < MAX_TRANSPORT_RETRIES =>
            {
                std::thread::sleep(BACKOFF_BASE * 2u32.pow(retries));
                retries += 1;
                ctx = ctx.next_attempt();
            }
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};

    struct FlakyProvider {
        failures: AtomicU32,
    }

    impl Provider for FlakyProvider {
        fn complete(&self, ctx: &RequestContext, _prompt: &str) -> Result<Reply, ProviderError> {
            if self
                .failures
                .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |f| f.checked_sub(1))
                .is_ok()
            {
                return Err(ProviderError::Transport("connection reset".into()));
            }
            Ok(Reply { text: format!("attempt {}", ctx.attempt), usage: Usage::one_call(1, 1) })
        }
    }

    #[test]
    fn transport_errors_are_retried_with_attempt_bump() {
        let provider = FlakyProvider { failures: AtomicU32::new(2) };
        let ctx = RequestContext::seed("s1");
        let reply = complete_with_retry(&provider, &ctx, "p").unwrap();
        assert_eq!(reply.text, "attempt 2");
    }

    #[test]
    fn retries_are_bounded() {
        let provider = FlakyProvider { failures: AtomicU32::new(10) };
        let ctx = RequestContext::seed("s1");
        let err = complete_with_retry(&provider, &ctx, "p").unwrap_err();
        assert!(err.is_transport());
        // Two retries spent, eight failures left.
        assert_eq!(provider.failures.load(Ordering::SeqCst), 7);
    }

    struct CountingDeterministic(AtomicU32);

    impl Provider for CountingDeterministic {
        fn complete(&self, _: &RequestContext, _: &str) -> Result<Reply, ProviderError> {
            self.0.fetch_add(1, Ordering::SeqCst);
            Err(ProviderError::Transport("always down".into()))
        }
        fn deterministic(&self) -> bool {
            true
        }
    }

    #[test]
    fn deterministic_providers_never_retry() {
        let provider = CountingDeterministic(AtomicU32::new(0));
        let ctx = RequestContext::seed("s1");
        assert!(complete_with_retry(&provider, &ctx, "p").is_err());
        assert_eq!(provider.0.load(Ordering::SeqCst), 1);
    }
}
