//! Deterministic replay from a recorded transcript.

use std::collections::HashMap;
use std::path::Path;

use super::context::{RequestContext, Step};
use super::transcript::{read_transcript, TranscriptEntry, TranscriptError};
use super::{Provider, ProviderError, Reply, Usage};
use crate::graph::NodeId;

/// What to do when no fixture matches a request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplayMode {
    /// Error on miss. The default; keeps tests honest.
    Strict,
    /// Answer misses with a fixed reply and zero token usage.
    Lenient { fallback_reply: String },
}

type Key = (String, Step, Option<NodeId>, u8);

/// Answers every request from fixtures, making runs a pure function of
/// (request context, fixture set). Stateless between calls.
pub struct ReplayProvider {
    entries: HashMap<Key, TranscriptEntry>,
    mode: ReplayMode,
}

impl ReplayProvider {
    pub fn new(entries: Vec<TranscriptEntry>, mode: ReplayMode) -> Self {
        let entries = entries.into_iter().map(|e| (e.key(), e)).collect();
        ReplayProvider { entries, mode }
    }

    pub fn from_reader(
        reader: impl std::io::Read,
        mode: ReplayMode,
    ) -> Result<Self, TranscriptError> {
        Ok(Self::new(read_transcript(reader)?, mode))
    }

    pub fn from_path(path: impl AsRef<Path>, mode: ReplayMode) -> Result<Self, TranscriptError> {
        Ok(Self::new(read_transcript(std::fs::File::open(path)?)?, mode))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Provider for ReplayProvider {
    fn complete(&self, ctx: &RequestContext, _prompt: &str) -> Result<Reply, ProviderError> {
        let key = (ctx.scenario_id.clone(), ctx.step, ctx.node_id, ctx.attempt);
        match self.entries.get(&key) {
            Some(entry) => Ok(Reply {
                text: entry.reply_text.clone(),
                usage: Usage::one_call(entry.input_tokens, entry.output_tokens),
            }),
            None => match &self.mode {
                ReplayMode::Strict => Err(ProviderError::ReplayMiss(ctx.key())),
                ReplayMode::Lenient { fallback_reply } => {
                    Ok(Reply { text: fallback_reply.clone(), usage: Usage::one_call(0, 0) })
                }
            },
        }
    }

    fn deterministic(&self) -> bool {
        true
    }
}
