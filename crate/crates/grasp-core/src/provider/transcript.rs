//! Transcript fixtures: one JSON object per line, one line per call.
//!
//! ```json
//! {"scenario_id":"tar-extract-001","step":"assess","node_id":2,"attempt":0,
//!  "request_digest":"a1b2...","reply_text":"1","input_tokens":310,"output_tokens":1}
//! ```

use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};

use super::context::{RequestContext, Step};
use crate::graph::NodeId;

/// One recorded provider call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub scenario_id: String,
    pub step: Step,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_id: Option<NodeId>,
    pub attempt: u8,
    pub request_digest: String,
    pub reply_text: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
}

impl TranscriptEntry {
    pub fn context(&self) -> RequestContext {
        RequestContext {
            scenario_id: self.scenario_id.clone(),
            step: self.step,
            node_id: self.node_id,
            attempt: self.attempt,
        }
    }

    /// Replay lookup key: everything except the digest and the reply.
    pub fn key(&self) -> (String, Step, Option<NodeId>, u8) {
        (self.scenario_id.clone(), self.step, self.node_id, self.attempt)
    }
}

/// Transcript read failures.
#[derive(Debug, thiserror::Error)]
pub enum TranscriptError {
    #[error("transcript io: {0}")]
    Io(#[from] std::io::Error),
    #[error("transcript line {line}: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// Read a JSON Lines transcript; blank lines are skipped.
pub fn read_transcript(reader: impl Read) -> Result<Vec<TranscriptEntry>, TranscriptError> {
    let mut entries = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(&line)
            .map_err(|source| TranscriptError::Malformed { line: i + 1, source })?;
        entries.push(entry);
    }
    Ok(entries)
}
