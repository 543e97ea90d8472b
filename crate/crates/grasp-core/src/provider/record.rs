//! Recording wrapper: pass calls through and append them to a transcript.

use std::io::Write;
use std::sync::Mutex;

use super::transcript::TranscriptEntry;
use super::{Provider, ProviderError, Reply, RequestContext};
use crate::digest::fnv1a64;

/// Wraps any provider and appends one transcript line per successful
/// call. Appends are serialized behind a mutex so concurrent workers
/// cannot interleave lines.
pub struct RecordingProvider<P, W: Write> {
    inner: P,
    sink: Mutex<W>,
}

impl<P: Provider, W: Write + Send> RecordingProvider<P, W> {
    pub fn new(inner: P, sink: W) -> Self {
        RecordingProvider { inner, sink: Mutex::new(sink) }
    }

    /// Flush and hand back the sink.
    pub fn into_sink(self) -> std::io::Result<W> {
        let mut sink = self.sink.into_inner().expect("no poisoned recorder");
        sink.flush()?;
        Ok(sink)
    }
}

impl<P: Provider, W: Write + Send> Provider for RecordingProvider<P, W> {
    fn complete(&self, ctx: &RequestContext, prompt: &str) -> Result<Reply, ProviderError> {
        let reply = self.inner.complete(ctx, prompt)?;
        let entry = TranscriptEntry {
            scenario_id: ctx.scenario_id.clone(),
            step: ctx.step,
            node_id: ctx.node_id,
            attempt: ctx.attempt,
            request_digest: fnv1a64(prompt.as_bytes()),
            reply_text: reply.text.clone(),
            input_tokens: reply.usage.input_tokens,
            output_tokens: reply.usage.output_tokens,
        };
        let line = serde_json::to_string(&entry)
            .map_err(|e| ProviderError::Protocol(format!("transcript serialization: {e}")))?;
        {
            let mut sink = self.sink.lock().expect("no poisoned recorder");
            writeln!(sink, "{line}")
                .and_then(|_| sink.flush())
                .map_err(|e| ProviderError::Protocol(format!("transcript append: {e}")))?;
        }
        Ok(reply)
    }

    fn deterministic(&self) -> bool {
        self.inner.deterministic()
    }
}
