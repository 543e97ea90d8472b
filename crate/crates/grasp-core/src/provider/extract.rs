//! Reply parsing: fenced code extraction and relevance-score parsing.

/// The last fenced code block in a reply, fence markers and language tag
/// stripped. Models often restate the task before the final code, so the
/// last block wins.
pub fn extract_last_fenced_block(reply: &str) -> Option<String> {
    let mut blocks = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in reply.lines() {
        let trimmed = line.trim_start();
        if trimmed.starts_with("```") {
            match current.take() {
                Some(block) => blocks.push(block.join("\n")),
                None => current = Some(Vec::new()),
            }
            continue;
        }
        if let Some(block) = current.as_mut() {
            block.push(line);
        }
    }
    // An unterminated fence still counts: take everything after it.
    if let Some(block) = current {
        blocks.push(block.join("\n"));
    }
    blocks.pop()
}

/// Code extraction for seed and revise replies: last fenced block if any,
/// otherwise the whole reply.
pub fn extract_code(reply: &str) -> String {
    extract_last_fenced_block(reply).unwrap_or_else(|| reply.trim().to_string())
}

/// First integer found in a relevance reply, clamped into 1..=5.
/// `None` when the reply contains no digits at all.
pub fn parse_relevance_score(reply: &str) -> Option<u8> {
    let mut digits = String::new();
    for c in reply.chars() {
        if c.is_ascii_digit() {
            digits.push(c);
        } else if !digits.is_empty() {
            break;
        }
    }
    if digits.is_empty() {
        return None;
    }
    let value: u64 = digits.parse().unwrap_or(u64::MAX);
    Some(value.clamp(1, 5) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_block_wins() {
        let reply =
            "Here is a draft:\n```python\nold = 1\n```\nFinal version:\n```python\nnew = 2\n```\n";
        assert_eq!(extract_last_fenced_block(reply).unwrap(), "new = 2");
    }

    #[test]
    fn no_fence_means_whole_reply_for_seed() {
        assert_eq!(extract_code("def f():\n    pass"), "def f():\n    pass");
    }

    #[test]
    fn no_fence_is_none_for_blocks() {
        assert_eq!(extract_last_fenced_block("just prose"), None);
    }

    #[test]
    fn unterminated_fence_takes_the_tail() {
        let reply = "text\n```python\nx = 1\ny = 2";
        assert_eq!(extract_last_fenced_block(reply).unwrap(), "x = 1\ny = 2");
    }

    #[test]
    fn indented_fences_are_recognized() {
        let reply = "  ```\ncode\n  ```";
        assert_eq!(extract_last_fenced_block(reply).unwrap(), "code");
    }

    #[test]
    fn scores_parse_and_clamp() {
        assert_eq!(parse_relevance_score("4"), Some(4));
        assert_eq!(parse_relevance_score("Relevance: 5/5"), Some(5));
        assert_eq!(parse_relevance_score("score is 7"), Some(5));
        assert_eq!(parse_relevance_score("0"), Some(1));
        assert_eq!(parse_relevance_score("I'd say 12 out of 10"), Some(5));
        assert_eq!(parse_relevance_score("very relevant"), None);
        assert_eq!(parse_relevance_score(""), None);
    }
}
