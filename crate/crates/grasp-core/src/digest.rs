//! Stable content digests for transcripts and reproducibility manifests.
//!
//! FNV-1a is enough here: digests key replay transcripts and detect input
//! drift between runs; they are not a security boundary.

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

/// 64-bit FNV-1a digest of arbitrary bytes, rendered as 16 hex digits.
pub fn fnv1a64(bytes: &[u8]) -> String {
    let mut hash = FNV_OFFSET;
    for b in bytes {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    format!("{hash:016x}")
}
