//! Small shared helpers.

/// Stable 64-bit hash of a seed plus string parts (FNV-1a).
///
/// Used to derive per-record and per-stage RNG seeds. Unlike the std hasher
/// this is fixed across runs, platforms, and compiler versions, which the
/// regeneration-from-provenance contract depends on.
pub fn stable_hash64(seed: u64, parts: &[&str]) -> u64 {
    const OFFSET: u64 = 0xcbf29ce484222325;
    const PRIME: u64 = 0x100000001b3;

    let mut h = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(PRIME);
        }
    };
    eat(&seed.to_le_bytes());
    for part in parts {
        // Length prefix keeps ("ab","c") distinct from ("a","bc").
        eat(&(part.len() as u64).to_le_bytes());
        eat(part.as_bytes());
    }
    h
}
