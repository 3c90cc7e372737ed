//! Seed derivation and stable hashing.
//!
//! Pipeline stages each get their own RNG stream derived from the master
//! seed, so adding or removing a stage never perturbs another stage's draws.
//! The hashes here are fixed algorithms (FNV-1a, SplitMix64) rather than
//! `std::hash` so outputs stay identical across compiler versions.

use serde::Serialize;

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

/// 64-bit FNV-1a over a byte slice.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derives a per-stage seed from the master seed and a stream label.
pub fn derive_seed(master: u64, stream: &str) -> u64 {
    splitmix64(master ^ fnv1a(stream.as_bytes()))
}

/// Stable content hash of any serializable value, via its canonical JSON.
///
/// Used to stamp checkpoints with the schema and feature config they were
/// trained against.
pub fn stable_hash<T: Serialize>(value: &T) -> u64 {
    let json = serde_json::to_string(value).expect("value serializes");
    fnv1a(json.as_bytes())
}
