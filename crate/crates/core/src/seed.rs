//! Deterministic seed derivation and the avalanche mixer behind the hash
//! projection. Everything here is fixed for all time: changing a constant
//! changes every seeded artifact.

/// splitmix64 finalizer. Full-avalanche: every input bit affects every
/// output bit.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from a master seed and two tags
/// (e.g. frame index and pipeline stage).
pub fn derive(master: u64, a: u64, b: u64) -> u64 {
    mix64(master ^ mix64(a ^ mix64(b)))
}

/// Hash cell for the sparse projection: mixes (seed, s, j, tag) into a
/// value reduced modulo `m`. `tag` separates the row draw from the sign
/// draw so the two stay independent.
pub fn hash_cell(seed: u64, s: u32, j: u64, tag: u64, m: u64) -> u64 {
    let z = seed
        ^ (s as u64).wrapping_mul(0xA24BAED4963EE407)
        ^ j.wrapping_mul(0x9FB21C651E98DF25)
        ^ tag.wrapping_mul(0xD6E8FEB86659FD93);
    mix64(z) % m
}
