//! Deterministic per-trial seed derivation.
//!
//! Randomized components derive one child seed per trial index from a master
//! seed, so results are reproducible and independent of how trials are
//! scheduled across threads.

/// Derive the child seed for `index` from `master` (splitmix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
