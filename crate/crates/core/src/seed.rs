//! Counter-based seed derivation.
//!
//! Every stream of runs is addressed by `(master_seed, index)`. The derived
//! seed is the SplitMix64 output for the state
//! `master_seed + (index + 1) * 0x9E3779B97F4A7C15` (wrapping arithmetic):
//!
//! ```text
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z =  z ^ (z >> 31)
//! ```
//!
//! Derivation is pure, so runs may be evaluated in any order or concurrently.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed for item `index` of the stream rooted at `master`.
pub fn mix(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the sub-stream `path` below `master`, e.g. `derive(m, &[test, cell])`.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(master, |acc, &i| mix(acc, i))
}
