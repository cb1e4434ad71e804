//! Deterministic derivation of per-work-item RNG seeds.
//!
//! Every parallelizable loop (sphere points, bootstrap replicates, design
//! batches) derives one seed per item from the user seed and the item's
//! indices, so results do not depend on scheduling or thread count.

/// SplitMix64 step.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `base` and a path of tags.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(base);
    for &t in tags {
        state = splitmix64(state ^ splitmix64(t.wrapping_add(0xA076_1D64_78BD_642F)));
    }
    state
}

/// Stable tag for a floating grid value (bit pattern, so distinct grid points
/// derive distinct streams).
pub fn tag_f64(x: f64) -> u64 {
    x.to_bits()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_deterministic_and_tag_sensitive() {
        assert_eq!(derive_seed(42, &[1, 2]), derive_seed(42, &[1, 2]));
        assert_ne!(derive_seed(42, &[1, 2]), derive_seed(42, &[2, 1]));
        assert_ne!(derive_seed(42, &[1]), derive_seed(43, &[1]));
        assert_ne!(derive_seed(42, &[]), derive_seed(42, &[0]));
    }
}
