/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based seed for one `(profile, m, trial)` cell.
///
/// Each key is folded through its own mixing round so neighbouring keys land
/// on unrelated streams.
pub fn trial_seed(master: u64, profile_index: usize, m: usize, trial: usize) -> u64 {
    [profile_index as u64, m as u64, trial as u64]
        .into_iter()
        .fold(mix(master), |acc, key| mix(acc ^ mix(key)))
}
