//! Per-stage seed schedule.
//!
//! Every random stage of an experiment draws its seed from
//! `SHA-256(master_seed as 8 little-endian bytes || tag)`, reading the first
//! eight digest bytes as a little-endian `u64`. Any stage can therefore be
//! rerun on its own from the master seed and its tag.
//!
//! | tag              | stage                                              |
//! |------------------|----------------------------------------------------|
//! | `synthetic`      | synthetic dataset generation                       |
//! | `split`          | stratified train / validation / test split         |
//! | `rank`           | forest ranking for WFS column selection            |
//! | `attack-kmeans`  | k-means inside the flipping attack                 |
//! | `target-cnn`     | every target CNN fit (clean, poisoned, corrected)  |
//! | `defense-cnn`    | validation-trained CNNs inside LSD and CSD         |
//! | `csd-kmeans`     | k-means on the validation set inside CSD           |
//! | `gan-rank`       | forest ranking of the poisoned set for the baseline |
//! | `repeat-<r>`     | master seed of repeat `r >= 1`                      |

use sha2::{Digest, Sha256};

pub const SYNTHETIC: &str = "synthetic";
pub const SPLIT: &str = "split";
pub const RANK: &str = "rank";
pub const ATTACK_KMEANS: &str = "attack-kmeans";
pub const TARGET_CNN: &str = "target-cnn";
pub const DEFENSE_CNN: &str = "defense-cnn";
pub const CSD_KMEANS: &str = "csd-kmeans";
pub const GAN_RANK: &str = "gan-rank";

pub fn stage_seed(master: u64, tag: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(tag.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Repeat 0 runs on the master seed itself.
pub fn repeat_seed(master: u64, repeat: usize) -> u64 {
    if repeat == 0 {
        master
    } else {
        stage_seed(master, &format!("repeat-{repeat}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_separate_streams() {
        let tags = [
            SYNTHETIC,
            SPLIT,
            RANK,
            ATTACK_KMEANS,
            TARGET_CNN,
            DEFENSE_CNN,
            CSD_KMEANS,
            GAN_RANK,
        ];
        let mut seeds: Vec<u64> = tags.iter().map(|t| stage_seed(7, t)).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), tags.len());
        assert_ne!(stage_seed(7, SPLIT), stage_seed(8, SPLIT));
        assert_eq!(stage_seed(7, SPLIT), stage_seed(7, SPLIT));
    }

    #[test]
    fn known_digests() {
        // first eight bytes of sha256(le64(master) || tag), from an external sha256
        assert_eq!(stage_seed(0, "split"), 14264620331714372892);
        assert_eq!(stage_seed(42, "target-cnn"), 9389853309009214562);
    }

    #[test]
    fn first_repeat_is_master() {
        assert_eq!(repeat_seed(42, 0), 42);
        assert_eq!(repeat_seed(42, 1), stage_seed(42, "repeat-1"));
    }
}
