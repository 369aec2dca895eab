//! Silhouette-driven label flipping.
//!
//! Training rows are clustered into two groups by k-means; every row whose
//! silhouette value against that clustering is `<= 0` has its label flipped.

use std::io::Write;

use crate::cluster::{kmeans_fit, silhouette_values, KMeansConfig, KMeansModel, SilhouetteValues};
use crate::data::Dataset;
use crate::{Error, Label, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FlipResult {
    pub poisoned_labels: Vec<Label>,
    pub flip_mask: Vec<bool>,
    /// `None` when the clustering collapsed to a single group.
    pub sv: Option<SilhouetteValues>,
    pub kmeans: KMeansModel,
    pub degenerate: bool,
}

impl FlipResult {
    pub fn n_flipped(&self) -> usize {
        self.flip_mask.iter().filter(|&&f| f).count()
    }
}

/// `|1 - y|` where the mask is set, `y` elsewhere.
pub fn apply_flip_mask(labels: &[Label], mask: &[bool]) -> Result<Vec<Label>> {
    if labels.len() != mask.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            actual: mask.len(),
        });
    }
    Ok(labels
        .iter()
        .zip(mask)
        .map(|(&y, &flip)| {
            if flip {
                (1 - i16::from(y)).unsigned_abs() as Label
            } else {
                y
            }
        })
        .collect())
}

pub fn sclfa(train: &Dataset, kmeans_cfg: &KMeansConfig) -> Result<FlipResult> {
    if train.n() < 2 {
        return Err(Error::data("the attack needs at least two training rows"));
    }
    let cfg = KMeansConfig {
        n_clusters: 2,
        ..kmeans_cfg.clone()
    };
    let kmeans = kmeans_fit(&train.to_matrix(), &cfg)?;
    let unchanged = |kmeans| FlipResult {
        poisoned_labels: train.labels().to_vec(),
        flip_mask: vec![false; train.n()],
        sv: None,
        kmeans,
        degenerate: true,
    };
    if kmeans.degenerate || kmeans.cluster_sizes().contains(&0) {
        return Ok(unchanged(kmeans));
    }
    let sv = match silhouette_values(&train.to_matrix(), &kmeans.assignment) {
        Ok(sv) => sv,
        Err(_) => return Ok(unchanged(kmeans)),
    };
    let flip_mask: Vec<bool> = sv.as_slice().iter().map(|&s| s <= 0.0).collect();
    let poisoned_labels = apply_flip_mask(train.labels(), &flip_mask)?;
    Ok(FlipResult {
        poisoned_labels,
        flip_mask,
        sv: Some(sv),
        kmeans,
        degenerate: false,
    })
}

/// Audit CSV with columns `row_id,sv,flipped`.
pub fn write_flip_csv(result: &FlipResult, row_ids: &[usize], out: &mut impl Write) -> Result<()> {
    if row_ids.len() != result.flip_mask.len() {
        return Err(Error::Dimension {
            expected: result.flip_mask.len(),
            actual: row_ids.len(),
        });
    }
    writeln!(out, "row_id,sv,flipped")?;
    for (i, (&id, &flipped)) in row_ids.iter().zip(&result.flip_mask).enumerate() {
        let sv = result
            .sv
            .as_ref()
            .map(|s| format!("{:.6}", s.as_slice()[i]))
            .unwrap_or_default();
        writeln!(out, "{id},{sv},{}", u8::from(flipped))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SyntheticSpec};
    use ndarray::array;

    #[test]
    fn separable_blobs_are_untouched() {
        let ds = generate_synthetic(&SyntheticSpec::new(100, 16, 1.0, 0.0, 0.0, 2)).unwrap();
        let res = sclfa(&ds, &KMeansConfig::with_seed(1)).unwrap();
        assert_eq!(res.n_flipped(), 0);
        assert_eq!(res.poisoned_labels, ds.labels());
        assert!(!res.degenerate);
    }

    #[test]
    fn flip_rule_is_an_involution() {
        let labels = [0, 1, 1, 0, 1];
        let mask = [true, false, true, true, false];
        let once = apply_flip_mask(&labels, &mask).unwrap();
        assert_eq!(once, vec![1, 1, 0, 1, 1]);
        assert_eq!(apply_flip_mask(&once, &mask).unwrap(), labels);
    }

    #[test]
    fn coincident_rows_are_degenerate() {
        let ds = Dataset::new(
            array![[1u8, 0], [1, 0], [1, 0]],
            vec![0, 1, 0],
            Dataset::default_names(2),
        )
        .unwrap();
        let res = sclfa(&ds, &KMeansConfig::default()).unwrap();
        assert!(res.degenerate);
        assert_eq!(res.n_flipped(), 0);
        assert!(res.sv.is_none());
    }

    #[test]
    fn csv_layout() {
        let ds = generate_synthetic(&SyntheticSpec::new(3, 4, 1.0, 0.0, 0.0, 0)).unwrap();
        let res = sclfa(&ds, &KMeansConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_flip_csv(&res, ds.row_ids(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "row_id,sv,flipped");
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("0,1.000000,0"));
    }
}
