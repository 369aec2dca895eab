use ndarray::{concatenate, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::{DefenseResult, Provenance};
use crate::classify::{logistic_fit_matrix, logistic_predict, LogisticConfig, LogisticModel};
use crate::data::{Dataset, FeatureRanking};
use crate::{Error, Label, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanConfig {
    /// How many top-ranked features may be switched on.
    pub lambda_features: usize,
    /// Share of malware-labelled rows, least confident first, to perturb.
    pub lesslikely_fraction: f64,
    /// Cap on features switched on per row.
    pub max_additions: usize,
}

impl Default for GanConfig {
    fn default() -> Self {
        Self {
            lambda_features: 20,
            lesslikely_fraction: 0.10,
            max_additions: 20,
        }
    }
}

impl GanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_features == 0 {
            return Err(Error::config("lambda_features must be at least 1"));
        }
        if !(self.lesslikely_fraction > 0.0 && self.lesslikely_fraction <= 1.0) {
            return Err(Error::config(format!(
                "lesslikely_fraction {} outside (0, 1]",
                self.lesslikely_fraction
            )));
        }
        Ok(())
    }
}

/// Columns among the top `lambda` of the ranking whose mean is higher in
/// benign-labelled rows than in malware-labelled rows, best ranked first.
fn benign_leaning_features(x: &Array2<f64>, labels: &[Label], ranking: &FeatureRanking, lambda: usize) -> Vec<usize> {
    let mean = |col: usize, class: Label| {
        let (sum, count) = labels
            .iter()
            .enumerate()
            .filter(|(_, &y)| y == class)
            .fold((0.0, 0usize), |(s, c), (i, _)| (s + x[[i, col]], c + 1));
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    };
    ranking.order()[..lambda.min(ranking.len())]
        .iter()
        .copied()
        .filter(|&f| mean(f, 0) > mean(f, 1))
        .collect()
}

/// Greedy feature-addition generator: the least confident malware-labelled
/// rows get benign-leaning features switched on until the scorer calls them
/// benign. The perturbed rows join training as malware and a refit logistic
/// model relabels the training rows.
pub fn gan_defense(
    train_poisoned: &Dataset,
    ranking: &FeatureRanking,
    cfg: &GanConfig,
    lr_cfg: &LogisticConfig,
) -> Result<DefenseResult> {
    cfg.validate()?;
    if ranking.len() != train_poisoned.k() {
        return Err(Error::Dimension {
            expected: train_poisoned.k(),
            actual: ranking.len(),
        });
    }
    let labels = train_poisoned.labels();
    let malware: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 1).collect();
    if malware.is_empty() {
        let mut result = DefenseResult::new(labels, labels.to_vec(), vec![Provenance::Unchanged; labels.len()])?;
        result
            .warnings
            .push("no malware-labelled rows; labels left unchanged".into());
        return Ok(result);
    }

    let x = train_poisoned.to_matrix();
    let model = logistic_fit_matrix(&x, labels, lr_cfg)?;
    let scores = logistic_predict(&model, &x)?;
    let mut candidates = malware;
    candidates.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let take = (cfg.lesslikely_fraction * candidates.len() as f64).round() as usize;
    candidates.truncate(take);

    let eligible = benign_leaning_features(&x, labels, ranking, cfg.lambda_features);
    let synthetic: Vec<Vec<f64>> = candidates
        .iter()
        .map(|&i| perturb(&model, x.row(i).to_vec(), &eligible, cfg.max_additions))
        .collect();

    let (x_aug, y_aug) = if synthetic.is_empty() {
        (x.clone(), labels.to_vec())
    } else {
        let flat: Vec<f64> = synthetic.iter().flatten().copied().collect();
        let extra = Array2::from_shape_vec((synthetic.len(), x.ncols()), flat).expect("rows share width");
        let x_aug = concatenate(Axis(0), &[x.view(), extra.view()]).expect("rows share width");
        let mut y_aug = labels.to_vec();
        y_aug.extend(std::iter::repeat_n(1, synthetic.len()));
        (x_aug, y_aug)
    };
    let refit = logistic_fit_matrix(&x_aug, &y_aug, lr_cfg)?;
    let corrected: Vec<Label> = logistic_predict(&refit, &x)?
        .iter()
        .map(|&s| u8::from(s >= 0.5))
        .collect();
    let mut result = DefenseResult::new(labels, corrected, vec![Provenance::Generator; labels.len()])?;
    if synthetic.is_empty() {
        result.warnings.push("no rows selected for generation".into());
    }
    Ok(result)
}

fn perturb(model: &LogisticModel, mut row: Vec<f64>, eligible: &[usize], max_additions: usize) -> Vec<f64> {
    let mut added = 0;
    while added < max_additions && model.predict_score(ndarray::ArrayView1::from(&row)) >= 0.5 {
        let Some(&f) = eligible.iter().find(|&&f| row[f] == 0.0) else {
            break;
        };
        row[f] = 1.0;
        added += 1;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn perturbation_stops_once_benign() {
        let model = LogisticModel {
            weights: vec![-3.0, -3.0, 0.0],
            bias: 4.0,
        };
        let out = perturb(&model, vec![0.0, 0.0, 0.0], &[2, 0, 1], 10);
        assert_eq!(out, vec![1.0, 1.0, 1.0]);
        let out = perturb(&model, vec![0.0, 0.0, 0.0], &[0, 1], 1);
        assert_eq!(out, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn already_benign_row_is_kept_as_is() {
        let model = LogisticModel {
            weights: vec![0.0],
            bias: -1.0,
        };
        assert_eq!(perturb(&model, vec![0.0], &[0], 5), vec![0.0]);
    }

    #[test]
    fn no_malware_rows_leaves_labels() {
        let ds = Dataset::new(array![[1u8, 0], [0, 1]], vec![0, 0], Dataset::default_names(2)).unwrap();
        let ranking = FeatureRanking::from_importance(vec![0.5, 0.5]).unwrap();
        let r = gan_defense(&ds, &ranking, &GanConfig::default(), &LogisticConfig::default()).unwrap();
        assert_eq!(r.corrected_labels, vec![0, 0]);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn tiny_sets_skip_generation() {
        let ds = Dataset::new(
            array![[1u8, 0], [0, 1], [1, 1]],
            vec![1, 0, 1],
            Dataset::default_names(2),
        )
        .unwrap();
        let ranking = FeatureRanking::from_importance(vec![0.5, 0.5]).unwrap();
        let lr = LogisticConfig::default();
        let r = gan_defense(&ds, &ranking, &GanConfig::default(), &lr).unwrap();
        let plain = logistic_fit_matrix(&ds.to_matrix(), ds.labels(), &lr).unwrap();
        let expected: Vec<u8> = logistic_predict(&plain, &ds.to_matrix())
            .unwrap()
            .iter()
            .map(|&s| u8::from(s >= 0.5))
            .collect();
        assert_eq!(r.corrected_labels, expected);
    }
}
