//! The experiment pipeline.
//!
//! For each feature mode: load or generate the dataset, split it 60/20/20,
//! and for WFS rank features on the training part alone and keep the top `m`
//! columns in all three parts. The target CNN is then trained on clean labels
//! (`none`), on SCLFA-poisoned labels (`sclfa`), and on the labels each
//! defense produces from the poisoned ones. Every model is evaluated on the
//! same untouched test part.

use std::collections::BTreeMap;
use std::time::Instant;

use lfd_core::attack::{sclfa, FlipResult};
use lfd_core::classify::{cnn_fit, cnn_predict, rf_rank_features, ForestConfig, TrainConfig};
use lfd_core::cluster::KMeansConfig;
use lfd_core::data::{
    generate_synthetic, load_dataset, select_top_features, split_dataset, Dataset, DatasetSplit, FeatureRanking,
    SyntheticSpec,
};
use lfd_core::defense::{csd, gan_defense, kssd, lsd, CsdConfig, DefenseResult};
use lfd_core::metrics::{confusion, metric_row, MetricRow};
use sha2::{Digest, Sha256};

use crate::config::{DatasetSource, FeatureMode, Method, ScenarioConfig};
use crate::report::{Environment, ExperimentReport, ReportRow};
use crate::seeds::{self, stage_seed};
use crate::{Error, Result};

/// SHA-256 over shape, features, labels and row ids.
pub fn dataset_hash(ds: &Dataset) -> String {
    let mut h = Sha256::new();
    h.update((ds.n() as u64).to_le_bytes());
    h.update((ds.k() as u64).to_le_bytes());
    for &v in ds.features().iter() {
        h.update([v]);
    }
    h.update(ds.labels());
    for &id in ds.row_ids() {
        h.update((id as u64).to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn synthetic_spec(spec: &SyntheticSpec, master_seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        seed: stage_seed(master_seed, seeds::SYNTHETIC),
        ..spec.clone()
    }
}

pub fn load_source(source: &DatasetSource, master_seed: u64) -> Result<Dataset> {
    Ok(match source {
        DatasetSource::Synthetic(spec) => generate_synthetic(&synthetic_spec(spec, master_seed))?,
        DatasetSource::File { path, format } => load_dataset(path, *format)?,
    })
}

/// The configured model settings with their stage seeds filled in.
#[derive(Debug, Clone)]
pub struct StageConfigs {
    pub target_cnn: TrainConfig,
    pub defense_cnn: TrainConfig,
    pub attack_kmeans: KMeansConfig,
    pub csd: CsdConfig,
    pub rank_forest: ForestConfig,
    pub gan_forest: ForestConfig,
}

impl StageConfigs {
    pub fn new(cfg: &ScenarioConfig, master_seed: u64) -> Self {
        let seed = |tag| stage_seed(master_seed, tag);
        Self {
            target_cnn: TrainConfig {
                seed: seed(seeds::TARGET_CNN),
                ..cfg.cnn.clone()
            },
            defense_cnn: TrainConfig {
                seed: seed(seeds::DEFENSE_CNN),
                ..cfg.cnn.clone()
            },
            attack_kmeans: KMeansConfig {
                seed: seed(seeds::ATTACK_KMEANS),
                ..cfg.kmeans.clone()
            },
            csd: CsdConfig {
                kmeans: KMeansConfig {
                    seed: seed(seeds::CSD_KMEANS),
                    ..cfg.csd.kmeans.clone()
                },
                ..cfg.csd.clone()
            },
            rank_forest: ForestConfig {
                seed: seed(seeds::RANK),
                ..cfg.forest.clone()
            },
            gan_forest: ForestConfig {
                seed: seed(seeds::GAN_RANK),
                ..cfg.forest.clone()
            },
        }
    }
}

/// A split ready for the methods, after any WFS column selection.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub dataset_id: String,
    pub mode: FeatureMode,
    pub master_seed: u64,
    pub split: DatasetSplit,
    pub ranking: Option<FeatureRanking>,
    /// Row ids the WFS ranking was fit on.
    pub ranked_rows: Vec<usize>,
    pub test_hash: String,
}

pub fn prepare(cfg: &ScenarioConfig, mode: FeatureMode, master_seed: u64) -> Result<Prepared> {
    let ds = load_source(&cfg.dataset, master_seed)?;
    let split = split_dataset(&ds, cfg.split, stage_seed(master_seed, seeds::SPLIT))?;
    let stages = StageConfigs::new(cfg, master_seed);
    let (split, ranking, ranked_rows) = match mode {
        FeatureMode::WoFS => (split, None, Vec::new()),
        FeatureMode::WFS(m) => {
            if m > split.train.k() {
                return Err(Error::config(format!(
                    "WFS keeps {m} of only {} features",
                    split.train.k()
                )));
            }
            let ranking = rf_rank_features(&split.train, &stages.rank_forest)?;
            let select = |d: &Dataset| select_top_features(d, &ranking, m);
            let selected = DatasetSplit {
                train: select(&split.train)?,
                validation: select(&split.validation)?,
                test: select(&split.test)?,
                seed: split.seed,
            };
            (selected, Some(ranking), split.train.row_ids().to_vec())
        }
    };
    let test_hash = dataset_hash(&split.test);
    Ok(Prepared {
        dataset_id: cfg.dataset.id(),
        mode,
        master_seed,
        split,
        ranking,
        ranked_rows,
        test_hash,
    })
}

/// Trains the target CNN on `train` and scores it on `test`.
pub fn evaluate(train: &Dataset, test: &Dataset, cnn: &TrainConfig) -> Result<MetricRow> {
    let model = cnn_fit(train, cnn)?;
    let (_, predicted) = cnn_predict(&model, &test.to_matrix())?;
    Ok(metric_row(&confusion(test.labels(), &predicted)?))
}

/// Runs one defense on the poisoned training part.
pub fn correct_labels(
    method: Method,
    poisoned: &Dataset,
    validation: &Dataset,
    cfg: &ScenarioConfig,
    stages: &StageConfigs,
) -> Result<DefenseResult> {
    Ok(match method {
        Method::Lsd => lsd(poisoned, validation, &cfg.propagation, &stages.defense_cnn)?,
        Method::Csd => csd(poisoned, validation, &stages.defense_cnn, &stages.csd)?,
        Method::Kssd => kssd(poisoned, &cfg.kssd)?,
        Method::Gan => {
            let ranking = rf_rank_features(poisoned, &stages.gan_forest)?;
            gan_defense(poisoned, &ranking, &cfg.gan, &cfg.logistic)?
        }
        Method::None | Method::Sclfa => {
            return Err(Error::config(format!("`{method}` is not a defense")));
        }
    })
}

fn count_differences(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Everything a defense row needs. `clean` is only used to count flips and
/// restored labels.
pub struct DefenseInputs<'a> {
    pub clean: Option<&'a Dataset>,
    pub poisoned: &'a Dataset,
    pub validation: &'a Dataset,
    pub test: &'a Dataset,
}

/// Corrects, retrains and evaluates one defense. Errors become a failed row.
pub fn defense_row(
    method: Method,
    inputs: &DefenseInputs<'_>,
    cfg: &ScenarioConfig,
    stages: &StageConfigs,
    dataset_id: &str,
    mode: FeatureMode,
) -> (ReportRow, Option<DefenseResult>) {
    let run = || -> Result<(ReportRow, DefenseResult)> {
        let start = Instant::now();
        let result = correct_labels(method, inputs.poisoned, inputs.validation, cfg, stages)?;
        let seconds = start.elapsed().as_secs_f64();
        let corrected = inputs.poisoned.with_labels(result.corrected_labels.clone())?;
        let metrics = evaluate(&corrected, inputs.test, &stages.target_cnn)?;
        let (flips, restored) = match inputs.clean {
            Some(clean) => (
                Some(count_differences(clean.labels(), inputs.poisoned.labels())),
                Some(result.restored(clean.labels(), inputs.poisoned.labels())),
            ),
            None => (None, None),
        };
        let row = ReportRow {
            dataset: dataset_id.into(),
            feature_mode: mode,
            method,
            metrics,
            flips,
            restored,
            seconds: cfg.record_timing.then_some(seconds),
            error: None,
        };
        Ok((row, result))
    };
    match run() {
        Ok((row, result)) => (row, Some(result)),
        Err(e) => (ReportRow::failed(dataset_id, mode, method, e.to_string()), None),
    }
}

/// One feature mode under one master seed, with the intermediate artifacts
/// kept for inspection.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub prepared: Prepared,
    pub attack: Option<FlipResult>,
    pub poisoned: Option<Dataset>,
    pub defenses: BTreeMap<Method, DefenseResult>,
    pub rows: Vec<ReportRow>,
    /// Test-part hash after every method has run.
    pub final_test_hash: String,
}

pub fn run_scenario(cfg: &ScenarioConfig, mode: FeatureMode, master_seed: u64) -> Result<ScenarioRun> {
    let prepared = prepare(cfg, mode, master_seed)?;
    let stages = StageConfigs::new(cfg, master_seed);
    let id = prepared.dataset_id.clone();
    let DatasetSplit {
        train,
        validation,
        test,
        ..
    } = &prepared.split;
    let timed = |seconds: f64| cfg.record_timing.then_some(seconds);
    let mut rows = Vec::new();
    let check_isolation = |method: Method| -> Result<()> {
        if dataset_hash(test) != prepared.test_hash {
            return Err(Error::Isolation(method.to_string()));
        }
        Ok(())
    };

    if cfg.methods.contains(&Method::None) {
        let start = Instant::now();
        let row = match evaluate(train, test, &stages.target_cnn) {
            Ok(metrics) => ReportRow {
                dataset: id.clone(),
                feature_mode: mode,
                method: Method::None,
                metrics,
                flips: None,
                restored: None,
                seconds: timed(start.elapsed().as_secs_f64()),
                error: None,
            },
            Err(e) => ReportRow::failed(&id, mode, Method::None, e.to_string()),
        };
        rows.push(row);
        check_isolation(Method::None)?;
    }

    let needs_attack = cfg.methods.iter().any(|&m| m != Method::None);
    let mut attack = None;
    let mut poisoned = None;
    let mut attack_error = None;
    let mut attack_seconds = 0.0;
    if needs_attack {
        let start = Instant::now();
        match sclfa(train, &stages.attack_kmeans) {
            Ok(flips) => {
                attack_seconds = start.elapsed().as_secs_f64();
                match train.with_labels(flips.poisoned_labels.clone()) {
                    Ok(p) => {
                        poisoned = Some(p);
                        attack = Some(flips);
                    }
                    Err(e) => attack_error = Some(e.to_string()),
                }
            }
            Err(e) => attack_error = Some(e.to_string()),
        }
    }
    let attack_failure = |method| {
        let reason = attack_error.as_deref().unwrap_or("attack did not run");
        ReportRow::failed(&id, mode, method, format!("attack failed: {reason}"))
    };

    if cfg.methods.contains(&Method::Sclfa) {
        let row = match (&attack, &poisoned) {
            (Some(flips), Some(p)) => match evaluate(p, test, &stages.target_cnn) {
                Ok(metrics) => ReportRow {
                    dataset: id.clone(),
                    feature_mode: mode,
                    method: Method::Sclfa,
                    metrics,
                    flips: Some(flips.n_flipped()),
                    restored: None,
                    seconds: timed(attack_seconds),
                    error: None,
                },
                Err(e) => ReportRow::failed(&id, mode, Method::Sclfa, e.to_string()),
            },
            _ => attack_failure(Method::Sclfa),
        };
        rows.push(row);
        check_isolation(Method::Sclfa)?;
    }

    let mut defenses = BTreeMap::new();
    let mut methods: Vec<Method> = cfg.methods.iter().copied().filter(|m| m.is_defense()).collect();
    methods.sort_unstable();
    for method in methods {
        let Some(p) = &poisoned else {
            rows.push(attack_failure(method));
            continue;
        };
        let inputs = DefenseInputs {
            clean: Some(train),
            poisoned: p,
            validation,
            test,
        };
        let (row, result) = defense_row(method, &inputs, cfg, &stages, &id, mode);
        rows.push(row);
        if let Some(result) = result {
            defenses.insert(method, result);
        }
        check_isolation(method)?;
    }

    let final_test_hash = dataset_hash(test);
    Ok(ScenarioRun {
        prepared,
        attack,
        poisoned,
        defenses,
        rows,
        final_test_hash,
    })
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

/// Metrics and seconds are averaged over repeats, counts are summed. A row
/// that failed in any repeat is reported as failed.
fn combine(repeats: &[ReportRow]) -> ReportRow {
    let first = &repeats[0];
    if let Some(failed) = repeats.iter().find(|r| r.is_failed()) {
        return failed.clone();
    }
    let metric = |f: fn(&MetricRow) -> Option<f64>| mean_of(repeats.iter().map(|r| f(&r.metrics)));
    let sum = |f: fn(&ReportRow) -> Option<usize>| repeats.iter().map(f).sum::<Option<usize>>();
    ReportRow {
        dataset: first.dataset.clone(),
        feature_mode: first.feature_mode,
        method: first.method,
        metrics: MetricRow {
            accuracy: metric(|m| m.accuracy),
            precision: metric(|m| m.precision),
            recall: metric(|m| m.recall),
            f1: metric(|m| m.f1),
            fpr: metric(|m| m.fpr),
            fnr: metric(|m| m.fnr),
            auc: metric(|m| m.auc),
        },
        flips: sum(|r| r.flips),
        restored: sum(|r| r.restored),
        seconds: mean_of(repeats.iter().map(|r| r.seconds)),
        error: None,
    }
}

/// Runs every configured feature mode and repeat. Stage failures become
/// failed rows; only a dataset that cannot be loaded or split aborts.
pub fn run_experiment(cfg: &ScenarioConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for mode in cfg.modes() {
        let mut per_repeat: Vec<Vec<ReportRow>> = Vec::new();
        for r in 0..cfg.repeats {
            per_repeat.push(run_scenario(cfg, mode, seeds::repeat_seed(cfg.master_seed, r))?.rows);
        }
        for i in 0..per_repeat[0].len() {
            let same: Vec<ReportRow> = per_repeat.iter().map(|rows| rows[i].clone()).collect();
            rows.push(combine(&same));
        }
    }
    let mut report = ExperimentReport {
        environment: Some(Environment::new(cfg.master_seed, cfg.repeats)),
        rows,
    };
    report.sort_rows();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine_averages_and_sums() {
        let row = |acc: f64, flips: usize, seconds: f64| ReportRow {
            dataset: "d".into(),
            feature_mode: FeatureMode::WoFS,
            method: Method::Kssd,
            metrics: MetricRow {
                accuracy: Some(acc),
                precision: None,
                ..MetricRow::default()
            },
            flips: Some(flips),
            restored: None,
            seconds: Some(seconds),
            error: None,
        };
        let c = combine(&[row(0.5, 3, 1.0), row(1.0, 4, 2.0)]);
        assert_eq!(c.metrics.accuracy, Some(0.75));
        assert_eq!(c.metrics.precision, None);
        assert_eq!(c.flips, Some(7));
        assert_eq!(c.restored, None);
        assert_eq!(c.seconds, Some(1.5));
        let failed = ReportRow::failed("d", FeatureMode::WoFS, Method::Kssd, "boom");
        assert!(combine(&[row(0.5, 1, 1.0), failed]).is_failed());
    }

    #[test]
    fn hash_sees_every_part() {
        let ds = generate_synthetic(&SyntheticSpec::new(5, 8, 0.9, 0.1, 0.0, 1)).unwrap();
        let h = dataset_hash(&ds);
        assert_eq!(h.len(), 64);
        let mut labels = ds.labels().to_vec();
        labels[0] ^= 1;
        assert_ne!(dataset_hash(&ds.with_labels(labels).unwrap()), h);
        assert_ne!(dataset_hash(&ds.subset(&[1, 0, 2, 3, 4, 5, 6, 7, 8, 9]).unwrap()), h);
        assert_eq!(dataset_hash(&ds.clone()), h);
    }
}
