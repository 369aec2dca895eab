use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use lfd_core::attack::{sclfa, write_flip_csv};
use lfd_core::classify::rf_rank_features;
use lfd_core::data::{load_dataset, save_dataset, split_dataset, DataFormat, Dataset};
use lfd_core::defense::write_defense_csv;

use crate::config::{DatasetSource, FeatureMode, Method, ScenarioConfig};
use crate::pipeline::{defense_row, run_experiment, synthetic_spec, DefenseInputs, StageConfigs};
use crate::report::{ExperimentReport, ReportFormat};
use crate::seeds::{self, stage_seed};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "lfd", version, about = "Label-flipping attack and defense experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a full experiment and write its report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
        format: ReportFormat,
    },
    /// Generate the config's synthetic dataset.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "dense-csv")]
        data_format: DataFormat,
    },
    /// Split a dataset into train, validation and test files.
    Split {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "dense-csv")]
        data_format: DataFormat,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        validation_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
    },
    /// Rank a dataset's features with the forest regressor.
    Rank {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "dense-csv")]
        data_format: DataFormat,
        /// CSV with columns rank,feature,name,importance.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the flipping attack on a training file.
    Poison {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "dense-csv")]
        data_format: DataFormat,
        /// CSV with columns row_id,sv,flipped.
        #[arg(long)]
        out: PathBuf,
        /// The training set with poisoned labels.
        #[arg(long)]
        poisoned_out: Option<PathBuf>,
    },
    /// Run one defense on poisoned training data, retrain and evaluate.
    Defend {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_defense)]
        method: Method,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        validation: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Clean training labels, for the flips and restored counts.
        #[arg(long)]
        clean: Option<PathBuf>,
        #[arg(long, default_value = "dense-csv")]
        data_format: DataFormat,
        /// Single-row report.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
        format: ReportFormat,
        /// CSV with columns row_id,poisoned,corrected,changed,provenance.
        #[arg(long)]
        labels_out: Option<PathBuf>,
    },
}

fn parse_defense(s: &str) -> std::result::Result<Method, String> {
    match s.parse::<Method>() {
        Ok(m) if m.is_defense() => Ok(m),
        Ok(m) => Err(format!("`{m}` is not a defense")),
        Err(e) => Err(e.to_string()),
    }
}

/// Parses `argv` and runs the command: 0 on success, 1 for usage or
/// configuration errors, 2 when the work itself fails.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(std::io::BufWriter::new(file))
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { config, out, format } => {
            let cfg = ScenarioConfig::load(&config)?;
            let report = run_experiment(&cfg)?;
            for row in report.rows.iter().filter(|r| r.is_failed()) {
                eprintln!(
                    "warning: {} / {} failed: {}",
                    row.method,
                    row.feature_mode,
                    row.error.as_deref().unwrap_or_default()
                );
            }
            report.emit(format, &out)
        }
        Command::Synth {
            config,
            out,
            data_format,
        } => {
            let cfg = ScenarioConfig::load(&config)?;
            let DatasetSource::Synthetic(spec) = &cfg.dataset else {
                return Err(Error::config("the config's dataset is not synthetic"));
            };
            let ds = lfd_core::data::generate_synthetic(&synthetic_spec(spec, cfg.master_seed))?;
            Ok(save_dataset(&ds, &out, data_format)?)
        }
        Command::Split {
            config,
            data,
            data_format,
            train_out,
            validation_out,
            test_out,
        } => {
            let cfg = ScenarioConfig::load(&config)?;
            let ds = load_dataset(&data, data_format)?;
            let split = split_dataset(&ds, cfg.split, stage_seed(cfg.master_seed, seeds::SPLIT))?;
            save_dataset(&split.train, &train_out, data_format)?;
            save_dataset(&split.validation, &validation_out, data_format)?;
            Ok(save_dataset(&split.test, &test_out, data_format)?)
        }
        Command::Rank {
            config,
            data,
            data_format,
            out,
        } => {
            let cfg = ScenarioConfig::load(&config)?;
            let ds = load_dataset(&data, data_format)?;
            let ranking = rf_rank_features(&ds, &StageConfigs::new(&cfg, cfg.master_seed).rank_forest)?;
            let mut w = create(&out)?;
            writeln!(w, "rank,feature,name,importance")?;
            for (pos, &j) in ranking.order().iter().enumerate() {
                writeln!(w, "{pos},{j},{},{:.6}", ds.feature_names()[j], ranking.importance()[j])?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Poison {
            config,
            data,
            data_format,
            out,
            poisoned_out,
        } => {
            let cfg = ScenarioConfig::load(&config)?;
            let ds = load_dataset(&data, data_format)?;
            let flips = sclfa(&ds, &StageConfigs::new(&cfg, cfg.master_seed).attack_kmeans)?;
            let mut w = create(&out)?;
            write_flip_csv(&flips, ds.row_ids(), &mut w)?;
            w.flush()?;
            if let Some(path) = poisoned_out {
                save_dataset(&ds.with_labels(flips.poisoned_labels)?, path, data_format)?;
            }
            Ok(())
        }
        Command::Defend {
            config,
            method,
            train,
            validation,
            test,
            clean,
            data_format,
            out,
            format,
            labels_out,
        } => {
            let cfg = ScenarioConfig::load(&config)?;
            let load = |p: &Path| -> Result<Dataset> { Ok(load_dataset(p, data_format)?) };
            let poisoned = load(&train)?;
            let clean = clean.as_deref().map(load).transpose()?;
            let (validation, test) = (load(&validation)?, load(&test)?);
            let inputs = DefenseInputs {
                clean: clean.as_ref(),
                poisoned: &poisoned,
                validation: &validation,
                test: &test,
            };
            let stages = StageConfigs::new(&cfg, cfg.master_seed);
            let mode = FeatureMode::WoFS;
            let (row, result) = defense_row(method, &inputs, &cfg, &stages, &cfg.dataset.id(), mode);
            if let Some(reason) = &row.error {
                return Err(Error::Failed(format!("{method} failed: {reason}")));
            }
            if let (Some(path), Some(result)) = (labels_out, result) {
                let mut w = create(&path)?;
                write_defense_csv(&result, poisoned.row_ids(), poisoned.labels(), &mut w)?;
                w.flush()?;
            }
            ExperimentReport {
                environment: None,
                rows: vec![row],
            }
            .emit(format, &out)
        }
    }
}
