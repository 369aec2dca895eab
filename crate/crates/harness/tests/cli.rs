use std::path::{Path, PathBuf};
use std::process::Command;

use lfd_core::data::SyntheticSpec;
use lfd_harness::cli;
use lfd_harness::*;

fn default_config_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/default.json")
}

fn run(args: &[&str]) -> i32 {
    cli::run(std::iter::once("lfd").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, cfg: &ScenarioConfig) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, cfg.to_json()).unwrap();
    path
}

fn small_config() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::load(default_config_path()).unwrap();
    cfg.dataset =
        DatasetSource::Synthetic(SyntheticSpec::new(60, 64, 0.45, 0.03, 0.3, 0).with_prototype_fractions([0.7, 0.125]));
    cfg.cnn.epochs = 10;
    cfg.record_timing = false;
    cfg
}

#[test]
fn run_on_the_bundled_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    assert_eq!(
        run(&["run", "--config", s(&default_config_path()), "--out", s(&out)]),
        0
    );
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), report::COLUMNS.join(","));
    assert_eq!(lines.count(), 6);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["run", "--out", "/tmp/never-written.csv"]), 1);
    assert_eq!(run(&["run", "--config", "c.json", "--out", "r.csv", "--bogus"]), 1);
    assert_eq!(run(&["frobnicate"]), 1);
    assert_eq!(run(&[]), 1);
    assert_eq!(run(&["defend", "--method", "sclfa"]), 1);
    assert!(!Path::new("/tmp/never-written.csv").exists());
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]), 0);
    assert_eq!(run(&["run", "--help"]), 0);
    assert_eq!(run(&["--version"]), 0);
}

#[test]
fn binary_prints_usage_on_stderr() {
    let out = Command::new(env!("CARGO_BIN_EXE_lfd")).arg("--nope").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert!(out.stdout.is_empty());
}

#[test]
fn config_problems_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["run", "--config", s(&missing), "--out", s(&out)]), 1);
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    assert_eq!(run(&["run", "--config", s(&broken), "--out", s(&out)]), 1);
    let mut cfg = small_config();
    cfg.methods.clear();
    let invalid = write_config(dir.path(), &cfg);
    assert_eq!(run(&["run", "--config", s(&invalid), "--out", s(&out)]), 1);
    assert!(!out.exists());
}

#[test]
fn runtime_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.dataset = DatasetSource::File {
        path: dir.path().join("absent.csv"),
        format: lfd_core::data::DataFormat::DenseCsv,
    };
    let config = write_config(dir.path(), &cfg);
    let out = dir.path().join("r.csv");
    assert_eq!(run(&["run", "--config", s(&config), "--out", s(&out)]), 2);
    assert!(!out.exists());
    let unwritable = dir.path().join("no/such/dir/r.csv");
    assert_eq!(
        run(&["run", "--config", s(&default_config_path()), "--out", s(&unwritable)]),
        2
    );
}

/// synth -> split -> poison -> defend over files gives the same report row
/// as the in-process pipeline.
#[test]
fn file_pipeline_matches_in_process_rows() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let mut cfg = small_config();
    cfg.methods = vec![Method::Lsd, Method::Kssd];
    let config = write_config(dir.path(), &cfg);
    let c = s(&config);

    assert_eq!(run(&["synth", "--config", c, "--out", s(&p("all.csv"))]), 0);
    assert_eq!(
        run(&[
            "split",
            "--config",
            c,
            "--data",
            s(&p("all.csv")),
            "--train-out",
            s(&p("train.csv")),
            "--validation-out",
            s(&p("val.csv")),
            "--test-out",
            s(&p("test.csv")),
        ]),
        0
    );
    assert_eq!(
        run(&[
            "poison",
            "--config",
            c,
            "--data",
            s(&p("train.csv")),
            "--out",
            s(&p("flips.csv")),
            "--poisoned-out",
            s(&p("poisoned.csv")),
        ]),
        0
    );
    let flips = std::fs::read_to_string(p("flips.csv")).unwrap();
    assert!(flips.starts_with("row_id,sv,flipped\n"));

    let report = run_experiment(&cfg).unwrap();
    for method in ["kssd", "lsd"] {
        let out = p(&format!("{method}.csv"));
        let labels = p(&format!("{method}-labels.csv"));
        assert_eq!(
            run(&[
                "defend",
                "--config",
                c,
                "--method",
                method,
                "--train",
                s(&p("poisoned.csv")),
                "--validation",
                s(&p("val.csv")),
                "--test",
                s(&p("test.csv")),
                "--clean",
                s(&p("train.csv")),
                "--out",
                s(&out),
                "--labels-out",
                s(&labels),
            ]),
            0
        );
        let from_files = ExperimentReport::load(&out, ReportFormat::Csv).unwrap();
        let m: Method = method.parse().unwrap();
        assert_eq!(
            from_files.rows[0].cells(),
            report.row(m, FeatureMode::WoFS).unwrap().cells(),
            "{method}"
        );
        let text = std::fs::read_to_string(&labels).unwrap();
        assert!(text.starts_with("row_id,poisoned,corrected,changed,provenance\n"));
    }
}

#[test]
fn rank_lists_every_feature() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &small_config());
    let data = dir.path().join("all.csv");
    let out = dir.path().join("rank.csv");
    assert_eq!(
        run(&[
            "synth",
            "--config",
            s(&config),
            "--out",
            s(&data),
            "--data-format",
            "sparse"
        ]),
        0
    );
    assert_eq!(
        run(&[
            "rank",
            "--config",
            s(&config),
            "--data",
            s(&data),
            "--data-format",
            "sparse",
            "--out",
            s(&out)
        ]),
        0
    );
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "rank,feature,name,importance");
    assert_eq!(lines.len(), 65);
    let importance: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(importance.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn json_and_table_formats() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.methods = vec![Method::None, Method::Sclfa];
    let config = write_config(dir.path(), &cfg);
    let json = dir.path().join("r.json");
    let table = dir.path().join("r.txt");
    assert_eq!(
        run(&["run", "--config", s(&config), "--out", s(&json), "--format", "json"]),
        0
    );
    assert_eq!(
        run(&["run", "--config", s(&config), "--out", s(&table), "--format", "table"]),
        0
    );
    let report = ExperimentReport::load(&json, ReportFormat::Json).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.environment.unwrap().master_seed, cfg.master_seed);
    assert!(std::fs::read_to_string(&table).unwrap().starts_with("dataset"));
}
