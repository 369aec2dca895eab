use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lfd_core::classify::{min_input_len, ForestConfig, LogisticConfig, TrainConfig};
use lfd_core::cluster::KMeansConfig;
use lfd_core::data::{DataFormat, SplitRatios, SyntheticSpec};
use lfd_core::defense::{CsdConfig, GanConfig, KssdConfig};
use lfd_core::ssl::PropagationConfig;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn dense_csv() -> DataFormat {
    DataFormat::DenseCsv
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    /// The spec's own `seed` is ignored; the harness derives it from the
    /// master seed.
    Synthetic(SyntheticSpec),
    File {
        path: PathBuf,
        #[serde(default = "dense_csv")]
        format: DataFormat,
    },
}

impl DatasetSource {
    /// `synthetic` or the file stem.
    pub fn id(&self) -> String {
        match self {
            DatasetSource::Synthetic(_) => "synthetic".into(),
            DatasetSource::File { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "file".into()),
        }
    }
}

/// Full feature set, or the `m` best columns of a forest ranking fit on the
/// training part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureMode {
    WoFS,
    WFS(usize),
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureMode::WoFS => f.write_str("WoFS"),
            FeatureMode::WFS(m) => write!(f, "WFS-{m}"),
        }
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "WoFS" {
            return Ok(FeatureMode::WoFS);
        }
        s.strip_prefix("WFS-")
            .and_then(|m| m.parse().ok())
            .map(FeatureMode::WFS)
            .ok_or_else(|| Error::config(format!("unknown feature mode `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(FeatureMode),
    Many(Vec<FeatureMode>),
}

/// One feature mode or a list of them; a single mode serializes bare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "OneOrMany", into = "OneOrMany")]
pub struct FeatureModes(pub Vec<FeatureMode>);

impl From<OneOrMany> for FeatureModes {
    fn from(v: OneOrMany) -> Self {
        match v {
            OneOrMany::One(m) => FeatureModes(vec![m]),
            OneOrMany::Many(ms) => FeatureModes(ms),
        }
    }
}

impl From<FeatureModes> for OneOrMany {
    fn from(v: FeatureModes) -> Self {
        match v.0.as_slice() {
            [m] => OneOrMany::One(*m),
            _ => OneOrMany::Many(v.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    None,
    Sclfa,
    Lsd,
    Csd,
    Kssd,
    Gan,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::None,
        Method::Sclfa,
        Method::Lsd,
        Method::Csd,
        Method::Kssd,
        Method::Gan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Sclfa => "sclfa",
            Method::Lsd => "lsd",
            Method::Csd => "csd",
            Method::Kssd => "kssd",
            Method::Gan => "gan",
        }
    }

    pub fn is_defense(self) -> bool {
        !matches!(self, Method::None | Method::Sclfa)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config(format!("unknown method `{s}`")))
    }
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub dataset: DatasetSource,
    pub feature_mode: FeatureModes,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub split: SplitRatios,
    #[serde(default)]
    pub master_seed: u64,
    /// Target and defense CNNs. The seed field is replaced per stage.
    #[serde(default)]
    pub cnn: TrainConfig,
    #[serde(default)]
    pub propagation: PropagationConfig,
    #[serde(default)]
    pub kssd: KssdConfig,
    #[serde(default)]
    pub csd: CsdConfig,
    #[serde(default)]
    pub gan: GanConfig,
    /// Ranking forest for WFS and for the generator baseline.
    #[serde(default)]
    pub forest: ForestConfig,
    #[serde(default)]
    pub logistic: LogisticConfig,
    /// k-means used by the attack.
    #[serde(default)]
    pub kmeans: KMeansConfig,
    /// With timing off the `seconds` column stays empty, which makes reports
    /// byte-reproducible.
    #[serde(default = "yes")]
    pub record_timing: bool,
    #[serde(default = "one")]
    pub repeats: usize,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    /// Reads and validates a config file. A relative dataset path is taken
    /// relative to the config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::ConfigFile {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_json(&text).map_err(|source| Error::ConfigParse {
            path: path.to_path_buf(),
            source,
        })?;
        if let DatasetSource::File { path: data, .. } = &mut cfg.dataset {
            if data.is_relative() {
                if let Some(dir) = path.parent() {
                    *data = dir.join(&*data);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn modes(&self) -> Vec<FeatureMode> {
        let mut modes = self.feature_mode.0.clone();
        modes.sort_unstable();
        modes
    }

    pub fn validate(&self) -> Result<()> {
        let core = |e: lfd_core::Error| Error::config(e.to_string());
        if self.methods.is_empty() {
            return Err(Error::config("methods must not be empty"));
        }
        let mut methods = self.methods.clone();
        methods.sort_unstable();
        methods.dedup();
        if methods.len() != self.methods.len() {
            return Err(Error::config("methods lists a method twice"));
        }
        if self.feature_mode.0.is_empty() {
            return Err(Error::config("feature_mode must name at least one mode"));
        }
        let mut modes = self.modes();
        modes.dedup();
        if modes.len() != self.feature_mode.0.len() {
            return Err(Error::config("feature_mode lists a mode twice"));
        }
        if self.repeats == 0 {
            return Err(Error::config("repeats must be at least 1"));
        }
        let minimum = min_input_len();
        for mode in &modes {
            if let FeatureMode::WFS(m) = *mode {
                if m < minimum {
                    return Err(Error::config(format!(
                        "WFS keeps {m} features but the CNN needs at least {minimum}"
                    )));
                }
            }
        }
        if let DatasetSource::Synthetic(spec) = &self.dataset {
            spec.validate().map_err(core)?;
            for mode in &modes {
                let k = match *mode {
                    FeatureMode::WoFS => spec.k,
                    FeatureMode::WFS(m) if m > spec.k => {
                        return Err(Error::config(format!("WFS keeps {m} of only {} features", spec.k)));
                    }
                    FeatureMode::WFS(m) => m,
                };
                if k < minimum {
                    return Err(Error::config(format!(
                        "{k} features is below the CNN minimum of {minimum}"
                    )));
                }
            }
        }
        self.split.validate().map_err(core)?;
        self.cnn.validate().map_err(core)?;
        self.propagation.validate().map_err(core)?;
        self.kssd.validate().map_err(core)?;
        self.gan.validate().map_err(core)?;
        if self.csd.threshold.is_nan() || self.csd.threshold < 0.0 {
            return Err(Error::config("csd threshold must be non-negative"));
        }
        if self.forest.n_trees == 0 {
            return Err(Error::config("forest needs at least one tree"));
        }
        Ok(())
    }
}
