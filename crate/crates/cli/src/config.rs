use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vamci_core::evaluation::CvConfig;
use vamci_core::fusion::FeatureMode;
use vamci_core::learners::{Hyperparams, ModelKind};
use vamci_core::model::{DiagnosisLabel, MocaTarget, SpeechTask};
use vamci_core::sim::{SimConfig, ANCHOR_FILE};
use vamci_core::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Directory of session manifests.
    pub cohort: PathBuf,
    /// Anchor file; defaults to `anchors.json` inside the cohort directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchors: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            cohort: "cohort".into(),
            anchors: None,
            out: "out".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSettings {
    pub rounds: usize,
    pub k: usize,
    pub inner_k: usize,
    pub positive: DiagnosisLabel,
}

impl Default for CvSettings {
    fn default() -> Self {
        let d = CvConfig::default();
        CvSettings {
            rounds: d.rounds,
            k: d.k,
            inner_k: d.inner_k,
            positive: d.positive,
        }
    }
}

/// Everything a pipeline run needs. Relative paths are taken relative to the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed. Required by `simulate` and `evaluate`.
    pub seed: Option<u64>,
    pub paths: Paths,
    pub tasks: Vec<SpeechTask>,
    pub modes: Vec<FeatureMode>,
    /// Each model is evaluated on every problem it supports.
    pub models: Vec<ModelKind>,
    /// Run diagnosis classification.
    pub classify: bool,
    /// MoCA scores to regress; empty disables regression.
    pub targets: Vec<MocaTarget>,
    pub cv: CvSettings,
    /// Search grids keyed by model abbreviation (`RF`, `LRR`, ...). Models
    /// without an entry use their built-in grid.
    pub grids: BTreeMap<ModelKind, Vec<toml::Table>>,
    /// Cohort generator settings. Its seed is always the master seed.
    pub simulation: SimConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            paths: Paths::default(),
            tasks: SpeechTask::ALL.to_vec(),
            modes: FeatureMode::ALL.to_vec(),
            models: vec![
                ModelKind::DecisionTree,
                ModelKind::RandomForest,
                ModelKind::Knn,
                ModelKind::LinearSvm,
                ModelKind::Ridge,
                ModelKind::Svr,
            ],
            classify: true,
            targets: MocaTarget::ALL.to_vec(),
            cv: CvSettings::default(),
            grids: BTreeMap::new(),
            simulation: SimConfig::default(),
        }
    }
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tasks: Vec<SpeechTask>,
    pub modes: Vec<FeatureMode>,
    pub models: Vec<ModelKind>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if !o.tasks.is_empty() {
            self.tasks = o.tasks.clone();
        }
        if !o.modes.is_empty() {
            self.modes = o.modes.clone();
        }
        if !o.models.is_empty() {
            self.models = o.models.clone();
        }
        if let Some(out) = &o.out {
            self.paths.out = out.clone();
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.tasks.is_empty() {
            return bad("no tasks selected");
        }
        if self.modes.is_empty() {
            return bad("no feature modes selected");
        }
        if self.models.is_empty() {
            return bad("no models selected");
        }
        self.cv_config(0).validate()?;
        for kind in self.grids.keys() {
            if !self.models.contains(kind) {
                log::warn!("grid given for {kind}, which is not selected");
            }
            self.grid(*kind)?;
        }
        self.simulation.validate()
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("a seed is required (set `seed` in the config or pass --seed)".into()))
    }

    pub fn cv_config(&self, seed: u64) -> CvConfig {
        CvConfig {
            rounds: self.cv.rounds,
            k: self.cv.k,
            inner_k: self.cv.inner_k,
            positive: self.cv.positive,
            seed,
        }
    }

    /// The search grid for `kind`, from the config when present.
    pub fn grid(&self, kind: ModelKind) -> Result<Vec<Hyperparams>> {
        let Some(points) = self.grids.get(&kind) else {
            return Ok(kind.default_grid());
        };
        if points.is_empty() {
            return Err(Error::Config(format!("empty grid for {kind}")));
        }
        let template = serde_json::to_value(kind.default_params()).expect("params serialize");
        let template = template.as_object().expect("params are a JSON object");
        points
            .iter()
            .map(|point| {
                let mut obj = serde_json::Map::new();
                for (key, value) in point {
                    if key == "model" || !template.contains_key(key) {
                        return Err(Error::Config(format!("unknown {kind} hyperparameter `{key}`")));
                    }
                    let value = serde_json::to_value(value).map_err(|e| Error::Config(e.to_string()))?;
                    obj.insert(key.clone(), value);
                }
                obj.insert("model".into(), template["model"].clone());
                let params: Hyperparams = serde_json::from_value(serde_json::Value::Object(obj))
                    .map_err(|e| Error::Config(format!("{kind} grid: {e}")))?;
                params.validate()?;
                Ok(params)
            })
            .collect()
    }
}

/// A loaded config plus the directory its relative paths hang off.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: RunConfig,
    pub base: PathBuf,
    /// Worker threads for evaluation; `None` uses every core.
    pub jobs: Option<usize>,
}

impl Run {
    /// Loads `path` (or the defaults when absent) and applies `overrides`.
    pub fn load(path: Option<&Path>, overrides: &Overrides, jobs: Option<usize>) -> Result<Self> {
        let (mut config, base) = match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::from(e).at(p))?;
                let cfg = RunConfig::from_toml(&text).map_err(|e| e.at(p))?;
                (cfg, p.parent().unwrap_or(Path::new("")).to_path_buf())
            }
            None => (RunConfig::default(), PathBuf::new()),
        };
        config.apply(overrides);
        config.validate()?;
        if jobs == Some(0) {
            return Err(Error::Config("--jobs must be positive".into()));
        }
        Ok(Run { config, base, jobs })
    }

    pub fn with_config(config: RunConfig, base: impl Into<PathBuf>) -> Result<Self> {
        config.validate()?;
        Ok(Run {
            config,
            base: base.into(),
            jobs: None,
        })
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        self.base.join(p)
    }

    pub fn cohort_dir(&self) -> PathBuf {
        self.resolve(&self.config.paths.cohort)
    }

    pub fn anchors_path(&self) -> PathBuf {
        match &self.config.paths.anchors {
            Some(p) => self.resolve(p),
            None => self.cohort_dir().join(ANCHOR_FILE),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.config.paths.out)
    }

    pub fn features_dir(&self) -> PathBuf {
        self.out_dir().join("features")
    }

    pub fn report_path(&self) -> PathBuf {
        self.out_dir().join("report.json")
    }
}
