//! Run configuration, on-disk artifacts, front merging and the oracle report.
//!
//! A run directory holds:
//!
//! * `front.csv`: rank-1 solutions of the last evaluated solution set.
//! * `generations.csv`: one row of evaluation statistics per generation.
//! * `front_frbs.json`: every front solution with genotypes, decoded FRBS
//!   and rendered rules.
//! * `best_frbs.json` / `best_frbs.txt`: the highest-performing front
//!   solution (lowest complexity on ties).
//! * `manifest.json`: tool version, seed and the full configuration.
//!
//! Nothing written depends on wall-clock time or the output location, so
//! reruns with the same configuration are byte-identical.

mod front;

pub use front::{merge_fronts, read_front, write_front, write_histogram, FrontRecord, MergedFront, FRONT_COLUMNS};

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coevo::{run_fuzzy_mococo, ConfigError, GenerationRecord, Hyperparams, RunOutcome, Solution};
use crate::environment::oracle::{value_iteration, DEFAULT_TOLERANCE};
use crate::environment::{evaluate_performance, InitialStateSet, McConfig};
use crate::fuzzy::{default_value_names, Frbs, LinguisticLabels, RenderError};
use crate::genotype::{DbGenotype, RbGenotype, SubspeciesTag};

pub const FRONT_FILE: &str = "front.csv";
pub const GENERATIONS_FILE: &str = "generations.csv";
pub const FRONT_FRBS_FILE: &str = "front_frbs.json";
pub const BEST_FRBS_FILE: &str = "best_frbs.json";
pub const BEST_RULES_FILE: &str = "best_frbs.txt";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const ORACLE_REPORT_FILE: &str = "oracle.json";
pub const ORACLE_POLICY_FILE: &str = "policy.bin";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: invalid TOML config: {source}", path.display())]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("{}: invalid JSON: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("invalid hyperparameters: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid labels: {0}")]
    Labels(String),
    #[error("{}: expected columns {expected}, found {found}", path.display())]
    Schema { path: PathBuf, expected: String, found: String },
    #[error("no front CSVs given to merge")]
    NothingToMerge,
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("no solution with id {0}")]
    UnknownSolution(String),
    #[error("{}: contains no solutions", path.display())]
    NoSolutions { path: PathBuf },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}

/// Supported testbeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Environment {
    MountainCar(McConfig),
}

impl Default for Environment {
    fn default() -> Self {
        Environment::MountainCar(McConfig::default())
    }
}

impl Environment {
    pub fn mountain_car(&self) -> &McConfig {
        match self {
            Environment::MountainCar(c) => c,
        }
    }
}

/// Display names for rendering rules. Value names are keyed by partition
/// granularity per feature; unlisted granularities fall back to
/// [`default_value_names`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelConfig {
    pub features: Vec<String>,
    #[serde(default)]
    pub actions: Vec<String>,
    #[serde(default)]
    pub values: Vec<BTreeMap<String, Vec<String>>>,
}

impl Default for LabelConfig {
    /// Mountain Car names, with the customary four-set vocabularies.
    fn default() -> Self {
        let four = |names: [&str; 4]| BTreeMap::from([("4".to_string(), names.map(String::from).to_vec())]);
        Self {
            features: vec!["x".into(), "ẋ".into()],
            actions: vec!["Left".into(), "Right".into()],
            values: vec![four(["FL", "L", "R", "FR"]), four(["VL", "L", "H", "VH"])],
        }
    }
}

impl LabelConfig {
    fn validate(&self, num_features: usize, num_actions: u8) -> Result<(), ExperimentError> {
        if self.features.len() != num_features {
            return Err(ExperimentError::Labels(format!(
                "{} feature names for {num_features} features",
                self.features.len()
            )));
        }
        if self.values.len() > num_features {
            return Err(ExperimentError::Labels(format!("value names for {} features", self.values.len())));
        }
        if !self.actions.is_empty() && self.actions.len() != usize::from(num_actions) {
            return Err(ExperimentError::Labels(format!(
                "{} action names for {num_actions} actions",
                self.actions.len()
            )));
        }
        for (f, table) in self.values.iter().enumerate() {
            for (key, names) in table {
                let m: usize = key
                    .parse()
                    .map_err(|_| ExperimentError::Labels(format!("granularity key {key:?} is not a number")))?;
                if names.len() != m {
                    return Err(ExperimentError::Labels(format!(
                        "feature {}: {} names listed for granularity {m}",
                        self.features[f],
                        names.len()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn for_tag(&self, tag: &SubspeciesTag) -> LinguisticLabels {
        let values = tag
            .granularities()
            .iter()
            .enumerate()
            .map(|(f, &m)| {
                self.values
                    .get(f)
                    .and_then(|t| t.get(&m.to_string()))
                    .cloned()
                    .unwrap_or_else(|| default_value_names(m))
            })
            .collect();
        LinguisticLabels { features: self.features.clone(), values, actions: self.actions.clone() }
    }
}

/// Everything that determines a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub environment: Environment,
    pub hyperparams: Hyperparams,
    #[serde(default)]
    pub labels: LabelConfig,
}

impl RunConfig {
    pub fn new(hyperparams: Hyperparams, seed: u64) -> Self {
        Self { seed, environment: Environment::default(), hyperparams, labels: LabelConfig::default() }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let env = self.environment.mountain_car();
        let d = env.feature_domains().len();
        self.hyperparams.validate(d)?;
        self.labels.validate(d, env.num_actions())
    }

    /// Read a TOML config, or the config embedded in a run manifest if the
    /// file has a `.json` extension.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let config: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str::<Manifest>(&text)
                .map_err(|source| ExperimentError::Json { path: path.to_path_buf(), source })?
                .config
        } else {
            toml::from_str(&text).map_err(|source| ExperimentError::Toml { path: path.to_path_buf(), source })?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is TOML-representable")
    }
}

/// Reproducibility record written next to the run artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: RunConfig,
    pub artifacts: Vec<String>,
}

/// A front solution in its structured, self-describing form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FrbsRecord {
    pub solution_id: String,
    pub run_seed: u64,
    pub tag: SubspeciesTag,
    pub perf: f64,
    pub complexity: u64,
    pub failed: bool,
    pub db_genotype: DbGenotype,
    pub rb_genotype: RbGenotype,
    pub frbs: Frbs,
    pub labels: LinguisticLabels,
    pub rules: Vec<String>,
}

impl FrbsRecord {
    pub fn from_solution(s: &Solution, run_seed: u64, labels: &LabelConfig) -> Result<Self, RenderError> {
        let labels = labels.for_tag(s.tag());
        Ok(Self {
            solution_id: solution_id(s),
            run_seed,
            tag: s.tag().clone(),
            perf: s.perf,
            complexity: s.complexity,
            failed: s.failed,
            db_genotype: s.db.clone(),
            rb_genotype: s.rb.clone(),
            rules: labels.render(&s.frbs.rb)?,
            frbs: s.frbs.clone(),
            labels,
        })
    }

    /// Header line followed by one rule per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "solution {} tag {} perf {} complexity {}\n",
            self.solution_id, self.tag, self.perf, self.complexity
        );
        for r in &self.rules {
            out.push_str(r);
            out.push('\n');
        }
        out
    }
}

/// Stable id of a solution within its run: the ids of its two components.
pub fn solution_id(s: &Solution) -> String {
    format!("db{}-rb{}", s.db_id, s.rb_id)
}

/// Highest performance, then lowest complexity, then first.
pub fn best_solution<'a>(front: &[&'a Solution]) -> Option<&'a Solution> {
    front.iter().copied().reduce(|best, s| {
        let better = s.perf > best.perf || (s.perf == best.perf && s.complexity < best.complexity);
        if better {
            s
        } else {
            best
        }
    })
}

pub fn front_records(outcome: &RunOutcome, run_seed: u64) -> Vec<FrontRecord> {
    outcome
        .front()
        .into_iter()
        .map(|s| FrontRecord {
            perf: s.perf,
            complexity: s.complexity,
            tag: s.tag().to_string(),
            run_seed,
            solution_id: solution_id(s),
        })
        .collect()
}

pub fn write_generations<W: std::io::Write>(
    w: W,
    tags: &[SubspeciesTag],
    records: &[GenerationRecord],
) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> =
        ["generation", "numSolutions", "numFailed", "bestPerf", "meanPerf", "frontSize"].map(String::from).to_vec();
    let column = |species: &str, t: &SubspeciesTag| {
        let dims: Vec<String> = t.granularities().iter().map(|m| m.to_string()).collect();
        format!("{species}_{}", dims.join("x"))
    };
    header.extend(tags.iter().map(|t| column("db", t)));
    header.extend(tags.iter().map(|t| column("rb", t)));
    out.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.generation.to_string(),
            r.num_solutions.to_string(),
            r.num_failed.to_string(),
            r.best_perf.to_string(),
            r.mean_perf.to_string(),
            r.front_size.to_string(),
        ];
        row.extend(r.db_counts.iter().chain(&r.rb_counts).map(|c| c.to_string()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ExperimentError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact is JSON-representable");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn write_csv(path: &Path, f: impl FnOnce(fs::File) -> Result<(), csv::Error>) -> Result<(), ExperimentError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    f(file).map_err(|source| ExperimentError::Csv { path: path.to_path_buf(), source })
}

/// Results of [`run_experiment`] kept in memory for the caller.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub outcome: RunOutcome,
    pub front: Vec<FrontRecord>,
    pub best: Option<FrbsRecord>,
}

/// Run once and write all artifacts into `out`.
pub fn run_experiment(
    config: &RunConfig,
    out: &Path,
    observer: impl FnMut(&GenerationRecord),
) -> Result<RunSummary, ExperimentError> {
    config.validate()?;
    let env = config.environment.mountain_car();
    let outcome = run_fuzzy_mococo(&config.hyperparams, env, config.seed, observer)?;
    fs::create_dir_all(out).map_err(io_err(out))?;

    let front = front_records(&outcome, config.seed);
    write_csv(&out.join(FRONT_FILE), |f| write_front(f, &front))?;
    write_csv(&out.join(GENERATIONS_FILE), |f| {
        write_generations(f, &config.hyperparams.subspecies, &outcome.generations)
    })?;

    let front_solutions = outcome.front();
    let records = front_solutions
        .iter()
        .map(|s| FrbsRecord::from_solution(s, config.seed, &config.labels))
        .collect::<Result<Vec<_>, _>>()?;
    write_json(&out.join(FRONT_FRBS_FILE), &records)?;
    let best = best_solution(&front_solutions).map(|b| {
        let id = solution_id(b);
        records.iter().find(|r| r.solution_id == id).expect("best is on the front").clone()
    });
    if let Some(b) = &best {
        write_json(&out.join(BEST_FRBS_FILE), b)?;
        let path = out.join(BEST_RULES_FILE);
        fs::write(&path, b.to_text()).map_err(io_err(&path))?;
    }

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: config.seed,
        config: config.clone(),
        artifacts: [FRONT_FILE, GENERATIONS_FILE, FRONT_FRBS_FILE, BEST_FRBS_FILE, BEST_RULES_FILE]
            .iter()
            .filter(|a| best.is_some() || !a.starts_with("best"))
            .map(|a| a.to_string())
            .collect(),
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(RunSummary { outcome, front, best })
}

/// Read FRBS records from either a front file (a list) or a single-record
/// file.
pub fn load_frbs_records(path: &Path) -> Result<Vec<FrbsRecord>, ExperimentError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let json_err = |source| ExperimentError::Json { path: path.to_path_buf(), source };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(json_err)?;
    let records = if value.is_array() {
        serde_json::from_value(value).map_err(json_err)?
    } else {
        vec![serde_json::from_value(value).map_err(json_err)?]
    };
    Ok(records)
}

/// Pick a record by id, or the only/best one when no id is given.
pub fn select_record(records: Vec<FrbsRecord>, id: Option<&str>, path: &Path) -> Result<FrbsRecord, ExperimentError> {
    match id {
        Some(id) => {
            records.into_iter().find(|r| r.solution_id == id).ok_or_else(|| ExperimentError::UnknownSolution(id.into()))
        }
        None => records
            .into_iter()
            .reduce(|best, r| {
                if r.perf > best.perf || (r.perf == best.perf && r.complexity < best.complexity) {
                    r
                } else {
                    best
                }
            })
            .ok_or_else(|| ExperimentError::NoSolutions { path: path.to_path_buf() }),
    }
}

/// Outcome of the value-iteration baseline on a fixed initial-state set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleReport {
    pub bins: usize,
    pub tolerance: f64,
    pub iterations: usize,
    pub seed: u64,
    pub eta: usize,
    pub perf: f64,
    pub failed: bool,
}

/// Solve the discretized task, score the greedy policy on the initial
/// states of `seed`, and optionally persist the report and policy table.
pub fn run_oracle(
    bins: usize,
    seed: u64,
    eta: usize,
    config: &McConfig,
    out: Option<&Path>,
) -> Result<OracleReport, ExperimentError> {
    let vi = value_iteration(bins, DEFAULT_TOLERANCE, config);
    let starts = InitialStateSet::sample(seed, eta);
    let result = evaluate_performance(&vi.policy, &starts, config).expect("oracle emits valid actions");
    let report = OracleReport {
        bins,
        tolerance: DEFAULT_TOLERANCE,
        iterations: vi.iterations(),
        seed,
        eta,
        perf: result.perf,
        failed: result.failed,
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        write_json(&dir.join(ORACLE_REPORT_FILE), &report)?;
        let path = dir.join(ORACLE_POLICY_FILE);
        let file = fs::File::create(&path).map_err(io_err(&path))?;
        vi.policy.write_to(std::io::BufWriter::new(file)).map_err(io_err(&path))?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> RunConfig {
        RunConfig::new(
            Hyperparams { num_gens: 2, db_pop_size: 8, rb_pop_size: 12, eta: 2, ..Hyperparams::default() },
            3,
        )
    }

    #[test]
    fn config_toml_round_trip() {
        let c = tiny();
        let text = c.to_toml();
        assert!(text.contains("kind = \"mountain-car\""));
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn minimal_toml_uses_defaults() {
        let text = r#"
            seed = 4
            [hyperparams]
            numGens = 10
            dbPopSize = 60
            rbPopSize = 120
            dbPCross = 0.75
            dbMutSigma = 0.02
            rbPCross = 0.25
            rbPMut = 0.05
            rbPUnspec = 0.1
            beta = 1.125
            eta = 10
            subspecies = [[2, 2], [3, 3], [4, 4], [5, 5]]
        "#;
        let c: RunConfig = toml::from_str(text).unwrap();
        assert_eq!(c.hyperparams, Hyperparams::smoke());
        assert_eq!(c.environment, Environment::default());
        assert_eq!(c.labels, LabelConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn partial_environment_override() {
        let env: Environment = toml::from_str("kind = \"mountain-car\"\ntMax = 150").unwrap();
        assert_eq!(env.mountain_car().t_max, 150);
        assert_eq!(env.mountain_car().position, McConfig::default().position);
        assert!(toml::from_str::<Environment>("kind = \"mountain-car\"\ntmaxx = 150").is_err());
        assert!(toml::from_str::<RunConfig>("seed = 1").unwrap_err().to_string().contains("hyperparams"));
    }

    #[test]
    fn labels_fall_back_to_defaults() {
        let l = LabelConfig::default();
        let four = l.for_tag(&"(4,4)".parse().unwrap());
        assert_eq!(four.values[0], ["FL", "L", "R", "FR"]);
        assert_eq!(four.values[1], ["VL", "L", "H", "VH"]);
        let three = l.for_tag(&"(3,3)".parse().unwrap());
        assert_eq!(three.values[0], ["L", "M", "H"]);
        let mut bad = l.clone();
        bad.values[0].insert("3".into(), vec!["a".into()]);
        assert!(matches!(bad.validate(2, 2), Err(ExperimentError::Labels(_))));
        assert!(matches!(l.validate(3, 2), Err(ExperimentError::Labels(_))));
    }

    #[test]
    fn run_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let summary = run_experiment(&tiny(), dir.path(), |_| {}).unwrap();
        for f in [FRONT_FILE, GENERATIONS_FILE, FRONT_FRBS_FILE, BEST_FRBS_FILE, BEST_RULES_FILE, MANIFEST_FILE] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let front = read_front(fs::File::open(dir.path().join(FRONT_FILE)).unwrap(), Path::new("front")).unwrap();
        assert_eq!(front, summary.front);
        assert!(!front.is_empty());
        let records = load_frbs_records(&dir.path().join(FRONT_FRBS_FILE)).unwrap();
        assert_eq!(records.len(), front.len());
        let best = load_frbs_records(&dir.path().join(BEST_FRBS_FILE)).unwrap();
        assert_eq!(Some(&best[0]), summary.best.as_ref());
        assert_eq!(select_record(records, None, Path::new("x")).unwrap(), best[0]);
        let gens = fs::read_to_string(dir.path().join(GENERATIONS_FILE)).unwrap();
        assert_eq!(gens.lines().count(), 3);
        assert!(gens.starts_with(
            "generation,numSolutions,numFailed,bestPerf,meanPerf,frontSize,db_2x2,db_3x3,db_4x4,db_5x5,rb_2x2"
        ));
        // The manifest reloads to the same config.
        assert_eq!(RunConfig::load(&dir.path().join(MANIFEST_FILE)).unwrap(), tiny());
    }

    #[test]
    fn oracle_report_persisted() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_oracle(50, 0, 5, &McConfig::default(), Some(dir.path())).unwrap();
        assert_eq!((r.bins, r.seed, r.eta), (50, 0, 5));
        let back: OracleReport =
            serde_json::from_str(&fs::read_to_string(dir.path().join(ORACLE_REPORT_FILE)).unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(dir.path().join(ORACLE_POLICY_FILE).exists());
    }
}
