//! One generation run end to end, and the probability sweep.

use std::path::{Path, PathBuf};
use std::rc::Rc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{build_cluster, AnalysisError, TestCluster};
use crate::executor::Executor;
use crate::export::{export_types, to_json, TypeRecord};
use crate::host::Loader;
use crate::inference::SelectionWeights;
use crate::instrument::{instrument, BranchRegistry, Goal};
use crate::metrics::mean;
use crate::search::emit::emit_module;
use crate::search::mosa::{generate, SearchConfig, SearchOutcome};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub module: String,
    pub project_root: PathBuf,
    pub seed: u64,
    pub budget: Duration,
    pub proxy_probability: f64,
    pub weights: SelectionWeights,
    pub union_cap: usize,
    pub use_annotations: bool,
    /// Artifacts are written here when set.
    pub output_dir: Option<PathBuf>,
    pub dependency_depth: usize,
    pub timeout: Duration,
    pub max_generations: Option<u64>,
}

impl RunConfig {
    pub fn new(module: impl Into<String>, project_root: impl Into<PathBuf>) -> Self {
        RunConfig {
            module: module.into(),
            project_root: project_root.into(),
            seed: 0,
            budget: Duration::from_secs(600),
            proxy_probability: 0.05,
            weights: SelectionWeights::default(),
            union_cap: 5,
            use_annotations: true,
            output_dir: None,
            dependency_depth: 1,
            timeout: Duration::from_secs(3),
            max_generations: None,
        }
    }

    pub fn validate(&self) -> Result<(), SetupError> {
        if !(0.0..=1.0).contains(&self.proxy_probability) {
            return Err(SetupError::Config(format!(
                "proxy probability {} outside [0, 1]",
                self.proxy_probability
            )));
        }
        if self.budget.is_zero() {
            return Err(SetupError::Config("budget must be positive".into()));
        }
        Ok(())
    }

    pub fn configuration(&self) -> &'static str {
        match (self.use_annotations, self.proxy_probability > 0.0) {
            (false, false) => "NoTypeHints",
            (true, false) => "TypeHints",
            (false, true) => "NoTypeHints-TypeTracing",
            (true, true) => "TypeHints-TypeTracing",
        }
    }

    pub fn project(&self) -> String {
        let root = std::fs::canonicalize(&self.project_root).unwrap_or_else(|_| self.project_root.clone());
        root.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| ".".into())
    }
}

#[derive(Debug, Error)]
pub enum SetupError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot load module `{module}`: {message}")]
    Load { module: String, message: String },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("cannot write artifacts: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write coverage CSV: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub elapsed_second: u64,
    pub branch_coverage: f64,
    pub configuration: String,
    pub project: String,
    pub module: String,
    pub seed: u64,
}

/// Coverage of one goal at the end of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalStatus {
    /// `f` or `C.m`.
    pub function: String,
    /// Line of the predicate, or of the function for root goals.
    pub line: u32,
    /// `None` for root goals.
    pub outcome: Option<bool>,
    pub covered: bool,
}

#[derive(Debug)]
pub struct RunReport {
    pub configuration: String,
    pub final_coverage: f64,
    pub total_goals: usize,
    pub generations: u64,
    pub evaluations: u64,
    pub elapsed: Duration,
    pub rows: Vec<CoverageRow>,
    pub records: Vec<TypeRecord>,
    pub goals: Vec<GoalStatus>,
    pub test_source: String,
    pub cluster: TestCluster,
}

/// Per-second rows for seconds `1..=ceil(elapsed)` (at least one, at most
/// the budget), each carrying the latest value observed by then.
pub fn per_second(timeline: &[(f64, f64)], elapsed: f64, budget_secs: u64) -> Vec<(u64, f64)> {
    let last = (elapsed.ceil() as u64).clamp(1, budget_secs.max(1));
    let mut rows = Vec::new();
    let mut current = 0.0;
    let mut it = timeline.iter().peekable();
    for s in 1..=last {
        while let Some((t, c)) = it.peek() {
            if *t <= s as f64 {
                current = *c;
                it.next();
            } else {
                break;
            }
        }
        rows.push((s, current));
    }
    // the final observation always lands in the last row
    if let (Some(row), Some((_, c))) = (rows.last_mut(), timeline.last()) {
        row.1 = *c;
    }
    rows
}

fn goal_statuses(registry: &BranchRegistry, outcome: &SearchOutcome) -> Vec<GoalStatus> {
    registry
        .goals
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let code = registry.codes.iter().find(|c| c.id == g.code()).expect("goal code registered");
            let (line, outcome_flag) = match g {
                Goal::Arm { predicate, outcome, .. } => (code.predicates[*predicate as usize].line, Some(*outcome)),
                Goal::Root { .. } => (code.line, None),
            };
            GoalStatus {
                function: code.name.clone(),
                line,
                outcome: outcome_flag,
                covered: outcome.archive.entries.contains_key(&i),
            }
        })
        .collect()
}

/// Loads, instruments and analyses the subject, runs the search and, when
/// an output directory is configured, writes the test module, the coverage
/// CSV and the inferred-types JSON there.
pub fn run(config: &RunConfig) -> Result<RunReport, SetupError> {
    config.validate()?;
    let start = Instant::now();
    let loader = Rc::new(Loader::new(&config.project_root, !config.use_annotations));
    let subject = loader.load(&config.module).map_err(|message| SetupError::Load {
        module: config.module.clone(),
        message,
    })?;
    let mut tree = (*subject).clone();
    let registry = instrument(&mut tree);
    loader.insert(tree);
    let mut cluster = build_cluster(&loader, &config.module, config.dependency_depth)?;
    for w in &cluster.warnings {
        log::warn!("{w}");
    }
    let mut executor = Executor::new(loader, &cluster, config.timeout);
    let search = SearchConfig {
        budget: config.budget.saturating_sub(start.elapsed()),
        max_generations: config.max_generations,
        proxy_probability: config.proxy_probability,
        weights: config.weights,
        union_cap: config.union_cap,
        ..SearchConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let outcome = generate(&mut cluster, &registry, &mut executor, &search, &mut rng);
    let elapsed = start.elapsed();
    log::info!(
        "{} {}: {:.1} % after {} generations",
        config.module,
        config.configuration(),
        100.0 * outcome.coverage(),
        outcome.generations
    );

    let (configuration, project) = (config.configuration().to_string(), config.project());
    // timeline times are relative to the search start; shift to run start
    let offset = (elapsed.as_secs_f64() - outcome.timeline.last().map_or(0.0, |t| t.0)).max(0.0);
    let shifted: Vec<(f64, f64)> = outcome.timeline.iter().map(|(t, c)| (t + offset, *c)).collect();
    let rows = per_second(&shifted, elapsed.as_secs_f64(), config.budget.as_secs().max(1))
        .into_iter()
        .map(|(s, c)| CoverageRow {
            elapsed_second: s,
            branch_coverage: c,
            configuration: configuration.clone(),
            project: project.clone(),
            module: config.module.clone(),
            seed: config.seed,
        })
        .collect::<Vec<_>>();
    let records = export_types(&cluster);
    let suite = outcome.archive.suite();
    let pairs: Vec<_> = suite.iter().map(|e| (&e.test, &e.result)).collect();
    let test_source = emit_module(&cluster, &pairs);

    if let Some(dir) = &config.output_dir {
        write_artifacts(dir, &config.module, &test_source, &rows, &records)?;
    }
    Ok(RunReport {
        configuration,
        final_coverage: outcome.coverage(),
        total_goals: outcome.total_goals,
        generations: outcome.generations,
        evaluations: outcome.evaluations,
        elapsed,
        rows,
        records,
        goals: goal_statuses(&registry, &outcome),
        test_source,
        cluster,
    })
}

pub fn artifact_names(module: &str) -> [String; 3] {
    let stem = module.replace('.', "_");
    [format!("test_{stem}.py"), format!("coverage_{stem}.csv"), format!("types_{stem}.json")]
}

fn write_artifacts(
    dir: &Path,
    module: &str,
    source: &str,
    rows: &[CoverageRow],
    records: &[TypeRecord],
) -> Result<(), SetupError> {
    std::fs::create_dir_all(dir)?;
    let [test, csv_name, json] = artifact_names(module);
    std::fs::write(dir.join(test), source)?;
    let mut w = csv::Writer::from_path(dir.join(csv_name))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    std::fs::write(dir.join(json), to_json(records) + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub probability: f64,
    pub runs: usize,
    pub failed: usize,
    pub mean_final_coverage: f64,
}

/// Runs every probability over every module and seed and averages the
/// final coverage per probability. Failing runs are skipped with a warning.
pub fn sweep(base: &RunConfig, modules: &[String], probabilities: &[f64], seeds: &[u64]) -> Vec<SweepRow> {
    probabilities
        .iter()
        .map(|p| {
            let mut finals = Vec::new();
            let mut failed = 0;
            for module in modules {
                for seed in seeds {
                    let cfg = RunConfig {
                        module: module.clone(),
                        seed: *seed,
                        proxy_probability: *p,
                        ..base.clone()
                    };
                    match run(&cfg) {
                        Ok(r) => finals.push(r.final_coverage),
                        Err(e) => {
                            log::warn!("{module} seed {seed} p {p}: {e}");
                            failed += 1;
                        }
                    }
                }
            }
            SweepRow {
                probability: *p,
                runs: finals.len(),
                failed,
                mean_final_coverage: mean(&finals).unwrap_or(0.0),
            }
        })
        .collect()
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<(), SetupError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(["probability", "runs", "failed", "mean_final_coverage"])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn project(files: &[(&str, &str)]) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for (name, src) in files {
            std::fs::write(dir.path().join(name), src).unwrap();
        }
        dir
    }

    #[test]
    fn per_second_carries_values_forward() {
        let t = [(0.2, 0.1), (0.9, 0.3), (2.5, 0.6)];
        assert_eq!(per_second(&t, 3.4, 10), vec![(1, 0.3), (2, 0.3), (3, 0.6), (4, 0.6)]);
        assert_eq!(per_second(&[(0.0, 1.0)], 0.0, 10), vec![(1, 1.0)]);
        assert_eq!(per_second(&[(1.5, 0.5)], 12.0, 3).len(), 3);
    }

    #[test]
    fn configuration_names() {
        let mut c = RunConfig::new("m", ".");
        c.use_annotations = false;
        c.proxy_probability = 0.0;
        assert_eq!(c.configuration(), "NoTypeHints");
        c.proxy_probability = 0.05;
        assert_eq!(c.configuration(), "NoTypeHints-TypeTracing");
        c.use_annotations = true;
        assert_eq!(c.configuration(), "TypeHints-TypeTracing");
        c.proxy_probability = 1.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn run_writes_three_artifacts() {
        let dir = project(&[("m.py", "def f(x):\n    if x > 3:\n        return 1\n    return 0\n")]);
        let out = dir.path().join("out");
        let mut c = RunConfig::new("m", dir.path());
        c.output_dir = Some(out.clone());
        c.budget = Duration::from_secs(10);
        let r = run(&c).unwrap();
        assert_eq!(r.final_coverage, 1.0);
        for name in artifact_names("m") {
            assert!(out.join(&name).is_file(), "{name}");
        }
        let csv = std::fs::read_to_string(out.join("coverage_m.csv")).unwrap();
        assert!(csv.starts_with("elapsed_second,branch_coverage,configuration,project,module,seed\n"));
        assert!(r.test_source.contains("module_0.f("));
    }

    #[test]
    fn missing_module_writes_nothing() {
        let dir = project(&[]);
        let out = dir.path().join("out");
        let mut c = RunConfig::new("nope", dir.path());
        c.output_dir = Some(out.clone());
        assert!(matches!(run(&c), Err(SetupError::Load { .. })));
        assert!(!out.exists());
    }

    #[test]
    fn sweep_rows_per_probability() {
        let dir = project(&[("m.py", "def f():\n    return 1\n")]);
        let c = RunConfig::new("m", dir.path());
        let rows = sweep(&c, &["m".into()], &[0.0, 1.0], &[1, 2]);
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.runs == 2 && r.mean_final_coverage == 1.0));
        assert!(sweep(&c, &["m".into()], &[], &[1]).is_empty());
    }
}
