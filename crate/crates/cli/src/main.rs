use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::Parser;
use tracegen_core::driver::{run, sweep, write_sweep, RunConfig};
use tracegen_core::inference::SelectionWeights;

/// Generates unit tests for a module, inferring parameter types from how
/// the module uses its arguments at runtime.
#[derive(Debug, Parser)]
#[command(name = "tracegen", version)]
struct Args {
    /// Dotted module name; a comma-separated list with --sweep.
    #[arg(long)]
    module: String,
    /// Directory the module is resolved against.
    #[arg(long, default_value = ".")]
    project_root: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Search budget in seconds.
    #[arg(long, default_value_t = 600)]
    budget: u64,
    /// Probability of a proxied execution per test execution.
    #[arg(long, default_value_t = 0.05)]
    proxy_prob: f64,
    /// Selection weights w_dev,w_none,w_any,w_union.
    #[arg(long, default_value = "10,1,5,10")]
    weights: SelectionWeights,
    #[arg(long, default_value_t = 5)]
    union_cap: usize,
    /// Strip parameter and return annotations before analysis.
    #[arg(long)]
    no_annotations: bool,
    #[arg(long, default_value = "tracegen-out")]
    output_dir: PathBuf,
    /// Run every listed probability over the modules and seeds instead of a
    /// single run, writing sweep.csv.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    sweep: Option<Vec<f64>>,
    /// Number of seeds per sweep cell, counted up from --seed.
    #[arg(long, default_value_t = 10)]
    sweep_seeds: u64,
    /// How many import levels beyond the subject are analysed.
    #[arg(long, default_value_t = 1)]
    dependency_depth: usize,
    /// Per-test execution timeout in seconds.
    #[arg(long, default_value_t = 3.0)]
    timeout: f64,
    /// Stop after this many generations.
    #[arg(long)]
    max_generations: Option<u64>,
}

fn config(args: &Args) -> Result<RunConfig> {
    if !(0.0..=1.0).contains(&args.proxy_prob) {
        bail!("--proxy-prob must lie in [0, 1]");
    }
    if args.budget == 0 {
        bail!("--budget must be positive");
    }
    if args.timeout.is_nan() || args.timeout <= 0.0 {
        bail!("--timeout must be positive");
    }
    let mut c = RunConfig::new(args.module.clone(), args.project_root.clone());
    c.seed = args.seed;
    c.budget = Duration::from_secs(args.budget);
    c.proxy_probability = args.proxy_prob;
    c.weights = args.weights;
    c.union_cap = args.union_cap;
    c.use_annotations = !args.no_annotations;
    c.output_dir = Some(args.output_dir.clone());
    c.dependency_depth = args.dependency_depth;
    c.timeout = Duration::from_secs_f64(args.timeout);
    c.max_generations = args.max_generations;
    Ok(c)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<()> {
    let args = Args::parse();
    let base = config(&args)?;
    if let Some(probabilities) = &args.sweep {
        if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            bail!("sweep probability {p} outside [0, 1]");
        }
        let modules: Vec<String> = args.module.split(',').map(|m| m.trim().to_string()).collect();
        let seeds: Vec<u64> = (args.seed..args.seed + args.sweep_seeds).collect();
        let rows = sweep(&RunConfig { output_dir: None, ..base }, &modules, probabilities, &seeds);
        let path = args.output_dir.join("sweep.csv");
        write_sweep(&path, &rows).with_context(|| format!("writing {}", path.display()))?;
        for r in &rows {
            println!("p={} runs={} mean_final_coverage={:.4}", r.probability, r.runs, r.mean_final_coverage);
        }
        return Ok(());
    }
    let report = run(&base).with_context(|| format!("generating tests for `{}`", args.module))?;
    println!(
        "{} [{}]: branch coverage {:.2} % over {} goals, {} generations, {:.1} s",
        args.module,
        report.configuration,
        100.0 * report.final_coverage,
        report.total_goals,
        report.generations,
        report.elapsed.as_secs_f64()
    );
    Ok(())
}
