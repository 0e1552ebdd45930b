use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use keysel::datamodel::io::{
    load_label_maps, load_result, load_sequence, save_result, save_sequence, GROUND_TRUTH_FILE, LABELS_FILE,
};
use keysel::metrics::default_boundary_tolerance;
use keysel::pipeline::render_overlay;
use keysel::{evaluate, run_sequence, PipelineConfig64, SequenceInput64};
use keysel_bench::{generate_scenario, search_hyperparams, ScenarioSpec, SearchSpace};

#[derive(Parser)]
#[command(name = "keysel", version, about = "Multi-instance video tracker with key instance selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track a sequence directory and write labels.txt and provenance.txt.
    Run {
        #[arg(long)]
        input: PathBuf,
        /// key = value configuration; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predicted label maps against ground truth.
    Eval {
        /// Result directory or label file.
        #[arg(long)]
        pred: PathBuf,
        /// Sequence directory or label file.
        #[arg(long)]
        gt: PathBuf,
        /// Boundary tolerance in pixels; defaults to 0.8% of the frame diagonal.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Where to write the `name: value` report; defaults to report.txt beside the predictions.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Draw one frame of a result as a PPM image.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        frame: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic sequence directory from a scenario spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random hyperparameter search over a set of scenarios.
    Search {
        #[arg(long)]
        space: PathBuf,
        /// Directory of scenario spec files (*.txt) and/or sequence directories with ground truth.
        #[arg(long)]
        scenarios: PathBuf,
        /// Overrides the space file's trial budget.
        #[arg(long)]
        trials: Option<usize>,
        /// Overrides the space file's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Base configuration for the parameters that are not searched.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Trial log destination; the best configuration goes to `<out>.best.txt`.
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig64> {
    match path {
        Some(p) => Ok(PipelineConfig64::parse(&p.display().to_string(), &read(p)?)?),
        None => Ok(PipelineConfig64::default()),
    }
}

fn load_scenarios(dir: &Path) -> Result<Vec<SequenceInput64>> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    let mut out = Vec::new();
    for path in entries {
        if path.is_dir() {
            let input = load_sequence(&path).with_context(|| format!("loading {}", path.display()))?;
            if input.ground_truth.is_none() {
                bail!("{} has no {GROUND_TRUTH_FILE}", path.display());
            }
            out.push(input);
        } else if path.extension().is_some_and(|e| e == "txt") {
            let spec = ScenarioSpec::parse(&path.display().to_string(), &read(&path)?)?;
            out.push(generate_scenario(&spec)?.0);
        }
    }
    if out.is_empty() {
        bail!("no scenarios found in {}", dir.display());
    }
    Ok(out)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { input, config, out } => {
            let config = load_config(config.as_deref())?;
            let seq = load_sequence(&input).with_context(|| format!("loading {}", input.display()))?;
            let result = run_sequence(&seq, &config)?;
            save_result(&result, &out)?;
            let ids: std::collections::BTreeSet<_> = result.provenance.iter().map(|r| r.instance).collect();
            println!("tracked {} frames, {} instance IDs -> {}", result.frame_count(), ids.len(), out.display());
        }
        Command::Eval { pred, gt, tolerance, report } => {
            let (pred_size, pred_maps) = load_label_maps(&pred, LABELS_FILE)?;
            let (gt_size, gt_maps) = load_label_maps(&gt, GROUND_TRUTH_FILE)?;
            if pred_size != gt_size {
                bail!("frame size differs: prediction {pred_size:?}, ground truth {gt_size:?}");
            }
            let tol = tolerance.unwrap_or_else(|| default_boundary_tolerance(gt_size));
            let rep = evaluate(&pred_maps, &gt_maps, tol)?;
            print!("{}", rep.to_table());
            let path = report.unwrap_or_else(|| {
                if pred.is_dir() {
                    pred.join("report.txt")
                } else {
                    pred.with_extension("report.txt")
                }
            });
            fs::write(&path, rep.to_key_values()).with_context(|| format!("writing {}", path.display()))?;
        }
        Command::Render { input, result, frame, out } => {
            let seq: SequenceInput64 = load_sequence(&input)?;
            let res = load_result(&result)?;
            render_overlay(&seq, &res, frame, &out)?;
        }
        Command::Synth { spec, out } => {
            let spec = ScenarioSpec::parse(&spec.display().to_string(), &read(&spec)?)?;
            let (input, _) = generate_scenario::<f64>(&spec)?;
            save_sequence(&input, &out)?;
            let n: usize = input.candidates.iter().map(Vec::len).sum();
            println!("wrote {} frames, {n} candidates -> {}", input.frame_count(), out.display());
        }
        Command::Search { space, scenarios, trials, seed, config, out } => {
            let mut space = SearchSpace::parse(&space.display().to_string(), &read(&space)?)?;
            if let Some(t) = trials {
                space.trials = t;
            }
            if let Some(s) = seed {
                space.seed = s;
            }
            let base = load_config(config.as_deref())?;
            let inputs = load_scenarios(&scenarios)?;
            let outcome = search_hyperparams(&space, &inputs, &base)?;
            fs::write(&out, outcome.log_text()).with_context(|| format!("writing {}", out.display()))?;
            let best_path = PathBuf::from(format!("{}.best.txt", out.display()));
            fs::write(&best_path, outcome.best.to_text())
                .with_context(|| format!("writing {}", best_path.display()))?;
            println!(
                "best global mean {:.4} at trial {} of {} -> {}",
                outcome.best_score,
                outcome.best_index,
                outcome.trials.len(),
                best_path.display()
            );
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(cli.command) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
