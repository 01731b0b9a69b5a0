//! Thin CLI over the library: experiment runs, single-trajectory simulation,
//! and topology-metric evaluation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;

use opidyn::dynamics::{sample_model, simulate};
use opidyn::graph::SignedGraph;
use opidyn::harness::{run_experiment, Algorithm, ExperimentConfig};
use opidyn::learners::TAU_SUPP;
use opidyn::metrics::tpr_fpr;

#[derive(Parser)]
#[command(name = "opidyn", about = "Joint topology and opinion-dynamics inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full benchmark and write results.csv / aggregates.csv.
    Run {
        /// TOML experiment configuration; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed (overrides the config file).
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated roster subset (IE,eG,RS,OLS,SS,GPR,IEp,eGp).
        #[arg(long)]
        algos: Option<String>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Sample one model from the config and write its trajectory as CSV.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Topology recovery rates of an estimated adjacency against the truth.
    Metrics {
        /// Ground-truth graph as an edge list (`n=<count>` header, `i j sign`).
        #[arg(long)]
        truth: PathBuf,
        /// Estimated adjacency as dense CSV.
        #[arg(long)]
        estimate: PathBuf,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig, String> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            ExperimentConfig::from_toml(&text)
        }
    }
}

fn parse_dense_csv(text: &str) -> Result<Vec<Vec<i8>>, String> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        // Skip a non-numeric header row.
        if idx == 0 && line.split(',').any(|c| c.trim().parse::<f64>().is_err()) {
            continue;
        }
        let row: Result<Vec<i8>, String> = line
            .split(',')
            .map(|c| {
                let v: f64 = c.trim().parse().map_err(|e| format!("line {}: {e}", idx + 1))?;
                Ok(if v.abs() <= TAU_SUPP {
                    0
                } else if v > 0.0 {
                    1
                } else {
                    -1
                })
            })
            .collect();
        rows.push(row?);
    }
    if rows.is_empty() {
        return Err("empty estimate file".into());
    }
    Ok(rows)
}

fn real_main() -> Result<(), String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed, out, algos, jobs } => {
            let cfg = load_config(&config)?;
            let master = seed.unwrap_or(cfg.seed);
            let roster = match algos {
                Some(s) => Algorithm::parse_list(&s)?,
                None => Algorithm::ALL.to_vec(),
            };
            let results = run_experiment(&cfg, master, &roster, jobs);
            results.write(&out).map_err(|e| e.to_string())?;
            println!("wrote {} and {}", out.join("results.csv").display(), out.join("aggregates.csv").display());
        }
        Command::Simulate { config, seed, out } => {
            let cfg = load_config(&config)?;
            let master = seed.unwrap_or(cfg.seed);
            let mut rng = ChaCha8Rng::seed_from_u64(master);
            let model = sample_model(&cfg.model_gen(), &mut rng).map_err(|e| e.to_string())?;
            let max_t = *cfg.horizons.iter().max().ok_or("empty horizons")?;
            let traj = simulate(&model, max_t).map_err(|e| e.to_string())?;
            std::fs::write(&out, traj.to_csv()).map_err(|e| e.to_string())?;
            println!("wrote {}", out.display());
        }
        Command::Metrics { truth, estimate } => {
            let truth_text = std::fs::read_to_string(&truth).map_err(|e| format!("{}: {e}", truth.display()))?;
            let graph = SignedGraph::from_edge_list(&truth_text).map_err(|e| e.to_string())?;
            let est_text = std::fs::read_to_string(&estimate).map_err(|e| format!("{}: {e}", estimate.display()))?;
            let est = parse_dense_csv(&est_text)?;
            let n = graph.n();
            if est.len() != n || est.iter().any(|r| r.len() != n) {
                return Err(format!("estimate dimension mismatch: truth is {n}x{n}"));
            }
            let truth_rows: Vec<Vec<i8>> = (0..n).map(|i| graph.row(i).to_vec()).collect();
            let (tpr, fpr) = tpr_fpr(&truth_rows, &est);
            println!("tpr={tpr}");
            println!("fpr={fpr}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
