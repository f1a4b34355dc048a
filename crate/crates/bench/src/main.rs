use clap::{Args, Parser, Subcommand};
use grnewton::data::{synthetic_dataset, write_libsvm};
use grnewton_bench::artifact::io_err;
use grnewton_bench::experiment::{
    gamma_probe, inexactness, predict, run_experiment, write_artifacts, write_prediction, write_probe, BenchError,
};
use grnewton_bench::ExperimentConfig;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "grn-bench", version, about = "Run gradient-regularized Newton experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Override the experiment seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (or file for gen-data).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    #[arg(long, global = true)]
    grad_tol: Option<f64>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every method from every starting point and write traces.
    Run { config: PathBuf },
    /// Estimate γ along trajectories (or over a grid of starting points).
    GammaProbe { config: PathBuf },
    /// Fit inexactness constants of the configured approximations.
    Inexactness { config: PathBuf },
    /// Print iteration-complexity envelopes.
    Predict { config: PathBuf },
    /// Write a synthetic dataset in libsvm format.
    GenData {
        #[arg(long, default_value_t = 200)]
        rows: usize,
        #[arg(long, default_value_t = 100)]
        cols: usize,
    },
}

fn load(path: &Path, common: &Common) -> Result<ExperimentConfig, BenchError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(m) = common.max_iters {
        cfg.stop.max_iters = m;
    }
    if let Some(t) = common.grad_tol {
        cfg.stop.grad_tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig, common: &Common) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name))
}

fn create(dir: &Path) -> Result<(), BenchError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e).into())
}

fn execute(cli: &Cli) -> Result<(), BenchError> {
    let common = &cli.common;
    match &cli.command {
        Command::Run { config } => {
            let cfg = load(config, common)?;
            let outputs = run_experiment(&cfg)?;
            let dir = out_dir(&cfg, common);
            let files = write_artifacts(&cfg, &outputs, &dir)?;
            if !common.quiet {
                for o in &outputs {
                    if cfg.is_grid() {
                        continue;
                    }
                    println!(
                        "{:<32} {:<14} iters={:<5} f={:.6e} |g|={:.3e} calls={}",
                        o.method,
                        o.summary.status,
                        o.summary.iterations,
                        o.summary.final_f,
                        o.summary.final_grad_dual_norm,
                        o.summary.oracle_calls
                    );
                }
                if cfg.is_grid() {
                    let mut names: Vec<&str> = outputs.iter().map(|o| o.method.as_str()).collect();
                    names.dedup();
                    for name in names {
                        let failed = outputs
                            .iter()
                            .filter(|o| o.method == name && o.summary.status != "converged")
                            .count();
                        let total = outputs.iter().filter(|o| o.method == name).count();
                        println!("{name:<32} failed {failed}/{total}");
                    }
                }
                println!("wrote {} files to {}", files.len(), dir.display());
            }
        }
        Command::GammaProbe { config } => {
            let cfg = load(config, common)?;
            let rows = gamma_probe(&cfg)?;
            let dir = out_dir(&cfg, common);
            create(&dir)?;
            let path = dir.join("gamma_probe.csv");
            let file = std::fs::File::create(&path).map_err(|e| io_err(&path, e))?;
            write_probe(&rows, std::io::BufWriter::new(file))?;
            if !common.quiet {
                println!("{} estimates written to {}", rows.len(), path.display());
            }
        }
        Command::Inexactness { config } => {
            let cfg = load(config, common)?;
            let records = inexactness(&cfg)?;
            let dir = out_dir(&cfg, common);
            create(&dir)?;
            let path = dir.join("inexactness.json");
            let text = serde_json::to_string_pretty(&records).map_err(|e| BenchError::Run(e.to_string()))?;
            std::fs::write(&path, format!("{text}\n")).map_err(|e| io_err(&path, e))?;
            if !common.quiet {
                for r in &records {
                    println!(
                        "{:<32} C1={:.4e} C2={:.4e} beta={} max e={:.4e}",
                        r.method, r.c1, r.c2, r.beta, r.max_residual
                    );
                }
            }
        }
        Command::Predict { config } => {
            let cfg = load(config, common)?;
            let p = predict(&cfg)?;
            if !common.quiet {
                println!("# F0={} grad0={} dominated rate: {}", p.params_f0, p.params_grad0, p.dominated_rate);
            }
            write_prediction(&p, std::io::stdout().lock())?;
            if let Some(dir) = common.out.clone().or_else(|| cfg.output_dir.clone()) {
                create(&dir)?;
                let path = dir.join("prediction.csv");
                let file = std::fs::File::create(&path).map_err(|e| io_err(&path, e))?;
                write_prediction(&p, file)?;
            }
        }
        Command::GenData { rows, cols } => {
            let data = synthetic_dataset(*rows, *cols, common.seed.unwrap_or(0));
            let path = common.out.clone().unwrap_or_else(|| PathBuf::from("synthetic.libsvm"));
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                create(parent)?;
            }
            write_libsvm(&data, &path).map_err(|e| BenchError::Run(e.to_string()))?;
            if !common.quiet {
                println!("wrote {rows}x{cols} dataset to {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
