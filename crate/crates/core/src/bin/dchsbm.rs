use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dchsbm::clustering::{kmeans_rows, misclustering, read_labels_csv, threshold_cluster, write_labels_csv};
use dchsbm::clustering::{Algorithm, KmeansOptions};
use dchsbm::diagnostics::{assumption_report_from, population_embedding, AssumptionReport};
use dchsbm::experiment::{run_experiment, trial_model, trial_seed, ExperimentConfig};
use dchsbm::model::{sample_scalable_with, Hypergraph, SampleOptions, MAX_EDGE_SIZE};
use dchsbm::projection::{population_matrix, weighted_adjacency};
use dchsbm::seed::stream_seed;
use dchsbm::spectral::{leading_eigenpairs, row_normalize, ZERO_ROW_EPS};
use dchsbm::{Error, Result};

#[derive(Parser)]
#[command(name = "dchsbm", version, about = "Hypergraph block model sampling and spectral clustering")]
struct Cli {
    /// Master seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for output files; stdout when absent.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Constant in d = max(n max P, c0 log n).
    #[arg(long, global = true)]
    c0: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a hypergraph from the planted model described by a config.
    Generate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Density scale; defaults to the first one in the config.
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Cluster the nodes of a hypergraph file.
    Cluster {
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "kmeans")]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Ground-truth labels CSV; prints the misclustering count.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Print the assumption report of the population model.
    Diagnose {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Run a Monte-Carlo sweep and write trials.csv, summary.csv and timings.csv.
    Experiment {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the default configuration (or the given one with overrides applied).
    PrintConfig {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn at(path: &Path, e: io::Error) -> dchsbm::Error {
    io::Error::new(e.kind(), format!("{}: {e}", path.display())).into()
}

fn load_config(path: Option<&Path>, cli: &Cli) -> Result<ExperimentConfig> {
    let mut c = match path {
        Some(p) => ExperimentConfig::parse(&std::fs::read_to_string(p).map_err(|e| at(p, e))?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        c.master_seed = s;
    }
    if let Some(t) = cli.threads {
        c.threads = t;
    }
    if let Some(c0) = cli.c0 {
        c.c0 = c0;
    }
    c.validate()?;
    Ok(c)
}

fn output(cli: &Cli, name: &str) -> Result<Box<dyn Write>> {
    match &cli.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| at(dir, e))?;
            let path = dir.join(name);
            Ok(Box::new(BufWriter::new(File::create(&path).map_err(|e| at(&path, e))?)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn report_lines(r: &AssumptionReport) -> Vec<(&'static str, String)> {
    vec![
        ("max_size", r.max_size.to_string()),
        ("size_ratio", r.size_ratio.to_string()),
        ("kappa", r.kappa.to_string()),
        ("lambda_1", r.lambda_1.to_string()),
        ("lambda_k", r.lambda_k.to_string()),
        ("gamma", r.gamma.to_string()),
        ("d", r.d.to_string()),
        ("cond1", r.cond1.to_string()),
        ("cond2", r.cond2.to_string()),
        ("full_rank", r.full_rank.to_string()),
    ]
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate {
            config,
            scale,
            trial,
        } => {
            let c = load_config(config.as_deref(), cli)?;
            let scale = scale.unwrap_or(c.density_scales[0]);
            let params = trial_model(&c, scale, *trial)?;
            let seed = trial_seed(c.master_seed, scale, *trial);
            let out = sample_scalable_with(
                &params,
                stream_seed(seed, "sample", &[]),
                SampleOptions {
                    allow_repeats: c.allow_repeats,
                },
            )?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            let mut w = output(cli, "hypergraph.txt")?;
            out.hypergraph.write_text(&mut w)?;
            w.flush()?;
            if cli.out_dir.is_some() {
                let mut w = output(cli, "labels.csv")?;
                write_labels_csv(&params.labels, &mut w)?;
                w.flush()?;
            }
        }
        Command::Cluster {
            input,
            k,
            algorithm,
            restarts,
            tol,
            truth,
        } => {
            let h = Hypergraph::read_text(BufReader::new(File::open(input).map_err(|e| at(input, e))?), MAX_EDGE_SIZE)?;
            if *k == 0 || *k > h.n() {
                return Err(Error::Config(format!("k must be in 1..={}", h.n())));
            }
            let seed = cli.seed.unwrap_or(1);
            let a = weighted_adjacency(&h);
            let emb = leading_eigenpairs(&a, *k, *tol, stream_seed(seed, "eigen", &[]))?;
            let (ustar, zero_rows) = row_normalize(&emb.u, ZERO_ROW_EPS);
            let result = match algorithm {
                Algorithm::Kmeans => {
                    let opts = KmeansOptions {
                        restarts: *restarts,
                        ..KmeansOptions::default()
                    };
                    kmeans_rows(&ustar, *k, &opts, stream_seed(seed, "kmeans", &[]))
                }
                Algorithm::Threshold => threshold_cluster(&ustar, *k),
            };
            if !zero_rows.is_empty() {
                eprintln!("warning: {} nodes have a zero embedding row", zero_rows.len());
            }
            if result.degenerate {
                eprintln!("warning: fewer than {k} clusters could be formed");
            }
            let mut w = output(cli, "labels.csv")?;
            write_labels_csv(&result.labels, &mut w)?;
            w.flush()?;
            if cli.out_dir.is_some() {
                let mut w = output(cli, "embedding.csv")?;
                emb.write_csv(&mut w)?;
                w.flush()?;
                let mut w = output(cli, "adjacency.txt")?;
                a.write_coordinate(&mut w)?;
                w.flush()?;
            }
            if let Some(path) = truth {
                let g = read_labels_csv(BufReader::new(File::open(path).map_err(|e| at(path, e))?))?;
                if g.len() != h.n() {
                    return Err(Error::Dimension(format!(
                        "{} truth labels for {} nodes",
                        g.len(),
                        h.n()
                    )));
                }
                let kk = (*k).max(g.iter().max().map_or(0, |m| m + 1));
                let err = misclustering(&g, &result.labels, kk);
                eprintln!("misclustered {err} of {} (rate {})", h.n(), err as f64 / h.n() as f64);
            }
        }
        Command::Diagnose {
            config,
            scale,
            trial,
        } => {
            let c = load_config(config.as_deref(), cli)?;
            let scale = scale.unwrap_or(c.density_scales[0]);
            let params = trial_model(&c, scale, *trial)?;
            let pop = population_matrix(&params)?;
            let emb = population_embedding(&pop, stream_seed(c.master_seed, "population-eigen", &[]))?;
            let report = assumption_report_from(&pop, &emb, params.max_size, c.c0);
            let mut w = output(cli, "diagnostics.csv")?;
            writeln!(w, "field,value")?;
            writeln!(w, "avg_expected_degree,{}", pop.average_expected_degree())?;
            for (k, v) in report_lines(&report) {
                writeln!(w, "{k},{v}")?;
            }
            w.flush()?;
        }
        Command::Experiment { config } => {
            let c = load_config(config.as_deref(), cli)?;
            let out = run_experiment(&c)?;
            let dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("results"));
            out.write_dir(&dir)?;
            let failed = out.records.iter().filter(|r| r.outcome.is_err()).count();
            if failed > 0 {
                eprintln!("warning: {failed} trials failed; see trials.csv");
            }
            print!("{}", out.summary_csv());
        }
        Command::PrintConfig { config } => {
            let c = load_config(config.as_deref(), cli)?;
            let mut w = output(cli, "config.txt")?;
            w.write_all(c.to_text().as_bytes())?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) => 1,
                ref e if e.is_numerical() => 3,
                _ => 2,
            })
        }
    }
}
