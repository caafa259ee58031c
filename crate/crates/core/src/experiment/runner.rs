use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::clustering::{kmeans_rows, misclustering, threshold_cluster, Algorithm, KmeansOptions};
use crate::diagnostics::{
    assumption_report_from, population_embedding, spectral_deviation, twoinf_deviation,
    AssumptionReport, DeviationStats,
};
use crate::model::{sample_scalable_with, ModelParams, SampleOptions};
use crate::projection::{population_matrix, weighted_adjacency};
use crate::seed::stream_seed;
use crate::spectral::{leading_eigenpairs, row_normalize, ZERO_ROW_EPS};
use crate::{Error, Result};

use super::config::ExperimentConfig;
use super::setup::{balance_alphas, equal_block_labels, make_theta, planted_params};

/// Per-trial knobs shared by every trial of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSettings {
    pub algorithms: Vec<Algorithm>,
    pub allow_repeats: bool,
    pub c0: f64,
    pub kmeans_restarts: usize,
    pub eigen_tol: f64,
    pub zero_rows_as_errors: bool,
}

impl TrialSettings {
    pub fn from_config(c: &ExperimentConfig) -> Self {
        TrialSettings {
            algorithms: c.algorithms.clone(),
            allow_repeats: c.allow_repeats,
            c0: c.c0,
            kmeans_restarts: c.kmeans_restarts,
            eigen_tol: c.eigen_tol,
            zero_rows_as_errors: c.zero_rows_as_errors,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmOutcome {
    pub algorithm: Algorithm,
    /// Misclustered nodes under the best label permutation.
    pub errors: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub edges: usize,
    pub sampled_max_degree: u64,
    pub avg_expected_degree: f64,
    pub zero_rows: usize,
    pub algorithms: Vec<AlgorithmOutcome>,
    pub report: AssumptionReport,
    pub deviation: DeviationStats,
    /// Short markers such as `rank_deficient` or `tie_at_k`.
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub scale: f64,
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub outcome: std::result::Result<TrialOutcome, String>,
    pub wall_time_ms: u64,
}

impl TrialRecord {
    pub fn errors(&self, alg: Algorithm) -> Option<usize> {
        self.outcome
            .as_ref()
            .ok()?
            .algorithms
            .iter()
            .find(|a| a.algorithm == alg)
            .map(|a| a.errors)
    }

    /// `err / n`.
    pub fn error_rate(&self, alg: Algorithm) -> Option<f64> {
        self.errors(alg).map(|e| e as f64 / self.n as f64)
    }
}

/// Samples one hypergraph from `params` and runs the whole pipeline on it.
pub fn evaluate(params: &ModelParams, settings: &TrialSettings, seed: u64) -> Result<TrialOutcome> {
    let n = params.n;
    let k = params.k;
    let sampled = sample_scalable_with(
        params,
        stream_seed(seed, "sample", &[]),
        SampleOptions {
            allow_repeats: settings.allow_repeats,
        },
    )?;
    let mut flags: Vec<String> = Vec::new();
    if !sampled.warnings.is_empty() {
        flags.push("low_acceptance".into());
    }
    let h = &sampled.hypergraph;
    let a = weighted_adjacency(h);
    let emb_a = leading_eigenpairs(&a, k, settings.eigen_tol, stream_seed(seed, "eigen", &[]))?;

    let pop = population_matrix(params)?;
    let emb_p = population_embedding(&pop, stream_seed(seed, "population-eigen", &[]))?;
    let report = assumption_report_from(&pop, &emb_p, params.max_size, settings.c0);
    let spectral = spectral_deviation(&a, &pop.p, report.d)?;
    let two_inf = twoinf_deviation(&emb_a, &emb_p, &report)?;

    if !report.full_rank {
        flags.push("degenerate_eigengap".into());
    }
    if emb_a.tie_at_k {
        flags.push("tie_at_k".into());
    }
    if emb_a.rank_deficient {
        flags.push("rank_deficient".into());
    }
    if two_inf.alignment_degenerate {
        flags.push("alignment_degenerate".into());
    }

    let (ustar, zero_rows) = row_normalize(&emb_a.u, ZERO_ROW_EPS);
    let mut algorithms = Vec::new();
    for &alg in &settings.algorithms {
        let result = match alg {
            Algorithm::Kmeans => {
                let opts = KmeansOptions {
                    restarts: settings.kmeans_restarts,
                    ..KmeansOptions::default()
                };
                kmeans_rows(&ustar, k, &opts, stream_seed(seed, "kmeans", &[]))
            }
            Algorithm::Threshold => threshold_cluster(&ustar, k),
        };
        if result.degenerate {
            flags.push(format!("{}_degenerate", alg.name()));
        }
        let errors = if settings.zero_rows_as_errors && !zero_rows.is_empty() {
            let keep: Vec<usize> = (0..n).filter(|i| zero_rows.binary_search(i).is_err()).collect();
            let g: Vec<usize> = keep.iter().map(|&i| params.labels[i]).collect();
            let gp: Vec<usize> = keep.iter().map(|&i| result.labels[i]).collect();
            zero_rows.len() + misclustering(&g, &gp, k)
        } else {
            misclustering(&params.labels, &result.labels, k)
        };
        algorithms.push(AlgorithmOutcome {
            algorithm: alg,
            errors,
            objective: result.objective,
        });
    }

    Ok(TrialOutcome {
        edges: h.edges().len(),
        sampled_max_degree: h.hyperdegrees().into_iter().max().unwrap_or(0),
        avg_expected_degree: pop.average_expected_degree(),
        zero_rows: zero_rows.len(),
        algorithms,
        report,
        deviation: DeviationStats { spectral, two_inf },
        flags,
    })
}

/// Seed of trial `trial` at density `scale`; independent of every other trial.
pub fn trial_seed(master: u64, scale: f64, trial: usize) -> u64 {
    stream_seed(master, "trial", &[scale.to_bits(), trial as u64])
}

fn trial_params(config: &ExperimentConfig, scale: f64, seed: u64) -> Result<ModelParams> {
    let labels = equal_block_labels(config.n, config.k);
    let theta = make_theta(
        config.theta_mode,
        config.n,
        config.k,
        &labels,
        stream_seed(seed, "theta", &[]),
    );
    let alpha = balance_alphas(
        config.n,
        config.k,
        config.max_size,
        config.p,
        config.q,
        &labels,
        &theta,
        scale,
        config.balance_edge_sizes,
    )?;
    planted_params(config.k, config.max_size, config.p, config.q, &labels, &theta, alpha)
}

/// The model a given trial samples from.
pub fn trial_model(config: &ExperimentConfig, scale: f64, trial: usize) -> Result<ModelParams> {
    trial_params(config, scale, trial_seed(config.master_seed, scale, trial))
}

pub fn run_trial(config: &ExperimentConfig, scale: f64, trial: usize) -> TrialRecord {
    let start = Instant::now();
    let seed = trial_seed(config.master_seed, scale, trial);
    let settings = TrialSettings::from_config(config);
    let outcome = trial_params(config, scale, seed)
        .and_then(|params| evaluate(&params, &settings, seed))
        .map_err(|e| e.to_string());
    TrialRecord {
        scale,
        trial,
        seed,
        n: config.n,
        outcome,
        wall_time_ms: start.elapsed().as_millis() as u64,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scale: f64,
    pub algorithm: Algorithm,
    pub trials: usize,
    pub failed: usize,
    pub mean_error_rate: f64,
    pub sd_error_rate: f64,
    pub se_error_rate: f64,
    /// Fraction of successful trials with no misclustered node.
    pub exact_recovery: f64,
    pub avg_expected_degree: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    /// Sorted by (scale position in the grid, trial).
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

pub fn summarize(config: &ExperimentConfig, records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for &scale in &config.density_scales {
        let at_scale: Vec<&TrialRecord> = records.iter().filter(|r| r.scale == scale).collect();
        let degrees: Vec<f64> = at_scale
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|o| o.avg_expected_degree))
            .collect();
        let avg_degree = mean(&degrees);
        for &alg in &config.algorithms {
            let rates: Vec<f64> = at_scale.iter().filter_map(|r| r.error_rate(alg)).collect();
            let sd = sample_sd(&rates);
            rows.push(SummaryRow {
                scale,
                algorithm: alg,
                trials: rates.len(),
                failed: at_scale.len() - rates.len(),
                mean_error_rate: mean(&rates),
                sd_error_rate: sd,
                se_error_rate: if rates.is_empty() {
                    f64::NAN
                } else {
                    sd / (rates.len() as f64).sqrt()
                },
                exact_recovery: rates.iter().filter(|&&r| r == 0.0).count() as f64
                    / rates.len() as f64,
                avg_expected_degree: avg_degree,
            });
        }
    }
    rows
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Runs every (scale, trial) pair. Trial failures are recorded, never propagated.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let jobs: Vec<(f64, usize)> = config
        .density_scales
        .iter()
        .flat_map(|&s| (0..config.trials).map(move |t| (s, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let records: Vec<TrialRecord> =
        pool.install(|| jobs.par_iter().map(|&(s, t)| run_trial(config, s, t)).collect());
    let summary = summarize(config, &records);
    Ok(ExperimentOutput { records, summary })
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Column order of `trials.csv`.
pub const TRIAL_COLUMNS: &[&str] = &[
    "scale",
    "trial",
    "seed",
    "status",
    "flags",
    "n",
    "edges",
    "sampled_max_degree",
    "avg_expected_degree",
    "err_kmeans",
    "err_rate_kmeans",
    "kmeans_cost",
    "err_threshold",
    "err_rate_threshold",
    "threshold_level",
    "zero_rows",
    "max_size",
    "size_ratio",
    "kappa",
    "lambda_1",
    "lambda_k",
    "gamma",
    "d",
    "cond1",
    "cond2",
    "full_rank",
    "spec_dev",
    "spec_ratio",
    "two_inf_dev",
    "frobenius_dev",
    "two_inf_normalized",
    "row_norm_two_inf",
];

pub const SUMMARY_COLUMNS: &[&str] = &[
    "scale",
    "algorithm",
    "trials",
    "failed",
    "mean_error_rate",
    "sd_error_rate",
    "se_error_rate",
    "exact_recovery",
    "avg_expected_degree",
];

fn trial_row(r: &TrialRecord) -> String {
    let mut s = format!("{},{},{}", r.scale, r.trial, r.seed);
    match &r.outcome {
        Err(msg) => {
            let clean: String = msg
                .chars()
                .map(|c| if c == ',' || c == '\n' || c == '"' { ' ' } else { c })
                .collect();
            write!(s, ",error: {clean},,{}", r.n).unwrap();
            s.push_str(&",".repeat(TRIAL_COLUMNS.len() - 6));
        }
        Ok(o) => {
            let alg = |a: Algorithm| o.algorithms.iter().find(|x| x.algorithm == a);
            let km = alg(Algorithm::Kmeans);
            let th = alg(Algorithm::Threshold);
            let rep = &o.report;
            let dev = &o.deviation;
            let fields: Vec<String> = vec![
                "ok".into(),
                o.flags.join(";"),
                r.n.to_string(),
                o.edges.to_string(),
                o.sampled_max_degree.to_string(),
                o.avg_expected_degree.to_string(),
                opt(km.map(|a| a.errors)),
                opt(r.error_rate(Algorithm::Kmeans)),
                opt(km.map(|a| a.objective)),
                opt(th.map(|a| a.errors)),
                opt(r.error_rate(Algorithm::Threshold)),
                opt(th.map(|a| a.objective)),
                o.zero_rows.to_string(),
                rep.max_size.to_string(),
                rep.size_ratio.to_string(),
                rep.kappa.to_string(),
                rep.lambda_1.to_string(),
                rep.lambda_k.to_string(),
                rep.gamma.to_string(),
                rep.d.to_string(),
                rep.cond1.to_string(),
                rep.cond2.to_string(),
                rep.full_rank.to_string(),
                dev.spectral.spec_dev.to_string(),
                dev.spectral.spec_ratio.to_string(),
                dev.two_inf.two_inf_dev.to_string(),
                dev.two_inf.frobenius_dev.to_string(),
                dev.two_inf.two_inf_normalized.to_string(),
                dev.two_inf.row_norm_two_inf.to_string(),
            ];
            for f in fields {
                s.push(',');
                s.push_str(&f);
            }
        }
    }
    s
}

impl ExperimentOutput {
    pub fn write_trials_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", TRIAL_COLUMNS.join(","))?;
        for r in &self.records {
            writeln!(w, "{}", trial_row(r))?;
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", SUMMARY_COLUMNS.join(","))?;
        for s in &self.summary {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                s.scale,
                s.algorithm.name(),
                s.trials,
                s.failed,
                s.mean_error_rate,
                s.sd_error_rate,
                s.se_error_rate,
                s.exact_recovery,
                s.avg_expected_degree
            )?;
        }
        Ok(())
    }

    /// Wall-clock times live apart from `trials.csv` so that file stays reproducible.
    pub fn write_timings_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "scale,trial,wall_time_ms")?;
        for r in &self.records {
            writeln!(w, "{},{},{}", r.scale, r.trial, r.wall_time_ms)?;
        }
        Ok(())
    }

    pub fn trials_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_trials_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn summary_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_summary_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Writes `trials.csv`, `summary.csv` and `timings.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("trials.csv"), self.trials_csv())?;
        std::fs::write(dir.join("summary.csv"), self.summary_csv())?;
        let mut t = Vec::new();
        self.write_timings_csv(&mut t)?;
        std::fs::write(dir.join("timings.csv"), t)?;
        Ok(())
    }
}
