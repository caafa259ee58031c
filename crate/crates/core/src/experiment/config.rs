use std::fmt::Write as _;
use std::str::FromStr;

use crate::clustering::Algorithm;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaMode {
    /// `θ ≡ 1`.
    Uniform,
    /// `ψ_i ~ Uniform[1, 2]` normalised per community.
    Heterogeneous,
}

impl ThetaMode {
    pub fn name(self) -> &'static str {
        match self {
            ThetaMode::Uniform => "uniform",
            ThetaMode::Heterogeneous => "heterogeneous",
        }
    }
}

impl FromStr for ThetaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(ThetaMode::Uniform),
            "heterogeneous" => Ok(ThetaMode::Heterogeneous),
            other => Err(Error::Config(format!("unknown theta mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub max_size: usize,
    pub p: f64,
    pub q: f64,
    pub density_scales: Vec<f64>,
    pub theta_mode: ThetaMode,
    pub trials: usize,
    pub master_seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub balance_edge_sizes: bool,
    pub allow_repeats: bool,
    pub c0: f64,
    pub kmeans_restarts: usize,
    pub eigen_tol: f64,
    /// Count nodes with a zero embedding row as misclustered.
    pub zero_rows_as_errors: bool,
    /// Worker threads; 0 uses all cores. Output does not depend on it.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 600,
            k: 2,
            max_size: 3,
            p: 10.0,
            q: 1.0,
            density_scales: vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0],
            theta_mode: ThetaMode::Uniform,
            trials: 10,
            master_seed: 1,
            algorithms: vec![Algorithm::Kmeans, Algorithm::Threshold],
            balance_edge_sizes: true,
            allow_repeats: true,
            c0: 1.0,
            kmeans_restarts: 20,
            eigen_tol: 1e-10,
            zero_rows_as_errors: false,
            threads: 0,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean `{v}` for `{key}`"))),
    }
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Parses `key = value` lines on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            c.set(key.trim(), value.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "n" => self.n = parse_value(key, v)?,
            "k" => self.k = parse_value(key, v)?,
            "max_size" => self.max_size = parse_value(key, v)?,
            "p" => self.p = parse_value(key, v)?,
            "q" => self.q = parse_value(key, v)?,
            "density_scales" => self.density_scales = parse_list(key, v)?,
            "theta_mode" => self.theta_mode = v.parse()?,
            "trials" => self.trials = parse_value(key, v)?,
            "master_seed" => self.master_seed = parse_value(key, v)?,
            "algorithms" => self.algorithms = parse_list(key, v)?,
            "balance_edge_sizes" => self.balance_edge_sizes = parse_bool(key, v)?,
            "allow_repeats" => self.allow_repeats = parse_bool(key, v)?,
            "c0" => self.c0 = parse_value(key, v)?,
            "kmeans_restarts" => self.kmeans_restarts = parse_value(key, v)?,
            "eigen_tol" => self.eigen_tol = parse_value(key, v)?,
            "zero_rows_as_errors" => self.zero_rows_as_errors = parse_bool(key, v)?,
            "threads" => self.threads = parse_value(key, v)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.k == 0 || self.n < self.k {
            return fail(format!("need 1 <= k <= n, got k={} n={}", self.k, self.n));
        }
        if !(2..=crate::model::MAX_EDGE_SIZE).contains(&self.max_size) {
            return fail(format!("max_size must be in 2..=20, got {}", self.max_size));
        }
        if !(self.q > 0.0 && self.p > self.q && self.p.is_finite()) {
            return fail(format!("need p > q > 0, got p={} q={}", self.p, self.q));
        }
        if self.density_scales.is_empty()
            || self.density_scales.iter().any(|&s| !(s > 0.0 && s.is_finite()))
        {
            return fail("density_scales must be a non-empty list of positive numbers".into());
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return fail("at least one algorithm is required".into());
        }
        if self.kmeans_restarts == 0 {
            return fail("kmeans_restarts must be at least 1".into());
        }
        if !(self.c0 > 0.0) || !(self.eigen_tol > 0.0) {
            return fail("c0 and eigen_tol must be positive".into());
        }
        Ok(())
    }

    /// The full configuration in the format accepted by [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String, note: &str| {
            writeln!(s, "# {note}").unwrap();
            writeln!(s, "{k} = {v}").unwrap();
        };
        kv("n", self.n.to_string(), "number of nodes");
        kv("k", self.k.to_string(), "number of equal-size communities");
        kv("max_size", self.max_size.to_string(), "largest hyperedge size");
        kv("p", self.p.to_string(), "affinity when all labels agree");
        kv("q", self.q.to_string(), "affinity otherwise");
        kv(
            "density_scales",
            join(&self.density_scales),
            "multipliers on every alpha; 1 means average expected hyperdegree 1",
        );
        kv("theta_mode", self.theta_mode.name().into(), "uniform | heterogeneous");
        kv("trials", self.trials.to_string(), "trials per scale");
        kv("master_seed", self.master_seed.to_string(), "root of all random streams");
        kv(
            "algorithms",
            self.algorithms.iter().map(|a| a.name()).collect::<Vec<_>>().join(","),
            "kmeans, threshold",
        );
        kv(
            "balance_edge_sizes",
            self.balance_edge_sizes.to_string(),
            "equal expected hyperedge counts across sizes",
        );
        kv(
            "allow_repeats",
            self.allow_repeats.to_string(),
            "keep hyperedges with repeated nodes",
        );
        kv("c0", self.c0.to_string(), "d = max(n max P, c0 log n)");
        kv("kmeans_restarts", self.kmeans_restarts.to_string(), "k-means++ restarts");
        kv("eigen_tol", self.eigen_tol.to_string(), "relative residual tolerance");
        kv(
            "zero_rows_as_errors",
            self.zero_rows_as_errors.to_string(),
            "count zero embedding rows as misclustered",
        );
        kv("threads", self.threads.to_string(), "worker threads, 0 = all cores");
        s
    }
}
