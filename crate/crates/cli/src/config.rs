//! Flags and TOML sections share field names. A resolved config is built
//! from built-in defaults, then the config file section, then flags.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use padic_conv::ring::DEFAULT_BUDGET;

pub const CACHE_ENV: &str = "PADIC_CONV_CACHE";
pub const DEFAULT_CACHE_DIR: &str = ".padic-conv-cache";

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Args, Debug, Default, Serialize)]
pub struct GlobalArgs {
    /// TOML experiment file; flags override its values
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Worker threads (defaults to the number of cores)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Maximum number of tuples to enumerate per count
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Count cache directory (else $PADIC_CONV_CACHE, else .padic-conv-cache)
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "is_false")]
    pub no_cache: bool,
    /// Directory for JSON, CSV and .dat outputs
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalConfig {
    pub workers: Option<usize>,
    pub budget: u64,
    pub seed: u64,
    pub cache_dir: Option<PathBuf>,
    pub no_cache: bool,
    pub out_dir: Option<PathBuf>,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        Self { workers: None, budget: DEFAULT_BUDGET, seed: 0, cache_dir: None, no_cache: false, out_dir: None }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fiber counts of a map over G(Z/p^k)
    Count(CountArgs),
    /// Check that counting commutes with convolution
    Identity(IdentityArgs),
    /// Sup-density scan across convolution powers
    Scan(ScanArgs),
    /// Plancherel, inversion, convolution theorem and Hölder checks
    Fourier(FourierArgs),
    /// Igusa zeta functions and level-set measures
    Zeta(ZetaArgs),
    /// Convergence, closed forms and epsilon selection for exponential sums
    Sums(SumsArgs),
    /// The L^1 but not L^{1+eps} construction
    #[command(subcommand)]
    Appendix(AppendixCommand),
}

#[derive(Subcommand, Debug)]
pub enum AppendixCommand {
    /// Sample sign vectors until both norm bounds hold
    Search(SearchArgs),
    /// Monte Carlo tail of |X_{N,t}| against 4 exp(-s^2/4N)
    Bernstein(BernsteinArgs),
    /// Fitted growth of the L^{1+eps} norm over N
    Scaling(ScalingArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Count(_) => "count",
            Command::Identity(_) => "identity",
            Command::Scan(_) => "scan",
            Command::Fourier(_) => "fourier",
            Command::Zeta(_) => "zeta",
            Command::Sums(_) => "sums",
            Command::Appendix(AppendixCommand::Search(_)) => "appendix-search",
            Command::Appendix(AppendixCommand::Bernstein(_)) => "appendix-bernstein",
            Command::Appendix(AppendixCommand::Scaling(_)) => "appendix-scaling",
        }
    }

    /// TOML section holding this command's settings.
    pub fn section(&self) -> &'static [&'static str] {
        match self {
            Command::Count(_) => &["count"],
            Command::Identity(_) => &["identity"],
            Command::Scan(_) => &["scan"],
            Command::Fourier(_) => &["fourier"],
            Command::Zeta(_) => &["zeta"],
            Command::Sums(_) => &["sums"],
            Command::Appendix(AppendixCommand::Search(_)) => &["appendix", "search"],
            Command::Appendix(AppendixCommand::Bernstein(_)) => &["appendix", "bernstein"],
            Command::Appendix(AppendixCommand::Scaling(_)) => &["appendix", "scaling"],
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct CountArgs {
    /// Map text or catalog name such as `power:2`
    #[arg(long)]
    pub map: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<u32>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountConfig {
    pub map: String,
    pub p: Vec<u64>,
    pub k: Vec<u32>,
}

impl Default for CountConfig {
    fn default() -> Self {
        Self { map: String::new(), p: vec![5], k: vec![1] }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct IdentityArgs {
    #[arg(long)]
    pub map: Option<String>,
    /// Second factor; defaults to the first
    #[arg(long)]
    pub map2: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<u32>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentityConfig {
    pub map: String,
    pub map2: Option<String>,
    pub p: Vec<u64>,
    pub k: Vec<u32>,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        Self { map: String::new(), map2: None, p: vec![5], k: vec![1] }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ScanArgs {
    #[arg(long)]
    pub map: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<u64>>,
    #[arg(long)]
    pub k_max: Option<u32>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub map: String,
    pub p: Vec<u64>,
    pub k_max: u32,
    pub n_max: usize,
    pub tau: f64,
    pub eps: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        let d = padic_conv::density::ScanOptions::default();
        Self { map: String::new(), p: d.p_list, k_max: d.k_max, n_max: d.n_max, tau: d.tau, eps: d.eps }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct FourierArgs {
    /// `additive[d]` or `heisenberg`
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Also transform the density of this map and run the smoothing chain
    #[arg(long)]
    pub map: Option<String>,
    /// Exponents s for the smoothing chain
    #[arg(long, value_delimiter = ',')]
    pub s: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FourierConfig {
    pub group: String,
    pub p: u64,
    pub k: u32,
    pub trials: usize,
    pub map: Option<String>,
    pub s: Vec<f64>,
}

impl Default for FourierConfig {
    fn default() -> Self {
        Self { group: "heisenberg".into(), p: 3, k: 1, trials: 100, map: None, s: vec![1.1, 1.5, 2.0] }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ZetaArgs {
    /// Integer polynomial in x1, x2, ...
    #[arg(long)]
    pub poly: Option<String>,
    #[arg(long)]
    pub p: Option<u64>,
    /// Values of s, as integers, fractions or decimals
    #[arg(long, value_delimiter = ',')]
    pub s: Option<Vec<String>>,
    /// `closed` or `empirical`
    #[arg(long)]
    pub mode: Option<String>,
    /// Truncation level K for empirical mode
    #[arg(long)]
    pub k_trunc: Option<u32>,
    /// Number of variables (defaults to those used by the polynomial)
    #[arg(long)]
    pub n_vars: Option<usize>,
    /// For x1^n, also report the rational function in T = p^-s
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub rationality: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZetaConfig {
    pub poly: String,
    pub p: u64,
    pub s: Vec<String>,
    pub mode: String,
    pub k_trunc: u32,
    pub n_vars: Option<usize>,
    pub rationality: bool,
}

impl Default for ZetaConfig {
    fn default() -> Self {
        Self { poly: String::new(), p: 5, s: vec!["1".into()], mode: "empirical".into(), k_trunc: 8, n_vars: None, rationality: false }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SumsArgs {
    /// Expression text, e.g. `sum q^(-e1 + (-1+2*eps)*e2) * (e1^2+1)`
    #[arg(long)]
    pub expr: Option<String>,
    /// File holding one expression
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Name from the built-in instance library
    #[arg(long)]
    pub instance: Option<String>,
    /// Comma-separated subset of `decide,eval,find-epsilon,growth`
    #[arg(long, value_delimiter = ',')]
    pub actions: Option<Vec<String>>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    /// Random re-checks of the polynomial growth bound
    #[arg(long)]
    pub checks: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SumsConfig {
    pub expr: Option<String>,
    pub file: Option<PathBuf>,
    pub instance: Option<String>,
    pub actions: Vec<String>,
    pub q: String,
    pub eps: String,
    pub checks: usize,
}

impl Default for SumsConfig {
    fn default() -> Self {
        Self {
            expr: None,
            file: None,
            instance: None,
            actions: vec!["decide".into(), "eval".into(), "find-epsilon".into()],
            q: "2".into(),
            eps: "0".into(),
            checks: 1000,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SearchArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub max_trials: Option<usize>,
    #[arg(long)]
    pub c1: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub n: usize,
    pub eps: f64,
    pub max_trials: usize,
    pub c1: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { n: 64, eps: 0.25, max_trials: 200, c1: padic_conv::appendix::DEFAULT_C1 }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct BernsteinArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// s = s_mult * sqrt(N log N)
    #[arg(long)]
    pub s_mult: Option<f64>,
    #[arg(long)]
    pub t_count: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BernsteinConfig {
    pub n: usize,
    pub s_mult: f64,
    pub t_count: usize,
    pub trials: usize,
}

impl Default for BernsteinConfig {
    fn default() -> Self {
        Self { n: 256, s_mult: 4.0, t_count: 16, trials: 10_000 }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ScalingArgs {
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub max_trials: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub n_list: Vec<usize>,
    pub eps: f64,
    pub max_trials: usize,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self { n_list: vec![64, 128, 256, 512, 1024], eps: 0.5, max_trials: 200 }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

pub fn load_file(path: &Path) -> Result<Value, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    serde_json::to_value(table).map_err(|e| ConfigError(e.to_string()))
}

fn section<'a>(file: Option<&'a Value>, path: &[&str]) -> Option<&'a Map<String, Value>> {
    let mut v = file?;
    for key in path {
        v = v.get(key)?;
    }
    v.as_object()
}

/// Defaults, overlaid by the file section at `path`, overlaid by the flags
/// that were given.
pub fn resolve<A: Serialize, C: DeserializeOwned>(file: Option<&Value>, path: &[&str], flags: &A) -> Result<C, ConfigError> {
    let mut merged = section(file, path).cloned().unwrap_or_default();
    if let Value::Object(given) = serde_json::to_value(flags).map_err(|e| ConfigError(e.to_string()))? {
        for (k, v) in given {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| ConfigError(format!("[{}]: {e}", path.join("."))))
}
