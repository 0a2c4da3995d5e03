use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "qlangevin", version, about = "Quantum Langevin response, dispersion, stability and simulation tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample χ_T, ξ_T and C_FF on a grid and report quasistatic coefficients.
    Response(ResponseArgs),
    /// Rebuild χ_T from ξ_T and check FDT and detailed balance.
    Kk(KkArgs),
    /// Classify the motion from the mechanical impedance.
    Stability(StabilityArgs),
    /// Simulate a trajectory ensemble.
    Simulate(SimulateArgs),
}

/// Fills every unset field of `$a` from `$b`.
macro_rules! merge_fields {
    ($a:ident, $b:ident; $($f:ident),* $(,)?) => {
        $( if $a.$f.is_none() { $a.$f = $b.$f.take(); } )*
    };
}

fn load<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResponseArgs {
    /// JSON file with the same keys as the long flags; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// `perfect`, `resonance:<cutoff>` or `tabulated:<r.csv>,<s.csv>`.
    #[arg(long)]
    pub model: Option<String>,
    /// Temperature of the input field.
    #[arg(long)]
    pub temp: Option<f64>,
    /// Frequency grid `<step>:<points per side>`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the spectra as JSON.
    #[arg(long)]
    pub json: bool,
}

impl ResponseArgs {
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let mut file: Self = load(self.config.as_deref())?;
        merge_fields!(self, file; model, temp, grid, out);
        self.json |= file.json;
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KkArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub temp: Option<f64>,
    /// Frequency grid `<step>:<points per side>` (default: step Ω/40 up to 100Ω).
    #[arg(long)]
    pub grid: Option<String>,
    /// Read ξ_T from this CSV (`omega,re,im`) instead of computing it.
    #[arg(long)]
    pub xi: Option<PathBuf>,
    /// Number of subtractions at ω = 0 (0 to 3).
    #[arg(long)]
    pub subtractions: Option<usize>,
    /// `truncate`, `power_law` or `log_linear`.
    #[arg(long)]
    pub tail: Option<String>,
    /// Largest accepted relative residual.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Comparison band `<lo>:<hi>` in units of the model frequency scale.
    #[arg(long)]
    pub band: Option<String>,
    /// Also compute the induced masses.
    #[arg(long)]
    pub induced_mass: bool,
    /// Write the report JSON here as well as to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl KkArgs {
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let mut file: Self = load(self.config.as_deref())?;
        merge_fields!(self, file; model, temp, grid, xi, subtractions, tail, tol, band, out);
        self.induced_mass |= file.induced_mass;
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Renormalised point charge, `M=<mass> e2=<charge²> K=<spring>`.
    #[arg(long, num_args = 1..)]
    pub abraham_lorentz: Option<Vec<String>>,
    /// Scatterer model (`resonance:<cutoff>`, …); needs `--mass`.
    #[arg(long)]
    pub scatterer: Option<String>,
    /// White-noise coupling, `m=<mass> K=<spring> D=<diffusion> T=<temperature>`.
    #[arg(long, num_args = 1..)]
    pub brownian: Option<Vec<String>>,
    #[arg(long)]
    pub temp: Option<f64>,
    /// Vacuum quasistatic mass M_0 of the scatterer.
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub spring: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl StabilityArgs {
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let mut file: Self = load(self.config.as_deref())?;
        merge_fields!(self, file; abraham_lorentz, scatterer, brownian, temp, mass, spring, out);
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// `perfect`, `brownian`, `resonance:<cutoff>` or `abraham-lorentz`.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub temp: Option<f64>,
    /// Particle mass (high-frequency mass for `perfect` and `brownian`,
    /// vacuum quasistatic mass for `resonance`, bare mass for `abraham-lorentz`).
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub spring: Option<f64>,
    /// Diffusion coefficient of the `brownian` model.
    #[arg(long)]
    pub diffusion: Option<f64>,
    /// Charge squared of the `abraham-lorentz` model.
    #[arg(long)]
    pub charge_squared: Option<f64>,
    #[arg(long)]
    pub n_traj: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub first_stream: Option<u64>,
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Highest noise frequency; must not exceed π/dt.
    #[arg(long)]
    pub band: Option<f64>,
    /// Lag window `<lo>:<hi>` for the diffusion fit.
    #[arg(long)]
    pub window: Option<String>,
    /// Time discarded before equilibrium averages.
    #[arg(long)]
    pub discard: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write `traj_<stream>.csv` files.
    #[arg(long)]
    pub write_trajectories: bool,
}

impl SimulateArgs {
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let mut file: Self = load(self.config.as_deref())?;
        merge_fields!(self, file; model, temp, mass, spring, diffusion, charge_squared, n_traj, seed, first_stream,
            duration, dt, band, window, discard, threads, out);
        self.write_trajectories |= file.write_trajectories;
        Ok(self)
    }
}

pub fn require<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing required option --{flag}")))
}

pub fn parse_pair(s: &str, flag: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("--{flag}: expected <a>:<b>, got '{s}'")))?;
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("--{flag}: '{x}' is not a number")))
    };
    Ok((num(a)?, num(b)?))
}

pub fn parse_grid(s: &str) -> Result<qlangevin::FrequencyGrid, CliError> {
    let (step, n) = parse_pair(s, "grid")?;
    if n.fract() != 0.0 || n < 1.0 {
        return Err(CliError::Usage(format!("--grid: point count must be a positive integer, got {n}")));
    }
    qlangevin::FrequencyGrid::new(step, n as usize).map_err(|e| CliError::Usage(format!("--grid: {e}")))
}

pub fn parse_model(s: &str) -> Result<qlangevin::SMatrixModel, CliError> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "perfect" => Ok(qlangevin::SMatrixModel::PerfectReflector),
        "resonance" => {
            let c: f64 = rest
                .parse()
                .map_err(|_| CliError::Usage(format!("--model: bad cutoff in '{s}'")))?;
            qlangevin::SMatrixModel::resonance(c).map_err(|e| CliError::Usage(format!("--model: {e}")))
        }
        "tabulated" => {
            let (r, t) = rest
                .split_once(',')
                .ok_or_else(|| CliError::Usage("--model tabulated:<r.csv>,<s.csv>".into()))?;
            Ok(qlangevin::SMatrixModel::from_csv_files(r, t)?)
        }
        _ => Err(CliError::Usage(format!(
            "--model: unknown model '{s}' (expected perfect, resonance:<cutoff> or tabulated:<r>,<s>)"
        ))),
    }
}

/// `key=value` list into a map; every key in `keys` must be present.
pub fn parse_kv(items: &[String], keys: &[&str], flag: &str) -> Result<HashMap<String, f64>, CliError> {
    let mut map = HashMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--{flag}: expected key=value, got '{item}'")))?;
        if !keys.contains(&k) {
            return Err(CliError::Usage(format!("--{flag}: unknown key '{k}' (expected {})", keys.join(", "))));
        }
        let v: f64 = v
            .parse()
            .map_err(|_| CliError::Usage(format!("--{flag}: '{v}' is not a number")))?;
        map.insert(k.to_string(), v);
    }
    for k in keys {
        if !map.contains_key(*k) {
            return Err(CliError::Usage(format!("--{flag}: missing {k}=<value>")));
        }
    }
    Ok(map)
}

pub fn parse_tail(s: Option<&str>) -> Result<qlangevin::TailModel, CliError> {
    match s.unwrap_or("log_linear") {
        "truncate" => Ok(qlangevin::TailModel::Truncate),
        "power_law" => Ok(qlangevin::TailModel::PowerLaw),
        "log_linear" => Ok(qlangevin::TailModel::LogLinear),
        other => Err(CliError::Usage(format!(
            "--tail: unknown tail model '{other}' (truncate, power_law, log_linear)"
        ))),
    }
}
