//! Run configurations: every subcommand's flags double as a serializable
//! parameter record, so `run_config.json` fully determines a run.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use super::family::KSpec;
use crate::error::{Error, Result};
use crate::morse::SearchOptions;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Output root used when `--out` is absent.
pub const OUT_ENV: &str = "CURVLAB_OUT";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub version: String,
    #[serde(flatten)]
    pub command: Command,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            version: VERSION.to_string(),
            command,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
    }

    /// Parses a config, rejecting keys that no parameter consumes.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        let cfg: Self =
            serde_json::from_value(raw.clone()).map_err(|e| Error::Schema(e.to_string()))?;
        known_keys(&raw, &serde_json::to_value(&cfg)?, "")?;
        Ok(cfg)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

fn known_keys(raw: &serde_json::Value, parsed: &serde_json::Value, path: &str) -> Result<()> {
    use serde_json::Value;
    match (raw, parsed) {
        (Value::Object(r), Value::Object(p)) => {
            for (k, v) in r {
                let Some(pv) = p.get(k) else {
                    return Err(Error::Schema(format!("unknown field '{path}/{k}'")));
                };
                known_keys(v, pv, &format!("{path}/{k}"))?;
            }
            Ok(())
        }
        (Value::Array(r), Value::Array(p)) if r.len() == p.len() => r
            .iter()
            .zip(p)
            .enumerate()
            .try_for_each(|(i, (a, b))| known_keys(a, b, &format!("{path}/{i}"))),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
pub enum Command {
    /// Critical points of K with Morse indices, Laplacians and the Euler check.
    MorseReport(MorseArgs),
    /// Pinching conditions (P_m), (P~_m) and the energy strata.
    PinchReport(PinchArgs),
    /// Leray-Schauder degree counts for q = 1..l.
    Degree(DegreeArgs),
    /// Min-max existence criterion on a superlevel region of K.
    Minmax(MinmaxArgs),
    /// Builds the curvature sequence K_0..K_m and exports each member.
    KmBuild(KmArgs),
    /// Verifies critical structure, Laplacian bound and C^3 decay of K_0..K_m.
    KmVerify(KmVerifyArgs),
    /// Integrates a Fowler orbit and checks energy drift and flux.
    Fowler(FowlerArgs),
    /// Yamabe constant, bubble equation and Kelvin inversion checks.
    BubbleCheck(BubbleArgs),
    /// Pohozaev and Kazdan-Warner identities on exact bubbles.
    Identities(IdentitiesArgs),
    /// Solves the subcritical problem for axisymmetric K at one tau.
    Solve(SolveArgs),
    /// Warm-started continuation in decreasing tau.
    Continuation(ContinuationArgs),
    /// Runs a list of keyed jobs in parallel and merges their reports.
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::MorseReport(_) => "morse-report",
            Command::PinchReport(_) => "pinch-report",
            Command::Degree(_) => "degree",
            Command::Minmax(_) => "minmax",
            Command::KmBuild(_) => "km-build",
            Command::KmVerify(_) => "km-verify",
            Command::Fowler(_) => "fowler",
            Command::BubbleCheck(_) => "bubble-check",
            Command::Identities(_) => "identities",
            Command::Solve(_) => "solve",
            Command::Continuation(_) => "continuation",
            Command::Sweep(_) => "sweep",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "curvlab",
    version,
    about = "Prescribed scalar curvature on S^n: experiments and checks"
)]
pub struct Cli {
    /// Output directory; defaults to $CURVLAB_OUT/<command> or ./curvlab-out/<command>.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: TopCommand,
}

#[derive(Debug, Subcommand)]
pub enum TopCommand {
    #[command(flatten)]
    Run(Command),
    /// Re-executes a stored run_config.json and diffs against the stored artifacts.
    Replay(ReplayArgs),
}

/// Output directory for `command`.
pub fn resolve_out(explicit: Option<&Path>, command: &str) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => match std::env::var_os(OUT_ENV) {
            Some(root) => PathBuf::from(root).join(command),
            None => PathBuf::from("curvlab-out").join(command),
        },
    }
}

#[derive(Parser)]
struct Defaults<T: Args> {
    #[command(flatten)]
    inner: T,
}

macro_rules! clap_defaults {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                Defaults::<$t>::try_parse_from(["curvlab"]).expect("defaults parse").inner
            }
        }
    )*};
}

clap_defaults!(
    SearchArgs,
    MorseArgs,
    PinchArgs,
    DegreeArgs,
    MinmaxArgs,
    KmArgs,
    KmVerifyArgs,
    FowlerArgs,
    BubbleArgs,
    IdentitiesArgs,
    SolveArgs,
    ContinuationArgs
);

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchArgs {
    /// Random multi-start seeds in addition to +-e_i.
    #[arg(long, default_value_t = 400)]
    pub seeds: usize,
    /// Degeneracy threshold of the critical-point search.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 24301)]
    pub rng_seed: u64,
    /// Extra seeding rounds while the Euler check fails.
    #[arg(long, default_value_t = 3)]
    pub max_rounds: usize,
}

impl SearchArgs {
    pub fn options(&self) -> SearchOptions {
        SearchOptions {
            seeds: self.seeds,
            tol: self.tol,
            rng_seed: self.rng_seed,
            max_rounds: self.max_rounds,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct MorseArgs {
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Curvature family, e.g. height(1,0.5) or km(2,2,1,0,0,0,1).
    #[arg(long, default_value = "pinched-multi-peak(0.05,0.1)")]
    pub k: KSpec,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct PinchArgs {
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value = "pinched-multi-peak(0.05,0.1)")]
    pub k: KSpec,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct DegreeArgs {
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Morse indices of the critical points with negative Laplacian.
    #[arg(long, value_delimiter = ',')]
    pub indices: Vec<usize>,
    /// Take the critical points from a curvature family instead of --indices;
    /// without either, pinched-multi-peak(0.05,0.1) is used.
    #[arg(long)]
    pub k: Option<KSpec>,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct MinmaxArgs {
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value = "pinched-multi-peak(0.05,0.1)")]
    pub k: KSpec,
    /// Level c of the region {K >= c}; defaults to just below the highest index-(n-1) saddle.
    #[arg(long, allow_negative_numbers = true)]
    pub level: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// eps_m = eps_b t_m^(-exponent).
    Power,
    /// eps_m = eps_b for every m.
    Constant,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct KmArgs {
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Target counts M_0..M_n; defaults to one minimum and one maximum.
    #[arg(long, value_delimiter = ',')]
    pub counts: Vec<usize>,
    #[arg(long, default_value_t = 8)]
    pub m_max: usize,
    #[arg(long, default_value_t = 0.004)]
    pub eps0: f64,
    #[arg(long, value_enum, default_value_t = ScheduleKind::Power)]
    pub schedule: ScheduleKind,
    #[arg(long, default_value_t = 4.0)]
    pub exponent: f64,
    /// Largest admissible K_max/K_min.
    #[arg(long, default_value_t = 1.01)]
    pub max_pinch: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct KmVerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub km: KmArgs,
    /// Location tolerance for matching numerical and analytic critical points.
    #[arg(long, default_value_t = 1e-7)]
    pub location_tol: f64,
    #[arg(long, default_value_t = 20000)]
    pub laplacian_samples: usize,
    #[arg(long, default_value_t = 3000)]
    pub c3_samples: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct FowlerArgs {
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, default_value_t = 4.0)]
    pub kappa: f64,
    /// Energy level, between H_0 and 0.
    #[arg(long = "H", default_value_t = -0.5, allow_negative_numbers = true)]
    #[serde(rename = "H")]
    pub h: f64,
    /// Time window; defaults to three periods and at least two decades in r.
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Admissible Hamiltonian drift.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Admissible flux residual.
    #[arg(long, default_value_t = 1e-6)]
    pub flux_tol: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct BubbleArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [3usize, 4, 5, 6, 7, 8, 9, 10])]
    pub dims: Vec<usize>,
    /// Random parameter sets for the Kelvin checks.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub rng_seed: u64,
    /// Bound on the pointwise residual of the bubble equation.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct IdentitiesArgs {
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 10.0)]
    pub lambda: f64,
    /// Offset of the translated bubble along x_n.
    #[arg(long, default_value_t = 0.3)]
    pub offset: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5f64, 1.0, 2.0])]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub pohozaev_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub kw_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    Constant,
    /// Bubble centred at the north pole.
    Bubble,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveArgs {
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Axisymmetric family: height(..) or axisym-poly(..).
    #[arg(long, default_value = "height(1,0.5)")]
    pub k: KSpec,
    #[arg(long, default_value_t = 2048)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0.02)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = InitialState::Constant)]
    pub init: InitialState,
    /// Concentration of the initial bubble.
    #[arg(long, default_value_t = 2.0)]
    pub init_lambda: f64,
    /// Flow stops at this Riesz-gradient norm before Newton takes over.
    #[arg(long, default_value_t = 1e-4)]
    pub flow_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub newton_tol: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuationArgs {
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value = "height(1,0.5)")]
    pub k: KSpec,
    #[arg(long, default_value_t = 2048)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0.08)]
    pub tau_start: f64,
    #[arg(long, default_value_t = 0.005)]
    pub tau_end: f64,
    #[arg(long, default_value_t = 9)]
    pub steps: usize,
    /// Admissible deviation of the fitted exponent from -1/2.
    #[arg(long, default_value_t = 0.05)]
    pub slope_tol: f64,
    /// Admissible relative gap between extrapolated and limit energy.
    #[arg(long, default_value_t = 0.03)]
    pub energy_tol: f64,
}

/// One keyed job of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Job {
    pub key: String,
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    /// JSON file with {"jobs": [{"key", "command", "params"}, ...]}.
    #[arg(long)]
    #[serde(skip)]
    pub jobs_file: Option<PathBuf>,
    #[arg(skip)]
    pub jobs: Vec<Job>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct JobsFile {
    pub jobs: Vec<Job>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// A run_config.json written by an earlier run; its directory holds the stored artifacts.
    pub config: PathBuf,
}
