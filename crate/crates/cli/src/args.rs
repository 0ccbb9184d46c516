use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "spinladder",
    version,
    about = "Seeded batch experiments for adaptive bit-by-bit field estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check error-free readout of every dyadic eigenvalue.
    Ideal,
    /// Monte Carlo accuracy for one error rate and strategy.
    Simulate,
    /// Accuracy curves for several error rates.
    SweepError,
    /// Accuracy curves for every error-correction strategy.
    EcCompare,
    /// Decorrelation-limited variance and rotation fidelity.
    Decorrelate,
    /// Time and measurement budgets against the Ramsey baseline.
    CompareRamsey,
    /// Quantum-dot parameters and the optimal digit count.
    QdParams,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Ideal => "ideal",
            Command::Simulate => "simulate",
            Command::SweepError => "sweep-error",
            Command::EcCompare => "ec-compare",
            Command::Decorrelate => "decorrelate",
            Command::CompareRamsey => "compare-ramsey",
            Command::QdParams => "qd-params",
        }
    }
}

/// Every option is also accepted as `key = value` in the `--config` file,
/// using the long flag name as the key. Flags take precedence.
#[derive(Debug, Default, Args)]
pub struct Options {
    /// Flat `key = value` file with default options.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Digit count, range `A..B` or list `A,B,C`.
    #[arg(long, global = true)]
    pub digits: Option<String>,
    /// Readout error probability (comma-separated list for sweep-error).
    #[arg(long = "error-p", global = true)]
    pub error_p: Option<String>,
    /// Error correction: none, s1, s1-half or s2.
    #[arg(long, global = true)]
    pub ec: Option<String>,
    #[arg(long, global = true)]
    pub runs: Option<String>,
    /// Independent batches per Monte Carlo point (at least 2).
    #[arg(long, global = true)]
    pub batches: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Quantum-dot preset: GaAs-large or GaAs-small.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Measurement time per readout (s).
    #[arg(long = "tau-m", global = true)]
    pub tau_m: Option<String>,
    /// Dephasing time 1/delta0 (s); overrides the preset.
    #[arg(long = "delta0-inv", global = true)]
    pub delta0_inv: Option<String>,
    /// Bath correlation time (s); overrides the preset.
    #[arg(long, global = true)]
    pub tc: Option<String>,
    /// Safety factor f in a_max = f delta0.
    #[arg(long = "safety-factor", global = true)]
    pub safety_factor: Option<String>,
    /// Prior grid size.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<String>,
    /// csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub workers: Option<String>,
    /// Treat a regime violation as an error.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Record window T_M (s); defaults to the protocol time.
    #[arg(long, global = true)]
    pub window: Option<String>,
    /// Estimation error over delta0 entering the record.
    #[arg(long = "est-ratio", global = true)]
    pub est_ratio: Option<String>,
    /// Lags after the record, in units of the window.
    #[arg(long, global = true)]
    pub lags: Option<String>,
    /// Rotation angles (rad).
    #[arg(long, global = true)]
    pub angles: Option<String>,
    /// Lag of the rotation after the record, in units of the window.
    #[arg(long = "fidelity-lag", global = true)]
    pub fidelity_lag: Option<String>,
    /// Time step of simulated trajectories, in units of the window.
    #[arg(long = "trajectory-step", global = true)]
    pub trajectory_step: Option<String>,

    /// Hyperfine coupling A (ns^-1).
    #[arg(long, global = true)]
    pub hyperfine: Option<String>,
    #[arg(long, global = true)]
    pub nuclei: Option<String>,
    #[arg(long, global = true)]
    pub polarization: Option<String>,
    /// Electron Larmor frequency (ns^-1).
    #[arg(long = "epsilon-z", global = true)]
    pub epsilon_z: Option<String>,
    /// Largest digit count searched for the optimum.
    #[arg(long = "max-digits", global = true)]
    pub max_digits: Option<String>,
}

impl Options {
    /// `(key, value)` for every option given on the command line.
    pub fn flags(&self) -> Vec<(&'static str, String)> {
        let pairs: [(&'static str, &Option<String>); 26] = [
            ("digits", &self.digits),
            ("error-p", &self.error_p),
            ("ec", &self.ec),
            ("runs", &self.runs),
            ("batches", &self.batches),
            ("seed", &self.seed),
            ("preset", &self.preset),
            ("tau-m", &self.tau_m),
            ("delta0-inv", &self.delta0_inv),
            ("tc", &self.tc),
            ("safety-factor", &self.safety_factor),
            ("grid", &self.grid),
            ("out", &self.out),
            ("format", &self.format),
            ("workers", &self.workers),
            ("window", &self.window),
            ("est-ratio", &self.est_ratio),
            ("lags", &self.lags),
            ("angles", &self.angles),
            ("fidelity-lag", &self.fidelity_lag),
            ("trajectory-step", &self.trajectory_step),
            ("hyperfine", &self.hyperfine),
            ("nuclei", &self.nuclei),
            ("polarization", &self.polarization),
            ("epsilon-z", &self.epsilon_z),
            ("max-digits", &self.max_digits),
        ];
        let mut out: Vec<(&'static str, String)> = pairs
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect();
        if self.strict {
            out.push(("strict", "true".into()));
        }
        out
    }
}

pub const KNOWN_KEYS: [&str; 27] = [
    "digits",
    "error-p",
    "ec",
    "runs",
    "batches",
    "seed",
    "preset",
    "tau-m",
    "delta0-inv",
    "tc",
    "safety-factor",
    "grid",
    "out",
    "format",
    "workers",
    "strict",
    "window",
    "est-ratio",
    "lags",
    "angles",
    "fidelity-lag",
    "trajectory-step",
    "hyperfine",
    "nuclei",
    "polarization",
    "epsilon-z",
    "max-digits",
];
