use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use psd_blocks::pattern::DEFAULT_PROBE_N;
use psd_blocks::verifier::{VerifyConfig, DEFAULT_SEED};

/// Entrywise positivity preservers with forbidden principal blocks.
///
/// JSON arguments (`--rule`, `--g`, `--f`, `--domain`, `--matrix`) take a file
/// path, or inline JSON when the value starts with `{`.
#[derive(Debug, Parser)]
#[command(name = "psd-blocks", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Print the JSON result to stdout instead of the summary.
    #[arg(long, global = true)]
    pub json: bool,

    /// Also write the JSON result to this file.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a pattern rule and print its admissible family.
    Classify {
        #[arg(long, value_name = "FILE")]
        rule: String,
        #[arg(long, default_value_t = DEFAULT_PROBE_N)]
        probe_n: usize,
    },
    /// Search for a PSD input whose image is not PSD (exit 3 if one is found).
    Verify {
        #[arg(long, value_name = "FILE")]
        rule: String,
        /// Function applied on the blocks; the identity when omitted.
        #[arg(long, value_name = "FILE")]
        g: Option<String>,
        #[arg(long, value_name = "FILE")]
        f: String,
        #[command(flatten)]
        common: Common,
    },
    /// Refute `f = c·id` on a partition rule with `c` outside its interval.
    Refute {
        #[arg(long, value_name = "FILE")]
        rule: String,
        /// Scalar, as a decimal or a fraction such as `-11/20`.
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance suite (exit 1 if any criterion fails).
    Suite {
        #[command(flatten)]
        common: Common,
    },
    /// Build a witness matrix and report whether it is PSD.
    Witness(WitnessArgs),
}

/// Domain and budget flags shared by `verify`, `refute` and `suite`.
#[derive(Debug, Args)]
pub struct Common {
    /// Entry domain; the whole complex plane when omitted.
    #[arg(long, value_name = "FILE")]
    pub domain: Option<String>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub max_n: usize,
    /// Random samples per dimension.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_PROBE_N)]
    pub probe_n: usize,
    /// Draw only rank-one random samples.
    #[arg(long)]
    pub rank_one_only: bool,
}

impl Common {
    pub fn config(&self) -> VerifyConfig {
        VerifyConfig {
            max_n: self.max_n,
            samples_per_n: self.samples,
            seed: self.seed,
            tol: self.tol,
            probe_n: self.probe_n,
            rank_one_only: self.rank_one_only,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WitnessKind {
    /// `x·𝟏_n`.
    Allones,
    /// `x·Id_n`.
    ScaledIdentity,
    /// `vv*`.
    RankOne,
    /// `A_w(z)`.
    Aw,
    /// `B_r(z)`.
    Br,
    /// Gram of `(w/√t, |w|/√t, √t)`.
    Mat1,
    /// `𝟏_m ⊗ A` for the matrix given by `--matrix`.
    Blowup,
    /// Albert embedding of `--matrix`; `--eps` or automatic.
    Albert,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    pub name: WitnessKind,
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Complex number such as `0.3+0.4i`.
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    /// Comma-separated complex entries of `v` for `rank-one`.
    #[arg(long, allow_hyphen_values = true)]
    pub vector: Option<String>,
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<String>,
    #[arg(long, value_name = "FILE")]
    pub domain: Option<String>,
}
