use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twistkit::ModeKind;

#[derive(Debug, Parser)]
#[command(name = "twistkit", version, about = "Nonparaxial Bessel modes and atom-photon matrix elements")]
pub struct Cli {
    /// Increase log verbosity on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate A, E and B of a Bessel mode at one point.
    Field(FieldArgs),
    /// Tabulate the allowed transition channels.
    Channels(ChannelsArgs),
    /// Emission amplitudes for a hydrogenic transition in a Bessel mode.
    Amplitude(AmplitudeArgs),
    /// Evaluate a quantity over a parameter grid described by a JSON file.
    Scan(ScanArgs),
    /// Run the invariant batteries and the candidate discrepancy report.
    Verify(VerifyArgs),
}

pub fn parse_kind(s: &str) -> Result<ModeKind, String> {
    s.parse::<ModeKind>().map_err(|e| e.to_string())
}

pub fn parse_point(s: &str) -> Result<[f64; 4], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(format!("expected RHO,PHI,Z[,T], got {s:?}"));
    }
    let mut out = [0.0; 4];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"))?;
    }
    Ok(out)
}

/// Hydrogenic state as `N,L,M`.
pub fn parse_hydrogen(s: &str) -> Result<(u32, u32, i32), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected N,L,M, got {s:?}"));
    }
    let n = parts[0].parse::<u32>().map_err(|e| format!("N: {e}"))?;
    let l = parts[1].parse::<u32>().map_err(|e| format!("L: {e}"))?;
    let m = parts[2].parse::<i32>().map_err(|e| format!("M: {e}"))?;
    Ok((n, l, m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InteractionKind {
    Dipole,
    Spin,
    General,
    CenterOfMass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CmKind {
    Trapped,
    Free,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: ModeKind,
    #[arg(long, allow_negative_numbers = true)]
    pub m: i32,
    #[arg(long)]
    pub kperp: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub kz: f64,
    /// Cylindrical point RHO,PHI,Z with optional time T.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub at: [f64; 4],
}

#[derive(Debug, Args)]
pub struct ChannelsArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub m: i32,
    #[arg(long, value_parser = parse_kind)]
    pub kind: ModeKind,
    #[arg(long, value_enum)]
    pub interaction: InteractionKind,
    /// Highest order of the displaced-field expansion (dipole and spin).
    #[arg(long, default_value_t = 0)]
    pub max_multipole: u32,
    /// Term indices for the general and centre-of-mass interactions.
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub v: u32,
    #[arg(long, default_value_t = 0)]
    pub s: u32,
    #[arg(long, value_enum, default_value_t = TableFormat::Table)]
    pub format: TableFormat,
}

#[derive(Debug, Args)]
pub struct AmplitudeArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: ModeKind,
    #[arg(long, allow_negative_numbers = true)]
    pub m: i32,
    #[arg(long)]
    pub kperp: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub kz: f64,
    #[arg(long, value_enum, default_value_t = InteractionKind::Dipole)]
    pub interaction: InteractionKind,
    /// Initial hydrogenic state N,L,M.
    #[arg(long, value_parser = parse_hydrogen, default_value = "2,1,1", allow_hyphen_values = true)]
    pub initial: (u32, u32, i32),
    /// Final hydrogenic state N,L,M.
    #[arg(long = "final", value_parser = parse_hydrogen, default_value = "1,0,0", allow_hyphen_values = true)]
    pub final_state: (u32, u32, i32),
    #[arg(long, value_enum, default_value_t = CmKind::Trapped)]
    pub cm: CmKind,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0)]
    pub mcm_in: i32,
    /// Final centre-of-mass order; every order reachable by a channel when omitted.
    #[arg(long, allow_negative_numbers = true)]
    pub mcm_out: Option<i32>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub nbar_in: u32,
    #[arg(long, default_value_t = 0)]
    pub nbar_out: u32,
    #[arg(long, default_value_t = 1.0)]
    pub kperp_cm_in: f64,
    #[arg(long)]
    pub kperp_cm_out: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub kz_cm_in: f64,
    /// Defaults to the value fixed by axial momentum conservation.
    #[arg(long, allow_negative_numbers = true)]
    pub kz_cm_out: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = -1.0)]
    pub charge: f64,
    /// `E_initial - E_final`; defaults to the hydrogenic level spacing.
    #[arg(long, allow_negative_numbers = true)]
    pub energy_gap: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.5)]
    pub spin_in: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.5)]
    pub spin_out: f64,
    #[arg(long, default_value_t = 2.0)]
    pub g: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// JSON scan configuration.
    pub config: PathBuf,
    /// Overrides the output path of the configuration ("-" for stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long, env = "TWISTKIT_JOBS")]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Draw this many random points inside the grid box instead of the grid.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run only invariants whose group or name contains this string.
    #[arg(long)]
    pub only: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "TWISTKIT_JOBS")]
    pub jobs: Option<usize>,
}
