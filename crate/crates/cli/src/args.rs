use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "lspdc",
    version,
    about = "Photon-pair spectra of random nonlinear layered structures",
    after_help = "Without a subcommand, runs the task stored in --config (a run config or a provenance record)."
)]
pub struct Cli {
    /// JSON run config or provenance record; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed for structure generation and ensembles.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random layered structure.
    Gen(GenArgs),
    /// Adaptively sampled transmission spectrum as CSV.
    Spectrum(SpectrumArgs),
    /// Transmission peaks with centres and widths as CSV.
    Peaks(PeaksArgs),
    /// Two-photon spectral amplitude around a transmission peak.
    Jsa(JsaArgs),
    /// Schmidt decomposition of a stored amplitude as JSON.
    Schmidt(SchmidtArgs),
    /// Histogram of peak widths over a disorder ensemble.
    Ensemble(EnsembleArgs),
    /// Coherent sum of amplitudes emitted into several angles.
    Superpose(SuperposeArgs),
    /// Human-readable summary of a stored amplitude.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ArrangementArg {
    Random,
    Alternating,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub lambda0_nm: Option<f64>,
    /// Mean optical thickness per layer.
    #[arg(long)]
    pub mean_thickness_nm: Option<f64>,
    /// Standard deviation of the optical boundary shift.
    #[arg(long)]
    pub jitter_nm: Option<f64>,
    #[arg(long, value_enum)]
    pub arrangement: Option<ArrangementArg>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub structure: Option<PathBuf>,
    #[arg(long)]
    pub theta_deg: Option<f64>,
    /// Wavelength window as LO:HI.
    #[arg(long, value_parser = parse_window)]
    pub window_nm: Option<(f64, f64)>,
    /// Points of the initial uniform grid.
    #[arg(long)]
    pub base_points: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PeaksArgs {
    #[arg(long)]
    pub structure: Option<PathBuf>,
    #[arg(long)]
    pub theta_deg: Option<f64>,
    #[arg(long, value_parser = parse_window)]
    pub window_nm: Option<(f64, f64)>,
    /// Smallest peak transmittance reported.
    #[arg(long)]
    pub min_height: Option<f64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PeakArgs {
    #[arg(long)]
    pub theta_deg: Option<f64>,
    #[arg(long, value_parser = parse_window)]
    pub window_nm: Option<(f64, f64)>,
    /// The qualifying peak closest to this wavelength is used.
    #[arg(long)]
    pub target_nm: Option<f64>,
    #[arg(long)]
    pub min_fwhm_nm: Option<f64>,
    #[arg(long)]
    pub max_fwhm_nm: Option<f64>,
    #[arg(long)]
    pub min_height: Option<f64>,
    #[arg(long)]
    pub pump_duration_fs: Option<f64>,
    /// Pump centre wavelength (default: half the peak wavelength).
    #[arg(long)]
    pub pump_nm: Option<f64>,
    /// Grid half-width in units of the peak FWHM.
    #[arg(long)]
    pub half_width_fwhm: Option<f64>,
    #[arg(long)]
    pub points_per_fwhm: Option<f64>,
}

#[derive(Debug, Args)]
pub struct JsaArgs {
    #[arg(long)]
    pub structure: Option<PathBuf>,
    #[command(flatten)]
    pub peak: PeakArgs,
    /// Keep the raw scale instead of normalizing.
    #[arg(long)]
    pub raw: bool,
    /// Also write |φ|² and arg φ as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SchmidtArgs {
    #[arg(long)]
    pub amplitude: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub lambda0_nm: Option<f64>,
    #[arg(long)]
    pub theta_deg: Option<f64>,
    #[arg(long, value_parser = parse_window)]
    pub window_nm: Option<(f64, f64)>,
    #[arg(long)]
    pub min_height: Option<f64>,
    /// Also list every detected peak.
    #[arg(long)]
    pub peaks_output: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SuperposeArgs {
    #[arg(long)]
    pub structure: Option<PathBuf>,
    #[command(flatten)]
    pub peak: PeakArgs,
    /// Explicit pinhole angles, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "range_deg")]
    pub pinholes_deg: Option<Vec<f64>>,
    /// Continuous angle range as LO:HI.
    #[arg(long, value_parser = parse_window)]
    pub range_deg: Option<(f64, f64)>,
    /// Angles sampled across --range-deg.
    #[arg(long, requires = "range_deg")]
    pub samples: Option<usize>,
    /// Sum without phase alignment.
    #[arg(long)]
    pub no_compensation: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub amplitude: Option<PathBuf>,
    /// Also write the report to a file.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{lo}: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{hi}: {e}"))?;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err("bounds must be finite".into());
    }
    Ok((lo, hi))
}
