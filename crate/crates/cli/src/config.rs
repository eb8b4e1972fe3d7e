use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use layered_spdc::analysis::{HistogramSpec, TrackingOptions, WavepacketOptions};
use layered_spdc::structure::{Arrangement, JitterConvention};
use layered_spdc::synthesis::{AngleSet, GridOptions, PhasePolicy, SuperpositionSpec};
use layered_spdc::tmm::RefinementPolicy;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::UsageError;

/// Everything a run depends on. Re-running the same config with the same
/// code version reproduces every output byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub master_seed: u64,
    /// Thread count. Does not affect outputs, so it is left out of
    /// provenance records.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub task: Task,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Gen(GenTask),
    Spectrum(SpectrumTask),
    Peaks(PeaksTask),
    Jsa(JsaTask),
    Schmidt(SchmidtTask),
    Ensemble(EnsembleTask),
    Superpose(SuperposeTask),
    Report(ReportTask),
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Gen(_) => "gen",
            Task::Spectrum(_) => "spectrum",
            Task::Peaks(_) => "peaks",
            Task::Jsa(_) => "jsa",
            Task::Schmidt(_) => "schmidt",
            Task::Ensemble(_) => "ensemble",
            Task::Superpose(_) => "superpose",
            Task::Report(_) => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenTask {
    pub n_layers: usize,
    pub lambda0_nm: f64,
    /// Defaults to a quarter of `lambda0_nm`.
    pub mean_optical_thickness_nm: Option<f64>,
    /// Defaults to a fortieth of `lambda0_nm`.
    pub jitter_sigma_optical_nm: Option<f64>,
    pub jitter_convention: JitterConvention,
    pub arrangement: Arrangement,
    pub output: PathBuf,
}

impl Default for GenTask {
    fn default() -> Self {
        GenTask {
            n_layers: 300,
            lambda0_nm: 1550.0,
            mean_optical_thickness_nm: None,
            jitter_sigma_optical_nm: None,
            jitter_convention: JitterConvention::default(),
            arrangement: Arrangement::default(),
            output: "structure.json".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumTask {
    pub structure: PathBuf,
    pub theta_deg: f64,
    pub window_nm: (f64, f64),
    pub policy: RefinementPolicy,
    pub output: PathBuf,
}

impl Default for SpectrumTask {
    fn default() -> Self {
        SpectrumTask {
            structure: "structure.json".into(),
            theta_deg: 10.0,
            window_nm: (1500.0, 1600.0),
            policy: RefinementPolicy::default(),
            output: "spectrum.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeaksTask {
    pub structure: PathBuf,
    pub theta_deg: f64,
    pub window_nm: (f64, f64),
    pub min_height: f64,
    pub policy: RefinementPolicy,
    pub output: PathBuf,
}

impl Default for PeaksTask {
    fn default() -> Self {
        PeaksTask {
            structure: "structure.json".into(),
            theta_deg: 10.0,
            window_nm: (1500.0, 1600.0),
            min_height: 0.1,
            policy: RefinementPolicy::default(),
            output: "peaks.csv".into(),
        }
    }
}

/// Which transmission peak an amplitude is built around.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeakSelection {
    pub theta_deg: f64,
    pub window_nm: (f64, f64),
    pub min_height: f64,
    pub min_fwhm_nm: f64,
    pub max_fwhm_nm: f64,
    /// The qualifying peak closest to this wavelength is used.
    pub target_nm: f64,
    pub policy: RefinementPolicy,
}

impl Default for PeakSelection {
    fn default() -> Self {
        PeakSelection {
            theta_deg: 10.0,
            window_nm: (1500.0, 1600.0),
            min_height: 0.5,
            min_fwhm_nm: 0.005,
            max_fwhm_nm: 1.0,
            target_nm: 1550.0,
            policy: RefinementPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PumpSettings {
    pub duration_fwhm_fs: f64,
    /// Defaults to half the selected peak wavelength (degenerate emission).
    pub central_wavelength_nm: Option<f64>,
}

impl Default for PumpSettings {
    fn default() -> Self {
        PumpSettings {
            duration_fwhm_fs: 250.0,
            central_wavelength_nm: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JsaTask {
    pub structure: PathBuf,
    pub peak: PeakSelection,
    pub pump: PumpSettings,
    pub grid: GridOptions,
    pub normalize: bool,
    /// Binary container; the header goes next to it with a `.json` extension.
    pub output: PathBuf,
    pub csv: Option<PathBuf>,
}

impl Default for JsaTask {
    fn default() -> Self {
        JsaTask {
            structure: "structure.json".into(),
            peak: PeakSelection::default(),
            pump: PumpSettings::default(),
            grid: GridOptions::default(),
            normalize: true,
            output: "jsa.bin".into(),
            csv: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchmidtTask {
    pub amplitude: PathBuf,
    pub output: PathBuf,
}

impl Default for SchmidtTask {
    fn default() -> Self {
        SchmidtTask {
            amplitude: "jsa.bin".into(),
            output: "schmidt.json".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleTask {
    pub n_realizations: usize,
    pub n_layers: usize,
    pub lambda0_nm: f64,
    pub theta_deg: f64,
    pub window_nm: (f64, f64),
    pub min_height: f64,
    pub policy: RefinementPolicy,
    pub histogram: HistogramSpec,
    pub output: PathBuf,
    /// Optional per-peak listing.
    pub peaks_output: Option<PathBuf>,
}

impl Default for EnsembleTask {
    fn default() -> Self {
        EnsembleTask {
            n_realizations: 200,
            n_layers: 300,
            lambda0_nm: 1550.0,
            theta_deg: 10.0,
            window_nm: (1500.0, 1600.0),
            min_height: 0.1,
            policy: RefinementPolicy::default(),
            histogram: HistogramSpec::default(),
            output: "ensemble.csv".into(),
            peaks_output: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuperposeTask {
    pub structure: PathBuf,
    pub peak: PeakSelection,
    pub pump: PumpSettings,
    pub superposition: SuperpositionSpec,
    pub grid: GridOptions,
    pub tracking: TrackingOptions,
    /// Binary container; the manifest is written as `<stem>.manifest.json`.
    pub output: PathBuf,
}

impl Default for SuperposeTask {
    fn default() -> Self {
        SuperposeTask {
            structure: "structure.json".into(),
            peak: PeakSelection::default(),
            pump: PumpSettings::default(),
            superposition: SuperpositionSpec {
                angles: AngleSet::equidistant_pinholes(8.0, 12.0, 8),
                weights: None,
                compensation: PhasePolicy::PeakAlign,
            },
            grid: GridOptions::default(),
            tracking: TrackingOptions::default(),
            output: "superposition.bin".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportTask {
    pub amplitude: PathBuf,
    pub wavepacket: WavepacketOptions,
    /// Also write the report here.
    pub output: Option<PathBuf>,
}

impl Default for ReportTask {
    fn default() -> Self {
        ReportTask {
            amplitude: "jsa.bin".into(),
            wavepacket: WavepacketOptions::default(),
            output: None,
        }
    }
}

/// Record written next to every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub code_version: String,
    pub config_sha256: String,
    pub config: RunConfig,
}

impl Provenance {
    pub fn new(config: &RunConfig) -> anyhow::Result<Self> {
        let config = RunConfig {
            workers: None,
            ..config.clone()
        };
        let text = serde_json::to_string(&config)?;
        let digest = Sha256::digest(text.as_bytes());
        Ok(Provenance {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            config,
        })
    }
}

/// Sidecar path of the provenance record for `artifact`.
pub fn provenance_path(artifact: &Path) -> PathBuf {
    artifact.with_extension("provenance.json")
}

/// Reads a run config, or the config embedded in a provenance record.
pub fn load_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))
        .map_err(UsageError)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))
        .map_err(UsageError)?;
    let parsed = if value.get("config_sha256").is_some() {
        serde_json::from_value::<Provenance>(value).map(|p| p.config)
    } else {
        serde_json::from_value::<RunConfig>(value)
    };
    let config = parsed
        .with_context(|| format!("invalid config {}", path.display()))
        .map_err(UsageError)?;
    if config.workers == Some(0) {
        bail!(UsageError(anyhow::anyhow!("workers must be at least 1")));
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"master_seed": 1, "task": {"gen": {"n_layers": 3, "colour": 1}}}"#;
        assert!(serde_json::from_str::<RunConfig>(text).is_err());
        let text = r#"{"master_seed": 1, "extra": 0, "task": {"gen": {}}}"#;
        assert!(serde_json::from_str::<RunConfig>(text).is_err());
    }

    #[test]
    fn partial_task_blocks_take_defaults() {
        let text = r#"{"task": {"gen": {"n_layers": 12}}}"#;
        let c: RunConfig = serde_json::from_str(text).unwrap();
        let Task::Gen(g) = c.task else { panic!() };
        assert_eq!(g.n_layers, 12);
        assert_eq!(g.lambda0_nm, 1550.0);
    }

    #[test]
    fn provenance_ignores_workers() {
        let mut c = RunConfig {
            master_seed: 5,
            workers: Some(1),
            task: Task::Gen(GenTask::default()),
        };
        let a = Provenance::new(&c).unwrap();
        c.workers = Some(8);
        let b = Provenance::new(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.config_sha256.len(), 64);
    }

    #[test]
    fn provenance_sidecar_name() {
        assert_eq!(provenance_path(Path::new("out/s.json")), Path::new("out/s.provenance.json"));
        assert_eq!(provenance_path(Path::new("t.csv")), Path::new("t.provenance.json"));
    }
}
