use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use layered_spdc::analysis::*;
use layered_spdc::spdc::*;
use layered_spdc::structure::{generate_structure, LayeredStructure, StructureParams};
use layered_spdc::synthesis::{superpose_pinholes, superpose_range, AngleSet};
use layered_spdc::tmm::transmission_spectrum;
use layered_spdc::units::{omega_from_wavelength_nm, wavelength_nm_from_omega};

use crate::config::*;
use crate::UsageError;

/// Executes one run, resolving relative output paths against `out_dir`.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<()> {
    let r = Runner { config, out_dir };
    match &config.task {
        Task::Gen(t) => r.gen(t),
        Task::Spectrum(t) => r.spectrum(t),
        Task::Peaks(t) => r.peaks(t),
        Task::Jsa(t) => r.jsa(t),
        Task::Schmidt(t) => r.schmidt(t),
        Task::Ensemble(t) => r.ensemble(t),
        Task::Superpose(t) => r.superpose(t),
        Task::Report(t) => r.report(t),
    }
}

struct Runner<'a> {
    config: &'a RunConfig,
    out_dir: &'a Path,
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(anyhow!(msg.into())))
}

fn check_window(name: &str, (lo, hi): (f64, f64)) -> Result<(f64, f64)> {
    if !(lo > 0.0 && hi > lo) {
        return Err(usage(format!("{name}: need 0 < LO < HI, got {lo}:{hi}")));
    }
    Ok((omega_from_wavelength_nm(hi), omega_from_wavelength_nm(lo)))
}

fn load_structure(path: &Path) -> Result<LayeredStructure> {
    LayeredStructure::load(path).with_context(|| format!("loading structure {}", path.display()))
}

fn load_amplitude(path: &Path) -> Result<TwoPhotonAmplitude> {
    TwoPhotonAmplitude::load(path).with_context(|| format!("loading amplitude {}", path.display()))
}

impl Runner<'_> {
    fn output(&self, p: &Path) -> Result<PathBuf> {
        let path = if p.is_absolute() { p.to_path_buf() } else { self.out_dir.join(p) };
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(path)
    }

    fn create(&self, p: &Path) -> Result<(PathBuf, BufWriter<File>)> {
        let path = self.output(p)?;
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok((path, BufWriter::new(f)))
    }

    fn provenance(&self, artifact: &Path) -> Result<()> {
        let record = Provenance::new(self.config)?;
        let path = provenance_path(artifact);
        fs::write(&path, serde_json::to_string_pretty(&record)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    fn gen(&self, t: &GenTask) -> Result<()> {
        let mut p = StructureParams::designed_at(t.lambda0_nm, t.n_layers, self.config.master_seed);
        if let Some(d) = t.mean_optical_thickness_nm {
            p.mean_optical_thickness_nm = d;
        }
        if let Some(j) = t.jitter_sigma_optical_nm {
            p.jitter_sigma_optical_nm = j;
        }
        p.jitter_convention = t.jitter_convention;
        p.arrangement = t.arrangement;
        let s = generate_structure(&p)?;
        let path = self.output(&t.output)?;
        s.save(&path)?;
        self.provenance(&path)?;
        log::info!("{} layers, {:.1} nm, written to {}", s.len(), s.total_length_nm(), path.display());
        Ok(())
    }

    fn spectrum(&self, t: &SpectrumTask) -> Result<()> {
        let (lo, hi) = check_window("window_nm", t.window_nm)?;
        let s = load_structure(&t.structure)?;
        let spec = transmission_spectrum(&s, t.theta_deg, lo, hi, &t.policy)?;
        let (path, mut w) = self.create(&t.output)?;
        spec.write_csv(&mut w)?;
        w.flush()?;
        self.provenance(&path)
    }

    fn peaks(&self, t: &PeaksTask) -> Result<()> {
        let (lo, hi) = check_window("window_nm", t.window_nm)?;
        let s = load_structure(&t.structure)?;
        let spec = transmission_spectrum(&s, t.theta_deg, lo, hi, &t.policy)?;
        let peaks = find_peaks(&spec, t.min_height)?;
        let (path, mut w) = self.create(&t.output)?;
        writeln!(w, "center_wavelength_nm,fwhm_nm,height,center_omega_rad_s,fwhm_omega_rad_s")?;
        for p in &peaks {
            writeln!(
                w,
                "{},{},{},{},{}",
                p.center_wavelength_nm, p.fwhm_wavelength_nm, p.height, p.center_omega, p.fwhm_omega
            )?;
        }
        w.flush()?;
        log::info!("{} peaks", peaks.len());
        self.provenance(&path)
    }

    fn select_peak(&self, s: &LayeredStructure, sel: &PeakSelection) -> Result<Peak> {
        let (lo, hi) = check_window("peak.window_nm", sel.window_nm)?;
        let spec = transmission_spectrum(s, sel.theta_deg, lo, hi, &sel.policy)?;
        let peaks = find_peaks(&spec, sel.min_height)?;
        let choice = PeakChoice {
            min_height: sel.min_height,
            min_fwhm_nm: sel.min_fwhm_nm,
            max_fwhm_nm: sel.max_fwhm_nm,
            target_nm: sel.target_nm,
        };
        let p = choose_peak(&peaks, &choice).ok_or_else(|| {
            anyhow!(
                "no transmission peak in {}-{} nm with height >= {} and FWHM in [{}, {}] nm",
                sel.window_nm.0,
                sel.window_nm.1,
                sel.min_height,
                sel.min_fwhm_nm,
                sel.max_fwhm_nm
            )
        })?;
        log::info!("peak at {:.4} nm, FWHM {:.4} nm", p.center_wavelength_nm, p.fwhm_wavelength_nm);
        Ok(p)
    }

    fn pump(peak: &Peak, p: &PumpSettings) -> PumpPulse {
        PumpPulse {
            central_wavelength_nm: p.central_wavelength_nm.unwrap_or(peak.center_wavelength_nm / 2.0),
            duration_fwhm_fs: p.duration_fwhm_fs,
        }
    }

    fn jsa(&self, t: &JsaTask) -> Result<()> {
        let s = load_structure(&t.structure)?;
        let peak = self.select_peak(&s, &t.peak)?;
        let pump = Self::pump(&peak, &t.pump);
        let grid = t.grid.around(&peak);
        let mut a = two_photon_amplitude(&s, &pump, &EmissionGeometry::degenerate(t.peak.theta_deg), &grid, &grid)?;
        if t.normalize {
            a = normalize_amplitude(&a)?;
        }
        let path = self.output(&t.output)?;
        a.save(&path)?;
        if let Some(csv) = &t.csv {
            let (_, mut w) = self.create(csv)?;
            a.write_csv(&mut w)?;
            w.flush()?;
        }
        self.provenance(&path)
    }

    fn schmidt(&self, t: &SchmidtTask) -> Result<()> {
        let a = load_amplitude(&t.amplitude)?;
        let r = schmidt_decomposition(&a)?;
        let path = self.output(&t.output)?;
        fs::write(&path, r.report_json()? + "\n")?;
        self.provenance(&path)
    }

    fn ensemble(&self, t: &EnsembleTask) -> Result<()> {
        check_window("window_nm", t.window_nm)?;
        let spec = EnsembleSpec {
            base: StructureParams::designed_at(t.lambda0_nm, t.n_layers, 0),
            theta_deg: t.theta_deg,
            window_nm: t.window_nm,
            n_realizations: t.n_realizations,
            master_seed: self.config.master_seed,
            min_height: t.min_height,
            policy: t.policy,
            histogram: t.histogram,
        };
        let peaks = ensemble_peaks(&spec)?;
        let stats = EnsembleStats::from_widths(&spec, peaks.iter().flatten().map(|p| p.fwhm_wavelength_nm));
        let (path, mut w) = self.create(&t.output)?;
        stats.write_csv(&mut w)?;
        w.flush()?;
        if let Some(list) = &t.peaks_output {
            let (_, mut w) = self.create(list)?;
            writeln!(w, "realization,center_wavelength_nm,fwhm_nm,height")?;
            for (r, ps) in peaks.iter().enumerate() {
                for p in ps {
                    writeln!(w, "{r},{},{},{}", p.center_wavelength_nm, p.fwhm_wavelength_nm, p.height)?;
                }
            }
            w.flush()?;
        }
        log::info!(
            "{} peaks over {} realizations ({} below, {} above the histogram)",
            stats.total_peaks,
            stats.n_realizations,
            stats.underflow,
            stats.overflow
        );
        self.provenance(&path)
    }

    fn superpose(&self, t: &SuperposeTask) -> Result<()> {
        t.superposition.validate()?;
        let s = load_structure(&t.structure)?;
        let peak = self.select_peak(&s, &t.peak)?;
        let pump = Self::pump(&peak, &t.pump);
        let theta = t.peak.theta_deg;
        let sup = match t.superposition.angles {
            AngleSet::Range { .. } => {
                superpose_range(&s, &pump, &peak, theta, &t.superposition, &t.grid, &t.tracking)?
            }
            AngleSet::Pinholes { .. } => {
                superpose_pinholes(&s, &pump, &peak, theta, &t.superposition, &t.grid, &t.tracking)?
            }
        };
        let path = self.output(&t.output)?;
        sup.amplitude.save(&path)?;
        let manifest = path.with_extension("manifest.json");
        fs::write(&manifest, serde_json::to_string_pretty(&sup.manifest)? + "\n")?;
        self.provenance(&path)
    }

    fn report(&self, t: &ReportTask) -> Result<()> {
        let a = load_amplitude(&t.amplitude)?;
        let text = report_text(&a, &t.wavepacket)?;
        print!("{text}");
        if let Some(out) = &t.output {
            let path = self.output(out)?;
            fs::write(&path, &text)?;
            self.provenance(&path)?;
        }
        Ok(())
    }
}

fn marginal_width_nm(x: &[f64], y: &[f64]) -> Option<f64> {
    let w = fwhm(x, y)?;
    let i = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b]))?;
    Some(wavelength_nm_from_omega(x[i] - 0.5 * w) - wavelength_nm_from_omega(x[i] + 0.5 * w))
}

/// Deterministic plain-text summary of an amplitude.
pub fn report_text(a: &TwoPhotonAmplitude, opts: &WavepacketOptions) -> Result<String> {
    let k = schmidt_decomposition(a)?;
    let mut out = String::new();
    let opt = |v: Option<f64>, scale: f64| match v {
        Some(v) => format!("{:.6}", v * scale),
        None => "n/a".to_string(),
    };
    writeln!(out, "grid_points          {} x {}", a.rows(), a.cols())?;
    writeln!(out, "normalized           {}", a.normalized)?;
    writeln!(out, "normalization        {:.12}", a.normalization_integral())?;
    writeln!(out, "schmidt_number       {:.6}", k.schmidt_number)?;
    writeln!(out, "entropy_bits         {:.6}", k.entropy)?;
    let v = match hom_visibility(a) {
        Ok(v) => format!("{v:.9}"),
        Err(e) => format!("n/a ({e})"),
    };
    writeln!(out, "hom_visibility       {v}")?;
    writeln!(out, "signal_fwhm_nm       {}", opt(marginal_width_nm(&a.omega_s, &a.signal_marginal()), 1.0))?;
    writeln!(out, "idler_fwhm_nm        {}", opt(marginal_width_nm(&a.omega_i, &a.idler_marginal()), 1.0))?;
    match temporal_wavepacket(a, opts) {
        Ok(w) => {
            writeln!(out, "signal_duration_ps   {:.6}", w.signal_fwhm_s * 1e12)?;
            writeln!(out, "idler_duration_ps    {:.6}", w.idler_fwhm_s * 1e12)?;
        }
        Err(e) => {
            writeln!(out, "signal_duration_ps   n/a ({e})")?;
            writeln!(out, "idler_duration_ps    n/a ({e})")?;
        }
    }
    Ok(out)
}
