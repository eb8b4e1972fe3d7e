use layered_spdc::structure::Arrangement;
use layered_spdc::synthesis::{AngleSet, PhasePolicy};

use crate::args::{ArrangementArg, Command, PeakArgs};
use crate::config::*;

fn set<T: Clone>(slot: &mut T, flag: &Option<T>) {
    if let Some(v) = flag {
        *slot = v.clone();
    }
}

fn apply_peak(a: &PeakArgs, peak: &mut PeakSelection, pump: &mut PumpSettings, grid: &mut layered_spdc::synthesis::GridOptions) {
    set(&mut peak.theta_deg, &a.theta_deg);
    set(&mut peak.window_nm, &a.window_nm);
    set(&mut peak.target_nm, &a.target_nm);
    set(&mut peak.min_fwhm_nm, &a.min_fwhm_nm);
    set(&mut peak.max_fwhm_nm, &a.max_fwhm_nm);
    set(&mut peak.min_height, &a.min_height);
    set(&mut pump.duration_fwhm_fs, &a.pump_duration_fs);
    if a.pump_nm.is_some() {
        pump.central_wavelength_nm = a.pump_nm;
    }
    set(&mut grid.half_width_fwhm, &a.half_width_fwhm);
    set(&mut grid.points_per_fwhm, &a.points_per_fwhm);
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Spectrum(_) => "spectrum",
            Command::Peaks(_) => "peaks",
            Command::Jsa(_) => "jsa",
            Command::Schmidt(_) => "schmidt",
            Command::Ensemble(_) => "ensemble",
            Command::Superpose(_) => "superpose",
            Command::Report(_) => "report",
        }
    }

    /// Overlays the flags on `base`, or on the defaults when there is no base.
    /// `base` must hold the same kind of task.
    pub fn apply(&self, base: Option<Task>) -> Task {
        match self {
            Command::Gen(a) => {
                let mut t = match base {
                    Some(Task::Gen(t)) => t,
                    _ => GenTask::default(),
                };
                set(&mut t.n_layers, &a.layers);
                set(&mut t.lambda0_nm, &a.lambda0_nm);
                if a.mean_thickness_nm.is_some() {
                    t.mean_optical_thickness_nm = a.mean_thickness_nm;
                }
                if a.jitter_nm.is_some() {
                    t.jitter_sigma_optical_nm = a.jitter_nm;
                }
                if let Some(arr) = a.arrangement {
                    t.arrangement = match arr {
                        ArrangementArg::Random => Arrangement::Random,
                        ArrangementArg::Alternating => Arrangement::Alternating,
                    };
                }
                set(&mut t.output, &a.output);
                Task::Gen(t)
            }
            Command::Spectrum(a) => {
                let mut t = match base {
                    Some(Task::Spectrum(t)) => t,
                    _ => SpectrumTask::default(),
                };
                set(&mut t.structure, &a.structure);
                set(&mut t.theta_deg, &a.theta_deg);
                set(&mut t.window_nm, &a.window_nm);
                set(&mut t.policy.base_points, &a.base_points);
                set(&mut t.output, &a.output);
                Task::Spectrum(t)
            }
            Command::Peaks(a) => {
                let mut t = match base {
                    Some(Task::Peaks(t)) => t,
                    _ => PeaksTask::default(),
                };
                set(&mut t.structure, &a.structure);
                set(&mut t.theta_deg, &a.theta_deg);
                set(&mut t.window_nm, &a.window_nm);
                set(&mut t.min_height, &a.min_height);
                set(&mut t.output, &a.output);
                Task::Peaks(t)
            }
            Command::Jsa(a) => {
                let mut t = match base {
                    Some(Task::Jsa(t)) => t,
                    _ => JsaTask::default(),
                };
                set(&mut t.structure, &a.structure);
                apply_peak(&a.peak, &mut t.peak, &mut t.pump, &mut t.grid);
                if a.raw {
                    t.normalize = false;
                }
                if a.csv.is_some() {
                    t.csv = a.csv.clone();
                }
                set(&mut t.output, &a.output);
                Task::Jsa(t)
            }
            Command::Schmidt(a) => {
                let mut t = match base {
                    Some(Task::Schmidt(t)) => t,
                    _ => SchmidtTask::default(),
                };
                set(&mut t.amplitude, &a.amplitude);
                set(&mut t.output, &a.output);
                Task::Schmidt(t)
            }
            Command::Ensemble(a) => {
                let mut t = match base {
                    Some(Task::Ensemble(t)) => t,
                    _ => EnsembleTask::default(),
                };
                set(&mut t.n_realizations, &a.realizations);
                set(&mut t.n_layers, &a.layers);
                set(&mut t.lambda0_nm, &a.lambda0_nm);
                set(&mut t.theta_deg, &a.theta_deg);
                set(&mut t.window_nm, &a.window_nm);
                set(&mut t.min_height, &a.min_height);
                if a.peaks_output.is_some() {
                    t.peaks_output = a.peaks_output.clone();
                }
                set(&mut t.output, &a.output);
                Task::Ensemble(t)
            }
            Command::Superpose(a) => {
                let mut t = match base {
                    Some(Task::Superpose(t)) => t,
                    _ => SuperposeTask::default(),
                };
                set(&mut t.structure, &a.structure);
                apply_peak(&a.peak, &mut t.peak, &mut t.pump, &mut t.grid);
                if let Some(p) = &a.pinholes_deg {
                    t.superposition.angles = AngleSet::Pinholes { theta_deg: p.clone() };
                }
                if let Some((lo, hi)) = a.range_deg {
                    let n = a.samples.unwrap_or(match t.superposition.angles {
                        AngleSet::Range { n_samples, .. } => n_samples,
                        AngleSet::Pinholes { .. } => 9,
                    });
                    t.superposition.angles = AngleSet::Range { lo_deg: lo, hi_deg: hi, n_samples: n };
                }
                if a.no_compensation {
                    t.superposition.compensation = PhasePolicy::None;
                }
                set(&mut t.output, &a.output);
                Task::Superpose(t)
            }
            Command::Report(a) => {
                let mut t = match base {
                    Some(Task::Report(t)) => t,
                    _ => ReportTask::default(),
                };
                set(&mut t.amplitude, &a.amplitude);
                if a.output.is_some() {
                    t.output = a.output.clone();
                }
                Task::Report(t)
            }
        }
    }
}
