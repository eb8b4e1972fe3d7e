//! Engineered two-photon states built by coherently adding amplitudes
//! collected at several emission angles.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{peak_angle_dispersion, schmidt_decomposition, Peak, TrackingOptions};
use crate::error::{Error, Result};
use crate::spdc::{
    normalize_amplitude, trapezoid_weights, two_photon_amplitude, EmissionGeometry, PumpPulse,
    TwoPhotonAmplitude,
};
use crate::structure::LayeredStructure;
use crate::units::wavelength_nm_from_omega;

/// How component phases are aligned before summation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PhasePolicy {
    /// Rotate every component to be real-positive at its own peak cell.
    PeakAlign,
    None,
    /// Explicit phase per component (radians), applied as `exp(i·phase)`.
    User(Vec<f64>),
}

/// Which angles contribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum AngleSet {
    Range { lo_deg: f64, hi_deg: f64, n_samples: usize },
    Pinholes { theta_deg: Vec<f64> },
}

impl AngleSet {
    pub fn thetas(&self) -> Vec<f64> {
        match self {
            AngleSet::Range { lo_deg, hi_deg, n_samples } => {
                if *n_samples == 1 {
                    return vec![0.5 * (lo_deg + hi_deg)];
                }
                let h = (hi_deg - lo_deg) / (*n_samples - 1) as f64;
                (0..*n_samples).map(|k| lo_deg + h * k as f64).collect()
            }
            AngleSet::Pinholes { theta_deg } => theta_deg.clone(),
        }
    }

    /// `m` pinholes spaced evenly over `[lo_deg, hi_deg]`.
    pub fn equidistant_pinholes(lo_deg: f64, hi_deg: f64, m: usize) -> Self {
        AngleSet::Pinholes {
            theta_deg: AngleSet::Range {
                lo_deg,
                hi_deg,
                n_samples: m,
            }
            .thetas(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperpositionSpec {
    pub angles: AngleSet,
    /// Per-component complex weights `[re, im]`; equal weights when absent.
    #[serde(default)]
    pub weights: Option<Vec<[f64; 2]>>,
    pub compensation: PhasePolicy,
}

impl SuperpositionSpec {
    pub fn validate(&self) -> Result<()> {
        match &self.angles {
            AngleSet::Range { lo_deg, hi_deg, n_samples } => {
                if *n_samples < 1 {
                    return Err(Error::invalid("n_samples", "must be at least 1"));
                }
                if !(lo_deg <= hi_deg) {
                    return Err(Error::invalid("theta range", "lo must not exceed hi"));
                }
            }
            AngleSet::Pinholes { theta_deg } => {
                if theta_deg.is_empty() {
                    return Err(Error::invalid("theta_deg", "need at least one pinhole"));
                }
            }
        }
        let thetas = self.angles.thetas();
        if thetas.iter().any(|t| !(*t > 0.0 && *t < 90.0)) {
            return Err(Error::invalid("theta_deg", "angles must lie in (0°, 90°)"));
        }
        if let Some(w) = &self.weights {
            if w.len() != thetas.len() {
                return Err(Error::invalid("weights", "one weight per component"));
            }
        }
        if let PhasePolicy::User(p) = &self.compensation {
            if p.len() != thetas.len() {
                return Err(Error::invalid("compensation", "one phase per component"));
            }
        }
        Ok(())
    }

    pub fn weights(&self) -> Vec<Complex64> {
        match &self.weights {
            Some(w) => w.iter().map(|[re, im]| Complex64::new(*re, *im)).collect(),
            None => vec![Complex64::new(1.0, 0.0); self.angles.thetas().len()],
        }
    }
}

/// Grid placed around a transmission peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOptions {
    /// Half-width of each component window, in peak FWHMs.
    pub half_width_fwhm: f64,
    /// Grid points per peak FWHM.
    pub points_per_fwhm: f64,
    /// Cap on points per axis of the common grid.
    pub max_points: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            half_width_fwhm: 8.0,
            points_per_fwhm: 6.0,
            max_points: 1600,
        }
    }
}

impl GridOptions {
    /// Uniform grid centred on a peak.
    pub fn around(&self, peak: &Peak) -> Vec<f64> {
        let step = peak.fwhm_omega / self.points_per_fwhm;
        let half = (self.half_width_fwhm * self.points_per_fwhm).ceil() as usize;
        (0..=2 * half)
            .map(|k| peak.center_omega + step * (k as f64 - half as f64))
            .collect()
    }
}

/// Phase factors that make each component real-positive at its peak cell.
pub fn compensation_phases(components: &[TwoPhotonAmplitude]) -> Result<Vec<Complex64>> {
    components
        .iter()
        .map(|a| {
            let (i, j) = a.peak_cell();
            let p = a.at(i, j);
            if p.norm() == 0.0 || !p.norm().is_finite() {
                return Err(Error::NullState);
            }
            Ok((p / p.norm()).conj())
        })
        .collect()
}

fn policy_factors(policy: &PhasePolicy, components: &[TwoPhotonAmplitude]) -> Result<Vec<Complex64>> {
    match policy {
        PhasePolicy::PeakAlign => compensation_phases(components),
        PhasePolicy::None => Ok(vec![Complex64::new(1.0, 0.0); components.len()]),
        PhasePolicy::User(p) => {
            if p.len() != components.len() {
                return Err(Error::invalid("compensation", "one phase per component"));
            }
            Ok(p.iter().map(|t| Complex64::from_polar(1.0, *t)).collect())
        }
    }
}

/// Normalizes each component, applies phase factors and weights, sums in
/// component order and normalizes the result. Returns the sum and the
/// phase factors used.
pub fn superpose(
    components: &[TwoPhotonAmplitude],
    weights: &[Complex64],
    policy: &PhasePolicy,
) -> Result<(TwoPhotonAmplitude, Vec<Complex64>)> {
    let first = components
        .first()
        .ok_or_else(|| Error::invalid("components", "need at least one component"))?;
    if weights.len() != components.len() {
        return Err(Error::invalid("weights", "one weight per component"));
    }
    if components
        .iter()
        .any(|c| c.omega_s != first.omega_s || c.omega_i != first.omega_i)
    {
        return Err(Error::MismatchedGrids);
    }
    let factors = policy_factors(policy, components)?;
    let mut phi = vec![Complex64::new(0.0, 0.0); first.phi.len()];
    for ((c, f), w) in components.iter().zip(&factors).zip(weights) {
        if *w == Complex64::new(0.0, 0.0) {
            continue;
        }
        let n = normalize_amplitude(c)?;
        let g = f * w;
        for (acc, p) in phi.iter_mut().zip(&n.phi) {
            *acc += g * p;
        }
    }
    let sum = TwoPhotonAmplitude::from_matrix(
        first.omega_s.clone(),
        first.omega_i.clone(),
        phi,
        first.geometry,
        first.pump,
    )?;
    Ok((normalize_amplitude(&sum)?, factors))
}

/// |⟨a, b⟩| / (‖a‖‖b‖) with trapezoidal weights on a shared grid.
pub fn cross_overlap(a: &TwoPhotonAmplitude, b: &TwoPhotonAmplitude) -> Result<f64> {
    if a.omega_s != b.omega_s || a.omega_i != b.omega_i {
        return Err(Error::MismatchedGrids);
    }
    let ws = trapezoid_weights(&a.omega_s);
    let wi = trapezoid_weights(&a.omega_i);
    let mut dot = Complex64::new(0.0, 0.0);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            dot += a.at(i, j).conj() * b.at(i, j) * (ws[i] * wi[j]);
        }
    }
    let den = (a.norm_sqr_integral() * b.norm_sqr_integral()).sqrt();
    if !(den > 0.0) {
        return Err(Error::NullState);
    }
    Ok(dot.norm() / den)
}

/// Reproducibility record of a synthesis run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisManifest {
    pub spec: SuperpositionSpec,
    pub seed_theta_deg: f64,
    pub theta_deg: Vec<f64>,
    pub center_wavelength_nm: Vec<f64>,
    pub fwhm_wavelength_nm: Vec<f64>,
    /// `[re, im]` per component.
    pub weights: Vec<[f64; 2]>,
    /// Applied compensation phases, radians.
    pub phases_rad: Vec<f64>,
    pub component_schmidt_number: Vec<f64>,
    pub max_cross_overlap: f64,
    pub grid_points: usize,
    pub grid_step_rad_s: f64,
    pub grid: GridOptions,
}

pub struct Superposition {
    pub amplitude: TwoPhotonAmplitude,
    pub manifest: SynthesisManifest,
}

/// Common uniform grid: union of the component windows, finest step.
fn common_grid(peaks: &[Peak], opts: &GridOptions) -> Vec<f64> {
    let finest = peaks
        .iter()
        .map(|p| p.fwhm_omega / opts.points_per_fwhm)
        .fold(f64::INFINITY, f64::min);
    let lo = peaks
        .iter()
        .map(|p| p.center_omega - opts.half_width_fwhm * p.fwhm_omega)
        .fold(f64::INFINITY, f64::min);
    let hi = peaks
        .iter()
        .map(|p| p.center_omega + opts.half_width_fwhm * p.fwhm_omega)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut n = ((hi - lo) / finest).ceil() as usize + 1;
    let mut step = finest;
    if n > opts.max_points {
        log::warn!(
            "common grid needs {n} points per axis; coarsening to {}",
            opts.max_points
        );
        n = opts.max_points;
        step = (hi - lo) / (n - 1) as f64;
    }
    (0..n).map(|k| lo + step * k as f64).collect()
}

/// Component at `theta` evaluated on the part of `grid` inside its own
/// window and zero elsewhere.
fn embedded_component(
    s: &LayeredStructure,
    pump: &PumpPulse,
    theta: f64,
    peak: &Peak,
    grid: &[f64],
    opts: &GridOptions,
) -> Result<TwoPhotonAmplitude> {
    let half = opts.half_width_fwhm * peak.fwhm_omega;
    let lo = grid.partition_point(|w| *w < peak.center_omega - half);
    let hi = grid.partition_point(|w| *w <= peak.center_omega + half);
    let hi = hi.max(lo + 1).min(grid.len());
    let lo = lo.min(hi - 1);
    let local = &grid[lo..hi];
    let geometry = EmissionGeometry::degenerate(theta);
    let block = two_photon_amplitude(s, pump, &geometry, local, local)?;
    let n = grid.len();
    let mut phi = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..local.len() {
        for j in 0..local.len() {
            phi[(lo + i) * n + lo + j] = block.at(i, j);
        }
    }
    TwoPhotonAmplitude::from_matrix(grid.to_vec(), grid.to_vec(), phi, geometry, *pump)
}

fn build(
    s: &LayeredStructure,
    pump: &PumpPulse,
    seed: &Peak,
    seed_theta_deg: f64,
    spec: &SuperpositionSpec,
    grid_opts: &GridOptions,
    tracking: &TrackingOptions,
    require_disjoint: bool,
) -> Result<Superposition> {
    spec.validate()?;
    let thetas = spec.angles.thetas();
    let track = peak_angle_dispersion(s, seed, seed_theta_deg, &thetas, tracking)?;
    let peak_at = |theta: f64| -> Peak {
        track
            .points
            .iter()
            .find(|p| p.theta_deg == theta)
            .map(|p| p.peak)
            .unwrap_or(*seed)
    };
    let peaks: Vec<Peak> = thetas.iter().map(|t| peak_at(*t)).collect();
    let grid = common_grid(&peaks, grid_opts);
    let components: Vec<TwoPhotonAmplitude> = thetas
        .par_iter()
        .zip(&peaks)
        .map(|(t, p)| embedded_component(s, pump, *t, p, &grid, grid_opts))
        .collect::<Result<_>>()?;

    let mut max_overlap: f64 = 0.0;
    for a in 0..components.len() {
        for b in a + 1..components.len() {
            let o = cross_overlap(&components[a], &components[b])?;
            if require_disjoint && o >= 0.01 {
                return Err(Error::PinholesNotDisjoint {
                    first: a,
                    second: b,
                    overlap: o,
                });
            }
            max_overlap = max_overlap.max(o);
        }
    }
    let component_k: Vec<f64> = components
        .par_iter()
        .map(|c| schmidt_decomposition(c).map(|r| r.schmidt_number))
        .collect::<Result<_>>()?;

    let weights = spec.weights();
    let (mut amplitude, factors) = superpose(&components, &weights, &spec.compensation)?;
    let mean_theta = thetas.iter().sum::<f64>() / thetas.len() as f64;
    amplitude.geometry = EmissionGeometry::degenerate(mean_theta);

    let manifest = SynthesisManifest {
        spec: spec.clone(),
        seed_theta_deg,
        center_wavelength_nm: peaks
            .iter()
            .map(|p| wavelength_nm_from_omega(p.center_omega))
            .collect(),
        fwhm_wavelength_nm: peaks.iter().map(|p| p.fwhm_wavelength_nm).collect(),
        theta_deg: thetas,
        weights: weights.iter().map(|w| [w.re, w.im]).collect(),
        phases_rad: factors.iter().map(|f| f.arg()).collect(),
        component_schmidt_number: component_k,
        max_cross_overlap: max_overlap,
        grid_points: grid.len(),
        grid_step_rad_s: if grid.len() > 1 { grid[1] - grid[0] } else { 0.0 },
        grid: *grid_opts,
    };
    Ok(Superposition { amplitude, manifest })
}

/// Sum over `n_samples` equally spaced angles in a range, each component
/// centred on the tracked peak at its angle.
pub fn superpose_range(
    s: &LayeredStructure,
    pump: &PumpPulse,
    seed: &Peak,
    seed_theta_deg: f64,
    spec: &SuperpositionSpec,
    grid: &GridOptions,
    tracking: &TrackingOptions,
) -> Result<Superposition> {
    if !matches!(spec.angles, AngleSet::Range { .. }) {
        return Err(Error::invalid("angles", "range superposition needs a range"));
    }
    build(s, pump, seed, seed_theta_deg, spec, grid, tracking, false)
}

/// Sum over discrete pinhole angles whose components must be spectrally
/// disjoint (pairwise cross-overlap below 0.01).
pub fn superpose_pinholes(
    s: &LayeredStructure,
    pump: &PumpPulse,
    seed: &Peak,
    seed_theta_deg: f64,
    spec: &SuperpositionSpec,
    grid: &GridOptions,
    tracking: &TrackingOptions,
) -> Result<Superposition> {
    if !matches!(spec.angles, AngleSet::Pinholes { .. }) {
        return Err(Error::invalid("angles", "pinhole superposition needs a pinhole list"));
    }
    build(s, pump, seed, seed_theta_deg, spec, grid, tracking, true)
}

/// Fraction of ∬|φ|² with |ω_s − ω_i| ≤ `band`.
pub fn diagonal_mass_fraction(a: &TwoPhotonAmplitude, band: f64) -> f64 {
    let ws = trapezoid_weights(&a.omega_s);
    let wi = trapezoid_weights(&a.omega_i);
    let (mut inside, mut total) = (0.0, 0.0);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let m = a.at(i, j).norm_sqr() * ws[i] * wi[j];
            total += m;
            if (a.omega_s[i] - a.omega_i[j]).abs() <= band {
                inside += m;
            }
        }
    }
    if total > 0.0 {
        inside / total
    } else {
        0.0
    }
}

/// Width between the outermost half-maximum crossings of a sampled curve.
pub fn envelope_fwhm(x: &[f64], y: &[f64]) -> Option<f64> {
    let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return None;
    }
    let half = 0.5 * max;
    let first = y.iter().position(|v| *v >= half)?;
    let last = y.iter().rposition(|v| *v >= half)?;
    if first == 0 || last + 1 == y.len() {
        return None;
    }
    let cross = |a: usize, b: usize| x[a] + (half - y[a]) / (y[b] - y[a]) * (x[b] - x[a]);
    Some(cross(last, last + 1) - cross(first - 1, first))
}
