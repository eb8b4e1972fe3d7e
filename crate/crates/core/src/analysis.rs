//! Measurements on spectra and two-photon amplitudes.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::realization_seed;
use crate::spdc::{trapezoid_weights, TwoPhotonAmplitude};
use crate::structure::{generate_structure, LayeredStructure, StructureParams};
use crate::tmm::{transmission_spectrum, RefinementPolicy, TransmissionSpectrum};
use crate::units::{delta_wavelength_nm, omega_from_wavelength_nm, wavelength_nm_from_omega};

/// A transmission peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub center_omega: f64,
    pub center_wavelength_nm: f64,
    /// Δλ (nm) between the half-maximum crossings.
    pub fwhm_wavelength_nm: f64,
    pub fwhm_omega: f64,
    pub height: f64,
}

/// Half-maximum crossings around sample `i`, or `None` if a crossing falls
/// outside the data or a higher sample appears first.
fn half_max_crossings(x: &[f64], y: &[f64], i: usize) -> Option<(f64, f64)> {
    let half = 0.5 * y[i];
    let mut j = i;
    let left = loop {
        if j == 0 {
            return None;
        }
        j -= 1;
        if y[j] > y[i] {
            return None;
        }
        if y[j] < half {
            let f = (half - y[j]) / (y[j + 1] - y[j]);
            break x[j] + f * (x[j + 1] - x[j]);
        }
    };
    let mut j = i;
    let right = loop {
        j += 1;
        if j >= y.len() || y[j] > y[i] {
            return None;
        }
        if y[j] < half {
            let f = (y[j - 1] - half) / (y[j - 1] - y[j]);
            break x[j - 1] + f * (x[j] - x[j - 1]);
        }
    };
    Some((left, right))
}

/// FWHM of the highest maximum of a sampled curve, by linear interpolation.
pub fn fwhm(x: &[f64], y: &[f64]) -> Option<f64> {
    let i = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b]))?;
    half_max_crossings(x, y, i).map(|(l, r)| r - l)
}

/// Vertex of the parabola through samples `i - 1`, `i`, `i + 1`.
fn vertex(x: &[f64], y: &[f64], i: usize) -> f64 {
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 {
        return x1;
    }
    (x1 - 0.5 * num / den).clamp(x0, x2)
}

/// Local maxima with T ≥ `min_height` whose half-maximum crossings lie
/// inside the window. Sub-maxima riding on a higher peak are dropped.
pub fn find_peaks(spec: &TransmissionSpectrum, min_height: f64) -> Result<Vec<Peak>> {
    if !spec.is_refined() {
        return Err(Error::UnrefinedSpectrum);
    }
    let x = &spec.omega;
    let y = &spec.transmittance;
    let mut peaks = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if !(y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] >= min_height) {
            continue;
        }
        if let Some((lo, hi)) = half_max_crossings(x, y, i) {
            let c = vertex(x, y, i);
            peaks.push(Peak {
                center_omega: c,
                center_wavelength_nm: wavelength_nm_from_omega(c),
                fwhm_wavelength_nm: delta_wavelength_nm(lo, hi),
                fwhm_omega: hi - lo,
                height: y[i],
            });
        }
    }
    Ok(peaks)
}

/// Log-spaced histogram layout for peak widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramSpec {
    pub lo_nm: f64,
    pub hi_nm: f64,
    pub bins_per_decade: usize,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        HistogramSpec {
            lo_nm: 1e-4,
            hi_nm: 10.0,
            bins_per_decade: 6,
        }
    }
}

impl HistogramSpec {
    pub fn edges(&self) -> Vec<f64> {
        let decades = (self.hi_nm / self.lo_nm).log10();
        let n = (decades * self.bins_per_decade as f64).round() as usize;
        let l0 = self.lo_nm.log10();
        (0..=n)
            .map(|k| 10f64.powf(l0 + k as f64 / self.bins_per_decade as f64))
            .collect()
    }
}

/// Settings of a disorder ensemble over transmission peaks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    /// Structure recipe; its seed is replaced per realization.
    pub base: StructureParams,
    pub theta_deg: f64,
    pub window_nm: (f64, f64),
    pub n_realizations: usize,
    pub master_seed: u64,
    pub min_height: f64,
    pub policy: RefinementPolicy,
    pub histogram: HistogramSpec,
}

impl EnsembleSpec {
    /// 300 layers, θ = 10°, 1500–1600 nm window.
    pub fn standard(n_realizations: usize, master_seed: u64) -> Self {
        EnsembleSpec {
            base: StructureParams::standard(0),
            theta_deg: 10.0,
            window_nm: (1500.0, 1600.0),
            n_realizations,
            master_seed,
            min_height: 0.1,
            policy: RefinementPolicy::default(),
            histogram: HistogramSpec::default(),
        }
    }

    pub fn structure_params(&self, realization: usize) -> StructureParams {
        let mut p = self.base.clone();
        p.seed = realization_seed(self.master_seed, realization as u64);
        p
    }
}

/// Histogram of transmission-peak widths over a disorder ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub bin_edges_nm: Vec<f64>,
    pub counts: Vec<u64>,
    /// Peaks narrower than the first edge / wider than the last.
    pub underflow: u64,
    pub overflow: u64,
    pub total_peaks: u64,
    pub n_realizations: usize,
    pub theta_deg: f64,
    pub n_layers: usize,
    pub window_nm: (f64, f64),
}

impl EnsembleStats {
    pub fn from_widths(spec: &EnsembleSpec, widths_nm: impl IntoIterator<Item = f64>) -> Self {
        let edges = spec.histogram.edges();
        let mut counts = vec![0u64; edges.len() - 1];
        let (mut under, mut over, mut total) = (0, 0, 0);
        let l0 = edges[0].log10();
        for w in widths_nm {
            total += 1;
            if w < edges[0] {
                under += 1;
            } else if w >= edges[edges.len() - 1] {
                over += 1;
            } else {
                let mut k = ((w.log10() - l0) * spec.histogram.bins_per_decade as f64).floor() as usize;
                k = k.min(counts.len() - 1);
                // Guard against rounding at the edges.
                while k > 0 && w < edges[k] {
                    k -= 1;
                }
                while k + 1 < counts.len() && w >= edges[k + 1] {
                    k += 1;
                }
                counts[k] += 1;
            }
        }
        EnsembleStats {
            bin_edges_nm: edges,
            counts,
            underflow: under,
            overflow: over,
            total_peaks: total,
            n_realizations: spec.n_realizations,
            theta_deg: spec.theta_deg,
            n_layers: spec.base.n_layers,
            window_nm: spec.window_nm,
        }
    }

    /// Decades spanned by the occupied bins lying inside `[lo_nm, hi_nm]`,
    /// outer edge to outer edge.
    pub fn occupied_decades(&self, lo_nm: f64, hi_nm: f64) -> f64 {
        let tol = 1e-9;
        let occupied: Vec<usize> = (0..self.counts.len())
            .filter(|&k| {
                self.counts[k] > 0
                    && self.bin_edges_nm[k] >= lo_nm * (1.0 - tol)
                    && self.bin_edges_nm[k + 1] <= hi_nm * (1.0 + tol)
            })
            .collect();
        match (occupied.first(), occupied.last()) {
            (Some(&a), Some(&b)) => (self.bin_edges_nm[b + 1] / self.bin_edges_nm[a]).log10(),
            _ => 0.0,
        }
    }

    /// `bin_lo_nm,bin_hi_nm,count,probability`; probability is per in-range peak.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "bin_lo_nm,bin_hi_nm,count,probability")?;
        let in_range: u64 = self.counts.iter().sum();
        for (k, c) in self.counts.iter().enumerate() {
            let p = if in_range > 0 { *c as f64 / in_range as f64 } else { 0.0 };
            writeln!(w, "{},{},{},{}", self.bin_edges_nm[k], self.bin_edges_nm[k + 1], c, p)?;
        }
        Ok(())
    }
}

/// Peaks of every realization, in realization order.
pub fn ensemble_peaks(spec: &EnsembleSpec) -> Result<Vec<Vec<Peak>>> {
    let lo = omega_from_wavelength_nm(spec.window_nm.1);
    let hi = omega_from_wavelength_nm(spec.window_nm.0);
    (0..spec.n_realizations)
        .into_par_iter()
        .map(|r| {
            let s = generate_structure(&spec.structure_params(r))?;
            let t = transmission_spectrum(&s, spec.theta_deg, lo, hi, &spec.policy)?;
            find_peaks(&t, spec.min_height)
        })
        .collect()
}

/// Generate → spectrum → peaks for every realization, binned by width.
pub fn peak_width_histogram(spec: &EnsembleSpec) -> Result<EnsembleStats> {
    let peaks = ensemble_peaks(spec)?;
    Ok(EnsembleStats::from_widths(
        spec,
        peaks.iter().flatten().map(|p| p.fwhm_wavelength_nm),
    ))
}

/// Result of a Schmidt decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtResult {
    /// Non-increasing.
    pub singular_values: Vec<f64>,
    /// λ_n = σ_n² / Σσ², summing to 1.
    pub mode_weights: Vec<f64>,
    #[serde(rename = "K")]
    pub schmidt_number: f64,
    /// −Σ λ_n log₂ λ_n, bits.
    pub entropy: f64,
}

impl SchmidtResult {
    fn from_singular_values(mut sv: Vec<f64>) -> Result<Self> {
        sv.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = sv.iter().map(|s| s * s).sum();
        if !(total > 0.0) {
            return Err(Error::NullState);
        }
        let weights: Vec<f64> = sv.iter().map(|s| s * s / total).collect();
        let purity: f64 = weights.iter().map(|l| l * l).sum();
        let entropy = -weights
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|l| l * l.log2())
            .sum::<f64>();
        Ok(SchmidtResult {
            singular_values: sv,
            mode_weights: weights,
            schmidt_number: 1.0 / purity,
            entropy: entropy.max(0.0),
        })
    }

    /// `{singular_values, K, entropy}` report.
    pub fn report_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Report<'a> {
            singular_values: &'a [f64],
            #[serde(rename = "K")]
            k: f64,
            entropy: f64,
        }
        let mut s = serde_json::to_string_pretty(&Report {
            singular_values: &self.singular_values,
            k: self.schmidt_number,
            entropy: self.entropy,
        })?;
        s.push('\n');
        Ok(s)
    }
}

/// Schmidt decomposition of an explicit complex matrix (no quadrature weights).
pub fn schmidt_of_matrix(m: &DMatrix<Complex64>) -> Result<SchmidtResult> {
    let sv = m.clone().svd(false, false).singular_values;
    SchmidtResult::from_singular_values(sv.iter().copied().collect())
}

/// SVD of φ weighted by √(Δω_s Δω_i) trapezoidal factors.
pub fn schmidt_decomposition(a: &TwoPhotonAmplitude) -> Result<SchmidtResult> {
    schmidt_of_matrix(&weighted_matrix(a))
}

pub(crate) fn weighted_matrix(a: &TwoPhotonAmplitude) -> DMatrix<Complex64> {
    let ws: Vec<f64> = trapezoid_weights(&a.omega_s).iter().map(|w| w.sqrt()).collect();
    let wi: Vec<f64> = trapezoid_weights(&a.omega_i).iter().map(|w| w.sqrt()).collect();
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a.at(i, j) * ws[i] * wi[j])
}

/// Hong–Ou–Mandel visibility Re∬φ(ω_s,ω_i)φ*(ω_i,ω_s) / ∬|φ|².
pub fn hom_visibility(a: &TwoPhotonAmplitude) -> Result<f64> {
    if a.omega_s != a.omega_i {
        return Err(Error::MismatchedGrids);
    }
    let w = trapezoid_weights(&a.omega_s);
    let n = a.rows();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        for j in 0..n {
            let ww = w[i] * w[j];
            num += ww * (a.at(i, j) * a.at(j, i).conj()).re;
            den += ww * a.at(i, j).norm_sqr();
        }
    }
    if !(den > 0.0) {
        return Err(Error::NullState);
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavepacketOptions {
    /// Zero padding: transform length ≥ this factor × grid length.
    pub pad_factor: usize,
    /// Largest allowed |φ|² on the grid border relative to the peak.
    pub edge_threshold: f64,
    /// Fraction of each grid end rolled off by a cosine taper, which keeps
    /// a truncated slowly decaying spectrum from ringing in time.
    pub taper_fraction: f64,
}

impl Default for WavepacketOptions {
    fn default() -> Self {
        WavepacketOptions {
            pad_factor: 8,
            edge_threshold: 1e-4,
            taper_fraction: 0.25,
        }
    }
}

/// Temporal FWHM of the signal and idler marginal intensities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wavepacket {
    pub signal_fwhm_s: f64,
    pub idler_fwhm_s: f64,
    /// Largest relative mismatch between time- and frequency-domain energy.
    pub parseval_error: f64,
}

/// Ratio of the largest border |φ|² to the peak |φ|².
pub fn edge_ratio(a: &TwoPhotonAmplitude) -> f64 {
    let (r, c) = (a.rows(), a.cols());
    let peak = a.phi.iter().map(|p| p.norm_sqr()).fold(0.0, f64::max);
    let mut edge: f64 = 0.0;
    for i in 0..r {
        edge = edge.max(a.at(i, 0).norm_sqr()).max(a.at(i, c - 1).norm_sqr());
    }
    for j in 0..c {
        edge = edge.max(a.at(0, j).norm_sqr()).max(a.at(r - 1, j).norm_sqr());
    }
    if peak > 0.0 {
        edge / peak
    } else {
        f64::INFINITY
    }
}

/// Tukey window: cosine roll-off over `fraction` of the points at each end.
fn taper(n: usize, fraction: f64) -> Vec<f64> {
    let m = (fraction.clamp(0.0, 0.5) * n as f64).floor() as usize;
    (0..n)
        .map(|k| {
            let e = k.min(n - 1 - k);
            if e >= m {
                1.0
            } else {
                0.5 * (1.0 - (std::f64::consts::PI * (e as f64 + 0.5) / m as f64).cos())
            }
        })
        .collect()
}

fn marginal_duration(lines: &[Vec<Complex64>], step: f64, opts: &WavepacketOptions) -> (f64, f64) {
    let n = lines[0].len();
    let len = (n * opts.pad_factor.max(1)).next_power_of_two();
    let fft = FftPlanner::new().plan_fft_inverse(len);
    let window = taper(n, opts.taper_fraction);
    let mut intensity = vec![0.0; len];
    let mut worst: f64 = 0.0;
    for line in lines {
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for (b, (x, w)) in buf.iter_mut().zip(line.iter().zip(&window)) {
            *b = x * w;
        }
        let freq_energy: f64 = buf[..n].iter().map(|x| x.norm_sqr()).sum();
        fft.process(&mut buf);
        let time_energy: f64 = buf.iter().map(|x| x.norm_sqr()).sum::<f64>() / len as f64;
        if freq_energy > 0.0 {
            worst = worst.max((time_energy - freq_energy).abs() / freq_energy);
        }
        for (acc, x) in intensity.iter_mut().zip(&buf) {
            *acc += x.norm_sqr();
        }
    }
    // Centre t = 0 (fftshift), then measure.
    let half = len / 2;
    let shifted: Vec<f64> = (0..len).map(|k| intensity[(k + half) % len]).collect();
    let dt = 2.0 * std::f64::consts::PI / (len as f64 * step);
    let t: Vec<f64> = (0..len).map(|k| (k as f64 - half as f64) * dt).collect();
    (fwhm(&t, &shifted).unwrap_or(f64::NAN), worst)
}

/// Wave-packet durations from the Fourier transform of φ along each axis.
pub fn temporal_wavepacket(a: &TwoPhotonAmplitude, opts: &WavepacketOptions) -> Result<Wavepacket> {
    if a.rows() < 3 || a.cols() < 3 {
        return Err(Error::invalid("grid", "need at least 3 points per axis"));
    }
    let step = |g: &[f64]| -> Result<f64> {
        let h = (g[g.len() - 1] - g[0]) / (g.len() - 1) as f64;
        if g.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-6 * h) {
            Ok(h)
        } else {
            Err(Error::invalid("grid", "temporal analysis needs uniform grids"))
        }
    };
    let hs = step(&a.omega_s)?;
    let hi = step(&a.omega_i)?;
    let ratio = edge_ratio(a);
    if !(ratio <= opts.edge_threshold) {
        return Err(Error::TruncatedAmplitude { ratio });
    }
    let columns: Vec<Vec<Complex64>> = (0..a.cols())
        .map(|j| (0..a.rows()).map(|i| a.at(i, j)).collect())
        .collect();
    let rows: Vec<Vec<Complex64>> = (0..a.rows())
        .map(|i| (0..a.cols()).map(|j| a.at(i, j)).collect())
        .collect();
    let (signal, e1) = marginal_duration(&columns, hs, opts);
    let (idler, e2) = marginal_duration(&rows, hi, opts);
    if !signal.is_finite() || !idler.is_finite() {
        return Err(Error::TruncatedAmplitude { ratio });
    }
    Ok(Wavepacket {
        signal_fwhm_s: signal,
        idler_fwhm_s: idler,
        parseval_error: e1.max(e2),
    })
}

/// One tracked peak position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    pub theta_deg: f64,
    pub peak: Peak,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionTrack {
    /// Sorted by angle.
    pub points: Vec<DispersionPoint>,
    /// Centre frequency non-decreasing in θ.
    pub monotone: bool,
}

impl DispersionTrack {
    /// `theta_deg,center_wavelength_nm`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "theta_deg,center_wavelength_nm")?;
        for p in &self.points {
            writeln!(w, "{},{}", p.theta_deg, p.peak.center_wavelength_nm)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackingOptions {
    pub policy: RefinementPolicy,
    pub min_height: f64,
    /// Search half-width around the predicted centre, in peak widths.
    pub window_fwhm: f64,
    /// Lower bound on the search half-width, nm.
    pub min_window_nm: f64,
}

impl Default for TrackingOptions {
    fn default() -> Self {
        TrackingOptions {
            policy: RefinementPolicy {
                base_points: 801,
                ..RefinementPolicy::default()
            },
            min_height: 0.1,
            window_fwhm: 10.0,
            min_window_nm: 0.6,
        }
    }
}

/// Effective index whose angle dependence predicts resonance shifts:
/// ω(θ)² (n² − sin²θ) = const.
fn predicted_omega(s: &LayeredStructure, omega: f64, from_deg: f64, to_deg: f64) -> f64 {
    let wl = wavelength_nm_from_omega(omega);
    let n2: f64 = {
        let mut acc = 0.0;
        let mut len = 0.0;
        for l in s.layers() {
            let n = s.material_of(l).refractive_index(wl).unwrap_or(1.0);
            acc += n * n * l.thickness_nm;
            len += l.thickness_nm;
        }
        if len > 0.0 {
            acc / len
        } else {
            1.0
        }
    };
    let s1 = from_deg.to_radians().sin().powi(2);
    let s2 = to_deg.to_radians().sin().powi(2);
    omega * ((n2 - s1) / (n2 - s2)).sqrt()
}

/// Follows `seed` (found at `seed_theta_deg`) across `theta_list` by
/// nearest-centre continuation.
pub fn peak_angle_dispersion(
    s: &LayeredStructure,
    seed: &Peak,
    seed_theta_deg: f64,
    theta_list: &[f64],
    opts: &TrackingOptions,
) -> Result<DispersionTrack> {
    if theta_list.is_empty() {
        return Err(Error::invalid("theta_list", "empty"));
    }
    let mut thetas = theta_list.to_vec();
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    let start = (0..thetas.len())
        .min_by(|&a, &b| {
            (thetas[a] - seed_theta_deg)
                .abs()
                .total_cmp(&(thetas[b] - seed_theta_deg).abs())
        })
        .unwrap();

    let locate = |prev: &Peak, from: f64, to: f64| -> Result<Peak> {
        let predicted = predicted_omega(s, prev.center_omega, from, to);
        let half_nm = (opts.window_fwhm * prev.fwhm_wavelength_nm)
            .max(opts.min_window_nm)
            .max(2.0 * delta_wavelength_nm(prev.center_omega, predicted));
        let wl = wavelength_nm_from_omega(predicted);
        let lo = omega_from_wavelength_nm(wl + half_nm);
        let hi = omega_from_wavelength_nm(wl - half_nm);
        let spec = transmission_spectrum(s, to, lo, hi, &opts.policy)?;
        find_peaks(&spec, opts.min_height)?
            .into_iter()
            .min_by(|a, b| {
                (a.center_omega - predicted)
                    .abs()
                    .total_cmp(&(b.center_omega - predicted).abs())
            })
            .ok_or(Error::PeakLost {
                from_deg: from,
                to_deg: to,
            })
    };

    let mut found: Vec<Option<Peak>> = vec![None; thetas.len()];
    found[start] = Some(if thetas[start] == seed_theta_deg {
        *seed
    } else {
        locate(seed, seed_theta_deg, thetas[start])?
    });
    for k in start + 1..thetas.len() {
        let prev = found[k - 1].unwrap();
        found[k] = Some(locate(&prev, thetas[k - 1], thetas[k])?);
    }
    for k in (0..start).rev() {
        let prev = found[k + 1].unwrap();
        found[k] = Some(locate(&prev, thetas[k + 1], thetas[k])?);
    }
    let points: Vec<DispersionPoint> = thetas
        .iter()
        .zip(found)
        .map(|(&theta_deg, p)| DispersionPoint {
            theta_deg,
            peak: p.unwrap(),
        })
        .collect();
    let monotone = points
        .windows(2)
        .all(|w| w[1].peak.center_omega >= w[0].peak.center_omega);
    Ok(DispersionTrack { points, monotone })
}

/// Criteria for choosing one peak to build an amplitude around.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakChoice {
    pub min_height: f64,
    pub min_fwhm_nm: f64,
    pub max_fwhm_nm: f64,
    /// Prefer the qualifying peak closest to this wavelength.
    pub target_nm: f64,
}

pub fn choose_peak(peaks: &[Peak], c: &PeakChoice) -> Option<Peak> {
    peaks
        .iter()
        .filter(|p| {
            p.height >= c.min_height
                && p.fwhm_wavelength_nm >= c.min_fwhm_nm
                && p.fwhm_wavelength_nm <= c.max_fwhm_nm
        })
        .min_by(|a, b| {
            (a.center_wavelength_nm - c.target_nm)
                .abs()
                .total_cmp(&(b.center_wavelength_nm - c.target_nm).abs())
        })
        .copied()
}
