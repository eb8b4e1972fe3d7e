//! Two-photon spectral amplitude of spontaneous down-conversion.
//!
//! In first-order perturbation theory the amplitude of emitting a signal
//! photon at ω_s and an idler photon at ω_i is
//!
//! ```text
//! φ(ω_s, ω_i) = C · E_p(ω_s + ω_i) · Σ_l χ⁽²⁾_l ∫_layer E_p(z) E_s^out(z)* E_i^out(z)* dz
//! ```
//!
//! where E_p is the pump mode (normally incident plane wave) and E_s^out,
//! E_i^out are the outgoing detection modes of the signal and idler. A mode
//! that leaves the stack on a given side as a pure plane wave is the time
//! reverse of the scattering state incident from that side. Within a layer
//! each field is a sum of a forward and a backward wave, so the integral is
//! a closed-form sum of eight exponentials.
//!
//! The constant C carries no calibration; rates are relative.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{LayeredStructure, ReferenceStructure};
use crate::tmm::{scattering_solution, IncidenceGeometry, LayerField, Side};
use crate::units::omega_from_wavelength_nm;

/// Chirp-free Gaussian pump pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpPulse {
    pub central_wavelength_nm: f64,
    /// FWHM of the temporal intensity, fs.
    pub duration_fwhm_fs: f64,
}

impl PumpPulse {
    /// 250 fs pulse at 775 nm.
    pub fn standard() -> Self {
        PumpPulse {
            central_wavelength_nm: 775.0,
            duration_fwhm_fs: 250.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_fwhm_fs > 0.0) {
            return Err(Error::invalid("duration_fwhm_fs", "must be positive"));
        }
        if !(self.central_wavelength_nm > 0.0) {
            return Err(Error::invalid("central_wavelength_nm", "must be positive"));
        }
        Ok(())
    }

    /// Central angular frequency ω_p⁰ (rad/s).
    pub fn omega0(&self) -> f64 {
        omega_from_wavelength_nm(self.central_wavelength_nm)
    }

    /// RMS width σ_t (s) of the temporal amplitude exp(−t²/2σ_t²).
    pub fn sigma_t(&self) -> f64 {
        self.duration_fwhm_fs * 1e-15 / (2.0 * std::f64::consts::LN_2.sqrt())
    }

    /// FWHM of the spectral intensity in rad/s (4 ln2 / τ).
    pub fn spectral_intensity_fwhm(&self) -> f64 {
        4.0 * std::f64::consts::LN_2 / (self.duration_fwhm_fs * 1e-15)
    }
}

/// Spectral amplitude of the pump, real and equal to 1 at ω_p⁰.
pub fn pump_spectrum(p: &PumpPulse, omega: f64) -> Complex64 {
    let x = p.sigma_t() * (omega - p.omega0());
    Complex64::new((-0.5 * x * x).exp(), 0.0)
}

/// How the idler angle is chosen for each grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IdlerAngleRule {
    /// θ_i is the configured constant.
    #[default]
    Fixed,
    /// θ_i solves ω_s sin θ_s = ω_i sin θ_i in every cell.
    Strict,
}

/// Emission angles; signal and idler sit on opposite sides of the cone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionGeometry {
    pub theta_s_deg: f64,
    pub theta_i_deg: f64,
    /// Side on which signal and idler are detected.
    #[serde(default = "rear")]
    pub detection: Side,
    #[serde(default)]
    pub idler_rule: IdlerAngleRule,
}

fn rear() -> Side {
    Side::Rear
}

impl EmissionGeometry {
    pub fn degenerate(theta_deg: f64) -> Self {
        EmissionGeometry {
            theta_s_deg: theta_deg,
            theta_i_deg: theta_deg,
            detection: Side::Rear,
            idler_rule: IdlerAngleRule::Fixed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("theta_s_deg", self.theta_s_deg), ("theta_i_deg", self.theta_i_deg)] {
            if !(0.0..90.0).contains(&t) {
                return Err(Error::invalid(name, format!("{t} outside [0, 90)")));
            }
        }
        Ok(())
    }

    /// Idler angle used for the cell (ω_s, ω_i).
    pub fn idler_angle_deg(&self, omega_s: f64, omega_i: f64) -> Result<f64> {
        match self.idler_rule {
            IdlerAngleRule::Fixed => Ok(self.theta_i_deg),
            IdlerAngleRule::Strict => {
                if omega_s == omega_i {
                    return Ok(self.theta_s_deg);
                }
                let s = omega_s * self.theta_s_deg.to_radians().sin() / omega_i;
                if !(0.0..1.0).contains(&s) {
                    return Err(Error::invalid(
                        "theta_s_deg",
                        format!("no idler angle satisfies transverse momentum at ({omega_s}, {omega_i})"),
                    ));
                }
                Ok(s.asin().to_degrees())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Pump,
    Signal,
    Idler,
}

/// Spatial mode in every layer plus the two half-spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFunction {
    pub layers: Vec<LayerField>,
    pub exterior: [LayerField; 2],
}

fn time_reversed(f: &LayerField) -> LayerField {
    LayerField {
        forward: f.backward.conj(),
        backward: f.forward.conj(),
        kz: f.kz.conj(),
    }
}

/// Pump: unit plane wave from the front at normal incidence (`theta_deg`
/// ignored). Signal/idler: outgoing detection mode on the `detection` side,
/// i.e. the time-reversed scattering state incident from that side.
pub fn mode_function(
    s: &LayeredStructure,
    omega: f64,
    theta_deg: f64,
    role: Role,
    detection: Side,
) -> Result<ModeFunction> {
    match role {
        Role::Pump => {
            let sol = scattering_solution(s, &IncidenceGeometry::front(omega, 0.0)?)?;
            Ok(ModeFunction {
                layers: sol.per_layer,
                exterior: sol.exterior,
            })
        }
        Role::Signal | Role::Idler => {
            let sol = scattering_solution(s, &IncidenceGeometry::new(omega, theta_deg, detection)?)?;
            Ok(ModeFunction {
                layers: sol.per_layer.iter().map(time_reversed).collect(),
                exterior: [time_reversed(&sol.exterior[0]), time_reversed(&sol.exterior[1])],
            })
        }
    }
}

/// ∫_{z_lo}^{z_hi} exp(iΔz) dz.
pub fn phase_integral(delta: Complex64, z_lo: f64, z_hi: f64) -> Complex64 {
    let w = z_hi - z_lo;
    let centre = (Complex64::i() * delta * (0.5 * (z_lo + z_hi))).exp();
    if delta.norm() * w < 1e-8 {
        centre * w
    } else {
        centre * (delta * (0.5 * w)).sin() * 2.0 / delta
    }
}

/// ∫ E_p E_s* E_i* dz over `[z_lo, z_hi]` (local layer coordinates) as the
/// eight-term closed form.
pub fn layer_overlap(
    pump: &LayerField,
    signal: &LayerField,
    idler: &LayerField,
    z_lo: f64,
    z_hi: f64,
) -> Complex64 {
    let p = [(pump.forward, 1.0), (pump.backward, -1.0)];
    let s = [(signal.forward, 1.0), (signal.backward, -1.0)];
    let i = [(idler.forward, 1.0), (idler.backward, -1.0)];
    let mut acc = Complex64::new(0.0, 0.0);
    for &(ap, sa) in &p {
        for &(as_, sb) in &s {
            for &(ai, sc) in &i {
                let amp = ap * as_.conj() * ai.conj();
                if amp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let delta = pump.kz * sa - signal.kz.conj() * sb - idler.kz.conj() * sc;
                acc += amp * phase_integral(delta, z_lo, z_hi);
            }
        }
    }
    acc
}

/// φ sampled on a rectangular grid, row-major with signal frequency along rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonAmplitude {
    pub omega_s: Vec<f64>,
    pub omega_i: Vec<f64>,
    /// `phi[i * omega_i.len() + j] = φ(omega_s[i], omega_i[j])`.
    pub phi: Vec<Complex64>,
    pub geometry: EmissionGeometry,
    pub pump: PumpPulse,
    pub normalized: bool,
    /// Factor applied since the raw (C = 1) evaluation.
    pub scale: f64,
}

impl TwoPhotonAmplitude {
    /// Wraps an explicit matrix (unnormalized, scale 1).
    pub fn from_matrix(
        omega_s: Vec<f64>,
        omega_i: Vec<f64>,
        phi: Vec<Complex64>,
        geometry: EmissionGeometry,
        pump: PumpPulse,
    ) -> Result<Self> {
        check_grid("omega_s", &omega_s)?;
        check_grid("omega_i", &omega_i)?;
        if phi.len() != omega_s.len() * omega_i.len() {
            return Err(Error::invalid("phi", "length differs from grid product"));
        }
        Ok(TwoPhotonAmplitude {
            omega_s,
            omega_i,
            phi,
            geometry,
            pump,
            normalized: false,
            scale: 1.0,
        })
    }

    pub fn rows(&self) -> usize {
        self.omega_s.len()
    }

    pub fn cols(&self) -> usize {
        self.omega_i.len()
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.phi[i * self.cols() + j]
    }

    /// Trapezoidal ∬|φ|² dω_s dω_i on the stored grids.
    pub fn norm_sqr_integral(&self) -> f64 {
        let ws = trapezoid_weights(&self.omega_s);
        let wi = trapezoid_weights(&self.omega_i);
        let mut acc = 0.0;
        for (i, a) in ws.iter().enumerate() {
            let row = &self.phi[i * self.cols()..(i + 1) * self.cols()];
            acc += a * row.iter().zip(&wi).map(|(p, b)| p.norm_sqr() * b).sum::<f64>();
        }
        acc
    }

    /// Left-hand side of the normalization identity, 4∬|φ|²/(ω_p⁰)².
    pub fn normalization_integral(&self) -> f64 {
        4.0 * self.norm_sqr_integral() / self.pump.omega0().powi(2)
    }

    /// Grid cell with the largest |φ|.
    pub fn peak_cell(&self) -> (usize, usize) {
        let k = self
            .phi
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (k, p)| {
                let v = p.norm_sqr();
                if v > best.1 {
                    (k, v)
                } else {
                    best
                }
            })
            .0;
        (k / self.cols(), k % self.cols())
    }

    /// Signal marginal ∫|φ|² dω_i at every signal grid point.
    pub fn signal_marginal(&self) -> Vec<f64> {
        let wi = trapezoid_weights(&self.omega_i);
        (0..self.rows())
            .map(|i| {
                self.phi[i * self.cols()..(i + 1) * self.cols()]
                    .iter()
                    .zip(&wi)
                    .map(|(p, w)| p.norm_sqr() * w)
                    .sum()
            })
            .collect()
    }

    /// Idler marginal ∫|φ|² dω_s at every idler grid point.
    pub fn idler_marginal(&self) -> Vec<f64> {
        let ws = trapezoid_weights(&self.omega_s);
        (0..self.cols())
            .map(|j| (0..self.rows()).map(|i| self.at(i, j).norm_sqr() * ws[i]).sum())
            .collect()
    }

    pub(crate) fn scaled_by(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for p in &mut out.phi {
            *p *= factor;
        }
        out.scale *= factor.norm();
        out
    }

    /// Writes the binary matrix to `path` and the JSON header next to it
    /// (same stem, `.json` extension).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = BufWriter::new(File::create(path)?);
        for p in &self.phi {
            w.write_all(&p.re.to_le_bytes())?;
            w.write_all(&p.im.to_le_bytes())?;
        }
        w.flush()?;
        let header = AmplitudeHeader {
            rows: self.rows(),
            cols: self.cols(),
            omega_s_grid: self.omega_s.clone(),
            omega_i_grid: self.omega_i.clone(),
            geometry: self.geometry,
            pump: self.pump,
            normalized: self.normalized,
            scale: self.scale,
        };
        let mut text = serde_json::to_string_pretty(&header)?;
        text.push('\n');
        fs::write(sidecar_path(path), text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let side = sidecar_path(path);
        let header: AmplitudeHeader = serde_json::from_str(&fs::read_to_string(&side)?)
            .map_err(|e| Error::format(side.display().to_string(), e.to_string()))?;
        if header.omega_s_grid.len() != header.rows || header.omega_i_grid.len() != header.cols {
            return Err(Error::format(side.display().to_string(), "grid lengths disagree with rows/cols"));
        }
        let mut bytes = Vec::new();
        File::open(path)?.read_to_end(&mut bytes)?;
        let expected = header.rows * header.cols * 16;
        if bytes.len() != expected {
            return Err(Error::format(
                path.display().to_string(),
                format!("{} bytes, expected {expected}", bytes.len()),
            ));
        }
        let phi = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        let mut a = TwoPhotonAmplitude::from_matrix(
            header.omega_s_grid,
            header.omega_i_grid,
            phi,
            header.geometry,
            header.pump,
        )
        .map_err(|e| Error::format(side.display().to_string(), e.to_string()))?;
        a.normalized = header.normalized;
        a.scale = header.scale;
        Ok(a)
    }

    /// Plotting export: `omega_s_rad_s,omega_i_rad_s,abs2,arg`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "omega_s_rad_s,omega_i_rad_s,abs2,arg")?;
        for (i, os) in self.omega_s.iter().enumerate() {
            for (j, oi) in self.omega_i.iter().enumerate() {
                let p = self.at(i, j);
                writeln!(w, "{},{},{},{}", os, oi, p.norm_sqr(), p.arg())?;
            }
        }
        Ok(())
    }
}

/// JSON sidecar of the binary amplitude container.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeHeader {
    pub rows: usize,
    pub cols: usize,
    pub omega_s_grid: Vec<f64>,
    pub omega_i_grid: Vec<f64>,
    pub geometry: EmissionGeometry,
    pub pump: PumpPulse,
    pub normalized: bool,
    pub scale: f64,
}

pub fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

fn check_grid(name: &'static str, g: &[f64]) -> Result<()> {
    if g.is_empty() {
        return Err(Error::invalid(name, "empty grid"));
    }
    if g.windows(2).any(|w| !(w[1] > w[0])) || g.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::invalid(name, "grid must be positive and strictly increasing"));
    }
    Ok(())
}

/// Trapezoidal quadrature weights of an arbitrary increasing grid. A single
/// point gets weight 1 so that one-point grids act as plain samples.
pub fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|k| {
            let left = if k > 0 { grid[k] - grid[k - 1] } else { 0.0 };
            let right = if k + 1 < n { grid[k + 1] - grid[k] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Uniform grid of `points` frequencies centred on `centre` with half-width `half_span`.
pub fn centred_grid(centre: f64, half_span: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![centre];
    }
    let step = 2.0 * half_span / (points - 1) as f64;
    (0..points).map(|k| centre - half_span + step * k as f64).collect()
}

/// Precomputed mode data of one nonlinear layer at one frequency.
#[derive(Clone, Copy)]
struct LayerMode {
    f: Complex64,
    b: Complex64,
    kz: Complex64,
    /// exp(i k d)
    e: Complex64,
}

impl LayerMode {
    fn new(field: &LayerField, d: f64) -> Self {
        LayerMode {
            f: field.forward,
            b: field.backward,
            kz: field.kz,
            e: (Complex64::i() * field.kz * d).exp(),
        }
    }
}

struct NonlinearLayers {
    index: Vec<usize>,
    thickness: Vec<f64>,
    chi2: Vec<f64>,
}

impl NonlinearLayers {
    fn of(s: &LayeredStructure) -> Self {
        let mut nl = NonlinearLayers {
            index: Vec::new(),
            thickness: Vec::new(),
            chi2: Vec::new(),
        };
        for (k, l) in s.layers().iter().enumerate() {
            let m = s.material_of(l);
            if m.is_nonlinear() {
                nl.index.push(k);
                nl.thickness.push(l.thickness_nm);
                nl.chi2.push(m.chi2);
            }
        }
        nl
    }

    fn modes(&self, m: &ModeFunction) -> Vec<LayerMode> {
        self.index
            .iter()
            .zip(&self.thickness)
            .map(|(&k, &d)| LayerMode::new(&m.layers[k], d))
            .collect()
    }
}

/// Σ_l χ_l ∫ E_p E_s* E_i* over the nonlinear layers, using precomputed
/// per-layer phase factors.
fn overlap_sum(nl: &NonlinearLayers, p: &[LayerMode], s: &[LayerMode], i: &[LayerMode]) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for l in 0..p.len() {
        let (p, s, i) = (&p[l], &s[l], &i[l]);
        let d = nl.thickness[l];
        // Pump waves: amplitude, exp(i s_a k_p d), s_a k_p.
        let pw = [(p.f, p.e, p.kz), (p.b, p.e.inv(), -p.kz)];
        // Conjugated signal/idler waves: amplitude*, exp(−i s_b k* d), −s_b k*.
        let sw = [(s.f.conj(), s.e.conj(), -s.kz.conj()), (s.b.conj(), s.e.conj().inv(), s.kz.conj())];
        let iw = [(i.f.conj(), i.e.conj(), -i.kz.conj()), (i.b.conj(), i.e.conj().inv(), i.kz.conj())];
        let mut acc = Complex64::new(0.0, 0.0);
        for (pa, pe, pk) in pw {
            for (sa, se, sk) in sw {
                let ps = pa * sa;
                let pse = pe * se;
                for (ia, ie, ik) in iw {
                    let delta = pk + sk + ik;
                    let amp = ps * ia;
                    let integral = if delta.norm() * d < 1e-8 {
                        Complex64::new(d, 0.0) * (Complex64::i() * delta * (0.5 * d)).exp()
                    } else {
                        (pse * ie - 1.0) / (Complex64::i() * delta)
                    };
                    acc += amp * integral;
                }
            }
        }
        total += acc * nl.chi2[l];
    }
    total
}

/// Raw (C = 1, unnormalized) two-photon amplitude of `s` on the given grids.
pub fn two_photon_amplitude(
    s: &LayeredStructure,
    pump: &PumpPulse,
    geometry: &EmissionGeometry,
    omega_s: &[f64],
    omega_i: &[f64],
) -> Result<TwoPhotonAmplitude> {
    pump.validate()?;
    geometry.validate()?;
    check_grid("omega_s", omega_s)?;
    check_grid("omega_i", omega_i)?;
    let nl = NonlinearLayers::of(s);
    if nl.index.is_empty() {
        return Err(Error::NoNonlinearMaterial);
    }
    let det = geometry.detection;
    let signal: Vec<Vec<LayerMode>> = omega_s
        .par_iter()
        .map(|&w| Ok(nl.modes(&mode_function(s, w, geometry.theta_s_deg, Role::Signal, det)?)))
        .collect::<Result<_>>()?;
    let fixed_idler: Option<Vec<Vec<LayerMode>>> = match geometry.idler_rule {
        IdlerAngleRule::Fixed => Some(
            omega_i
                .par_iter()
                .map(|&w| Ok(nl.modes(&mode_function(s, w, geometry.theta_i_deg, Role::Idler, det)?)))
                .collect::<Result<_>>()?,
        ),
        IdlerAngleRule::Strict => None,
    };

    // With a shared uniform step, ω_s + ω_i only depends on i + j.
    let shared_step = uniform_step(omega_s)
        .zip(uniform_step(omega_i))
        .filter(|(a, b)| (a - b).abs() <= 1e-9 * a.abs())
        .map(|(a, _)| a);
    let pump_by_sum: Option<Vec<Vec<LayerMode>>> = match shared_step {
        Some(h) => Some(
            (0..omega_s.len() + omega_i.len() - 1)
                .into_par_iter()
                .map(|k| {
                    let w = omega_s[0] + omega_i[0] + h * k as f64;
                    Ok(nl.modes(&mode_function(s, w, 0.0, Role::Pump, det)?))
                })
                .collect::<Result<_>>()?,
        ),
        None => None,
    };

    let cols = omega_i.len();
    let rows: Vec<Vec<Complex64>> = (0..omega_s.len())
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(cols);
            for j in 0..cols {
                let wp = omega_s[i] + omega_i[j];
                let ep = pump_spectrum(pump, wp);
                let pm_owned;
                let pm: &[LayerMode] = match &pump_by_sum {
                    Some(v) => &v[i + j],
                    None => {
                        pm_owned = nl.modes(&mode_function(s, wp, 0.0, Role::Pump, det)?);
                        &pm_owned
                    }
                };
                let im_owned;
                let im: &[LayerMode] = match &fixed_idler {
                    Some(v) => &v[j],
                    None => {
                        let th = geometry.idler_angle_deg(omega_s[i], omega_i[j])?;
                        im_owned = nl.modes(&mode_function(s, omega_i[j], th, Role::Idler, det)?);
                        &im_owned
                    }
                };
                row.push(ep * overlap_sum(&nl, pm, &signal[i], im));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    TwoPhotonAmplitude::from_matrix(
        omega_s.to_vec(),
        omega_i.to_vec(),
        rows.into_iter().flatten().collect(),
        *geometry,
        *pump,
    )
}

fn uniform_step(g: &[f64]) -> Option<f64> {
    if g.len() < 2 {
        return Some(0.0);
    }
    let h = (g[g.len() - 1] - g[0]) / (g.len() - 1) as f64;
    g.windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h)
        .then_some(h)
}

/// Rescales so that 4∬|φ|²/(ω_p⁰)² = 1.
pub fn normalize_amplitude(a: &TwoPhotonAmplitude) -> Result<TwoPhotonAmplitude> {
    let lhs = a.normalization_integral();
    if !(lhs > 0.0) || !lhs.is_finite() {
        return Err(Error::NullState);
    }
    let mut out = a.scaled_by(Complex64::new(1.0 / lhs.sqrt(), 0.0));
    out.normalized = true;
    Ok(out)
}

/// φ_ref = C·E_p(ω_s + ω_i)·L_eff: unit internal fields and no phase
/// mismatch, on the given grids.
pub fn reference_amplitude(
    reference: &ReferenceStructure,
    pump: &PumpPulse,
    geometry: &EmissionGeometry,
    omega_s: &[f64],
    omega_i: &[f64],
) -> Result<TwoPhotonAmplitude> {
    let phi = omega_s
        .iter()
        .flat_map(|ws| omega_i.iter().map(move |wi| (*ws, *wi)))
        .map(|(ws, wi)| pump_spectrum(pump, ws + wi) * reference.effective_length_nm)
        .collect();
    TwoPhotonAmplitude::from_matrix(omega_s.to_vec(), omega_i.to_vec(), phi, *geometry, *pump)
}

/// S_s^rel(ω_s): signal spectrum of `a` divided by that of the phase-matched
/// homogeneous reference, both at C = 1.
pub fn relative_spectrum(a: &TwoPhotonAmplitude, reference: &ReferenceStructure) -> Result<Vec<f64>> {
    let r = reference_amplitude(reference, &a.pump, &a.geometry, &a.omega_s, &a.omega_i)?;
    let num = a.signal_marginal();
    let den = r.signal_marginal();
    let s2 = a.scale * a.scale;
    num.iter()
        .zip(&den)
        .enumerate()
        .map(|(k, (n, d))| {
            if *d > 0.0 {
                Ok(n / s2 / d)
            } else {
                Err(Error::ZeroReference { index: k })
            }
        })
        .collect()
}

/// ∬|φ|² at the raw (C = 1) scale. Relative units only.
pub fn relative_pair_rate(a: &TwoPhotonAmplitude) -> f64 {
    a.norm_sqr_integral() / (a.scale * a.scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::Material;

    #[test]
    fn pump_peak_is_one() {
        let p = PumpPulse::standard();
        assert_eq!(pump_spectrum(&p, p.omega0()), Complex64::new(1.0, 0.0));
        assert!(pump_spectrum(&p, p.omega0() * 1.01).norm() < 1.0);
    }

    #[test]
    fn pump_spectral_fwhm() {
        // 0.441 / 250 fs in ordinary frequency.
        let p = PumpPulse::standard();
        let half = 0.5 * p.spectral_intensity_fwhm();
        let i = pump_spectrum(&p, p.omega0() + half).norm_sqr();
        assert!((i - 0.5).abs() < 1e-12);
        let nu = p.spectral_intensity_fwhm() / (2.0 * std::f64::consts::PI);
        assert!((nu - 1.765e12).abs() < 0.01e12, "{nu}");
    }

    #[test]
    fn overlap_phase_matched_limit() {
        let f = LayerField {
            forward: Complex64::new(1.0, 0.0),
            backward: Complex64::new(0.0, 0.0),
            kz: Complex64::new(0.0, 0.0),
        };
        let o = layer_overlap(&f, &f, &f, 2.0, 7.5);
        assert!((o - Complex64::new(5.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn overlap_full_oscillation_cancels() {
        let w = 3.0;
        let k = 2.0 * std::f64::consts::PI / w;
        let p = LayerField {
            forward: Complex64::new(1.0, 0.0),
            backward: Complex64::new(0.0, 0.0),
            kz: Complex64::new(k, 0.0),
        };
        let zero = LayerField {
            kz: Complex64::new(0.0, 0.0),
            ..p
        };
        assert!(layer_overlap(&p, &zero, &zero, 0.0, w).norm() < 1e-15);
    }

    #[test]
    fn empty_structure_modes() {
        let s = LayeredStructure::empty();
        for role in [Role::Pump, Role::Signal, Role::Idler] {
            let m = mode_function(&s, 1.2e15, 10.0, role, Side::Rear).unwrap();
            assert!(m.layers.is_empty());
            for e in m.exterior {
                assert!((e.forward - Complex64::new(1.0, 0.0)).norm() < 1e-15);
                assert!(e.backward.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn linear_structure_has_no_amplitude() {
        let si = Material::silica();
        let s = LayeredStructure::from_pairs(&[(&si, 200.0)]).unwrap();
        let g = [1.2e15, 1.21e15];
        let e = two_photon_amplitude(&s, &PumpPulse::standard(), &EmissionGeometry::degenerate(10.0), &g, &g);
        assert!(matches!(e, Err(Error::NoNonlinearMaterial)));
    }

    #[test]
    fn strict_idler_angle_on_diagonal() {
        let mut g = EmissionGeometry::degenerate(10.0);
        g.idler_rule = IdlerAngleRule::Strict;
        assert_eq!(g.idler_angle_deg(1.2e15, 1.2e15).unwrap(), 10.0);
        let th = g.idler_angle_deg(1.2e15, 1.25e15).unwrap();
        let lhs = 1.2e15 * 10f64.to_radians().sin();
        let rhs = 1.25e15 * th.to_radians().sin();
        assert!((lhs - rhs).abs() < 1e-12 * lhs);
    }

    #[test]
    fn normalize_rejects_null() {
        let g = vec![1.0, 2.0];
        let a = TwoPhotonAmplitude::from_matrix(
            g.clone(),
            g,
            vec![Complex64::new(0.0, 0.0); 4],
            EmissionGeometry::degenerate(10.0),
            PumpPulse::standard(),
        )
        .unwrap();
        assert_eq!(normalize_amplitude(&a).unwrap_err().to_string(), "cannot normalize null state");
    }

    #[test]
    fn trapezoid_weights_integrate_linear_exactly() {
        let g = [1.0, 1.5, 3.0, 3.25];
        let w = trapezoid_weights(&g);
        let integral: f64 = g.iter().zip(&w).map(|(x, w)| x * w).sum();
        assert!((integral - (3.25f64.powi(2) - 1.0) / 2.0).abs() < 1e-12);
    }
}
