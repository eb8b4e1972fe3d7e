//! Transfer-matrix optics for s-polarised plane waves.
//!
//! The field in layer `j` is written in the layer's local coordinate
//! `u = z − z_j` (distance from its left boundary) as
//!
//! ```text
//! E(u) = A_F exp(i k_z u) + A_B exp(−i k_z u)
//! ```
//!
//! E and dE/dz are continuous across every boundary. The solver starts from
//! a pure outgoing wave on the exit side and sweeps backwards through the
//! stack, rescaling the amplitude pair whenever it grows past `RESCALE_AT`
//! and tracking the removed factor as a logarithm. Deep band gaps of a few
//! hundred layers attenuate by e^±hundreds, which this keeps finite.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::Material;
use crate::seed::derive;
use crate::structure::{generate_structure, LayeredStructure, StructureParams};
use crate::units::{vacuum_wavenumber, wavelength_nm_from_omega};

const RESCALE_AT: f64 = 1e100;

/// Side of the stack the unit-amplitude wave comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// From z < 0, travelling towards +z.
    #[default]
    Front,
    /// From z > L, travelling towards −z.
    Rear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidenceGeometry {
    /// External angle in vacuum, degrees.
    pub theta_deg: f64,
    /// Angular frequency, rad/s.
    pub omega: f64,
    pub side: Side,
}

impl IncidenceGeometry {
    pub fn new(omega: f64, theta_deg: f64, side: Side) -> Result<Self> {
        if !(0.0..90.0).contains(&theta_deg) {
            return Err(Error::invalid("theta_deg", format!("{theta_deg} outside [0, 90)")));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::invalid("omega", format!("{omega} is not positive")));
        }
        Ok(IncidenceGeometry {
            theta_deg,
            omega,
            side,
        })
    }

    pub fn front(omega: f64, theta_deg: f64) -> Result<Self> {
        Self::new(omega, theta_deg, Side::Front)
    }

    pub fn rear(omega: f64, theta_deg: f64) -> Result<Self> {
        Self::new(omega, theta_deg, Side::Rear)
    }

    fn sin_theta(&self) -> f64 {
        self.theta_deg.to_radians().sin()
    }
}

/// Forward/backward amplitudes and longitudinal wavevector in one region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerField {
    pub forward: Complex64,
    pub backward: Complex64,
    /// rad/nm
    pub kz: Complex64,
}

impl LayerField {
    /// Field value at local coordinate `u` (nm).
    pub fn field_at(&self, u: f64) -> Complex64 {
        let ph = Complex64::i() * self.kz * u;
        self.forward * ph.exp() + self.backward * (-ph).exp()
    }

    /// dE/dz at local coordinate `u`.
    pub fn derivative_at(&self, u: f64) -> Complex64 {
        let ph = Complex64::i() * self.kz * u;
        Complex64::i() * self.kz * (self.forward * ph.exp() - self.backward * (-ph).exp())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSolution {
    pub r: Complex64,
    pub t: Complex64,
    /// ln |t|², accurate even where |t|² underflows.
    pub ln_transmittance: f64,
    /// Amplitudes in each layer, original layer order, local coordinates.
    pub per_layer: Vec<LayerField>,
    /// Front half-space (referenced to z = 0) and rear half-space
    /// (referenced to z = L).
    pub exterior: [LayerField; 2],
    pub geometry: IncidenceGeometry,
}

impl ScatteringSolution {
    pub fn transmittance(&self) -> f64 {
        self.t.norm_sqr()
    }

    pub fn reflectance(&self) -> f64 {
        self.r.norm_sqr()
    }
}

/// Reflection and transmission only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmission {
    pub r: Complex64,
    pub t: Complex64,
    pub ln_transmittance: f64,
}

impl Transmission {
    pub fn transmittance(&self) -> f64 {
        self.t.norm_sqr()
    }
}

/// Longitudinal wavevector `(ω/c)·sqrt(n² − sin²θ)` in rad/nm, on the branch
/// with non-negative real and imaginary parts.
pub fn layer_kz(material: &Material, omega: f64, theta_deg: f64) -> Result<Complex64> {
    let n = material.refractive_index(wavelength_nm_from_omega(omega))?;
    let s = theta_deg.to_radians().sin();
    Ok(kz_from_index(n, omega, s))
}

fn kz_from_index(n: f64, omega: f64, sin_theta: f64) -> Complex64 {
    let k = Complex64::new(n * n - sin_theta * sin_theta, 0.0).sqrt() * vacuum_wavenumber(omega);
    Complex64::new(k.re.abs(), k.im.abs())
}

/// k_z of every region: front vacuum, the layers, rear vacuum.
fn region_kz(s: &LayeredStructure, omega: f64, sin_theta: f64) -> Result<Vec<Complex64>> {
    let wl = wavelength_nm_from_omega(omega);
    let per_material: Vec<Complex64> = s
        .materials()
        .iter()
        .map(|m| Ok(kz_from_index(m.refractive_index(wl)?, omega, sin_theta)))
        .collect::<Result<_>>()?;
    let vac = kz_from_index(1.0, omega, sin_theta);
    let mut kz = Vec::with_capacity(s.len() + 2);
    kz.push(vac);
    kz.extend(s.layers().iter().map(|l| per_material[l.material]));
    kz.push(vac);
    Ok(kz)
}

struct Sweep {
    /// Scaled amplitude pairs for regions 0..=N (rear region omitted).
    scaled: Vec<[Complex64; 2]>,
    /// Cumulative ln of the removed scale at each stored region.
    log_scale: Vec<f64>,
    entrance: [Complex64; 2],
    entrance_log: f64,
}

/// Backward sweep from `(1, 0)` in the rear half-space. Regions are indexed
/// 0 (front vacuum) ..= N+1 (rear vacuum); `thickness[j-1]` belongs to region j.
fn sweep(kz: &[Complex64], thickness: &[f64], store: bool) -> Sweep {
    let n = thickness.len();
    let mut v = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let mut log = 0.0;
    let mut scaled = if store { vec![[Complex64::default(); 2]; n + 1] } else { Vec::new() };
    let mut log_scale = if store { vec![0.0; n + 1] } else { Vec::new() };
    for j in (0..=n).rev() {
        let q = kz[j + 1] / kz[j];
        let plus = (1.0 + q) * 0.5;
        let minus = (1.0 - q) * 0.5;
        let mut a = plus * v[0] + minus * v[1];
        let mut b = minus * v[0] + plus * v[1];
        if j >= 1 {
            let ph = (Complex64::i() * kz[j] * thickness[j - 1]).exp();
            a /= ph;
            b *= ph;
        }
        let m = a.norm().max(b.norm());
        if m > RESCALE_AT {
            a /= m;
            b /= m;
            log += m.ln();
        }
        v = [a, b];
        if store {
            scaled[j] = v;
            log_scale[j] = log;
        }
    }
    Sweep {
        scaled,
        log_scale,
        entrance: v,
        entrance_log: log,
    }
}

fn thicknesses(s: &LayeredStructure) -> Vec<f64> {
    s.layers().iter().map(|l| l.thickness_nm).collect()
}

fn front_transmission(kz: &[Complex64], d: &[f64]) -> Transmission {
    let sw = sweep(kz, d, false);
    let [a0, b0] = sw.entrance;
    Transmission {
        r: b0 / a0,
        t: Complex64::from_polar((-sw.entrance_log).exp(), 0.0) / a0,
        ln_transmittance: -2.0 * (sw.entrance_log + a0.norm().ln()),
    }
}

/// r and t without internal amplitudes. Faster than [`scattering_solution`].
pub fn transmission(s: &LayeredStructure, g: &IncidenceGeometry) -> Result<Transmission> {
    let mut kz = region_kz(s, g.omega, g.sin_theta())?;
    let mut d = thicknesses(s);
    if g.side == Side::Rear {
        kz.reverse();
        d.reverse();
    }
    Ok(front_transmission(&kz, &d))
}

/// Full solution for a unit-amplitude wave incident from `g.side`.
pub fn scattering_solution(s: &LayeredStructure, g: &IncidenceGeometry) -> Result<ScatteringSolution> {
    let mut kz = region_kz(s, g.omega, g.sin_theta())?;
    let mut d = thicknesses(s);
    let rear = g.side == Side::Rear;
    if rear {
        kz.reverse();
        d.reverse();
    }
    let n = d.len();
    let sw = sweep(&kz, &d, true);
    let [a0, b0] = sw.entrance;
    let norm = |j: usize| -> [Complex64; 2] {
        let f = (sw.log_scale[j] - sw.entrance_log).exp();
        [sw.scaled[j][0] * f / a0, sw.scaled[j][1] * f / a0]
    };
    let t = Complex64::from_polar((-sw.entrance_log).exp(), 0.0) / a0;
    let r = b0 / a0;
    let ln_transmittance = -2.0 * (sw.entrance_log + a0.norm().ln());

    // Amplitudes in solve order (mirrored when rear).
    let solved: Vec<LayerField> = (1..=n)
        .map(|j| {
            let [f, b] = norm(j);
            LayerField {
                forward: f,
                backward: b,
                kz: kz[j],
            }
        })
        .collect();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let vac = kz[0];
    let (per_layer, exterior) = if rear {
        // Mirror back: u' = d − u swaps directions and moves the phase origin.
        let per_layer = solved
            .iter()
            .rev()
            .zip(s.layers())
            .map(|(m, l)| {
                let ph = (Complex64::i() * m.kz * l.thickness_nm).exp();
                LayerField {
                    forward: m.backward / ph,
                    backward: m.forward * ph,
                    kz: m.kz,
                }
            })
            .collect();
        let front = LayerField {
            forward: zero,
            backward: t,
            kz: vac,
        };
        let rear_region = LayerField {
            forward: r,
            backward: one,
            kz: vac,
        };
        (per_layer, [front, rear_region])
    } else {
        let front = LayerField {
            forward: one,
            backward: r,
            kz: vac,
        };
        let rear_region = LayerField {
            forward: t,
            backward: zero,
            kz: vac,
        };
        (solved, [front, rear_region])
    };
    Ok(ScatteringSolution {
        r,
        t,
        ln_transmittance,
        per_layer,
        exterior,
        geometry: *g,
    })
}

/// Controls adaptive sampling of transmission spectra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinementPolicy {
    /// Points of the initial uniform grid.
    pub base_points: usize,
    /// Bisect when |ΔT| between neighbours exceeds this.
    pub max_delta_t: f64,
    /// Bisect when the transmission phase turns by more than this (rad)
    /// between neighbours. Catches resonances hidden between base points.
    pub max_delta_phase: f64,
    /// Smallest allowed step as a fraction of ω.
    pub min_step_rel: f64,
}

impl Default for RefinementPolicy {
    fn default() -> Self {
        RefinementPolicy {
            base_points: 2001,
            max_delta_t: 0.01,
            max_delta_phase: 0.3,
            min_step_rel: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionSpectrum {
    /// Strictly increasing, rad/s.
    pub omega: Vec<f64>,
    pub transmittance: Vec<f64>,
    pub theta_deg: f64,
    /// Bisection depth that created each sample (0 = base grid).
    pub depth: Vec<u32>,
    /// Policy used, `None` for plain uniform sampling.
    pub refinement: Option<RefinementPolicy>,
}

impl TransmissionSpectrum {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn is_refined(&self) -> bool {
        self.refinement.is_some()
    }

    /// CSV with columns `omega_rad_s,wavelength_nm,T`, ascending ω.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "omega_rad_s,wavelength_nm,T")?;
        for (o, t) in self.omega.iter().zip(&self.transmittance) {
            writeln!(w, "{},{},{}", o, wavelength_nm_from_omega(*o), t)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct Sample {
    omega: f64,
    t: f64,
    phase: Complex64,
    depth: u32,
}

/// Adaptive sampling of a response `f(ω) -> (T, complex amplitude)` on
/// `[omega_lo, omega_hi]`. Exposed for synthetic responses in tests.
pub fn adaptive_sample<F>(
    f: F,
    omega_lo: f64,
    omega_hi: f64,
    theta_deg: f64,
    policy: &RefinementPolicy,
) -> Result<TransmissionSpectrum>
where
    F: Fn(f64) -> Result<(f64, Complex64)> + Sync,
{
    if !(omega_lo > 0.0 && omega_hi > omega_lo) {
        return Err(Error::invalid("omega_window", "need 0 < lo < hi"));
    }
    if policy.base_points < 2 {
        return Err(Error::invalid("base_points", "need at least 2"));
    }
    let nb = policy.base_points;
    let step = (omega_hi - omega_lo) / (nb - 1) as f64;
    let eval = |omega: f64, depth: u32| -> Result<Sample> {
        let (t, amp) = f(omega)?;
        let phase = if amp.norm() > 0.0 { amp / amp.norm() } else { Complex64::new(1.0, 0.0) };
        Ok(Sample {
            omega,
            t,
            phase,
            depth,
        })
    };
    let base: Vec<Sample> = (0..nb)
        .into_par_iter()
        .map(|i| {
            let omega = if i + 1 == nb { omega_hi } else { omega_lo + step * i as f64 };
            eval(omega, 0)
        })
        .collect::<Result<_>>()?;

    fn refine<G: Fn(f64, u32) -> Result<Sample>>(
        a: Sample,
        b: Sample,
        policy: &RefinementPolicy,
        eval: &G,
        out: &mut Vec<Sample>,
    ) -> Result<()> {
        let dt = (b.t - a.t).abs();
        let dphi = (b.phase * a.phase.conj()).arg().abs();
        let wants = dt > policy.max_delta_t || dphi > policy.max_delta_phase;
        let half = 0.5 * (b.omega - a.omega);
        if wants && half >= policy.min_step_rel * a.omega {
            let m = eval(a.omega + half, a.depth.max(b.depth) + 1)?;
            refine(a, m, policy, eval, out)?;
            out.push(m);
            refine(m, b, policy, eval, out)?;
        }
        Ok(())
    }

    let pieces: Vec<Vec<Sample>> = (0..nb - 1)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            refine(base[i], base[i + 1], policy, &eval, &mut out)?;
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let total = nb + pieces.iter().map(Vec::len).sum::<usize>();
    let mut omega = Vec::with_capacity(total);
    let mut transmittance = Vec::with_capacity(total);
    let mut depth = Vec::with_capacity(total);
    let mut push = |s: &Sample| {
        omega.push(s.omega);
        transmittance.push(s.t);
        depth.push(s.depth);
    };
    for (i, b) in base.iter().enumerate() {
        push(b);
        if let Some(p) = pieces.get(i) {
            p.iter().for_each(&mut push);
        }
    }
    Ok(TransmissionSpectrum {
        omega,
        transmittance,
        theta_deg,
        depth,
        refinement: Some(*policy),
    })
}

/// Adaptively sampled transmittance of `s` at angle `theta_deg` over
/// `[omega_lo, omega_hi]`.
pub fn transmission_spectrum(
    s: &LayeredStructure,
    theta_deg: f64,
    omega_lo: f64,
    omega_hi: f64,
    policy: &RefinementPolicy,
) -> Result<TransmissionSpectrum> {
    // Validate the window against every material's dispersion first.
    for omega in [omega_lo, omega_hi] {
        IncidenceGeometry::front(omega, theta_deg)?;
        for m in s.materials() {
            m.refractive_index(wavelength_nm_from_omega(omega))?;
        }
    }
    let d = thicknesses(s);
    let sin = theta_deg.to_radians().sin();
    adaptive_sample(
        |omega| {
            let kz = region_kz(s, omega, sin)?;
            let tr = front_transmission(&kz, &d);
            Ok((tr.transmittance(), tr.t))
        },
        omega_lo,
        omega_hi,
        theta_deg,
        policy,
    )
}

/// Uniformly sampled transmittance (no refinement metadata).
pub fn uniform_spectrum(
    s: &LayeredStructure,
    theta_deg: f64,
    omega_lo: f64,
    omega_hi: f64,
    points: usize,
) -> Result<TransmissionSpectrum> {
    if points < 2 {
        return Err(Error::invalid("points", "need at least 2"));
    }
    let step = (omega_hi - omega_lo) / (points - 1) as f64;
    let omega: Vec<f64> = (0..points).map(|i| omega_lo + step * i as f64).collect();
    let transmittance = omega
        .par_iter()
        .map(|&o| Ok(transmission(s, &IncidenceGeometry::front(o, theta_deg)?)?.transmittance()))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransmissionSpectrum {
        depth: vec![0; points],
        omega,
        transmittance,
        theta_deg,
        refinement: None,
    })
}

/// Disorder ensemble used to estimate a localization length: structures
/// drawn from `base` with each of `layer_counts`, `n_realizations` each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationSpec {
    pub base: StructureParams,
    pub layer_counts: Vec<usize>,
    pub n_realizations: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationEstimate {
    /// Amplitude decay length ξ (nm), defined by ⟨ln T⟩ = const − 2L/ξ.
    /// `f64::INFINITY` when transmission does not decay with length.
    pub xi_nm: f64,
    /// Delta-method standard error of ξ.
    pub std_error_nm: f64,
    /// 95 % interval mapped from the slope's interval.
    pub ci95_nm: (f64, f64),
    /// Fitted slope of ⟨−ln T⟩ against length (1/nm) and its standard error.
    pub slope: f64,
    pub slope_std_error: f64,
    pub samples: usize,
}

impl LocalizationEstimate {
    pub fn is_delocalized(&self) -> bool {
        self.xi_nm.is_infinite()
    }
}

/// Localization length from the slope of ⟨−ln T⟩ versus total length.
pub fn localization_length(
    spec: &LocalizationSpec,
    omega: f64,
    theta_deg: f64,
) -> Result<LocalizationEstimate> {
    if spec.n_realizations < 10 {
        return Err(Error::invalid("n_realizations", "need at least 10"));
    }
    if spec.layer_counts.len() < 2 {
        return Err(Error::invalid("layer_counts", "need at least two lengths"));
    }
    let g = IncidenceGeometry::front(omega, theta_deg)?;
    let jobs: Vec<(usize, usize)> = (0..spec.layer_counts.len())
        .flat_map(|m| (0..spec.n_realizations).map(move |r| (m, r)))
        .collect();
    let points: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(m, r)| {
            let mut p = spec.base.clone();
            p.n_layers = spec.layer_counts[m];
            p.seed = derive(spec.master_seed, &[m as u64, r as u64]);
            let s = generate_structure(&p)?;
            let tr = transmission(&s, &g)?;
            Ok((s.total_length_nm(), -tr.ln_transmittance))
        })
        .collect::<Result<_>>()?;
    Ok(fit_decay(&points))
}

fn fit_decay(points: &[(f64, f64)]) -> LocalizationEstimate {
    let n = points.len() as f64;
    let infinite = |slope: f64, se: f64| LocalizationEstimate {
        xi_nm: f64::INFINITY,
        std_error_nm: f64::INFINITY,
        ci95_nm: (f64::INFINITY, f64::INFINITY),
        slope,
        slope_std_error: se,
        samples: points.len(),
    };
    if points.iter().all(|p| p.1.abs() < 1e-12) {
        return infinite(0.0, 0.0);
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return infinite(0.0, f64::INFINITY);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let se = if points.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    if slope <= 0.0 {
        let hi_slope = slope + 1.96 * se;
        let mut est = infinite(slope, se);
        if hi_slope > 0.0 {
            est.ci95_nm = (2.0 / hi_slope, f64::INFINITY);
        }
        return est;
    }
    let xi = 2.0 / slope;
    let lo_slope = slope - 1.96 * se;
    let hi_slope = slope + 1.96 * se;
    LocalizationEstimate {
        xi_nm: xi,
        std_error_nm: 2.0 * se / (slope * slope),
        ci95_nm: (
            2.0 / hi_slope,
            if lo_slope > 0.0 { 2.0 / lo_slope } else { f64::INFINITY },
        ),
        slope,
        slope_std_error: se,
        samples: points.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::Material;
    use crate::units::omega_from_wavelength_nm;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn kz_vacuum_and_grazing() {
        let w = omega_from_wavelength_nm(1550.0);
        let k0 = vacuum_wavenumber(w);
        let v = Material::vacuum();
        assert!((layer_kz(&v, w, 0.0).unwrap() - c(k0)).norm() < 1e-15);
        let g = layer_kz(&v, w, 89.999).unwrap();
        assert!(g.norm() < 1e-4 * k0);
        let si = Material::constant("SiO2", 1.44, 0.0);
        let s10 = 10f64.to_radians().sin();
        let expect = k0 * (1.44f64 * 1.44 - s10 * s10).sqrt();
        assert!((layer_kz(&si, w, 10.0).unwrap() - c(expect)).norm() < 1e-15);
    }

    #[test]
    fn evanescent_branch_has_positive_imaginary_part() {
        let k = kz_from_index(0.5, 1e15, 0.9);
        assert!(k.im > 0.0 && k.re.abs() < 1e-20);
    }

    #[test]
    fn empty_structure_is_transparent() {
        let s = LayeredStructure::empty();
        let g = IncidenceGeometry::front(1.2e15, 20.0).unwrap();
        let sol = scattering_solution(&s, &g).unwrap();
        assert!(sol.r.norm() < 1e-15);
        assert!((sol.t - c(1.0)).norm() < 1e-15);
        assert!(sol.per_layer.is_empty());
        let sp = transmission_spectrum(&s, 0.0, 1.1e15, 1.3e15, &RefinementPolicy::default()).unwrap();
        assert!(sp.transmittance.iter().all(|&t| (t - 1.0).abs() < 1e-15));
        assert_eq!(sp.len(), RefinementPolicy::default().base_points);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(IncidenceGeometry::front(1e15, 90.0).is_err());
        assert!(IncidenceGeometry::front(1e15, -1.0).is_err());
        assert!(IncidenceGeometry::front(0.0, 10.0).is_err());
    }

    #[test]
    fn window_outside_dispersion_is_rejected() {
        let ln = Material::lithium_niobate();
        let s = LayeredStructure::from_pairs(&[(&ln, 180.0)]).unwrap();
        let lo = omega_from_wavelength_nm(6000.0);
        let hi = omega_from_wavelength_nm(5500.0);
        let e = transmission_spectrum(&s, 0.0, lo, hi, &RefinementPolicy::default()).unwrap_err();
        assert!(matches!(e, Error::OutsideDispersionWindow { .. }));
    }

    #[test]
    fn decay_fit_on_exact_line() {
        let pts: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64 * 100.0, 0.3 + 0.02 * i as f64 * 100.0)).collect();
        let e = fit_decay(&pts);
        assert!((e.xi_nm - 100.0).abs() < 1e-9);
        assert!(e.std_error_nm < 1e-6);
    }
}
