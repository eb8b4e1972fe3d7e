//! Material registry: refractive-index dispersion and second-order
//! nonlinearity of the constituent media.
//!
//! Only the index seen by s-polarised light matters here. LiNbO₃ is cut so
//! that its optical axis lies in the layer planes along the field
//! polarisation, which makes that the extraordinary index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shortest wavelength any model accepts (nm).
pub const QUERY_MIN_NM: f64 = 1.0;
/// Longest wavelength any model accepts (nm).
pub const QUERY_MAX_NM: f64 = 10_000.0;

pub const VACUUM: &str = "vacuum";
pub const LITHIUM_NIOBATE: &str = "LiNbO3";
pub const SILICA: &str = "SiO2";

/// Refractive-index model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Dispersion {
    /// Wavelength-independent index, valid over the whole query range.
    Constant { index: f64 },
    /// `n² = 1 + Σ bᵢ λ² / (λ² − cᵢ)` with λ in µm and `cᵢ` in µm².
    Sellmeier {
        b: Vec<f64>,
        c: Vec<f64>,
        min_nm: f64,
        max_nm: f64,
    },
}

impl Dispersion {
    fn window_nm(&self) -> (f64, f64) {
        match self {
            Dispersion::Constant { .. } => (QUERY_MIN_NM, QUERY_MAX_NM),
            Dispersion::Sellmeier { min_nm, max_nm, .. } => (*min_nm, *max_nm),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub name: String,
    pub dispersion: Dispersion,
    /// Effective χ⁽²⁾ relative to LiNbO₃ (= 1); zero for linear media.
    pub chi2: f64,
}

impl Material {
    pub fn constant(name: impl Into<String>, index: f64, chi2: f64) -> Self {
        Material {
            name: name.into(),
            dispersion: Dispersion::Constant { index },
            chi2,
        }
    }

    pub fn vacuum() -> Self {
        Material::constant(VACUUM, 1.0, 0.0)
    }

    /// Congruent LiNbO₃, extraordinary index (Zelmon, Small & Jundt 1997,
    /// 0.4–5 µm).
    pub fn lithium_niobate() -> Self {
        Material {
            name: LITHIUM_NIOBATE.into(),
            dispersion: Dispersion::Sellmeier {
                b: vec![2.9804, 0.5981, 8.9543],
                c: vec![0.02047, 0.0666, 416.08],
                min_nm: 400.0,
                max_nm: 5000.0,
            },
            chi2: 1.0,
        }
    }

    /// Fused silica (Malitson 1965, 0.21–3.71 µm).
    pub fn silica() -> Self {
        Material {
            name: SILICA.into(),
            dispersion: Dispersion::Sellmeier {
                b: vec![0.696_166_3, 0.407_942_6, 0.897_479_4],
                c: vec![
                    0.068_404_3 * 0.068_404_3,
                    0.116_241_4 * 0.116_241_4,
                    9.896_161 * 9.896_161,
                ],
                min_nm: 210.0,
                max_nm: 3710.0,
            },
            chi2: 0.0,
        }
    }

    pub fn is_nonlinear(&self) -> bool {
        self.chi2 > 0.0
    }

    /// Refractive index at vacuum wavelength `wavelength_nm`.
    pub fn refractive_index(&self, wavelength_nm: f64) -> Result<f64> {
        let (lo, hi) = self.dispersion.window_nm();
        let lo = lo.max(QUERY_MIN_NM);
        let hi = hi.min(QUERY_MAX_NM);
        if !(wavelength_nm >= lo && wavelength_nm <= hi) {
            return Err(Error::OutsideDispersionWindow {
                material: self.name.clone(),
                wavelength_nm,
                lo_nm: lo,
                hi_nm: hi,
            });
        }
        Ok(match &self.dispersion {
            Dispersion::Constant { index } => *index,
            Dispersion::Sellmeier { b, c, .. } => {
                let l2 = (wavelength_nm * 1e-3).powi(2);
                let n2 = 1.0
                    + b.iter()
                        .zip(c)
                        .map(|(b, c)| b * l2 / (l2 - c))
                        .sum::<f64>();
                n2.sqrt()
            }
        })
    }

    /// Constant-index copy of this material sampled at `wavelength_nm`.
    pub fn constant_at(&self, wavelength_nm: f64) -> Result<Self> {
        Ok(Material {
            name: self.name.clone(),
            dispersion: Dispersion::Constant {
                index: self.refractive_index(wavelength_nm)?,
            },
            chi2: self.chi2,
        })
    }

    /// Checks the type invariants (index ≥ 1 over the window, χ² ≥ 0).
    pub fn validate(&self) -> Result<()> {
        if !(self.chi2 >= 0.0) {
            return Err(Error::invalid("chi2", format!("{} has negative chi2", self.name)));
        }
        match &self.dispersion {
            Dispersion::Constant { index } => {
                if !(*index >= 1.0) {
                    return Err(Error::invalid(
                        "dispersion",
                        format!("{}: constant index {index} < 1", self.name),
                    ));
                }
            }
            Dispersion::Sellmeier { b, c, min_nm, max_nm } => {
                if b.len() != c.len() || b.is_empty() || !(min_nm < max_nm) {
                    return Err(Error::invalid(
                        "dispersion",
                        format!("{}: malformed Sellmeier coefficients", self.name),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// The immutable built-in catalogue.
#[derive(Debug, Clone)]
pub struct Registry {
    materials: Vec<Material>,
}

impl Registry {
    pub fn get(&self, name: &str) -> Option<&Material> {
        self.materials.iter().find(|m| m.name == name)
    }

    pub fn len(&self) -> usize {
        self.materials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.materials.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Material> {
        self.materials.iter()
    }
}

impl std::ops::Index<&str> for Registry {
    type Output = Material;

    fn index(&self, name: &str) -> &Material {
        self.get(name)
            .unwrap_or_else(|| panic!("no built-in material named {name}"))
    }
}

/// Vacuum, LiNbO₃ and SiO₂ with their Sellmeier models.
pub fn builtin_materials() -> Registry {
    Registry {
        materials: vec![
            Material::vacuum(),
            Material::lithium_niobate(),
            Material::silica(),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Values of the published fits evaluated independently (double precision)
    // at 1550 nm and 775 nm.
    const LN_1550: f64 = 2.137_559_649_785_556_5;
    const SIO2_1550: f64 = 1.444_023_621_703_261;
    const LN_775: f64 = 2.178_372_318_044_694;
    const SIO2_775: f64 = 1.453_762_476_017_629_3;

    #[test]
    fn vacuum_is_one() {
        assert_eq!(Material::vacuum().refractive_index(1550.0).unwrap(), 1.0);
    }

    #[test]
    fn sellmeier_matches_reference_values() {
        let r = builtin_materials();
        let ln = &r[LITHIUM_NIOBATE];
        let si = &r[SILICA];
        assert!((ln.refractive_index(1550.0).unwrap() - LN_1550).abs() < 1e-12);
        assert!((si.refractive_index(1550.0).unwrap() - SIO2_1550).abs() < 1e-12);
        assert!((ln.refractive_index(775.0).unwrap() - LN_775).abs() < 1e-12);
        assert!((si.refractive_index(775.0).unwrap() - SIO2_775).abs() < 1e-12);
    }

    #[test]
    fn normal_dispersion() {
        for m in [Material::lithium_niobate(), Material::silica()] {
            assert!(m.refractive_index(775.0).unwrap() >= m.refractive_index(1550.0).unwrap());
        }
    }

    #[test]
    fn constant_mode_agrees_at_calibration_wavelength() {
        for m in [Material::lithium_niobate(), Material::silica()] {
            let c = m.constant_at(1312.5).unwrap();
            let d = c.refractive_index(1312.5).unwrap() - m.refractive_index(1312.5).unwrap();
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn registry_contents() {
        let r = builtin_materials();
        assert_eq!(r.len(), 3);
        assert_eq!(r[VACUUM].chi2, 0.0);
        assert_eq!(r[SILICA].chi2, 0.0);
        assert!(r[LITHIUM_NIOBATE].chi2 > 0.0);
        assert!(r.get("GaAs").is_none());
        for m in r.iter() {
            m.validate().unwrap();
        }
    }

    #[test]
    fn outside_window_is_rejected() {
        let err = Material::lithium_niobate().refractive_index(300.0).unwrap_err();
        assert!(err.to_string().contains("400"), "{err}");
        assert!(Material::vacuum().refractive_index(0.5).is_err());
        assert!(Material::vacuum().refractive_index(20_000.0).is_err());
    }

    #[test]
    fn index_at_least_one_and_continuous_over_window() {
        for m in [Material::lithium_niobate(), Material::silica()] {
            let mut prev = m.refractive_index(450.0).unwrap();
            let mut nm = 451.0;
            while nm < 3500.0 {
                let n = m.refractive_index(nm).unwrap();
                assert!(n >= 1.0);
                assert!((n - prev).abs() < 1e-3, "{} jumps at {nm}", m.name);
                prev = n;
                nm += 1.0;
            }
        }
    }
}
