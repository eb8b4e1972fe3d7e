//! Random layered structures.
//!
//! A structure is a stack of `n_layers` elementary layers between two vacuum
//! half-spaces. Each layer's material is an independent fair coin flip
//! between the two configured media. Before jitter every layer has the same
//! optical thickness `mean_optical_thickness` (λ₀/4 by default), so its
//! physical thickness is `mean_optical_thickness / n(λ₀)`. The interior
//! boundaries are then shifted by independent Gaussian draws.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{builtin_materials, Material};
use crate::seed::rng_for;

const STREAM_MATERIAL: u64 = 1;
const STREAM_JITTER: u64 = 2;
/// Draws per boundary before jitter generation gives up.
pub const MAX_JITTER_ATTEMPTS: usize = 100;

/// How the jitter scale is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum JitterConvention {
    /// `jitter_sigma_optical_nm` is the standard deviation of the boundary
    /// shift in optical path; the physical shift is divided by the index of
    /// the layer the boundary moves into.
    #[default]
    OpticalStdDev,
    /// The same number is used directly as a physical-length standard deviation.
    PhysicalStdDev,
}

/// Material sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Arrangement {
    /// Independent fair coin per layer.
    #[default]
    Random,
    /// `materials[0]`, `materials[1]`, `materials[0]`, ... (periodic Bragg stack).
    Alternating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureParams {
    pub n_layers: usize,
    pub lambda0_nm: f64,
    pub mean_optical_thickness_nm: f64,
    pub jitter_sigma_optical_nm: f64,
    #[serde(default)]
    pub jitter_convention: JitterConvention,
    #[serde(default)]
    pub arrangement: Arrangement,
    pub materials: [Material; 2],
    pub seed: u64,
}

impl StructureParams {
    /// 300 layers of LiNbO₃/SiO₂ designed at 1550 nm, λ₀/4 mean optical
    /// thickness and λ₀/40 boundary jitter.
    pub fn standard(seed: u64) -> Self {
        Self::designed_at(1550.0, 300, seed)
    }

    /// Default recipe (λ₀/4 layers, λ₀/40 jitter) at an arbitrary design wavelength.
    pub fn designed_at(lambda0_nm: f64, n_layers: usize, seed: u64) -> Self {
        StructureParams {
            n_layers,
            lambda0_nm,
            mean_optical_thickness_nm: lambda0_nm / 4.0,
            jitter_sigma_optical_nm: lambda0_nm / 40.0,
            jitter_convention: JitterConvention::OpticalStdDev,
            arrangement: Arrangement::Random,
            materials: [Material::lithium_niobate(), Material::silica()],
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_layers < 1 {
            return Err(Error::invalid("n_layers", "must be at least 1"));
        }
        if !(200..=400).contains(&self.n_layers) {
            log::warn!(
                "n_layers = {} is outside the recommended 200-400 window",
                self.n_layers
            );
        }
        if !(self.lambda0_nm > 0.0) {
            return Err(Error::invalid("lambda0_nm", "must be positive"));
        }
        if !(self.mean_optical_thickness_nm > 0.0) {
            return Err(Error::invalid("mean_optical_thickness_nm", "must be positive"));
        }
        if !(self.jitter_sigma_optical_nm >= 0.0) {
            return Err(Error::invalid("jitter_sigma_optical_nm", "must be non-negative"));
        }
        for m in &self.materials {
            m.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    /// Index into [`LayeredStructure::materials`].
    pub material: usize,
    pub thickness_nm: f64,
}

/// An immutable stack of layers between vacuum half-spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredStructure {
    materials: Vec<Material>,
    layers: Vec<Layer>,
    params: Option<StructureParams>,
    seed: Option<u64>,
    total_length_nm: f64,
}

impl LayeredStructure {
    /// Builds a structure from explicit layers.
    pub fn from_layers(materials: Vec<Material>, layers: Vec<Layer>) -> Result<Self> {
        Self::assemble(materials, layers, None, None)
    }

    /// Convenience constructor from `(material, thickness_nm)` pairs.
    pub fn from_pairs(pairs: &[(&Material, f64)]) -> Result<Self> {
        let mut materials: Vec<Material> = Vec::new();
        let mut layers = Vec::with_capacity(pairs.len());
        for (m, d) in pairs {
            let idx = match materials.iter().position(|x| x == *m) {
                Some(i) => i,
                None => {
                    materials.push((*m).clone());
                    materials.len() - 1
                }
            };
            layers.push(Layer {
                material: idx,
                thickness_nm: *d,
            });
        }
        Self::from_layers(materials, layers)
    }

    /// The empty structure: vacuum everywhere.
    pub fn empty() -> Self {
        LayeredStructure {
            materials: Vec::new(),
            layers: Vec::new(),
            params: None,
            seed: None,
            total_length_nm: 0.0,
        }
    }

    fn assemble(
        materials: Vec<Material>,
        layers: Vec<Layer>,
        params: Option<StructureParams>,
        seed: Option<u64>,
    ) -> Result<Self> {
        for m in &materials {
            m.validate()?;
        }
        for (i, l) in layers.iter().enumerate() {
            if l.material >= materials.len() {
                return Err(Error::format(
                    format!("layers[{i}].material"),
                    format!("material index {} out of range", l.material),
                ));
            }
            if !(l.thickness_nm > 0.0) || !l.thickness_nm.is_finite() {
                return Err(Error::format(
                    format!("layers[{i}].thickness_nm"),
                    format!("non-positive thickness {}", l.thickness_nm),
                ));
            }
        }
        let total_length_nm = layers.iter().map(|l| l.thickness_nm).sum();
        Ok(LayeredStructure {
            materials,
            layers,
            params,
            seed,
            total_length_nm,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    pub fn material_of(&self, layer: &Layer) -> &Material {
        &self.materials[layer.material]
    }

    pub fn params(&self) -> Option<&StructureParams> {
        self.params.as_ref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn total_length_nm(&self) -> f64 {
        self.total_length_nm
    }

    /// Left boundary position of every layer, plus the final exit boundary.
    pub fn boundaries_nm(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.layers.len() + 1);
        let mut acc = 0.0;
        z.push(acc);
        for l in &self.layers {
            acc += l.thickness_nm;
            z.push(acc);
        }
        z
    }

    /// The same stack read from the rear: layer order reversed.
    pub fn mirrored(&self) -> Self {
        let mut s = self.clone();
        s.layers.reverse();
        s
    }

    /// Number of layers made of a χ⁽²⁾ > 0 material.
    pub fn nonlinear_layer_count(&self) -> usize {
        self.layers
            .iter()
            .filter(|l| self.material_of(l).is_nonlinear())
            .count()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Format { context, reason } => Error::Format {
                context: format!("{}: {context}", path.display()),
                reason,
            },
            other => other,
        })
    }

    /// Structure file text: `{params, seed, materials, layers}` with
    /// thicknesses as 17-significant-digit decimal strings.
    pub fn to_json(&self) -> Result<String> {
        let file = StructureFile {
            params: self.params.clone(),
            seed: self.seed,
            materials: self.materials.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| LayerRecord {
                    material: self.materials[l.material].name.clone(),
                    thickness_nm: format!("{:.16e}", l.thickness_nm),
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&file)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StructureFile = serde_json::from_str(text)
            .map_err(|e| Error::format(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        let registry = builtin_materials();
        for (i, m) in file.materials.iter().enumerate() {
            if registry.get(&m.name).is_none() {
                return Err(Error::format(
                    format!("materials[{i}].name"),
                    format!("unknown material \"{}\"", m.name),
                ));
            }
        }
        let mut layers = Vec::with_capacity(file.layers.len());
        for (i, rec) in file.layers.iter().enumerate() {
            let material = file
                .materials
                .iter()
                .position(|m| m.name == rec.material)
                .ok_or_else(|| {
                    Error::format(
                        format!("layers[{i}].material"),
                        format!("unknown material \"{}\"", rec.material),
                    )
                })?;
            let thickness_nm: f64 = rec.thickness_nm.trim().parse().map_err(|_| {
                Error::format(
                    format!("layers[{i}].thickness_nm"),
                    format!("not a number: \"{}\"", rec.thickness_nm),
                )
            })?;
            layers.push(Layer {
                material,
                thickness_nm,
            });
        }
        Self::assemble(file.materials, layers, file.params, file.seed)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureFile {
    params: Option<StructureParams>,
    seed: Option<u64>,
    materials: Vec<Material>,
    layers: Vec<LayerRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerRecord {
    material: String,
    thickness_nm: String,
}

/// Draws a structure. Deterministic in `params` (including its seed).
pub fn generate_structure(params: &StructureParams) -> Result<LayeredStructure> {
    params.validate()?;
    let n = params.n_layers;
    let lambda0 = params.lambda0_nm;
    let index = [
        params.materials[0].refractive_index(lambda0)?,
        params.materials[1].refractive_index(lambda0)?,
    ];

    let choice: Vec<usize> = (0..n)
        .map(|l| match params.arrangement {
            Arrangement::Random => {
                let heads: bool = rng_for(params.seed, &[STREAM_MATERIAL, l as u64]).gen();
                usize::from(!heads)
            }
            Arrangement::Alternating => l % 2,
        })
        .collect();

    // Unjittered boundary positions z_0 = 0, ..., z_n.
    let mut z = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    z.push(acc);
    for &m in &choice {
        acc += params.mean_optical_thickness_nm / index[m];
        z.push(acc);
    }

    // Outer facets stay put; interior boundary j separates layers j-1 and j.
    let sigma = params.jitter_sigma_optical_nm;
    if sigma > 0.0 {
        for j in 1..n {
            let mut accepted = None;
            for attempt in 0..MAX_JITTER_ATTEMPTS {
                let draw: f64 = rng_for(
                    params.seed,
                    &[STREAM_JITTER, j as u64, attempt as u64],
                )
                .sample(StandardNormal);
                let shift = match params.jitter_convention {
                    JitterConvention::PhysicalStdDev => sigma * draw,
                    JitterConvention::OpticalStdDev => {
                        let into = if draw >= 0.0 { choice[j] } else { choice[j - 1] };
                        sigma * draw / index[into]
                    }
                };
                let candidate = z[j] + shift;
                let upper_ok = j + 1 < n || candidate < z[n];
                if candidate > z[j - 1] && upper_ok {
                    accepted = Some(candidate);
                    break;
                }
            }
            z[j] = accepted.ok_or(Error::JitterExhausted {
                boundary: j,
                attempts: MAX_JITTER_ATTEMPTS,
            })?;
        }
    }

    let layers = choice
        .iter()
        .enumerate()
        .map(|(l, &m)| Layer {
            material: m,
            thickness_nm: z[l + 1] - z[l],
        })
        .collect();
    LayeredStructure::assemble(
        params.materials.to_vec(),
        layers,
        Some(params.clone()),
        Some(params.seed),
    )
}

/// Homogeneous, perfectly phase-matched slab holding the same nonlinear
/// material as a structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceStructure {
    /// Total thickness of the nonlinear layers.
    pub nonlinear_length_nm: f64,
    /// χ⁽²⁾-weighted nonlinear thickness; equals `nonlinear_length_nm` for LiNbO₃.
    pub effective_length_nm: f64,
}

pub fn reference_structure(s: &LayeredStructure) -> Result<ReferenceStructure> {
    let mut length = 0.0;
    let mut effective = 0.0;
    for l in s.layers() {
        let m = s.material_of(l);
        if m.is_nonlinear() {
            length += l.thickness_nm;
            effective += m.chi2 * l.thickness_nm;
        }
    }
    if length == 0.0 {
        return Err(Error::NoNonlinearMaterial);
    }
    Ok(ReferenceStructure {
        nonlinear_length_nm: length,
        effective_length_nm: effective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_gives_about_sixty_microns() {
        let s = generate_structure(&StructureParams::standard(42)).unwrap();
        assert_eq!(s.len(), 300);
        let um = s.total_length_nm() * 1e-3;
        assert!((55.0..75.0).contains(&um), "{um} um");
    }

    #[test]
    fn zero_jitter_is_exact_quarter_wave() {
        let mut p = StructureParams::standard(3);
        p.jitter_sigma_optical_nm = 0.0;
        let s = generate_structure(&p).unwrap();
        for l in s.layers() {
            let n = s.material_of(l).refractive_index(1550.0).unwrap();
            assert!((n * l.thickness_nm - 1550.0 / 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn same_seed_same_structure() {
        let p = StructureParams::standard(99);
        assert_eq!(generate_structure(&p).unwrap(), generate_structure(&p).unwrap());
        let mut q = p.clone();
        q.seed = 100;
        assert_ne!(generate_structure(&p).unwrap(), generate_structure(&q).unwrap());
    }

    #[test]
    fn zero_layers_rejected() {
        let mut p = StructureParams::standard(1);
        p.n_layers = 0;
        let e = generate_structure(&p).unwrap_err();
        assert!(e.to_string().contains("n_layers"));
    }

    #[test]
    fn huge_jitter_exhausts_redraws() {
        let mut p = StructureParams::standard(1);
        p.jitter_convention = JitterConvention::PhysicalStdDev;
        p.jitter_sigma_optical_nm = 1e7;
        assert!(matches!(
            generate_structure(&p),
            Err(Error::JitterExhausted { .. })
        ));
    }

    #[test]
    fn total_length_is_sum_of_layers() {
        let s = generate_structure(&StructureParams::standard(5)).unwrap();
        let sum: f64 = s.layers().iter().map(|l| l.thickness_nm).sum();
        assert!((sum - s.total_length_nm()).abs() <= 1e-12 * sum);
        assert!(s.layers().iter().all(|l| l.thickness_nm > 0.0));
    }

    #[test]
    fn reference_lengths() {
        let ln = Material::lithium_niobate();
        let si = Material::silica();
        let single = LayeredStructure::from_pairs(&[(&ln, 181.0)]).unwrap();
        assert_eq!(reference_structure(&single).unwrap().nonlinear_length_nm, 181.0);

        let all_silica = LayeredStructure::from_pairs(&[(&si, 100.0), (&si, 90.0)]).unwrap();
        let e = reference_structure(&all_silica).unwrap_err();
        assert_eq!(e.to_string(), "structure has no nonlinear material");

        // 150 unjittered LiNbO₃ quarter-wave layers.
        let mut p = StructureParams::standard(0);
        p.arrangement = Arrangement::Alternating;
        p.jitter_sigma_optical_nm = 0.0;
        let s = generate_structure(&p).unwrap();
        let d = 1550.0 / (4.0 * ln.refractive_index(1550.0).unwrap());
        let r = reference_structure(&s).unwrap();
        assert!((r.nonlinear_length_nm - 150.0 * d).abs() < 1e-9);
        assert!((r.nonlinear_length_nm * 1e-3 - 27.2).abs() < 0.1);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let s = generate_structure(&StructureParams::standard(11)).unwrap();
        let back = LayeredStructure::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(s, back);
        for (a, b) in s.layers().iter().zip(back.layers()) {
            assert_eq!(a.thickness_nm.to_bits(), b.thickness_nm.to_bits());
        }
    }

    fn one_layer_file(material: &str, thickness: &str) -> String {
        format!(
            r#"{{"params": null, "seed": null,
  "materials": [{{"name": "LiNbO3", "dispersion": {{"kind": "constant", "index": 2.14}}, "chi2": 1.0}}],
  "layers": [
    {{"material": "LiNbO3", "thickness_nm": "100"}},
    {{"material": "{material}", "thickness_nm": "{thickness}"}}
  ]}}"#
        )
    }

    #[test]
    fn negative_thickness_names_layer() {
        let e = LayeredStructure::from_json(&one_layer_file("LiNbO3", "-5")).unwrap_err();
        assert!(e.to_string().contains("layers[1]"), "{e}");
    }

    #[test]
    fn unknown_material_rejected() {
        let e = LayeredStructure::from_json(&one_layer_file("GaAs", "5")).unwrap_err();
        assert!(e.to_string().contains("GaAs"), "{e}");
    }

    #[test]
    fn malformed_json_reports_position() {
        let e = LayeredStructure::from_json("{\"params\": null,\n \"seed\": [").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }
}
