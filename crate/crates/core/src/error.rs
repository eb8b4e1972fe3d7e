use thiserror::Error;

/// Errors raised by the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed validation (bad range, inconsistent grids, ...).
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A wavelength was queried outside a dispersion model's fitted window.
    #[error("wavelength {wavelength_nm} nm outside the validity window {lo_nm}-{hi_nm} nm of {material}")]
    OutsideDispersionWindow {
        material: String,
        wavelength_nm: f64,
        lo_nm: f64,
        hi_nm: f64,
    },

    #[error("structure has no nonlinear material")]
    NoNonlinearMaterial,

    #[error("cannot normalize null state")]
    NullState,

    /// Jitter kept producing non-positive thicknesses.
    #[error("boundary {boundary}: no positive-thickness jitter draw after {attempts} attempts")]
    JitterExhausted { boundary: usize, attempts: usize },

    #[error("spectrum is not adaptively refined; recompute it with a refinement policy")]
    UnrefinedSpectrum,

    #[error("amplitude truncated at the grid edge (edge/peak intensity {ratio:.3e}); widen the grid")]
    TruncatedAmplitude { ratio: f64 },

    #[error("amplitude grids differ between signal and idler axes")]
    MismatchedGrids,

    #[error("tracked peak lost between {from_deg} deg and {to_deg} deg")]
    PeakLost { from_deg: f64, to_deg: f64 },

    #[error("pinholes not spectrally disjoint (components {first} and {second} overlap {overlap:.3e})")]
    PinholesNotDisjoint {
        first: usize,
        second: usize,
        overlap: f64,
    },

    #[error("reference spectrum vanishes at signal grid index {index}")]
    ZeroReference { index: usize },

    /// Malformed structure or amplitude file.
    #[error("{context}: {reason}")]
    Format { context: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn format(context: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            context: context.into(),
            reason: reason.into(),
        }
    }
}
