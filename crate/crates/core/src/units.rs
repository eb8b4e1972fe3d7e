//! Physical constants and unit conversions.

use std::f64::consts::PI;

/// Speed of light in vacuum, nm/s.
pub const C_NM_PER_S: f64 = 2.997_924_58e17;

/// Angular frequency (rad/s) of light with vacuum wavelength `nm`.
pub fn omega_from_wavelength_nm(nm: f64) -> f64 {
    2.0 * PI * C_NM_PER_S / nm
}

/// Vacuum wavelength (nm) of light at angular frequency `omega`.
pub fn wavelength_nm_from_omega(omega: f64) -> f64 {
    2.0 * PI * C_NM_PER_S / omega
}

/// Vacuum wavenumber ω/c in rad/nm.
pub fn vacuum_wavenumber(omega: f64) -> f64 {
    omega / C_NM_PER_S
}

/// Converts a small frequency interval around `omega` to a wavelength width (nm).
pub fn delta_wavelength_nm(omega_lo: f64, omega_hi: f64) -> f64 {
    (wavelength_nm_from_omega(omega_lo) - wavelength_nm_from_omega(omega_hi)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavelength_round_trip() {
        let w = omega_from_wavelength_nm(1550.0);
        assert!((wavelength_nm_from_omega(w) - 1550.0).abs() < 1e-9);
        // 1550 nm is 193.4 THz
        assert!((w / (2.0 * PI) - 1.934_145e14).abs() < 1e9);
    }
}
