//! Unit conversions used at the presentation boundary.
//!
//! Every public API in this crate works in SI base units: seconds, meters,
//! s^-1 (angular-frequency detuning widths), s^2/m. The helpers here convert
//! to the units people put on plots.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Wavelength bandwidth (FWHM-free, same 1-sigma convention as the input)
/// corresponding to an angular-frequency detuning width `sigma` at a carrier
/// `wavelength`: d(lambda) = lambda^2 * sigma / (2 pi c).
pub fn sigma_to_bandwidth_m(sigma: f64, wavelength: f64) -> f64 {
    wavelength * wavelength * sigma / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT)
}

/// Inverse of [`sigma_to_bandwidth_m`].
pub fn bandwidth_m_to_sigma(bandwidth: f64, wavelength: f64) -> f64 {
    bandwidth * 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / (wavelength * wavelength)
}

/// Angular frequency (rad/s) of light of the given vacuum wavelength.
pub fn wavelength_to_omega(wavelength: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / wavelength
}

/// Vacuum wavelength of light of the given angular frequency (rad/s).
pub fn omega_to_wavelength(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / omega
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bandwidth_of_100_ghz_detuning_at_1550_nm() {
        // 1e11 s^-1 at 1550 nm is ~0.13 nm of optical bandwidth.
        let nm = sigma_to_bandwidth_m(1e11, 1550e-9) * 1e9;
        assert_relative_eq!(nm, 0.13, max_relative = 0.05);
        assert_relative_eq!(nm, 0.127_545, max_relative = 1e-4);
    }

    #[test]
    fn bandwidth_round_trip() {
        let sigma = 4.17e11;
        let bw = sigma_to_bandwidth_m(sigma, 1550e-9);
        assert_relative_eq!(
            bandwidth_m_to_sigma(bw, 1550e-9),
            sigma,
            max_relative = 1e-12
        );
    }

    #[test]
    fn omega_round_trip() {
        let w = wavelength_to_omega(775e-9);
        assert_relative_eq!(omega_to_wavelength(w), 775e-9, max_relative = 1e-12);
    }
}
