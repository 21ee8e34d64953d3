//! Effective phase-matching width of a BBO crystal cut for degenerate
//! type-I down-conversion (extraordinary pump, ordinary daughters).
//!
//! The estimate is `sigma = sqrt(dk^2 / W_f^2 + 5 / L^2) / |dw|`, where `dk`
//! and `dw` are the partial derivatives of the longitudinal phase mismatch
//! with respect to the signal photon's transverse wavevector and angular
//! frequency, evaluated at the degenerate central configuration with the
//! crystal oriented at the phase-matching angle. Refractive indices come
//! from handbook Sellmeier fits, replaceable via a JSON data file.

use crate::error::{Error, Result};
use crate::units::SPEED_OF_LIGHT;
use serde::{Deserialize, Serialize};

/// Sellmeier coefficients for a negative uniaxial crystal.
///
/// Each ray uses `n^2 = c0 + c1 / (lambda_um^2 - c2) - c3 * lambda_um^2`
/// with the wavelength in micrometers. `validity_m` bounds the wavelengths
/// (in meters) for which the fit is trusted.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SellmeierSet {
    pub name: String,
    pub validity_m: (f64, f64),
    pub ordinary: [f64; 4],
    pub extraordinary: [f64; 4],
    #[serde(default)]
    pub notes: String,
}

impl SellmeierSet {
    /// Beta-barium borate, standard handbook fit (lambda in micrometers).
    pub fn bbo() -> Self {
        Self {
            name: "BBO".to_string(),
            validity_m: (0.2e-6, 2.6e-6),
            ordinary: [2.7405, 0.0184, 0.0179, 0.0155],
            extraordinary: [2.3730, 0.0128, 0.0156, 0.0044],
            notes: "beta-BaB2O4 handbook Sellmeier fit, lambda in micrometers".to_string(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let set: Self = serde_json::from_str(s)
            .map_err(|e| Error::InvalidParameter(format!("sellmeier json: {e}")))?;
        set.validate()?;
        Ok(set)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("sellmeier file: {e}")))?;
        Self::from_json_str(&text)
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.validity_m;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::InvalidParameter(
                "sellmeier validity range must satisfy 0 < lo < hi".into(),
            ));
        }
        Ok(())
    }

    fn check_range(&self, wavelength: f64) -> Result<()> {
        let (lo, hi) = self.validity_m;
        if !(wavelength >= lo && wavelength <= hi) {
            return Err(Error::WavelengthOutOfRange { wavelength, lo, hi });
        }
        Ok(())
    }

    fn eval(coefs: &[f64; 4], wavelength: f64) -> f64 {
        let lum2 = (wavelength * 1e6) * (wavelength * 1e6);
        (coefs[0] + coefs[1] / (lum2 - coefs[2]) - coefs[3] * lum2).sqrt()
    }

    /// Ordinary-ray index at a vacuum wavelength in meters.
    pub fn index_ordinary(&self, wavelength: f64) -> Result<f64> {
        self.check_range(wavelength)?;
        Ok(Self::eval(&self.ordinary, wavelength))
    }

    /// Extraordinary-ray principal index at a vacuum wavelength in meters.
    pub fn index_extraordinary(&self, wavelength: f64) -> Result<f64> {
        self.check_range(wavelength)?;
        Ok(Self::eval(&self.extraordinary, wavelength))
    }
}

/// Geometry of the crystal and the collected modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalSpec {
    /// Crystal length along the pump, meters.
    pub length: f64,
    /// Width of the transverse spatial mode collected by the fibers, meters.
    pub mode_width: f64,
    /// Angle between the pump and the central direction of the generated
    /// photons, inside the crystal, radians.
    pub emission_angle: f64,
    /// Pump vacuum wavelength, meters.
    pub pump_wavelength: f64,
    /// Signal/idler vacuum wavelength, meters (= twice the pump wavelength).
    pub signal_wavelength: f64,
}

impl CrystalSpec {
    pub fn new(
        length: f64,
        mode_width: f64,
        emission_angle: f64,
        pump_wavelength: f64,
        signal_wavelength: f64,
    ) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "crystal length must be > 0, got {length}"
            )));
        }
        if !(mode_width > 0.0 && mode_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mode width must be > 0, got {mode_width}"
            )));
        }
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&emission_angle) {
            return Err(Error::InvalidParameter(format!(
                "emission angle must be in [0, pi/2), got {emission_angle}"
            )));
        }
        if !(pump_wavelength > 0.0) {
            return Err(Error::InvalidParameter(
                "pump wavelength must be > 0".into(),
            ));
        }
        if ((signal_wavelength - 2.0 * pump_wavelength) / signal_wavelength).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "only the degenerate configuration is supported: signal wavelength must be \
                 twice the pump wavelength, got {signal_wavelength} vs 2 x {pump_wavelength}"
            )));
        }
        Ok(Self {
            length,
            mode_width,
            emission_angle,
            pump_wavelength,
            signal_wavelength,
        })
    }

    /// Degenerate 775 nm -> 2 x 1550 nm geometry.
    pub fn degenerate_775(length: f64, mode_width: f64, emission_angle: f64) -> Result<Self> {
        Self::new(length, mode_width, emission_angle, 775e-9, 1550e-9)
    }
}

/// Index seen by an extraordinarily polarized wave at angle `theta` between
/// the propagation direction and the optic axis.
pub fn pump_index(set: &SellmeierSet, omega: f64, theta: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "theta must be in [0, pi/2], got {theta}"
        )));
    }
    let wavelength = crate::units::omega_to_wavelength(omega);
    let n_o = set.index_ordinary(wavelength)?;
    let n_e = set.index_extraordinary(wavelength)?;
    if theta == std::f64::consts::FRAC_PI_2 {
        return Ok(n_e);
    }
    let t2 = theta.tan().powi(2);
    Ok(n_o * ((1.0 + t2) / (1.0 + (n_o / n_e).powi(2) * t2)).sqrt())
}

/// Longitudinal phase mismatch of the degenerate type-I process:
/// pump (extraordinary, along z) minus the z-components of the two ordinary
/// daughter photons with transverse wavevectors `k_sx`, `k_ix`.
pub fn phase_mismatch(
    set: &SellmeierSet,
    omega_s: f64,
    omega_i: f64,
    k_sx: f64,
    k_ix: f64,
    theta: f64,
) -> Result<f64> {
    if !(omega_s > 0.0 && omega_i > 0.0) {
        return Err(Error::InvalidParameter(
            "photon frequencies must be > 0".into(),
        ));
    }
    let omega_p = omega_s + omega_i;
    let n_p = pump_index(set, omega_p, theta)?;
    let kz = |omega: f64, kx: f64| -> Result<f64> {
        let wavelength = crate::units::omega_to_wavelength(omega);
        let k = omega * set.index_ordinary(wavelength)? / SPEED_OF_LIGHT;
        let radicand = k * k - kx * kx;
        if radicand <= 0.0 {
            return Err(Error::Evanescent);
        }
        Ok(radicand.sqrt())
    };
    Ok(omega_p * n_p / SPEED_OF_LIGHT - kz(omega_s, k_sx)? - kz(omega_i, k_ix)?)
}

/// Central degenerate configuration for a crystal spec: signal and idler at
/// half the pump frequency, transverse components set by the emission angle.
fn central_config(set: &SellmeierSet, spec: &CrystalSpec) -> Result<(f64, f64)> {
    let omega_s = crate::units::wavelength_to_omega(spec.signal_wavelength);
    let k_s = omega_s * set.index_ordinary(spec.signal_wavelength)? / SPEED_OF_LIGHT;
    Ok((omega_s, k_s * spec.emission_angle.sin()))
}

/// Crystal orientation solving the phase-matching condition for the central
/// degenerate configuration, by bisection to |mismatch| < 1e-3 m^-1.
pub fn phase_matching_angle(set: &SellmeierSet, spec: &CrystalSpec) -> Result<f64> {
    const TOL: f64 = 1e-3;
    let (omega_s, k_sx) = central_config(set, spec)?;
    let f = |theta: f64| phase_mismatch(set, omega_s, omega_s, k_sx, -k_sx, theta);

    let mut lo = 1e-9;
    let mut hi = std::f64::consts::FRAC_PI_2 - 1e-9;
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NotPhaseMatchable);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm.abs() < TOL {
            return Ok(mid);
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Inconsistency(
        "phase-matching bisection failed to reach tolerance".into(),
    ))
}

/// Which frequency direction the mismatch derivative uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetuningConvention {
    /// Partial derivative in the signal frequency alone (idler fixed).
    #[default]
    SignalOnly,
    /// Anti-correlated detunings (signal up, idler down; pump fixed).
    AntiCorrelated,
}

/// Effective width estimate and its ingredients.
#[derive(Debug, Clone, Copy)]
pub struct SigmaEstimate {
    /// Effective phase-matching width, s^-1.
    pub sigma: f64,
    /// Phase-matching angle used, radians.
    pub theta: f64,
    /// d(mismatch)/d(k_sx), dimensionless.
    pub delta_k: f64,
    /// d(mismatch)/d(omega_s), s/m.
    pub delta_omega: f64,
}

/// Effective phase-matching width with explicit finite-difference steps
/// (relative to the central frequency and wavevector).
pub fn effective_sigma_with_step(
    set: &SellmeierSet,
    spec: &CrystalSpec,
    convention: DetuningConvention,
    rel_step: f64,
) -> Result<SigmaEstimate> {
    let theta = phase_matching_angle(set, spec)?;
    let (omega_s, k_sx) = central_config(set, spec)?;
    let k_s = omega_s * set.index_ordinary(spec.signal_wavelength)? / SPEED_OF_LIGHT;

    let h_k = rel_step * k_s;
    let dk = (phase_mismatch(set, omega_s, omega_s, k_sx + h_k, -k_sx, theta)?
        - phase_mismatch(set, omega_s, omega_s, k_sx - h_k, -k_sx, theta)?)
        / (2.0 * h_k);

    let h_w = rel_step * omega_s;
    let dw = match convention {
        DetuningConvention::SignalOnly => {
            (phase_mismatch(set, omega_s + h_w, omega_s, k_sx, -k_sx, theta)?
                - phase_mismatch(set, omega_s - h_w, omega_s, k_sx, -k_sx, theta)?)
                / (2.0 * h_w)
        }
        DetuningConvention::AntiCorrelated => {
            (phase_mismatch(set, omega_s + h_w, omega_s - h_w, k_sx, -k_sx, theta)?
                - phase_mismatch(set, omega_s - h_w, omega_s + h_w, k_sx, -k_sx, theta)?)
                / (2.0 * h_w)
        }
    };
    if dw.abs() < 1e-15 {
        return Err(Error::SigmaEstimateSingular);
    }
    let sigma = (dk * dk / (spec.mode_width * spec.mode_width) + 5.0 / (spec.length * spec.length))
        .sqrt()
        / dw.abs();
    Ok(SigmaEstimate {
        sigma,
        theta,
        delta_k: dk,
        delta_omega: dw,
    })
}

/// Effective phase-matching width at the default relative step of 1e-6.
pub fn effective_sigma(
    set: &SellmeierSet,
    spec: &CrystalSpec,
    convention: DetuningConvention,
) -> Result<SigmaEstimate> {
    effective_sigma_with_step(set, spec, convention, 1e-6)
}
