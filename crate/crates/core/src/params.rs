//! Physical inputs and the derived coupling constants.

use num_complex::Complex;
use serde::Serialize;

use crate::constants::{C_LIGHT, HBAR, K_B};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// User-facing physical inputs, SI units, angular frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams<T> {
    /// Laser wavelength [m].
    pub wavelength: T,
    /// Cavity length [m].
    pub cavity_length: T,
    /// Effective mirror mass [kg].
    pub mass: T,
    /// Cavity amplitude decay rate [rad/s].
    pub kappa: T,
    /// Mechanical frequency [rad/s].
    pub omega_m: T,
    /// Mechanical quality factor, omega_m / gamma_m.
    pub quality: T,
    /// Input laser power [W].
    pub power: T,
    /// Bath temperature [K].
    pub temperature: T,
    /// Squeezing parameter of the injected vacuum.
    pub squeeze_r: T,
    /// Squeezing phase [rad].
    pub squeeze_phi: T,
    /// Bare cavity-laser detuning omega_c - omega_L [rad/s].
    pub detuning0: T,
}

impl SystemParams<f64> {
    /// Parameters of a normal-mode-splitting experiment:
    /// 1064 nm, 25 mm cavity, 145 ng mirror, kappa = 2pi*215 kHz,
    /// omega_m = 2pi*947 kHz, Q' = 6700.
    ///
    /// Power, temperature and squeezing default to 6.9 mW, 1 mK, r = 1 and
    /// the detuning to omega_m.
    pub fn groeblacher() -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        let omega_m = two_pi * 947e3;
        SystemParams {
            wavelength: 1064e-9,
            cavity_length: 25e-3,
            mass: 145e-12,
            kappa: two_pi * 215e3,
            omega_m,
            quality: 6700.0,
            power: 6.9e-3,
            temperature: 1e-3,
            squeeze_r: 1.0,
            squeeze_phi: 0.0,
            detuning0: omega_m,
        }
    }
}

impl<T: Real> SystemParams<T> {
    /// Convert every field to another scalar type.
    pub fn cast<U: Real>(&self) -> SystemParams<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        SystemParams {
            wavelength: c(self.wavelength),
            cavity_length: c(self.cavity_length),
            mass: c(self.mass),
            kappa: c(self.kappa),
            omega_m: c(self.omega_m),
            quality: c(self.quality),
            power: c(self.power),
            temperature: c(self.temperature),
            squeeze_r: c(self.squeeze_r),
            squeeze_phi: c(self.squeeze_phi),
            detuning0: c(self.detuning0),
        }
    }

    /// Check every field; the error names the offending field.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength_lambda", self.wavelength),
            ("cavity_length_L", self.cavity_length),
            ("mass_m", self.mass),
            ("kappa", self.kappa),
            ("omega_m", self.omega_m),
            ("quality_Q", self.quality),
            ("laser_power_P", self.power),
        ];
        for (field, v) in positive {
            if !v.is_finite() || v <= T::zero() {
                return Err(Error::validation(field, format!("must be finite and > 0, got {v}")));
            }
        }
        let non_negative = [("temperature_T", self.temperature), ("squeeze_r", self.squeeze_r)];
        for (field, v) in non_negative {
            if !v.is_finite() || v < T::zero() {
                return Err(Error::validation(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        for (field, v) in [("squeeze_phi", self.squeeze_phi), ("detuning_Delta0", self.detuning0)] {
            if !v.is_finite() {
                return Err(Error::validation(field, format!("must be finite, got {v}")));
            }
        }
        // single-mode (adiabatic) limit: omega_m << c / 2L
        let fsr = T::lit(C_LIGHT) / (T::two() * self.cavity_length);
        if self.omega_m >= T::lit(0.01) * fsr {
            return Err(Error::validation(
                "omega_m",
                format!(
                    "adiabatic limit violated: omega_m = {} >= 0.01 c/(2L) = {}",
                    self.omega_m,
                    T::lit(0.01) * fsr
                ),
            ));
        }
        Ok(())
    }
}

/// Quantities computed from [`SystemParams`] and used by every downstream module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams<T> {
    pub system: SystemParams<T>,
    /// Laser angular frequency 2 pi c / lambda [rad/s].
    pub omega_l: T,
    /// Single-photon optomechanical coupling [rad/s].
    pub g: T,
    /// Mechanical momentum damping omega_m / Q' [rad/s].
    pub gamma_m: T,
    /// Drive amplitude sqrt(2 kappa P / (hbar omega_L)) [s^-1].
    pub epsilon: T,
    /// Squeezed-vacuum photon number sinh^2 r.
    pub n_sq: T,
    /// Squeezed-vacuum anomalous correlation sinh r cosh r e^{i phi}.
    pub m_sq: Complex<T>,
}

impl<T: Real> DerivedParams<T> {
    pub fn kappa(&self) -> T {
        self.system.kappa
    }

    pub fn omega_m(&self) -> T {
        self.system.omega_m
    }

    pub fn temperature(&self) -> T {
        self.system.temperature
    }

    /// Bath temperature in units of the mechanical quantum, k_B T / (hbar omega_m).
    pub fn thermal_ratio(&self) -> T {
        T::lit(K_B / HBAR) * self.system.temperature / self.system.omega_m
    }

    /// Static radiation-pressure shift scale 2 g^2 eps^2 / omega_m [rad^3/s^3].
    pub fn cubic_drive(&self) -> T {
        T::two() * self.g * self.g * self.epsilon * self.epsilon / self.system.omega_m
    }
}

/// Validate `p` and compute the derived constants.
///
/// The cavity frequency inside the coupling `g = (omega_c / L) sqrt(hbar / 2 m omega_m)`
/// is taken as the laser frequency; the detuning correction is of order 1e-9.
pub fn derive_params<T: Real>(p: &SystemParams<T>) -> Result<DerivedParams<T>> {
    p.validate()?;
    let hbar = T::lit(HBAR);
    let omega_l = T::two() * T::PI() * T::lit(C_LIGHT) / p.wavelength;
    let zpf = (hbar / (T::two() * p.mass * p.omega_m)).sqrt();
    let g = omega_l / p.cavity_length * zpf;
    let gamma_m = p.omega_m / p.quality;
    let epsilon = (T::two() * p.kappa * p.power / (hbar * omega_l)).sqrt();
    let (sh, ch) = (p.squeeze_r.sinh(), p.squeeze_r.cosh());
    let n_sq = sh * sh;
    let m_sq = Complex::from_polar(sh * ch, p.squeeze_phi);
    Ok(DerivedParams {
        system: *p,
        omega_l,
        g,
        gamma_m,
        epsilon,
        n_sq,
        m_sq,
    })
}
