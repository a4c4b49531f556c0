//! Physical constants and the unit conversions used at the I/O boundary.
//!
//! Everything inside the engine is SI (meters, rad/s, rad/m). Files and
//! command-line flags speak nm / µm / mm.

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn nm(x: f64) -> f64 {
    x * 1e-9
}

pub fn um(x: f64) -> f64 {
    x * 1e-6
}

pub fn mm(x: f64) -> f64 {
    x * 1e-3
}

pub fn to_nm(meters: f64) -> f64 {
    meters * 1e9
}

pub fn to_um(meters: f64) -> f64 {
    meters * 1e6
}

pub fn to_mm(meters: f64) -> f64 {
    meters * 1e3
}

/// Angular frequency of a vacuum wavelength.
pub fn angular_frequency(wavelength: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / wavelength
}

/// Vacuum wavelength of an angular frequency.
pub fn wavelength_of(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega
}

/// Detuning span (rad/s) equivalent to a wavelength half-span around `center`,
/// to first order: Ω = 2πc Δλ / λ².
pub fn detuning_for_wavelength_span(center: f64, half_span: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT * half_span / (center * center)
}
