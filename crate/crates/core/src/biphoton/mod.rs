//! Frequency-resolved LG mode amplitudes of the collinear biphoton state
//! from a monochromatic Gaussian pump.
//!
//! For collection modes LG_{p_s}^{ℓ}, LG_{p_i}^{−ℓ} the amplitude is
//!
//! ```text
//! C(Ω) = Σ_{s≤p_s} Σ_{i≤p_i} (w_p/√2) T_s(w_s) T_i(w_i)
//!        ∫_{−L/2}^{L/2} dz e^{i z φ(Ω)} D^{−|ℓ|} / (H^{1+s} B^{1+i}) ₂F̃₁(1+s, 1+i; 1−|ℓ|; D²/(HB))
//!
//! φ(Ω) = Ω/u_i − Ω/u_s − Ω²(G_i + G_s)/2 + Δk0
//! D = −w_p²/4 − i z/(2k_p)
//! H = w_p²/4 + w_s²/4 − i z (k_p − k_s)/(2 k_p k_s)
//! B = w_p²/4 + w_i²/4 − i z (k_p − k_i)/(2 k_p k_i)
//! ```
//!
//! The transverse factor does not depend on Ω, so it is evaluated once per
//! mode at the Gauss-Legendre nodes ([`ModeKernel`]) and every detuning then
//! costs one complex exponential per node. Amplitudes are raw: the overall
//! proportionality constant is 1 and cross-mode normalization happens in
//! [`crate::state`].

mod grid;
pub mod hypergeometric;
mod oracle;

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub use grid::{
    ComplexSpectrum, DetuningGrid, ModeLabel, Normalization, SpectralWindow, DEFAULT_POINTS, DEFAULT_SPAN,
    DEFAULT_TAIL_LIMIT,
};
pub use hypergeometric::hyp2f1_regularized;
pub use oracle::{bessel_i_scaled, oracle_amplitude, oracle_amplitude_4d, OracleSpec, OracleSpec4d};

use crate::dispersion::{phase_mismatch0, wave_params, CrystalSpec, Role, WaveParams};
use crate::error::{Error, Result};
use crate::lgmodes::{t_coefficient, BeamSpec};
use crate::units::angular_frequency;

/// Default number of Gauss-Legendre nodes along the crystal.
pub const DEFAULT_Z_ORDER: usize = 64;
/// Largest |Ω| / ω_s0 accepted by the small-detuning expansion.
pub const MAX_RELATIVE_DETUNING: f64 = 0.05;
/// Nodes for top-hat window integrals.
pub const WINDOW_ORDER: usize = 48;

/// Gauss-Legendre nodes and weights on [−1, 1], cached per order.
pub(crate) fn legendre(order: usize) -> Result<Arc<[(f64, f64)]>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<[(f64, f64)]>>>> = OnceLock::new();
    let n = NonZeroUsize::new(order)
        .ok_or_else(|| Error::InvalidParameter("quadrature order must be ≥ 1".into()))?;
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("quadrature cache").get(&order) {
        return Ok(v.clone());
    }
    let rule = GaussLegendre::new(n);
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let pairs: Arc<[(f64, f64)]> = pairs.into();
    cache.lock().expect("quadrature cache").insert(order, pairs.clone());
    Ok(pairs)
}

/// Everything the amplitude formula needs: crystal, pump, collection modes
/// and the expansion coefficients of each field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpdcConfig {
    pub crystal: CrystalSpec,
    pub pump: BeamSpec,
    pub signal: BeamSpec,
    pub idler: BeamSpec,
    pub pump_params: WaveParams,
    pub signal_params: WaveParams,
    pub idler_params: WaveParams,
    /// Δk0 entering as e^{i z Δk0}; rad/m.
    pub residual_mismatch: f64,
    pub z_order: usize,
}

impl SpdcConfig {
    /// Signal and idler center wavelengths given explicitly; they must
    /// conserve energy with the pump.
    pub fn new(crystal: CrystalSpec, pump: BeamSpec, signal: BeamSpec, idler: BeamSpec) -> Result<Self> {
        let residual = phase_mismatch0(&crystal, pump.center_wavelength, signal.center_wavelength, idler.center_wavelength)?;
        Ok(Self {
            pump_params: wave_params(&crystal, Role::Pump, pump.center_wavelength)?,
            signal_params: wave_params(&crystal, Role::Signal, signal.center_wavelength)?,
            idler_params: wave_params(&crystal, Role::Idler, idler.center_wavelength)?,
            crystal,
            pump,
            signal,
            idler,
            residual_mismatch: residual,
            z_order: DEFAULT_Z_ORDER,
        })
    }

    /// Degenerate emission at twice the pump wavelength.
    pub fn degenerate(crystal: CrystalSpec, pump: BeamSpec, signal_waist: f64, idler_waist: f64) -> Result<Self> {
        let lc = 2.0 * pump.center_wavelength;
        Self::new(crystal, pump, BeamSpec::new(signal_waist, lc)?, BeamSpec::new(idler_waist, lc)?)
    }

    /// Type-II ppKTP with auto poling, degenerate, equal collection waists.
    pub fn ppktp(length: f64, pump_wavelength: f64, pump_waist: f64, collection_waist: f64) -> Result<Self> {
        let crystal = CrystalSpec::ppktp(length)?;
        Self::degenerate(crystal, BeamSpec::new(pump_waist, pump_wavelength)?, collection_waist, collection_waist)
    }

    pub fn with_collection_waists(&self, signal_waist: f64, idler_waist: f64) -> Result<Self> {
        let mut c = self.clone();
        c.signal = BeamSpec::new(signal_waist, c.signal.center_wavelength)?;
        c.idler = BeamSpec::new(idler_waist, c.idler.center_wavelength)?;
        Ok(c)
    }

    pub fn with_pump_waist(&self, waist: f64) -> Result<Self> {
        let mut c = self.clone();
        c.pump = BeamSpec::new(waist, c.pump.center_wavelength)?;
        Ok(c)
    }

    pub fn with_residual_mismatch(mut self, dk: f64) -> Self {
        self.residual_mismatch = dk;
        self
    }

    pub fn with_z_order(mut self, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter("z_order must be ≥ 1".into()));
        }
        self.z_order = order;
        Ok(self)
    }

    /// Same physics with the signal and idler labels exchanged.
    pub fn swapped_roles(&self) -> Self {
        let mut c = self.clone();
        c.crystal.pm_type = self.crystal.pm_type.swapped();
        std::mem::swap(&mut c.signal, &mut c.idler);
        std::mem::swap(&mut c.signal_params, &mut c.idler_params);
        c
    }

    /// Center angular frequency of the signal field.
    pub fn signal_center_frequency(&self) -> f64 {
        angular_frequency(self.signal.center_wavelength)
    }

    pub fn detuning_limit(&self) -> f64 {
        MAX_RELATIVE_DETUNING * self.signal_center_frequency()
    }

    /// Grid of [`DEFAULT_POINTS`] samples spanning ±[`DEFAULT_SPAN`] around the signal center.
    pub fn default_grid(&self) -> DetuningGrid {
        DetuningGrid::for_wavelength_span(DEFAULT_POINTS, self.signal.center_wavelength, DEFAULT_SPAN)
            .expect("default grid is valid")
    }

    /// φ(Ω) = Ω/u_i − Ω/u_s − Ω²(G_i + G_s)/2 + Δk0.
    pub fn phase_rate(&self, omega: f64) -> f64 {
        omega * (1.0 / self.idler_params.group_velocity - 1.0 / self.signal_params.group_velocity)
            - omega * omega * 0.5 * (self.idler_params.gvd + self.signal_params.gvd)
            + self.residual_mismatch
    }

    fn check_detuning(&self, omega: f64) -> Result<()> {
        let limit = self.detuning_limit();
        if omega.abs() < limit {
            Ok(())
        } else {
            Err(Error::DetuningOutOfRange { omega, limit })
        }
    }
}

/// Ω-independent part of one mode amplitude, sampled on the z nodes.
#[derive(Debug, Clone)]
pub struct ModeKernel {
    label: ModeLabel,
    z: Vec<f64>,
    /// Quadrature weight times transverse factor at each node.
    weighted: Vec<Complex64>,
    group_delay: f64,
    half_gvd: f64,
    residual_mismatch: f64,
    detuning_limit: f64,
}

impl ModeKernel {
    pub fn new(config: &SpdcConfig, p_s: u32, p_i: u32, ell: i32) -> Result<Self> {
        let l = ell.unsigned_abs();
        let nodes = legendre(config.z_order)?;
        let half = 0.5 * config.crystal.length;
        let (kp, ks, ki) = (config.pump_params.k0, config.signal_params.k0, config.idler_params.k0);
        let (wp, ws, wi) = (config.pump.waist, config.signal.waist, config.idler.waist);
        let ts: Vec<f64> = (0..=p_s as i64)
            .map(|u| t_coefficient(u, p_s as i64, l as i64, ws))
            .collect::<Result<_>>()?;
        let ti: Vec<f64> = (0..=p_i as i64)
            .map(|u| t_coefficient(u, p_i as i64, l as i64, wi))
            .collect::<Result<_>>()?;
        let pre = wp / std::f64::consts::SQRT_2;
        let mut z = Vec::with_capacity(nodes.len());
        let mut weighted = Vec::with_capacity(nodes.len());
        for &(x, w) in nodes.iter() {
            let zz = half * x;
            let d = Complex64::new(-wp * wp / 4.0, -zz / (2.0 * kp));
            let h = Complex64::new((wp * wp + ws * ws) / 4.0, -zz * (kp - ks) / (2.0 * kp * ks));
            let b = Complex64::new((wp * wp + wi * wi) / 4.0, -zz * (kp - ki) / (2.0 * kp * ki));
            let arg = d * d / (h * b);
            let d_pow = d.inv().powu(l) * pre;
            // T_u w^{-2u} and H^{-u} cancel in scale; pairing them per photon
            // keeps every factor far from under/overflow even for p ≈ 10.
            let scaled = |t: &[f64], inv: Complex64| -> Vec<Complex64> {
                let mut pow = inv;
                t.iter()
                    .map(|c| {
                        let v = pow * *c;
                        pow *= inv;
                        v
                    })
                    .collect()
            };
            let (sh, sb) = (scaled(&ts, h.inv()), scaled(&ti, b.inv()));
            let mut g = Complex64::new(0.0, 0.0);
            for (s, hs) in sh.iter().enumerate() {
                for (i, bi) in sb.iter().enumerate() {
                    let f = hyp2f1_regularized(1 + s as u32, 1 + i as u32, 1 - l as i32, arg)?;
                    g += f * d_pow * (hs * bi);
                }
            }
            z.push(zz);
            weighted.push(g * (w * half));
        }
        Ok(Self {
            label: ModeLabel {
                p_s,
                p_i,
                ell: l as i32,
            },
            z,
            weighted,
            group_delay: 1.0 / config.idler_params.group_velocity - 1.0 / config.signal_params.group_velocity,
            half_gvd: 0.5 * (config.idler_params.gvd + config.signal_params.gvd),
            residual_mismatch: config.residual_mismatch,
            detuning_limit: config.detuning_limit(),
        })
    }

    pub fn label(&self) -> ModeLabel {
        self.label
    }

    /// φ(Ω), the longitudinal phase rate in the z integrand.
    pub fn phase_rate(&self, omega: f64) -> f64 {
        omega * self.group_delay - omega * omega * self.half_gvd + self.residual_mismatch
    }

    pub fn amplitude(&self, omega: f64) -> Result<Complex64> {
        if omega.abs() >= self.detuning_limit {
            return Err(Error::DetuningOutOfRange {
                omega,
                limit: self.detuning_limit,
            });
        }
        let phi = self.phase_rate(omega);
        Ok(self
            .z
            .iter()
            .zip(&self.weighted)
            .map(|(z, g)| g * Complex64::from_polar(1.0, z * phi))
            .sum())
    }

    pub fn spectrum(&self, grid: &DetuningGrid) -> Result<ComplexSpectrum> {
        if grid.omega_max() >= self.detuning_limit {
            return Err(Error::DetuningOutOfRange {
                omega: grid.omega_max(),
                limit: self.detuning_limit,
            });
        }
        let values: Vec<Complex64> = grid
            .omega()
            .par_iter()
            .map(|&o| self.amplitude(o))
            .collect::<Result<_>>()?;
        ComplexSpectrum::new(grid.clone(), values, self.label)
    }

    /// ∫|C|² over the detuning interval [lo, hi] by Gauss-Legendre.
    pub fn interval_probability(&self, lo: f64, hi: f64) -> Result<f64> {
        let nodes = legendre(WINDOW_ORDER)?;
        let (c, h) = (0.5 * (hi + lo), 0.5 * (hi - lo));
        nodes
            .iter()
            .map(|&(x, w)| Ok(w * h * self.amplitude(c + h * x)?.norm_sqr()))
            .sum()
    }
}

/// Raw amplitude of the (LG_{p_s}^{ℓ}, LG_{p_i}^{−ℓ}) pair at detuning Ω.
pub fn mode_amplitude(config: &SpdcConfig, p_s: u32, p_i: u32, ell: i32, omega: f64) -> Result<Complex64> {
    config.check_detuning(omega)?;
    ModeKernel::new(config, p_s, p_i, ell)?.amplitude(omega)
}

/// Amplitude of an arbitrary (signal, idler) pair; zero unless ℓ_s = −ℓ_i.
pub fn pair_amplitude(config: &SpdcConfig, p_s: u32, ell_s: i32, p_i: u32, ell_i: i32, omega: f64) -> Result<Complex64> {
    if ell_s + ell_i != 0 {
        config.check_detuning(omega)?;
        return Ok(Complex64::new(0.0, 0.0));
    }
    mode_amplitude(config, p_s, p_i, ell_s, omega)
}

/// Sampled mode amplitude, optionally normalized to unit L² norm.
pub fn spectrum(config: &SpdcConfig, p_s: u32, p_i: u32, ell: i32, grid: &DetuningGrid, normalize: bool) -> Result<ComplexSpectrum> {
    let s = ModeKernel::new(config, p_s, p_i, ell)?.spectrum(grid)?;
    Ok(if normalize { s.normalized() } else { s })
}

/// P = ∫|C|² dΩ (trapezoid, raw amplitudes) after checking that the grid
/// edges carry less than `grid.tail_limit()` of the total.
pub fn collection_probability(config: &SpdcConfig, p_s: u32, p_i: u32, ell: i32, grid: &DetuningGrid) -> Result<f64> {
    let s = spectrum(config, p_s, p_i, ell, grid, false)?;
    checked_norm(&s)
}

pub(crate) fn checked_norm(s: &ComplexSpectrum) -> Result<f64> {
    let tail = s.tail_fraction();
    if tail > s.grid.tail_limit() {
        return Err(Error::GridTooNarrow {
            tail_fraction: tail,
            limit: s.grid.tail_limit(),
        });
    }
    Ok(s.norm_sqr())
}

/// ∫|C|² over the detunings passed by a top-hat wavelength window.
pub fn window_probability(config: &SpdcConfig, p_s: u32, p_i: u32, ell: i32, window: &SpectralWindow) -> Result<f64> {
    let (lo, hi) = window.detuning_bounds(config.signal.center_wavelength);
    ModeKernel::new(config, p_s, p_i, ell)?.interval_probability(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{mm, nm, um};

    fn fig3(ws: f64) -> SpdcConfig {
        SpdcConfig::ppktp(mm(10.0), nm(405.0), um(142.0), ws).unwrap()
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn golden_amplitudes() {
        let c = fig3(um(42.0));
        let cases = [
            ((0, 0, 0), 0.0, 57.69768094256125),
            ((0, 0, 2), 0.0, 40.48176391),
            ((0, 0, 0), 2e12, -9.564184985296643),
            ((1, 2, 3), 0.0, 13.83567828),
            ((2, 1, 1), 0.0, 14.46205875),
        ];
        for ((ps, pi, l), om, re) in cases {
            let a = mode_amplitude(&c, ps, pi, l, om).unwrap();
            assert!((a.re - re).abs() / re.abs() < 1e-6, "{ps} {pi} {l} {om}: {a}");
        }
    }

    #[test]
    fn higher_oam_is_weaker_at_center() {
        let c = fig3(um(42.0));
        let a0 = mode_amplitude(&c, 0, 0, 0, 0.0).unwrap().norm();
        let a4 = mode_amplitude(&c, 0, 0, 4, 0.0).unwrap().norm();
        assert!(a4 < a0);
    }

    #[test]
    fn amplitude_depends_on_abs_ell_only() {
        let c = fig3(um(35.0));
        for l in 1..5 {
            let a = mode_amplitude(&c, 1, 2, l, 3e11).unwrap();
            let b = mode_amplitude(&c, 1, 2, -l, 3e11).unwrap();
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn role_swap_mirrors_detuning() {
        let c = fig3(um(30.0)).with_collection_waists(um(30.0), um(48.0)).unwrap();
        let sw = c.swapped_roles();
        for &(ps, pi, l) in &[(0, 0, 0), (1, 0, 2), (2, 1, 3)] {
            for &om in &[0.0, 4e11, -1.3e12] {
                let a = mode_amplitude(&c, ps, pi, l, om).unwrap();
                let b = mode_amplitude(&sw, pi, ps, l, -om).unwrap();
                assert!(rel(a, b) < 1e-10, "{ps} {pi} {l} {om}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn selection_rule_zeroes_unpaired_modes() {
        let c = fig3(um(42.0));
        assert_eq!(pair_amplitude(&c, 0, 1, 0, 1, 0.0).unwrap(), Complex64::new(0.0, 0.0));
        assert!(pair_amplitude(&c, 0, 1, 0, -1, 0.0).unwrap().norm() > 0.0);
    }

    #[test]
    fn z_order_converged() {
        let c = fig3(um(42.0));
        let c128 = c.clone().with_z_order(128).unwrap();
        for l in 0..5 {
            for &om in &[0.0, 1e12, -3e12] {
                let a = mode_amplitude(&c, 0, 0, l, om).unwrap();
                let b = mode_amplitude(&c128, 0, 0, l, om).unwrap();
                assert!(rel(a, b) < 1e-9, "{l} {om}");
            }
        }
    }

    #[test]
    fn detuning_guard() {
        let c = fig3(um(42.0));
        let lim = c.detuning_limit();
        assert!(matches!(mode_amplitude(&c, 0, 0, 0, lim), Err(Error::DetuningOutOfRange { .. })));
        assert!(mode_amplitude(&c, 0, 0, 0, 0.9 * lim).is_ok());
    }

    #[test]
    fn probability_converges_with_grid_density() {
        let c = fig3(um(42.0));
        let g = c.default_grid();
        for l in [0, 4] {
            let p1 = collection_probability(&c, 0, 0, l, &g).unwrap();
            let p2 = collection_probability(&c, 0, 0, l, &g.refined()).unwrap();
            assert!((p1 - p2).abs() / p2 < 1e-6, "{l}: {p1} {p2}");
        }
    }

    #[test]
    fn narrow_grid_is_flagged() {
        let c = fig3(um(42.0));
        let g = DetuningGrid::for_wavelength_span(201, c.signal.center_wavelength, nm(0.05)).unwrap();
        assert!(matches!(collection_probability(&c, 0, 0, 0, &g), Err(Error::GridTooNarrow { .. })));
    }

    #[test]
    fn window_probability_matches_grid_integral() {
        let c = fig3(um(42.0));
        let g = c.default_grid().refined().refined();
        let s = spectrum(&c, 0, 0, 1, &g, false).unwrap();
        let w = SpectralWindow::new(nm(810.05), nm(0.2)).unwrap();
        let (lo, hi) = w.detuning_bounds(c.signal.center_wavelength);
        let masked: f64 = g
            .omega()
            .iter()
            .zip(&s.values)
            .filter(|(o, _)| **o >= lo && **o <= hi)
            .map(|(_, v)| v.norm_sqr() * g.step())
            .sum();
        let exact = window_probability(&c, 0, 0, 1, &w).unwrap();
        assert!((masked - exact).abs() / exact < 2e-2, "{masked} {exact}");
    }
}
