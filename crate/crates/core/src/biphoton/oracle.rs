//! Brute-force quadrature of the momentum-space overlap integral
//!
//! ```text
//! C(Ω) = N ∫d²q_s d²q_i Φ(q_s, q_i, Ω) LG_s*(q_s) LG_i*(q_i)
//! Φ = (w_p/√(2π)) ∫dz exp[D |q_s + q_i|² + i z (|q_s|²/(2k_s) + |q_i|²/(2k_i)) + i z φ(Ω)]
//! ```
//!
//! with N = π^{−3/2}, which makes it equal to the closed form in the parent
//! module. It shares no code with that path beyond the LG mode functions and
//! the wave parameters. [`oracle_amplitude`] does the angular integrals
//! analytically (Bessel function, OAM selection rule); [`oracle_amplitude_4d`]
//! integrates all four transverse coordinates numerically.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{legendre, SpdcConfig};
use crate::error::{Error, Result};
use crate::lgmodes::{lg_momentum_amplitude, lg_radial, LGIndex};

const MAX_ORACLE_P: u32 = 3;
const MAX_ORACLE_ELL: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSpec {
    pub z_order: usize,
    /// Gauss-Legendre nodes per radial coordinate.
    pub radial_order: usize,
    /// Radial cutoff in units of 1/w of each collection mode.
    pub radial_extent: f64,
    /// Ceiling on z_order × radial_order².
    pub max_nodes: usize,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self {
            z_order: 64,
            radial_order: 200,
            radial_extent: 10.0,
            max_nodes: 20_000_000,
        }
    }
}

impl OracleSpec {
    /// Twice the radial and z resolution, for convergence checks.
    pub fn doubled(&self) -> Self {
        Self {
            z_order: 2 * self.z_order,
            radial_order: 2 * self.radial_order,
            max_nodes: 8 * self.max_nodes,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSpec4d {
    pub z_order: usize,
    pub radial_order: usize,
    /// Uniform azimuth samples per photon.
    pub angular_points: usize,
    pub radial_extent: f64,
    pub max_nodes: usize,
}

impl Default for OracleSpec4d {
    fn default() -> Self {
        Self {
            z_order: 24,
            radial_order: 40,
            angular_points: 48,
            radial_extent: 8.0,
            max_nodes: 200_000_000,
        }
    }
}

/// I_n(x) e^{−x} for complex x with Re x ≥ 0.
pub fn bessel_i_scaled(n: u32, x: Complex64) -> Complex64 {
    if x.norm() <= 30.0 {
        // power series, then scale
        let half = x * 0.5;
        let q = half * half;
        let mut term = half.powu(n) / (1..=n).map(f64::from).product::<f64>();
        let mut sum = term;
        for k in 1..400u32 {
            term *= q / (k as f64 * (k + n) as f64);
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        sum * (-x).exp()
    } else {
        // large-argument expansion, truncated at its smallest term
        let mu = 4.0 * (n as f64).powi(2);
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        let mut last = f64::INFINITY;
        for k in 1..60u32 {
            let kk = (2 * k - 1) as f64;
            let next = term * (-(mu - kk * kk) / (8.0 * k as f64)) / x;
            if next.norm() >= last {
                break;
            }
            last = next.norm();
            term = next;
            sum += term;
            if term.norm() < 1e-17 {
                break;
            }
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

fn radial_nodes(order: usize, extent: f64, waist: f64) -> Result<Vec<(f64, f64)>> {
    let qmax = extent / waist;
    Ok(legendre(order)?
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0) * qmax, 0.5 * w * qmax))
        .collect())
}

fn check_cost(p_s: u32, p_i: u32, ell: u32, nodes: usize, max_nodes: usize) -> Result<()> {
    if p_s > MAX_ORACLE_P || p_i > MAX_ORACLE_P || ell > MAX_ORACLE_ELL {
        return Err(Error::BudgetExceeded(format!(
            "oracle limited to p ≤ {MAX_ORACLE_P}, |ℓ| ≤ {MAX_ORACLE_ELL}; got p_s={p_s}, p_i={p_i}, |ℓ|={ell}"
        )));
    }
    if nodes > max_nodes {
        return Err(Error::BudgetExceeded(format!("{nodes} nodes exceed the limit {max_nodes}")));
    }
    Ok(())
}

/// Oracle amplitude of (LG_{p_s}^{ℓ}, LG_{p_i}^{−ℓ}) at each detuning in `omegas`.
pub fn oracle_amplitude(
    config: &SpdcConfig,
    p_s: u32,
    p_i: u32,
    ell: i32,
    omegas: &[f64],
    spec: &OracleSpec,
) -> Result<Vec<Complex64>> {
    let l = ell.unsigned_abs();
    check_cost(p_s, p_i, l, spec.z_order * spec.radial_order * spec.radial_order, spec.max_nodes)?;
    for &o in omegas {
        config.check_detuning(o)?;
    }
    let (kp, ks, ki) = (config.pump_params.k0, config.signal_params.k0, config.idler_params.k0);
    let (wp, ws, wi) = (config.pump.waist, config.signal.waist, config.idler.waist);
    let qs = radial_nodes(spec.radial_order, spec.radial_extent, ws)?;
    let qi = radial_nodes(spec.radial_order, spec.radial_extent, wi)?;
    // q dq times the real radial profile; conjugation only flips e^{iℓφ}
    let rs: Vec<f64> = qs.iter().map(|&(q, w)| w * q * lg_radial(LGIndex::new(p_s, l as i32), ws, q)).collect();
    let ri: Vec<f64> = qi.iter().map(|&(q, w)| w * q * lg_radial(LGIndex::new(p_i, -(l as i32)), wi, q)).collect();
    let half = 0.5 * config.crystal.length;
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    let norm = 4.0 * PI * PI * wp / (2.0 * PI).sqrt() * PI.powf(-1.5);

    let zn = legendre(spec.z_order)?;
    let transverse: Vec<(f64, Complex64)> = zn
        .par_iter()
        .map(|&(x, wz)| {
            let z = half * x;
            let d = Complex64::new(-wp * wp / 4.0, -z / (2.0 * kp));
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, &(q1, _)) in qs.iter().enumerate() {
                let e1 = Complex64::new(0.0, z * q1 * q1 / (2.0 * ks));
                let mut row = Complex64::new(0.0, 0.0);
                for (b, &(q2, _)) in qi.iter().enumerate() {
                    // I_ℓ(2D q_s q_i) = (−1)^ℓ I_ℓ(x), x = −2D q_s q_i, Re x > 0
                    let xarg = d * (-2.0 * q1 * q2);
                    let expo = d * (q1 - q2) * (q1 - q2) + Complex64::new(0.0, z * q2 * q2 / (2.0 * ki));
                    row += ri[b] * bessel_i_scaled(l, xarg) * expo.exp();
                }
                acc += row * rs[a] * e1.exp();
            }
            (z, acc * (wz * half * norm * sign))
        })
        .collect();

    Ok(omegas
        .iter()
        .map(|&o| {
            let phi = config.phase_rate(o);
            transverse.iter().map(|(z, g)| g * Complex64::from_polar(1.0, z * phi)).sum()
        })
        .collect())
}

/// Fully numerical four-dimensional transverse quadrature for arbitrary
/// signal and idler modes, with no use of the OAM selection rule.
pub fn oracle_amplitude_4d(
    config: &SpdcConfig,
    signal: LGIndex,
    idler: LGIndex,
    omega: f64,
    spec: &OracleSpec4d,
) -> Result<Complex64> {
    let per_photon = spec.radial_order * spec.angular_points;
    let nodes = spec.z_order * per_photon * per_photon;
    check_cost(signal.p, idler.p, signal.abs_ell().max(idler.abs_ell()), nodes, spec.max_nodes)?;
    config.check_detuning(omega)?;
    let (kp, ks, ki) = (config.pump_params.k0, config.signal_params.k0, config.idler_params.k0);
    let (wp, ws, wi) = (config.pump.waist, config.signal.waist, config.idler.waist);

    let points = |waist: f64, mode: LGIndex| -> Result<Vec<([f64; 2], Complex64)>> {
        let dphi = 2.0 * PI / spec.angular_points as f64;
        let mut out = Vec::with_capacity(per_photon);
        for (q, w) in radial_nodes(spec.radial_order, spec.radial_extent, waist)? {
            for k in 0..spec.angular_points {
                let phi = k as f64 * dphi;
                let v = [q * phi.cos(), q * phi.sin()];
                out.push((v, lg_momentum_amplitude(mode, waist, v).conj() * (w * q * dphi)));
            }
        }
        Ok(out)
    };
    let sp = points(ws, signal)?;
    let ip = points(wi, idler)?;
    let half = 0.5 * config.crystal.length;
    let phi = config.phase_rate(omega);
    let norm = wp / (2.0 * PI).sqrt() * PI.powf(-1.5);

    let zn = legendre(spec.z_order)?;
    let total: Complex64 = zn
        .par_iter()
        .map(|&(x, wz)| {
            let z = half * x;
            let d = Complex64::new(-wp * wp / 4.0, -z / (2.0 * kp));
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, la) in &sp {
                let qa2 = a[0] * a[0] + a[1] * a[1];
                let ea = Complex64::new(0.0, z * qa2 / (2.0 * ks));
                let mut row = Complex64::new(0.0, 0.0);
                for (b, lb) in &ip {
                    let qb2 = b[0] * b[0] + b[1] * b[1];
                    let sx = a[0] + b[0];
                    let sy = a[1] + b[1];
                    let expo = d * (sx * sx + sy * sy) + ea + Complex64::new(0.0, z * qb2 / (2.0 * ki));
                    row += lb * expo.exp();
                }
                acc += row * la;
            }
            acc * (wz * half) * Complex64::from_polar(1.0, z * phi)
        })
        .sum();
    Ok(total * norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_branches_meet() {
        for n in 0..5 {
            for &(re, im) in &[(30.0, 0.0), (29.0, 3.0), (25.0, -8.0)] {
                let x = Complex64::new(re, im);
                let a = bessel_i_scaled(n, x);
                // direct series at the same point
                let half = x * 0.5;
                let mut term = half.powu(n) / (1..=n).map(f64::from).product::<f64>();
                let mut s = term;
                for k in 1..300u32 {
                    term *= half * half / (k as f64 * (k + n) as f64);
                    s += term;
                }
                let b = s * (-x).exp();
                assert!((a - b).norm() / b.norm() < 1e-12, "n={n} x={x}");
                let far = Complex64::new(31.0, 0.5);
                let (lo, hi) = (bessel_i_scaled(n, far * (29.9 / far.norm())), bessel_i_scaled(n, far * (30.1 / far.norm())));
                assert!((lo - hi).norm() / hi.norm() < 2e-2);
            }
        }
    }

    #[test]
    fn bessel_small_argument() {
        let v = bessel_i_scaled(0, Complex64::new(1.0, 0.0));
        assert!((v.re - 1.2660658777520082 * (-1f64).exp()).abs() < 1e-15);
        let v = bessel_i_scaled(2, Complex64::new(0.0, 0.0));
        assert_eq!(v.norm(), 0.0);
    }
}
