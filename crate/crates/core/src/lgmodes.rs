//! Laguerre-Gauss modes in transverse momentum space.
//!
//! Convention (shared by the oracle and the closed-form coefficients):
//!
//! ```text
//! LG_p^ℓ(q) = (−1)^p √(p!/(π (p+|ℓ|)!)) · (w/√2) · (|q| w/√2)^{|ℓ|}
//!             · L_p^{|ℓ|}(|q|² w²/2) · exp(−w²|q|²/4) · exp(iℓφ_q)
//! ```
//!
//! so the fundamental mode is `w/√(2π) · exp(−w²|q|²/4)` and no extra `i^ℓ`
//! factor is attached. Expanding the Laguerre polynomial gives
//! `Σ_u T_u^{p,ℓ}/u! · |q|^{2u+|ℓ|} · exp(−w²|q|²/4)`, which is exactly the
//! coefficient returned by [`t_coefficient`].

use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transverse mode label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LGIndex {
    pub p: u32,
    pub ell: i32,
}

impl LGIndex {
    pub const fn new(p: u32, ell: i32) -> Self {
        Self { p, ell }
    }

    pub fn abs_ell(&self) -> u32 {
        self.ell.unsigned_abs()
    }
}

impl fmt::Display for LGIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LG(p={},l={})", self.p, self.ell)
    }
}

/// Gaussian beam or collection mode: waist and center wavelength, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    pub waist: f64,
    pub center_wavelength: f64,
}

impl BeamSpec {
    pub fn new(waist: f64, center_wavelength: f64) -> Result<Self> {
        if !(waist > 0.0 && waist.is_finite()) {
            return Err(Error::InvalidParameter(format!("waist {waist} must be > 0")));
        }
        if !(center_wavelength > 0.0 && center_wavelength.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "wavelength {center_wavelength} must be > 0"
            )));
        }
        Ok(Self {
            waist,
            center_wavelength,
        })
    }
}

/// Largest argument held in the factorial table.
pub const MAX_FACTORIAL: usize = 64;
// 34! is the largest factorial that fits in u128.
const EXACT_FACTORIAL: usize = 34;

fn factorial_table() -> &'static [f64; MAX_FACTORIAL + 1] {
    static TABLE: OnceLock<[f64; MAX_FACTORIAL + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; MAX_FACTORIAL + 1];
        let mut exact: u128 = 1;
        for (n, slot) in t.iter_mut().enumerate().take(EXACT_FACTORIAL + 1) {
            if n > 0 {
                exact *= n as u128;
            }
            *slot = exact as f64;
        }
        for n in EXACT_FACTORIAL + 1..=MAX_FACTORIAL {
            t[n] = t[n - 1] * n as f64;
        }
        t
    })
}

/// n! from the lookup table; `None` above [`MAX_FACTORIAL`].
pub fn factorial(n: usize) -> Option<f64> {
    factorial_table().get(n).copied()
}

fn fact(n: usize) -> Result<f64> {
    factorial(n).ok_or_else(|| Error::IndexError(format!("{n}! exceeds the factorial table (max {MAX_FACTORIAL})")))
}

/// Generalized Laguerre polynomial L_p^α(x) by the three-term recurrence.
pub fn laguerre(p: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..p {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Radial part of the momentum-space mode at |q| (the e^{iℓφ} factor omitted).
pub fn lg_radial(mode: LGIndex, waist: f64, q: f64) -> f64 {
    let l = mode.abs_ell();
    let p = mode.p as usize;
    let norm = (factorial(p).unwrap_or(f64::INFINITY)
        / (PI * factorial(p + l as usize).unwrap_or(f64::INFINITY)))
    .sqrt();
    let sign = if mode.p % 2 == 0 { 1.0 } else { -1.0 };
    let x = q * waist / std::f64::consts::SQRT_2;
    sign * norm
        * (waist / std::f64::consts::SQRT_2)
        * x.powi(l as i32)
        * laguerre(mode.p, l as f64, x * x)
        * (-waist * waist * q * q / 4.0).exp()
}

/// Normalized momentum-space amplitude at the transverse wavevector `q` (rad/m).
pub fn lg_momentum_amplitude(mode: LGIndex, waist: f64, q: [f64; 2]) -> Complex64 {
    let r = q[0].hypot(q[1]);
    let phi = q[1].atan2(q[0]);
    Complex64::from_polar(1.0, mode.ell as f64 * phi) * lg_radial(mode, waist, r)
}

/// T_u^{p,ℓ} = √(p!(p+|ℓ|)!/π) (w/√2)^{2u+|ℓ|+1} (−1)^{p+u} / ((p−u)!(|ℓ|+u)!).
pub fn t_coefficient(u: i64, p: i64, ell: i64, waist: f64) -> Result<f64> {
    if u < 0 || p < 0 || u > p {
        return Err(Error::IndexError(format!("T coefficient needs 0 ≤ u ≤ p, got u={u}, p={p}")));
    }
    let (u, p, l) = (u as usize, p as usize, ell.unsigned_abs() as usize);
    let pre = (fact(p)? * fact(p + l)? / PI).sqrt();
    let sign = if (p + u) % 2 == 0 { 1.0 } else { -1.0 };
    let scale = (waist / std::f64::consts::SQRT_2).powi((2 * u + l + 1) as i32);
    Ok(pre * scale * sign / (fact(p - u)? * fact(l + u)?))
}
