//! Radial-mode superpositions |u⟩ = Σ A_{p_i}|p_i⟩ (idler), |v⟩ = Σ B_{p_s}|p_s⟩
//! (signal) and the cost functions used to shape their joint spectrum.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::simplex::{nelder_mead, SimplexOptions};
use crate::biphoton::{ComplexSpectrum, DetuningGrid, ModeKernel, ModeLabel, SpdcConfig};
use crate::error::{Error, Result};

/// Unit-norm coefficient vectors over p = 0..=p_max.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperpositionModes {
    /// Idler coefficients A_{p_i}.
    pub a: Vec<Complex64>,
    /// Signal coefficients B_{p_s}.
    pub b: Vec<Complex64>,
}

fn normalize(v: &mut [Complex64]) -> Result<()> {
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidParameter("coefficient vector has zero norm".into()));
    }
    for c in v {
        *c /= n;
    }
    Ok(())
}

impl SuperpositionModes {
    pub fn new(mut a: Vec<Complex64>, mut b: Vec<Complex64>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::DimensionMismatch(format!("A has {} and B has {} coefficients", a.len(), b.len())));
        }
        normalize(&mut a)?;
        normalize(&mut b)?;
        Ok(Self { a, b })
    }

    /// Equal real weights on p = 0..=p_max.
    pub fn uniform(p_max: u32) -> Self {
        let v = vec![Complex64::new(1.0, 0.0); p_max as usize + 1];
        Self::new(v.clone(), v).expect("nonzero")
    }

    /// Only the fundamental radial mode.
    pub fn fundamental(p_max: u32) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); p_max as usize + 1];
        v[0] = Complex64::new(1.0, 0.0);
        Self::new(v.clone(), v).expect("nonzero")
    }

    pub fn p_max(&self) -> u32 {
        (self.a.len() - 1) as u32
    }

    /// ‖|A| − |B|‖_∞; compares magnitude profiles since the phase of each
    /// vector is partly gauge.
    pub fn asymmetry(&self) -> f64 {
        self.a.iter().zip(&self.b).map(|(x, y)| (x.norm() - y.norm()).abs()).fold(0.0, f64::max)
    }

    /// Real parameters: A[0] ≥ 0, (re, im) of A[1..], then the same for B.
    pub fn to_params(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(4 * self.a.len() - 2);
        for v in [&self.a, &self.b] {
            // rotate so element 0 is real and nonnegative
            let g = if v[0].norm() > 0.0 { v[0].conj() / v[0].norm() } else { Complex64::new(1.0, 0.0) };
            x.push(v[0].norm());
            for c in &v[1..] {
                let c = c * g;
                x.push(c.re);
                x.push(c.im);
            }
        }
        x
    }

    pub fn from_params(x: &[f64], p_max: u32) -> Result<Self> {
        let n = p_max as usize + 1;
        if x.len() != 4 * n - 2 {
            return Err(Error::DimensionMismatch(format!("{} parameters for p_max = {p_max}", x.len())));
        }
        let read = |x: &[f64]| -> Vec<Complex64> {
            std::iter::once(Complex64::new(x[0].abs(), 0.0))
                .chain(x[1..].chunks(2).map(|c| Complex64::new(c[0], c[1])))
                .collect()
        };
        Self::new(read(&x[..2 * n - 1]), read(&x[2 * n - 1..]))
    }
}

/// Raw spectra C_{p_s,p_i}^ℓ(Ω) for all p_s, p_i ≤ p_max.
#[derive(Debug, Clone)]
pub struct ModeBasisSpectra {
    pub ell: i32,
    pub p_max: u32,
    pub grid: DetuningGrid,
    /// Index p_i·(p_max+1) + p_s.
    values: Vec<Vec<Complex64>>,
    total_probability: f64,
}

impl ModeBasisSpectra {
    pub fn compute(config: &SpdcConfig, ell: i32, p_max: u32, grid: &DetuningGrid) -> Result<Self> {
        let n = p_max as usize + 1;
        let values: Vec<Vec<Complex64>> = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (pi, ps) = ((k / n) as u32, (k % n) as u32);
                Ok(ModeKernel::new(config, ps, pi, ell)?.spectrum(grid)?.values)
            })
            .collect::<Result<_>>()?;
        let total_probability = values.iter().map(|v| grid.integrate(|i| v[i].norm_sqr())).sum();
        Ok(Self {
            ell,
            p_max,
            grid: grid.clone(),
            values,
            total_probability,
        })
    }

    pub fn basis(&self, p_s: u32, p_i: u32) -> &[Complex64] {
        &self.values[(p_i * (self.p_max + 1) + p_s) as usize]
    }

    /// Σ_{p_i,p_s} ∫|C_{p_s,p_i}|² dΩ.
    pub fn total_probability(&self) -> f64 {
        self.total_probability
    }

    fn combine_values(&self, m: &SuperpositionModes) -> Result<Vec<Complex64>> {
        if m.p_max() != self.p_max {
            return Err(Error::DimensionMismatch(format!(
                "modes with p_max {} against a basis with p_max {}",
                m.p_max(),
                self.p_max
            )));
        }
        let n = self.p_max as usize + 1;
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.count()];
        for pi in 0..n {
            for ps in 0..n {
                let w = m.a[pi] * m.b[ps];
                if w.norm_sqr() == 0.0 {
                    continue;
                }
                for (o, v) in out.iter_mut().zip(&self.values[pi * n + ps]) {
                    *o += w * v;
                }
            }
        }
        Ok(out)
    }

    /// C_{u,v}(Ω) = Σ A_{p_i} B_{p_s} C_{p_s,p_i}(Ω), raw.
    pub fn combine(&self, m: &SuperpositionModes) -> Result<ComplexSpectrum> {
        let label = ModeLabel {
            p_s: self.p_max,
            p_i: self.p_max,
            ell: self.ell,
        };
        ComplexSpectrum::new(self.grid.clone(), self.combine_values(m)?, label)
    }
}

/// 1 − |∫ Φ_t* C_{u,v} dΩ|² with C_{u,v} renormalized; `target` must be unit-norm.
pub fn cost_target_spectrum(modes: &SuperpositionModes, basis: &ModeBasisSpectra, target: &ComplexSpectrum) -> Result<f64> {
    let c = basis.combine(modes)?.normalized();
    let ov = c.inner(target)?;
    Ok((1.0 - ov.norm_sqr()).clamp(0.0, 1.0))
}

/// 1 − ∫|C_{u,v}|² / Σ_{p_i,p_s} ∫|C_{p_s,p_i}|².
pub fn cost_brightness(modes: &SuperpositionModes, basis: &ModeBasisSpectra) -> Result<f64> {
    let c = basis.combine(modes)?;
    Ok((1.0 - c.norm_sqr() / basis.total_probability()).clamp(0.0, 1.0))
}

/// 1 − |∫ (C^ℓ)* C^{ℓ′} dΩ|² / (∫|C^ℓ|² ∫|C^{ℓ′}|²).
pub fn cost_spectral_match(
    modes: &SuperpositionModes,
    basis: &ModeBasisSpectra,
    modes_prime: &SuperpositionModes,
    basis_prime: &ModeBasisSpectra,
) -> Result<f64> {
    let a = basis.combine(modes)?;
    let b = basis_prime.combine(modes_prime)?;
    let ov = a.inner(&b)?.norm_sqr();
    let den = a.norm_sqr() * b.norm_sqr();
    if !(den > 0.0) {
        return Ok(1.0);
    }
    Ok((1.0 - ov / den).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub simplex: SimplexOptions,
    /// Extra simplex runs restarted from the best point while they keep
    /// improving by more than the tolerance.
    pub max_restarts: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            simplex: SimplexOptions::default(),
            max_restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizeResult {
    pub modes: SuperpositionModes,
    pub start_cost: f64,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best cost after each simplex run.
    pub trajectory: Vec<f64>,
}

/// Nelder–Mead over the gauge-fixed real parameters of (A, B); the cost
/// always sees normalized coefficients. Never returns a point worse than `start`.
pub fn minimize(
    cost: impl Fn(&SuperpositionModes) -> Result<f64>,
    start: &SuperpositionModes,
    options: &MinimizeOptions,
) -> Result<MinimizeResult> {
    let p_max = start.p_max();
    let start_cost = cost(start)?;
    if !start_cost.is_finite() {
        return Err(Error::InvalidParameter(format!("cost at the starting point is {start_cost}")));
    }
    let f = |x: &[f64]| {
        SuperpositionModes::from_params(x, p_max)
            .and_then(|m| cost(&m))
            .unwrap_or(f64::INFINITY)
    };
    let mut x = start.to_params();
    let mut best = start_cost;
    let mut iterations = 0;
    let mut converged = false;
    let mut trajectory = Vec::new();
    for _ in 0..=options.max_restarts {
        let r = nelder_mead(f, &x, &options.simplex);
        iterations += r.iterations;
        converged = r.converged;
        let gain = best - r.value;
        if r.value < best {
            best = r.value;
            x = r.x;
        }
        trajectory.push(best);
        if gain <= options.simplex.tolerance && r.converged {
            break;
        }
    }
    let modes = if best < start_cost { SuperpositionModes::from_params(&x, p_max)? } else { start.clone() };
    Ok(MinimizeResult {
        modes,
        start_cost,
        cost: best.min(start_cost),
        iterations,
        converged,
        trajectory,
    })
}

fn coefficients_json(v: &[Complex64]) -> Value {
    json!({
        "re": v.iter().map(|c| c.re).collect::<Vec<_>>(),
        "im": v.iter().map(|c| c.im).collect::<Vec<_>>(),
        "abs": v.iter().map(|c| c.norm()).collect::<Vec<_>>(),
    })
}

impl MinimizeResult {
    /// Report entry: start/end cost, iterations, coefficient arrays.
    pub fn to_json(&self) -> Value {
        json!({
            "start_cost": self.start_cost,
            "cost": self.cost,
            "iterations": self.iterations,
            "converged": self.converged,
            "trajectory": self.trajectory,
            "idler_A": coefficients_json(&self.modes.a),
            "signal_B": coefficients_json(&self.modes.b),
            "asymmetry": self.modes.asymmetry(),
        })
    }
}

/// Result of [`optimize_superpositions`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperpositionStudy {
    pub bright_ell: i32,
    pub bright: MinimizeResult,
    /// (ℓ′, result of matching its spectrum to the bright channel).
    pub matched: Vec<(i32, MinimizeResult)>,
}

/// Brightness-optimizes `bright_ell`, then shapes every other ℓ′ to match
/// its spectrum with the spectral-match cost.
pub fn optimize_superpositions(
    config: &SpdcConfig,
    bright_ell: i32,
    other_ells: &[i32],
    p_max: u32,
    grid: &DetuningGrid,
    options: &MinimizeOptions,
) -> Result<SuperpositionStudy> {
    let start = SuperpositionModes::uniform(p_max);
    let basis = ModeBasisSpectra::compute(config, bright_ell, p_max, grid)?;
    let bright = minimize(|m| cost_brightness(m, &basis), &start, options)?;
    let matched = other_ells
        .iter()
        .map(|&l| {
            let bp = ModeBasisSpectra::compute(config, l, p_max, grid)?;
            let r = minimize(|m| cost_spectral_match(&bright.modes, &basis, m, &bp), &start, options)?;
            Ok((l, r))
        })
        .collect::<Result<_>>()?;
    Ok(SuperpositionStudy {
        bright_ell,
        bright,
        matched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_round_trip_with_gauge() {
        let a = vec![Complex64::new(0.0, 2.0), Complex64::new(1.0, 1.0), Complex64::new(-0.5, 0.2)];
        let b = vec![Complex64::new(-1.0, 0.0), Complex64::new(0.3, -0.7), Complex64::new(0.1, 0.0)];
        let m = SuperpositionModes::new(a, b).unwrap();
        let x = m.to_params();
        assert_eq!(x.len(), 10);
        let back = SuperpositionModes::from_params(&x, 2).unwrap();
        assert!(back.a[0].im == 0.0 && back.a[0].re >= 0.0 && back.b[0].im == 0.0);
        // same vectors up to a phase on each
        for (v, w) in [(&m.a, &back.a), (&m.b, &back.b)] {
            let ph = w[0] / v[0];
            for (x, y) in v.iter().zip(w.iter()) {
                assert!((x * ph - y).norm() < 1e-12);
            }
        }
        assert!((m.asymmetry() - back.asymmetry()).abs() < 1e-12);
    }

    #[test]
    fn normalization_enforced() {
        let m = SuperpositionModes::uniform(3);
        assert!((m.a.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(SuperpositionModes::new(vec![Complex64::new(0.0, 0.0)], vec![Complex64::new(1.0, 0.0)]).is_err());
        assert!(SuperpositionModes::new(vec![Complex64::new(1.0, 0.0)], vec![]).is_err());
    }
}
