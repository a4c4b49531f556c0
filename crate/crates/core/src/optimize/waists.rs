//! Per-ℓ collection waists that equalize pair-collection probabilities.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::biphoton::{DetuningGrid, ModeKernel, SpdcConfig};
use crate::error::{Error, Result};

/// Inclusive waist grid, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaistRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl WaistRange {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min > 0.0 && max > min && step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "waist range needs 0 < min < max and step > 0, got ({min}, {max}, {step})"
            )));
        }
        Ok(Self { min, max, step })
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.min + i as f64 * self.step).collect()
    }
}

/// Pair-collection probability of (LG_0^ℓ, LG_0^{−ℓ}) against the common
/// signal/idler waist.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaistSweepResult {
    pub ell: i32,
    pub waists: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Fraction of |C|² in the outer 5% of the grid at each waist.
    pub tail_fractions: Vec<f64>,
    /// True where the tail fraction exceeds the grid's limit, i.e. the
    /// spectrum is cut off and the probability underestimated.
    pub truncated: Vec<bool>,
}

impl WaistSweepResult {
    /// Index of the largest untruncated probability.
    pub fn argmax(&self) -> Option<usize> {
        (0..self.waists.len())
            .filter(|&i| !self.truncated[i])
            .max_by(|&a, &b| self.probabilities[a].total_cmp(&self.probabilities[b]))
    }
}

/// (P, tail fraction) of the fundamental radial pair at waist `w`.
pub fn probability_at_waist(template: &SpdcConfig, ell: i32, waist: f64, grid: &DetuningGrid) -> Result<(f64, f64)> {
    let cfg = template.with_collection_waists(waist, waist)?;
    let s = ModeKernel::new(&cfg, 0, 0, ell)?.spectrum(grid)?;
    Ok((s.norm_sqr(), s.tail_fraction()))
}

/// P_ℓ over the waist grid, signal and idler waists swept together.
pub fn waist_sweep(template: &SpdcConfig, ell: i32, range: &WaistRange, grid: &DetuningGrid) -> Result<WaistSweepResult> {
    let waists = range.values();
    let points: Vec<(f64, f64)> = waists
        .par_iter()
        .map(|&w| probability_at_waist(template, ell, w, grid))
        .collect::<Result<_>>()?;
    let limit = grid.tail_limit();
    Ok(WaistSweepResult {
        ell,
        probabilities: points.iter().map(|p| p.0).collect(),
        tail_fractions: points.iter().map(|p| p.1).collect(),
        truncated: points.iter().map(|p| p.1 > limit).collect(),
        waists,
    })
}

/// Which solution of P_ℓ(w) = P_ref to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Smaller waist than the maximum of P_ℓ.
    #[default]
    Small,
    /// Larger waist than the maximum of P_ℓ.
    Large,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaistMatch {
    pub reference_ell: i32,
    /// P_ref at its optimal waist: the level every other ℓ is matched to.
    pub reference_level: f64,
    pub waists: BTreeMap<i32, f64>,
    /// P_ℓ at the returned waist.
    pub probabilities: BTreeMap<i32, f64>,
    pub sweeps: Vec<WaistSweepResult>,
    pub branch: Branch,
}

const GOLDEN_TOL: f64 = 1e-10;

/// Reference ℓ gets the waist maximizing P_ref; every other ℓ gets the
/// crossing of P_ℓ with that level on the chosen branch, refined by bisection
/// inside the bracketing grid interval.
pub fn match_collection_waists(
    template: &SpdcConfig,
    ells: &[i32],
    reference_ell: i32,
    grid: &DetuningGrid,
    range: &WaistRange,
    branch: Branch,
) -> Result<WaistMatch> {
    if !ells.contains(&reference_ell) {
        return Err(Error::InvalidParameter(format!("reference ℓ={reference_ell} not among {ells:?}")));
    }
    let sweeps: Vec<WaistSweepResult> = ells
        .iter()
        .map(|&l| waist_sweep(template, l, range, grid))
        .collect::<Result<_>>()?;
    let p = |l: i32, w: f64| probability_at_waist(template, l, w, grid).map(|v| v.0);

    let rs = &sweeps[ells.iter().position(|&l| l == reference_ell).unwrap()];
    let k = rs.argmax().ok_or(Error::NoCrossing {
        ell: reference_ell,
        reference: f64::NAN,
    })?;
    let (w_ref, level) = if k == 0 || k + 1 == rs.waists.len() {
        (rs.waists[k], rs.probabilities[k])
    } else {
        golden_max(|w| p(reference_ell, w), rs.waists[k - 1], rs.waists[k + 1])?
    };

    let mut waists = BTreeMap::new();
    let mut probabilities = BTreeMap::new();
    waists.insert(reference_ell, w_ref);
    probabilities.insert(reference_ell, level);
    for (s, &l) in sweeps.iter().zip(ells) {
        if l == reference_ell {
            continue;
        }
        let no_crossing = Error::NoCrossing { ell: l, reference: level };
        let above: Vec<usize> = (0..s.waists.len()).filter(|&i| s.probabilities[i] >= level).collect();
        let (lo, hi) = match branch {
            Branch::Small => {
                let first = *above.first().ok_or(no_crossing.clone())?;
                if first == 0 {
                    return Err(no_crossing);
                }
                (first - 1, first)
            }
            Branch::Large => {
                let last = *above.last().ok_or(no_crossing.clone())?;
                if last + 1 == s.waists.len() {
                    return Err(no_crossing);
                }
                (last + 1, last)
            }
        };
        if s.truncated[lo] || s.truncated[hi] {
            return Err(Error::GridTooNarrow {
                tail_fraction: s.tail_fractions[lo].max(s.tail_fractions[hi]),
                limit: grid.tail_limit(),
            });
        }
        // bracket: P(w_below) < level ≤ P(w_above)
        let (mut below, mut above_w) = (s.waists[lo], s.waists[hi]);
        let mut pv = s.probabilities[hi];
        for _ in 0..60 {
            let mid = 0.5 * (below + above_w);
            pv = p(l, mid)?;
            if pv >= level {
                above_w = mid;
            } else {
                below = mid;
            }
            if (pv - level).abs() <= 1e-7 * level || (above_w - below).abs() < 1e-12 {
                break;
            }
        }
        let w = 0.5 * (below + above_w);
        waists.insert(l, w);
        probabilities.insert(l, p(l, w).unwrap_or(pv));
    }
    Ok(WaistMatch {
        reference_ell,
        reference_level: level,
        waists,
        probabilities,
        sweeps,
        branch,
    })
}

/// Golden-section search for the maximum of a unimodal f on [a, b].
fn golden_max(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > GOLDEN_TOL * (a.abs() + b.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_values_inclusive() {
        let r = WaistRange::new(10e-6, 100e-6, 2e-6).unwrap();
        let v = r.values();
        assert_eq!(v.len(), 46);
        assert!((v[45] - 100e-6).abs() < 1e-15);
        assert!(WaistRange::new(10e-6, 5e-6, 1e-6).is_err());
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_max(|x| Ok(-(x - 0.3f64).powi(2) + 2.0), 0.0, 1.0).unwrap();
        assert!((x - 0.3).abs() < 1e-6 && (fx - 2.0).abs() < 1e-12);
    }
}
