//! State-level quantities built from mode amplitudes: joint mode
//! correlation matrices, spectral overlaps, the spectrally traced spatial
//! density matrix, purity and fidelity.
//!
//! Everything is normalized over the requested truncated subspace, never
//! over the full state.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::biphoton::{checked_norm, ComplexSpectrum, DetuningGrid, ModeKernel, SpectralWindow, SpdcConfig};
use crate::error::{Error, Result};
use crate::lgmodes::LGIndex;
use crate::optimize::{ModeBasisSpectra, SuperpositionModes};

/// Cost guard for correlation matrices.
pub const MAX_CORRELATION_P: u32 = 4;
pub const MAX_CORRELATION_ELL: u32 = 6;

/// Joint detection probabilities over a truncated (p, ℓ) subspace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeCorrelationMatrix {
    pub signal_modes: Vec<LGIndex>,
    pub idler_modes: Vec<LGIndex>,
    /// Row = signal mode, column = idler mode.
    pub probabilities: Vec<Vec<f64>>,
    pub window: Option<SpectralWindow>,
    pub p_max: u32,
    pub ell_max: u32,
    /// Share of the summed |C|² of the whole subspace in the outer 5% of the
    /// grid; `None` for windowed matrices.
    pub tail_fraction: Option<f64>,
}

impl ModeCorrelationMatrix {
    pub fn get(&self, signal: LGIndex, idler: LGIndex) -> Option<f64> {
        let r = self.signal_modes.iter().position(|m| *m == signal)?;
        let c = self.idler_modes.iter().position(|m| *m == idler)?;
        Some(self.probabilities[r][c])
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().flatten().sum()
    }

    /// Number of entries strictly above `threshold`.
    pub fn count_above(&self, threshold: f64) -> usize {
        self.probabilities.iter().flatten().filter(|&&p| p > threshold).count()
    }
}

/// Modes ordered by ℓ ascending, then p.
fn subspace_modes(p_max: u32, ell_max: u32) -> Vec<LGIndex> {
    let l = ell_max as i32;
    (-l..=l).flat_map(|ell| (0..=p_max).map(move |p| LGIndex::new(p, ell))).collect()
}

/// Probabilities of every (signal, idler) mode pair with p ≤ p_max and
/// |ℓ| ≤ ell_max, integrated over the full grid or only inside `window`.
pub fn joint_correlation_matrix(
    config: &SpdcConfig,
    p_max: u32,
    ell_max: u32,
    grid: &DetuningGrid,
    window: Option<&SpectralWindow>,
) -> Result<ModeCorrelationMatrix> {
    if p_max > MAX_CORRELATION_P || ell_max > MAX_CORRELATION_ELL {
        return Err(Error::BudgetExceeded(format!(
            "correlation matrix limited to p ≤ {MAX_CORRELATION_P}, |ℓ| ≤ {MAX_CORRELATION_ELL}"
        )));
    }
    let bounds = match window {
        Some(w) => {
            let (lo, hi) = w.detuning_bounds(config.signal.center_wavelength);
            if lo < -grid.omega_max() || hi > grid.omega_max() {
                return Err(Error::InvalidParameter(format!(
                    "window {:.4} nm ± {:.4} nm extends beyond the detuning grid",
                    w.center * 1e9,
                    w.width * 0.5e9
                )));
            }
            Some((lo, hi))
        }
        None => None,
    };
    let combos: Vec<(u32, u32, u32)> = (0..=ell_max)
        .flat_map(|l| (0..=p_max).flat_map(move |ps| (0..=p_max).map(move |pi| (ps, pi, l))))
        .collect();
    // (probability, tail mass) per combination
    let values: Vec<(f64, f64)> = combos
        .par_iter()
        .map(|&(ps, pi, l)| {
            let kernel = ModeKernel::new(config, ps, pi, l as i32)?;
            match bounds {
                Some((lo, hi)) => Ok((kernel.interval_probability(lo, hi)?, 0.0)),
                None => {
                    let s = kernel.spectrum(grid)?;
                    let p = s.norm_sqr();
                    Ok((p, p * s.tail_fraction()))
                }
            }
        })
        .collect::<Result<_>>()?;
    // Broad, weak high-p spectra may exceed the tail limit on their own; the
    // check applies to the subspace total that sets the normalization.
    let tail_fraction = match bounds {
        Some(_) => None,
        None => {
            let mult = |l: u32| if l == 0 { 1.0 } else { 2.0 };
            let (p, t) = combos
                .iter()
                .zip(&values)
                .fold((0.0, 0.0), |(p, t), (c, v)| (p + mult(c.2) * v.0, t + mult(c.2) * v.1));
            let f = if p > 0.0 { t / p } else { 0.0 };
            if f > grid.tail_limit() {
                return Err(Error::GridTooNarrow {
                    tail_fraction: f,
                    limit: grid.tail_limit(),
                });
            }
            Some(f)
        }
    };
    let lookup = |ps: u32, pi: u32, l: u32| {
        let n = (p_max + 1) as usize;
        values[(l as usize * n + ps as usize) * n + pi as usize].0
    };

    let modes = subspace_modes(p_max, ell_max);
    let mut probabilities: Vec<Vec<f64>> = modes
        .iter()
        .map(|s| {
            modes
                .iter()
                .map(|i| if s.ell + i.ell == 0 { lookup(s.p, i.p, s.abs_ell()) } else { 0.0 })
                .collect()
        })
        .collect();
    let total: f64 = probabilities.iter().flatten().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidParameter("subspace carries no probability".into()));
    }
    for v in probabilities.iter_mut().flatten() {
        *v /= total;
    }
    Ok(ModeCorrelationMatrix {
        signal_modes: modes.clone(),
        idler_modes: modes,
        probabilities,
        window: window.copied(),
        p_max,
        ell_max,
        tail_fraction,
    })
}

/// How an OAM channel is collected.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Collection {
    /// Fundamental radial mode (p = 0) with equal signal and idler waists, meters.
    Waist(f64),
    /// Radial superposition using the collection waists of the base config.
    Superposition(SuperpositionModes),
}

/// One |ℓ, −ℓ⟩ channel of a spatial subspace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSpec {
    pub ell: i32,
    pub collection: Collection,
    /// Display label; defaults to ℓ.
    pub label: String,
}

impl ChannelSpec {
    pub fn waist(ell: i32, waist: f64) -> Self {
        Self {
            ell,
            collection: Collection::Waist(waist),
            label: ell.to_string(),
        }
    }

    pub fn superposition(ell: i32, modes: SuperpositionModes) -> Self {
        Self {
            ell,
            collection: Collection::Superposition(modes),
            label: ell.to_string(),
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Raw complex spectrum collected by this channel.
    pub fn spectrum(&self, config: &SpdcConfig, grid: &DetuningGrid) -> Result<ComplexSpectrum> {
        match &self.collection {
            Collection::Waist(w) => ModeKernel::new(&config.with_collection_waists(*w, *w)?, 0, 0, self.ell)?.spectrum(grid),
            Collection::Superposition(m) => {
                let basis = ModeBasisSpectra::compute(config, self.ell, m.p_max(), grid)?;
                basis.combine(m)
            }
        }
    }
}

/// A_{ℓ,ℓ̃} = ∫ C_ℓ C_ℓ̃* dΩ with both spectra normalized to unit L² norm.
pub fn spectral_overlap(config: &SpdcConfig, a: &ChannelSpec, b: &ChannelSpec, grid: &DetuningGrid) -> Result<Complex64> {
    let sa = a.spectrum(config, grid)?.normalized();
    let sb = b.spectrum(config, grid)?.normalized();
    sa.inner(&sb)
}

/// Hermitian, trace-1, positive semidefinite matrix with row labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialDensityMatrix {
    labels: Vec<String>,
    matrix: DMatrix<Complex64>,
}

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-10;

impl SpatialDensityMatrix {
    /// Validates the density-matrix invariants.
    pub fn new(labels: Vec<String>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n || labels.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for a {}×{} matrix",
                labels.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = (&matrix - matrix.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidParameter(format!("matrix is not Hermitian (deviation {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidParameter(format!("trace {tr} is not 1")));
        }
        let rho = Self { labels, matrix };
        let min = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::InvalidParameter(format!("matrix has negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    /// Hermitizes and trace-normalizes `m` before validation.
    pub fn from_unnormalized(labels: Vec<String>, m: DMatrix<Complex64>) -> Result<Self> {
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let tr = h.trace().re;
        if !(tr > 0.0) {
            return Err(Error::InvalidParameter("matrix has non-positive trace".into()));
        }
        Self::new(labels, h / Complex64::new(tr, 0.0))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.clone().symmetric_eigenvalues().iter().copied().collect()
    }

    /// `{"labels", "re", "im", "meta"}`, row-major.
    pub fn to_json(&self, meta: Value) -> Value {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..self.dim()).map(|r| (0..self.dim()).map(|c| f(&self.matrix[(r, c)])).collect()).collect()
        };
        json!({
            "labels": self.labels,
            "re": rows(|v| v.re),
            "im": rows(|v| v.im),
            "meta": meta,
        })
    }
}

fn pair_label(label: &str, ell: i32) -> String {
    format!("({label},{})", -ell)
}

/// ρ = Σ A_{ℓ,ℓ̃} |ℓ,−ℓ⟩⟨ℓ̃,−ℓ̃| from raw channel spectra, normalized to trace 1.
pub fn reduced_spatial_density(config: &SpdcConfig, subspace: &[ChannelSpec], grid: &DetuningGrid) -> Result<SpatialDensityMatrix> {
    if subspace.is_empty() {
        return Err(Error::DimensionMismatch("empty subspace".into()));
    }
    let spectra: Vec<ComplexSpectrum> = subspace
        .par_iter()
        .map(|c| {
            let s = c.spectrum(config, grid)?;
            checked_norm(&s)?;
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let n = spectra.len();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for a in 0..n {
        for b in a..n {
            let v = spectra[a].inner(&spectra[b])?;
            m[(a, b)] = v;
            m[(b, a)] = v.conj();
        }
        m[(a, a)].im = 0.0;
    }
    let labels = subspace.iter().map(|c| pair_label(&c.label, c.ell)).collect();
    SpatialDensityMatrix::from_unnormalized(labels, m)
}

/// Tr(ρ²).
pub fn purity(rho: &SpatialDensityMatrix) -> f64 {
    let m = rho.matrix();
    m.iter().map(|v| v.norm_sqr()).sum()
}

fn sqrt_psd(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = m.clone().symmetric_eigen();
    let roots = eig.eigenvalues.map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// Uhlmann fidelity (Tr √(√ρ σ √ρ))².
pub fn fidelity(rho: &SpatialDensityMatrix, sigma: &SpatialDensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!("{}×{} vs {}×{}", rho.dim(), rho.dim(), sigma.dim(), sigma.dim())));
    }
    let s = sqrt_psd(rho.matrix());
    let inner = &s * sigma.matrix() * &s;
    let inner = (&inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
    let tr: f64 = inner.symmetric_eigenvalues().iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// Projector onto (|ℓ,−ℓ⟩ + e^{iφ}|ℓ̃,−ℓ̃⟩)/√2.
pub fn target_state(ell: i32, ell_tilde: i32, phase: f64) -> Result<SpatialDensityMatrix> {
    if ell == ell_tilde {
        return Err(Error::DegenerateSubspace(ell));
    }
    let labels = vec![pair_label(&ell.to_string(), ell), pair_label(&ell_tilde.to_string(), ell_tilde)];
    SpatialDensityMatrix::new(labels, superposition_projector(2, 0, 1, phase))
}

/// |ψ⟩⟨ψ| for ψ = (|i⟩ + e^{iφ}|j⟩)/√2 in dimension `dim`.
pub fn superposition_projector(dim: usize, i: usize, j: usize, phase: f64) -> DMatrix<Complex64> {
    let mut v = nalgebra::DVector::from_element(dim, Complex64::new(0.0, 0.0));
    v[i] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[j] = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, phase);
    &v * v.adjoint()
}

/// Fidelity with the maximally entangled target on basis states (i, j),
/// maximized over the relative phase φ. Returns (F, φ).
///
/// For a pure target F = ½(ρ_ii + ρ_jj) + Re(e^{iφ} ρ_ij), so the optimum
/// is φ = −arg ρ_ij; the returned F is the Uhlmann value at that phase.
pub fn max_fidelity_over_phase(rho: &SpatialDensityMatrix, i: usize, j: usize) -> Result<(f64, f64)> {
    if i >= rho.dim() || j >= rho.dim() || i == j {
        return Err(Error::DimensionMismatch(format!("basis pair ({i}, {j}) in dimension {}", rho.dim())));
    }
    let phase = (-rho.matrix()[(i, j)].arg()).rem_euclid(2.0 * std::f64::consts::PI);
    let target = SpatialDensityMatrix::new(rho.labels().to_vec(), superposition_projector(rho.dim(), i, j, phase))?;
    Ok((fidelity(rho, &target)?, phase))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn purity_bounds() {
        let pure = target_state(1, 2, 0.3).unwrap();
        assert!((purity(&pure) - 1.0).abs() < 1e-12);
        let mixed = SpatialDensityMatrix::new(labels(2), DMatrix::from_diagonal_element(2, 2, c(0.5, 0.0))).unwrap();
        assert!((purity(&mixed) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn target_states() {
        let t = target_state(1, 2, 0.0).unwrap();
        assert!(t.matrix().iter().all(|v| (v - c(0.5, 0.0)).norm() < 1e-15));
        let t = target_state(1, 2, std::f64::consts::PI).unwrap();
        assert!((t.matrix()[(0, 1)] - c(-0.5, 0.0)).norm() < 1e-15);
        assert_eq!(target_state(3, 3, 0.0), Err(Error::DegenerateSubspace(3)));
    }

    #[test]
    fn fidelity_cases() {
        let bell = SpatialDensityMatrix::new(labels(4), superposition_projector(4, 0, 3, 0.0)).unwrap();
        let mut m = DMatrix::from_element(4, 4, c(0.0, 0.0));
        m[(0, 0)] = c(1.0, 0.0);
        let zero = SpatialDensityMatrix::new(labels(4), m).unwrap();
        assert!((fidelity(&zero, &bell).unwrap() - 0.5).abs() < 1e-12);
        assert!((fidelity(&bell, &bell).unwrap() - 1.0).abs() < 1e-12);
        let t = target_state(1, 2, 0.0).unwrap();
        assert!(matches!(fidelity(&t, &bell), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn perturbed_target_keeps_fidelity_near_one() {
        let t = superposition_projector(2, 0, 1, 0.4);
        let mixed = DMatrix::from_diagonal_element(2, 2, c(0.5, 0.0));
        let eps = 1e-8;
        let rho = SpatialDensityMatrix::new(labels(2), &t * c(1.0 - eps, 0.0) + mixed * c(eps, 0.0)).unwrap();
        let target = SpatialDensityMatrix::new(labels(2), t).unwrap();
        assert!(fidelity(&rho, &target).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn phase_sweep_recovers_phase() {
        let rho = SpatialDensityMatrix::new(labels(2), superposition_projector(2, 0, 1, 2.1)).unwrap();
        let (f, phi) = max_fidelity_over_phase(&rho, 0, 1).unwrap();
        assert!((f - 1.0).abs() < 1e-10 && (phi - 2.1).abs() < 1e-10);
        // analytic value for a 2×2 state
        let m = DMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.0)]);
        let rho = SpatialDensityMatrix::new(labels(2), m).unwrap();
        let (f, _) = max_fidelity_over_phase(&rho, 0, 1).unwrap();
        assert!((f - (0.5 + 0.05f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn invalid_matrices_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.2, 0.0)]);
        assert!(SpatialDensityMatrix::new(labels(2), m).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(0.5, 0.0)]);
        assert!(SpatialDensityMatrix::new(labels(2), m).is_err());
    }

    #[test]
    fn json_layout() {
        let t = target_state(1, 4, 0.0).unwrap();
        let v = t.to_json(json!({"k": 1}));
        assert_eq!(v["labels"][1], "(4,-4)");
        assert!((v["re"][0][1].as_f64().unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(v["im"][0][0], 0.0);
        assert_eq!(v["meta"]["k"], 1);
    }

    proptest! {
        #[test]
        fn fidelity_is_symmetric_and_bounded(a in prop::collection::vec(-1.0f64..1.0, 8), b in prop::collection::vec(-1.0f64..1.0, 8)) {
            let mk = |v: &[f64]| {
                let t = DMatrix::from_row_slice(2, 2, &[c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7])]);
                SpatialDensityMatrix::from_unnormalized(labels(2), &t * t.adjoint() + DMatrix::identity(2, 2) * c(1e-3, 0.0)).unwrap()
            };
            let (r, s) = (mk(&a), mk(&b));
            let f1 = fidelity(&r, &s).unwrap();
            let f2 = fidelity(&s, &r).unwrap();
            prop_assert!((0.0..=1.0).contains(&f1));
            prop_assert!((f1 - f2).abs() < 1e-9);
            let p = purity(&r);
            prop_assert!((0.5 - 1e-12..=1.0 + 1e-12).contains(&p));
        }
    }
}
