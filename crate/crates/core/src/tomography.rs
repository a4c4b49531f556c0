//! Projective tomography of a two-dimensional OAM subspace per photon:
//! count simulation, linear inversion, and maximum-likelihood reconstruction.
//!
//! The joint space is (signal ∈ {ℓ, ℓ̃}) ⊗ (idler ∈ {−ℓ, −ℓ̃}) with index
//! 2·s + i, so |ℓ,−ℓ⟩ is index 0 and |ℓ̃,−ℓ̃⟩ is index 3. Each photon is
//! projected on six states; the 36 joint projectors are ordered signal-major.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, SimplexOptions};
use crate::state::{fidelity, max_fidelity_over_phase, purity, superposition_projector, SpatialDensityMatrix};

/// Single-photon measurement state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PhotonState {
    L,
    Lt,
    LPlusLt,
    LMinusLt,
    LPlusILt,
    LMinusILt,
}

impl PhotonState {
    pub const ALL: [PhotonState; 6] = [
        PhotonState::L,
        PhotonState::Lt,
        PhotonState::LPlusLt,
        PhotonState::LMinusLt,
        PhotonState::LPlusILt,
        PhotonState::LMinusILt,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PhotonState::L => "l",
            PhotonState::Lt => "lt",
            PhotonState::LPlusLt => "l+lt",
            PhotonState::LMinusLt => "l-lt",
            PhotonState::LPlusILt => "l+ilt",
            PhotonState::LMinusILt => "l-ilt",
        }
    }

    /// Which of the three bases the state belongs to.
    pub fn basis(&self) -> usize {
        match self {
            PhotonState::L | PhotonState::Lt => 0,
            PhotonState::LPlusLt | PhotonState::LMinusLt => 1,
            PhotonState::LPlusILt | PhotonState::LMinusILt => 2,
        }
    }

    /// Amplitudes on (|ℓ⟩, |ℓ̃⟩).
    pub fn vector(&self) -> [Complex64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = Complex64::new;
        match self {
            PhotonState::L => [c(1.0, 0.0), c(0.0, 0.0)],
            PhotonState::Lt => [c(0.0, 0.0), c(1.0, 0.0)],
            PhotonState::LPlusLt => [c(h, 0.0), c(h, 0.0)],
            PhotonState::LMinusLt => [c(h, 0.0), c(-h, 0.0)],
            PhotonState::LPlusILt => [c(h, 0.0), c(0.0, h)],
            PhotonState::LMinusILt => [c(h, 0.0), c(0.0, -h)],
        }
    }
}

impl fmt::Display for PhotonState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhotonState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PhotonState::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown state `{s}` (expected l, lt, l+lt, l-lt, l+ilt, l-ilt)")))
    }
}

/// The 36 rank-1 joint projectors for the subspace pair (ℓ, ℓ̃).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSet {
    pub ell: i32,
    pub ell_tilde: i32,
    pub states: Vec<(PhotonState, PhotonState)>,
    pub projectors: Vec<DMatrix<Complex64>>,
    /// |s⟩⊗|i⟩ for each projector, so that P_j = v_j v_j†.
    pub vectors: Vec<[Complex64; 4]>,
}

impl ProjectorSet {
    pub fn new(ell: i32, ell_tilde: i32) -> Result<Self> {
        if ell == ell_tilde {
            return Err(Error::DegenerateSubspace(ell));
        }
        let mut states = Vec::with_capacity(36);
        let mut projectors = Vec::with_capacity(36);
        let mut vectors = Vec::with_capacity(36);
        for s in PhotonState::ALL {
            for i in PhotonState::ALL {
                let (vs, vi) = (s.vector(), i.vector());
                let a: [Complex64; 4] = std::array::from_fn(|k| vs[k / 2] * vi[k % 2]);
                let v = DVector::from_row_slice(&a);
                projectors.push(&v * v.adjoint());
                vectors.push(a);
                states.push((s, i));
            }
        }
        Ok(Self {
            ell,
            ell_tilde,
            states,
            projectors,
            vectors,
        })
    }

    /// Basis-pair index 3·basis(signal) + basis(idler), 0..9.
    pub fn setting_index(&self, j: usize) -> usize {
        let (s, i) = self.states[j];
        3 * s.basis() + i.basis()
    }

    pub fn index_of(&self, signal: PhotonState, idler: PhotonState) -> usize {
        self.states.iter().position(|&p| p == (signal, idler)).expect("all 36 pairs present")
    }

    /// Labels of the four joint basis states.
    pub fn joint_labels(&self) -> Vec<String> {
        let (l, t) = (self.ell, self.ell_tilde);
        vec![format!("({l},{})", -l), format!("({l},{})", -t), format!("({t},{})", -l), format!("({t},{})", -t)]
    }

    /// Born probabilities Tr(ρ P_j).
    pub fn probabilities(&self, rho: &DMatrix<Complex64>) -> Vec<f64> {
        self.projectors.iter().map(|p| (rho * p).trace().re.max(0.0)).collect()
    }
}

/// Places a 2×2 density matrix over (|ℓ,−ℓ⟩, |ℓ̃,−ℓ̃⟩) on joint indices 0 and 3.
pub fn embed(rho: &SpatialDensityMatrix, projectors: &ProjectorSet) -> Result<SpatialDensityMatrix> {
    match rho.dim() {
        4 => Ok(rho.clone()),
        2 => {
            let mut m = DMatrix::from_element(4, 4, Complex64::new(0.0, 0.0));
            for (a, ja) in [(0, 0), (1, 3)] {
                for (b, jb) in [(0, 0), (1, 3)] {
                    m[(ja, jb)] = rho.matrix()[(a, b)];
                }
            }
            SpatialDensityMatrix::new(projectors.joint_labels(), m)
        }
        d => Err(Error::DimensionMismatch(format!("tomography needs a 2×2 or 4×4 state, got {d}×{d}"))),
    }
}

/// Counts for one set of 36 projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyRun {
    pub projectors: ProjectorSet,
    pub counts: Vec<u64>,
    pub total_counts: u64,
    pub rng_seed: Option<u64>,
    /// Relative detection efficiency per projector; uniform when absent.
    pub efficiencies: Option<Vec<f64>>,
}

impl TomographyRun {
    pub fn new(projectors: ProjectorSet, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != 36 {
            return Err(Error::DimensionMismatch(format!("{} counts, expected 36", counts.len())));
        }
        let total_counts = counts.iter().sum();
        Ok(Self {
            projectors,
            counts,
            total_counts,
            rng_seed: None,
            efficiencies: None,
        })
    }

    pub fn with_efficiencies(mut self, eff: Vec<f64>) -> Result<Self> {
        if eff.len() != 36 || eff.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidParameter("efficiencies must be 36 positive weights".into()));
        }
        self.efficiencies = Some(eff);
        Ok(self)
    }

    fn efficiency(&self, j: usize) -> f64 {
        self.efficiencies.as_ref().map_or(1.0, |e| e[j])
    }
}

/// Draws counts with mean `total_counts · e_j Tr(ρP_j) / Σ_k e_k Tr(ρP_k)`.
/// Poisson noise from a ChaCha8 stream when `seed` is given, rounded means otherwise.
pub fn simulate_counts(
    rho: &SpatialDensityMatrix,
    projectors: &ProjectorSet,
    total_counts: u64,
    seed: Option<u64>,
    efficiencies: Option<&[f64]>,
) -> Result<TomographyRun> {
    if total_counts == 0 {
        return Err(Error::InvalidParameter("total_counts must be > 0".into()));
    }
    let rho = embed(rho, projectors)?;
    let eff = |j: usize| efficiencies.map_or(1.0, |e| e[j]);
    if let Some(e) = efficiencies {
        if e.len() != 36 {
            return Err(Error::DimensionMismatch(format!("{} efficiencies, expected 36", e.len())));
        }
    }
    let probs: Vec<f64> = projectors.probabilities(rho.matrix()).iter().enumerate().map(|(j, p)| p * eff(j)).collect();
    let norm: f64 = probs.iter().sum();
    let means: Vec<f64> = probs.iter().map(|p| total_counts as f64 * p / norm).collect();
    let counts: Vec<u64> = match seed {
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            means
                .iter()
                .map(|&m| {
                    if m > 0.0 {
                        Poisson::new(m).map(|d| d.sample(&mut rng) as u64).map_err(|e| Error::InvalidParameter(e.to_string()))
                    } else {
                        Ok(0)
                    }
                })
                .collect::<Result<_>>()?
        }
        None => means.iter().map(|m| m.round() as u64).collect(),
    };
    let mut run = TomographyRun::new(projectors.clone(), counts)?;
    run.rng_seed = seed;
    if let Some(e) = efficiencies {
        run = run.with_efficiencies(e.to_vec())?;
    }
    Ok(run)
}

fn psd_projection(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let clipped = eig.eigenvalues.map(|v| Complex64::new(v.max(0.0), 0.0));
    let p = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.adjoint();
    let tr = p.trace().re;
    if tr > 0.0 {
        p / Complex64::new(tr, 0.0)
    } else {
        DMatrix::identity(4, 4) * Complex64::new(0.25, 0.0)
    }
}

/// Least-squares inversion of the per-setting frequencies, projected onto
/// the trace-1 PSD cone.
pub fn linear_inversion(run: &TomographyRun) -> Result<SpatialDensityMatrix> {
    let ps = &run.projectors;
    let mut setting_totals = [0.0; 9];
    for j in 0..36 {
        setting_totals[ps.setting_index(j)] += run.counts[j] as f64 / run.efficiency(j);
    }
    let mut a = DMatrix::from_element(36, 16, Complex64::new(0.0, 0.0));
    let mut f = DVector::from_element(36, Complex64::new(0.0, 0.0));
    for j in 0..36 {
        // Tr(ρP) = Σ_{ab} ρ_ab P_ba
        for r in 0..4 {
            for c in 0..4 {
                a[(j, 4 * r + c)] = ps.projectors[j][(c, r)];
            }
        }
        let tot = setting_totals[ps.setting_index(j)];
        f[j] = Complex64::new(if tot > 0.0 { run.counts[j] as f64 / run.efficiency(j) / tot } else { 0.25 }, 0.0);
    }
    let sol = a
        .svd(true, true)
        .solve(&f, 1e-12)
        .map_err(|e| Error::NoConvergence(format!("linear inversion: {e}")))?;
    let m = DMatrix::from_row_slice(4, 4, sol.as_slice());
    SpatialDensityMatrix::new(ps.joint_labels(), psd_projection(&m))
}

/// ρ = T†T / Tr(T†T), T lower-triangular with real diagonal (16 parameters).
fn rho_from_params(t: &[f64]) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(4, 4, Complex64::new(0.0, 0.0));
    let mut k = 4;
    for r in 0..4 {
        m[(r, r)] = Complex64::new(t[r], 0.0);
        for c in 0..r {
            m[(r, c)] = Complex64::new(t[k], t[k + 1]);
            k += 2;
        }
    }
    let p = m.adjoint() * &m;
    let tr = p.trace().re;
    p / Complex64::new(tr, 0.0)
}

/// Inverse of [`rho_from_params`] via a Cholesky factor of the index-reversed ρ.
fn params_from_rho(rho: &DMatrix<Complex64>) -> Vec<f64> {
    let reg = rho + DMatrix::identity(4, 4) * Complex64::new(1e-9, 0.0);
    let rev = DMatrix::from_fn(4, 4, |r, c| reg[(3 - r, 3 - c)]);
    let l = rev.cholesky().map(|c| c.l()).unwrap_or_else(|| DMatrix::identity(4, 4));
    let lt = l.adjoint();
    let t = DMatrix::from_fn(4, 4, |r, c| lt[(3 - r, 3 - c)]);
    let mut x = vec![0.0; 16];
    let mut k = 4;
    for r in 0..4 {
        x[r] = t[(r, r)].re;
        for c in 0..r {
            x[k] = t[(r, c)].re;
            x[k + 1] = t[(r, c)].im;
            k += 2;
        }
    }
    x
}

/// Poisson negative log-likelihood with the overall rate profiled out,
/// offset so the saturated model (μ_j = n_j) scores zero.
pub fn negative_log_likelihood(run: &TomographyRun, rho: &DMatrix<Complex64>) -> f64 {
    let p = run.projectors.probabilities(rho);
    nll_from_probabilities(run, &p)
}

fn nll_from_probabilities(run: &TomographyRun, p: &[f64]) -> f64 {
    let norm: f64 = p.iter().enumerate().map(|(j, v)| v * run.efficiency(j)).sum();
    let n = run.total_counts as f64;
    let mut nll = 0.0;
    for (j, v) in p.iter().enumerate() {
        let mu = n * v * run.efficiency(j) / norm;
        let c = run.counts[j] as f64;
        if c > 0.0 {
            nll += c * (c / mu.max(1e-300)).ln();
        }
    }
    nll
}

/// Tr(T†T P_j) = |T v_j|², skipping the explicit density matrix.
fn nll_from_params(run: &TomographyRun, t: &[f64]) -> f64 {
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    let mut k = 4;
    for r in 0..4 {
        m[r][r] = Complex64::new(t[r], 0.0);
        for c in 0..r {
            m[r][c] = Complex64::new(t[k], t[k + 1]);
            k += 2;
        }
    }
    let p: Vec<f64> = run
        .projectors
        .vectors
        .iter()
        .map(|v| (0..4).map(|r| (0..=r).map(|c| m[r][c] * v[c]).sum::<Complex64>().norm_sqr()).sum())
        .collect();
    nll_from_probabilities(run, &p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleResult {
    pub rho: SpatialDensityMatrix,
    pub negative_log_likelihood: f64,
    pub evaluations: usize,
    /// False when the last simplex run hit its iteration cap.
    pub converged: bool,
}

/// Maximum-likelihood density matrix.
///
/// Starts at the maximally mixed state. If that run does not converge it is
/// restarted from the PSD-projected linear-inversion estimate (keeping the
/// better point), then from the best point while restarts keep improving.
pub fn mle_reconstruct(run: &TomographyRun) -> Result<MleResult> {
    if run.total_counts == 0 {
        return Err(Error::InvalidParameter("no counts to reconstruct from".into()));
    }
    let f = |x: &[f64]| nll_from_params(run, x);
    let options = SimplexOptions {
        max_iterations: 20_000,
        tolerance: 1e-9,
        initial_step: 0.1,
    };
    let mut start = vec![0.0; 16];
    start[..4].fill(0.5);
    let mut best = nelder_mead(f, &start, &options);
    let mut evaluations = best.evaluations;
    if !best.converged {
        let li = params_from_rho(linear_inversion(run)?.matrix());
        let r = nelder_mead(f, &li, &options);
        evaluations += r.evaluations;
        if r.value < best.value {
            best = r;
        }
    }
    for _ in 0..6 {
        let r = nelder_mead(f, &best.x, &options);
        evaluations += r.evaluations;
        let gain = best.value - r.value;
        let converged = r.converged;
        if r.value < best.value {
            best = r;
        }
        if gain <= options.tolerance && converged {
            best.converged = true;
            break;
        }
    }
    let rho = SpatialDensityMatrix::from_unnormalized(run.projectors.joint_labels(), rho_from_params(&best.x))?;
    Ok(MleResult {
        rho,
        negative_log_likelihood: best.value,
        evaluations,
        converged: best.converged,
    })
}

/// ½ Σ |λ_k(ρ − σ)|.
pub fn trace_distance(rho: &SpatialDensityMatrix, sigma: &SpatialDensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    let d = rho.matrix() - sigma.matrix();
    Ok(0.5 * d.symmetric_eigenvalues().iter().map(|v| v.abs()).sum::<f64>())
}

/// V = Σ_i P_ii / Σ_ij P_ij for a square crosstalk matrix.
pub fn visibility(crosstalk: &[Vec<f64>]) -> Result<f64> {
    let n = crosstalk.len();
    if crosstalk.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("crosstalk matrix is not square".into()));
    }
    if crosstalk.iter().flatten().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidParameter("crosstalk entries must be ≥ 0".into()));
    }
    let total: f64 = crosstalk.iter().flatten().sum();
    if n == 0 || total == 0.0 {
        return Err(Error::EmptyMatrix);
    }
    Ok((0..n).map(|i| crosstalk[i][i]).sum::<f64>() / total)
}

/// Figures of merit of a reconstruction against the maximally entangled
/// target on |ℓ,−ℓ⟩, |ℓ̃,−ℓ̃⟩.
pub fn report(run: &TomographyRun, mle: &MleResult) -> Result<Value> {
    let rho = &mle.rho;
    let target0 = SpatialDensityMatrix::new(rho.labels().to_vec(), superposition_projector(4, 0, 3, 0.0))?;
    let (f_max, phase) = max_fidelity_over_phase(rho, 0, 3)?;
    let m = rho.matrix();
    let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> { (0..4).map(|r| (0..4).map(|c| f(&m[(r, c)])).collect()).collect() };
    Ok(json!({
        "ell": run.projectors.ell,
        "ell_tilde": run.projectors.ell_tilde,
        "counts": run.projectors.states.iter().zip(&run.counts).map(|((s, i), n)| json!({
            "signal_state": s.as_str(), "idler_state": i.as_str(), "counts": n
        })).collect::<Vec<_>>(),
        "total_counts": run.total_counts,
        "rho": {"labels": rho.labels(), "re": rows(|v| v.re), "im": rows(|v| v.im)},
        "purity": purity(rho),
        "fidelity": fidelity(rho, &target0)?,
        "fidelity_max_over_phase": f_max,
        "optimal_phase": phase,
        "negative_log_likelihood": mle.negative_log_likelihood,
        "converged": mle.converged,
    }))
}

pub const COUNTS_HEADER: [&str; 4] = ["setting_index", "signal_state", "idler_state", "counts"];

/// Writes the 36 counts in projector order.
pub fn write_counts_csv(run: &TomographyRun, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(COUNTS_HEADER).map_err(io)?;
    for (j, ((s, i), n)) in run.projectors.states.iter().zip(&run.counts).enumerate() {
        w.write_record([run.projectors.setting_index(j).to_string(), s.to_string(), i.to_string(), n.to_string()])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a counts file; rows may come in any order but every (signal, idler)
/// pair must appear exactly once.
pub fn read_counts_csv(input: impl Read, ell: i32, ell_tilde: i32) -> Result<TomographyRun> {
    let ps = ProjectorSet::new(ell, ell_tilde)?;
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| Error::CountsFile { row: 1, message: e.to_string() })?;
    if header.iter().collect::<Vec<_>>() != COUNTS_HEADER {
        return Err(Error::CountsFile {
            row: 1,
            message: format!("header must be `{}`", COUNTS_HEADER.join(",")),
        });
    }
    let mut counts: Vec<Option<u64>> = vec![None; 36];
    for (k, rec) in r.records().enumerate() {
        let row = k + 2;
        let err = |message: String| Error::CountsFile { row, message };
        let rec = rec.map_err(|e| err(e.to_string()))?;
        if rec.len() != 4 {
            return Err(err(format!("expected 4 fields, got {}", rec.len())));
        }
        let s: PhotonState = rec[1].trim().parse().map_err(|e: Error| err(e.to_string()))?;
        let i: PhotonState = rec[2].trim().parse().map_err(|e: Error| err(e.to_string()))?;
        let setting: usize = rec[0].trim().parse().map_err(|_| err(format!("bad setting_index `{}`", &rec[0])))?;
        let n: u64 = rec[3].trim().parse().map_err(|_| err(format!("counts `{}` is not a nonnegative integer", &rec[3])))?;
        let j = ps.index_of(s, i);
        if ps.setting_index(j) != setting {
            return Err(err(format!("setting_index {setting} does not match states ({s}, {i})")));
        }
        if counts[j].replace(n).is_some() {
            return Err(err(format!("duplicate row for ({s}, {i})")));
        }
    }
    if let Some(j) = counts.iter().position(Option::is_none) {
        let (s, i) = ps.states[j];
        return Err(Error::CountsFile {
            row: 0,
            message: format!("missing row for ({s}, {i})"),
        });
    }
    TomographyRun::new(ps, counts.into_iter().map(Option::unwrap).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::target_state;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn projectors_are_rank_one_and_complete() {
        let ps = ProjectorSet::new(1, 4).unwrap();
        assert_eq!(ps.projectors.len(), 36);
        for p in &ps.projectors {
            assert!((p * p - p).norm() < 1e-12);
            assert!((p.trace() - c(1.0)).norm() < 1e-12);
        }
        let mut sum = DMatrix::from_element(2, 2, c(0.0));
        for s in PhotonState::ALL {
            let v = s.vector();
            let v = DVector::from_row_slice(&v);
            sum += &v * v.adjoint();
        }
        assert!((sum - DMatrix::identity(2, 2) * c(3.0)).norm() < 1e-12);
        assert!(matches!(ProjectorSet::new(2, 2), Err(Error::DegenerateSubspace(2))));
    }

    #[test]
    fn relabeled_subspace_has_same_projectors() {
        let a = ProjectorSet::new(1, 4).unwrap();
        let b = ProjectorSet::new(4, 1).unwrap();
        assert_eq!(a.projectors, b.projectors);
        assert_ne!(a.joint_labels(), b.joint_labels());
    }

    #[test]
    fn born_rule_per_setting() {
        let ps = ProjectorSet::new(1, 2).unwrap();
        let t = target_state(1, 2, 0.7).unwrap();
        let rho = embed(&t, &ps).unwrap();
        let p = ps.probabilities(rho.matrix());
        let mut sums = [0.0; 9];
        for j in 0..36 {
            sums[ps.setting_index(j)] += p[j];
        }
        assert!(sums.iter().all(|s| (s - 1.0).abs() < 1e-12));
    }

    #[test]
    fn maximally_mixed_noiseless_counts_are_flat() {
        let ps = ProjectorSet::new(1, 2).unwrap();
        let mixed = SpatialDensityMatrix::new(ps.joint_labels(), DMatrix::identity(4, 4) * c(0.25)).unwrap();
        let run = simulate_counts(&mixed, &ps, 36_000, None, None).unwrap();
        let (lo, hi) = (run.counts.iter().min().unwrap(), run.counts.iter().max().unwrap());
        assert!(hi - lo <= 1, "{lo} {hi}");
    }

    #[test]
    fn bell_state_born_frequencies() {
        let ps = ProjectorSet::new(1, 2).unwrap();
        let t = target_state(1, 2, 0.0).unwrap();
        let run = simulate_counts(&t, &ps, 900_000, None, None).unwrap();
        let max = *run.counts.iter().max().unwrap() as f64;
        let j = ps.index_of(PhotonState::LPlusLt, PhotonState::LPlusLt);
        assert!((run.counts[j] as f64 / max - 1.0).abs() < 1e-6);
        let j = ps.index_of(PhotonState::L, PhotonState::LPlusLt);
        assert!((run.counts[j] as f64 / max - 0.5).abs() < 1e-5);
    }

    #[test]
    fn seeded_simulation_is_reproducible() {
        let ps = ProjectorSet::new(1, 2).unwrap();
        let t = target_state(1, 2, 0.0).unwrap();
        let a = simulate_counts(&t, &ps, 90_000, Some(7), None).unwrap();
        let b = simulate_counts(&t, &ps, 90_000, Some(7), None).unwrap();
        let d = simulate_counts(&t, &ps, 90_000, Some(8), None).unwrap();
        assert_eq!(a.counts, b.counts);
        assert_ne!(a.counts, d.counts);
    }

    #[test]
    fn cholesky_parameters_round_trip() {
        let ps = ProjectorSet::new(1, 2).unwrap();
        let mut m = DMatrix::identity(4, 4) * c(0.1);
        m += superposition_projector(4, 0, 3, 0.4) * c(0.6);
        let rho = SpatialDensityMatrix::from_unnormalized(ps.joint_labels(), m).unwrap();
        let back = rho_from_params(&params_from_rho(rho.matrix()));
        assert!((back - rho.matrix()).norm() < 1e-8);
    }

    #[test]
    fn visibility_cases() {
        let id = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert_eq!(visibility(&id).unwrap(), 1.0);
        assert!((visibility(&[vec![9.0, 1.0], vec![1.0, 9.0]]).unwrap() - 0.9).abs() < 1e-15);
        assert!((visibility(&vec![vec![1.0; 3]; 3]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(visibility(&[]), Err(Error::EmptyMatrix));
        assert_eq!(visibility(&[vec![0.0]]), Err(Error::EmptyMatrix));
    }

    #[test]
    fn counts_csv_round_trip_and_diagnostics() {
        let ps = ProjectorSet::new(1, 4).unwrap();
        let run = TomographyRun::new(ps, (0..36).map(|k| k * 10).collect()).unwrap();
        let mut buf = Vec::new();
        write_counts_csv(&run, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("setting_index,signal_state,idler_state,counts\n0,l,l,0\n"));
        let back = read_counts_csv(text.as_bytes(), 1, 4).unwrap();
        assert_eq!(back.counts, run.counts);

        let bad = text.replacen("0,l,lt,10", "0,l,lt,-3", 1);
        match read_counts_csv(bad.as_bytes(), 1, 4) {
            Err(Error::CountsFile { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
        let short: String = text.lines().take(30).map(|l| format!("{l}\n")).collect();
        assert!(matches!(read_counts_csv(short.as_bytes(), 1, 4), Err(Error::CountsFile { .. })));
    }
}
