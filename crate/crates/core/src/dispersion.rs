//! Crystal dispersion: refractive indices per principal axis, the wave
//! parameters (k, group velocity, GVD) of each interacting field, and the
//! quasi-phase-matching mismatch.
//!
//! Models are loaded from a small key-value text format so the coefficients
//! live in data rather than code:
//!
//! ```text
//! valid_range_nm = [350, 3500]
//! axis.y.sellmeier = [a, d, b1, c1, b2, c2, ...]   # n² = a + Σ b λ²/(λ²-c) - d λ², λ in µm
//! axis.z.table = [(800, 1.80), (820, 1.81)]         # (λ_nm, n), linear interpolation
//! ```
//!
//! Lines starting with `#` are comments. The builtin KTP set is available via
//! [`DispersionModel::builtin_ktp`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{angular_frequency, to_nm, SPEED_OF_LIGHT};

const BUILTIN_KTP: &str = include_str!("../data/ktp.disp");

/// Principal crystal axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        };
        f.write_str(s)
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::InvalidParameter(format!("unknown axis `{other}`"))),
        }
    }
}

/// Field taking part in the three-wave interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Pump,
    Signal,
    Idler,
}

/// Index model for a single axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AxisDispersion {
    /// n² = a + Σ b_j λ²/(λ² − c_j) − d λ² with λ in µm.
    Sellmeier { a: f64, d: f64, terms: Vec<(f64, f64)> },
    /// Strictly increasing (wavelength in meters, index) samples.
    Table(Vec<(f64, f64)>),
}

impl AxisDispersion {
    fn index(&self, wavelength: f64) -> Option<f64> {
        match self {
            AxisDispersion::Sellmeier { a, d, terms } => {
                let l2 = (wavelength * 1e6).powi(2);
                let n2 = a + terms.iter().map(|(b, c)| b * l2 / (l2 - c)).sum::<f64>() - d * l2;
                (n2 > 0.0).then(|| n2.sqrt())
            }
            AxisDispersion::Table(samples) => {
                let (first, last) = (samples.first()?, samples.last()?);
                if wavelength < first.0 || wavelength > last.0 {
                    return None;
                }
                let hi = samples.partition_point(|s| s.0 < wavelength).max(1);
                let (l0, n0) = samples[hi - 1];
                let (l1, n1) = samples[hi];
                Some(n0 + (n1 - n0) * (wavelength - l0) / (l1 - l0))
            }
        }
    }

    /// Analytic dn/dλ (per meter), available for the Sellmeier form only.
    pub fn index_derivative(&self, wavelength: f64) -> Option<f64> {
        match self {
            AxisDispersion::Sellmeier { d, terms, .. } => {
                let n = self.index(wavelength)?;
                let l = wavelength * 1e6;
                let l2 = l * l;
                let dn2 = terms
                    .iter()
                    .map(|(b, c)| -2.0 * b * c * l / (l2 - c).powi(2))
                    .sum::<f64>()
                    - 2.0 * d * l;
                Some(dn2 / (2.0 * n) * 1e6)
            }
            AxisDispersion::Table(_) => None,
        }
    }
}

/// Refractive-index model of a biaxial crystal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionModel {
    axes: BTreeMap<Axis, AxisDispersion>,
    /// Valid wavelength interval in meters.
    valid_range: (f64, f64),
    /// Free-form provenance string (file name or "builtin-ktp").
    source: String,
}

impl DispersionModel {
    pub fn new(axes: BTreeMap<Axis, AxisDispersion>, valid_range: (f64, f64)) -> Result<Self> {
        if !(valid_range.0 > 0.0 && valid_range.1 > valid_range.0) {
            return Err(Error::InvalidParameter(format!(
                "invalid valid_range {valid_range:?}"
            )));
        }
        for (axis, model) in &axes {
            if let AxisDispersion::Table(s) = model {
                if s.len() < 2 || s.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::InvalidParameter(format!(
                        "axis {axis}: table needs at least two strictly increasing wavelengths"
                    )));
                }
            }
        }
        Ok(Self {
            axes,
            valid_range,
            source: "inline".into(),
        })
    }

    /// KTP with König–Wong (y) and Fradkin (z) Sellmeier sets; see `data/ktp.disp`.
    pub fn builtin_ktp() -> Arc<Self> {
        let mut m: Self = BUILTIN_KTP.parse().expect("builtin KTP data parses");
        m.source = "builtin-ktp".into();
        Arc::new(m)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut m: Self = text.parse()?;
        m.source = path.display().to_string();
        Ok(m)
    }

    pub fn valid_range(&self) -> (f64, f64) {
        self.valid_range
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn axis(&self, axis: Axis) -> Option<&AxisDispersion> {
        self.axes.get(&axis)
    }

    fn check_range(&self, wavelength: f64) -> Result<()> {
        let (lo, hi) = self.valid_range;
        if wavelength.is_finite() && wavelength >= lo && wavelength <= hi {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                wavelength_nm: to_nm(wavelength),
                min_nm: to_nm(lo),
                max_nm: to_nm(hi),
            })
        }
    }
}

impl FromStr for DispersionModel {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut axes = BTreeMap::new();
        let mut range = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config {
                location: format!("line {}", lineno + 1),
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let value = value.trim();
            if key == "valid_range_nm" {
                let v = parse_list(value).map_err(err)?;
                if v.len() != 2 {
                    return Err(err("valid_range_nm needs exactly two entries".into()));
                }
                range = Some((v[0] * 1e-9, v[1] * 1e-9));
                continue;
            }
            let parts: Vec<&str> = key.split('.').collect();
            let (axis, kind) = match parts.as_slice() {
                ["axis", axis, kind] => (axis.parse::<Axis>().map_err(|e| err(e.to_string()))?, *kind),
                _ => return Err(err(format!("unknown key `{key}`"))),
            };
            let model = match kind {
                "sellmeier" => {
                    let v = parse_list(value).map_err(err)?;
                    if v.len() < 2 || v.len() % 2 != 0 {
                        return Err(err(format!(
                            "`{key}` needs [a, d, b1, c1, ...] (even length), got {} values",
                            v.len()
                        )));
                    }
                    AxisDispersion::Sellmeier {
                        a: v[0],
                        d: v[1],
                        terms: v[2..].chunks(2).map(|c| (c[0], c[1])).collect(),
                    }
                }
                "table" => AxisDispersion::Table(
                    parse_pairs(value)
                        .map_err(err)?
                        .into_iter()
                        .map(|(l, n)| (l * 1e-9, n))
                        .collect(),
                ),
                other => return Err(err(format!("unknown axis model `{other}`"))),
            };
            axes.insert(axis, model);
        }
        let range = range.ok_or_else(|| Error::Config {
            location: "file".into(),
            message: "missing valid_range_nm".into(),
        })?;
        DispersionModel::new(axes, range)
    }
}

fn parse_list(value: &str) -> std::result::Result<Vec<f64>, String> {
    let inner = value
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .ok_or_else(|| format!("expected [..] list, got `{value}`"))?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| format!("`{s}`: {e}")))
        .collect()
}

fn parse_pairs(value: &str) -> std::result::Result<Vec<(f64, f64)>, String> {
    let flat: String = value.chars().filter(|c| !"()".contains(*c)).collect();
    let v = parse_list(&flat)?;
    if v.len() % 2 != 0 {
        return Err("table entries must be (λ_nm, n) pairs".into());
    }
    Ok(v.chunks(2).map(|c| (c[0], c[1])).collect())
}

/// Refractive index of `axis` at a vacuum wavelength (meters).
pub fn refractive_index(model: &DispersionModel, wavelength: f64, axis: Axis) -> Result<f64> {
    model.check_range(wavelength)?;
    let axis_model = model
        .axis(axis)
        .ok_or_else(|| Error::InvalidParameter(format!("model has no data for axis {axis}")))?;
    match axis_model.index(wavelength) {
        Some(n) if n > 1.0 && n.is_finite() => Ok(n),
        _ => {
            let (lo, hi) = model.valid_range;
            Err(Error::OutOfRange {
                wavelength_nm: to_nm(wavelength),
                min_nm: to_nm(lo),
                max_nm: to_nm(hi),
            })
        }
    }
}

/// Which crystal axis each field is polarized along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseMatchingType {
    TypeII { pump: Axis, signal: Axis, idler: Axis },
}

impl PhaseMatchingType {
    /// Type-II ppKTP convention: y-polarized pump and signal, z-polarized idler.
    pub const KTP_TYPE_II: Self = PhaseMatchingType::TypeII {
        pump: Axis::Y,
        signal: Axis::Y,
        idler: Axis::Z,
    };

    pub fn axis(&self, role: Role) -> Axis {
        let PhaseMatchingType::TypeII { pump, signal, idler } = *self;
        match role {
            Role::Pump => pump,
            Role::Signal => signal,
            Role::Idler => idler,
        }
    }

    pub fn swapped(&self) -> Self {
        let PhaseMatchingType::TypeII { pump, signal, idler } = *self;
        PhaseMatchingType::TypeII {
            pump,
            signal: idler,
            idler: signal,
        }
    }
}

impl Default for PhaseMatchingType {
    fn default() -> Self {
        Self::KTP_TYPE_II
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Poling {
    /// Solve for collinear degenerate phase matching at the pump wavelength.
    Auto,
    /// Explicit grating period in meters.
    Period(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrystalSpec {
    /// Crystal length, meters.
    pub length: f64,
    pub poling: Poling,
    pub pm_type: PhaseMatchingType,
    pub dispersion: Arc<DispersionModel>,
    /// Recorded in outputs, not used by the dispersion math.
    pub temperature: Option<f64>,
}

impl CrystalSpec {
    pub fn new(length: f64, dispersion: Arc<DispersionModel>) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::InvalidParameter(format!("crystal length {length} must be > 0")));
        }
        Ok(Self {
            length,
            poling: Poling::Auto,
            pm_type: PhaseMatchingType::default(),
            dispersion,
            temperature: None,
        })
    }

    /// Periodically poled KTP, type II, auto poling.
    pub fn ppktp(length: f64) -> Result<Self> {
        Self::new(length, DispersionModel::builtin_ktp())
    }

    pub fn with_poling_period(mut self, period: f64) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::InvalidParameter(format!("poling period {period} must be > 0")));
        }
        self.poling = Poling::Period(period);
        Ok(self)
    }

    /// Grating period, solving for degeneracy at `pump_wavelength` when auto.
    pub fn poling_period(&self, pump_wavelength: f64) -> Result<f64> {
        match self.poling {
            Poling::Period(p) => Ok(p),
            Poling::Auto => degenerate_poling_period(self, pump_wavelength),
        }
    }

    fn wavenumber(&self, role: Role, wavelength: f64) -> Result<f64> {
        let n = refractive_index(&self.dispersion, wavelength, self.pm_type.axis(role))?;
        Ok(2.0 * PI * n / wavelength)
    }
}

/// Expansion coefficients of k(ω) about a center frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    /// Wavenumber in the crystal, rad/m.
    pub k0: f64,
    /// Group velocity 1/(dk/dω), m/s.
    pub group_velocity: f64,
    /// Group-velocity dispersion d²k/dω², s²/m.
    pub gvd: f64,
    /// Vacuum center wavelength, m.
    pub center_wavelength: f64,
}

/// Relative frequency step of the five-point difference stencils.
pub const DERIVATIVE_STEP: f64 = 1e-5;

/// k0, group velocity and GVD of `role` at `center_wavelength`.
///
/// Derivatives in ω use five-point central differences with step
/// `DERIVATIVE_STEP · ω0`, so sampled and Sellmeier models are treated alike.
pub fn wave_params(crystal: &CrystalSpec, role: Role, center_wavelength: f64) -> Result<WaveParams> {
    let omega0 = angular_frequency(center_wavelength);
    let h = DERIVATIVE_STEP * omega0;
    let k = |omega: f64| crystal.wavenumber(role, 2.0 * PI * SPEED_OF_LIGHT / omega);
    let (km2, km1, k0, kp1, kp2) = (k(omega0 - 2.0 * h)?, k(omega0 - h)?, k(omega0)?, k(omega0 + h)?, k(omega0 + 2.0 * h)?);
    let d1 = (km2 - 8.0 * km1 + 8.0 * kp1 - kp2) / (12.0 * h);
    let d2 = (-km2 + 16.0 * km1 - 30.0 * k0 + 16.0 * kp1 - kp2) / (12.0 * h * h);
    Ok(WaveParams {
        k0,
        group_velocity: 1.0 / d1,
        gvd: d2,
        center_wavelength,
    })
}

fn intrinsic_mismatch(crystal: &CrystalSpec, lp: f64, ls: f64, li: f64) -> Result<f64> {
    Ok(crystal.wavenumber(Role::Pump, lp)? - crystal.wavenumber(Role::Signal, ls)? - crystal.wavenumber(Role::Idler, li)?)
}

/// Δk0 = k_p − k_s − k_i − 2π/Λ at the center wavelengths, rad/m.
pub fn phase_mismatch0(crystal: &CrystalSpec, lp: f64, ls: f64, li: f64) -> Result<f64> {
    let residual = (1.0 / lp - 1.0 / ls - 1.0 / li) * lp;
    if !(residual.abs() <= 1e-9) {
        return Err(Error::EnergyMismatch {
            relative_residual: residual,
        });
    }
    let period = crystal.poling_period(lp)?;
    Ok(intrinsic_mismatch(crystal, lp, ls, li)? - 2.0 * PI / period)
}

/// Poling period giving zero mismatch for degenerate collinear emission,
/// found by bisection on [1 µm, 100 µm].
pub fn degenerate_poling_period(crystal: &CrystalSpec, pump_wavelength: f64) -> Result<f64> {
    let ls = 2.0 * pump_wavelength;
    let dk = intrinsic_mismatch(crystal, pump_wavelength, ls, ls)
        .map_err(|e| Error::NoRoot(format!("dispersion unavailable: {e}")))?;
    let f = |period: f64| dk - 2.0 * PI / period;
    let (mut lo, mut hi) = (1e-6, 100e-6);
    let (flo, fhi) = (f(lo), f(hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::NoRoot(format!(
            "mismatch {dk:.6e} rad/m has no grating period in [1, 100] µm"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if f(lo).abs() < f(hi).abs() { lo } else { hi })
}
