//! Flat `key = value` run configuration. Lengths are given in nm, µm and mm
//! at this boundary and converted to meters once, in [`RunConfig::build`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::{json, Value};

use crate::biphoton::{DetuningGrid, SpdcConfig};
use crate::dispersion::{Axis, CrystalSpec, DispersionModel, PhaseMatchingType};
use crate::error::{Error, Result};
use crate::lgmodes::BeamSpec;
use crate::units::{mm, nm, um};

/// Where the Sellmeier/table data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DispersionSource {
    BuiltinKtp,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub crystal_length_mm: f64,
    /// None means solve for degenerate phase matching.
    pub poling_period_um: Option<f64>,
    pub pm_type: PhaseMatchingType,
    pub pump_wavelength_nm: f64,
    pub pump_waist_um: f64,
    pub signal_waist_um: f64,
    pub idler_waist_um: f64,
    /// Odd, so that Ω = 0 is a sample.
    pub grid_points: usize,
    /// The grid covers the signal center wavelength ± this many nm.
    pub grid_span_nm: f64,
    pub z_order: usize,
    pub dispersion: DispersionSource,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            crystal_length_mm: 10.0,
            poling_period_um: None,
            pm_type: PhaseMatchingType::KTP_TYPE_II,
            pump_wavelength_nm: 405.0,
            pump_waist_um: 142.0,
            signal_waist_um: 42.0,
            idler_waist_um: 42.0,
            grid_points: crate::biphoton::DEFAULT_POINTS,
            grid_span_nm: crate::biphoton::DEFAULT_SPAN * 1e9,
            z_order: crate::biphoton::DEFAULT_Z_ORDER,
            dispersion: DispersionSource::BuiltinKtp,
        }
    }
}

pub const KEYS: [&str; 11] = [
    "crystal.length_mm",
    "crystal.poling_period_um",
    "crystal.pm_type",
    "pump.wavelength_nm",
    "pump.waist_um",
    "signal.waist_um",
    "idler.waist_um",
    "grid.points",
    "grid.span_nm",
    "quadrature.z_order",
    "dispersion.file",
];

fn positive(v: &str) -> std::result::Result<f64, String> {
    match v.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(x) => Err(format!("must be a positive number, got {x}")),
        Err(_) => Err(format!("`{v}` is not a number")),
    }
}

fn parse_pm_type(v: &str) -> std::result::Result<PhaseMatchingType, String> {
    let lower = v.to_ascii_lowercase();
    let axes = match lower.as_str() {
        "type-ii" | "type2" | "ii" => return Ok(PhaseMatchingType::KTP_TYPE_II),
        s => s.strip_prefix("type-ii:").ok_or(format!("unknown phase-matching type `{v}` (use type-ii or type-ii:<pump><signal><idler> axes, e.g. type-ii:yyz)"))?,
    };
    let a: Vec<Axis> = axes
        .chars()
        .map(|c| c.to_string().parse::<Axis>().map_err(|e| e.to_string()))
        .collect::<std::result::Result<_, _>>()?;
    match a.as_slice() {
        [pump, signal, idler] if signal != idler => Ok(PhaseMatchingType::TypeII {
            pump: *pump,
            signal: *signal,
            idler: *idler,
        }),
        _ => Err(format!("`{axes}` needs three axes with signal and idler orthogonal")),
    }
}

fn format_pm_type(t: &PhaseMatchingType) -> String {
    let PhaseMatchingType::TypeII { pump, signal, idler } = t;
    format!("type-ii:{pump}{signal}{idler}").to_ascii_lowercase()
}

impl RunConfig {
    /// Applies one key; `location` goes into the diagnostic.
    pub fn set(&mut self, key: &str, value: &str, location: &str) -> Result<()> {
        let err = |message: String| Error::Config {
            location: location.to_string(),
            message: format!("`{key}`: {message}"),
        };
        let value = value.trim();
        match key {
            "crystal.length_mm" => self.crystal_length_mm = positive(value).map_err(err)?,
            "crystal.poling_period_um" => {
                self.poling_period_um = if value == "auto" { None } else { Some(positive(value).map_err(err)?) }
            }
            "crystal.pm_type" => self.pm_type = parse_pm_type(value).map_err(err)?,
            "pump.wavelength_nm" => self.pump_wavelength_nm = positive(value).map_err(err)?,
            "pump.waist_um" => self.pump_waist_um = positive(value).map_err(err)?,
            "signal.waist_um" => self.signal_waist_um = positive(value).map_err(err)?,
            "idler.waist_um" => self.idler_waist_um = positive(value).map_err(err)?,
            "grid.points" => {
                let n: usize = value.parse().map_err(|_| err(format!("`{value}` is not a positive integer")))?;
                if n < 3 || n % 2 == 0 {
                    return Err(err(format!("must be odd and ≥ 3 so Ω = 0 is sampled, got {n}")));
                }
                self.grid_points = n;
            }
            "grid.span_nm" => self.grid_span_nm = positive(value).map_err(err)?,
            "quadrature.z_order" => {
                self.z_order = match value.parse::<usize>() {
                    Ok(n) if n > 0 => n,
                    _ => return Err(err(format!("`{value}` is not a positive integer"))),
                }
            }
            "dispersion.file" => {
                self.dispersion = if value == "builtin-ktp" {
                    DispersionSource::BuiltinKtp
                } else if value.is_empty() {
                    return Err(err("empty path".into()));
                } else {
                    DispersionSource::File(PathBuf::from(value))
                }
            }
            _ => {
                return Err(Error::Config {
                    location: location.to_string(),
                    message: format!("unknown key `{key}` (known: {})", KEYS.join(", ")),
                })
            }
        }
        Ok(())
    }

    /// Parses config text over the defaults. Blank lines and `#` comments
    /// are ignored; a key may appear once.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let location = format!("line {}", k + 1);
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                location: location.clone(),
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            if let Some(prev) = seen.insert(key.to_string(), k + 1) {
                return Err(Error::Config {
                    location,
                    message: format!("`{key}` already set on line {prev}"),
                });
            }
            cfg.set(key, value, &location)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config { location, message } => Error::Config {
                location: format!("{}:{location}", path.display()),
                message,
            },
            other => other,
        })
    }

    /// Applies `key=value` overrides in order.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let o = o.as_ref();
            let (key, value) = o.split_once('=').ok_or_else(|| Error::Config {
                location: "--set".into(),
                message: format!("expected key=value, got `{o}`"),
            })?;
            self.set(key.trim(), value, &format!("--set {}", key.trim()))?;
        }
        Ok(())
    }

    /// Canonical text form; parsing it gives back the same config.
    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("crystal.length_mm", self.crystal_length_mm.to_string()),
            ("crystal.poling_period_um", self.poling_period_um.map_or("auto".into(), |p| p.to_string())),
            ("crystal.pm_type", format_pm_type(&self.pm_type)),
            ("pump.wavelength_nm", self.pump_wavelength_nm.to_string()),
            ("pump.waist_um", self.pump_waist_um.to_string()),
            ("signal.waist_um", self.signal_waist_um.to_string()),
            ("idler.waist_um", self.idler_waist_um.to_string()),
            ("grid.points", self.grid_points.to_string()),
            ("grid.span_nm", self.grid_span_nm.to_string()),
            ("quadrature.z_order", self.z_order.to_string()),
            (
                "dispersion.file",
                match &self.dispersion {
                    DispersionSource::BuiltinKtp => "builtin-ktp".into(),
                    DispersionSource::File(p) => p.display().to_string(),
                },
            ),
        ]
    }

    /// Config echo for output metadata.
    pub fn to_json(&self) -> Value {
        Value::Object(self.entries().into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect())
    }

    pub fn build(&self) -> Result<SpdcConfig> {
        let model = match &self.dispersion {
            DispersionSource::BuiltinKtp => DispersionModel::builtin_ktp(),
            DispersionSource::File(p) => Arc::new(DispersionModel::from_file(p)?),
        };
        let mut crystal = CrystalSpec::new(mm(self.crystal_length_mm), model)?;
        crystal.pm_type = self.pm_type;
        if let Some(p) = self.poling_period_um {
            crystal = crystal.with_poling_period(um(p))?;
        }
        let pump = BeamSpec::new(um(self.pump_waist_um), nm(self.pump_wavelength_nm))?;
        SpdcConfig::degenerate(crystal, pump, um(self.signal_waist_um), um(self.idler_waist_um))?.with_z_order(self.z_order)
    }

    pub fn grid(&self, config: &SpdcConfig) -> Result<DetuningGrid> {
        DetuningGrid::for_wavelength_span(self.grid_points, config.signal.center_wavelength, nm(self.grid_span_nm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_text() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn parses_and_overrides() {
        let text = "# crystal\ncrystal.length_mm = 10\ncrystal.poling_period_um = auto\n\npump.waist_um = 75 # tight\ncrystal.pm_type = type-ii:yzy\n";
        let mut c = RunConfig::parse(text).unwrap();
        assert_eq!(c.pump_waist_um, 75.0);
        assert_eq!(c.poling_period_um, None);
        assert_eq!(format_pm_type(&c.pm_type), "type-ii:yzy");
        c.apply_overrides(&["signal.waist_um=30", "crystal.poling_period_um = 9.5"]).unwrap();
        assert_eq!(c.signal_waist_um, 30.0);
        assert_eq!(c.poling_period_um, Some(9.5));
    }

    #[test]
    fn diagnostics_name_line_and_key() {
        let e = RunConfig::parse("pump.waist_um = 75\npump.wasit_um = 3\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 2") && msg.contains("pump.wasit_um"), "{msg}");

        let e = RunConfig::parse("grid.points = 2000\n").unwrap_err();
        assert!(e.to_string().contains("grid.points") && e.to_string().contains("odd"));

        let e = RunConfig::parse("pump.waist_um = -4\n").unwrap_err();
        assert!(e.to_string().contains("positive"));

        let e = RunConfig::parse("pump.waist_um = 4\npump.waist_um = 5\n").unwrap_err();
        assert!(e.to_string().contains("line 2") && e.to_string().contains("line 1"));

        let mut c = RunConfig::default();
        let e = c.apply_overrides(&["quadrature.z_order=0"]).unwrap_err();
        assert!(e.to_string().contains("--set quadrature.z_order"));
        assert!(parse_pm_type("type-ii:yyy").is_err());
    }

    #[test]
    fn builds_fig3_config() {
        let c = RunConfig::default();
        let cfg = c.build().unwrap();
        assert!((cfg.signal.center_wavelength - 810e-9).abs() < 1e-15);
        let g = c.grid(&cfg).unwrap();
        assert_eq!(g.count(), 2001);
        assert_eq!(g.omega()[1000], 0.0);
    }
}
