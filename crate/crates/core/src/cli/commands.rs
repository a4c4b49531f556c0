use std::collections::BTreeSet;

use num_complex::Complex64;
use serde_json::{json, Value};

use super::config::RunConfig;
use super::output::{num, Dataset, DatasetKind, Table};
use super::{
    BranchArg, ChannelArgs, Command, DecomposeArgs, DensityArgs, OptimizeCommand, OptimizeModesArgs, OptimizeWaistsArgs,
    OracleArgs, SpectrumArgs, SweepArgs, TomographyCommand, TomographyReconstructArgs, TomographySimulateArgs, WaistGrid,
};
use crate::biphoton::{oracle_amplitude, ComplexSpectrum, DetuningGrid, ModeKernel, OracleSpec, SpdcConfig, SpectralWindow};
use crate::error::{Error, Result};
use crate::optimize::{
    cost_spectral_match, match_collection_waists, optimize_superpositions, waist_sweep, Branch, MinimizeOptions,
    ModeBasisSpectra, SimplexOptions, WaistRange, WaistSweepResult,
};
use crate::state::{
    joint_correlation_matrix, max_fidelity_over_phase, purity, reduced_spatial_density, spectral_overlap, ChannelSpec,
    SpatialDensityMatrix,
};
use crate::tomography::{embed, mle_reconstruct, read_counts_csv, report, simulate_counts, write_counts_csv, ProjectorSet, TomographyRun};
use crate::units::{to_nm, to_um, um};

/// Datasets produced by one command, plus the error that cut it short, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub command: String,
    pub datasets: Vec<Dataset>,
    pub error: Option<Error>,
}

impl CommandOutput {
    fn complete(command: &str, datasets: Vec<Dataset>) -> Self {
        Self {
            command: command.into(),
            datasets,
            error: None,
        }
    }
}

fn usage(message: impl Into<String>) -> Error {
    Error::InvalidParameter(message.into())
}

/// Length with optional unit suffix (`nm`, `pm`, `um`/`µm`, `mm`), returned in nm.
/// Bare numbers are taken in `default_unit`.
pub fn parse_length_nm(s: &str, default_unit: &str) -> Result<f64> {
    let s = s.trim();
    let split = s.find(|c: char| c.is_alphabetic() || c == 'µ').unwrap_or(s.len());
    let (v, unit) = s.split_at(split);
    let v: f64 = v.trim().parse().map_err(|_| usage(format!("`{s}` is not a length")))?;
    let unit = if unit.is_empty() { default_unit } else { unit };
    let scale = match unit {
        "pm" => 1e-3,
        "nm" => 1.0,
        "um" | "µm" => 1e3,
        "mm" => 1e6,
        _ => return Err(usage(format!("unknown length unit `{unit}` in `{s}`"))),
    };
    if !(v > 0.0 && v.is_finite()) {
        return Err(usage(format!("length `{s}` must be positive")));
    }
    Ok(v * scale)
}

fn parse_ints(s: &str, what: &str, min: usize, max: usize) -> Result<Vec<i64>> {
    let v: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| usage(format!("{what}: `{t}` is not an integer"))))
        .collect::<Result<_>>()?;
    if v.len() < min || v.len() > max {
        return Err(usage(format!("{what}: expected {min}..={max} comma-separated values, got `{s}`")));
    }
    Ok(v)
}

fn wavelengths_nm(config: &SpdcConfig, grid: &DetuningGrid) -> Vec<f64> {
    grid.signal_wavelengths(config.signal.center_wavelength).into_iter().map(to_nm).collect()
}

/// Waist in µm with meter round-off removed (25e-6 m prints as 25, not 24.999999999999996).
fn waist_um(w: f64) -> f64 {
    (to_um(w) * 1e9).round() / 1e9
}

fn waist_range(w: &WaistGrid) -> Result<WaistRange> {
    WaistRange::new(um(w.wmin), um(w.wmax), um(w.wstep))
}

pub fn execute(cfg: &RunConfig, command: &Command, seed: Option<u64>) -> Result<CommandOutput> {
    let config = cfg.build()?;
    let grid = cfg.grid(&config)?;
    match command {
        Command::Decompose(a) => decompose(&config, &grid, a),
        Command::Spectrum(a) => spectrum(&config, &grid, a),
        Command::Sweep(a) => sweep(&config, &grid, a),
        Command::Overlap(a) => overlap(cfg, &config, &grid, a),
        Command::Density(a) => density(cfg, &config, &grid, a),
        Command::Optimize(OptimizeCommand::Waists(a)) => optimize_waists(&config, &grid, a),
        Command::Optimize(OptimizeCommand::Modes(a)) => optimize_modes(&config, &grid, a),
        Command::Tomography(TomographyCommand::Simulate(a)) => tomography_simulate(cfg, &config, &grid, a, seed),
        Command::Tomography(TomographyCommand::Reconstruct(a)) => tomography_reconstruct(a),
        Command::Oracle(a) => oracle(&config, &grid, a),
    }
}

fn decompose(config: &SpdcConfig, grid: &DetuningGrid, a: &DecomposeArgs) -> Result<CommandOutput> {
    let window = match &a.window {
        None => None,
        Some(w) => {
            let (c, width) = w.split_once(',').ok_or_else(|| usage(format!("window `{w}` must be CENTER,WIDTH")))?;
            Some(SpectralWindow::new(parse_length_nm(c, "nm")? * 1e-9, parse_length_nm(width, "nm")? * 1e-9)?)
        }
    };
    let m = joint_correlation_matrix(config, a.pmax, a.ellmax, grid, window.as_ref())?;
    let mut t = Table::new(&["p_s", "l_s", "p_i", "l_i", "probability"]);
    for (r, s) in m.signal_modes.iter().enumerate() {
        for (c, i) in m.idler_modes.iter().enumerate() {
            t.push(vec![s.p.to_string(), s.ell.to_string(), i.p.to_string(), i.ell.to_string(), num(m.probabilities[r][c])]);
        }
    }
    let modes = |v: &[crate::lgmodes::LGIndex]| v.iter().map(|m| json!({"p": m.p, "l": m.ell})).collect::<Vec<_>>();
    let data = json!({
        "signal_modes": modes(&m.signal_modes),
        "idler_modes": modes(&m.idler_modes),
        "probabilities": m.probabilities,
    });
    let window_meta = window.map(|w| json!({"center_nm": to_nm(w.center), "width_nm": to_nm(w.width)}));
    let name = if window.is_some() { "correlation_matrix_windowed" } else { "correlation_matrix" };
    let ds = Dataset::new(DatasetKind::CorrelationMatrix, name, data)
        .with_table(t)
        .with_meta(json!({"subspace": {"p_max": a.pmax, "ell_max": a.ellmax}, "window": window_meta, "tail_fraction": m.tail_fraction}));
    Ok(CommandOutput::complete("decompose", vec![ds]))
}

fn spectrum_rows(t: &mut Table, wl: &[f64], label: &str, s: &ComplexSpectrum) {
    for (w, v) in wl.iter().zip(&s.values) {
        t.push(vec![num(*w), label.to_string(), num(v.re), num(v.im), num(v.norm_sqr())]);
    }
}

fn spectrum_json(config: &SpdcConfig, label: &str, s: &ComplexSpectrum) -> Value {
    let lc = config.signal.center_wavelength;
    let to_wl = |om: f64| to_nm(crate::units::wavelength_of(crate::units::angular_frequency(lc) + om));
    json!({
        "label": label,
        "re": s.values.iter().map(|v| v.re).collect::<Vec<_>>(),
        "im": s.values.iter().map(|v| v.im).collect::<Vec<_>>(),
        "abs2": s.values.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>(),
        "probability": s.norm_sqr(),
        "tail_fraction": s.tail_fraction(),
        "centroid_nm": to_wl(s.centroid()),
        "peak_nm": to_wl(s.peak()),
    })
}

fn spectrum(config: &SpdcConfig, grid: &DetuningGrid, a: &SpectrumArgs) -> Result<CommandOutput> {
    if a.modes.is_empty() {
        return Err(usage("spectrum needs at least one --mode"));
    }
    let wl = wavelengths_nm(config, grid);
    let mut t = Table::new(&["wavelength_nm", "mode_label", "re", "im", "abs2"]);
    let mut entries = Vec::new();
    for m in &a.modes {
        let parts: Vec<&str> = m.split(',').collect();
        if parts.len() > 4 {
            return Err(usage(format!("--mode `{m}` has too many fields")));
        }
        let v = parse_ints(&parts[..parts.len().min(3)].join(","), "--mode", 3, 3)?;
        let (ps, pi, ell) = (
            u32::try_from(v[0]).map_err(|_| usage("p_s must be ≥ 0"))?,
            u32::try_from(v[1]).map_err(|_| usage("p_i must be ≥ 0"))?,
            v[2] as i32,
        );
        let (cfg, suffix) = match parts.get(3) {
            Some(w) => {
                let w_um = parse_length_nm(w, "um")? / 1e3;
                (config.with_collection_waists(um(w_um), um(w_um))?, format!("_w{w_um}um"))
            }
            None => (config.clone(), String::new()),
        };
        let mut s = ModeKernel::new(&cfg, ps, pi, ell)?.spectrum(grid)?;
        if a.normalize {
            s = s.normalized();
        }
        let label = format!("{}{suffix}", s.label);
        spectrum_rows(&mut t, &wl, &label, &s);
        entries.push(spectrum_json(&cfg, &label, &s));
    }
    let data = json!({"wavelength_nm": wl, "spectra": entries});
    let ds = Dataset::new(DatasetKind::Spectrum, "spectrum", data)
        .with_table(t)
        .with_meta(json!({"modes": a.modes, "normalized": a.normalize}));
    Ok(CommandOutput::complete("spectrum", vec![ds]))
}

fn sweep_dataset(sweeps: &[WaistSweepResult], name: &str) -> Dataset {
    let mut t = Table::new(&["ell", "waist_um", "probability", "tail_fraction", "truncated"]);
    for s in sweeps {
        for k in 0..s.waists.len() {
            t.push(vec![
                s.ell.to_string(),
                num(waist_um(s.waists[k])),
                num(s.probabilities[k]),
                num(s.tail_fractions[k]),
                s.truncated[k].to_string(),
            ]);
        }
    }
    let data: Vec<Value> = sweeps
        .iter()
        .map(|s| {
            json!({
                "ell": s.ell,
                "waist_um": s.waists.iter().map(|w| waist_um(*w)).collect::<Vec<_>>(),
                "probability": s.probabilities,
                "tail_fraction": s.tail_fractions,
                "truncated": s.truncated,
            })
        })
        .collect();
    Dataset::new(DatasetKind::Sweep, name, json!(data)).with_table(t)
}

fn sweep(config: &SpdcConfig, grid: &DetuningGrid, a: &SweepArgs) -> Result<CommandOutput> {
    let range = waist_range(&a.waists)?;
    let sweeps: Vec<WaistSweepResult> = a.ells.iter().map(|&l| waist_sweep(config, l, &range, grid)).collect::<Result<_>>()?;
    let ds = sweep_dataset(&sweeps, "sweep").with_meta(json!({"ells": a.ells, "tail_limit": grid.tail_limit()}));
    Ok(CommandOutput::complete("sweep", vec![ds]))
}

fn channels(cfg: &RunConfig, a: &ChannelArgs) -> Result<Vec<ChannelSpec>> {
    let mut seen = BTreeSet::new();
    a.channels
        .iter()
        .map(|c| {
            let (l, w) = match c.split_once(',') {
                Some((l, w)) => (l, parse_length_nm(w, "um")? / 1e3),
                None => (c.as_str(), cfg.signal_waist_um),
            };
            let ell: i32 = l.trim().parse().map_err(|_| usage(format!("channel `{c}`: `{l}` is not an integer ℓ")))?;
            if !seen.insert(ell) {
                return Err(Error::DegenerateSubspace(ell));
            }
            Ok(ChannelSpec::waist(ell, um(w)))
        })
        .collect()
}

fn matrix_table(labels: &[String], value: impl Fn(usize, usize) -> Complex64, with_abs: bool) -> Table {
    let mut t = if with_abs {
        Table::new(&["row_label", "col_label", "re", "im", "abs"])
    } else {
        Table::new(&["row_label", "col_label", "re", "im"])
    };
    for (r, rl) in labels.iter().enumerate() {
        for (c, cl) in labels.iter().enumerate() {
            let v = value(r, c);
            let mut row = vec![rl.clone(), cl.clone(), num(v.re), num(v.im)];
            if with_abs {
                row.push(num(v.norm()));
            }
            t.push(row);
        }
    }
    t
}

fn overlap(cfg: &RunConfig, config: &SpdcConfig, grid: &DetuningGrid, a: &ChannelArgs) -> Result<CommandOutput> {
    let ch = channels(cfg, a)?;
    let n = ch.len();
    let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = spectral_overlap(config, &ch[i], &ch[j], grid)?;
            m[i][j] = v;
            m[j][i] = v.conj();
        }
    }
    let labels: Vec<String> = ch.iter().map(|c| c.label.clone()).collect();
    let t = matrix_table(&labels, |r, c| m[r][c], true);
    let data = json!({
        "labels": labels,
        "re": m.iter().map(|r| r.iter().map(|v| v.re).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "im": m.iter().map(|r| r.iter().map(|v| v.im).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "abs": m.iter().map(|r| r.iter().map(|v| v.norm()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    });
    let ds = Dataset::new(DatasetKind::OverlapMatrix, "overlap", data).with_table(t).with_meta(json!({"channels": a.channels}));
    Ok(CommandOutput::complete("overlap", vec![ds]))
}

fn density_dataset(rho: &SpatialDensityMatrix, pair: Option<(usize, usize)>, name: &str) -> Result<Dataset> {
    let t = matrix_table(rho.labels(), |r, c| rho.matrix()[(r, c)], false);
    let mut data = rho.to_json(Value::Null);
    let obj = data.as_object_mut().expect("object");
    obj.remove("meta");
    obj.insert("purity".into(), json!(purity(rho)));
    obj.insert("eigenvalues".into(), json!(rho.eigenvalues()));
    if let Some((i, j)) = pair {
        let (f, phase) = max_fidelity_over_phase(rho, i, j)?;
        obj.insert("fidelity".into(), json!({"pair": [i, j], "value": f, "phase": phase}));
    }
    Ok(Dataset::new(DatasetKind::DensityMatrix, name, data).with_table(t))
}

fn density(cfg: &RunConfig, config: &SpdcConfig, grid: &DetuningGrid, a: &DensityArgs) -> Result<CommandOutput> {
    let ch = channels(cfg, &a.channels)?;
    let rho = reduced_spatial_density(config, &ch, grid)?;
    let pair = if ch.len() >= 2 {
        let p = parse_ints(&a.pair, "--pair", 2, 2)?;
        Some((p[0] as usize, p[1] as usize))
    } else {
        None
    };
    let ds = density_dataset(&rho, pair, "density")?.with_meta(json!({
        "channels": ch.iter().map(|c| json!({"ell": c.ell, "label": c.label, "collection": c.collection})).collect::<Vec<_>>(),
    }));
    Ok(CommandOutput::complete("density", vec![ds]))
}

fn optimize_waists(config: &SpdcConfig, grid: &DetuningGrid, a: &OptimizeWaistsArgs) -> Result<CommandOutput> {
    let config = match &a.wp {
        Some(w) => config.with_pump_waist(um(parse_length_nm(w, "um")? / 1e3))?,
        None => config.clone(),
    };
    let mut ells = a.ells.clone();
    if !ells.contains(&a.reference) {
        ells.push(a.reference);
    }
    let branch = match a.branch {
        BranchArg::Small => Branch::Small,
        BranchArg::Large => Branch::Large,
    };
    let range = waist_range(&a.waists)?;
    let meta = json!({"ells": ells, "reference_ell": a.reference, "branch": branch, "pump_waist_um": waist_um(config.pump.waist)});
    match match_collection_waists(&config, &ells, a.reference, grid, &range, branch) {
        Ok(m) => {
            let report = json!({
                "reference_ell": m.reference_ell,
                "reference_level": m.reference_level,
                "branch": m.branch,
                "pump_waist_um": waist_um(config.pump.waist),
                "waists_um": m.waists.iter().map(|(l, w)| (l.to_string(), json!(to_um(*w)))).collect::<serde_json::Map<_, _>>(),
                "probabilities": m.probabilities.iter().map(|(l, p)| (l.to_string(), json!(p))).collect::<serde_json::Map<_, _>>(),
            });
            Ok(CommandOutput::complete(
                "optimize waists",
                vec![
                    Dataset::new(DatasetKind::OptimizationReport, "waists", report).with_meta(meta.clone()),
                    sweep_dataset(&m.sweeps, "waist_sweep").with_meta(meta),
                ],
            ))
        }
        Err(e @ (Error::NoCrossing { .. } | Error::GridTooNarrow { .. })) => {
            let sweeps: Vec<WaistSweepResult> = ells.iter().map(|&l| waist_sweep(&config, l, &range, grid)).collect::<Result<_>>()?;
            Ok(CommandOutput {
                command: "optimize waists".into(),
                datasets: vec![sweep_dataset(&sweeps, "waist_sweep").with_meta(meta)],
                error: Some(e),
            })
        }
        Err(e) => Err(e),
    }
}

fn optimize_modes(config: &SpdcConfig, grid: &DetuningGrid, a: &OptimizeModesArgs) -> Result<CommandOutput> {
    let others: Vec<i32> = a.ells.iter().copied().filter(|&l| l != a.bright).collect();
    let options = MinimizeOptions {
        simplex: SimplexOptions {
            max_iterations: a.max_iter,
            ..Default::default()
        },
        max_restarts: a.restarts,
    };
    let study = optimize_superpositions(config, a.bright, &others, a.pmax, grid, &options)?;

    let wl = wavelengths_nm(config, grid);
    let mut t = Table::new(&["wavelength_nm", "mode_label", "re", "im", "abs2"]);
    let bright_basis = ModeBasisSpectra::compute(config, a.bright, a.pmax, grid)?;
    let bright_spec = bright_basis.combine(&study.bright.modes)?.normalized();
    let label = format!("bright_l{}", a.bright);
    spectrum_rows(&mut t, &wl, &label, &bright_spec);
    let mut spectra = vec![spectrum_json(config, &label, &bright_spec)];
    let mut matched = Vec::new();
    for (l, r) in &study.matched {
        let basis = ModeBasisSpectra::compute(config, *l, a.pmax, grid)?;
        let s = basis.combine(&r.modes)?.normalized();
        let label = format!("matched_l{l}");
        spectrum_rows(&mut t, &wl, &label, &s);
        spectra.push(spectrum_json(config, &label, &s));
        let f_spect = cost_spectral_match(&study.bright.modes, &bright_basis, &r.modes, &basis)?;
        let mut entry = r.to_json();
        entry["ell"] = json!(l);
        entry["f_spect"] = json!(f_spect);
        matched.push(entry);
    }
    let mut bright = study.bright.to_json();
    bright["ell"] = json!(a.bright);
    let converged = study.bright.converged && study.matched.iter().all(|(_, r)| r.converged);
    let report = json!({"p_max": a.pmax, "bright": bright, "matched": matched, "converged": converged});
    let meta = json!({"p_max": a.pmax, "bright_ell": a.bright, "matched_ells": others, "max_iterations": a.max_iter, "restarts": a.restarts});
    Ok(CommandOutput {
        command: "optimize modes".into(),
        datasets: vec![
            Dataset::new(DatasetKind::OptimizationReport, "modes", report).with_meta(meta.clone()),
            Dataset::new(DatasetKind::Spectrum, "modes_spectra", json!({"wavelength_nm": wl, "spectra": spectra}))
                .with_table(t)
                .with_meta(meta),
        ],
        error: (!converged).then(|| Error::NoConvergence(format!("simplex hit its {} iteration budget", a.max_iter))),
    })
}

fn counts_dataset(run: &TomographyRun) -> Result<Dataset> {
    let mut buf = Vec::new();
    write_counts_csv(run, &mut buf)?;
    let mut rdr = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<&str> = crate::tomography::COUNTS_HEADER.to_vec();
    let mut t = Table::new(&header);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        t.push(rec.iter().map(str::to_string).collect());
    }
    let data = json!({
        "ell": run.projectors.ell,
        "ell_tilde": run.projectors.ell_tilde,
        "counts": run.counts,
        "total_counts": run.total_counts,
    });
    Ok(Dataset::new(DatasetKind::Counts, "counts", data).with_table(t))
}

fn tomography_simulate(
    cfg: &RunConfig,
    config: &SpdcConfig,
    grid: &DetuningGrid,
    a: &TomographySimulateArgs,
    seed: Option<u64>,
) -> Result<CommandOutput> {
    let (l, lt) = (a.subspace.ell, a.subspace.ell_tilde);
    let ps = ProjectorSet::new(l, lt)?;
    let w = |o: Option<f64>| um(o.unwrap_or(cfg.signal_waist_um));
    let (wl, wlt) = (w(a.waist_ell), w(a.waist_ell_tilde));
    let subspace = [ChannelSpec::waist(l, wl), ChannelSpec::waist(lt, wlt)];
    let theory = reduced_spatial_density(config, &subspace, grid)?;
    let (f_theory, phase_theory) = max_fidelity_over_phase(&theory, 0, 1)?;
    let run = simulate_counts(&theory, &ps, 9 * a.counts_per_setting, seed, None)?;
    let mle = mle_reconstruct(&run)?;
    let meta = json!({
        "subspace": {"ell": l, "ell_tilde": lt, "waist_ell_um": to_um(wl), "waist_ell_tilde_um": to_um(wlt)},
        "counts_per_setting": a.counts_per_setting,
        "noise": if seed.is_some() { "poisson" } else { "none (rounded expectation)" },
        "theory": {"purity": purity(&theory), "fidelity_max_over_phase": f_theory, "phase": phase_theory, "rho": embed(&theory, &ps)?.to_json(Value::Null)},
    });
    let rep = report(&run, &mle)?;
    Ok(CommandOutput {
        command: "tomography simulate".into(),
        datasets: vec![
            counts_dataset(&run)?.with_meta(meta.clone()),
            Dataset::new(DatasetKind::TomographyReport, "tomography_report", rep).with_meta(meta),
        ],
        error: (!mle.converged).then(|| Error::NoConvergence("likelihood maximization hit its iteration budget".into())),
    })
}

fn tomography_reconstruct(a: &TomographyReconstructArgs) -> Result<CommandOutput> {
    let file = std::fs::File::open(&a.counts).map_err(|e| Error::Io(format!("{}: {e}", a.counts.display())))?;
    let run = read_counts_csv(file, a.subspace.ell, a.subspace.ell_tilde)?;
    let mle = mle_reconstruct(&run)?;
    let rep = report(&run, &mle)?;
    let meta = json!({"subspace": {"ell": a.subspace.ell, "ell_tilde": a.subspace.ell_tilde}, "counts_file": a.counts.display().to_string()});
    Ok(CommandOutput {
        command: "tomography reconstruct".into(),
        datasets: vec![Dataset::new(DatasetKind::TomographyReport, "tomography_report", rep).with_meta(meta)],
        error: (!mle.converged).then(|| Error::NoConvergence("likelihood maximization hit its iteration budget".into())),
    })
}

fn oracle(config: &SpdcConfig, grid: &DetuningGrid, a: &OracleArgs) -> Result<CommandOutput> {
    let v = parse_ints(&a.mode, "--mode", 3, 3)?;
    let (ps, pi, ell) = (
        u32::try_from(v[0]).map_err(|_| usage("p_s must be ≥ 0"))?,
        u32::try_from(v[1]).map_err(|_| usage("p_i must be ≥ 0"))?,
        v[2] as i32,
    );
    let omegas = if a.omega.is_empty() {
        let h = grid.omega_max() / 2.0;
        vec![-h, 0.0, h]
    } else {
        a.omega.clone()
    };
    let spec = OracleSpec::default();
    let reference = oracle_amplitude(config, ps, pi, ell, &omegas, &spec)?;
    let kernel = ModeKernel::new(config, ps, pi, ell)?;
    let w0 = config.signal_center_frequency();
    let mut t = Table::new(&["omega", "wavelength_nm", "closed_re", "closed_im", "oracle_re", "oracle_im", "relative_difference"]);
    let mut rows = Vec::new();
    for (o, r) in omegas.iter().zip(&reference) {
        let c = kernel.amplitude(*o)?;
        let rel = (c - r).norm() / r.norm().max(f64::MIN_POSITIVE);
        let wl = to_nm(crate::units::wavelength_of(w0 + o));
        t.push(vec![num(*o), num(wl), num(c.re), num(c.im), num(r.re), num(r.im), num(rel)]);
        rows.push(json!({"omega": o, "wavelength_nm": wl, "closed": [c.re, c.im], "oracle": [r.re, r.im], "relative_difference": rel}));
    }
    let meta = json!({"mode": {"p_s": ps, "p_i": pi, "ell": ell}, "z_order": spec.z_order, "radial_order": spec.radial_order, "radial_extent": spec.radial_extent});
    let ds = Dataset::new(DatasetKind::OracleComparison, "oracle", json!(rows)).with_table(t).with_meta(meta);
    Ok(CommandOutput::complete("oracle", vec![ds]))
}
