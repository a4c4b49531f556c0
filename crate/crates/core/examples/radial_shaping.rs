//! Radial-mode superpositions that make the ℓ = 0 and ℓ = 1 spectra match a
//! brightness-optimized ℓ = 2 spectrum. Uses p ≤ 4 to run in a few seconds.

use spdc_lg::biphoton::SpdcConfig;
use spdc_lg::optimize::{cost_spectral_match, optimize_superpositions, MinimizeOptions, ModeBasisSpectra};
use spdc_lg::units::{mm, nm, um};

fn main() -> spdc_lg::Result<()> {
    let p_max = 4;
    let cfg = SpdcConfig::ppktp(mm(10.0), nm(405.0), um(50.0), um(50.0))?;
    let grid = cfg.default_grid();
    let study = optimize_superpositions(&cfg, 2, &[0, 1], p_max, &grid, &MinimizeOptions::default())?;
    println!("l=2 brightness cost {:.4} -> {:.4}", study.bright.start_cost, study.bright.cost);

    let bright = ModeBasisSpectra::compute(&cfg, 2, p_max, &grid)?;
    let fund = spdc_lg::optimize::SuperpositionModes::fundamental(p_max);
    for (l, r) in &study.matched {
        let basis = ModeBasisSpectra::compute(&cfg, *l, p_max, &grid)?;
        let before = cost_spectral_match(&study.bright.modes, &bright, &fund, &basis)?;
        println!(
            "l={l}: mismatch {before:.3e} (fundamental) -> {:.3e}, |A-B|max {:.3}",
            r.cost,
            r.modes.asymmetry()
        );
        let a: Vec<String> = r.modes.a.iter().map(|c| format!("{:.3}", c.norm())).collect();
        let b: Vec<String> = r.modes.b.iter().map(|c| format!("{:.3}", c.norm())).collect();
        println!("  |A| = [{}]\n  |B| = [{}]", a.join(", "), b.join(", "));
    }
    Ok(())
}
