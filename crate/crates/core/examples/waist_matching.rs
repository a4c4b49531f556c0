//! Per-ℓ collection waists that equalize the pair probabilities of ℓ = 1..4,
//! for a loose and a tight pump focus.

use spdc_lg::biphoton::SpdcConfig;
use spdc_lg::optimize::{match_collection_waists, Branch, WaistRange};
use spdc_lg::units::{mm, nm, to_um, um};

fn main() -> spdc_lg::Result<()> {
    let range = WaistRange::new(um(10.0), um(100.0), um(1.0))?;
    for wp in [142.0, 75.0] {
        let cfg = SpdcConfig::ppktp(mm(10.0), nm(405.0), um(wp), um(42.0))?;
        let m = match_collection_waists(&cfg, &[1, 2, 3, 4], 4, &cfg.default_grid(), &range, Branch::Small)?;
        println!("pump waist {wp} um, level {:.4e}", m.reference_level);
        for (l, w) in &m.waists {
            println!("  l={l}: {:.2} um  (P={:.4e})", to_um(*w), m.probabilities[l]);
        }
    }

    let cfg = SpdcConfig::ppktp(mm(10.0), nm(405.0), um(142.0), um(42.0))?;
    let m = match_collection_waists(&cfg, &[1, 4], 4, &cfg.default_grid(), &range, Branch::Large)?;
    println!("large-waist branch for l=1: {:.2} um", to_um(m.waists[&1]));
    Ok(())
}
