//! Spectrally traced two-channel OAM states: purity and fidelity with the
//! maximally entangled target, for matched and mismatched collection waists.

use spdc_lg::biphoton::SpdcConfig;
use spdc_lg::state::{max_fidelity_over_phase, purity, reduced_spatial_density, spectral_overlap, ChannelSpec};
use spdc_lg::units::{mm, nm, um};

fn main() -> spdc_lg::Result<()> {
    let cfg = SpdcConfig::ppktp(mm(10.0), nm(405.0), um(142.0), um(42.0))?;
    let grid = cfg.default_grid();
    let matched = [(2, 29.0), (3, 35.0), (4, 42.0)];
    for w1 in [25.0, 85.0] {
        println!("l~=1 collected at {w1} um");
        for (l, w) in matched {
            let a = ChannelSpec::waist(1, um(w1));
            let b = ChannelSpec::waist(l, um(w));
            let rho = reduced_spatial_density(&cfg, &[a.clone(), b.clone()], &grid)?;
            let (f, phase) = max_fidelity_over_phase(&rho, 0, 1)?;
            let ov = spectral_overlap(&cfg, &a, &b, &grid)?;
            println!(
                "  l={l} at {w} um: purity {:.4}  fidelity {f:.4} (phase {phase:+.3})  |overlap| {:.4}",
                purity(&rho),
                ov.norm()
            );
        }
    }
    Ok(())
}
