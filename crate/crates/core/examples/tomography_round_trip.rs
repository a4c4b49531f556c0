//! Simulated tomography of a two-channel OAM state: Poisson counts over the
//! nine mutually unbiased settings, then maximum-likelihood reconstruction.

use spdc_lg::biphoton::SpdcConfig;
use spdc_lg::state::{max_fidelity_over_phase, purity, reduced_spatial_density, ChannelSpec};
use spdc_lg::tomography::{embed, linear_inversion, mle_reconstruct, simulate_counts, trace_distance, ProjectorSet};
use spdc_lg::units::{mm, nm, um};

fn main() -> spdc_lg::Result<()> {
    let cfg = SpdcConfig::ppktp(mm(10.0), nm(405.0), um(142.0), um(42.0))?;
    let rho = reduced_spatial_density(
        &cfg,
        &[ChannelSpec::waist(1, um(85.0)), ChannelSpec::waist(2, um(29.0))],
        &cfg.default_grid(),
    )?;
    let ps = ProjectorSet::new(1, 2)?;
    let truth = embed(&rho, &ps)?;
    println!("theory: purity {:.4}, fidelity {:.4}", purity(&truth), max_fidelity_over_phase(&truth, 0, 3)?.0);

    for per_setting in [1_000, 10_000, 100_000] {
        let run = simulate_counts(&rho, &ps, 9 * per_setting, Some(1), None)?;
        let lin = linear_inversion(&run)?;
        let mle = mle_reconstruct(&run)?;
        println!(
            "{per_setting:>7}/setting: linear {:.4}  mle {:.4}  purity {:.4}  fidelity {:.4}  ({} evaluations)",
            trace_distance(&lin, &truth)?,
            trace_distance(&mle.rho, &truth)?,
            purity(&mle.rho),
            max_fidelity_over_phase(&mle.rho, 0, 3)?.0,
            mle.evaluations
        );
    }
    Ok(())
}
