//! KTP dispersion at the design point: refractive indices, the first-order
//! grating period for degenerate emission, and the group velocities that set
//! the spectral width of the pairs.

use spdc_lg::dispersion::{
    degenerate_poling_period, phase_mismatch0, refractive_index, wave_params, Axis, CrystalSpec, DispersionModel,
    Role,
};
use spdc_lg::units::{mm, nm, to_um};

fn main() -> spdc_lg::Result<()> {
    let model = DispersionModel::builtin_ktp();
    println!("indices of {}", model.source());
    for wl in [405.0, 810.0] {
        let n: Vec<String> = [Axis::X, Axis::Y, Axis::Z]
            .iter()
            .map(|&a| Ok(format!("n_{a}={:.5}", refractive_index(&model, nm(wl), a)?)))
            .collect::<spdc_lg::Result<_>>()?;
        println!("  {wl} nm: {}", n.join("  "));
    }

    let crystal = CrystalSpec::ppktp(mm(10.0))?;
    let period = degenerate_poling_period(&crystal, nm(405.0))?;
    println!("poling period for 405 nm -> 810 + 810 nm: {:.4} um", to_um(period));

    for (role, wl) in [(Role::Pump, 405.0), (Role::Signal, 810.0), (Role::Idler, 810.0)] {
        let w = wave_params(&crystal, role, nm(wl))?;
        println!(
            "  {role:?} ({} axis): k0={:.6e} rad/m  v_g={:.6e} m/s  GVD={:.3e} s^2/m",
            crystal.pm_type.axis(role),
            w.k0,
            w.group_velocity,
            w.gvd
        );
    }

    println!("residual mismatch away from degeneracy:");
    for ls in [808.0, 809.0, 810.0, 811.0, 812.0] {
        let li = 1.0 / (1.0 / 405.0 - 1.0 / ls);
        println!("  {ls} nm / {li:.3} nm: {:+.2} rad/m", phase_mismatch0(&crystal, nm(405.0), nm(ls), nm(li))?);
    }
    Ok(())
}
