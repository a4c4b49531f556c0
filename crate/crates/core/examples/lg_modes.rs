//! Laguerre-Gauss collection modes in momentum space and the expansion
//! coefficients that enter the closed-form amplitude.

use std::f64::consts::PI;

use spdc_lg::lgmodes::{lg_momentum_amplitude, t_coefficient, LGIndex};
use spdc_lg::units::um;

fn main() -> spdc_lg::Result<()> {
    let w = um(42.0);

    // ∫|LG|² d²q = 1, checked with a plain polar midpoint rule
    let (nr, nphi, qmax) = (2000, 64, 12.0 / w);
    for mode in [LGIndex::new(0, 0), LGIndex::new(0, 2), LGIndex::new(3, -1), LGIndex::new(2, 4)] {
        let dq = qmax / nr as f64;
        let mut norm = 0.0;
        for i in 0..nr {
            let q = (i as f64 + 0.5) * dq;
            for j in 0..nphi {
                let phi = 2.0 * PI * j as f64 / nphi as f64;
                let a = lg_momentum_amplitude(mode, w, [q * phi.cos(), q * phi.sin()]);
                norm += a.norm_sqr() * q * dq * 2.0 * PI / nphi as f64;
            }
        }
        println!("{mode}: norm = {norm:.8}");
    }

    println!("T coefficients at w = 42 um:");
    for (p, l) in [(0, 0), (1, 1), (2, 3)] {
        let t: Vec<String> = (0..=p)
            .map(|u| Ok(format!("{:+.4e}", t_coefficient(u, p, l, w)?)))
            .collect::<spdc_lg::Result<_>>()?;
        println!("  p={p} l={l}: [{}]", t.join(", "));
    }
    Ok(())
}
