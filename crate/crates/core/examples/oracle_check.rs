//! The closed-form amplitude against brute-force transverse quadrature, and
//! the OAM selection rule emerging from a full four-dimensional integral.

use spdc_lg::biphoton::{mode_amplitude, oracle_amplitude, oracle_amplitude_4d, OracleSpec, OracleSpec4d, SpdcConfig};
use spdc_lg::lgmodes::LGIndex;
use spdc_lg::units::{mm, nm, um};

fn main() -> spdc_lg::Result<()> {
    let cfg = SpdcConfig::ppktp(mm(10.0), nm(405.0), um(142.0), um(42.0))?;
    let h = cfg.default_grid().omega_max() / 2.0;
    let omegas = [-h, 0.0, h];
    for (ps, pi, l) in [(0, 0, 0), (1, 0, 2), (2, 1, -3)] {
        let oracle = oracle_amplitude(&cfg, ps, pi, l, &omegas, &OracleSpec::default())?;
        for (o, &om) in oracle.iter().zip(&omegas) {
            let c = mode_amplitude(&cfg, ps, pi, l, om)?;
            println!("({ps},{pi},{l:+}) at {om:+.3e}: closed {c:.6e}  rel. diff {:.1e}", (c - o).norm() / o.norm());
        }
    }

    let spec = OracleSpec4d::default();
    let allowed = oracle_amplitude_4d(&cfg, LGIndex::new(0, 1), LGIndex::new(0, -1), 0.0, &spec)?;
    let forbidden = oracle_amplitude_4d(&cfg, LGIndex::new(0, 1), LGIndex::new(0, 1), 0.0, &spec)?;
    println!("4-D: |C(1,-1)| = {:.6e}, |C(1,+1)| = {:.3e}", allowed.norm(), forbidden.norm());
    Ok(())
}
