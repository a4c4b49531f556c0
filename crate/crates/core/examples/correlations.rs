//! Joint (p, ℓ) correlation matrix, over the full spectrum and behind a
//! narrow spectral filter.

use spdc_lg::biphoton::{SpdcConfig, SpectralWindow};
use spdc_lg::state::{joint_correlation_matrix, ModeCorrelationMatrix};
use spdc_lg::units::{mm, nm};

fn show(title: &str, m: &ModeCorrelationMatrix) {
    let total = m.total();
    println!("{title} (sum {total:.4e}, tail {:?})", m.tail_fraction);
    print!("{:>10}", "");
    for i in &m.idler_modes {
        print!("{:>9}", format!("{},{}", i.p, i.ell));
    }
    println!();
    for (s, row) in m.signal_modes.iter().zip(&m.probabilities) {
        print!("{:>10}", format!("{},{}", s.p, s.ell));
        for p in row {
            print!("{:>9.4}", p / total);
        }
        println!();
    }
}

fn main() -> spdc_lg::Result<()> {
    let cfg = SpdcConfig::ppktp(mm(10.0), nm(405.0), 142e-6, 42e-6)?;
    let grid = cfg.default_grid();
    show("broadband", &joint_correlation_matrix(&cfg, 2, 1, &grid, None)?);
    for center in [809.8, 810.2] {
        let w = SpectralWindow::new(nm(center), nm(0.03))?;
        show(&format!("30 pm filter at {center} nm"), &joint_correlation_matrix(&cfg, 2, 1, &grid, Some(&w))?);
    }
    Ok(())
}
