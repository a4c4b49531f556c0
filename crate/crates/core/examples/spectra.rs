//! Complex spectra of the pair in the fundamental radial modes. Higher |ℓ|
//! moves the spectrum away from the degenerate wavelength.

use spdc_lg::biphoton::{collection_probability, spectrum, SpdcConfig};
use spdc_lg::units::{angular_frequency, mm, nm, to_nm, wavelength_of};

fn main() -> spdc_lg::Result<()> {
    let cfg = SpdcConfig::ppktp(mm(10.0), nm(405.0), 142e-6, 42e-6)?;
    let grid = cfg.default_grid();
    let w0 = angular_frequency(cfg.signal.center_wavelength);
    let as_nm = |om: f64| to_nm(wavelength_of(w0 + om));

    println!("{:>3} {:>12} {:>12} {:>12} {:>10}", "l", "P", "centroid nm", "peak nm", "tail");
    for l in 0..=4 {
        let s = spectrum(&cfg, 0, 0, l, &grid, false)?;
        println!(
            "{l:>3} {:>12.5e} {:>12.5} {:>12.5} {:>10.2e}",
            collection_probability(&cfg, 0, 0, l, &grid)?,
            as_nm(s.centroid()),
            as_nm(s.peak()),
            s.tail_fraction()
        );
    }

    // with the focus at the crystal center C is real; its sign flips from one
    // sinc lobe to the next
    let s = spectrum(&cfg, 0, 0, 2, &grid, true)?;
    let flips = s.values.windows(2).filter(|w| w[0].re * w[1].re < 0.0).count();
    let max_im = s.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    println!("l=2 normalized: {flips} sign changes, max |Im C| = {max_im:.1e}");
    Ok(())
}
