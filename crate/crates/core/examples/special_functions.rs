//! The regularized hypergeometric function on both sides of the switch from
//! the direct series to the Pfaff-transformed polynomial.

use num_complex::Complex64;
use spdc_lg::biphoton::hyp2f1_regularized;
use spdc_lg::biphoton::hypergeometric::DIRECT_SERIES_RADIUS;

fn main() -> spdc_lg::Result<()> {
    let one = Complex64::new(1.0, 0.0);
    for r in [0.3, DIRECT_SERIES_RADIUS - 1e-9, DIRECT_SERIES_RADIUS + 1e-9, 0.9] {
        let z = Complex64::from_polar(r, 0.7);
        let exact = z / ((one - z) * (one - z));
        let got = hyp2f1_regularized(1, 1, 0, z)?;
        println!("|z|={r:.9}: F(1,1;0;z) = {got:.12}  err {:.1e}", (got - exact).norm() / exact.norm());
    }
    for (a, b, c) in [(3, 2, -1), (5, 5, 0), (2, 7, -4)] {
        let z = Complex64::new(-0.4, 0.3);
        println!("F({a},{b};{c};{z}) = {:.12}", hyp2f1_regularized(a, b, c, z)?);
    }
    Ok(())
}
