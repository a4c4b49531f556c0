//! Regularized Gauss hypergeometric function for the integer parameters that
//! appear in the mode amplitude: a, b ≥ 1 and c ≤ 1.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// |z| at or below which the defining series is summed directly.
pub const DIRECT_SERIES_RADIUS: f64 = 0.6;
pub const MAX_TERMS: usize = 10_000;
const REL_TOL: f64 = 1e-15;

/// ₂F̃₁(a, b; c; z) = Σ_{n ≥ max(0, 1−c)} (a)_n (b)_n z^n / (Γ(c+n) n!).
///
/// Terms with c + n ≤ 0 vanish, so the sum starts at m = 1 − c. Outside the
/// direct-series disk, and in the left half-plane where the series alternates
/// and cancels, the Pfaff transformation turns the tail into a polynomial of
/// degree min(a, b) − 1 in z/(z−1); z = 1 itself is singular.
pub fn hyp2f1_regularized(a: u32, b: u32, c: i32, z: Complex64) -> Result<Complex64> {
    if a == 0 || b == 0 || c > 1 {
        return Err(Error::InvalidParameter(format!(
            "regularized 2F1 needs a, b ≥ 1 and c ≤ 1, got ({a}, {b}; {c})"
        )));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NoConvergence(format!("non-finite argument {z}")));
    }
    let m = (1 - c) as u32;
    if z.norm() <= DIRECT_SERIES_RADIUS && z.re >= 0.0 {
        direct_series(a as f64, b as f64, m, z)
    } else {
        pfaff(a, b, m, z)
    }
}

/// (a)_m (b)_m z^m / m!, the leading term of the shifted series.
fn leading_term(a: f64, b: f64, m: u32, z: Complex64) -> Complex64 {
    let mut t = Complex64::new(1.0, 0.0);
    for k in 0..m {
        let k = k as f64;
        t *= z * ((a + k) * (b + k) / (k + 1.0));
    }
    t
}

fn direct_series(a: f64, b: f64, m: u32, z: Complex64) -> Result<Complex64> {
    let mut term = leading_term(a, b, m, z);
    let mut sum = term;
    let mut small = 0;
    let mf = m as f64;
    for n in m as usize..m as usize + MAX_TERMS {
        let nf = n as f64;
        term *= z * ((a + nf) * (b + nf) / ((nf + 1.0 - mf) * (nf + 1.0)));
        sum += term;
        if term.norm() <= REL_TOL * sum.norm() {
            small += 1;
            if small == 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
        if term.norm() == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence(format!(
        "2F1 series at z = {z} not converged after {MAX_TERMS} terms"
    )))
}

fn pfaff(a: u32, b: u32, m: u32, z: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    if (z - one).norm() == 0.0 {
        return Err(Error::NoConvergence("2F1 is singular at z = 1".into()));
    }
    // symmetric in (a, b); the smaller one bounds the polynomial degree
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    let (af, mf) = ((a + m) as f64, m as f64);
    let w = z / (z - one);
    // ₂F₁(a+m, 1−b; 1+m; w) terminates after b terms
    let mut term = one;
    let mut poly = one;
    for n in 0..b - 1 {
        let nf = n as f64;
        term *= w * ((af + nf) * (1.0 - b as f64 + nf) / ((1.0 + mf + nf) * (nf + 1.0)));
        poly += term;
    }
    let prefactor = leading_term(a as f64, b as f64, m, z) * (one - z).powi(-((a + m) as i32));
    let value = prefactor * poly;
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::NoConvergence(format!("2F1 overflow at z = {z}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(x: Complex64, y: Complex64, tol: f64) -> bool {
        (x - y).norm() <= tol * y.norm().max(1e-300)
    }

    #[test]
    fn geometric_cases() {
        assert!(close(hyp2f1_regularized(1, 1, 1, c(0.5, 0.0)).unwrap(), c(2.0, 0.0), 1e-14));
        assert!(close(hyp2f1_regularized(1, 1, 0, c(0.5, 0.0)).unwrap(), c(2.0, 0.0), 1e-14));
    }

    #[test]
    fn value_at_origin_is_inverse_gamma() {
        assert_eq!(hyp2f1_regularized(3, 2, 1, c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        for cc in -4..=0 {
            assert_eq!(hyp2f1_regularized(2, 5, cc, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        }
    }

    #[test]
    fn golden_values() {
        let v = hyp2f1_regularized(2, 3, -1, c(0.3, 0.2)).unwrap();
        assert!(close(v, c(-37.305984467024698062, 6.9865434468756349598), 1e-13));
        let v = hyp2f1_regularized(1, 2, -2, c(0.8, -0.3)).unwrap();
        assert!(close(v, c(2351.9861672587417484, 709.30935945466249027), 1e-13));
        let v = hyp2f1_regularized(3, 1, 0, c(-0.9, 0.1)).unwrap();
        assert!(close(v, c(-0.20627665307335062432, -0.020628993009198734991), 1e-13));
    }

    #[test]
    fn branches_agree_near_switch_radius() {
        for &(a, b, cc) in &[(1, 1, 1), (2, 3, -1), (4, 2, -3), (5, 5, 0)] {
            for k in -6..=6 {
                let th = k as f64 * 0.25;
                let z = Complex64::from_polar(DIRECT_SERIES_RADIUS, th);
                let d = direct_series(a as f64, b as f64, (1 - cc) as u32, z).unwrap();
                let p = pfaff(a, b, (1 - cc) as u32, z).unwrap();
                assert!(close(d, p, 1e-12), "({a},{b};{cc}) z={z}: {d} vs {p}");
            }
        }
    }

    #[test]
    fn left_half_plane_uses_stable_branch() {
        // (5,5;0) at z = −0.59 + 0.08i: the direct series cancels through ~1e3-sized terms
        let z = c(-0.5939954979602672, 0.08467200483592033);
        let v = hyp2f1_regularized(5, 5, 0, z).unwrap();
        assert!(close(v, c(0.037797131820470582959, 0.043806298306115176580), 1e-13), "{v}");
    }

    #[test]
    fn singular_point_and_bad_parameters() {
        assert!(matches!(hyp2f1_regularized(1, 1, 0, c(1.0, 0.0)), Err(Error::NoConvergence(_))));
        assert!(hyp2f1_regularized(0, 1, 0, c(0.1, 0.0)).is_err());
        assert!(hyp2f1_regularized(1, 1, 2, c(0.1, 0.0)).is_err());
    }
}
