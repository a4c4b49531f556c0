use num_complex::Complex64;
use proptest::prelude::*;
use spdc_lg::biphoton::hyp2f1_regularized;

fn f(a: u32, b: u32, c: i32, z: Complex64) -> Complex64 {
    hyp2f1_regularized(a, b, c, z).unwrap()
}

/// |Σ terms| relative to Σ |terms|.
fn residual(terms: [Complex64; 3]) -> f64 {
    let scale: f64 = terms.iter().map(|t| t.norm()).sum();
    let sum: Complex64 = terms.iter().sum();
    sum.norm() / scale.max(f64::MIN_POSITIVE)
}

fn unit_disk() -> impl Strategy<Value = Complex64> {
    (0.0f64..0.95, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

#[test]
fn geometric_series_and_its_c0_sibling() {
    let one = Complex64::new(1.0, 0.0);
    for z in [Complex64::new(0.5, 0.0), Complex64::new(-0.7, 0.2), Complex64::new(0.1, 0.85)] {
        let g = f(1, 1, 1, z);
        assert!((g - one / (one - z)).norm() < 1e-13 * g.norm());
        let h = f(1, 1, 0, z);
        assert!((h - z / ((one - z) * (one - z))).norm() < 1e-13 * h.norm());
    }
}

#[test]
fn origin_gives_inverse_gamma_of_c() {
    let zero = Complex64::new(0.0, 0.0);
    assert_eq!(f(4, 7, 1, zero), Complex64::new(1.0, 0.0));
    for c in -8..=0 {
        assert_eq!(f(4, 7, c, zero), zero);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn contiguous_in_a(a in 2u32..9, b in 1u32..9, c in -6i32..=1, z in unit_disk()) {
        let (af, bf, cf) = (a as f64, b as f64, c as f64);
        let r = residual([
            (cf - af) * f(a - 1, b, c, z),
            (2.0 * af - cf + (bf - af) * z) * f(a, b, c, z),
            af * (z - 1.0) * f(a + 1, b, c, z),
        ]);
        prop_assert!(r < 1e-10, "residual {r}");
    }

    #[test]
    fn symmetric_in_a_and_b(a in 1u32..9, b in 1u32..9, c in -6i32..=1, z in unit_disk()) {
        let (x, y) = (f(a, b, c, z), f(b, a, c, z));
        prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1e-300));
    }

    #[test]
    fn conjugate_argument_conjugates_value(a in 1u32..9, b in 1u32..9, c in -6i32..=1, z in unit_disk()) {
        let (x, y) = (f(a, b, c, z.conj()), f(a, b, c, z).conj());
        prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1e-300));
    }
}
