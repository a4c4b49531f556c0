use proptest::prelude::*;
use spdc_lg::biphoton::{mode_amplitude, pair_amplitude, spectrum, SpdcConfig};
use spdc_lg::dispersion::{degenerate_poling_period, phase_mismatch0, CrystalSpec};
use spdc_lg::lgmodes::LGIndex;
use spdc_lg::state::joint_correlation_matrix;
use spdc_lg::units::{mm, nm, um};

fn config() -> SpdcConfig {
    SpdcConfig::ppktp(mm(10.0), nm(405.0), um(142.0), um(42.0)).unwrap()
}

#[test]
fn grating_period_is_in_the_ten_micron_class() {
    let crystal = CrystalSpec::ppktp(mm(10.0)).unwrap();
    let period = degenerate_poling_period(&crystal, nm(405.0)).unwrap();
    assert!((9e-6..11e-6).contains(&period), "{period}");
    assert!(phase_mismatch0(&crystal, nm(405.0), nm(810.0), nm(810.0)).unwrap().abs() < 1e-6);
}

#[test]
fn fundamental_spectrum_sits_closest_to_degeneracy() {
    let cfg = config();
    let grid = cfg.default_grid();
    let centroids: Vec<f64> = (0..=4)
        .map(|l| spectrum(&cfg, 0, 0, l, &grid, false).unwrap().centroid().abs())
        .collect();
    assert!(centroids[1..].iter().all(|&c| c > centroids[0]), "{centroids:?}");
}

#[test]
fn oam_is_conserved() {
    let cfg = config();
    let allowed = pair_amplitude(&cfg, 0, 2, 1, -2, 0.0).unwrap();
    assert!(allowed.norm() > 0.0);
    for (ls, li) in [(2, 2), (1, 0), (0, 3), (-1, -1)] {
        assert_eq!(pair_amplitude(&cfg, 0, ls, 1, li, 0.0).unwrap().norm(), 0.0);
    }
}

#[test]
fn z_quadrature_has_converged_at_order_64() {
    let cfg = config();
    let fine = cfg.clone().with_z_order(128).unwrap();
    for (ps, pi, l) in [(0, 0, 0), (1, 2, 3), (2, 0, 4)] {
        for om in [-2e12, 0.0, 3e12] {
            let a = mode_amplitude(&cfg, ps, pi, l, om).unwrap();
            let b = mode_amplitude(&fine, ps, pi, l, om).unwrap();
            assert!((a - b).norm() < 1e-9 * b.norm(), "({ps},{pi},{l}) at {om}");
        }
    }
}

#[test]
fn correlation_matrix_is_anti_diagonal_in_ell() {
    let cfg = config();
    let m = joint_correlation_matrix(&cfg, 1, 2, &cfg.default_grid(), None).unwrap();
    for s in &m.signal_modes {
        for i in &m.idler_modes {
            let p = m.get(*s, *i).unwrap();
            if s.ell + i.ell != 0 {
                assert_eq!(p, 0.0);
            }
        }
    }
    let a = m.get(LGIndex::new(1, 2), LGIndex::new(0, -2)).unwrap();
    let b = m.get(LGIndex::new(1, -2), LGIndex::new(0, 2)).unwrap();
    assert_eq!(a, b);
    assert!(m.tail_fraction.unwrap() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn amplitude_depends_on_abs_ell_only(ps in 0u32..4, pi in 0u32..4, l in 0i32..6, om in -5e12f64..5e12) {
        let cfg = config();
        prop_assert_eq!(mode_amplitude(&cfg, ps, pi, l, om).unwrap(), mode_amplitude(&cfg, ps, pi, -l, om).unwrap());
    }

    #[test]
    fn relabeling_photons_mirrors_the_detuning(ps in 0u32..3, pi in 0u32..3, l in 0i32..4, om in -5e12f64..5e12) {
        let cfg = config();
        let a = mode_amplitude(&cfg, ps, pi, l, om).unwrap();
        let b = mode_amplitude(&cfg.swapped_roles(), pi, ps, l, -om).unwrap();
        prop_assert!((a - b).norm() <= 1e-10 * a.norm());
    }

    #[test]
    fn probability_is_positive_and_finite(ws in 15.0f64..90.0, l in 0i32..5) {
        let cfg = config().with_collection_waists(um(ws), um(ws)).unwrap();
        let p = spectrum(&cfg, 0, 0, l, &cfg.default_grid(), false).unwrap().norm_sqr();
        prop_assert!(p.is_finite() && p > 0.0);
    }
}
