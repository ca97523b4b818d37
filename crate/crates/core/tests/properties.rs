use num_complex::Complex64;
use proptest::prelude::*;

use slelab::cle_measure::Mobius;
use slelab::gff::{circle_average, sample_zero_boundary_gff};
use slelab::gmc::{expected_jumps_above, sample_stable_jumps};
use slelab::grid::Grid;
use slelab::loewner::{inverse_forward, solve_forward, DrivingFunction};
use slelab::loopsoup::{sample_loop_soup, thin_soup, BridgeResolution, Disk};
use slelab::natural_param::{disk_to_half_plane, half_plane_to_disk};
use slelab::params::{kappa_from_intensity, loop_soup_intensity};
use slelab::rng::derive_seed;
use slelab::special::BesselDensitySpec;

fn in_disk(r_max: f64) -> impl Strategy<Value = Complex64> {
    (0.0..r_max, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn intensity_inverts(k in 2.6668_f64..=4.0) {
        let c = loop_soup_intensity(k).unwrap();
        prop_assert!((kappa_from_intensity(c).unwrap() - k).abs() < 1e-9);
    }

    #[test]
    fn mobius_preserves_the_disk(z0 in in_disk(0.95), theta in -3.0_f64..3.0, w in in_disk(0.999), t in 0.0_f64..6.3) {
        let m = Mobius::new(z0, theta).unwrap();
        prop_assert!(m.apply(w).norm() < 1.0);
        prop_assert!((m.apply(Complex64::from_polar(1.0, t)).norm() - 1.0).abs() < 1e-9);
        let h = 1e-6;
        let fd = (m.apply(w + h) - m.apply(w - h)).norm() / (2.0 * h);
        prop_assert!((fd - m.derivative_abs(w)).abs() < 1e-5 * fd.max(1.0));
    }

    #[test]
    fn cayley_round_trip(z in in_disk(0.99)) {
        let w = disk_to_half_plane(z);
        prop_assert!(w.im > 0.0);
        prop_assert!((half_plane_to_disk(w) - z).norm() < 1e-9);
    }

    #[test]
    fn grid_cells_contain_their_centers(n in 2usize..64, i in 0usize..64, j in 0usize..64) {
        let g = Grid::unit_box(n);
        let (i, j) = (i % n, j % n);
        prop_assert_eq!(g.cell_of(g.center(i, j)), Some((i, j)));
        prop_assert_eq!(g.coords(g.index(i, j)), (i, j));
    }

    #[test]
    fn loewner_inverse_undoes_flow(x in -2.0_f64..2.0, y in 0.5_f64..2.0, a in -1.0_f64..1.0) {
        let d = DrivingFunction::from_fn(1e-3, 200, 0.0, |t: f64| a * t.sqrt());
        let z = Complex64::new(x, y);
        let g = solve_forward(&d, z, 0.2).unwrap().mapped().unwrap();
        prop_assert!(g.im > 0.0 && g.im <= z.im + 1e-12);
        prop_assert!((inverse_forward(&d, g, 0.2).unwrap() - z).norm() < 1e-6);
    }

    #[test]
    fn bessel_density_is_a_probability(a in 0.26_f64..3.0, s in 0.05_f64..1.5, x in 0.1_f64..3.0) {
        let spec = BesselDensitySpec::new(a, s).unwrap();
        let mut prev = 0.0;
        for k in 1..=8 {
            let y = std::f64::consts::PI * k as f64 / 8.0;
            prop_assert!(spec.density(x, y * 0.999) >= 0.0);
            let c = spec.cdf(x, y);
            prop_assert!(c + 1e-9 >= prev);
            prev = c;
        }
        prop_assert!((prev - 1.0).abs() < 1e-6);
    }

    #[test]
    fn jump_tail_scales(a in 1.01_f64..1.99, y in 0.01_f64..10.0, lam in 0.1_f64..10.0) {
        let r = expected_jumps_above(a, 1.0, lam * y, 1.0) / expected_jumps_above(a, 1.0, y, 1.0);
        prop_assert!((r - lam.powf(-a)).abs() < 1e-12 * r.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn jumps_respect_floor(a in 1.1_f64..1.9, floor in 0.01_f64..0.5, seed in any::<u64>()) {
        let rec = sample_stable_jumps(a, 1.0, floor, 1.0, seed).unwrap();
        prop_assert!(rec.sizes.iter().all(|&s| s >= floor));
        prop_assert_eq!(rec, sample_stable_jumps(a, 1.0, floor, 1.0, seed).unwrap());
    }

    #[test]
    fn thinning_nests(seed in any::<u64>(), c1 in 0.0_f64..0.5, gap in 0.0_f64..0.5) {
        let soup = sample_loop_soup(Disk::UNIT, 1.0, 0.05, 0.5, BridgeResolution::fixed(16), seed).unwrap();
        let small = thin_soup(&soup, c1, derive_seed(seed, 1)).unwrap();
        let large = thin_soup(&soup, c1 + gap, derive_seed(seed, 1)).unwrap();
        prop_assert!(small.labels.iter().all(|l| large.labels.contains(l)));
        prop_assert!(large.labels.iter().all(|l| soup.labels.contains(l)));
        prop_assert!(soup.loops.iter().flat_map(|l| &l.polyline).all(|&z| Disk::UNIT.contains(z)));
    }

    #[test]
    fn circle_average_commutes_with_shift(seed in any::<u64>(), c in -3.0_f64..3.0, z in in_disk(0.5)) {
        let h = sample_zero_boundary_gff(33, seed).unwrap();
        let base = circle_average(&h, z, 0.2).unwrap();
        prop_assert!((circle_average(&h.shifted(c), z, 0.2).unwrap() - base - c).abs() < 1e-9);
    }
}
