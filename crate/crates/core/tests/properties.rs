use std::f64::consts::{PI, TAU};

use magspec::analysis::{sector_classify, SectorRegion, SectorSpec};
use magspec::birman_schwinger::determinant::det_p;
use magspec::landau::{k_from_z, landau_level, param_z, projection_kernel, sqrt_branch, Branch};
use magspec::potentials::{EffectiveW, TransverseProfile};
use magspec::toeplitz::toeplitz_spectrum_radial;
use magspec::zero_finder::winding_index;
use magspec::Complex64;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn complex(r: std::ops::Range<f64>) -> impl Strategy<Value = Complex64> {
    (r.clone(), r).prop_map(|(a, b)| Complex64::new(a, b))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<Complex64>> {
    prop::collection::vec(complex(-0.6..0.6), rows * cols)
        .prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

proptest! {
    #[test]
    fn projection_kernel_is_hermitian(
        q in 0usize..4,
        b in 0.2f64..4.0,
        x in prop::array::uniform2(-3.0f64..3.0),
        y in prop::array::uniform2(-3.0f64..3.0),
    ) {
        let a = projection_kernel(q, b, x, y);
        let c = projection_kernel(q, b, y, x).conj();
        prop_assert!((a - c).norm() <= 1e-13 * (1.0 + a.norm()));
    }

    #[test]
    fn sqrt_branch_squares_back(z in complex(-50.0..50.0)) {
        prop_assume!(z.im != 0.0);
        let s = sqrt_branch(z).unwrap();
        prop_assert!(s.im > 0.0);
        prop_assert!((s * s - z).norm() <= 1e-14 * z.norm().max(1.0));
    }

    #[test]
    fn spectral_parameter_round_trips(q in 0usize..5, b in 0.1f64..5.0, k in complex(-2.0..2.0)) {
        prop_assume!(k.re > 1e-3 && k.im.abs() > 1e-3);
        let back = k_from_z(q, b, param_z(q, b, k)).unwrap();
        prop_assert!((back.k - k).norm() <= 1e-10 * (1.0 + landau_level(q, b)) / k.norm());
        prop_assert_eq!(back.branch, if k.im > 0.0 { Branch::Plus } else { Branch::Minus });
    }

    #[test]
    fn sector_classification_is_scale_invariant(
        alpha in 0.0f64..TAU,
        theta in 0.01f64..0.39,
        q in 0usize..3,
        w in complex(-1.0..1.0),
        scale in 1e-6f64..1e3,
    ) {
        prop_assume!(w.norm() > 1e-6);
        let spec = SectorSpec::new(alpha, theta, Branch::Plus, q, 1.5).unwrap();
        let base = sector_classify(spec.level() + w, &spec).unwrap();
        let scaled = sector_classify(spec.level() + w * scale, &spec).unwrap();
        // Away from the sector edge the region is unchanged by dilation about the level.
        prop_assume!((base.offset.abs() - 2.0 * theta).abs() > 1e-9);
        prop_assert_eq!(base.region, scaled.region);
        prop_assert!((base.offset - scaled.offset).abs() < 1e-9);
    }

    #[test]
    fn sector_classes_partition_the_plane(
        alpha in -PI..PI,
        theta in 0.01f64..0.39,
        w in complex(-1.0..1.0),
    ) {
        prop_assume!(w.norm() > 0.0);
        for branch in [Branch::Plus, Branch::Minus] {
            let spec = SectorSpec::new(alpha, theta, branch, 1, 2.0).unwrap();
            let c = sector_classify(spec.level() + w, &spec).unwrap();
            prop_assert!(-PI <= c.offset && c.offset <= PI);
            let inside = c.offset.abs() < 2.0 * theta;
            prop_assert_eq!(inside, c.region == SectorRegion::Localization);
            prop_assert!((c.modulus - w.norm()).abs() <= 1e-12);
        }
    }

    #[test]
    fn winding_is_additive(
        roots in prop::collection::vec(complex(-1.5..1.5), 1..5),
        split in -0.8f64..0.8,
    ) {
        let f = |z: Complex64| Ok(roots.iter().fold(Complex64::new(1.0, 0.0), |p, r| p * (z - r)));
        let (lo, hi) = (-1.0, 1.0);
        let c = |x: f64, y: f64| Complex64::new(x, y);
        // Keep roots away from every contour edge.
        let clear = roots.iter().all(|r| {
            [r.re - lo, hi - r.re, r.im - lo, hi - r.im, r.re - split]
                .iter()
                .all(|d| d.abs() > 1e-3)
        });
        prop_assume!(clear);
        let whole = winding_index(&f, &[c(lo, lo), c(hi, lo), c(hi, hi), c(lo, hi)], 32).unwrap();
        let left = winding_index(&f, &[c(lo, lo), c(split, lo), c(split, hi), c(lo, hi)], 32).unwrap();
        let right = winding_index(&f, &[c(split, lo), c(hi, lo), c(hi, hi), c(split, hi)], 32).unwrap();
        let inside = roots.iter().filter(|r| r.re.abs() < 1.0 && r.im.abs() < 1.0).count() as i64;
        prop_assert_eq!(whole, left + right);
        prop_assert_eq!(whole, inside);
    }

    #[test]
    fn regularized_determinant_commutes(
        (a, b) in (1usize..6, 1usize..6).prop_flat_map(|(n, m)| (matrix(n, m), matrix(m, n))),
        p in 1u32..5,
    ) {
        let ab = det_p(&(&a * &b), p).unwrap();
        let ba = det_p(&(&b * &a), p).unwrap();
        prop_assert!((ab - ba).norm() <= 1e-10 * ab.norm().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn counting_function_is_non_increasing(
        mu in 0.2f64..3.0,
        beta in 0.5f64..1.5,
        q in 0usize..3,
        r in prop::collection::vec(1e-8f64..1.0, 2..12),
    ) {
        let w = EffectiveW::from_profile(TransverseProfile::Gaussian { amplitude: 1.0, mu, beta }, 1.0).unwrap();
        let spec = toeplitz_spectrum_radial(q, 2.0, &w, 30).unwrap();
        let mut r = r;
        r.sort_by(f64::total_cmp);
        for pair in r.windows(2) {
            prop_assert!(spec.counting(pair[0]) >= spec.counting(pair[1]));
        }
        prop_assert!(spec.values().windows(2).all(|v| v[0] >= v[1]));
    }
}
