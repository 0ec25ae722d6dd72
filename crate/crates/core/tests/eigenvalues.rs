use std::f64::consts::{PI, TAU};

use magspec::birman_schwinger::{BirmanSchwinger, GalerkinBasis};
use magspec::landau::{KPoint, MagneticField};
use magspec::oracle::first_order_k;
use magspec::potentials::{LongitudinalProfile, SeparablePotential, TransverseProfile};
use magspec::zero_finder::{
    eigenvalues_near_level, trace_index, winding_index, KRegion, ScanOptions,
};
use magspec::Complex64;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn potential(epsilon: f64) -> SeparablePotential {
    SeparablePotential::new(
        0.75 * PI,
        epsilon,
        TransverseProfile::Gaussian {
            amplitude: 1.0,
            mu: 1.0,
            beta: 1.0,
        },
        LongitudinalProfile::Gaussian { mu: 1.0 / 2.25 },
        2.0,
    )
    .unwrap()
}

/// Zero of the `m = 0` sector closest to the first-order prediction.
fn leading_zero(epsilon: f64) -> (Complex64, Complex64) {
    let pot = potential(epsilon);
    let field = MagneticField::new(2.0).unwrap();
    let predicted = first_order_k(&pot, field, 0, 0).unwrap();
    let basis = GalerkinBasis::new(0, 2, 3, 20, 1.5)
        .unwrap()
        .with_tail_tol(1.0);
    let bs = BirmanSchwinger::new(&pot, field, basis).unwrap();
    let region = KRegion::AnnularSector {
        r: (0.7 * predicted.norm(), 1.3 * predicted.norm()),
        theta: (predicted.arg() - 0.4, predicted.arg() + 0.4),
    };
    let eigs = eigenvalues_near_level(&bs, region, ScanOptions::default()).unwrap();
    let found = eigs
        .iter()
        .map(|e| e.k)
        .min_by(|a, b| (a - predicted).norm().total_cmp(&(b - predicted).norm()))
        .expect("one zero near the prediction");
    assert_eq!(eigs.len(), 1, "{eigs:?}");
    (found, predicted)
}

#[test]
fn zeros_approach_first_order_prediction_linearly() {
    let errors: Vec<f64> = [0.08, 0.04, 0.02]
        .iter()
        .map(|&eps| {
            let (k, k1) = leading_zero(eps);
            (k - k1).norm() / k1.norm()
        })
        .collect();
    for e in &errors {
        assert!(*e < 0.2, "{errors:?}");
    }
    // Relative error is O(epsilon): halving epsilon roughly halves it.
    for w in errors.windows(2) {
        let rate = w[0] / w[1];
        assert!((1.6..2.5).contains(&rate), "{errors:?}");
    }
}

#[test]
fn trace_formula_agrees_with_scalar_winding() {
    let pot = potential(0.2);
    let field = MagneticField::new(2.0).unwrap();
    let basis = GalerkinBasis::new(0, 1, 3, 16, 1.5)
        .unwrap()
        .with_tail_tol(1.0);
    let bs = BirmanSchwinger::new(&pot, field, basis).unwrap();
    let matrix = |k: Complex64| {
        let t = bs.assemble(KPoint::new(k)?)?.t.to_dense();
        Ok(DMatrix::identity(t.nrows(), t.ncols()) + t)
    };
    let det = |k: Complex64| bs.fredholm_determinant(KPoint::new(k)?);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut centers = vec![first_order_k(&pot, field, 0, 0).unwrap()];
    while centers.len() < 4 {
        let k = Complex64::from_polar(rng.random_range(0.03..0.3), rng.random_range(0.2..1.37));
        centers.push(k);
    }
    let mut nonzero = 0;
    for c in centers {
        let radius = 0.5 * c.re.min(c.im);
        let polygon: Vec<Complex64> = (0..96)
            .map(|j| c + Complex64::from_polar(radius, TAU * j as f64 / 96.0))
            .collect();
        let scalar = winding_index(&det, &polygon, 8).unwrap();
        let trace = trace_index(&matrix, c, radius, 128).unwrap();
        assert!(
            (trace - scalar as f64).norm() < 1e-3,
            "{c}: trace {trace} vs winding {scalar}"
        );
        nonzero += (scalar != 0) as usize;
    }
    assert!(nonzero >= 1);
}
