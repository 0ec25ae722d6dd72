//! Regularized determinants `det_p(I - T)` of finite matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Error, Result};

fn check_order(p: u32) -> Result<()> {
    if p == 0 {
        Err(invalid("regularization order must be at least 1"))
    } else {
        Ok(())
    }
}

/// Eigenvalues of a square complex matrix.
pub fn eigenvalues(t: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    if !t.is_square() {
        return Err(invalid("matrix must be square"));
    }
    if t.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = t
        .clone()
        .try_schur(1e-15, 100_000)
        .ok_or_else(|| Error::Eigensolver("Schur iteration did not converge".into()))?;
    let (_, tri) = schur.unpack();
    Ok((0..tri.nrows()).map(|i| tri[(i, i)]).collect())
}

/// `det_p(I - T) = prod_j (1 - l_j) exp(sum_{k < p} l_j^k / k)` over the eigenvalues `l_j` of `T`.
pub fn det_p(t: &DMatrix<Complex64>, p: u32) -> Result<Complex64> {
    check_order(p)?;
    let mut log = Complex64::new(0.0, 0.0);
    for l in eigenvalues(t)? {
        let one_minus = Complex64::new(1.0, 0.0) - l;
        if one_minus == Complex64::new(0.0, 0.0) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        log += one_minus.ln();
        let mut pow = Complex64::new(1.0, 0.0);
        for k in 1..p {
            pow *= l;
            log += pow / k as f64;
        }
    }
    Ok(log.exp())
}

/// Logarithm (up to `2 pi i`) of `det_p(I - T)` through an LU factorization and traces of powers.
pub fn ln_det_p_fast(t: &DMatrix<Complex64>, p: u32) -> Result<Complex64> {
    check_order(p)?;
    if !t.is_square() {
        return Err(invalid("matrix must be square"));
    }
    let n = t.nrows();
    let lu = (DMatrix::identity(n, n) - t).lu();
    let mut log = Complex64::new(0.0, 0.0);
    let u = lu.u();
    for i in 0..n {
        let d = u[(i, i)];
        if d == Complex64::new(0.0, 0.0) {
            return Ok(Complex64::new(f64::NEG_INFINITY, 0.0));
        }
        log += d.ln();
    }
    if lu.p().determinant::<f64>() < 0.0 {
        log += Complex64::new(0.0, std::f64::consts::PI);
    }
    if p > 1 {
        let mut pow = t.clone();
        for k in 1..p {
            log += pow.trace() / k as f64;
            if k + 1 < p {
                pow = &pow * t;
            }
        }
    }
    Ok(log)
}

/// `det_p(I - T)` through [`ln_det_p_fast`].
pub fn det_p_fast(t: &DMatrix<Complex64>, p: u32) -> Result<Complex64> {
    Ok(ln_det_p_fast(t, p)?.exp())
}

/// Schatten `p`-norm.
pub fn schatten_norm(t: &DMatrix<Complex64>, p: f64) -> f64 {
    let sv = t.clone().singular_values();
    sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Smallest `Gamma` with `|det_p(I - A) - det_p(I - B)| <= ||A - B||_p exp(Gamma (||A||_p + ||B||_p + 1)^p)`
/// on one pair.
pub fn lipschitz_exponent(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, p: u32) -> Result<f64> {
    let diff = (det_p(a, p)? - det_p(b, p)?).norm();
    let dist = schatten_norm(&(a - b), p as f64);
    if dist == 0.0 || diff == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let size = schatten_norm(a, p as f64) + schatten_norm(b, p as f64) + 1.0;
    Ok((diff / dist).ln() / size.powi(p as i32))
}

/// Random complex matrix with entries uniform in the unit square, scaled to Schatten norm `radius`.
pub fn random_matrix(
    rng: &mut impl Rng,
    rows: usize,
    cols: usize,
    radius: f64,
) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let norm = m.norm();
    if norm == 0.0 {
        m
    } else {
        m * Complex64::new(radius / norm, 0.0)
    }
}

/// Empirical constant in the Lipschitz bound, the maximum of [`lipschitz_exponent`] over
/// `samples` random pairs of size at most `max_dim` and Schatten norm at most `max_radius`.
pub fn calibrate_gamma(
    p: u32,
    samples: usize,
    max_dim: usize,
    max_radius: f64,
    rng: &mut impl Rng,
) -> Result<f64> {
    let mut gamma = f64::NEG_INFINITY;
    for _ in 0..samples {
        let n = rng.random_range(1..=max_dim);
        let (ra, rb) = (
            rng.random_range(0.0..max_radius),
            rng.random_range(0.0..max_radius),
        );
        let a = random_matrix(rng, n, n, ra);
        let b = random_matrix(rng, n, n, rb);
        gamma = gamma.max(lipschitz_exponent(&a, &b, p)?);
    }
    Ok(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_matrix_has_unit_determinant() {
        let z = DMatrix::<Complex64>::zeros(4, 4);
        for p in 1..4 {
            assert_eq!(det_p(&z, p).unwrap(), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn fast_route_matches_eigenvalue_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.random_range(1..12);
            let t = random_matrix(&mut rng, n, n, 1.5);
            for p in 1..4 {
                let a = det_p(&t, p).unwrap();
                let b = det_p_fast(&t, p).unwrap();
                assert!(
                    (a - b).norm() < 1e-11 * a.norm().max(1.0),
                    "p={p}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn first_order_is_plain_determinant() {
        let t = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.2, 0.1),
                Complex64::new(0.3, 0.0),
                Complex64::new(-0.1, 0.4),
                Complex64::new(0.5, -0.2),
            ],
        );
        let direct = (Complex64::new(1.0, 0.0) - t[(0, 0)])
            * (Complex64::new(1.0, 0.0) - t[(1, 1)])
            - t[(0, 1)] * t[(1, 0)];
        assert!((det_p(&t, 1).unwrap() - direct).norm() < 1e-14);
    }

    #[test]
    fn singular_point_gives_zero() {
        let t = DMatrix::from_diagonal_element(3, 3, Complex64::new(1.0, 0.0));
        assert!(det_p(&t, 2).unwrap().norm() < 1e-14);
        assert!(det_p_fast(&t, 2).unwrap().norm() < 1e-14);
    }
}
