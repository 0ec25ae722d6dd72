//! Landau levels, the level projection kernel, the angular-momentum basis of each level
//! and the spectral parametrization `z = Lambda_q + k^2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::{laguerre, laguerre_gen, ln_factorial_ratio, ln_gamma};

/// Constant magnetic field of strength `b > 0` along the `x3` axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticField {
    pub b: f64,
}

impl MagneticField {
    pub fn new(b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(invalid(format!(
                "field strength must be positive and finite, got {b}"
            )));
        }
        Ok(Self { b })
    }

    pub fn level(&self, q: usize) -> f64 {
        landau_level(q, self.b)
    }
}

/// Landau level `Lambda_q = 2 b q`.
pub fn landau_level(q: usize, b: f64) -> f64 {
    2.0 * b * q as f64
}

/// Integral kernel of the projection onto the `q`-th Landau level at points `x`, `y` of the plane.
pub fn projection_kernel(q: usize, b: f64, x: [f64; 2], y: [f64; 2]) -> Complex64 {
    let d2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
    let t = 0.5 * b * d2;
    let lq = laguerre(q, t).expect("squared distance is non-negative");
    let phase = -0.25 * b * 2.0 * (x[0] * y[1] - y[0] * x[1]);
    Complex64::from_polar(b / (2.0 * PI) * lq * (-0.25 * b * d2).exp(), phase)
}

/// Radial index of the state with angular momentum `m` in level `q`; `None` when `m < -q`.
pub fn radial_index(q: usize, m: i64) -> Option<usize> {
    if m >= 0 {
        Some(q)
    } else {
        let n = q as i64 + m;
        (n >= 0).then_some(n as usize)
    }
}

/// Radial amplitude `R_{q,m}(t)` in the variable `t = b r^2 / 2`, normalized so that
/// `|phi_{q,m}|^2 d^2X = R^2 dt dtheta / (2 pi)`.
///
/// Returns zero for `m < -q`.
pub fn radial_amplitude(q: usize, m: i64, t: f64) -> f64 {
    let Some(n) = radial_index(q, m) else {
        return 0.0;
    };
    let a = m.unsigned_abs() as usize;
    let lag = laguerre_gen(n, a as f64, t);
    if t <= 0.0 {
        return if a == 0 { lag } else { 0.0 };
    }
    (0.5 * ln_weight(n, a, t)).exp() * lag
}

/// `ln(n! / (n + a)! t^a e^{-t})`. For large `a` the terms are regrouped around the peak
/// `t = n + a` with Stirling's series, which avoids cancelling terms of size `a ln a`.
fn ln_weight(n: usize, a: usize, t: f64) -> f64 {
    if a < 64 {
        return ln_factorial_ratio(n, a) + a as f64 * t.ln() - t;
    }
    let big = (n + a) as f64;
    let d = t / big - 1.0;
    let inv = 1.0 / big;
    let stirling = inv * (1.0 / 12.0 - inv * inv * (1.0 / 360.0 - inv * inv / 1260.0));
    a as f64 * (d.ln_1p() - d) - n as f64 * (d + big.ln()) + ln_gamma(n as f64 + 1.0)
        - 0.5 * (std::f64::consts::TAU * big).ln()
        - stirling
}

/// Basis function `phi_{q,m}` of the `q`-th level evaluated at a point of the plane.
pub fn landau_basis(q: usize, m: i64, b: f64, x: [f64; 2]) -> Result<Complex64> {
    if radial_index(q, m).is_none() {
        return Err(invalid(format!("angular momentum {m} is below -q = -{q}")));
    }
    let r2 = x[0] * x[0] + x[1] * x[1];
    let theta = x[1].atan2(x[0]);
    let amp = (b / (2.0 * PI)).sqrt() * radial_amplitude(q, m, 0.5 * b * r2);
    Ok(Complex64::from_polar(amp, m as f64 * theta))
}

/// Square root on `C \ (-inf, 0]` with non-negative imaginary part.
///
/// For `Im z != 0` the result lies in the open upper half-plane, which is the branch that
/// makes the free one-dimensional resolvent kernel decay. On `(0, inf)` it is the positive root.
pub fn sqrt_branch(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 {
        if z.re <= 0.0 || z.re.is_nan() {
            return Err(Error::BranchCut { z });
        }
        return Ok(Complex64::new(z.re.sqrt(), 0.0));
    }
    let s = z.sqrt();
    Ok(if s.im < 0.0 { -s } else { s })
}

/// Half-plane selector: `Plus` for `Im z > Lambda_q`-side eigenvalues (`Im k > 0`), `Minus` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        })
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Branch::Plus),
            "-" | "minus" => Ok(Branch::Minus),
            other => Err(invalid(format!("unknown branch {other:?}"))),
        }
    }
}

/// A point `k` of `D_+` (first quadrant) or `D_-` (fourth quadrant).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KPoint {
    pub k: Complex64,
    pub branch: Branch,
}

impl KPoint {
    pub fn new(k: Complex64) -> Result<Self> {
        if !(k.re > 0.0) || k.im == 0.0 || !k.im.is_finite() {
            return Err(invalid(format!(
                "k = {k} is not in the open right quadrants"
            )));
        }
        let branch = if k.im > 0.0 {
            Branch::Plus
        } else {
            Branch::Minus
        };
        Ok(Self { k, branch })
    }

    /// `sqrt_branch(k^2)`, equal to `+k` on `D_+` and `-k` on `D_-`.
    pub fn kappa(&self) -> Complex64 {
        self.k * self.branch.sign()
    }

    pub fn in_domain(&self, eta: f64) -> bool {
        self.k.norm() < eta
    }
}

/// Spectral parameter `z = Lambda_q + k^2`.
pub fn param_z(q: usize, b: f64, k: Complex64) -> Complex64 {
    landau_level(q, b) + k * k
}

/// Inverse of [`param_z`] on `Omega_q^+ U Omega_q^-`, choosing `Re k > 0`.
pub fn k_from_z(q: usize, b: f64, z: Complex64) -> Result<KPoint> {
    let w = z - landau_level(q, b);
    if w.im == 0.0 {
        return if w.re == 0.0 {
            Err(Error::AtLandauLevel { z })
        } else {
            Err(invalid(format!("z = {z} is on the real axis")))
        };
    }
    let s = sqrt_branch(w)?;
    KPoint::new(if s.re < 0.0 { -s } else { s })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_regrouping_matches_direct_formula() {
        for (n, a) in [(0, 64), (2, 80), (1, 200)] {
            for f in [0.5, 0.9, 1.0, 1.1, 1.7] {
                let t = f * (n + a) as f64;
                let direct = ln_factorial_ratio(n, a) + a as f64 * t.ln() - t;
                assert!(
                    (ln_weight(n, a, t) - direct).abs() < 1e-10 * direct.abs().max(1.0),
                    "{n} {a} {f}"
                );
            }
        }
    }

    #[test]
    fn projection_kernel_on_diagonal() {
        let k = projection_kernel(0, 1.0, [0.3, -0.2], [0.3, -0.2]);
        assert!((k - Complex64::new(1.0 / (2.0 * PI), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn basis_expansion_reproduces_kernel() {
        let b = 1.3;
        let x = [0.4, -0.7];
        let y = [-0.2, 0.5];
        for q in 0..3usize {
            let mut s = Complex64::new(0.0, 0.0);
            for m in -(q as i64)..80 {
                s += landau_basis(q, m, b, x).unwrap() * landau_basis(q, m, b, y).unwrap().conj();
            }
            let k = projection_kernel(q, b, x, y);
            assert!((s - k).norm() < 1e-12, "q={q}: {s} vs {k}");
        }
    }

    #[test]
    fn lowest_level_is_holomorphic_gaussian() {
        let b = 2.0;
        let x = [0.6, 0.25];
        let z = Complex64::new(x[0], x[1]);
        let m = 3;
        let norm = (b / (2.0 * PI) * (b / 2.0).powi(m) / 6.0).sqrt();
        let expect = norm * z.powi(m) * (-b * z.norm_sqr() / 4.0).exp();
        assert!((landau_basis(0, m as i64, b, x).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn sqrt_branch_examples() {
        assert_eq!(
            sqrt_branch(Complex64::new(4.0, 0.0)).unwrap(),
            Complex64::new(2.0, 0.0)
        );
        let s = sqrt_branch(Complex64::new(0.0, 2.0)).unwrap();
        assert!((s - Complex64::new(1.0, 1.0)).norm() < 1e-15);
        assert!(sqrt_branch(Complex64::new(-1.0, 0.0)).is_err());
        assert!(sqrt_branch(Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn param_z_examples() {
        let z = param_z(2, 1.0, Complex64::new(0.0, 0.1));
        assert!((z - Complex64::new(3.99, 0.0)).norm() < 1e-15);
        let kp = k_from_z(1, 2.0, Complex64::new(4.0, -0.3)).unwrap();
        assert_eq!(kp.branch, Branch::Minus);
        assert!((param_z(1, 2.0, kp.k) - Complex64::new(4.0, -0.3)).norm() < 1e-15);
        assert!(matches!(
            k_from_z(1, 2.0, Complex64::new(4.0, 0.0)),
            Err(Error::AtLandauLevel { .. })
        ));
    }

    #[test]
    fn kappa_matches_branch_root() {
        for k in [Complex64::new(0.3, 0.2), Complex64::new(0.1, -0.4)] {
            let kp = KPoint::new(k).unwrap();
            assert!((sqrt_branch(k * k).unwrap() - kp.kappa()).norm() < 1e-15);
        }
    }
}
