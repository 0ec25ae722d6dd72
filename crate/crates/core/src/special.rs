//! Laguerre polynomials, Hermite functions and log-gamma helpers.

use crate::error::{invalid, Result};

/// Generalized Laguerre polynomial `L_n^{(a)}(t)` by the three-term recurrence.
pub fn laguerre_gen(n: usize, a: f64, t: f64) -> f64 {
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let mut p1 = 1.0 + a - t;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0 + a - t) * p1 - (kf + a) * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Laguerre polynomial `L_q(t)` for `t >= 0`.
pub fn laguerre(q: usize, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid(format!(
            "laguerre argument must be non-negative, got {t}"
        )));
    }
    Ok(laguerre_gen(q, 0.0, t))
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln(n! / (n + a)!)` for integers `n, a >= 0`.
pub fn ln_factorial_ratio(n: usize, a: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma((n + a) as f64 + 1.0)
}

/// Normalized Hermite function `h_n(x / s) / sqrt(s)`.
pub fn hermite_fn(n: usize, x: f64, scale: f64) -> f64 {
    let mut out = vec![0.0; n + 1];
    hermite_fns(x, scale, &mut out);
    out[n]
}

/// Fills `out[n] = h_n(x / s) / sqrt(s)` for `n < out.len()` with the stable normalized recurrence.
pub fn hermite_fns(x: f64, scale: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let y = x / scale;
    let h0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * y * y).exp() / scale.sqrt();
    out[0] = h0;
    if out.len() > 1 {
        out[1] = std::f64::consts::SQRT_2 * y * h0;
    }
    for n in 2..out.len() {
        let nf = n as f64;
        out[n] = (2.0 / nf).sqrt() * y * out[n - 1] - ((nf - 1.0) / nf).sqrt() * out[n - 2];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Explicit series L_n^{(a)}(t) = sum_k (-1)^k C(n+a, n-k) t^k / k!.
    fn laguerre_series(n: usize, a: usize, t: f64) -> f64 {
        let mut s = 0.0;
        for k in 0..=n {
            let binom = (ln_gamma((n + a) as f64 + 1.0)
                - ln_gamma((n - k) as f64 + 1.0)
                - ln_gamma((a + k) as f64 + 1.0))
            .exp();
            let term = binom * t.powi(k as i32) / ln_gamma(k as f64 + 1.0).exp();
            s += if k % 2 == 0 { term } else { -term };
        }
        s
    }

    #[test]
    fn laguerre_matches_series() {
        for n in 0..8 {
            for a in 0..4 {
                for &t in &[0.0, 0.3, 1.7, 4.2] {
                    let r = laguerre_gen(n, a as f64, t);
                    let e = laguerre_series(n, a, t);
                    assert!((r - e).abs() < 1e-10 * (1.0 + e.abs()), "n={n} a={a} t={t}");
                }
            }
        }
    }

    #[test]
    fn laguerre_examples() {
        assert_eq!(laguerre(0, 3.0).unwrap(), 1.0);
        assert!((laguerre(1, 2.0).unwrap() + 1.0).abs() < 1e-15);
        assert!(laguerre(2, -1.0).is_err());
    }

    #[test]
    fn hermite_functions_orthonormal() {
        let s = 1.7;
        let (x, w) = crate::quadrature::composite_gauss_legendre(-40.0, 40.0, 200, 12);
        let n = 25;
        let vals: Vec<Vec<f64>> = x
            .iter()
            .map(|&xi| {
                let mut v = vec![0.0; n];
                hermite_fns(xi, s, &mut v);
                v
            })
            .collect();
        for i in 0..n {
            for j in 0..n {
                let g: f64 = vals.iter().zip(&w).map(|(v, w)| w * v[i] * v[j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g - e).abs() < 1e-12, "({i},{j}) -> {g}");
            }
        }
    }

    #[test]
    fn hermite_second_moment() {
        let (x, w) = crate::quadrature::composite_gauss_legendre(-20.0, 20.0, 80, 12);
        let m: f64 = x
            .iter()
            .zip(&w)
            .map(|(x, w)| w * x * x * hermite_fn(0, *x, 1.0).powi(2))
            .sum();
        assert!((m - 0.5).abs() < 1e-13);
    }
}
