//! Spectra of the Toeplitz operators `P_q W P_q`, eigenvalue counting, the asymptotic
//! counting laws and the cluster radii separating spectral gaps.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::landau::radial_amplitude;
use crate::potentials::{EffectiveW, TransverseProfile};
use crate::quadrature::{composite_gauss_legendre, integrate_panels};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzEntry {
    pub m: i64,
    pub mu: f64,
}

/// Eigenvalues of `P_q W P_q` for angular momenta `-q <= m <= m_max`, sorted in decreasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzSpectrum {
    pub q: usize,
    pub b: f64,
    pub m_max: i64,
    pub entries: Vec<ToeplitzEntry>,
}

impl ToeplitzSpectrum {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.mu).collect()
    }

    /// Number of eigenvalues strictly above `r`.
    pub fn counting(&self, r: f64) -> usize {
        if r < self.floor() {
            log::warn!(
                "counting at r = {r:.3e} is below the truncation floor {:.3e}",
                self.floor()
            );
        }
        self.entries.partition_point(|e| e.mu > r)
    }

    /// Whether the truncation resolves all eigenvalues above `r`.
    pub fn resolves(&self, r: f64) -> bool {
        r >= self.floor()
    }

    /// Number of eigenvalues in the open interval `(lo, hi)`.
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.entries
            .iter()
            .filter(|e| e.mu > lo && e.mu < hi)
            .count()
    }

    /// Largest eigenvalue among the ones dropped by the truncation, bounded by the last retained one.
    pub fn floor(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.m >= self.m_max - 1)
            .map(|e| e.mu)
            .fold(0.0, f64::max)
    }

    /// Distinct eigenvalues with multiplicities, in decreasing order.
    pub fn distinct(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for e in &self.entries {
            match out.last_mut() {
                Some((v, n)) if (*v - e.mu).abs() <= 1e-12 * v.abs() => *n += 1,
                _ => out.push((e.mu, 1)),
            }
        }
        out
    }

    /// Spectrum scaled by a constant factor (for example the coupling).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut s = self.clone();
        for e in &mut s.entries {
            e.mu *= factor;
        }
        s
    }
}

/// `mu_{q,m} = <phi_{q,m}, W phi_{q,m}>` for a radial effective potential.
pub fn radial_eigenvalue(q: usize, m: i64, b: f64, w: &EffectiveW) -> Result<f64> {
    if m < -(q as i64) {
        return Err(invalid(format!("angular momentum {m} below -q")));
    }
    let weight = |t: f64| w.value((2.0 * t / b).sqrt());
    let density = |t: f64| {
        let a = radial_amplitude(q, m, t);
        a * a
    };
    let n_r = if m >= 0 { q } else { (q as i64 + m) as usize };
    let center = (2 * n_r) as f64 + m.unsigned_abs() as f64 + 1.0;
    let spread = (center + 1.0).sqrt();
    let mut upper = center + 14.0 * spread + 50.0;
    if let Some(radius) = w.profile.support_radius() {
        upper = upper.min(0.5 * b * radius * radius);
    }
    let lower = (center - 14.0 * spread - 50.0).max(0.0).min(upper);
    integrate_panels(
        |t| density(t) * weight(t),
        lower,
        upper,
        0.5 * spread.max(1.0),
    )
}

/// Radial Toeplitz spectrum `{mu_{q,m} : -q <= m <= m_max}`.
pub fn toeplitz_spectrum_radial(
    q: usize,
    b: f64,
    w: &EffectiveW,
    m_max: i64,
) -> Result<ToeplitzSpectrum> {
    if !(b > 0.0) {
        return Err(invalid("field strength must be positive"));
    }
    if m_max < 0 {
        return Err(invalid("m_max must be non-negative"));
    }
    let ms: Vec<i64> = (-(q as i64)..=m_max).collect();
    let mut entries = ms
        .par_iter()
        .map(|&m| radial_eigenvalue(q, m, b, w).map(|mu| ToeplitzEntry { m, mu }))
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|x, y| y.mu.total_cmp(&x.mu).then(x.m.cmp(&y.m)));
    Ok(ToeplitzSpectrum {
        q,
        b,
        m_max,
        entries,
    })
}

/// Radial spectrum truncated so that every eigenvalue above `r_min` is retained.
///
/// The truncation grows until the eigenvalues at the cut fall below `1e-3 r_min`.
pub fn toeplitz_spectrum_to_floor(
    q: usize,
    b: f64,
    w: &EffectiveW,
    r_min: f64,
) -> Result<ToeplitzSpectrum> {
    if !(r_min > 0.0) {
        return Err(invalid("r_min must be positive"));
    }
    let target = 1e-3 * r_min;
    let mut m_max: i64 = 16;
    loop {
        let tail = radial_eigenvalue(q, m_max, b, w)?.max(radial_eigenvalue(q, m_max - 1, b, w)?);
        if tail < target {
            break;
        }
        if m_max > 50_000_000 {
            return Err(Error::Truncation {
                estimate: tail,
                tolerance: target,
                hint: "eigenvalues decay too slowly for the requested radius".into(),
            });
        }
        m_max *= 2;
    }
    toeplitz_spectrum_radial(q, b, w, m_max)
}

/// Matrix `<phi_{q,m}, S phi_{q,m'}>`, `-q <= m, m' <= m_max`, for a general bounded symbol
/// `S(r, theta)`.
pub fn toeplitz_matrix_general(
    q: usize,
    b: f64,
    symbol: &(dyn Fn(f64, f64) -> f64 + Sync),
    m_max: i64,
) -> Result<DMatrix<Complex64>> {
    if m_max < 0 || !(b > 0.0) {
        return Err(invalid("need m_max >= 0 and b > 0"));
    }
    let ms: Vec<i64> = (-(q as i64)..=m_max).collect();
    let dim = ms.len();
    let t_max = (2 * q) as f64
        + m_max as f64
        + 1.0
        + 14.0 * ((2 * q) as f64 + m_max as f64 + 2.0).sqrt()
        + 40.0;
    let (tn, tw) = composite_gauss_legendre(0.0, t_max, (t_max / 1.5).ceil() as usize, 16);
    let n_theta = (8 * dim).max(64);
    let thetas: Vec<f64> = (0..n_theta)
        .map(|j| 2.0 * PI * j as f64 / n_theta as f64)
        .collect();

    // Angular Fourier coefficients of the symbol on every radial node:
    // c_d(t) = (1 / 2 pi) int e^{i d theta} S dtheta for d = m' - m.
    let max_d = 2 * (dim as i64 - 1);
    let fourier: Vec<Vec<Complex64>> = tn
        .par_iter()
        .map(|&t| {
            let r = (2.0 * t / b).sqrt();
            let s: Vec<f64> = thetas.iter().map(|&th| symbol(r, th)).collect();
            (0..=max_d)
                .map(|d| {
                    let d = d - (dim as i64 - 1);
                    thetas
                        .iter()
                        .zip(&s)
                        .map(|(&th, &v)| Complex64::from_polar(v, d as f64 * th))
                        .sum::<Complex64>()
                        / n_theta as f64
                })
                .collect()
        })
        .collect();
    let radial: Vec<Vec<f64>> = tn
        .iter()
        .map(|&t| ms.iter().map(|&m| radial_amplitude(q, m, t)).collect())
        .collect();

    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let d = (ms[j] - ms[i] + dim as i64 - 1) as usize;
            let mut acc = Complex64::new(0.0, 0.0);
            for (node, w) in tw.iter().enumerate() {
                acc += fourier[node][d] * (w * radial[node][i] * radial[node][j]);
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc.conj();
        }
    }
    Ok(out)
}

/// Leading-order counting law for the three decay regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    /// `W ~ u0(theta) r^-decay`, counting `~ c_m r^(-2/decay)`.
    Power { decay: f64, c_m: f64 },
    /// `ln W = -mu r^(2 beta) (1 + o(1))`.
    Gaussian { beta: f64, mu: f64 },
    /// Compactly supported `W`.
    Compact,
}

impl Regime {
    /// Power regime with angular profile `u0`; `c_m = (b / 4 pi) int_0^{2 pi} u0^(2/decay)`.
    pub fn power(b: f64, decay: f64, u0: impl Fn(f64) -> f64) -> Self {
        let n = 720;
        let s: f64 = (0..n)
            .map(|j| u0(2.0 * PI * j as f64 / n as f64).powf(2.0 / decay))
            .sum::<f64>()
            * (2.0 * PI / n as f64);
        Regime::Power {
            decay,
            c_m: b / (4.0 * PI) * s,
        }
    }

    /// Regime of a radial effective potential.
    pub fn of_effective(w: &EffectiveW, b: f64) -> Self {
        match w.profile {
            TransverseProfile::Power { amplitude, decay } => {
                let u0 = w.scale * amplitude;
                Regime::power(b, decay, |_| u0)
            }
            TransverseProfile::Gaussian { mu, beta, .. } => Regime::Gaussian { beta, mu },
            TransverseProfile::Disk { .. } => Regime::Compact,
        }
    }

    /// Comparator `phi(r)` at `r`.
    pub fn comparator(&self, r: f64, b: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(invalid(format!("comparator needs r > 0, got {r}")));
        }
        match *self {
            Regime::Power { decay, c_m } => Ok(c_m * r.powf(-2.0 / decay)),
            _ if r >= (-1.0f64).exp() => Err(invalid(format!(
                "logarithmic comparators need r < 1/e, got {r}"
            ))),
            Regime::Gaussian { beta, mu } => {
                let l = r.ln().abs();
                Ok(if (beta - 1.0).abs() < 1e-12 {
                    l / (1.0 + 2.0 * mu / b).ln()
                } else if beta < 1.0 {
                    0.5 * b * mu.powf(-1.0 / beta) * l.powf(1.0 / beta)
                } else {
                    beta / (beta - 1.0) * l / l.ln()
                })
            }
            Regime::Compact => {
                let l = r.ln().abs();
                Ok(l / l.ln())
            }
        }
    }
}

/// Radii separating the Toeplitz spectrum at its relative gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLadder {
    /// Decreasing radii `r_0 > r_1 > ...`.
    pub radii: Vec<f64>,
    /// For each radius, the distinct eigenvalues just above and below it.
    pub gaps: Vec<(f64, f64)>,
    pub nu: f64,
}

impl ClusterLadder {
    /// Eigenvalue count of the cluster between `radii[l + 1]` and `radii[l]`.
    pub fn cluster_count(&self, spec: &ToeplitzSpectrum, l: usize) -> Option<usize> {
        let hi = *self.radii.get(l)?;
        let lo = *self.radii.get(l + 1)?;
        Some(spec.count_in(lo, hi))
    }
}

/// Geometric midpoints of every gap with `mu_j - mu_{j+1} > nu mu_j`; each radius is at
/// distance at least `nu r / 2` from the spectrum.
pub fn cluster_radii(spec: &ToeplitzSpectrum, nu: f64) -> Result<ClusterLadder> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(invalid(format!(
            "gap parameter must lie in (0, 1), got {nu}"
        )));
    }
    let distinct = spec.distinct();
    let mut radii = Vec::new();
    let mut gaps = Vec::new();
    for pair in distinct.windows(2) {
        let (hi, lo) = (pair[0].0, pair[1].0);
        if lo > 0.0 && hi - lo > nu * hi {
            radii.push((hi * lo).sqrt());
            gaps.push((hi, lo));
        }
    }
    if radii.is_empty() {
        return Err(Error::EmptyLadder(format!(
            "no relative gap larger than {nu} among {} distinct eigenvalues",
            distinct.len()
        )));
    }
    Ok(ClusterLadder { radii, gaps, nu })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_w(mu: f64) -> EffectiveW {
        EffectiveW::from_profile(
            TransverseProfile::Gaussian {
                amplitude: 1.0,
                mu,
                beta: 1.0,
            },
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn gaussian_eigenvalues_are_geometric() {
        let spec = toeplitz_spectrum_radial(0, 2.0, &gaussian_w(1.0), 40).unwrap();
        for e in &spec.entries {
            let exact = 0.5f64.powi(e.m as i32 + 1);
            assert!(
                (e.mu - exact).abs() < 1e-10 * exact,
                "m={} {} vs {}",
                e.m,
                e.mu,
                exact
            );
        }
    }

    #[test]
    fn higher_level_radial_matches_general_matrix() {
        let w = gaussian_w(0.6);
        let spec = toeplitz_spectrum_radial(1, 1.5, &w, 6).unwrap();
        let mat = toeplitz_matrix_general(1, 1.5, &|r, _| (-0.6 * r * r).exp(), 6).unwrap();
        for e in &spec.entries {
            let i = (e.m + 1) as usize;
            assert!((mat[(i, i)].re - e.mu).abs() < 1e-10, "m={}", e.m);
        }
    }

    #[test]
    fn counting_limits() {
        let spec = toeplitz_spectrum_radial(1, 2.0, &gaussian_w(1.0), 30).unwrap();
        assert_eq!(spec.counting(spec.entries[0].mu * 1.01), 0);
        assert_eq!(spec.counting(1e-300), 32);
    }

    #[test]
    fn cluster_radii_for_geometric_spectrum() {
        let spec = toeplitz_spectrum_radial(0, 2.0, &gaussian_w(1.0), 20).unwrap();
        let ladder = cluster_radii(&spec, 0.25).unwrap();
        for (l, r) in ladder.radii.iter().take(10).enumerate() {
            let expect = 2f64.powf(-(l as f64 + 1.5));
            assert!((r - expect).abs() < 1e-9 * expect);
        }
    }

    #[test]
    fn flat_spectrum_has_no_ladder() {
        let spec = ToeplitzSpectrum {
            q: 0,
            b: 1.0,
            m_max: 3,
            entries: (0..4).map(|m| ToeplitzEntry { m, mu: 0.5 }).collect(),
        };
        assert!(matches!(
            cluster_radii(&spec, 0.25),
            Err(Error::EmptyLadder(_))
        ));
    }

    #[test]
    fn comparator_examples() {
        let g = Regime::Gaussian { beta: 1.0, mu: 1.0 };
        let v = g.comparator((-5.0f64).exp(), 2.0).unwrap();
        assert!((v - 5.0 / 2f64.ln()).abs() < 1e-12);
        assert!(g.comparator(0.5, 2.0).is_err());
        let p = Regime::power(2.0, 4.0, |_| 1.0);
        assert!((p.comparator(1e-4, 2.0).unwrap() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn general_matrix_constant_and_radial_symbols() {
        let m = toeplitz_matrix_general(0, 1.0, &|_, _| 2.5, 5).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let e = if i == j { 2.5 } else { 0.0 };
                assert!((m[(i, j)] - Complex64::new(e, 0.0)).norm() < 1e-11);
            }
        }
        let m =
            toeplitz_matrix_general(0, 1.0, &|r, th| (-r * r).exp() * (1.0 + 0.5 * th.cos()), 5)
                .unwrap();
        assert!(m[(0, 2)].norm() < 1e-12);
        assert!(m[(0, 1)].norm() > 1e-3);
        assert!((&m - m.adjoint()).norm() < 1e-14);
    }
}
