//! Transverse factors: overlaps of `F`-weighted Landau states within one angular momentum.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::landau::radial_amplitude;
use crate::potentials::TransverseProfile;
use crate::quadrature::integrate_panels;

/// Radial integral `int_0^inf w(r(t)) R_{l,m}(t) R_{l',m}(t) dt`, `t = b r^2 / 2`.
pub(crate) fn radial_overlap(
    l: usize,
    lp: usize,
    m: i64,
    b: f64,
    weight: impl Fn(f64) -> f64,
    support: Option<f64>,
) -> Result<f64> {
    let lmax = l.max(lp);
    let n_r = if m >= 0 {
        lmax
    } else {
        (lmax as i64 + m) as usize
    };
    let center = (2 * n_r) as f64 + m.unsigned_abs() as f64 + 1.0;
    let spread = (center + 1.0).sqrt();
    let mut hi = center + 14.0 * spread + 50.0;
    if let Some(r) = support {
        hi = hi.min(0.5 * b * r * r);
    }
    let lo = (center - (2 * n_r) as f64 - 14.0 * spread - 50.0)
        .max(0.0)
        .min(hi);
    integrate_panels(
        |t| weight((2.0 * t / b).sqrt()) * radial_amplitude(l, m, t) * radial_amplitude(lp, m, t),
        lo,
        hi,
        0.25 * spread.max(1.0),
    )
}

/// Overlap data of one angular-momentum sector.
#[derive(Debug, Clone)]
pub struct TransverseSector {
    pub m: i64,
    /// Levels present in this sector (`l >= -m`).
    pub levels: Vec<usize>,
    /// Gram matrix `<phi_l, F phi_l'>`.
    pub gram: DMatrix<f64>,
    /// Symmetric square root of `gram`.
    pub gram_root: DMatrix<f64>,
    /// `<phi_l, F^{1/2} phi_a>`, rows indexed by the intermediate level `l`.
    pub overlaps: DMatrix<f64>,
    /// `||F^{1/2} phi_a||^2` not captured by the retained levels.
    pub tail: Vec<f64>,
}

impl TransverseSector {
    pub fn new(m: i64, levels: Vec<usize>, b: f64, profile: &TransverseProfile) -> Result<Self> {
        let dim = levels.len();
        if dim == 0 {
            return Err(invalid(format!("no level carries angular momentum {m}")));
        }
        let support = profile.support_radius();
        let mut gram = DMatrix::zeros(dim, dim);
        let mut overlaps = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let g = radial_overlap(levels[i], levels[j], m, b, |r| profile.value(r), support)?;
                gram[(i, j)] = g;
                gram[(j, i)] = g;
                let c = radial_overlap(
                    levels[i],
                    levels[j],
                    m,
                    b,
                    |r| profile.value(r).sqrt(),
                    support,
                )?;
                overlaps[(i, j)] = c;
                overlaps[(j, i)] = c;
            }
        }
        let eig = gram.clone().symmetric_eigen();
        let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
        let gram_root =
            &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
        let tail = (0..dim)
            .map(|a| (gram[(a, a)] - overlaps.column(a).norm_squared()).max(0.0))
            .collect();
        Ok(Self {
            m,
            levels,
            gram,
            gram_root,
            overlaps,
            tail,
        })
    }

    pub fn index_of(&self, level: usize) -> Option<usize> {
        self.levels.iter().position(|&l| l == level)
    }
}

/// `M_j[m, m'] = <F^{1/2} phi_{q,m}, P_j F^{1/2} phi_{q,m'}>` for `-q <= m <= m_max`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransverseBlock {
    pub j: usize,
    pub q: usize,
    pub ms: Vec<i64>,
    /// Row-major `ms.len() x ms.len()` matrix; diagonal for radial `F`.
    pub matrix: Vec<f64>,
    /// Largest relative weight of `F^{1/2} phi_{q,m}` outside the levels `0..=max(j, q) + window`.
    pub tail_mass: f64,
    /// Set when `tail_mass` exceeds the tolerance the block was requested with.
    pub insufficient: bool,
}

impl TransverseBlock {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.matrix[a * self.ms.len() + b]
    }
}

pub fn transverse_block(
    j: usize,
    q: usize,
    b: f64,
    profile: &TransverseProfile,
    m_max: i64,
    level_window: usize,
    tail_tol: f64,
) -> Result<TransverseBlock> {
    if m_max < -(q as i64) {
        return Err(invalid("m_max below -q"));
    }
    let ms: Vec<i64> = (-(q as i64)..=m_max).collect();
    let dim = ms.len();
    let top = j.max(q) + level_window;
    let mut matrix = vec![0.0; dim * dim];
    let mut tail_mass: f64 = 0.0;
    let support = profile.support_radius();
    for (i, &m) in ms.iter().enumerate() {
        if (j as i64) + m < 0 {
            continue;
        }
        let c = radial_overlap(j, q, m, b, |r| profile.value(r).sqrt(), support)?;
        matrix[i * dim + i] = c * c;
        let norm = radial_overlap(q, q, m, b, |r| profile.value(r), support)?;
        let mut captured = 0.0;
        for l in 0..=top {
            if (l as i64) + m >= 0 {
                captured +=
                    radial_overlap(l, q, m, b, |r| profile.value(r).sqrt(), support)?.powi(2);
            }
        }
        if norm > 0.0 {
            tail_mass = tail_mass.max(((norm - captured) / norm).max(0.0));
        }
    }
    Ok(TransverseBlock {
        j,
        q,
        ms,
        matrix,
        tail_mass,
        insufficient: tail_mass > tail_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss() -> TransverseProfile {
        TransverseProfile::Gaussian {
            amplitude: 1.0,
            mu: 1.0,
            beta: 1.0,
        }
    }

    #[test]
    fn gram_of_gaussian_matches_closed_form() {
        // b = 2, F = exp(-r^2) = exp(-t): <phi_{l,m}, F phi_{l,m}> on the lowest level is 2^-(m+1).
        for m in 0..6 {
            let s = TransverseSector::new(m, vec![0, 1, 2, 3], 2.0, &gauss()).unwrap();
            assert!((s.gram[(0, 0)] - 0.5f64.powi(m as i32 + 1)).abs() < 1e-13);
            let back = &s.gram_root * &s.gram_root;
            assert!((back - &s.gram).norm() < 1e-13);
        }
        let s = TransverseSector::new(0, vec![0, 1, 2, 3], 2.0, &gauss()).unwrap();
        let expect = [0.5, 0.25, 0.1875, 0.15625];
        for (i, e) in expect.iter().enumerate() {
            assert!((s.gram[(i, i)] - e).abs() < 1e-13);
        }
    }

    #[test]
    fn tail_shrinks_with_more_levels() {
        let few = TransverseSector::new(1, vec![0, 1], 2.0, &gauss()).unwrap();
        let many = TransverseSector::new(1, (0..8).collect(), 2.0, &gauss()).unwrap();
        assert!(many.tail[0] < few.tail[0]);
        assert!(many.tail[0] < 1e-4);
    }

    #[test]
    fn block_is_diagonal_with_flagged_tail() {
        let blk = transverse_block(0, 0, 2.0, &gauss(), 4, 0, 1e-8).unwrap();
        assert!(blk.insufficient);
        for a in 0..blk.ms.len() {
            for c in 0..blk.ms.len() {
                if a != c {
                    assert_eq!(blk.get(a, c), 0.0);
                }
            }
        }
        let wide = transverse_block(0, 0, 2.0, &gauss(), 4, 30, 1e-8).unwrap();
        assert!(!wide.insufficient, "{}", wide.tail_mass);
    }
}
