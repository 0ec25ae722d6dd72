//! Sector geometry around a Landau level and checks of counting predictions against
//! located eigenvalues.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::birman_schwinger::GalerkinBasis;
use crate::error::{invalid, Error, Result};
use crate::landau::{landau_level, Branch, MagneticField};
use crate::oracle::{
    dense_eigenvalues, dense_hamiltonian, resolvable_im_k, Annulus, StabilityOptions,
};
use crate::potentials::SeparablePotential;
use crate::toeplitz::{ClusterLadder, ToeplitzSpectrum};
use crate::zero_finder::{scan_level, EigenvalueRecord, KRegion, ScanOptions};
use crate::Complex64;

/// Angular sector `Lambda_q + exp(i (2 alpha -+ pi)) exp(i (-2 theta, 2 theta)) (0, 2b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub alpha: f64,
    pub theta: f64,
    pub branch: Branch,
    pub q: usize,
    pub b: f64,
}

impl SectorSpec {
    pub fn new(alpha: f64, theta: f64, branch: Branch, q: usize, b: f64) -> Result<Self> {
        let s = Self {
            alpha,
            theta,
            branch,
            q,
            b,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && 4.0 * self.theta < FRAC_PI_2) {
            return Err(invalid(format!(
                "theta = {} must satisfy 0 < 4 theta < pi / 2",
                self.theta
            )));
        }
        if !(self.b > 0.0) || !self.alpha.is_finite() {
            return Err(invalid("need b > 0 and a finite phase"));
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        self.theta.tan()
    }

    pub fn level(&self) -> f64 {
        landau_level(self.q, self.b)
    }

    /// Direction `2 alpha -+ pi` of the semi-axis.
    pub fn axis(&self) -> f64 {
        2.0 * self.alpha - self.branch.sign() * PI
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorRegion {
    Localization,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorClass {
    pub region: SectorRegion,
    /// `|z - Lambda_q|`.
    pub modulus: f64,
    /// Signed angle from the semi-axis, in `(-pi, pi]`.
    pub offset: f64,
}

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

pub fn sector_classify(z: Complex64, spec: &SectorSpec) -> Result<SectorClass> {
    spec.validate()?;
    let w = z - spec.level();
    if w.norm() == 0.0 {
        return Err(Error::AtLandauLevel { z });
    }
    let offset = wrap(w.arg() - spec.axis());
    let region = if offset.abs() < 2.0 * spec.theta {
        SectorRegion::Localization
    } else {
        SectorRegion::Free
    };
    Ok(SectorClass {
        region,
        modulus: w.norm(),
        offset,
    })
}

/// Half-ring `Omega_{q,nu}^{+-}(a1, a2)`: `a1 < |z - Lambda_q| < a2`, `+-Im z > 0` and `|Im z| > nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub q: usize,
    pub b: f64,
    pub a1: f64,
    pub a2: f64,
    pub nu: f64,
    pub branch: Branch,
}

impl Band {
    pub fn contains(&self, z: Complex64) -> bool {
        let d = (z - landau_level(self.q, self.b)).norm();
        self.a1 < d && d < self.a2 && self.branch.sign() * z.im > 0.0 && z.im.abs() > self.nu
    }

    /// Region of `k` whose image `Lambda_q + k^2` covers the half-ring (ignoring `nu`).
    pub fn k_region(&self, angular_margin: f64) -> Result<KRegion> {
        if !(0.0 < self.a1 && self.a1 < self.a2) {
            return Err(invalid("band needs 0 < a1 < a2"));
        }
        let theta = match self.branch {
            Branch::Plus => (angular_margin, FRAC_PI_2 - angular_margin),
            Branch::Minus => (-FRAC_PI_2 + angular_margin, -angular_margin),
        };
        Ok(KRegion::AnnularSector {
            r: (self.a1.sqrt(), self.a2.sqrt()),
            theta,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedEigenvalue {
    pub z: Complex64,
    pub class: SectorClass,
    /// Index of the first band containing `z`.
    pub band: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandCount {
    pub band: Band,
    pub localization: usize,
    pub free: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub predicted: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorReport {
    pub spec: SectorSpec,
    pub eigenvalues: Vec<ClassifiedEigenvalue>,
    pub bands: Vec<BandCount>,
    pub verdicts: Vec<Verdict>,
}

/// Classifies stable records and counts them per band.
pub fn sector_report(
    eigs: &[EigenvalueRecord],
    spec: &SectorSpec,
    bands: &[Band],
) -> Result<SectorReport> {
    let mut classified = Vec::new();
    let mut counts: Vec<BandCount> = bands
        .iter()
        .map(|&band| BandCount {
            band,
            localization: 0,
            free: 0,
        })
        .collect();
    for e in eigs.iter().filter(|e| e.stable) {
        let class = sector_classify(e.z, spec)?;
        let band = bands.iter().position(|b| b.contains(e.z));
        for c in counts.iter_mut().filter(|c| c.band.contains(e.z)) {
            match class.region {
                SectorRegion::Localization => c.localization += e.multiplicity,
                SectorRegion::Free => c.free += e.multiplicity,
            }
        }
        classified.push(ClassifiedEigenvalue {
            z: e.z,
            class,
            band,
        });
    }
    Ok(SectorReport {
        spec: *spec,
        eigenvalues: classified,
        bands: counts,
        verdicts: Vec::new(),
    })
}

fn count(eigs: &[EigenvalueRecord], pred: impl Fn(Complex64) -> bool) -> usize {
    eigs.iter()
        .filter(|e| e.stable && pred(e.z))
        .map(|e| e.multiplicity)
        .sum()
}

/// One rung of the upper-bound check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundRow {
    pub r: f64,
    pub count: usize,
    /// `Tr 1_(r, inf)(P_q W P_q) |ln r|`.
    pub driver: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundVerdict {
    pub rows: Vec<UpperBoundRow>,
    pub median: f64,
    pub pass: bool,
}

/// Counts in `Omega_{q,nu}^{+-}(r^2, 4 r^2)` against `Tr 1_(r, inf)(P_q W P_q) |ln r|` along
/// the ladder. `nu_fraction` is the cutoff as a fraction of `2 r^2`. Passes when no ratio
/// exceeds `factor` times the median ratio (counts above a zero driver always fail).
pub fn check_upper_bound(
    eigs: &[EigenvalueRecord],
    toeplitz: &ToeplitzSpectrum,
    ladder: &[f64],
    nu_fraction: f64,
    branch: Branch,
    factor: f64,
) -> Result<UpperBoundVerdict> {
    if !(0.0 < nu_fraction && nu_fraction < 1.0) {
        return Err(invalid(
            "imaginary cutoff must be a fraction in (0, 1) of 2 r^2",
        ));
    }
    if ladder.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(invalid("ladder radii must lie in (0, 1)"));
    }
    let mut rows = Vec::with_capacity(ladder.len());
    let mut bounded = true;
    for &r in ladder {
        if !toeplitz.resolves(r) {
            return Err(Error::Truncation {
                estimate: toeplitz.floor(),
                tolerance: r,
                hint: "extend the Toeplitz spectrum below the smallest ladder radius".into(),
            });
        }
        let band = Band {
            q: toeplitz.q,
            b: toeplitz.b,
            a1: r * r,
            a2: 4.0 * r * r,
            nu: nu_fraction * 2.0 * r * r,
            branch,
        };
        let n = count(eigs, |z| band.contains(z));
        let driver = toeplitz.counting(r) as f64 * r.ln().abs();
        let ratio = if driver > 0.0 {
            n as f64 / driver
        } else {
            bounded &= n == 0;
            0.0
        };
        rows.push(UpperBoundRow {
            r,
            count: n,
            driver,
            ratio,
        });
    }
    let mut ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let median = if ratios.is_empty() {
        0.0
    } else if ratios.len() % 2 == 1 {
        ratios[ratios.len() / 2]
    } else {
        0.5 * (ratios[ratios.len() / 2 - 1] + ratios[ratios.len() / 2])
    };
    let pass = bounded
        && rows
            .iter()
            .all(|r| r.ratio <= factor * median || r.ratio == 0.0);
    Ok(UpperBoundVerdict { rows, median, pass })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterRow {
    pub index: usize,
    /// `(epsilon^2 r_{l+1}^2, epsilon^2 r_l^2)`.
    pub annulus: (f64, f64),
    pub count: usize,
    /// `Tr 1_(r_{l+1}, r_l)(P_q W P_q)`.
    pub lower_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterVerdict {
    pub rows: Vec<ClusterRow>,
    /// Located eigenvalues in the free region with `|z - Lambda_q| < r0^2`.
    pub free_count: usize,
    pub pass: bool,
}

/// Lower bounds on the first `clusters` annuli of the ladder and emptiness of the free region.
///
/// `toeplitz` and `ladder` refer to the perturbation at unit coupling; the annuli are scaled by
/// `epsilon^2`.
pub fn check_clusters(
    eigs: &[EigenvalueRecord],
    ladder: &ClusterLadder,
    toeplitz: &ToeplitzSpectrum,
    epsilon: f64,
    spec: &SectorSpec,
    r0: f64,
    clusters: usize,
) -> Result<ClusterVerdict> {
    if ladder.radii.len() < 2 {
        return Err(Error::EmptyLadder(
            "at least two radii are needed for one cluster".into(),
        ));
    }
    let e2 = epsilon * epsilon;
    let mut rows = Vec::new();
    for l in 0..clusters.min(ladder.radii.len() - 1) {
        let (hi, lo) = (ladder.radii[l], ladder.radii[l + 1]);
        let annulus = (e2 * lo * lo, e2 * hi * hi);
        let n = count(eigs, |z| {
            let Ok(c) = sector_classify(z, spec) else {
                return false;
            };
            c.region == SectorRegion::Localization
                && spec.branch.sign() * z.im > 0.0
                && annulus.0 < c.modulus
                && c.modulus < annulus.1
        });
        rows.push(ClusterRow {
            index: l,
            annulus,
            count: n,
            lower_bound: toeplitz.count_in(lo, hi),
        });
    }
    let free_count = count(eigs, |z| {
        sector_classify(z, spec)
            .is_ok_and(|c| c.region == SectorRegion::Free && c.modulus < r0 * r0)
    });
    let pass = free_count == 0 && rows.iter().all(|r| r.count >= r.lower_bound);
    Ok(ClusterVerdict {
        rows,
        free_count,
        pass,
    })
}

/// Number of located eigenvalues in `Omega_q^{+-}(0, eta^2)`; zero is expected when the
/// semi-axis `2 alpha -+ pi` points into the opposite half-plane.
pub fn check_free_half_ring(
    eigs: &[EigenvalueRecord],
    q: usize,
    b: f64,
    eta: f64,
    branch: Branch,
) -> Verdict {
    let band = Band {
        q,
        b,
        a1: 0.0,
        a2: eta * eta,
        nu: 0.0,
        branch,
    };
    let n = count(eigs, |z| band.contains(z));
    Verdict {
        name: "free_half_ring".into(),
        pass: n == 0,
        measured: n as f64,
        predicted: 0.0,
        detail: format!(
            "stable eigenvalues with |z - Lambda_{q}| < {:.3e}",
            eta * eta
        ),
    }
}

/// `|Im z| <= sup |epsilon W| + slack` for every record.
pub fn check_numerical_range(
    eigs: &[EigenvalueRecord],
    pot: &SeparablePotential,
    slack: f64,
) -> Verdict {
    let bound = pot.sup_norm();
    let worst = eigs.iter().map(|e| e.z.im.abs()).fold(0.0, f64::max);
    Verdict {
        name: "numerical_range".into(),
        pass: worst <= bound + slack,
        measured: worst,
        predicted: bound,
        detail: format!("largest |Im z| over {} eigenvalues", eigs.len()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub z: Complex64,
    /// Closest partner, if any.
    pub partner: Option<Complex64>,
    /// `|z - partner| / |z - Lambda_q|`.
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub oracle_to_determinant: Vec<Match>,
    pub determinant_to_oracle: Vec<Match>,
    pub tolerance: f64,
    pub pass: bool,
}

fn best(z: Complex64, pool: &[&EigenvalueRecord], level: f64) -> Match {
    let partner = pool
        .iter()
        .min_by(|a, b| (a.z - z).norm().total_cmp(&(b.z - z).norm()))
        .map(|e| e.z);
    let relative = partner.map_or(f64::INFINITY, |p| (p - z).norm() / (z - level).norm());
    Match {
        z,
        partner,
        relative,
    }
}

/// Matches stable oracle eigenvalues and determinant zeros in both directions.
///
/// Only records whose `k` lies in `region` with `Im k >= min_im_k` take part; the matching
/// pool on the other side is not restricted, so that boundary cases are not penalized.
pub fn cross_validate(
    determinant: &[EigenvalueRecord],
    oracle: &[EigenvalueRecord],
    region: &KRegion,
    level: f64,
    min_im_k: f64,
    tolerance: f64,
) -> CrossValidation {
    let eligible =
        |e: &&EigenvalueRecord| e.stable && region.contains(e.k) && e.k.im.abs() >= min_im_k;
    let det_pool: Vec<&EigenvalueRecord> = determinant.iter().collect();
    let orc_pool: Vec<&EigenvalueRecord> = oracle.iter().filter(|e| e.stable).collect();
    let o2d: Vec<Match> = oracle
        .iter()
        .filter(eligible)
        .map(|e| best(e.z, &det_pool, level))
        .collect();
    let d2o: Vec<Match> = determinant
        .iter()
        .filter(eligible)
        .map(|e| best(e.z, &orc_pool, level))
        .collect();
    let pass = o2d.iter().chain(&d2o).all(|m| m.relative < tolerance);
    CrossValidation {
        oracle_to_determinant: o2d,
        determinant_to_oracle: d2o,
        tolerance,
        pass,
    }
}

/// Settings of a determinant-versus-oracle comparison on one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub determinant_basis: GalerkinBasis,
    pub oracle_basis: GalerkinBasis,
    pub region: KRegion,
    pub scan: ScanOptions,
    pub stability: StabilityOptions,
    /// Records with `Im k` below `resolvable_im_k(oracle_basis, resolve_decay)` are not compared.
    pub resolve_decay: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckOutcome {
    pub determinant: Vec<EigenvalueRecord>,
    pub oracle: Vec<EigenvalueRecord>,
    pub validation: CrossValidation,
}

/// Scans the determinant, solves the dense model on the image half-ring of `region`, and
/// matches the two lists.
pub fn cross_check(
    pot: &SeparablePotential,
    field: MagneticField,
    cfg: &CrossCheck,
) -> Result<CrossCheckOutcome> {
    let q = cfg.determinant_basis.level;
    let determinant = scan_level(pot, field, cfg.determinant_basis, cfg.region, cfg.scan)?;
    let (lo, hi) = cfg.region.modulus_range();
    let upper = match cfg.region.branch() {
        Some(b) => b == Branch::Plus,
        None => return Err(invalid("cross-check region must lie in one open quadrant")),
    };
    let window = Annulus {
        level: q,
        inner: lo * lo,
        outer: hi * hi,
        upper,
    };
    let model = dense_hamiltonian(pot, field, cfg.oracle_basis)?;
    let oracle = dense_eigenvalues(&model, &window, cfg.stability)?;
    let min_im_k = resolvable_im_k(&cfg.oracle_basis, cfg.resolve_decay);
    let validation = cross_validate(
        &determinant,
        &oracle,
        &cfg.region,
        field.level(q),
        min_im_k,
        cfg.tolerance,
    );
    Ok(CrossCheckOutcome {
        determinant,
        oracle,
        validation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(alpha: f64, theta: f64) -> SectorSpec {
        SectorSpec::new(alpha, theta, Branch::Plus, 0, 2.0).unwrap()
    }

    #[test]
    fn semi_axis_is_localization() {
        let s = spec(0.75 * PI, 0.2);
        let c = sector_classify(Complex64::new(0.0, 1e-3), &s).unwrap();
        assert_eq!(c.region, SectorRegion::Localization);
        assert!(c.offset.abs() < 1e-15);
    }

    #[test]
    fn positive_real_is_free() {
        let s = spec(0.75 * PI, 0.05);
        let c = sector_classify(Complex64::new(1e-2, 0.0), &s).unwrap();
        assert_eq!(c.region, SectorRegion::Free);
    }

    #[test]
    fn band_membership() {
        let r: f64 = 0.1;
        let band = Band {
            q: 1,
            b: 2.0,
            a1: r * r,
            a2: 4.0 * r * r,
            nu: 0.0,
            branch: Branch::Plus,
        };
        assert!(band.contains(Complex64::new(4.0, 3.0 * r * r)));
        assert!(!band.contains(Complex64::new(4.0, -3.0 * r * r)));
    }

    #[test]
    fn at_level_is_error() {
        assert!(sector_classify(Complex64::new(0.0, 0.0), &spec(2.0, 0.1)).is_err());
        assert!(SectorSpec::new(2.0, 0.5, Branch::Plus, 0, 2.0).is_err());
    }
}
