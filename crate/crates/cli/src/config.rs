use std::path::Path;

use anyhow::{Context, Result};
use magspec::birman_schwinger::GalerkinBasis;
use magspec::landau::{Branch, MagneticField};
use magspec::oracle::StabilityOptions;
use magspec::potentials::{LongitudinalProfile, SeparablePotential, TransverseProfile};
use magspec::zero_finder::{KRegion, ScanOptions};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub magnetic: Magnetic,
    pub potential: Potential,
    pub basis: Basis,
    #[serde(default)]
    pub scan: Option<Scan>,
    #[serde(default)]
    pub oracle: Option<Oracle>,
    #[serde(default)]
    pub toeplitz: Toeplitz,
    #[serde(default)]
    pub verify: Option<Verify>,
    /// Only recorded in reports; every computation is deterministic.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Magnetic {
    pub b: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Potential {
    pub alpha: f64,
    pub epsilon: f64,
    pub transverse: TransverseProfile,
    pub longitudinal: LongitudinalProfile,
    #[serde(default = "default_p")]
    pub schatten_p: f64,
}

fn default_p() -> f64 {
    2.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Basis {
    pub level_window: usize,
    pub m_max: i64,
    pub n_max: usize,
    pub hermite_scale: f64,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
}

fn default_tail_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scan {
    #[serde(default)]
    pub level: usize,
    pub region: KRegion,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_budget")]
    pub max_evaluations: usize,
    /// Half-angle of the localization sector used in the report.
    #[serde(default = "default_theta")]
    pub theta: f64,
}

fn default_tol() -> f64 {
    1e-6
}
fn default_samples() -> usize {
    16
}
fn default_budget() -> usize {
    400_000
}
fn default_theta() -> f64 {
    0.2
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Oracle {
    pub n_max: usize,
    pub hermite_scale: f64,
    #[serde(default = "default_enlarge")]
    pub enlarge: f64,
    #[serde(default = "default_rescale")]
    pub rescale: f64,
    #[serde(default = "default_drift")]
    pub drift: f64,
    #[serde(default = "default_decay")]
    pub resolve_decay: f64,
    /// Relative tolerance in `z` for matching determinant zeros.
    #[serde(default = "default_drift")]
    pub tolerance: f64,
}

fn default_enlarge() -> f64 {
    1.5
}
fn default_rescale() -> f64 {
    1.25
}
fn default_drift() -> f64 {
    1e-3
}
fn default_decay() -> f64 {
    6.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Toeplitz {
    #[serde(default = "default_m_max")]
    pub m_max: i64,
    /// Radii at which the counting function is tabulated.
    #[serde(default)]
    pub radii: Vec<f64>,
}

fn default_m_max() -> i64 {
    40
}

impl Default for Toeplitz {
    fn default() -> Self {
        Self {
            m_max: default_m_max(),
            radii: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verify {
    pub r_ladder: Vec<f64>,
    pub nu_gap: f64,
    /// Cutoff on `|Im z|` as a fraction of `2 r^2`.
    pub nu_im_cutoff: f64,
    pub theta: f64,
    /// Radius in `k` of the half-disk checked for eigenvalues.
    pub eta: f64,
    #[serde(default = "default_factor")]
    pub ratio_factor: f64,
    #[serde(default = "default_clusters")]
    pub clusters: usize,
    /// Warn when F is not integrable but the weaker hypotheses hold.
    #[serde(default)]
    pub warn_weak_hypotheses: bool,
}

fn default_factor() -> f64 {
    10.0
}
fn default_clusters() -> usize {
    2
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Config =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(cfg)
    }

    pub fn field(&self) -> Result<MagneticField> {
        Ok(MagneticField::new(self.magnetic.b)?)
    }

    pub fn potential(&self) -> Result<SeparablePotential> {
        let p = &self.potential;
        Ok(SeparablePotential::new(
            p.alpha,
            p.epsilon,
            p.transverse,
            p.longitudinal,
            p.schatten_p,
        )?)
    }

    pub fn basis(&self, level: usize) -> Result<GalerkinBasis> {
        let b = &self.basis;
        Ok(
            GalerkinBasis::new(level, b.level_window, b.m_max, b.n_max, b.hermite_scale)?
                .with_tail_tol(b.tail_tol),
        )
    }

    pub fn oracle_basis(&self, level: usize) -> Result<GalerkinBasis> {
        let o = self.oracle()?;
        let mut basis = self.basis(level)?;
        basis.n_max = o.n_max;
        basis.hermite_scale = o.hermite_scale;
        Ok(basis)
    }

    pub fn scan(&self) -> Result<&Scan> {
        self.scan
            .as_ref()
            .context("the configuration has no `scan` block")
    }

    pub fn oracle(&self) -> Result<&Oracle> {
        self.oracle
            .as_ref()
            .context("the configuration has no `oracle` block")
    }

    pub fn verify(&self) -> Result<&Verify> {
        self.verify
            .as_ref()
            .context("the configuration has no `verify` block")
    }

    pub fn scan_options(&self) -> Result<ScanOptions> {
        let s = self.scan()?;
        Ok(ScanOptions {
            tol: s.tol,
            samples: s.samples,
            max_evaluations: s.max_evaluations,
        })
    }

    pub fn stability(&self) -> Result<StabilityOptions> {
        let o = self.oracle()?;
        Ok(StabilityOptions {
            enlarge: o.enlarge,
            rescale: o.rescale,
            drift: o.drift,
        })
    }

    /// Half-plane explored by the scan region.
    pub fn branch(&self) -> Result<Branch> {
        self.scan()?
            .region
            .branch()
            .context("the scan region must lie in one open quadrant of the right half-plane")
    }
}
