//! Birman-Schwinger operators `T(k) = epsilon W^{1/2} (H_0 - z)^{-1} |W|^{1/2}` restricted to a
//! finite Landau-level window, their singular part at `k -> 0` and their regularized
//! determinants.
//!
//! The potential is radial in the plane, so `T(k)` is block diagonal in the angular momentum
//! `m`. Within a block the transverse factor couples the retained levels through the Gram
//! matrix of `F` and the longitudinal factor is the free resolvent compressed to
//! `G^{1/2} h_n`.

pub mod determinant;
pub mod longitudinal;
pub mod transverse;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use determinant::{det_p, det_p_fast, ln_det_p_fast, schatten_norm};
pub use longitudinal::{free_kernel, resolvent_wavenumber, LongitudinalBasis};
pub use transverse::{transverse_block, TransverseBlock, TransverseSector};

use crate::error::{invalid, Error, Result};
use crate::landau::{landau_level, param_z, KPoint, MagneticField};
use crate::potentials::{check_assumptions, effective_w, SeparablePotential};
use crate::toeplitz::radial_eigenvalue;

/// Truncation of the transverse and longitudinal bases around the level `level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GalerkinBasis {
    pub level: usize,
    /// Retained levels are `max(0, level - level_window) ..= level + level_window`.
    pub level_window: usize,
    pub m_max: i64,
    /// Hermite functions `h_0 .. h_{n_max}` in `x3`.
    pub n_max: usize,
    pub hermite_scale: f64,
    /// Largest accepted relative truncation tail.
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
}

fn default_tail_tol() -> f64 {
    1e-6
}

impl GalerkinBasis {
    pub fn new(
        level: usize,
        level_window: usize,
        m_max: i64,
        n_max: usize,
        hermite_scale: f64,
    ) -> Result<Self> {
        let basis = Self {
            level,
            level_window,
            m_max,
            n_max,
            hermite_scale,
            tail_tol: default_tail_tol(),
        };
        basis.validate()?;
        Ok(basis)
    }

    pub fn with_tail_tol(mut self, tail_tol: f64) -> Self {
        self.tail_tol = tail_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_max < 0 {
            return Err(invalid("m_max must be non-negative"));
        }
        if !(self.hermite_scale > 0.0 && self.hermite_scale.is_finite()) {
            return Err(invalid("Hermite scale must be positive"));
        }
        if !(self.tail_tol > 0.0) {
            return Err(invalid("tail tolerance must be positive"));
        }
        Ok(())
    }

    pub fn levels(&self) -> Vec<usize> {
        (self.level.saturating_sub(self.level_window)..=self.level + self.level_window).collect()
    }

    pub fn top_level(&self) -> usize {
        self.level + self.level_window
    }

    /// Angular momenta carried by at least one retained level.
    pub fn ms(&self) -> Vec<i64> {
        (-(self.top_level() as i64)..=self.m_max).collect()
    }

    pub fn levels_for(&self, m: i64) -> Vec<usize> {
        self.levels()
            .into_iter()
            .filter(|&l| l as i64 + m >= 0)
            .collect()
    }
}

/// How the transverse factor of each level term is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransverseClosure {
    /// Square root of the Gram matrix of `F`; the determinant then equals the one of the
    /// Galerkin Hamiltonian on the same levels.
    #[default]
    GramRoot,
    /// Exact overlaps `<phi_l, F^{1/2} phi_a>`, the literal compression of `F^{1/2} P_l F^{1/2}`.
    Projected,
}

/// One angular-momentum block.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub m: i64,
    pub levels: Vec<usize>,
    pub matrix: DMatrix<Complex64>,
}

/// Block-diagonal operator, blocks ordered by `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    pub blocks: Vec<Block>,
}

impl BlockMatrix {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.matrix.nrows()).sum()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        let mut off = 0;
        for b in &self.blocks {
            let d = b.matrix.nrows();
            out.view_mut((off, off), (d, d)).copy_from(&b.matrix);
            off += d;
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.matrix.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// `self + factor * other` for matrices with the same block layout.
    pub fn axpy(&self, factor: Complex64, other: &BlockMatrix) -> BlockMatrix {
        BlockMatrix {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| Block {
                    m: a.m,
                    levels: a.levels.clone(),
                    matrix: &a.matrix + &b.matrix * factor,
                })
                .collect(),
        }
    }
}

/// `T(k)` at one point together with the data it was built from.
#[derive(Debug, Clone)]
pub struct BsOperator {
    pub k: KPoint,
    pub z: Complex64,
    pub alpha: f64,
    pub t: BlockMatrix,
    /// Relative size of the dropped levels.
    pub tail_estimate: f64,
}

/// Precomputed transverse and longitudinal data for repeated evaluation of `T(k)`.
#[derive(Debug, Clone)]
pub struct BirmanSchwinger {
    pot: SeparablePotential,
    field: MagneticField,
    basis: GalerkinBasis,
    closure: TransverseClosure,
    longitudinal: LongitudinalBasis,
    sectors: Vec<TransverseSector>,
    tail_estimate: f64,
}

impl BirmanSchwinger {
    pub fn new(
        pot: &SeparablePotential,
        field: MagneticField,
        basis: GalerkinBasis,
    ) -> Result<Self> {
        Self::build(pot, field, basis, TransverseClosure::GramRoot, true)
    }

    pub fn with_closure(
        pot: &SeparablePotential,
        field: MagneticField,
        basis: GalerkinBasis,
        closure: TransverseClosure,
    ) -> Result<Self> {
        Self::build(pot, field, basis, closure, true)
    }

    fn build(
        pot: &SeparablePotential,
        field: MagneticField,
        basis: GalerkinBasis,
        closure: TransverseClosure,
        enforce_tail: bool,
    ) -> Result<Self> {
        basis.validate()?;
        let report = check_assumptions(pot)?;
        if !report.integrability.holds {
            return Err(Error::Integrability(report.integrability.detail));
        }
        let longitudinal =
            LongitudinalBasis::new(pot.longitudinal, basis.n_max, basis.hermite_scale)?;
        let sectors = basis
            .ms()
            .into_iter()
            .map(|m| TransverseSector::new(m, basis.levels_for(m), field.b, &pot.transverse))
            .collect::<Result<Vec<_>>>()?;
        let mut this = Self {
            pot: *pot,
            field,
            basis,
            closure,
            longitudinal,
            sectors,
            tail_estimate: 0.0,
        };
        this.tail_estimate = this.estimate_tail()?;
        if enforce_tail && this.tail_estimate > basis.tail_tol {
            return Err(Error::Truncation {
                estimate: this.tail_estimate,
                tolerance: basis.tail_tol,
                hint: format!("increase the level window beyond {}", basis.level_window),
            });
        }
        Ok(this)
    }

    /// Largest, over sectors, fraction of `||F^{1/2} phi_q||^2` carried by levels outside the
    /// window, times the decay of the longitudinal factor from the first off-resonant retained
    /// level to the first dropped one.
    fn estimate_tail(&self) -> Result<f64> {
        let q = self.basis.level;
        let mut leak: f64 = 0.0;
        for s in &self.sectors {
            if let Some(qi) = s.index_of(q) {
                let norm = s.gram[(qi, qi)];
                if norm > 0.0 {
                    leak = leak.max(s.tail[qi] / norm);
                }
            }
        }
        if leak == 0.0 {
            return Ok(0.0);
        }
        let b = self.field.b;
        let hs = |level: f64, boundary: bool| {
            self.longitudinal
                .hilbert_schmidt_norm(Complex64::new(-2.0 * b * (level - q as f64), 0.0), boundary)
        };
        let reference = hs(q as f64 + 1.0, false)?;
        let mut dropped = hs(self.basis.top_level() as f64 + 1.0, false)?;
        if q > self.basis.level_window {
            let below = (q - self.basis.level_window - 1) as f64;
            dropped = dropped.max(hs(below, true)?);
        }
        Ok(leak * dropped / reference)
    }

    pub fn potential(&self) -> &SeparablePotential {
        &self.pot
    }

    pub fn basis(&self) -> &GalerkinBasis {
        &self.basis
    }

    pub fn field(&self) -> MagneticField {
        self.field
    }

    pub fn tail_estimate(&self) -> f64 {
        self.tail_estimate
    }

    pub fn longitudinal(&self) -> &LongitudinalBasis {
        &self.longitudinal
    }

    pub fn sectors(&self) -> &[TransverseSector] {
        &self.sectors
    }

    fn factor<'a>(&self, s: &'a TransverseSector) -> &'a DMatrix<f64> {
        match self.closure {
            TransverseClosure::GramRoot => &s.gram_root,
            TransverseClosure::Projected => &s.overlaps,
        }
    }

    fn coupling(&self) -> Complex64 {
        self.pot.phase() * self.pot.epsilon
    }

    /// Compressed longitudinal resolvents for every retained level, indexed like `basis.levels()`.
    fn level_resolvents(&self, k: &KPoint) -> Vec<DMatrix<Complex64>> {
        let b = self.field.b;
        let q = self.basis.level as f64;
        self.basis
            .levels()
            .into_iter()
            .map(|l| {
                let kappa = if l == self.basis.level {
                    k.kappa()
                } else {
                    let zeta = k.k * k.k - 2.0 * b * (l as f64 - q);
                    resolvent_wavenumber(zeta, false)
                        .expect("level shift keeps zeta off the real axis")
                };
                self.longitudinal.resolvent_at(kappa)
            })
            .collect()
    }

    fn kron_sum(
        &self,
        s: &TransverseSector,
        terms: &[(usize, &DMatrix<Complex64>)],
    ) -> DMatrix<Complex64> {
        let nb = self.basis.n_max + 1;
        let dim = s.levels.len();
        let f = self.factor(s);
        let c = self.coupling();
        let mut out = DMatrix::zeros(dim * nb, dim * nb);
        for &(li, n) in terms {
            for a in 0..dim {
                for a2 in 0..dim {
                    let w = f[(li, a)] * f[(li, a2)];
                    if w == 0.0 {
                        continue;
                    }
                    let wc = c * w;
                    let mut view = out.view_mut((a * nb, a2 * nb), (nb, nb));
                    view.zip_apply(n, |x, y| *x += wc * y);
                }
            }
        }
        out
    }

    fn block_t(
        &self,
        s: &TransverseSector,
        resolvents: &[DMatrix<Complex64>],
    ) -> DMatrix<Complex64> {
        let all = self.basis.levels();
        let terms: Vec<(usize, &DMatrix<Complex64>)> = s
            .levels
            .iter()
            .enumerate()
            .map(|(li, l)| {
                (
                    li,
                    &resolvents[all.iter().position(|x| x == l).expect("level in window")],
                )
            })
            .collect();
        self.kron_sum(s, &terms)
    }

    pub fn assemble(&self, k: KPoint) -> Result<BsOperator> {
        let res = self.level_resolvents(&k);
        let blocks = self
            .sectors
            .iter()
            .map(|s| Block {
                m: s.m,
                levels: s.levels.clone(),
                matrix: self.block_t(s, &res),
            })
            .collect();
        Ok(BsOperator {
            k,
            z: param_z(self.basis.level, self.field.b, k.k),
            alpha: self.pot.alpha,
            t: BlockMatrix { blocks },
            tail_estimate: self.tail_estimate,
        })
    }

    /// `ln det(I + T(k))`, defined up to multiples of `2 pi i`.
    pub fn ln_fredholm_determinant(&self, k: KPoint) -> Result<Complex64> {
        let res = self.level_resolvents(&k);
        let mut acc = Complex64::new(0.0, 0.0);
        for s in &self.sectors {
            let t = self.block_t(s, &res);
            acc += ln_det_p_fast(&(-t), 1)?;
        }
        Ok(acc)
    }

    /// `det(I + T(k))`. It differs from [`Self::determinant`] by a factor
    /// `exp(-sum_{j < p} tr (-T)^j / j)` that never vanishes, so both have the same zeros.
    pub fn fredholm_determinant(&self, k: KPoint) -> Result<Complex64> {
        Ok(self.ln_fredholm_determinant(k)?.exp())
    }

    /// `det_p(I + T(k))` with `p = ceil(schatten_p)`.
    pub fn determinant(&self, k: KPoint) -> Result<Complex64> {
        let p = self.pot.det_order();
        let res = self.level_resolvents(&k);
        let mut acc = Complex64::new(0.0, 0.0);
        for s in &self.sectors {
            let t = self.block_t(s, &res);
            acc += ln_det_p_fast(&(-t), p)?;
        }
        Ok(acc.exp())
    }

    /// `B_q`: the `k`-independent residue of `T(k)` at `k = 0`, scaled so that
    /// `T(k) = (i exp(i alpha) / kappa) B_q + A_q(k)` with `kappa = +-k`.
    pub fn singular_part(&self) -> BlockMatrix {
        let nb = self.basis.n_max + 1;
        let g = self.longitudinal.moments();
        let ggt = DMatrix::from_fn(nb, nb, |a, b| Complex64::new(g[a] * g[b], 0.0));
        let blocks = self
            .sectors
            .iter()
            .map(|s| {
                let dim = s.levels.len();
                let mut m = DMatrix::zeros(dim * nb, dim * nb);
                if let Some(qi) = s.index_of(self.basis.level) {
                    let f = self.factor(s);
                    for a in 0..dim {
                        for a2 in 0..dim {
                            let w = 0.5 * self.pot.epsilon * f[(qi, a)] * f[(qi, a2)];
                            m.view_mut((a * nb, a2 * nb), (nb, nb))
                                .copy_from(&(&ggt * Complex64::new(w, 0.0)));
                        }
                    }
                }
                Block {
                    m: s.m,
                    levels: s.levels.clone(),
                    matrix: m,
                }
            })
            .collect();
        BlockMatrix { blocks }
    }

    /// `(B_q, A_q(k))`.
    pub fn split_singular(&self, k: KPoint) -> Result<(BlockMatrix, BlockMatrix)> {
        let bq = self.singular_part();
        let res = self.level_resolvents(&k);
        let regular = self.longitudinal.regular_part(k.kappa());
        let all = self.basis.levels();
        let blocks = self
            .sectors
            .iter()
            .map(|s| {
                let terms: Vec<(usize, &DMatrix<Complex64>)> = s
                    .levels
                    .iter()
                    .enumerate()
                    .map(|(li, l)| {
                        let n = if *l == self.basis.level {
                            &regular
                        } else {
                            &res[all.iter().position(|x| x == l).expect("level in window")]
                        };
                        (li, n)
                    })
                    .collect();
                Block {
                    m: s.m,
                    levels: s.levels.clone(),
                    matrix: self.kron_sum(s, &terms),
                }
            })
            .collect();
        Ok((bq, BlockMatrix { blocks }))
    }

    /// Residue factor `i exp(i alpha) / kappa` multiplying `B_q`.
    pub fn singular_coefficient(&self, k: KPoint) -> Complex64 {
        Complex64::new(0.0, 1.0) * self.pot.phase() / k.kappa()
    }
}

/// `T(k)` for a single point; builds all precomputed data on every call.
pub fn assemble_t(
    pot: &SeparablePotential,
    field: MagneticField,
    basis: GalerkinBasis,
    k: KPoint,
) -> Result<BsOperator> {
    BirmanSchwinger::new(pot, field, basis)?.assemble(k)
}

/// `<G^{1/2} h_n, (D^2 - zeta)^{-1} G^{1/2} h_n'>` for the basis' Hermite truncation.
pub fn resolvent_1d_block(
    zeta: Complex64,
    basis: &GalerkinBasis,
    pot: &SeparablePotential,
    boundary_value: bool,
) -> Result<DMatrix<Complex64>> {
    LongitudinalBasis::new(pot.longitudinal, basis.n_max, basis.hermite_scale)?
        .resolvent(zeta, boundary_value)
}

/// Per-sector comparison of `K K^*` with the Toeplitz operator `P_q W_eff P_q`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KkStarReport {
    pub residual: f64,
    /// `(m, from the singular part, from the Toeplitz quadrature)`.
    pub sectors: Vec<(i64, f64, f64)>,
}

/// Relative Frobenius residual between the nonzero spectrum of `B_q` (which equals that of
/// `K K^*`) and `P_q W_eff P_q`, both restricted to `-q <= m <= m_max`.
pub fn kkstar_check(
    pot: &SeparablePotential,
    field: MagneticField,
    basis: GalerkinBasis,
) -> Result<KkStarReport> {
    let bs = BirmanSchwinger::build(pot, field, basis, TransverseClosure::GramRoot, false)?;
    let w = effective_w(pot)?;
    let q = basis.level;
    let bq = bs.singular_part();
    let mut sectors = Vec::new();
    let (mut num, mut den) = (0.0, 0.0);
    for blk in &bq.blocks {
        if blk.m < -(q as i64) {
            continue;
        }
        let from_bs = blk.matrix.trace().re;
        let from_toeplitz = radial_eigenvalue(q, blk.m, field.b, &w)?;
        num += (from_bs - from_toeplitz).powi(2);
        den += from_toeplitz.powi(2);
        sectors.push((blk.m, from_bs, from_toeplitz));
    }
    Ok(KkStarReport {
        residual: (num / den).sqrt(),
        sectors,
    })
}

/// Landau level the basis is centred on.
pub fn basis_level_value(basis: &GalerkinBasis, field: MagneticField) -> f64 {
    landau_level(basis.level, field.b)
}
