//! Brute-force eigensolvers used to cross-check the determinant pipeline.
//!
//! The operator is discretized directly in the product basis of Landau states
//! `phi_{l,m}` and scaled Hermite functions `h_n(x3 / s)`. Every integral here is computed
//! with the rules in this module (composite tanh-sinh in `t`, trapezoid in `x3` and the
//! polar angle), so that no quadrature is shared with the Birman-Schwinger assembly.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::birman_schwinger::GalerkinBasis;
use crate::error::{invalid, Error, Result};
use crate::landau::{k_from_z, radial_amplitude, radial_index, MagneticField};
use crate::potentials::{LongitudinalProfile, SeparablePotential, TransverseProfile};
use crate::special::hermite_fns;
use crate::zero_finder::{EigenvalueRecord, Method};
use crate::Complex64;

/// Nodes and weights of `int_a^b` by tanh-sinh with step `h` and `2 * half + 1` nodes.
fn tanh_sinh(a: f64, b: f64, h: f64, half: i64) -> Vec<(f64, f64)> {
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    (-half..=half)
        .filter_map(|j| {
            let u = j as f64 * h;
            let s = FRAC_PI_2 * u.sinh();
            let w = h * FRAC_PI_2 * u.cosh() / s.cosh().powi(2);
            // Distance to the nearer endpoint, computed without cancellation.
            let gap = 1.0 / (s.abs().exp() * s.cosh());
            let node = if j < 0 {
                a + r * gap
            } else if j > 0 {
                b - r * gap
            } else {
                c
            };
            (gap > 0.0 && w * r > 0.0).then_some((node, w * r))
        })
        .collect()
}

/// Radial rule on `t in [0, t_max]` made of unit tanh-sinh panels, split at `breaks`.
fn radial_rule(t_max: f64, breaks: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = (0..=t_max.ceil() as usize).map(|i| i as f64).collect();
    cuts.extend(breaks.iter().copied().filter(|&t| t > 0.0 && t < t_max));
    cuts.retain(|&t| t <= t_max);
    cuts.push(t_max);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    cuts.windows(2)
        .flat_map(|w| tanh_sinh(w[0], w[1], 1.0 / 8.0, 28))
        .collect()
}

fn radial_cutoff(levels: &[usize], m: i64) -> f64 {
    let top = levels.iter().copied().max().unwrap_or(0) as f64;
    2.0 * (top + m.unsigned_abs() as f64) + 90.0
}

fn profile_breaks(profile: &TransverseProfile, b: f64) -> Vec<f64> {
    profile
        .support_radius()
        .map(|rad| vec![0.5 * b * rad * rad])
        .unwrap_or_default()
}

/// `Phi_{l l'} = <phi_{l,m}, F phi_{l',m}>` for the given levels.
pub fn transverse_matrix(
    profile: &TransverseProfile,
    b: f64,
    m: i64,
    levels: &[usize],
) -> Result<DMatrix<f64>> {
    if levels.iter().any(|&l| radial_index(l, m).is_none()) {
        return Err(invalid(format!(
            "angular momentum {m} is not available in every level {levels:?}"
        )));
    }
    let t_max = match profile.support_radius() {
        Some(rad) => (0.5 * b * rad * rad).min(radial_cutoff(levels, m)),
        None => radial_cutoff(levels, m),
    };
    let rule = radial_rule(t_max, &profile_breaks(profile, b));
    let n = levels.len();
    let mut out = DMatrix::zeros(n, n);
    for &(t, w) in &rule {
        let f = profile.value((2.0 * t / b).sqrt());
        if f == 0.0 {
            continue;
        }
        let r: Vec<f64> = levels.iter().map(|&l| radial_amplitude(l, m, t)).collect();
        for i in 0..n {
            for j in i..n {
                out[(i, j)] += w * f * r[i] * r[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            out[(i, j)] = out[(j, i)];
        }
    }
    Ok(out)
}

/// Trapezoid grid on the line adapted to `G` and to Hermite functions up to `count`.
fn line_grid(g: &LongitudinalProfile, count: usize, scale: f64) -> (f64, Vec<f64>) {
    let reach = scale * ((2.0 * count as f64 + 1.0).sqrt() + 10.0);
    let half = reach.min(g.extent(1e-34).max(4.0 * g.length_scale()));
    let wavelength = TAU * scale / (2.0 * count as f64 + 1.0).sqrt();
    let h = wavelength.min(g.length_scale()) / 24.0;
    let n = (half / h).ceil() as i64;
    (h, (-n..=n).map(|i| i as f64 * h).collect())
}

/// `<h_n, G h_n'>` for `n, n' < count`, Hermite functions of scale `s`.
pub fn longitudinal_matrix(g: &LongitudinalProfile, count: usize, scale: f64) -> DMatrix<f64> {
    let (h, xs) = line_grid(g, count, scale);
    let mut out = DMatrix::zeros(count, count);
    let mut hv = vec![0.0; count];
    for &x in &xs {
        let gx = g.value(x);
        hermite_fns(x, scale, &mut hv);
        for i in 0..count {
            let a = h * gx * hv[i];
            if a == 0.0 {
                continue;
            }
            for j in (i..count).step_by(2) {
                out[(i, j)] += a * hv[j];
            }
        }
    }
    for i in 0..count {
        for j in 0..i {
            out[(i, j)] = out[(j, i)];
        }
    }
    out
}

/// `int G` by the same trapezoid rule.
pub fn longitudinal_integral(g: &LongitudinalProfile) -> f64 {
    let (h, xs) = line_grid(g, 4, g.length_scale());
    let tail = g.extent(1e-30).max(xs.last().copied().unwrap_or(0.0));
    let n = (tail / h).ceil() as i64;
    (-n..=n).map(|i| h * g.value(i as f64 * h)).sum()
}

/// `-d^2/dx^2` in the basis `h_n(x / s)`, `n < count`.
pub fn kinetic_matrix(count: usize, scale: f64) -> DMatrix<f64> {
    let s2 = scale * scale;
    DMatrix::from_fn(count, count, |i, j| {
        if i == j {
            (2 * i + 1) as f64 / (2.0 * s2)
        } else if i.abs_diff(j) == 2 {
            let n = i.min(j) as f64;
            -((n + 1.0) * (n + 2.0)).sqrt() / (2.0 * s2)
        } else {
            0.0
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn start(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// One invariant subspace: fixed angular momentum and parity in `x3`.
#[derive(Debug, Clone)]
pub struct DenseBlock {
    pub m: i64,
    pub parity: Parity,
    pub levels: Vec<usize>,
    /// Hermite indices retained in this block.
    pub hermite: Vec<usize>,
    pub h0: DMatrix<Complex64>,
    /// Hermitian factor of the perturbation, without `epsilon exp(i alpha)`.
    pub v: DMatrix<Complex64>,
}

impl DenseBlock {
    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    pub fn hamiltonian(&self, coupling: Complex64) -> DMatrix<Complex64> {
        &self.h0 + &self.v * coupling
    }
}

#[derive(Debug, Clone)]
pub struct DenseModel {
    pub basis: GalerkinBasis,
    pub field: MagneticField,
    pub potential: SeparablePotential,
    pub blocks: Vec<DenseBlock>,
}

impl DenseModel {
    pub fn coupling(&self) -> Complex64 {
        self.potential.phase() * self.potential.epsilon
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(DenseBlock::dim).sum()
    }

    fn block_diagonal(
        &self,
        pick: impl Fn(&DenseBlock) -> DMatrix<Complex64>,
    ) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        let mut at = 0;
        for b in &self.blocks {
            let d = b.dim();
            out.view_mut((at, at), (d, d)).copy_from(&pick(b));
            at += d;
        }
        out
    }

    /// Free part as one block-diagonal matrix.
    pub fn h0_matrix(&self) -> DMatrix<Complex64> {
        self.block_diagonal(|b| b.h0.clone())
    }

    /// Perturbation `epsilon exp(i alpha) V` as one block-diagonal matrix.
    pub fn w_matrix(&self) -> DMatrix<Complex64> {
        let c = self.coupling();
        self.block_diagonal(|b| &b.v * c)
    }

    /// Same model with the coupling strength replaced.
    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            potential: self.potential.with_epsilon(epsilon),
            ..self.clone()
        }
    }
}

fn oracle_levels(basis: &GalerkinBasis, m: i64) -> Vec<usize> {
    let lo = basis.level.saturating_sub(basis.level_window);
    (lo..=basis.level + basis.level_window)
        .filter(|&l| radial_index(l, m).is_some())
        .collect()
}

/// Dense Galerkin discretization of `H0 + epsilon W` on the basis
/// `{phi_{l,m}} x {h_n(x3 / s)}`, split into blocks of fixed `m` and `x3`-parity.
///
/// `basis.n_max` is the number of Hermite functions and `basis.hermite_scale` their scale.
pub fn dense_hamiltonian(
    pot: &SeparablePotential,
    field: MagneticField,
    basis: GalerkinBasis,
) -> Result<DenseModel> {
    pot.validate()?;
    if basis.n_max < 2 {
        return Err(invalid("oracle truncations must be at least 2"));
    }
    if !(basis.hermite_scale > 0.0) {
        return Err(invalid("hermite scale must be positive"));
    }
    let b = field.b;
    let count = basis.n_max;
    let g = longitudinal_matrix(&pot.longitudinal, count, basis.hermite_scale);
    let d2 = kinetic_matrix(count, basis.hermite_scale);
    let ms: Vec<i64> = (-basis.m_max..=basis.m_max).collect();
    let per_m = ms
        .par_iter()
        .map(|&m| {
            let levels = oracle_levels(&basis, m);
            if levels.is_empty() {
                return Ok(Vec::new());
            }
            let phi = transverse_matrix(&pot.transverse, b, m, &levels)?;
            let mut out = Vec::new();
            for parity in [Parity::Even, Parity::Odd] {
                let hermite: Vec<usize> = (parity.start()..count).step_by(2).collect();
                let nh = hermite.len();
                let dim = levels.len() * nh;
                let mut h0 = DMatrix::zeros(dim, dim);
                let mut v = DMatrix::zeros(dim, dim);
                for (a, &la) in levels.iter().enumerate() {
                    for (bb, _) in levels.iter().enumerate() {
                        for (i, &ni) in hermite.iter().enumerate() {
                            for (j, &nj) in hermite.iter().enumerate() {
                                let (r, c) = (a * nh + i, bb * nh + j);
                                v[(r, c)] = Complex64::new(phi[(a, bb)] * g[(ni, nj)], 0.0);
                                if a == bb {
                                    let diag = if i == j { field.level(la) } else { 0.0 };
                                    h0[(r, c)] = Complex64::new(diag + d2[(ni, nj)], 0.0);
                                }
                            }
                        }
                    }
                }
                out.push(DenseBlock {
                    m,
                    parity,
                    levels: levels.clone(),
                    hermite,
                    h0,
                    v,
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DenseModel {
        basis,
        field,
        potential: *pot,
        blocks: per_m.into_iter().flatten().collect(),
    })
}

/// Half-ring `inner < |z - Lambda_q| < outer` in the upper (`upper = true`) or lower half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub level: usize,
    pub inner: f64,
    pub outer: f64,
    pub upper: bool,
}

impl Annulus {
    pub fn contains(&self, z: Complex64, field: MagneticField) -> bool {
        let d = (z - field.level(self.level)).norm();
        self.inner < d && d < self.outer && (z.im > 0.0) == self.upper && z.im != 0.0
    }
}

/// Knobs of the pollution filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityOptions {
    /// Factor applied to the Hermite count in the first re-solve.
    pub enlarge: f64,
    /// Factor applied to the Hermite scale in the second re-solve.
    pub rescale: f64,
    /// Maximal drift, relative to `|z - Lambda_q|`, for a stable eigenvalue.
    pub drift: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self {
            enlarge: 1.5,
            rescale: 1.25,
            drift: 1e-3,
        }
    }
}

fn block_eigenvalues(h: DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let schur = h
        .try_schur(1e-15, 200_000)
        .ok_or_else(|| Error::Eigensolver("complex Schur iteration did not converge".into()))?;
    let (_, tri) = schur.unpack();
    Ok((0..tri.nrows()).map(|i| tri[(i, i)]).collect())
}

/// Blocks whose numerical range cannot meet the window are skipped.
fn can_reach(block: &DenseBlock, model: &DenseModel, window: &Annulus) -> bool {
    let lowest = block
        .levels
        .iter()
        .map(|&l| model.field.level(l))
        .fold(f64::INFINITY, f64::min);
    let spread = model.potential.sup_norm();
    lowest - spread < model.field.level(window.level) + window.outer
}

/// Eigenvalues of the model inside `window`, all tagged unstable.
pub fn raw_eigenvalues(model: &DenseModel, window: &Annulus) -> Result<Vec<(i64, Complex64)>> {
    let c = model.coupling();
    let found = model
        .blocks
        .par_iter()
        .filter(|b| can_reach(b, model, window))
        .map(|b| {
            let eig = block_eigenvalues(b.hamiltonian(c))?;
            Ok(eig
                .into_iter()
                .filter(|&z| window.contains(z, model.field))
                .map(|z| (b.m, z))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<(i64, Complex64)> = found.into_iter().flatten().collect();
    out.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.norm().total_cmp(&a.1.norm())));
    Ok(out)
}

fn resolved(
    model: &DenseModel,
    window: &Annulus,
    basis: GalerkinBasis,
) -> Result<Vec<(i64, Complex64)>> {
    let model = dense_hamiltonian(&model.potential, model.field, basis)?;
    let wide = Annulus {
        inner: 0.5 * window.inner,
        outer: 2.0 * window.outer,
        ..*window
    };
    raw_eigenvalues(&model, &wide)
}

fn drift(z: Complex64, m: i64, others: &[(i64, Complex64)], lambda: f64) -> f64 {
    others
        .iter()
        .filter(|o| o.0 == m)
        .map(|o| (o.1 - z).norm())
        .fold(f64::INFINITY, f64::min)
        / (z - lambda).norm()
}

/// Eigenvalues of `model` inside `window`, each tagged stable when it reappears, within
/// the configured relative drift, both in a solve with more Hermite functions and in a
/// solve with a stretched Hermite scale.
pub fn dense_eigenvalues(
    model: &DenseModel,
    window: &Annulus,
    opts: StabilityOptions,
) -> Result<Vec<EigenvalueRecord>> {
    if !(window.inner >= 0.0 && window.inner < window.outer) {
        return Err(invalid("window needs 0 <= inner < outer"));
    }
    let base = raw_eigenvalues(model, window)?;
    if base.is_empty() {
        return Ok(Vec::new());
    }
    let mut bigger = model.basis;
    bigger.n_max = ((model.basis.n_max as f64) * opts.enlarge).round() as usize;
    let mut stretched = model.basis;
    stretched.hermite_scale *= opts.rescale;
    let enlarged = resolved(model, window, bigger)?;
    let rescaled = resolved(model, window, stretched)?;
    let lambda = model.field.level(window.level);
    base.into_iter()
        .map(|(m, z)| {
            let d = drift(z, m, &enlarged, lambda).max(drift(z, m, &rescaled, lambda));
            let k = k_from_z(window.level, model.field.b, z)?;
            Ok(EigenvalueRecord {
                z,
                k: k.k,
                multiplicity: 1,
                method: Method::Oracle,
                residual: d,
                stable: d < opts.drift,
            })
        })
        .collect()
}

/// Smallest `|Im k|` the oracle can represent: Hermite functions reach `s sqrt(2N + 1)`, and
/// an eigenfunction decaying like `exp(-Im k |x3|)` must have fallen by `exp(-decay)` there.
pub fn resolvable_im_k(basis: &GalerkinBasis, decay: f64) -> f64 {
    decay / (basis.hermite_scale * (2.0 * basis.n_max as f64 + 1.0).sqrt())
}

/// Leading-order location `k = -i exp(i alpha) (epsilon / 2) Phi_qq int G` of the eigenvalue of
/// the radial sector `m`, from the diagonal Galerkin entries.
pub fn first_order_k(
    pot: &SeparablePotential,
    field: MagneticField,
    q: usize,
    m: i64,
) -> Result<Complex64> {
    let phi = transverse_matrix(&pot.transverse, field.b, m, &[q])?;
    let lam = 0.5 * pot.epsilon * phi[(0, 0)] * longitudinal_integral(&pot.longitudinal);
    Ok(-Complex64::i() * pot.phase() * lam)
}

/// Matrix `<phi_{q,m}, W phi_{q,m'}>` for `|m|, |m'| <= m_max` by polar quadrature, for a
/// general real function `w(x1, x2)`. Rows follow `m = -q ..= m_max`.
pub fn dense_toeplitz_matrix(
    q: usize,
    b: f64,
    w: &(dyn Fn(f64, f64) -> f64 + Sync),
    m_max: i64,
    angles: usize,
) -> Result<DMatrix<Complex64>> {
    if !(b > 0.0) || angles < 8 || m_max < 0 {
        return Err(invalid("need b > 0, m_max >= 0 and at least 8 angles"));
    }
    let ms: Vec<i64> = (-(q as i64)..=m_max).collect();
    let n = ms.len();
    let t_max = 2.0 * (q as f64 + m_max as f64) + 90.0;
    let rule = radial_rule(t_max, &[]);
    // Fourier coefficients of w on each circle: c_d(t) = (1/2pi) int w e^{-i d theta}.
    let span = 2 * (m_max + q as i64) as usize;
    let rows = rule
        .par_iter()
        .map(|&(t, wt)| {
            let r = (2.0 * t / b).sqrt();
            let vals: Vec<f64> = (0..angles)
                .map(|a| {
                    let th = TAU * a as f64 / angles as f64;
                    w(r * th.cos(), r * th.sin())
                })
                .collect();
            let coef: Vec<Complex64> = (0..=span)
                .map(|d| {
                    vals.iter()
                        .enumerate()
                        .map(|(a, &v)| {
                            Complex64::from_polar(v, -(d as f64) * TAU * a as f64 / angles as f64)
                        })
                        .sum::<Complex64>()
                        / angles as f64
                })
                .collect();
            let amp: Vec<f64> = ms.iter().map(|&m| radial_amplitude(q, m, t)).collect();
            let mut out = DMatrix::<Complex64>::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let d = ms[j] - ms[i];
                    let c = if d >= 0 {
                        coef[d as usize]
                    } else {
                        coef[(-d) as usize].conj()
                    };
                    // <phi_i, w phi_j> picks the Fourier mode e^{i (m_i - m_j) theta} of w.
                    out[(i, j)] = c.conj() * (wt * amp[i] * amp[j]);
                }
            }
            out
        })
        .reduce(|| DMatrix::zeros(n, n), |a, b| a + b);
    Ok(rows)
}

/// Eigenvalues of [`dense_toeplitz_matrix`], sorted decreasingly.
pub fn dense_toeplitz_eigenvalues(
    q: usize,
    b: f64,
    w: &(dyn Fn(f64, f64) -> f64 + Sync),
    m_max: i64,
    angles: usize,
) -> Result<Vec<f64>> {
    let mat = dense_toeplitz_matrix(q, b, w, m_max, angles)?;
    let herm = (&mat + mat.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev)
}

/// Composite tanh-sinh of a smooth function on `[a, b]`, exposed for tests.
pub fn integrate_tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    radial_rule(b - a, &[])
        .iter()
        .map(|&(t, w)| w * f(a + t))
        .sum()
}
