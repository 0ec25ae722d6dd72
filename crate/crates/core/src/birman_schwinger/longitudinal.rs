//! Compressions of the free one-dimensional resolvent `(D^2 - zeta)^-1` to the functions
//! `u_n = G^{1/2} h_n(x / s) / sqrt(s)`.
//!
//! The kernel `i exp(i kappa |x - x'|) / (2 kappa)` is applied by two Volterra sweeps over
//! composite Gauss-Legendre panels. Within a panel `u` is replaced by its interpolant on
//! the panel nodes and the exponential is integrated exactly by a finer sub-rule, so the
//! scheme stays accurate for any `kappa` in the upper half-plane.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::landau::sqrt_branch;
use crate::potentials::LongitudinalProfile;
use crate::quadrature::{composite_gauss_legendre, gauss_legendre};
use crate::special::hermite_fns;

const ORDER: usize = 16;
const SUB_ORDER: usize = 28;
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Wavenumber `kappa` with `kappa^2 = zeta` and `Im kappa > 0`.
///
/// For `zeta > 0` a boundary value (`Im zeta -> 0+`) is returned only when requested.
pub fn resolvent_wavenumber(zeta: Complex64, boundary_value: bool) -> Result<Complex64> {
    if zeta.im == 0.0 {
        if zeta.re < 0.0 {
            return Ok(Complex64::new(0.0, (-zeta.re).sqrt()));
        }
        if zeta.re > 0.0 && boundary_value {
            return Ok(Complex64::new(zeta.re.sqrt(), 0.0));
        }
        return Err(invalid(format!(
            "zeta = {zeta} lies in the spectrum [0, inf) of the free operator"
        )));
    }
    sqrt_branch(zeta)
}

/// Free resolvent kernel `i exp(i kappa |x - y|) / (2 kappa)`.
pub fn free_kernel(kappa: Complex64, x: f64, y: f64) -> Complex64 {
    I * (I * kappa * (x - y).abs()).exp() / (2.0 * kappa)
}

/// `(exp(i kappa d) - 1) / kappa`, accurate for small `kappa d`.
pub(crate) fn e_kernel(kappa: Complex64, d: f64) -> Complex64 {
    let w = I * kappa * d;
    if w.norm() < 0.25 {
        // (e^w - 1) / w as a series, times i d.
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for j in 2..24 {
            term *= w / j as f64;
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        I * d * sum
    } else {
        (w.exp() - 1.0) / kappa
    }
}

/// Quadrature data for one choice of `G`, Hermite truncation and scale.
#[derive(Debug, Clone)]
pub struct LongitudinalBasis {
    profile: LongitudinalProfile,
    n_max: usize,
    scale: f64,
    h: f64,
    panels: usize,
    frac: Vec<f64>,
    weights: Vec<f64>,
    /// Node-major values `u[node * nb + n]`.
    u: Vec<f64>,
    u_complex: DMatrix<Complex64>,
    g: Vec<f64>,
    /// Per target (nodes then right end): sub-node fractions, weights, Lagrange values.
    sub_frac: Vec<f64>,
    sub_weight: Vec<f64>,
    lagrange: Vec<f64>,
}

struct PanelWeights {
    /// Propagation factors from the panel's left end to each target.
    shift: Vec<Complex64>,
    /// Local weights `[target][p]`.
    local: Vec<Complex64>,
}

impl LongitudinalBasis {
    /// Builds the panel rule and refines it until doubling the panel count changes the
    /// compressed resolvent by less than `1e-11` relatively.
    pub fn new(profile: LongitudinalProfile, n_max: usize, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!(
                "Hermite scale must be positive, got {scale}"
            )));
        }
        let osc = 2.0 * std::f64::consts::PI * scale / (2.0 * n_max as f64 + 1.0).sqrt();
        let mut width = (0.3 * osc)
            .min(0.5 * profile.length_scale())
            .min(0.5 * scale);
        let probe = Complex64::new(-1.0, 0.35);
        let mut coarse = Self::with_width(profile, n_max, scale, width)?;
        for _ in 0..5 {
            let fine = Self::with_width(profile, n_max, scale, 0.5 * width)?;
            let a = coarse.resolvent(probe, false)?;
            let b = fine.resolvent(probe, false)?;
            let rel = (&a - &b).norm() / b.norm();
            if rel < 1e-11 {
                return Ok(coarse);
            }
            width *= 0.5;
            coarse = fine;
        }
        Err(Error::Quadrature {
            error: f64::NAN,
            tolerance: 1e-11,
        })
    }

    fn with_width(
        profile: LongitudinalProfile,
        n_max: usize,
        scale: f64,
        width: f64,
    ) -> Result<Self> {
        let nb = n_max + 1;
        let reach = scale * ((2.0 * n_max as f64 + 1.0).sqrt() + 9.0);
        let half = reach.min(profile.extent(1e-34));
        let panels = ((2.0 * half / width).ceil() as usize).max(2);
        let h = 2.0 * half / panels as f64;
        let (nodes, weights) = composite_gauss_legendre(-half, half, panels, ORDER);
        let mut u = vec![0.0; nodes.len() * nb];
        let mut buf = vec![0.0; nb];
        for (i, &x) in nodes.iter().enumerate() {
            hermite_fns(x, scale, &mut buf);
            let root = profile.value(x).sqrt();
            for n in 0..nb {
                u[i * nb + n] = root * buf[n];
            }
        }
        let u_complex =
            DMatrix::from_fn(nodes.len(), nb, |i, n| Complex64::new(u[i * nb + n], 0.0));
        let g = (0..nb)
            .map(|n| (0..nodes.len()).map(|i| weights[i] * u[i * nb + n]).sum())
            .collect();

        let (gx, gw) = gauss_legendre(ORDER);
        let frac: Vec<f64> = gx.iter().map(|x| 0.5 * (1.0 + x)).collect();
        let panel_w: Vec<f64> = gw.iter().map(|w| 0.5 * w).collect();
        let (sx, sw) = gauss_legendre(SUB_ORDER);
        let targets: Vec<f64> = frac.iter().copied().chain(std::iter::once(1.0)).collect();
        let mut sub_frac = Vec::with_capacity(targets.len() * SUB_ORDER);
        let mut sub_weight = Vec::with_capacity(targets.len() * SUB_ORDER);
        let mut lagrange = Vec::with_capacity(targets.len() * SUB_ORDER * ORDER);
        for &t in &targets {
            for (x, w) in sx.iter().zip(&sw) {
                let s = 0.5 * t * (1.0 + x);
                sub_frac.push(s);
                sub_weight.push(0.5 * t * w);
                for p in 0..ORDER {
                    let mut l = 1.0;
                    for r in 0..ORDER {
                        if r != p {
                            l *= (s - frac[r]) / (frac[p] - frac[r]);
                        }
                    }
                    lagrange.push(l);
                }
            }
        }
        Ok(Self {
            profile,
            n_max,
            scale,
            h,
            panels,
            frac,
            weights: panel_w,
            u,
            u_complex,
            g,
            sub_frac,
            sub_weight,
            lagrange,
        })
    }

    pub fn profile(&self) -> LongitudinalProfile {
        self.profile
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Number of quadrature nodes.
    pub fn node_count(&self) -> usize {
        self.panels * ORDER
    }

    /// `g_n = int u_n`.
    pub fn moments(&self) -> &[f64] {
        &self.g
    }

    fn targets(&self) -> usize {
        ORDER + 1
    }

    fn weights_for(&self, kernel: impl Fn(f64) -> Complex64) -> PanelWeights {
        let nt = self.targets();
        let mut shift = Vec::with_capacity(nt);
        let mut local = vec![Complex64::new(0.0, 0.0); nt * ORDER];
        for t in 0..nt {
            let ft = if t < ORDER { self.frac[t] } else { 1.0 };
            shift.push(kernel(self.h * ft));
            for j in 0..SUB_ORDER {
                let idx = t * SUB_ORDER + j;
                let kv =
                    kernel(self.h * (ft - self.sub_frac[idx])) * (self.h * self.sub_weight[idx]);
                let lag = &self.lagrange[idx * ORDER..(idx + 1) * ORDER];
                for p in 0..ORDER {
                    local[t * ORDER + p] += kv * lag[p];
                }
            }
        }
        PanelWeights { shift, local }
    }

    /// Applies the kernel `k(|x - x'|)` to every `u_n` at every node, as a left plus a right sweep.
    ///
    /// Across a panel the kernel obeys `k(a + d) = exp(i kappa d) k(a) + c(d)`. For the plain
    /// exponential `c = 0`; for `E_kappa` it is `c = E_kappa(d)` times the mass swept so far,
    /// passed as `jump`.
    fn sweep(
        &self,
        kappa: Complex64,
        pw: &PanelWeights,
        jump: Option<&[Complex64]>,
    ) -> Vec<Complex64> {
        let nb = self.n_max + 1;
        let nodes = self.node_count();
        let mut out = vec![Complex64::new(0.0, 0.0); nodes * nb];
        let prop: Vec<Complex64> = (0..self.targets())
            .map(|t| {
                let ft = if t < ORDER { self.frac[t] } else { 1.0 };
                (I * kappa * (self.h * ft)).exp()
            })
            .collect();
        // Left sweep then mirrored right sweep.
        for direction in 0..2 {
            let mut carry = vec![Complex64::new(0.0, 0.0); nb];
            let mut mass = vec![0.0f64; nb];
            for step in 0..self.panels {
                let panel = if direction == 0 {
                    step
                } else {
                    self.panels - 1 - step
                };
                let base = panel * ORDER;
                for t in 0..ORDER {
                    let (tt, node) = if direction == 0 {
                        (t, base + t)
                    } else {
                        (ORDER - 1 - t, base + t)
                    };
                    let row = &mut out[node * nb..(node + 1) * nb];
                    for n in 0..nb {
                        let mut acc = prop[tt] * carry[n];
                        if let Some(j) = jump {
                            acc += j[tt] * mass[n];
                        }
                        row[n] += acc;
                    }
                    for p in 0..ORDER {
                        let pp = if direction == 0 { p } else { ORDER - 1 - p };
                        let w = pw.local[tt * ORDER + pp];
                        let src = &self.u[(base + p) * nb..(base + p + 1) * nb];
                        for n in 0..nb {
                            row[n] += w * src[n];
                        }
                    }
                }
                let end = ORDER;
                for n in 0..nb {
                    let mut acc = prop[end] * carry[n];
                    if let Some(j) = jump {
                        acc += j[end] * mass[n];
                    }
                    carry[n] = acc;
                }
                for p in 0..ORDER {
                    let pp = if direction == 0 { p } else { ORDER - 1 - p };
                    let w = pw.local[end * ORDER + pp];
                    let src = &self.u[(base + p) * nb..(base + p + 1) * nb];
                    for n in 0..nb {
                        carry[n] += w * src[n];
                        mass[n] += self.h * self.weights[p] * src[n];
                    }
                }
            }
        }
        out
    }

    fn project(&self, field: Vec<Complex64>, factor: Complex64) -> DMatrix<Complex64> {
        let nb = self.n_max + 1;
        let nodes = self.node_count();
        let weighted = DMatrix::from_fn(nodes, nb, |i, n| {
            field[i * nb + n] * (self.h * self.weights[i % ORDER]) * factor
        });
        let m = self.u_complex.transpose() * weighted;
        (&m + m.transpose()) * Complex64::new(0.5, 0.0)
    }

    /// `<u_n, (D^2 - zeta)^-1 u_n'>`, complex symmetric.
    pub fn resolvent(&self, zeta: Complex64, boundary_value: bool) -> Result<DMatrix<Complex64>> {
        let kappa = resolvent_wavenumber(zeta, boundary_value)?;
        Ok(self.resolvent_at(kappa))
    }

    /// Same as [`Self::resolvent`] with the wavenumber given directly (`Im kappa >= 0`).
    pub fn resolvent_at(&self, kappa: Complex64) -> DMatrix<Complex64> {
        let pw = self.weights_for(|d| (I * kappa * d).exp());
        let field = self.sweep(kappa, &pw, None);
        self.project(field, I / (2.0 * kappa))
    }

    /// Part of the compressed resolvent that stays bounded as `kappa -> 0`:
    /// the kernel `(i / 2) (exp(i kappa |x - x'|) - 1) / kappa`.
    pub fn regular_part(&self, kappa: Complex64) -> DMatrix<Complex64> {
        let pw = self.weights_for(|d| e_kernel(kappa, d));
        let jump: Vec<Complex64> = pw.shift.clone();
        let field = self.sweep(kappa, &pw, Some(&jump));
        self.project(field, Complex64::new(0.0, 0.5))
    }

    /// Hilbert-Schmidt norm of the full operator `G^{1/2} (D^2 - zeta)^-1 G^{1/2}` on `L^2(R)`.
    pub fn hilbert_schmidt_norm(&self, zeta: Complex64, boundary_value: bool) -> Result<f64> {
        let kappa = resolvent_wavenumber(zeta, boundary_value)?;
        hilbert_schmidt_norm(self.profile, kappa)
    }
}

/// `|| G^{1/2} R G^{1/2} ||_2` for the free resolvent with wavenumber `kappa`.
pub fn hilbert_schmidt_norm(profile: LongitudinalProfile, kappa: Complex64) -> Result<f64> {
    let half = profile.extent(1e-30).min(1e4);
    let decay = 2.0 * kappa.im;
    let d_max = if decay > 0.0 {
        (2.0 * half).min(80.0 / decay)
    } else {
        2.0 * half
    };
    let panels = ((2.0 * half / (0.25 * profile.length_scale())).ceil() as usize).clamp(8, 4000);
    let (xs, xw) = composite_gauss_legendre(-half, half, panels, 12);
    let dpanels = ((d_max / (0.25 * profile.length_scale().min(1.0 / decay.max(1e-12)))).ceil()
        as usize)
        .clamp(8, 4000);
    let (ds, dw) = composite_gauss_legendre(0.0, d_max, dpanels, 12);
    let mut s = 0.0;
    for (x, wx) in xs.iter().zip(&xw) {
        let gx = profile.value(*x);
        for (d, wd) in ds.iter().zip(&dw) {
            s += wx * wd * gx * profile.value(x - d) * (-decay * d).exp();
        }
    }
    // Both orderings of (x, x') contribute.
    Ok((2.0 * s / (4.0 * kappa.norm_sqr())).sqrt())
}
