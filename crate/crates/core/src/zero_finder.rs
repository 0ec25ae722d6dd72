//! Zeros of analytic functions by the argument principle, and the eigenvalue scan built on
//! the Birman-Schwinger determinant.
//!
//! Contours are traced by phase continuation: samples are refined by bisection until every
//! phase increment is below `pi / 2`. Regions are subdivided on an integer lattice so that
//! neighbouring boxes share their sample points exactly and every function value is computed
//! once.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::birman_schwinger::{BirmanSchwinger, GalerkinBasis};
use crate::error::{invalid, Error, Result};
use crate::landau::{param_z, Branch, KPoint, MagneticField};
use crate::potentials::SeparablePotential;

/// Winding number of `f` around the closed polygon with the given vertices.
pub fn winding_index<F>(f: &F, contour: &[Complex64], samples: usize) -> Result<i64>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    if contour.len() < 3 {
        return Err(invalid("a contour needs at least three vertices"));
    }
    let samples = samples.max(2);
    let mut total = 0.0;
    let mut scale: f64 = 0.0;
    for (i, &a) in contour.iter().enumerate() {
        let b = contour[(i + 1) % contour.len()];
        let pts: Vec<Complex64> = (0..=samples)
            .map(|j| a + (b - a) * (j as f64 / samples as f64))
            .collect();
        let vals = pts
            .par_iter()
            .map(|&z| checked(f, z))
            .collect::<Result<Vec<_>>>()?;
        scale = vals.iter().fold(scale, |s, v| s.max(v.norm()));
        for j in 0..samples {
            total += continue_phase(f, pts[j], pts[j + 1], vals[j], vals[j + 1], 0, &mut scale)?;
        }
    }
    round_turns(total)
}

fn checked<F: Fn(Complex64) -> Result<Complex64>>(f: &F, z: Complex64) -> Result<Complex64> {
    let v = f(z)?;
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Evaluation(format!("non-finite value {v} at {z}")));
    }
    if v == Complex64::new(0.0, 0.0) {
        return Err(Error::ContourZero {
            modulus: 0.0,
            at: z,
        });
    }
    Ok(v)
}

fn continue_phase<F: Fn(Complex64) -> Result<Complex64>>(
    f: &F,
    a: Complex64,
    b: Complex64,
    fa: Complex64,
    fb: Complex64,
    depth: u32,
    scale: &mut f64,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let fm = checked(f, m)?;
    *scale = scale.max(fm.norm());
    if smooth(fm / fa) && smooth(fb / fm) {
        return Ok((fm / fa).arg() + (fb / fm).arg());
    }
    if depth > 48 {
        return Err(Error::ContourZero {
            modulus: fa.norm().min(fb.norm()).min(fm.norm()),
            at: m,
        });
    }
    Ok(continue_phase(f, a, m, fa, fm, depth + 1, scale)?
        + continue_phase(f, m, b, fm, fb, depth + 1, scale)?)
}

/// Phase and modulus of a ratio of neighbouring samples both change by less than one unit.
fn smooth(ratio: Complex64) -> bool {
    ratio.arg().abs() < 0.5 * PI && ratio.norm().ln().abs() < 1.0
}

fn round_turns(total: f64) -> Result<i64> {
    let turns = total / TAU;
    let n = turns.round();
    if (turns - n).abs() > 0.05 {
        return Err(Error::WindingNonConvergence { turns });
    }
    Ok(n as i64)
}

/// Search region in the `k`-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum KRegion {
    /// `re.0 < Re k < re.1`, `im.0 < Im k < im.1`.
    Rectangle { re: (f64, f64), im: (f64, f64) },
    /// `r.0 < |k| < r.1`, `theta.0 < arg k < theta.1`.
    AnnularSector { r: (f64, f64), theta: (f64, f64) },
}

impl KRegion {
    /// Square `[margin, eta / sqrt 2]^2` of `D_+(eta)`, mirrored for `D_-`, keeping `margin`
    /// away from both axes.
    pub fn quadrant(branch: Branch, eta: f64, margin: f64) -> Result<Self> {
        let side = eta / std::f64::consts::SQRT_2;
        if !(margin > 0.0 && margin < side) {
            return Err(invalid(format!(
                "margin {margin} must lie in (0, eta / sqrt 2)"
            )));
        }
        Ok(match branch {
            Branch::Plus => KRegion::Rectangle {
                re: (margin, side),
                im: (margin, side),
            },
            Branch::Minus => KRegion::Rectangle {
                re: (margin, side),
                im: (-side, -margin),
            },
        })
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            KRegion::Rectangle { re, im } => re.0 < re.1 && im.0 < im.1,
            KRegion::AnnularSector { r, theta } => {
                0.0 < r.0 && r.0 < r.1 && theta.0 < theta.1 && theta.1 - theta.0 < TAU
            }
        };
        if ok && self.bounds().iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(invalid(format!("degenerate search region {self:?}")))
        }
    }

    fn bounds(&self) -> [f64; 4] {
        match *self {
            KRegion::Rectangle { re, im } => [re.0, re.1, im.0, im.1],
            KRegion::AnnularSector { r, theta } => [r.0.ln(), r.1.ln(), theta.0, theta.1],
        }
    }

    /// Map from scan coordinates to `k`.
    fn map_to_k(self, w: Complex64) -> Complex64 {
        match self {
            KRegion::Rectangle { .. } => w,
            KRegion::AnnularSector { .. } => w.exp(),
        }
    }

    pub fn contains(&self, k: Complex64) -> bool {
        match *self {
            KRegion::Rectangle { re, im } => {
                re.0 < k.re && k.re < re.1 && im.0 < k.im && k.im < im.1
            }
            KRegion::AnnularSector { r, theta } => {
                let (n, a) = (k.norm(), k.arg());
                r.0 < n && n < r.1 && theta.0 < a && a < theta.1
            }
        }
    }

    /// Bounds of `|k|` over the region.
    pub fn modulus_range(&self) -> (f64, f64) {
        match *self {
            KRegion::Rectangle { re, im } => {
                let near = |a: (f64, f64)| {
                    if a.0 <= 0.0 && a.1 >= 0.0 {
                        0.0
                    } else {
                        a.0.abs().min(a.1.abs())
                    }
                };
                let far = |a: (f64, f64)| a.0.abs().max(a.1.abs());
                (near(re).hypot(near(im)), far(re).hypot(far(im)))
            }
            KRegion::AnnularSector { r, .. } => r,
        }
    }

    /// Branch of `k` when the region lies in the open right half-plane on one side of the
    /// real axis.
    pub fn branch(&self) -> Option<Branch> {
        let (re_lo, im_lo, im_hi) = match *self {
            KRegion::Rectangle { re, im } => (re.0, im.0, im.1),
            KRegion::AnnularSector { theta, .. } => {
                if theta.0 < -FRAC_PI_2 || theta.1 > FRAC_PI_2 {
                    return None;
                }
                (0.0, theta.0, theta.1)
            }
        };
        if re_lo < 0.0 {
            None
        } else if im_lo >= 0.0 {
            Some(Branch::Plus)
        } else if im_hi <= 0.0 {
            Some(Branch::Minus)
        } else {
            None
        }
    }

    /// Distance from `k` to the boundary (positive inside).
    pub fn inner_distance(&self, k: Complex64) -> f64 {
        match *self {
            KRegion::Rectangle { re, im } => (k.re - re.0)
                .min(re.1 - k.re)
                .min(k.im - im.0)
                .min(im.1 - k.im),
            KRegion::AnnularSector { r, theta } => {
                let (n, a) = (k.norm(), k.arg());
                (n - r.0)
                    .min(r.1 - n)
                    .min(n * (a - theta.0).sin())
                    .min(n * (theta.1 - a).sin())
            }
        }
    }

    fn with_bounds(&self, b: [f64; 4]) -> Self {
        match self {
            KRegion::Rectangle { .. } => KRegion::Rectangle {
                re: (b[0], b[1]),
                im: (b[2], b[3]),
            },
            KRegion::AnnularSector { .. } => KRegion::AnnularSector {
                r: (b[0].exp(), b[1].exp()),
                theta: (b[2], b[3]),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Boxes are refined until their diameter in the `k`-plane is below `tol`.
    pub tol: f64,
    /// Initial samples per box edge.
    pub samples: usize,
    pub max_evaluations: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            samples: 16,
            max_evaluations: 400_000,
        }
    }
}

/// A zero cluster found by [`locate_zeros`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub k: Complex64,
    pub multiplicity: usize,
    /// Half-diagonal of the final box.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroScan {
    pub zeros: Vec<ZeroRecord>,
    /// Region actually enclosed after any dithering of its edges.
    pub region: KRegion,
    pub evaluations: usize,
}

type Node = (i64, i64);

#[derive(Debug, Clone, Copy)]
struct LatticeBox {
    i0: i64,
    i1: i64,
    j0: i64,
    j1: i64,
}

const LATTICE_BITS: u32 = 40;
/// Golden-ratio offsets used to move box edges off zeros.
const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn dither(attempt: usize, salt: f64) -> f64 {
    if attempt == 0 {
        0.0
    } else {
        ((attempt as f64 * (GOLDEN + salt)).fract() - 0.5) * 0.2
    }
}

struct Lattice<'a, F> {
    f: &'a F,
    region: KRegion,
    origin: [f64; 2],
    step: [f64; 2],
    cache: HashMap<Node, Complex64>,
    /// Evaluations made off the lattice.
    extra: usize,
    budget: usize,
}

impl<'a, F> Lattice<'a, F>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    fn point(&self, n: Node) -> Complex64 {
        Complex64::new(
            self.origin[0] + n.0 as f64 * self.step[0],
            self.origin[1] + n.1 as f64 * self.step[1],
        )
    }

    fn k_at(&self, n: Node) -> Complex64 {
        self.region.map_to_k(self.point(n))
    }

    fn eval_many(&mut self, nodes: &[Node]) -> Result<()> {
        let mut todo: Vec<Node> = nodes
            .iter()
            .copied()
            .filter(|n| !self.cache.contains_key(n))
            .collect();
        todo.sort_unstable();
        todo.dedup();
        if todo.is_empty() {
            return Ok(());
        }
        if self.extra + self.cache.len() + todo.len() > self.budget {
            return Err(Error::BudgetExhausted {
                budget: self.budget,
            });
        }
        let ks: Vec<Complex64> = todo.iter().map(|&n| self.k_at(n)).collect();
        let f = self.f;
        let vals = ks
            .par_iter()
            .map(|&k| checked(f, k))
            .collect::<Result<Vec<_>>>()?;
        self.cache.extend(todo.into_iter().zip(vals));
        Ok(())
    }

    fn value(&mut self, n: Node) -> Result<Complex64> {
        self.eval_many(&[n])?;
        Ok(self.cache[&n])
    }

    fn segment(&mut self, a: Node, b: Node, depth: u32) -> Result<f64> {
        let (fa, fb) = (self.value(a)?, self.value(b)?);
        let span = (b.0 - a.0).abs().max((b.1 - a.1).abs());
        if span < 2 {
            return if smooth(fb / fa) {
                Ok((fb / fa).arg())
            } else {
                Err(Error::ContourZero {
                    modulus: fa.norm().min(fb.norm()),
                    at: self.k_at(a),
                })
            };
        }
        // Both halves must change slowly in phase and modulus: endpoint values alone cannot
        // reveal a whole turn picked up near a multiple zero.
        let m = ((a.0 + b.0).div_euclid(2), (a.1 + b.1).div_euclid(2));
        let fm = self.value(m)?;
        let (left, right) = (fm / fa, fb / fm);
        if smooth(left) && smooth(right) {
            return Ok(left.arg() + right.arg());
        }
        if depth > 60 {
            return Err(Error::ContourZero {
                modulus: fa.norm().min(fb.norm()).min(fm.norm()),
                at: self.k_at(m),
            });
        }
        Ok(self.segment(a, m, depth + 1)? + self.segment(m, b, depth + 1)?)
    }

    fn edge(&mut self, a: Node, b: Node, samples: usize) -> Result<f64> {
        let s = samples as i64;
        let mut pts: Vec<Node> = (0..=s)
            .map(|t| (a.0 + (b.0 - a.0) * t / s, a.1 + (b.1 - a.1) * t / s))
            .collect();
        pts.dedup();
        self.eval_many(&pts)?;
        let mut total = 0.0;
        for w in pts.windows(2) {
            total += self.segment(w[0], w[1], 0)?;
        }
        Ok(total)
    }

    fn winding(&mut self, bx: &LatticeBox, samples: usize) -> Result<i64> {
        let c = [
            (bx.i0, bx.j0),
            (bx.i1, bx.j0),
            (bx.i1, bx.j1),
            (bx.i0, bx.j1),
        ];
        let mut total = 0.0;
        for i in 0..4 {
            total += self.edge(c[i], c[(i + 1) % 4], samples)?;
        }
        round_turns(total)
    }

    /// Muller iteration for the single zero certified inside `bx`. Returns `None` when the
    /// iteration leaves the box or stalls, so that the caller keeps subdividing.
    fn polish(&mut self, bx: &LatticeBox, tol: f64) -> Result<Option<Complex64>> {
        let ci = (bx.i0 + bx.i1) / 2;
        let cj = (bx.j0 + bx.j1) / 2;
        let mut x = [
            self.k_at((bx.i0 + (bx.i1 - bx.i0) / 4, bx.j0 + (bx.j1 - bx.j0) / 4)),
            self.k_at((bx.i1 - (bx.i1 - bx.i0) / 4, cj)),
            self.k_at((ci, bx.j1 - (bx.j1 - bx.j0) / 4)),
        ];
        let mut y = [Complex64::new(0.0, 0.0); 3];
        for (yi, &xi) in y.iter_mut().zip(&x) {
            *yi = self.direct(xi)?;
        }
        let target = (tol * 1e-3).max(1e-14 * x[2].norm());
        for _ in 0..40 {
            let h1 = x[1] - x[0];
            let h2 = x[2] - x[1];
            let d1 = (y[1] - y[0]) / h1;
            let d2 = (y[2] - y[1]) / h2;
            let a = (d2 - d1) / (h2 + h1);
            let b = a * h2 + d2;
            let disc = (b * b - 4.0 * a * y[2]).sqrt();
            let den = if (b + disc).norm() >= (b - disc).norm() {
                b + disc
            } else {
                b - disc
            };
            if den.norm() == 0.0 || !den.is_finite() {
                return Ok(None);
            }
            let step = -2.0 * y[2] / den;
            let next = x[2] + step;
            if !self.inside(bx, next) {
                return Ok(None);
            }
            let fy = self.direct(next)?;
            x = [x[1], x[2], next];
            y = [y[1], y[2], fy];
            if step.norm() < target || fy.norm() == 0.0 {
                return Ok(Some(next));
            }
        }
        Ok(None)
    }

    fn direct(&mut self, k: Complex64) -> Result<Complex64> {
        if self.extra + self.cache.len() >= self.budget {
            return Err(Error::BudgetExhausted {
                budget: self.budget,
            });
        }
        self.extra += 1;
        let f = self.f;
        f(k)
    }

    fn inside(&self, bx: &LatticeBox, k: Complex64) -> bool {
        let lo = self.point((bx.i0, bx.j0));
        let hi = self.point((bx.i1, bx.j1));
        let w = match self.region {
            KRegion::Rectangle { .. } => k,
            KRegion::AnnularSector { .. } => {
                if k.norm() == 0.0 {
                    return false;
                }
                let mut a = k.arg();
                while a < lo.im {
                    a += TAU;
                }
                Complex64::new(k.norm().ln(), a)
            }
        };
        lo.re < w.re && w.re < hi.re && lo.im < w.im && w.im < hi.im
    }

    fn diameter(&self, bx: &LatticeBox) -> f64 {
        let corners = [
            (bx.i0, bx.j0),
            (bx.i1, bx.j1),
            (bx.i1, bx.j0),
            (bx.i0, bx.j1),
        ];
        let k: Vec<Complex64> = corners.iter().map(|&n| self.k_at(n)).collect();
        (k[0] - k[1]).norm().max((k[2] - k[3]).norm())
    }
}

/// Zeros of `f` inside `region`, each reported once with its multiplicity.
pub fn locate_zeros<F>(f: &F, region: KRegion, opts: ScanOptions) -> Result<ZeroScan>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    region.validate()?;
    if !(opts.tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let [x0, x1, y0, y1] = region.bounds();
    let n = 1i64 << LATTICE_BITS;
    let mut lat = Lattice {
        f,
        region,
        origin: [x0, y0],
        step: [(x1 - x0) / n as f64, (y1 - y0) / n as f64],
        cache: HashMap::new(),
        extra: 0,
        budget: opts.max_evaluations,
    };
    let samples = opts.samples.max(4);

    // Root box, with its edges moved slightly if a zero sits on them.
    let mut root = None;
    let mut last_err = None;
    for attempt in 0..16 {
        let shift = |salt: f64| (dither(attempt, salt) * 0.1 * n as f64) as i64;
        let bx = LatticeBox {
            i0: shift(0.0),
            i1: n + shift(0.13),
            j0: shift(0.29),
            j1: n + shift(0.41),
        };
        match lat.winding(&bx, 4 * samples) {
            Ok(w) => {
                root = Some((bx, w));
                break;
            }
            Err(e @ (Error::ContourZero { .. } | Error::WindingNonConvergence { .. })) => {
                last_err = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    let (root, total) = match root {
        Some(r) => r,
        None => return Err(last_err.expect("at least one attempt failed")),
    };
    let used = {
        let a = lat.point((root.i0, root.j0));
        let b = lat.point((root.i1, root.j1));
        region.with_bounds([a.re, b.re, a.im, b.im])
    };
    if total < 0 {
        return Err(Error::WindingNonConvergence {
            turns: total as f64,
        });
    }

    let mut stack = vec![(root, total)];
    let mut zeros = Vec::new();
    while let Some((bx, w)) = stack.pop() {
        if w == 0 {
            continue;
        }
        let width = bx.i1 - bx.i0;
        let height = bx.j1 - bx.j0;
        if lat.diameter(&bx) < opts.tol || width < 8 || height < 8 {
            let c = lat.k_at(((bx.i0 + bx.i1) / 2, (bx.j0 + bx.j1) / 2));
            zeros.push(ZeroRecord {
                k: c,
                multiplicity: w as usize,
                radius: 0.5 * lat.diameter(&bx),
            });
            continue;
        }
        if w == 1 {
            if let Some(k) = lat.polish(&bx, opts.tol)? {
                zeros.push(ZeroRecord {
                    k,
                    multiplicity: 1,
                    radius: opts.tol,
                });
                continue;
            }
        }
        let mut accepted = None;
        let mut last_err = None;
        for attempt in 0..24 {
            let ci = bx.i0 + width / 2 + (dither(attempt, 0.0) * width as f64) as i64;
            let cj = bx.j0 + height / 2 + (dither(attempt, 0.5) * height as f64) as i64;
            let kids = [
                LatticeBox {
                    i0: bx.i0,
                    i1: ci,
                    j0: bx.j0,
                    j1: cj,
                },
                LatticeBox {
                    i0: ci,
                    i1: bx.i1,
                    j0: bx.j0,
                    j1: cj,
                },
                LatticeBox {
                    i0: bx.i0,
                    i1: ci,
                    j0: cj,
                    j1: bx.j1,
                },
                LatticeBox {
                    i0: ci,
                    i1: bx.i1,
                    j0: cj,
                    j1: bx.j1,
                },
            ];
            let mut ws = Vec::with_capacity(4);
            let mut failed = false;
            for kid in &kids {
                match lat.winding(kid, samples) {
                    Ok(v) if v >= 0 => ws.push(v),
                    Ok(v) => {
                        last_err = Some(Error::WindingNonConvergence { turns: v as f64 });
                        failed = true;
                        break;
                    }
                    Err(e @ (Error::ContourZero { .. } | Error::WindingNonConvergence { .. })) => {
                        last_err = Some(e);
                        failed = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if !failed && ws.iter().sum::<i64>() == w {
                accepted = Some(kids.into_iter().zip(ws).collect::<Vec<_>>());
                break;
            }
            if !failed {
                last_err = Some(Error::WindingNonConvergence {
                    turns: ws.iter().sum::<i64>() as f64,
                });
            }
        }
        match accepted {
            Some(kids) => stack.extend(kids.into_iter().rev()),
            None => return Err(last_err.expect("subdivision failed without an error")),
        }
    }
    zeros.sort_by(|a, b| b.k.norm().total_cmp(&a.k.norm()));
    Ok(ZeroScan {
        zeros,
        region: used,
        evaluations: lat.cache.len() + lat.extra,
    })
}

/// Jensen-type upper bound for the number of zeros of `g` in the disk `|l - center| < r_inner`,
/// from its values on `|l - center| = r_outer` and at the base point.
pub fn jensen_bound<G>(
    g: &G,
    center: Complex64,
    r_outer: f64,
    base: Complex64,
    r_inner: f64,
    samples: usize,
) -> Result<f64>
where
    G: Fn(Complex64) -> Result<Complex64> + Sync,
{
    if !(0.0 < r_inner && r_inner < r_outer) {
        return Err(invalid("need 0 < r_inner < r_outer"));
    }
    let a = (base - center) / r_outer;
    if a.norm() >= 1.0 {
        return Err(invalid("base point must lie inside the outer disk"));
    }
    let g0 = g(base)?;
    if g0 == Complex64::new(0.0, 0.0) {
        return Err(invalid("g vanishes at the base point"));
    }
    let samples = samples.max(64);
    let boundary: f64 = (0..samples)
        .into_par_iter()
        .map(|j| {
            let e = Complex64::from_polar(1.0, TAU * j as f64 / samples as f64);
            let poisson = (1.0 - a.norm_sqr()) / (e - a).norm_sqr();
            g(center + e * r_outer).map(|v| poisson * v.norm().ln())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<f64>()
        / samples as f64;
    let s = r_inner / r_outer;
    let rho = (s + a.norm()) / (1.0 + s * a.norm());
    Ok((boundary - g0.norm().ln()) / -rho.ln())
}

/// `(1 / 2 pi i) int Tr(A(k)^-1 A'(k)) dk` over the circle `|k - center| = radius`.
pub fn trace_index<A>(a: &A, center: Complex64, radius: f64, samples: usize) -> Result<Complex64>
where
    A: Fn(Complex64) -> Result<DMatrix<Complex64>> + Sync,
{
    let samples = samples.max(16);
    let h = radius * 1e-4;
    let terms = (0..samples)
        .into_par_iter()
        .map(|j| {
            let e = Complex64::from_polar(1.0, TAU * j as f64 / samples as f64);
            let k = center + e * radius;
            let m = a(k)?;
            let dm = (a(k + h)? - a(k - h)?) / Complex64::new(2.0 * h, 0.0);
            let sol = m.lu().solve(&dm).ok_or(Error::ContourZero {
                modulus: 0.0,
                at: k,
            })?;
            Ok(sol.trace() * e * radius)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(terms.into_iter().sum::<Complex64>() / samples as f64)
}

/// How an eigenvalue was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Determinant,
    Oracle,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Determinant => "determinant",
            Method::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRecord {
    pub z: Complex64,
    pub k: Complex64,
    pub multiplicity: usize,
    pub method: Method,
    /// Location uncertainty in `k` (determinant) or relative drift (oracle).
    pub residual: f64,
    pub stable: bool,
}

/// Eigenvalues `z = Lambda_q + k^2` with `k` in `region`, as zeros of the Birman-Schwinger
/// determinant.
pub fn eigenvalues_near_level(
    bs: &BirmanSchwinger,
    region: KRegion,
    opts: ScanOptions,
) -> Result<Vec<EigenvalueRecord>> {
    let f = |k: Complex64| bs.fredholm_determinant(KPoint::new(k)?);
    let scan = locate_zeros(&f, region, opts)?;
    let q = bs.basis().level;
    let b = bs.field().b;
    Ok(scan
        .zeros
        .iter()
        .map(|z| EigenvalueRecord {
            z: param_z(q, b, z.k),
            k: z.k,
            multiplicity: z.multiplicity,
            method: Method::Determinant,
            residual: z.radius,
            stable: true,
        })
        .collect())
}

/// Builds the determinant and scans one region.
pub fn scan_level(
    pot: &SeparablePotential,
    field: MagneticField,
    basis: GalerkinBasis,
    region: KRegion,
    opts: ScanOptions,
) -> Result<Vec<EigenvalueRecord>> {
    if pot.epsilon == 0.0 {
        return Ok(Vec::new());
    }
    let bs = BirmanSchwinger::new(pot, field, basis)?;
    eigenvalues_near_level(&bs, region, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(roots: &'static [(f64, f64)]) -> impl Fn(Complex64) -> Result<Complex64> + Sync {
        move |z| {
            Ok(roots.iter().fold(Complex64::new(1.0, 0.0), |p, r| {
                p * (z - Complex64::new(r.0, r.1))
            }))
        }
    }

    fn square(c: Complex64, h: f64) -> Vec<Complex64> {
        vec![
            c + Complex64::new(-h, -h),
            c + Complex64::new(h, -h),
            c + Complex64::new(h, h),
            c + Complex64::new(-h, h),
        ]
    }

    #[test]
    fn winding_examples() {
        let f = |z: Complex64| Ok(z);
        assert_eq!(
            winding_index(&f, &square(Complex64::new(0.0, 0.0), 1.0), 8).unwrap(),
            1
        );
        let g = |z: Complex64| Ok(z * z * z);
        assert_eq!(
            winding_index(&g, &square(Complex64::new(0.0, 0.0), 1.0), 8).unwrap(),
            3
        );
        assert_eq!(
            winding_index(&f, &square(Complex64::new(3.0, 0.0), 1.0), 8).unwrap(),
            0
        );
    }

    #[test]
    fn winding_reports_zero_on_contour() {
        let f = |z: Complex64| Ok(z - Complex64::new(1.0, 0.0));
        let err = winding_index(&f, &square(Complex64::new(0.0, 0.0), 1.0), 8).unwrap_err();
        assert!(matches!(err, Error::ContourZero { .. }), "{err}");
    }

    #[test]
    fn locate_simple_and_double_zeros() {
        let f = poly(&[(0.3, 0.2), (0.3, 0.2), (-0.4, 0.1), (0.9, 0.9)]);
        let region = KRegion::Rectangle {
            re: (-1.0, 0.7),
            im: (-0.5, 0.5),
        };
        let scan = locate_zeros(
            &f,
            region,
            ScanOptions {
                tol: 1e-8,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(scan.zeros.len(), 2);
        let total: usize = scan.zeros.iter().map(|z| z.multiplicity).sum();
        assert_eq!(total, 3);
        for z in &scan.zeros {
            let target = if z.multiplicity == 2 {
                Complex64::new(0.3, 0.2)
            } else {
                Complex64::new(-0.4, 0.1)
            };
            assert!((z.k - target).norm() < 1e-8);
        }
    }

    #[test]
    fn zero_on_subdivision_line_is_dithered() {
        // The first split of [-1, 1]^2 passes through the origin.
        let f = poly(&[(0.0, 0.0), (0.5, -0.25)]);
        let region = KRegion::Rectangle {
            re: (-1.0, 1.0),
            im: (-1.0, 1.0),
        };
        let scan = locate_zeros(
            &f,
            region,
            ScanOptions {
                tol: 1e-9,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(scan.zeros.len(), 2);
        assert!(scan.zeros.iter().any(|z| z.k.norm() < 1e-9));
    }

    #[test]
    fn annular_sector_region() {
        let f = poly(&[(0.01, 0.012), (0.1, 0.05), (-0.2, 0.2)]);
        let region = KRegion::AnnularSector {
            r: (1e-3, 0.5),
            theta: (0.05, 1.5),
        };
        let scan = locate_zeros(
            &f,
            region,
            ScanOptions {
                tol: 1e-9,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(scan.zeros.len(), 2);
        assert!(scan
            .zeros
            .iter()
            .any(|z| (z.k - Complex64::new(0.01, 0.012)).norm() < 1e-9));
    }

    #[test]
    fn empty_region() {
        let f = |z: Complex64| Ok(z.exp());
        let region = KRegion::Rectangle {
            re: (-1.0, 1.0),
            im: (-1.0, 1.0),
        };
        assert!(locate_zeros(&f, region, ScanOptions::default())
            .unwrap()
            .zeros
            .is_empty());
    }

    #[test]
    fn jensen_bounds_count() {
        let c0 = Complex64::new(0.2, -0.1);
        let g = move |l: Complex64| Ok(l - c0);
        let origin = Complex64::new(0.0, 0.0);
        let centered = jensen_bound(&g, origin, 2.0, origin, 0.5, 512).unwrap();
        assert!(centered >= 1.0 - 1e-9, "{centered}");
        let shifted = jensen_bound(&g, origin, 2.0, Complex64::new(0.0, 0.45), 0.5, 512).unwrap();
        assert!(shifted >= 1.0 - 1e-9, "{shifted}");
        let g10 = move |l: Complex64| Ok((l - c0) * 10.0);
        let scaled = jensen_bound(&g10, origin, 2.0, origin, 0.5, 512).unwrap();
        assert!((scaled - centered).abs() < 1e-9);
        let free = |l: Complex64| Ok(l.exp());
        assert!(
            jensen_bound(&free, origin, 2.0, origin, 0.5, 512)
                .unwrap()
                .abs()
                < 1e-9
        );
    }

    #[test]
    fn trace_index_counts_matrix_zeros() {
        let a = |k: Complex64| {
            Ok(DMatrix::from_row_slice(
                2,
                2,
                &[
                    k - Complex64::new(0.1, 0.0),
                    Complex64::new(0.3, 0.0),
                    Complex64::new(0.0, 0.0),
                    (k - Complex64::new(0.0, 0.2)) * (k + 0.05),
                ],
            ))
        };
        let idx = trace_index(&a, Complex64::new(0.0, 0.0), 0.5, 256).unwrap();
        assert!((idx - Complex64::new(3.0, 0.0)).norm() < 1e-6, "{idx}");
        let det = |k: Complex64| a(k).map(|m| m.determinant());
        let contour: Vec<Complex64> = (0..64)
            .map(|j| Complex64::from_polar(0.5, TAU * j as f64 / 64.0))
            .collect();
        assert_eq!(winding_index(&det, &contour, 4).unwrap(), 3);
    }
}
