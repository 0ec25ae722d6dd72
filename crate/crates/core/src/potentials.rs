//! Separable potentials `V = F(X_perp) G(x3)`, the effective transverse potential obtained by
//! integrating out `x3`, and the checks of the structural assumptions.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, QuadOptions};

/// Radial transverse profile `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TransverseProfile {
    /// `amplitude * <r>^(-decay)`.
    Power { amplitude: f64, decay: f64 },
    /// `amplitude * exp(-mu r^(2 beta))`.
    Gaussian { amplitude: f64, mu: f64, beta: f64 },
    /// `amplitude` on the disk `r <= radius`.
    Disk { amplitude: f64, radius: f64 },
}

impl TransverseProfile {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            Self::Power { amplitude, decay } => amplitude * (1.0 + r * r).powf(-0.5 * decay),
            Self::Gaussian {
                amplitude,
                mu,
                beta,
            } => amplitude * (-mu * r.powf(2.0 * beta)).exp(),
            Self::Disk { amplitude, radius } => {
                if r <= radius {
                    amplitude
                } else {
                    0.0
                }
            }
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            Self::Power { amplitude, .. }
            | Self::Gaussian { amplitude, .. }
            | Self::Disk { amplitude, .. } => amplitude,
        }
    }

    /// Radius beyond which the profile vanishes identically.
    pub fn support_radius(&self) -> Option<f64> {
        match *self {
            Self::Disk { radius, .. } => Some(radius),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Power { amplitude, decay } => amplitude > 0.0 && decay > 0.0,
            Self::Gaussian {
                amplitude,
                mu,
                beta,
            } => amplitude > 0.0 && mu > 0.0 && beta > 0.0,
            Self::Disk { amplitude, radius } => amplitude > 0.0 && radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!(
                "transverse profile parameters must be positive: {self:?}"
            )))
        }
    }
}

/// Even longitudinal profile `G` with `G(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LongitudinalProfile {
    /// `<x3>^(-decay)`.
    Power { decay: f64 },
    /// `exp(-mu x3^2)`.
    Gaussian { mu: f64 },
}

impl LongitudinalProfile {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Self::Power { decay } => (1.0 + x * x).powf(-0.5 * decay),
            Self::Gaussian { mu } => (-mu * x * x).exp(),
        }
    }

    /// Length over which the profile varies appreciably.
    pub fn length_scale(&self) -> f64 {
        match *self {
            Self::Power { .. } => 1.0,
            Self::Gaussian { mu } => 1.0 / mu.sqrt(),
        }
    }

    /// Half-width of an interval outside which `G` is below `tol` relative to its peak.
    pub fn extent(&self, tol: f64) -> f64 {
        match *self {
            Self::Power { decay } => (tol.powf(-2.0 / decay) - 1.0).max(0.0).sqrt(),
            Self::Gaussian { mu } => (-tol.ln() / mu).sqrt(),
        }
    }

    /// `int_R G(x) dx`, computed by adaptive quadrature.
    pub fn integral(&self) -> Result<f64> {
        if let Self::Power { decay } = *self {
            if decay <= 1.0 {
                return Err(Error::Integrability(format!(
                    "<x3>^-{decay} is not integrable"
                )));
            }
        }
        let g = *self;
        let half = integrate_to_infinity(|x| g.value(x), 0.0, QuadOptions::rel(1e-13))?;
        Ok(2.0 * half.value)
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Power { decay } => decay > 0.0,
            Self::Gaussian { mu } => mu > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!(
                "longitudinal profile parameters must be positive: {self:?}"
            )))
        }
    }
}

/// `W = exp(i alpha) F G`, entering the operator as `epsilon W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparablePotential {
    pub alpha: f64,
    pub epsilon: f64,
    pub transverse: TransverseProfile,
    pub longitudinal: LongitudinalProfile,
    /// Schatten exponent `p >= 2` of the Birman-Schwinger operator.
    pub schatten_p: f64,
}

impl SeparablePotential {
    pub fn new(
        alpha: f64,
        epsilon: f64,
        transverse: TransverseProfile,
        longitudinal: LongitudinalProfile,
        schatten_p: f64,
    ) -> Result<Self> {
        let pot = Self {
            alpha,
            epsilon,
            transverse,
            longitudinal,
            schatten_p,
        };
        pot.validate()?;
        Ok(pot)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(invalid(format!(
                "coupling must be non-negative, got {}",
                self.epsilon
            )));
        }
        if !self.alpha.is_finite() {
            return Err(invalid("phase alpha must be finite"));
        }
        if !(self.schatten_p >= 2.0) {
            return Err(invalid(format!(
                "Schatten exponent must be >= 2, got {}",
                self.schatten_p
            )));
        }
        self.transverse.validate()?;
        self.longitudinal.validate()
    }

    /// Same potential with another coupling.
    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..*self }
    }

    pub fn phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.alpha)
    }

    /// `sup |epsilon W|`.
    pub fn sup_norm(&self) -> f64 {
        self.epsilon * self.transverse.amplitude()
    }

    /// Regularization order `ceil(p)` of the determinant.
    pub fn det_order(&self) -> u32 {
        self.schatten_p.ceil() as u32
    }
}

/// `epsilon W(X)` at a point of `R^3`.
pub fn evaluate_w(pot: &SeparablePotential, x: [f64; 3]) -> Complex64 {
    let r = x[0].hypot(x[1]);
    pot.phase() * (pot.epsilon * pot.transverse.value(r) * pot.longitudinal.value(x[2]))
}

/// Effective transverse potential `(epsilon / 2) F(X_perp) int G`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveW {
    pub profile: TransverseProfile,
    pub scale: f64,
}

impl EffectiveW {
    pub fn from_profile(profile: TransverseProfile, scale: f64) -> Result<Self> {
        profile.validate()?;
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(invalid(format!("scale must be non-negative, got {scale}")));
        }
        Ok(Self { profile, scale })
    }

    pub fn value(&self, r: f64) -> f64 {
        self.scale * self.profile.value(r)
    }

    pub fn sup(&self) -> f64 {
        self.scale * self.profile.amplitude()
    }
}

pub fn effective_w(pot: &SeparablePotential) -> Result<EffectiveW> {
    pot.validate()?;
    let g = pot.longitudinal.integral()?;
    EffectiveW::from_profile(pot.transverse, 0.5 * pot.epsilon * g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub holds: bool,
    pub detail: String,
}

/// Outcome of the three structural checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// `F` in `L^{p/2} and L^inf`, `G` decays faster than `<x3>^-3`.
    pub integrability: AssumptionCheck,
    /// `alpha` not a multiple of `pi`.
    pub phase: AssumptionCheck,
    /// `ln W_eff(X) <= -C <X>^2`.
    pub gaussian_decay: AssumptionCheck,
    /// Least-squares decay constant of `-ln W_eff` against `<r>^2`.
    pub decay_fitted_c: Option<f64>,
    /// Largest `C` for which the bound holds on the radial grid.
    pub decay_admissible_c: Option<f64>,
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.integrability.holds && self.phase.holds && self.gaussian_decay.holds
    }
}

pub fn check_assumptions(pot: &SeparablePotential) -> Result<AssumptionReport> {
    pot.validate()?;
    let p = pot.schatten_p;

    let mut issues = Vec::new();
    if let TransverseProfile::Power { decay, .. } = pot.transverse {
        if decay * p / 2.0 <= 2.0 {
            issues.push(format!("<r>^-{decay} is not in L^{}(R^2)", p / 2.0));
        }
    }
    if let LongitudinalProfile::Power { decay } = pot.longitudinal {
        if decay <= 3.0 {
            issues.push(format!("G decays like <x3>^-{decay}, slower than <x3>^-3"));
        }
    }
    let integrability = AssumptionCheck {
        holds: issues.is_empty(),
        detail: if issues.is_empty() {
            "integrability and decay conditions satisfied".into()
        } else {
            issues.join("; ")
        },
    };

    let s = pot.alpha.sin();
    let phase = AssumptionCheck {
        holds: s.abs() > 1e-12,
        detail: format!("sin(alpha) = {s:.6e}"),
    };

    let (gaussian_decay, fitted, admissible) = if pot.epsilon == 0.0 {
        (
            AssumptionCheck {
                holds: false,
                detail: "vanishing coupling: the effective potential is identically zero".into(),
            },
            None,
            None,
        )
    } else {
        let weff = effective_w(pot)?;
        check_gaussian_decay(&weff)
    };

    Ok(AssumptionReport {
        integrability,
        phase,
        gaussian_decay,
        decay_fitted_c: fitted,
        decay_admissible_c: admissible,
    })
}

fn check_gaussian_decay(w: &EffectiveW) -> (AssumptionCheck, Option<f64>, Option<f64>) {
    let r_max = w.profile.support_radius().unwrap_or(12.0);
    let samples: Vec<(f64, f64)> = (0..=400)
        .map(|i| r_max * i as f64 / 400.0)
        .filter_map(|r| {
            let v = w.value(r);
            (v > 0.0).then(|| (1.0 + r * r, -v.ln()))
        })
        .collect();
    let n = samples.len() as f64;
    let (sx, sy) = samples
        .iter()
        .fold((0.0, 0.0), |a, s| (a.0 + s.0, a.1 + s.1));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = samples.iter().fold((0.0, 0.0), |a, s| {
        (a.0 + (s.0 - mx) * (s.1 - my), a.1 + (s.0 - mx).powi(2))
    });
    let fitted = sxy / sxx;
    let admissible = samples
        .iter()
        .map(|(x, y)| y / x)
        .fold(f64::INFINITY, f64::min);

    // Gaussian-type decay is decided by the family; the grid numbers quantify it.
    let family_ok = match w.profile {
        TransverseProfile::Gaussian { beta, .. } => beta >= 1.0,
        TransverseProfile::Disk { .. } => true,
        TransverseProfile::Power { .. } => false,
    };
    let holds = family_ok && admissible > 0.0;
    let detail = if !family_ok {
        "effective potential decays slower than a Gaussian".to_string()
    } else if admissible <= 0.0 {
        format!("sup of effective potential {:.3e} is not below 1", w.sup())
    } else {
        format!("admissible C = {admissible:.6e}")
    };
    (
        AssumptionCheck { holds, detail },
        Some(fitted),
        Some(admissible),
    )
}

/// `int_{R^2} F`, used by the counting comparators.
pub fn transverse_mass(profile: &TransverseProfile) -> Result<f64> {
    let p = *profile;
    let radial = match p.support_radius() {
        Some(r) => integrate(|s| s * p.value(s), 0.0, r, QuadOptions::rel(1e-12))?.value,
        None => integrate_to_infinity(|s| s * p.value(s), 0.0, QuadOptions::rel(1e-12))?.value,
    };
    Ok(2.0 * PI * radial)
}
