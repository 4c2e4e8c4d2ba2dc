//! The model parameter pack and its admissibility constraints.

use crate::error::{Error, Result};
use crate::lattice::{CutoffProfile, Mode};
use serde::{Deserialize, Serialize};

/// Parameters of the truncated model.
///
/// Admissibility (checked by [`ModelParams::validate`]):
/// `0 < δ0 < 2/3`, `0 < θ ≤ δ0/2`, `σ < s − d/2`, `s ≥ 1`, `N ≥ 1`, `R > 0`.
///
/// The θ bound is closed: the default pair θ = 0.3, δ0 = 0.6 sits exactly on
/// θ = δ0/2, and every desk-scale target is stated for those defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Spatial dimension d ∈ {1, 2, 3}.
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Sobolev regularity of the Gaussian measure.
    #[serde(default = "default_s")]
    pub s: f64,
    /// Regularity of the H^σ ball and diagnostics.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Frequency truncation level N.
    #[serde(default = "default_n")]
    pub n: u32,
    /// Resonance-cutoff exponent δ0.
    #[serde(default = "default_delta0")]
    pub delta0: f64,
    /// Pairing smallness exponent θ.
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// Radius R of the H^σ ball.
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Radial profile of the smooth frequency cutoff S_N (applied to |k|/N).
    #[serde(default = "CutoffProfile::radial")]
    pub frequency_profile: CutoffProfile,
    /// Scalar bump used in the resonance cutoff χ(Ω/λ^{δ0}) and the ball cutoff χ_R.
    #[serde(default = "CutoffProfile::scalar")]
    pub bump_profile: CutoffProfile,
    /// When true, χ_N ≡ 1 on every stored mode (the untruncated correction R_s).
    #[serde(default)]
    pub untruncated: bool,
}

fn default_dim() -> usize {
    1
}
fn default_s() -> f64 {
    10.0
}
fn default_sigma() -> f64 {
    8.4
}
fn default_n() -> u32 {
    3
}
fn default_delta0() -> f64 {
    0.6
}
fn default_theta() -> f64 {
    0.3
}
fn default_radius() -> f64 {
    10.0
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            dim: default_dim(),
            s: default_s(),
            sigma: default_sigma(),
            n: default_n(),
            delta0: default_delta0(),
            theta: default_theta(),
            radius: default_radius(),
            frequency_profile: CutoffProfile::radial(),
            bump_profile: CutoffProfile::scalar(),
            untruncated: false,
        }
    }
}

impl ModelParams {
    /// Default parameters with the given dimension and truncation level.
    pub fn with(dim: usize, n: u32) -> Self {
        ModelParams {
            dim,
            n,
            ..Default::default()
        }
    }

    /// Checks every admissibility constraint; the message names the field.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: String| Err(Error::Param(format!("{field}: {why}")));
        if !(1..=3).contains(&self.dim) {
            return bad("dim", format!("must be 1, 2 or 3 (got {})", self.dim));
        }
        if !(self.s.is_finite() && self.s >= 1.0) {
            return bad("s", format!("must be a real ≥ 1 (got {})", self.s));
        }
        if !(self.sigma.is_finite() && self.sigma < self.s - self.dim as f64 / 2.0) {
            return bad(
                "sigma",
                format!(
                    "must satisfy sigma < s - d/2 = {} (got {})",
                    self.s - self.dim as f64 / 2.0,
                    self.sigma
                ),
            );
        }
        if self.n == 0 {
            return bad("n", "must be a positive integer".into());
        }
        if !(self.delta0 > 0.0 && self.delta0 < 2.0 / 3.0) {
            return bad("delta0", format!("must lie in (0, 2/3) (got {})", self.delta0));
        }
        if !(self.theta > 0.0 && self.theta <= self.delta0 / 2.0) {
            return bad(
                "theta",
                format!("must lie in (0, delta0/2 = {}] (got {})", self.delta0 / 2.0, self.theta),
            );
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return bad("radius", format!("must be > 0 (got {})", self.radius));
        }
        self.frequency_profile.validate("frequency_profile")?;
        self.bump_profile.validate("bump_profile")?;
        Ok(())
    }

    /// χ_N(k) = profile(|k|/N), or 1 when the model is untruncated.
    #[inline]
    pub fn chi_n(&self, k: &Mode) -> f64 {
        if self.untruncated {
            1.0
        } else {
            self.frequency_profile.eval(k.norm() / self.n as f64)
        }
    }

    /// The scalar bump χ evaluated at |x|.
    #[inline]
    pub fn bump(&self, x: f64) -> f64 {
        self.bump_profile.eval(x.abs())
    }

    /// Smooth ball cutoff χ_R(‖u‖) = χ(‖u‖/R).
    #[inline]
    pub fn ball_cutoff(&self, norm: f64) -> f64 {
        self.bump_profile.eval(norm / self.radius)
    }

    /// Largest |k| for which χ_N(k) can be nonzero (exclusive), or `None`
    /// when untruncated.
    pub fn active_radius(&self) -> Option<f64> {
        if self.untruncated {
            None
        } else {
            Some(self.n as f64 * self.frequency_profile.support)
        }
    }
}
