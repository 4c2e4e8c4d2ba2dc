use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Smooth monotone bump: 1 on `[0, plateau]`, 0 on `[support, ∞)`, and
/// `g(r₁−r) / (g(r₁−r) + g(r−r₀))` in between with `g(t) = e^{−1/t}` for
/// `t > 0`, `g(t) = 0` otherwise. The transition is C^∞.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffProfile {
    /// r₀: the profile equals 1 for r ≤ r₀.
    pub plateau: f64,
    /// r₁: the profile equals 0 for r ≥ r₁.
    pub support: f64,
}

#[inline]
fn g(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

impl CutoffProfile {
    pub const fn new(plateau: f64, support: f64) -> Self {
        CutoffProfile { plateau, support }
    }

    /// Scalar bump with r₀ = 1/2, r₁ = 1 (resonance and ball cutoffs).
    pub const fn scalar() -> Self {
        CutoffProfile::new(0.5, 1.0)
    }

    /// Radial profile of S_N: r₀ = 0.87 (so the cube [−½,½]³ lies inside the
    /// plateau), r₁ = 1.
    pub const fn radial() -> Self {
        CutoffProfile::new(0.87, 1.0)
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if self.plateau > 0.0 && self.plateau < self.support && self.support.is_finite() {
            Ok(())
        } else {
            Err(Error::Param(format!(
                "{name}: need 0 < plateau < support (got {} / {})",
                self.plateau, self.support
            )))
        }
    }

    /// Profile value at r ≥ 0 (negative r is treated as |r|).
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if r <= self.plateau {
            1.0
        } else if r >= self.support {
            0.0
        } else {
            let a = g(self.support - r);
            let b = g(r - self.plateau);
            a / (a + b)
        }
    }
}

/// `smooth_cutoff(r, profile)` as a free function.
pub fn smooth_cutoff(r: f64, profile: &CutoffProfile) -> f64 {
    profile.eval(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_support_and_midpoint() {
        let p = CutoffProfile::scalar();
        assert_eq!(p.eval(0.3), 1.0);
        assert_eq!(p.eval(1.2), 0.0);
        // Symmetric transition: g(1/4)/(g(1/4)+g(1/4)) = 1/2 exactly.
        assert_eq!(smooth_cutoff(0.75, &p), 0.5);
        // Off-centre value: 1 / (1 + exp(1/0.4 - 1/0.1)).
        let v = p.eval(0.6);
        let expected = 1.0 / (1.0 + (1.0f64 / 0.4 - 1.0 / 0.1).exp());
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn strictly_decreasing_on_transition() {
        for p in [CutoffProfile::scalar(), CutoffProfile::radial()] {
            // Near the breakpoints e^{-1/t} underflows relative to 1, so the
            // strict check runs on the interior and monotonicity everywhere.
            let w = p.support - p.plateau;
            let mut prev = 1.0;
            let steps = 2000;
            for i in 1..steps {
                let r = p.plateau + w * i as f64 / steps as f64;
                let v = p.eval(r);
                assert!((0.0..=1.0).contains(&v) && v <= prev);
                if r > p.plateau + 0.3 * w && r < p.support - 0.3 * w {
                    assert!(v < prev);
                }
                prev = v;
            }
        }
    }

    #[test]
    fn numerically_c1_across_the_breakpoints() {
        let p = CutoffProfile::scalar();
        let h = 1e-4;
        let d = |r: f64| (p.eval(r + h) - p.eval(r - h)) / (2.0 * h);
        for r in [p.plateau, p.support] {
            assert!((d(r - h) - d(r + h)).abs() < 1e-6, "r = {r}");
            assert!(d(r).abs() < 1e-6);
        }
    }
}
