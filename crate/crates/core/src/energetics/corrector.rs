//! The correctors Ψ and Ψ̃, the main-part quotients they subtract, and the
//! exhaustive corrector audits over Λ₁₁ / Λ₁₂ configurations in d = 1.

use serde::{Deserialize, Serialize};

use super::WeightParams;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::lattice::{CutoffProfile, Mode};
use crate::params::ModelParams;
use crate::resonance::{pow2s, SixTuple};

/// Relative slack on the magnitude inequalities.
const SLACK: f64 = 1e-12;

/// (|k₁|^{2s}−|k₂|^{2s})/(|k₁|²−|k₂|²)·(1−χ((|k₁|²−|k₂|²)/(|k₁|²+|k₂|²)^{δ0/2})).
///
/// At |k₁| = |k₂| the quotient is taken as its limit s|k₁|^{2s−2}; the
/// cutoff factor vanishes there, so the product is 0.
pub fn main_quotient_11(k1: &Mode, k2: &Mode, s: f64, delta0: f64, bump: &CutoffProfile) -> f64 {
    let (a, b) = (k1.norm_sq(), k2.norm_sq());
    let diff = a - b;
    let sum = (a + b) as f64;
    if diff == 0 || sum == 0.0 {
        // The limit s|k₁|^{2s−2} times the vanishing factor 1 − χ(0).
        let limit = s * (a as f64).powf(s - 1.0);
        return limit * (1.0 - bump.eval(0.0));
    }
    let cut = 1.0 - bump.eval(diff as f64 / sum.powf(0.5 * delta0));
    // Same operation order as the far-branch weight, so the two coincide
    // bitwise on two-mode data.
    cut * (pow2s(a, s) - pow2s(b, s)) / diff as f64
}

/// (|k₁|^{2s}+|k₃|^{2s})/(|k₁|²+|k₃|²), 0 when both modes vanish.
pub fn main_quotient_12(k1: &Mode, k3: &Mode, s: f64) -> f64 {
    let (a, b) = (k1.norm_sq(), k3.norm_sq());
    if a + b == 0 {
        return 0.0;
    }
    (pow2s(a, s) + pow2s(b, s)) / (a + b) as f64
}

/// Ψ(k⃗) = (1−χ(Ω/λ^{δ0}))ψ_{2s}/Ω − [main quotient of (k₁, k₂)].
pub fn corrector_psi(k: &[Mode; 6], s: f64, delta0: f64, bump: &CutoffProfile) -> f64 {
    let w = WeightParams { s, delta0, bump: *bump };
    w.far(k) - main_quotient_11(&k[0], &k[1], s, delta0, bump)
}

/// Ψ̃(k⃗) = ψ_{2s}/Ω − (|k₁|^{2s}+|k₃|^{2s})/(|k₁|²+|k₃|²); requires Ω ≠ 0.
pub fn corrector_psi_tilde(k: &[Mode; 6], s: f64) -> Result<f64> {
    let t = SixTuple { k: *k };
    let omega = t.omega();
    if omega == 0 {
        return Err(Error::Constraint(
            "Ψ̃ is undefined at Ω = 0 (such tuples cannot lie in Λ₁₂)".into(),
        ));
    }
    Ok(t.psi2s(s) / omega as f64 - main_quotient_12(&k[0], &k[2], s))
}

/// Ψ̃ with the far-branch weight in place of ψ_{2s}/Ω; total (0 at Ω = 0
/// minus the main quotient). This is the form whose Λ₁₂ sum is I(w).
pub fn psi_tilde_dressed(k: &[Mode; 6], s: f64, delta0: f64, bump: &CutoffProfile) -> f64 {
    let w = WeightParams { s, delta0, bump: *bump };
    w.far(k) - main_quotient_12(&k[0], &k[2], s)
}

/// Result of an exhaustive corrector audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectorAudit {
    pub kmax: i32,
    pub tuples: u64,
    /// max |corrector|·|Ω| / (|k_(1)|^{2s−2}|k_(3)|²) over all audited tuples.
    pub max_ratio: f64,
    pub argmax: Option<[i32; 6]>,
    /// Same maximum restricted to |Ω| ≥ |k_(1)|^{δ0}.
    pub max_ratio_far: f64,
    pub argmax_far: Option<[i32; 6]>,
    /// Tuples with vanishing denominator and vanishing numerator.
    pub skipped_zero: u64,
    /// Tuples skipped because the corrector is undefined (Ω = 0 for Ψ̃).
    pub skipped_undefined: u64,
}

impl CorrectorAudit {
    fn new(kmax: i32) -> Self {
        CorrectorAudit {
            kmax,
            tuples: 0,
            max_ratio: 0.0,
            argmax: None,
            max_ratio_far: 0.0,
            argmax_far: None,
            skipped_zero: 0,
            skipped_undefined: 0,
        }
    }

    fn merge(mut self, o: CorrectorAudit) -> Self {
        if o.max_ratio > self.max_ratio {
            self.max_ratio = o.max_ratio;
            self.argmax = o.argmax;
        }
        if o.max_ratio_far > self.max_ratio_far {
            self.max_ratio_far = o.max_ratio_far;
            self.argmax_far = o.argmax_far;
        }
        self.tuples += o.tuples;
        self.skipped_zero += o.skipped_zero;
        self.skipped_undefined += o.skipped_undefined;
        self
    }

    fn record(&mut self, k: [i32; 6], value: Option<f64>, s: f64, delta0: f64) {
        self.tuples += 1;
        let Some(v) = value else {
            self.skipped_undefined += 1;
            return;
        };
        let t = SixTuple { k: k.map(Mode::d1) };
        let omega = t.omega().abs() as f64;
        let mut sq = k.map(|x| (x as i64) * (x as i64));
        sq.sort_unstable_by(|a, b| b.cmp(a));
        let num = v.abs() * omega;
        let den = pow2s(sq[0], s - 1.0) * sq[2] as f64;
        let ratio = if den == 0.0 {
            if num == 0.0 {
                self.skipped_zero += 1;
                return;
            }
            f64::INFINITY
        } else {
            num / den
        };
        if ratio > self.max_ratio {
            self.max_ratio = ratio;
            self.argmax = Some(k);
        }
        if omega >= (sq[0] as f64).powf(0.5 * delta0) && ratio > self.max_ratio_far {
            self.max_ratio_far = ratio;
            self.argmax_far = Some(k);
        }
    }
}

/// All triples (a, b, c) of integers with |a|+|b|+|c|+|solve(a,b,c)| ≤ bound.
fn small_outer(bound: f64, target: i32, solve: impl Fn(i32, i32, i32) -> i32, mut f: impl FnMut(i32, i32, i32, i32)) {
    let r = (bound * (1.0 + SLACK) + SLACK).floor() as i32;
    let lim = bound * (1.0 + SLACK) + SLACK;
    let _ = target;
    for a in -r..=r {
        for b in -(r - a.abs())..=(r - a.abs()) {
            let ab = a.abs() + b.abs();
            for c in -(r - ab)..=(r - ab) {
                let d = solve(a, b, c);
                if (ab + c.abs() + d.abs()) as f64 <= lim {
                    f(a, b, c, d);
                }
            }
        }
    }
}

/// Exhaustive d = 1 audit of Ψ over Λ₁₁ configurations: root k₁ and paired
/// k₂ in [−kmax, kmax], outer small leaves k₃…k₆ with Σ|k_j| ≤ |k₁|^θ+|k₂|^θ
/// (an admissible inner generation then always exists).
pub fn corrector_audit_psi(kmax: i32, params: &ModelParams, mode: ExecMode) -> CorrectorAudit {
    let (s, d0, th, bump) = (params.s, params.delta0, params.theta, params.bump_profile);
    let side = (2 * kmax + 1) as usize;
    let parts = map_indexed(side, mode, |i| {
        let k1 = i as i32 - kmax;
        let mut acc = CorrectorAudit::new(kmax);
        for k2 in -kmax..=kmax {
            let bound = (k1.abs() as f64).powf(th) + (k2.abs() as f64).powf(th);
            // k₆ = k₁ − k₂ + k₃ − k₄ + k₅
            small_outer(bound, 0, |k3, k4, k5| k1 - k2 + k3 - k4 + k5, |k3, k4, k5, k6| {
                let k = [k1, k2, k3, k4, k5, k6];
                let v = corrector_psi(&k.map(Mode::d1), s, d0, &bump);
                acc.record(k, Some(v), s, d0);
            });
        }
        acc
    });
    parts.into_iter().fold(CorrectorAudit::new(kmax), CorrectorAudit::merge)
}

/// Exhaustive d = 1 audit of Ψ̃ over Λ₁₂ configurations: root k₁ and paired
/// k₃ in [−kmax, kmax], outer small leaves k₂, k₄, k₅, k₆ with
/// Σ|k_j| ≤ |k₁|^θ+|k₃|^θ. Tuples with Ω = 0 are counted as undefined.
pub fn corrector_audit_psi_tilde(kmax: i32, params: &ModelParams, mode: ExecMode) -> CorrectorAudit {
    let (s, d0, th) = (params.s, params.delta0, params.theta);
    let side = (2 * kmax + 1) as usize;
    let parts = map_indexed(side, mode, |i| {
        let k1 = i as i32 - kmax;
        let mut acc = CorrectorAudit::new(kmax);
        for k3 in -kmax..=kmax {
            let bound = (k1.abs() as f64).powf(th) + (k3.abs() as f64).powf(th);
            small_outer(bound, 0, |k2, k4, k5| k1 - k2 + k3 - k4 + k5, |k2, k4, k5, k6| {
                let k = [k1, k2, k3, k4, k5, k6];
                let v = corrector_psi_tilde(&k.map(Mode::d1), s).ok();
                acc.record(k, v, s, d0);
            });
        }
        acc
    });
    parts.into_iter().fold(CorrectorAudit::new(kmax), CorrectorAudit::merge)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d1(k: [i32; 6]) -> [Mode; 6] {
        k.map(Mode::d1)
    }

    #[test]
    fn psi_vanishes_without_small_leaves() {
        let p = ModelParams::default();
        let b = p.bump_profile;
        for k1 in [-40, -3, 0, 1, 7, 60] {
            for k2 in [-60, -7, 0, 2, 7, 55] {
                // Two-mode data: Ω = |k₁|²−|k₂|², λ² = |k₁|²+|k₂|².
                let v = corrector_psi(&d1([k1, k2, 0, 0, 0, 0]), p.s, p.delta0, &b);
                assert_eq!(v, 0.0, "k1={k1} k2={k2}");
            }
        }
        // |k₁| = |k₂|: Ω = 0 and both branch factors vanish.
        assert_eq!(corrector_psi(&d1([9, -9, 0, 0, 0, 0]), p.s, p.delta0, &b), 0.0);
    }

    #[test]
    fn psi_tilde_vanishes_without_small_leaves() {
        for (k1, k3) in [(5, -5), (12, 3), (-60, 41), (7, 0)] {
            let v = corrector_psi_tilde(&d1([k1, 0, k3, 0, 0, 0]), 10.0).unwrap();
            assert_eq!(v, 0.0);
        }
        assert!(matches!(
            corrector_psi_tilde(&d1([0; 6]), 10.0),
            Err(Error::Constraint(_))
        ));
    }

    #[test]
    fn equal_magnitude_limit_is_multiplied_by_zero() {
        let b = CutoffProfile::scalar();
        assert_eq!(main_quotient_11(&Mode::d1(4), &Mode::d1(-4), 10.0, 0.6, &b), 0.0);
        let q = main_quotient_11(&Mode::d1(5), &Mode::d1(1), 2.0, 0.6, &b);
        assert!((q - 26.0).abs() < 1e-12, "(625-1)/24 = 26 with cutoff 1, got {q}");
    }

    #[test]
    fn audits_are_finite_and_mode_independent() {
        let p = ModelParams::default();
        let a = corrector_audit_psi(12, &p, ExecMode::Sequential);
        let b = corrector_audit_psi(12, &p, ExecMode::Parallel);
        assert_eq!(a, b);
        assert!(a.max_ratio.is_finite() && a.tuples > 0);
        let c = corrector_audit_psi_tilde(12, &p, ExecMode::default());
        assert!(c.max_ratio.is_finite());
    }
}
