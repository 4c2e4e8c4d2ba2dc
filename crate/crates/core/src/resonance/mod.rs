//! Resonance-function arithmetic, constrained tuple enumeration, pairing
//! classification and brute-force lattice audits.
//!
//! A six-tuple `(k₁,…,k₆)` carries the alternating signature `(+,−,+,−,+,−)`
//! and satisfies `k₁−k₂+k₃−k₄+k₅−k₆ = 0`. Its resonance function is
//! `Ω = Σ(−1)^{j−1}|k_j|²`, its weight density `ψ_{2s} = Σ(−1)^{j−1}|k_j|^{2s}`
//! and its symmetric factor `λ = (Σ|k_j|²)^{1/2}`.

mod audit;
mod second_gen;

pub use audit::{
    counting_audit, counting_family_scan, psi_bound_audit, psi_bound_scan, CountingFamily, CountingQuery,
    CountingResult, FamilyScan, PsiBoundResult,
};
pub use second_gen::{
    classify, classify_six, enumerate_second_gen, for_each_second_gen, slot_contains, slots, Family,
    PairingClass, SecondGenTuple, Slot, SlotKind,
};

use crate::error::{check_budget, Error, Result};
use crate::lattice::{CutoffProfile, Mode, ModeSet};

/// Alternating signature of the six outer positions.
pub const SIX_SIGNS: [i64; 6] = [1, -1, 1, -1, 1, -1];

/// |k|^{2s} computed from |k|² (0 at the origin).
#[inline]
pub fn pow2s(norm_sq: i64, s: f64) -> f64 {
    (norm_sq as f64).powf(s)
}

/// Which branch of the resonance cutoff to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// χ(Ω/λ^{δ0})·ψ_{2s}: the nearly resonant part.
    Near,
    /// (1−χ(Ω/λ^{δ0}))·ψ_{2s}/Ω: the non-resonant part, 0 when Ω = 0.
    Far,
}

/// χ(Ω/λ^{δ0}) from Ω and λ²; 0 when λ = 0 (only the all-zero tuple).
#[inline]
pub fn resonance_chi(omega: i64, lambda_sq: f64, delta0: f64, bump: &CutoffProfile) -> f64 {
    if lambda_sq == 0.0 {
        return 0.0;
    }
    bump.eval(omega as f64 / lambda_sq.powf(0.5 * delta0))
}

/// Near-branch weight χ(Ω/λ^{δ0})·ψ.
#[inline]
pub fn near_weight(omega: i64, psi: f64, lambda_sq: f64, delta0: f64, bump: &CutoffProfile) -> f64 {
    if lambda_sq == 0.0 {
        return 0.0;
    }
    resonance_chi(omega, lambda_sq, delta0, bump) * psi
}

/// Far-branch weight (1−χ(Ω/λ^{δ0}))·ψ/Ω, defined as 0 when Ω = 0.
#[inline]
pub fn far_weight(omega: i64, psi: f64, lambda_sq: f64, delta0: f64, bump: &CutoffProfile) -> f64 {
    if omega == 0 || lambda_sq == 0.0 {
        return 0.0;
    }
    (1.0 - resonance_chi(omega, lambda_sq, delta0, bump)) * psi / omega as f64
}

/// A zero-sum six-tuple with alternating signature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SixTuple {
    pub k: [Mode; 6],
}

impl SixTuple {
    /// Builds a tuple, rejecting violations of the zero-sum constraint.
    pub fn new(k: [Mode; 6]) -> Result<SixTuple> {
        let sum = k[0] - k[1] + k[2] - k[3] + k[4] - k[5];
        if !sum.is_zero() {
            return Err(Error::Constraint(format!(
                "six-tuple violates k1-k2+k3-k4+k5-k6 = 0 (sum {sum})"
            )));
        }
        Ok(SixTuple { k })
    }

    /// One-dimensional convenience constructor.
    pub fn d1(k: [i32; 6]) -> Result<SixTuple> {
        SixTuple::new(k.map(Mode::d1))
    }

    /// Ω = Σ(−1)^{j−1}|k_j|².
    pub fn omega(&self) -> i64 {
        self.k.iter().zip(SIX_SIGNS).map(|(m, s)| s * m.norm_sq()).sum()
    }

    /// ψ_{2s} = Σ(−1)^{j−1}|k_j|^{2s}.
    pub fn psi2s(&self, s: f64) -> f64 {
        self.k
            .iter()
            .zip(SIX_SIGNS)
            .fold(0.0, |acc, (m, sg)| acc + sg as f64 * pow2s(m.norm_sq(), s))
    }

    /// λ² = Σ|k_j|².
    pub fn lambda_sq(&self) -> f64 {
        self.k.iter().map(|m| m.norm_sq()).sum::<i64>() as f64
    }

    /// λ = (Σ|k_j|²)^{1/2}.
    pub fn lambda(&self) -> f64 {
        self.lambda_sq().sqrt()
    }

    /// Resonance weight on the requested branch.
    pub fn weight(&self, s: f64, delta0: f64, branch: Branch, bump: &CutoffProfile) -> f64 {
        let (om, psi, l2) = (self.omega(), self.psi2s(s), self.lambda_sq());
        match branch {
            Branch::Near => near_weight(om, psi, l2, delta0, bump),
            Branch::Far => far_weight(om, psi, l2, delta0, bump),
        }
    }

    /// Norms |k_j| sorted in decreasing order.
    pub fn sorted_norms(&self) -> [f64; 6] {
        let mut n = self.k.map(|m| m.norm());
        n.sort_by(|a, b| b.partial_cmp(a).unwrap());
        n
    }

    /// Swap of odd and even positions: (k₂,k₁,k₄,k₃,k₆,k₅).
    pub fn swapped(&self) -> SixTuple {
        let k = self.k;
        SixTuple {
            k: [k[1], k[0], k[3], k[2], k[5], k[4]],
        }
    }
}

/// `resonance_weight(t, s, δ0, branch)` with the scalar bump profile.
pub fn resonance_weight(t: &SixTuple, s: f64, delta0: f64, branch: Branch, bump: &CutoffProfile) -> f64 {
    t.weight(s, delta0, branch, bump)
}

/// Iterator over index six-tuples `[i₁,…,i₆]` into `set` with zero sum.
///
/// Five indices run over the set in row-major order; the sixth is solved as
/// `k₆ = k₁−k₂+k₃−k₄+k₅` and the tuple is emitted only if it lies in the set.
pub fn six_tuple_indices(set: &ModeSet) -> impl Iterator<Item = [usize; 6]> + '_ {
    let n = set.len();
    let total = (n as u64).pow(5);
    (0..total).filter_map(move |code| {
        let mut c = code;
        let mut idx = [0usize; 6];
        for slot in (0..5).rev() {
            idx[slot] = (c % n as u64) as usize;
            c /= n as u64;
        }
        let m = set.modes();
        let k6 = m[idx[0]] - m[idx[1]] + m[idx[2]] - m[idx[3]] + m[idx[4]];
        set.index_of(&k6).map(|i6| {
            idx[5] = i6;
            idx
        })
    })
}

/// Every zero-sum six-tuple from `set`, each exactly once.
pub fn enumerate_six_tuples(set: &ModeSet) -> impl Iterator<Item = SixTuple> + '_ {
    six_tuple_indices(set).map(move |idx| SixTuple {
        k: idx.map(|i| set.modes()[i]),
    })
}

/// [`enumerate_six_tuples`] guarded by a visit budget (|set|⁵ candidates).
pub fn enumerate_six_tuples_budgeted(set: &ModeSet, budget: u64) -> Result<impl Iterator<Item = SixTuple> + '_> {
    check_budget((set.len() as u64).saturating_pow(5), budget)?;
    Ok(enumerate_six_tuples(set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::modes_within;

    #[test]
    fn omega_psi_lambda_examples() {
        let t = SixTuple::d1([3, 1, 1, 2, 1, 2]).unwrap();
        assert_eq!(t.omega(), 2);
        assert_eq!(t.psi2s(1.0), 2.0);
        assert_eq!(t.psi2s(2.0), 50.0);
        assert!((t.lambda() - 20f64.sqrt()).abs() < 1e-15);
        let z = SixTuple::d1([0; 6]).unwrap();
        assert_eq!(z.omega(), 0);
        assert_eq!(z.lambda(), 0.0);
        let p = SixTuple::d1([5, 5, 2, 2, 7, 7]).unwrap();
        assert_eq!(p.omega(), 0);
        assert_eq!(p.psi2s(10.0), 0.0);
        assert!(SixTuple::d1([1, 0, 0, 0, 0, 0]).is_err());
    }

    #[test]
    fn branch_conventions() {
        let b = CutoffProfile::scalar();
        let z = SixTuple::d1([0; 6]).unwrap();
        assert_eq!(z.weight(10.0, 0.6, Branch::Near, &b), 0.0);
        assert_eq!(z.weight(10.0, 0.6, Branch::Far, &b), 0.0);
        // Ω = 0 ⇒ far weight 0.
        let t = SixTuple::d1([2, 1, 1, 2, 0, 0]).unwrap();
        assert_eq!(t.omega(), 0);
        assert_eq!(t.weight(10.0, 0.6, Branch::Far, &b), 0.0);
        // |Ω| ≥ λ^{δ0} ⇒ near weight 0.
        let t = SixTuple::d1([3, 1, 1, 2, 1, 2]).unwrap();
        let big = SixTuple::d1([4, 0, 0, 2, 0, 2]).unwrap();
        assert!(big.omega().abs() as f64 >= big.lambda().powf(0.6));
        assert_eq!(big.weight(10.0, 0.6, Branch::Near, &b), 0.0);
        let far = t.weight(10.0, 0.6, Branch::Far, &b);
        let chi = b.eval(2.0 / 20f64.powf(0.3));
        assert!((far - (1.0 - chi) * t.psi2s(10.0) / 2.0).abs() < 1e-9 * far.abs());
    }

    #[test]
    fn swap_flips_omega_and_psi_and_keeps_quotient() {
        let t = SixTuple::d1([3, 1, 1, 2, 1, 2]).unwrap();
        let u = t.swapped();
        assert_eq!(u.omega(), -t.omega());
        assert_eq!(u.psi2s(10.0), -t.psi2s(10.0));
        let b = CutoffProfile::scalar();
        assert_eq!(u.weight(10.0, 0.6, Branch::Far, &b), t.weight(10.0, 0.6, Branch::Far, &b));
    }

    fn naive_count(set: &ModeSet) -> usize {
        let m = set.modes();
        let n = m.len();
        let mut count = 0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        for e in 0..n {
                            for f in 0..n {
                                if (m[a] - m[b] + m[c] - m[d] + m[e] - m[f]).is_zero() {
                                    count += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn enumeration_matches_six_loop_oracle() {
        let zero = ModeSet::from_modes(1, vec![Mode::ZERO]).unwrap();
        assert_eq!(enumerate_six_tuples(&zero).count(), 1);
        for n in 1..=4 {
            let set = ModeSet::ball(1, n as f64).unwrap();
            assert_eq!(enumerate_six_tuples(&set).count(), naive_count(&set), "N={n}");
        }
        let set = ModeSet::ball(3, 1.0).unwrap();
        assert_eq!(enumerate_six_tuples(&set).count(), naive_count(&set));
    }

    #[test]
    fn enumeration_is_order_invariant_and_unique() {
        let mut modes = modes_within(2.0, 1).unwrap();
        let a: std::collections::HashSet<_> =
            enumerate_six_tuples(&ModeSet::from_modes(1, modes.clone()).unwrap()).collect();
        modes.reverse();
        let set = ModeSet::from_modes(1, modes).unwrap();
        let b: Vec<_> = enumerate_six_tuples(&set).collect();
        assert_eq!(a.len(), b.len());
        assert!(b.iter().all(|t| a.contains(t)));
    }

    #[test]
    fn budget_guard_fails_loudly() {
        let set = ModeSet::ball(1, 10.0).unwrap();
        assert!(matches!(
            enumerate_six_tuples_budgeted(&set, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
