//! The modified energy, its sextic correction, the decomposition of its time
//! derivative into resonant, first- and second-generation parts, the pairing
//! contributions and their correctors, and the cancellation identities.
//!
//! Conventions: `w_k = χ_N(k) û_k` on the active band (χ_N > 0), `F_k` is the
//! Fourier coefficient of `|W|⁴W` for `W = Σ w_k e^{ik·x}`, and the truncated
//! flow reads `i∂_t û_k = |k|² û_k + χ_N(k) F_k`. Along it,
//! `d/dt E_{s,N} = Im(−R₀/6 + R₁/2 − R₂/2)` with
//!
//! * `R₀ = Σ χ(Ω/λ^{δ0}) ψ_{2s} · w₁w̄₂w₃w̄₄w₅w̄₆`,
//! * `R₁ = Σ W(k⃗) χ_N(k₁)² F_{k₁} w̄₂w₃w̄₄w₅w̄₆`,
//! * `R₂ = Σ W(k⃗) χ_N(k₂)² w₁F̄_{k₂}w₃w̄₄w₅w̄₆`,
//!
//! where `W(k⃗) = (1−χ(Ω/λ^{δ0}))ψ_{2s}/Ω` is the far-branch weight.

mod corrector;
mod pairing;
mod report;
mod table;

pub use corrector::{
    corrector_audit_psi, corrector_audit_psi_tilde, corrector_psi, corrector_psi_tilde, main_quotient_11,
    main_quotient_12, psi_tilde_dressed, CorrectorAudit,
};
pub use pairing::{ClassifiedRemainder, PairingSums, SlotCounts};
pub use report::{
    correction_r_sn, modified_energy, part_r0, part_r1, part_r2, part_s, q_fast, q_total, Complex, EnergyReport,
    Identities, Parts, RemainderSplit,
};
pub use table::{InteractionTable, TableSums};

use num_complex::Complex64;

use crate::error::{check_budget, Result};
use crate::exec::{map_chunks, ExecMode};
use crate::lattice::{CutoffProfile, Mode, ModeSet, QuinticOperator, SpectralField};
use crate::params::ModelParams;
use crate::resonance::{enumerate_second_gen, far_weight, near_weight, six_tuple_indices, Family, SIX_SIGNS};
use crate::sum::ComplexSum;

/// Resonance weight parameters (s, δ0 and the scalar bump).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightParams {
    pub s: f64,
    pub delta0: f64,
    pub bump: CutoffProfile,
}

impl WeightParams {
    pub fn from_params(p: &ModelParams) -> Self {
        WeightParams {
            s: p.s,
            delta0: p.delta0,
            bump: p.bump_profile,
        }
    }

    /// `(far, near)` weights of a six-tuple given |k_j|² and |k_j|^{2s}.
    #[inline]
    pub fn from_powers(&self, sq: &[i64; 6], pw: &[f64; 6]) -> (f64, f64) {
        let mut omega = 0i64;
        let mut lsq = 0i64;
        let mut psi = 0.0;
        for j in 0..6 {
            omega += SIX_SIGNS[j] * sq[j];
            lsq += sq[j];
            psi += SIX_SIGNS[j] as f64 * pw[j];
        }
        let l2 = lsq as f64;
        (
            far_weight(omega, psi, l2, self.delta0, &self.bump),
            near_weight(omega, psi, l2, self.delta0, &self.bump),
        )
    }

    /// `(far, near)` weights of a six-tuple of modes.
    pub fn weights(&self, k: &[Mode; 6]) -> (f64, f64) {
        let sq = k.map(|m| m.norm_sq());
        let pw = sq.map(|q| crate::resonance::pow2s(q, self.s));
        self.from_powers(&sq, &pw)
    }

    /// Far-branch weight W(k⃗).
    pub fn far(&self, k: &[Mode; 6]) -> f64 {
        self.weights(k).0
    }
}

/// The quantities every part shares: the active band, χ_N on it, the
/// weighted coefficients `w` and the quintic coefficients `F`.
#[derive(Clone, Debug)]
pub struct Interaction {
    params: ModelParams,
    weights: WeightParams,
    set: ModeSet,
    chi: Vec<f64>,
    w: Vec<Complex64>,
    f: Vec<Complex64>,
}

impl Interaction {
    /// Builds the interaction data of `u` under `params`.
    pub fn new(u: &SpectralField, params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let op = QuinticOperator::for_field(u, params, None)?;
        let set = ModeSet::from_modes(u.dim(), op.active_modes().to_vec())?;
        let w = op.weighted_active(u.coeffs());
        let f = op.quintic_of_active(&w);
        Ok(Interaction {
            params: params.clone(),
            weights: WeightParams::from_params(params),
            set,
            chi: op.chi().to_vec(),
            w,
            f,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn weight_params(&self) -> &WeightParams {
        &self.weights
    }

    /// The active band (modes with χ_N > 0).
    pub fn active_set(&self) -> &ModeSet {
        &self.set
    }

    /// χ_N on the active band.
    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    /// `w = χ_N û` on the active band.
    pub fn w(&self) -> &[Complex64] {
        &self.w
    }

    /// Coefficients of `|W|⁴W` on the active band.
    pub fn f(&self) -> &[Complex64] {
        &self.f
    }

    /// `χ_N² F` on the active band.
    pub fn chi2_f(&self) -> Vec<Complex64> {
        self.f.iter().zip(&self.chi).map(|(f, c)| f * (c * c)).collect()
    }

    #[inline]
    fn idx(&self, m: &Mode) -> Option<usize> {
        self.set.index_of(m)
    }

    /// `w_m` or `conj(w_m)` according to the conjugation sign.
    #[inline]
    fn leaf(&self, i: usize, sign: i8) -> Complex64 {
        if sign > 0 {
            self.w[i]
        } else {
            self.w[i].conj()
        }
    }

    fn n5(&self) -> u64 {
        (self.set.len() as u64).saturating_pow(5)
    }

    /// R_{s,N} by direct enumeration of all zero-sum six-tuples.
    pub fn r_sn_naive(&self, budget: u64, mode: ExecMode) -> Result<f64> {
        check_budget(self.n5(), budget)?;
        let parts = self.over_six_tuples(mode, |idx, k| {
            let (far, _) = self.weights.weights(k);
            if far == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let p = self.w[idx[0]]
                * self.w[idx[1]].conj()
                * self.w[idx[2]]
                * self.w[idx[3]].conj()
                * self.w[idx[4]]
                * self.w[idx[5]].conj();
            Complex64::new(far * p.re, 0.0)
        });
        Ok(parts.re / 6.0)
    }

    /// R₀ by direct enumeration.
    pub fn r0_naive(&self, budget: u64, mode: ExecMode) -> Result<Complex64> {
        check_budget(self.n5(), budget)?;
        Ok(self.over_six_tuples(mode, |idx, k| {
            let (_, near) = self.weights.weights(k);
            if near == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            near * self.w[idx[0]]
                * self.w[idx[1]].conj()
                * self.w[idx[2]]
                * self.w[idx[3]].conj()
                * self.w[idx[4]]
                * self.w[idx[5]].conj()
        }))
    }

    /// R₁ (or R₂) with the inner generation factorised through `F`, followed
    /// by a direct outer six-tuple sum.
    pub fn r_family_grid(&self, family: Family, budget: u64, mode: ExecMode) -> Result<Complex64> {
        check_budget(self.n5(), budget)?;
        let g = self.chi2_f();
        Ok(self.over_six_tuples(mode, |idx, k| {
            let far = self.weights.far(k);
            if far == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let w = &self.w;
            let prod = match family {
                Family::R1 => g[idx[0]] * w[idx[1]].conj(),
                Family::R2 => w[idx[0]] * g[idx[1]].conj(),
            };
            far * prod * w[idx[2]] * w[idx[3]].conj() * w[idx[4]] * w[idx[5]].conj()
        }))
    }

    /// R₁ (or R₂) by the direct nine-free-index enumeration.
    pub fn r_family_naive(&self, family: Family, budget: u64) -> Result<Complex64> {
        check_budget((self.set.len() as u64).saturating_pow(9), budget)?;
        let mut acc = ComplexSum::new();
        for t in enumerate_second_gen(&self.set, family) {
            acc.push(self.raw_term(&t));
        }
        Ok(acc.value())
    }

    /// One raw second-generation term: W(k⃗)·χ_N(root)²·(ten leaves with
    /// their conjugations).
    pub fn raw_term(&self, t: &crate::resonance::SecondGenTuple) -> Complex64 {
        let far = self.weights.far(&t.six().k);
        if far == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let root = self.idx(&t.root).expect("root in active band");
        let c = self.chi[root];
        let mut z = Complex64::new(far * c * c, 0.0);
        for (m, s) in t.inner.iter().zip(t.family.inner_signs()) {
            z *= self.leaf(self.idx(m).expect("leaf in active band"), s);
        }
        for (m, s) in t.outer.iter().zip(t.family.outer_signs()) {
            z *= self.leaf(self.idx(m).expect("leaf in active band"), s);
        }
        z
    }

    /// Sums `term` over all zero-sum six-tuples of the active band, split
    /// deterministically by the first index.
    fn over_six_tuples<F>(&self, mode: ExecMode, term: F) -> Complex64
    where
        F: Fn(&[usize; 6], &[Mode; 6]) -> Complex64 + Sync + Send,
    {
        let n = self.set.len();
        let m = self.set.modes();
        let parts = map_chunks(n, 1, mode, |r| {
            let mut acc = ComplexSum::new();
            for i0 in r {
                for rest in six_tuple_rest(&self.set, i0) {
                    let k = rest.map(|i| m[i]);
                    acc.push(term(&rest, &k));
                }
            }
            acc
        });
        parts.into_iter().fold(ComplexSum::new(), |a, b| a + b).value()
    }
}

/// Zero-sum index six-tuples whose first index is `i0`.
fn six_tuple_rest(set: &ModeSet, i0: usize) -> impl Iterator<Item = [usize; 6]> + '_ {
    let n = set.len();
    let total = (n as u64).pow(4);
    let m = set.modes();
    (0..total).filter_map(move |code| {
        let mut c = code;
        let mut idx = [i0, 0, 0, 0, 0, 0];
        for slot in (1..5).rev() {
            idx[slot] = (c % n as u64) as usize;
            c /= n as u64;
        }
        let k6 = m[idx[0]] - m[idx[1]] + m[idx[2]] - m[idx[3]] + m[idx[4]];
        set.index_of(&k6).map(|i6| {
            idx[5] = i6;
            idx
        })
    })
}

/// Sum of six-tuple counts, exposed for reports.
pub fn six_tuple_count(set: &ModeSet) -> u64 {
    six_tuple_indices(set).count() as u64
}


#[cfg(test)]
mod tests;
