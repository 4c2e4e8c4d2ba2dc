//! Assembled energy reports and the public entry points.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Interaction, InteractionTable};
use crate::error::Result;
use crate::exec::ExecMode;
use crate::lattice::SpectralField;
use crate::params::ModelParams;
use crate::resonance::{Family, SlotKind};

/// Serializable complex number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Complex {
    fn from(z: Complex64) -> Self {
        Complex { re: z.re, im: z.im }
    }
}

impl From<Complex> for Complex64 {
    fn from(z: Complex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// A remainder part: its operational value and, when the direct
/// classified enumeration was affordable, its per-class split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderSplit {
    pub operational: Complex,
    pub type_a: Option<Complex>,
    pub type_b: Option<Complex>,
    pub type_c: Option<Complex>,
    pub overlap: Option<Complex>,
    pub direct_total: Option<Complex>,
    /// Term counts of TypeA, TypeB, TypeC and slot members.
    pub counts: Option<[u64; 4]>,
    /// Multiplicities recovered from slot-membership counts (9 and 4 expected).
    pub multiplicities: Option<(f64, f64)>,
}

/// All parts of the derivative decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parts {
    pub r0: Complex,
    pub r1: Complex,
    pub r2: Complex,
    pub s11: Complex,
    pub s12: Complex,
    pub s21: Complex,
    pub s22: Complex,
    pub r13: RemainderSplit,
    pub r23: RemainderSplit,
    pub j: Complex,
    pub i: Complex,
    pub main1: Complex,
    pub main2: Complex,
}

/// Residuals of the checked identities (relative unless noted).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Identities {
    /// Q vs Im(−R₀/6 + R₁/2 − R₂/2) with R₂ from its own evaluation.
    pub q_from_parts: f64,
    /// R₂ vs conj(R₁).
    pub r2_conjugate: f64,
    /// R₁ − 9S₁₁ − 4S₁₂ − R₁₃(direct).
    pub r1_decomposition: Option<f64>,
    pub r2_decomposition: Option<f64>,
    /// Table path vs grid-factorised path for R₁.
    pub r1_dual_path: Option<f64>,
    /// Im(S₁₁ − S₂₁) vs Im J.
    pub cancellation_11: f64,
    /// Im S₁₂ vs Im I.
    pub cancellation_12: f64,
    /// |Im main1| / Σ|terms|.
    pub main1_imag: f64,
    /// |Im main2| / Σ|terms|.
    pub main2_imag: f64,
    /// S₂₂ vs conj(S₁₂).
    pub s22_conjugate: f64,
    /// S₂₁ (Λ₂₁ enumeration) vs its Λ₁₁ relabelling.
    pub s21_relabel: f64,
}

/// Full energy report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub params: ModelParams,
    pub dim: usize,
    pub stored_cutoff: u32,
    pub active_modes: usize,
    pub e_sn: f64,
    pub r_sn: f64,
    pub q_sn: f64,
    pub half_triple_norm_sq: f64,
    pub parts: Parts,
    pub identities: Identities,
    /// Canonical slot sizes of Λ₁₁, Λ₁₂, Λ₂₁, Λ₂₂.
    pub slot_members: [u64; 4],
    pub table_pairs: usize,
    pub wall_time_s: f64,
}

/// |a − b| / max(|a|, |b|), 0 when both vanish.
pub(crate) fn rel(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

fn rel_real(a: f64, b: f64) -> f64 {
    rel(Complex64::new(a, 0.0), Complex64::new(b, 0.0))
}

/// R_{s,N}(u).
pub fn correction_r_sn(u: &SpectralField, params: &ModelParams) -> Result<f64> {
    let ix = Interaction::new(u, params)?;
    let mode = ExecMode::default();
    InteractionTable::new(&ix, mode).r_sn(&ix, mode)
}

/// E_{s,N}(u) = ½|||u|||²_s + R_{s,N}(u).
pub fn modified_energy(u: &SpectralField, params: &ModelParams) -> Result<f64> {
    Ok(0.5 * u.triple_norm_sq(params.s) + correction_r_sn(u, params)?)
}

fn table_sums(u: &SpectralField, params: &ModelParams) -> Result<super::TableSums> {
    let ix = Interaction::new(u, params)?;
    let mode = ExecMode::default();
    InteractionTable::new(&ix, mode).evaluate(&ix, mode)
}

/// R₀ for the field u (w = χ_N û is formed internally).
pub fn part_r0(u: &SpectralField, params: &ModelParams) -> Result<Complex64> {
    Ok(table_sums(u, params)?.r0)
}

/// R₁ for the field u.
pub fn part_r1(u: &SpectralField, params: &ModelParams) -> Result<Complex64> {
    Ok(table_sums(u, params)?.r1)
}

/// R₂ for the field u.
pub fn part_r2(u: &SpectralField, params: &ModelParams) -> Result<Complex64> {
    Ok(table_sums(u, params)?.r2)
}

/// One of S₁₁, S₁₂, S₂₁, S₂₂ for the field u.
pub fn part_s(u: &SpectralField, params: &ModelParams, which: SlotKind) -> Result<Complex64> {
    Ok(Interaction::new(u, params)?.s_part(which))
}

/// Q_{s,N} from a prebuilt table: Im(−R₀/6 + R₁/2 − R₂/2).
pub fn q_fast(ix: &Interaction, table: &InteractionTable, mode: ExecMode) -> Result<f64> {
    let t = table.evaluate(ix, mode)?;
    Ok((-t.r0 / 6.0 + t.r1 / 2.0 - t.r2 / 2.0).im)
}

fn split(operational: Complex64, direct: Option<&super::ClassifiedRemainder>) -> RemainderSplit {
    RemainderSplit {
        operational: operational.into(),
        type_a: direct.map(|d| d.type_a.into()),
        type_b: direct.map(|d| d.type_b.into()),
        type_c: direct.map(|d| d.type_c.into()),
        overlap: direct.map(|d| d.overlap.into()),
        direct_total: direct.map(|d| d.total.into()),
        counts: direct.map(|d| d.counts),
        multiplicities: direct.map(|d| d.slots.multiplicities()),
    }
}

/// Builds w from u, evaluates every part and the identity residuals.
///
/// The direct classified remainders and the grid-factorised R₁ path are
/// included whenever their enumeration fits in `budget`.
pub fn q_total(u: &SpectralField, params: &ModelParams, budget: u64, mode: ExecMode) -> Result<EnergyReport> {
    let start = Instant::now();
    let ix = Interaction::new(u, params)?;
    let table = InteractionTable::new(&ix, mode);
    let t = table.evaluate(&ix, mode)?;
    let ps = ix.pairing_sums();
    let d13 = ix.classified_remainder(Family::R1, budget).ok();
    let d23 = ix.classified_remainder(Family::R2, budget).ok();
    let grid_r1 = ix.r_family_grid(Family::R1, budget, mode).ok();

    let r13 = t.r1 - 9.0 * ps.s11 - 4.0 * ps.s12;
    let r23 = t.r2 - 9.0 * ps.s21 - 4.0 * ps.s22;
    // Q from R₀ and R₁ alone (R₂ = conj R₁ by the odd/even swap symmetry).
    let q = -t.r0.im / 6.0 + t.r1.im;
    let q_parts = (-t.r0 / 6.0 + t.r1 / 2.0 - t.r2 / 2.0).im;
    let decomposition = |r: Complex64, a: Complex64, b: Complex64, d: &super::ClassifiedRemainder| {
        let resid = (r - 9.0 * a - 4.0 * b - d.total).norm();
        let scale = r.norm().max(9.0 * a.norm()).max(4.0 * b.norm()).max(d.total.norm());
        if scale == 0.0 {
            0.0
        } else {
            resid / scale
        }
    };
    let identities = Identities {
        q_from_parts: rel_real(q, q_parts),
        r2_conjugate: rel(t.r2, t.r1.conj()),
        r1_decomposition: d13.as_ref().map(|d| decomposition(t.r1, ps.s11, ps.s12, d)),
        r2_decomposition: d23.as_ref().map(|d| decomposition(t.r2, ps.s21, ps.s22, d)),
        r1_dual_path: grid_r1.map(|g| rel(g, t.r1)),
        cancellation_11: rel_real((ps.s11 - ps.s21).im, ps.j.im),
        cancellation_12: rel_real(ps.s12.im, ps.i.im),
        main1_imag: if ps.main1_mass == 0.0 { 0.0 } else { ps.main1.im.abs() / ps.main1_mass },
        main2_imag: if ps.main2_mass == 0.0 { 0.0 } else { ps.main2.im.abs() / ps.main2_mass },
        s22_conjugate: rel(ps.s22, ps.s12.conj()),
        s21_relabel: rel(ps.s21, ps.s21_relabel),
    };
    let half = 0.5 * u.triple_norm_sq(params.s);
    Ok(EnergyReport {
        params: params.clone(),
        dim: u.dim(),
        stored_cutoff: u.cutoff(),
        active_modes: ix.active_set().len(),
        e_sn: half + t.r_sn,
        r_sn: t.r_sn,
        q_sn: q,
        half_triple_norm_sq: half,
        parts: Parts {
            r0: t.r0.into(),
            r1: t.r1.into(),
            r2: t.r2.into(),
            s11: ps.s11.into(),
            s12: ps.s12.into(),
            s21: ps.s21.into(),
            s22: ps.s22.into(),
            r13: split(r13, d13.as_ref()),
            r23: split(r23, d23.as_ref()),
            j: ps.j.into(),
            i: ps.i.into(),
            main1: ps.main1.into(),
            main2: ps.main2.into(),
        },
        identities,
        slot_members: ps.members,
        table_pairs: table.len(),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
