//! Monte Carlo studies: moment growth of the masked energy derivative,
//! Gaussian-chaos moment audits, integrability of the weights `e^{−R_{s,N}}`,
//! transport of small sets by the flow, and the one-point law of the solution.
//!
//! Every study draws sample `i` from stream `stream_base + i` of the master
//! seed, evaluates samples independently (in parallel when enabled) and
//! reduces in sample order, so results do not depend on the thread count.
//! Each report converts to a long-format [`LongTable`](crate::report::LongTable).

mod chaos;
mod moments;
mod pointwise;
pub mod stats;
mod transport;
mod weights;

pub use chaos::{chaos_audit, ChaosForm, ChaosReport};
pub use moments::{masked_q_samples, moment_growth, moment_profile, MomentProfile, MomentReport, MomentRow};
pub use pointwise::{pointwise_law, Histogram2d, PointwiseReport, Resolution};
pub use transport::{measure_transport, CylinderSet, TransportReport, TransportRow, TransportSlope};
pub use weights::{weight_integrability, WeightReport, WeightRow};

use crate::dynamics::{Flow, FlowConfig};
use crate::energetics::{Interaction, InteractionTable};
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::lattice::{Mode, SpectralField};
use crate::params::ModelParams;
use crate::random::{stream_rng, SamplerSpec};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Stream id reserved for bootstrap resampling.
const BOOTSTRAP_STREAM: u64 = u64::MAX;

/// Cylinder conditions `|û_k| ≤ r` on a few coefficients, one set per radius,
/// optionally intersected with the H^σ ball of radius `R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SetSpec {
    /// Constrained modes (each of length d).
    pub modes: Vec<Vec<i32>>,
    /// One set per radius; an empty list means a single unconstrained set.
    pub radii: Vec<f64>,
    /// Intersect with `{‖u‖_{H^σ} ≤ R}`.
    pub ball_cap: bool,
}

impl Default for SetSpec {
    fn default() -> Self {
        SetSpec {
            modes: vec![vec![1]],
            radii: vec![0.2, 0.1, 0.05],
            ball_cap: true,
        }
    }
}

/// Ensemble and estimator settings shared by all studies. The ball radius R
/// is taken from [`ModelParams::radius`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub ensemble_size: usize,
    /// Moment orders, sorted ascending.
    pub p_grid: Vec<f64>,
    /// Times for transport studies.
    pub t_grid: Vec<f64>,
    pub set_spec: SetSpec,
    pub seed: u64,
    /// Sample `i` uses stream `stream_base + i`.
    pub stream_base: u64,
    /// Sampling tail level; `None` picks a study-specific default.
    pub n_tail: Option<u32>,
    pub bootstrap_reps: usize,
    /// Confidence level of all intervals.
    pub confidence: f64,
    /// Moments whose Kish effective sample size falls below this are flagged
    /// unreliable and excluded from exponent fits.
    pub min_ess: f64,
    /// Time step of the flow used inside ensembles.
    pub dt: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            ensemble_size: 10_000,
            p_grid: vec![2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0],
            t_grid: vec![0.0, 0.5],
            set_spec: SetSpec::default(),
            seed: 42,
            stream_base: 0,
            n_tail: None,
            bootstrap_reps: 400,
            confidence: 0.95,
            min_ess: 50.0,
            dt: 1e-2,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Param(m));
        if self.ensemble_size < 2 {
            return bad(format!("mc.ensemble_size must be ≥ 2 (got {})", self.ensemble_size));
        }
        if self.p_grid.is_empty() || self.p_grid.iter().any(|p| !(p.is_finite() && *p >= 2.0)) {
            return bad("mc.p_grid must be a non-empty list of reals ≥ 2".into());
        }
        if self.p_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("mc.p_grid must be strictly increasing".into());
        }
        if self.t_grid.iter().any(|t| !t.is_finite()) {
            return bad("mc.t_grid entries must be finite".into());
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return bad(format!("mc.confidence must lie in (0,1) (got {})", self.confidence));
        }
        if self.bootstrap_reps == 0 {
            return bad("mc.bootstrap_reps must be ≥ 1".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("mc.dt must be finite and > 0 (got {})", self.dt));
        }
        if self.set_spec.radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return bad("mc.set_spec.radii must be finite and ≥ 0".into());
        }
        Ok(())
    }

    /// Sampler for sample streams of this ensemble.
    fn sampler(&self, params: &ModelParams, n_tail: u32) -> SamplerSpec {
        SamplerSpec::new(params.clone(), params.n.min(n_tail), n_tail, self.seed, self.stream_base)
    }

    fn bootstrap_rng(&self, tag: u64) -> ChaCha8Rng {
        stream_rng(self.seed, BOOTSTRAP_STREAM, tag)
    }
}

/// Step-size safety factor: ensemble flows use h ≤ STEP_SAFETY/‖S_N u‖_{ℓ¹}⁴,
/// the inverse of the rotation rate of the quintic term at the initial state.
const STEP_SAFETY: f64 = 0.05;
/// Quartering retries after an integration blowup.
const STEP_RETRIES: u32 = 3;

/// Φ_N(t)u with a step no larger than `dt` and small enough to resolve the
/// nonlinearity of this particular sample. Raw μ_s samples have sup-norms of
/// a few units, where the quintic term is stiff at a fixed desk-scale step.
fn advance_stable(flow: &Flow, u: &SpectralField, t: f64, dt: f64) -> Result<SpectralField> {
    let op = flow.operator();
    let l1: f64 = op
        .active()
        .iter()
        .zip(op.chi())
        .map(|(&i, c)| c * u.coeffs()[i].norm())
        .sum();
    let mut h = dt.min(STEP_SAFETY / l1.powi(4));
    let mut attempt = 0;
    loop {
        let cfg = FlowConfig {
            dt: h,
            ..FlowConfig::default()
        };
        match flow.advance(u, t, &cfg) {
            Err(Error::Integration { .. }) if attempt < STEP_RETRIES => {
                h /= 4.0;
                attempt += 1;
            }
            r => return r,
        }
    }
}

/// `‖u‖_{H^σ}` over the stored modes.
fn h_sigma_norm(u: &SpectralField, sigma: f64) -> f64 {
    u.sobolev_norm_sq(sigma).sqrt()
}

/// Interaction table for the active band of `params` on fields stored up to
/// `cutoff`.
fn band_table(params: &ModelParams, cutoff: u32, mode: ExecMode) -> Result<InteractionTable> {
    let template = SpectralField::zeros(params.dim, cutoff)?;
    Ok(InteractionTable::new(&Interaction::new(&template, params)?, mode))
}

fn parse_mode(k: &[i32], dim: usize) -> Result<Mode> {
    if k.len() != dim {
        return Err(Error::Param(format!("mode {k:?} has length {} but d = {dim}", k.len())));
    }
    Ok(Mode::new(k))
}

#[cfg(test)]
mod tests;
