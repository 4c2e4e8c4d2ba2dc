//! Empirical L^p profiles and the moment growth of `1_{B_R}·Q_{s,N}`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::stats::{kish_ess, least_squares, lp_norm, percentile_interval};
use super::{band_table, h_sigma_norm, McConfig};
use crate::energetics::{q_fast, Interaction};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::params::ModelParams;
use crate::random::sample_mu_s;
use crate::report::LongTable;

/// Empirical norm at one moment order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub p: f64,
    pub norm: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Kish effective sample size of the weights |x|^p.
    pub ess: f64,
    pub reliable: bool,
}

/// Norms over a p grid and the fitted growth exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    pub rows: Vec<MomentRow>,
    /// Orders used in the fit: the upper half of the reliable orders (empty
    /// when fewer than two orders are reliable).
    pub fit_p: Vec<f64>,
    /// Least-squares slope of log‖·‖_p against log p over `fit_p`; `None`
    /// when fewer than two orders are reliable.
    pub exponent: Option<f64>,
    pub exponent_se: Option<f64>,
    /// Percentile bootstrap interval of the slope.
    pub exponent_ci: Option<(f64, f64)>,
    /// The same slope over the upper half of the whole p grid, ignoring
    /// reliability flags. Diagnostic only: when high orders are unreliable it
    /// mostly measures the single largest sample.
    pub unfiltered_exponent: f64,
    pub unfiltered_fit_p: Vec<f64>,
    /// Whether the empirical norms are nondecreasing in p.
    pub monotone: bool,
    pub samples: usize,
}

impl MomentProfile {
    pub fn row(&self, p: f64) -> Option<&MomentRow> {
        self.rows.iter().find(|r| r.p == p)
    }

    pub(super) fn push_rows(&self, table: &mut LongTable, prefix: &[String]) {
        for r in &self.rows {
            let mut params = prefix.to_vec();
            params.push(r.p.to_string());
            table.push(&params, "norm", r.norm, Some((r.ci_lo, r.ci_hi)));
            table.push(&params, "ess", r.ess, None);
            table.push(&params, "reliable", r.reliable as u8 as f64, None);
        }
        let mut params = prefix.to_vec();
        params.push(String::new());
        if let (Some(e), Some(se)) = (self.exponent, self.exponent_se) {
            table.push(&params, "exponent", e, self.exponent_ci);
            table.push(&params, "exponent_se", se, None);
            table.push(&params, "fit_p_min", self.fit_p[0], None);
            table.push(&params, "fit_p_max", self.fit_p[self.fit_p.len() - 1], None);
        }
        table.push(&params, "unfiltered_exponent", self.unfiltered_exponent, None);
        table.push(&params, "monotone", self.monotone as u8 as f64, None);
    }
}

fn fit_slope(p: &[f64], norms: &[f64]) -> Result<super::stats::LineFit> {
    let x: Vec<f64> = p.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    least_squares(&x, &y)
}

/// Upper half of `idx`, never fewer than two entries (`idx.len() ≥ 2`).
fn upper_half(idx: &[usize]) -> Vec<usize> {
    idx[(idx.len() / 2).min(idx.len() - 2)..].to_vec()
}

/// L^p profile of `values` over `mc.p_grid` with bootstrap intervals for the
/// norms and the growth exponent. Errors when every value is zero or the
/// grid has fewer than two orders.
pub fn moment_profile<R: Rng + ?Sized>(values: &[f64], mc: &McConfig, rng: &mut R) -> Result<MomentProfile> {
    mc.validate()?;
    if values.len() < 2 {
        return Err(Error::Degenerate("moment profile needs at least two samples".into()));
    }
    if values.iter().all(|v| *v == 0.0) {
        return Err(Error::Degenerate("all samples are zero".into()));
    }
    let ps = &mc.p_grid;
    let norms: Vec<f64> = ps.iter().map(|&p| lp_norm(values, p)).collect();
    let ess: Vec<f64> = ps.iter().map(|&p| kish_ess(values, p)).collect();
    let reliable: Vec<bool> = ess.iter().map(|e| *e >= mc.min_ess).collect();
    let rel_idx: Vec<usize> = (0..ps.len()).filter(|&i| reliable[i]).collect();
    if ps.len() < 2 {
        return Err(Error::Degenerate("moment profile needs at least two orders".into()));
    }
    let all_idx: Vec<usize> = (0..ps.len()).collect();
    let unfiltered_idx = upper_half(&all_idx);
    let fit_idx = if rel_idx.len() >= 2 { upper_half(&rel_idx) } else { Vec::new() };
    let pick = |idx: &[usize], v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<f64>>();
    let fit_p = pick(&fit_idx, ps);
    let unfiltered_fit_p = pick(&unfiltered_idx, ps);
    let unfiltered = fit_slope(&unfiltered_fit_p, &pick(&unfiltered_idx, &norms))?;
    let fit = if fit_idx.is_empty() {
        None
    } else {
        Some(fit_slope(&fit_p, &pick(&fit_idx, &norms))?)
    };

    // Joint bootstrap: one resample feeds every norm and the slope.
    let n = values.len();
    let mut boot_norms: Vec<Vec<f64>> = vec![Vec::with_capacity(mc.bootstrap_reps); ps.len()];
    let mut boot_slopes = Vec::with_capacity(mc.bootstrap_reps);
    let mut buf = vec![0.0; n];
    for _ in 0..mc.bootstrap_reps {
        for b in buf.iter_mut() {
            *b = values[rng.random_range(0..n)];
        }
        let bn: Vec<f64> = ps.iter().map(|&p| lp_norm(&buf, p)).collect();
        for (acc, v) in boot_norms.iter_mut().zip(&bn) {
            acc.push(*v);
        }
        let fy: Vec<f64> = fit_idx.iter().map(|&i| bn[i]).collect();
        if fit.is_some() && fy.iter().all(|v| *v > 0.0) {
            if let Ok(f) = fit_slope(&fit_p, &fy) {
                boot_slopes.push(f.slope);
            }
        }
    }
    let rows = (0..ps.len())
        .map(|i| {
            let (lo, hi) = percentile_interval(&mut boot_norms[i], mc.confidence);
            MomentRow {
                p: ps[i],
                norm: norms[i],
                ci_lo: lo,
                ci_hi: hi,
                ess: ess[i],
                reliable: reliable[i],
            }
        })
        .collect();
    Ok(MomentProfile {
        rows,
        fit_p,
        exponent: fit.map(|f| f.slope),
        exponent_se: fit.map(|f| f.slope_se),
        exponent_ci: fit.map(|_| percentile_interval(&mut boot_slopes, mc.confidence)),
        unfiltered_exponent: unfiltered.slope,
        unfiltered_fit_p,
        monotone: norms.windows(2).all(|w| w[1] >= w[0]),
        samples: n,
    })
}

/// Result of [`moment_growth`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub params: ModelParams,
    pub n_tail: u32,
    pub samples: usize,
    /// Samples with ‖u‖_{H^σ} ≤ R.
    pub in_ball: usize,
    pub profile: MomentProfile,
    /// The fitted growth exponent β̂ over reliable orders (same as
    /// `profile.exponent`); `None` when fewer than two orders are reliable.
    pub beta_hat: Option<f64>,
    pub beta_ci: Option<(f64, f64)>,
    /// Plain RMS of the masked samples (equals the p = 2 norm).
    pub rms: f64,
}

impl MomentReport {
    pub fn to_table(&self) -> LongTable {
        let mut t = LongTable::new("moment_growth", &["N", "p"]);
        let n = self.params.n.to_string();
        self.profile.push_rows(&mut t, std::slice::from_ref(&n));
        t.push(&[n.clone(), String::new()], "in_ball_fraction", self.in_ball as f64 / self.samples as f64, None);
        t.push(&[n, String::new()], "rms", self.rms, None);
        t
    }
}

/// Draws the masked samples `1_{B_R}(u)·Q_{s,N}(u)` for u ∼ μ_s.
pub fn masked_q_samples(params: &ModelParams, mc: &McConfig, mode: ExecMode) -> Result<(Vec<f64>, usize, u32)> {
    params.validate()?;
    mc.validate()?;
    let n_tail = mc.n_tail.unwrap_or(2 * params.n);
    let spec = mc.sampler(params, n_tail);
    let table = band_table(params, n_tail, mode)?;
    let samples: Vec<Result<Option<f64>>> = map_indexed(mc.ensemble_size, mode, |i| {
        let u = sample_mu_s(&spec.with_stream(mc.stream_base + i as u64))?;
        if h_sigma_norm(&u, params.sigma) > params.radius {
            return Ok(None);
        }
        let ix = Interaction::new(&u, params)?;
        Ok(Some(q_fast(&ix, &table, ExecMode::Sequential)?))
    });
    let mut values = Vec::with_capacity(samples.len());
    let mut in_ball = 0;
    for s in samples {
        match s? {
            Some(q) => {
                in_ball += 1;
                values.push(q);
            }
            None => values.push(0.0),
        }
    }
    Ok((values, in_ball, n_tail))
}

/// Empirical `‖1_{B_R}·Q_{s,N}‖_{L^p(dμ_s)}` over `mc.p_grid` and the fitted
/// growth exponent β̂. An ensemble with no sample inside the ball is reported
/// as [`Error::Degenerate`] ("empty ball").
pub fn moment_growth(params: &ModelParams, mc: &McConfig, mode: ExecMode) -> Result<MomentReport> {
    let (values, in_ball, n_tail) = masked_q_samples(params, mc, mode)?;
    if in_ball == 0 {
        return Err(Error::Degenerate(format!(
            "empty ball: none of {} samples has ‖u‖_H^σ ≤ R = {}",
            values.len(),
            params.radius
        )));
    }
    let profile = moment_profile(&values, mc, &mut mc.bootstrap_rng(1))?;
    let rms = (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt();
    Ok(MomentReport {
        params: params.clone(),
        n_tail,
        samples: values.len(),
        in_ball,
        beta_hat: profile.exponent,
        beta_ci: profile.exponent_ci,
        profile,
        rms,
    })
}
