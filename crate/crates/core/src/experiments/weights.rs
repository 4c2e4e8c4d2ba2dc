//! Integrability of the weights `χ_R(‖u‖_{H^σ})·e^{±R_{s,N}(u)}` across N.

use serde::{Deserialize, Serialize};

use rand::Rng;

use super::stats::{log_mean_exp, log_sum_exp, percentile_interval};
use super::{band_table, h_sigma_norm, McConfig};
use crate::energetics::{Interaction, InteractionTable};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::params::ModelParams;
use crate::random::sample_mu_s;
use crate::report::LongTable;

/// Estimates for one truncation level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightRow {
    pub n: u32,
    /// Ê[χ_R(‖u‖)·e^{|R_{s,N}(u)|}] (may overflow to +∞; see `ln_estimate`).
    pub estimate: f64,
    pub ci: (f64, f64),
    /// Natural log of the estimate and of its interval, computed without
    /// overflow.
    pub ln_estimate: f64,
    pub ln_ci: (f64, f64),
    /// (p, ‖χ_R e^{−R_{s,N}} − χ_R e^{−R_{s,N_ref}}‖_{L^p}).
    pub distances: Vec<(f64, f64)>,
    /// (p, ln of that distance).
    pub ln_distances: Vec<(f64, f64)>,
    /// Largest |R_{s,N}| seen on a sample with χ_R > 0.
    pub max_abs_r: f64,
}

/// Result of [`weight_integrability`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub params: ModelParams,
    pub n_ref: u32,
    pub n_tail: u32,
    pub samples: usize,
    /// Samples with χ_R(‖u‖) > 0.
    pub in_support: usize,
    pub rows: Vec<WeightRow>,
    /// Estimate at N_ref.
    pub reference: WeightRow,
    /// (max − min)/min of the estimates over `rows`, evaluated from the logs.
    pub relative_spread: f64,
    /// True when no sample reached the support of χ_R: every estimate is then
    /// exactly 0 and the spread is reported as 0.
    pub empty_ball: bool,
}

impl WeightReport {
    /// ln of the distance at order p for each row, in row order.
    pub fn ln_distances_at(&self, p: f64) -> Vec<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.ln_distances.iter().find(|d| d.0 == p).map(|d| d.1))
            .collect()
    }

    pub fn to_table(&self) -> LongTable {
        let mut t = LongTable::new("weight_integrability", &["N", "p"]);
        for r in self.rows.iter().chain(std::iter::once(&self.reference)) {
            let n = r.n.to_string();
            t.push(&[n.clone(), String::new()], "estimate", r.estimate, Some(r.ci));
            t.push(&[n.clone(), String::new()], "ln_estimate", r.ln_estimate, Some(r.ln_ci));
            t.push(&[n.clone(), String::new()], "max_abs_r", r.max_abs_r, None);
            for ((p, d), (_, ld)) in r.distances.iter().zip(&r.ln_distances) {
                t.push(&[n.clone(), p.to_string()], "distance_to_ref", *d, None);
                t.push(&[n.clone(), p.to_string()], "ln_distance_to_ref", *ld, None);
            }
        }
        let blank = [String::new(), String::new()];
        t.push(&blank, "relative_spread", self.relative_spread, None);
        t.push(&blank, "empty_ball", self.empty_ball as u8 as f64, None);
        t.push(&blank, "in_support_fraction", self.in_support as f64 / self.samples as f64, None);
        t
    }
}

/// Per-N estimates of `Ê[χ_R e^{|R_{s,N}|}]` and `L^p` distances of
/// `χ_R e^{−R_{s,N}}` to the reference level `n_ref`. All levels are
/// evaluated on the same samples, drawn up to `max(n_tail, n_ref)`.
pub fn weight_integrability(
    params: &ModelParams,
    n_list: &[u32],
    n_ref: u32,
    p_list: &[f64],
    mc: &McConfig,
    mode: ExecMode,
) -> Result<WeightReport> {
    params.validate()?;
    mc.validate()?;
    if n_list.is_empty() || n_list.iter().any(|&n| n == 0 || n >= n_ref) {
        return Err(Error::Param(format!(
            "weights: every N in {n_list:?} must satisfy 1 ≤ N < N_ref = {n_ref}"
        )));
    }
    if p_list.iter().any(|p| !(*p >= 1.0 && p.is_finite())) {
        return Err(Error::Param("weights: p_list entries must be finite and ≥ 1".into()));
    }
    let n_tail = mc.n_tail.unwrap_or(n_ref).max(n_ref);
    let spec = mc.sampler(params, n_tail);
    let levels: Vec<u32> = n_list.iter().copied().chain(std::iter::once(n_ref)).collect();
    let level_params: Vec<ModelParams> = levels.iter().map(|&n| ModelParams { n, ..params.clone() }).collect();
    let tables: Vec<InteractionTable> = level_params
        .iter()
        .map(|p| band_table(p, n_tail, mode))
        .collect::<Result<_>>()?;

    // Per sample: (χ_R, [R_{s,N} for each level]) — R is only needed where χ_R > 0.
    let per_sample: Vec<Result<(f64, Vec<f64>)>> = map_indexed(mc.ensemble_size, mode, |i| {
        let u = sample_mu_s(&spec.with_stream(mc.stream_base + i as u64))?;
        let cut = params.ball_cutoff(h_sigma_norm(&u, params.sigma));
        if cut == 0.0 {
            return Ok((0.0, Vec::new()));
        }
        let rs = level_params
            .iter()
            .zip(&tables)
            .map(|(p, t)| t.r_sn(&Interaction::new(&u, p)?, ExecMode::Sequential))
            .collect::<Result<Vec<f64>>>()?;
        Ok((cut, rs))
    });
    let per_sample: Vec<(f64, Vec<f64>)> = per_sample.into_iter().collect::<Result<_>>()?;
    // Everything below works with logarithms: |R_{s,N}| reaches the
    // thousands on ordinary samples, far beyond the range of f64 exponentials.
    let n = per_sample.len();
    let support: Vec<usize> = (0..n).filter(|&i| per_sample[i].0 > 0.0).collect();
    let ln_pos = |j: usize| -> Vec<f64> {
        support
            .iter()
            .map(|&i| per_sample[i].0.ln() + per_sample[i].1[j].abs())
            .collect()
    };
    let ref_j = levels.len() - 1;
    // ln|χ(e^{−a} − e^{−b})| = ln χ − min(a, b) + ln(1 − e^{−|a−b|}).
    let ln_diff = |j: usize| -> Vec<f64> {
        support
            .iter()
            .map(|&i| {
                let (c, rs) = &per_sample[i];
                let (a, b) = (rs[j], rs[ref_j]);
                c.ln() - a.min(b) + (-(-(a - b).abs()).exp_m1()).ln()
            })
            .collect()
    };
    let mut rng = mc.bootstrap_rng(3);
    let mut rows: Vec<WeightRow> = (0..levels.len())
        .map(|j| {
            let lp = ln_pos(j);
            let ln_estimate = if lp.is_empty() { f64::NEG_INFINITY } else { log_mean_exp(&lp, n) };
            // Bootstrap over all n samples; those outside the support add 0.
            let mut boots: Vec<f64> = (0..mc.bootstrap_reps)
                .map(|_| {
                    let picked: Vec<f64> = (0..n)
                        .filter_map(|_| {
                            let i = rng.random_range(0..n);
                            support.binary_search(&i).ok().map(|s| lp[s])
                        })
                        .collect();
                    if picked.is_empty() { f64::NEG_INFINITY } else { log_mean_exp(&picked, n) }
                })
                .collect();
            let ln_ci = if lp.is_empty() {
                (f64::NEG_INFINITY, f64::NEG_INFINITY)
            } else {
                percentile_interval(&mut boots, mc.confidence)
            };
            let ld = ln_diff(j);
            let ln_distances: Vec<(f64, f64)> = p_list
                .iter()
                .map(|&p| {
                    let v = if ld.is_empty() {
                        f64::NEG_INFINITY
                    } else {
                        log_sum_exp(ld.iter().map(|x| p * x)) - (n as f64).ln()
                    };
                    (p, v / p)
                })
                .collect();
            let max_abs_r = support
                .iter()
                .fold(0.0f64, |m, &i| m.max(per_sample[i].1[j].abs()));
            WeightRow {
                n: levels[j],
                estimate: ln_estimate.exp(),
                ci: (ln_ci.0.exp(), ln_ci.1.exp()),
                ln_estimate,
                ln_ci,
                distances: ln_distances.iter().map(|(p, l)| (*p, l.exp())).collect(),
                ln_distances,
                max_abs_r,
            }
        })
        .collect();
    let reference = rows.pop().expect("reference level present");
    let in_support = support.len();
    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.ln_estimate), hi.max(r.ln_estimate))
    });
    Ok(WeightReport {
        params: params.clone(),
        n_ref,
        n_tail,
        samples: per_sample.len(),
        in_support,
        rows,
        reference,
        relative_spread: if in_support == 0 { 0.0 } else { (hi - lo).exp_m1() },
        empty_ball: in_support == 0,
    })
}
