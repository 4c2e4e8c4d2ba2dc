//! Transport of small cylinder sets by the truncated flow.
//!
//! The image measure μ_s(Φ_N(t)A) is estimated by sampling u ∼ μ_s and testing
//! Φ_N(−t)u ∈ A, which is valid because Φ_N(t) is a bijection.

use serde::{Deserialize, Serialize};

use super::stats::{least_squares, wilson_ci};
use super::{advance_stable, h_sigma_norm, parse_mode, McConfig};
use crate::dynamics::Flow;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::lattice::{Mode, SpectralField};
use crate::params::ModelParams;
use crate::random::sample_mu_s;
use crate::report::LongTable;

/// `{|û_k| ≤ r for every listed k}`, optionally capped by `‖u‖_{H^σ} ≤ R`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderSet {
    pub modes: Vec<Mode>,
    /// `None` for the unconstrained set.
    pub radius: Option<f64>,
    pub ball: Option<(f64, f64)>,
}

impl CylinderSet {
    pub fn contains(&self, u: &SpectralField) -> bool {
        if let Some(r) = self.radius {
            if self.modes.iter().any(|k| u.get(k).norm() > r) {
                return false;
            }
        }
        match self.ball {
            Some((sigma, big_r)) => h_sigma_norm(u, sigma) <= big_r,
            None => true,
        }
    }
}

/// Estimates for one set at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportRow {
    /// Cylinder radius r (absent for the unconstrained set).
    pub r: Option<f64>,
    pub t: f64,
    pub samples: usize,
    pub base_hits: u64,
    pub image_hits: u64,
    pub base: f64,
    pub base_ci: (f64, f64),
    pub image: f64,
    pub image_ci: (f64, f64),
    /// True when the image had no hits: only the upper CI bound is informative.
    pub image_upper_bound_only: bool,
}

/// Slope of log μ̂(image) against log μ̂(A) across the set family at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportSlope {
    pub t: f64,
    /// Sets with hits on both sides.
    pub points: usize,
    pub slope: Option<f64>,
    pub slope_se: Option<f64>,
}

/// Result of [`measure_transport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    pub params: ModelParams,
    pub n_tail: u32,
    pub dt: f64,
    pub rows: Vec<TransportRow>,
    pub slopes: Vec<TransportSlope>,
}

impl TransportReport {
    pub fn to_table(&self) -> LongTable {
        let mut t = LongTable::new("measure_transport", &["r", "t"]);
        let fmt_r = |r: Option<f64>| r.map(|v| v.to_string()).unwrap_or_else(|| "none".into());
        for row in &self.rows {
            let key = [fmt_r(row.r), row.t.to_string()];
            t.push(&key, "base", row.base, Some(row.base_ci));
            t.push(&key, "image", row.image, Some(row.image_ci));
            t.push(&key, "base_hits", row.base_hits as f64, None);
            t.push(&key, "image_hits", row.image_hits as f64, None);
            t.push(&key, "samples", row.samples as f64, None);
        }
        for s in &self.slopes {
            let key = [String::new(), s.t.to_string()];
            t.push(&key, "slope_points", s.points as f64, None);
            if let Some(v) = s.slope {
                let se = s.slope_se.unwrap_or(0.0);
                t.push(&key, "slope", v, Some((v - se, v + se)));
            }
        }
        t
    }
}

fn build_sets(params: &ModelParams, mc: &McConfig) -> Result<Vec<CylinderSet>> {
    let spec = &mc.set_spec;
    let modes = spec
        .modes
        .iter()
        .map(|k| parse_mode(k, params.dim))
        .collect::<Result<Vec<_>>>()?;
    let ball = spec.ball_cap.then_some((params.sigma, params.radius));
    if spec.radii.is_empty() || modes.is_empty() {
        return Ok(vec![CylinderSet {
            modes: Vec::new(),
            radius: None,
            ball,
        }]);
    }
    Ok(spec
        .radii
        .iter()
        .map(|&r| CylinderSet {
            modes: modes.clone(),
            radius: Some(r),
            ball,
        })
        .collect())
}

/// Per-(set, t) estimates of μ̂_s(A) and μ̂_s(Φ_N(t)A) with Wilson intervals,
/// plus the descriptive log-log slope across the set family at each t.
pub fn measure_transport(params: &ModelParams, mc: &McConfig, mode: ExecMode) -> Result<TransportReport> {
    params.validate()?;
    mc.validate()?;
    if mc.t_grid.is_empty() || mc.t_grid.iter().any(|t| *t < 0.0) {
        return Err(Error::Param("transport: t_grid must be non-empty with t ≥ 0".into()));
    }
    let sets = build_sets(params, mc)?;
    let n_tail = mc.n_tail.unwrap_or(2 * params.n);
    let spec = mc.sampler(params, n_tail);
    let template = SpectralField::zeros(params.dim, n_tail)?;
    for s in &sets {
        if let Some(k) = s.modes.iter().find(|k| !template.mode_set().contains(k)) {
            return Err(Error::Param(format!("transport: mode {k} is not stored at n_tail = {n_tail}")));
        }
    }
    let flow = Flow::new(&template, params, None)?;
    // Visit times in increasing order, evolving backwards incrementally.
    let mut order: Vec<usize> = (0..mc.t_grid.len()).collect();
    order.sort_by(|&a, &b| mc.t_grid[a].total_cmp(&mc.t_grid[b]));

    // hits[i] = (base membership per set, image membership per (t, set))
    let hits: Vec<Result<(Vec<bool>, Vec<Vec<bool>>)>> = map_indexed(mc.ensemble_size, mode, |i| {
        let u = sample_mu_s(&spec.with_stream(mc.stream_base + i as u64))?;
        let base: Vec<bool> = sets.iter().map(|s| s.contains(&u)).collect();
        let mut image = vec![Vec::new(); mc.t_grid.len()];
        let (mut v, mut t_prev) = (u, 0.0);
        for &j in &order {
            let t = mc.t_grid[j];
            if t != t_prev {
                v = advance_stable(&flow, &v, -(t - t_prev), mc.dt)?;
                t_prev = t;
            }
            image[j] = sets.iter().map(|s| s.contains(&v)).collect();
        }
        Ok((base, image))
    });
    let hits = hits.into_iter().collect::<Result<Vec<_>>>()?;
    let n = hits.len() as u64;

    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for (j, &t) in mc.t_grid.iter().enumerate() {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (si, set) in sets.iter().enumerate() {
            let base_hits = hits.iter().filter(|h| h.0[si]).count() as u64;
            let image_hits = hits.iter().filter(|h| h.1[j][si]).count() as u64;
            let (base, image) = (base_hits as f64 / n as f64, image_hits as f64 / n as f64);
            if base_hits > 0 && image_hits > 0 {
                xs.push(base.ln());
                ys.push(image.ln());
            }
            rows.push(TransportRow {
                r: set.radius,
                t,
                samples: n as usize,
                base_hits,
                image_hits,
                base,
                base_ci: wilson_ci(base_hits, n, mc.confidence),
                image,
                image_ci: wilson_ci(image_hits, n, mc.confidence),
                image_upper_bound_only: image_hits == 0,
            });
        }
        let fit = least_squares(&xs, &ys).ok();
        slopes.push(TransportSlope {
            t,
            points: xs.len(),
            slope: fit.map(|f| f.slope),
            slope_se: fit.map(|f| f.slope_se),
        });
    }
    Ok(TransportReport {
        params: params.clone(),
        n_tail,
        dt: mc.dt,
        rows,
        slopes,
    })
}
