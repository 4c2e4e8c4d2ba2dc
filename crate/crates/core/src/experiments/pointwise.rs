//! The one-point law of u(t0, x0) under Gaussian initial data.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stats::{ks_one_sample, ks_two_sample, normal_cdf, KsResult};
use super::{advance_stable, McConfig};
use crate::dynamics::Flow;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::lattice::SpectralField;
use crate::params::ModelParams;
use crate::random::sample_mu_s;
use crate::report::LongTable;

const HIST_BINS: usize = 24;

/// Counts of (Re u, Im u) on a square grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram2d {
    /// Bin edges shared by both axes (HIST_BINS + 1 values).
    pub edges: Vec<f64>,
    /// counts[i][j]: Re in bin i, Im in bin j.
    pub counts: Vec<Vec<u64>>,
    /// Samples outside the grid.
    pub outside: u64,
}

/// Statistics of one ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub n_tail: u32,
    pub samples: usize,
    /// σ² = Σ 1/(1+|k|^{2s}) over stored modes.
    pub sigma_sq: f64,
    /// KS of Re u and Im u against N(0, σ²/2); only at t0 = 0, where that
    /// law is exact.
    pub ks_closed_form_re: Option<KsResult>,
    pub ks_closed_form_im: Option<KsResult>,
    /// Largest mass carried by a single value.
    pub max_atom: f64,
}

/// Result of [`pointwise_law`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseReport {
    pub params: ModelParams,
    pub t0: f64,
    pub x0: Vec<f64>,
    pub coarse: Resolution,
    pub fine: Resolution,
    pub ks_two_sample_re: KsResult,
    pub ks_two_sample_im: KsResult,
    /// 2/√ensemble.
    pub atom_bound: f64,
    /// Histogram of the coarse ensemble.
    pub histogram: Histogram2d,
}

impl PointwiseReport {
    pub fn to_table(&self) -> LongTable {
        let mut t = LongTable::new("pointwise_law", &["n_tail", "bin_re", "bin_im"]);
        for r in [&self.coarse, &self.fine] {
            let key = [r.n_tail.to_string(), String::new(), String::new()];
            t.push(&key, "sigma_sq", r.sigma_sq, None);
            t.push(&key, "max_atom", r.max_atom, None);
            for (name, ks) in [("ks_closed_form_re", &r.ks_closed_form_re), ("ks_closed_form_im", &r.ks_closed_form_im)] {
                if let Some(ks) = ks {
                    t.push(&key, &format!("{name}_statistic"), ks.statistic, None);
                    t.push(&key, &format!("{name}_p_value"), ks.p_value, None);
                }
            }
        }
        let key = [String::new(), String::new(), String::new()];
        t.push(&key, "ks_two_sample_re_statistic", self.ks_two_sample_re.statistic, None);
        t.push(&key, "ks_two_sample_re_p_value", self.ks_two_sample_re.p_value, None);
        t.push(&key, "ks_two_sample_im_statistic", self.ks_two_sample_im.statistic, None);
        t.push(&key, "ks_two_sample_im_p_value", self.ks_two_sample_im.p_value, None);
        t.push(&key, "atom_bound", self.atom_bound, None);
        let h = &self.histogram;
        let centre = |i: usize| 0.5 * (h.edges[i] + h.edges[i + 1]);
        for (i, row) in h.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                let key = [self.coarse.n_tail.to_string(), centre(i).to_string(), centre(j).to_string()];
                t.push(&key, "histogram_count", c as f64, None);
            }
        }
        t
    }
}

/// Σ_k û_k e^{ik·x}.
fn point_value(u: &SpectralField, x: &[f64]) -> Complex64 {
    u.iter()
        .map(|(k, c)| {
            let phase: f64 = k.components(u.dim()).iter().zip(x).map(|(&a, b)| a as f64 * b).sum();
            c * Complex64::from_polar(1.0, phase)
        })
        .sum()
}

fn max_atom(values: &[Complex64]) -> f64 {
    let mut keys: Vec<(u64, u64)> = values.iter().map(|v| (v.re.to_bits(), v.im.to_bits())).collect();
    keys.sort_unstable();
    let mut best = 0usize;
    let mut run = 0usize;
    for i in 0..keys.len() {
        run = if i > 0 && keys[i] == keys[i - 1] { run + 1 } else { 1 };
        best = best.max(run);
    }
    best as f64 / values.len() as f64
}

fn histogram(values: &[Complex64], half_width: f64) -> Histogram2d {
    let edges: Vec<f64> = (0..=HIST_BINS)
        .map(|i| -half_width + 2.0 * half_width * i as f64 / HIST_BINS as f64)
        .collect();
    let mut counts = vec![vec![0u64; HIST_BINS]; HIST_BINS];
    let mut outside = 0;
    let bin = |x: f64| {
        let b = ((x + half_width) / (2.0 * half_width) * HIST_BINS as f64).floor();
        (b >= 0.0 && b < HIST_BINS as f64).then_some(b as usize)
    };
    for v in values {
        match (bin(v.re), bin(v.im)) {
            (Some(i), Some(j)) => counts[i][j] += 1,
            _ => outside += 1,
        }
    }
    Histogram2d { edges, counts, outside }
}

/// Draws one ensemble at tail level `n_tail` from streams starting at
/// `stream0` and returns the values u(t0, x0).
fn ensemble_values(
    params: &ModelParams,
    mc: &McConfig,
    n_tail: u32,
    stream0: u64,
    t0: f64,
    x0: &[f64],
    mode: ExecMode,
) -> Result<(Vec<Complex64>, f64)> {
    let spec = mc.sampler(params, n_tail);
    let template = SpectralField::zeros(params.dim, n_tail)?;
    let flow = Flow::new(&template, params, None)?;
    let values: Vec<Result<Complex64>> = map_indexed(mc.ensemble_size, mode, |i| {
        let u = sample_mu_s(&spec.with_stream(stream0 + i as u64))?;
        let v = if t0 == 0.0 { u } else { advance_stable(&flow, &u, t0, mc.dt)? };
        Ok(point_value(&v, x0))
    });
    let sigma_sq = template
        .modes()
        .iter()
        .map(|k| 1.0 / (1.0 + (k.norm_sq() as f64).powf(params.s)))
        .sum();
    Ok((values.into_iter().collect::<Result<_>>()?, sigma_sq))
}

fn resolution(values: &[Complex64], n_tail: u32, sigma_sq: f64, t0: f64) -> Result<Resolution> {
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = values.iter().map(|v| v.im).collect();
    let (ks_re, ks_im) = if t0 == 0.0 {
        (
            Some(ks_one_sample(&re, normal_cdf(sigma_sq / 2.0))?),
            Some(ks_one_sample(&im, normal_cdf(sigma_sq / 2.0))?),
        )
    } else {
        (None, None)
    };
    Ok(Resolution {
        n_tail,
        samples: values.len(),
        sigma_sq,
        ks_closed_form_re: ks_re,
        ks_closed_form_im: ks_im,
        max_atom: max_atom(values),
    })
}

/// Empirical law of u(t0, x0) at two tail resolutions `n_tails = (coarse,
/// fine)` drawn from disjoint stream ranges, with two-sample KS tests on the
/// real and imaginary marginals. Fewer than two samples is an error.
pub fn pointwise_law(
    params: &ModelParams,
    t0: f64,
    x0: &[f64],
    n_tails: (u32, u32),
    mc: &McConfig,
    mode: ExecMode,
) -> Result<PointwiseReport> {
    params.validate()?;
    if mc.ensemble_size < 2 {
        return Err(Error::Degenerate(format!(
            "pointwise law: KS tests need at least two samples (got {})",
            mc.ensemble_size
        )));
    }
    mc.validate()?;
    if x0.len() != params.dim || x0.iter().any(|x| !x.is_finite()) {
        return Err(Error::Param(format!("pointwise law: x0 must have {} finite components", params.dim)));
    }
    if !t0.is_finite() {
        return Err(Error::Param("pointwise law: t0 must be finite".into()));
    }
    let (na, nb) = n_tails;
    if na > nb {
        return Err(Error::Param(format!("pointwise law: need n_tail {na} ≤ n_tail' {nb}")));
    }
    let (va, sa) = ensemble_values(params, mc, na, mc.stream_base, t0, x0, mode)?;
    let (vb, sb) = ensemble_values(params, mc, nb, mc.stream_base + mc.ensemble_size as u64, t0, x0, mode)?;
    let re = |v: &[Complex64]| v.iter().map(|z| z.re).collect::<Vec<_>>();
    let im = |v: &[Complex64]| v.iter().map(|z| z.im).collect::<Vec<_>>();
    Ok(PointwiseReport {
        params: params.clone(),
        t0,
        x0: x0.to_vec(),
        coarse: resolution(&va, na, sa, t0)?,
        fine: resolution(&vb, nb, sb, t0)?,
        ks_two_sample_re: ks_two_sample(&re(&va), &re(&vb))?,
        ks_two_sample_im: ks_two_sample(&im(&va), &im(&vb))?,
        atom_bound: 2.0 / (mc.ensemble_size as f64).sqrt(),
        histogram: histogram(&va, 4.0 * (sa / 2.0).sqrt()),
    })
}
