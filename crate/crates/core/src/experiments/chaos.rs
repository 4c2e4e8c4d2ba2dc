//! Moment audits of polynomial forms in independent complex Gaussians.

use serde::{Deserialize, Serialize};

use super::moments::{moment_profile, MomentProfile};
use super::stats::{lp_norm, percentile_interval};
use super::McConfig;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::random::{complex_std_gaussian, stream_rng};
use crate::report::LongTable;
use rand::Rng;

/// Block id of chaos-audit Gaussian draws.
const CHAOS_BLOCK: u64 = 7;

/// A polynomial form F in independent standard complex Gaussians g_j
/// (E|g_j|² = 1), with deterministic coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChaosForm {
    /// F ≡ value (degree 0).
    Constant { value: f64 },
    /// F = Σ_j c_j g_j (degree 1).
    Linear { coeffs: Vec<f64> },
    /// F = g_1 g_2 ⋯ g_n (degree n).
    Monomial { degree: usize },
}

impl ChaosForm {
    pub fn degree(&self) -> usize {
        match self {
            ChaosForm::Constant { .. } => 0,
            ChaosForm::Linear { .. } => 1,
            ChaosForm::Monomial { degree } => *degree,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ChaosForm::Constant { value } if *value == 0.0 || !value.is_finite() => {
                Err(Error::Param("chaos form: constant must be finite and nonzero".into()))
            }
            ChaosForm::Linear { coeffs } if coeffs.is_empty() || coeffs.iter().all(|c| *c == 0.0) => {
                Err(Error::Param("chaos form: linear coefficients must not all vanish".into()))
            }
            ChaosForm::Monomial { degree: 0 } => Err(Error::Param("chaos form: monomial degree must be ≥ 1".into())),
            _ => Ok(()),
        }
    }

    /// |F| for one draw.
    fn sample_abs<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ChaosForm::Constant { value } => value.abs(),
            ChaosForm::Linear { coeffs } => coeffs.iter().map(|c| complex_std_gaussian(rng) * *c).sum::<num_complex::Complex64>().norm(),
            ChaosForm::Monomial { degree } => (0..*degree).map(|_| complex_std_gaussian(rng).norm()).product(),
        }
    }
}

/// Result of [`chaos_audit`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChaosReport {
    pub form: ChaosForm,
    pub degree: usize,
    /// Norms of |F| over the p grid; the exponent is the slope of
    /// log(‖F‖_p/‖F‖_2) against log p (the normalisation does not change it).
    pub profile: MomentProfile,
    pub exponent: Option<f64>,
    pub exponent_ci: Option<(f64, f64)>,
    /// ‖F‖_4/‖F‖_2 and its bootstrap interval.
    pub ratio_4_2: f64,
    pub ratio_4_2_ci: (f64, f64),
}

impl ChaosReport {
    pub fn to_table(&self) -> LongTable {
        let mut t = LongTable::new("chaos_audit", &["degree", "p"]);
        let deg = self.degree.to_string();
        self.profile.push_rows(&mut t, std::slice::from_ref(&deg));
        t.push(&[deg, String::new()], "ratio_4_2", self.ratio_4_2, Some(self.ratio_4_2_ci));
        t
    }
}

/// Samples |F| and fits the moment-growth exponent of ‖F‖_p/‖F‖_2 over the
/// reliable part of `mc.p_grid`.
pub fn chaos_audit(form: &ChaosForm, mc: &McConfig, mode: ExecMode) -> Result<ChaosReport> {
    form.validate()?;
    mc.validate()?;
    let values: Vec<f64> = map_indexed(mc.ensemble_size, mode, |i| {
        form.sample_abs(&mut stream_rng(mc.seed, mc.stream_base + i as u64, CHAOS_BLOCK))
    });
    let mut rng = mc.bootstrap_rng(2);
    let profile = moment_profile(&values, mc, &mut rng)?;
    let ratio = |v: &[f64]| lp_norm(v, 4.0) / lp_norm(v, 2.0);
    let ratio_4_2 = ratio(&values);
    let n = values.len();
    let mut buf = vec![0.0; n];
    let mut boots: Vec<f64> = (0..mc.bootstrap_reps)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = values[rng.random_range(0..n)];
            }
            ratio(&buf)
        })
        .collect();
    Ok(ChaosReport {
        form: form.clone(),
        degree: form.degree(),
        exponent: profile.exponent,
        exponent_ci: profile.exponent_ci,
        profile,
        ratio_4_2,
        ratio_4_2_ci: percentile_interval(&mut boots, mc.confidence),
    })
}
