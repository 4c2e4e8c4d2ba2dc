//! Sampling of the Gaussian measure `μ_s` and its low/tail split.
//!
//! `μ_s` is the law of `Σ_k g_k/√(1+|k|^{2s}) e^{ik·x}` with independent
//! standard complex Gaussians `g_k` normalized to `E|g|² = 1` (each real
//! coordinate has variance ½).
//!
//! Every sample is keyed by `(master_seed, stream_id)`. The low block
//! `|k| ≤ n_low` and the tail block `n_low < |k| ≤ n_tail` draw from disjoint
//! ChaCha substreams, so one block can be resampled while the other is held
//! fixed, and no draw depends on thread scheduling.

use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::lattice::{read_field, write_field, FieldFormat, Mode, SpectralField};
use crate::params::ModelParams;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

/// Name and version of the generator recorded in manifests.
pub const PRNG_ALGO: &str = "ChaCha8 (rand_chacha 0.9); key = splitmix64 expansion of (master_seed, stream_id); \
ChaCha stream = block id (0 low, 1 tail); normals = rand_distr 0.5 StandardNormal (ziggurat)";

/// Substream used for the low-frequency block.
pub const LOW_BLOCK: u64 = 0;
/// Substream used for the tail block.
pub const TAIL_BLOCK: u64 = 1;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic generator for `(master_seed, stream_id)` positioned at the
/// start of substream `block`.
pub fn stream_rng(master_seed: u64, stream_id: u64, block: u64) -> ChaCha8Rng {
    let mut state = master_seed ^ splitmix64(&mut stream_id.wrapping_mul(0xD1B5_4A32_D192_ED03));
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(block);
    rng
}

/// One standard complex Gaussian: independent N(0, ½) real and imaginary parts.
#[inline]
pub fn complex_std_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

/// Specification of one draw from `μ_s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub params: ModelParams,
    /// Modes |k| ≤ n_low form the low block.
    pub n_low: u32,
    /// Modes n_low < |k| ≤ n_tail form the tail block; larger modes are omitted.
    pub n_tail: u32,
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SamplerSpec {
    pub fn new(params: ModelParams, n_low: u32, n_tail: u32, master_seed: u64, stream_id: u64) -> Self {
        SamplerSpec {
            params,
            n_low,
            n_tail,
            master_seed,
            stream_id,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_low > self.n_tail {
            return Err(Error::Param(format!(
                "n_low ({}) must not exceed n_tail ({})",
                self.n_low, self.n_tail
            )));
        }
        Ok(())
    }

    /// The same spec with another stream id.
    pub fn with_stream(&self, stream_id: u64) -> Self {
        SamplerSpec {
            stream_id,
            ..self.clone()
        }
    }
}

/// Standard deviation scale 1/√(1+|k|^{2s}).
#[inline]
pub fn mode_scale(k: &Mode, s: f64) -> f64 {
    1.0 / (1.0 + (k.norm_sq() as f64).powf(s)).sqrt()
}

/// Draws a field on |k| ≤ n_tail with the low block keyed by `low_stream`
/// and the tail block keyed by `tail_stream`.
pub fn sample_blocks(spec: &SamplerSpec, low_stream: u64, tail_stream: u64) -> Result<SpectralField> {
    spec.validate()?;
    let mut u = SpectralField::zeros(spec.params.dim, spec.n_tail)?;
    let mut low = stream_rng(spec.master_seed, low_stream, LOW_BLOCK);
    let mut tail = stream_rng(spec.master_seed, tail_stream, TAIL_BLOCK);
    let n_low_sq = spec.n_low as i64 * spec.n_low as i64;
    let set = u.mode_set().clone();
    for (m, c) in set.modes().iter().zip(u.coeffs_mut()) {
        let rng = if m.norm_sq() <= n_low_sq { &mut low } else { &mut tail };
        *c = complex_std_gaussian(rng) * mode_scale(m, spec.params.s);
    }
    Ok(u)
}

/// One draw from `μ_s` truncated at `n_tail`.
pub fn sample_mu_s(spec: &SamplerSpec) -> Result<SpectralField> {
    sample_blocks(spec, spec.stream_id, spec.stream_id)
}

/// `count` independent draws; sample `i` uses stream `spec.stream_id + i`.
pub fn sample_ensemble(spec: &SamplerSpec, count: usize, mode: ExecMode) -> Result<Vec<SpectralField>> {
    spec.validate()?;
    map_indexed(count, mode, |i| sample_mu_s(&spec.with_stream(spec.stream_id + i as u64)))
        .into_iter()
        .collect()
}

/// One row of a [`CovarianceReport`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModeVariance {
    pub mode: Vec<i32>,
    pub empirical: f64,
    pub target: f64,
}

/// Sampler diagnostics over an ensemble.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub rows: Vec<ModeVariance>,
    /// max over distinct mode pairs of |Cov(û_a, û_b)| / √(Var û_a · Var û_b).
    pub max_offdiag_corr: f64,
    pub ensemble_size: usize,
}

/// Per-mode sample variance `E|û_k − mean|²` (unbiased) against the target
/// `1/(1+|k|^{2s})`, and the largest off-diagonal correlation modulus.
pub fn covariance_report(ensemble: &[SpectralField], s: f64) -> Result<CovarianceReport> {
    if ensemble.len() < 2 {
        return Err(Error::Param(format!(
            "covariance needs at least 2 samples (got {})",
            ensemble.len()
        )));
    }
    let first = &ensemble[0];
    let n = ensemble.len() as f64;
    let nm = first.len();
    // Shifted-data covariance (shift = first sample): exact zeros for
    // identical members and no cancellation from a large common mean.
    let mut sum = vec![Complex64::new(0.0, 0.0); nm];
    let mut cov = vec![Complex64::new(0.0, 0.0); nm * nm];
    for u in ensemble {
        if u.len() != nm {
            return Err(Error::Param("ensemble members have different mode sets".into()));
        }
        let d: Vec<Complex64> = u.coeffs().iter().zip(first.coeffs()).map(|(c, f)| c - f).collect();
        for a in 0..nm {
            sum[a] += d[a];
            for b in a..nm {
                cov[a * nm + b] += d[a] * d[b].conj();
            }
        }
    }
    for a in 0..nm {
        for b in a..nm {
            cov[a * nm + b] -= sum[a] * sum[b].conj() / n;
        }
    }
    let var: Vec<f64> = (0..nm).map(|a| cov[a * nm + a].re / (n - 1.0)).collect();
    let mut max_corr: f64 = 0.0;
    for a in 0..nm {
        for b in a + 1..nm {
            let denom = (var[a] * var[b]).sqrt();
            if denom > 0.0 {
                max_corr = max_corr.max((cov[a * nm + b] / (n - 1.0)).norm() / denom);
            }
        }
    }
    let rows = first
        .modes()
        .iter()
        .zip(&var)
        .map(|(m, &v)| ModeVariance {
            mode: m.components(first.dim()).to_vec(),
            empirical: v,
            target: mode_scale(m, s).powi(2),
        })
        .collect();
    Ok(CovarianceReport {
        rows,
        max_offdiag_corr: max_corr,
        ensemble_size: ensemble.len(),
    })
}

/// Manifest stored next to a persisted ensemble.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleManifest {
    pub spec: SamplerSpec,
    pub prng_algo: String,
    pub count: usize,
    pub created: String,
}

fn sample_file(i: usize) -> String {
    format!("sample_{i:06}.spf")
}

/// Writes `fields` as binary files plus `manifest.json` into `dir`.
pub fn write_ensemble(dir: &Path, spec: &SamplerSpec, fields: &[SpectralField]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (i, u) in fields.iter().enumerate() {
        write_field(&dir.join(sample_file(i)), u, FieldFormat::Binary)?;
    }
    let manifest = EnsembleManifest {
        spec: spec.clone(),
        prng_algo: PRNG_ALGO.to_string(),
        count: fields.len(),
        created: crate::report::timestamp(),
    };
    crate::report::write_atomic(&dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?.as_bytes())
}

/// Reads an ensemble written by [`write_ensemble`].
pub fn read_ensemble(dir: &Path) -> Result<(EnsembleManifest, Vec<SpectralField>)> {
    let manifest: EnsembleManifest = serde_json::from_slice(&std::fs::read(dir.join("manifest.json"))?)?;
    let fields = (0..manifest.count)
        .map(|i| read_field(&dir.join(sample_file(i))))
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, fields))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n_low: u32, n_tail: u32, seed: u64) -> SamplerSpec {
        SamplerSpec::new(ModelParams::default(), n_low, n_tail, seed, 0)
    }

    #[test]
    fn identical_keys_give_identical_fields() {
        let s = spec(4, 8, 42);
        let a = sample_mu_s(&s).unwrap();
        let b = sample_mu_s(&s).unwrap();
        assert_eq!(a, b);
        let c = sample_mu_s(&s.with_stream(1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ensembles_do_not_depend_on_execution_mode() {
        let s = spec(3, 6, 9);
        let a = sample_ensemble(&s, 50, ExecMode::Sequential).unwrap();
        let b = sample_ensemble(&s, 50, ExecMode::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn blocks_are_independent_substreams() {
        let s = spec(2, 6, 5);
        let base = sample_blocks(&s, 0, 0).unwrap();
        let new_tail = sample_blocks(&s, 0, 7).unwrap();
        for ((m, a), b) in base.iter().zip(new_tail.coeffs()) {
            if m.norm_sq() <= 4 {
                assert_eq!(a, b);
            } else {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = stream_rng(1, 2, 3);
        let n = 1_000_000;
        let (mut m1, mut m2, mut m4) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
        for _ in 0..n {
            let g = complex_std_gaussian(&mut rng);
            m1 += g;
            m2 += g.norm_sqr();
            m4 += g.norm_sqr().powi(2);
        }
        let n = n as f64;
        assert!((m2 / n - 1.0).abs() < 0.005);
        assert!((m1 / n).norm() < 4.0 * (1.0 / n).sqrt());
        assert!((m4 / n - 2.0).abs() < 0.02);
    }

    #[test]
    fn zero_mode_has_unit_variance_scale() {
        assert_eq!(mode_scale(&Mode::ZERO, 10.0), 1.0);
        assert!((mode_scale(&Mode::d1(2), 10.0).powi(2) - 1.0 / 1048577.0).abs() < 1e-20);
    }

    #[test]
    fn rejects_inverted_blocks_and_tiny_ensembles() {
        assert!(sample_mu_s(&spec(5, 4, 1)).is_err());
        let one = vec![sample_mu_s(&spec(1, 1, 1)).unwrap()];
        assert!(covariance_report(&one, 10.0).is_err());
    }

    #[test]
    fn identical_fields_have_zero_variance() {
        let u = sample_mu_s(&spec(2, 2, 3)).unwrap();
        let r = covariance_report(&[u.clone(), u.clone(), u], 10.0).unwrap();
        assert!(r.rows.iter().all(|row| row.empirical == 0.0));
    }

    #[test]
    fn ensemble_persistence_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = spec(2, 4, 11);
        let fields = sample_ensemble(&s, 5, ExecMode::default()).unwrap();
        write_ensemble(dir.path(), &s, &fields).unwrap();
        let (m, back) = read_ensemble(dir.path()).unwrap();
        assert_eq!(m.count, 5);
        assert_eq!(m.spec, s);
        assert_eq!(back, fields);
    }
}
