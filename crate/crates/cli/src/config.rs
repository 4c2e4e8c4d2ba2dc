//! Run configuration: a JSON file, dotted-path overrides and flag overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use torus_nls::dynamics::FlowConfig;
use torus_nls::experiments::{ChaosForm, McConfig};
use torus_nls::random::SamplerSpec;
use torus_nls::resonance::CountingFamily;
use torus_nls::{ModelParams, DEFAULT_BUDGET};

use crate::CliError;

/// Draw settings for single states and ensembles. Omitted levels default to
/// the model's N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerSettings {
    pub n_low: Option<u32>,
    pub n_tail: Option<u32>,
    pub seed: u64,
    pub stream_id: u64,
    /// Ensemble size for `sample`.
    pub count: usize,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        SamplerSettings {
            n_low: None,
            n_tail: None,
            seed: 42,
            stream_id: 0,
            count: 16,
        }
    }
}

impl SamplerSettings {
    pub fn spec(&self, params: &ModelParams) -> SamplerSpec {
        self.spec_with_tail(params, params.n)
    }

    /// Like [`spec`](Self::spec), with `default_tail` used when no tail
    /// cutoff is configured.
    pub fn spec_with_tail(&self, params: &ModelParams, default_tail: u32) -> SamplerSpec {
        let n_tail = self.n_tail.unwrap_or(default_tail);
        let n_low = self.n_low.unwrap_or(params.n).min(n_tail);
        SamplerSpec::new(params.clone(), n_low, n_tail, self.seed, self.stream_id)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CountingSettings {
    pub families: Vec<CountingFamily>,
}

impl Default for CountingSettings {
    fn default() -> Self {
        CountingSettings {
            families: vec![CountingFamily {
                dim: 3,
                shells: vec![4, 4],
                signs: vec![1, -1],
            }],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsiBoundSettings {
    pub kmax: i32,
    pub s_list: Vec<f64>,
}

impl Default for PsiBoundSettings {
    fn default() -> Self {
        PsiBoundSettings {
            kmax: 20,
            s_list: vec![2.0, 10.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrectorSettings {
    pub kmax: i32,
}

impl Default for CorrectorSettings {
    fn default() -> Self {
        CorrectorSettings { kmax: 60 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChaosSettings {
    pub forms: Vec<ChaosForm>,
}

impl Default for ChaosSettings {
    fn default() -> Self {
        ChaosSettings {
            forms: vec![
                ChaosForm::Linear { coeffs: vec![1.0] },
                ChaosForm::Monomial { degree: 2 },
                ChaosForm::Monomial { degree: 5 },
            ],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditSettings {
    pub counting: CountingSettings,
    pub psi_bound: PsiBoundSettings,
    pub psi_corrector: CorrectorSettings,
    pub chaos: ChaosSettings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightSettings {
    pub n_list: Vec<u32>,
    pub n_ref: u32,
    pub p_list: Vec<f64>,
}

impl Default for WeightSettings {
    fn default() -> Self {
        WeightSettings {
            n_list: vec![2, 4, 8, 16],
            n_ref: 32,
            p_list: vec![1.0, 2.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointwiseSettings {
    pub t0: f64,
    pub x0: Vec<f64>,
    pub n_tails: (u32, u32),
}

impl Default for PointwiseSettings {
    fn default() -> Self {
        PointwiseSettings {
            t0: 0.5,
            x0: vec![0.7],
            n_tails: (8, 16),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSettings {
    pub n_list: Vec<u32>,
    pub n_ref: u32,
    pub t: f64,
    pub seeds: Vec<u64>,
}

impl Default for ConvergenceSettings {
    fn default() -> Self {
        ConvergenceSettings {
            n_list: vec![4, 8, 16, 32],
            n_ref: 64,
            t: 1.0,
            seeds: vec![42, 43, 44],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSettings {
    pub weights: WeightSettings,
    pub pointwise: PointwiseSettings,
    pub convergence: ConvergenceSettings,
}

/// Everything a subcommand needs; serialised into every run manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: ModelParams,
    pub flow: FlowConfig,
    pub mc: McConfig,
    pub sampler: SamplerSettings,
    /// Input state file (binary or JSON); when absent, a state is drawn with
    /// the sampler settings.
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    pub budget: u64,
    pub threads: Option<usize>,
    pub audit: AuditSettings,
    pub experiments: ExperimentSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams::default(),
            flow: FlowConfig::default(),
            mc: McConfig::default(),
            sampler: SamplerSettings::default(),
            input: None,
            out: PathBuf::from("out"),
            budget: DEFAULT_BUDGET,
            threads: None,
            audit: AuditSettings::default(),
            experiments: ExperimentSettings::default(),
        }
    }
}

/// Flag overrides applied after the file and `--set` entries.
#[derive(Clone, Debug, Default)]
pub struct FlagOverrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub budget: Option<u64>,
}

/// Sets `path` (dot-separated) in `root` to `value`, creating objects on the way.
fn set_dotted(root: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("--set: malformed key '{path}'")));
    }
    for (i, part) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("--set {path}: '{}' is not an object", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("loop returns on the last segment")
}

/// Parses `key=value`; the value is read as JSON when possible, otherwise as a
/// string.
fn parse_set(entry: &str) -> Result<(&str, Value), CliError> {
    let (k, v) = entry
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value (got '{entry}')")))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim(), value))
}

/// Loads and validates the configuration.
pub fn load(path: Option<&Path>, sets: &[String], flags: &FlagOverrides) -> Result<RunConfig, CliError> {
    let base: RunConfig = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    let mut value = serde_json::to_value(&base).map_err(|e| CliError::Config(e.to_string()))?;
    for entry in sets {
        let (k, v) = parse_set(entry)?;
        set_dotted(&mut value, k, v)?;
    }
    let mut cfg: RunConfig =
        serde_json::from_value(value).map_err(|e| CliError::Config(format!("after --set overrides: {e}")))?;
    if let Some(out) = &flags.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = flags.seed {
        cfg.sampler.seed = seed;
        cfg.mc.seed = seed;
    }
    if let Some(t) = flags.threads {
        cfg.threads = Some(t);
    }
    if let Some(b) = flags.budget {
        cfg.budget = b;
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let wrap = |section: &str, e: torus_nls::Error| CliError::Config(format!("{section}: {e}"));
    cfg.params.validate().map_err(|e| wrap("params", e))?;
    cfg.flow.validate().map_err(|e| wrap("flow", e))?;
    cfg.mc.validate().map_err(|e| wrap("mc", e))?;
    cfg.sampler.spec(&cfg.params).validate().map_err(|e| wrap("sampler", e))?;
    if cfg.threads == Some(0) {
        return Err(CliError::Config("threads: must be ≥ 1".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_overrides_reach_nested_fields() {
        let sets = vec!["params.n=5".to_string(), "mc.p_grid=[2,4]".to_string(), "out=/tmp/x".to_string()];
        let cfg = load(None, &sets, &FlagOverrides::default()).unwrap();
        assert_eq!(cfg.params.n, 5);
        assert_eq!(cfg.mc.p_grid, vec![2.0, 4.0]);
        assert_eq!(cfg.out, PathBuf::from("/tmp/x"));
    }

    #[test]
    fn invalid_values_name_the_field() {
        let err = load(None, &["params.delta0=0.9".to_string()], &FlagOverrides::default()).unwrap_err();
        assert!(err.to_string().contains("delta0"), "{err}");
        let err = load(None, &["params.bogus=1".to_string()], &FlagOverrides::default()).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        assert!(load(None, &["novalue".to_string()], &FlagOverrides::default()).is_err());
    }

    #[test]
    fn file_errors_report_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, "{\n  \"params\": {\n    \"dim\": 1,\n    \"wat\": 2\n  }\n}\n").unwrap();
        let err = load(Some(&p), &[], &FlagOverrides::default()).unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
    }

    #[test]
    fn seed_flag_overrides_both_seeds() {
        let flags = FlagOverrides {
            seed: Some(7),
            ..Default::default()
        };
        let cfg = load(None, &[], &flags).unwrap();
        assert_eq!((cfg.sampler.seed, cfg.mc.seed), (7, 7));
    }
}
