//! One function per subcommand. Each writes its outputs atomically into the
//! output directory together with `manifest.json` and returns a one-line
//! human summary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;
use torus_nls::dynamics::{convergence_study, evolve};
use torus_nls::energetics::{corrector_audit_psi, corrector_audit_psi_tilde, q_total, EnergyReport, Interaction};
use torus_nls::exec::ExecMode;
use torus_nls::experiments::{
    chaos_audit, measure_transport, moment_growth, pointwise_law, weight_integrability,
};
use torus_nls::lattice::{read_field, write_field, FieldFormat};
use torus_nls::random::{sample_ensemble, sample_mu_s, write_ensemble};
use torus_nls::report::{write_atomic, LongTable, RunManifest};
use torus_nls::resonance::{counting_family_scan, psi_bound_scan, Family};
use torus_nls::SpectralField;

use crate::config::RunConfig;
use crate::{log, AuditKind, CliError, McKind};

/// Output directory, timing and the list of written files for one run.
pub struct Run<'a> {
    pub cfg: &'a RunConfig,
    pub command: String,
    mode: ExecMode,
    start: Instant,
    outputs: Vec<String>,
}

impl<'a> Run<'a> {
    pub fn new(cfg: &'a RunConfig, command: &str) -> Self {
        Run {
            cfg,
            command: command.to_string(),
            mode: ExecMode::default(),
            start: Instant::now(),
            outputs: Vec::new(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(torus_nls::Error::from)?;
        write_atomic(&self.path(name), text.as_bytes())?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn csv(&mut self, name: &str, table: &LongTable) -> Result<(), CliError> {
        table.write_csv(&self.path(name))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn state(&mut self, name: &str, u: &SpectralField) -> Result<(), CliError> {
        write_field(&self.path(name), u, FieldFormat::Binary)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Writes `manifest.json` (the resolved config is enough to rerun).
    pub fn finish(mut self) -> Result<(), CliError> {
        let config = serde_json::to_value(self.cfg).map_err(torus_nls::Error::from)?;
        let seeds = json!({
            "sampler_seed": self.cfg.sampler.seed,
            "sampler_stream": self.cfg.sampler.stream_id,
            "mc_seed": self.cfg.mc.seed,
            "mc_stream_base": self.cfg.mc.stream_base,
        });
        let mut m = RunManifest::new(&self.command, config, seeds, self.start.elapsed().as_secs_f64());
        m.outputs = std::mem::take(&mut self.outputs);
        m.write(&self.path("manifest.json"))?;
        Ok(())
    }
}

/// The input state: the configured file, or a draw with the sampler settings.
fn input_state(cfg: &RunConfig) -> Result<SpectralField, CliError> {
    match &cfg.input {
        Some(p) => read_field(p).map_err(|e| CliError::Config(format!("input {}: {e}", p.display()))),
        None => Ok(sample_mu_s(&cfg.sampler.spec(&cfg.params))?),
    }
}

fn check_dim(cfg: &RunConfig, u: &SpectralField) -> Result<(), CliError> {
    if u.dim() != cfg.params.dim {
        return Err(CliError::Config(format!(
            "input state has d = {} but params.dim = {}",
            u.dim(),
            cfg.params.dim
        )));
    }
    Ok(())
}

pub fn sample(run: &mut Run) -> Result<String, CliError> {
    let cfg = run.cfg;
    let spec = cfg.sampler.spec(&cfg.params);
    let fields = sample_ensemble(&spec, cfg.sampler.count, run.mode)?;
    write_ensemble(&run.path("ensemble"), &spec, &fields)?;
    run.outputs.push("ensemble/".into());
    Ok(format!("wrote {} samples to {}", fields.len(), run.path("ensemble").display()))
}

pub fn evolve_cmd(run: &mut Run) -> Result<String, CliError> {
    let cfg = run.cfg;
    let u = input_state(cfg)?;
    check_dim(cfg, &u)?;
    let rec = evolve(&u, &cfg.params, &cfg.flow)?;
    rec.write_csv(&run.path("trajectory.csv"))?;
    run.outputs.push("trajectory.csv".into());
    run.state("state_initial.spf", &u)?;
    if let Some(fin) = &rec.final_state {
        run.state("state_final.spf", fin)?;
    }
    Ok(format!(
        "evolved to t = {}: mass drift {:.3e}, H_N drift {:.3e}",
        cfg.flow.t_end,
        torus_nls::dynamics::TrajectoryRecord::max_relative_drift(&rec.mass),
        torus_nls::dynamics::TrajectoryRecord::max_relative_drift(&rec.hamiltonian_n),
    ))
}

fn energy_summary(r: &EnergyReport) -> String {
    format!(
        "E_sN = {:.12e}, R_sN = {:.12e}, Q_sN = {:.12e} ({} active modes)",
        r.e_sn, r.r_sn, r.q_sn, r.active_modes
    )
}

/// `energy`: the table-based quantities only (no direct enumerations).
pub fn energy(run: &mut Run) -> Result<String, CliError> {
    let u = input_state(run.cfg)?;
    check_dim(run.cfg, &u)?;
    let report = q_total(&u, &run.cfg.params, 0, run.mode)?;
    run.json("energy.json", &report)?;
    Ok(energy_summary(&report))
}

/// `decompose`: every part and identity residual the budget allows.
pub fn decompose(run: &mut Run) -> Result<String, CliError> {
    let u = input_state(run.cfg)?;
    check_dim(run.cfg, &u)?;
    let report = q_total(&u, &run.cfg.params, run.cfg.budget, run.mode)?;
    if report.parts.r13.direct_total.is_none() {
        // The direct classification did not fit the budget: surface why.
        Interaction::new(&u, &run.cfg.params)?.classified_remainder(Family::R1, run.cfg.budget)?;
    }
    run.json("decompose.json", &report)?;
    Ok(energy_summary(&report))
}

pub fn audit(run: &mut Run, which: AuditKind) -> Result<String, CliError> {
    let cfg = run.cfg;
    match which {
        AuditKind::Counting => {
            let mut table = LongTable::new("counting_audit", &["dim", "shells", "signs"]);
            let mut scans = Vec::new();
            for fam in &cfg.audit.counting.families {
                let s = counting_family_scan(fam, cfg.budget, run.mode)?;
                let key = [
                    fam.dim.to_string(),
                    fam.shells.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
                    fam.signs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
                ];
                table.push(&key, "max_count", s.max_count as f64, None);
                table.push(&key, "bound", s.bound, None);
                table.push(&key, "max_ratio", s.max_ratio, None);
                scans.push(s);
            }
            run.csv("counting.csv", &table)?;
            run.json("counting.json", &scans)?;
            let worst = scans.iter().map(|s| s.max_ratio).fold(0.0, f64::max);
            Ok(format!("{} families scanned, largest ratio {worst}", scans.len()))
        }
        AuditKind::PsiBound => {
            let mut table = LongTable::new("psi_bound_audit", &["s", "kmax"]);
            let mut results = Vec::new();
            for &s in &cfg.audit.psi_bound.s_list {
                let r = psi_bound_scan(cfg.audit.psi_bound.kmax, s, run.mode)?;
                let key = [s.to_string(), cfg.audit.psi_bound.kmax.to_string()];
                table.push(&key, "max_ratio", r.max_ratio, None);
                table.push(&key, "tuples", r.tuples as f64, None);
                results.push(r);
            }
            run.csv("psi_bound.csv", &table)?;
            run.json("psi_bound.json", &results)?;
            let worst = results.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
            Ok(format!("ψ-bound audit: largest ratio {worst}"))
        }
        AuditKind::PsiCorrector => {
            let kmax = cfg.audit.psi_corrector.kmax;
            let psi = corrector_audit_psi(kmax, &cfg.params, run.mode);
            let tilde = corrector_audit_psi_tilde(kmax, &cfg.params, run.mode);
            let mut table = LongTable::new("corrector_audit", &["corrector", "kmax"]);
            for (name, a) in [("psi", &psi), ("psi_tilde", &tilde)] {
                let key = [name.to_string(), kmax.to_string()];
                table.push(&key, "max_ratio", a.max_ratio, None);
                table.push(&key, "max_ratio_far", a.max_ratio_far, None);
                table.push(&key, "tuples", a.tuples as f64, None);
            }
            run.csv("psi_corrector.csv", &table)?;
            run.json("psi_corrector.json", &json!({ "psi": psi, "psi_tilde": tilde }))?;
            Ok(format!(
                "corrector audit: Ψ ratio {}, Ψ̃ ratio {}",
                psi.max_ratio, tilde.max_ratio
            ))
        }
        AuditKind::Chaos => {
            let mut table: Option<LongTable> = None;
            let mut reports = Vec::new();
            for form in &cfg.audit.chaos.forms {
                let r = chaos_audit(form, &cfg.mc, run.mode)?;
                let t = r.to_table();
                match table.as_mut() {
                    Some(acc) => acc.rows.extend(t.rows),
                    None => table = Some(t),
                }
                reports.push(r);
            }
            if let Some(t) = &table {
                run.csv("chaos.csv", t)?;
            }
            run.json("chaos.json", &reports)?;
            let exps: Vec<String> = reports
                .iter()
                .map(|r| format!("n={}: {}", r.degree, r.exponent.map_or("unreliable".into(), |e| format!("{e:.3}"))))
                .collect();
            Ok(format!("chaos exponents {}", exps.join(", ")))
        }
        AuditKind::DualPath => {
            let u = input_state(cfg)?;
            check_dim(cfg, &u)?;
            let ix = Interaction::new(&u, &cfg.params)?;
            let mut out = serde_json::Map::new();
            let mut worst = 0.0f64;
            for (name, fam) in [("r1", Family::R1), ("r2", Family::R2)] {
                let grid = ix.r_family_grid(fam, cfg.budget, run.mode)?;
                let naive = ix.r_family_naive(fam, cfg.budget)?;
                let rel = (grid - naive).norm() / naive.norm().max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                out.insert(
                    name.into(),
                    json!({ "grid": [grid.re, grid.im], "naive": [naive.re, naive.im], "relative_difference": rel }),
                );
            }
            run.json("dual_path.json", &out)?;
            Ok(format!("dual-path audit: largest relative difference {worst:.3e}"))
        }
    }
}

pub fn mc(run: &mut Run, which: McKind) -> Result<String, CliError> {
    let cfg = run.cfg;
    match which {
        McKind::Moments => {
            let r = moment_growth(&cfg.params, &cfg.mc, run.mode)?;
            run.csv("moments.csv", &r.to_table())?;
            run.json("moments.json", &r)?;
            Ok(match (r.beta_hat, r.beta_ci) {
                (Some(b), Some(ci)) => format!("β̂ = {b:.4} (CI {:.4}..{:.4})", ci.0, ci.1),
                _ => format!(
                    "β̂ unavailable: fewer than two moment orders reach ESS ≥ {} ({} of {} samples in the ball)",
                    cfg.mc.min_ess, r.in_ball, r.samples
                ),
            })
        }
        McKind::Weights => {
            let w = &cfg.experiments.weights;
            let r = weight_integrability(&cfg.params, &w.n_list, w.n_ref, &w.p_list, &cfg.mc, run.mode)?;
            run.csv("weights.csv", &r.to_table())?;
            run.json("weights.json", &r)?;
            Ok(format!("weights: relative spread {:.3e} across N", r.relative_spread))
        }
        McKind::Transport => {
            let r = measure_transport(&cfg.params, &cfg.mc, run.mode)?;
            run.csv("transport.csv", &r.to_table())?;
            run.json("transport.json", &r)?;
            let slopes: Vec<String> = r
                .slopes
                .iter()
                .map(|s| format!("t={}: {}", s.t, s.slope.map_or("n/a".into(), |v| format!("{v:.3}"))))
                .collect();
            Ok(format!("transport slopes {}", slopes.join(", ")))
        }
        McKind::PointwiseLaw => {
            let p = &cfg.experiments.pointwise;
            let r = pointwise_law(&cfg.params, p.t0, &p.x0, p.n_tails, &cfg.mc, run.mode)?;
            run.csv("pointwise_law.csv", &r.to_table())?;
            run.json("pointwise_law.json", &r)?;
            Ok(format!(
                "two-sample KS p-values: Re {:.3}, Im {:.3}; max atom {}",
                r.ks_two_sample_re.p_value,
                r.ks_two_sample_im.p_value,
                r.coarse.max_atom.max(r.fine.max_atom)
            ))
        }
        McKind::Convergence => {
            let c = &cfg.experiments.convergence;
            let mut table = LongTable::new("convergence", &["seed", "N"]);
            let mut reports = Vec::new();
            for &seed in &c.seeds {
                let spec = torus_nls::random::SamplerSpec {
                    master_seed: seed,
                    ..cfg.sampler.spec_with_tail(&cfg.params, c.n_ref)
                };
                let u = sample_mu_s(&spec)?;
                let r = convergence_study(&u, &cfg.params, &c.n_list, c.n_ref, c.t, cfg.params.sigma, &cfg.flow, run.mode)?;
                for row in &r.rows {
                    let key = [seed.to_string(), row.n.to_string()];
                    table.push(&key, "sup_distance", row.sup_distance, None);
                    table.push(&key, "sup_norm", row.sup_norm, None);
                }
                reports.push(json!({ "seed": seed, "report": r }));
            }
            run.csv("convergence.csv", &table)?;
            run.json("convergence.json", &reports)?;
            Ok(format!("convergence study over {} seeds", reports.len()))
        }
    }
}

/// Writes `error.json` into `out` (best effort, when known) and logs the
/// failure.
pub fn report_error(out: Option<&Path>, err: &CliError) {
    let doc = json!({
        "error": err.kind(),
        "message": err.to_string(),
        "exit_code": err.exit_code(),
    });
    if let (Some(out), Ok(text)) = (out, serde_json::to_string_pretty(&doc)) {
        let _ = write_atomic(&out.join("error.json"), text.as_bytes());
    }
    log::error(&err.to_string(), json!({ "kind": err.kind(), "exit_code": err.exit_code() }));
}
