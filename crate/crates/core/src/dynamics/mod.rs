//! Time integration of the truncated flow `i∂_tû_k = |k|²û_k + χ_N(k)F_k`,
//! conservation monitoring, finite-difference energy derivatives and
//! truncation-convergence studies.
//!
//! Modes with χ_N > 0 are advanced by the chosen integrator; every other
//! stored mode evolves by the exact linear phase `e^{−i|k|²t}`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::energetics::{Interaction, InteractionTable};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::lattice::{QuinticOperator, SpectralField};
use crate::params::ModelParams;
use crate::sum::NeumaierSum;

/// Time integrator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Integrator {
    /// Integrating-factor (Lawson) RK4: exact linear phase, RK4 on the
    /// nonlinear part in the rotated frame.
    #[default]
    #[serde(rename = "ifrk4", alias = "IFRK4")]
    Ifrk4,
    /// Strang splitting: half linear step, nonlinear step by four RK4
    /// micro-steps, half linear step.
    #[serde(rename = "strang", alias = "StrangSplit")]
    Strang,
}

/// Integration settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    /// Grid size per axis; `None` picks the smallest FFT-friendly size ≥ 6N+1.
    pub dealias_m: Option<usize>,
    /// Steps between monitor records (the final time is always recorded).
    pub monitor_every: usize,
    /// Whether to record E_{s,N} along the trajectory.
    pub record_energy: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            dt: 1e-3,
            t_end: 1.0,
            integrator: Integrator::Ifrk4,
            dealias_m: None,
            monitor_every: 100,
            record_energy: false,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Param(format!("flow.dt must be finite and > 0 (got {})", self.dt)));
        }
        if !self.t_end.is_finite() {
            return Err(Error::Param("flow.t_end must be finite".into()));
        }
        if self.monitor_every == 0 {
            return Err(Error::Param("flow.monitor_every must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Number of steps and signed step size covering `[0, t]`.
    pub fn steps_for(&self, t: f64) -> (usize, f64) {
        if t == 0.0 {
            return (0, 0.0);
        }
        let n = ((t.abs() / self.dt).round() as usize).max(1);
        (n, t / n as f64)
    }
}

/// Monitored quantities along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub hamiltonian_n: Vec<f64>,
    pub h_sigma_norm: Vec<f64>,
    pub e_sn: Option<Vec<f64>>,
    #[serde(skip)]
    pub final_state: Option<SpectralField>,
}

impl TrajectoryRecord {
    /// max_t |X(t) − X(0)| / |X(0)| for a monitored series.
    pub fn max_relative_drift(series: &[f64]) -> f64 {
        let x0 = series[0];
        let scale = if x0 == 0.0 { 1.0 } else { x0.abs() };
        series.iter().map(|x| (x - x0).abs() / scale).fold(0.0, f64::max)
    }

    /// Writes the monitors as CSV (time, mass, hamiltonian_N, h_sigma_norm[, e_sN]).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["time", "mass", "hamiltonian_N", "h_sigma_norm"];
        if self.e_sn.is_some() {
            header.push("e_sN");
        }
        w.write_record(&header)?;
        for i in 0..self.times.len() {
            let mut row = vec![
                format!("{:e}", self.times[i]),
                format!("{:e}", self.mass[i]),
                format!("{:e}", self.hamiltonian_n[i]),
                format!("{:e}", self.h_sigma_norm[i]),
            ];
            if let Some(e) = &self.e_sn {
                row.push(format!("{:e}", e[i]));
            }
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        crate::report::write_atomic(path, &bytes)
    }
}

/// `û_k ↦ e^{−i|k|²t}û_k` on every stored mode.
pub fn linear_flow(u: &SpectralField, t: f64) -> SpectralField {
    let mut v = u.clone();
    let set = u.mode_set().clone();
    for (m, c) in set.modes().iter().zip(v.coeffs_mut()) {
        *c *= phase(m.norm_sq() as f64, t);
    }
    v
}

#[inline]
fn phase(omega: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -omega * t)
}

/// The truncated flow for one band and parameter set.
pub struct Flow {
    params: ModelParams,
    op: QuinticOperator,
    /// |k|² on the active band.
    omega: Vec<f64>,
}

impl Flow {
    /// Flow acting on fields shaped like `template`.
    pub fn new(template: &SpectralField, params: &ModelParams, dealias_m: Option<usize>) -> Result<Flow> {
        params.validate()?;
        let op = QuinticOperator::for_field(template, params, dealias_m)?;
        let omega = op.active_modes().iter().map(|m| m.norm_sq() as f64).collect();
        Ok(Flow {
            params: params.clone(),
            op,
            omega,
        })
    }

    pub fn operator(&self) -> &QuinticOperator {
        &self.op
    }

    /// Nonlinear vector field −iχ_N F(χ_N a) on the active band.
    fn nonlinear(&self, a: &[Complex64]) -> Vec<Complex64> {
        let chi = self.op.chi();
        let w: Vec<Complex64> = a.iter().zip(chi).map(|(x, c)| x * c).collect();
        let f = self.op.quintic_of_active(&w);
        f.iter().zip(chi).map(|(f, c)| Complex64::new(0.0, -1.0) * f * c).collect()
    }

    fn rotate(&self, a: &[Complex64], t: f64) -> Vec<Complex64> {
        a.iter().zip(&self.omega).map(|(x, &o)| x * phase(o, t)).collect()
    }

    fn step_ifrk4(&self, a: &[Complex64], h: f64) -> Vec<Complex64> {
        let axpy = |x: &[Complex64], s: f64, y: &[Complex64]| -> Vec<Complex64> {
            x.iter().zip(y).map(|(x, y)| x + y * s).collect()
        };
        let k1 = self.nonlinear(a);
        let k2 = self.nonlinear(&self.rotate(&axpy(a, h / 2.0, &k1), h / 2.0));
        let ea_half = self.rotate(a, h / 2.0);
        let k3 = self.nonlinear(&axpy(&ea_half, h / 2.0, &k2));
        let ea = self.rotate(a, h);
        let k4 = self.nonlinear(&axpy(&ea, h, &self.rotate(&k3, h / 2.0)));
        let ek1 = self.rotate(&k1, h);
        let mid: Vec<Complex64> = k2.iter().zip(&k3).map(|(x, y)| x + y).collect();
        let emid = self.rotate(&mid, h / 2.0);
        (0..a.len())
            .map(|i| ea[i] + (ek1[i] + emid[i] * 2.0 + k4[i]) * (h / 6.0))
            .collect()
    }

    fn step_strang(&self, a: &[Complex64], h: f64) -> Vec<Complex64> {
        let mut b = self.rotate(a, h / 2.0);
        let micro = h / 4.0;
        for _ in 0..4 {
            let k1 = self.nonlinear(&b);
            let t: Vec<Complex64> = b.iter().zip(&k1).map(|(x, k)| x + k * (micro / 2.0)).collect();
            let k2 = self.nonlinear(&t);
            let t: Vec<Complex64> = b.iter().zip(&k2).map(|(x, k)| x + k * (micro / 2.0)).collect();
            let k3 = self.nonlinear(&t);
            let t: Vec<Complex64> = b.iter().zip(&k3).map(|(x, k)| x + k * micro).collect();
            let k4 = self.nonlinear(&t);
            for i in 0..b.len() {
                b[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (micro / 6.0);
            }
        }
        self.rotate(&b, h / 2.0)
    }

    fn active_state(&self, u: &SpectralField) -> Vec<Complex64> {
        self.op.active().iter().map(|&i| u.coeffs()[i]).collect()
    }

    /// State at time t: active modes from `a`, the rest exactly rotated from `u0`.
    fn assemble(&self, u0: &SpectralField, a: &[Complex64], t: f64) -> SpectralField {
        let mut v = linear_flow(u0, t);
        for (&i, &x) in self.op.active().iter().zip(a) {
            v.coeffs_mut()[i] = x;
        }
        v
    }

    /// Advances `u0` to time `t`, calling `observe(time, state)` at t = 0,
    /// every `monitor_every` steps and at the final time.
    pub fn run(
        &self,
        u0: &SpectralField,
        t: f64,
        cfg: &FlowConfig,
        mut observe: impl FnMut(f64, &SpectralField) -> Result<()>,
    ) -> Result<SpectralField> {
        cfg.validate()?;
        let (n, h) = cfg.steps_for(t);
        let mut a = self.active_state(u0);
        observe(0.0, u0)?;
        for step in 1..=n {
            a = match cfg.integrator {
                Integrator::Ifrk4 => self.step_ifrk4(&a, h),
                Integrator::Strang => self.step_strang(&a, h),
            };
            let time = step as f64 * h;
            if a.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
                return Err(Error::Integration { t: time });
            }
            if step % cfg.monitor_every == 0 || step == n {
                observe(time, &self.assemble(u0, &a, time))?;
            }
        }
        Ok(self.assemble(u0, &a, n as f64 * h))
    }

    /// Φ_N(t)u without monitoring.
    pub fn advance(&self, u0: &SpectralField, t: f64, cfg: &FlowConfig) -> Result<SpectralField> {
        self.run(u0, t, cfg, |_, _| Ok(()))
    }

    /// H_N[u] = ½∫|∇u|² + (1/6)∫|S_N u|⁶.
    pub fn hamiltonian(&self, u: &SpectralField) -> f64 {
        0.5 * u.gradient_energy() + self.op.sextic_integral(u.coeffs()) / 6.0
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
}

/// Evolves `u` to `cfg.t_end`, recording mass, H_N, the H^σ norm and
/// optionally E_{s,N}.
pub fn evolve(u: &SpectralField, params: &ModelParams, cfg: &FlowConfig) -> Result<TrajectoryRecord> {
    let flow = Flow::new(u, params, cfg.dealias_m)?;
    let table = if cfg.record_energy {
        let ix = Interaction::new(u, params)?;
        Some(InteractionTable::new(&ix, ExecMode::default()))
    } else {
        None
    };
    let mut rec = TrajectoryRecord {
        times: Vec::new(),
        mass: Vec::new(),
        hamiltonian_n: Vec::new(),
        h_sigma_norm: Vec::new(),
        e_sn: table.as_ref().map(|_| Vec::new()),
        final_state: None,
    };
    let fin = flow.run(u, cfg.t_end, cfg, |t, v| {
        rec.times.push(t);
        rec.mass.push(v.mass());
        rec.hamiltonian_n.push(flow.hamiltonian(v));
        rec.h_sigma_norm.push(v.sobolev_norm_sq(params.sigma).sqrt());
        if let (Some(tab), Some(e)) = (&table, rec.e_sn.as_mut()) {
            let ix = Interaction::new(v, params)?;
            e.push(0.5 * v.triple_norm_sq(params.s) + tab.r_sn(&ix, ExecMode::default())?);
        }
        Ok(())
    })?;
    rec.final_state = Some(fin);
    Ok(rec)
}

/// E_{s,N}(v) − E_{s,N}(u) with the H^s part differenced mode by mode.
fn energy_difference(
    v: &SpectralField,
    u: &SpectralField,
    params: &ModelParams,
    table: &InteractionTable,
) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    for ((m, a), b) in v.modes().iter().zip(v.coeffs()).zip(u.coeffs()) {
        let weight = 1.0 + (m.norm_sq() as f64).powf(params.s);
        acc.push(0.5 * weight * (a.norm_sqr() - b.norm_sqr()));
    }
    let rv = table.r_sn(&Interaction::new(v, params)?, ExecMode::default())?;
    let ru = table.r_sn(&Interaction::new(u, params)?, ExecMode::default())?;
    acc.push(rv);
    acc.push(-ru);
    Ok(acc.value())
}

/// Richardson-extrapolated central difference of E_{s,N} along Φ_N at t = 0:
/// with D(h) = [E(Φ(h)u) − E(Φ(−h)u)]/(2h), returns (4D(h/2) − D(h))/3.
/// Each evaluation uses four IFRK4 steps over the interval.
pub fn finite_difference_q(u: &SpectralField, params: &ModelParams, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Param(format!("finite-difference step must be > 0 (got {h})")));
    }
    let flow = Flow::new(u, params, None)?;
    let table = InteractionTable::new(&Interaction::new(u, params)?, ExecMode::default());
    let d = |h: f64| -> Result<f64> {
        let cfg = FlowConfig {
            dt: h / 4.0,
            ..FlowConfig::default()
        };
        let plus = flow.advance(u, h, &cfg)?;
        let minus = flow.advance(u, -h, &cfg)?;
        Ok(energy_difference(&plus, &minus, params, &table)? / (2.0 * h))
    };
    let (d1, d2) = (d(h)?, d(h / 2.0)?);
    Ok((4.0 * d2 - d1) / 3.0)
}

/// One row of a convergence study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u32,
    /// sup over the shared time grid of ‖Φ_N(t)u − Φ_ref(t)u‖_{H^σ}.
    pub sup_distance: f64,
    /// sup over the time grid of ‖Φ_N(t)u‖_{H^σ}.
    pub sup_norm: f64,
}

/// Result of a convergence study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub n_ref: u32,
    pub t: f64,
    pub sigma: f64,
    pub times: Vec<f64>,
    pub rows: Vec<ConvergenceRow>,
    /// sup of the reference trajectory's H^σ norm.
    pub ref_sup_norm: f64,
}

/// Compares Φ_N(t')u with Φ_{N_ref}(t')u in H^σ on a shared time grid for
/// each N in `n_list`.
pub fn convergence_study(
    u: &SpectralField,
    params: &ModelParams,
    n_list: &[u32],
    n_ref: u32,
    t: f64,
    sigma: f64,
    cfg: &FlowConfig,
    mode: ExecMode,
) -> Result<ConvergenceReport> {
    if n_list.iter().any(|&n| n > n_ref) {
        return Err(Error::Param(format!("every N must be ≤ N_ref = {n_ref}")));
    }
    let trajectory = |n: u32| -> Result<(Vec<f64>, Vec<SpectralField>)> {
        let p = ModelParams { n, ..params.clone() };
        let flow = Flow::new(u, &p, None)?;
        let (mut times, mut states) = (Vec::new(), Vec::new());
        flow.run(u, t, cfg, |time, v| {
            times.push(time);
            states.push(v.clone());
            Ok(())
        })?;
        Ok((times, states))
    };
    let mut all: Vec<u32> = n_list.to_vec();
    all.push(n_ref);
    let runs: Vec<Result<(Vec<f64>, Vec<SpectralField>)>> = map_indexed(all.len(), mode, |i| trajectory(all[i]));
    let mut runs: Vec<(Vec<f64>, Vec<SpectralField>)> = runs.into_iter().collect::<Result<_>>()?;
    let (times, reference) = runs.pop().unwrap();
    let sup_norm = |states: &[SpectralField]| {
        states
            .iter()
            .map(|v| v.sobolev_norm_sq(sigma).sqrt())
            .fold(0.0, f64::max)
    };
    let rows = n_list
        .iter()
        .zip(&runs)
        .map(|(&n, (_, states))| ConvergenceRow {
            n,
            sup_distance: states
                .iter()
                .zip(&reference)
                .map(|(a, b)| a.sobolev_distance(b, sigma))
                .fold(0.0, f64::max),
            sup_norm: sup_norm(states),
        })
        .collect();
    Ok(ConvergenceReport {
        n_ref,
        t,
        sigma,
        times,
        rows,
        ref_sup_norm: sup_norm(&reference),
    })
}

#[cfg(test)]
mod tests;
