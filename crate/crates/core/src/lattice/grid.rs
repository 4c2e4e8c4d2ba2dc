use super::{CutoffProfile, Mode, ModeSet, SpectralField};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Smallest 5-smooth integer (2^a·3^b·5^c) that is ≥ `n`.
pub fn fft_size_at_least(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// A uniform grid of `m` points per axis on `T^d` with cached FFT plans.
///
/// `to_grid` evaluates `Σ_k û_k e^{ik·x_j}` at `x_j = 2πj/m`; `from_grid`
/// is its exact inverse on band-limited data.
#[derive(Clone)]
pub struct Grid {
    dim: usize,
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Grid {{ dim: {}, m: {} }}", self.dim, self.m)
    }
}

impl Grid {
    pub fn new(dim: usize, m: usize) -> Result<Grid> {
        if !(1..=3).contains(&dim) || m == 0 {
            return Err(Error::Param(format!("invalid grid (dim {dim}, m {m})")));
        }
        let mut planner = FftPlanner::new();
        Ok(Grid {
            dim,
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of grid points m^d.
    pub fn points(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    /// Flat grid index of the frequency `k` (components taken mod m).
    #[inline]
    pub fn freq_index(&self, k: &Mode) -> usize {
        let m = self.m as i64;
        k.0[..self.dim]
            .iter()
            .fold(0usize, |acc, &c| acc * self.m + (c as i64).rem_euclid(m) as usize)
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        let total = data.len();
        // The last axis is contiguous: transform every line in one call.
        plan.process(data);
        if self.dim == 1 {
            return;
        }
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        for axis in 0..self.dim - 1 {
            let stride = m.pow((self.dim - 1 - axis) as u32);
            let block = stride * m;
            for start in (0..total).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = data[base + j * stride];
                    }
                    plan.process(&mut line);
                    for (j, v) in line.iter().enumerate() {
                        data[base + j * stride] = *v;
                    }
                }
            }
        }
    }

    /// Grid values of the trigonometric polynomial with the given (mode, coeff) pairs.
    pub fn synthesize<'a>(&self, terms: impl IntoIterator<Item = (&'a Mode, Complex64)>) -> Vec<Complex64> {
        let mut data = vec![Complex64::new(0.0, 0.0); self.points()];
        for (k, c) in terms {
            data[self.freq_index(k)] += c;
        }
        self.transform(&mut data, &self.inverse);
        data
    }

    /// Normalized discrete Fourier coefficients of grid values (in place).
    pub fn analyze(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
        let scale = 1.0 / self.points() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Grid values of `u`; requires m ≥ 2·N_store + 1.
    pub fn to_grid(&self, u: &SpectralField) -> Result<Vec<Complex64>> {
        let min = 2 * u.cutoff() as usize + 1;
        if self.m < min || u.dim() != self.dim {
            return Err(Error::Aliasing { m: self.m, min });
        }
        Ok(self.synthesize(u.iter().map(|(k, c)| (k, *c))))
    }

    /// Spectral field on |k| ≤ `cutoff` from grid values; requires m ≥ 2·cutoff + 1.
    pub fn from_grid(&self, values: &[Complex64], cutoff: u32) -> Result<SpectralField> {
        let min = 2 * cutoff as usize + 1;
        if self.m < min {
            return Err(Error::Aliasing { m: self.m, min });
        }
        if values.len() != self.points() {
            return Err(Error::Param(format!(
                "expected {} grid values, got {}",
                self.points(),
                values.len()
            )));
        }
        let mut data = values.to_vec();
        self.analyze(&mut data);
        SpectralField::from_fn(self.dim, cutoff, |k| data[self.freq_index(k)])
    }
}

/// Dealiased evaluator of `S_N(|S_N u|⁴ S_N u)` for fields on a fixed mode set.
///
/// Only the active modes (χ_N > 0) enter the product. The grid has at least
/// `6B + 1` points per axis, where `B` bounds the components of the active
/// modes, so the quintic product is alias-free on the active band and the
/// sextic integral is computed exactly.
#[derive(Clone, Debug)]
pub struct QuinticOperator {
    grid: Grid,
    /// Indices (into the field's mode set) of modes with χ_N > 0.
    active: Vec<usize>,
    /// χ_N at each active mode.
    chi: Vec<f64>,
    /// Active modes.
    modes: Vec<Mode>,
    /// Flat grid index of each active mode.
    slots: Vec<usize>,
    dim: usize,
}

impl QuinticOperator {
    /// Operator for fields on `set` with truncation level `n` (`None` = no
    /// truncation: χ_N ≡ 1 on the stored band).
    pub fn new(set: &ModeSet, n: Option<f64>, profile: &CutoffProfile, min_m: Option<usize>) -> Result<Self> {
        let mut active = Vec::new();
        let mut chi = Vec::new();
        for (i, m) in set.modes().iter().enumerate() {
            let c = match n {
                Some(n) => profile.eval(m.norm() / n),
                None => 1.0,
            };
            if c > 0.0 {
                active.push(i);
                chi.push(c);
            }
        }
        let modes: Vec<Mode> = active.iter().map(|&i| set.modes()[i]).collect();
        let band = modes
            .iter()
            .flat_map(|m| m.0.iter().map(|c| c.unsigned_abs() as usize))
            .max()
            .unwrap_or(0);
        let needed = 6 * band + 1;
        let m = match min_m {
            Some(m) if m < needed => return Err(Error::Aliasing { m, min: needed }),
            Some(m) => m,
            None => fft_size_at_least(needed),
        };
        let grid = Grid::new(set.dim(), m)?;
        let slots = modes.iter().map(|k| grid.freq_index(k)).collect();
        Ok(QuinticOperator {
            grid,
            active,
            chi,
            modes,
            slots,
            dim: set.dim(),
        })
    }

    /// Operator matching a field and truncation parameters.
    pub fn for_field(u: &SpectralField, params: &crate::ModelParams, min_m: Option<usize>) -> Result<Self> {
        let n = (!params.untruncated).then_some(params.n as f64);
        QuinticOperator::new(u.mode_set(), n, &params.frequency_profile, min_m)
    }

    pub fn grid_size(&self) -> usize {
        self.grid.m()
    }

    /// Indices of the active modes in the field's mode set.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// χ_N at the active modes.
    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    pub fn active_modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Grid values of `W = Σ_active w_j e^{ik_j·x}` for coefficients given on the active modes.
    fn synth_active(&self, w: &[Complex64]) -> Vec<Complex64> {
        let mut data = vec![Complex64::new(0.0, 0.0); self.grid.points()];
        for (&slot, &c) in self.slots.iter().zip(w) {
            data[slot] += c;
        }
        self.grid.transform(&mut data, &self.grid.inverse);
        data
    }

    /// Fourier coefficients of `|W|⁴W` at the active modes, where `W` has
    /// coefficients `w` on the active modes.
    pub fn quintic_of_active(&self, w: &[Complex64]) -> Vec<Complex64> {
        let mut data = self.synth_active(w);
        for v in data.iter_mut() {
            let a = v.norm_sqr();
            *v *= a * a;
        }
        self.grid.analyze(&mut data);
        self.slots.iter().map(|&s| data[s]).collect()
    }

    /// `w_k = χ_N(k) û_k` on the active modes.
    pub fn weighted_active(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        self.active.iter().zip(&self.chi).map(|(&i, &c)| coeffs[i] * c).collect()
    }

    /// Coefficients of `S_N(|S_N u|⁴ S_N u)` on the full mode set (zero off the active band).
    pub fn apply_coeffs(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let w = self.weighted_active(coeffs);
        let f = self.quintic_of_active(&w);
        let mut out = vec![Complex64::new(0.0, 0.0); coeffs.len()];
        for ((&i, &c), v) in self.active.iter().zip(&self.chi).zip(f) {
            out[i] = v * c;
        }
        out
    }

    pub fn apply(&self, u: &SpectralField) -> SpectralField {
        let out = self.apply_coeffs(u.coeffs());
        SpectralField::with_coeffs(u, out).expect("same mode set")
    }

    /// `∫|S_N u|⁶ dx` by exact grid quadrature.
    pub fn sextic_integral(&self, coeffs: &[Complex64]) -> f64 {
        let w = self.weighted_active(coeffs);
        let data = self.synth_active(&w);
        let mean = data
            .iter()
            .map(|v| v.norm_sqr().powi(3))
            .sum::<crate::sum::NeumaierSum>()
            .value()
            / self.grid.points() as f64;
        (2.0 * PI).powi(self.dim as i32) * mean
    }
}

/// Coefficients of `S_N(|S_N u|⁴ S_N u)` on `u`'s mode set.
pub fn quintic_nonlinearity(u: &SpectralField, n: f64, profile: &CutoffProfile) -> Result<SpectralField> {
    Ok(QuinticOperator::new(u.mode_set(), Some(n), profile, None)?.apply(u))
}

impl SpectralField {
    /// H[u] = ½∫|∇u|² + (1/6)∫|u|⁶.
    pub fn hamiltonian(&self) -> Result<f64> {
        let op = QuinticOperator::new(self.mode_set(), None, &CutoffProfile::radial(), None)?;
        Ok(0.5 * self.gradient_energy() + op.sextic_integral(self.coeffs()) / 6.0)
    }

    /// H_N[u] = ½∫|∇u|² + (1/6)∫|S_N u|⁶.
    pub fn truncated_hamiltonian(&self, n: f64, profile: &CutoffProfile) -> Result<f64> {
        let op = QuinticOperator::new(self.mode_set(), Some(n), profile, None)?;
        Ok(0.5 * self.gradient_energy() + op.sextic_integral(self.coeffs()) / 6.0)
    }
}
