use super::{CutoffProfile, Mode, ModeSet};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Complex Fourier coefficients on the ball {|k| ≤ cutoff}.
///
/// Reads outside the stored ball return zero. The mode set is shared between
/// clones, so copying a field only copies its coefficient vector.
#[derive(Clone, Debug)]
pub struct SpectralField {
    set: Arc<ModeSet>,
    cutoff: u32,
    coeffs: Vec<Complex64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.cutoff == other.cutoff && self.coeffs == other.coeffs
    }
}

impl SpectralField {
    /// The zero field stored on |k| ≤ `cutoff`.
    pub fn zeros(dim: usize, cutoff: u32) -> Result<Self> {
        let set = Arc::new(ModeSet::ball(dim, cutoff as f64)?);
        let n = set.len();
        Ok(SpectralField {
            set,
            cutoff,
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    /// A field sharing `template`'s mode set with the given coefficients.
    pub fn with_coeffs(template: &SpectralField, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != template.coeffs.len() {
            return Err(Error::Param(format!(
                "coefficient count {} does not match the mode count {}",
                coeffs.len(),
                template.coeffs.len()
            )));
        }
        Ok(SpectralField {
            set: template.set.clone(),
            cutoff: template.cutoff,
            coeffs,
        })
    }

    /// Builds a field by evaluating `f` on every stored mode.
    pub fn from_fn(dim: usize, cutoff: u32, mut f: impl FnMut(&Mode) -> Complex64) -> Result<Self> {
        let mut u = SpectralField::zeros(dim, cutoff)?;
        for (c, m) in u.coeffs.iter_mut().zip(u.set.modes()) {
            *c = f(m);
        }
        Ok(u)
    }

    /// `c·e^{ik·x}` stored on |k'| ≤ `cutoff`.
    pub fn single_mode(dim: usize, cutoff: u32, k: Mode, c: Complex64) -> Result<Self> {
        let mut u = SpectralField::zeros(dim, cutoff)?;
        u.set(&k, c)?;
        Ok(u)
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn mode_set(&self) -> &Arc<ModeSet> {
        &self.set
    }

    pub fn modes(&self) -> &[Mode] {
        self.set.modes()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Iterator over (mode, coefficient).
    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &Complex64)> {
        self.set.modes().iter().zip(self.coeffs.iter())
    }

    /// û_k, or zero outside the stored ball.
    #[inline]
    pub fn get(&self, k: &Mode) -> Complex64 {
        self.set
            .index_of(k)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// Sets û_k; fails outside the stored ball.
    pub fn set(&mut self, k: &Mode, v: Complex64) -> Result<()> {
        match self.set.index_of(k) {
            Some(i) => {
                self.coeffs[i] = v;
                Ok(())
            }
            None => Err(Error::Param(format!("mode {k} is outside the stored cutoff {}", self.cutoff))),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// The same field stored on |k| ≤ `cutoff` (restriction or zero-extension).
    pub fn resized(&self, cutoff: u32) -> Result<Self> {
        let mut out = SpectralField::zeros(self.dim(), cutoff)?;
        for (m, c) in out.set.clone().modes().iter().zip(out.coeffs.iter_mut()) {
            *c = self.get(m);
        }
        Ok(out)
    }

    fn map_modes(&self, f: impl Fn(&Mode) -> f64) -> Self {
        let coeffs = self.iter().map(|(m, c)| c * f(m)).collect();
        SpectralField {
            set: self.set.clone(),
            cutoff: self.cutoff,
            coeffs,
        }
    }

    /// S_N: multiply û_k by profile(|k|/N).
    pub fn apply_smooth_truncation(&self, n: f64, profile: &CutoffProfile) -> Self {
        self.map_modes(|m| profile.eval(m.norm() / n))
    }

    /// Π_N: keep |k| ≤ N.
    pub fn apply_sharp_truncation(&self, n: f64) -> Self {
        self.map_modes(|m| if (m.norm_sq() as f64) <= n * n { 1.0 } else { 0.0 })
    }

    fn weighted_sum(&self, w: impl Fn(&Mode) -> f64) -> f64 {
        self.iter()
            .map(|(m, c)| w(m) * c.norm_sqr())
            .sum::<crate::sum::NeumaierSum>()
            .value()
    }

    /// ‖u‖²_{H^σ} = Σ (1+|k|²)^σ |û_k|².
    pub fn sobolev_norm_sq(&self, sigma: f64) -> f64 {
        self.weighted_sum(|m| (1.0 + m.norm_sq() as f64).powf(sigma))
    }

    /// |||u|||²_s = Σ (1+|k|^{2s}) |û_k|².
    pub fn triple_norm_sq(&self, s: f64) -> f64 {
        self.weighted_sum(|m| 1.0 + (m.norm_sq() as f64).powf(s))
    }

    /// M[u] = (2π)^d Σ |û_k|².
    pub fn mass(&self) -> f64 {
        (2.0 * PI).powi(self.dim() as i32) * self.weighted_sum(|_| 1.0)
    }

    /// ∫|∇u|² = (2π)^d Σ |k|² |û_k|².
    pub fn gradient_energy(&self) -> f64 {
        (2.0 * PI).powi(self.dim() as i32) * self.weighted_sum(|m| m.norm_sq() as f64)
    }

    /// Relative H^σ distance helper: ‖u − v‖_{H^σ} for fields on any cutoffs.
    pub fn sobolev_distance(&self, other: &SpectralField, sigma: f64) -> f64 {
        let (big, small) = if self.cutoff >= other.cutoff { (self, other) } else { (other, self) };
        big.iter()
            .map(|(m, c)| (1.0 + m.norm_sq() as f64).powf(sigma) * (c - small.get(m)).norm_sqr())
            .sum::<crate::sum::NeumaierSum>()
            .value()
            .sqrt()
    }
}
