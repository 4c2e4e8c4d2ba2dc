//! Lattice geometry, spectral states, cutoff operators, norms, grid
//! transforms and the dealiased quintic nonlinearity.
//!
//! Convention: `u(x) = Σ_k û_k e^{ik·x}` on the 2π-periodic torus `T^d`;
//! every integral carries its `(2π)^d` factor explicitly.

mod cutoff;
mod field;
mod grid;
mod io;

pub use cutoff::{smooth_cutoff, CutoffProfile};
pub use field::SpectralField;
pub use grid::{fft_size_at_least, quintic_nonlinearity, Grid, QuinticOperator};
pub use io::{read_field, write_field, FieldFormat};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::{Add, Neg, Sub};

/// A lattice wavenumber. Components beyond the ambient dimension are zero,
/// so the derived lexicographic order is the canonical mode order in every
/// dimension.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mode(pub [i32; 3]);

impl Mode {
    pub const ZERO: Mode = Mode([0, 0, 0]);

    /// Builds a mode from up to three components.
    pub fn new(c: &[i32]) -> Mode {
        let mut m = [0; 3];
        m[..c.len()].copy_from_slice(c);
        Mode(m)
    }

    /// One-dimensional mode `k`.
    pub fn d1(k: i32) -> Mode {
        Mode([k, 0, 0])
    }

    /// |k|² (an integer).
    #[inline]
    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|&c| c as i64 * c as i64).sum()
    }

    /// Euclidean length |k|.
    #[inline]
    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    /// The first `dim` components.
    pub fn components(&self, dim: usize) -> &[i32] {
        &self.0[..dim]
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }
}

impl Add for Mode {
    type Output = Mode;
    #[inline]
    fn add(self, o: Mode) -> Mode {
        Mode([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Mode {
    type Output = Mode;
    #[inline]
    fn sub(self, o: Mode) -> Mode {
        Mode([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Mode {
    type Output = Mode;
    #[inline]
    fn neg(self) -> Mode {
        Mode([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::Param(format!("dimension must be 1, 2 or 3 (got {dim})")))
    }
}

/// All lattice points with |k| ≤ `n`, in lexicographic order.
pub fn modes_within(n: f64, dim: usize) -> Result<Vec<Mode>> {
    check_dim(dim)?;
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::Param(format!("radius must be finite and ≥ 0 (got {n})")));
    }
    let r = n.floor() as i32;
    let r2 = n * n;
    let range = |active: bool| if active { -r..=r } else { 0..=0 };
    let mut out = Vec::new();
    for x in range(true) {
        for y in range(dim >= 2) {
            for z in range(dim >= 3) {
                let m = Mode([x, y, z]);
                if (m.norm_sq() as f64) <= r2 {
                    out.push(m);
                }
            }
        }
    }
    Ok(out)
}

/// A finite ordered set of modes with O(1) index lookup.
#[derive(Clone, Debug)]
pub struct ModeSet {
    dim: usize,
    modes: Vec<Mode>,
    half: i32,
    side: usize,
    lookup: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl ModeSet {
    /// The ball {|k| ≤ cutoff}.
    pub fn ball(dim: usize, cutoff: f64) -> Result<ModeSet> {
        ModeSet::from_modes(dim, modes_within(cutoff, dim)?)
    }

    /// An arbitrary set of distinct modes (kept in the given order).
    pub fn from_modes(dim: usize, modes: Vec<Mode>) -> Result<ModeSet> {
        check_dim(dim)?;
        let half = modes
            .iter()
            .flat_map(|m| m.0.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0);
        let side = 2 * half as usize + 1;
        let mut lookup = vec![ABSENT; side.pow(dim as u32)];
        let mut set = ModeSet {
            dim,
            modes: Vec::new(),
            half,
            side,
            lookup: Vec::new(),
        };
        for (i, m) in modes.iter().enumerate() {
            if m.0[dim..].iter().any(|&c| c != 0) {
                return Err(Error::Param(format!("mode {m} has components beyond dimension {dim}")));
            }
            let slot = set.slot(m).expect("inside bounding box");
            if lookup[slot] != ABSENT {
                return Err(Error::Param(format!("duplicate mode {m}")));
            }
            lookup[slot] = i as u32;
        }
        set.modes = modes;
        set.lookup = lookup;
        Ok(set)
    }

    #[inline]
    fn slot(&self, m: &Mode) -> Option<usize> {
        let mut idx = 0usize;
        for c in &m.0[..self.dim] {
            if c.abs() > self.half {
                return None;
            }
            idx = idx * self.side + (c + self.half) as usize;
        }
        if m.0[self.dim..].iter().any(|&c| c != 0) {
            return None;
        }
        Some(idx)
    }

    /// Position of `m` in the set, if present.
    #[inline]
    pub fn index_of(&self, m: &Mode) -> Option<usize> {
        self.slot(m).and_then(|s| {
            let v = self.lookup[s];
            (v != ABSENT).then_some(v as usize)
        })
    }

    pub fn contains(&self, m: &Mode) -> bool {
        self.index_of(m).is_some()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Largest |k| in the set.
    pub fn max_norm(&self) -> f64 {
        self.modes.iter().map(|m| m.norm()).fold(0.0, f64::max)
    }
}
