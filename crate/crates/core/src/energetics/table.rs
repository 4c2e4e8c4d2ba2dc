//! Canonical interaction table: the zero-sum six-tuple sums rewritten over
//! pairs of sorted triples.
//!
//! A six-tuple splits into its unconjugated triple A = {k₁,k₃,k₅} and its
//! conjugated triple B = {k₂,k₄,k₆} with equal vector sums. The weights are
//! symmetric within each triple, the far weight is invariant under A ↔ B and
//! the near weight changes sign, and A = B gives Ω = ψ = 0. Every sum is thus
//! a sum over unordered pairs A < B with multiplicity m_A·m_B, where m counts
//! the distinct orderings of a triple (1, 3 or 6).

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{Interaction, WeightParams};
use crate::error::{Error, Result};
use crate::exec::{map_chunks, map_indexed, ExecMode};
use crate::lattice::Mode;
use crate::resonance::pow2s;
use crate::sum::{ComplexSum, NeumaierSum};

#[derive(Clone, Copy, Debug)]
struct Pair {
    a: u32,
    b: u32,
    far: f64,
    near: f64,
}

/// Precomputed pair list for a fixed active band and weight parameters.
#[derive(Clone, Debug)]
pub struct InteractionTable {
    modes: Vec<Mode>,
    weights: WeightParams,
    triples: Vec<[u32; 3]>,
    mult: Vec<f64>,
    pairs: Vec<Pair>,
}

/// The four sums a table evaluation produces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableSums {
    pub r_sn: f64,
    pub r0: Complex64,
    pub r1: Complex64,
    pub r2: Complex64,
}

const CHUNK: usize = 1 << 14;

fn orderings(t: &[u32; 3]) -> f64 {
    match (t[0] == t[1], t[1] == t[2]) {
        (true, true) => 1.0,
        (false, false) => 6.0,
        _ => 3.0,
    }
}

impl InteractionTable {
    /// Builds the table for the active band of `ix`.
    pub fn new(ix: &Interaction, mode: ExecMode) -> InteractionTable {
        Self::build(ix.active_set().modes().to_vec(), *ix.weight_params(), mode)
    }

    /// Builds the table for an explicit list of modes.
    pub fn build(modes: Vec<Mode>, weights: WeightParams, mode: ExecMode) -> InteractionTable {
        let n = modes.len() as u32;
        let mut triples = Vec::new();
        let mut groups: BTreeMap<Mode, Vec<u32>> = BTreeMap::new();
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    let sum = modes[a as usize] + modes[b as usize] + modes[c as usize];
                    groups.entry(sum).or_default().push(triples.len() as u32);
                    triples.push([a, b, c]);
                }
            }
        }
        let sq: Vec<i64> = modes.iter().map(|m| m.norm_sq()).collect();
        let pw: Vec<f64> = sq.iter().map(|&q| pow2s(q, weights.s)).collect();
        let groups: Vec<Vec<u32>> = groups.into_values().collect();
        let per_group = map_indexed(groups.len(), mode, |g| {
            let members = &groups[g];
            let mut out = Vec::new();
            for (x, &ia) in members.iter().enumerate() {
                for &ib in &members[x + 1..] {
                    let (ta, tb) = (triples[ia as usize], triples[ib as usize]);
                    let six = [ta[0], tb[0], ta[1], tb[1], ta[2], tb[2]].map(|i| i as usize);
                    let (far, near) = weights.from_powers(&six.map(|i| sq[i]), &six.map(|i| pw[i]));
                    if far != 0.0 || near != 0.0 {
                        out.push(Pair { a: ia, b: ib, far, near });
                    }
                }
            }
            out
        });
        let mult = triples.iter().map(orderings).collect();
        InteractionTable {
            modes,
            weights,
            triples,
            mult,
            pairs: per_group.concat(),
        }
    }

    /// Number of stored pairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of sorted triples.
    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    fn check(&self, ix: &Interaction) -> Result<()> {
        if ix.active_set().modes() != self.modes.as_slice() || *ix.weight_params() != self.weights {
            return Err(Error::Param(
                "interaction table was built for a different band or weight parameters".into(),
            ));
        }
        Ok(())
    }

    fn products(&self, w: &[Complex64]) -> Vec<Complex64> {
        self.triples
            .iter()
            .map(|t| w[t[0] as usize] * w[t[1] as usize] * w[t[2] as usize])
            .collect()
    }

    /// V(A) = Σ over distinct orderings (x,y,z) of A of g_x w_y w_z.
    fn v_values(&self, w: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
        self.triples
            .iter()
            .zip(&self.mult)
            .map(|(t, &m)| {
                let [a, b, c] = t.map(|i| i as usize);
                (m / 3.0) * (g[a] * w[b] * w[c] + g[b] * w[a] * w[c] + g[c] * w[a] * w[b])
            })
            .collect()
    }

    /// R_{s,N} alone (no quintic coefficients needed).
    pub fn r_sn(&self, ix: &Interaction, mode: ExecMode) -> Result<f64> {
        self.check(ix)?;
        let u = self.products(ix.w());
        let parts = map_chunks(self.pairs.len(), CHUNK, mode, |r| {
            let mut acc = NeumaierSum::new();
            for p in &self.pairs[r] {
                if p.far != 0.0 {
                    let (a, b) = (p.a as usize, p.b as usize);
                    let re = (u[a] * u[b].conj()).re;
                    acc.push(2.0 * self.mult[a] * self.mult[b] * p.far * re);
                }
            }
            acc
        });
        Ok(parts.into_iter().fold(NeumaierSum::new(), |x, y| x + y).value() / 6.0)
    }

    /// R_{s,N}, R₀, R₁ and R₂ in one pass.
    pub fn evaluate(&self, ix: &Interaction, mode: ExecMode) -> Result<TableSums> {
        self.check(ix)?;
        let w = ix.w();
        let g = ix.chi2_f();
        let u = self.products(w);
        let v = self.v_values(w, &g);
        let parts = map_chunks(self.pairs.len(), CHUNK, mode, |r| {
            let (mut rs, mut r0, mut r1, mut r2) =
                (NeumaierSum::new(), NeumaierSum::new(), ComplexSum::new(), ComplexSum::new());
            for p in &self.pairs[r] {
                let (a, b) = (p.a as usize, p.b as usize);
                let (ma, mb) = (self.mult[a], self.mult[b]);
                let z = u[a] * u[b].conj();
                if p.near != 0.0 {
                    r0.push(2.0 * ma * mb * p.near * z.im);
                }
                if p.far != 0.0 {
                    rs.push(2.0 * ma * mb * p.far * z.re);
                    r1.push(p.far * (v[a] * (mb * u[b].conj()) + v[b] * (ma * u[a].conj())));
                    r2.push(p.far * ((ma * u[a]) * v[b].conj() + (mb * u[b]) * v[a].conj()));
                }
            }
            (rs, r0, r1, r2)
        });
        let (rs, r0, r1, r2) = parts.into_iter().fold(
            (NeumaierSum::new(), NeumaierSum::new(), ComplexSum::new(), ComplexSum::new()),
            |acc, p| (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2, acc.3 + p.3),
        );
        Ok(TableSums {
            r_sn: rs.value() / 6.0,
            r0: Complex64::new(0.0, r0.value()),
            r1: r1.value(),
            r2: r2.value(),
        })
    }
}
