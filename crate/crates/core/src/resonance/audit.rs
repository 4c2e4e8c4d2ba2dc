//! Lattice counting and ψ-bound audits.

use serde::{Deserialize, Serialize};

use super::{pow2s, SixTuple};
use crate::error::{check_budget, Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::lattice::Mode;

/// Points of the dyadic shell |k| ∈ (N/2, N] in dimension `dim`.
pub fn shell_points(dim: usize, n: u32) -> Vec<Mode> {
    let r = n as i32;
    let n2 = (n as i64).pow(2);
    let range = |on: bool| if on { -r..=r } else { 0..=0 };
    let mut out = Vec::new();
    for x in range(true) {
        for y in range(dim >= 2) {
            for z in range(dim >= 3) {
                let m = Mode([x, y, z]);
                let q = m.norm_sq();
                if 4 * q > n2 && q <= n2 {
                    out.push(m);
                }
            }
        }
    }
    out
}

#[inline]
fn in_shell(m: &Mode, n: u32) -> bool {
    let q = m.norm_sq();
    let n2 = (n as i64).pow(2);
    4 * q > n2 && q <= n2
}

/// One counting problem: shells N_j, signs ι_j, target K and κ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingQuery {
    pub dim: usize,
    pub shells: Vec<u32>,
    pub signs: Vec<i8>,
    pub target: Mode,
    pub kappa: i64,
}

/// Count, bound and ratio of one counting problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingResult {
    pub count: u64,
    pub bound: f64,
    pub ratio: f64,
}

/// N_(2)²·Π_{j≥3} N_(j)³ over the decreasingly sorted shells.
pub fn counting_bound(shells: &[u32]) -> f64 {
    let mut s: Vec<f64> = shells.iter().map(|&n| n as f64).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s[1].powi(2) * s[2..].iter().map(|n| n.powi(3)).product::<f64>()
}

fn validate_family(dim: usize, shells: &[u32], signs: &[i8]) -> Result<()> {
    if !(1..=3).contains(&dim) {
        return Err(Error::Param(format!("dim must be 1, 2 or 3 (got {dim})")));
    }
    if !(2..=6).contains(&shells.len()) {
        return Err(Error::Param(format!("counting needs 2 to 6 shells (got {})", shells.len())));
    }
    if shells.len() != signs.len() {
        return Err(Error::Param("shells and signs must have equal length".into()));
    }
    if shells.iter().any(|&n| n == 0 || !n.is_power_of_two()) {
        return Err(Error::Param(format!("shells must be positive dyadic integers (got {shells:?})")));
    }
    if signs.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::Param("signs must be ±1".into()));
    }
    Ok(())
}

/// Shared enumeration: all tuples with Σι_j k_j = K and the pair
/// exclusions, reported to `visit` together with κ = Σι_j|k_j|².
///
/// The largest shell is solved from the linear constraint; the others are
/// looped over their shell point lists.
struct Enumerator {
    shells: Vec<u32>,
    signs: Vec<i8>,
    solve: usize,
    free: Vec<usize>,
    points: Vec<Vec<Mode>>,
}

impl Enumerator {
    fn new(dim: usize, shells: &[u32], signs: &[i8]) -> Enumerator {
        let solve = (0..shells.len()).max_by_key(|&j| (shells[j], j)).unwrap();
        let free: Vec<usize> = (0..shells.len()).filter(|&j| j != solve).collect();
        let points = free.iter().map(|&j| shell_points(dim, shells[j])).collect();
        Enumerator {
            shells: shells.to_vec(),
            signs: signs.to_vec(),
            solve,
            free,
            points,
        }
    }

    fn visits_per_target(&self) -> u64 {
        self.points.iter().map(|p| p.len() as u64).product()
    }

    fn for_each(&self, target: Mode, mut visit: impl FnMut(i64)) {
        let n = self.shells.len();
        let mut ks = vec![Mode::ZERO; n];
        let mut idx = vec![0usize; self.free.len()];
        if self.points.iter().any(|p| p.is_empty()) {
            return;
        }
        loop {
            let mut partial = Mode::ZERO;
            for (f, &j) in self.free.iter().enumerate() {
                ks[j] = self.points[f][idx[f]];
                partial = if self.signs[j] > 0 { partial + ks[j] } else { partial - ks[j] };
            }
            let rest = target - partial;
            let solved = if self.signs[self.solve] > 0 { rest } else { -rest };
            if in_shell(&solved, self.shells[self.solve]) {
                ks[self.solve] = solved;
                if self.admissible(&ks) {
                    let kappa = ks
                        .iter()
                        .zip(&self.signs)
                        .map(|(k, &s)| s as i64 * k.norm_sq())
                        .sum();
                    visit(kappa);
                }
            }
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    return;
                }
                idx[pos] += 1;
                if idx[pos] < self.points[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    /// ι_i k_i + ι_j k_j ≠ 0 for all i ≠ j.
    fn admissible(&self, ks: &[Mode]) -> bool {
        for i in 0..ks.len() {
            for j in i + 1..ks.len() {
                let a = if self.signs[i] > 0 { ks[i] } else { -ks[i] };
                let b = if self.signs[j] > 0 { ks[j] } else { -ks[j] };
                if (a + b).is_zero() {
                    return false;
                }
            }
        }
        true
    }
}

/// Counts the tuples of one counting problem and compares with
/// N_(2)²·Π_{j≥3}N_(j)³.
pub fn counting_audit(q: &CountingQuery, budget: u64) -> Result<CountingResult> {
    validate_family(q.dim, &q.shells, &q.signs)?;
    let e = Enumerator::new(q.dim, &q.shells, &q.signs);
    check_budget(e.visits_per_target(), budget)?;
    let mut count = 0u64;
    e.for_each(q.target, |kappa| {
        if kappa == q.kappa {
            count += 1;
        }
    });
    let bound = counting_bound(&q.shells);
    Ok(CountingResult {
        count,
        bound,
        ratio: count as f64 / bound,
    })
}

/// A family member: fixed shells and signs, maximised over K and κ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingFamily {
    pub dim: usize,
    pub shells: Vec<u32>,
    pub signs: Vec<i8>,
}

/// Result of scanning one family member over all (K, κ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyScan {
    pub family: CountingFamily,
    pub max_count: u64,
    pub bound: f64,
    pub max_ratio: f64,
    pub argmax_target: Mode,
    pub argmax_kappa: i64,
    pub targets_scanned: usize,
    pub visits: u64,
}

/// Representatives of K under signed coordinate permutations with
/// |K_i| ≤ `reach`: K₁ ≥ K₂ ≥ K₃ ≥ 0 (restricted to `dim` axes).
fn canonical_targets(dim: usize, reach: i32) -> Vec<Mode> {
    let mut out = Vec::new();
    for a in 0..=reach {
        for b in 0..=if dim >= 2 { a } else { 0 } {
            for c in 0..=if dim >= 3 { b } else { 0 } {
                out.push(Mode([a, b, c]));
            }
        }
    }
    out
}

/// Maximises the counting ratio of one family member over every target K
/// (up to the hyperoctahedral symmetry, which preserves shells, signs and
/// exclusions) and every κ with |κ| ≤ N_(1)².
pub fn counting_family_scan(fam: &CountingFamily, budget: u64, mode: ExecMode) -> Result<FamilyScan> {
    validate_family(fam.dim, &fam.shells, &fam.signs)?;
    let e = Enumerator::new(fam.dim, &fam.shells, &fam.signs);
    let reach: u32 = fam.shells.iter().sum();
    let targets = canonical_targets(fam.dim, reach as i32);
    let visits = e.visits_per_target().saturating_mul(targets.len() as u64);
    check_budget(visits, budget)?;
    let n1 = *fam.shells.iter().max().unwrap() as i64;
    let kmax = n1 * n1;
    let per_target = map_indexed(targets.len(), mode, |i| {
        let mut hist = vec![0u64; (2 * kmax + 1) as usize];
        e.for_each(targets[i], |kappa| {
            if kappa.abs() <= kmax {
                hist[(kappa + kmax) as usize] += 1;
            }
        });
        let (best, &count) = hist
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .unwrap();
        (count, best as i64 - kmax)
    });
    let (mut best_i, mut best) = (0usize, (0u64, 0i64));
    for (i, &r) in per_target.iter().enumerate() {
        if r.0 > best.0 {
            best_i = i;
            best = r;
        }
    }
    let bound = counting_bound(&fam.shells);
    Ok(FamilyScan {
        family: fam.clone(),
        max_count: best.0,
        bound,
        max_ratio: best.0 as f64 / bound,
        argmax_target: targets[best_i],
        argmax_kappa: best.1,
        targets_scanned: targets.len(),
        visits,
    })
}

/// Result of a ψ-bound audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiBoundResult {
    pub s: f64,
    pub max_ratio: f64,
    pub argmax: Option<[Mode; 6]>,
    pub tuples: u64,
    /// Tuples skipped because the denominator vanishes (ψ is then checked to be 0).
    pub skipped: u64,
}

impl PsiBoundResult {
    fn empty(s: f64) -> Self {
        PsiBoundResult {
            s,
            max_ratio: 0.0,
            argmax: None,
            tuples: 0,
            skipped: 0,
        }
    }

    fn merge(mut self, o: PsiBoundResult) -> Self {
        if o.max_ratio > self.max_ratio {
            self.max_ratio = o.max_ratio;
            self.argmax = o.argmax;
        }
        self.tuples += o.tuples;
        self.skipped += o.skipped;
        self
    }

    fn push(&mut self, t: &SixTuple) -> Result<()> {
        self.tuples += 1;
        let mut sq = t.k.map(|m| m.norm_sq());
        sq.sort_unstable_by(|a, b| b.cmp(a));
        let psi = t.psi2s(self.s);
        let den = pow2s(sq[0], self.s - 1.0) * (t.omega().abs() + sq[2]) as f64;
        if den == 0.0 {
            if psi != 0.0 {
                return Err(Error::Degenerate(format!(
                    "ψ = {psi} ≠ 0 with vanishing denominator at {:?}",
                    t.k
                )));
            }
            self.skipped += 1;
            return Ok(());
        }
        let r = psi.abs() / den;
        if r > self.max_ratio {
            self.max_ratio = r;
            self.argmax = Some(t.k);
        }
        Ok(())
    }
}

/// max |ψ_{2s}| / (|k_(1)|^{2s−2}(|Ω| + |k_(3)|²)) over a sample of tuples.
pub fn psi_bound_audit<'a>(tuples: impl IntoIterator<Item = &'a SixTuple>, s: f64) -> Result<PsiBoundResult> {
    let mut r = PsiBoundResult::empty(s);
    for t in tuples {
        r.push(t)?;
    }
    Ok(r)
}

/// Exhaustive ψ-bound audit over all zero-sum six-tuples with |k_j| ≤ `kmax`
/// in d = 1, partitioned by the first index.
pub fn psi_bound_scan(kmax: i32, s: f64, mode: ExecMode) -> Result<PsiBoundResult> {
    let side = (2 * kmax + 1) as usize;
    let parts = map_indexed(side, mode, |i0| {
        let mut r = PsiBoundResult::empty(s);
        let k1 = i0 as i32 - kmax;
        for k2 in -kmax..=kmax {
            for k3 in -kmax..=kmax {
                for k4 in -kmax..=kmax {
                    for k5 in -kmax..=kmax {
                        let k6 = k1 - k2 + k3 - k4 + k5;
                        if k6.abs() > kmax {
                            continue;
                        }
                        let t = SixTuple {
                            k: [k1, k2, k3, k4, k5, k6].map(Mode::d1),
                        };
                        r.push(&t)?;
                    }
                }
            }
        }
        Ok(r)
    });
    parts
        .into_iter()
        .try_fold(PsiBoundResult::empty(s), |acc, p| p.map(|p| acc.merge(p)))
}
