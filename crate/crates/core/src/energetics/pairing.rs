//! Pairing contributions S₁₁, S₁₂, S₂₁, S₂₂, the correctors J and I, the
//! real main parts, and the classified second-generation remainders.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::corrector::{corrector_psi, main_quotient_11, main_quotient_12};
use super::Interaction;
use crate::error::{check_budget, Result};
use crate::lattice::Mode;
use crate::resonance::{classify, for_each_second_gen, slot_contains, slots, Family, PairingClass, SecondGenTuple, Slot, SlotKind, SIX_SIGNS};
use crate::sum::{ComplexSum, NeumaierSum};

/// All pairing sums evaluated over the canonical slots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairingSums {
    pub s11: Complex64,
    pub s12: Complex64,
    pub s21: Complex64,
    pub s22: Complex64,
    /// S₂₁ evaluated over the Λ₁₁ index set after relabelling.
    pub s21_relabel: Complex64,
    pub j: Complex64,
    pub i: Complex64,
    /// Λ₁₁ sum with the difference-quotient weight (real up to rounding).
    pub main1: Complex64,
    /// Σ|terms| of `main1`.
    pub main1_mass: f64,
    /// Λ₁₂ sum with the symmetric quotient weight (real up to rounding).
    pub main2: Complex64,
    pub main2_mass: f64,
    /// Σ|terms| of the S₁₁ − S₂₁ = main1 + J identity, termwise.
    pub s11_mass: f64,
    pub s12_mass: f64,
    /// Number of tuples in the canonical slots Λ₁₁, Λ₁₂, Λ₂₁, Λ₂₂.
    pub members: [u64; 4],
}

/// Direct classified evaluation of a second-generation remainder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifiedRemainder {
    pub type_a: Complex64,
    pub type_b: Complex64,
    pub type_c: Complex64,
    /// Σ (1 − m(t))·raw(t) over tuples lying in m(t) ≥ 1 pairing slots.
    pub overlap: Complex64,
    pub total: Complex64,
    /// Term counts of TypeA, TypeB, TypeC and slot-member tuples.
    pub counts: [u64; 4],
    pub slots: SlotCounts,
}

/// Slot-membership counts recovered from a full enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotCounts {
    /// Σ_t #{slots of the first (9-slot) kind containing t}.
    pub major_memberships: u64,
    /// Σ_t #{slots of the second (4-slot) kind containing t}.
    pub minor_memberships: u64,
    /// Size of the canonical slot of each kind.
    pub major_canonical: u64,
    pub minor_canonical: u64,
}

impl SlotCounts {
    /// Recovered multiplicities (memberships / canonical size).
    pub fn multiplicities(&self) -> (f64, f64) {
        (
            self.major_memberships as f64 / self.major_canonical as f64,
            self.minor_memberships as f64 / self.minor_canonical as f64,
        )
    }
}

/// Six-tuple position of stored outer leaf `o`.
fn outer_position(family: Family, o: usize) -> usize {
    match family {
        Family::R1 => o + 1,
        Family::R2 => {
            if o == 0 {
                0
            } else {
                o + 1
            }
        }
    }
}

const ALT: [i32; 5] = [1, -1, 1, -1, 1];

impl Interaction {
    /// Visits every tuple of the pairing set of `slot`, each exactly once.
    ///
    /// The paired mode runs over the active band; the other eight leaves run
    /// over active modes with pruned partial magnitude sums, bounded by
    /// 2·max|k|^θ ≥ |root|^θ + |paired|^θ; the last free outer leaf is solved
    /// from the zero-sum constraint. Exact membership is then checked.
    pub fn for_each_in_slot(&self, family: Family, slot: &Slot, mut f: impl FnMut(&SecondGenTuple)) {
        let theta = self.params().theta;
        let modes = self.active_set().modes();
        let bound = 2.0 * self.active_set().max_norm().powf(theta) * (1.0 + 1e-12) + 1e-12;
        let small: Vec<Mode> = modes.iter().copied().filter(|m| m.norm() <= bound).collect();
        let inner_free: Vec<usize> = (0..5).filter(|&j| j != slot.inner).collect();
        let outer_free: Vec<usize> = (0..5).filter(|&j| j != slot.outer).collect();
        let solved = *outer_free.last().unwrap();
        let enum_outer = &outer_free[..3];
        let rp = family.root_position();
        let sp = outer_position(family, solved);
        for &v in modes {
            let mut inner = [Mode::ZERO; 5];
            inner[slot.inner] = v;
            pruned(&small, 4, bound, &mut |vals: &[Mode]| {
                for (k, &j) in inner_free.iter().enumerate() {
                    inner[j] = vals[k];
                }
                let root = (0..5).fold(Mode::ZERO, |acc, j| if ALT[j] > 0 { acc + inner[j] } else { acc - inner[j] });
                if !self.active_set().contains(&root) {
                    return;
                }
                let mut outer = [Mode::ZERO; 5];
                outer[slot.outer] = v;
                pruned(&small, 3, bound, &mut |ov: &[Mode]| {
                    for (k, &j) in enum_outer.iter().enumerate() {
                        outer[j] = ov[k];
                    }
                    // Σ_j sign_j k_j = 0 solved for the six-tuple position sp.
                    let mut acc = if SIX_SIGNS[rp] > 0 { root } else { -root };
                    for j in 0..5 {
                        if j == solved {
                            continue;
                        }
                        let p = outer_position(family, j);
                        acc = if SIX_SIGNS[p] > 0 { acc + outer[j] } else { acc - outer[j] };
                    }
                    outer[solved] = if SIX_SIGNS[sp] > 0 { -acc } else { acc };
                    if !self.active_set().contains(&outer[solved]) {
                        return;
                    }
                    let t = SecondGenTuple {
                        family,
                        root,
                        outer,
                        inner,
                    };
                    if slot_contains(&t, slot, theta) {
                        f(&t);
                    }
                });
            });
        }
    }

    /// Product of the eight unpaired leaves of `t` for `slot`.
    fn eight_leaf(&self, t: &SecondGenTuple, slot: &Slot) -> Complex64 {
        let set = self.active_set();
        let mut z = Complex64::new(1.0, 0.0);
        for (j, (m, s)) in t.inner.iter().zip(t.family.inner_signs()).enumerate() {
            if j != slot.inner {
                z *= self.leaf(set.index_of(m).unwrap(), s);
            }
        }
        for (j, (m, s)) in t.outer.iter().zip(t.family.outer_signs()).enumerate() {
            if j != slot.outer {
                z *= self.leaf(set.index_of(m).unwrap(), s);
            }
        }
        z
    }

    /// One pairing part from its canonical slot.
    pub fn s_part(&self, kind: SlotKind) -> Complex64 {
        let (family, slot) = canonical(kind);
        let mut acc = ComplexSum::new();
        self.for_each_in_slot(family, &slot, |t| acc.push(self.raw_term(t)));
        acc.value()
    }

    /// All pairing sums, correctors and main parts.
    pub fn pairing_sums(&self) -> PairingSums {
        let p = self.params();
        let (s, d0, bump) = (p.s, p.delta0, p.bump_profile);
        let set = self.active_set();
        let chi = |m: &Mode| self.chi()[set.index_of(m).unwrap()];
        let w2 = |m: &Mode| self.w()[set.index_of(m).unwrap()].norm_sqr();

        let mut s11 = ComplexSum::new();
        let mut s21r = ComplexSum::new();
        let mut j = ComplexSum::new();
        let mut main1 = ComplexSum::new();
        let (mut mass1, mut mass11) = (NeumaierSum::new(), NeumaierSum::new());
        let mut members = [0u64; 4];
        let (fam, sl) = canonical(SlotKind::S11);
        self.for_each_in_slot(fam, &sl, |t| {
            members[0] += 1;
            let six = t.six().k;
            let (k1, k2) = (six[0], six[1]);
            let g = self.eight_leaf(t, &sl);
            let far = self.weight_params().far(&six);
            let (c1, c2) = (chi(&k1), chi(&k2));
            let a = c1 * c1 * w2(&k2);
            let b = c2 * c2 * w2(&k1);
            s11.push(far * a * g);
            s21r.push(far * b * g);
            let m1 = main_quotient_11(&k1, &k2, s, d0, &bump);
            let psi = corrector_psi(&six, s, d0, &bump);
            let mt = m1 * (a - b) * g;
            main1.push(mt);
            mass1.push(mt.norm());
            j.push(psi * (a - b) * g);
            mass11.push((far * (a - b) * g).norm() + mt.norm());
        });

        let mut s12 = ComplexSum::new();
        let mut i = ComplexSum::new();
        let mut main2 = ComplexSum::new();
        let (mut mass2, mut mass12) = (NeumaierSum::new(), NeumaierSum::new());
        let (fam, sl) = canonical(SlotKind::S12);
        self.for_each_in_slot(fam, &sl, |t| {
            members[1] += 1;
            let six = t.six().k;
            let (k1, k3) = (six[0], six[2]);
            let g = self.eight_leaf(t, &sl);
            let far = self.weight_params().far(&six);
            let c1 = chi(&k1);
            let a = c1 * c1 * w2(&k3);
            let m2 = main_quotient_12(&k1, &k3, s);
            s12.push(far * a * g);
            let mt = m2 * a * g;
            main2.push(mt);
            mass2.push(mt.norm());
            i.push((far - m2) * a * g);
            mass12.push((far * a * g).norm() + mt.norm());
        });

        let mut s21 = ComplexSum::new();
        let (fam, sl) = canonical(SlotKind::S21);
        self.for_each_in_slot(fam, &sl, |t| {
            members[2] += 1;
            s21.push(self.raw_term(t));
        });
        let mut s22 = ComplexSum::new();
        let (fam, sl) = canonical(SlotKind::S22);
        self.for_each_in_slot(fam, &sl, |t| {
            members[3] += 1;
            s22.push(self.raw_term(t));
        });

        PairingSums {
            s11: s11.value(),
            s12: s12.value(),
            s21: s21.value(),
            s22: s22.value(),
            s21_relabel: s21r.value(),
            j: j.value(),
            i: i.value(),
            main1: main1.value(),
            main1_mass: mass1.value(),
            main2: main2.value(),
            main2_mass: mass2.value(),
            s11_mass: mass11.value(),
            s12_mass: mass12.value(),
            members,
        }
    }

    /// Direct classified evaluation of R₁₃ (family R1) or R₂₃ (family R2):
    /// Σ_t raw(t)·(1 − m(t)) with m(t) the number of pairing slots holding t.
    /// Tuples outside every slot are split by their TypeA/B/C tag.
    pub fn classified_remainder(&self, family: Family, budget: u64) -> Result<ClassifiedRemainder> {
        check_budget((self.active_set().len() as u64).saturating_pow(9), budget)?;
        let theta = self.params().theta;
        let sl = slots(family);
        let mut sums = [ComplexSum::new(); 4];
        let mut counts = [0u64; 4];
        let mut sc = SlotCounts {
            major_memberships: 0,
            minor_memberships: 0,
            major_canonical: 0,
            minor_canonical: 0,
        };
        for_each_second_gen(self.active_set(), family, |t| {
            let mut major = 0u64;
            let mut minor = 0u64;
            for (n, s) in sl.iter().enumerate() {
                if slot_contains(t, s, theta) {
                    if n < 9 {
                        major += 1;
                        if n == 0 {
                            sc.major_canonical += 1;
                        }
                    } else {
                        minor += 1;
                        if n == 9 {
                            sc.minor_canonical += 1;
                        }
                    }
                }
            }
            sc.major_memberships += major;
            sc.minor_memberships += minor;
            let raw = self.raw_term(t);
            let m = major + minor;
            if m > 0 {
                counts[3] += 1;
                sums[3].push(raw * (1.0 - m as f64));
                return;
            }
            let c = match classify(t, theta) {
                PairingClass::TypeA => 0,
                PairingClass::TypeB => 1,
                PairingClass::TypeC => 2,
                other => unreachable!("tuple outside every slot classified as {other:?}"),
            };
            counts[c] += 1;
            sums[c].push(raw);
        });
        let v = sums.map(|s| s.value());
        let total = sums.iter().fold(ComplexSum::new(), |a, b| a + *b).value();
        Ok(ClassifiedRemainder {
            type_a: v[0],
            type_b: v[1],
            type_c: v[2],
            overlap: v[3],
            total,
            counts,
            slots: sc,
        })
    }
}

/// Canonical (family, slot) of each kind.
pub(crate) fn canonical(kind: SlotKind) -> (Family, Slot) {
    let (family, n) = match kind {
        SlotKind::S11 => (Family::R1, 0),
        SlotKind::S12 => (Family::R1, 9),
        SlotKind::S21 => (Family::R2, 0),
        SlotKind::S22 => (Family::R2, 9),
    };
    (family, slots(family)[n])
}

/// Visits all `len`-tuples from `pool` whose magnitude sum is ≤ `bound`.
fn pruned(pool: &[Mode], len: usize, bound: f64, f: &mut dyn FnMut(&[Mode])) {
    fn rec(pool: &[Mode], len: usize, bound: f64, acc: f64, cur: &mut Vec<Mode>, f: &mut dyn FnMut(&[Mode])) {
        if cur.len() == len {
            f(cur);
            return;
        }
        for &m in pool {
            let a = acc + m.norm();
            if a <= bound {
                cur.push(m);
                rec(pool, len, bound, a, cur, f);
                cur.pop();
            }
        }
    }
    let mut cur = Vec::with_capacity(len);
    rec(pool, len, bound, 0.0, &mut cur, f);
}
