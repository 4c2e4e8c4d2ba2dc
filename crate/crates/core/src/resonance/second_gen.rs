//! Two-generation tuples, pairing slots and the total classifier.

use super::SixTuple;
use crate::lattice::{Mode, ModeSet};

/// Which outer position carries the nested quintic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Family {
    /// Root at k₁ (unconjugated position); inner leaves p₁…p₅.
    R1,
    /// Root at k₂ (conjugated position); inner leaves q₁…q₅.
    R2,
}

impl Family {
    /// Conjugation signature of the inner leaves: +1 for w, −1 for w̄.
    pub fn inner_signs(self) -> [i8; 5] {
        match self {
            Family::R1 => [1, -1, 1, -1, 1],
            Family::R2 => [-1, 1, -1, 1, -1],
        }
    }

    /// Conjugation signature of the outer leaves, in stored order
    /// (k₂…k₆ for R1; k₁,k₃,k₄,k₅,k₆ for R2).
    pub fn outer_signs(self) -> [i8; 5] {
        match self {
            Family::R1 => [-1, 1, -1, 1, -1],
            Family::R2 => [1, 1, -1, 1, -1],
        }
    }

    /// Position of the root inside the six-tuple (0-based).
    pub fn root_position(self) -> usize {
        match self {
            Family::R1 => 0,
            Family::R2 => 1,
        }
    }
}

/// A second-generation tuple: a six-tuple whose root position is expanded
/// into five inner leaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SecondGenTuple {
    pub family: Family,
    pub root: Mode,
    /// Outer leaves: k₂…k₆ (R1) or k₁,k₃,k₄,k₅,k₆ (R2).
    pub outer: [Mode; 5],
    /// Inner leaves p₁…p₅ (R1) or q₁…q₅ (R2).
    pub inner: [Mode; 5],
}

impl SecondGenTuple {
    /// Builds the tuple, deriving the root from the inner leaves.
    pub fn new(family: Family, outer: [Mode; 5], inner: [Mode; 5]) -> SecondGenTuple {
        let root = inner[0] - inner[1] + inner[2] - inner[3] + inner[4];
        SecondGenTuple {
            family,
            root,
            outer,
            inner,
        }
    }

    /// The underlying first-generation six-tuple (k₁…k₆).
    pub fn six(&self) -> SixTuple {
        let o = self.outer;
        let k = match self.family {
            Family::R1 => [self.root, o[0], o[1], o[2], o[3], o[4]],
            Family::R2 => [o[0], self.root, o[1], o[2], o[3], o[4]],
        };
        SixTuple { k }
    }

    /// Whether both linear constraints hold.
    pub fn is_valid(&self) -> bool {
        let [a, b, c, d, e, f] = self.six().k;
        let inner_root = self.inner[0] - self.inner[1] + self.inner[2] - self.inner[3] + self.inner[4];
        inner_root == self.root && (a - b + c - d + e - f).is_zero()
    }

    /// The ten visible leaves: inner first, then outer.
    pub fn leaves(&self) -> [Mode; 10] {
        let mut out = [Mode::ZERO; 10];
        out[..5].copy_from_slice(&self.inner);
        out[5..].copy_from_slice(&self.outer);
        out
    }

    /// Leaf indices (0–4 inner, 5–9 outer) in the documented total order:
    /// |k| descending, then lexicographically larger mode first, then inner
    /// before outer, then leaf index.
    pub fn leaf_order(&self) -> [usize; 10] {
        let leaves = self.leaves();
        let mut idx: [usize; 10] = std::array::from_fn(|i| i);
        idx.sort_by(|&a, &b| {
            leaves[b]
                .norm_sq()
                .cmp(&leaves[a].norm_sq())
                .then_with(|| leaves[b].cmp(&leaves[a]))
                .then_with(|| a.cmp(&b))
        });
        idx
    }

    /// Leaf magnitudes |k_(1)| ≥ … ≥ |k_(10)|.
    pub fn rearranged_norms(&self) -> [f64; 10] {
        let leaves = self.leaves();
        self.leaf_order().map(|i| leaves[i].norm())
    }
}

/// The four pairing-slot kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum SlotKind {
    S11,
    S12,
    S21,
    S22,
}

/// A pairing of inner leaf `inner` with outer leaf `outer` (stored indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    pub kind: SlotKind,
    pub inner: usize,
    pub outer: usize,
}

const fn slot(kind: SlotKind, inner: usize, outer: usize) -> Slot {
    Slot { kind, inner, outer }
}

use SlotKind::*;

/// R1: 9 slots pairing p₁,p₃,p₅ with k₂,k₄,k₆, then 4 pairing p₂,p₄ with k₃,k₅.
const R1_SLOTS: [Slot; 13] = [
    slot(S11, 0, 0),
    slot(S11, 0, 2),
    slot(S11, 0, 4),
    slot(S11, 2, 0),
    slot(S11, 2, 2),
    slot(S11, 2, 4),
    slot(S11, 4, 0),
    slot(S11, 4, 2),
    slot(S11, 4, 4),
    slot(S12, 1, 1),
    slot(S12, 1, 3),
    slot(S12, 3, 1),
    slot(S12, 3, 3),
];

/// R2: 9 slots pairing q₁,q₃,q₅ with k₁,k₃,k₅, then 4 pairing q₂,q₄ with k₄,k₆.
const R2_SLOTS: [Slot; 13] = [
    slot(S21, 0, 0),
    slot(S21, 0, 1),
    slot(S21, 0, 3),
    slot(S21, 2, 0),
    slot(S21, 2, 1),
    slot(S21, 2, 3),
    slot(S21, 4, 0),
    slot(S21, 4, 1),
    slot(S21, 4, 3),
    slot(S22, 1, 2),
    slot(S22, 1, 4),
    slot(S22, 3, 2),
    slot(S22, 3, 4),
];

/// All 13 pairing slots of a family; the first slot of each kind is the
/// canonical representative whose sum defines S₁₁/S₁₂/S₂₁/S₂₂.
pub fn slots(family: Family) -> &'static [Slot; 13] {
    match family {
        Family::R1 => &R1_SLOTS,
        Family::R2 => &R2_SLOTS,
    }
}

/// Relative slack for the magnitude inequalities (sums of square roots).
const SLACK: f64 = 1e-12;

/// Whether `t` lies in the pairing set of `slot`: the paired leaves coincide,
/// and the remaining four inner and four outer magnitudes each sum to at most
/// |root|^θ + |paired|^θ.
pub fn slot_contains(t: &SecondGenTuple, slot: &Slot, theta: f64) -> bool {
    let paired = t.inner[slot.inner];
    if paired != t.outer[slot.outer] {
        return false;
    }
    let bound = t.root.norm().powf(theta) + paired.norm().powf(theta);
    let limit = bound * (1.0 + SLACK) + SLACK;
    let rest = |xs: &[Mode; 5], skip: usize| -> f64 {
        xs.iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, m)| m.norm())
            .sum()
    };
    rest(&t.inner, slot.inner) <= limit && rest(&t.outer, slot.outer) <= limit
}

/// Classification tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum PairingClass {
    S11,
    S12,
    S21,
    S22,
    TypeA,
    TypeB,
    TypeC,
    InnerPairReduction,
}

impl From<SlotKind> for PairingClass {
    fn from(k: SlotKind) -> Self {
        match k {
            SlotKind::S11 => PairingClass::S11,
            SlotKind::S12 => PairingClass::S12,
            SlotKind::S21 => PairingClass::S21,
            SlotKind::S22 => PairingClass::S22,
        }
    }
}

/// Total classifier of second-generation tuples.
///
/// A pairing tag is returned when some slot of the family contains the tuple
/// and its two paired leaves are the two leading leaves in the documented
/// order. Otherwise: TypeA when the eight smaller magnitudes exceed
/// |k_(1)|^θ + |k_(2)|^θ in sum, else TypeB when the two leading leaves are
/// in the same generation, else TypeC.
pub fn classify(t: &SecondGenTuple, theta: f64) -> PairingClass {
    let order = t.leaf_order();
    let top = (order[0].min(order[1]), order[0].max(order[1]));
    for s in slots(t.family) {
        if top == (s.inner, 5 + s.outer) && slot_contains(t, s, theta) {
            return s.kind.into();
        }
    }
    let leaves = t.leaves();
    let norms = order.map(|i| leaves[i].norm());
    let tail: f64 = norms[2..].iter().sum();
    if tail > norms[0].powf(theta) + norms[1].powf(theta) {
        PairingClass::TypeA
    } else if (order[0] < 5) == (order[1] < 5) {
        PairingClass::TypeB
    } else {
        PairingClass::TypeC
    }
}

/// Tags six-tuples in which an unconjugated mode equals a conjugated one.
pub fn classify_six(t: &SixTuple) -> Option<PairingClass> {
    let k = &t.k;
    let paired = [0, 2, 4]
        .iter()
        .any(|&i| [1, 3, 5].iter().any(|&j| k[i] == k[j]));
    paired.then_some(PairingClass::InnerPairReduction)
}

/// Every second-generation tuple of `family` over `set`, each exactly once.
///
/// Nine leaves run over the set (the five inner leaves and the first four
/// free outer leaves); the root must lie in the set and the last outer leaf
/// is solved from the zero-sum constraint.
pub fn enumerate_second_gen(set: &ModeSet, family: Family) -> impl Iterator<Item = SecondGenTuple> + '_ {
    let n = set.len() as u64;
    let total = n.pow(9);
    (0..total).filter_map(move |code| {
        let m = set.modes();
        let mut c = code;
        let mut d = [0usize; 9];
        for slot in (0..9).rev() {
            d[slot] = (c % n) as usize;
            c /= n;
        }
        let inner = [m[d[0]], m[d[1]], m[d[2]], m[d[3]], m[d[4]]];
        let root = inner[0] - inner[1] + inner[2] - inner[3] + inner[4];
        if !set.contains(&root) {
            return None;
        }
        let (a, b, c2, e) = (m[d[5]], m[d[6]], m[d[7]], m[d[8]]);
        let last = match family {
            // k₆ = k₁ − k₂ + k₃ − k₄ + k₅ with (k₂,k₃,k₄,k₅) = (a,b,c,e)
            Family::R1 => root - a + b - c2 + e,
            // k₆ = k₁ − k₂ + k₃ − k₄ + k₅ with (k₁,k₃,k₄,k₅) = (a,b,c,e)
            Family::R2 => a - root + b - c2 + e,
        };
        set.contains(&last).then(|| SecondGenTuple {
            family,
            root,
            outer: [a, b, c2, e, last],
            inner,
        })
    })
}

/// Faster equivalent of [`enumerate_second_gen`] visiting tuples grouped by
/// root: inner quintuples are bucketed by their root, and each zero-sum outer
/// six-tuple is combined with the bucket of its root position.
pub fn for_each_second_gen(set: &ModeSet, family: Family, mut f: impl FnMut(&SecondGenTuple)) {
    let m = set.modes();
    let mut buckets: Vec<Vec<[usize; 5]>> = vec![Vec::new(); set.len()];
    let n = set.len();
    for code in 0..n.pow(5) {
        let mut c = code;
        let mut d = [0usize; 5];
        for slot in (0..5).rev() {
            d[slot] = c % n;
            c /= n;
        }
        let root = m[d[0]] - m[d[1]] + m[d[2]] - m[d[3]] + m[d[4]];
        if let Some(r) = set.index_of(&root) {
            buckets[r].push(d);
        }
    }
    let rp = family.root_position();
    for six in super::six_tuple_indices(set) {
        let outer_idx: Vec<usize> = (0..6).filter(|&j| j != rp).map(|j| six[j]).collect();
        let outer: [Mode; 5] = std::array::from_fn(|j| m[outer_idx[j]]);
        for d in &buckets[six[rp]] {
            f(&SecondGenTuple {
                family,
                root: m[six[rp]],
                outer,
                inner: d.map(|i| m[i]),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_count(set: &ModeSet, family: Family) -> usize {
        let m = set.modes();
        let n = m.len();
        let mut count = 0;
        let mut idx = [0usize; 9];
        'outer: loop {
            let inner: [Mode; 5] = std::array::from_fn(|j| m[idx[j]]);
            let root = inner[0] - inner[1] + inner[2] - inner[3] + inner[4];
            if set.contains(&root) {
                for &k6 in m {
                    let o = [m[idx[5]], m[idx[6]], m[idx[7]], m[idx[8]], k6];
                    let t = SecondGenTuple {
                        family,
                        root,
                        outer: o,
                        inner,
                    };
                    if t.is_valid() {
                        count += 1;
                    }
                }
            }
            for pos in 0..9 {
                idx[pos] += 1;
                if idx[pos] < n {
                    continue 'outer;
                }
                idx[pos] = 0;
            }
            break;
        }
        count
    }

    #[test]
    fn zero_set_has_single_all_zero_tuple() {
        let set = ModeSet::from_modes(1, vec![Mode::ZERO]).unwrap();
        for fam in [Family::R1, Family::R2] {
            let all: Vec<_> = enumerate_second_gen(&set, fam).collect();
            assert_eq!(all.len(), 1);
            assert_eq!(classify(&all[0], 0.3), PairingClass::TypeB);
        }
    }

    #[test]
    fn counts_match_brute_force_and_families_agree() {
        let set = ModeSet::ball(1, 1.0).unwrap();
        let r1 = enumerate_second_gen(&set, Family::R1).count();
        let r2 = enumerate_second_gen(&set, Family::R2).count();
        assert_eq!(r1, naive_count(&set, Family::R1));
        assert_eq!(r2, naive_count(&set, Family::R2));
        assert_eq!(r1, r2);
        let mut grouped = 0;
        for_each_second_gen(&set, Family::R1, |t| {
            assert!(t.is_valid());
            grouped += 1;
        });
        assert_eq!(grouped, r1);
        assert!(enumerate_second_gen(&set, Family::R2).all(|t| t.is_valid()));
    }

    #[test]
    fn grouped_enumeration_visits_the_same_tuples() {
        let set = ModeSet::ball(1, 2.0).unwrap();
        for fam in [Family::R1, Family::R2] {
            let a: std::collections::HashSet<_> = enumerate_second_gen(&set, fam).collect();
            let mut b = 0;
            for_each_second_gen(&set, fam, |t| {
                assert!(a.contains(t));
                b += 1;
            });
            assert_eq!(a.len(), b);
        }
    }

    fn r1(inner: [i32; 5], outer4: [i32; 4]) -> SecondGenTuple {
        let inner = inner.map(Mode::d1);
        let root = inner[0] - inner[1] + inner[2] - inner[3] + inner[4];
        let o = outer4.map(Mode::d1);
        let k6 = root - o[0] + o[1] - o[2] + o[3];
        let t = SecondGenTuple {
            family: Family::R1,
            root,
            outer: [o[0], o[1], o[2], o[3], k6],
            inner,
        };
        assert!(t.is_valid());
        t
    }

    #[test]
    fn large_pairing_is_s11() {
        // p₁ = k₂ = 50, everything else in {0, ±1}.
        let t = r1([50, 1, 0, 0, 1], [50, 1, 0, 0]);
        assert_eq!(t.root, Mode::d1(50));
        assert_eq!(t.outer[4], Mode::d1(1));
        assert!(slot_contains(&t, &slots(Family::R1)[0], 0.3));
        assert_eq!(classify(&t, 0.3), PairingClass::S11);
    }

    #[test]
    fn large_inner_pair_is_type_b() {
        // Two leading inner leaves ±50 cancelling in the root.
        let t = r1([50, 0, -50, 0, 0], [0, 0, 0, 0]);
        assert_eq!(t.root, Mode::ZERO);
        assert_eq!(classify(&t, 0.3), PairingClass::TypeB);
        let t = r1([50, 50, 0, 1, 1], [0, 0, 0, 0]);
        assert_eq!(t.outer[4], Mode::ZERO);
        assert_eq!(classify(&t, 0.3), PairingClass::TypeB);
        // With p₁ = 50, p₂ = −50 the root is 100, forcing large outer leaves.
        let t = r1([50, -50, 0, 0, 0], [34, 0, 33, 0]);
        assert_eq!(t.outer[4], Mode::d1(33));
        assert_eq!(classify(&t, 0.3), PairingClass::TypeA);
    }

    #[test]
    fn large_cross_generation_pair_without_slot_is_type_c() {
        // p₁ = 50 and outer k₃ = 50 have the same signature, so no slot pairs them.
        let t = r1([50, 0, 0, 0, 0], [0, 50, 0, 0]);
        assert_eq!(t.outer[4], Mode::d1(100));
        let t = r1([50, 0, 0, 0, 0], [0, -50, 0, 0]);
        assert_eq!(t.outer[4], Mode::ZERO);
        assert_eq!(classify(&t, 0.3), PairingClass::TypeC);
    }

    #[test]
    fn many_mid_leaves_are_type_a() {
        let t = r1([10, -10, 10, -10, 10], [10, 10, 10, 10]);
        assert_eq!(classify(&t, 0.3), PairingClass::TypeA);
    }

    #[test]
    fn classification_is_deterministic_and_total() {
        let set = ModeSet::ball(1, 1.0).unwrap();
        for fam in [Family::R1, Family::R2] {
            for t in enumerate_second_gen(&set, fam) {
                let a = classify(&t, 0.3);
                assert_eq!(a, classify(&t, 0.3));
                assert_ne!(a, PairingClass::InnerPairReduction);
                match fam {
                    Family::R1 => assert!(!matches!(a, PairingClass::S21 | PairingClass::S22)),
                    Family::R2 => assert!(!matches!(a, PairingClass::S11 | PairingClass::S12)),
                }
            }
        }
    }

    #[test]
    fn slot_signatures_pair_opposite_conjugations() {
        for fam in [Family::R1, Family::R2] {
            let (si, so) = (fam.inner_signs(), fam.outer_signs());
            let s = slots(fam);
            assert_eq!(s.iter().filter(|x| matches!(x.kind, S11 | S21)).count(), 9);
            for sl in s {
                assert_eq!(si[sl.inner], -so[sl.outer]);
            }
        }
    }

    #[test]
    fn inner_pair_reduction_on_six_tuples() {
        let t = SixTuple::d1([3, 3, 1, 2, 2, 1]).unwrap();
        assert_eq!(classify_six(&t), Some(PairingClass::InnerPairReduction));
        let t = SixTuple::d1([3, 1, 1, 2, 1, 2]).unwrap();
        assert_eq!(classify_six(&t), Some(PairingClass::InnerPairReduction));
        let t = SixTuple::d1([3, 1, 3, 4, 3, 4]).unwrap();
        assert_eq!(classify_six(&t), None);
    }
}
