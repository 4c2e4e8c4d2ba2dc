use num_complex::Complex64;

use super::*;
use crate::random::{complex_std_gaussian, sample_mu_s, stream_rng, SamplerSpec};
use crate::resonance::{slot_contains, slots, SlotKind};

const BIG: u64 = u64::MAX;

/// Unit-variance coefficients: every mode of the band matters equally.
fn rough(dim: usize, n: u32, seed: u64) -> SpectralField {
    let mut rng = stream_rng(seed, 7, 0);
    SpectralField::from_fn(dim, n, |_| complex_std_gaussian(&mut rng)).unwrap()
}

fn mu_s(dim: usize, n: u32, seed: u64) -> (SpectralField, ModelParams) {
    let p = ModelParams::with(dim, n);
    let spec = SamplerSpec::new(p.clone(), n, n, seed, 0);
    (sample_mu_s(&spec).unwrap(), p)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

#[test]
fn zero_and_single_mode_fields() {
    let p = ModelParams::with(1, 3);
    let z = SpectralField::zeros(1, 3).unwrap();
    let r = q_total(&z, &p, BIG, ExecMode::Sequential).unwrap();
    assert_eq!((r.r_sn, r.q_sn, r.e_sn), (0.0, 0.0, 0.0));
    assert_eq!(Complex64::from(r.parts.r1), Complex64::new(0.0, 0.0));

    let c = Complex64::new(0.6, -0.3);
    for k in [0, 1, -2] {
        let u = SpectralField::single_mode(1, 3, Mode::d1(k), c).unwrap();
        let r = q_total(&u, &p, BIG, ExecMode::Sequential).unwrap();
        assert_eq!(r.r_sn, 0.0);
        assert_eq!(Complex64::from(r.parts.r0), Complex64::new(0.0, 0.0));
        for s in [r.parts.s11, r.parts.s12, r.parts.s21, r.parts.s22, r.parts.j, r.parts.i] {
            assert_eq!(Complex64::from(s), Complex64::new(0.0, 0.0));
        }
        assert_eq!(r.parts.r13.operational, r.parts.r1);
        assert_eq!(r.q_sn, 0.0);
        let expect = 0.5 * (1.0 + (k as f64).powi(20)) * c.norm_sqr();
        assert_eq!(modified_energy(&u, &p).unwrap(), expect);
    }
}

#[test]
fn r_sn_and_r0_match_six_tuple_oracle() {
    for (dim, n, seed) in [(1, 3, 42u64), (1, 5, 3), (2, 2, 9), (3, 2, 1)] {
        for u in [rough(dim, n, seed), mu_s(dim, n, seed).0] {
            let p = ModelParams::with(dim, n);
            let ix = Interaction::new(&u, &p).unwrap();
            let t = InteractionTable::new(&ix, ExecMode::Sequential).evaluate(&ix, ExecMode::Sequential).unwrap();
            let naive = ix.r_sn_naive(BIG, ExecMode::Sequential).unwrap();
            assert!((t.r_sn - naive).abs() <= 1e-12 * naive.abs(), "R_sN {} vs {naive}", t.r_sn);
            let r0 = ix.r0_naive(BIG, ExecMode::Sequential).unwrap();
            assert!(rel(t.r0, r0) <= 1e-12, "R0 {} vs {r0}", t.r0);
            assert!(r0.re.abs() <= 1e-12 * r0.norm());
        }
    }
}

#[test]
fn r1_r2_three_paths_agree() {
    for n in [2, 3] {
        let u = rough(1, n, 11 + n as u64);
        let p = ModelParams::with(1, n);
        let ix = Interaction::new(&u, &p).unwrap();
        let t = InteractionTable::new(&ix, ExecMode::Parallel).evaluate(&ix, ExecMode::Parallel).unwrap();
        let grid1 = ix.r_family_grid(Family::R1, BIG, ExecMode::Sequential).unwrap();
        let grid2 = ix.r_family_grid(Family::R2, BIG, ExecMode::Sequential).unwrap();
        let naive1 = ix.r_family_naive(Family::R1, BIG).unwrap();
        let naive2 = ix.r_family_naive(Family::R2, BIG).unwrap();
        assert!(rel(grid1, naive1) <= 1e-10, "N={n}: {grid1} vs {naive1}");
        assert!(rel(t.r1, naive1) <= 1e-10);
        assert!(rel(grid2, naive2) <= 1e-10);
        assert!(rel(t.r2, naive2) <= 1e-10);
        assert!(rel(t.r2, t.r1.conj()) <= 1e-12);
    }
}

#[test]
fn table_is_mode_independent_and_checks_its_band() {
    let u = rough(1, 6, 5);
    let p = ModelParams::with(1, 6);
    let ix = Interaction::new(&u, &p).unwrap();
    let a = InteractionTable::new(&ix, ExecMode::Sequential);
    let b = InteractionTable::new(&ix, ExecMode::Parallel);
    assert_eq!(a.len(), b.len());
    assert_eq!(
        a.evaluate(&ix, ExecMode::Sequential).unwrap(),
        b.evaluate(&ix, ExecMode::Parallel).unwrap()
    );
    let other = Interaction::new(&rough(1, 6, 5), &ModelParams::with(1, 5)).unwrap();
    assert!(a.evaluate(&other, ExecMode::Sequential).is_err());
}

#[test]
fn s11_is_the_canonical_slot_filter_of_r1() {
    let u = rough(1, 4, 21);
    let p = ModelParams::with(1, 4);
    let ix = Interaction::new(&u, &p).unwrap();
    for kind in [SlotKind::S11, SlotKind::S12, SlotKind::S21, SlotKind::S22] {
        let (family, n) = match kind {
            SlotKind::S11 => (Family::R1, 0),
            SlotKind::S12 => (Family::R1, 9),
            SlotKind::S21 => (Family::R2, 0),
            SlotKind::S22 => (Family::R2, 9),
        };
        let slot = slots(family)[n];
        let mut filtered = crate::sum::ComplexSum::new();
        let mut count = 0;
        crate::resonance::for_each_second_gen(ix.active_set(), family, |t| {
            if slot_contains(t, &slot, p.theta) {
                filtered.push(ix.raw_term(t));
                count += 1;
            }
        });
        let direct = ix.s_part(kind);
        assert!(count > 0);
        assert!(rel(direct, filtered.value()) <= 1e-13, "{kind:?}");
    }
}

#[test]
fn every_slot_of_a_kind_sums_to_the_canonical_value() {
    let u = rough(1, 3, 8);
    let p = ModelParams::with(1, 3);
    let ix = Interaction::new(&u, &p).unwrap();
    for family in [Family::R1, Family::R2] {
        let canon: Vec<Complex64> = [0, 9]
            .iter()
            .map(|&n| {
                let mut acc = crate::sum::ComplexSum::new();
                ix.for_each_in_slot(family, &slots(family)[n], |t| acc.push(ix.raw_term(t)));
                acc.value()
            })
            .collect();
        for (n, sl) in slots(family).iter().enumerate() {
            let mut acc = crate::sum::ComplexSum::new();
            ix.for_each_in_slot(family, sl, |t| acc.push(ix.raw_term(t)));
            let c = canon[usize::from(n >= 9)];
            assert!(rel(acc.value(), c) <= 1e-12, "{family:?} slot {n}");
        }
    }
}

#[test]
fn decomposition_and_multiplicities() {
    for (n, seed) in [(2, 1u64), (3, 2), (3, 42)] {
        let p = ModelParams::with(1, n);
        for u in [rough(1, n, seed), mu_s(1, n, seed).0] {
            let r = q_total(&u, &p, BIG, ExecMode::Sequential).unwrap();
            let id = &r.identities;
            assert!(id.q_from_parts <= 1e-12);
            assert!(id.r1_decomposition.unwrap() <= 1e-10, "{id:?}");
            assert!(id.r2_decomposition.unwrap() <= 1e-10, "{id:?}");
            assert!(id.r1_dual_path.unwrap() <= 1e-10);
            let (m1, m2) = r.parts.r13.multiplicities.unwrap();
            assert_eq!((m1, m2), (9.0, 4.0));
            assert_eq!(r.parts.r23.multiplicities.unwrap(), (9.0, 4.0));
        }
    }
}

#[test]
fn cancellation_suite() {
    for n in [2, 3, 4] {
        for seed in 0..3u64 {
            let p = ModelParams::with(1, n);
            let u = rough(1, n, 100 + seed);
            let ps = Interaction::new(&u, &p).unwrap().pairing_sums();
            assert!(ps.main1.im.abs() <= 1e-12 * ps.main1_mass, "main1 {ps:?}");
            assert!(ps.main2.im.abs() <= 1e-12 * ps.main2_mass, "main2 {ps:?}");
            let lhs = (ps.s11 - ps.s21).im;
            assert!((lhs - ps.j.im).abs() <= 1e-11 * lhs.abs().max(ps.j.im.abs()), "J: {lhs} vs {}", ps.j.im);
            assert!((ps.s12.im - ps.i.im).abs() <= 1e-11 * ps.s12.im.abs().max(ps.i.im.abs()));
            assert!(rel(ps.s22, ps.s12.conj()) <= 1e-12);
            assert!(rel(ps.s21, ps.s21_relabel) <= 1e-12);
        }
    }
}

#[test]
fn budget_guards_fail_loudly() {
    let u = rough(1, 4, 1);
    let ix = Interaction::new(&u, &ModelParams::with(1, 4)).unwrap();
    assert!(ix.r_family_naive(Family::R1, 1000).is_err());
    assert!(ix.r_sn_naive(10, ExecMode::Sequential).is_err());
    assert!(ix.classified_remainder(Family::R1, 10).is_err());
}
