//! Property-based checks of identities that must hold for arbitrary data.

use proptest::prelude::*;

use crate::dynamics::linear_flow;
use crate::energetics::{part_r1, part_r2};
use crate::exec::{map_chunks, ExecMode};
use crate::experiments::stats::{least_squares, lp_norm};
use crate::resonance::SixTuple;
use crate::{Complex64, ModelParams, SpectralField};

fn field(dim: usize, cutoff: u32, amps: &[(f64, f64)]) -> SpectralField {
    let mut it = amps.iter().cycle();
    SpectralField::from_fn(dim, cutoff, |_| {
        let (re, im) = *it.next().unwrap();
        Complex64::new(re, im)
    })
    .unwrap()
}

fn amplitudes() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_at_s_one_is_the_resonance_function(k in prop::array::uniform5(-30i32..=30)) {
        let last = k[0] - k[1] + k[2] - k[3] + k[4];
        let t = SixTuple::d1([k[0], k[1], k[2], k[3], k[4], last]).unwrap();
        prop_assert_eq!(t.psi2s(1.0), t.omega() as f64);
    }

    #[test]
    fn linear_flow_is_an_isometric_group(amps in amplitudes(), t1 in -3.0..3.0f64, t2 in -3.0..3.0f64) {
        let u = field(1, 6, &amps);
        let composed = linear_flow(&linear_flow(&u, t1), t2);
        let direct = linear_flow(&u, t1 + t2);
        for (a, b) in composed.coeffs().iter().zip(direct.coeffs()) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
        let (m0, m1) = (u.sobolev_norm_sq(8.4), composed.sobolev_norm_sq(8.4));
        prop_assert!((m0 - m1).abs() <= 1e-12 * m0.max(1.0));
    }

    #[test]
    fn field_serialisation_round_trips(amps in amplitudes(), dim in 1usize..=3, cutoff in 0u32..=3) {
        let u = field(dim, cutoff, &amps);
        prop_assert_eq!(&SpectralField::from_bytes(&u.to_bytes()).unwrap(), &u);
        prop_assert_eq!(&SpectralField::from_json(&u.to_json().unwrap()).unwrap(), &u);
    }

    #[test]
    fn second_family_is_the_conjugate_of_the_first(amps in amplitudes()) {
        let p = ModelParams::with(1, 3);
        let u = field(1, 3, &amps);
        let (r1, r2) = (part_r1(&u, &p).unwrap(), part_r2(&u, &p).unwrap());
        prop_assert!((r2 - r1.conj()).norm() <= 1e-12 * r1.norm().max(1e-300));
    }

    #[test]
    fn chunked_reductions_do_not_depend_on_the_backend(xs in prop::collection::vec(-1e6..1e6f64, 0..5000), chunk in 1usize..700) {
        let sum = |mode| -> f64 {
            map_chunks(xs.len(), chunk, mode, |r| xs[r].iter().sum::<f64>()).into_iter().sum()
        };
        prop_assert_eq!(sum(ExecMode::Sequential).to_bits(), sum(ExecMode::Parallel).to_bits());
    }

    #[test]
    fn exact_lines_are_recovered(a in -5.0..5.0f64, b in -5.0..5.0f64, n in 3usize..20) {
        let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let fit = least_squares(&x, &y).unwrap();
        prop_assert!((fit.slope - a).abs() <= 1e-9 && (fit.intercept - b).abs() <= 1e-9);
    }

    #[test]
    fn lp_norms_are_monotone_in_p(xs in prop::collection::vec(-1e3..1e3f64, 1..200)) {
        prop_assume!(xs.iter().any(|x| *x != 0.0));
        let ps = [1.0, 2.0, 4.0, 8.0, 32.0];
        let norms: Vec<f64> = ps.iter().map(|&p| lp_norm(&xs, p)).collect();
        for w in norms.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-12));
        }
    }
}
