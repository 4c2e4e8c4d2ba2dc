use std::f64::consts::PI;

use num_complex::Complex64;

use super::*;
use crate::energetics::q_total;
use crate::lattice::Mode;
use crate::random::{complex_std_gaussian, sample_mu_s, stream_rng, SamplerSpec};

fn rough(dim: usize, n: u32, amp: f64, seed: u64) -> SpectralField {
    let mut rng = stream_rng(seed, 3, 0);
    SpectralField::from_fn(dim, n, |_| complex_std_gaussian(&mut rng) * amp).unwrap()
}

fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn linear_flow_examples() {
    let u = rough(1, 6, 1.0, 1);
    assert_eq!(linear_flow(&u, 0.0), u);
    let v = linear_flow(&u, 0.7);
    let (a, b) = (u.triple_norm_sq(10.0), v.triple_norm_sq(10.0));
    assert!((a - b).abs() <= 1e-14 * a);
    let one = SpectralField::single_mode(1, 2, Mode::d1(1), Complex64::new(1.0, 0.0)).unwrap();
    let w = linear_flow(&one, PI).get(&Mode::d1(1));
    assert!((w - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn zero_field_stays_zero() {
    let z = SpectralField::zeros(1, 4).unwrap();
    let rec = evolve(&z, &ModelParams::with(1, 4), &FlowConfig::default()).unwrap();
    assert!(rec.final_state.unwrap().coeffs().iter().all(|c| c.norm() == 0.0));
}

#[test]
fn single_mode_closed_form() {
    let c = Complex64::new(0.8, 0.3);
    for integrator in [Integrator::Ifrk4, Integrator::Strang] {
        for (k, n) in [(1, 3u32), (2, 3), (0, 2)] {
            let p = ModelParams::with(1, n);
            let u = SpectralField::single_mode(1, n + 2, Mode::d1(k), c).unwrap();
            let cfg = FlowConfig {
                integrator,
                ..FlowConfig::default()
            };
            let rec = evolve(&u, &p, &cfg).unwrap();
            let chi = p.chi_n(&Mode::d1(k));
            let rate = (k * k) as f64 + chi.powi(6) * c.norm_sqr().powi(2);
            let exact = c * Complex64::from_polar(1.0, -rate);
            let got = rec.final_state.unwrap().get(&Mode::d1(k));
            assert!((got - exact).norm() < 1e-8, "{integrator:?} k={k}: {got} vs {exact}");
        }
    }
}

#[test]
fn conservation_on_mu_s_sample() {
    let p = ModelParams::with(1, 4);
    let spec = SamplerSpec::new(p.clone(), 4, 4, 42, 0);
    let u = sample_mu_s(&spec).unwrap();
    let rec = evolve(&u, &p, &FlowConfig::default()).unwrap();
    assert!(TrajectoryRecord::max_relative_drift(&rec.mass) <= 1e-6);
    assert!(TrajectoryRecord::max_relative_drift(&rec.hamiltonian_n) <= 1e-6);
}

#[test]
fn fourth_order_convergence() {
    let p = ModelParams::with(1, 4);
    let u = rough(1, 4, 0.3, 9);
    let flow = Flow::new(&u, &p, None).unwrap();
    let at = |dt: f64, integrator| {
        let cfg = FlowConfig {
            dt,
            integrator,
            ..FlowConfig::default()
        };
        flow.advance(&u, 0.5, &cfg).unwrap()
    };
    for integrator in [Integrator::Ifrk4, Integrator::Strang] {
        let reference = at(1.25e-3, integrator);
        let e1 = max_diff(&at(2e-2, integrator), &reference);
        let e2 = max_diff(&at(1e-2, integrator), &reference);
        let order = if integrator == Integrator::Ifrk4 { 8.0 } else { 3.0 };
        assert!(e1 / e2 >= order, "{integrator:?}: {e1} / {e2}");
    }
}

#[test]
fn tail_is_exact_and_reversal_round_trips() {
    let p = ModelParams::with(1, 3);
    let u = rough(1, 8, 0.5, 4);
    let cfg = FlowConfig::default();
    let flow = Flow::new(&u, &p, None).unwrap();
    let v = flow.advance(&u, 1.0, &cfg).unwrap();
    let lin = linear_flow(&u, 1.0);
    for (m, c) in v.iter() {
        if m.norm() >= 3.0 {
            assert!((c - lin.get(m)).norm() <= 1e-14);
        }
    }
    let back = flow.advance(&v, -1.0, &cfg).unwrap();
    assert!(back.sobolev_distance(&u, p.sigma) <= 1e-9 * u.sobolev_norm_sq(p.sigma).sqrt());
}

#[test]
fn integrators_agree() {
    let p = ModelParams::with(2, 3);
    let u = rough(2, 3, 0.15, 2);
    let flow = Flow::new(&u, &p, None).unwrap();
    let a = flow.advance(&u, 0.3, &FlowConfig::default()).unwrap();
    let cfg = FlowConfig {
        integrator: Integrator::Strang,
        ..FlowConfig::default()
    };
    let b = flow.advance(&u, 0.3, &cfg).unwrap();
    let scale = a.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    assert!(max_diff(&a, &b) < 1e-6 * scale, "{} vs scale {scale}", max_diff(&a, &b));
}

#[test]
fn blowup_is_reported_with_its_time() {
    let p = ModelParams::with(1, 3);
    let u = rough(1, 3, 40.0, 1);
    let cfg = FlowConfig {
        dt: 0.5,
        t_end: 50.0,
        ..FlowConfig::default()
    };
    match evolve(&u, &p, &cfg) {
        Err(Error::Integration { t }) => assert!(t > 0.0),
        other => panic!("expected an integration error, got {:?}", other.map(|r| r.times.len())),
    }
}

#[test]
fn finite_difference_matches_q_total() {
    let p = ModelParams::with(1, 3);
    let spec = SamplerSpec::new(p.clone(), 3, 3, 42, 0);
    let u = sample_mu_s(&spec).unwrap();
    let fd = finite_difference_q(&u, &p, 1e-3).unwrap();
    let q = q_total(&u, &p, u64::MAX, ExecMode::default()).unwrap().q_sn;
    assert!((fd - q).abs() <= (1e-6 * q.abs()).max(1e-10), "fd {fd} vs q {q}");
    let r = rough(1, 3, 0.7, 5);
    let fd = finite_difference_q(&r, &p, 1e-3).unwrap();
    let q = q_total(&r, &p, u64::MAX, ExecMode::default()).unwrap().q_sn;
    assert!((fd - q).abs() <= (1e-6 * q.abs()).max(1e-10), "rough: fd {fd} vs q {q}");
}

#[test]
fn finite_difference_vanishes_on_single_mode() {
    let p = ModelParams::with(1, 3);
    for k in [0, 1, -1] {
        let u = SpectralField::single_mode(1, 3, Mode::d1(k), Complex64::new(0.9, 0.1)).unwrap();
        assert!(finite_difference_q(&u, &p, 1e-3).unwrap().abs() <= 1e-10);
    }
    // At |k| = 2 the energy carries the weight 2^20, so rounding of E itself
    // sets the floor of the difference quotient.
    let u = SpectralField::single_mode(1, 3, Mode::d1(2), Complex64::new(0.9, 0.1)).unwrap();
    let e = crate::energetics::modified_energy(&u, &p).unwrap();
    assert!(finite_difference_q(&u, &p, 1e-3).unwrap().abs() <= 1e-10 * e);
    let z = SpectralField::zeros(1, 3).unwrap();
    assert_eq!(finite_difference_q(&z, &p, 1e-3).unwrap(), 0.0);
}

#[test]
fn convergence_study_at_time_zero_and_trend() {
    let p = ModelParams::with(1, 4);
    let u = rough(1, 16, 0.05, 8);
    let cfg = FlowConfig {
        monitor_every: 50,
        ..FlowConfig::default()
    };
    let r0 = convergence_study(&u, &p, &[2, 4], 8, 0.0, p.sigma, &cfg, ExecMode::Sequential).unwrap();
    assert!(r0.rows.iter().all(|r| r.sup_distance == 0.0));
    let r = convergence_study(&u, &p, &[2, 4], 8, 0.2, 1.0, &cfg, ExecMode::default()).unwrap();
    assert!(r.rows[0].sup_distance > r.rows[1].sup_distance);
}
