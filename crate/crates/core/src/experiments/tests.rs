use super::*;
use crate::random::stream_rng;

fn small_mc(size: usize) -> McConfig {
    McConfig {
        ensemble_size: size,
        bootstrap_reps: 100,
        ..McConfig::default()
    }
}

#[test]
fn config_validation() {
    assert!(McConfig::default().validate().is_ok());
    let bad = [
        McConfig { ensemble_size: 1, ..McConfig::default() },
        McConfig { p_grid: vec![4.0, 2.0], ..McConfig::default() },
        McConfig { p_grid: vec![1.0, 2.0], ..McConfig::default() },
        McConfig { confidence: 1.0, ..McConfig::default() },
        McConfig { dt: 0.0, ..McConfig::default() },
    ];
    for c in bad {
        assert!(matches!(c.validate(), Err(Error::Param(_))), "{c:?}");
    }
}

#[test]
fn constant_profile_has_zero_exponent() {
    let mc = small_mc(500);
    let prof = moment_profile(&vec![1.0; 500], &mc, &mut stream_rng(0, 0, 0)).unwrap();
    assert_eq!(prof.exponent, Some(0.0));
    assert!(prof.rows.iter().all(|r| r.norm == 1.0 && r.reliable));
    assert!(prof.monotone);
    assert!(moment_profile(&[0.0; 10], &mc, &mut stream_rng(0, 0, 0)).is_err());
}

#[test]
fn chaos_constant_and_linear_forms() {
    let mc = McConfig {
        ensemble_size: 100_000,
        p_grid: vec![2.0, 4.0, 8.0],
        bootstrap_reps: 50,
        ..McConfig::default()
    };
    let c = chaos_audit(&ChaosForm::Constant { value: 3.0 }, &mc, ExecMode::default()).unwrap();
    assert_eq!(c.exponent, Some(0.0));
    assert_eq!(c.degree, 0);
    let g = chaos_audit(&ChaosForm::Linear { coeffs: vec![1.0] }, &mc, ExecMode::default()).unwrap();
    let target = 2f64.powf(0.25);
    assert!((g.ratio_4_2 / target - 1.0).abs() < 0.015, "ratio {}", g.ratio_4_2);
    assert!(g.ratio_4_2_ci.0 < target && target < g.ratio_4_2_ci.1);
    assert!(chaos_audit(&ChaosForm::Monomial { degree: 0 }, &mc, ExecMode::default()).is_err());
}

#[test]
fn chaos_is_thread_independent() {
    let mc = McConfig {
        ensemble_size: 2000,
        p_grid: vec![2.0, 4.0, 6.0],
        bootstrap_reps: 20,
        ..McConfig::default()
    };
    let f = ChaosForm::Monomial { degree: 2 };
    let a = chaos_audit(&f, &mc, ExecMode::Sequential).unwrap();
    let b = chaos_audit(&f, &mc, ExecMode::Parallel).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_table().to_csv().unwrap(), b.to_table().to_csv().unwrap());
}

#[test]
fn moment_growth_p2_is_rms_and_empty_ball_errors() {
    let params = ModelParams::with(1, 3);
    let mc = McConfig {
        ensemble_size: 400,
        p_grid: vec![2.0, 4.0, 8.0],
        bootstrap_reps: 50,
        ..McConfig::default()
    };
    let rep = moment_growth(&params, &mc, ExecMode::default()).unwrap();
    assert!(rep.in_ball > 0 && rep.in_ball < rep.samples);
    let p2 = rep.profile.row(2.0).unwrap().norm;
    assert!((p2 - rep.rms).abs() <= 1e-12 * rep.rms, "{p2} vs {}", rep.rms);
    let tiny = ModelParams { radius: 1e-3, ..params };
    match moment_growth(&tiny, &mc, ExecMode::default()) {
        Err(Error::Degenerate(m)) => assert!(m.contains("empty ball")),
        other => panic!("expected empty-ball error, got {other:?}"),
    }
}

#[test]
fn weights_vanish_when_ball_shrinks() {
    let params = ModelParams {
        radius: 1e-3,
        ..ModelParams::with(1, 2)
    };
    let mc = small_mc(50);
    let rep = weight_integrability(&params, &[2], 4, &[2.0], &mc, ExecMode::default()).unwrap();
    assert!(rep.empty_ball);
    assert_eq!(rep.rows[0].estimate, 0.0);
    assert!(weight_integrability(&params, &[4], 4, &[2.0], &mc, ExecMode::default()).is_err());
}

#[test]
fn weights_small_run_is_consistent() {
    let params = ModelParams::with(1, 2);
    let mc = small_mc(300);
    let rep = weight_integrability(&params, &[2, 4], 8, &[1.0, 2.0], &mc, ExecMode::default()).unwrap();
    assert!(rep.in_support > 0);
    for r in &rep.rows {
        assert!(r.estimate > 0.0 && r.ci.0 <= r.estimate && r.estimate <= r.ci.1);
    }
    // L¹ ≤ L² on a probability space.
    for r in &rep.rows {
        assert!(r.distances[0].1 <= r.distances[1].1 * (1.0 + 1e-12));
    }
}

#[test]
fn transport_zero_time_is_exact_and_full_space_is_one() {
    let params = ModelParams::with(1, 2);
    let mc = McConfig {
        ensemble_size: 300,
        t_grid: vec![0.0, 0.1],
        ..McConfig::default()
    };
    let rep = measure_transport(&params, &mc, ExecMode::default()).unwrap();
    for row in rep.rows.iter().filter(|r| r.t == 0.0) {
        assert_eq!(row.base_hits, row.image_hits);
    }
    let full = McConfig {
        set_spec: SetSpec {
            modes: vec![],
            radii: vec![],
            ball_cap: false,
        },
        ..mc
    };
    let rep = measure_transport(&params, &full, ExecMode::default()).unwrap();
    assert!(rep.rows.iter().all(|r| r.base == 1.0 && r.image == 1.0));
    let bad = McConfig {
        set_spec: SetSpec {
            modes: vec![vec![1, 0]],
            ..SetSpec::default()
        },
        ..McConfig::default()
    };
    assert!(measure_transport(&params, &bad, ExecMode::default()).is_err());
}

#[test]
fn pointwise_law_at_time_zero_matches_closed_form() {
    let params = ModelParams::with(1, 4);
    let mc = small_mc(3000);
    let rep = pointwise_law(&params, 0.0, &[0.7], (8, 16), &mc, ExecMode::default()).unwrap();
    let ks = rep.coarse.ks_closed_form_re.unwrap();
    assert!(ks.p_value > 0.05, "{ks:?}");
    assert!(rep.coarse.max_atom <= rep.atom_bound);
    assert_eq!(rep.histogram.counts.iter().flatten().sum::<u64>() + rep.histogram.outside, 3000);
    let one = McConfig {
        ensemble_size: 1,
        ..McConfig::default()
    };
    assert!(matches!(
        pointwise_law(&params, 0.0, &[0.7], (8, 16), &one, ExecMode::default()),
        Err(Error::Degenerate(_))
    ));
    assert!(pointwise_law(&params, 0.0, &[0.7, 0.1], (8, 16), &mc, ExecMode::default()).is_err());
}

#[test]
fn stable_advance_tracks_a_fine_reference() {
    // Samples with ‖S_N u‖_ℓ¹ ≤ 3 are resolved pathwise; larger ones sit in a
    // strongly mixing regime over t = 0.5 and are only checked for
    // conservation of mass.
    let params = ModelParams::with(1, 4);
    let mc = McConfig::default();
    let template = SpectralField::zeros(1, 8).unwrap();
    let flow = Flow::new(&template, &params, None).unwrap();
    let mut resolved = 0;
    for i in 0..20 {
        let u = crate::random::sample_mu_s(&mc.sampler(&params, 8).with_stream(i)).unwrap();
        let v = advance_stable(&flow, &u, -0.5, mc.dt).unwrap();
        assert!((v.mass() / u.mass() - 1.0).abs() < 1e-6, "sample {i}: mass drift");
        let l1: f64 = flow.operator().active().iter().map(|&j| u.coeffs()[j].norm()).sum();
        if l1 > 3.0 {
            continue;
        }
        resolved += 1;
        let fine = FlowConfig {
            dt: (0.005 / l1.powi(4)).min(1e-3),
            ..FlowConfig::default()
        };
        let r = flow.advance(&u, -0.5, &fine).unwrap();
        let err = v.sobolev_distance(&r, 0.0) / r.sobolev_norm_sq(0.0).sqrt();
        assert!(err < 1e-4, "sample {i}: relative error {err}");
    }
    assert!(resolved >= 10);
}
