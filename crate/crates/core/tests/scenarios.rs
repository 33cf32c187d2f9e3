use std::sync::Arc;

use hermheat_core::experiments::{blowup_probe, parse_config, run_experiment, Experiment, ExperimentConfig};
use hermheat_core::hermite::{Grid, MultiIndex, SpectralField, SpectralPlan};
use hermheat_core::propagator::{apply_semigroup, FractionalOrder};
use hermheat_core::solver::{decay_fit, Family};
use hermheat_core::{lq_norm, NonlinearitySpec, SolverConfig, Stepper, Verdict};

#[test]
fn single_precision_pipeline() {
    let n = 12;
    let plan = SpectralPlan::new(Arc::new(Grid::<f32>::gauss_hermite(1, 2 * n + 4).unwrap()), n);
    let mut c = SpectralField::<f32>::zeros(1, n).unwrap();
    c.coeffs_mut()[0] = 1.0;
    c.coeffs_mut()[3] = 0.5;
    let back = plan.forward(&plan.inverse(&c).unwrap(), n).unwrap();
    assert!(back.distance(&c).unwrap() < 1e-5);

    let decayed = apply_semigroup(&c, 0.5, FractionalOrder::new(1.0f32).unwrap()).unwrap();
    assert!((decayed.coeffs()[0] - (-0.5f32).exp()).abs() < 1e-6);

    let f = NonlinearitySpec::new(Family::MixedPower { m: 3.0f32, q: 2.0, lambda: 1.0 }, 1.0, 1.0).unwrap();
    let traj = Stepper::new(SolverConfig::new(1, 1.0f32, n, 0.01, 0.2, f).unwrap()).unwrap().run(&c.scaled(0.1)).unwrap();
    assert_eq!(traj.verdict, Verdict::Completed);
    let grid = Arc::new(Grid::<f32>::uniform(1, 10.0, 401).unwrap());
    let ground = SpectralPlan::new(grid, n).inverse(&SpectralField::basis_function(&MultiIndex::new(vec![0]).unwrap(), n).unwrap()).unwrap();
    assert!((lq_norm(&ground, 2.0f32).unwrap().value - 1.0).abs() < 1e-5);
}

/// With the nonlinearity switched off, `u(t) = A e^{-2t} Φ₀` in two dimensions and
/// `sup_t t^{0.3} ‖u(t)‖_{L^5}` is attained at `t = 0.15`.
#[test]
fn linear_control_matches_single_mode_closed_form() {
    let n = 8;
    let amplitude = 0.37;
    let u0 = SpectralField::basis_function(&MultiIndex::new(vec![0, 0]).unwrap(), n).unwrap().scaled(amplitude);
    let mut cfg = SolverConfig::new(2, 1.0, n, 0.01, 5.0, NonlinearitySpec::zero()).unwrap();
    cfg.norm_exponents = vec![5.0];
    cfg.norm_grid = Some(Arc::new(Grid::uniform(2, 10.0, 201).unwrap()));
    let traj = Stepper::new(cfg).unwrap().run(&u0).unwrap();
    let fit = decay_fit(&traj, 5.0, 0.3, (0.005, 5.0)).unwrap();

    let pi = std::f64::consts::PI;
    let ground_l5 = pi.powf(-0.5) * (2.0 * pi / 5.0).powf(0.2);
    let want = 0.15f64.powf(0.3) * (-0.3f64).exp() * amplitude * ground_l5;
    assert!((fit.sup_stat - want).abs() / want < 1e-6, "{} vs {want}", fit.sup_stat);
}

#[test]
fn zero_amplitude_probe_is_the_slab_and_box_volume() {
    for (d, volume) in [(1usize, 2.0 * 0.25), (2, std::f64::consts::PI * 0.25 * 0.25)] {
        let text = format!("d = {d}\nalpha = [0.0]\nepsilon = 0.1\nr = 0.25\n");
        let ExperimentConfig::BlowupProbe(c) = parse_config(&text, Experiment::BlowupProbe, None).unwrap().experiment else { unreachable!() };
        let report = blowup_probe(&c).unwrap();
        let probe = &report.probes[0];
        for level in &probe.levels {
            let got = level.log_integral.expect("rung evaluated").exp();
            let want = 0.1 * volume;
            assert!((got - want).abs() / want < 1e-10, "d={d} level {}: {got} vs {want}", level.level);
        }
    }
}

#[test]
fn reports_are_deterministic() {
    for e in [Experiment::PropagatorCheck, Experiment::Continuity, Experiment::SmoothingSweep] {
        let config = ExperimentConfig::defaults(e);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let first = run_experiment(&config).unwrap().write(a.path()).unwrap();
        let second = run_experiment(&config).unwrap().write(b.path()).unwrap();
        assert_eq!(first.len(), second.len());
        for (x, y) in first.iter().zip(&second) {
            assert_eq!(x.file_name(), y.file_name());
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
        }
    }
}

#[test]
fn seed_changes_random_fields_only_through_the_seed() {
    let run = |seed: u64| {
        let c = parse_config("", Experiment::PropagatorCheck, Some(seed)).unwrap().experiment;
        run_experiment(&c).unwrap().table("suites").unwrap().to_csv()
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5), run(6));
}
