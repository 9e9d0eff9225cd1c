use optomem_core::integrator::{integrate_with_rhs, IntegratorConfig};
use optomem_core::model::{self, oscillator_residual};
use optomem_core::{integrate, DriveSpec, MeanFieldState, OmParams, Trajectory};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn run(params: &OmParams, drive: &DriveSpec, cycles: f64) -> Trajectory {
    let cfg = IntegratorConfig::for_drive(params, drive).unwrap();
    integrate(params, drive, MeanFieldState::VACUUM, cycles * drive.period().unwrap(), &cfg).unwrap()
}

fn single_loop() -> DriveSpec {
    DriveSpec::GaussianTrain { e0: 1e4, t_s: 5.0, sigma: 0.5 }
}

/// Largest `|n(t_k) - n(0) - trapz(source)|` relative to `max |n|`.
fn balance_defect(n: &[f64], source: &[f64], dt: f64) -> f64 {
    let mut acc = 0.0;
    let mut worst: f64 = 0.0;
    for k in 1..n.len() {
        acc += 0.5 * dt * (source[k - 1] + source[k]);
        worst = worst.max((n[k] - n[0] - acc).abs());
    }
    worst / n.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[test]
fn number_balances_hold_off_resonance() {
    let params = OmParams { delta: 0.7, g_m: 1e-3, ..OmParams::default() };
    let traj = run(&params, &single_loop(), 2.0);
    let dt = traj.dt();
    let nc = traj.n_photon();
    let nm = traj.n_phonon();
    let photon_src: Vec<f64> = (0..traj.len())
        .map(|k| -2.0 * params.kappa * nc[k] + SQRT_2 * traj.drive[k] * traj.states[k].x_c)
        .collect();
    let phonon_src: Vec<f64> = (0..traj.len())
        .map(|k| -2.0 * params.gamma_m() * nm[k] + SQRT_2 * params.g_m * nc[k] * traj.states[k].p_m)
        .collect();
    let dp = balance_defect(&nc, &photon_src, dt);
    let dm = balance_defect(&nm, &phonon_src, dt);
    assert!(dp < 1e-4, "photon balance {dp:e}");
    assert!(dm < 1e-4, "phonon balance {dm:e}");
}

#[test]
fn non_negative_drives_inject_energy_in_first_cycle() {
    let params = OmParams::default();
    for drive in [
        single_loop(),
        DriveSpec::SquareSinusoidal { e0: 1e5, omega: 1.644 },
        DriveSpec::GaussianTrain { e0: 3e6, t_s: 5.0, sigma: 1.25 },
    ] {
        let traj = run(&params, &drive, 1.0);
        let f: Vec<f64> = traj.drive.iter().zip(&traj.states).map(|(e, s)| e * s.x_c).collect();
        let work: f64 = f.windows(2).map(|w| 0.5 * traj.dt() * (w[0] + w[1])).sum();
        assert!(work > 0.0, "{drive:?}: work {work:e}");
    }
}

#[test]
fn halving_tolerances_moves_states_within_ten_tolerances() {
    let params = OmParams::default();
    for drive in [
        single_loop(),
        DriveSpec::Sinusoidal { e0: 8.745e4, omega: 1.055 },
        DriveSpec::SquareSinusoidal { e0: 7.498e5, omega: 1.644 },
    ] {
        let cfg = IntegratorConfig::for_drive(&params, &drive).unwrap();
        let fine = IntegratorConfig {
            rel_tol: cfg.rel_tol / 2.0,
            abs_tol: cfg.abs_tol / 2.0,
            ..cfg
        };
        let horizon = 3.0 * drive.period().unwrap();
        let a = integrate(&params, &drive, MeanFieldState::VACUUM, horizon, &cfg).unwrap();
        let b = integrate(&params, &drive, MeanFieldState::VACUUM, horizon, &fine).unwrap();
        assert_eq!(a.len(), b.len());
        for (sa, sb) in a.states.iter().zip(&b.states) {
            for (x, y) in sa.to_array().iter().zip(sb.to_array()) {
                let tol = 10.0 * (cfg.abs_tol + cfg.rel_tol * x.abs());
                assert!((x - y).abs() < tol, "{drive:?}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn flipped_radiation_pressure_breaks_the_oscillator_identity() {
    let params = OmParams::default();
    let drive = single_loop();
    let cfg = IntegratorConfig::for_drive(&params, &drive).unwrap();
    let horizon = 5.0 * drive.period().unwrap();
    let flipped = |s: &MeanFieldState, e: f64| {
        let mut d = model::rhs(s, &params, e);
        d.p_m -= SQRT_2 * params.g_m * model::photon_number(s);
        d
    };
    let good = integrate(&params, &drive, MeanFieldState::VACUUM, horizon, &cfg).unwrap();
    let bad = integrate_with_rhs(flipped, &params, &drive, MeanFieldState::VACUUM, horizon, &cfg).unwrap();
    assert!(oscillator_residual(&good, &params).unwrap().relative < 1e-4);
    assert!(oscillator_residual(&bad, &params).unwrap().relative > 1e-1);
}

#[test]
fn regularized_delta_integrates_to_its_weight() {
    for (e0, t_s) in [(1.0, 3.0), (2.5e3, 5.0)] {
        for frac in [50.0, 200.0] {
            let drive = DriveSpec::DeltaPulse { e0, t_s, sigma: Some(t_s / frac) };
            let n = 400_000;
            let h = 2.0 * t_s / n as f64;
            let sum: f64 = (0..=n)
                .map(|i| {
                    let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                    w * drive.evaluate(i as f64 * h)
                })
                .sum::<f64>()
                * h;
            assert!((sum - e0).abs() < 1e-6 * e0, "sigma = t_s/{frac}: {sum}");
        }
    }
}
