use std::f64::consts::{PI, TAU};

use optomem_core::analysis::{
    analyze, circulation, count_self_intersections, form_factor, loop_area, loop_perimeter, AnalysisOptions,
};
use optomem_core::{integrate, DriveSpec, IntegratorConfig, LoopCurve, MeanFieldState, OmParams, OutputSelector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Closed Fourier curve sampled at `n` points with the first point repeated.
fn fourier_curve(coeffs: &[[f64; 4]], n: usize) -> LoopCurve {
    let pts = (0..=n)
        .map(|i| {
            let t = TAU * (i % n) as f64 / n as f64;
            coeffs.iter().enumerate().fold([0.0, 0.0], |[x, y], (k, c)| {
                let w = (k + 1) as f64 * t;
                [x + c[0] * w.cos() + c[1] * w.sin(), y + c[2] * w.cos() + c[3] * w.sin()]
            })
        })
        .collect();
    LoopCurve::new(pts)
}

fn random_coeffs(rng: &mut ChaCha8Rng) -> Vec<[f64; 4]> {
    let harmonics = rng.gen_range(1..=6);
    (0..harmonics)
        .map(|_| [0; 4].map(|_| rng.gen_range(-1.0..1.0)))
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

#[test]
fn isoperimetric_bound_on_random_smooth_curves() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut knotted = 0;
    for _ in 0..1000 {
        let c = fourier_curve(&random_coeffs(&mut rng), 600);
        let f = form_factor(&c).unwrap();
        assert!((0.0..=1.0 + 1e-9).contains(&f), "F = {f}");
        knotted += usize::from(count_self_intersections(&c) > 0);
    }
    assert!(knotted > 100, "sample should include self-intersecting curves");
}

#[test]
fn circle_has_unit_form_factor() {
    for r in [1e-6, 1.0, 3e8] {
        let f = form_factor(&fourier_curve(&[[r, 0.0, 0.0, r]], 400)).unwrap();
        assert!((f - 1.0).abs() < 1e-3, "r = {r}: F = {f}");
    }
}

#[test]
fn proportional_response_encloses_no_area() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let r: f64 = rng.gen_range(-5.0..5.0);
        let coeffs = random_coeffs(&mut rng);
        let c = fourier_curve(&coeffs, 500);
        let pts: Vec<[f64; 2]> = c.points.iter().map(|p| [p[0], r * p[0]]).collect();
        let (lo, hi) = pts.iter().fold((f64::MAX, f64::MIN), |(l, h), p| (l.min(p[0]), h.max(p[0])));
        let bbox = (hi - lo) * (hi - lo) * r.abs().max(1e-300);
        let area = loop_area(&LoopCurve::new(pts)).unwrap();
        assert!(area < 1e-10 * bbox, "R = {r}: area {area:e}, bbox {bbox:e}");
    }
}

#[test]
fn resampling_a_smooth_curve_keeps_area_and_form_factor() {
    let rose = |n: usize| {
        let pts = (0..=n)
            .map(|i| {
                let t = TAU * (i % n) as f64 / n as f64;
                let r = 1.0 + 0.3 * (3.0 * t).cos();
                [r * t.cos(), 0.5 * r * t.sin()]
            })
            .collect();
        LoopCurve::new(pts)
    };
    let (a, b) = (rose(8192), rose(16384));
    assert!(rel(loop_area(&a).unwrap(), loop_area(&b).unwrap()) < 1e-6);
    assert!(rel(form_factor(&a).unwrap(), form_factor(&b).unwrap()) < 1e-6);
}

#[test]
fn greens_theorem_and_orientation_on_random_curves() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let c = fourier_curve(&random_coeffs(&mut rng), 700);
        let circ = circulation(&c).unwrap();
        assert!(rel(circ.x_dy.abs(), circ.y_dx.abs()) < 1e-6, "{circ:?}");
        let r = c.reversed();
        assert!(rel(loop_area(&c).unwrap(), loop_area(&r).unwrap()) < 1e-6);
        assert!(rel(loop_perimeter(&c), loop_perimeter(&r)) < 1e-12);
        assert!(rel(form_factor(&c).unwrap(), form_factor(&r).unwrap()) < 1e-6);
    }
}

#[test]
fn simulated_loops_respect_the_bound() {
    let params = OmParams::default();
    let drives = [
        DriveSpec::GaussianTrain { e0: 1e4, t_s: 5.0, sigma: 0.5 },
        DriveSpec::GaussianTrain { e0: 3e6, t_s: 5.0, sigma: 1.25 },
        DriveSpec::Sinusoidal { e0: 8.745e4, omega: 1.055 },
        DriveSpec::SquareSinusoidal { e0: 2.173e5, omega: 2.794 },
    ];
    for drive in drives {
        let cfg = IntegratorConfig::for_drive(&params, &drive).unwrap();
        let traj = integrate(&params, &drive, MeanFieldState::VACUUM, 4.0 * drive.period().unwrap(), &cfg).unwrap();
        for output in [OutputSelector::Photon, OutputSelector::Phonon, OutputSelector::XC] {
            let opts = AnalysisOptions { output, ..AnalysisOptions::default() };
            for m in analyze(&traj, &params, &opts).unwrap().cycles {
                assert!((0.0..=1.0 + 1e-9).contains(&m.form_factor), "{drive:?} {output:?}: {m:?}");
            }
        }
    }
}

#[test]
fn ellipse_form_factor_matches_closed_form() {
    // Ramanujan's perimeter is exact to ~1e-10 relative at this aspect ratio.
    let (a, b) = (2.0f64, 1.0f64);
    let h = ((a - b) / (a + b)).powi(2);
    let p = PI * (a + b) * (1.0 + 3.0 * h / (10.0 + (4.0 - 3.0 * h).sqrt()));
    let expected = 4.0 * PI * (PI * a * b) / (p * p);
    let f = form_factor(&fourier_curve(&[[a, 0.0, 0.0, b]], 20000)).unwrap();
    assert!(rel(f, expected) < 1e-6, "{f} vs {expected}");
}
