use liesym::jetspace::{estimate_derivatives, Trajectory};
use liesym::synth::{add_noise, eval_rhs, integrate_rk4, RhsSpec};

fn riccati_exact(t: f64, k: f64) -> f64 {
    5.0 * t * t / (t.powi(5) + k)
}

#[test]
fn exponential_to_1e_10() {
    let run = integrate_rk4(&RhsSpec::linear_x(), 0.0, 1.0, 1.0, 1000).unwrap();
    let end = *run.trajectory.states.last().unwrap();
    assert!((end - std::f64::consts::E).abs() <= 1e-10, "{}", end - std::f64::consts::E);
}

#[test]
fn riccati_matches_bernoulli_solution() {
    let run = integrate_rk4(&RhsSpec::riccati(), 1.0, 5.0 / 6.0, 2.0, 1000).unwrap();
    let tr = &run.trajectory;
    let err = tr.times.iter().zip(&tr.states).map(|(&t, &x)| (x - riccati_exact(t, 5.0)).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-8, "{err}");
}

#[test]
fn halving_step_gains_fourth_order() {
    let err = |steps: usize| -> f64 {
        let tr = integrate_rk4(&RhsSpec::<f64>::linear_x(), 0.0, 1.0, 1.0, steps).unwrap().trajectory;
        tr.times.iter().zip(&tr.states).map(|(t, x)| (x - t.exp()).abs()).fold(0.0, f64::max)
    };
    let ratio = err(20) / err(40);
    assert!(ratio >= 14.0, "{ratio}");
}

#[test]
fn noise_level_is_relative_to_rms() {
    let n = 100_000;
    let t: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let x: Vec<f64> = t.iter().map(|v| 2.0 + (v * 0.001).sin()).collect();
    let tr = Trajectory::new("n", t, x).unwrap();
    let noisy = add_noise(&tr, 1e-3, 77);
    let rms = (tr.states.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let d: Vec<f64> = noisy.states.iter().zip(&tr.states).map(|(a, b)| (a - b) / rms).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let sd = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    assert!((0.95e-3..=1.05e-3).contains(&sd), "{sd}");
    assert_eq!(noisy.times, tr.times);
}

#[test]
fn finite_differences_agree_with_the_field() {
    let rhs = RhsSpec::riccati();
    let tr = integrate_rk4(&rhs, 1.0, 5.0 / 6.0, 2.0, 1000).unwrap().trajectory;
    let d = estimate_derivatives(&tr).unwrap();
    let f: Vec<f64> = d.iter().map(|&(t, x, _)| eval_rhs(&rhs, t, x).unwrap()).collect();
    let rms = (f.iter().map(|v| v * v).sum::<f64>() / f.len() as f64).sqrt();
    let worst = d.iter().zip(&f).map(|(p, fv)| (p.2 - fv).abs()).fold(0.0, f64::max);
    assert!(worst <= 5e-3 * rms, "{worst} vs {rms}");
}

#[test]
fn single_precision_integration() {
    let run = integrate_rk4(&RhsSpec::<f32>::linear_x(), 0.0, 1.0, 1.0, 100).unwrap();
    assert!((run.trajectory.states[100] - std::f32::consts::E).abs() < 1e-5);
}
