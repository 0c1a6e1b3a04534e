use std::f64::consts::PI;

use num_complex::Complex;
use ofl_secureagg::*;
use ofl_thfhe::{power_of_two_rotations, HeBackend, MockBackend, ThFhe, ThFheParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Direct `X_k = Σ x_j e^{2πi jk/n}`.
fn naive_dft(x: &[f64]) -> Vec<Complex<f64>> {
    let n = x.len();
    (0..n)
        .map(|k| x.iter().enumerate().map(|(j, v)| Complex::from_polar(*v, 2.0 * PI * (j * k) as f64 / n as f64)).sum())
        .collect()
}

fn run<B: HeBackend>(b: &B, x: &[f64], rng: &mut ChaCha20Rng) -> (Vec<f64>, Vec<f64>) {
    let plan = DftPlan::<f64>::forward(x.len()).unwrap();
    let ct = b.encrypt(x, rng).unwrap();
    let s = fhe_dft(b, &ct, None, &plan).unwrap();
    (b.decrypt_jointly(&s.re, rng).unwrap(), b.decrypt_jointly(&s.im, rng).unwrap())
}

fn worst_vs_oracle(x: &[f64], re: &[f64], im: &[f64]) -> f64 {
    let plan = DftPlan::<f64>::forward(x.len()).unwrap();
    let want = naive_dft(x);
    (0..x.len()).map(|p| (Complex::new(re[p], im[p]) - want[plan.bin_at(p)]).norm()).fold(0.0, f64::max)
}

#[test]
fn plans_reproduce_the_direct_sum() {
    let mut r = ChaCha20Rng::seed_from_u64(1);
    for n in [2, 4, 8, 64, 256] {
        let x: Vec<Complex<f64>> = (0..n).map(|_| Complex::new(r.random(), r.random())).collect();
        assert!(DftPlan::<f64>::forward(n).unwrap().self_test(&x).unwrap() < 1e-9);
        assert!(DftPlan::<f64>::inverse(n).unwrap().self_test(&x).unwrap() < 1e-9);
    }
    let x: Vec<Complex<f32>> = (0..64).map(|i| Complex::new((i as f32).sin(), 0.0)).collect();
    assert!(DftPlan::<f32>::forward(64).unwrap().self_test(&x).unwrap() < 1e-3);
}

#[test]
fn plan_shape() {
    let plan = DftPlan::<f64>::forward(64).unwrap();
    assert_eq!(plan.depth(), 6);
    let shifts: Vec<usize> = plan.stages().iter().map(|s| s.shift).collect();
    assert_eq!(shifts, vec![32, 16, 8, 4, 2, 1]);
    let mut want: Vec<usize> = power_of_two_rotations(64);
    want.retain(|r| *r != 0);
    assert_eq!(plan.rotations(), want);
    assert!(matches!(DftPlan::<f64>::forward(12), Err(Error::BadSize(12))));
    assert!(matches!(DftPlan::<f64>::inverse(1), Err(Error::BadSize(1))));
}

#[test]
fn trivial_spectra_are_exact_under_mock() {
    let b = MockBackend::desk(2);
    let mut r = ChaCha20Rng::seed_from_u64(2);
    let (re, im) = run(&b, &[1.0; 4], &mut r);
    assert_eq!(re, vec![4.0, 0.0, 0.0, 0.0]);
    assert!(im.iter().all(|v| *v == 0.0));
    let (re, im) = run(&b, &[1.0, 0.0, 0.0, 0.0], &mut r);
    assert_eq!(re, vec![1.0; 4]);
    assert!(im.iter().all(|v| *v == 0.0));
}

#[test]
fn random_vector_under_mock() {
    let b = MockBackend::desk(2);
    let mut r = ChaCha20Rng::seed_from_u64(3);
    let x: Vec<f64> = (0..64).map(|_| r.random_range(-1.0..1.0)).collect();
    let (re, im) = run(&b, &x, &mut r);
    assert!(worst_vs_oracle(&x, &re, &im) <= 1e-9);
}

#[test]
fn random_vector_under_real_backend() {
    let mut r = ChaCha20Rng::seed_from_u64(4);
    let b = ThFhe::new(ThFheParams::desk(), 3, &power_of_two_rotations(64), &mut r).unwrap();
    let x: Vec<f64> = (0..64).map(|_| r.random_range(-1.0..1.0)).collect();
    let (re, im) = run(&b, &x, &mut r);
    let worst = worst_vs_oracle(&x, &re, &im);
    eprintln!("real backend DFT error {worst:e}");
    assert!(worst <= 1e-3);
}

#[test]
fn inverse_plan_undoes_forward_under_mock() {
    let b = MockBackend::new(512, 16, 2);
    let mut r = ChaCha20Rng::seed_from_u64(5);
    let x: Vec<f64> = (0..64).map(|_| r.random_range(-1.0..1.0)).collect();
    let fwd = DftPlan::<f64>::forward(64).unwrap();
    let inv = DftPlan::<f64>::inverse(64).unwrap();
    let ct = b.encrypt(&x, &mut r).unwrap();
    let s = fhe_dft(&b, &ct, None, &fwd).unwrap();
    let back = fhe_dft(&b, &s.re, Some(&s.im), &inv).unwrap();
    let re = b.decrypt_jointly(&back.re, &mut r).unwrap();
    let im = b.decrypt_jointly(&back.im, &mut r).unwrap();
    for j in 0..64 {
        assert!((re[j] - x[j]).abs() <= 1e-6 && im[j].abs() <= 1e-6);
    }
}

#[test]
fn parseval_under_mock() {
    let b = MockBackend::desk(2);
    let mut r = ChaCha20Rng::seed_from_u64(6);
    for _ in 0..20 {
        let x: Vec<f64> = (0..64).map(|_| r.random_range(-1.0..1.0)).collect();
        let (re, im) = run(&b, &x, &mut r);
        let time: f64 = x.iter().map(|v| v * v).sum();
        let freq = band_energy(&re, &im, 64);
        assert!((time - freq).abs() <= 0.01 * time);
    }
}

#[test]
fn capacity_is_checked_before_work() {
    let mut r = ChaCha20Rng::seed_from_u64(7);
    let plan = DftPlan::<f64>::forward(64).unwrap();

    let real = ThFhe::new(ThFheParams::desk(), 2, &[1, 2], &mut r).unwrap();
    let ct = real.encrypt(&[0.5; 64], &mut r).unwrap();
    let before = real.counts();
    assert!(matches!(fhe_dft(&real, &ct, None, &plan), Err(Error::MissingRotation(_))));
    assert_eq!(real.counts(), before);

    let mock = MockBackend::new(512, 6, 2);
    let ct = mock.encrypt(&[0.5; 64], &mut r).unwrap();
    assert!(matches!(fhe_dft(&mock, &ct, None, &plan), Err(Error::InsufficientLevels { needed: 6, available: 6 })));
    let short = mock.encrypt(&[0.5; 32], &mut r).unwrap();
    assert!(matches!(fhe_dft(&mock, &short, None, &plan), Err(Error::PlanMismatch { .. })));
}
