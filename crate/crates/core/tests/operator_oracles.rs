//! Fast kernels against naive loops on randomized small instances.

mod common;

use cgdetect::ops::*;
use cgdetect::softpool::{softpool_forward, SoftPoolConfig};
use cgdetect::srm::{load_bank, FilterSubset};
use cgdetect::Tensor4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CASES: u64 = 25;
const TOL: f64 = 1e-5;

#[test]
fn conv2d_matches_naive_loops() {
    for seed in 0..CASES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, c, o) = (rng.gen_range(1..3), rng.gen_range(1..5), rng.gen_range(1..5));
        let k = [1, 3, 5][rng.gen_range(0..3)];
        let (h, w) = (rng.gen_range(k..10), rng.gen_range(k..10));
        let stride = rng.gen_range(1..3);
        let pad = rng.gen_range(0..=k / 2);
        let x = common::random(&mut rng, [n, c, h, w], -1.0, 1.0);
        let wt = common::random(&mut rng, [o, c, k, k], -1.0, 1.0);
        let b: Vec<f64> = (0..o).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fast = conv2d_forward(&x, &wt, &b, stride, pad).unwrap();
        let slow = common::conv2d(&x, &wt, &b, stride, pad);
        assert_eq!(fast.dims(), slow.dims(), "seed {seed}");
        assert!(fast.max_abs_diff(&slow) < TOL, "seed {seed}: {}", fast.max_abs_diff(&slow));
    }
}

#[test]
fn conv2d_f32_matches_f64_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let x = common::random(&mut rng, [2, 8, 12, 12], -1.0, 1.0);
    let w = common::random(&mut rng, [6, 8, 3, 3], -0.3, 0.3);
    let b = vec![0.1; 6];
    let fast = conv2d_forward(&x.cast::<f32>(), &w.cast::<f32>(), &[0.1f32; 6], 2, 1).unwrap();
    assert!(fast.cast::<f64>().max_abs_diff(&common::conv2d(&x, &w, &b, 2, 1)) < TOL);
}

#[test]
fn batchnorm_train_matches_two_pass_oracle() {
    for seed in 0..CASES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = [rng.gen_range(2..5), rng.gen_range(1..5), rng.gen_range(1..6), rng.gen_range(1..6)];
        let x = common::random(&mut rng, dims, -3.0, 3.0);
        let gamma: Vec<f64> = (0..dims[1]).map(|_| rng.gen_range(0.5..2.0)).collect();
        let beta: Vec<f64> = (0..dims[1]).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut running = RunningStats::new(dims[1]);
        let (y, _) =
            batchnorm2d_forward(&x, &gamma, &beta, &mut running, Mode::Train, BatchNormOptions::default()).unwrap();
        let oracle = common::batchnorm_train(&x, &gamma, &beta, BN_EPS);
        assert!(y.max_abs_diff(&oracle) < TOL, "seed {seed}");
    }
}

#[test]
fn batchnorm_running_statistics_follow_momentum() {
    let x = Tensor4::<f64>::from_vec([4, 1, 1, 1], vec![1.0, 2.0, 3.0, 6.0]).unwrap();
    let mut running = RunningStats::new(1);
    batchnorm2d_forward(&x, &[1.0], &[0.0], &mut running, Mode::Train, BatchNormOptions::default()).unwrap();
    // Batch mean 3, unbiased variance 14/3.
    assert!((running.mean[0] - 0.3).abs() < 1e-12);
    assert!((running.var[0] - (0.9 + 0.1 * 14.0 / 3.0)).abs() < 1e-12);
    let (y, _) = batchnorm2d_forward(&x, &[1.0], &[0.0], &mut running, Mode::Eval, BatchNormOptions::default()).unwrap();
    let expect = (1.0 - 0.3) / (running.var[0] + BN_EPS).sqrt();
    assert!((y.data()[0] - expect).abs() < 1e-12);
}

#[test]
fn global_avg_pool_matches_oracle() {
    for seed in 0..CASES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = [rng.gen_range(1..4), rng.gen_range(1..6), rng.gen_range(1..8), rng.gen_range(1..8)];
        let x = common::random(&mut rng, dims, -5.0, 5.0);
        assert!(global_avg_pool_forward(&x).unwrap().max_abs_diff(&common::global_avg_pool(&x)) < TOL);
    }
}

#[test]
fn apply_bank_matches_oracle() {
    let bank = load_bank().unwrap();
    for seed in 0..CASES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let subset = FilterSubset::ABLATION[seed as usize % FilterSubset::ABLATION.len()].clone();
        let dims = [rng.gen_range(1..3), 3, rng.gen_range(5..10), rng.gen_range(5..10)];
        let x = common::random(&mut rng, dims, 0.0, 255.0);
        let fast = bank.apply(&x, &subset).unwrap();
        let slow = common::apply_kernels(&x, &bank.members(&subset).unwrap());
        assert!(fast.max_abs_diff(&slow) < TOL, "seed {seed} subset {subset}");
    }
}

#[test]
fn softpool_matches_definition() {
    for seed in 0..CASES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = common::random(&mut rng, [2, 3, 4, 6], -4.0, 4.0);
        let y = softpool_forward(&x, SoftPoolConfig::default()).unwrap();
        for n in 0..2 {
            for c in 0..3 {
                for i in 0..2 {
                    for j in 0..3 {
                        let win = [
                            x.at(n, c, 2 * i, 2 * j),
                            x.at(n, c, 2 * i, 2 * j + 1),
                            x.at(n, c, 2 * i + 1, 2 * j),
                            x.at(n, c, 2 * i + 1, 2 * j + 1),
                        ];
                        assert!((y.at(n, c, i, j) - common::softpool_window(&win)).abs() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn maxpool_and_linear_match_oracles() {
    for seed in 0..CASES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = common::random(&mut rng, [2, 2, 4, 4], -1.0, 1.0);
        let (y, _) = maxpool_forward(&x, PoolWindow::default()).unwrap();
        let oracle = Tensor4::from_fn([2, 2, 2, 2], |n, c, i, j| {
            let mut m = f64::NEG_INFINITY;
            for a in 0..2 {
                for b in 0..2 {
                    m = m.max(x.at(n, c, 2 * i + a, 2 * j + b));
                }
            }
            m
        });
        assert_eq!(y, oracle);

        let f = common::random(&mut rng, [3, 5, 1, 1], -1.0, 1.0);
        let w = common::random(&mut rng, [2, 5, 1, 1], -1.0, 1.0);
        let b = [0.5, -0.25];
        let out = linear_forward(&f, &w, &b).unwrap();
        let oracle = Tensor4::from_fn([3, 2, 1, 1], |n, o, _, _| b[o] + (0..5).map(|k| f.at(n, k, 0, 0) * w.at(o, k, 0, 0)).sum::<f64>());
        assert!(out.max_abs_diff(&oracle) < 1e-12);
    }
}
