//! Property tests over randomized inputs.

mod common;

use cgdetect::data::{accuracy, largest_remainder, split_manifest, Label, Manifest, Record};
use cgdetect::ops::softmax_cross_entropy;
use cgdetect::softpool::{softpool_forward, SoftPoolConfig};
use cgdetect::srm::{load_bank, FilterSubset};
use cgdetect::Tensor4;
use proptest::prelude::*;

fn window(vals: &[f64]) -> Tensor4<f64> {
    Tensor4::from_vec([1, 1, 2, 2], vals.to_vec()).unwrap()
}

fn pool(vals: &[f64]) -> f64 {
    softpool_forward(&window(vals), SoftPoolConfig::default()).unwrap().data()[0]
}

fn image(vals: Vec<f64>) -> Tensor4<f64> {
    Tensor4::from_vec([1, 3, 6, 6], vals).unwrap()
}

proptest! {
    #[test]
    fn softpool_is_shift_equivariant(vals in prop::collection::vec(-10.0..10.0f64, 4), c in -50.0..50.0f64) {
        let shifted: Vec<f64> = vals.iter().map(|v| v + c).collect();
        prop_assert!((pool(&shifted) - pool(&vals) - c).abs() < 1e-9);
    }

    #[test]
    fn softpool_lies_between_mean_and_max(vals in prop::collection::vec(-20.0..20.0f64, 4)) {
        let out = pool(&vals);
        let mean = vals.iter().sum::<f64>() / 4.0;
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(out >= mean - 1e-12 && out <= max + 1e-12);
    }

    #[test]
    fn softpool_scale_limits(vals in prop::collection::vec(-1.0..1.0f64, 4)) {
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = vals.iter().sum::<f64>() / 4.0;
        // Tiny spread behaves like an average, huge spread like a max.
        let tiny: Vec<f64> = vals.iter().map(|v| v * 1e-6).collect();
        prop_assert!((pool(&tiny) - mean * 1e-6).abs() < 1e-11);
        let top_gap = vals.iter().filter(|&&v| v < max).map(|v| max - v).fold(f64::INFINITY, f64::min);
        prop_assume!(top_gap > 0.05);
        let huge: Vec<f64> = vals.iter().map(|v| v * 1e4).collect();
        prop_assert!((pool(&huge) / 1e4 - max).abs() < 1e-6);
    }

    #[test]
    fn cross_entropy_is_shift_invariant(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -20.0..20.0f64, label in 0usize..2) {
        let l1 = Tensor4::from_vec([1, 2, 1, 1], vec![a, b]).unwrap();
        let l2 = Tensor4::from_vec([1, 2, 1, 1], vec![a + c, b + c]).unwrap();
        let (x, gx) = softmax_cross_entropy(&l1, &[label]).unwrap();
        let (y, gy) = softmax_cross_entropy(&l2, &[label]).unwrap();
        prop_assert!((x - y).abs() < 1e-9);
        prop_assert!(gx.max_abs_diff(&gy) < 1e-9);
    }

    #[test]
    fn apply_bank_is_linear(
        a in prop::collection::vec(0.0..255.0f64, 108),
        b in prop::collection::vec(0.0..255.0f64, 108),
        alpha in -2.0..2.0f64,
        beta in -2.0..2.0f64,
    ) {
        let bank = load_bank().unwrap();
        let (xa, xb) = (image(a), image(b));
        let mix = xa.scale(alpha).add(&xb.scale(beta)).unwrap();
        let lhs = bank.apply(&mix, &FilterSubset::All30).unwrap();
        let rhs = bank.apply(&xa, &FilterSubset::All30).unwrap().scale(alpha)
            .add(&bank.apply(&xb, &FilterSubset::All30).unwrap().scale(beta)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-5);
    }

    #[test]
    fn apply_bank_ignores_constant_offsets(vals in prop::collection::vec(0.0..200.0f64, 108), c in 0.0..55.0f64) {
        let bank = load_bank().unwrap();
        let x = image(vals);
        let lhs = bank.apply(&x.map(|v| v + c), &FilterSubset::All30).unwrap();
        let rhs = bank.apply(&x, &FilterSubset::All30).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-9);
    }

    #[test]
    fn splits_partition_the_manifest(cg in 1usize..40, pg in 1usize..40, r in (1u32..10, 1u32..10, 1u32..10), seed: u64) {
        let records: Vec<Record> = (0..cg + pg)
            .map(|i| Record { path: format!("{i}.png"), label: if i < cg { Label::Cg } else { Label::Pg } })
            .collect();
        let m = Manifest::new(".", records).unwrap();
        let ratios = [r.0 as f64, r.1 as f64, r.2 as f64];
        let parts = split_manifest(&m, ratios, seed).unwrap();
        let mut all: Vec<String> = parts.iter().flat_map(|p| p.records.iter().map(|r| r.path.clone())).collect();
        prop_assert_eq!(all.len(), m.len());
        all.sort();
        all.dedup();
        prop_assert_eq!(all.len(), m.len());
        let sum = ratios.iter().sum::<f64>();
        for (label, total) in [(Label::Cg, cg), (Label::Pg, pg)] {
            for (part, ratio) in parts.iter().zip(ratios) {
                let exact = total as f64 * ratio / sum;
                prop_assert!((part.count(label) as f64 - exact).abs() < 1.0);
            }
        }
    }

    #[test]
    fn largest_remainder_sums_to_total(total in 0usize..500, r in prop::collection::vec(0.1..10.0f64, 1..6)) {
        let sizes = largest_remainder(total, &r);
        prop_assert_eq!(sizes.iter().sum::<usize>(), total);
    }

    #[test]
    fn accuracy_is_permutation_invariant(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..60), seed: u64) {
        let to = |b: bool| if b { Label::Pg } else { Label::Cg };
        let (pred, truth): (Vec<Label>, Vec<Label>) = pairs.iter().map(|&(p, t)| (to(p), to(t))).unzip();
        let base = accuracy(&pred, &truth).unwrap();
        let mut idx: Vec<usize> = (0..pairs.len()).collect();
        use rand::{seq::SliceRandom, SeedableRng};
        idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let p2: Vec<Label> = idx.iter().map(|&i| pred[i]).collect();
        let t2: Vec<Label> = idx.iter().map(|&i| truth[i]).collect();
        prop_assert_eq!(accuracy(&p2, &t2).unwrap(), base);
        prop_assert!((0.0..=1.0).contains(&base.acc));
    }
}
