mod common;

use common::{dense_instance, dense_ip_energy, dense_lp_energy, random_labels, random_scores};
use proptest::prelude::*;
use proxlp::energy::{ip_energy, lp_energy, lp_pairwise};
use proxlp::model::{EnergyModel, FeatureField, GaussianKernel, LabelScores, PairwiseMode};
use proxlp::permutohedral::lattice_kernel_matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_lp_matches_dense_formula(seed in 0u64..10_000, n in 1usize..25, m in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = dense_instance(&mut rng, n, m, PairwiseMode::Exact);
        let y = random_scores(&mut rng, n, m);
        let got = lp_energy(&inst.model, &y).unwrap();
        let want = dense_lp_energy(&inst.k, inst.model.unaries().as_slice(), y.as_slice(), n, m);
        prop_assert!(close(got, want, 1e-10), "{got} vs {want}");
    }

    #[test]
    fn lp_equals_ip_on_integral_points(seed in 0u64..10_000, n in 1usize..25, m in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = dense_instance(&mut rng, n, m, PairwiseMode::Exact);
        let labels = random_labels(&mut rng, n, m);
        let y = LabelScores::from_labels(&labels, m).unwrap();
        let ip = ip_energy(&inst.model, &y).unwrap();
        let want = dense_ip_energy(&inst.k, inst.model.unaries().as_slice(), &labels, m);
        prop_assert!(close(ip, want, 1e-10));
        prop_assert!(close(lp_energy(&inst.model, &y).unwrap(), ip, 1e-10));
    }

    #[test]
    fn lattice_lp_is_dense_formula_with_lattice_weights(seed in 0u64..10_000, n in 1usize..40, m in 2usize..4) {
        // On scores that sit exactly on level boundaries the binned
        // comparisons are exact, so only the kernel approximation remains.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = dense_instance(&mut rng, n, m, PairwiseMode::Lattice { levels: 10 });
        let lat = inst.model.pairwise().lattices().next().unwrap();
        let khat = lattice_kernel_matrix(lat).unwrap();
        // One kernel, so its weight is the self weight.
        let weight = inst.model.pairwise().self_weight();
        let mut kw = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    kw[a * n + b] = weight * khat[a * n + b];
                }
            }
        }
        let mut v = Vec::with_capacity(n * m);
        for _ in 0..n {
            let mut left = 9usize;
            for i in 0..m {
                let take = if i + 1 == m { left } else { rng.gen_range(0..=left) };
                v.push(take as f64 / 9.0);
                left -= take;
            }
        }
        let y = LabelScores::new(n, m, v).unwrap();
        let got = lp_pairwise(&inst.model, &y);
        let want = dense_lp_energy(&kw, &vec![0.0; n * m], y.as_slice(), n, m);
        prop_assert!(close(got, want, 1e-9), "{got} vs {want}");
    }

    #[test]
    fn lp_is_convex_along_segments(seed in 0u64..10_000, n in 1usize..20, m in 2usize..5, t in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = dense_instance(&mut rng, n, m, PairwiseMode::Exact);
        let y0 = random_scores(&mut rng, n, m);
        let y1 = random_scores(&mut rng, n, m);
        let mid: Vec<f64> = y0.as_slice().iter().zip(y1.as_slice()).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        let mid = LabelScores::new(n, m, mid).unwrap();
        let e0 = lp_energy(&inst.model, &y0).unwrap();
        let e1 = lp_energy(&inst.model, &y1).unwrap();
        let em = lp_energy(&inst.model, &mid).unwrap();
        prop_assert!(em <= (1.0 - t) * e0 + t * e1 + 1e-9);
    }

    #[test]
    fn energies_are_label_permutation_invariant(seed in 0u64..10_000, n in 1usize..20, m in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for mode in [PairwiseMode::Exact, PairwiseMode::Lattice { levels: 10 }] {
            let inst = dense_instance(&mut rng, n, m, mode);
            let mut perm: Vec<usize> = (0..m).collect();
            perm.rotate_left(1);
            let permute = |x: &LabelScores| {
                let mut v = vec![0.0; n * m];
                for a in 0..n {
                    for i in 0..m {
                        v[a * m + perm[i]] = x.get(a, i);
                    }
                }
                LabelScores::new(n, m, v).unwrap()
            };
            let model2 = inst.model.with_unaries(permute(inst.model.unaries())).unwrap();
            let y = random_scores(&mut rng, n, m);
            let a = lp_energy(&inst.model, &y).unwrap();
            let b = lp_energy(&model2, &permute(&y)).unwrap();
            prop_assert!(close(a, b, 1e-10));
            let l = LabelScores::from_labels(&random_labels(&mut rng, n, m), m).unwrap();
            prop_assert!(close(ip_energy(&inst.model, &l).unwrap(), ip_energy(&model2, &permute(&l)).unwrap(), 1e-10));
        }
    }

    #[test]
    fn pixel_permutation_invariance(seed in 0u64..10_000, n in 2usize..20, m in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = dense_instance(&mut rng, n, m, PairwiseMode::Exact);
        let y = random_scores(&mut rng, n, m);
        let before = dense_lp_energy(&inst.k, inst.model.unaries().as_slice(), y.as_slice(), n, m);
        prop_assert!(close(lp_energy(&inst.model, &y).unwrap(), before, 1e-10));
        // Reversing pixel order together with the weights leaves the sum alone.
        let rev = |v: &[f64], w: usize| -> Vec<f64> { v.chunks(w).rev().flatten().copied().collect() };
        let mut kr = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                kr[a * n + b] = inst.k[(n - 1 - a) * n + (n - 1 - b)];
            }
        }
        let after = dense_lp_energy(&kr, &rev(inst.model.unaries().as_slice(), m), &rev(y.as_slice(), m), n, m);
        prop_assert!(close(before, after, 1e-12));
    }
}

#[test]
fn lattice_lp_equals_ip_on_image_labelings() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (w, h, m) = (30, 20, 3);
    let colors: Vec<[u8; 3]> = (0..w * h)
        .map(|_| [rng.gen(), rng.gen(), rng.gen()])
        .collect();
    let image = FeatureField::new(w, h, colors).unwrap();
    let phi = random_scores(&mut rng, w * h, m);
    let kernels = vec![
        GaussianKernel::spatial(3.0, 3.0).unwrap(),
        GaussianKernel::bilateral(5.0, 30.0, 20.0).unwrap(),
    ];
    let model = EnergyModel::from_image(phi, &image, &kernels, 10).unwrap();
    for _ in 0..5 {
        let y = LabelScores::from_labels(&random_labels(&mut rng, w * h, m), m).unwrap();
        let ip = ip_energy(&model, &y).unwrap();
        let lp = lp_energy(&model, &y).unwrap();
        assert!((lp - ip).abs() <= 1e-9 * ip.abs(), "{lp} vs {ip}");
    }
}

#[test]
fn uniform_scores_pay_only_mean_unary() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inst = dense_instance(&mut rng, 10, 3, PairwiseMode::Exact);
    let y = LabelScores::uniform(10, 3);
    let unary: f64 = inst.model.unaries().as_slice().iter().sum::<f64>() / 3.0;
    assert!(close(lp_energy(&inst.model, &y).unwrap(), unary, 1e-12));
}
