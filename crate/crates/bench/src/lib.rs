//! Shared inputs for the criterion benchmarks.

use proxlp::model::{make_features, EnergyModel, Features, GaussianKernel};
use proxlp::synthetic::{default_kernels, generate, FixtureSpec};

/// Bilateral features of a `size x size` synthetic image.
pub fn image_features(size: usize, seed: u64) -> Features {
    let image = generate(&FixtureSpec::square(size, 4), seed).unwrap().image;
    make_features(&image, &GaussianKernel::bilateral(1.0, 5.0, 20.0).unwrap())
}

/// Scores on the level grid, one per point.
pub fn grid_scores(n: usize, levels: usize) -> Vec<f64> {
    (0..n)
        .map(|a| ((a * 7919) % levels) as f64 / (levels - 1) as f64)
        .collect()
}

/// Lattice model of a `size x size` synthetic fixture with `labels` labels.
pub fn fixture_model(size: usize, labels: usize, seed: u64) -> EnergyModel {
    let fx = generate(&FixtureSpec::square(size, labels), seed).unwrap();
    EnergyModel::from_image(fx.unaries, &fx.image, &default_kernels(), 10).unwrap()
}
