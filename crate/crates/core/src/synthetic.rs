//! Seeded synthetic segmentation instances: a color-gradient image over a
//! block pattern of labels, with noisy unaries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{FeatureField, GaussianKernel, LabelScores};

/// Label colors added to the gradient so that region boundaries show up in
/// the bilateral features.
const TINTS: [[i32; 3]; 8] = [
    [60, 0, 0],
    [0, 60, 0],
    [0, 0, 60],
    [60, 60, 0],
    [60, 0, 60],
    [0, 60, 60],
    [-40, -40, -40],
    [40, 40, 40],
];

#[derive(Clone, Debug)]
pub struct Fixture {
    pub image: FeatureField,
    pub unaries: LabelScores,
    pub truth: Vec<usize>,
}

/// Generation settings.
#[derive(Clone, Debug)]
pub struct FixtureSpec {
    pub width: usize,
    pub height: usize,
    pub labels: usize,
    /// Side length of the label blocks.
    pub block: usize,
    /// Amplitude of the uniform noise on per-label classifier scores.
    pub unary_noise: f64,
    /// Score bonus of the true label before noise.
    pub unary_signal: f64,
    pub color_noise: i32,
}

impl FixtureSpec {
    pub fn square(size: usize, labels: usize) -> Self {
        Self {
            width: size,
            height: size,
            labels,
            block: (size / 4).max(1),
            unary_noise: 2.0,
            unary_signal: 1.0,
            color_noise: 12,
        }
    }
}

pub fn generate(spec: &FixtureSpec, seed: u64) -> Result<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h, m) = (spec.width, spec.height, spec.labels);
    let n = w * h;
    let mut truth = Vec::with_capacity(n);
    let mut colors = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n * m);
    for y in 0..h {
        for x in 0..w {
            let (bx, by) = (x / spec.block, y / spec.block);
            let label = (bx + 2 * by + (bx * by) % 3) % m;
            truth.push(label);

            let tint = TINTS[label % TINTS.len()];
            let base = [
                (255 * x / w.max(2)) as i32 / 2 + 40,
                (255 * y / h.max(2)) as i32 / 2 + 40,
                100,
            ];
            let mut c = [0u8; 3];
            for k in 0..3 {
                let noise = rng.gen_range(-spec.color_noise..=spec.color_noise);
                c[k] = (base[k] + tint[k] + noise).clamp(0, 255) as u8;
            }
            colors.push(c);

            let mut scores: Vec<f64> = (0..m)
                .map(|i| {
                    let signal = if i == label { spec.unary_signal } else { 0.0 };
                    signal + rng.gen_range(-spec.unary_noise..spec.unary_noise)
                })
                .collect();
            // phi = -log softmax(scores)
            let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = top + scores.iter().map(|s| (s - top).exp()).sum::<f64>().ln();
            scores.iter_mut().for_each(|s| *s = lse - *s);
            phi.extend(scores);
        }
    }
    Ok(Fixture {
        image: FeatureField::new(w, h, colors)?,
        unaries: LabelScores::new(n, m, phi)?,
        truth,
    })
}

/// Kernel mixture used with the synthetic fixtures: a nearest-neighbour
/// smoothness term plus a wide, color-selective appearance term.
pub fn default_kernels() -> Vec<GaussianKernel> {
    vec![
        GaussianKernel::spatial(0.1, 1.0).expect("valid kernel"),
        GaussianKernel::bilateral(0.03, 20.0, 10.0).expect("valid kernel"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_shaped() {
        let spec = FixtureSpec::square(16, 3);
        let a = generate(&spec, 7).unwrap();
        let b = generate(&spec, 7).unwrap();
        assert_eq!(a.image, b.image);
        assert_eq!(a.unaries, b.unaries);
        assert_eq!(a.unaries.n(), 256);
        assert_eq!(a.unaries.m(), 3);
        assert!(a.truth.iter().all(|&l| l < 3));
        assert!(a.unaries.as_slice().iter().all(|&p| p >= 0.0));
        let c = generate(&spec, 8).unwrap();
        assert_ne!(a.unaries, c.unaries);
    }
}
