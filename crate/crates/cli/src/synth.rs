//! `proxlp synth`: writes a seeded synthetic instance.

use std::path::Path;

use proxlp::synthetic::{generate, FixtureSpec};

use crate::error::{io_err, Result};
use crate::io::{save_unaries, write_label_indices, write_ppm};

/// Writes `image.ppm`, `unaries.unr` and `truth.idx` into `out`.
pub fn write_fixture(out: &Path, size: usize, labels: usize, seed: u64) -> Result<()> {
    let fx = generate(&FixtureSpec::square(size, labels), seed)?;
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    write_ppm(&out.join("image.ppm"), size, size, fx.image.colors())?;
    save_unaries(&out.join("unaries.unr"), &fx.unaries)?;
    write_label_indices(&out.join("truth.idx"), &fx.truth, labels)
}
