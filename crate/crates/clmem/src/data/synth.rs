//! Synthetic Gaussian blob datasets.
//!
//! Class `c` is centered on a fixed unit direction scaled by 3.0; samples
//! add isotropic Gaussian noise with standard deviation `spread`. The
//! centers depend only on `(class, dim)`, so `spread` is a clean difficulty
//! knob: larger spread lowers the attainable accuracy without moving the
//! classes around.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::rng;

/// Generates `num_classes * n_per_class` samples, class-major, deterministic
/// for a given seed.
pub fn synth_blobs(
    num_classes: usize,
    n_per_class: usize,
    dim: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset> {
    if num_classes == 0 || n_per_class == 0 || dim == 0 {
        return Err(Error::Config(
            "synth_blobs needs positive class count, samples per class, and dimension".into(),
        ));
    }
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::Config(format!(
            "spread must be finite and non-negative, got {spread}"
        )));
    }

    let centers: Vec<Vec<f64>> = (0..num_classes).map(|c| class_center(c, dim)).collect();
    let mut noise = rng::stream(seed, "synth/noise");
    let mut samples = Vec::with_capacity(num_classes * n_per_class);
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..n_per_class {
            let features = center
                .iter()
                .map(|&m| m + spread * normal(&mut noise))
                .collect();
            samples.push(Sample {
                features,
                label: c,
                index: samples.len(),
            });
        }
    }
    Dataset::new(samples, num_classes)
}

/// Fixed unit-norm direction for a class, scaled by 3.0. Independent of the
/// dataset seed so the class geometry is stable across datasets.
pub fn class_center(class: usize, dim: usize) -> Vec<f64> {
    let mut rng = rng::stream(0x00b5_ce17, &format!("synth/center/{class}/{dim}"));
    loop {
        let v: Vec<f64> = (0..dim).map(|_| normal(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| 3.0 * x / norm).collect();
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u1: f64 = rng.gen();
        if u1 > f64::MIN_POSITIVE {
            let u2: f64 = rng.gen();
            return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}
