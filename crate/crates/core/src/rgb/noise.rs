use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson, StandardNormal};

use crate::types::WorkImage;

/// `I + N(0, scale^2)` independently per channel value.
pub fn gaussian<R: Rng + ?Sized>(img: &mut WorkImage, scale: f64, rng: &mut R) {
    let normal = Normal::new(0.0f32, scale as f32).expect("finite non-negative scale");
    for v in &mut img.data {
        *v += normal.sample(rng);
    }
}

/// Poisson photon counting: `Poisson(I * photons) / photons`.
pub fn shot<R: Rng + ?Sized>(img: &mut WorkImage, photons: f64, rng: &mut R) {
    for v in &mut img.data {
        let lambda = v.clamp(0.0, 1.0) as f64 * photons;
        *v = if lambda > 0.0 {
            let p = Poisson::new(lambda).expect("positive rate");
            (p.sample(rng) / photons) as f32
        } else {
            0.0
        };
    }
}

/// Salt and pepper: one uniform draw per pixel; below `amount / 2` the pixel
/// goes black, below `amount` it goes white, otherwise it is untouched.
pub fn impulse<R: Rng + ?Sized>(img: &mut WorkImage, amount: f64, rng: &mut R) {
    for px in img.data.chunks_exact_mut(3) {
        let u: f64 = rng.random();
        if u < amount / 2.0 {
            px.fill(0.0);
        } else if u < amount {
            px.fill(1.0);
        }
    }
}

/// Multiplicative noise `I * (1 + scale * N(0, 1))`.
pub fn speckle<R: Rng + ?Sized>(img: &mut WorkImage, scale: f64, rng: &mut R) {
    let scale = scale as f32;
    for v in &mut img.data {
        let z: f32 = StandardNormal.sample(rng);
        *v *= 1.0 + scale * z;
    }
}
