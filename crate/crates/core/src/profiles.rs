//! Smooth test functions: the standard bump and seeded random trigonometric
//! sums.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// `exp(-1/(1 - |x-c|²/ρ²))` inside `B_ρ(c)`, zero outside.
pub fn bump(x: [f64; 2], center: [f64; 2], radius: f64) -> f64 {
    let q = ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)) / (radius * radius);
    if q >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - q)).exp()
    }
}

/// Derivative of the 1D bump `exp(-1/(1 - ((x-c)/ρ)²))`.
pub fn bump_derivative_1d(x: f64, center: f64, radius: f64) -> f64 {
    let z = (x - center) / radius;
    let q = z * z;
    if q >= 1.0 {
        return 0.0;
    }
    let b = (-1.0 / (1.0 - q)).exp();
    -b * 2.0 * z / ((1.0 - q) * (1.0 - q) * radius)
}

/// `Σ_k (a_k cos(kπx/ℓ) + b_k sin(kπx/ℓ)) / k²` (1D) with an analogous
/// separable form in 2D; coefficients uniform in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSmooth {
    pub length: f64,
    pub terms: Vec<(f64, f64, f64, f64)>,
}

impl RandomSmooth {
    pub fn new(seed: u64, modes: usize, length: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms = (0..modes)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        Self { length, terms }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let w = std::f64::consts::PI / self.length;
        self.terms
            .iter()
            .enumerate()
            .map(|(k, &(a, b, c, d))| {
                let k = (k + 1) as f64;
                let (u, v) = (k * w * x[0], k * w * x[1]);
                (a * u.cos() + b * u.sin() + c * v.cos() * u.cos() + d * v.sin()) / (k * k)
            })
            .sum()
    }
}
