//! Deterministic seeded sampling of chart points and tangent vectors for
//! the verification suites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg;
use crate::manifold::Point;

/// Seeded sampler; identical seeds give identical draws on every platform.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    /// Vector uniform in the Euclidean ball of the given radius (rejection
    /// from the cube).
    pub fn vector_in_ball(&mut self, dim: usize, radius: f64) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| self.rng.gen_range(-radius..radius)).collect();
            if linalg::norm(&v) <= radius {
                return v;
            }
        }
    }

    /// Point uniform in the chart ball around `center`.
    pub fn point_in_ball(&mut self, center: &Point, radius: f64) -> Point {
        let v = self.vector_in_ball(center.dim(), radius);
        Point::new(linalg::add(&center.coords, &v))
    }
}
