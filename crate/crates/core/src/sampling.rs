//! Deterministic low-discrepancy points in balls and on spheres.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::math;

const PRIMES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Largest dimension the Halton generator supports.
pub const MAX_DIM: usize = PRIMES.len();

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = u64::from(base);
    let inv = 1.0 / f64::from(base);
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// Halton sequence in `[0, 1)^dim` with an optional Cranley-Patterson shift.
#[derive(Clone, Debug)]
pub struct Halton {
    dim: usize,
    index: u64,
    shift: Vec<f64>,
}

impl Halton {
    /// Unshifted sequence, starting at index 1 to skip the origin.
    pub fn new(dim: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&dim),
            "Halton dimension out of range"
        );
        Halton {
            dim,
            index: 1,
            shift: vec![0.0; dim],
        }
    }

    /// Sequence shifted modulo 1 by a vector drawn from `seed`.
    pub fn seeded(dim: usize, seed: u64) -> Self {
        let mut h = Self::new(dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in &mut h.shift {
            *s = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        }
        h
    }

    /// Next point.
    pub fn next_point(&mut self) -> Vec<f64> {
        let i = self.index;
        self.index += 1;
        (0..self.dim)
            .map(|k| {
                let u = radical_inverse(i, PRIMES[k]) + self.shift[k];
                u - libm::floor(u)
            })
            .collect()
    }
}

/// `count` points of the closed ball `B(center, radius)`.
///
/// Halton points of the cube `[-1, 1]^n` are kept when they fall inside the
/// unit ball.
pub fn ball_points(center: &[f64], radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = center.len();
    let mut h = Halton::seeded(n, seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count && attempts < count.saturating_mul(256).max(1024) {
        attempts += 1;
        let u: Vec<f64> = h.next_point().into_iter().map(|v| 2.0 * v - 1.0).collect();
        if math::norm(&u) <= 1.0 {
            out.push(center.iter().zip(&u).map(|(c, v)| c + radius * v).collect());
        }
    }
    out
}

/// `count` unit vectors of `R^n`, spread by normalising Halton cube points.
pub fn sphere_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut h = Halton::seeded(n, seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u: Vec<f64> = h.next_point().into_iter().map(|v| 2.0 * v - 1.0).collect();
        let r = math::norm(&u);
        if r > 1e-3 && r <= 1.0 {
            out.push(u.into_iter().map(|v| v / r).collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(1, 3) - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn ball_points_stay_inside() {
        let c = [1.0, -2.0, 0.5];
        let pts = ball_points(&c, 0.3, 200, 9);
        assert_eq!(pts.len(), 200);
        for p in &pts {
            assert!(math::dist(p, &c) <= 0.3 + 1e-15);
        }
    }

    #[test]
    fn seeds_are_reproducible_and_distinct() {
        assert_eq!(
            ball_points(&[0.0, 0.0], 1.0, 10, 4),
            ball_points(&[0.0, 0.0], 1.0, 10, 4)
        );
        assert_ne!(
            ball_points(&[0.0, 0.0], 1.0, 10, 4),
            ball_points(&[0.0, 0.0], 1.0, 10, 5)
        );
    }

    #[test]
    fn directions_are_unit() {
        for d in sphere_directions(4, 16, 0) {
            assert!((math::norm(&d) - 1.0).abs() < 1e-14);
        }
        assert_eq!(sphere_directions(1, 16, 0).len(), 16);
    }
}
