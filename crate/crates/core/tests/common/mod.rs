#![allow(dead_code)]

use covkit_core::catalog::MappingSpec;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn pair_norm(z: &[f64], i: usize) -> f64 {
    (z[i] * z[i] + z[i + 1] * z[i + 1]).sqrt()
}

// Uniform in [-3, 3]^n, kept at least 0.3 away from the singular locus.
pub fn off_locus_point(spec: &MappingSpec, rng: &mut StdRng) -> Vec<f64> {
    loop {
        let z: Vec<f64> = (0..spec.n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let ok = match spec.name {
            "f5_1" | "ex6_1" | "ex6_10" | "ex6_11" => pair_norm(&z, 0) > 0.3,
            "g5_11" => pair_norm(&z, 0) > 0.3 && pair_norm(&z, 2) > 0.3,
            "h5_18" => z.iter().map(|v| v * v).sum::<f64>().sqrt() > 0.3,
            _ => true,
        };
        if ok {
            return z;
        }
    }
}

pub fn unit_vector(n: usize, rng: &mut StdRng) -> Vec<f64> {
    loop {
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > 1e-3 && r <= 1.0 {
            return y.iter().map(|v| v / r).collect();
        }
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
