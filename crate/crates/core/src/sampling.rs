//! Seeded sampling helpers shared by the stochastic verification routines.
//!
//! Every consumer derives its generator through [`rng_for`] so that trial
//! loops can be partitioned freely without changing the stream a given trial
//! sees.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A deterministic generator for `(seed, stream)`. Distinct streams are
/// independent, which lets per-trial work derive `rng_for(seed, trial)` and
/// stay reproducible under any execution order.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One standard normal draw via Box-Muller.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            let v: f64 = rng.gen();
            return (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos();
        }
    }
}

pub fn gaussian_vector<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| standard_normal(rng)).collect()
}

/// A uniformly distributed unit vector.
pub fn unit_vector<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v = gaussian_vector(n, rng);
        let norm = norm(&v);
        if norm > 1e-12 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt. Returns `None` when the input is numerically rank
/// deficient, so callers can redraw.
pub fn orthonormalize(vectors: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            let proj = dot(&w, b);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= proj * bi;
            }
        }
        let n = norm(&w);
        if n < 1e-10 {
            return None;
        }
        basis.push(w.into_iter().map(|x| x / n).collect());
    }
    Some(basis)
}

/// A random orthogonal matrix (rows form an orthonormal frame).
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    loop {
        let cand: Vec<Vec<f64>> = (0..n).map(|_| gaussian_vector(n, rng)).collect();
        if let Some(q) = orthonormalize(&cand) {
            return q;
        }
    }
}

/// Deterministic Fibonacci lattice on the 2-sphere.
pub fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_of_partition() {
        let mut a = rng_for(5, 3);
        let first: f64 = a.gen();
        let mut b = rng_for(5, 3);
        assert_eq!(first, b.gen::<f64>());
        let mut c = rng_for(5, 4);
        assert_ne!(first, c.gen::<f64>());
    }

    #[test]
    fn orthonormalize_produces_orthonormal_frame() {
        let mut rng = rng_for(11, 0);
        let q = random_orthogonal(4, &mut rng);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&q[i], &q[j]) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fibonacci_points_are_unit() {
        for p in fibonacci_sphere(257) {
            assert!((norm(&p) - 1.0).abs() < 1e-12);
        }
    }
}
