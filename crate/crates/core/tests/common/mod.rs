//! Shared oracles for the integration suites. Everything here is kept
//! independent of the library's own eigensolver so the comparisons mean
//! something.
#![allow(dead_code)] // each test binary uses its own subset

use eigentrace::spectral::SymmetricMatrix;
use rand::Rng;

/// Analytic eigenvalues for dimensions 1 to 3, ascending. Uses the quadratic
/// formula at N = 2 and the trigonometric form of the characteristic cubic at
/// N = 3.
pub fn charpoly_eigenvalues(m: &SymmetricMatrix) -> Vec<f64> {
    match m.dim() {
        1 => vec![m.get(0, 0)],
        2 => {
            let a = m.get(0, 0);
            let d = m.get(1, 1);
            let b = m.get(0, 1);
            let mid = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            vec![mid - rad, mid + rad]
        }
        3 => {
            let p1 = m.get(0, 1).powi(2) + m.get(0, 2).powi(2) + m.get(1, 2).powi(2);
            if p1 == 0.0 {
                let mut d = vec![m.get(0, 0), m.get(1, 1), m.get(2, 2)];
                d.sort_by(|a, b| a.partial_cmp(b).unwrap());
                return d;
            }
            let q = m.trace() / 3.0;
            let p2 = (m.get(0, 0) - q).powi(2)
                + (m.get(1, 1) - q).powi(2)
                + (m.get(2, 2) - q).powi(2)
                + 2.0 * p1;
            let p = (p2 / 6.0).sqrt();
            let b = |i: usize, j: usize| {
                let shift = if i == j { q } else { 0.0 };
                (m.get(i, j) - shift) / p
            };
            let det_b = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
                - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
                + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
            let r = (det_b / 2.0).clamp(-1.0, 1.0);
            let phi = r.acos() / 3.0;
            let largest = q + 2.0 * p * phi.cos();
            let smallest = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
            let middle = 3.0 * q - largest - smallest;
            vec![smallest, middle, largest]
        }
        n => panic!("charpoly oracle only covers N <= 3, got {n}"),
    }
}

pub fn random_symmetric_uniform<R: Rng>(n: usize, rng: &mut R, scale: f64) -> SymmetricMatrix {
    let entries: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-scale..scale)).collect();
    SymmetricMatrix::new(n, entries).expect("finite entries")
}

/// Eigenvalues of a 2x2 symmetric matrix, ascending, by the quadratic
/// formula. Used as the continuum-operator oracle in the grid tests.
pub fn eigenvalues_2x2(h11: f64, h12: f64, h22: f64) -> (f64, f64) {
    let mid = 0.5 * (h11 + h22);
    let rad = (0.25 * (h11 - h22) * (h11 - h22) + h12 * h12).sqrt();
    (mid - rad, mid + rad)
}
