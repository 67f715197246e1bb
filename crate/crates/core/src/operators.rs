//! The weighted partial-trace operator family `M_a(X) = sum_i a_i lambda_i(X)`
//! together with its named special cases and ellipticity bookkeeping.
//!
//! With all weights nonnegative the operator is degenerate elliptic; it is
//! uniformly elliptic only when every weight is positive. The class-A
//! condition (`a_1 > 0` and `a_N > 0`) is the structural assumption the
//! regularity machinery relies on.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling;
use crate::spectral::{eigen_decompose, SymmetricMatrix};

/// Nonnegative eigenvalue weights `(a_1, ..., a_N)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("weight vector must be nonempty".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput(
                "weights must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { weights })
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        Self::new(vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn first(&self) -> f64 {
        self.weights[0]
    }

    pub fn last(&self) -> f64 {
        *self.weights.last().expect("nonempty")
    }

    /// `a_* = min(a_1, a_N)`.
    pub fn a_star(&self) -> f64 {
        self.first().min(self.last())
    }

    /// `|a|_1 = sum_i a_i` (entries are nonnegative).
    pub fn one_norm(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Class A membership: the extreme weights are both positive.
    pub fn is_class_a(&self) -> bool {
        self.first() > 0.0 && self.last() > 0.0
    }
}

/// Evaluates `M_a(X) = sum_i a_i lambda_i(X)` with ascending eigenvalues.
pub fn evaluate(a: &WeightVector, x: &SymmetricMatrix) -> Result<f64> {
    if a.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: x.dim(),
        });
    }
    let spectrum = eigen_decompose(x)?;
    Ok(a.weights
        .iter()
        .zip(spectrum.eigenvalues())
        .map(|(w, lambda)| w * lambda)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PucciKind {
    /// Sum of the k smallest eigenvalues.
    Minus,
    /// Sum of the k largest eigenvalues.
    Plus,
}

/// Weight vectors reproducing the extremal partial sums `P^-_k` and `P^+_k`.
pub fn pucci_weights(kind: PucciKind, k: usize, n: usize) -> Result<WeightVector> {
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "k = {k} out of range 1..={n}"
        )));
    }
    let mut weights = vec![0.0; n];
    let slots = match kind {
        PucciKind::Minus => 0..k,
        PucciKind::Plus => (n - k)..n,
    };
    for i in slots {
        weights[i] = 1.0;
    }
    WeightVector::new(weights)
}

/// Sampled min-max value of `min_|xi|=1 max_|eta|=1 (<X xi, xi> + <X eta, eta>)`.
///
/// The inner max does not depend on `xi`, so the sampled value is the sum of
/// the extreme Rayleigh quotients over the sample set and converges to
/// `lambda_1(X) + lambda_N(X)` as the set fills the sphere. For N = 3 the
/// directions come from a Fibonacci lattice; other dimensions draw seeded
/// uniform directions.
pub fn isaacs_minmax(x: &SymmetricMatrix, angular_samples: usize, seed: u64) -> Result<f64> {
    let n = x.dim();
    if angular_samples < n {
        return Err(Error::InvalidInput(format!(
            "need at least {n} angular samples, got {angular_samples}"
        )));
    }
    let mut min_q = f64::INFINITY;
    let mut max_q = f64::NEG_INFINITY;
    let mut absorb = |q: f64| {
        min_q = min_q.min(q);
        max_q = max_q.max(q);
    };
    if n == 3 {
        for p in sampling::fibonacci_sphere(angular_samples) {
            absorb(x.quadratic_form(&p));
        }
    } else {
        let mut rng = sampling::rng_for(seed, 0);
        for _ in 0..angular_samples {
            let xi = sampling::unit_vector(n, &mut rng);
            absorb(x.quadratic_form(&xi));
        }
    }
    Ok(min_q + max_q)
}

/// The Pucci-class constants `(a_*/N, |a|_1)` attached to a class-A weight
/// vector.
pub fn ellipticity_constants(a: &WeightVector) -> Result<(f64, f64)> {
    if !a.is_class_a() {
        return Err(Error::NotClassA);
    }
    Ok((a.a_star() / a.dim() as f64, a.one_norm()))
}

/// Outcome of a randomized degenerate-ellipticity (monotonicity) check.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub trials: usize,
    pub violations: usize,
    /// Smallest observed `M_a(Y) - M_a(X)` over pairs with `Y - X` PSD.
    pub worst_margin: f64,
    pub tolerance: f64,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

const MONOTONICITY_TOL: f64 = 1e-8;

/// Draws `trials` pairs `X, Y = X + P^T P` and checks
/// `M_a(X) <= M_a(Y) + 1e-8`.
pub fn degenerate_ellipticity_check(
    a: &WeightVector,
    trials: usize,
    seed: u64,
) -> Result<MonotonicityReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be >= 1".into()));
    }
    let n = a.dim();
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for trial in 0..trials {
        let mut rng = sampling::rng_for(seed, trial as u64);
        let x = random_symmetric(n, &mut rng);
        let p: Vec<Vec<f64>> = (0..n).map(|_| sampling::gaussian_vector(n, &mut rng)).collect();
        let y = x.add(&SymmetricMatrix::gram(&p)?)?;
        let margin = evaluate(a, &y)? - evaluate(a, &x)?;
        worst = worst.min(margin);
        if margin < -MONOTONICITY_TOL {
            violations += 1;
        }
    }
    Ok(MonotonicityReport {
        trials,
        violations,
        worst_margin: worst,
        tolerance: MONOTONICITY_TOL,
    })
}

pub fn random_symmetric<R: Rng>(n: usize, rng: &mut R) -> SymmetricMatrix {
    let entries: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SymmetricMatrix::new(n, entries).expect("finite entries")
}

/// First-order term `H(p)` of the equation, together with a certified growth
/// constant `C_H` for the bound `|H(p+q) - H(p)| <= C_H (1 + |p| + |q|) |q|`.
#[derive(Clone)]
pub enum Hamiltonian {
    Zero,
    /// `H(p) = quad * |p|^2 + coef * |p|^tau` with `tau` in `[0, 2]`.
    PowerLaw { quad: f64, coef: f64, tau: f64 },
    Custom {
        f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        c_h: f64,
    },
}

impl Hamiltonian {
    pub fn power_law(quad: f64, coef: f64, tau: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&tau) || !quad.is_finite() || !coef.is_finite() {
            return Err(Error::InvalidParams(
                "power law needs finite coefficients and tau in [0, 2]".into(),
            ));
        }
        Ok(Self::PowerLaw { quad, coef, tau })
    }

    pub fn custom(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, c_h: f64) -> Result<Self> {
        if !(c_h >= 0.0) {
            return Err(Error::InvalidParams("c_h must be nonnegative".into()));
        }
        Ok(Self::Custom { f: Arc::new(f), c_h })
    }

    #[inline]
    pub fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::PowerLaw { quad, coef, tau } => {
                let norm = sampling::norm(p);
                quad * norm * norm + coef * norm.powf(*tau)
            }
            Self::Custom { f, .. } => f(p),
        }
    }

    /// A constant making the quadratic growth bound hold; overestimates are
    /// fine, the property tests certify the stored value.
    pub fn c_h(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::PowerLaw { quad, coef, tau } => {
                2.0 * quad.abs() + coef.abs() * tau.max(1.0) + coef.abs()
            }
            Self::Custom { c_h, .. } => *c_h,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Hamiltonian::Zero"),
            Self::PowerLaw { quad, coef, tau } => {
                write!(f, "Hamiltonian::PowerLaw({quad} |p|^2 + {coef} |p|^{tau})")
            }
            Self::Custom { c_h, .. } => write!(f, "Hamiltonian::Custom(c_h = {c_h})"),
        }
    }
}
