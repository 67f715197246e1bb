//! The explicit Holder exponent, the constant ledger feeding the barrier, and
//! numerical instances of the matrix inequalities behind the comparison
//! argument.
//!
//! The exponent attached to a class-A weight vector is
//!
//! ```text
//!     beta(a1, aN) = 1 - (a1 + aN) / (sqrt(a1) + sqrt(aN))^2
//!                  = 2 sqrt(a1 aN) / (sqrt(a1) + sqrt(aN))^2,
//! ```
//!
//! always in `(0, 1/2]` with the maximum exactly at `a1 == aN`.

use serde::Serialize;

use crate::barrier::BarrierParams;
use crate::error::{Error, Result};
use crate::operators::WeightVector;
use crate::sampling;
use crate::spectral::{eigen_decompose, SymmetricMatrix};

/// Explicit lower bound for the Holder exponent of solutions.
pub fn beta(a1: f64, a_n: f64) -> Result<f64> {
    if !(a1 > 0.0 && a_n > 0.0) || !a1.is_finite() || !a_n.is_finite() {
        return Err(Error::InvalidInput(format!(
            "beta needs positive extreme weights, got ({a1}, {a_n})"
        )));
    }
    let s = a1.sqrt() + a_n.sqrt();
    Ok(1.0 - (a1 + a_n) / (s * s))
}

/// Everything the constant ledger depends on: the weights, the gradient
/// growth constant and the sup norms of the solution and right-hand side on
/// the larger subdomain, plus the localization radius.
#[derive(Debug, Clone, Serialize)]
pub struct ProblemData {
    weights: WeightVector,
    c_h: f64,
    u_sup: f64,
    f_sup: f64,
    delta: f64,
}

impl ProblemData {
    pub fn new(
        weights: WeightVector,
        c_h: f64,
        u_sup: f64,
        f_sup: f64,
        delta: f64,
    ) -> Result<Self> {
        if !weights.is_class_a() {
            return Err(Error::NotClassA);
        }
        let finite = [c_h, u_sup, f_sup, delta].iter().all(|v| v.is_finite());
        if !finite || c_h < 0.0 || u_sup < 0.0 || f_sup < 0.0 || delta <= 0.0 {
            return Err(Error::InvalidInput(
                "need c_h, u_sup, f_sup >= 0 and delta > 0, all finite".into(),
            ));
        }
        Ok(Self {
            weights,
            c_h,
            u_sup,
            f_sup,
            delta,
        })
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn a1(&self) -> f64 {
        self.weights.first()
    }

    pub fn a_n(&self) -> f64 {
        self.weights.last()
    }

    pub fn c_h(&self) -> f64 {
        self.c_h
    }

    pub fn u_sup(&self) -> f64 {
        self.u_sup
    }

    pub fn f_sup(&self) -> f64 {
        self.f_sup
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn beta(&self) -> f64 {
        beta(self.a1(), self.a_n()).expect("class A guarantees positive extremes")
    }
}

/// The four constants of the comparison construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremConstants {
    /// Localization weight in front of `|x - z|^2`.
    #[serde(rename = "L")]
    pub l: f64,
    /// Required barrier mass at radius `delta`.
    #[serde(rename = "D")]
    pub d: f64,
    /// Barrier forcing constant.
    #[serde(rename = "C")]
    pub c: f64,
    /// Barrier drift coefficient.
    #[serde(rename = "B")]
    pub b: f64,
}

/// Evaluates the constant ledger:
///
/// ```text
///     L = 2 u_sup / delta^2
///     D = 2 u_sup
///     C = 2 (L (|a|_1 + C_H delta (1 + 2 L delta)) + f_sup + 1) / (sqrt(a1) + sqrt(aN))^2
///     B = 2 L delta C_H / (sqrt(a1) + sqrt(aN))^2
/// ```
pub fn theorem_constants(data: &ProblemData) -> TheoremConstants {
    let l = 2.0 * data.u_sup / (data.delta * data.delta);
    let d = 2.0 * data.u_sup;
    let s = data.a1().sqrt() + data.a_n().sqrt();
    let denom = s * s;
    let c = 2.0
        * (l * (data.weights.one_norm() + data.c_h * data.delta * (1.0 + 2.0 * l * data.delta))
            + data.f_sup
            + 1.0)
        / denom;
    let b = 2.0 * l * data.delta * data.c_h / denom;
    TheoremConstants { l, d, c, b }
}

/// Barrier coefficients induced by the ledger; the exponent coefficient is
/// `1 - beta`.
pub fn barrier_params_for(data: &ProblemData) -> Result<BarrierParams> {
    let tc = theorem_constants(data);
    let a = 1.0 - data.beta();
    BarrierParams::new(a, tc.b, tc.c, tc.d, data.delta)
}

/// Computable surrogate for the constant in the final seminorm estimate,
/// which has no closed form: the growth-envelope coefficient `K / (1 - a)`
/// of the induced barrier, the explicit bound the comparison construction
/// yields for increments `|u(x) - u(y)| <= surrogate * |x - y|^beta` at
/// separations up to `delta`. An upper proxy, not the sharp constant.
pub fn seminorm_bound_surrogate(data: &ProblemData) -> Result<f64> {
    let params = barrier_params_for(data)?;
    let barrier = crate::barrier::build(params)?;
    Ok(barrier.normalization() / (1.0 - params.a))
}

/// Predicted spectrum of the rank-one perturbation matrix: one `radial`
/// eigenvalue along the anchor direction and `transverse` with multiplicity
/// `dim - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaPrediction {
    pub radial: f64,
    pub transverse: f64,
    pub dim: usize,
}

impl ThetaPrediction {
    /// The radial eigenvalue sits at the bottom of the spectrum.
    pub fn is_ordered(&self) -> bool {
        self.radial < self.transverse
    }

    pub fn eigenvalues_ascending(&self) -> Vec<f64> {
        let mut v = vec![self.transverse; self.dim];
        if self.radial <= self.transverse {
            v[0] = self.radial;
        } else {
            v[self.dim - 1] = self.radial;
        }
        v
    }
}

/// Builds `Theta = mr * P + mt * (I - P)` with `P = e (x) e`,
/// `mr = phi''(1 + 2 eps phi'')` and `mt = (phi'/r)(1 + 2 eps phi'/r)`,
/// returning the matrix together with its predicted spectrum.
pub fn build_theta(
    phi_prime: f64,
    phi_double_prime: f64,
    r: f64,
    eps: f64,
    anchor: &[f64],
) -> Result<(SymmetricMatrix, ThetaPrediction)> {
    if !(r > 0.0) || !(eps >= 0.0) || !phi_prime.is_finite() || !phi_double_prime.is_finite() {
        return Err(Error::InvalidInput(
            "need r > 0, eps >= 0 and finite derivative samples".into(),
        ));
    }
    let n = anchor.len();
    if n == 0 {
        return Err(Error::InvalidInput("anchor vector must be nonempty".into()));
    }
    let norm = sampling::norm(anchor);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "anchor must be a unit vector, |e| = {norm}"
        )));
    }
    let radial = phi_double_prime * (1.0 + 2.0 * eps * phi_double_prime);
    let slope_ratio = phi_prime / r;
    let transverse = slope_ratio * (1.0 + 2.0 * eps * slope_ratio);

    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let p = anchor[i] * anchor[j];
            let id = if i == j { 1.0 } else { 0.0 };
            entries[i * n + j] = radial * p + transverse * (id - p);
        }
    }
    Ok((
        SymmetricMatrix::new(n, entries)?,
        ThetaPrediction {
            radial,
            transverse,
            dim: n,
        },
    ))
}

/// Largest `eps` below which the radial eigenvalue stays simple at the bottom
/// of the spectrum, given `phi'' < 0 < phi'/r`. `None` means every
/// nonnegative `eps` preserves the ordering.
pub fn theta_ordering_eps_bound(phi_double_prime: f64, slope_ratio: f64) -> Option<f64> {
    let sum = phi_double_prime + slope_ratio;
    if sum < 0.0 {
        Some(-1.0 / (2.0 * sum))
    } else {
        None
    }
}

/// Outcome of the randomized predicted-vs-computed spectrum comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaSweepReport {
    pub draws: usize,
    pub checked: usize,
    /// Draws rejected because the sampled `eps` broke the eigenvalue order.
    pub skipped: usize,
    pub max_abs_error: f64,
    pub tolerance: f64,
}

impl ThetaSweepReport {
    pub fn passed(&self) -> bool {
        self.max_abs_error <= self.tolerance
    }
}

const THETA_SPECTRUM_TOL: f64 = 1e-10;

/// Draws random `(phi', phi'', r, eps, e)` tuples with `phi' > 0 > phi''`,
/// skips draws where `eps` exceeds the exact ordering bound, and compares the
/// predicted spectrum against the eigensolver.
pub fn theta_spectrum_sweep(draws: usize, seed: u64) -> Result<ThetaSweepReport> {
    use rand::Rng;
    if draws == 0 {
        return Err(Error::InvalidInput("draws must be >= 1".into()));
    }
    let mut checked = 0;
    let mut skipped = 0;
    let mut max_err = 0.0f64;
    for trial in 0..draws {
        let mut rng = sampling::rng_for(seed, trial as u64);
        let n = rng.gen_range(2..=5usize);
        let phi_p = rng.gen_range(0.1..2.0);
        let phi_pp = -rng.gen_range(0.05..2.0);
        let r = rng.gen_range(0.25..2.0);
        let eps = rng.gen_range(0.0..0.3);
        let bound = theta_ordering_eps_bound(phi_pp, phi_p / r);
        if let Some(b) = bound {
            if eps >= b {
                skipped += 1;
                continue;
            }
        }
        let e = sampling::unit_vector(n, &mut rng);
        let (theta, prediction) = build_theta(phi_p, phi_pp, r, eps, &e)?;
        let computed = eigen_decompose(&theta)?;
        for (got, want) in computed
            .eigenvalues()
            .iter()
            .zip(prediction.eigenvalues_ascending())
        {
            max_err = max_err.max((got - want).abs());
        }
        checked += 1;
    }
    Ok(ThetaSweepReport {
        draws,
        checked,
        skipped,
        max_abs_error: max_err,
        tolerance: THETA_SPECTRUM_TOL,
    })
}

/// Randomized check of the three scalar consequences of the block inequality
/// `diag(X, -Y) <= [[Theta, -Theta], [-Theta, Theta]]`:
///
/// 1. `a1 l1(X) - aN lN(Y) <= (sqrt(a1) + sqrt(aN))^2 <Theta e, e>`
/// 2. `aN lN(X) <= aN lN(Theta)`
/// 3. `-a1 l1(Y) <= a1 lN(Theta)`
#[derive(Debug, Clone, Serialize)]
pub struct DoublingReport {
    pub trials: usize,
    pub completed: usize,
    /// Candidates discarded before the block inequality held.
    pub rejected_candidates: usize,
    /// Trials that exhausted the retry budget without an admissible pair.
    pub generation_failures: usize,
    pub violations: usize,
    /// Smallest observed slack `rhs - lhs` per inequality.
    pub worst_aligned_margin: f64,
    pub worst_x_top_margin: f64,
    pub worst_y_bottom_margin: f64,
    pub tolerance: f64,
}

impl DoublingReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.completed > 0
    }
}

const DOUBLING_TOL: f64 = 1e-8;
const DOUBLING_RETRIES: usize = 60;

fn block_gap(theta: &SymmetricMatrix, gx: &SymmetricMatrix, gy: &SymmetricMatrix) -> SymmetricMatrix {
    let n = theta.dim();
    let mut entries = vec![0.0; 4 * n * n];
    let dim = 2 * n;
    for i in 0..n {
        for j in 0..n {
            entries[i * dim + j] = gx.get(i, j);
            entries[(i + n) * dim + (j + n)] = gy.get(i, j);
            entries[i * dim + (j + n)] = -theta.get(i, j);
            entries[(i + n) * dim + j] = -theta.get(i, j);
        }
    }
    SymmetricMatrix::new(dim, entries).expect("finite block")
}

/// Generates admissible pairs `X = Theta - s G1^T G1`, `Y = -Theta + s G2^T G2`
/// with the block inequality verified explicitly, then re-checks the three
/// consequences numerically.
pub fn verify_doubling_inequalities(
    theta: &SymmetricMatrix,
    a1: f64,
    a_n: f64,
    anchor: &[f64],
    trials: usize,
    seed: u64,
) -> Result<DoublingReport> {
    use rand::Rng;
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be >= 1".into()));
    }
    if !(a1 > 0.0 && a_n > 0.0) {
        return Err(Error::InvalidInput("extreme weights must be positive".into()));
    }
    let n = theta.dim();
    if anchor.len() != n {
        return Err(Error::DimensionMismatch {
            left: anchor.len(),
            right: n,
        });
    }
    if (sampling::norm(anchor) - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput("anchor must be a unit vector".into()));
    }

    let theta_spectrum = eigen_decompose(theta)?;
    let theta_norm = theta_spectrum
        .lambda_max()
        .abs()
        .max(theta_spectrum.lambda_min().abs());
    let theta_top = theta_spectrum.lambda_max();
    let sqrt_sum = a1.sqrt() + a_n.sqrt();
    let aligned_rhs_coeff = sqrt_sum * sqrt_sum;
    let theta_anchor = theta.quadratic_form(anchor);

    let mut completed = 0;
    let mut rejected = 0;
    let mut failures = 0;
    let mut violations = 0;
    let mut worst_aligned = f64::INFINITY;
    let mut worst_x_top = f64::INFINITY;
    let mut worst_y_bottom = f64::INFINITY;

    for trial in 0..trials {
        let mut rng = sampling::rng_for(seed, trial as u64);
        let mut found = false;
        for attempt in 0..DOUBLING_RETRIES {
            let g1: Vec<Vec<f64>> = (0..n).map(|_| sampling::gaussian_vector(n, &mut rng)).collect();
            let g2: Vec<Vec<f64>> = (0..n).map(|_| sampling::gaussian_vector(n, &mut rng)).collect();
            let gram1 = SymmetricMatrix::gram(&g1)?;
            let gram2 = SymmetricMatrix::gram(&g2)?;
            let lmin = eigen_decompose(&gram1)?
                .lambda_min()
                .min(eigen_decompose(&gram2)?.lambda_min());
            if lmin < 1e-4 {
                rejected += 1;
                continue;
            }
            // Scale so the sufficient bound s * lmin >= ||Theta||_2 is close to
            // tight at first, escalating on rejection.
            let slack: f64 = rng.gen_range(0.9..1.3) + 0.5 * attempt as f64;
            let s = slack * theta_norm.max(1e-12) / lmin;
            let sg1 = gram1.scaled(s);
            let sg2 = gram2.scaled(s);
            let gap = block_gap(theta, &sg1, &sg2);
            let gap_min = eigen_decompose(&gap)?.lambda_min();
            if gap_min < -1e-9 * (1.0 + gap.max_abs()) {
                rejected += 1;
                continue;
            }

            let x = theta.sub(&sg1)?;
            let y = theta.scaled(-1.0).add(&sg2)?;
            let xs = eigen_decompose(&x)?;
            let ys = eigen_decompose(&y)?;

            let aligned = aligned_rhs_coeff * theta_anchor
                - (a1 * xs.lambda_min() - a_n * ys.lambda_max());
            let x_top = a_n * theta_top - a_n * xs.lambda_max();
            let y_bottom = a1 * theta_top - (-a1 * ys.lambda_min());

            worst_aligned = worst_aligned.min(aligned);
            worst_x_top = worst_x_top.min(x_top);
            worst_y_bottom = worst_y_bottom.min(y_bottom);
            let scale_tol = DOUBLING_TOL * (1.0 + theta_norm + s);
            if aligned < -scale_tol || x_top < -scale_tol || y_bottom < -scale_tol {
                violations += 1;
            }
            completed += 1;
            found = true;
            break;
        }
        if !found {
            failures += 1;
        }
    }

    Ok(DoublingReport {
        trials,
        completed,
        rejected_candidates: rejected,
        generation_failures: failures,
        violations,
        worst_aligned_margin: worst_aligned,
        worst_x_top_margin: worst_x_top,
        worst_y_bottom_margin: worst_y_bottom,
        tolerance: DOUBLING_TOL,
    })
}
