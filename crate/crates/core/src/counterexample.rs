//! The logarithmic profile `f(t) = 1 / (2 - log|t|)` (with `f(0) = 0`),
//! extended to `u(x) = f(x_1)`: continuous, concave off the hyperplane
//! `x_1 = 0`, annihilated by every middle-weight operator away from that
//! plane, yet outside every Holder class at the origin. The routines here
//! make each of those statements checkable at desk scale.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{evaluate, WeightVector};
use crate::sampling;
use crate::spectral::{eigen_decompose, SymmetricMatrix};

fn check_domain(t: f64) -> Result<()> {
    if !t.is_finite() || t.abs() >= 1.0 {
        return Err(Error::Domain(format!("|t| must be < 1, got {t}")));
    }
    Ok(())
}

/// `f(t) = 1 / (2 - log|t|)` for `t != 0`, `f(0) = 0`.
pub fn f_value(t: f64) -> Result<f64> {
    check_domain(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (2.0 - t.abs().ln()))
}

/// `f''(t) = log|t| / (t^2 (2 - log|t|)^3)`, negative on `(-1, 1) \ {0}`.
///
/// Derivation from `g(t) = 2 - log|t|`: `f' = 1 / (t g^2)` and
/// `f'' = (2 - g) / (t^2 g^3) = log|t| / (t^2 g^3)`.
pub fn f_second(t: f64) -> Result<f64> {
    check_domain(t)?;
    if t == 0.0 {
        return Err(Error::Domain("f'' is undefined at t = 0".into()));
    }
    let log_abs = t.abs().ln();
    let g = 2.0 - log_abs;
    Ok(log_abs / (t * t * g * g * g))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcavityReport {
    pub points_checked: usize,
    pub violations: usize,
    /// Largest sampled `f''`; concavity means this stays negative.
    pub max_second_derivative: f64,
    /// Largest observed even-symmetry defect `|f''(t) - f''(-t)|`.
    pub symmetry_defect: f64,
}

impl ConcavityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Samples `f''` at log-spaced points of `(0, 1)` and their negatives.
pub fn concavity_check(samples: usize) -> Result<ConcavityReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be >= 1".into()));
    }
    let lo: f64 = 1e-12;
    let hi: f64 = 1.0 - 1e-6;
    let mut violations = 0;
    let mut max_second = f64::NEG_INFINITY;
    let mut symmetry = 0.0f64;
    for k in 0..samples {
        let t = if samples == 1 {
            hi
        } else {
            let frac = k as f64 / (samples - 1) as f64;
            lo * (hi / lo).powf(frac)
        };
        let plus = f_second(t)?;
        let minus = f_second(-t)?;
        symmetry = symmetry.max((plus - minus).abs());
        for v in [plus, minus] {
            max_second = max_second.max(v);
            if v >= 0.0 {
                violations += 1;
            }
        }
    }
    Ok(ConcavityReport {
        points_checked: 2 * samples,
        violations,
        max_second_derivative: max_second,
        symmetry_defect: symmetry,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlowupRow {
    pub alpha: f64,
    pub k: usize,
    pub t: f64,
    /// `f(t_k) / t_k^alpha`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupAlphaSummary {
    pub alpha: f64,
    /// Smallest index from which the ratio increases strictly through the
    /// end of the table, if any.
    pub increasing_from: Option<usize>,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupTable {
    pub rows: Vec<BlowupRow>,
    pub summaries: Vec<BlowupAlphaSummary>,
}

/// Tabulates the Holder quotient `f(t_k) / t_k^alpha` at `t_k = 10^{-k}`.
/// The quotient eventually grows without bound for every positive `alpha`,
/// which is exactly the failure of Holder continuity at the origin.
pub fn holder_blowup(alphas: &[f64], k_max: usize) -> Result<BlowupTable> {
    if alphas.is_empty() {
        return Err(Error::InvalidInput("need at least one alpha".into()));
    }
    if k_max < 2 {
        return Err(Error::InvalidInput("k_max must be >= 2".into()));
    }
    for &alpha in alphas {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
    }
    let mut rows = Vec::with_capacity(alphas.len() * k_max);
    let mut summaries = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let mut ratios = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            let t = 10f64.powi(-(k as i32));
            let ratio = f_value(t)? / t.powf(alpha);
            ratios.push(ratio);
            rows.push(BlowupRow { alpha, k, t, ratio });
        }
        // Last k whose successor does not increase; strict growth afterwards.
        let mut increasing_from = Some(1);
        for k in (1..k_max).rev() {
            if ratios[k] <= ratios[k - 1] {
                increasing_from = if k + 1 <= k_max - 1 || k + 1 == k_max {
                    Some(k + 1)
                } else {
                    None
                };
                break;
            }
        }
        // A table that never increases at the end carries no witness.
        if k_max >= 2 && ratios[k_max - 1] <= ratios[k_max - 2] {
            increasing_from = None;
        }
        let max_ratio = ratios.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
        summaries.push(BlowupAlphaSummary {
            alpha,
            increasing_from,
            max_ratio,
        });
    }
    Ok(BlowupTable { rows, summaries })
}

/// Low-discrepancy points in the unit ball via a Kronecker sequence on the
/// enclosing cube with rejection. Deterministic for a given count.
fn unit_ball_lattice(dim: usize, count: usize) -> Vec<Vec<f64>> {
    // Generalized golden ratio: the positive root of x^(d+1) = x + 1.
    let mut g = 1.5f64;
    for _ in 0..64 {
        g = (1.0 + g).powf(1.0 / (dim as f64 + 1.0));
    }
    let alphas: Vec<f64> = (1..=dim).map(|i| (1.0 / g.powi(i as i32)).fract()).collect();
    let mut state = vec![0.5f64; dim];
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        for (s, a) in state.iter_mut().zip(&alphas) {
            *s = (*s + a).fract();
        }
        let w: Vec<f64> = state.iter().map(|s| 2.0 * s - 1.0).collect();
        if sampling::norm(&w) <= 1.0 {
            points.push(w);
        }
    }
    points
}

const TOUCH_BALL_RADIUS: f64 = 0.05;
const TOUCH_SAMPLES: usize = 10_000;
const TOUCH_RETRIES: usize = 80;
const MIDDLE_EIGENVALUE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct SupersolutionReport {
    pub trials: usize,
    pub accepted: usize,
    pub rejected_candidates: usize,
    pub violations: usize,
    /// No candidate quadratic passed the touching test anywhere.
    pub inconclusive: bool,
    /// Largest `lambda_{N-1}` over accepted Hessians (must stay <= tol).
    pub worst_middle_eigenvalue: f64,
    /// Largest maximal Rayleigh quotient of the Hessian restricted to the
    /// plane `{(0, v)}`; reported alongside, not asserted against.
    pub worst_restricted_rayleigh: f64,
    pub tolerance: f64,
}

impl SupersolutionReport {
    pub fn passed(&self) -> bool {
        !self.inconclusive && self.violations == 0
    }
}

/// Rejection-samples quadratics `q(x) = c + p . x + x^T M x / 2` touching
/// `u(x) = f(x_1)` from below at points `x0 = (0, x0')` (touching verified on
/// a sampled ball of radius 0.05), then checks `lambda_{N-1}(M) <= tol` for
/// every accepted candidate, recording the plane-restricted Rayleigh bound
/// next to it.
pub fn supersolution_spotcheck(trials: usize, seed: u64, dim: usize) -> Result<SupersolutionReport> {
    if dim < 3 {
        return Err(Error::InvalidInput("dimension must be >= 3".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be >= 1".into()));
    }

    let offsets = unit_ball_lattice(dim, TOUCH_SAMPLES);
    // u depends on x_1 alone, so its sampled values are shared by all trials.
    let u_samples: Vec<f64> = offsets
        .iter()
        .map(|w| f_value(TOUCH_BALL_RADIUS * w[0]).expect("inside the domain"))
        .collect();

    let mut accepted = 0;
    let mut rejected = 0;
    let mut violations = 0;
    let mut worst_middle = f64::NEG_INFINITY;
    let mut worst_restricted = f64::NEG_INFINITY;

    for trial in 0..trials {
        let mut rng = sampling::rng_for(seed, trial as u64);
        // Touching point on the plane, kept well inside the unit ball.
        let dir = sampling::unit_vector(dim - 1, &mut rng);
        let radius = 0.3 * rng.gen::<f64>().powf(1.0 / (dim as f64 - 1.0));
        let mut x0 = vec![0.0; dim];
        for (slot, d) in x0[1..].iter_mut().zip(&dir) {
            *slot = radius * d;
        }

        for _ in 0..TOUCH_RETRIES {
            // Symmetric candidate Hessian whose plane block is made strictly
            // negative definite; the x_1 couplings stay free.
            let mut entries = vec![0.0; dim * dim];
            for i in 0..dim {
                for j in 0..=i {
                    let v = 0.5 * sampling::standard_normal(&mut rng);
                    entries[i * dim + j] = v;
                    entries[j * dim + i] = v;
                }
            }
            let raw = SymmetricMatrix::new(dim, entries)?;
            let plane_block = |m: &SymmetricMatrix| -> Result<SymmetricMatrix> {
                let mut b = vec![0.0; (dim - 1) * (dim - 1)];
                for i in 1..dim {
                    for j in 1..dim {
                        b[(i - 1) * (dim - 1) + (j - 1)] = m.get(i, j);
                    }
                }
                SymmetricMatrix::new(dim - 1, b)
            };
            let raw_plane_top = eigen_decompose(&plane_block(&raw)?)?.lambda_max();
            let shift = raw_plane_top + rng.gen_range(0.2..1.0);
            let mut m_entries = raw.entries().to_vec();
            for i in 1..dim {
                m_entries[i * dim + i] -= shift;
            }
            let hessian = SymmetricMatrix::new(dim, m_entries)?;

            // Stationarity along the plane forces the plane gradient of q to
            // vanish at x0; the x_1 slope stays free because u is steep there.
            let mx0 = hessian.mul_vec(&x0);
            let mut p = vec![0.0; dim];
            p[0] = sampling::standard_normal(&mut rng);
            for i in 1..dim {
                p[i] = -mx0[i];
            }
            let c = -sampling::dot(&p, &x0)
                - 0.5 * hessian.quadratic_form(&x0);

            let touches = offsets.iter().zip(&u_samples).all(|(w, u_val)| {
                let mut q = c;
                let mut xs = Vec::with_capacity(dim);
                for (k, wk) in w.iter().enumerate() {
                    xs.push(x0[k] + TOUCH_BALL_RADIUS * wk);
                }
                q += sampling::dot(&p, &xs);
                q += 0.5 * hessian.quadratic_form(&xs);
                q <= u_val + 1e-12
            });
            if !touches {
                rejected += 1;
                continue;
            }

            accepted += 1;
            let spectrum = eigen_decompose(&hessian)?;
            let middle = spectrum.eigenvalues()[dim - 2];
            worst_middle = worst_middle.max(middle);
            if middle > MIDDLE_EIGENVALUE_TOL {
                violations += 1;
            }
            let restricted = eigen_decompose(&plane_block(&hessian)?)?.lambda_max();
            worst_restricted = worst_restricted.max(restricted);
            break;
        }
    }

    Ok(SupersolutionReport {
        trials,
        accepted,
        rejected_candidates: rejected,
        violations,
        inconclusive: accepted == 0,
        worst_middle_eigenvalue: worst_middle,
        worst_restricted_rayleigh: worst_restricted,
        tolerance: MIDDLE_EIGENVALUE_TOL,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OffPlaneReport {
    pub samples: usize,
    pub violations: usize,
    pub max_abs_value: f64,
    pub tolerance: f64,
}

impl OffPlaneReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

const OFF_PLANE_TOL: f64 = 1e-9;

/// Away from the plane `x_1 = 0` the Hessian of `u` is
/// `diag(f''(x_1), 0, ..., 0)` with `f'' < 0`, so any weight vector with
/// vanishing extremes annihilates it. Samples random `x_1 != 0` and checks
/// the operator value is numerically zero.
pub fn viscosity_residual_away_from_plane(
    a: &WeightVector,
    samples: usize,
    seed: u64,
) -> Result<OffPlaneReport> {
    if a.dim() < 3 {
        return Err(Error::InvalidInput("need dimension >= 3".into()));
    }
    if a.first() != 0.0 || a.last() != 0.0 {
        return Err(Error::InvalidInput(
            "extreme weights must vanish exactly".into(),
        ));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be >= 1".into()));
    }
    let mut rng = sampling::rng_for(seed, 0);
    let mut violations = 0;
    let mut max_abs = 0.0f64;
    for _ in 0..samples {
        let x1 = loop {
            let t: f64 = rng.gen_range(-1.0..1.0);
            if t.abs() >= 1e-6 {
                break t;
            }
        };
        let mut diag = vec![0.0; a.dim()];
        diag[0] = f_second(x1)?;
        let hessian = SymmetricMatrix::from_diagonal(&diag)?;
        let value = evaluate(a, &hessian)?;
        max_abs = max_abs.max(value.abs());
        if value.abs() > OFF_PLANE_TOL {
            violations += 1;
        }
    }
    Ok(OffPlaneReport {
        samples,
        violations,
        max_abs_value: max_abs,
        tolerance: OFF_PLANE_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_pinned_values() {
        assert_eq!(f_value(0.0).unwrap(), 0.0);
        let t = (-2.0f64).exp();
        assert!((f_value(t).unwrap() - 0.25).abs() <= 1e-15);
        assert!(f_value(1.0).is_err());
        assert!(f_value(-1.2).is_err());
    }

    #[test]
    fn f_is_even_and_increasing_in_abs() {
        let mut prev = 0.0;
        for k in 1..=40 {
            let t = k as f64 / 41.0;
            let v = f_value(t).unwrap();
            assert_eq!(v, f_value(-t).unwrap());
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn f_second_closed_form_example() {
        let t = (-1.0f64).exp();
        let got = f_second(t).unwrap();
        let exact = -std::f64::consts::E * std::f64::consts::E / 27.0;
        assert!((got - exact).abs() <= 1e-12, "got {got}, want {exact}");
        assert!((got + 0.2737).abs() <= 1e-3);
    }

    #[test]
    fn f_second_matches_central_difference() {
        for &t in &[1e-5, 1e-3, 0.05, 0.3, 0.9] {
            let h = t * 1e-5;
            let fd = (f_value(t + h).unwrap() - 2.0 * f_value(t).unwrap()
                + f_value(t - h).unwrap())
                / (h * h);
            let closed = f_second(t).unwrap();
            assert!(
                (fd - closed).abs() <= 1e-4 * closed.abs().max(1e-4),
                "t = {t}: fd {fd} vs closed {closed}"
            );
        }
    }

    #[test]
    fn f_second_domain_errors() {
        assert!(f_second(0.0).is_err());
        assert!(f_second(1.0).is_err());
    }

    #[test]
    fn concavity_holds_on_sample_grid() {
        let report = concavity_check(500).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.max_second_derivative < 0.0);
        assert!(report.symmetry_defect <= 1e-12);
    }

    #[test]
    fn blowup_ratios_increase_for_alpha_one() {
        let table = holder_blowup(&[1.0], 6).unwrap();
        let rows: Vec<f64> = table.rows.iter().map(|r| r.ratio).collect();
        for w in rows.windows(2) {
            assert!(w[1] > w[0], "{rows:?}");
        }
        assert_eq!(table.summaries[0].increasing_from, Some(1));
    }

    #[test]
    fn blowup_small_alpha_eventually_increases() {
        let table = holder_blowup(&[0.1], 40).unwrap();
        let from = table.summaries[0].increasing_from.expect("tail grows");
        assert!(from > 1, "small alpha dips before growing, got {from}");
        let rows: Vec<f64> = table.rows.iter().map(|r| r.ratio).collect();
        for k in from..40 {
            assert!(rows[k - 1] < rows[k]);
        }
    }

    #[test]
    fn blowup_input_validation() {
        assert!(holder_blowup(&[], 5).is_err());
        assert!(holder_blowup(&[0.5], 1).is_err());
        assert!(holder_blowup(&[1.5], 5).is_err());
        assert!(holder_blowup(&[0.0], 5).is_err());
    }

    #[test]
    fn f_vanishes_along_shrinking_scales() {
        // The alpha -> 0 limit carries no blow-up: f(t_k) itself tends to 0.
        let mut prev = f64::INFINITY;
        for k in 1..=10 {
            let v = f_value(10f64.powi(-k)).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn known_touching_quadratics() {
        // q = -|x'|^2 has Hessian diag(0, -2, ..., -2); ascending order puts
        // the middle eigenvalue at -2.
        let n = 4;
        let mut diag = vec![-2.0; n];
        diag[0] = 0.0;
        let m = SymmetricMatrix::from_diagonal(&diag).unwrap();
        let spec = eigen_decompose(&m).unwrap();
        assert_eq!(spec.eigenvalues()[n - 2], -2.0);
        // q = 0 touches with zero Hessian.
        let z = SymmetricMatrix::zeros(n);
        assert_eq!(eigen_decompose(&z).unwrap().eigenvalues()[n - 2], 0.0);
    }

    #[test]
    fn spotcheck_small_run() {
        let report = supersolution_spotcheck(8, 0, 3).unwrap();
        assert!(!report.inconclusive, "{report:?}");
        assert_eq!(report.violations, 0, "{report:?}");
        // Courant-Fischer puts the restricted bound above the middle
        // eigenvalue; both are reported.
        assert!(report.worst_restricted_rayleigh >= report.worst_middle_eigenvalue - 1e-9);
    }

    #[test]
    fn off_plane_operator_vanishes() {
        let a = WeightVector::new(vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let report = viscosity_residual_away_from_plane(&a, 200, 1).unwrap();
        assert!(report.passed(), "{report:?}");

        let b = WeightVector::new(vec![0.0, 5.0, 0.0]).unwrap();
        assert!(viscosity_residual_away_from_plane(&b, 50, 1).unwrap().passed());

        let bad = WeightVector::new(vec![1.0, 1.0, 0.0]).unwrap();
        assert!(viscosity_residual_away_from_plane(&bad, 10, 1).is_err());
    }
}
