//! Radial barrier functions: positive concave solutions of
//!
//! ```text
//!     phi''(r) + (a/r + b) phi'(r) = -c        on (0, delta],
//! ```
//!
//! normalized so that `phi'(delta) = d / delta`. Writing
//! `psi(s) = e^{-b s} s^{-a} (K - c * int_0^s t^a e^{b t} dt)`, the solution is
//! `phi(r) = int_0^r psi(s) ds` with the normalization constant
//!
//! ```text
//!     K = d * delta^{a-1} e^{b delta} + c * int_0^delta t^a e^{b t} dt,
//! ```
//!
//! which solves `psi(delta) = d / delta` exactly (the dependence on `K` is
//! linear, so no root finding is involved).
//!
//! The `s^{-a}` endpoint singularity is removed by the substitution
//! `s = u^{1/(1-a)}`, after which both integrands are bounded and composite
//! Gauss-Legendre quadrature on 64 geometrically graded panels is accurate to
//! machine level. Panel prefix sums are cached so that evaluations at
//! arbitrary radii only pay for one partial panel.

use serde::Serialize;

use crate::error::{Error, Result};

const PANELS: usize = 64;
const GL_POINTS: usize = 16;
/// First geometric panel edge relative to the full substituted interval.
const EDGE_RATIO: f64 = 1e-10;

/// Coefficients of the barrier ODE `phi'' + (a/r + b) phi' = -c` on
/// `(0, delta]`, with required terminal mass `phi(delta) >= d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierParams {
    /// Coefficient of the `1/r` drift, in `(0, 1)`.
    pub a: f64,
    /// Constant drift coefficient, `>= 0`.
    pub b: f64,
    /// Forcing constant, `> 0`.
    pub c: f64,
    /// Required value at the outer radius, `>= 0`.
    pub d: f64,
    /// Outer radius, `> 0`.
    pub delta: f64,
}

impl BarrierParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64, delta: f64) -> Result<Self> {
        let p = Self { a, b, c, d, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.b, self.c, self.d, self.delta]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(Error::InvalidParams(format!(
                "a must lie strictly in (0, 1), got {}",
                self.a
            )));
        }
        if self.c <= 0.0 {
            return Err(Error::InvalidParams(format!("c must be positive, got {}", self.c)));
        }
        if self.b < 0.0 || self.d < 0.0 {
            return Err(Error::InvalidParams("b and d must be nonnegative".into()));
        }
        if self.delta <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed once per rule by
/// Newton iteration on the Legendre recurrence.
#[derive(Debug, Clone)]
struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j as f64 - 1.0) * x * p2 - (j as f64 - 1.0) * p3) / j as f64;
                }
                pp = n as f64 * (x * p1 - p2) / (x * x - 1.0);
                let dx = p1 / pp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    fn integrate(&self, f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// Prefix sums of `int_0^x f` over fixed geometrically graded panels on
/// `[0, upper]`. Arbitrary `x` pays one Gauss rule on the partial panel.
#[derive(Debug, Clone)]
struct PrefixQuad {
    edges: Vec<f64>,
    prefix: Vec<f64>,
}

impl PrefixQuad {
    fn build(upper: f64, rule: &GaussRule, f: &impl Fn(f64) -> f64) -> Self {
        let mut edges = Vec::with_capacity(PANELS + 1);
        edges.push(0.0);
        let first = upper * EDGE_RATIO;
        let q = (1.0 / EDGE_RATIO).powf(1.0 / (PANELS as f64 - 1.0));
        let mut e = first;
        for _ in 0..PANELS - 1 {
            edges.push(e);
            e *= q;
        }
        edges.push(upper);

        let mut prefix = Vec::with_capacity(PANELS + 1);
        prefix.push(0.0);
        for w in edges.windows(2) {
            let last = *prefix.last().expect("nonempty");
            prefix.push(last + rule.integrate(f, w[0], w[1]));
        }
        Self { edges, prefix }
    }

    fn upper(&self) -> f64 {
        *self.edges.last().expect("nonempty")
    }

    fn eval(&self, x: f64, rule: &GaussRule, f: &impl Fn(f64) -> f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let x = x.min(self.upper());
        // Last panel edge not above x.
        let idx = match self
            .edges
            .binary_search_by(|e| e.partial_cmp(&x).expect("finite edges"))
        {
            Ok(i) => return self.prefix[i],
            Err(i) => i - 1,
        };
        self.prefix[idx] + rule.integrate(f, self.edges[idx], x)
    }
}

/// An evaluable barrier, immutable after [`build`].
#[derive(Debug, Clone)]
pub struct BarrierFunction {
    params: BarrierParams,
    normalization: f64,
    rule: GaussRule,
    /// Prefix quadrature of `t^a e^{b t}` in the substituted variable.
    inner: PrefixQuad,
    /// Prefix quadrature of `psi` in the substituted variable.
    outer: PrefixQuad,
}

/// Builds the barrier for the given coefficients.
pub fn build(params: BarrierParams) -> Result<BarrierFunction> {
    params.validate()?;
    let BarrierParams { a, b, c, d, delta } = params;
    let rule = GaussRule::new(GL_POINTS);
    let ex = 1.0 / (1.0 - a);
    let sub_upper = delta.powf(1.0 - a);

    let inner_f = move |v: f64| ex * v.powf(2.0 * a / (1.0 - a)) * (b * v.powf(ex)).exp();
    let inner = PrefixQuad::build(sub_upper, &rule, &inner_f);
    let weighted_mass = *inner.prefix.last().expect("nonempty");

    let normalization = d * delta.powf(a - 1.0) * (b * delta).exp() + c * weighted_mass;

    let outer = {
        let k = normalization;
        let inner_ref = &inner;
        let rule_ref = &rule;
        let outer_f = move |u: f64| {
            let s = u.powf(ex);
            let i_s = inner_ref.eval(s.powf(1.0 - a), rule_ref, &inner_f);
            ex * (-b * s).exp() * (k - c * i_s)
        };
        PrefixQuad::build(sub_upper, &rule, &outer_f)
    };

    Ok(BarrierFunction {
        params,
        normalization,
        rule,
        inner,
        outer,
    })
}

impl BarrierFunction {
    pub fn params(&self) -> &BarrierParams {
        &self.params
    }

    /// The normalization constant `K` solving `psi(delta) = d / delta`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    fn check_radius(&self, r: f64, allow_zero: bool) -> Result<()> {
        let delta = self.params.delta;
        let ok_low = if allow_zero { r >= 0.0 } else { r > 0.0 };
        if !r.is_finite() || !ok_low || r > delta * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "radius {r} outside (0, {delta}]"
            )));
        }
        Ok(())
    }

    fn inner_integrand(&self) -> impl Fn(f64) -> f64 + '_ {
        let BarrierParams { a, b, .. } = self.params;
        let ex = 1.0 / (1.0 - a);
        move |v: f64| ex * v.powf(2.0 * a / (1.0 - a)) * (b * v.powf(ex)).exp()
    }

    /// `int_0^s t^a e^{b t} dt` from the cached panels.
    pub fn weighted_exponential_integral(&self, s: f64) -> f64 {
        let a = self.params.a;
        self.inner
            .eval(s.max(0.0).powf(1.0 - a), &self.rule, &self.inner_integrand())
    }

    /// `psi(r) = phi'(r)` evaluated directly from its closed expression.
    pub fn phi_prime(&self, r: f64) -> Result<f64> {
        self.check_radius(r, false)?;
        let BarrierParams { a, b, c, .. } = self.params;
        let i_r = self.weighted_exponential_integral(r);
        Ok((-b * r).exp() * r.powf(-a) * (self.normalization - c * i_r))
    }

    /// `phi(r) = int_0^r psi`, with `phi(0) = 0` by continuity.
    pub fn phi(&self, r: f64) -> Result<f64> {
        self.check_radius(r, true)?;
        if r == 0.0 {
            return Ok(0.0);
        }
        let BarrierParams { a, b, c, .. } = self.params;
        let ex = 1.0 / (1.0 - a);
        let k = self.normalization;
        let inner = &self.inner;
        let rule = &self.rule;
        let inner_f = self.inner_integrand();
        let outer_f = move |u: f64| {
            let s = u.powf(ex);
            let i_s = inner.eval(s.powf(1.0 - a), rule, &inner_f);
            ex * (-b * s).exp() * (k - c * i_s)
        };
        Ok(self.outer.eval(r.powf(1.0 - a), &self.rule, &outer_f))
    }

    /// `phi''(r) = -c - (a/r + b) phi'(r)`, straight from the ODE; no
    /// numerical differentiation is involved.
    pub fn phi_double_prime(&self, r: f64) -> Result<f64> {
        self.check_radius(r, false)?;
        let BarrierParams { a, b, c, .. } = self.params;
        Ok(-c - (a / r + b) * self.phi_prime(r)?)
    }
}

/// Node-wise certification data for one barrier property.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyCheck {
    pub passed: bool,
    /// Smallest slack observed; nonnegative values certify the property on
    /// the node grid.
    pub worst_margin: f64,
}

/// Node-wise verification of the four structural properties: positive slope
/// with concavity, the `phi'' - phi'/r <= -c` gap, terminal mass
/// `phi(delta) >= d`, and the `K r^{1-a} / (1-a)` growth envelope.
#[derive(Debug, Clone, Serialize)]
pub struct BarrierReport {
    pub nodes: usize,
    pub derivative_signs: PropertyCheck,
    pub concavity_gap: PropertyCheck,
    pub terminal_value: PropertyCheck,
    pub growth_bound: PropertyCheck,
}

impl BarrierReport {
    pub fn all_passed(&self) -> bool {
        self.derivative_signs.passed
            && self.concavity_gap.passed
            && self.terminal_value.passed
            && self.growth_bound.passed
    }
}

/// Log-spaced node grid on `(0, delta]`, spanning six decades below `delta`
/// and ending at `delta` exactly.
pub fn log_spaced_nodes(delta: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            delta * 10f64.powf(-6.0 * (1.0 - t))
        })
        .collect()
}

const GAP_TOL: f64 = 1e-8;
const TERMINAL_TOL: f64 = 1e-9;
const GROWTH_TOL: f64 = 1e-8;

/// Certifies the four properties on a log-spaced grid of `grid_points` nodes.
/// Failures are reported, not raised.
pub fn verify_properties(barrier: &BarrierFunction, grid_points: usize) -> Result<BarrierReport> {
    if grid_points < 2 {
        return Err(Error::InvalidInput("grid_points must be >= 2".into()));
    }
    let BarrierParams { a, c, d, delta, .. } = *barrier.params();
    let k = barrier.normalization();
    let nodes = log_spaced_nodes(delta, grid_points);

    let mut signs = f64::INFINITY;
    let mut gap = f64::INFINITY;
    let mut growth = f64::INFINITY;
    for &r in &nodes {
        let p = barrier.phi_prime(r)?;
        let pp = barrier.phi_double_prime(r)?;
        signs = signs.min(p).min(-pp);
        gap = gap.min((-c + GAP_TOL) - (pp - p / r));
        let envelope = k * r.powf(1.0 - a) / (1.0 - a) * (1.0 + GROWTH_TOL);
        growth = growth.min(envelope - barrier.phi(r)?);
    }
    let terminal = barrier.phi(delta)? - (d - TERMINAL_TOL);

    Ok(BarrierReport {
        nodes: grid_points,
        derivative_signs: PropertyCheck {
            passed: signs > 0.0,
            worst_margin: signs,
        },
        concavity_gap: PropertyCheck {
            passed: gap >= 0.0,
            worst_margin: gap,
        },
        terminal_value: PropertyCheck {
            passed: terminal >= 0.0,
            worst_margin: terminal,
        },
        growth_bound: PropertyCheck {
            passed: growth >= 0.0,
            worst_margin: growth,
        },
    })
}

/// Outcome of a randomized parameter sweep over the admissible box.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub draws: usize,
    pub failures: usize,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Draws parameters across `a in [0.05, 0.95]`, `b in [0, 5]`,
/// `c in [0.1, 10]`, `d in [0, 5]`, `delta in [0.1, 2]` and verifies the
/// structural properties of every induced barrier.
pub fn random_property_sweep(draws: usize, nodes: usize, seed: u64) -> Result<SweepReport> {
    use rand::Rng;
    if draws == 0 {
        return Err(Error::InvalidInput("draws must be >= 1".into()));
    }
    let mut failures = 0;
    for trial in 0..draws {
        let mut rng = crate::sampling::rng_for(seed, trial as u64);
        let params = BarrierParams::new(
            rng.gen_range(0.05..0.95),
            rng.gen_range(0.0..5.0),
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.0..5.0),
            rng.gen_range(0.1..2.0),
        )?;
        let barrier = build(params)?;
        if !verify_properties(&barrier, nodes)?.all_passed() {
            failures += 1;
        }
    }
    Ok(SweepReport { draws, failures })
}

/// For `b = 0` the barrier is elementary: `phi(r) = c1 * r^{1-a} - c2 * r^2`
/// with `c1 = K / (1-a)` and `c2 = c / (2 (1+a))`. Returns `(c1, c2)`.
pub fn closed_form_b0(params: &BarrierParams) -> Result<(f64, f64)> {
    params.validate()?;
    if params.b != 0.0 {
        return Err(Error::NotApplicable(
            "closed form requires b = 0".into(),
        ));
    }
    let BarrierParams { a, c, d, delta, .. } = *params;
    let k = d * delta.powf(a - 1.0) + c * delta.powf(a + 1.0) / (a + 1.0);
    Ok((k / (1.0 - a), c / (2.0 * (1.0 + a))))
}
