//! Monotone wide-stencil finite differences for
//! `a1 l1(D^2 u) + a2 l2(D^2 u) + H(grad u) = f` on 2D rectangles with
//! Dirichlet data.
//!
//! In two dimensions the operator splits as
//!
//! ```text
//!     a1 l1 + a2 l2 = m * trace + (a1 - m) * l1 + (a2 - m) * l2,
//!     m = min(a1, a2),
//! ```
//!
//! where exactly one of the last two coefficients is nonzero. Replacing the
//! trace by the 5-point Laplacian and the extreme eigenvalues by the min and
//! max of directional second differences over a wide stencil keeps every
//! neighbor coefficient nonnegative, so the scheme is degenerate elliptic in
//! the discrete sense: raising any neighbor value never lowers the residual.
//! The gradient term uses centered differences and sits outside that
//! guarantee.
//!
//! The solver is plain pseudo-time relaxation `u += tau * residual` with
//! simultaneous (Jacobi style) updates, double buffered so results are
//! independent of the parallel schedule.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{Hamiltonian, WeightVector};

pub type BoundaryFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Uniform rectangular node grid with Dirichlet boundary data.
#[derive(Clone)]
pub struct Grid {
    nx: usize,
    ny: usize,
    h: f64,
    origin: (f64, f64),
    boundary: BoundaryFn,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("h", &self.h)
            .field("origin", &self.origin)
            .finish()
    }
}

impl Grid {
    pub fn new(
        nx: usize,
        ny: usize,
        h: f64,
        origin: (f64, f64),
        boundary: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidInput(
                "grid needs at least 3 nodes per axis".into(),
            ));
        }
        if !(h > 0.0) || !h.is_finite() || !origin.0.is_finite() || !origin.1.is_finite() {
            return Err(Error::InvalidInput("spacing and origin must be finite, h > 0".into()));
        }
        Ok(Self {
            nx,
            ny,
            h,
            origin,
            boundary: Arc::new(boundary),
        })
    }

    /// Unit square grid with `n` nodes per side.
    pub fn unit_square(
        n: usize,
        boundary: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput("need at least 3 nodes per side".into()));
        }
        Self::new(n, n, 1.0 / (n - 1) as f64, (0.0, 0.0), boundary)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin.0 + i as f64 * self.h
    }

    pub fn y(&self, j: usize) -> f64 {
        self.origin.1 + j as f64 * self.h
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1
    }

    pub fn boundary_value(&self, x: f64, y: f64) -> f64 {
        (self.boundary)(x, y)
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    fn same_layout(&self, other: &Grid) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.h == other.h && self.origin == other.origin
    }
}

/// Node values of a discrete function over a [`Grid`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.node_count());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidInput(format!(
                "expected {} node values, got {}",
                grid.node_count(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite node value".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.node_count()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.grid.index(i, j);
        self.values[idx] = v;
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// Lattice directions `(p, q)` with coprime components bounded by the stencil
/// width, kept up to sign and paired with the exact orthogonal partner
/// `(-q, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StencilDirection {
    pub dx: i32,
    pub dy: i32,
    pub orthogonal: (i32, i32),
}

impl StencilDirection {
    pub fn norm_sq(&self) -> f64 {
        (self.dx * self.dx + self.dy * self.dy) as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StencilSet {
    width: usize,
    directions: Vec<StencilDirection>,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl StencilSet {
    pub fn new(width: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidInput("stencil width must be >= 1".into()));
        }
        let w = width as i32;
        let mut directions = Vec::new();
        for p in 0..=w {
            for q in -w..=w {
                // Canonical representative up to sign: p > 0, or (0, 1).
                if p == 0 && q != 1 {
                    continue;
                }
                if p > 0 && gcd(p as u32, q.unsigned_abs()) != 1 {
                    continue;
                }
                directions.push(StencilDirection {
                    dx: p,
                    dy: q,
                    orthogonal: (-q, p),
                });
            }
        }
        Ok(Self { width, directions })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn directions(&self) -> &[StencilDirection] {
        &self.directions
    }
}

/// Centered second difference along an integer direction, normalized by
/// `h^2 |v|^2` so that quadratics report `v^T (D^2 u) v / |v|^2` exactly.
pub fn directional_second_difference(
    u: &GridFunction,
    node: (usize, usize),
    direction: (i32, i32),
) -> Result<f64> {
    let grid = u.grid();
    let (i, j) = node;
    if grid.is_boundary(i, j) {
        return Err(Error::Domain(format!(
            "node ({i}, {j}) lies on the boundary"
        )));
    }
    let (p, q) = direction;
    if p == 0 && q == 0 {
        return Err(Error::InvalidInput("direction must be nonzero".into()));
    }
    let ip = i as i64 + p as i64;
    let im = i as i64 - p as i64;
    let jp = j as i64 + q as i64;
    let jm = j as i64 - q as i64;
    let in_range = |a: i64, n: usize| a >= 0 && a < n as i64;
    if !in_range(ip, grid.nx)
        || !in_range(im, grid.nx)
        || !in_range(jp, grid.ny)
        || !in_range(jm, grid.ny)
    {
        return Err(Error::Domain(format!(
            "direction ({p}, {q}) leaves the grid at node ({i}, {j})"
        )));
    }
    let center = u.get(i, j);
    let plus = u.get(ip as usize, jp as usize);
    let minus = u.get(im as usize, jm as usize);
    let norm_sq = (p * p + q * q) as f64;
    Ok((plus - 2.0 * center + minus) / (grid.h * grid.h * norm_sq))
}

/// Shared residual kernel for [`discrete_operator`] and [`solve`].
struct ResidualKernel<'a> {
    nx: usize,
    ny: usize,
    inv_h2: f64,
    inv_2h: f64,
    a1: f64,
    a2: f64,
    m: f64,
    dirs: &'a [StencilDirection],
    ham: &'a Hamiltonian,
}

impl ResidualKernel<'_> {
    /// Residual at interior node `(i, j)`:
    /// `m lap + (a1 - m) min_v d2_v + (a2 - m) max_v d2_v + H(grad) - f`.
    /// Directions whose endpoints leave the grid are dropped; the axis pair
    /// is always available at interior nodes.
    #[inline]
    fn eval(&self, u: &[f64], f_node: f64, i: usize, j: usize) -> f64 {
        let nx = self.nx;
        let idx = j * nx + i;
        let center = u[idx];
        let east = u[idx + 1];
        let west = u[idx - 1];
        let north = u[idx + nx];
        let south = u[idx - nx];
        let lap = (east + west + north + south - 4.0 * center) * self.inv_h2;

        let mut dmin = f64::INFINITY;
        let mut dmax = f64::NEG_INFINITY;
        for d in self.dirs {
            let ip = i as i64 + d.dx as i64;
            let im = i as i64 - d.dx as i64;
            let jp = j as i64 + d.dy as i64;
            let jm = j as i64 - d.dy as i64;
            if ip < 0
                || im < 0
                || jp < 0
                || jm < 0
                || ip >= nx as i64
                || im >= nx as i64
                || jp >= self.ny as i64
                || jm >= self.ny as i64
            {
                continue;
            }
            let plus = u[jp as usize * nx + ip as usize];
            let minus = u[jm as usize * nx + im as usize];
            let second = (plus - 2.0 * center + minus) * self.inv_h2 / d.norm_sq();
            dmin = dmin.min(second);
            dmax = dmax.max(second);
        }

        let grad = [(east - west) * self.inv_2h, (north - south) * self.inv_2h];
        self.m * lap + (self.a1 - self.m) * dmin + (self.a2 - self.m) * dmax
            + self.ham.eval(&grad)
            - f_node
    }

    fn second_order_part(&self, u: &[f64], i: usize, j: usize) -> f64 {
        let zero = Hamiltonian::Zero;
        let k = ResidualKernel { ham: &zero, ..*self };
        k.eval(u, 0.0, i, j)
    }

    fn gradient_norm(&self, u: &[f64], i: usize, j: usize) -> f64 {
        let nx = self.nx;
        let idx = j * nx + i;
        let gx = (u[idx + 1] - u[idx - 1]) * self.inv_2h;
        let gy = (u[idx + nx] - u[idx - nx]) * self.inv_2h;
        (gx * gx + gy * gy).sqrt()
    }
}

fn check_operator_inputs(
    u: &GridFunction,
    a: &WeightVector,
    f: &GridFunction,
) -> Result<(f64, f64)> {
    if a.dim() != 2 {
        return Err(Error::InvalidInput(format!(
            "the 2D scheme needs exactly 2 weights, got {}",
            a.dim()
        )));
    }
    if !a.is_class_a() {
        return Err(Error::NotClassA);
    }
    if !u.grid().same_layout(f.grid()) {
        return Err(Error::InvalidInput(
            "solution and right-hand side live on different grids".into(),
        ));
    }
    Ok((a.weights()[0], a.weights()[1]))
}

/// Residual field of the discrete equation; boundary nodes carry zero.
pub fn discrete_operator(
    u: &GridFunction,
    a: &WeightVector,
    ham: &Hamiltonian,
    f: &GridFunction,
    stencil: &StencilSet,
) -> Result<GridFunction> {
    let (a1, a2) = check_operator_inputs(u, a, f)?;
    let grid = u.grid();
    let kernel = ResidualKernel {
        nx: grid.nx,
        ny: grid.ny,
        inv_h2: 1.0 / (grid.h * grid.h),
        inv_2h: 0.5 / grid.h,
        a1,
        a2,
        m: a1.min(a2),
        dirs: stencil.directions(),
        ham,
    };
    let mut residual = GridFunction::zeros(grid);
    let nx = grid.nx;
    let ny = grid.ny;
    let uv = u.values();
    let fv = f.values();
    residual.values[nx..nx * (ny - 1)]
        .par_chunks_mut(nx)
        .enumerate()
        .for_each(|(jm1, row)| {
            let j = jm1 + 1;
            for i in 1..nx - 1 {
                row[i] = kernel.eval(uv, fv[j * nx + i], i, j);
            }
        });
    Ok(residual)
}

/// Pseudo-time configuration. A missing `tau` falls back to the conservative
/// default `h^2 / (4 |a|_1 w^2)`; anything above the monotone update bound
/// `h^2 / (2 |a|_1)` is rejected.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolveConfig {
    pub tau: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tau: None,
            tol: 1e-8,
            max_iter: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolveDiagnostics {
    /// Largest centered gradient magnitude at the final iterate.
    pub max_gradient_norm: f64,
    /// Set when the gradient term outweighs the second order part somewhere.
    pub gradient_dominated: bool,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub u: GridFunction,
    pub iterations: usize,
    pub final_residual: f64,
    pub tau: f64,
    pub diagnostics: SolveDiagnostics,
}

/// Bilinear (Coons patch) interpolation of the boundary data, the standard
/// bounded starting guess.
pub fn boundary_interpolant(grid: &Grid) -> GridFunction {
    let nx = grid.nx;
    let ny = grid.ny;
    let x0 = grid.x(0);
    let x1 = grid.x(nx - 1);
    let y0 = grid.y(0);
    let y1 = grid.y(ny - 1);
    let g = |x: f64, y: f64| grid.boundary_value(x, y);
    let g00 = g(x0, y0);
    let g10 = g(x1, y0);
    let g01 = g(x0, y1);
    let g11 = g(x1, y1);
    let mut out = GridFunction::zeros(grid);
    for j in 0..ny {
        for i in 0..nx {
            let x = grid.x(i);
            let y = grid.y(j);
            if grid.is_boundary(i, j) {
                out.set(i, j, g(x, y));
                continue;
            }
            let s = (x - x0) / (x1 - x0);
            let t = (y - y0) / (y1 - y0);
            let v = (1.0 - s) * g(x0, y) + s * g(x1, y) + (1.0 - t) * g(x, y0)
                + t * g(x, y1)
                - ((1.0 - s) * (1.0 - t) * g00
                    + s * (1.0 - t) * g10
                    + (1.0 - s) * t * g01
                    + s * t * g11);
            out.set(i, j, v);
        }
    }
    out
}

/// Relaxes `u += tau * residual(u)` until the interior residual max-norm
/// drops below `tol` or `max_iter` is reached. Errors out when the residual
/// norm doubles from its running minimum.
pub fn solve(
    grid: &Grid,
    a: &WeightVector,
    ham: &Hamiltonian,
    f: &GridFunction,
    stencil: &StencilSet,
    config: &SolveConfig,
) -> Result<SolveOutcome> {
    let probe = GridFunction::zeros(grid);
    let (a1, a2) = check_operator_inputs(&probe, a, f)?;
    let h = grid.h;
    let one_norm = a.one_norm();
    let stability_bound = h * h / (2.0 * one_norm);
    let tau = config
        .tau
        .unwrap_or(h * h / (4.0 * one_norm * (stencil.width() * stencil.width()) as f64));
    if !(tau > 0.0) || tau > stability_bound * (1.0 + 1e-12) {
        return Err(Error::InvalidParams(format!(
            "tau = {tau} violates the monotone update bound {stability_bound}"
        )));
    }
    if config.tol <= 0.0 {
        return Err(Error::InvalidParams("tol must be positive".into()));
    }

    let kernel = ResidualKernel {
        nx: grid.nx,
        ny: grid.ny,
        inv_h2: 1.0 / (h * h),
        inv_2h: 0.5 / h,
        a1,
        a2,
        m: a1.min(a2),
        dirs: stencil.directions(),
        ham,
    };

    let nx = grid.nx;
    let ny = grid.ny;
    let fv = f.values().to_vec();
    let mut current = boundary_interpolant(grid);
    let mut next = current.clone();
    let mut best_residual = f64::INFINITY;
    let mut iterations = 0;
    let mut residual_norm;

    loop {
        let uv = &current.values;
        residual_norm = next.values[nx..nx * (ny - 1)]
            .par_chunks_mut(nx)
            .enumerate()
            .map(|(jm1, row)| {
                let j = jm1 + 1;
                let mut row_max = 0.0f64;
                for i in 1..nx - 1 {
                    let r = kernel.eval(uv, fv[j * nx + i], i, j);
                    row[i] = uv[j * nx + i] + tau * r;
                    row_max = row_max.max(r.abs());
                }
                row_max
            })
            .reduce(|| 0.0, f64::max);

        if !residual_norm.is_finite() {
            return Err(Error::Diverged {
                iteration: iterations,
                residual: residual_norm,
                best: best_residual,
            });
        }
        if residual_norm <= config.tol {
            break;
        }
        if residual_norm > 2.0 * best_residual {
            return Err(Error::Diverged {
                iteration: iterations,
                residual: residual_norm,
                best: best_residual,
            });
        }
        best_residual = best_residual.min(residual_norm);
        iterations += 1;
        if iterations >= config.max_iter {
            std::mem::swap(&mut current, &mut next);
            break;
        }
        std::mem::swap(&mut current, &mut next);
    }

    // Gradient diagnostics at the final iterate.
    let uv = &current.values;
    let mut max_grad = 0.0f64;
    let mut dominated = false;
    if !ham.is_zero() {
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let gnorm = kernel.gradient_norm(uv, i, j);
                max_grad = max_grad.max(gnorm);
                let gx = (uv[j * nx + i + 1] - uv[j * nx + i - 1]) * kernel.inv_2h;
                let gy = (uv[(j + 1) * nx + i] - uv[(j - 1) * nx + i]) * kernel.inv_2h;
                let h_term = ham.eval(&[gx, gy]).abs();
                if h_term > kernel.second_order_part(uv, i, j).abs().max(1e-12) {
                    dominated = true;
                }
            }
        }
    } else {
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                max_grad = max_grad.max(kernel.gradient_norm(uv, i, j));
            }
        }
    }

    Ok(SolveOutcome {
        u: current,
        iterations,
        final_residual: residual_norm,
        tau,
        diagnostics: SolveDiagnostics {
            max_gradient_norm: max_grad,
            gradient_dominated: dominated,
        },
    })
}
