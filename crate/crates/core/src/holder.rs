//! Holder seminorms and empirical exponent estimation for grid functions.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Inclusive node-index rectangle inside a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Region {
    pub i_min: usize,
    pub i_max: usize,
    pub j_min: usize,
    pub j_max: usize,
}

impl Region {
    pub fn full(grid: &Grid) -> Self {
        Self {
            i_min: 0,
            i_max: grid.nx() - 1,
            j_min: 0,
            j_max: grid.ny() - 1,
        }
    }

    /// Centered sub-rectangle at distance one eighth of each side from the
    /// boundary, the default window for interior regularity estimates.
    pub fn interior_default(grid: &Grid) -> Self {
        let margin_x = (grid.nx() - 1).div_ceil(8);
        let margin_y = (grid.ny() - 1).div_ceil(8);
        Self {
            i_min: margin_x,
            i_max: grid.nx() - 1 - margin_x,
            j_min: margin_y,
            j_max: grid.ny() - 1 - margin_y,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.i_min > self.i_max || self.j_min > self.j_max {
            return Err(Error::InvalidInput("empty region".into()));
        }
        if self.i_max >= grid.nx() || self.j_max >= grid.ny() {
            return Err(Error::InvalidInput(format!(
                "region exceeds the grid: ({}, {}) vs ({}, {})",
                self.i_max,
                self.j_max,
                grid.nx() - 1,
                grid.ny() - 1
            )));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        (self.i_max - self.i_min + 1) * (self.j_max - self.j_min + 1)
    }
}

fn region_nodes(u: &GridFunction, region: &Region) -> Vec<(f64, f64, f64)> {
    let grid = u.grid();
    let mut nodes = Vec::with_capacity(region.node_count());
    for j in region.j_min..=region.j_max {
        for i in region.i_min..=region.i_max {
            nodes.push((grid.x(i), grid.y(j), u.get(i, j)));
        }
    }
    nodes
}

/// Brute-force Holder seminorm `sup |u(x) - u(y)| / |x - y|^exponent` over
/// distinct node pairs in the region.
pub fn holder_seminorm(u: &GridFunction, exponent: f64, region: &Region) -> Result<f64> {
    if !(exponent > 0.0 && exponent <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "exponent must lie in (0, 1], got {exponent}"
        )));
    }
    region.validate(u.grid())?;
    if region.node_count() < 2 {
        return Err(Error::InvalidInput("region has no node pairs".into()));
    }
    let nodes = region_nodes(u, region);
    let half = 0.5 * exponent;
    let best = nodes
        .par_iter()
        .enumerate()
        .map(|(k, &(x1, y1, v1))| {
            let mut local = 0.0f64;
            for &(x2, y2, v2) in &nodes[k + 1..] {
                let dx = x1 - x2;
                let dy = y1 - y2;
                let dist_sq = dx * dx + dy * dy;
                local = local.max((v1 - v2).abs() / dist_sq.powf(half));
            }
            local
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalePoint {
    pub r: f64,
    pub omega: f64,
}

/// Log-log fit of the modulus of continuity at dyadic scales.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentEstimate {
    pub alpha_hat: f64,
    pub fit_r2: f64,
    pub scales: Vec<ScalePoint>,
}

/// Estimates the Holder exponent of `u` on `region` from the modulus
/// `omega(r) = max_{|x-y| <= r} |u(x) - u(y)|` sampled at dyadic radii; the
/// least-squares slope of `log omega` against `log r` is the estimate.
pub fn estimate_exponent(u: &GridFunction, region: &Region) -> Result<ExponentEstimate> {
    region.validate(u.grid())?;
    let h = u.grid().h();
    let di = (region.i_max - region.i_min) as f64;
    let dj = (region.j_max - region.j_min) as f64;
    let diameter = h * (di * di + dj * dj).sqrt();

    // Dyadic radii from half the diameter down to a few grid spacings,
    // snapped to multiples of h so the extremal axis-aligned pair distances
    // are realizable exactly.
    let mut steps = Vec::new();
    let mut m = (0.5 * diameter / h).floor() as usize;
    while m >= 3 {
        steps.push(m);
        m /= 2;
    }
    steps.reverse();
    if steps.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "region supports only {} dyadic scales, need at least 4",
            steps.len()
        )));
    }
    let radii: Vec<f64> = steps.iter().map(|m| *m as f64 * h).collect();

    let nodes = region_nodes(u, region);
    // Bucket thresholds get a hair of slack so pairs sitting exactly at a
    // dyadic radius are not pushed out by rounding.
    let thresholds: Vec<f64> = radii.iter().map(|r| r * (1.0 + 1e-9)).collect();
    let r_max = *thresholds.last().expect("nonempty");
    let n_scales = radii.len();
    // Shell maxima: slot k collects pairs with radii[k-1] < d <= radii[k].
    let shells = nodes
        .par_iter()
        .enumerate()
        .fold(
            || vec![0.0f64; n_scales],
            |mut acc, (k, &(x1, y1, v1))| {
                for &(x2, y2, v2) in &nodes[k + 1..] {
                    let dx = x1 - x2;
                    let dy = y1 - y2;
                    let d = (dx * dx + dy * dy).sqrt();
                    if d > r_max {
                        continue;
                    }
                    let slot = thresholds.partition_point(|rk| *rk < d);
                    let diff = (v1 - v2).abs();
                    if diff > acc[slot] {
                        acc[slot] = diff;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0.0f64; n_scales],
            |mut a, b| {
                for (ai, bi) in a.iter_mut().zip(b) {
                    *ai = ai.max(bi);
                }
                a
            },
        );

    // omega(r_k) is the prefix max over shells up to k.
    let mut scales = Vec::with_capacity(n_scales);
    let mut running = 0.0f64;
    for (rk, shell) in radii.iter().zip(&shells) {
        running = running.max(*shell);
        scales.push(ScalePoint {
            r: *rk,
            omega: running,
        });
    }

    let points: Vec<(f64, f64)> = scales
        .iter()
        .filter(|p| p.omega > 0.0)
        .map(|p| (p.r.ln(), p.omega.ln()))
        .collect();
    if points.len() < 2 {
        return Err(Error::ExponentUndefined(
            "modulus of continuity vanishes at every sampled scale".into(),
        ));
    }

    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let pred = mean_y + slope * (p.0 - mean_x);
            (p.1 - pred).powi(2)
        })
        .sum();
    let fit_r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };

    Ok(ExponentEstimate {
        alpha_hat: slope,
        fit_r2,
        scales,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn on_unit_square(n: usize, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> GridFunction {
        let grid = Grid::unit_square(n, |_, _| 0.0).unwrap();
        GridFunction::from_fn(&grid, f)
    }

    #[test]
    fn seminorm_of_linear_function() {
        let u = on_unit_square(17, |x, _| x);
        let region = Region::full(u.grid());
        let s = holder_seminorm(&u, 1.0, &region).unwrap();
        assert!((s - 1.0).abs() <= 1e-12, "got {s}");
    }

    #[test]
    fn seminorm_of_constant_is_zero() {
        let u = on_unit_square(9, |_, _| 4.2);
        let region = Region::full(u.grid());
        assert_eq!(holder_seminorm(&u, 0.5, &region).unwrap(), 0.0);
    }

    #[test]
    fn seminorm_of_sqrt_profile() {
        let u = on_unit_square(33, |x, _| x.abs().sqrt());
        let region = Region::full(u.grid());
        let s = holder_seminorm(&u, 0.5, &region).unwrap();
        assert!((s - 1.0).abs() <= 1e-10, "got {s}");
    }

    #[test]
    fn seminorm_validates_inputs() {
        let u = on_unit_square(9, |x, _| x);
        let region = Region::full(u.grid());
        assert!(holder_seminorm(&u, 0.0, &region).is_err());
        assert!(holder_seminorm(&u, 1.5, &region).is_err());
        let bad = Region {
            i_min: 0,
            i_max: 20,
            j_min: 0,
            j_max: 2,
        };
        assert!(holder_seminorm(&u, 0.5, &bad).is_err());
    }

    #[test]
    fn exponent_of_linear_function() {
        let u = on_unit_square(65, |x, _| x);
        let est = estimate_exponent(&u, &Region::full(u.grid())).unwrap();
        assert!((est.alpha_hat - 1.0).abs() <= 0.05, "{est:?}");
        assert!(est.fit_r2 > 0.99);
    }

    #[test]
    fn exponent_of_sqrt_profile() {
        let u = on_unit_square(65, |x, _| x.abs().sqrt());
        let est = estimate_exponent(&u, &Region::full(u.grid())).unwrap();
        assert!((est.alpha_hat - 0.5).abs() <= 0.05, "{est:?}");
    }

    #[test]
    fn exponent_undefined_for_constants() {
        let u = on_unit_square(65, |_, _| 1.0);
        assert!(matches!(
            estimate_exponent(&u, &Region::full(u.grid())),
            Err(Error::ExponentUndefined(_))
        ));
    }

    #[test]
    fn exponent_needs_enough_scales() {
        let u = on_unit_square(9, |x, _| x);
        let region = Region {
            i_min: 3,
            i_max: 5,
            j_min: 3,
            j_max: 5,
        };
        assert!(estimate_exponent(&u, &region).is_err());
    }

    #[test]
    fn interior_region_margins() {
        let grid = Grid::unit_square(129, |_, _| 0.0).unwrap();
        let r = Region::interior_default(&grid);
        assert_eq!(r.i_min, 16);
        assert_eq!(r.i_max, 112);
        assert_eq!(r.node_count(), 97 * 97);
    }
}
