//! Bisection on the iso-level for a target relative density or wall
//! thickness.
//!
//! Both objectives are monotone non-decreasing in the level `t` and
//! piecewise constant or piecewise smooth at a fixed grid, so a
//! derivative-free bracket search is used. The field is sampled once; each
//! iteration only shifts the level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{sample, transform_inside_negative, Domain, SolidMode, VoxelGrid};
use crate::metrics::min_wall;

pub const MAX_ITERATIONS: u32 = 60;
pub const DEFAULT_DENSITY_TOL: f64 = 0.005;
pub const DEFAULT_WALL_TOL_MM: f64 = 0.05;
const SWEEP_POINTS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub t: f64,
    pub achieved: f64,
    pub iterations: u32,
    pub converged: bool,
}

/// Which side of the surface becomes solid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolidKind {
    Network,
    Sheet,
}

impl SolidKind {
    pub fn at(self, t: f64) -> SolidMode {
        match self {
            SolidKind::Network => SolidMode::Network { t },
            SolidKind::Sheet => SolidMode::Sheet { t },
        }
    }
}

/// Trapezoid-weighted density of `{v : key(v) <= t}` without building a
/// transformed grid.
struct DensityObjective {
    keys: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

impl DensityObjective {
    fn new(grid: &VoxelGrid, solid: SolidKind) -> Self {
        let [nx, ny, nz] = grid.dims;
        let w = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let mut weights = Vec::with_capacity(grid.len());
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    weights.push(w(i, nx) * w(j, ny) * w(k, nz));
                }
            }
        }
        let keys = match solid {
            SolidKind::Network => grid.values.clone(),
            SolidKind::Sheet => grid.values.iter().map(|v| v.abs()).collect(),
        };
        let total = weights.iter().sum();
        DensityObjective {
            keys,
            weights,
            total,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        // same expression as `relative_density` on the transformed grid
        let inside: f64 = self
            .keys
            .iter()
            .zip(&self.weights)
            .filter(|(&k, _)| k - t <= 0.0)
            .map(|(_, &w)| w)
            .sum();
        inside / self.total
    }
}

fn bisect(
    mut lo: f64,
    mut hi: f64,
    target: f64,
    tol: f64,
    objective: impl Fn(f64) -> f64,
) -> Result<SolveResult> {
    let sweep: Vec<(f64, f64)> = (0..SWEEP_POINTS)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / (SWEEP_POINTS - 1) as f64;
            (t, objective(t))
        })
        .collect();
    if let Some(w) = sweep.windows(2).find(|w| w[1].1 < w[0].1) {
        return Err(Error::NonMonotone(format!(
            "objective drops from {} at t = {} to {} at t = {}",
            w[0].1, w[0].0, w[1].1, w[1].0
        )));
    }
    let f_lo = sweep[0].1;
    let f_hi = sweep[SWEEP_POINTS - 1].1;
    for (t, f) in [(lo, f_lo), (hi, f_hi)] {
        if (f - target).abs() <= tol {
            return Ok(SolveResult {
                t,
                achieved: f,
                iterations: 0,
                converged: true,
            });
        }
    }
    if !(f_lo..=f_hi).contains(&target) {
        return Err(Error::TargetUnreachable {
            target,
            lo: f_lo,
            hi: f_hi,
        });
    }

    let (mut best_t, mut best_f) = if target - f_lo < f_hi - target {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    };
    for iteration in 1..=MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let f = objective(mid);
        if (f - target).abs() <= tol {
            return Ok(SolveResult {
                t: mid,
                achieved: f,
                iterations: iteration,
                converged: true,
            });
        }
        if (f - target).abs() <= (best_f - target).abs() {
            best_t = mid;
            best_f = f;
        }
        if f < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SolveResult {
        t: best_t,
        achieved: best_f,
        iterations: MAX_ITERATIONS,
        converged: false,
    })
}

/// Finds the level whose solid has relative density `target` on `grid`.
pub fn solve_density_on_grid(
    grid: &VoxelGrid,
    solid: SolidKind,
    target: f64,
    tol: f64,
) -> Result<SolveResult> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidSpec(format!("tolerance must be positive, got {tol}")));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::TargetUnreachable {
            target,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let (vmin, vmax) = grid.value_range();
    let (lo, hi) = match solid {
        SolidKind::Network => (vmin, vmax),
        SolidKind::Sheet => (0.0, vmin.abs().max(vmax.abs())),
    };
    let objective = DensityObjective::new(grid, solid);
    bisect(lo, hi, target, tol, |t| objective.eval(t))
}

pub fn solve_iso_for_density<F: ScalarField + ?Sized>(
    field: &F,
    domain: &Domain,
    dims: [usize; 3],
    solid: SolidKind,
    target: f64,
    tol: f64,
) -> Result<SolveResult> {
    let grid = sample(field, domain, dims)?;
    solve_density_on_grid(&grid, solid, target, tol)
}

/// Smallest grid pitch (mm).
pub fn pitch(grid: &VoxelGrid) -> f64 {
    grid.spacing.min()
}

/// Finds the sheet thickness level whose wall measure equals `target_mm`.
pub fn solve_wall_on_grid(grid: &VoxelGrid, target_mm: f64, tol_mm: f64) -> Result<SolveResult> {
    if !(tol_mm > 0.0 && tol_mm.is_finite()) {
        return Err(Error::InvalidSpec(format!("tolerance must be positive, got {tol_mm}")));
    }
    let pitch_mm = pitch(grid);
    if !(target_mm >= 2.0 * pitch_mm) {
        return Err(Error::ResolutionTooCoarse { target_mm, pitch_mm });
    }
    let (vmin, vmax) = grid.value_range();
    let hi = vmin.abs().max(vmax.abs());
    bisect(0.0, hi, target_mm, tol_mm, |t| {
        if t <= 0.0 {
            return 0.0;
        }
        transform_inside_negative(grid, SolidMode::Sheet { t })
            .map(|g| min_wall(&g))
            .unwrap_or(0.0)
    })
}

pub fn solve_thickness_for_wall<F: ScalarField + ?Sized>(
    field: &F,
    domain: &Domain,
    dims: [usize; 3],
    target_wall_mm: f64,
    tol_mm: f64,
) -> Result<SolveResult> {
    let grid = sample(field, domain, dims)?;
    solve_wall_on_grid(&grid, target_wall_mm, tol_mm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldSpec, SurfaceKind};
    use crate::metrics::relative_density;
    use nalgebra::{Point3, Vector3};

    fn period_box(l: f64) -> Domain {
        Domain::from_size(Vector3::repeat(l)).unwrap()
    }

    #[test]
    fn schwarz_p_half_density_at_zero() {
        let f = FieldSpec::new(SurfaceKind::SchwarzP, 50.0).unwrap();
        let r = solve_iso_for_density(&f, &period_box(50.0), [64; 3], SolidKind::Network, 0.5, 0.005).unwrap();
        assert!(r.converged);
        assert!((r.achieved - 0.5).abs() <= 0.005);
        assert!(r.t.abs() < 0.05, "{}", r.t);
    }

    #[test]
    fn unreachable_targets() {
        let f = FieldSpec::new(SurfaceKind::Gyroid, 50.0).unwrap();
        let e = solve_iso_for_density(&f, &period_box(50.0), [16; 3], SolidKind::Network, 1.5, 0.005);
        assert!(matches!(e, Err(Error::TargetUnreachable { .. })));
        let e = solve_iso_for_density(&f, &period_box(50.0), [16; 3], SolidKind::Network, 0.3, 0.0);
        assert!(matches!(e, Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn achieved_density_reproduces_exactly() {
        let f = FieldSpec::new(SurfaceKind::Diamond, 30.0).unwrap();
        let g = sample(&f, &period_box(30.0), [40; 3]).unwrap();
        for solid in [SolidKind::Network, SolidKind::Sheet] {
            let r = solve_density_on_grid(&g, solid, 0.27, 0.002).unwrap();
            assert!(r.converged);
            let remeasured = relative_density(&transform_inside_negative(&g, solid.at(r.t)).unwrap());
            assert_eq!(remeasured, r.achieved);
        }
    }

    #[test]
    fn non_monotone_objective_is_rejected() {
        let e = bisect(0.0, 1.0, 0.5, 1e-3, |t| (t * 10.0).sin());
        assert!(matches!(e, Err(Error::NonMonotone(_))));
    }

    #[test]
    fn bisection_reports_non_convergence() {
        // a step function cannot hit 0.5 within 1e-6
        let r = bisect(0.0, 1.0, 0.5, 1e-6, |t| if t < 0.3 { 0.0 } else { 1.0 }).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, MAX_ITERATIONS);
        assert!((r.t - 0.3).abs() < 1e-12);
    }

    #[test]
    fn wall_target_below_pitch_is_too_coarse() {
        let f = FieldSpec::new(SurfaceKind::Gyroid, 50.0).unwrap();
        let e = solve_thickness_for_wall(&f, &period_box(50.0), [32; 3], 1.0, 0.05);
        assert!(matches!(e, Err(Error::ResolutionTooCoarse { .. })));
    }

    #[test]
    fn larger_wall_needs_larger_level() {
        let f = FieldSpec::new(SurfaceKind::Gyroid, 20.0).unwrap();
        let g = sample(&f, &period_box(20.0), [48; 3]).unwrap();
        let a = solve_wall_on_grid(&g, 1.5, 0.05).unwrap();
        let b = solve_wall_on_grid(&g, 3.0, 0.05).unwrap();
        assert!(a.converged && b.converged);
        assert!(b.t >= a.t);
        let _ = Point3::<f64>::origin();
    }
}
