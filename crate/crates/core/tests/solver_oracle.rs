use nalgebra::Vector3;
use tpms_forge::grid::sample;
use tpms_forge::metrics::min_wall;
use tpms_forge::solver::{solve_density_on_grid, solve_wall_on_grid, SolidKind};
use tpms_forge::{transform_inside_negative, Domain, Error, FieldSpec, SolidMode, SurfaceKind, VoxelGrid};

/// Density by plain node counting with half weights on faces, edges and
/// corners multiplied out.
fn counted_density(grid: &VoxelGrid, solid: SolidKind, t: f64) -> f64 {
    let [nx, ny, nz] = grid.dims;
    let mut inside = 0.0;
    let mut total = 0.0;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let mut w = 1.0;
                for (c, n) in [(i, nx), (j, ny), (k, nz)] {
                    if c == 0 || c + 1 == n {
                        w /= 2.0;
                    }
                }
                let v = grid.get(i, j, k);
                let key = match solid {
                    SolidKind::Network => v,
                    SolidKind::Sheet => v.abs(),
                };
                total += w;
                if key <= t {
                    inside += w;
                }
            }
        }
    }
    inside / total
}

fn gyroid_grid(n: usize) -> VoxelGrid {
    let f = FieldSpec::new(SurfaceKind::Gyroid, 50.0).unwrap();
    sample(&f, &Domain::from_size(Vector3::repeat(50.0)).unwrap(), [n; 3]).unwrap()
}

#[test]
fn gyroid_targets_match_sweep_oracle() {
    let grid = gyroid_grid(64);
    // brute-force sweep: the achievable densities bracket every target
    let sweep: Vec<(f64, f64)> = (0..=400)
        .map(|i| {
            let t = -1.5 + 3.0 * i as f64 / 400.0;
            (t, counted_density(&grid, SolidKind::Network, t))
        })
        .collect();
    assert!(sweep.windows(2).all(|w| w[1].1 >= w[0].1));
    for target in [0.2, 0.3, 0.5, 0.7] {
        let r = solve_density_on_grid(&grid, SolidKind::Network, target, 0.005).unwrap();
        assert!(r.converged);
        let got = counted_density(&grid, SolidKind::Network, r.t);
        assert!((got - target).abs() <= 0.005, "target {target}: {got}");
        assert_eq!(got, r.achieved);
        // the solved level falls inside the sweep interval that straddles the target
        let lo = sweep.iter().rev().find(|s| s.1 < target - 0.005).unwrap().0;
        let hi = sweep.iter().find(|s| s.1 > target + 0.005).unwrap().0;
        assert!(lo < r.t && r.t < hi, "{target}: {} not in ({lo}, {hi})", r.t);
    }
}

#[test]
fn sheet_targets_match_counting() {
    let grid = gyroid_grid(48);
    for target in [0.1, 0.25, 0.4] {
        let r = solve_density_on_grid(&grid, SolidKind::Sheet, target, 0.003).unwrap();
        assert!(r.converged && r.t > 0.0);
        let got = counted_density(&grid, SolidKind::Sheet, r.t);
        assert!((got - target).abs() <= 0.003);
    }
}

#[test]
fn symmetric_kinds_reach_half_near_zero() {
    for kind in [SurfaceKind::Gyroid, SurfaceKind::Diamond, SurfaceKind::SchwarzP] {
        let f = FieldSpec::new(kind, 40.0).unwrap();
        let grid = sample(&f, &Domain::from_size(Vector3::repeat(40.0)).unwrap(), [64; 3]).unwrap();
        let r = solve_density_on_grid(&grid, SolidKind::Network, 0.5, 0.005).unwrap();
        assert!(r.t.abs() < 0.05, "{kind}: {}", r.t);
    }
}

#[test]
fn unreachable_and_degenerate() {
    let grid = gyroid_grid(24);
    for target in [0.0, 1.0, 1.5, -0.2, f64::NAN] {
        let e = solve_density_on_grid(&grid, SolidKind::Network, target, 0.005);
        assert!(matches!(e, Err(Error::TargetUnreachable { .. })), "{target}");
    }
    // a constant field has nothing to bisect
    let flat = VoxelGrid::from_values([4, 4, 4], nalgebra::Point3::origin(), Vector3::repeat(1.0), vec![0.25; 64]).unwrap();
    let e = solve_density_on_grid(&flat, SolidKind::Network, 0.5, 0.005);
    assert!(matches!(e, Err(Error::TargetUnreachable { .. })));
}

#[test]
fn wall_solver_meets_its_target() {
    let f = FieldSpec::new(SurfaceKind::Gyroid, 20.0).unwrap();
    let grid = sample(&f, &Domain::from_size(Vector3::repeat(20.0)).unwrap(), [64; 3]).unwrap();
    for target in [1.2, 2.0] {
        let r = solve_wall_on_grid(&grid, target, 0.05).unwrap();
        assert!(r.converged);
        let g = transform_inside_negative(&grid, SolidMode::Sheet { t: r.t }).unwrap();
        assert!((min_wall(&g) - target).abs() <= 0.05);
    }
    let e = solve_wall_on_grid(&grid, 0.3, 0.05);
    assert!(matches!(e, Err(Error::ResolutionTooCoarse { .. })));
    let e = solve_wall_on_grid(&grid, 500.0, 0.05);
    assert!(matches!(e, Err(Error::TargetUnreachable { .. })));
}
