use nalgebra::Vector3;
use tpms_forge::brick::{brick_grids, scaled_resolution};
use tpms_forge::metrics::{min_wall, relative_density, topology_check};
use tpms_forge::solver::SolidKind;
use tpms_forge::{build_brick, BrickMode, BrickSpec, Error, FieldSpec, SurfaceKind, VoxelGrid, Warning};

fn small(kind: SurfaceKind, period: f64, mode: BrickMode) -> BrickSpec {
    BrickSpec {
        field: FieldSpec::new(kind, period).unwrap(),
        mode,
        domain_size: Vector3::new(60.0, 60.0, 80.0),
        base_height: 10.0,
        resolution: Some(scaled_resolution(&Vector3::new(60.0, 60.0, 80.0), 64)),
        ..BrickSpec::default()
    }
}

/// Inside nodes joined across faces, plus enclosed outside pockets joined
/// across faces and face diagonals. Each is one closed surface.
fn flood_fill_surfaces(grid: &VoxelGrid) -> usize {
    let [nx, ny, nz] = grid.dims;
    let inside: Vec<bool> = grid.values.iter().map(|&v| v <= 0.0).collect();
    let mut seen = vec![false; inside.len()];
    let mut count = 0;
    for start in 0..inside.len() {
        if seen[start] {
            continue;
        }
        let want = inside[start];
        let mut touches_boundary = false;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(idx) = stack.pop() {
            let [i, j, k] = grid.unravel(idx);
            if i == 0 || j == 0 || k == 0 || i + 1 == nx || j + 1 == ny || k + 1 == nz {
                touches_boundary = true;
            }
            for dk in -1i64..=1 {
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        let steps = di.abs() + dj.abs() + dk.abs();
                        let limit = if want { 1 } else { 2 };
                        if steps == 0 || steps > limit {
                            continue;
                        }
                        let (a, b, c) = (i as i64 + di, j as i64 + dj, k as i64 + dk);
                        if a < 0 || b < 0 || c < 0 || a >= nx as i64 || b >= ny as i64 || c >= nz as i64 {
                            continue;
                        }
                        let n = grid.index(a as usize, b as usize, c as usize);
                        if !seen[n] && inside[n] == want {
                            seen[n] = true;
                            stack.push(n);
                        }
                    }
                }
            }
        }
        if want || !touches_boundary {
            count += 1;
        }
    }
    count
}

#[test]
fn default_brick_is_printable() {
    let spec = BrickSpec {
        field: FieldSpec::new(SurfaceKind::Gyroid, 50.0).unwrap(),
        mode: BrickMode::Network { t: 0.0 },
        ..BrickSpec::default()
    };
    let r = build_brick(&spec).unwrap();
    let topo = topology_check(&r.mesh);
    assert!(topo.watertight && topo.edge_manifold && topo.consistent_winding);
    assert_eq!(r.report.component_count, 1);
    let (lo, hi) = r.mesh.bounding_box().unwrap();
    assert_eq!(lo.z, 0.0);
    assert!(lo.x >= 0.0 && lo.y >= 0.0);
    assert!(hi.x <= 150.0 && hi.y <= 150.0 && hi.z <= 200.0);

    let grids = brick_grids(&spec).unwrap();
    let slab = grids.solid.slab_below(10.0).unwrap();
    assert_eq!(relative_density(&slab), 1.0);
    assert!(r.report.warnings.is_empty(), "{:?}", r.report.warnings);
}

#[test]
fn full_height_base_is_a_block() {
    let spec = BrickSpec {
        base_height: 200.0,
        ..BrickSpec::default()
    };
    let r = build_brick(&spec).unwrap();
    let want = 150.0 * 150.0 * 200.0;
    assert!((r.report.enclosed_volume - want).abs() / want < 0.005);
    assert!(r.report.watertight);
    assert!(!r.report.has(Warning::MultiComponent));
}

#[test]
fn component_count_matches_flood_fill() {
    let cases = [
        (SurfaceKind::Gyroid, 400.0, BrickMode::Network { t: -0.5 }, 10.0),
        (SurfaceKind::Gyroid, 400.0, BrickMode::Network { t: 0.5 }, 0.0),
        (SurfaceKind::Gyroid, 30.0, BrickMode::Sheet { t: 0.3 }, 0.0),
        (SurfaceKind::SchwarzP, 30.0, BrickMode::Network { t: 0.8 }, 0.0),
        (SurfaceKind::Skeletal2, 30.0, BrickMode::Network { t: 0.0 }, 10.0),
    ];
    let mut multi = 0;
    for (kind, period, mode, base) in cases {
        let spec = BrickSpec {
            base_height: base,
            ..small(kind, period, mode)
        };
        let r = build_brick(&spec).unwrap();
        let oracle = flood_fill_surfaces(&brick_grids(&spec).unwrap().solid);
        assert_eq!(r.report.component_count, oracle, "{kind} {mode:?}");
        assert_eq!(r.report.has(Warning::MultiComponent), oracle > 1);
        multi += (oracle > 1) as usize;
    }
    assert!(multi >= 1);
}

#[test]
fn thin_wall_gate_tracks_nozzle() {
    let base = small(SurfaceKind::Gyroid, 30.0, BrickMode::Sheet { t: 0.01 });
    let r = build_brick(&base).unwrap();
    let lattice = brick_grids(&base).unwrap().lattice;
    assert_eq!(r.report.min_wall_mm, Some(min_wall(&lattice)));
    assert!(r.report.has(Warning::ThinWall));

    let wall = BrickSpec {
        resolution: Some(scaled_resolution(&base.domain_size, 128)),
        ..small(
            SurfaceKind::Gyroid,
            30.0,
            BrickMode::WallTarget {
                target_mm: 1.4,
                tol_mm: 0.05,
            },
        )
    };
    let r = build_brick(&wall).unwrap();
    let w = r.report.min_wall_mm.unwrap();
    assert!((w - 1.4).abs() <= 0.05, "{w}");
    assert!(!r.report.has(Warning::ThinWall));

    // the gate is a strict comparison against twice the nozzle
    let at = BrickSpec {
        nozzle_mm: w / 2.0,
        ..wall.clone()
    };
    assert!(!build_brick(&at).unwrap().report.has(Warning::ThinWall));
    let above = BrickSpec {
        nozzle_mm: w / 2.0 + 1e-6,
        ..wall
    };
    assert!(build_brick(&above).unwrap().report.has(Warning::ThinWall));
}

#[test]
fn density_target_brick_reports_lattice_density() {
    let spec = small(
        SurfaceKind::SchwarzP,
        30.0,
        BrickMode::DensityTarget {
            solid: SolidKind::Network,
            target: 0.5,
            tol: 0.005,
        },
    );
    let r = build_brick(&spec).unwrap();
    let d = r.report.relative_density.unwrap();
    assert!((d - 0.5).abs() <= 0.005);
    assert_eq!(r.solve.unwrap().achieved, d);
    assert_eq!(r.report.solve, r.solve);
}

#[test]
fn every_kind_builds_watertight() {
    // node counts that put grid nodes on symmetry points of the fields
    for n in [33, 41] {
        for kind in SurfaceKind::ALL {
            for mode in [BrickMode::Network { t: 0.0 }, BrickMode::Sheet { t: 0.15 }] {
                let spec = BrickSpec {
                    resolution: Some(scaled_resolution(&Vector3::new(60.0, 60.0, 80.0), n)),
                    ..small(kind, 30.0, mode)
                };
                let r = build_brick(&spec).unwrap_or_else(|e| panic!("{kind} {n} {mode:?}: {e}"));
                assert!(r.report.watertight && r.report.edge_manifold, "{kind}");
                assert!(!r.report.has(Warning::Envelope), "{kind}");
            }
        }
    }
}

#[test]
fn deterministic_output() {
    let spec = small(SurfaceKind::Diamond, 25.0, BrickMode::Sheet { t: 0.35 });
    let a = build_brick(&spec).unwrap();
    let b = build_brick(&spec).unwrap();
    assert_eq!(a.mesh, b.mesh);
    assert_eq!(
        serde_json::to_string(&a.report).unwrap(),
        serde_json::to_string(&b.report).unwrap()
    );
}

#[test]
fn oversize_and_solver_errors_propagate() {
    let spec = BrickSpec {
        domain_size: Vector3::new(150.0, 150.0, 250.0),
        ..BrickSpec::default()
    };
    assert!(matches!(build_brick(&spec), Err(Error::EnvelopeExceeded { .. })));
    let spec = small(
        SurfaceKind::Gyroid,
        30.0,
        BrickMode::DensityTarget {
            solid: SolidKind::Network,
            target: 1.5,
            tol: 0.005,
        },
    );
    let e = build_brick(&spec).unwrap_err();
    assert!(e.is_solver_failure());
    let spec = BrickSpec {
        resolution: Some([600, 600, 600]),
        ..BrickSpec::default()
    };
    assert!(matches!(build_brick(&spec), Err(Error::CapExceeded { .. })));
}
