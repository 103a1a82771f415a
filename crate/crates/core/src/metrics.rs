//! Area, volume, density, topology, overhang and wall-thickness measures.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::grid::VoxelGrid;
use crate::mesh::TriangleMesh;
use crate::solver::SolveResult;

/// Default self-supporting angle for FDM printing, degrees from horizontal.
pub const DEFAULT_OVERHANG_DEG: f64 = 45.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Warning {
    ThinWall,
    Overhang,
    MultiComponent,
    Envelope,
    NotWatertight,
}

impl Warning {
    pub fn code(self) -> &'static str {
        match self {
            Warning::ThinWall => "THIN_WALL",
            Warning::Overhang => "OVERHANG",
            Warning::MultiComponent => "MULTI_COMPONENT",
            Warning::Envelope => "ENVELOPE",
            Warning::NotWatertight => "NOT_WATERTIGHT",
        }
    }
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

/// Measured properties of a mesh and, when available, of its source grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshReport {
    pub surface_area: f64,
    pub enclosed_volume: f64,
    /// `None` when no grid is available (e.g. inspecting a mesh file).
    pub relative_density: Option<f64>,
    pub watertight: bool,
    pub edge_manifold: bool,
    pub consistent_winding: bool,
    pub component_count: usize,
    pub overhang_area_fraction: f64,
    pub min_wall_mm: Option<f64>,
    pub warnings: Vec<Warning>,
    #[serde(default)]
    pub solve: Option<SolveResult>,
}

impl MeshReport {
    /// Mesh-only measurements; grid-based fields are left empty.
    pub fn for_mesh(mesh: &TriangleMesh) -> MeshReport {
        let (surface_area, enclosed_volume) = area_volume(mesh);
        let topo = topology_check(mesh);
        let mut warnings = Vec::new();
        if !topo.watertight {
            warnings.push(Warning::NotWatertight);
        }
        MeshReport {
            surface_area,
            enclosed_volume,
            relative_density: None,
            watertight: topo.watertight,
            edge_manifold: topo.edge_manifold,
            consistent_winding: topo.consistent_winding,
            component_count: topo.component_count,
            overhang_area_fraction: overhang_fraction(mesh, DEFAULT_OVERHANG_DEG),
            min_wall_mm: None,
            warnings,
            solve: None,
        }
    }

    pub fn has(&self, w: Warning) -> bool {
        self.warnings.contains(&w)
    }
}

/// Divergence-theorem volume; positive for outward-wound closed meshes.
pub fn signed_volume(mesh: &TriangleMesh) -> f64 {
    mesh.triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| mesh.vertices[i as usize].coords);
            a.dot(&b.cross(&c))
        })
        .sum::<f64>()
        / 6.0
}

pub fn surface_area(mesh: &TriangleMesh) -> f64 {
    (0..mesh.triangles.len()).map(|t| mesh.triangle_area(t)).sum()
}

/// `(area mm², |volume| mm³)`. The volume is only meaningful for closed
/// meshes; [`MeshReport::for_mesh`] flags open ones.
pub fn area_volume(mesh: &TriangleMesh) -> (f64, f64) {
    (surface_area(mesh), signed_volume(mesh).abs())
}

/// Solid fraction of a grid with trapezoid weights on boundary nodes.
pub fn relative_density(grid: &VoxelGrid) -> f64 {
    let mut inside = 0.0;
    let mut total = 0.0;
    let w = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    let [nx, ny, nz] = grid.dims;
    for k in 0..nz {
        let wk = w(k, nz);
        for j in 0..ny {
            let wjk = wk * w(j, ny);
            let row = grid.index(0, j, k);
            for i in 0..nx {
                let wt = wjk * w(i, nx);
                total += wt;
                if grid.values[row + i] <= 0.0 {
                    inside += wt;
                }
            }
        }
    }
    inside / total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub watertight: bool,
    pub edge_manifold: bool,
    pub consistent_winding: bool,
    pub component_count: usize,
}

#[derive(Default, Clone, Copy)]
struct EdgeUse {
    forward: u32,
    backward: u32,
}

fn edge_uses(mesh: &TriangleMesh) -> HashMap<(u32, u32), EdgeUse> {
    let mut uses: HashMap<(u32, u32), EdgeUse> = HashMap::with_capacity(mesh.triangles.len() * 2);
    for t in &mesh.triangles {
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            let u = uses.entry((a.min(b), a.max(b))).or_default();
            if a < b {
                u.forward += 1;
            } else {
                u.backward += 1;
            }
        }
    }
    uses
}

/// Edge-adjacency checks. `edge_manifold` allows boundary edges;
/// `watertight` requires every edge in exactly two oppositely wound
/// triangles.
pub fn topology_check(mesh: &TriangleMesh) -> Topology {
    let uses = edge_uses(mesh);
    let edge_manifold = uses.values().all(|u| u.forward + u.backward <= 2);
    let consistent_winding = uses.values().all(|u| u.forward <= 1 && u.backward <= 1);
    let closed = uses.values().all(|u| u.forward == 1 && u.backward == 1);
    Topology {
        watertight: !mesh.triangles.is_empty() && closed,
        edge_manifold,
        consistent_winding,
        component_count: component_count(mesh),
    }
}

pub fn component_count(mesh: &TriangleMesh) -> usize {
    let n = mesh.vertices.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut used = vec![false; n];
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| i as usize);
        used[a] = true;
        used[b] = true;
        used[c] = true;
        for (x, y) in [(a, b), (b, c)] {
            let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
            if rx != ry {
                parent[rx.max(ry)] = rx.min(ry);
            }
        }
    }
    (0..n).filter(|&i| used[i] && find(&mut parent, i) == i).count()
}

/// `V − E + F` over referenced vertices.
pub fn euler_characteristic(mesh: &TriangleMesh) -> i64 {
    let mut used = vec![false; mesh.vertices.len()];
    for t in &mesh.triangles {
        for &v in t {
            used[v as usize] = true;
        }
    }
    let v = used.iter().filter(|&&u| u).count() as i64;
    let e = edge_uses(mesh).len() as i64;
    v - e + mesh.triangles.len() as i64
}

/// Fraction of surface area facing downward more steeply than
/// `threshold_deg` from horizontal, with +z as the build direction.
pub fn overhang_fraction(mesh: &TriangleMesh, threshold_deg: f64) -> f64 {
    overhang_fraction_on_bed(mesh, threshold_deg, None)
}

/// Like [`overhang_fraction`], but triangles lying flat on the build plate
/// at `bed_z` count as supported.
pub fn overhang_fraction_on_bed(mesh: &TriangleMesh, threshold_deg: f64, bed_z: Option<f64>) -> f64 {
    let threshold = threshold_deg.clamp(f64::EPSILON, 90.0 - f64::EPSILON).to_radians();
    let limit = threshold.sin();
    let (mut down, mut total) = (0.0, 0.0);
    for t in 0..mesh.triangles.len() {
        let n = mesh.cross(t);
        let len = n.norm();
        if len == 0.0 {
            continue;
        }
        total += len;
        let on_bed = bed_z.is_some_and(|z| {
            mesh.triangles[t].iter().all(|&i| mesh.vertices[i as usize].z == z)
        });
        if !on_bed && -n.z / len > limit {
            down += len;
        }
    }
    if total > 0.0 {
        (down / total).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Wall thickness (mm) as twice the deepest erosion distance of the
/// inside nodes.
///
/// Erosion distance runs over the 6-neighbourhood: nodes next to an outside
/// node start at the interpolated distance to the zero crossing, nodes on
/// the grid boundary start at zero (the solid is capped there), and every
/// step adds the spacing along that axis. The result is the diameter of the
/// largest inscribed ball, accurate to about one voxel. Empty grids give 0.
pub fn min_wall(grid: &VoxelGrid) -> f64 {
    let [nx, ny, _] = grid.dims;
    let vals = &grid.values;
    let strides = [1, nx, nx * ny];
    let h = [grid.spacing.x, grid.spacing.y, grid.spacing.z];
    let mut dist = vec![f64::INFINITY; vals.len()];
    let mut heap = BinaryHeap::new();

    for idx in 0..vals.len() {
        let v = vals[idx];
        if v > 0.0 {
            continue;
        }
        let ijk = grid.unravel(idx);
        let mut d = f64::INFINITY;
        for axis in 0..3 {
            for dir in [-1i64, 1] {
                let coord = ijk[axis] as i64 + dir;
                if coord < 0 || coord >= grid.dims[axis] as i64 {
                    d = 0.0;
                    continue;
                }
                let nb = if dir < 0 { idx - strides[axis] } else { idx + strides[axis] };
                let w = vals[nb];
                if w > 0.0 {
                    d = d.min(-v / (w - v) * h[axis]);
                }
            }
        }
        if d.is_finite() {
            dist[idx] = d;
            // non-negative floats order like their bit patterns
            heap.push(Reverse((d.to_bits(), idx)));
        }
    }

    while let Some(Reverse((bits, idx))) = heap.pop() {
        let d = f64::from_bits(bits);
        if d > dist[idx] {
            continue;
        }
        let ijk = grid.unravel(idx);
        for axis in 0..3 {
            for dir in [-1i64, 1] {
                let coord = ijk[axis] as i64 + dir;
                if coord < 0 || coord >= grid.dims[axis] as i64 {
                    continue;
                }
                let nb = if dir < 0 { idx - strides[axis] } else { idx + strides[axis] };
                if vals[nb] > 0.0 {
                    continue;
                }
                let nd = d + h[axis];
                if nd < dist[nb] {
                    dist[nb] = nd;
                    heap.push(Reverse((nd.to_bits(), nb)));
                }
            }
        }
    }

    2.0 * dist
        .iter()
        .copied()
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, transform_inside_negative, Domain, SolidMode};
    use crate::field::{FieldSpec, SurfaceKind};
    use approx::assert_relative_eq;
    use nalgebra::{Point3, Rotation3, Vector3};

    fn cube(s: f64) -> TriangleMesh {
        TriangleMesh::cuboid(Point3::origin(), Point3::new(s, s, s))
    }

    #[test]
    fn unit_cube_area_volume() {
        let (a, v) = area_volume(&cube(1.0));
        assert_relative_eq!(a, 6.0);
        assert_relative_eq!(v, 1.0);
        assert!(signed_volume(&cube(1.0)) > 0.0);
    }

    #[test]
    fn mirror_keeps_area_and_volume() {
        let mut m = cube(2.0);
        for p in &mut m.vertices {
            p.x = -p.x;
        }
        let (a, v) = area_volume(&m);
        assert_relative_eq!(a, 24.0);
        assert_relative_eq!(v, 8.0);
    }

    #[test]
    fn rotation_invariance() {
        let m = cube(3.0).translated(Vector3::new(1.0, -2.0, 0.5));
        let r = Rotation3::from_euler_angles(0.3, -1.1, 2.0);
        let rotated = TriangleMesh::new(m.vertices.iter().map(|p| r * p).collect(), m.triangles.clone());
        let (a0, v0) = area_volume(&m);
        let (a1, v1) = area_volume(&rotated);
        assert_relative_eq!(a0, a1, max_relative = 1e-6);
        assert_relative_eq!(v0, v1, max_relative = 1e-6);
    }

    #[test]
    fn topology_cases() {
        let t = topology_check(&cube(1.0));
        assert_eq!(
            t,
            Topology { watertight: true, edge_manifold: true, consistent_winding: true, component_count: 1 }
        );
        let mut open = cube(1.0);
        open.triangles.truncate(10);
        let t = topology_check(&open);
        assert!(!t.watertight && t.consistent_winding);
        assert_eq!(t.component_count, 1);

        let mut two = cube(1.0);
        two.append(&cube(1.0).translated(Vector3::new(5.0, 0.0, 0.0)));
        assert_eq!(topology_check(&two).component_count, 2);
        assert!(topology_check(&two).watertight);

        let mut flipped = cube(1.0);
        flipped.triangles[0].swap(1, 2);
        assert!(!topology_check(&flipped).consistent_winding);
        assert!(!topology_check(&flipped).watertight);
        assert!(!topology_check(&TriangleMesh::default()).watertight);
    }

    #[test]
    fn euler_of_cube_is_two() {
        assert_eq!(euler_characteristic(&cube(1.0)), 2);
    }

    #[test]
    fn overhang_cases() {
        assert_relative_eq!(overhang_fraction(&cube(1.0), 45.0), 1.0 / 6.0, epsilon = 1e-12);
        let plate = TriangleMesh::cuboid(Point3::origin(), Point3::new(100.0, 100.0, 1e-6));
        assert_relative_eq!(overhang_fraction(&plate, 45.0), 0.5, epsilon = 1e-6);
        assert_eq!(overhang_fraction(&TriangleMesh::default(), 45.0), 0.0);
    }

    #[test]
    fn density_weights() {
        let d = Domain::from_size(Vector3::repeat(1.0)).unwrap();
        let all = sample(&|_: &Point3<f64>| -1.0, &d, [4, 5, 6]).unwrap();
        assert_eq!(relative_density(&all), 1.0);
        let half = sample(&|p: &Point3<f64>| p.x - 0.5, &d, [3, 3, 3]).unwrap();
        // nodes at x = 0 (weight ½) and x = 0.5 (weight 1) of total 2
        assert_relative_eq!(relative_density(&half), 0.75);
    }

    fn slab(thick: usize, spacing: f64) -> VoxelGrid {
        let n = 11;
        let lo = (n - thick) / 2;
        let mut vals = vec![1.0; n * n * n];
        for k in lo..lo + thick {
            for j in 0..n {
                for i in 0..n {
                    vals[(k * n + j) * n + i] = -1.0;
                }
            }
        }
        VoxelGrid::from_values([n, n, n], Point3::origin(), Vector3::repeat(spacing), vals).unwrap()
    }

    #[test]
    fn slab_wall() {
        let w = min_wall(&slab(5, 1.0));
        assert!((4.0..=6.0).contains(&w), "{w}");
        assert_relative_eq!(min_wall(&slab(5, 0.5)), 0.5 * w);
    }

    #[test]
    fn empty_grid_has_no_wall() {
        let d = Domain::from_size(Vector3::repeat(1.0)).unwrap();
        let g = sample(&|_: &Point3<f64>| 1.0, &d, [5, 5, 5]).unwrap();
        assert_eq!(min_wall(&g), 0.0);
    }

    #[test]
    fn gyroid_sheet_wall_grows_with_thickness() {
        let f = FieldSpec::new(SurfaceKind::Gyroid, 20.0).unwrap();
        let d = Domain::from_size(Vector3::repeat(20.0)).unwrap();
        let g = sample(&f, &d, [48, 48, 48]).unwrap();
        let walls: Vec<f64> = [0.2, 0.4, 0.8]
            .iter()
            .map(|&t| min_wall(&transform_inside_negative(&g, SolidMode::Sheet { t }).unwrap()))
            .collect();
        assert!(walls[0] < walls[1] && walls[1] < walls[2], "{walls:?}");
    }

    #[test]
    fn report_json_field_names() {
        let r = MeshReport::for_mesh(&cube(1.0));
        let v = serde_json::to_value(&r).unwrap();
        for key in [
            "surface_area", "enclosed_volume", "relative_density", "watertight", "edge_manifold",
            "consistent_winding", "component_count", "overhang_area_fraction", "min_wall_mm", "warnings",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(v["relative_density"].is_null());
        let mut open = cube(1.0);
        open.triangles.pop();
        let r = MeshReport::for_mesh(&open);
        assert_eq!(serde_json::to_value(&r.warnings).unwrap(), serde_json::json!(["NOT_WATERTIGHT"]));
    }
}
