//! Marching-cubes extraction of the zero level set and boundary capping.
//!
//! The 256-case triangle table is generated once from the cube topology.
//! On every cube face the contour separates the inside (negative) corners;
//! when a face is ambiguous (two diagonal inside corners) each inside corner
//! is cut off on its own. Neighbouring cubes see identical face signs and so
//! produce identical face segments, which makes the extracted surface crack
//! free. Boundary caps use the same face rule, so a capped mesh is closed.

use std::collections::HashMap;
use std::sync::OnceLock;

use nalgebra::Point3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::VoxelGrid;
use crate::mesh::TriangleMesh;

/// Cube corner `c` sits at offset `(c & 1, (c >> 1) & 1, (c >> 2) & 1)`.
fn corner_offset(c: usize) -> [usize; 3] {
    [c & 1, (c >> 1) & 1, (c >> 2) & 1]
}

/// Cube edges as (lower corner, upper corner); the axis is the differing bit.
const EDGES: [(usize, usize); 12] = [
    (0, 1), (2, 3), (4, 5), (6, 7),
    (0, 2), (1, 3), (4, 6), (5, 7),
    (0, 4), (1, 5), (2, 6), (3, 7),
];

fn edge_axis(e: usize) -> usize {
    e / 4
}

fn edge_between(a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    EDGES.iter().position(|&(x, y)| x == a && y == b).expect("corners share an edge")
}

/// The four corners of each cube face, counter-clockwise seen from outside.
fn cube_faces() -> [[usize; 4]; 6] {
    let mut faces = [[0; 4]; 6];
    for axis in 0..3 {
        for side in 0..2 {
            let u = (axis + 1) % 3;
            let v = (axis + 2) % 3;
            // (u, v) is right-handed around +axis
            let ring = [(0, 0), (1, 0), (1, 1), (0, 1)];
            let mut quad = [0; 4];
            for (slot, &(du, dv)) in ring.iter().enumerate() {
                let mut c = side << axis;
                c |= du << u;
                c |= dv << v;
                quad[slot] = c;
            }
            if side == 0 {
                quad.reverse();
            }
            faces[axis * 2 + side] = quad;
        }
    }
    faces
}

/// For a face ring with inside flags, pairs every exit edge slot `i`
/// (inside → outside going round) with the entry slot that closes the
/// inside region on its own, searching backwards.
fn face_segments(inside: [bool; 4]) -> Vec<(usize, usize)> {
    let exit = |i: usize| inside[i] && !inside[(i + 1) % 4];
    let entry = |i: usize| !inside[i] && inside[(i + 1) % 4];
    (0..4)
        .filter(|&i| exit(i))
        .map(|i| {
            let j = (1..4)
                .map(|back| (i + 4 - back) % 4)
                .find(|&j| entry(j))
                .expect("every exit has a matching entry");
            (i, j)
        })
        .collect()
}

/// Table entries at or above this refer to the centroid of ring
/// `entry - RING_CENTRE`.
const RING_CENTRE: u8 = 12;

struct CaseTable {
    triangles: Vec<Vec<[u8; 3]>>,
    rings: Vec<Vec<Vec<u8>>>,
}

fn share_face(faces: &[[usize; 4]; 6], a: u8, b: u8) -> bool {
    let (ea, eb) = (EDGES[a as usize], EDGES[b as usize]);
    faces.iter().any(|q| {
        let on = |(x, y): (usize, usize)| q.contains(&x) && q.contains(&y);
        on(ea) && on(eb)
    })
}

/// Fans a ring from a vertex whose chords all cross the cube interior. A
/// chord lying in a cube face could coincide with a chord of the neighbour
/// cube and make that edge non-manifold; when every apex has such a chord
/// the ring is fanned around its centroid instead.
fn triangulate_ring(faces: &[[usize; 4]; 6], ring: &[u8], ring_index: usize, out: &mut Vec<[u8; 3]>) {
    let n = ring.len();
    let apex = (0..n).find(|&s| {
        (2..n - 1).all(|d| !share_face(faces, ring[s], ring[(s + d) % n]))
    });
    match apex {
        Some(s) => {
            for d in 1..n - 1 {
                out.push([ring[s], ring[(s + d + 1) % n], ring[(s + d) % n]]);
            }
        }
        None => {
            let c = RING_CENTRE + ring_index as u8;
            for i in 0..n {
                out.push([c, ring[(i + 1) % n], ring[i]]);
            }
        }
    }
}

fn build_table() -> CaseTable {
    let faces = cube_faces();
    let mut table = CaseTable {
        triangles: Vec::with_capacity(256),
        rings: Vec::with_capacity(256),
    };
    for case in 0..256usize {
        let inside = |c: usize| (case >> c) & 1 == 1;
        let mut next = [usize::MAX; 12];
        for quad in &faces {
            let flags = quad.map(inside);
            for (i, j) in face_segments(flags) {
                let from = edge_between(quad[i], quad[(i + 1) % 4]);
                let to = edge_between(quad[j], quad[(j + 1) % 4]);
                next[from] = to;
            }
        }
        let mut visited = [false; 12];
        let mut rings = Vec::new();
        for start in 0..12 {
            if next[start] == usize::MAX || visited[start] {
                continue;
            }
            let mut ring = Vec::new();
            let mut e = start;
            while !visited[e] {
                visited[e] = true;
                ring.push(e as u8);
                e = next[e];
            }
            rings.push(ring);
        }
        // each ring runs with the inside on its left seen from outside the
        // cube, i.e. clockwise around the outward (increasing) direction,
        // so it is fanned in reverse
        let mut triangles = Vec::new();
        for (r, ring) in rings.iter().enumerate() {
            triangulate_ring(&faces, ring, r, &mut triangles);
        }
        table.triangles.push(triangles);
        table.rings.push(rings);
    }
    table
}

fn case_table() -> &'static CaseTable {
    static TABLE: OnceLock<CaseTable> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

/// Triangles for each of the 256 corner sign cases. Entries below 12 are
/// cube edges; larger entries stand for the centroid of a contour ring.
pub fn triangle_table() -> &'static [Vec<[u8; 3]>] {
    &case_table().triangles
}

/// Values as seen by the mesher: magnitudes below `1e-9` of the value range
/// are pushed to `+1e-9·range`, so no crossing falls exactly on a node.
pub fn prepared_values(grid: &VoxelGrid) -> Vec<f64> {
    let (lo, hi) = grid.value_range();
    let range = hi - lo;
    let nudge = if range > 0.0 { 1e-9 * range } else { 1e-9 };
    grid.values
        .iter()
        .map(|&v| if v.abs() < nudge { nudge } else { v })
        .collect()
}

fn stride(grid: &VoxelGrid, axis: usize) -> usize {
    match axis {
        0 => 1,
        1 => grid.dims[0],
        _ => grid.dims[0] * grid.dims[1],
    }
}

#[inline]
fn edge_key(node: usize, axis: usize) -> u64 {
    (node as u64) * 4 + axis as u64
}

#[inline]
fn node_key(node: usize) -> u64 {
    (node as u64) * 4 + 3
}

/// Smallest distance kept between a crossing and a grid node: a few
/// single-precision steps at the largest coordinate, so vertices stay
/// distinct once written to STL.
fn node_separation(grid: &VoxelGrid) -> f64 {
    let reach = grid.origin.coords.amax().max(grid.max_corner().coords.amax());
    4.0 * f32::EPSILON as f64 * reach.max(f64::MIN_POSITIVE)
}

/// Position for a vertex key; edge crossings interpolate linearly from the
/// lower node.
fn key_position(grid: &VoxelGrid, vals: &[f64], key: u64) -> Point3<f64> {
    let node = (key / 4) as usize;
    let axis = (key % 4) as usize;
    let [i, j, k] = grid.unravel(node);
    let pa = grid.position(i, j, k);
    if axis == 3 {
        return pa;
    }
    let mut upper = [i, j, k];
    upper[axis] += 1;
    let pb = grid.position(upper[0], upper[1], upper[2]);
    let va = vals[node];
    let vb = vals[node + stride(grid, axis)];
    let span = (pb[axis] - pa[axis]).abs();
    let margin = (node_separation(grid) / span).min(0.25);
    let t = (va / (va - vb)).clamp(margin, 1.0 - margin);
    let mut p = pa;
    p[axis] = pa[axis] + t * (pb[axis] - pa[axis]);
    p
}

/// Marks keys of ring-centroid vertices, which have no grid edge.
const CENTRE_FLAG: u64 = 1 << 63;

/// Turns key triangles into an indexed mesh, numbering vertices in order
/// of first use. Centroid keys take their position from `centres`.
fn assemble(
    grid: &VoxelGrid,
    vals: &[f64],
    keyed: Vec<[u64; 3]>,
    centres: &HashMap<u64, Point3<f64>>,
) -> TriangleMesh {
    let mut ids: HashMap<u64, u32> = HashMap::with_capacity(keyed.len());
    let mut vertices = Vec::new();
    let triangles = keyed
        .into_iter()
        .map(|t| {
            t.map(|key| {
                *ids.entry(key).or_insert_with(|| {
                    let p = if key & CENTRE_FLAG != 0 {
                        centres[&key]
                    } else {
                        key_position(grid, vals, key)
                    };
                    vertices.push(p);
                    (vertices.len() - 1) as u32
                })
            })
        })
        .collect();
    TriangleMesh {
        vertices,
        triangles,
    }
}

/// Extracts the zero level set of an inside-negative grid.
///
/// Normals point toward increasing values. Surfaces reaching the grid
/// boundary are left open; see [`cap_boundary`].
pub fn marching_cubes(grid: &VoxelGrid) -> TriangleMesh {
    let vals = prepared_values(grid);
    let table = case_table();
    let [nx, ny, nz] = grid.dims;
    let corner_nodes: [usize; 8] = std::array::from_fn(|c| {
        let [dx, dy, dz] = corner_offset(c);
        dx + dy * nx + dz * nx * ny
    });

    type Layer = (Vec<[u64; 3]>, Vec<(u64, Point3<f64>)>);
    let layers: Vec<Layer> = (0..nz - 1)
        .into_par_iter()
        .map(|k| {
            let mut out = Vec::new();
            let mut centres = Vec::new();
            for j in 0..ny - 1 {
                for i in 0..nx - 1 {
                    let base = grid.index(i, j, k);
                    let mut case = 0usize;
                    for (c, off) in corner_nodes.iter().enumerate() {
                        if vals[base + off] < 0.0 {
                            case |= 1 << c;
                        }
                    }
                    let cube_start = centres.len();
                    let key_of = |e: u8| {
                        let (lo, _) = EDGES[e as usize];
                        edge_key(base + corner_nodes[lo], edge_axis(e as usize))
                    };
                    for tri in &table.triangles[case] {
                        out.push(tri.map(|e| {
                            if e < RING_CENTRE {
                                return key_of(e);
                            }
                            let r = (e - RING_CENTRE) as usize;
                            let key = CENTRE_FLAG | (base as u64 * 4 + r as u64);
                            if !centres[cube_start..].iter().any(|(k, _)| *k == key) {
                                let ring = &table.rings[case][r];
                                let sum = ring.iter().fold(nalgebra::Vector3::zeros(), |acc, &e| {
                                    acc + key_position(grid, &vals, key_of(e)).coords
                                });
                                centres.push((key, Point3::from(sum / ring.len() as f64)));
                            }
                            key
                        }));
                    }
                }
            }
            (out, centres)
        })
        .collect();

    let mut centres = HashMap::new();
    let mut keyed = Vec::new();
    for (tris, cs) in layers {
        keyed.extend(tris);
        centres.extend(cs);
    }
    assemble(grid, &vals, keyed, &centres)
}

/// Cap polygons over the inside regions of the six grid faces, as key
/// triangles wound outward.
fn cap_triangles(grid: &VoxelGrid, vals: &[f64]) -> Vec<[u64; 3]> {
    let mut out = Vec::new();
    for axis in 0..3 {
        let u = (axis + 1) % 3;
        let v = (axis + 2) % 3;
        for side in 0..2 {
            let fixed = if side == 0 { 0 } else { grid.dims[axis] - 1 };
            let mut ring = [(0, 0), (1, 0), (1, 1), (0, 1)];
            if side == 0 {
                ring.reverse();
            }
            for iv in 0..grid.dims[v] - 1 {
                for iu in 0..grid.dims[u] - 1 {
                    let nodes = ring.map(|(du, dv)| {
                        let mut idx = [0; 3];
                        idx[axis] = fixed;
                        idx[u] = iu + du;
                        idx[v] = iv + dv;
                        grid.index(idx[0], idx[1], idx[2])
                    });
                    let inside = nodes.map(|n| vals[n] < 0.0);
                    if !inside.iter().any(|&b| b) {
                        continue;
                    }
                    let side_key = |i: usize| {
                        let (a, b) = (nodes[i], nodes[(i + 1) % 4]);
                        let lo = a.min(b);
                        let ax = if a.abs_diff(b) == stride(grid, u) { u } else { v };
                        edge_key(lo, ax)
                    };
                    for poly in square_polygons(inside) {
                        let keys: Vec<u64> = poly
                            .iter()
                            .map(|item| match *item {
                                SquareItem::Corner(i) => node_key(nodes[i]),
                                SquareItem::Crossing(i) => side_key(i),
                            })
                            .collect();
                        for i in 1..keys.len() - 1 {
                            out.push([keys[0], keys[i], keys[i + 1]]);
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SquareItem {
    Corner(usize),
    /// Crossing on the side from corner `i` to corner `i + 1`.
    Crossing(usize),
}

/// Inside polygons of one face square, counter-clockwise, using the same
/// pairing rule as the cube faces.
fn square_polygons(inside: [bool; 4]) -> Vec<Vec<SquareItem>> {
    let segments = face_segments(inside);
    let succ = |item: SquareItem| -> SquareItem {
        match item {
            SquareItem::Corner(i) => {
                let n = (i + 1) % 4;
                if inside[n] {
                    SquareItem::Corner(n)
                } else {
                    SquareItem::Crossing(i)
                }
            }
            SquareItem::Crossing(i) if inside[i] => {
                let (_, j) = *segments.iter().find(|(e, _)| *e == i).unwrap();
                SquareItem::Crossing(j)
            }
            SquareItem::Crossing(i) => SquareItem::Corner((i + 1) % 4),
        }
    };
    let mut done = Vec::new();
    let mut polys = Vec::new();
    for start in (0..4).filter(|&i| inside[i]).map(SquareItem::Corner) {
        if done.contains(&start) {
            continue;
        }
        let mut poly = Vec::new();
        let mut it = start;
        loop {
            poly.push(it);
            done.push(it);
            it = succ(it);
            if it == start {
                break;
            }
        }
        polys.push(poly);
    }
    polys
}

/// Closes a mesh extracted from `grid` with cap faces on the grid boundary.
///
/// Cap vertices that coincide exactly with mesh vertices are shared. Fails
/// with [`Error::CapFailure`] unless every edge of the result belongs to
/// exactly two triangles.
pub fn cap_boundary(grid: &VoxelGrid, mesh: &TriangleMesh) -> Result<TriangleMesh> {
    let vals = prepared_values(grid);
    let caps = cap_triangles(grid, &vals);
    let mut out = mesh.clone();
    if !caps.is_empty() {
        let cap_mesh = assemble(grid, &vals, caps, &HashMap::new());
        let mut by_pos: HashMap<[u64; 3], u32> = HashMap::with_capacity(out.vertices.len());
        for (i, p) in out.vertices.iter().enumerate() {
            by_pos.entry(p.coords.map(|c| (c + 0.0).to_bits()).into()).or_insert(i as u32);
        }
        let remap: Vec<u32> = cap_mesh
            .vertices
            .iter()
            .map(|p| {
                *by_pos.entry(p.coords.map(|c| (c + 0.0).to_bits()).into()).or_insert_with(|| {
                    out.vertices.push(*p);
                    (out.vertices.len() - 1) as u32
                })
            })
            .collect();
        out.triangles
            .extend(cap_mesh.triangles.iter().map(|t| t.map(|i| remap[i as usize])));
    }
    let mut uses: HashMap<(u32, u32), u32> = HashMap::with_capacity(out.triangles.len() * 2);
    for t in &out.triangles {
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            *uses.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let bad = uses.values().filter(|&&n| n != 2).count();
    if bad > 0 {
        return Err(Error::CapFailure(format!("{bad} edges not shared by exactly two triangles")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, Domain};
    use crate::metrics::{area_volume, signed_volume, topology_check};
    use approx::assert_relative_eq;
    use nalgebra::Vector3;
    use proptest::prelude::*;

    #[test]
    fn faces_are_outward_ccw() {
        for (f, quad) in cube_faces().iter().enumerate() {
            let p = quad.map(|c| {
                let o = corner_offset(c);
                Vector3::new(o[0] as f64, o[1] as f64, o[2] as f64)
            });
            let n = (p[1] - p[0]).cross(&(p[2] - p[0]));
            let centre = (p[0] + p[1] + p[2] + p[3]) / 4.0;
            assert!(n.dot(&(centre - Vector3::repeat(0.5))) > 0.0, "face {f}");
        }
    }

    #[test]
    fn table_basics() {
        let t = triangle_table();
        assert!(t[0].is_empty() && t[255].is_empty());
        assert_eq!(t[1].len(), 1);
        // every crossing edge appears in the table entry
        for (case, tris) in t.iter().enumerate() {
            for (e, &(a, b)) in EDGES.iter().enumerate() {
                let crosses = ((case >> a) & 1) != ((case >> b) & 1);
                let used = tris.iter().any(|tr| tr.contains(&(e as u8)));
                assert!(tris.iter().flatten().all(|&x| x < RING_CENTRE + 4));
                assert_eq!(crosses, used, "case {case} edge {e}");
            }
        }
    }

    #[test]
    fn single_corner_normal_points_away_from_corner() {
        let tri = triangle_table()[1][0];
        let mid = |e: u8| {
            let (a, b) = EDGES[e as usize];
            let (oa, ob) = (corner_offset(a), corner_offset(b));
            Vector3::new(
                (oa[0] + ob[0]) as f64 / 2.0,
                (oa[1] + ob[1]) as f64 / 2.0,
                (oa[2] + ob[2]) as f64 / 2.0,
            )
        };
        let [a, b, c] = tri.map(mid);
        assert!((b - a).cross(&(c - a)).dot(&Vector3::repeat(1.0)) > 0.0);
    }

    #[test]
    fn ambiguous_square_keeps_corners_apart() {
        let polys = square_polygons([true, false, true, false]);
        assert_eq!(polys.len(), 2);
        assert!(polys.iter().all(|p| p.len() == 3));
        assert_eq!(square_polygons([true; 4]), vec![(0..4).map(SquareItem::Corner).collect::<Vec<_>>()]);
        assert_eq!(square_polygons([true, true, true, false])[0].len(), 5);
    }

    #[test]
    fn all_positive_grid_is_empty() {
        let d = Domain::from_size(Vector3::repeat(1.0)).unwrap();
        let g = sample(&|_: &Point3<f64>| 1.0, &d, [5, 5, 5]).unwrap();
        assert!(marching_cubes(&g).is_empty());
        assert!(cap_boundary(&g, &marching_cubes(&g)).unwrap().is_empty());
    }

    #[test]
    fn plane_is_exact() {
        let d = Domain::from_size(Vector3::repeat(1.0)).unwrap();
        let g = sample(&|p: &Point3<f64>| p.z - 0.5, &d, [17, 17, 17]).unwrap();
        let m = marching_cubes(&g);
        assert!(m.vertices.iter().all(|p| (p.z - 0.5).abs() < 1e-6));
        let area: f64 = (0..m.triangles.len()).map(|t| m.triangle_area(t)).sum();
        assert_relative_eq!(area, 1.0, epsilon = 1e-6);
        // normals face +z, toward increasing values
        assert!((0..m.triangles.len()).all(|t| m.cross(t).z > 0.0));
    }

    #[test]
    fn half_space_caps_to_prism() {
        let d = Domain::from_size(Vector3::repeat(1.0)).unwrap();
        let g = sample(&|p: &Point3<f64>| p.z - 0.5, &d, [17, 17, 17]).unwrap();
        let capped = cap_boundary(&g, &marching_cubes(&g)).unwrap();
        let (_, vol) = area_volume(&capped);
        assert_relative_eq!(vol, 0.5, epsilon = 1e-6);
        assert!(signed_volume(&capped) > 0.0);
        assert!(topology_check(&capped).watertight);
    }

    #[test]
    fn interior_sphere_unchanged_by_capping() {
        let d = Domain::new(Point3::new(-1.5, -1.5, -1.5), Point3::new(1.5, 1.5, 1.5)).unwrap();
        let g = sample(&|p: &Point3<f64>| p.coords.norm() - 1.0, &d, [24, 24, 24]).unwrap();
        let m = marching_cubes(&g);
        assert_eq!(cap_boundary(&g, &m).unwrap(), m);
    }

    #[test]
    fn uncappable_mesh_is_rejected() {
        let d = Domain::from_size(Vector3::repeat(1.0)).unwrap();
        let g = sample(&|p: &Point3<f64>| p.z - 0.5, &d, [5, 5, 5]).unwrap();
        let mut m = marching_cubes(&g);
        m.triangles.pop();
        assert!(matches!(cap_boundary(&g, &m), Err(Error::CapFailure(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        /// Arbitrary sign patterns, including exact zeros and tiny values,
        /// always cap to a closed, consistently wound, positive solid.
        #[test]
        fn random_grids_cap_closed(
            dims in (2usize..6, 2usize..6, 2usize..6),
            seed in proptest::collection::vec(prop_oneof![
                Just(0.0), Just(1e-13), Just(-1e-13), -1.0f64..1.0
            ], 216),
        ) {
            let n = dims.0 * dims.1 * dims.2;
            let g = VoxelGrid::from_values(
                [dims.0, dims.1, dims.2],
                Point3::origin(),
                Vector3::new(1.0, 0.5, 2.0),
                seed[..n].to_vec(),
            ).unwrap();
            let capped = cap_boundary(&g, &marching_cubes(&g)).unwrap();
            let topo = topology_check(&capped);
            prop_assert!(topo.edge_manifold);
            prop_assert!(topo.consistent_winding);
            if !capped.is_empty() {
                prop_assert!(topo.watertight);
                prop_assert!(signed_volume(&capped) > 0.0);
            }
        }
    }
}
