//! Indexed triangle meshes and vertex welding.

use std::collections::{HashMap, HashSet};

use nalgebra::{Point3, Vector3};

/// Triangles smaller than this (mm²) are treated as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-12;

/// Indexed triangle mesh. Triangles are counter-clockwise seen from outside.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point3<f64>>, triangles: Vec<[u32; 3]>) -> Self {
        TriangleMesh {
            vertices,
            triangles,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn corners(&self, t: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Unnormalized normal; its length is twice the triangle area.
    pub fn cross(&self, t: usize) -> Vector3<f64> {
        let [a, b, c] = self.corners(t);
        (b - a).cross(&(c - a))
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        0.5 * self.cross(t).norm()
    }

    pub fn bounding_box(&self) -> Option<(Point3<f64>, Point3<f64>)> {
        let mut it = self.vertices.iter();
        let first = *it.next()?;
        Some(it.fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p))))
    }

    /// Appends another mesh, offsetting its indices.
    pub fn append(&mut self, other: &TriangleMesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
    }

    pub fn translated(&self, d: Vector3<f64>) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(|p| p + d).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Axis-aligned box `[min, max]` as 12 outward-facing triangles.
    pub fn cuboid(min: Point3<f64>, max: Point3<f64>) -> TriangleMesh {
        let v = (0..8)
            .map(|c| {
                Point3::new(
                    if c & 1 == 0 { min.x } else { max.x },
                    if c & 2 == 0 { min.y } else { max.y },
                    if c & 4 == 0 { min.z } else { max.z },
                )
            })
            .collect();
        let triangles = vec![
            [0, 2, 3], [0, 3, 1], // z = min
            [4, 5, 7], [4, 7, 6], // z = max
            [0, 1, 5], [0, 5, 4], // y = min
            [2, 6, 7], [2, 7, 3], // y = max
            [0, 4, 6], [0, 6, 2], // x = min
            [1, 3, 7], [1, 7, 5], // x = max
        ];
        TriangleMesh::new(v, triangles)
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    /// Union keeping the smaller index as the root.
    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        true
    }
}

fn bits(p: &Point3<f64>) -> [u64; 3] {
    // +0.0 and -0.0 weld together
    [p.x + 0.0, p.y + 0.0, p.z + 0.0].map(f64::to_bits)
}

fn cluster_vertices(vertices: &[Point3<f64>], eps: f64, sets: &mut DisjointSet) {
    if eps <= 0.0 {
        let mut seen: HashMap<[u64; 3], u32> = HashMap::with_capacity(vertices.len());
        for (i, p) in vertices.iter().enumerate() {
            let first = *seen.entry(bits(p)).or_insert(i as u32);
            sets.union(first, i as u32);
        }
        return;
    }
    let eps2 = eps * eps;
    let cell = |p: &Point3<f64>| {
        [
            (p.x / eps).floor() as i64,
            (p.y / eps).floor() as i64,
            (p.z / eps).floor() as i64,
        ]
    };
    let mut buckets: HashMap<[i64; 3], Vec<u32>> = HashMap::with_capacity(vertices.len());
    for (i, p) in vertices.iter().enumerate() {
        let c = cell(p);
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if let Some(list) = buckets.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        for &j in list {
                            if (vertices[j as usize] - p).norm_squared() <= eps2 {
                                sets.union(j, i as u32);
                            }
                        }
                    }
                }
            }
        }
        buckets.entry(c).or_default().push(i as u32);
    }
}

/// Merges vertices closer than `eps`, then removes degenerate triangles and
/// orphan vertices.
///
/// A degenerate triangle whose three indices are distinct is removed by
/// collapsing its shortest edge that passes the link condition, so closed
/// manifold meshes stay closed and manifold; a sliver with no safe edge is
/// kept. Pairs of coincident, oppositely wound triangles left behind by a
/// collapse cancel.
pub fn weld_and_clean(mesh: &TriangleMesh, eps: f64) -> TriangleMesh {
    let n = mesh.vertices.len();
    let mut sets = DisjointSet::new(n);
    cluster_vertices(&mesh.vertices, eps.max(0.0), &mut sets);

    let mut triangles = mesh.triangles.clone();
    loop {
        for t in triangles.iter_mut() {
            for v in t.iter_mut() {
                *v = sets.find(*v);
            }
        }
        triangles.retain(|t| t[0] != t[1] && t[1] != t[2] && t[2] != t[0]);
        cancel_opposite_pairs(&mut triangles);

        let degenerate: Vec<[u32; 3]> = triangles
            .iter()
            .filter(|t| {
                let p = t.map(|i| mesh.vertices[i as usize]);
                0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm() <= DEGENERATE_AREA
            })
            .copied()
            .collect();
        if degenerate.is_empty() {
            break;
        }
        let links = Links::new(&triangles);
        let mut locked: HashSet<u32> = HashSet::new();
        let mut collapsed = false;
        for t in &degenerate {
            let p = t.map(|i| mesh.vertices[i as usize]);
            let mut edges = [(0, 1), (1, 2), (2, 0)];
            edges.sort_by(|x, y| {
                let lx = (p[x.1] - p[x.0]).norm_squared();
                let ly = (p[y.1] - p[y.0]).norm_squared();
                lx.total_cmp(&ly)
            });
            for (i, j) in edges {
                let (a, b) = (t[i], t[j]);
                if locked.contains(&a) || locked.contains(&b) || !links.collapse_is_safe(a, b) {
                    continue;
                }
                // neighbourhoods change after a collapse; revisit them next pass
                for v in [a, b] {
                    locked.insert(v);
                    locked.extend(links.neighbours(v));
                }
                collapsed |= sets.union(a, b);
                break;
            }
        }
        if !collapsed {
            break;
        }
    }

    let mut used = vec![false; n];
    for t in &triangles {
        for &v in t {
            used[v as usize] = true;
        }
    }
    let mut remap = vec![u32::MAX; n];
    let mut vertices = Vec::new();
    for i in (0..n).filter(|&i| used[i]) {
        remap[i] = vertices.len() as u32;
        vertices.push(mesh.vertices[i]);
    }
    let triangles = triangles
        .into_iter()
        .map(|t| t.map(|v| remap[v as usize]))
        .collect();
    TriangleMesh {
        vertices,
        triangles,
    }
}

/// Vertex adjacency of a triangle list.
struct Links {
    neighbours: HashMap<u32, HashSet<u32>>,
    opposite: HashMap<(u32, u32), Vec<u32>>,
}

impl Links {
    fn new(triangles: &[[u32; 3]]) -> Self {
        let mut neighbours: HashMap<u32, HashSet<u32>> = HashMap::new();
        let mut opposite: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
        for t in triangles {
            for e in 0..3 {
                let (a, b, c) = (t[e], t[(e + 1) % 3], t[(e + 2) % 3]);
                neighbours.entry(a).or_default().insert(b);
                neighbours.entry(b).or_default().insert(a);
                opposite.entry((a.min(b), a.max(b))).or_default().push(c);
            }
        }
        Links {
            neighbours,
            opposite,
        }
    }

    fn neighbours(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        self.neighbours.get(&v).into_iter().flatten().copied()
    }

    /// Merging `a` and `b` keeps the surface manifold when their common
    /// neighbours are exactly the apexes of the triangles on edge `ab`.
    fn collapse_is_safe(&self, a: u32, b: u32) -> bool {
        let Some(apexes) = self.opposite.get(&(a.min(b), a.max(b))) else {
            return false;
        };
        let (Some(na), Some(nb)) = (self.neighbours.get(&a), self.neighbours.get(&b)) else {
            return false;
        };
        let common: HashSet<u32> = na.intersection(nb).copied().collect();
        let apex_set: HashSet<u32> = apexes.iter().copied().collect();
        apexes.len() <= 2 && apex_set.len() == apexes.len() && common == apex_set
    }
}

/// Default welding tolerance: `1e-6` of the bounding-box diagonal.
pub fn default_weld_eps(mesh: &TriangleMesh) -> f64 {
    mesh.bounding_box()
        .map(|(lo, hi)| 1e-6 * (hi - lo).norm())
        .unwrap_or(0.0)
}

fn canonical(t: &[u32; 3]) -> ([u32; 3], bool) {
    // rotate so the smallest index leads; report the winding parity
    let r = if t[0] < t[1] && t[0] < t[2] {
        *t
    } else if t[1] < t[2] {
        [t[1], t[2], t[0]]
    } else {
        [t[2], t[0], t[1]]
    };
    if r[1] < r[2] {
        (r, true)
    } else {
        ([r[0], r[2], r[1]], false)
    }
}

fn cancel_opposite_pairs(triangles: &mut Vec<[u32; 3]>) {
    let mut by_key: HashMap<[u32; 3], (Vec<usize>, Vec<usize>)> = HashMap::new();
    for (i, t) in triangles.iter().enumerate() {
        let (key, even) = canonical(t);
        let e = by_key.entry(key).or_default();
        if even {
            e.0.push(i);
        } else {
            e.1.push(i);
        }
    }
    let mut dead = HashSet::new();
    for (_, (even, odd)) in by_key {
        for (a, b) in even.iter().zip(odd.iter()) {
            dead.insert(*a);
            dead.insert(*b);
        }
    }
    if dead.is_empty() {
        return;
    }
    let mut i = 0;
    triangles.retain(|_| {
        let keep = !dead.contains(&i);
        i += 1;
        keep
    });
}
