//! Periodic strut graphs: signed distance to a lattice of line segments.
//!
//! Distances are measured in fractional cell coordinates, so a strut radius
//! of `0.2` means one fifth of the period length along each axis.

use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum StrutGraph {
    SimpleCubic,
    BodyCentered,
    Diamond,
    Octet,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: [f64; 3],
    b: [f64; 3],
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Segment {
    fn new(a: [f64; 3], b: [f64; 3]) -> Self {
        let lo = [a[0].min(b[0]), a[1].min(b[1]), a[2].min(b[2])];
        let hi = [a[0].max(b[0]), a[1].max(b[1]), a[2].max(b[2])];
        Segment { a, b, lo, hi }
    }

    fn translated(&self, d: [f64; 3]) -> Self {
        Segment::new(add(self.a, d), add(self.b, d))
    }

    fn aabb_dist2(&self, p: [f64; 3]) -> f64 {
        (0..3)
            .map(|i| {
                let d = (self.lo[i] - p[i]).max(p[i] - self.hi[i]).max(0.0);
                d * d
            })
            .sum()
    }

    fn closest(&self, p: [f64; 3]) -> [f64; 3] {
        let ab = sub(self.b, self.a);
        let len2 = dot(ab, ab);
        let t = (dot(sub(p, self.a), ab) / len2).clamp(0.0, 1.0);
        add(self.a, scale(ab, t))
    }
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(a: [f64; 3], k: f64) -> [f64; 3] {
    [a[0] * k, a[1] * k, a[2] * k]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

const FCC_SITES: [[f64; 3]; 4] = [
    [0.0, 0.0, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
    [0.5, 0.5, 0.0],
];

impl StrutGraph {
    /// Edges of one unit cell; their integer translates tile space.
    fn cell_edges(self) -> Vec<Segment> {
        let o = [0.0; 3];
        match self {
            StrutGraph::SimpleCubic => vec![
                Segment::new(o, [1.0, 0.0, 0.0]),
                Segment::new(o, [0.0, 1.0, 0.0]),
                Segment::new(o, [0.0, 0.0, 1.0]),
            ],
            StrutGraph::BodyCentered => (0..8)
                .map(|c| {
                    let corner = [(c & 1) as f64, ((c >> 1) & 1) as f64, ((c >> 2) & 1) as f64];
                    Segment::new([0.5; 3], corner)
                })
                .collect(),
            StrutGraph::Diamond => {
                let bonds = [
                    [0.25, 0.25, 0.25],
                    [0.25, -0.25, -0.25],
                    [-0.25, 0.25, -0.25],
                    [-0.25, -0.25, 0.25],
                ];
                FCC_SITES
                    .iter()
                    .flat_map(|&site| bonds.iter().map(move |&d| Segment::new(site, add(site, d))))
                    .collect()
            }
            StrutGraph::Octet => {
                let bonds = [
                    [0.5, 0.5, 0.0],
                    [0.5, -0.5, 0.0],
                    [0.5, 0.0, 0.5],
                    [0.5, 0.0, -0.5],
                    [0.0, 0.5, 0.5],
                    [0.0, 0.5, -0.5],
                ];
                FCC_SITES
                    .iter()
                    .flat_map(|&site| bonds.iter().map(move |&d| Segment::new(site, add(site, d))))
                    .collect()
            }
        }
    }

    /// All translated edges that can be nearest to a point of `[0,1)³`.
    ///
    /// No point of the unit cell is farther than √2/2 from the simple-cubic
    /// graph (the sparsest of the four), so translates whose bounding box
    /// stays beyond that radius of the cell are dropped.
    fn candidates(self) -> &'static [Segment] {
        static TABLES: [OnceLock<Vec<Segment>>; 4] =
            [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
        let slot = match self {
            StrutGraph::SimpleCubic => 0,
            StrutGraph::BodyCentered => 1,
            StrutGraph::Diamond => 2,
            StrutGraph::Octet => 3,
        };
        TABLES[slot].get_or_init(|| {
            let reach = 0.75_f64;
            let edges = self.cell_edges();
            let mut out = Vec::new();
            for dz in -1..=1 {
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let d = [dx as f64, dy as f64, dz as f64];
                        for e in &edges {
                            let t = e.translated(d);
                            let gap2: f64 = (0..3)
                                .map(|i| {
                                    let g = (t.lo[i] - 1.0).max(-t.hi[i]).max(0.0);
                                    g * g
                                })
                                .sum();
                            if gap2 <= reach * reach {
                                out.push(t);
                            }
                        }
                    }
                }
            }
            out
        })
    }

    /// Distance from fractional point `s` to the periodic graph, with its
    /// gradient in fractional coordinates (zero on a strut axis).
    pub(super) fn distance(self, s: [f64; 3]) -> (f64, [f64; 3]) {
        let f = [s[0] - s[0].floor(), s[1] - s[1].floor(), s[2] - s[2].floor()];
        let mut best2 = f64::INFINITY;
        let mut best_q = f;
        for seg in self.candidates() {
            if seg.aabb_dist2(f) >= best2 {
                continue;
            }
            let q = seg.closest(f);
            let d = sub(f, q);
            let d2 = dot(d, d);
            if d2 < best2 {
                best2 = d2;
                best_q = q;
            }
        }
        let dist = best2.sqrt();
        let grad = if dist > 0.0 {
            scale(sub(f, best_q), 1.0 / dist)
        } else {
            [0.0; 3]
        };
        (dist, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(graph: StrutGraph, s: [f64; 3]) -> f64 {
        let f = [s[0] - s[0].floor(), s[1] - s[1].floor(), s[2] - s[2].floor()];
        let mut best = f64::INFINITY;
        for dz in -2..=2 {
            for dy in -2..=2 {
                for dx in -2..=2 {
                    for e in graph.cell_edges() {
                        let t = e.translated([dx as f64, dy as f64, dz as f64]);
                        let q = t.closest(f);
                        best = best.min(dot(sub(f, q), sub(f, q)).sqrt());
                    }
                }
            }
        }
        best
    }

    #[test]
    fn pruned_candidates_match_brute_force() {
        let graphs = [
            StrutGraph::SimpleCubic,
            StrutGraph::BodyCentered,
            StrutGraph::Diamond,
            StrutGraph::Octet,
        ];
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for g in graphs {
            for _ in 0..500 {
                let s = [next() * 3.0 - 1.5, next() * 3.0 - 1.5, next() * 3.0 - 1.5];
                let (d, _) = g.distance(s);
                assert!((d - brute_force(g, s)).abs() < 1e-12, "{g:?} at {s:?}");
            }
        }
    }

    #[test]
    fn cell_centre_of_simple_cubic_is_half_diagonal_away() {
        let (d, _) = StrutGraph::SimpleCubic.distance([0.5, 0.5, 0.5]);
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn edge_counts() {
        assert_eq!(StrutGraph::SimpleCubic.cell_edges().len(), 3);
        assert_eq!(StrutGraph::BodyCentered.cell_edges().len(), 8);
        assert_eq!(StrutGraph::Diamond.cell_edges().len(), 16);
        assert_eq!(StrutGraph::Octet.cell_edges().len(), 24);
    }
}
