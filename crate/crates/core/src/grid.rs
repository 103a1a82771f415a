//! Regular sampling of scalar fields and the solidification transforms.
//!
//! Sign convention: a node is inside the solid when its value is `<= 0`.

use nalgebra::{Point3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Default upper bound on the number of samples in a grid.
pub const DEFAULT_MAX_VOXELS: u128 = 512 * 512 * 512;

/// Environment variable overriding [`DEFAULT_MAX_VOXELS`].
pub const MAX_VOXELS_ENV: &str = "TPMS_FORGE_MAX_VOXELS";

pub fn max_voxels() -> u128 {
    std::env::var(MAX_VOXELS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u128>().ok())
        .filter(|v| *v > 0)
        .unwrap_or(DEFAULT_MAX_VOXELS)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub min_corner: Point3<f64>,
    pub max_corner: Point3<f64>,
}

impl Domain {
    pub fn new(min_corner: Point3<f64>, max_corner: Point3<f64>) -> Result<Self> {
        let d = Domain {
            min_corner,
            max_corner,
        };
        d.validate()?;
        Ok(d)
    }

    /// Box `[0, size]` along each axis.
    pub fn from_size(size: Vector3<f64>) -> Result<Self> {
        Domain::new(Point3::origin(), Point3::from(size))
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (0..3).all(|i| {
            self.min_corner[i].is_finite()
                && self.max_corner[i].is_finite()
                && self.max_corner[i] > self.min_corner[i]
        });
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDomain(format!(
                "max corner {:?} must exceed min corner {:?} on every axis",
                self.max_corner.coords.as_slice(),
                self.min_corner.coords.as_slice()
            )))
        }
    }

    pub fn size(&self) -> Vector3<f64> {
        self.max_corner - self.min_corner
    }

    pub fn diagonal(&self) -> f64 {
        self.size().norm()
    }

    pub fn volume(&self) -> f64 {
        self.size().product()
    }
}

/// Samples of a field on the nodes of a regular lattice, x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub dims: [usize; 3],
    pub origin: Point3<f64>,
    pub spacing: Vector3<f64>,
    pub values: Vec<f64>,
}

impl VoxelGrid {
    /// Wraps raw values; checks length, dims and finiteness.
    pub fn from_values(
        dims: [usize; 3],
        origin: Point3<f64>,
        spacing: Vector3<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if dims.iter().any(|&n| n < 2) {
            return Err(Error::InvalidDomain(format!("dims {dims:?} must be >= 2")));
        }
        if !spacing.iter().all(|s| s.is_finite() && *s > 0.0) {
            return Err(Error::InvalidDomain("spacing must be positive".into()));
        }
        if values.len() != dims[0] * dims[1] * dims[2] {
            return Err(Error::InvalidDomain(format!(
                "{} values for dims {dims:?}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            let g = VoxelGrid {
                dims,
                origin,
                spacing,
                values: Vec::new(),
            };
            let [x, y, z] = g.unravel(i);
            let p = g.position(x, y, z);
            return Err(Error::NonFinite {
                x: p.x,
                y: p.y,
                z: p.z,
            });
        }
        Ok(VoxelGrid {
            dims,
            origin,
            spacing,
            values,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims[1] + j) * self.dims[0] + i
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    #[inline]
    pub fn position(&self, i: usize, j: usize, k: usize) -> Point3<f64> {
        Point3::new(
            self.origin.x + i as f64 * self.spacing.x,
            self.origin.y + j as f64 * self.spacing.y,
            self.origin.z + k as f64 * self.spacing.z,
        )
    }

    pub fn max_corner(&self) -> Point3<f64> {
        self.position(self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1)
    }

    pub fn domain(&self) -> Domain {
        Domain {
            min_corner: self.origin,
            max_corner: self.max_corner(),
        }
    }

    /// `(min, max)` of the stored values.
    pub fn value_range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn same_lattice(&self, other: &VoxelGrid) -> bool {
        self.dims == other.dims && self.origin == other.origin && self.spacing == other.spacing
    }

    /// Nodes with `z <= z_max`, as a grid of its own.
    pub fn slab_below(&self, z_max: f64) -> Option<VoxelGrid> {
        let layers = (0..self.dims[2])
            .take_while(|&k| self.origin.z + k as f64 * self.spacing.z <= z_max)
            .count();
        if layers < 2 {
            return None;
        }
        let layer = self.dims[0] * self.dims[1];
        Some(VoxelGrid {
            dims: [self.dims[0], self.dims[1], layers],
            origin: self.origin,
            spacing: self.spacing,
            values: self.values[..layer * layers].to_vec(),
        })
    }

    fn map_values(&self, f: impl Fn(f64) -> f64 + Sync) -> VoxelGrid {
        VoxelGrid {
            dims: self.dims,
            origin: self.origin,
            spacing: self.spacing,
            values: self.values.par_iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Samples `field` on `dims` nodes spanning `domain`, corners inclusive.
pub fn sample<F: ScalarField + ?Sized>(field: &F, domain: &Domain, dims: [usize; 3]) -> Result<VoxelGrid> {
    sample_with_cap(field, domain, dims, max_voxels())
}

pub fn sample_with_cap<F: ScalarField + ?Sized>(
    field: &F,
    domain: &Domain,
    dims: [usize; 3],
    cap: u128,
) -> Result<VoxelGrid> {
    domain.validate()?;
    if dims.iter().any(|&n| n < 2) {
        return Err(Error::InvalidDomain(format!("dims {dims:?} must be >= 2 per axis")));
    }
    let requested = dims.iter().map(|&n| n as u128).product::<u128>();
    if requested > cap {
        return Err(Error::CapExceeded { requested, cap });
    }
    let size = domain.size();
    let spacing = Vector3::new(
        size.x / (dims[0] - 1) as f64,
        size.y / (dims[1] - 1) as f64,
        size.z / (dims[2] - 1) as f64,
    );
    let mut grid = VoxelGrid {
        dims,
        origin: domain.min_corner,
        spacing,
        values: vec![0.0; dims[0] * dims[1] * dims[2]],
    };
    let layer = dims[0] * dims[1];
    let probe = VoxelGrid {
        values: Vec::new(),
        ..grid.clone()
    };
    grid.values
        .par_chunks_mut(layer)
        .enumerate()
        .for_each(|(k, slab)| {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    slab[j * dims[0] + i] = field.value_at(&probe.position(i, j, k));
                }
            }
        });
    if let Some(idx) = grid.values.iter().position(|v| !v.is_finite()) {
        let [i, j, k] = grid.unravel(idx);
        let p = grid.position(i, j, k);
        return Err(Error::NonFinite {
            x: p.x,
            y: p.y,
            z: p.z,
        });
    }
    Ok(grid)
}

/// How a raw field is turned into an inside-negative solid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "solid", rename_all = "snake_case")]
pub enum SolidMode {
    /// Inside where `F <= t`.
    Network { t: f64 },
    /// Inside where `|F| <= t`.
    Sheet { t: f64 },
}

impl SolidMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SolidMode::Network { t } if t.is_finite() => Ok(()),
            SolidMode::Sheet { t } if t.is_finite() && t > 0.0 => Ok(()),
            SolidMode::Network { t } | SolidMode::Sheet { t } => Err(Error::InvalidThickness(t)),
        }
    }

    #[inline]
    pub fn apply(&self, v: f64) -> f64 {
        match *self {
            SolidMode::Network { t } => v - t,
            SolidMode::Sheet { t } => v.abs() - t,
        }
    }

    pub fn level(&self) -> f64 {
        match *self {
            SolidMode::Network { t } | SolidMode::Sheet { t } => t,
        }
    }
}

pub fn transform_inside_negative(grid: &VoxelGrid, mode: SolidMode) -> Result<VoxelGrid> {
    mode.validate()?;
    Ok(grid.map_values(|v| mode.apply(v)))
}

/// Componentwise minimum: the union of two inside-negative solids.
pub fn union_min(a: &VoxelGrid, b: &VoxelGrid) -> Result<VoxelGrid> {
    if !a.same_lattice(b) {
        return Err(Error::GridMismatch);
    }
    Ok(VoxelGrid {
        dims: a.dims,
        origin: a.origin,
        spacing: a.spacing,
        values: a
            .values
            .par_iter()
            .zip(b.values.par_iter())
            .map(|(&x, &y)| x.min(y))
            .collect(),
    })
}
