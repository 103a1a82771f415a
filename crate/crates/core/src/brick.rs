//! Printable bricks: a lattice clipped to the build envelope on a solid base.

use std::f64::consts::TAU;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, SurfaceKind};
use crate::grid::{sample, transform_inside_negative, union_min, Domain, SolidMode, VoxelGrid};
use crate::isosurface::{cap_boundary, marching_cubes};
use crate::mesh::{weld_and_clean, TriangleMesh};
use crate::metrics::{
    area_volume, min_wall, overhang_fraction_on_bed, relative_density, topology_check, MeshReport,
    Warning, DEFAULT_OVERHANG_DEG,
};
use crate::solver::{
    solve_density_on_grid, solve_wall_on_grid, SolidKind, SolveResult, DEFAULT_DENSITY_TOL,
    DEFAULT_WALL_TOL_MM,
};

/// Printer build volume (mm).
pub const ENVELOPE_MM: [f64; 3] = [150.0, 150.0, 200.0];
pub const DEFAULT_BASE_MM: f64 = 10.0;
pub const DEFAULT_NOZZLE_MM: f64 = 0.6;
pub const DEFAULT_PERIOD_MM: f64 = 50.0;
/// Nodes along the longest axis when no resolution is given.
pub const DEFAULT_MAX_AXIS_NODES: usize = 128;
/// Overhang fraction above which OVERHANG is raised.
pub const OVERHANG_LIMIT: f64 = 0.25;

/// How the iso-level is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BrickMode {
    Network {
        t: f64,
    },
    Sheet {
        t: f64,
    },
    DensityTarget {
        #[serde(default = "network")]
        solid: SolidKind,
        target: f64,
        #[serde(default = "density_tol")]
        tol: f64,
    },
    WallTarget {
        target_mm: f64,
        #[serde(default = "wall_tol")]
        tol_mm: f64,
    },
}

fn network() -> SolidKind {
    SolidKind::Network
}
fn density_tol() -> f64 {
    DEFAULT_DENSITY_TOL
}
fn wall_tol() -> f64 {
    DEFAULT_WALL_TOL_MM
}

impl Default for BrickMode {
    fn default() -> Self {
        BrickMode::Network { t: 0.0 }
    }
}

fn default_field() -> FieldSpec {
    FieldSpec {
        kind: SurfaceKind::Gyroid,
        period_length: Vector3::repeat(DEFAULT_PERIOD_MM),
        phase_offset: Vector3::zeros(),
        strut_radius: 0.2,
    }
}
fn default_domain() -> Vector3<f64> {
    Vector3::from(ENVELOPE_MM)
}
fn default_base() -> f64 {
    DEFAULT_BASE_MM
}
fn default_nozzle() -> f64 {
    DEFAULT_NOZZLE_MM
}

/// A complete generation request. This is also the JSON config format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrickSpec {
    #[serde(default = "default_field")]
    pub field: FieldSpec,
    #[serde(default)]
    pub mode: BrickMode,
    #[serde(default = "default_domain")]
    pub domain_size: Vector3<f64>,
    #[serde(default = "default_base")]
    pub base_height: f64,
    /// Grid nodes per axis; derived from the domain when absent.
    #[serde(default)]
    pub resolution: Option<[usize; 3]>,
    #[serde(default = "default_nozzle")]
    pub nozzle_mm: f64,
    /// Permits domains larger than the build envelope.
    #[serde(default)]
    pub allow_oversize: bool,
}

impl Default for BrickSpec {
    fn default() -> Self {
        BrickSpec {
            field: default_field(),
            mode: BrickMode::default(),
            domain_size: default_domain(),
            base_height: DEFAULT_BASE_MM,
            resolution: None,
            nozzle_mm: DEFAULT_NOZZLE_MM,
            allow_oversize: false,
        }
    }
}

/// Node counts giving roughly cubic voxels with `max_nodes` on the longest
/// axis.
pub fn scaled_resolution(size: &Vector3<f64>, max_nodes: usize) -> [usize; 3] {
    let longest = size.max();
    let spacing = longest / (max_nodes.max(2) - 1) as f64;
    [0, 1, 2].map(|i| ((size[i] / spacing).round() as usize + 1).max(2))
}

impl BrickSpec {
    pub fn from_json(text: &str) -> Result<BrickSpec> {
        let spec: BrickSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn dims(&self) -> [usize; 3] {
        self.resolution
            .unwrap_or_else(|| scaled_resolution(&self.domain_size, DEFAULT_MAX_AXIS_NODES))
    }

    /// Same spec with the resolution filled in, so equivalent requests
    /// serialize identically.
    pub fn normalized(&self) -> BrickSpec {
        BrickSpec {
            resolution: Some(self.dims()),
            ..self.clone()
        }
    }

    pub fn domain(&self) -> Result<Domain> {
        Domain::from_size(self.domain_size)
    }

    pub fn validate(&self) -> Result<()> {
        self.field.validate()?;
        if !self.domain_size.iter().all(|s| s.is_finite() && *s > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "domain_size must be positive, got {:?}",
                self.domain_size.as_slice()
            )));
        }
        if !self.allow_oversize && (0..3).any(|i| self.domain_size[i] > ENVELOPE_MM[i]) {
            return Err(Error::EnvelopeExceeded {
                size: [self.domain_size.x, self.domain_size.y, self.domain_size.z],
                limit: ENVELOPE_MM,
            });
        }
        if !(self.base_height.is_finite() && self.base_height >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "base_height must be >= 0, got {}",
                self.base_height
            )));
        }
        if !(self.nozzle_mm.is_finite() && self.nozzle_mm > 0.0) {
            return Err(Error::InvalidSpec(format!("nozzle_mm must be > 0, got {}", self.nozzle_mm)));
        }
        if let Some(r) = self.resolution {
            if r.iter().any(|&n| n < 2) {
                return Err(Error::InvalidSpec(format!("resolution {r:?} must be >= 2 per axis")));
            }
        }
        match self.mode {
            BrickMode::Network { t } => SolidMode::Network { t }.validate(),
            BrickMode::Sheet { t } => SolidMode::Sheet { t }.validate(),
            BrickMode::DensityTarget { target, tol, .. } => {
                if target.is_finite() && tol.is_finite() && tol > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec("density target and tol must be finite, tol > 0".into()))
                }
            }
            BrickMode::WallTarget { target_mm, tol_mm } => {
                if target_mm.is_finite() && target_mm > 0.0 && tol_mm.is_finite() && tol_mm > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec("wall target and tol must be positive".into()))
                }
            }
        }
    }
}

/// Sampled stages of a brick before meshing.
#[derive(Debug, Clone)]
pub struct BrickGrids {
    /// Inside-negative lattice without the base.
    pub lattice: VoxelGrid,
    /// Lattice unioned with the base plate; this is what gets meshed.
    pub solid: VoxelGrid,
    pub mode: SolidMode,
    pub solve: Option<SolveResult>,
}

/// Samples, solves and solidifies `spec` without meshing.
pub fn brick_grids(spec: &BrickSpec) -> Result<BrickGrids> {
    spec.validate()?;
    let domain = spec.domain()?;
    let dims = spec.dims();
    let raw = sample(&spec.field, &domain, dims)?;

    let (mode, solve) = match spec.mode {
        BrickMode::Network { t } => (SolidMode::Network { t }, None),
        BrickMode::Sheet { t } => (SolidMode::Sheet { t }, None),
        BrickMode::DensityTarget { solid, target, tol } => {
            let r = solve_density_on_grid(&raw, solid, target, tol)?;
            (solid.at(r.t), Some(r))
        }
        BrickMode::WallTarget { target_mm, tol_mm } => {
            let r = solve_wall_on_grid(&raw, target_mm, tol_mm)?;
            (SolidMode::Sheet { t: r.t }, Some(r))
        }
    };
    if let SolidMode::Sheet { t } = mode {
        if t <= 0.0 {
            return Err(Error::InvalidThickness(t));
        }
    }
    let lattice = transform_inside_negative(&raw, mode)?;
    let solid = if spec.base_height > 0.0 {
        let h = spec.base_height;
        let scale = TAU / spec.field.period_length.z;
        let base = sample(&move |p: &Point3<f64>| (p.z - h) * scale, &domain, dims)?;
        union_min(&lattice, &base)?
    } else {
        lattice.clone()
    };
    Ok(BrickGrids {
        lattice,
        solid,
        mode,
        solve,
    })
}

#[derive(Debug, Clone)]
pub struct BrickResult {
    pub mesh: TriangleMesh,
    pub report: MeshReport,
    pub spec_echo: BrickSpec,
    pub solve: Option<SolveResult>,
}

/// Runs the whole pipeline. Never returns a mesh that is not watertight.
///
/// `relative_density` and `min_wall_mm` in the report describe the lattice
/// alone, so a solid base does not hide a thin or sparse infill.
pub fn build_brick(spec: &BrickSpec) -> Result<BrickResult> {
    let grids = brick_grids(spec)?;
    let raw_mesh = marching_cubes(&grids.solid);
    let capped = cap_boundary(&grids.solid, &raw_mesh)?;
    // vertices are already shared by grid key; a positive tolerance could
    // pinch sheets that pass within a hair of a node
    let mesh = weld_and_clean(&capped, 0.0);

    let topo = topology_check(&mesh);
    if !topo.watertight {
        return Err(Error::NotWatertight(format!(
            "{} triangles, edge_manifold={}, consistent_winding={}",
            mesh.triangles.len(),
            topo.edge_manifold,
            topo.consistent_winding
        )));
    }
    let (surface_area, enclosed_volume) = area_volume(&mesh);
    let report = MeshReport {
        surface_area,
        enclosed_volume,
        relative_density: Some(relative_density(&grids.lattice)),
        watertight: topo.watertight,
        edge_manifold: topo.edge_manifold,
        consistent_winding: topo.consistent_winding,
        component_count: topo.component_count,
        overhang_area_fraction: overhang_fraction_on_bed(&mesh, DEFAULT_OVERHANG_DEG, Some(0.0)),
        min_wall_mm: Some(min_wall(&grids.lattice)),
        warnings: Vec::new(),
        solve: grids.solve,
    };
    let mut result = BrickResult {
        mesh,
        report,
        spec_echo: spec.clone(),
        solve: grids.solve,
    };
    result.report.warnings = validate_constraints(&result, spec);
    Ok(result)
}

/// Printability warnings for a built brick.
pub fn validate_constraints(result: &BrickResult, spec: &BrickSpec) -> Vec<Warning> {
    let r = &result.report;
    let mut out = Vec::new();
    if r.min_wall_mm.is_some_and(|w| w < 2.0 * spec.nozzle_mm) {
        out.push(Warning::ThinWall);
    }
    if r.overhang_area_fraction > OVERHANG_LIMIT {
        out.push(Warning::Overhang);
    }
    if r.component_count > 1 {
        out.push(Warning::MultiComponent);
    }
    if let Some((lo, hi)) = result.mesh.bounding_box() {
        let slack = 1e-9 * spec.domain_size.norm();
        let outside = (0..3).any(|i| lo[i] < -slack || hi[i] > spec.domain_size[i] + slack);
        if outside {
            out.push(Warning::Envelope);
        }
    }
    if !r.watertight {
        out.push(Warning::NotWatertight);
    }
    out
}
