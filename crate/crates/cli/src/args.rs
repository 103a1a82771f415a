//! Command line definitions and the flag-to-spec merge.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use tpms_forge::brick::scaled_resolution;
use tpms_forge::solver::{SolidKind, DEFAULT_DENSITY_TOL, DEFAULT_WALL_TOL_MM};
use tpms_forge::{BrickMode, BrickSpec, Error, Result, SurfaceKind};

#[derive(Debug, Parser)]
#[command(name = "tpms-forge", version, about = "Printable TPMS bricks from implicit fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the surface families.
    ListSurfaces {
        #[arg(long)]
        json: bool,
    },
    /// Build a brick and write the mesh plus a `.report.json` sidecar.
    Gen(GenArgs),
    /// Solve for the iso-level only and print the result as JSON.
    Solve(SpecArgs),
    /// Measure an existing STL or OBJ file.
    Inspect { path: PathBuf },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        /// Parallel generation jobs; defaults to the number of processors.
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Network,
    Sheet,
}

impl From<ModeArg> for SolidKind {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Network => SolidKind::Network,
            ModeArg::Sheet => SolidKind::Sheet,
        }
    }
}

/// Spec fields settable from flags. Anything left out comes from `--config`
/// or the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct SpecArgs {
    /// BrickSpec JSON file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub surface: Option<SurfaceKind>,
    /// Period in mm, one value or x,y,z.
    #[arg(long, value_delimiter = ',')]
    pub period: Option<Vec<f64>>,
    /// Phase offset in periods, x,y,z.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phase: Option<Vec<f64>>,
    #[arg(long)]
    pub strut_radius: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Iso-level for network, half thickness for sheet.
    #[arg(long, allow_hyphen_values = true)]
    pub iso: Option<f64>,
    #[arg(long, conflicts_with_all = ["iso", "target_wall"])]
    pub target_density: Option<f64>,
    #[arg(long)]
    pub density_tol: Option<f64>,
    /// Target minimum wall in mm (sheet solids).
    #[arg(long, conflicts_with = "iso")]
    pub target_wall: Option<f64>,
    #[arg(long)]
    pub wall_tol: Option<f64>,
    /// Domain size in mm, x,y,z.
    #[arg(long, value_delimiter = ',')]
    pub domain: Option<Vec<f64>>,
    #[arg(long)]
    pub base: Option<f64>,
    /// Nodes per axis, one value (longest axis) or x,y,z.
    #[arg(long, value_delimiter = ',')]
    pub resolution: Option<Vec<usize>>,
    #[arg(long)]
    pub nozzle: Option<f64>,
    #[arg(long)]
    pub allow_oversize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(short, long, default_value = "brick.stl")]
    pub output: PathBuf,
    /// stl, stl-ascii or obj.
    #[arg(long, default_value = "stl")]
    pub format: String,
    /// Exit with status 2 when the brick raises any printability warning.
    #[arg(long)]
    pub strict: bool,
}

fn triple<T: Copy>(values: &[T], what: &str) -> Result<[T; 3]> {
    match *values {
        [a] => Ok([a; 3]),
        [a, b, c] => Ok([a, b, c]),
        _ => Err(Error::InvalidSpec(format!("{what} takes one or three values"))),
    }
}

impl SpecArgs {
    /// Config file (or defaults) with the given flags applied on top.
    pub fn to_spec(&self) -> Result<BrickSpec> {
        let mut spec = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                BrickSpec::from_json(&text)?
            }
            None => BrickSpec::default(),
        };
        if let Some(kind) = self.surface {
            spec.field.kind = kind;
        }
        if let Some(p) = &self.period {
            spec.field.period_length = Vector3::from(triple(p, "--period")?);
        }
        if let Some(p) = &self.phase {
            spec.field.phase_offset = Vector3::from(triple(p, "--phase")?);
        }
        if let Some(r) = self.strut_radius {
            spec.field.strut_radius = r;
        }
        if let Some(d) = &self.domain {
            spec.domain_size = Vector3::from(triple(d, "--domain")?);
        }
        if let Some(b) = self.base {
            spec.base_height = b;
        }
        if let Some(n) = self.nozzle {
            spec.nozzle_mm = n;
        }
        if self.allow_oversize {
            spec.allow_oversize = true;
        }
        if let Some(r) = &self.resolution {
            spec.resolution = Some(match r.as_slice() {
                [n] => scaled_resolution(&spec.domain_size, *n),
                _ => triple(r, "--resolution")?,
            });
        }
        spec.mode = self.mode_over(spec.mode)?;
        Ok(spec)
    }

    fn mode_over(&self, current: BrickMode) -> Result<BrickMode> {
        if let Some(target) = self.target_density {
            let solid = match (self.mode, current) {
                (Some(m), _) => m.into(),
                (None, BrickMode::Sheet { .. }) => SolidKind::Sheet,
                (None, BrickMode::DensityTarget { solid, .. }) => solid,
                _ => SolidKind::Network,
            };
            return Ok(BrickMode::DensityTarget {
                solid,
                target,
                tol: self.density_tol.unwrap_or(DEFAULT_DENSITY_TOL),
            });
        }
        if let Some(target_mm) = self.target_wall {
            if self.mode == Some(ModeArg::Network) {
                return Err(Error::InvalidSpec("--target-wall applies to sheet solids".into()));
            }
            return Ok(BrickMode::WallTarget {
                target_mm,
                tol_mm: self.wall_tol.unwrap_or(DEFAULT_WALL_TOL_MM),
            });
        }
        let t = self.iso;
        Ok(match (self.mode, current) {
            (None, BrickMode::Network { t: old }) => BrickMode::Network { t: t.unwrap_or(old) },
            (None, BrickMode::Sheet { t: old }) => BrickMode::Sheet { t: t.unwrap_or(old) },
            (None, other) => match t {
                Some(t) => BrickMode::Network { t },
                None => other,
            },
            (Some(ModeArg::Network), cur) => BrickMode::Network {
                t: t.unwrap_or(match cur {
                    BrickMode::Network { t } => t,
                    _ => 0.0,
                }),
            },
            (Some(ModeArg::Sheet), cur) => {
                let t = t.or(match cur {
                    BrickMode::Sheet { t } => Some(t),
                    _ => None,
                });
                BrickMode::Sheet {
                    t: t.ok_or_else(|| Error::InvalidSpec("sheet mode needs --iso".into()))?,
                }
            }
        })
    }
}
