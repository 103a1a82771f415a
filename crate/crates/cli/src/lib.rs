//! The `tpms-forge` command line and HTTP service.

pub mod args;
pub mod service;

use std::io::Write;

use serde::Serialize;
use tpms_forge::brick::brick_grids;
use tpms_forge::io::{read_mesh, sidecar_path, write_mesh, write_report, ExportFormat};
use tpms_forge::solver::{SolidKind, DEFAULT_DENSITY_TOL};
use tpms_forge::{build_brick, BrickMode, MeshReport, Result, SurfaceKind, Symmetry};

use args::{Cli, Command, GenArgs, SpecArgs};

/// One row of the surface listing.
#[derive(Debug, Clone, Serialize)]
pub struct SurfaceRow {
    pub tag: &'static str,
    pub triply_periodic: bool,
    pub symmetry: Symmetry,
    pub formula: &'static str,
}

pub fn surface_rows() -> Vec<SurfaceRow> {
    SurfaceKind::ALL
        .iter()
        .map(|&k| {
            let d = k.symmetry_descriptor();
            SurfaceRow {
                tag: k.tag(),
                triply_periodic: d.triply_periodic,
                symmetry: d.symmetry,
                formula: k.formula(),
            }
        })
        .collect()
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::ListSurfaces { json } => list_surfaces(json),
        Command::Gen(args) => gen(&args),
        Command::Solve(args) => solve(&args),
        Command::Inspect { path } => inspect(&path),
        Command::Serve {
            port,
            bind,
            workers,
        } => serve(&bind, port, workers),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            1
        }
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn list_surfaces(json: bool) -> Result<i32> {
    let rows = surface_rows();
    if json {
        print_json(&rows)?;
    } else {
        let mut out = std::io::stdout().lock();
        for r in rows {
            let periodic = if r.triply_periodic { "triply" } else { "partial" };
            let sym = serde_json::to_value(r.symmetry).unwrap();
            writeln!(out, "{:<14} {:<8} {:<22} {}", r.tag, periodic, sym.as_str().unwrap_or(""), r.formula)?;
        }
    }
    Ok(0)
}

fn gen(args: &GenArgs) -> Result<i32> {
    let format: ExportFormat = args.format.parse()?;
    let spec = args.spec.to_spec()?;
    let result = build_brick(&spec)?;
    write_mesh(&result.mesh, &args.output, format)?;
    let side = sidecar_path(&args.output);
    write_report(&result.report, &side)?;
    println!(
        "wrote {} ({} triangles) and {}",
        args.output.display(),
        result.mesh.triangles.len(),
        side.display()
    );
    for w in &result.report.warnings {
        eprintln!("warning[{w}]: {}", describe(*w, &result.report, spec.nozzle_mm));
    }
    Ok(if args.strict && !result.report.warnings.is_empty() {
        2
    } else {
        0
    })
}

fn describe(w: tpms_forge::Warning, r: &MeshReport, nozzle: f64) -> String {
    use tpms_forge::Warning::*;
    match w {
        ThinWall => format!(
            "minimum wall {:.3} mm is under twice the {nozzle} mm nozzle",
            r.min_wall_mm.unwrap_or(0.0)
        ),
        Overhang => format!("{:.1}% of the area overhangs", 100.0 * r.overhang_area_fraction),
        MultiComponent => format!("{} separate pieces", r.component_count),
        Envelope => "mesh leaves the build envelope".into(),
        NotWatertight => "mesh is not watertight".into(),
    }
}

fn solve(args: &SpecArgs) -> Result<i32> {
    let mut spec = args.to_spec()?;
    if !matches!(spec.mode, BrickMode::DensityTarget { .. } | BrickMode::WallTarget { .. }) {
        spec.mode = BrickMode::DensityTarget {
            solid: SolidKind::Network,
            target: 0.3,
            tol: DEFAULT_DENSITY_TOL,
        };
    }
    let grids = brick_grids(&spec)?;
    print_json(&grids.solve)?;
    Ok(0)
}

fn inspect(path: &std::path::Path) -> Result<i32> {
    let mesh = read_mesh(path)?;
    print_json(&MeshReport::for_mesh(&mesh))?;
    Ok(0)
}

fn serve(bind: &str, port: u16, workers: Option<usize>) -> Result<i32> {
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    let workers = workers.unwrap_or_else(service::default_workers);
    runtime.block_on(service::serve(bind, port, workers))?;
    Ok(0)
}

