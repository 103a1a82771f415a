//! Python module `tpms_forge`.
//!
//! Reports and solve results cross the boundary as plain dicts; meshes stay
//! on the Rust side behind [`Mesh`] until they are written or copied out.

use std::path::PathBuf;

use nalgebra::{Point3, Vector3};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};
use tpms_forge::io::{read_mesh, sidecar_path, stl_bytes, write_mesh, write_report, ExportFormat};
use tpms_forge::solver::{solve_iso_for_density, SolidKind};
use tpms_forge::{brick, field, metrics, BrickMode, Domain, MeshReport, SurfaceKind, TriangleMesh};

fn err(e: tpms_forge::Error) -> PyErr {
    PyValueError::new_err(format!("{}: {e}", e.code()))
}

fn to_py<'py, T: serde::Serialize + ?Sized>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn kind(tag: &str) -> PyResult<SurfaceKind> {
    tag.parse().map_err(err)
}

/// One surface family placed in space.
#[pyclass(name = "FieldSpec", from_py_object)]
#[derive(Clone)]
struct PyFieldSpec {
    inner: field::FieldSpec,
}

#[pymethods]
impl PyFieldSpec {
    #[new]
    #[pyo3(signature = (kind, period = 50.0, phase = (0.0, 0.0, 0.0), strut_radius = 0.2))]
    fn new(kind: &str, period: f64, phase: (f64, f64, f64), strut_radius: f64) -> PyResult<Self> {
        let inner = field::FieldSpec::new(self::kind(kind)?, period)
            .map_err(err)?
            .with_phase(Vector3::new(phase.0, phase.1, phase.2))
            .with_strut_radius(strut_radius);
        inner.validate().map_err(err)?;
        Ok(PyFieldSpec { inner })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.tag()
    }

    fn evaluate(&self, x: f64, y: f64, z: f64) -> f64 {
        self.inner.evaluate(&Point3::new(x, y, z))
    }

    fn gradient(&self, x: f64, y: f64, z: f64) -> (f64, f64, f64) {
        let g = self.inner.gradient(&Point3::new(x, y, z));
        (g.x, g.y, g.z)
    }

    fn __repr__(&self) -> String {
        format!("FieldSpec({}, period={:?})", self.inner.kind, self.inner.period_length.as_slice())
    }
}

/// Generation request; the same JSON document the CLI and service accept.
#[pyclass(name = "BrickSpec", from_py_object)]
#[derive(Clone)]
struct PyBrickSpec {
    inner: brick::BrickSpec,
}

#[pymethods]
impl PyBrickSpec {
    #[new]
    #[pyo3(signature = (
        surface = "gyroid", period = 50.0, mode = "network", t = 0.0,
        target_density = None, domain = (150.0, 150.0, 200.0), base = 10.0,
        resolution = None, nozzle = 0.6
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        surface: &str,
        period: f64,
        mode: &str,
        t: f64,
        target_density: Option<f64>,
        domain: (f64, f64, f64),
        base: f64,
        resolution: Option<usize>,
        nozzle: f64,
    ) -> PyResult<Self> {
        let solid = match mode {
            "network" => SolidKind::Network,
            "sheet" => SolidKind::Sheet,
            other => return Err(PyValueError::new_err(format!("unknown mode '{other}'"))),
        };
        let mode = match (target_density, solid) {
            (Some(target), _) => BrickMode::DensityTarget {
                solid,
                target,
                tol: tpms_forge::solver::DEFAULT_DENSITY_TOL,
            },
            (None, SolidKind::Network) => BrickMode::Network { t },
            (None, SolidKind::Sheet) => BrickMode::Sheet { t },
        };
        let size = Vector3::new(domain.0, domain.1, domain.2);
        let inner = brick::BrickSpec {
            field: field::FieldSpec::new(kind(surface)?, period).map_err(err)?,
            mode,
            domain_size: size,
            base_height: base,
            resolution: resolution.map(|n| brick::scaled_resolution(&size, n)),
            nozzle_mm: nozzle,
            allow_oversize: false,
        };
        inner.validate().map_err(err)?;
        Ok(PyBrickSpec { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = brick::BrickSpec::from_json(text).map_err(err)?;
        Ok(PyBrickSpec { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn dims(&self) -> (usize, usize, usize) {
        let [a, b, c] = self.inner.dims();
        (a, b, c)
    }

    fn __repr__(&self) -> String {
        format!("BrickSpec({})", self.inner.to_json())
    }
}

#[pyclass(name = "Mesh")]
struct PyMesh {
    inner: TriangleMesh,
}

#[pymethods]
impl PyMesh {
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        Ok(PyMesh {
            inner: read_mesh(&path).map_err(err)?,
        })
    }

    #[getter]
    fn vertices(&self) -> Vec<(f64, f64, f64)> {
        self.inner.vertices.iter().map(|p| (p.x, p.y, p.z)).collect()
    }

    #[getter]
    fn triangles(&self) -> Vec<(u32, u32, u32)> {
        self.inner.triangles.iter().map(|t| (t[0], t[1], t[2])).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.triangles.len()
    }

    /// Mesh-only measurements.
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &MeshReport::for_mesh(&self.inner))
    }

    fn surface_area(&self) -> f64 {
        metrics::surface_area(&self.inner)
    }

    fn volume(&self) -> f64 {
        metrics::signed_volume(&self.inner)
    }

    fn stl_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &stl_bytes(&self.inner))
    }

    #[pyo3(signature = (path, format = "stl"))]
    fn write(&self, path: PathBuf, format: &str) -> PyResult<u64> {
        let format: ExportFormat = format.parse().map_err(err)?;
        write_mesh(&self.inner, &path, format).map_err(err)
    }
}

/// Result of [`build_brick`]: the mesh and its report.
#[pyclass(name = "Brick")]
struct PyBrick {
    #[pyo3(get)]
    mesh: Py<PyMesh>,
    report: MeshReport,
}

#[pymethods]
impl PyBrick {
    #[getter]
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.report)
    }

    #[getter]
    fn warnings(&self) -> Vec<&'static str> {
        self.report.warnings.iter().map(|w| w.code()).collect()
    }

    /// Writes the mesh and a `.report.json` sidecar next to it.
    #[pyo3(signature = (path, format = "stl"))]
    fn save(&self, py: Python<'_>, path: PathBuf, format: &str) -> PyResult<PathBuf> {
        self.mesh.borrow(py).write(path.clone(), format)?;
        let side = sidecar_path(&path);
        write_report(&self.report, &side).map_err(err)?;
        Ok(side)
    }
}

#[pyfunction]
fn surfaces<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    let rows: Vec<_> = SurfaceKind::ALL
        .iter()
        .map(|k| {
            let d = k.symmetry_descriptor();
            serde_json::json!({
                "tag": k.tag(),
                "triply_periodic": d.triply_periodic,
                "symmetry": d.symmetry,
                "formula": k.formula(),
            })
        })
        .collect();
    to_py(py, &rows)
}

/// Runs the full pipeline. Releases the GIL while generating.
#[pyfunction]
fn build_brick(py: Python<'_>, spec: &PyBrickSpec) -> PyResult<PyBrick> {
    let spec = spec.inner.clone();
    let result = py.detach(move || brick::build_brick(&spec)).map_err(err)?;
    Ok(PyBrick {
        mesh: Py::new(py, PyMesh { inner: result.mesh })?,
        report: result.report,
    })
}

#[pyfunction]
#[pyo3(signature = (field, domain, resolution, target, solid = "network", tol = 0.005))]
fn solve_density<'py>(
    py: Python<'py>,
    field: &PyFieldSpec,
    domain: (f64, f64, f64),
    resolution: usize,
    target: f64,
    solid: &str,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let solid = match solid {
        "network" => SolidKind::Network,
        "sheet" => SolidKind::Sheet,
        other => return Err(PyValueError::new_err(format!("unknown solid '{other}'"))),
    };
    let size = Vector3::new(domain.0, domain.1, domain.2);
    let dom = Domain::from_size(size).map_err(err)?;
    let dims = brick::scaled_resolution(&size, resolution);
    let f = field.inner.clone();
    let r = py
        .detach(move || solve_iso_for_density(&f, &dom, dims, solid, target, tol))
        .map_err(err)?;
    Ok(to_py(py, &r)?.cast_into::<PyDict>()?)
}

#[pymodule(name = "tpms_forge")]
fn tpms_forge_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFieldSpec>()?;
    m.add_class::<PyBrickSpec>()?;
    m.add_class::<PyMesh>()?;
    m.add_class::<PyBrick>()?;
    m.add_function(wrap_pyfunction!(surfaces, m)?)?;
    m.add_function(wrap_pyfunction!(build_brick, m)?)?;
    m.add_function(wrap_pyfunction!(solve_density, m)?)?;
    Ok(())
}
