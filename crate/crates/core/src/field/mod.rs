//! Implicit scalar fields for the sixteen minimal-surface families.
//!
//! A point `p` (mm) maps to fractional cell coordinates
//! `s_i = p_i / L_i + offset_i` and to normalized coordinates `u_i = 2π·s_i`.
//! Nodal surfaces are trigonometric in `u`; the Scherk surfaces use the
//! unwrapped `s` along their aperiodic axes; skeletal graphs are distances in
//! `s`. The surface itself is the zero set of the returned value.

mod nodal;
mod skeletal;

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use nodal::Trig;
use skeletal::StrutGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Gyroid,
    Diamond,
    SchwarzP,
    Neovius,
    Lidinoid,
    SplitP,
    DPrime,
    DoubleGyroid,
    Iwp,
    PwHybrid,
    #[serde(rename = "scherk_1")]
    Scherk1,
    #[serde(rename = "scherk_2")]
    Scherk2,
    #[serde(rename = "skeletal_1")]
    Skeletal1,
    #[serde(rename = "skeletal_2")]
    Skeletal2,
    #[serde(rename = "skeletal_3")]
    Skeletal3,
    #[serde(rename = "skeletal_4")]
    Skeletal4,
}

/// Antisymmetry a field is known to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    /// `F(−p) = −F(p)`
    OddInversion,
    /// `F(p + L/2·(1,1,1)) = −F(p)`
    OddHalfTranslation,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryDescriptor {
    pub symmetry: Symmetry,
    pub triply_periodic: bool,
}

impl SurfaceKind {
    pub const ALL: [SurfaceKind; 16] = [
        SurfaceKind::Gyroid,
        SurfaceKind::Diamond,
        SurfaceKind::SchwarzP,
        SurfaceKind::Neovius,
        SurfaceKind::Lidinoid,
        SurfaceKind::SplitP,
        SurfaceKind::DPrime,
        SurfaceKind::DoubleGyroid,
        SurfaceKind::Iwp,
        SurfaceKind::PwHybrid,
        SurfaceKind::Scherk1,
        SurfaceKind::Scherk2,
        SurfaceKind::Skeletal1,
        SurfaceKind::Skeletal2,
        SurfaceKind::Skeletal3,
        SurfaceKind::Skeletal4,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            SurfaceKind::Gyroid => "gyroid",
            SurfaceKind::Diamond => "diamond",
            SurfaceKind::SchwarzP => "schwarz_p",
            SurfaceKind::Neovius => "neovius",
            SurfaceKind::Lidinoid => "lidinoid",
            SurfaceKind::SplitP => "split_p",
            SurfaceKind::DPrime => "d_prime",
            SurfaceKind::DoubleGyroid => "double_gyroid",
            SurfaceKind::Iwp => "iwp",
            SurfaceKind::PwHybrid => "pw_hybrid",
            SurfaceKind::Scherk1 => "scherk_1",
            SurfaceKind::Scherk2 => "scherk_2",
            SurfaceKind::Skeletal1 => "skeletal_1",
            SurfaceKind::Skeletal2 => "skeletal_2",
            SurfaceKind::Skeletal3 => "skeletal_3",
            SurfaceKind::Skeletal4 => "skeletal_4",
        }
    }

    /// The implicit formula in human-readable form.
    pub fn formula(self) -> &'static str {
        match self {
            SurfaceKind::Gyroid => "sin x cos y + sin y cos z + sin z cos x",
            SurfaceKind::Diamond => {
                "sin x sin y sin z + sin x cos y cos z + cos x sin y cos z + cos x cos y sin z"
            }
            SurfaceKind::SchwarzP => "cos x + cos y + cos z",
            SurfaceKind::Neovius => "3(cos x + cos y + cos z) + 4 cos x cos y cos z",
            SurfaceKind::Lidinoid => {
                "0.5(sin 2x cos y sin z + sin 2y cos z sin x + sin 2z cos x sin y) \
                 - 0.5(cos 2x cos 2y + cos 2y cos 2z + cos 2z cos 2x) + 0.15"
            }
            SurfaceKind::SplitP => {
                "1.1(sin 2x sin z cos y + sin 2y sin x cos z + sin 2z sin y cos x) \
                 - 0.2(cos 2x cos 2y + cos 2y cos 2z + cos 2z cos 2x) - 0.4(cos 2x + cos 2y + cos 2z)"
            }
            SurfaceKind::DPrime => {
                "0.5(sin x sin y sin z + cos x cos y cos z) \
                 - 0.5(cos 2x cos 2y + cos 2y cos 2z + cos 2z cos 2x) - 0.2"
            }
            SurfaceKind::DoubleGyroid => {
                "2.75(sin 2x sin z cos y + sin 2y sin x cos z + sin 2z sin y cos x) \
                 - (cos 2x cos 2y + cos 2y cos 2z + cos 2z cos 2x)"
            }
            SurfaceKind::Iwp => "2(cos x cos y + cos y cos z + cos z cos x) - (cos 2x + cos 2y + cos 2z)",
            SurfaceKind::PwHybrid => {
                "4(cos x cos y + cos y cos z + cos z cos x) - 3 cos x cos y cos z + 2.4"
            }
            SurfaceKind::Scherk1 => "exp(z/L) cos x - cos y",
            SurfaceKind::Scherk2 => "sin z - sinh(x/L) sinh(y/L)",
            SurfaceKind::Skeletal1 => "distance to simple-cubic struts - radius",
            SurfaceKind::Skeletal2 => "distance to body-centred struts - radius",
            SurfaceKind::Skeletal3 => "distance to diamond struts - radius",
            SurfaceKind::Skeletal4 => "distance to octet struts - radius",
        }
    }

    pub fn symmetry_descriptor(self) -> SymmetryDescriptor {
        let symmetry = match self {
            SurfaceKind::Gyroid | SurfaceKind::Diamond => Symmetry::OddInversion,
            SurfaceKind::SchwarzP | SurfaceKind::Neovius => Symmetry::OddHalfTranslation,
            _ => Symmetry::None,
        };
        let triply_periodic = !matches!(self, SurfaceKind::Scherk1 | SurfaceKind::Scherk2);
        SymmetryDescriptor {
            symmetry,
            triply_periodic,
        }
    }

    fn strut_graph(self) -> Option<StrutGraph> {
        match self {
            SurfaceKind::Skeletal1 => Some(StrutGraph::SimpleCubic),
            SurfaceKind::Skeletal2 => Some(StrutGraph::BodyCentered),
            SurfaceKind::Skeletal3 => Some(StrutGraph::Diamond),
            SurfaceKind::Skeletal4 => Some(StrutGraph::Octet),
            _ => None,
        }
    }
}

pub fn symmetry_descriptor(kind: SurfaceKind) -> SymmetryDescriptor {
    kind.symmetry_descriptor()
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SurfaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        SurfaceKind::ALL
            .into_iter()
            .find(|k| k.tag() == norm)
            .ok_or_else(|| Error::InvalidField(format!("unknown surface kind `{s}`")))
    }
}

fn default_strut_radius() -> f64 {
    0.2
}

/// A surface family placed in space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub kind: SurfaceKind,
    /// Millimetres per repeat along each axis.
    pub period_length: Vector3<f64>,
    /// Dimensionless shift added to the fractional coordinates.
    #[serde(default = "Vector3::zeros")]
    pub phase_offset: Vector3<f64>,
    /// Strut radius of the skeletal graphs, as a fraction of the period.
    #[serde(default = "default_strut_radius")]
    pub strut_radius: f64,
}

/// Value and gradient with respect to the normalized coordinates `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub value: f64,
    pub gradient: Vector3<f64>,
}

impl FieldSpec {
    pub fn new(kind: SurfaceKind, period_mm: f64) -> Result<Self> {
        let spec = FieldSpec {
            kind,
            period_length: Vector3::repeat(period_mm),
            phase_offset: Vector3::zeros(),
            strut_radius: default_strut_radius(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_phase(mut self, offset: Vector3<f64>) -> Self {
        self.phase_offset = offset;
        self
    }

    pub fn with_strut_radius(mut self, radius: f64) -> Self {
        self.strut_radius = radius;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.period_length.iter().all(|l| l.is_finite() && *l > 0.0) {
            return Err(Error::InvalidField(format!(
                "period lengths must be positive, got {:?}",
                self.period_length.as_slice()
            )));
        }
        if !self.phase_offset.iter().all(|o| o.is_finite()) {
            return Err(Error::InvalidField("phase offset must be finite".into()));
        }
        if !(self.strut_radius.is_finite() && self.strut_radius >= 0.0) {
            return Err(Error::InvalidField(format!(
                "strut radius must be non-negative, got {}",
                self.strut_radius
            )));
        }
        Ok(())
    }

    fn fractional(&self, p: &Point3<f64>) -> [f64; 3] {
        [
            p.x / self.period_length.x + self.phase_offset.x,
            p.y / self.period_length.y + self.phase_offset.y,
            p.z / self.period_length.z + self.phase_offset.z,
        ]
    }

    /// Value and gradient in normalized coordinates.
    pub fn sample(&self, p: &Point3<f64>) -> FieldSample {
        let s = self.fractional(p);
        let (value, grad_u) = if let Some(graph) = self.kind.strut_graph() {
            let (d, g) = graph.distance(s);
            (d - self.strut_radius, [g[0] / TAU, g[1] / TAU, g[2] / TAU])
        } else {
            let t = Trig::new([TAU * s[0], TAU * s[1], TAU * s[2]]);
            match self.kind {
                SurfaceKind::Gyroid => nodal::gyroid(&t),
                SurfaceKind::Diamond => nodal::diamond(&t),
                SurfaceKind::SchwarzP => nodal::schwarz_p(&t),
                SurfaceKind::Neovius => nodal::neovius(&t),
                SurfaceKind::Lidinoid => nodal::lidinoid(&t),
                SurfaceKind::SplitP => nodal::split_p(&t),
                SurfaceKind::DPrime => nodal::d_prime(&t),
                SurfaceKind::DoubleGyroid => nodal::double_gyroid(&t),
                SurfaceKind::Iwp => nodal::iwp(&t),
                SurfaceKind::PwHybrid => nodal::pw_hybrid(&t),
                SurfaceKind::Scherk1 => nodal::scherk_1(&t, s),
                SurfaceKind::Scherk2 => nodal::scherk_2(&t, s),
                _ => unreachable!("skeletal kinds handled above"),
            }
        };
        FieldSample {
            value,
            gradient: Vector3::from(grad_u),
        }
    }

    pub fn evaluate(&self, p: &Point3<f64>) -> f64 {
        self.sample(p).value
    }

    /// Spatial gradient (per mm).
    pub fn gradient(&self, p: &Point3<f64>) -> Vector3<f64> {
        let g = self.sample(p).gradient;
        Vector3::new(
            g.x * TAU / self.period_length.x,
            g.y * TAU / self.period_length.y,
            g.z * TAU / self.period_length.z,
        )
    }
}

pub fn evaluate(spec: &FieldSpec, point: &Point3<f64>) -> f64 {
    spec.evaluate(point)
}

pub fn gradient(spec: &FieldSpec, point: &Point3<f64>) -> Vector3<f64> {
    spec.gradient(point)
}

/// Anything that can be sampled onto a grid.
pub trait ScalarField: Sync {
    fn value_at(&self, p: &Point3<f64>) -> f64;
}

impl ScalarField for FieldSpec {
    fn value_at(&self, p: &Point3<f64>) -> f64 {
        self.evaluate(p)
    }
}

impl<F> ScalarField for F
where
    F: Fn(&Point3<f64>) -> f64 + Sync,
{
    fn value_at(&self, p: &Point3<f64>) -> f64 {
        self(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(kind: SurfaceKind) -> FieldSpec {
        FieldSpec::new(kind, 50.0).unwrap()
    }

    #[test]
    fn values_at_origin() {
        let o = Point3::origin();
        assert_eq!(spec(SurfaceKind::Gyroid).evaluate(&o), 0.0);
        assert_eq!(spec(SurfaceKind::SchwarzP).evaluate(&o), 3.0);
        assert_eq!(spec(SurfaceKind::Iwp).evaluate(&o), 3.0);
        assert_eq!(spec(SurfaceKind::Neovius).evaluate(&o), 13.0);
    }

    #[test]
    fn schwarz_p_at_half_period() {
        let v = spec(SurfaceKind::SchwarzP).evaluate(&Point3::new(25.0, 0.0, 0.0));
        assert_relative_eq!(v, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn gradients_at_origin() {
        let o = Point3::origin();
        assert_eq!(spec(SurfaceKind::SchwarzP).gradient(&o), Vector3::zeros());
        let g = spec(SurfaceKind::Gyroid).gradient(&o);
        let k = TAU / 50.0;
        assert_relative_eq!(g, Vector3::repeat(k), epsilon = 1e-15);
    }

    #[test]
    fn descriptors() {
        let g = SurfaceKind::Gyroid.symmetry_descriptor();
        assert_eq!(g.symmetry, Symmetry::OddInversion);
        assert!(g.triply_periodic);
        let p = SurfaceKind::SchwarzP.symmetry_descriptor();
        assert_eq!(p.symmetry, Symmetry::OddHalfTranslation);
        assert!(p.triply_periodic);
        let s = SurfaceKind::Scherk1.symmetry_descriptor();
        assert_eq!(s.symmetry, Symmetry::None);
        assert!(!s.triply_periodic);
        assert_eq!(SurfaceKind::Diamond.symmetry_descriptor().symmetry, Symmetry::OddInversion);
        assert!(!SurfaceKind::Scherk2.symmetry_descriptor().triply_periodic);
    }

    #[test]
    fn tags_round_trip() {
        for k in SurfaceKind::ALL {
            assert_eq!(k.tag().parse::<SurfaceKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.tag()));
        }
        assert_eq!("Schwarz-P".parse::<SurfaceKind>().unwrap(), SurfaceKind::SchwarzP);
        assert!("klein_bottle".parse::<SurfaceKind>().is_err());
    }

    #[test]
    fn rejects_non_positive_period() {
        assert!(FieldSpec::new(SurfaceKind::Gyroid, 0.0).is_err());
        assert!(FieldSpec::new(SurfaceKind::Gyroid, -3.0).is_err());
        let mut s = spec(SurfaceKind::Gyroid);
        s.period_length.y = f64::NAN;
        assert!(s.validate().is_err());
    }

    #[test]
    fn spec_json_defaults() {
        let s: FieldSpec =
            serde_json::from_str(r#"{"kind":"gyroid","period_length":[50,50,50]}"#).unwrap();
        assert_eq!(s, spec(SurfaceKind::Gyroid));
    }

    #[test]
    fn skeletal_is_negative_on_struts() {
        let s = spec(SurfaceKind::Skeletal1);
        assert_relative_eq!(s.evaluate(&Point3::new(10.0, 0.0, 0.0)), -0.2, epsilon = 1e-12);
        assert!(s.evaluate(&Point3::new(25.0, 25.0, 25.0)) > 0.0);
    }
}
