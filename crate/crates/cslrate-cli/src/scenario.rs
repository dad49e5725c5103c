//! Scenario file schema and conversion into core domain types.
//!
//! ```json
//! {
//!   "params": {"lambda": 1e-8, "r_c": 1e-7, "m_n": 1.6749e-27, "rel_tol": 1e-10},
//!   "geometry": {"kind": "cuboid", "lx": 1e-6, "ly": 1e-6, "lz": 2e-6,
//!                "density": 1e30, "density_unit": "nucleons/m3"},
//!   "lattice": {"l": 1e-7, "n_a": 1.0},
//!   "displacement": {"dx": 0, "dy": 0, "dz": 1e-10},
//!   "layers": [{"thickness": 3.7e-7, "density": 7.2e3}]
//! }
//! ```
//!
//! `m_n`, `rel_tol`, `lattice`, `layers` and the displacement components
//! are optional; geometry dimensions depend on `kind` (cuboid: lx/ly/lz,
//! cube: l, sphere: r, cylinder: r/l). `density_unit` is "nucleons/m3" or
//! "kg/m3"; layer densities are always kg/m3.

use cslrate_core::domain::{Displacement, Geometry, Lattice, LayerStack, PhysParams, Shape};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub params: ParamsSpec,
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub lattice: Option<LatticeSpec>,
    pub displacement: DisplacementSpec,
    #[serde(default)]
    pub layers: Option<Vec<LayerSpec>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub lambda: f64,
    pub r_c: f64,
    #[serde(default)]
    pub m_n: Option<f64>,
    #[serde(default)]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub kind: String,
    #[serde(default)]
    pub lx: Option<f64>,
    #[serde(default)]
    pub ly: Option<f64>,
    #[serde(default)]
    pub lz: Option<f64>,
    #[serde(default)]
    pub l: Option<f64>,
    #[serde(default)]
    pub r: Option<f64>,
    pub density: f64,
    pub density_unit: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub l: f64,
    pub n_a: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisplacementSpec {
    #[serde(default)]
    pub dx: f64,
    #[serde(default)]
    pub dy: f64,
    #[serde(default)]
    pub dz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    /// Thickness in m.
    pub thickness: f64,
    /// Mass density in kg/m³.
    pub density: f64,
}

/// Scenario resolved into core types, with the raw JSON kept for echoing.
#[derive(Debug)]
pub struct Scenario {
    pub params: PhysParams,
    pub geometry: Geometry,
    pub displacement: Displacement,
    pub lattice: Option<Lattice>,
    pub stack: Option<LayerStack>,
    pub raw: serde_json::Value,
}

fn schema_err(msg: impl std::fmt::Display) -> CliError {
    CliError::Schema(msg.to_string())
}

pub fn load(path: &std::path::Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| schema_err(format!("cannot read {}: {e}", path.display())))?;
    let file: ScenarioFile =
        serde_json::from_str(&text).map_err(|e| schema_err(format!("{}: {e}", path.display())))?;
    let raw: serde_json::Value = serde_json::from_str(&text).expect("parsed once already");
    resolve(file, raw)
}

pub fn resolve(file: ScenarioFile, raw: serde_json::Value) -> Result<Scenario, CliError> {
    let p = &file.params;
    let params = PhysParams::with(
        p.lambda,
        p.r_c,
        p.m_n.unwrap_or(cslrate_core::domain::DEFAULT_NUCLEON_MASS),
        p.rel_tol.unwrap_or(cslrate_core::domain::DEFAULT_REL_TOL),
    )
    .map_err(|e| schema_err(format!("params: {e}")))?;

    let g = &file.geometry;
    let need = |name: &str, v: Option<f64>| {
        v.ok_or_else(|| {
            schema_err(format!(
                "geometry: kind \"{}\" requires field \"{name}\"",
                g.kind
            ))
        })
    };
    let shape = match g.kind.as_str() {
        "cuboid" => Shape::Cuboid {
            lx: need("lx", g.lx)?,
            ly: need("ly", g.ly)?,
            lz: need("lz", g.lz)?,
        },
        "cube" => Shape::Cube { l: need("l", g.l)? },
        "sphere" => Shape::Sphere { r: need("r", g.r)? },
        "cylinder" => Shape::Cylinder {
            r: need("r", g.r)?,
            l: need("l", g.l)?,
        },
        other => {
            return Err(schema_err(format!(
                "geometry: unknown kind \"{other}\" (expected cuboid, cube, sphere or cylinder)"
            )))
        }
    };
    let geometry = match g.density_unit.as_str() {
        "nucleons/m3" => Geometry::new(shape, g.density),
        "kg/m3" => Geometry::with_mass_density(shape, g.density, params.m_n),
        other => {
            return Err(schema_err(format!(
                "geometry: unknown density_unit \"{other}\" (expected \"nucleons/m3\" or \"kg/m3\")"
            )))
        }
    }
    .map_err(|e| schema_err(format!("geometry: {e}")))?;

    let displacement = Displacement::new(
        file.displacement.dx,
        file.displacement.dy,
        file.displacement.dz,
    )
    .map_err(|e| schema_err(format!("displacement: {e}")))?;

    let lattice = file
        .lattice
        .as_ref()
        .map(|spec| {
            cslrate_core::domain::lattice_from_cuboid(&geometry, spec.l, spec.n_a)
                .map_err(|e| schema_err(format!("lattice: {e}")))
        })
        .transpose()?;

    let stack = file
        .layers
        .as_ref()
        .map(|layers| {
            // layered bodies use the geometry's square cross-section
            let (lx, ly, _) = geometry.shape.as_cuboid().ok_or_else(|| {
                schema_err("layers: geometry must be a cuboid or cube with a square face")
            })?;
            if (lx - ly).abs() > 1e-12 * lx.max(ly) {
                return Err(schema_err(format!(
                    "layers: cross-section must be square (lx = {lx}, ly = {ly})"
                )));
            }
            let pairs: Vec<(f64, f64)> = layers.iter().map(|l| (l.thickness, l.density)).collect();
            LayerStack::from_mass_densities(lx, &pairs, params.m_n)
                .map_err(|e| schema_err(format!("layers: {e}")))
        })
        .transpose()?;

    Ok(Scenario {
        params,
        geometry,
        displacement,
        lattice,
        stack,
        raw,
    })
}
