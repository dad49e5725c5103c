//! Physical parameters, geometries, lattices, layer stacks and result types
//! shared by all computations.
//!
//! Unit conventions: lengths in meters, rates in s⁻¹, number densities in
//! nucleons/m³. Mass densities in kg/m³ are converted to nucleon densities
//! at ingestion (divide by the nucleon mass), so results never depend on
//! `m_n` once densities are expressed in nucleons.

use crate::{Error, Result};

/// Default nucleon mass in kg.
pub const DEFAULT_NUCLEON_MASS: f64 = 1.6749e-27;

/// Default relative tolerance for internal quadrature.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// CSL model constants and the tolerance policy for internal quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    /// Collapse rate λ, s⁻¹.
    pub lambda: f64,
    /// Localization distance r_C, m.
    pub r_c: f64,
    /// Nucleon mass, kg. Only used to convert kg/m³ densities.
    pub m_n: f64,
    /// Relative tolerance for internal quadrature, in (0, 1e-3).
    pub rel_tol: f64,
}

impl PhysParams {
    /// Parameters with default nucleon mass and quadrature tolerance.
    pub fn new(lambda: f64, r_c: f64) -> Result<Self> {
        Self::with(lambda, r_c, DEFAULT_NUCLEON_MASS, DEFAULT_REL_TOL)
    }

    pub fn with(lambda: f64, r_c: f64, m_n: f64, rel_tol: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be > 0, got {lambda}"
            )));
        }
        if !(r_c > 0.0) || !r_c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "r_c must be > 0, got {r_c}"
            )));
        }
        if !(m_n > 0.0) || !m_n.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "m_n must be > 0, got {m_n}"
            )));
        }
        if !(rel_tol > 0.0 && rel_tol < 1e-3) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must lie in (0, 1e-3), got {rel_tol}"
            )));
        }
        Ok(Self {
            lambda,
            r_c,
            m_n,
            rel_tol,
        })
    }
}

/// Shape of a homogeneous rigid body. Dimensions in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Cuboid { lx: f64, ly: f64, lz: f64 },
    Cube { l: f64 },
    Sphere { r: f64 },
    Cylinder { r: f64, l: f64 },
}

impl Shape {
    pub fn volume(&self) -> f64 {
        match *self {
            Shape::Cuboid { lx, ly, lz } => lx * ly * lz,
            Shape::Cube { l } => l * l * l,
            Shape::Sphere { r } => 4.0 / 3.0 * std::f64::consts::PI * r * r * r,
            Shape::Cylinder { r, l } => std::f64::consts::PI * r * r * l,
        }
    }

    fn dims(&self) -> Vec<f64> {
        match *self {
            Shape::Cuboid { lx, ly, lz } => vec![lx, ly, lz],
            Shape::Cube { l } => vec![l],
            Shape::Sphere { r } => vec![r],
            Shape::Cylinder { r, l } => vec![r, l],
        }
    }

    /// Cuboid side lengths; a cube counts as a cuboid.
    pub fn as_cuboid(&self) -> Option<(f64, f64, f64)> {
        match *self {
            Shape::Cuboid { lx, ly, lz } => Some((lx, ly, lz)),
            Shape::Cube { l } => Some((l, l, l)),
            _ => None,
        }
    }

    /// Characteristic body radius used by regime flags: the half-extent of
    /// the smallest dimension (the sphere radius for a sphere).
    pub fn characteristic_radius(&self) -> f64 {
        match *self {
            Shape::Cuboid { lx, ly, lz } => 0.5 * lx.min(ly).min(lz),
            Shape::Cube { l } => 0.5 * l,
            Shape::Sphere { r } => r,
            Shape::Cylinder { r, l } => r.min(0.5 * l),
        }
    }
}

/// A homogeneous body: shape plus uniform nucleon number density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub shape: Shape,
    /// Nucleon number density, nucleons/m³.
    pub density_n: f64,
}

impl Geometry {
    /// Body with density given directly in nucleons/m³.
    pub fn new(shape: Shape, density_n: f64) -> Result<Self> {
        for d in shape.dims() {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::InvalidGeometry(format!(
                    "all dimensions must be > 0, got {d}"
                )));
            }
        }
        if !(density_n > 0.0) || !density_n.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "density must be > 0, got {density_n}"
            )));
        }
        Ok(Self { shape, density_n })
    }

    /// Body with mass density in kg/m³, converted via the nucleon mass.
    pub fn with_mass_density(shape: Shape, rho_kg: f64, m_n: f64) -> Result<Self> {
        if !(m_n > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "m_n must be > 0, got {m_n}"
            )));
        }
        Self::new(shape, rho_kg / m_n)
    }

    pub fn volume(&self) -> f64 {
        self.shape.volume()
    }
}

/// Total number of nucleons in a homogeneous body.
pub fn nucleon_count(geom: &Geometry) -> f64 {
    geom.density_n * geom.volume()
}

/// Cubic crystal: lattice constant, per-axis site counts, nucleons per site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    /// Lattice constant, m.
    pub l: f64,
    pub nx: u32,
    pub ny: u32,
    pub nz: u32,
    /// Nucleons per site.
    pub n_a: f64,
}

impl Lattice {
    pub fn new(l: f64, nx: u32, ny: u32, nz: u32, n_a: f64) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lattice constant must be > 0, got {l}"
            )));
        }
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::InvalidParameter(
                "site counts must be positive".into(),
            ));
        }
        if !(n_a > 0.0) || !n_a.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "n_a must be > 0, got {n_a}"
            )));
        }
        Ok(Self { l, nx, ny, nz, n_a })
    }

    /// Number of sites N_S = nx·ny·nz.
    pub fn n_sites(&self) -> u64 {
        u64::from(self.nx) * u64::from(self.ny) * u64::from(self.nz)
    }

    /// Total nucleon count N_TOT = n_a · N_S.
    pub fn n_total(&self) -> f64 {
        self.n_a * self.n_sites() as f64
    }

    /// Realized cuboid dimensions (nα·l) of the discretization.
    pub fn realized_dims(&self) -> (f64, f64, f64) {
        (
            f64::from(self.nx) * self.l,
            f64::from(self.ny) * self.l,
            f64::from(self.nz) * self.l,
        )
    }
}

/// Discretize a cuboid into a cubic crystal with the given lattice constant
/// and nucleons per site.
///
/// Per-axis site counts are round(Lα/l) with ties rounded to even, clamped
/// to at least one site; the realized dimensions nα·l are reported back by
/// [`Lattice::realized_dims`]. When `n_a` is chosen consistently
/// (n_a = density·l³) the lattice nucleon count matches density·volume to
/// within one site layer per axis.
pub fn lattice_from_cuboid(geom: &Geometry, l: f64, n_a: f64) -> Result<Lattice> {
    let (lx, ly, lz) = geom.shape.as_cuboid().ok_or_else(|| {
        Error::InvalidGeometry("lattice_from_cuboid requires a cuboid or cube".into())
    })?;
    if l > lx.min(ly).min(lz) {
        return Err(Error::InvalidGeometry(format!(
            "lattice constant {l} exceeds the smallest side {}",
            lx.min(ly).min(lz)
        )));
    }
    let sites = |len: f64| -> u32 { ((len / l).round_ties_even() as u32).max(1) };
    Lattice::new(l, sites(lx), sites(ly), sites(lz), n_a)
}

/// Rigid displacement between the two superposed configurations, m.
///
/// The cuboid kernels factorize per axis, so each axis carries its own
/// component; non-cuboid geometries accept only axis-aligned displacements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl Displacement {
    pub fn new(dx: f64, dy: f64, dz: f64) -> Result<Self> {
        if !(dx.is_finite() && dy.is_finite() && dz.is_finite()) {
            return Err(Error::InvalidParameter(
                "displacement must be finite".into(),
            ));
        }
        Ok(Self { dx, dy, dz })
    }

    /// Displacement along z only, the conventional orientation.
    pub fn along_z(dz: f64) -> Result<Self> {
        Self::new(0.0, 0.0, dz)
    }

    /// Magnitude Δ = |(dx, dy, dz)|.
    pub fn magnitude(&self) -> f64 {
        (self.dx * self.dx + self.dy * self.dy + self.dz * self.dz).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.dx == 0.0 && self.dy == 0.0 && self.dz == 0.0
    }

    /// Some((axis index, |component|)) if the displacement lies on a single
    /// axis (0 = x, 1 = y, 2 = z). A zero displacement counts as z-aligned.
    pub fn single_axis(&self) -> Option<(usize, f64)> {
        match (self.dx == 0.0, self.dy == 0.0, self.dz == 0.0) {
            (true, true, _) => Some((2, self.dz.abs())),
            (true, _, true) => Some((1, self.dy.abs())),
            (_, true, true) => Some((0, self.dx.abs())),
            _ => None,
        }
    }

    /// Some(|component|) if the displacement lies on a single axis.
    pub fn single_axis_magnitude(&self) -> Option<f64> {
        self.single_axis().map(|(_, m)| m)
    }
}

/// One layer of a stack: thickness in m, density in nucleons/m³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub thickness: f64,
    pub density_n: f64,
}

/// Ordered stack of uniform layers on a square cross-section of side `d`.
///
/// Layer boundaries are the cumulative positions z₀ = 0 < z₁ < … < z_M;
/// layer i occupies (z_{i-1}, z_i). Zero density is allowed (voids).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    /// Square-face side, m.
    pub d: f64,
    pub layers: Vec<Layer>,
}

impl LayerStack {
    pub fn new(d: f64, layers: Vec<Layer>) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "face side must be > 0, got {d}"
            )));
        }
        if layers.is_empty() {
            return Err(Error::InvalidParameter(
                "stack needs at least one layer".into(),
            ));
        }
        for layer in &layers {
            if !(layer.thickness > 0.0) || !layer.thickness.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "layer thickness must be > 0, got {}",
                    layer.thickness
                )));
            }
            if !(layer.density_n >= 0.0) || !layer.density_n.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "layer density must be >= 0, got {}",
                    layer.density_n
                )));
            }
        }
        Ok(Self { d, layers })
    }

    /// Stack from (thickness, kg/m³) pairs, converting densities via `m_n`.
    pub fn from_mass_densities(d: f64, layers: &[(f64, f64)], m_n: f64) -> Result<Self> {
        if !(m_n > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "m_n must be > 0, got {m_n}"
            )));
        }
        Self::new(
            d,
            layers
                .iter()
                .map(|&(thickness, rho_kg)| Layer {
                    thickness,
                    density_n: rho_kg / m_n,
                })
                .collect(),
        )
    }

    /// Alternating two-density stack: N pairs of (odd, even) layers.
    pub fn alternating(
        d: f64,
        n_pairs: u32,
        l_odd: f64,
        l_even: f64,
        density_odd: f64,
        density_even: f64,
    ) -> Result<Self> {
        if n_pairs == 0 {
            return Err(Error::InvalidParameter(
                "need at least one layer pair".into(),
            ));
        }
        let mut layers = Vec::with_capacity(2 * n_pairs as usize);
        for _ in 0..n_pairs {
            layers.push(Layer {
                thickness: l_odd,
                density_n: density_odd,
            });
            layers.push(Layer {
                thickness: l_even,
                density_n: density_even,
            });
        }
        Self::new(d, layers)
    }

    /// Cumulative boundary positions z₀ = 0, z₁, …, z_M.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.layers.len() + 1);
        let mut acc = 0.0;
        z.push(0.0);
        for layer in &self.layers {
            acc += layer.thickness;
            z.push(acc);
        }
        z
    }

    /// Total stack length L = Σ thickness.
    pub fn total_length(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }
}

/// Method that produced a rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ContinuousExact,
    ContinuousSmallDelta,
    Discrete,
    Gpr,
    Adler,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::ContinuousExact => "continuous_exact",
            Method::ContinuousSmallDelta => "continuous_small_delta",
            Method::Discrete => "discrete",
            Method::Gpr => "gpr",
            Method::Adler => "adler",
        }
    }
}

/// One regime-of-validity flag attached to a rate estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeFlag {
    /// Stable name, e.g. "delta_regime".
    pub name: &'static str,
    pub satisfied: bool,
    /// Human-readable statement of the requirement.
    pub requirement: String,
}

impl RegimeFlag {
    pub fn new(name: &'static str, satisfied: bool, requirement: impl Into<String>) -> Self {
        Self {
            name,
            satisfied,
            requirement: requirement.into(),
        }
    }
}

/// A collapse rate with its provenance and regime flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    /// Reduction rate Γ, s⁻¹.
    pub gamma: f64,
    pub method: Method,
    /// Regime flags; estimates outside their regime are still returned,
    /// with the violated flags marking them.
    pub validity: Vec<RegimeFlag>,
    /// Optional error estimate, s⁻¹.
    pub error_estimate: Option<f64>,
}

impl RateResult {
    pub fn exact(gamma: f64, method: Method) -> Self {
        Self {
            gamma,
            method,
            validity: Vec::new(),
            error_estimate: None,
        }
    }

    pub fn all_valid(&self) -> bool {
        self.validity.iter().all(|f| f.satisfied)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(PhysParams::new(1e-8, 1e-7).is_ok());
        assert!(PhysParams::new(0.0, 1e-7).is_err());
        assert!(PhysParams::new(1e-8, -1.0).is_err());
        assert!(PhysParams::with(1e-8, 1e-7, 1.7e-27, 1e-2).is_err());
        let p = PhysParams::new(1e-8, 1e-7).unwrap();
        assert_eq!(p.m_n, DEFAULT_NUCLEON_MASS);
    }

    #[test]
    fn nucleon_counts_by_shape() {
        let cube = Geometry::new(Shape::Cube { l: 1e-6 }, 1e30).unwrap();
        assert!((nucleon_count(&cube) - 1e12).abs() / 1e12 <= 1e-15);

        let sphere = Geometry::new(Shape::Sphere { r: 1e-7 }, 1e30).unwrap();
        let expected = 4.0 / 3.0 * std::f64::consts::PI * 1e-21 * 1e30;
        assert!((nucleon_count(&sphere) - expected).abs() / expected <= 1e-15);
        assert!((expected - 4.18879e9).abs() / 4.18879e9 <= 1e-5);

        let cyl = Geometry::new(Shape::Cylinder { r: 1e-7, l: 1e-6 }, 1e30).unwrap();
        let expected = std::f64::consts::PI * 1e-14 * 1e-6 * 1e30;
        assert!((nucleon_count(&cyl) - expected).abs() / expected <= 1e-15);
        assert!((expected - 3.14159e10).abs() / 3.14159e10 <= 1e-5);
    }

    #[test]
    fn mass_density_conversion_cancels_m_n() {
        let m_n = DEFAULT_NUCLEON_MASS;
        let g = Geometry::with_mass_density(Shape::Cube { l: 1e-6 }, 2.2e3, m_n).unwrap();
        assert!((g.density_n - 2.2e3 / m_n).abs() / g.density_n <= 1e-15);
    }

    #[test]
    fn lattice_from_cuboid_exact_division() {
        let geom = Geometry::new(
            Shape::Cuboid {
                lx: 1e-6,
                ly: 1e-6,
                lz: 1e-6,
            },
            1e30,
        )
        .unwrap();
        let lat = lattice_from_cuboid(&geom, 1e-7, 1.0).unwrap();
        assert_eq!((lat.nx, lat.ny, lat.nz), (10, 10, 10));
        assert_eq!(lat.n_sites(), 1000);

        let cube = Geometry::new(Shape::Cube { l: 2e-7 }, 1e30).unwrap();
        let lat = lattice_from_cuboid(&cube, 1e-7, 5.0).unwrap();
        assert_eq!((lat.nx, lat.ny, lat.nz), (2, 2, 2));
        assert_eq!(lat.n_total(), 40.0);
    }

    #[test]
    fn lattice_from_cuboid_rounding_rule() {
        // 1.05e-6/1e-7 lands a hair below 10.5 in binary; the tie rule only
        // engages on exact halves. Both facts are pinned here.
        let geom = Geometry::new(
            Shape::Cuboid {
                lx: 1.05e-6,
                ly: 1e-6,
                lz: 1e-6,
            },
            1e30,
        )
        .unwrap();
        let lat = lattice_from_cuboid(&geom, 1e-7, 1.0).unwrap();
        let ratio = 1.05e-6_f64 / 1e-7;
        assert_eq!(ratio.round_ties_even() as u32, lat.nx);

        // Exact representable ties round to even.
        let geom = Geometry::new(
            Shape::Cuboid {
                lx: 21.0,
                ly: 23.0,
                lz: 2.0,
            },
            1.0,
        )
        .unwrap();
        let lat = lattice_from_cuboid(&geom, 2.0, 1.0).unwrap();
        assert_eq!((lat.nx, lat.ny, lat.nz), (10, 12, 1));
        let (rx, _, _) = lat.realized_dims();
        assert_eq!(rx, 20.0);
    }

    #[test]
    fn lattice_from_cuboid_errors() {
        let sphere = Geometry::new(Shape::Sphere { r: 1e-6 }, 1e30).unwrap();
        assert!(matches!(
            lattice_from_cuboid(&sphere, 1e-7, 1.0),
            Err(Error::InvalidGeometry(_))
        ));
        let geom = Geometry::new(Shape::Cube { l: 1e-7 }, 1e30).unwrap();
        assert!(lattice_from_cuboid(&geom, 2e-7, 1.0).is_err());
    }

    #[test]
    fn lattice_count_tracks_density_within_one_layer() {
        // With n_a = density·l³ the lattice holds density·V nucleons up to
        // one site layer per axis.
        let geom = Geometry::new(
            Shape::Cuboid {
                lx: 1.04e-6,
                ly: 0.97e-6,
                lz: 1.51e-6,
            },
            1e27,
        )
        .unwrap();
        let l = 1e-7;
        let n_a = geom.density_n * l * l * l;
        let lat = lattice_from_cuboid(&geom, l, n_a).unwrap();
        let exact = nucleon_count(&geom);
        let (rx, ry, rz) = lat.realized_dims();
        let bound = exact * ((l / rx + 1.0) * (l / ry + 1.0) * (l / rz + 1.0) - 1.0);
        assert!((lat.n_total() - exact).abs() <= bound);
    }

    #[test]
    fn displacement_axis_detection() {
        let d = Displacement::along_z(-3e-7).unwrap();
        assert_eq!(d.single_axis_magnitude(), Some(3e-7));
        assert!((d.magnitude() - 3e-7).abs() <= 1e-22);
        let d = Displacement::new(1e-7, 0.0, 1e-7).unwrap();
        assert_eq!(d.single_axis_magnitude(), None);
        assert!(Displacement::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(Displacement::new(0.0, 0.0, 0.0).unwrap().is_zero());
    }

    #[test]
    fn layer_stack_boundaries_are_cumulative() {
        let stack = LayerStack::new(
            1e-4,
            vec![
                Layer {
                    thickness: 1e-7,
                    density_n: 1.0,
                },
                Layer {
                    thickness: 3e-7,
                    density_n: 0.0,
                },
            ],
        )
        .unwrap();
        assert_eq!(stack.boundaries(), vec![0.0, 1e-7, 4e-7]);
        assert!((stack.total_length() - 4e-7).abs() <= 1e-22);

        assert!(LayerStack::new(1e-4, vec![]).is_err());
        assert!(LayerStack::new(
            1e-4,
            vec![Layer {
                thickness: -1.0,
                density_n: 1.0
            }]
        )
        .is_err());
    }

    #[test]
    fn alternating_stack_layout() {
        let stack = LayerStack::alternating(1e-4, 2, 1e-7, 2e-7, 5.0, 3.0).unwrap();
        assert_eq!(stack.layers.len(), 4);
        assert_eq!(stack.boundaries(), vec![0.0, 1e-7, 3e-7, 4e-7, 6e-7]);
        assert_eq!(stack.layers[0].density_n, 5.0);
        assert_eq!(stack.layers[1].density_n, 3.0);
    }
}
