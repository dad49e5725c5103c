//! Diffusion coefficients η^αβ of the small-displacement master equation.
//!
//! For Δ ≪ r_C the reduction rate is Γ = Δ²η^zz, so η^zz is the quantity
//! experiments bound. Provided here:
//!
//! - the discrete pair-sum tensor over lattice sites, factorized per axis
//!   (off-diagonals vanish identically for a cubic lattice);
//! - the uniform-cuboid closed form, the reference all other routes are
//!   checked against;
//! - exact layered stacks: the pair sum over layers reduces to a
//!   quadruple-Gaussian combination over the layer boundaries, windowed so
//!   stacks with 10⁵ layers stay O(M);
//! - the alternating two-density closed form with its boundary/interface
//!   decomposition and order expansion — the layering enhancement is
//!   (2N−1)·Δϱ² from the interfaces, damped by −2(2N−1)Δϱ²e^(−l²/4r_C²)
//!   when layers are thinner than r_C;
//! - the momentum-space form (Gaussian-weighted second moment of |μ(k)|²),
//!   evaluated by per-axis adaptive quadrature as an independent
//!   cross-check of the position-space algebra.
//!
//! Densities follow the nucleon-count convention: kg/m³ inputs are divided
//! by m_N at ingestion, after which m_N cancels from every formula.

use crate::continuum::{g_factor, small_delta_bracket};
use crate::domain::{nucleon_count, Geometry, Lattice, LayerStack, PhysParams};
use crate::{Error, Result};

/// separation beyond which the pair Gaussian is below 1e-15
const PAIR_CUTOFF_RC: f64 = 12.0;

/// Site-count guard for the discrete pair sum.
pub const MAX_ETA_DISCRETE_SITES: u64 = 1_000_000;

/// How a diffusion tensor was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffusionMethod {
    DiscreteSum,
    MomentumQuadrature,
}

/// Symmetric 3×3 diffusion tensor, entries in s⁻¹·m⁻² scale with the
/// nucleon-count² convention absorbed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionTensor {
    pub eta: [[f64; 3]; 3],
    pub method: DiffusionMethod,
}

impl DiffusionTensor {
    pub fn zz(&self) -> f64 {
        self.eta[2][2]
    }

    pub fn trace(&self) -> f64 {
        self.eta[0][0] + self.eta[1][1] + self.eta[2][2]
    }

    /// Gershgorin lower bound on the smallest eigenvalue; ≥ −ε·trace is the
    /// positive-semidefiniteness check used by the tests.
    pub fn min_eigenvalue_bound(&self) -> f64 {
        (0..3)
            .map(|i| {
                let off: f64 = (0..3)
                    .filter(|&j| j != i)
                    .map(|j| self.eta[i][j].abs())
                    .sum();
                self.eta[i][i] - off
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn phi(x: f64, r_c: f64) -> f64 {
    let z = x / (2.0 * r_c);
    if z.abs() >= 27.0 {
        0.0
    } else {
        (-z * z).exp()
    }
}

/// Discrete diffusion tensor of a cubic lattice.
///
/// η^αβ = λ/(8r_C⁴m_N²) Σ_{ij} m_i m_j e^(−(r_i−r_j)²/4r_C²) ×
/// {(r^α_i−r^α_j)(r^β_i−r^β_j) off-diagonal; 2r_C²−(r^α_i−r^α_j)² diagonal}.
///
/// The cubic-lattice pair sum factorizes per axis, with each axis truncated
/// at separation 12·r_C; the odd first-moment factors vanish, so
/// off-diagonals are exactly zero. Lattices above
/// [`MAX_ETA_DISCRETE_SITES`] sites are rejected.
pub fn eta_discrete(lat: &Lattice, params: &PhysParams) -> Result<DiffusionTensor> {
    if lat.n_sites() > MAX_ETA_DISCRETE_SITES {
        return Err(Error::SizeLimit {
            sites: lat.n_sites(),
            max: MAX_ETA_DISCRETE_SITES,
        });
    }
    let r_c = params.r_c;
    let max_m = (PAIR_CUTOFF_RC * r_c / lat.l).ceil() as i64;
    // per-axis Σ_m (n−|m|)·{1, (ml)²}·e^(−(ml)²/4r_C²)
    let moments = |n: u32| -> (f64, f64) {
        let top = max_m.min(i64::from(n) - 1);
        let mut zeroth = 0.0;
        let mut second = 0.0;
        for m in -top..=top {
            let dist = m as f64 * lat.l;
            let w = (i64::from(n) - m.abs()) as f64 * phi(dist, r_c);
            zeroth += w;
            second += w * dist * dist;
        }
        (zeroth, second)
    };
    let per_axis = [moments(lat.nx), moments(lat.ny), moments(lat.nz)];
    let c = params.lambda * lat.n_a * lat.n_a / (8.0 * r_c.powi(4));
    let mut eta = [[0.0_f64; 3]; 3];
    for alpha in 0..3 {
        let mut diag = c * (2.0 * r_c * r_c * per_axis[alpha].0 - per_axis[alpha].1);
        for beta in 0..3 {
            if beta != alpha {
                diag *= per_axis[beta].0;
            }
        }
        eta[alpha][alpha] = diag;
    }
    Ok(DiffusionTensor {
        eta,
        method: DiffusionMethod::DiscreteSum,
    })
}

/// η^zz of a homogeneous cuboid: λ N_TOT² g(L_x)g(L_y)(1−e^(−L_z²/4r_C²))/L_z².
///
/// Identically Γ_small-Δ/Δ², with no quadrature and no sum truncation —
/// the reference leg of the consistency triangle.
pub fn eta_zz_cuboid_uniform(geom: &Geometry, params: &PhysParams) -> Result<f64> {
    let (lx, ly, lz) = geom.shape.as_cuboid().ok_or_else(|| {
        Error::InvalidGeometry("eta_zz_cuboid_uniform requires a cuboid or cube".into())
    })?;
    let n_tot = nucleon_count(geom);
    Ok(params.lambda
        * n_tot
        * n_tot
        * g_factor(lx, params.r_c).value()
        * g_factor(ly, params.r_c).value()
        * small_delta_bracket(lz, params.r_c))
}

/// η^zz of a layered body, decomposed into the outer-boundary part and the
/// interface (density-variation) part, plus the order expansion when it
/// applies (equal-thickness alternating stacks).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerEta {
    pub total: f64,
    /// Contribution of the two outer faces: ϱ₁² + ϱ_M² − 2ϱ₁ϱ_M e^(−L²/4r_C²).
    pub boundary_part: f64,
    /// Everything sourced by density jumps inside the body; zero for a
    /// uniform stack.
    pub interface_part: f64,
    /// (η⁰, η¹): leading interface term (2N−1)Δϱ² + ϱ_o² + ϱ_e² and first
    /// correction −2(2N−1)Δϱ²e^(−l²/4r_C²). Only for equal-thickness
    /// alternating stacks.
    pub orders: Option<(f64, f64)>,
}

/// Common prefactor (λ d⁴/2)·g(d)² of the layered forms (nucleon-density
/// convention, m_N already cancelled).
fn stack_prefactor(d: f64, params: &PhysParams) -> f64 {
    let g = g_factor(d, params.r_c).value();
    0.5 * params.lambda * d.powi(4) * g * g
}

/// Exact η^zz of an arbitrary layer stack.
///
/// The double integral over the stack evaluates to a quadruple-Gaussian
/// combination over the cumulative layer boundaries z_i,
///
/// ```text
/// η^zz = (λd⁴/2) g(d)² Σ_{i,j} ϱ_i ϱ_j [φ(z_i−z_j) − φ(z_i−z_{j−1})
///                                       − φ(z_{i−1}−z_j) + φ(z_{i−1}−z_{j−1})],
/// ```
///
/// φ(x) = e^(−x²/4r_C²). Layer pairs separated by more than 12·r_C are
/// skipped, keeping tall stacks linear-time. With all densities equal this
/// telescopes to the uniform-cuboid value of the bounding body.
pub fn eta_zz_layered(stack: &LayerStack, params: &PhysParams) -> LayerEta {
    let r_c = params.r_c;
    let z = stack.boundaries();
    let m = stack.layers.len();
    let cutoff = PAIR_CUTOFF_RC * r_c;
    let mut sum = 0.0;
    let mut comp = 0.0; // Kahan
    for i in 0..m {
        let rho_i = stack.layers[i].density_n;
        if rho_i == 0.0 {
            continue;
        }
        for j in 0..m {
            // gap between the two layer intervals; all four boundary
            // distances are at least this large
            let gap = if j > i {
                z[j] - z[i + 1]
            } else if i > j {
                z[i] - z[j + 1]
            } else {
                0.0
            };
            if gap > cutoff {
                if j > i {
                    break;
                }
                continue;
            }
            let rho_j = stack.layers[j].density_n;
            if rho_j == 0.0 {
                continue;
            }
            let q = phi(z[i + 1] - z[j + 1], r_c)
                - phi(z[i + 1] - z[j], r_c)
                - phi(z[i] - z[j + 1], r_c)
                + phi(z[i] - z[j], r_c);
            let y = rho_i * rho_j * q - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
    }
    let k = stack_prefactor(stack.d, params);
    let total = k * sum;
    let rho_first = stack.layers[0].density_n;
    let rho_last = stack.layers[m - 1].density_n;
    let boundary = k
        * (rho_first * rho_first + rho_last * rho_last
            - 2.0 * rho_first * rho_last * phi(stack.total_length(), r_c));
    LayerEta {
        total,
        boundary_part: boundary,
        interface_part: total - boundary,
        orders: None,
    }
}

/// η^zz of an alternating two-density stack (N pairs of odd/even layers),
/// via the boundary-alternation closed form
///
/// ```text
/// η^zz = (λd⁴/2) g(d)² [ϱ_o² + ϱ_e² − 2ϱ_oϱ_e e^(−L²/4r_C²)
///                       + Δϱ²(Σ_{i,j=0}^{2N−1}(−1)^{i−j}φ(z_i−z_j) − 1)],
/// ```
///
/// where the z_i are the cumulative boundary positions of the alternating
/// pattern and Δϱ = ϱ_o − ϱ_e. The alternating sum is collapsed onto
/// boundary-distance classes, so the cost is O(min(N, r_C/l)). Densities
/// are mass densities in kg/m³, converted through params.m_n. For equal
/// thicknesses the order decomposition (η⁰, η¹) is attached.
pub fn eta_zz_alternating(
    n_pairs: u32,
    l_odd: f64,
    l_even: f64,
    rho_odd_kg: f64,
    rho_even_kg: f64,
    d: f64,
    params: &PhysParams,
) -> Result<LayerEta> {
    if n_pairs == 0 {
        return Err(Error::InvalidParameter(
            "need at least one layer pair".into(),
        ));
    }
    if !(l_odd > 0.0 && l_even > 0.0) {
        return Err(Error::InvalidParameter(
            "layer thicknesses must be > 0".into(),
        ));
    }
    let r_c = params.r_c;
    let rho_o = rho_odd_kg / params.m_n;
    let rho_e = rho_even_kg / params.m_n;
    let d_rho = rho_o - rho_e;
    let n2 = 2 * i64::from(n_pairs); // boundary indices 0..2N−1
    let period = l_odd + l_even;
    let length = f64::from(n_pairs) * period;
    let cutoff = PAIR_CUTOFF_RC * r_c + l_odd.max(l_even);

    // A = Σ_{i,j=0}^{2N−1} (−1)^{i−j} φ(z_i − z_j), grouped by i−j = m:
    // even m = 2k separates boundaries by k·(l_o+l_e); odd m = 2k+1 by
    // k·(l_o+l_e)+l_o from even i, k·(l_o+l_e)+l_e from odd i.
    let mut a_sum = n2 as f64; // m = 0
    for k in 0.. {
        let base = k as f64 * period;
        if base > cutoff {
            break;
        }
        if k > 0 {
            let m = 2 * k;
            if m >= n2 {
                break;
            }
            a_sum += 2.0 * (n2 - m) as f64 * phi(base, r_c);
        }
        let m = 2 * k + 1;
        if m < n2 {
            let count_even = ((n2 - m + 1) / 2) as f64;
            let count_odd = ((n2 - m - 1) / 2) as f64;
            a_sum -=
                2.0 * (count_even * phi(base + l_odd, r_c) + count_odd * phi(base + l_even, r_c));
        }
    }

    let k_pref = stack_prefactor(d, params);
    let boundary =
        k_pref * (rho_o * rho_o + rho_e * rho_e - 2.0 * rho_o * rho_e * phi(length, r_c));
    let interface = k_pref * d_rho * d_rho * (a_sum - 1.0);
    let interfaces = (n2 - 1) as f64; // 2N − 1
    let orders = ((l_odd - l_even).abs() <= 1e-12 * l_odd.max(l_even)).then(|| {
        let eta0 = k_pref * (interfaces * d_rho * d_rho + rho_o * rho_o + rho_e * rho_e);
        let eta1 = -2.0 * k_pref * interfaces * d_rho * d_rho * phi(l_odd, r_c);
        (eta0, eta1)
    });
    Ok(LayerEta {
        total: boundary + interface,
        boundary_part: boundary,
        interface_part: interface,
        orders,
    })
}

/// Leading-order enhancement of a layered body over the equal-mass uniform
/// one (ϱ_uni = (ϱ_o+ϱ_e)/2): η_lay/η_uni = 1 + (4N−1)Δϱ²/(ϱ_o+ϱ_e)².
///
/// Dimensionless in the densities, so any consistent unit works.
pub fn layering_ratio(n_pairs: u32, rho_odd: f64, rho_even: f64) -> Result<f64> {
    layering_ratio_interfaces(2 * n_pairs - 1, rho_odd, rho_even)
}

/// Same ratio expressed through the interface count I (I = 2N−1 for N full
/// pairs): 1 + (2I+1)Δϱ²/(ϱ_o+ϱ_e)². Useful for stacks that end on an odd
/// layer, where the pair count is not integral.
pub fn layering_ratio_interfaces(interfaces: u32, rho_odd: f64, rho_even: f64) -> Result<f64> {
    let sum = rho_odd + rho_even;
    if !(sum > 0.0) {
        return Err(Error::InvalidParameter("rho_o + rho_e must be > 0".into()));
    }
    let d_rho = rho_odd - rho_even;
    Ok(1.0 + f64::from(2 * interfaces + 1) * d_rho * d_rho / (sum * sum))
}

// 7-point Gauss–Legendre rule on [−1, 1].
const GL7_NODES: [f64; 7] = [
    -0.949_107_912_342_758_5,
    -0.741_531_185_599_394_4,
    -0.405_845_151_377_397_17,
    0.0,
    0.405_845_151_377_397_17,
    0.741_531_185_599_394_4,
    0.949_107_912_342_758_5,
];
const GL7_WEIGHTS: [f64; 7] = [
    0.129_484_966_168_869_93,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_94,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_93,
];

/// Deterministic composite Gauss–Legendre integrator: panel count doubles
/// until two successive grids agree to the requested relative tolerance
/// (measured against ∫|f|, so odd integrands converge to honest zeros).
struct Quad1d {
    evals: u64,
    budget: u64,
}

impl Quad1d {
    fn composite<F: Fn(f64) -> f64>(&mut self, f: &F, a: f64, b: f64, panels: u64) -> (f64, f64) {
        let h = (b - a) / panels as f64;
        let mut sum = 0.0;
        let mut sum_err = 0.0;
        let mut abs = 0.0;
        for i in 0..panels {
            let lo = a + i as f64 * h;
            let (c, half) = (lo + 0.5 * h, 0.5 * h);
            for k in 0..7 {
                let v = GL7_WEIGHTS[k] * f(c + half * GL7_NODES[k]) * half;
                abs += v.abs();
                let y = v - sum_err;
                let t = sum + y;
                sum_err = (t - sum) - y;
                sum = t;
            }
        }
        self.evals += 7 * panels;
        (sum, abs)
    }

    fn integrate<F: Fn(f64) -> f64>(
        &mut self,
        f: &F,
        a: f64,
        b: f64,
        initial_panels: u64,
        rel_tol: f64,
    ) -> Result<f64> {
        let mut panels = initial_panels.max(8);
        let (mut prev, _) = self.composite(f, a, b, panels);
        loop {
            panels *= 2;
            if self.evals + 7 * panels > self.budget {
                return Err(Error::QuadratureNonConvergence {
                    achieved: f64::NAN,
                    requested: rel_tol,
                    evaluations: self.evals,
                });
            }
            let (cur, abs) = self.composite(f, a, b, panels);
            if (cur - prev).abs() <= rel_tol * cur.abs().max(abs) {
                return Ok(cur);
            }
            prev = cur;
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Momentum-space diffusion tensor of a homogeneous cuboid,
///
/// ```text
/// η_αβ = λ r_C³/(2π^{3/2} m_N²) ∫ d³k e^(−r_C²k²) |μ(k)|² k_α k_β,
/// |μ(k)|² = ϱ_m² Π_α L_α² sinc²(k_α L_α/2),
/// ```
///
/// evaluated over [−K, K]³ with K = 10/r_C (the weight is below 4·10⁻⁴⁴
/// outside) at relative tolerance params.rel_tol. The 3D integral is a
/// product of per-axis 1D integrals, each integrated adaptively; the odd
/// first-moment factors are integrated numerically too, so off-diagonals
/// come out as quadrature-level zeros rather than being set to zero.
pub fn eta_momentum_space(geom: &Geometry, params: &PhysParams) -> Result<DiffusionTensor> {
    let (lx, ly, lz) = geom.shape.as_cuboid().ok_or_else(|| {
        Error::InvalidGeometry(
            "eta_momentum_space requires a cuboid or cube (analytic |mu(k)|^2)".into(),
        )
    })?;
    let r_c = params.r_c;
    let k_max = 10.0 / r_c;
    let dims = [lx, ly, lz];
    let mut quad = Quad1d {
        evals: 0,
        budget: 50_000_000,
    };

    // per-axis ∫ e^{-r_C²k²} L² sinc²(kL/2) · {1, k, k²} dk over [−K, K]
    let mut zeroth = [0.0_f64; 3];
    let mut first = [0.0_f64; 3];
    let mut second = [0.0_f64; 3];
    for (axis, &len) in dims.iter().enumerate() {
        let shape = move |k: f64| {
            let e = r_c * r_c * k * k;
            if e > 745.0 {
                return 0.0;
            }
            let s = sinc(0.5 * k * len);
            (-e).exp() * len * len * s * s
        };
        // at least two panels per sin² oscillation across [−K, K]
        let panels = 16 + (2.0 * k_max * len / std::f64::consts::PI).ceil() as u64;
        zeroth[axis] = quad.integrate(&|k| shape(k), -k_max, k_max, panels, params.rel_tol)?;
        first[axis] = quad.integrate(&|k| shape(k) * k, -k_max, k_max, panels, params.rel_tol)?;
        second[axis] =
            quad.integrate(&|k| shape(k) * k * k, -k_max, k_max, panels, params.rel_tol)?;
    }

    let c = params.lambda * r_c.powi(3) * geom.density_n * geom.density_n
        / (2.0 * std::f64::consts::PI.powf(1.5));
    let mut eta = [[0.0_f64; 3]; 3];
    for alpha in 0..3 {
        for beta in 0..3 {
            let mut v = c;
            for axis in 0..3 {
                v *= if axis == alpha && axis == beta {
                    second[axis]
                } else if axis == alpha || axis == beta {
                    first[axis]
                } else {
                    zeroth[axis]
                };
            }
            eta[alpha][beta] = v;
        }
    }
    Ok(DiffusionTensor {
        eta,
        method: DiffusionMethod::MomentumQuadrature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::gamma_small_delta;
    use crate::domain::{Displacement, Layer, Shape};

    fn rel_err(a: f64, b: f64) -> f64 {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    }

    fn params() -> PhysParams {
        PhysParams::new(1e-8, 1e-7).unwrap()
    }

    #[test]
    fn eta_discrete_single_site() {
        let p = params();
        let lat = Lattice::new(1e-7, 1, 1, 1, 3.0).unwrap();
        let t = eta_discrete(&lat, &p).unwrap();
        let want = p.lambda * 9.0 / (4.0 * p.r_c * p.r_c);
        for a in 0..3 {
            assert!(rel_err(t.eta[a][a], want) <= 1e-15);
            for b in 0..3 {
                if a != b {
                    assert_eq!(t.eta[a][b], 0.0);
                }
            }
        }
    }

    #[test]
    fn eta_discrete_two_sites_hand_enumeration() {
        // η^zz = (λ n_A²/8r_C⁴)[2·2r_C² + 2e^(−a²/4r_C²)(2r_C² − a²)]
        let p = params();
        let a = 0.8e-7;
        let lat = Lattice::new(a, 1, 1, 2, 2.0).unwrap();
        let t = eta_discrete(&lat, &p).unwrap();
        let e = (-a * a / (4.0 * p.r_c * p.r_c)).exp();
        let want = p.lambda * 4.0 / (8.0 * p.r_c.powi(4))
            * (4.0 * p.r_c * p.r_c + 2.0 * e * (2.0 * p.r_c * p.r_c - a * a));
        assert!(rel_err(t.zz(), want) <= 1e-14, "{} vs {want}", t.zz());
    }

    #[test]
    fn eta_discrete_cubic_symmetry_and_psd() {
        let p = params();
        let lat = Lattice::new(0.7e-7, 6, 6, 6, 1.0).unwrap();
        let t = eta_discrete(&lat, &p).unwrap();
        assert!(rel_err(t.eta[0][0], t.eta[2][2]) <= 1e-12);
        assert!(rel_err(t.eta[1][1], t.eta[2][2]) <= 1e-12);
        assert_eq!(t.eta[0][1], 0.0);
        assert_eq!(t.eta[1][2], 0.0);
        assert!(t.min_eigenvalue_bound() >= -1e-12 * t.trace());
    }

    #[test]
    fn eta_discrete_size_guard() {
        let p = params();
        let lat = Lattice::new(1e-7, 101, 101, 101, 1.0).unwrap();
        assert!(matches!(
            eta_discrete(&lat, &p),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn cuboid_uniform_is_small_delta_rate_over_delta_squared() {
        let p = params();
        let geom = Geometry::new(
            Shape::Cuboid {
                lx: 3e-7,
                ly: 5e-7,
                lz: 7e-7,
            },
            1e30,
        )
        .unwrap();
        let delta = 1e-5 * p.r_c;
        let eta = eta_zz_cuboid_uniform(&geom, &p).unwrap();
        let gamma = gamma_small_delta(&geom, &Displacement::along_z(delta).unwrap(), &p)
            .unwrap()
            .gamma;
        assert!(rel_err(eta, gamma / (delta * delta)) <= 1e-14);
    }

    #[test]
    fn cuboid_uniform_short_body_limit() {
        // L_z ≪ r_C: η → λN²g(L_x)g(L_y)/4r_C²
        let p = params();
        let geom = Geometry::new(
            Shape::Cuboid {
                lx: 4e-7,
                ly: 6e-7,
                lz: 1e-10,
            },
            1e30,
        )
        .unwrap();
        let n = nucleon_count(&geom);
        let eta = eta_zz_cuboid_uniform(&geom, &p).unwrap();
        let want = p.lambda * n * n * g_factor(4e-7, p.r_c).value() * g_factor(6e-7, p.r_c).value()
            / (4.0 * p.r_c * p.r_c);
        assert!(rel_err(eta, want) <= 1e-6);
    }

    #[test]
    fn layered_uniform_stack_reduces_to_cuboid() {
        let p = params();
        let d = 5e-7;
        let rho_n = 1e30;
        let stack = LayerStack::new(
            d,
            vec![
                Layer {
                    thickness: 2e-7,
                    density_n: rho_n
                };
                5
            ],
        )
        .unwrap();
        let eta = eta_zz_layered(&stack, &p);
        let geom = Geometry::new(
            Shape::Cuboid {
                lx: d,
                ly: d,
                lz: 10e-7,
            },
            rho_n,
        )
        .unwrap();
        let want = eta_zz_cuboid_uniform(&geom, &p).unwrap();
        assert!(rel_err(eta.total, want) <= 1e-12, "{} vs {want}", eta.total);
        assert!(eta.interface_part.abs() <= 1e-12 * eta.total);
    }

    #[test]
    fn layered_zero_density_layer_contributes_nothing() {
        // (ϱ, 0) two-layer body equals the uniform body of the first layer
        let p = params();
        let d = 5e-7;
        let stack = LayerStack::new(
            d,
            vec![
                Layer {
                    thickness: 3e-7,
                    density_n: 1e30,
                },
                Layer {
                    thickness: 3e-7,
                    density_n: 0.0,
                },
            ],
        )
        .unwrap();
        let eta = eta_zz_layered(&stack, &p);
        let geom = Geometry::new(
            Shape::Cuboid {
                lx: d,
                ly: d,
                lz: 3e-7,
            },
            1e30,
        )
        .unwrap();
        let want = eta_zz_cuboid_uniform(&geom, &p).unwrap();
        assert!(rel_err(eta.total, want) <= 1e-12);
    }

    #[test]
    fn layered_agrees_with_alternating_closed_form() {
        let p = params();
        let d = 1e-5;
        for &(n, l_over_rc) in &[(1_u32, 2.0), (3, 0.5), (10, 4.0), (24, 1.0)] {
            let l = l_over_rc * p.r_c;
            let (rho_o_kg, rho_e_kg) = (7.2e3, 2.2e3);
            let stack =
                LayerStack::alternating(d, n, l, l, rho_o_kg / p.m_n, rho_e_kg / p.m_n).unwrap();
            let a = eta_zz_layered(&stack, &p);
            let b = eta_zz_alternating(n, l, l, rho_o_kg, rho_e_kg, d, &p).unwrap();
            assert!(
                rel_err(a.total, b.total) <= 1e-12,
                "N={n} l={l_over_rc}r_C: {} vs {}",
                a.total,
                b.total
            );
            assert!(rel_err(a.boundary_part, b.boundary_part) <= 1e-12);
        }
    }

    #[test]
    fn alternating_uniform_density_has_no_interface_part() {
        let p = params();
        let e = eta_zz_alternating(8, 2e-7, 2e-7, 4.7e3, 4.7e3, 1e-5, &p).unwrap();
        assert_eq!(e.interface_part, 0.0);
        assert!(rel_err(e.total, e.boundary_part) <= 1e-15);
    }

    #[test]
    fn alternating_thick_layers_reach_leading_order() {
        // l ≫ r_C: total → η⁰ within 0.1%
        let p = params();
        let e = eta_zz_alternating(10, 30.0 * p.r_c, 30.0 * p.r_c, 7.2e3, 2.2e3, 1e-5, &p).unwrap();
        let (eta0, _) = e.orders.unwrap();
        assert!(rel_err(e.total, eta0) <= 1e-3, "{} vs {eta0}", e.total);
    }

    #[test]
    fn alternating_thin_layers_lose_to_first_order() {
        // l = r_C: the negative first order bites, total < η⁰
        let p = params();
        let e = eta_zz_alternating(10, p.r_c, p.r_c, 7.2e3, 2.2e3, 1e-5, &p).unwrap();
        let (eta0, eta1) = e.orders.unwrap();
        assert!(e.total < eta0);
        assert!(eta1 < 0.0);
    }

    #[test]
    fn alternating_order_decomposition_accuracy() {
        // |total − (η⁰+η¹)| ≤ 10·|η¹|·e^(−3l²/4r_C²) for l ≥ r_C
        let p = params();
        for &(n, l_over_rc) in &[(3_u32, 1.0), (5, 1.5), (12, 2.0), (8, 3.0)] {
            let l = l_over_rc * p.r_c;
            let e = eta_zz_alternating(n, l, l, 7.2e3, 2.2e3, 1e-5, &p).unwrap();
            let (eta0, eta1) = e.orders.unwrap();
            let resid = (e.total - eta0 - eta1).abs();
            let bound = 10.0 * eta1.abs() * (-0.75 * l * l / (p.r_c * p.r_c)).exp();
            assert!(resid <= bound, "N={n} l={l_over_rc}: {resid} vs {bound}");
        }
    }

    #[test]
    fn alternating_unequal_thickness_has_no_orders() {
        let p = params();
        let e = eta_zz_alternating(4, 1e-7, 2e-7, 7.2e3, 2.2e3, 1e-5, &p).unwrap();
        assert!(e.orders.is_none());
    }

    #[test]
    fn interface_part_linear_in_interface_count() {
        // with l ≫ r_C only the diagonal class survives: interface part is
        // exactly (2N−1)·K·Δϱ², linear with zero residual
        let p = params();
        let l = 40.0 * p.r_c;
        let vals: Vec<f64> = (1..=6)
            .map(|n| {
                eta_zz_alternating(n, l, l, 7.2e3, 2.2e3, 1e-5, &p)
                    .unwrap()
                    .interface_part
            })
            .collect();
        let step = vals[1] - vals[0];
        for w in vals.windows(2) {
            assert!(rel_err(w[1] - w[0], step) <= 1e-12);
        }
        // per-interface step is 2·K·Δϱ² (two more interfaces per pair)
        let k = stack_prefactor(1e-5, &p);
        let d_rho = (7.2e3 - 2.2e3) / p.m_n;
        assert!(rel_err(step, 2.0 * k * d_rho * d_rho) <= 1e-12);
    }

    #[test]
    fn ratio_formula_and_identity() {
        assert_eq!(layering_ratio(5, 3.0e3, 3.0e3).unwrap(), 1.0);
        // algebraic identity used in the derivation
        let (o, e) = (7.2e3_f64, 2.2e3_f64);
        let lhs = 2.0 * (o * o + e * e) / (o + e).powi(2);
        let rhs = 1.0 + (o - e).powi(2) / (o + e).powi(2);
        assert!((lhs - rhs).abs() <= 1e-15);
        assert!(layering_ratio(3, 0.0, 0.0).is_err());
    }

    #[test]
    fn ratio_cantilever_and_interferometer_estimates() {
        // 47-layer cantilever stack: 46 interfaces, ratio ≈ 27.3
        let r = layering_ratio_interfaces(46, 7.2e3, 2.2e3).unwrap();
        assert!(rel_err(r, 27.312_811_2) <= 1e-8, "{r}");
        // gravitational-wave test mass: N = 1e5 pairs, Δϱ = 5e3 over
        // silica ⇒ enhancement of order 1e5
        let r = layering_ratio(100_000, 7.2e3, 2.2e3).unwrap();
        assert!(r > 1e5 && r < 2e5, "{r}");
    }

    #[test]
    fn ratio_matches_eta_leading_order_route() {
        // printed formula vs η⁰(alternating)/η(uniform at (ϱo+ϱe)/2) once
        // the body is long enough for the L cross term to underflow
        let p = params();
        let (n, l, d) = (6_u32, 5.0 * p.r_c, 1e-5);
        let (rho_o, rho_e) = (7.2e3, 2.2e3);
        let e = eta_zz_alternating(n, l, l, rho_o, rho_e, d, &p).unwrap();
        let (eta0, _) = e.orders.unwrap();
        let rho_uni = 0.5 * (rho_o + rho_e);
        let uni = eta_zz_alternating(n, l, l, rho_uni, rho_uni, d, &p).unwrap();
        let want = layering_ratio(n, rho_o, rho_e).unwrap();
        assert!(rel_err(eta0 / uni.total, want) <= 1e-12);
    }

    #[test]
    fn momentum_space_matches_position_space_zz() {
        let p = params();
        let geom = Geometry::new(
            Shape::Cuboid {
                lx: 3.0 * p.r_c,
                ly: 5.0 * p.r_c,
                lz: 7.0 * p.r_c,
            },
            1e30,
        )
        .unwrap();
        let t = eta_momentum_space(&geom, &p).unwrap();
        let want = eta_zz_cuboid_uniform(&geom, &p).unwrap();
        assert!(rel_err(t.zz(), want) <= 1e-8, "{} vs {want}", t.zz());
        // off-diagonals are quadrature zeros
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    assert!(t.eta[a][b].abs() <= 1e-10 * t.trace());
                }
            }
        }
        assert!(t.min_eigenvalue_bound() >= -1e-12 * t.trace());
    }

    #[test]
    fn momentum_space_density_scaling() {
        let p = params();
        let mk = |rho: f64| {
            Geometry::new(
                Shape::Cuboid {
                    lx: 4.0 * p.r_c,
                    ly: 4.0 * p.r_c,
                    lz: 6.0 * p.r_c,
                },
                rho,
            )
            .unwrap()
        };
        let base = eta_momentum_space(&mk(1e29), &p).unwrap();
        let scaled = eta_momentum_space(&mk(3e29), &p).unwrap();
        assert!(rel_err(scaled.zz(), 9.0 * base.zz()) <= 1e-14);
    }

    #[test]
    fn momentum_space_budget_guard() {
        // a centimeter-scale body needs ~10^5 oscillation-resolving panels
        // per pass and exhausts the evaluation budget
        let p = params();
        let geom = Geometry::new(
            Shape::Cuboid {
                lx: 1e-2,
                ly: 1e-2,
                lz: 1e-2,
            },
            1e30,
        )
        .unwrap();
        assert!(matches!(
            eta_momentum_space(&geom, &p),
            Err(Error::QuadratureNonConvergence { .. })
        ));
    }

    #[test]
    fn momentum_space_rejects_sphere() {
        let p = params();
        let geom = Geometry::new(Shape::Sphere { r: 1e-7 }, 1e30).unwrap();
        assert!(matches!(
            eta_momentum_space(&geom, &p),
            Err(Error::InvalidGeometry(_))
        ));
    }
}
