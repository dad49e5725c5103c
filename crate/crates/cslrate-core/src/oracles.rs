//! Independent reference implementations used to validate the fast paths.
//!
//! Everything here is deliberately slow, simple and structurally unrelated
//! to the closed forms: the displaced segment correlation is integrated as
//! an honest 2D integral, the continuous rate as a 6D Monte-Carlo average,
//! the discrete rate as the literal pair loop. None of these call the
//! operations they validate — this module depends only on [`crate::domain`]
//! and the standard library, which is what keeps the cross-checks
//! meaningful.

use crate::domain::{Displacement, Geometry, Lattice, PhysParams, Shape};
use crate::{Error, Result};

/// Result of a deterministic numerical estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error (quadrature) or standard error (MC).
    pub abs_error_estimate: f64,
    /// Number of integrand evaluations / samples consumed.
    pub evaluations: u64,
}

// 7-point Gauss–Legendre nodes and weights on [−1, 1].
const GL7_X: [f64; 7] = [
    -0.949_107_912_342_758_5,
    -0.741_531_185_599_394_4,
    -0.405_845_151_377_397_17,
    0.0,
    0.405_845_151_377_397_17,
    0.741_531_185_599_394_4,
    0.949_107_912_342_758_5,
];
const GL7_W: [f64; 7] = [
    0.129_484_966_168_869_93,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_94,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_93,
];

struct Quad2d<'a> {
    f: &'a dyn Fn(f64, f64) -> f64,
    evaluations: u64,
    budget: u64,
}

impl Quad2d<'_> {
    /// Tensor 7×7 Gauss–Legendre rule on one cell.
    fn cell(&mut self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        let (cx, hx) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
        let (cy, hy) = (0.5 * (y0 + y1), 0.5 * (y1 - y0));
        let mut sum = 0.0;
        for i in 0..7 {
            let x = cx + hx * GL7_X[i];
            let mut row = 0.0;
            for j in 0..7 {
                row += GL7_W[j] * (self.f)(x, cy + hy * GL7_X[j]);
            }
            sum += GL7_W[i] * row;
        }
        self.evaluations += 49;
        sum * hx * hy
    }

    /// Dyadic quadtree refinement: a cell is accepted when its one-level
    /// refinement moves it by less than the allotted tolerance.
    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        coarse: f64,
        tol: f64,
        depth: u32,
    ) -> Result<(f64, f64)> {
        if self.evaluations > self.budget {
            return Err(Error::QuadratureNonConvergence {
                achieved: f64::NAN,
                requested: tol,
                evaluations: self.evaluations,
            });
        }
        let (mx, my) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        let children = [
            (x0, mx, y0, my),
            (mx, x1, y0, my),
            (x0, mx, my, y1),
            (mx, x1, my, y1),
        ];
        let vals: Vec<f64> = children
            .iter()
            .map(|&(a, b, c, d)| self.cell(a, b, c, d))
            .collect();
        let fine: f64 = vals.iter().sum();
        let err = (fine - coarse).abs();
        if err <= tol || depth >= 24 {
            return Ok((fine, err));
        }
        let mut total = 0.0;
        let mut total_err = 0.0;
        for (child, val) in children.iter().zip(vals) {
            let (v, e) = self.refine(
                child.0,
                child.1,
                child.2,
                child.3,
                val,
                0.25 * tol,
                depth + 1,
            )?;
            total += v;
            total_err += e;
        }
        Ok((total, total_err))
    }
}

/// Direct 2D adaptive quadrature of the displaced segment correlation,
///
/// ```text
/// (1/L²) ∫₀ᴸ∫₀ᴸ du dv e^(−(u−v−Δ)²/4r_C²),
/// ```
///
/// the defining integral, evaluated with no reduction to one dimension.
/// The requested `tol` is relative (minimum 1e-12); values that vanish to
/// machine precision are returned with a zero error estimate.
pub fn quad_g_shifted(l_len: f64, delta: f64, r_c: f64, tol: f64) -> Result<QuadResult> {
    if !(tol >= 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "quadrature tolerance must be >= 1e-12, got {tol}"
        )));
    }
    if !(l_len > 0.0 && r_c > 0.0) {
        return Err(Error::InvalidParameter("L and r_c must be > 0".into()));
    }
    let inv = 1.0 / (4.0 * r_c * r_c);
    let f = move |u: f64, v: f64| {
        let t = u - v - delta;
        let e = t * t * inv;
        if e > 745.0 {
            0.0
        } else {
            (-e).exp()
        }
    };
    let mut quad = Quad2d {
        f: &f,
        evaluations: 0,
        budget: 40_000_000,
    };
    // initial 4×4 grid so the diagonal ridge cannot slip between nodes
    let step = l_len / 4.0;
    let mut cells = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            let (x0, y0) = (i as f64 * step, j as f64 * step);
            cells.push((x0, x0 + step, y0, y0 + step));
        }
    }
    let coarse: Vec<f64> = cells
        .iter()
        .map(|&(a, b, c, d)| quad.cell(a, b, c, d))
        .collect();
    let rough: f64 = coarse.iter().sum::<f64>().abs();
    let abs_tol = (tol * rough).max(1e-280);
    let mut value = 0.0;
    let mut err = 0.0;
    for (cell, cval) in cells.iter().zip(coarse) {
        let (v, e) = quad.refine(cell.0, cell.1, cell.2, cell.3, cval, abs_tol / 16.0, 0)?;
        value += v;
        err += e;
    }
    Ok(QuadResult {
        value: value / (l_len * l_len),
        abs_error_estimate: err / (l_len * l_len),
        evaluations: quad.evaluations,
    })
}

/// splitmix64: the counter-based generator behind the Monte-Carlo oracle.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform in [0, 1), determined entirely by (seed, counter).
fn u01(seed: u64, counter: u64) -> f64 {
    (splitmix64(seed ^ counter.wrapping_mul(0xA076_1D64_78BD_642F)) >> 11) as f64
        / (1u64 << 53) as f64
}

/// Uniform point inside the body; consumes counters c, c+1, c+2.
fn sample_point(shape: &Shape, seed: u64, c: u64) -> [f64; 3] {
    let (u, v, w) = (u01(seed, c), u01(seed, c + 1), u01(seed, c + 2));
    match *shape {
        Shape::Cuboid { lx, ly, lz } => [u * lx, v * ly, w * lz],
        Shape::Cube { l } => [u * l, v * l, w * l],
        Shape::Sphere { r } => {
            let radius = r * u.cbrt();
            let cos_t = 2.0 * v - 1.0;
            let sin_t = (1.0 - cos_t * cos_t).sqrt();
            let phi = 2.0 * std::f64::consts::PI * w;
            [
                radius * sin_t * phi.cos(),
                radius * sin_t * phi.sin(),
                radius * cos_t,
            ]
        }
        Shape::Cylinder { r, l } => {
            let radius = r * u.sqrt();
            let phi = 2.0 * std::f64::consts::PI * v;
            [radius * phi.cos(), radius * phi.sin(), w * l]
        }
    }
}

/// 6D Monte-Carlo estimate of the continuous reduction rate
///
/// ```text
/// Γ_C = λ ϱ² V² ⟨e^(−(u−v)²/4r_C²) − e^(−(u−v−Δ)²/4r_C²)⟩_{u,v uniform},
/// ```
///
/// with a standard-error estimate. The sampler is counter-based: a fixed
/// seed reproduces the result bit for bit, independent of how the sample
/// range would be partitioned.
pub fn mc_gamma_continuous(
    geom: &Geometry,
    disp: &Displacement,
    params: &PhysParams,
    samples: u64,
    seed: u64,
) -> Result<QuadResult> {
    if samples < 100_000 {
        return Err(Error::InvalidParameter(format!(
            "need at least 1e5 samples for a stable error estimate, got {samples}"
        )));
    }
    let inv = 1.0 / (4.0 * params.r_c * params.r_c);
    let (dx, dy, dz) = (disp.dx, disp.dy, disp.dz);
    let d2 = dx * dx + dy * dy + dz * dz;

    const BLOCK: u64 = 65_536;
    let mut block_sums = Vec::new();
    let mut block_sq = Vec::new();
    let mut i = 0;
    while i < samples {
        let hi = (i + BLOCK).min(samples);
        let (mut s, mut s_err) = (0.0, 0.0);
        let (mut q, mut q_err) = (0.0, 0.0);
        for k in i..hi {
            let u = sample_point(&geom.shape, seed, 6 * k);
            let v = sample_point(&geom.shape, seed, 6 * k + 3);
            let wx = u[0] - v[0];
            let wy = u[1] - v[1];
            let wz = u[2] - v[2];
            let a = (wx * wx + wy * wy + wz * wz) * inv;
            // exponent difference computed analytically: a − b = (2w·Δ − Δ²)/4r_C²
            let x = (2.0 * (wx * dx + wy * dy + wz * dz) - d2) * inv;
            let f = if x.abs() <= 500.0 {
                if a > 745.0 {
                    0.0
                } else {
                    -(-a).exp() * x.exp_m1()
                }
            } else {
                let b = a - x;
                let pa = if a > 745.0 { 0.0 } else { (-a).exp() };
                let pb = if b > 745.0 { 0.0 } else { (-b).exp() };
                pa - pb
            };
            let y = f - s_err;
            let t = s + y;
            s_err = (t - s) - y;
            s = t;
            let y = f * f - q_err;
            let t = q + y;
            q_err = (t - q) - y;
            q = t;
        }
        block_sums.push(s);
        block_sq.push(q);
        i = hi;
    }
    let mean = block_sums.iter().sum::<f64>() / samples as f64;
    let mean_sq = block_sq.iter().sum::<f64>() / samples as f64;
    let variance = (mean_sq - mean * mean).max(0.0);
    let scale = params.lambda * geom.density_n * geom.density_n * geom.volume() * geom.volume();
    Ok(QuadResult {
        value: scale * mean,
        abs_error_estimate: scale * (variance / samples as f64).sqrt(),
        evaluations: samples,
    })
}

/// Site-count guard of the brute-force pair sum.
pub const MAX_BRUTEFORCE_SITES: u64 = 10_000;

/// Literal O(N²) pair sum of the discrete rate, with all site positions
/// optionally offset by `origin` (translation-invariance checks).
pub fn bruteforce_gamma_discrete_with_origin(
    lat: &Lattice,
    origin: [f64; 3],
    disp: &Displacement,
    params: &PhysParams,
) -> Result<f64> {
    if lat.n_sites() > MAX_BRUTEFORCE_SITES {
        return Err(Error::SizeLimit {
            sites: lat.n_sites(),
            max: MAX_BRUTEFORCE_SITES,
        });
    }
    let mut sites = Vec::with_capacity(lat.n_sites() as usize);
    for ix in 0..i64::from(lat.nx) {
        for iy in 0..i64::from(lat.ny) {
            for iz in 0..i64::from(lat.nz) {
                sites.push([
                    origin[0] + ix as f64 * lat.l,
                    origin[1] + iy as f64 * lat.l,
                    origin[2] + iz as f64 * lat.l,
                ]);
            }
        }
    }
    let inv = 1.0 / (4.0 * params.r_c * params.r_c);
    let d2 = disp.dx * disp.dx + disp.dy * disp.dy + disp.dz * disp.dz;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for a in &sites {
        for b in &sites {
            let wx = a[0] - b[0];
            let wy = a[1] - b[1];
            let wz = a[2] - b[2];
            let e = (wx * wx + wy * wy + wz * wz) * inv;
            let x = (2.0 * (wx * disp.dx + wy * disp.dy + wz * disp.dz) - d2) * inv;
            let f = if x.abs() <= 500.0 {
                if e > 745.0 {
                    0.0
                } else {
                    -(-e).exp() * x.exp_m1()
                }
            } else {
                let b2 = e - x;
                let pa = if e > 745.0 { 0.0 } else { (-e).exp() };
                let pb = if b2 > 745.0 { 0.0 } else { (-b2).exp() };
                pa - pb
            };
            let y = f - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
    }
    Ok(params.lambda * lat.n_a * lat.n_a * sum)
}

/// Literal pair sum with sites at the lattice origin; the reference for
/// the factorized discrete rate.
pub fn bruteforce_gamma_discrete(
    lat: &Lattice,
    disp: &Displacement,
    params: &PhysParams,
) -> Result<f64> {
    bruteforce_gamma_discrete_with_origin(lat, [0.0; 3], disp, params)
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn quad_flat_limit() {
        // Δ = 0, L = 1e-4 r_C: flat integrand, average 1 up to the genuine
        // O(L²/r_C²) ≈ 4e-10 depression
        let q = quad_g_shifted(1e-11, 0.0, 1e-7, 1e-10).unwrap();
        assert!((q.value - 1.0).abs() <= 1e-9, "{}", q.value);
    }

    #[test]
    fn quad_far_displaced_vanishes() {
        // Δ ≫ L + 6 r_C: the displaced Gaussian misses the square entirely
        let r_c = 1e-7;
        let q = quad_g_shifted(2.0 * r_c, 20.0 * r_c, r_c, 1e-10).unwrap();
        assert!(q.value.abs() <= 1e-15, "{}", q.value);
    }

    #[test]
    fn quad_reference_value() {
        // frozen from an independent high-precision evaluation of the
        // closed form (also the value the fast path reproduces)
        let q = quad_g_shifted(3e-7, 1.5e-7, 1e-7, 1e-11).unwrap();
        assert!(
            rel_err(q.value, 0.549_637_067_651_516_8) <= 1e-10,
            "{}",
            q.value
        );
        assert!(q.evaluations > 0);
    }

    #[test]
    fn quad_rejects_too_tight_tolerance() {
        assert!(matches!(
            quad_g_shifted(1e-7, 0.0, 1e-7, 1e-13),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn mc_zero_displacement_is_exactly_zero() {
        let p = params();
        let geom = Geometry::new(Shape::Cube { l: 1e-6 }, 1e30).unwrap();
        let disp = Displacement::new(0.0, 0.0, 0.0).unwrap();
        let q = mc_gamma_continuous(&geom, &disp, &p, 100_000, 7).unwrap();
        assert_eq!(q.value, 0.0);
        assert_eq!(q.abs_error_estimate, 0.0);
    }

    #[test]
    fn mc_is_deterministic_for_fixed_seed() {
        let p = params();
        let geom = Geometry::new(Shape::Cube { l: 1e-6 }, 1e30).unwrap();
        let disp = Displacement::along_z(5e-7).unwrap();
        let a = mc_gamma_continuous(&geom, &disp, &p, 200_000, 42).unwrap();
        let b = mc_gamma_continuous(&geom, &disp, &p, 200_000, 42).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.abs_error_estimate, b.abs_error_estimate);
        let c = mc_gamma_continuous(&geom, &disp, &p, 200_000, 43).unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn mc_rejects_tiny_sample_counts() {
        let p = params();
        let geom = Geometry::new(Shape::Cube { l: 1e-6 }, 1e30).unwrap();
        let disp = Displacement::along_z(5e-7).unwrap();
        assert!(mc_gamma_continuous(&geom, &disp, &p, 10_000, 1).is_err());
    }

    #[test]
    fn bruteforce_single_site() {
        // one site: Γ = λ n_A² (1 − e^(−Δ²/4r_C²))
        let p = params();
        let lat = Lattice::new(1e-7, 1, 1, 1, 2.0).unwrap();
        let disp = Displacement::along_z(0.5e-7).unwrap();
        let g = bruteforce_gamma_discrete(&lat, &disp, &p).unwrap();
        assert!(rel_err(g, 2.423_477_487_460_968_6e-9) <= 1e-14, "{g}");
    }

    #[test]
    fn bruteforce_size_guard() {
        let p = params();
        let lat = Lattice::new(1e-7, 22, 22, 22, 1.0).unwrap();
        let disp = Displacement::along_z(1e-7).unwrap();
        assert!(matches!(
            bruteforce_gamma_discrete(&lat, &disp, &p),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn bruteforce_translation_invariance() {
        let p = params();
        let lat = Lattice::new(0.8e-7, 4, 3, 5, 1.0).unwrap();
        let disp = Displacement::new(0.3e-7, 0.0, 1.1e-7).unwrap();
        let base = bruteforce_gamma_discrete(&lat, &disp, &p).unwrap();
        let moved =
            bruteforce_gamma_discrete_with_origin(&lat, [2.5e-7, -1e-7, 4e-7], &disp, &p).unwrap();
        assert!(rel_err(moved, base) <= 1e-12, "{moved} vs {base}");
    }

    #[test]
    fn bruteforce_matches_factorized_rate() {
        let p = params();
        let lat = Lattice::new(0.9e-7, 5, 4, 3, 1.3).unwrap();
        let disp = Displacement::new(0.2e-7, 0.7e-7, -1.4e-7).unwrap();
        let brute = bruteforce_gamma_discrete(&lat, &disp, &p).unwrap();
        let fast = crate::lattice::gamma_discrete(&lat, &disp, &p).gamma;
        assert!(rel_err(fast, brute) <= 1e-12, "{fast} vs {brute}");
    }

    #[test]
    fn bruteforce_two_site_cross_module() {
        let p = params();
        let lat = Lattice::new(1e-7, 1, 1, 2, 1.0).unwrap();
        let disp = Displacement::along_z(1e-7).unwrap();
        let brute = bruteforce_gamma_discrete(&lat, &disp, &p).unwrap();
        assert!(rel_err(brute, 6.321_205_588_285_577e-9) <= 1e-14);
        let fast = crate::lattice::gamma_discrete(&lat, &disp, &p).gamma;
        assert!(rel_err(fast, brute) <= 1e-13);
    }
}
