//! Closed-form collapse rates for continuous mass distributions.
//!
//! The building block is the dimensionless correlation factor of a uniform
//! 1D segment of length L under a Gaussian kernel of spread √2·r_C,
//!
//! ```text
//! g_Δ(L) = (1/L²) ∫₀ᴸ∫₀ᴸ du dv exp(−(u − v − Δ)²/4r_C²),   g ≡ g_{Δ=0},
//! ```
//!
//! for which the double integral reduces to the closed form
//! g_Δ(L) = [½G(L−Δ) + ½G(L+Δ) − G(Δ)]/L² with G(x) ≡ x²·g(x). Note that
//! the weighting by G (not g) is essential: the unweighted combination is
//! dimensionally inconsistent with the defining integral and fails already
//! at Δ = 0.
//!
//! Everything downstream — the exact cuboid rate, the small-displacement
//! forms for cuboid/cylinder/sphere, and the mass-difference factor
//! D(L, Δ) = L²[g(L) − g_Δ(L)] — is assembled from G and from the tail
//! remainder T(x) = G(x) + 4r_C² − 2√π·r_C·x, chosen per regime so that no
//! combination loses more than a few digits to cancellation:
//!
//! - both arguments ≲ r_C: explicit double power series of D (the leading
//!   quadratic terms cancel algebraically, not numerically);
//! - smaller argument ≲ r_C, larger one not: Taylor expansion of D in the
//!   small argument with analytic Gaussian derivatives;
//! - otherwise: the T-combination, in which the linear parts of G cancel
//!   exactly and only exponentially decaying remainders are subtracted.
//!
//! D is computed from the sorted argument pair, so the mass-difference
//! symmetry L²[g(L) − g_Δ(L)] = Δ²[g(Δ) − g_L(Δ)] holds bit-for-bit.

use crate::domain::{
    nucleon_count, Displacement, Geometry, Method, PhysParams, RateResult, RegimeFlag, Shape,
};
use crate::specfun::{self, bessel_i_scaled, erf, erfc, gaussian_derivative};
use crate::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Value of a g-kernel: dimensionless, in [0, 1], equal to 1 only in the
/// zero-size, zero-displacement limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GKernelValue {
    value: f64,
}

impl GKernelValue {
    fn new(value: f64) -> Self {
        debug_assert!(
            (-1e-12..=1.0 + 1e-12).contains(&value),
            "g out of range: {value}"
        );
        Self {
            value: value.clamp(0.0, 1.0),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

/// g(x): Gaussian correlation factor of a uniform segment of length |x|.
///
/// Monotone decreasing in |x|, g(0) = 1. Below |x|/r_C = 1e-3 the Taylor
/// form 1 − a²/6 + a⁴/30 (a = x/2r_C) guards the cancellation of the
/// closed form.
pub fn g_factor(x: f64, r_c: f64) -> GKernelValue {
    GKernelValue::new(g_raw(x.abs(), r_c))
}

fn g_raw(x: f64, r_c: f64) -> f64 {
    let a = x / (2.0 * r_c);
    if x < 1e-3 * r_c {
        let a2 = a * a;
        1.0 - a2 / 6.0 + a2 * a2 / 30.0
    } else {
        // expm1 keeps the numerator accurate where e^{-a²}−1 and the erf
        // term still largely cancel.
        ((-a * a).exp_m1() + SQRT_PI * a * erf(a)) / (a * a)
    }
}

/// G(x) = x²·g(x), the segment correlation integral itself.
fn big_g(x: f64, r_c: f64) -> f64 {
    let x = x.abs();
    x * x * g_raw(x, r_c)
}

/// Tail remainder T(x) = 4r_C²e^(−z²) − 2√π·r_C·x·erfc(z), z = x/2r_C.
///
/// Satisfies G(x) = −4r_C² + 2√π·r_C·|x| + T(x); positive and decaying
/// like the Gaussian, so combinations of G whose linear parts cancel can
/// be evaluated through T without losing the tail digits.
fn tail_t(x: f64, r_c: f64) -> f64 {
    let x = x.abs();
    let z = x / (2.0 * r_c);
    if z >= 27.0 {
        return 0.0; // both factors underflow
    }
    4.0 * r_c * r_c * specfun::exp_neg_ysq(z) - 2.0 * SQRT_PI * r_c * x * erfc(z)
}

// D(L, Δ) = L²[g(L) − g_Δ(L)] = G(L) + G(Δ) − ½G(L−Δ) − ½G(L+Δ).
// Symmetric under L ↔ Δ; 0 ≤ D ≤ min(G(L), G(Δ)) + …; computed from the
// sorted pair (a, b) = (min, max).

/// Double power series of D for a, b both ≤ 0.3·r_C. The k = 1 terms of
/// the G series cancel identically, so the expansion starts at the true
/// leading order a²b²/4r_C².
fn d_series_both_small(a: f64, b: f64, r_c: f64) -> f64 {
    let ah = a / (2.0 * r_c);
    let bh = b / (2.0 * r_c);
    let (ah2, bh2) = (ah * ah, bh * bh);
    let mut sum = 0.0;
    let mut k_fact = 1.0; // becomes k! at the top of each iteration
    let mut sign = -1.0; // becomes (−1)^k
    for k in 2..=12_usize {
        k_fact *= k as f64;
        sign = -sign;
        // Σ_{j=1}^{k−1} C(2k, 2j) â^{2j} b̂^{2(k−j)}
        let mut inner = 0.0;
        let mut a_pow = ah2;
        for j in 1..k {
            let mut binom = 1.0;
            for i in 0..2 * j {
                binom *= (2 * k - i) as f64 / (i + 1) as f64;
            }
            inner += binom * a_pow * bh2.powi((k - j) as i32);
            a_pow *= ah2;
        }
        let term = sign * inner / (k_fact * (2.0 * k as f64 - 1.0));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    4.0 * r_c * r_c * sum
}

/// Taylor expansion of D in the smaller argument a around 0:
/// D = G(a) − Σ_{m≥1} 2 f^(2m−2)(b) a^(2m)/(2m)! with f(t) = e^(−t²/4r_C²).
fn d_taylor_small_a(a: f64, b: f64, r_c: f64) -> f64 {
    let mut correction = 0.0;
    let mut a_pow = a * a;
    let mut fact = 2.0; // (2m)!
    for m in 1..=6_usize {
        if m > 1 {
            let two_m = 2.0 * m as f64;
            fact *= (two_m - 1.0) * two_m;
            a_pow *= a * a;
        }
        // order ≤ 10, under the gaussian_derivative cap
        let deriv = gaussian_derivative(2 * m - 2, b, 2.0 * r_c).expect("order within cap");
        let term = 2.0 * deriv * a_pow / fact;
        correction += term;
        if term.abs() < 1e-18 * big_g(a, r_c).abs() {
            break;
        }
    }
    big_g(a, r_c) - correction
}

/// Mass-difference factor D(L, Δ) = L²[g(L) − g_Δ(L)], symmetric in its
/// two length arguments, non-negative, zero iff either argument is zero.
///
/// This is the quantity the displaced-axis factor of the cuboid rate is
/// proportional to; its symmetry is the statement that a body of length L
/// displaced by Δ reduces at the same weighted rate as a body of length Δ
/// displaced by L.
pub fn g_difference_weighted(l_len: f64, delta: f64, r_c: f64) -> f64 {
    let a = l_len.abs().min(delta.abs());
    let b = l_len.abs().max(delta.abs());
    if a == 0.0 {
        return 0.0;
    }
    let small = 0.3 * r_c;
    let d = if b <= small {
        d_series_both_small(a, b, r_c)
    } else if a <= small {
        d_taylor_small_a(a, b, r_c)
    } else {
        // Linear parts of G cancel exactly: D = −4r_C² + 2√π·r_C·a + tails.
        let r2 = r_c * r_c;
        -4.0 * r2 + 2.0 * SQRT_PI * r_c * a + tail_t(a, r_c) + tail_t(b, r_c)
            - 0.5 * tail_t(b - a, r_c)
            - 0.5 * tail_t(b + a, r_c)
    };
    d.max(0.0)
}

/// g(L) − g_Δ(L), evaluated stably as D(L, Δ)/L².
pub fn g_difference(l_len: f64, delta: f64, r_c: f64) -> f64 {
    g_difference_weighted(l_len, delta, r_c) / (l_len * l_len)
}

/// Taylor expansion of g_Δ(L) in L for L ≤ 0.3·r_C < Δ: the segment is
/// short, the displaced kernel is smooth across it.
fn g_shifted_taylor_small_l(l_len: f64, delta: f64, r_c: f64) -> f64 {
    let mut sum = 0.0;
    let mut l_pow = 1.0;
    let mut fact = 1.0; // (2m)!
    for m in 0..=6_usize {
        if m > 0 {
            let two_m = 2.0 * m as f64;
            fact *= (two_m - 1.0) * two_m;
            l_pow *= l_len * l_len;
        }
        let deriv = gaussian_derivative(2 * m, delta, 2.0 * r_c).expect("order within cap");
        let two_m = 2.0 * m as f64;
        let term = deriv * 2.0 * l_pow / (fact * (two_m + 1.0) * (two_m + 2.0));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// g_Δ(L): displaced segment correlation factor (even in Δ).
///
/// Equals [½G(L−Δ) + ½G(L+Δ) − G(Δ)]/L², i.e. the corrected weighted
/// combination; reduces to [`g_factor`] at Δ = 0 and reproduces the
/// defining double integral to quadrature accuracy.
pub fn g_shifted(l_len: f64, delta: f64, r_c: f64) -> GKernelValue {
    let dd = delta.abs();
    if dd == 0.0 {
        return g_factor(l_len, r_c);
    }
    if dd <= l_len {
        // g_Δ = g − D/L²; D ≤ G so the subtraction stays well-conditioned.
        let d = g_difference_weighted(l_len, dd, r_c);
        return GKernelValue::new(g_raw(l_len, r_c) - d / (l_len * l_len));
    }
    if l_len <= 0.3 * r_c {
        return GKernelValue::new(g_shifted_taylor_small_l(l_len, dd, r_c));
    }
    // Δ > L ≥ 0.3 r_C: the linear parts of the G combination cancel to
    // exactly zero, leaving only Gaussian tails.
    let f = 0.5 * tail_t(dd - l_len, r_c) + 0.5 * tail_t(dd + l_len, r_c) - tail_t(dd, r_c);
    GKernelValue::new((f / (l_len * l_len)).max(0.0))
}

/// (1 − e^(−L²/4r_C²))/L², the displaced-axis bracket of the
/// small-displacement closed forms; expm1 keeps it exact as L → 0.
pub(crate) fn small_delta_bracket(l_len: f64, r_c: f64) -> f64 {
    let z = l_len / (2.0 * r_c);
    -(-z * z).exp_m1() / (l_len * l_len)
}

fn cuboid_dims(geom: &Geometry) -> Result<(f64, f64, f64)> {
    geom.shape.as_cuboid().ok_or_else(|| {
        Error::InvalidGeometry("operation requires a cuboid or cube geometry".into())
    })
}

/// Exact reduction rate of a homogeneous cuboid, general displacement.
///
/// Γ_C = λ N_TOT² [Π_α g(L_α) − Π_α g_{Δ_α}(L_α)], assembled as a
/// telescoped sum of non-negative per-axis difference terms so that small
/// displacements do not cancel catastrophically.
pub fn gamma_cuboid(
    geom: &Geometry,
    disp: &Displacement,
    params: &PhysParams,
) -> Result<RateResult> {
    let (lx, ly, lz) = cuboid_dims(geom)?;
    let n_tot = nucleon_count(geom);
    let axes = [(lx, disp.dx), (ly, disp.dy), (lz, disp.dz)];
    let r_c = params.r_c;

    let g0: Vec<f64> = axes.iter().map(|&(l, _)| g_raw(l, r_c)).collect();
    let gd: Vec<f64> = axes
        .iter()
        .map(|&(l, d)| g_shifted(l, d, r_c).value())
        .collect();
    // Π g0 − Π gd = Σ_α (g0_α − gd_α) Π_{β<α} gd_β Π_{β>α} g0_β
    let mut sum = 0.0;
    for alpha in 0..3 {
        let (l, d) = axes[alpha];
        if d == 0.0 {
            continue;
        }
        let mut term = g_difference(l, d, r_c);
        for beta in 0..alpha {
            term *= gd[beta];
        }
        for beta in alpha + 1..3 {
            term *= g0[beta];
        }
        sum += term;
    }
    Ok(RateResult::exact(
        params.lambda * n_tot * n_tot * sum,
        Method::ContinuousExact,
    ))
}

/// Small-q series of the sphere bracket e^(−q) − 1 + (q/2)(e^(−q) + 1),
/// whose leading orders cancel; converges fast for q ≤ 0.5.
fn sphere_bracket(q: f64) -> f64 {
    if q > 0.5 {
        return (-q).exp() - 1.0 + 0.5 * q * ((-q).exp() + 1.0);
    }
    // Σ_{k≥3} (−1)^{k+1} (k−2) q^k / (2·k!)
    let mut sum = 0.0;
    let mut q_pow = q * q * q;
    let mut fact = 6.0; // k!
    let mut sign = 1.0;
    for k in 3..=25_usize {
        if k > 3 {
            fact *= k as f64;
            q_pow *= q;
            sign = -sign;
        }
        let term = sign * (k as f64 - 2.0) * q_pow / (2.0 * fact);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Small-displacement (Δ ≪ r_C) closed-form rates.
///
/// Cuboid and cylinder require a single-axis displacement (the cylinder
/// along its axis); the sphere is isotropic and accepts any direction.
/// Beyond Δ = 0.1·r_C the result is still returned, flagged out of regime.
pub fn gamma_small_delta(
    geom: &Geometry,
    disp: &Displacement,
    params: &PhysParams,
) -> Result<RateResult> {
    let n_tot = nucleon_count(geom);
    let r_c = params.r_c;
    let lam_n2 = params.lambda * n_tot * n_tot;

    let gamma = match geom.shape {
        Shape::Cuboid { .. } | Shape::Cube { .. } => {
            let (lx, ly, lz) = cuboid_dims(geom)?;
            let (axis, delta) = disp.single_axis().ok_or_else(|| {
                Error::UnsupportedDisplacement(
                    "small-delta cuboid rate requires a single-axis displacement".into(),
                )
            })?;
            // permute the displaced axis into the z slot
            let (la, lb, lc) = match axis {
                0 => (ly, lz, lx),
                1 => (lz, lx, ly),
                _ => (lx, ly, lz),
            };
            lam_n2 * g_raw(la, r_c) * g_raw(lb, r_c) * delta * delta * small_delta_bracket(lc, r_c)
        }
        Shape::Cylinder { r, l } => {
            if disp.dx != 0.0 || disp.dy != 0.0 {
                return Err(Error::UnsupportedDisplacement(
                    "small-delta cylinder rate requires displacement along the axis".into(),
                ));
            }
            let x = r * r / (2.0 * r_c * r_c);
            let radial =
                4.0 * r_c * r_c / (r * r) * (1.0 - bessel_i_scaled(0, x)? - bessel_i_scaled(1, x)?);
            lam_n2 * radial * disp.dz * disp.dz * small_delta_bracket(l, r_c)
        }
        Shape::Sphere { r } => {
            let q = r * r / (r_c * r_c);
            let delta = disp.magnitude();
            lam_n2 * 3.0 * r_c.powi(4) / r.powi(6) * sphere_bracket(q) * delta * delta
        }
    };

    let delta = disp.magnitude();
    Ok(RateResult {
        gamma,
        method: Method::ContinuousSmallDelta,
        validity: vec![RegimeFlag::new(
            "small_delta",
            delta <= 0.1 * r_c,
            format!("Delta <= 0.1 r_C (Delta/r_C = {:.3e})", delta / r_c),
        )],
        error_estimate: None,
    })
}

/// Volume of the overlap between the body and its displaced copy.
fn overlap_volume(geom: &Geometry, disp: &Displacement) -> Result<f64> {
    Ok(match geom.shape {
        Shape::Cuboid { .. } | Shape::Cube { .. } => {
            let (lx, ly, lz) = cuboid_dims(geom)?;
            (lx - disp.dx.abs()).max(0.0)
                * (ly - disp.dy.abs()).max(0.0)
                * (lz - disp.dz.abs()).max(0.0)
        }
        Shape::Sphere { r } => {
            let d = disp.magnitude();
            if d >= 2.0 * r {
                0.0
            } else {
                std::f64::consts::PI * (4.0 * r + d) * (2.0 * r - d) * (2.0 * r - d) / 12.0
            }
        }
        Shape::Cylinder { r, l } => {
            if disp.dx != 0.0 || disp.dy != 0.0 {
                return Err(Error::UnsupportedDisplacement(
                    "overlap of a displaced cylinder requires axial displacement".into(),
                ));
            }
            std::f64::consts::PI * r * r * (l - disp.dz.abs()).max(0.0)
        }
    })
}

/// Ghirardi–Pearle–Rimini estimate Γ_GPR = 6√π λ n N_OUT.
///
/// n is the nucleon count of a sphere of radius r_C at the body's density;
/// N_OUT the nucleons of one configuration lying outside the other. Defined
/// for body and displacement both much larger than r_C; out-of-regime use
/// is flagged, not rejected.
pub fn gamma_gpr(geom: &Geometry, disp: &Displacement, params: &PhysParams) -> Result<RateResult> {
    let r_c = params.r_c;
    let n_rc = geom.density_n * 4.0 / 3.0 * std::f64::consts::PI * r_c.powi(3);
    let n_out = geom.density_n * (geom.volume() - overlap_volume(geom, disp)?);
    let gamma = 6.0 * SQRT_PI * params.lambda * n_rc * n_out;

    let r_char = geom.shape.characteristic_radius();
    let delta = disp.magnitude();
    Ok(RateResult {
        gamma,
        method: Method::Gpr,
        validity: vec![
            RegimeFlag::new(
                "size_regime",
                r_char >= 10.0 * r_c,
                format!("R >> r_C (R/r_C = {:.3e})", r_char / r_c),
            ),
            RegimeFlag::new(
                "delta_regime",
                delta >= 10.0 * r_c,
                format!("Delta >> r_C (Delta/r_C = {:.3e})", delta / r_c),
            ),
        ],
        error_estimate: None,
    })
}

/// Radius of the circumscribed sphere, for the separation flag Δ > 2R.
fn circumscribed_radius(shape: &Shape) -> f64 {
    match *shape {
        Shape::Cuboid { lx, ly, lz } => 0.5 * (lx * lx + ly * ly + lz * lz).sqrt(),
        Shape::Cube { l } => 0.5 * l * 3.0_f64.sqrt(),
        Shape::Sphere { r } => r,
        Shape::Cylinder { r, l } => (r * r + 0.25 * l * l).sqrt(),
    }
}

/// Adler estimate: the body divided into N spheres of radius r_C holding n
/// nucleons each, Γ_A = λ n² N × {Δ²/2r_C² for Δ ≤ r_C, 1 beyond}.
///
/// For bodies smaller than the r_C sphere the division saturates at a
/// single cell (n = N_TOT, N = 1); without that cap the estimate would not
/// approximate the exact rate for small bodies, which is its stated regime.
/// The branch switches at Δ = r_C; the undefined mid-regime
/// 0.1·r_C < Δ < 10·r_C is flagged.
pub fn gamma_adler(geom: &Geometry, disp: &Displacement, params: &PhysParams) -> RateResult {
    let r_c = params.r_c;
    let n_tot = nucleon_count(geom);
    let n_sphere = geom.density_n * 4.0 / 3.0 * std::f64::consts::PI * r_c.powi(3);
    let n = n_sphere.min(n_tot);
    let n_cells = n_tot / n;
    let delta = disp.magnitude();
    let gamma = if delta <= r_c {
        params.lambda * n * n * n_cells * delta * delta / (2.0 * r_c * r_c)
    } else {
        params.lambda * n * n * n_cells
    };
    let sep = 2.0 * circumscribed_radius(&geom.shape);
    RateResult {
        gamma,
        method: Method::Adler,
        validity: vec![
            RegimeFlag::new(
                "delta_regime",
                delta <= 0.1 * r_c || delta >= 10.0 * r_c,
                format!(
                    "Delta << r_C or Delta >> r_C (Delta/r_C = {:.3e})",
                    delta / r_c
                ),
            ),
            RegimeFlag::new(
                "separation",
                delta > sep,
                format!("Delta > 2R (Delta = {delta:.3e}, 2R = {sep:.3e})"),
            ),
        ],
        error_estimate: None,
    }
}
