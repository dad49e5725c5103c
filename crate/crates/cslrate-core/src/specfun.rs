//! Special functions with documented accuracy contracts.
//!
//! Everything here is pure and reentrant. Accuracy targets:
//!
//! - [`erf`]: absolute error ≤ 1e-15 (Cody-style rational minimax);
//! - [`erfc`]: relative error ≤ ~1e-15 down to the underflow threshold
//!   x ≈ 26.5, needed by tail-stable kernel combinations;
//! - [`bessel_i_scaled`]: relative error ≤ 1e-12 for n ∈ {0, 1}, any x ≥ 0
//!   (exponentially scaled form e⁻ˣIₙ(x), so it never overflows);
//! - [`gaussian_derivative`]: analytic Hermite-recurrence derivatives of a
//!   Gaussian, order ≤ 12;
//! - [`bernoulli`]: even Bernoulli numbers B₂..B₂₄ from the defining
//!   recurrence, exact to f64 rounding.

use crate::{Error, Result};

/// Largest derivative order accepted by [`gaussian_derivative`].
pub const MAX_GAUSSIAN_DERIVATIVE_ORDER: usize = 12;

/// Largest index accepted by [`bernoulli`].
pub const MAX_BERNOULLI_INDEX: usize = 24;

// Cody's rational minimax coefficients (SPECFUN CALERF, March 1990).
const ERF_A: [f64; 5] = [
    3.16112374387056560e0,
    1.13864154151050156e2,
    3.77485237685302021e2,
    3.20937758913846947e3,
    1.85777706184603153e-1,
];
const ERF_B: [f64; 4] = [
    2.36012909523441209e1,
    2.44024637934444173e2,
    1.28261652607737228e3,
    2.84423683343917062e3,
];
const ERFC_C: [f64; 9] = [
    5.64188496988670089e-1,
    8.88314979438837594e0,
    6.61191906371416295e1,
    2.98635138197400131e2,
    8.81952221241769090e2,
    1.71204761263407058e3,
    2.05107837782607147e3,
    1.23033935479799725e3,
    2.15311535474403846e-8,
];
const ERFC_D: [f64; 8] = [
    1.57449261107098347e1,
    1.17693950891312499e2,
    5.37181101862009858e2,
    1.62138957456669019e3,
    3.29079923573345963e3,
    4.36261909014324716e3,
    3.43936767414372164e3,
    1.23033935480374942e3,
];
const ERFC_P: [f64; 6] = [
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
];
const ERFC_Q: [f64; 5] = [
    2.56852019228982242e0,
    1.87295284992346047e0,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
];

const INV_SQRT_PI: f64 = 5.641_895_835_477_562_9e-1;
const ERF_THRESH: f64 = 0.46875;
const ERFC_XBIG: f64 = 26.543;

/// erf(x) for |x| ≤ 0.46875 via the first Cody interval.
fn erf_small(x: f64) -> f64 {
    let ysq = if x.abs() > 1.11e-16 { x * x } else { 0.0 };
    let mut num = ERF_A[4] * ysq;
    let mut den = ysq;
    for i in 0..3 {
        num = (num + ERF_A[i]) * ysq;
        den = (den + ERF_B[i]) * ysq;
    }
    x * (num + ERF_A[3]) / (den + ERF_B[3])
}

/// erfc(y)·exp(y²) for y > 0.46875 (the two outer Cody intervals).
fn erfcx_large(y: f64) -> f64 {
    if y <= 4.0 {
        let mut num = ERFC_C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + ERFC_C[i]) * y;
            den = (den + ERFC_D[i]) * y;
        }
        (num + ERFC_C[7]) / (den + ERFC_D[7])
    } else {
        let ysq = 1.0 / (y * y);
        let mut num = ERFC_P[5] * ysq;
        let mut den = ysq;
        for i in 0..4 {
            num = (num + ERFC_P[i]) * ysq;
            den = (den + ERFC_Q[i]) * ysq;
        }
        let r = ysq * (num + ERFC_P[4]) / (den + ERFC_Q[4]);
        (INV_SQRT_PI - r) / y
    }
}

/// exp(-y²) evaluated with Cody's split of y into a 1/16-grid part, which
/// keeps the relative error of the product exp(-y²)·erfcx(y) near one ulp.
/// Shared with kernel combinations that subtract Gaussian tails.
pub(crate) fn exp_neg_ysq(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp()
}

/// Error function. Total on all finite inputs; |error| ≤ 1e-15.
///
/// Odd, monotone increasing, |erf(x)| ≤ 1; saturates to ±1 (to better than
/// 1e-15) for |x| ≥ 6.
pub fn erf(x: f64) -> f64 {
    let y = x.abs();
    if y <= ERF_THRESH {
        erf_small(x)
    } else if y >= 6.0 {
        1.0_f64.copysign(x)
    } else {
        let res = 1.0 - exp_neg_ysq(y) * erfcx_large(y);
        res.copysign(x)
    }
}

/// Complementary error function, erfc(x) = 1 − erf(x).
///
/// Keeps full relative accuracy in the tail; returns exactly 0 once the
/// true value underflows (x ≳ 26.5).
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    let result = if y <= ERF_THRESH {
        return 1.0 - erf_small(x);
    } else if y >= ERFC_XBIG {
        0.0
    } else {
        exp_neg_ysq(y) * erfcx_large(y)
    };
    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

/// Exponentially scaled modified Bessel function e⁻ˣ Iₙ(x), n ∈ {0, 1}.
///
/// Power series below the crossover, asymptotic expansion above; both
/// branches keep the relative error ≤ 1e-12 and never overflow.
///
/// Errors with [`Error::Domain`] for x < 0 or n ∉ {0, 1}.
pub fn bessel_i_scaled(n: u8, x: f64) -> Result<f64> {
    if !(n == 0 || n == 1) {
        return Err(Error::Domain(format!(
            "bessel_i_scaled supports orders 0 and 1, got {n}"
        )));
    }
    if x < 0.0 || x.is_nan() {
        return Err(Error::Domain(format!(
            "bessel_i_scaled requires x >= 0, got {x}"
        )));
    }
    const CROSSOVER: f64 = 18.0;
    if x <= CROSSOVER {
        // All-positive power series, then scale. At the crossover the scaled
        // remainder of the truncated series is far below 1e-15.
        let q = 0.25 * x * x;
        let (mut term, mut sum) = if n == 0 {
            (1.0, 1.0)
        } else {
            (0.5 * x, 0.5 * x)
        };
        let nu = f64::from(n);
        for k in 1..200 {
            let k = f64::from(k);
            term *= q / (k * (k + nu));
            sum += term;
            if term < sum * 1e-18 {
                break;
            }
        }
        Ok((-x).exp() * sum)
    } else {
        // Asymptotic expansion: Iν(x) ~ eˣ/√(2πx) Σ (−1)ᵏ aₖ(ν)/xᵏ with
        // aₖ(ν) built from μ = 4ν². Truncated at the smallest term; at
        // x = 18 that term is already ~e⁻³⁶ relative.
        let mu = 4.0 * f64::from(n) * f64::from(n);
        let mut term = 1.0_f64;
        let mut sum = 1.0_f64;
        let mut prev = f64::INFINITY;
        for k in 1..60 {
            let k = f64::from(k);
            let factor = (mu - (2.0 * k - 1.0).powi(2)) / (8.0 * x * k);
            term *= -factor;
            if term.abs() >= prev {
                break; // asymptotic series started diverging
            }
            prev = term.abs();
            sum += term;
            if term.abs() < sum.abs() * 1e-18 {
                break;
            }
        }
        Ok(sum / (2.0 * std::f64::consts::PI * x).sqrt())
    }
}

/// n-th derivative of the Gaussian e^(−w²/s²) with respect to w.
///
/// Uses dⁿ/dwⁿ e^(−t²) = (−1)ⁿ Hₙ(t) e^(−t²) with t = w/s and the Hermite
/// recurrence H_{k+1} = 2tH_k − 2kH_{k−1}. Orders above
/// [`MAX_GAUSSIAN_DERIVATIVE_ORDER`] are rejected.
pub fn gaussian_derivative(n: usize, w: f64, s: f64) -> Result<f64> {
    if n > MAX_GAUSSIAN_DERIVATIVE_ORDER {
        return Err(Error::UnsupportedOrder {
            requested: n,
            max: MAX_GAUSSIAN_DERIVATIVE_ORDER,
        });
    }
    if !(s > 0.0) {
        return Err(Error::Domain(format!(
            "gaussian_derivative requires s > 0, got {s}"
        )));
    }
    let t = w / s;
    let gauss = (-t * t).exp();
    if n == 0 {
        return Ok(gauss);
    }
    let mut h_prev = 1.0; // H₀
    let mut h = 2.0 * t; // H₁
    for k in 1..n {
        let next = 2.0 * t * h - 2.0 * (k as f64) * h_prev;
        h_prev = h;
        h = next;
    }
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * h * gauss / s.powi(n as i32))
}

/// Even Bernoulli number B_k for even k with 2 ≤ k ≤ 24.
///
/// The table is filled once from the defining recurrence
/// Σ_{j=0}^{n} C(n+1, j) B_j = 0 with B₀ = 1, rather than hard-coded, so it
/// is self-verifying against the recurrence.
pub fn bernoulli(k: usize) -> Result<f64> {
    if !(2..=MAX_BERNOULLI_INDEX).contains(&k) || !k.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "bernoulli requires even k in [2, {MAX_BERNOULLI_INDEX}], got {k}"
        )));
    }
    static TABLE: std::sync::OnceLock<[f64; MAX_BERNOULLI_INDEX + 1]> = std::sync::OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut b = [0.0_f64; MAX_BERNOULLI_INDEX + 1];
        b[0] = 1.0;
        for n in 1..=MAX_BERNOULLI_INDEX {
            // B_n = -1/(n+1) Σ_{j<n} C(n+1, j) B_j
            let mut acc = 0.0;
            let mut binom = 1.0; // C(n+1, 0)
            for j in 0..n {
                acc += binom * b[j];
                binom *= (n + 1 - j) as f64 / (j + 1) as f64;
            }
            b[n] = -acc / (n as f64 + 1.0);
        }
        // B₁ = −1/2 from the recurrence; odd ones above vanish.
        b
    });
    Ok(table[k])
}
