//! Scalar special functions and quadrature for the channel model.
//!
//! Implemented locally rather than pulled from a special-function crate:
//! `ln_gamma` by the Lanczos approximation, the modified Bessel functions
//! `I0`/`I1` by power series below x = 15 and the large-argument asymptotic
//! expansion above, and real-order `K_nu` by adaptive Simpson integration of
//!
//! ```text
//! K_nu(x) = ∫₀^∞ exp(-x·cosh t) · cosh(nu·t) dt
//! ```
//!
//! evaluated in log space so strongly peaked integrands stay in range.

use std::f64::consts::{LN_2, PI};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 8] = [
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for positive arguments (reflection
/// formula handles 0 < x < 0.5).
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x.is_finite());
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = 0.999_999_999_999_809_93;
    for (i, &c) in LANCZOS.iter().enumerate() {
        acc += c / (z + i as f64 + 1.0);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

// ---------------------------------------------------------------------------
// Modified Bessel functions of the first kind
// ---------------------------------------------------------------------------

const I_SERIES_CUTOFF: f64 = 15.0;

/// I0(x), the zeroth-order modified Bessel function of the first kind.
pub fn bessel_i0(x: f64) -> f64 {
    let x = x.abs();
    if x < I_SERIES_CUTOFF {
        // Σ_k (x²/4)^k / (k!)²
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= q / ((k * k) as f64);
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        sum
    } else {
        i_asymptotic(0.0, x)
    }
}

/// I1(x), the first-order modified Bessel function of the first kind.
pub fn bessel_i1(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let val = if x < I_SERIES_CUTOFF {
        // (x/2) Σ_k (x²/4)^k / (k!(k+1)!)
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= q / ((k * (k + 1)) as f64);
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        0.5 * x * sum
    } else {
        i_asymptotic(1.0, x)
    };
    sign * val
}

/// Large-argument expansion I_nu(x) ~ e^x/√(2πx) Σ_k (-1)^k a_k(nu)/x^k,
/// truncated at the smallest term.
fn i_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..40u32 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() >= prev {
            break; // divergent tail reached
        }
        prev = term.abs();
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    x.exp() / (2.0 * PI * x).sqrt() * sum
}

// ---------------------------------------------------------------------------
// Modified Bessel function of the second kind, real order
// ---------------------------------------------------------------------------

/// ln cosh(u) without overflow.
fn ln_cosh(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// K_nu(x) for real order nu and x > 0, via the integral representation.
///
/// The integrand exp(-x·cosh t)·cosh(nu·t) is evaluated as exp(g(t) - g_max)
/// and rescaled afterwards, so results up to the f64 exponent range are
/// representable even when the peak value is enormous (small x, large |nu|).
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let nu = nu.abs(); // K_{-nu} = K_nu
    let g = |t: f64| -x * t.cosh() + ln_cosh(nu * t);

    // The exponent peaks near asinh(nu/x) (exactly 0 for nu = 0).
    let t_peak = if nu > 0.0 { (nu / x).asinh() } else { 0.0 };
    let mut g_max = g(0.0).max(g(t_peak));
    let steps = 64;
    for i in 1..steps {
        g_max = g_max.max(g(t_peak * i as f64 / steps as f64));
    }

    // Expand the upper limit until the integrand is negligible.
    let mut t_hi = (t_peak + 1.0).max(2.0);
    while g(t_hi) > g_max - 60.0 {
        t_hi += 1.0;
    }

    let f = |t: f64| (g(t) - g_max).exp();
    let integral = adaptive_simpson(&f, 0.0, t_hi, 1e-12);
    integral * g_max.exp()
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Adaptive Simpson quadrature with interval-halving error control.
/// `tol` is relative to the accumulated estimate of the whole integral.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let scale = whole.abs().max(1e-300);
    recurse(f, a, b, fa, fm, fb, whole, tol * scale, 60)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}
