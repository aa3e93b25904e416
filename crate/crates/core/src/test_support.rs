//! Reference integrators used only as test oracles.
//!
//! Deliberately independent of [`crate::quadrature`]: different rule,
//! different refinement strategy.

/// Adaptive Simpson with Richardson correction.
pub(crate) fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 40)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Exponentially scaled `e^{-z} I_0(z)` from the integral definition
/// `(1/pi) int_0^pi exp(z (cos t - 1)) dt`, using the trapezoid rule which is
/// spectrally accurate for this periodic integrand.
pub(crate) fn scaled_i0_trapezoid(z: f64) -> f64 {
    let m = 256usize;
    let h = std::f64::consts::PI / m as f64;
    let mut s = 0.5 * (1.0 + (-2.0 * z).exp());
    for j in 1..m {
        s += (z * ((j as f64 * h).cos() - 1.0)).exp();
    }
    s / m as f64
}
