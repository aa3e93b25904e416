//! First-order Marcum Q-function, exact and exponential approximation.

use super::bessel::ScaledBesselOrders;
use super::Tolerance;

/// Coefficients of `μ(a)`, lowest order first, exactly as published.
pub const MU_COEFFS: [f64; 5] = [2.174, -0.592, 0.593, -0.092, 0.005];
/// Coefficients of `ν(a)`, lowest order first, exactly as published.
pub const NU_COEFFS: [f64; 5] = [-0.840, 0.327, -0.740, 0.083, -0.004];

fn quartic(c: &[f64; 5], a: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * a + ci)
}

/// Exponent `μ(a)` of the approximation `Q_1(a, b) ≈ exp(-e^{ν(a)} b^{μ(a)})`.
pub fn approx_mu(a: f64) -> f64 {
    quartic(&MU_COEFFS, a)
}

/// Log-scale `ν(a)` of the approximation `Q_1(a, b) ≈ exp(-e^{ν(a)} b^{μ(a)})`.
pub fn approx_nu(a: f64) -> f64 {
    quartic(&NU_COEFFS, a)
}

/// `Q_1(a, b) = ∫_b^∞ x e^{-(x²+a²)/2} I_0(ax) dx`.
///
/// Returns NaN for negative or NaN arguments.
pub fn marcum_q1(a: f64, b: f64) -> f64 {
    marcum_q1_with(a, b, &Tolerance::default())
}

/// [`marcum_q1`] with an explicit truncation tolerance.
///
/// For `b > a` sums `e^{-(a-b)²/2} Σ_{k≥0} (a/b)^k ĩ_k(ab)`; otherwise
/// `1 − e^{-(a-b)²/2} Σ_{k≥1} (b/a)^k ĩ_k(ab)`, where `ĩ_k(x) = e^{-x} I_k(x)`.
/// Folding `e^{-ab}` into the Bessel factor keeps every term finite.
pub fn marcum_q1_with(a: f64, b: f64, tol: &Tolerance) -> f64 {
    if !(a >= 0.0) || !(b >= 0.0) {
        return f64::NAN;
    }
    if b == 0.0 {
        return 1.0;
    }
    if b.is_infinite() {
        return 0.0;
    }
    if a.is_infinite() {
        return 1.0;
    }
    let x = a * b;
    let gap = (-0.5 * (a - b) * (a - b)).exp();
    if gap == 0.0 {
        return if b > a { 0.0 } else { 1.0 };
    }
    let (ratio, first) = if b > a { (a / b, 0) } else { (b / a, 1) };
    let cutoff = tol.abs_tol * 1e-3;
    let mut sum = 0.0;
    let mut weight = 1.0;
    for (k, ik) in ScaledBesselOrders::new(x).enumerate().take(tol.max_terms) {
        if k > 0 {
            weight *= ratio;
        }
        if k < first {
            continue;
        }
        let term = weight * ik * gap;
        sum += term;
        if term < cutoff && k > first {
            break;
        }
    }
    let q = if b > a { sum } else { 1.0 - sum };
    q.clamp(0.0, 1.0)
}

/// `exp(-e^{ν(a)} b^{μ(a)})`.
pub fn marcum_q1_approx(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        return 1.0;
    }
    (-approx_nu(a).exp() * b.powf(approx_mu(a))).exp()
}
