//! Analytic values for the standard setup (rotation about x̂, measurement
//! direction ẑ). These are cross-check targets; the measurement pipeline is
//! authoritative.
//!
//! The general-bias expressions [`slgi_general`] and [`wlgi_general`] are
//! transcribed verbatim and disagree with the pipeline away from `x = 0` and
//! `x = η − 1`. They are kept so the disagreement stays visible.

use std::f64::consts::FRAC_PI_6;

/// Delay at which [`slgi_spin`] peaks, giving `1.5 η²`.
pub const SLGI_SPIN_PEAK_TAU: f64 = FRAC_PI_6;

/// Smallest η for which the unbiased standard inequality can be violated, `√(2/3)`.
pub fn slgi_spin_threshold() -> f64 {
    (2.0f64 / 3.0).sqrt()
}

/// Unbiased standard inequality; independent of the initial state.
pub fn slgi_spin(eta: f64, tau: f64) -> f64 {
    eta * eta * (2.0 * (2.0 * tau).cos() - (4.0 * tau).cos())
}

/// Standard inequality with `x = η − 1`.
pub fn slgi_biased(theta: f64, phi: f64, tau: f64, eta: f64) -> f64 {
    let (s2th, c2th) = (2.0 * theta).sin_cos();
    let r = (1.0 - eta).sqrt();
    let (s2t, c2t) = (2.0 * tau).sin_cos();
    let (s4t, c4t) = (4.0 * tau).sin_cos();
    let cos_sq = tau.cos().powi(2);
    (eta * (4.0 * s2th * s2t * phi.sin()) * (4.0 * (eta - 1.0) * cos_sq + 2.0 * r * (2.0 * c2t - 1.0))
        - 4.0 * eta * r * (phi.sin() * s2th * s4t + c2th * c4t)
        + 2.0 * eta * c2th * (4.0 * (eta - 1.0) * s2t * s2t + 8.0 * (eta - 1.0) * c2t + 2.0 * r)
        + 8.0 * (eta - 1.0).powi(2)
        - 8.0 * eta * eta * (-2.0 * c2t + c4t))
        / 8.0
}

/// Standard inequality for arbitrary bias `x`, as transcribed.
pub fn slgi_general(theta: f64, phi: f64, tau: f64, eta: f64, x: f64) -> f64 {
    let a = ((1.0 - x).powi(2) - eta * eta).sqrt() - ((1.0 + x).powi(2) - eta * eta).sqrt();
    let (s2th, c2th) = (2.0 * theta).sin_cos();
    let (s2t, c2t) = (2.0 * tau).sin_cos();
    let (s4t, c4t) = (4.0 * tau).sin_cos();
    let cos_sq = tau.cos().powi(2);
    (8.0 * x * x
        + eta
            * (4.0 * s2th * s2t * phi.sin() * (4.0 * x * cos_sq + (2.0 * c2t - 1.0) * a)
                - 8.0 * eta * (c4t - 2.0 * c2t))
        + 2.0 * phi.sin() * c2th * c4t * a
        - s2th * s4t * a
        + 2.0 * eta * c2th * (4.0 * x * s2t * s2t + 8.0 * x * c2t + a))
        / 8.0
}

/// `P(M2⁺,M3⁻) − P(M1⁺,M2⁺) − P(M1⁻,M3⁻)` for unbiased measurements.
pub fn wlgi_spin(theta: f64, phi: f64, tau: f64, eta: f64) -> f64 {
    let r = (1.0 - eta * eta).sqrt();
    let (s2th, c2th) = (2.0 * theta).sin_cos();
    let (s2t, c2t) = (2.0 * tau).sin_cos();
    let (s4t, c4t) = (4.0 * tau).sin_cos();
    (eta * (-4.0 * s2th * s2t * phi.sin() * (r + c2t - 1.0)
        - 2.0 * r * (c2th * c4t - phi.sin() * s2th * s4t)
        - 4.0 * eta * (2.0 * c2t + c4t))
        + 2.0 * eta * c2th * (r + c4t - 1.0)
        - 4.0)
        / 16.0
}

/// [`wlgi_spin`] at `θ = π/3, φ = π/2, τ = π/3`.
pub fn wlgi_spin_optimum(eta: f64) -> f64 {
    (3.0 * eta * (1.0 + eta - (1.0 - eta * eta).sqrt()) - 2.0) / 8.0
}

/// `P(M1⁺,M3⁻) − P(M1⁺,M2⁻) − P(M2⁺,M3⁻)` with `x = η − 1`.
pub fn wlgi_biased(theta: f64, phi: f64, tau: f64, eta: f64) -> f64 {
    let (s2th, c2th) = (2.0 * theta).sin_cos();
    let (s2t, c2t) = (2.0 * tau).sin_cos();
    let c4t = (4.0 * tau).cos();
    eta / 8.0
        * (2.0
            * (s2th * s2t * phi.sin() * (eta * c2t + eta - 2.0) + 2.0 * eta * c2t - eta * c4t + eta
                - 2.0)
            + c2th * (2.0 * eta * s2t * s2t + 4.0 * (eta - 1.0) * c2t))
}

/// `P(M2⁺,M3⁻) − P(M1⁺,M2⁺) − P(M1⁻,M3⁻)` for arbitrary bias, as transcribed
/// (including the `B − 2B` term).
pub fn wlgi_general(theta: f64, phi: f64, tau: f64, eta: f64, x: f64) -> f64 {
    let b = ((1.0 + x).powi(2) - eta * eta).sqrt();
    let (s2th, c2th) = (2.0 * theta).sin_cos();
    let (s2t, c2t) = (2.0 * tau).sin_cos();
    let (s4t, c4t) = (4.0 * tau).sin_cos();
    (-4.0 * (3.0 * x * x + 1.0)
        + eta
            * (-4.0 * s2th * s2t * phi.sin() * ((x + 1.0) * c2t + b + x - 1.0)
                + 2.0 * c2th * c4t * phi.sin() * (b - 2.0 * b)
                + 2.0 * s2th * s4t * b
                - 4.0 * eta * (2.0 * c2t + c4t))
        + 2.0 * eta * c2th * (c4t - x * (4.0 * c2t + 3.0 * c4t + 5.0) + b - 1.0))
        / 16.0
}
