//! Scalar abstraction for the numeric core.
//!
//! All geometry, channel, and optimizer code is generic over [`Real`], which
//! bundles the floating-point capabilities the simulator needs: arithmetic and
//! transcendentals from `num-traits`, uniform sampling for Monte Carlo work,
//! and a standard-normal draw used by the fading model. `f32` and `f64` both
//! implement it; the command-line tools run everything in `f64`.

use num_complex::Complex;
use rand::distr::uniform::SampleUniform;
use rand::{Rng, RngExt};
use rand_distr::StandardNormal;

/// Floating-point scalar usable throughout the simulator.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + SampleUniform
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Draws one sample from the standard normal distribution.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Converts an `f64` constant, panicking only for non-finite inputs.
    ///
    /// Used for scenario constants and literals; the conversion to `f32` is
    /// lossy but exact for every constant the simulator defines.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant")
    }
}

impl Real for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Real for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

/// Wraps an angle in radians into `[0, 2π)`.
///
/// The reduction keeps phases canonical before they reach `from_polar`, so
/// two code paths that derive the same angle modulo `2π` produce bitwise
/// identical complex values.
pub fn wrap_angle<F: Real>(theta: F) -> F {
    let tau = F::TAU();
    let mut r = theta - (theta / tau).floor() * tau;
    // Rounding can land exactly on 2π when theta is a hair below zero.
    if r >= tau {
        r = F::zero();
    }
    if r < F::zero() {
        r = F::zero();
    }
    r
}

/// Draws a zero-mean, unit-variance circularly symmetric complex Gaussian.
///
/// Real and imaginary parts are independent `N(0, 1/2)` samples, so
/// `E[|w|^2] = 1`. The real part is always drawn first, which pins the rng
/// stream layout for reproducibility.
pub fn complex_normal<F: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<F> {
    let half = F::of(0.5).sqrt();
    let re = F::standard_normal(rng) * half;
    let im = F::standard_normal(rng) * half;
    Complex::new(re, im)
}
