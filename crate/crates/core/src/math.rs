//! Transcendental functions routed through `libm` so results are identical
//! across platforms and across std/no_std builds. System `libm`
//! implementations of `exp`/`ln` may differ in the last ulp between
//! platforms, which would break the byte-reproducibility contract of the
//! sampler.

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// Box-Muller transform; consumes exactly two uniform draws per pair.
#[inline]
pub(crate) fn box_muller(u1: f64, u2: f64) -> f64 {
    // u1 in (0,1]: guard against ln(0).
    let r = sqrt(-2.0 * ln(u1.max(f64::MIN_POSITIVE)));
    r * libm::cos(2.0 * core::f64::consts::PI * u2)
}
