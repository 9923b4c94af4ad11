//! Float math routed through `std` when available, `libm` otherwise.

#![allow(dead_code)]

macro_rules! shim {
    ($name:ident, $std_method:ident, $libm_fn:path) => {
        #[cfg(feature = "std")]
        #[inline(always)]
        pub(crate) fn $name(x: f64) -> f64 {
            x.$std_method()
        }
        #[cfg(not(feature = "std"))]
        #[inline(always)]
        pub(crate) fn $name(x: f64) -> f64 {
            $libm_fn(x)
        }
    };
}

shim!(ln, ln, libm::log);
shim!(log2, log2, libm::log2);
shim!(exp, exp, libm::exp);
shim!(sqrt, sqrt, libm::sqrt);
shim!(ceil, ceil, libm::ceil);
shim!(floor, floor, libm::floor);
shim!(round, round, libm::round);

#[cfg(feature = "std")]
#[inline(always)]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    x.powf(y)
}
#[cfg(not(feature = "std"))]
#[inline(always)]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
