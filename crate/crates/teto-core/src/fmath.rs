//! Float intrinsics routed through `std` when available and `libm`
//! otherwise, so the crate builds without a platform math library.

#![allow(dead_code)]

#[cfg(any(feature = "std", test))]
mod imp {
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }
    pub fn floor(x: f64) -> f64 {
        x.floor()
    }
    pub fn ceil(x: f64) -> f64 {
        x.ceil()
    }
    pub fn round(x: f64) -> f64 {
        x.round()
    }
    pub fn floorf(x: f32) -> f32 {
        x.floor()
    }
    pub fn roundf(x: f32) -> f32 {
        x.round()
    }
}

#[cfg(not(any(feature = "std", test)))]
mod imp {
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    pub fn floor(x: f64) -> f64 {
        libm::floor(x)
    }
    pub fn ceil(x: f64) -> f64 {
        libm::ceil(x)
    }
    pub fn round(x: f64) -> f64 {
        libm::round(x)
    }
    pub fn floorf(x: f32) -> f32 {
        libm::floorf(x)
    }
    pub fn roundf(x: f32) -> f32 {
        libm::roundf(x)
    }
}

pub use imp::*;
