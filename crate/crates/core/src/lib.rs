//! Nonlocal mean curvature of periodic cylindrical graphs.
//!
//! A surface of revolution in R^N described by a positive 2π/µ-periodic radius
//! profile has, at each point, a fractional (order-α) analogue of mean
//! curvature defined by a singular integral over the whole surface. This crate
//! evaluates that quantity, studies the spectrum of its linearization at
//! circular cylinders, locates the radius µ* where the cylinder first loses
//! strict stability, and follows the family of non-cylindrical profiles with
//! constant nonlocal curvature that bifurcates there.
//!
//! Everything is plain f64; accuracy comes from the quadrature layer
//! ([`quad`]) and from closed forms in terms of gamma and Bessel functions
//! ([`special`], [`kernels`]) rather than from extended precision.

// Numeric-code idioms clippy's style lints dislike: fully tabulated
// constants, `!(x > 0.0)` comparisons that also reject NaN, loops indexing
// parallel node/weight tables, and immediately-invoked closures standing in
// for try blocks.
#![allow(
    clippy::excessive_precision,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::redundant_closure_call
)]

pub mod branch;
pub mod cli;
pub mod error;
pub mod kernels;
pub mod linearized;
pub mod nmc;
pub mod profile;
pub mod quad;
pub mod special;
pub mod verify;
pub mod workers;

pub use error::{Error, Result};
