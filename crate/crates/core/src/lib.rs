//! Discrete immersions of hyperbolic surfaces with prescribed, non-constant
//! negative Gaussian curvature.
//!
//! Surfaces are built as asymptotic complexes: quad grids whose edges follow
//! the asymptotic lines of the immersion. Every quad obeys the discrete
//! Lelieuvre relations with rescaled normals `ν = ρ^{1/2} N`, where
//! `ρ = (-K)^{-1/2}`. When the curvature depends on geodesic distance the
//! relations become implicit; [`amsler`] resolves them with an outer
//! fixed-point iteration that alternates interior sweeps ([`lelieuvre`]) with
//! fast-marching distance solves ([`geodesic`]). [`surgery`] inserts branch
//! points by replacing a corner square of a sector with an odd number of new
//! sectors.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![deny(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod amsler;
pub mod curvature;
mod error;
pub mod geodesic;
pub mod lelieuvre;
pub mod mesh;
pub mod surgery;
pub mod validate;
mod vec3;

pub use error::{Error, Result};
pub use vec3::Vec3;
