//! Axially symmetric membrane discs with a fixed circular boundary.
//!
//! The crate integrates generating curves of the reduced shape equation
//! `H + c_o = -ν₃/z`, shoots for the tangential disc `Σ₀` spanning a
//! prescribed boundary circle, linearizes the problem about it, computes the
//! spectrum of the Jacobi operator mode by mode and assembles the evidence
//! for a symmetry-breaking bifurcation.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod export;
pub mod linearized;
pub mod ode;
pub mod profile;
pub mod quadrature;
pub mod resample;
pub mod roots;
pub mod shooting;
pub mod spectral;
pub mod surfaces;

pub use error::{Error, Result};
pub use profile::{
    axis_curvature_extrapolated, axis_seed, energy, first_integral_residual, fourth_order_residual,
    geometry_at, integrate_profile, shape_diagnostics, GeometryPoint, IntegratorSettings,
    ModelParams, ProfileCurve, ProfileState, ShapeDiagnostics, StopCondition, StopKind, StopReason,
};
