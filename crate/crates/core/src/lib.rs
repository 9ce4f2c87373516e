//! Simulator and phase optimizer for a metasurface-assisted downlink in
//! which a panel of reconfigurable elements serves users on both of its
//! sides: in front by reflection and behind by transmission.
//!
//! The crate models the end-to-end Rician channel (direct path plus one
//! cascaded path per element), optimizes the discrete per-element phase
//! shifts, and runs Monte Carlo experiments comparing the two-sided surface
//! against a conventional reflect-only surface and the unaided direct link.
//!
//! All numerics are generic over the scalar type through [`num::Real`];
//! `f64` aliases for the common types are exported at the crate root.

pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod num;
pub mod optimizer;
pub mod report;
pub mod validate;

pub use error::{Error, Result};

/// Single-precision complex sample.
pub type C32 = num_complex::Complex<f32>;
/// Double-precision complex sample.
pub type C64 = num_complex::Complex<f64>;
/// Double-precision point.
pub type Point3d = geometry::Point3<f64>;
/// Double-precision direction.
pub type Direction3d = geometry::Direction<f64>;
/// Double-precision panel description.
pub type Paneld = geometry::PanelGeometry<f64>;
/// Double-precision RF constants.
pub type RfConstantsd = channel::RfConstants<f64>;
/// Double-precision scenario.
pub type Scenariod = experiments::Scenario<f64>;
