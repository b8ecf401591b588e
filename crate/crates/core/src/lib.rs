//! Billiard tables whose focusing boundary is a nearly flat circular arc.
//!
//! The crate builds the tables (the strip table, its area-optimal version
//! and the double-spiral version of bounded diameter), runs the exact
//! billiard dynamics on them, transports infinitesimal beams in focal
//! coordinates, and checks the invariance of the cone bundle and the
//! positivity of the Lyapunov exponent numerically.

pub mod cones;
pub mod dynamics;
mod error;
pub mod geometry;
pub mod json;
pub mod lyapunov;
pub mod rng;
pub mod table;
pub mod tangent;

pub use error::{Error, Result};
