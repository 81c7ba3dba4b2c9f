//! Geometric core for sensing an occluded vehicle from single-bounce
//! multipath V2V observations.
//!
//! A sensing vehicle (SV) sits at the origin of a 2D frame with its
//! heading along the +X axis. A hidden vehicle (HV) somewhere nearby
//! transmits known orthogonal waveforms; every propagation path bounces
//! off exactly one scatterer before reaching the SV. Each path is
//! summarized by an angle of arrival (at the SV), an angle of departure
//! (relative to the HV heading), and a time of arrival contaminated by
//! an unknown clock gap between the two vehicles.
//!
//! The crate provides:
//! - [`geometry`]: scene types and the exact forward model used as the
//!   ground-truth oracle by every solver test,
//! - [`single`]: recovery of HV position and heading from a colocated
//!   (single-cluster) transmit array, needing at least 4 paths,
//! - [`multi`]: joint recovery of all four corner clusters, the vehicle
//!   rectangle (length, width) and heading, needing at least 6 paths,
//! - [`linalg`]: the SVD-based null-space and least-squares kernels the
//!   solvers are built on,
//! - [`fixtures`]: a small structured-text (TOML) schema for scene and
//!   observation fixture files.

pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod linalg;
pub mod multi;
mod search;
pub mod single;

pub use error::{GeometryError, SolverError};
pub use geometry::{
    forward_observe, path_origin, tdoa, vertex_offset, ClusterLabel, Layout, PathGeometry,
    PathObservation, Pose, Scatterer, Scene, SPEED_OF_LIGHT,
};
pub use single::{sense, SingleEstimate, SolverConfig};
pub use multi::{sense_multi, MultiEstimate};

/// 2D point / vector in meters.
pub type Vec2 = nalgebra::Vector2<f64>;

/// Wraps an angle to `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let t = a.rem_euclid(std::f64::consts::TAU);
    if t >= std::f64::consts::TAU {
        0.0
    } else {
        t
    }
}

/// Smallest absolute difference between two angles, accounting for wrap.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(std::f64::consts::TAU - d)
}
