//! Ground-truth scene representation and the exact forward model.
//!
//! Conventions used throughout the workspace:
//! - The sensing vehicle (SV) array sits at the origin, heading along +X.
//! - Angles of arrival are azimuths measured counterclockwise from the SV
//!   heading; angles of departure are measured from the HV heading. Both
//!   are wrapped to `[0, 2π)`.
//! - A path runs HV cluster → scatterer → SV. Its `sv_leg` is the
//!   SV-to-scatterer distance and `total` the full two-leg length, so the
//!   HV-side leg is `total - sv_leg`.
//! - Times of arrival include the (unknown to the solvers) clock gap
//!   between the vehicles; only differences of arrival times are
//!   clock-free.

use crate::error::GeometryError;
use crate::{wrap_angle, Vec2};
use serde::{Deserialize, Serialize};

/// Propagation speed in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Distance below which a scatterer is treated as coincident with an
/// endpoint and the path geometry is degenerate.
const DEGENERACY_EPS: f64 = 1e-9;

/// Position and heading of a vehicle in the global (SV) frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    /// Position in meters.
    pub position: Vec2,
    /// Heading in radians, wrapped to `[0, 2π)`.
    heading: f64,
}

impl Pose {
    /// Creates a pose, wrapping the heading to `[0, 2π)`.
    ///
    /// Panics if any coordinate is non-finite.
    pub fn new(position: Vec2, heading: f64) -> Self {
        assert!(
            position.x.is_finite() && position.y.is_finite() && heading.is_finite(),
            "pose coordinates must be finite"
        );
        Self {
            position,
            heading: wrap_angle(heading),
        }
    }

    pub fn heading(&self) -> f64 {
        self.heading
    }
}

/// Which transmit cluster a path or scatterer belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClusterLabel {
    /// The HV carries a single colocated array.
    Single,
    /// One of the four corner clusters, numbered 1..=4.
    Cluster(u8),
}

impl ClusterLabel {
    pub fn cluster(index: u8) -> Self {
        assert!((1..=4).contains(&index), "cluster index must be in 1..=4");
        ClusterLabel::Cluster(index)
    }

    /// Cluster number if labeled, `None` for a single array.
    pub fn index(&self) -> Option<u8> {
        match self {
            ClusterLabel::Single => None,
            ClusterLabel::Cluster(k) => Some(*k),
        }
    }
}

impl std::fmt::Display for ClusterLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClusterLabel::Single => write!(f, "single"),
            ClusterLabel::Cluster(k) => write!(f, "{k}"),
        }
    }
}

/// Transmit-array layout carried by the hidden vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layout {
    /// One colocated cluster at the HV reference point.
    Single,
    /// Four clusters at the corners of a rectangle. The reference vertex
    /// (cluster 1) is the HV pose position; in the HV frame the corners
    /// are (0,0), (length,0), (length,width), (0,width).
    Rect { length: f64, width: f64 },
}

impl Layout {
    /// Rectangle layout; sides must be positive.
    pub fn rect(length: f64, width: f64) -> Result<Self, GeometryError> {
        if !(length > 0.0 && width > 0.0) || !length.is_finite() || !width.is_finite() {
            return Err(GeometryError::InvalidScene(format!(
                "rectangle sides must be positive and finite, got {length} x {width}"
            )));
        }
        Ok(Layout::Rect { length, width })
    }

    /// Labels that are valid for this layout.
    pub fn accepts(&self, label: ClusterLabel) -> bool {
        match (self, label) {
            (Layout::Single, ClusterLabel::Single) => true,
            (Layout::Rect { .. }, ClusterLabel::Cluster(_)) => true,
            _ => false,
        }
    }
}

/// Global-frame offset of cluster `k`'s vertex from the reference vertex
/// (cluster 1), for a rectangle with the given sides and heading.
///
/// k=1 → (0,0); k=2 → (L cos ω, L sin ω); k=3 → (L cos ω − W sin ω,
/// L sin ω + W cos ω); k=4 → (−W sin ω, W cos ω).
pub fn vertex_offset(heading: f64, length: f64, width: f64, k: u8) -> Vec2 {
    let (s, c) = heading.sin_cos();
    match k {
        1 => Vec2::new(0.0, 0.0),
        2 => Vec2::new(length * c, length * s),
        3 => Vec2::new(length * c - width * s, length * s + width * c),
        4 => Vec2::new(-width * s, width * c),
        _ => panic!("cluster index must be in 1..=4, got {k}"),
    }
}

/// One reflecting point together with the cluster whose signal it serves.
///
/// A physical scatterer that reflects more than one cluster's signal is
/// listed once per served cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    pub position: Vec2,
    pub cluster: ClusterLabel,
}

/// Ground-truth world: the hidden vehicle, its transmit layout, the
/// scatterer field, the clock gap and the propagation speed.
#[derive(Debug, Clone)]
pub struct Scene {
    pub hv_pose: Pose,
    pub layout: Layout,
    pub scatterers: Vec<Scatterer>,
    /// Clock synchronization gap between HV and SV, seconds. Added to
    /// every time of arrival; unknown to the solvers.
    pub gamma: f64,
    /// Propagation speed, m/s.
    pub c: f64,
}

impl Scene {
    /// Checks label/layout consistency.
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.c > 0.0) {
            return Err(GeometryError::InvalidScene(format!(
                "propagation speed must be positive, got {}",
                self.c
            )));
        }
        for (i, s) in self.scatterers.iter().enumerate() {
            if !self.layout.accepts(s.cluster) {
                return Err(GeometryError::LabelMismatch {
                    index: i,
                    label: s.cluster.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Global position of the transmit cluster serving `label`.
    pub fn cluster_position(&self, label: ClusterLabel) -> Vec2 {
        match (self.layout, label) {
            (Layout::Single, _) | (_, ClusterLabel::Single) => self.hv_pose.position,
            (Layout::Rect { length, width }, ClusterLabel::Cluster(k)) => {
                self.hv_pose.position + vertex_offset(self.hv_pose.heading(), length, width, k)
            }
        }
    }

    /// Global positions of all four vertices (rectangle layouts only).
    pub fn vertices(&self) -> Option<[Vec2; 4]> {
        match self.layout {
            Layout::Single => None,
            Layout::Rect { .. } => Some([
                self.cluster_position(ClusterLabel::Cluster(1)),
                self.cluster_position(ClusterLabel::Cluster(2)),
                self.cluster_position(ClusterLabel::Cluster(3)),
                self.cluster_position(ClusterLabel::Cluster(4)),
            ]),
        }
    }
}

/// Measured parameters of one path: angle of arrival at the SV, angle of
/// departure at the HV, time of arrival (clock gap included), and the
/// originating cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathObservation {
    /// Angle of arrival, radians in `[0, 2π)`, relative to the SV heading.
    pub aoa: f64,
    /// Angle of departure, radians in `[0, 2π)`, relative to the HV heading.
    pub aod: f64,
    /// Time of arrival, seconds. Includes the unknown clock gap.
    pub toa: f64,
    /// Originating cluster.
    #[serde(with = "crate::fixtures::cluster_label_serde")]
    pub cluster: ClusterLabel,
}

/// True per-path distances and endpoint, produced by the forward model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGeometry {
    /// SV-to-scatterer distance, meters.
    pub sv_leg: f64,
    /// Total path length (both legs), meters.
    pub total: f64,
    /// Global position of the emitting cluster.
    pub origin: Vec2,
}

/// Exact forward model: maps a scene to one noiseless observation per
/// scatterer entry, together with the true path geometry.
///
/// Substituting the outputs back into [`path_origin`] with the true
/// heading reproduces each emitting cluster position to machine
/// precision; that inversion is what the solvers exploit.
pub fn forward_observe(
    scene: &Scene,
) -> Result<Vec<(PathObservation, PathGeometry)>, GeometryError> {
    scene.validate()?;
    let omega = scene.hv_pose.heading();
    let mut out = Vec::with_capacity(scene.scatterers.len());
    for (i, sc) in scene.scatterers.iter().enumerate() {
        let s = sc.position;
        let q = scene.cluster_position(sc.cluster);
        let sv_leg = s.norm();
        if sv_leg < DEGENERACY_EPS {
            return Err(GeometryError::ScattererAtOrigin { index: i });
        }
        let hv_vec = s - q;
        let hv_leg = hv_vec.norm();
        if hv_leg < DEGENERACY_EPS {
            return Err(GeometryError::ScattererAtCluster {
                index: i,
                cluster: sc.cluster.to_string(),
            });
        }
        let total = sv_leg + hv_leg;
        let obs = PathObservation {
            aoa: wrap_angle(s.y.atan2(s.x)),
            aod: wrap_angle(hv_vec.y.atan2(hv_vec.x) - omega),
            toa: total / scene.c + scene.gamma,
            cluster: sc.cluster,
        };
        let geom = PathGeometry {
            sv_leg,
            total,
            origin: q,
        };
        out.push((obs, geom));
    }
    Ok(out)
}

/// Time differences of arrival against the first entry.
///
/// `out[0]` is 0 and `out[p] = toas[p] - toas[0]`; a clock gap common to
/// all entries cancels. Empty input yields an empty output.
pub fn tdoa(toas: &[f64]) -> Vec<f64> {
    match toas.first() {
        None => Vec::new(),
        Some(&reference) => toas.iter().map(|&t| t - reference).collect(),
    }
}

/// Inverts one path: the global position of the emitting endpoint given
/// the observation, the SV-side leg, the total length and the HV heading.
///
/// With `sv_leg == total` (zero HV-side leg) this is the scatterer point
/// itself.
pub fn path_origin(obs: &PathObservation, sv_leg: f64, total: f64, omega: f64) -> Vec2 {
    let hv_leg = total - sv_leg;
    let dep = obs.aod + omega;
    Vec2::new(
        sv_leg * obs.aoa.cos() - hv_leg * dep.cos(),
        sv_leg * obs.aoa.sin() - hv_leg * dep.sin(),
    )
}
