//! Structured-text (TOML) fixture files for scenes and observation
//! lists.
//!
//! Scene schema:
//!
//! ```toml
//! c = 299792458.0        # optional, m/s
//! gamma = 0.0            # optional, clock gap in seconds
//!
//! [hv]
//! position = [40.0, 6.0]
//! heading = 0.6
//!
//! [layout]               # omit the table for a single-cluster array
//! length = 3.0
//! width = 6.0
//!
//! [[scatterers]]
//! position = [18.0, 12.0]
//! cluster = 2            # 1..=4, or "single"
//! ```
//!
//! Observation-list schema:
//!
//! ```toml
//! [[observations]]
//! aoa = 1.0              # radians
//! aod = 2.0              # radians
//! toa = 2.5e-7           # seconds
//! cluster = "single"     # or 1..=4
//! ```

use crate::geometry::{ClusterLabel, Layout, PathObservation, Pose, Scatterer, Scene, SPEED_OF_LIGHT};
use crate::Vec2;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
    #[error("invalid fixture: {0}")]
    Invalid(String),
}

/// Serde adapter: `"single"` or an integer 1..=4.
pub mod cluster_label_serde {
    use super::ClusterLabel;
    use serde::de::{Error as DeError, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(label: &ClusterLabel, s: S) -> Result<S::Ok, S::Error> {
        match label {
            ClusterLabel::Single => s.serialize_str("single"),
            ClusterLabel::Cluster(k) => s.serialize_u8(*k),
        }
    }

    struct LabelVisitor;

    impl Visitor<'_> for LabelVisitor {
        type Value = ClusterLabel;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            write!(f, "\"single\" or a cluster index 1..=4")
        }

        fn visit_str<E: DeError>(self, v: &str) -> Result<Self::Value, E> {
            if v.eq_ignore_ascii_case("single") {
                Ok(ClusterLabel::Single)
            } else {
                Err(E::custom(format!("unknown cluster label `{v}`")))
            }
        }

        fn visit_i64<E: DeError>(self, v: i64) -> Result<Self::Value, E> {
            if (1..=4).contains(&v) {
                Ok(ClusterLabel::Cluster(v as u8))
            } else {
                Err(E::custom(format!("cluster index {v} outside 1..=4")))
            }
        }

        fn visit_u64<E: DeError>(self, v: u64) -> Result<Self::Value, E> {
            self.visit_i64(v as i64)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ClusterLabel, D::Error> {
        d.deserialize_any(LabelVisitor)
    }
}

#[derive(Serialize, Deserialize)]
struct PoseFile {
    position: [f64; 2],
    heading: f64,
}

#[derive(Serialize, Deserialize)]
struct LayoutFile {
    length: f64,
    width: f64,
}

#[derive(Serialize, Deserialize)]
struct ScattererFile {
    position: [f64; 2],
    #[serde(with = "cluster_label_serde")]
    cluster: ClusterLabel,
}

#[derive(Serialize, Deserialize)]
struct SceneFile {
    #[serde(default = "default_c")]
    c: f64,
    #[serde(default)]
    gamma: f64,
    hv: PoseFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layout: Option<LayoutFile>,
    #[serde(default)]
    scatterers: Vec<ScattererFile>,
}

fn default_c() -> f64 {
    SPEED_OF_LIGHT
}

#[derive(Serialize, Deserialize)]
struct ObservationsFile {
    observations: Vec<PathObservation>,
}

pub fn scene_to_toml(scene: &Scene) -> String {
    let file = SceneFile {
        c: scene.c,
        gamma: scene.gamma,
        hv: PoseFile {
            position: [scene.hv_pose.position.x, scene.hv_pose.position.y],
            heading: scene.hv_pose.heading(),
        },
        layout: match scene.layout {
            Layout::Single => None,
            Layout::Rect { length, width } => Some(LayoutFile { length, width }),
        },
        scatterers: scene
            .scatterers
            .iter()
            .map(|s| ScattererFile {
                position: [s.position.x, s.position.y],
                cluster: s.cluster,
            })
            .collect(),
    };
    toml::to_string_pretty(&file).expect("scene serializes")
}

pub fn scene_from_toml(text: &str) -> Result<Scene, FixtureError> {
    let file: SceneFile = toml::from_str(text).map_err(|e| FixtureError::Parse(e.to_string()))?;
    let layout = match file.layout {
        None => Layout::Single,
        Some(LayoutFile { length, width }) => {
            Layout::rect(length, width).map_err(|e| FixtureError::Invalid(e.to_string()))?
        }
    };
    let scene = Scene {
        hv_pose: Pose::new(
            Vec2::new(file.hv.position[0], file.hv.position[1]),
            file.hv.heading,
        ),
        layout,
        scatterers: file
            .scatterers
            .into_iter()
            .map(|s| Scatterer {
                position: Vec2::new(s.position[0], s.position[1]),
                cluster: s.cluster,
            })
            .collect(),
        gamma: file.gamma,
        c: file.c,
    };
    scene
        .validate()
        .map_err(|e| FixtureError::Invalid(e.to_string()))?;
    Ok(scene)
}

pub fn load_scene(path: &Path) -> Result<Scene, FixtureError> {
    scene_from_toml(&std::fs::read_to_string(path)?)
}

pub fn save_scene(path: &Path, scene: &Scene) -> Result<(), FixtureError> {
    Ok(std::fs::write(path, scene_to_toml(scene))?)
}

pub fn observations_to_toml(obs: &[PathObservation]) -> String {
    toml::to_string_pretty(&ObservationsFile {
        observations: obs.to_vec(),
    })
    .expect("observations serialize")
}

pub fn observations_from_toml(text: &str) -> Result<Vec<PathObservation>, FixtureError> {
    let file: ObservationsFile =
        toml::from_str(text).map_err(|e| FixtureError::Parse(e.to_string()))?;
    Ok(file.observations)
}

pub fn load_observations(path: &Path) -> Result<Vec<PathObservation>, FixtureError> {
    observations_from_toml(&std::fs::read_to_string(path)?)
}

pub fn save_observations(path: &Path, obs: &[PathObservation]) -> Result<(), FixtureError> {
    Ok(std::fs::write(path, observations_to_toml(obs))?)
}
