//! Seeded random scenes shared by the oracle test suites.

use hvsense_core::{ClusterLabel, Layout, Pose, Scatterer, Scene, Vec2, SPEED_OF_LIGHT};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Draws a scatterer that stays clear of the SV origin and all cluster
/// positions.
fn draw_scatterer(rng: &mut ChaCha8Rng, distance: f64, clusters: &[Vec2]) -> Vec2 {
    loop {
        let x = rng.gen_range(-0.3 * distance..1.3 * distance);
        let y = rng.gen_range(-0.9 * distance..0.9 * distance);
        let s = Vec2::new(x, y);
        if s.norm() < 2.0 {
            continue;
        }
        if clusters.iter().any(|&q| (s - q).norm() < 2.0) {
            continue;
        }
        return s;
    }
}

/// Single-cluster scene with `paths` scatterers at roughly the given
/// SV-HV distance; heading uniform over the circle.
pub fn random_single_scene(rng: &mut ChaCha8Rng, paths: usize, distance: f64) -> Scene {
    let direction = rng.gen_range(0.0..std::f64::consts::TAU);
    let hv = Vec2::new(distance * direction.cos(), distance * direction.sin());
    let heading = rng.gen_range(0.0..std::f64::consts::TAU);
    let scatterers = (0..paths)
        .map(|_| Scatterer {
            position: draw_scatterer(rng, distance, &[hv]),
            cluster: ClusterLabel::Single,
        })
        .collect();
    Scene {
        hv_pose: Pose::new(hv, heading),
        layout: Layout::Single,
        scatterers,
        gamma: rng.gen_range(-1e-6..1e-6),
        c: SPEED_OF_LIGHT,
    }
}

/// Four-cluster scene. The first four paths cover clusters 1..=4 so the
/// shape is always observable; extra paths get random labels.
pub fn random_multi_scene(
    rng: &mut ChaCha8Rng,
    paths: usize,
    distance: f64,
    length: f64,
    width: f64,
) -> Scene {
    assert!(paths >= 4);
    let direction = rng.gen_range(0.0..std::f64::consts::TAU);
    let hv = Vec2::new(distance * direction.cos(), distance * direction.sin());
    let heading = rng.gen_range(0.0..std::f64::consts::TAU);
    let pose = Pose::new(hv, heading);
    let layout = Layout::rect(length, width).unwrap();
    let probe = Scene {
        hv_pose: pose,
        layout,
        scatterers: vec![],
        gamma: 0.0,
        c: SPEED_OF_LIGHT,
    };
    let clusters: Vec<Vec2> = (1..=4)
        .map(|k| probe.cluster_position(ClusterLabel::cluster(k)))
        .collect();

    let scatterers = (0..paths)
        .map(|i| {
            let k = if i < 4 {
                (i + 1) as u8
            } else {
                rng.gen_range(1..=4u8)
            };
            Scatterer {
                position: draw_scatterer(rng, distance, &clusters),
                cluster: ClusterLabel::cluster(k),
            }
        })
        .collect();
    Scene {
        hv_pose: pose,
        layout,
        scatterers,
        gamma: rng.gen_range(-1e-6..1e-6),
        c: SPEED_OF_LIGHT,
    }
}
