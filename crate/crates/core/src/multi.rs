//! Joint recovery of all four corner clusters, the vehicle rectangle
//! and the heading from at least six cluster-labeled paths.
//!
//! The rectangle prior ties the four cluster positions together through
//! the vertex offsets, so two extra columns (for the unknown length and
//! width) extend the single-cluster system instead of solving four
//! separate problems: `Â(ω) ẑ = B(ω)` with
//! `ẑ = (ν_1..ν_P, d_1, L, W)`. Every path's equation is anchored on the
//! lowest-index populated cluster; with cluster 1 populated that is the
//! paper-and-pencil case, and otherwise the offsets are re-derived
//! relative to the anchor so the solver stays total over labelings.

use crate::error::SolverError;
use crate::geometry::{path_origin, tdoa, vertex_offset, PathObservation};
use crate::linalg;
use crate::search::{minimize_orientation, OrientationFit};
use crate::single::{build_system, duplicate_pair, physical_flags, SolverConfig};
use crate::{wrap_angle, Vec2};
use nalgebra::{DMatrix, DVector};

/// The extended system for one candidate heading:
/// `a_hat = [A | L-column | W-column]`, columns `(ν_1..ν_P, d_1, L, W)`.
#[derive(Debug, Clone)]
pub struct MultiLinearSystem {
    pub a_hat: DMatrix<f64>,
    pub b: DVector<f64>,
    pub omega: f64,
    /// Paths per cluster label 1..=4 (in label order, not solve order).
    pub partition: [usize; 4],
    /// Cluster whose vertex anchors the equations (lowest populated).
    pub anchor: u8,
    /// Maps solve order to the caller's observation order.
    pub order: Vec<usize>,
}

/// Result of multi-cluster sensing.
#[derive(Debug, Clone)]
pub struct MultiEstimate {
    /// Recovered heading, radians in `[0, 2π)`.
    pub omega: f64,
    /// Recovered vertex positions for clusters 1..=4.
    pub vertices: [Vec2; 4],
    /// Mean of the four vertices.
    pub centroid: Vec2,
    /// Recovered rectangle length, meters.
    pub length: f64,
    /// Recovered rectangle width, meters.
    pub width: f64,
    /// Solved vector `(ν_1..ν_P, d_1, L, W)` in solve order.
    pub z_hat: DVector<f64>,
    /// Orthogonality residual at the chosen heading.
    pub residual: f64,
    /// A second heading fit nearly as well as the chosen one.
    pub ambiguous: bool,
    /// The runner-up heading and its residual, when a separated second
    /// minimum exists (see `SingleEstimate::runner_up`).
    pub runner_up: Option<(f64, f64)>,
    /// Length or width solved negative: the labeling disagrees with the
    /// assumed vertex winding. Reported, not silently fixed.
    pub reflected_layout: bool,
    /// Some solved distance came out non-positive.
    pub nonphysical_distances: bool,
}

fn cluster_indices(obs: &[PathObservation]) -> Result<Vec<u8>, SolverError> {
    obs.iter()
        .enumerate()
        .map(|(i, o)| {
            o.cluster
                .index()
                .ok_or(SolverError::MissingClusterLabel { index: i })
        })
        .collect()
}

/// Solve order: anchor-cluster paths first, then remaining clusters in
/// ascending label order; stable within each cluster.
fn solve_order(labels: &[u8], anchor: u8) -> Vec<usize> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by_key(|&i| (labels[i] != anchor, labels[i], i));
    order
}

/// Coefficient of L (resp. W) in the global x-offset of cluster `k`
/// relative to `anchor`: the offset is
/// `dl * (L cos ω, L sin ω) + dw * (-W sin ω, W cos ω)`.
fn offset_coefficients(k: u8, anchor: u8) -> (f64, f64) {
    let along = |c: u8| matches!(c, 2 | 3) as i8;
    let across = |c: u8| matches!(c, 3 | 4) as i8;
    (
        (along(k) - along(anchor)) as f64,
        (across(k) - across(anchor)) as f64,
    )
}

struct SortedObs {
    obs: Vec<PathObservation>,
    labels: Vec<u8>,
    order: Vec<usize>,
    anchor: u8,
    partition: [usize; 4],
}

fn sort_by_cluster(obs: &[PathObservation]) -> Result<SortedObs, SolverError> {
    let labels = cluster_indices(obs)?;
    let anchor = *labels.iter().min().expect("nonempty");
    let order = solve_order(&labels, anchor);
    let mut partition = [0usize; 4];
    for &l in &labels {
        partition[(l - 1) as usize] += 1;
    }
    Ok(SortedObs {
        obs: order.iter().map(|&i| obs[i]).collect(),
        labels: order.iter().map(|&i| labels[i]).collect(),
        order,
        anchor,
        partition,
    })
}

fn build_multi_system(
    sorted: &SortedObs,
    omega: f64,
    c: f64,
) -> (DMatrix<f64>, DVector<f64>) {
    let p = sorted.obs.len();
    let (a, b) = build_system(&sorted.obs, omega, c);
    let (sin_w, cos_w) = omega.sin_cos();

    let mut a_hat = DMatrix::<f64>::zeros(2 * (p - 1), p + 3);
    a_hat.view_mut((0, 0), (2 * (p - 1), p + 1)).copy_from(&a);
    for idx in 1..p {
        let (dl, dw) = offset_coefficients(sorted.labels[idx], sorted.anchor);
        let row_c = idx - 1;
        let row_s = (p - 1) + (idx - 1);
        a_hat[(row_c, p + 1)] = dl * cos_w;
        a_hat[(row_s, p + 1)] = dl * sin_w;
        a_hat[(row_c, p + 2)] = -dw * sin_w;
        a_hat[(row_s, p + 2)] = dw * cos_w;
    }
    (a_hat, b)
}

/// Assembles the extended system. Observations are reordered internally
/// so the reference path belongs to the anchor cluster; `order` in the
/// result maps back to the caller's indices.
pub fn assemble_multi(
    obs: &[PathObservation],
    omega: f64,
    c: f64,
) -> Result<MultiLinearSystem, SolverError> {
    if obs.len() < 2 {
        return Err(SolverError::InsufficientPaths {
            task: "system assembly",
            required: 2,
            got: obs.len(),
        });
    }
    let sorted = sort_by_cluster(obs)?;
    let (a_hat, b) = build_multi_system(&sorted, omega, c);
    Ok(MultiLinearSystem {
        a_hat,
        b,
        omega,
        partition: sorted.partition,
        anchor: sorted.anchor,
        order: sorted.order,
    })
}

fn populated(partition: &[usize; 4]) -> Vec<u8> {
    (1u8..=4)
        .filter(|&k| partition[(k - 1) as usize] > 0)
        .collect()
}

/// Structural observability of the two shape unknowns: the length column
/// is nonzero only when the populated clusters straddle the {2,3}/{1,4}
/// split, the width column the {3,4}/{1,2} split.
fn check_observability(partition: &[usize; 4]) -> Result<(), SolverError> {
    let pop = populated(partition);
    let has = |set: [u8; 2]| pop.iter().any(|k| set.contains(k));
    if !(has([2, 3]) && has([1, 4])) {
        return Err(SolverError::UnobservableDimension {
            dimension: "length",
            populated: pop,
        });
    }
    if !(has([3, 4]) && has([1, 2])) {
        return Err(SolverError::UnobservableDimension {
            dimension: "width",
            populated: pop,
        });
    }
    Ok(())
}

fn multi_feasible(obs: &[PathObservation]) -> Result<SortedObs, SolverError> {
    if obs.len() < 6 {
        return Err(SolverError::InsufficientPaths {
            task: "multi-cluster sensing",
            required: 6,
            got: obs.len(),
        });
    }
    let sorted = sort_by_cluster(obs)?;
    check_observability(&sorted.partition)?;
    Ok(sorted)
}

fn multi_physical(sorted: &SortedObs, omega: f64, cfg: &SolverConfig) -> bool {
    let (a_hat, b) = build_multi_system(sorted, omega, cfg.c);
    let (z, rank) = linalg::lstsq(&a_hat, &b, cfg.rank_rel_eps);
    if rank < a_hat.ncols() {
        return false;
    }
    let p = sorted.obs.len();
    // Small negative tolerance so a genuinely collapsed layout (sides
    // near zero) is not rejected over rounding.
    const SIDE_FLOOR: f64 = -1e-6;
    z[p + 1] > SIDE_FLOOR
        && z[p + 2] > SIDE_FLOOR
        && physical_flags(&sorted.obs, &z.rows(0, p + 1).clone_owned(), cfg.c).is_none()
}

/// Heading search over the extended system's orthogonality residual.
pub fn search_orientation_multi(
    obs: &[PathObservation],
    cfg: &SolverConfig,
) -> Result<OrientationFit, SolverError> {
    let sorted = multi_feasible(obs)?;
    let residual = |w: f64| {
        let (a_hat, b) = build_multi_system(&sorted, w, cfg.c);
        linalg::projection_residual(&a_hat, &b, cfg.rank_rel_eps)
    };
    let physical = |w: f64| multi_physical(&sorted, w, cfg);
    minimize_orientation(&residual, &physical, &cfg.search_settings())
}

/// Full multi-cluster sensing: heading search, least-squares solve for
/// distances and rectangle sides, then vertex placement.
///
/// Every path contributes one reconstruction of the anchor vertex (its
/// own origin shifted back by the solved offsets); their mean anchors
/// the rectangle and the other vertices follow from the vertex offsets.
pub fn sense_multi(
    obs: &[PathObservation],
    cfg: &SolverConfig,
) -> Result<MultiEstimate, SolverError> {
    let sorted = multi_feasible(obs)?;
    if let Some((i, j)) = duplicate_pair(&sorted.obs) {
        return Err(SolverError::DegenerateConfiguration(format!(
            "observations {} and {} are identical",
            sorted.order[i], sorted.order[j]
        )));
    }

    let fit = {
        let residual = |w: f64| {
            let (a_hat, b) = build_multi_system(&sorted, w, cfg.c);
            linalg::projection_residual(&a_hat, &b, cfg.rank_rel_eps)
        };
        let physical = |w: f64| multi_physical(&sorted, w, cfg);
        minimize_orientation(&residual, &physical, &cfg.search_settings())?
    };

    let (a_hat, b) = build_multi_system(&sorted, fit.omega, cfg.c);
    let (z, rank) = linalg::lstsq(&a_hat, &b, cfg.rank_rel_eps);
    if rank < a_hat.ncols() {
        return Err(SolverError::DegenerateConfiguration(format!(
            "system rank {rank} below {} unknowns",
            a_hat.ncols()
        )));
    }

    let p = sorted.obs.len();
    let (length, width) = (z[p + 1], z[p + 2]);
    let reflected = length <= 0.0 || width <= 0.0;

    let rho = tdoa(&sorted.obs.iter().map(|o| o.toa).collect::<Vec<_>>());
    let d1 = z[p];
    let offset = |k: u8| {
        vertex_offset(fit.omega, length, width, k)
            - vertex_offset(fit.omega, length, width, sorted.anchor)
    };
    let anchor_estimates: Vec<Vec2> = sorted
        .obs
        .iter()
        .enumerate()
        .map(|(idx, ob)| {
            let origin = path_origin(ob, z[idx], d1 + cfg.c * rho[idx], fit.omega);
            origin - offset(sorted.labels[idx])
        })
        .collect();
    let anchor_vertex = anchor_estimates.iter().sum::<Vec2>() / p as f64;

    let vertices = [
        anchor_vertex + offset(1),
        anchor_vertex + offset(2),
        anchor_vertex + offset(3),
        anchor_vertex + offset(4),
    ];
    let centroid = vertices.iter().sum::<Vec2>() / 4.0;
    let nonphysical =
        physical_flags(&sorted.obs, &z.rows(0, p + 1).clone_owned(), cfg.c).is_some();

    Ok(MultiEstimate {
        omega: wrap_angle(fit.omega),
        vertices,
        centroid,
        length,
        width,
        z_hat: z,
        residual: fit.residual,
        ambiguous: fit.ambiguous,
        runner_up: fit.runner_up,
        reflected_layout: reflected,
        nonphysical_distances: nonphysical,
    })
}

/// Multi-cluster sensing with known rectangle sides: the offset terms
/// become constants folded into the right-hand side, so only the
/// distances remain unknown and four paths suffice.
pub fn sense_multi_constrained(
    obs: &[PathObservation],
    length: f64,
    width: f64,
    cfg: &SolverConfig,
) -> Result<MultiEstimate, SolverError> {
    if obs.len() < 4 {
        return Err(SolverError::InsufficientPaths {
            task: "multi-cluster sensing with known sides",
            required: 4,
            got: obs.len(),
        });
    }
    let sorted = sort_by_cluster(obs)?;
    if let Some((i, j)) = duplicate_pair(&sorted.obs) {
        return Err(SolverError::DegenerateConfiguration(format!(
            "observations {} and {} are identical",
            sorted.order[i], sorted.order[j]
        )));
    }

    let build = |w: f64| {
        let (a_hat, mut b) = build_multi_system(&sorted, w, cfg.c);
        let p = sorted.obs.len();
        // Fold the known L, W columns into the right-hand side.
        let l_col = a_hat.column(p + 1).clone_owned();
        let w_col = a_hat.column(p + 2).clone_owned();
        b -= l_col * length + w_col * width;
        let a = a_hat.view((0, 0), (2 * (p - 1), p + 1)).clone_owned();
        (a, b)
    };

    let fit = {
        let residual = |w: f64| {
            let (a, b) = build(w);
            linalg::projection_residual(&a, &b, cfg.rank_rel_eps)
        };
        let physical = |w: f64| {
            let (a, b) = build(w);
            let (z, rank) = linalg::lstsq(&a, &b, cfg.rank_rel_eps);
            rank == a.ncols() && physical_flags(&sorted.obs, &z, cfg.c).is_none()
        };
        minimize_orientation(&residual, &physical, &cfg.search_settings())?
    };

    let (a, b) = build(fit.omega);
    let (z, rank) = linalg::lstsq(&a, &b, cfg.rank_rel_eps);
    if rank < a.ncols() {
        return Err(SolverError::DegenerateConfiguration(format!(
            "system rank {rank} below {} unknowns",
            a.ncols()
        )));
    }

    let p = sorted.obs.len();
    let rho = tdoa(&sorted.obs.iter().map(|o| o.toa).collect::<Vec<_>>());
    let d1 = z[p];
    let offset = |k: u8| {
        vertex_offset(fit.omega, length, width, k)
            - vertex_offset(fit.omega, length, width, sorted.anchor)
    };
    let anchor_estimates: Vec<Vec2> = sorted
        .obs
        .iter()
        .enumerate()
        .map(|(idx, ob)| {
            let origin = path_origin(ob, z[idx], d1 + cfg.c * rho[idx], fit.omega);
            origin - offset(sorted.labels[idx])
        })
        .collect();
    let anchor_vertex = anchor_estimates.iter().sum::<Vec2>() / p as f64;
    let vertices = [
        anchor_vertex + offset(1),
        anchor_vertex + offset(2),
        anchor_vertex + offset(3),
        anchor_vertex + offset(4),
    ];
    let centroid = vertices.iter().sum::<Vec2>() / 4.0;
    let nonphysical = physical_flags(&sorted.obs, &z, cfg.c).is_some();

    let mut z_hat = DVector::<f64>::zeros(p + 3);
    z_hat.rows_mut(0, p + 1).copy_from(&z);
    z_hat[p + 1] = length;
    z_hat[p + 2] = width;

    Ok(MultiEstimate {
        omega: wrap_angle(fit.omega),
        vertices,
        centroid,
        length,
        width,
        z_hat,
        residual: fit.residual,
        ambiguous: fit.ambiguous,
        runner_up: fit.runner_up,
        reflected_layout: false,
        nonphysical_distances: nonphysical,
    })
}
