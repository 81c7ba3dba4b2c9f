//! Recovery of the hidden vehicle's position and heading from at least
//! four paths of a colocated (single-cluster) transmit array.
//!
//! For a candidate heading ω the per-path geometry becomes a linear
//! system `A(ω) z = B(ω)` in `z = (ν_1..ν_P, d_1)`, where ν_p is the
//! SV-side leg of path p and d_1 the total length of the reference path;
//! the remaining totals follow from the time differences of arrival.
//! With at least four paths the system is overdetermined and `B(ω)` is
//! orthogonal to the left null space of `A(ω)` only at the true heading.
//! The heading is found by a 1D search over that orthogonality residual,
//! the distances by least squares at the minimizer, and the position by
//! averaging the per-path origin reconstructions.

use crate::error::SolverError;
use crate::geometry::{path_origin, tdoa, PathObservation, SPEED_OF_LIGHT};
use crate::linalg;
use crate::search::{minimize_orientation, OrientationFit, SearchSettings};
use crate::{wrap_angle, Vec2};
use nalgebra::{DMatrix, DVector};

/// Tunables shared by both solvers.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Propagation speed, m/s.
    pub c: f64,
    /// Coarse grid step of the heading search, radians.
    pub grid_step: f64,
    /// Width of the golden-section bracket at termination, radians.
    pub refine_tol: f64,
    /// A runner-up minimum within this factor of the best residual marks
    /// the estimate as ambiguous.
    pub ambiguity_ratio: f64,
    /// Relative singular-value threshold for rank decisions.
    pub rank_rel_eps: f64,
    /// Absolute residual floor, meters: if even the best grid residual
    /// exceeds it the observations are declared inconsistent. Infinite by
    /// default (no absolute scale exists across scenes).
    pub residual_floor: f64,
    /// Reject when the best grid residual exceeds this fraction of the
    /// grid mean (no distinct dip anywhere).
    pub flat_ratio: f64,
    /// How many grid minima are refined.
    pub max_candidates: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            c: SPEED_OF_LIGHT,
            grid_step: std::f64::consts::TAU / 720.0, // 0.5 degrees
            refine_tol: 1e-8,
            ambiguity_ratio: 10.0,
            rank_rel_eps: linalg::DEFAULT_RANK_EPS,
            residual_floor: f64::INFINITY,
            flat_ratio: 0.5,
            max_candidates: 5,
        }
    }
}

impl SolverConfig {
    pub(crate) fn search_settings(&self) -> SearchSettings {
        SearchSettings {
            grid_step: self.grid_step,
            refine_tol: self.refine_tol,
            ambiguity_ratio: self.ambiguity_ratio,
            residual_floor: self.residual_floor,
            flat_ratio: self.flat_ratio,
            max_candidates: self.max_candidates,
        }
    }
}

/// The assembled linear system for one candidate heading.
///
/// Rows are ordered cos-block (paths 2..P) then sin-block (paths 2..P);
/// columns are (ν_1, .., ν_P, d_1).
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub omega: f64,
}

/// Result of single-cluster sensing.
#[derive(Debug, Clone)]
pub struct SingleEstimate {
    /// Recovered heading, radians in `[0, 2π)`.
    pub omega: f64,
    /// Recovered position: mean of the per-path origin reconstructions.
    pub position: Vec2,
    /// Solved distances `(ν_1..ν_P, d_1)`, meters.
    pub distances: DVector<f64>,
    /// Orthogonality residual at the chosen heading.
    pub residual: f64,
    /// Per-path origin reconstructions.
    pub per_path_origins: Vec<Vec2>,
    /// A second heading fit nearly as well as the chosen one.
    pub ambiguous: bool,
    /// The runner-up heading and its residual, when a separated second
    /// minimum exists. At the minimal path count a second exactly
    /// consistent heading can be a true alternative interpretation of
    /// the data; callers deciding safety-critical actions should treat
    /// an ambiguous estimate as two hypotheses.
    pub runner_up: Option<(f64, f64)>,
    /// Some solved distance came out non-positive (reported, not fixed).
    pub nonphysical_distances: bool,
}

pub(crate) fn duplicate_pair(obs: &[PathObservation]) -> Option<(usize, usize)> {
    for i in 0..obs.len() {
        for j in (i + 1)..obs.len() {
            if obs[i].aoa == obs[j].aoa && obs[i].aod == obs[j].aod && obs[i].toa == obs[j].toa {
                return Some((i, j));
            }
        }
    }
    None
}

/// Builds `A(ω)` and `B(ω)`; assumes `obs.len() >= 2`.
pub(crate) fn build_system(
    obs: &[PathObservation],
    omega: f64,
    c: f64,
) -> (DMatrix<f64>, DVector<f64>) {
    let p = obs.len();
    let rho = tdoa(&obs.iter().map(|o| o.toa).collect::<Vec<_>>());
    let mut a = DMatrix::<f64>::zeros(2 * (p - 1), p + 1);
    let mut b = DVector::<f64>::zeros(2 * (p - 1));

    let (dep0_sin, dep0_cos) = (obs[0].aod + omega).sin_cos();
    let a1_cos = obs[0].aoa.cos() + dep0_cos;
    let a1_sin = obs[0].aoa.sin() + dep0_sin;

    for idx in 1..p {
        let (dep_sin, dep_cos) = (obs[idx].aod + omega).sin_cos();
        let row_c = idx - 1;
        let row_s = (p - 1) + (idx - 1);

        a[(row_c, 0)] = a1_cos;
        a[(row_c, idx)] = -(obs[idx].aoa.cos() + dep_cos);
        a[(row_c, p)] = dep_cos - dep0_cos;
        b[row_c] = -c * rho[idx] * dep_cos;

        a[(row_s, 0)] = a1_sin;
        a[(row_s, idx)] = -(obs[idx].aoa.sin() + dep_sin);
        a[(row_s, p)] = dep_sin - dep0_sin;
        b[row_s] = -c * rho[idx] * dep_sin;
    }
    (a, b)
}

/// Assembles the linear system for a candidate heading. The first
/// observation is the reference path.
pub fn assemble(
    obs: &[PathObservation],
    omega: f64,
    c: f64,
) -> Result<LinearSystem, SolverError> {
    if obs.len() < 2 {
        return Err(SolverError::InsufficientPaths {
            task: "system assembly",
            required: 2,
            got: obs.len(),
        });
    }
    let (a, b) = build_system(obs, omega, c);
    Ok(LinearSystem { a, b, omega })
}

fn residual_of(a: &DMatrix<f64>, b: &DVector<f64>, rel_eps: f64) -> f64 {
    linalg::projection_residual(a, b, rel_eps)
}

/// Norm of `Nᵀ B(ω)` where `N` spans the left null space of `A(ω)`;
/// zero exactly when the observations are consistent with heading ω.
pub fn orientation_residual(
    obs: &[PathObservation],
    omega: f64,
    cfg: &SolverConfig,
) -> Result<f64, SolverError> {
    require_feasible(obs, "single-cluster sensing", 4)?;
    let (a, b) = build_system(obs, omega, cfg.c);
    if linalg::rank(&a, cfg.rank_rel_eps) >= a.nrows() {
        return Err(SolverError::EmptyNullSpace);
    }
    Ok(residual_of(&a, &b, cfg.rank_rel_eps))
}

pub(crate) fn require_feasible(
    obs: &[PathObservation],
    task: &'static str,
    required: usize,
) -> Result<(), SolverError> {
    if obs.len() < required {
        return Err(SolverError::InsufficientPaths {
            task,
            required,
            got: obs.len(),
        });
    }
    Ok(())
}

/// True when the least-squares distances at `omega` are all physically
/// meaningful: positive SV legs, positive reference total, positive
/// HV-side legs.
fn distances_physical(obs: &[PathObservation], omega: f64, cfg: &SolverConfig) -> bool {
    let (a, b) = build_system(obs, omega, cfg.c);
    let (z, rank) = linalg::lstsq(&a, &b, cfg.rank_rel_eps);
    if rank < a.ncols() {
        return false;
    }
    physical_flags(obs, &z, cfg.c).is_none()
}

/// Returns a violation description if some distance is non-positive.
pub(crate) fn physical_flags(
    obs: &[PathObservation],
    z: &DVector<f64>,
    c: f64,
) -> Option<String> {
    let p = obs.len();
    let rho = tdoa(&obs.iter().map(|o| o.toa).collect::<Vec<_>>());
    let d1 = z[p];
    if d1 <= 0.0 {
        return Some(format!("reference total {d1:.3} m <= 0"));
    }
    for idx in 0..p {
        let nu = z[idx];
        let total = d1 + c * rho[idx];
        if nu <= 0.0 {
            return Some(format!("path {idx}: SV leg {nu:.3} m <= 0"));
        }
        if total - nu <= 0.0 {
            return Some(format!("path {idx}: HV leg {:.3} m <= 0", total - nu));
        }
    }
    None
}

/// Searches `[0, 2π)` for the heading minimizing the orientation
/// residual: coarse grid at `cfg.grid_step`, then golden-section
/// refinement to `cfg.refine_tol`.
pub fn search_orientation(
    obs: &[PathObservation],
    cfg: &SolverConfig,
) -> Result<OrientationFit, SolverError> {
    require_feasible(obs, "single-cluster sensing", 4)?;
    let residual = |w: f64| {
        let (a, b) = build_system(obs, w, cfg.c);
        residual_of(&a, &b, cfg.rank_rel_eps)
    };
    let physical = |w: f64| distances_physical(obs, w, cfg);
    minimize_orientation(&residual, &physical, &cfg.search_settings())
}

/// Least-squares distances `(ν_1..ν_P, d_1)` at a fixed heading.
pub fn solve_distances(
    obs: &[PathObservation],
    omega: f64,
    cfg: &SolverConfig,
) -> Result<DVector<f64>, SolverError> {
    if obs.len() < 2 {
        return Err(SolverError::InsufficientPaths {
            task: "system assembly",
            required: 2,
            got: obs.len(),
        });
    }
    if let Some((i, j)) = duplicate_pair(obs) {
        return Err(SolverError::DegenerateConfiguration(format!(
            "observations {i} and {j} are identical"
        )));
    }
    let (a, b) = build_system(obs, omega, cfg.c);
    let (z, rank) = linalg::lstsq(&a, &b, cfg.rank_rel_eps);
    if rank < a.ncols() {
        return Err(SolverError::DegenerateConfiguration(format!(
            "system rank {rank} below {} unknowns (collinear path geometry)",
            a.ncols()
        )));
    }
    Ok(z)
}

/// Full single-cluster sensing: heading search, distance solve, per-path
/// origin reconstruction and averaging.
pub fn sense(obs: &[PathObservation], cfg: &SolverConfig) -> Result<SingleEstimate, SolverError> {
    require_feasible(obs, "single-cluster sensing", 4)?;
    let fit = search_orientation(obs, cfg)?;
    let z = solve_distances(obs, fit.omega, cfg)?;

    let p = obs.len();
    let rho = tdoa(&obs.iter().map(|o| o.toa).collect::<Vec<_>>());
    let d1 = z[p];
    let origins: Vec<Vec2> = obs
        .iter()
        .enumerate()
        .map(|(idx, ob)| path_origin(ob, z[idx], d1 + cfg.c * rho[idx], fit.omega))
        .collect();
    let position = origins.iter().sum::<Vec2>() / p as f64;
    let nonphysical = physical_flags(obs, &z, cfg.c).is_some();

    Ok(SingleEstimate {
        omega: wrap_angle(fit.omega),
        position,
        distances: z,
        residual: fit.residual,
        per_path_origins: origins,
        ambiguous: fit.ambiguous,
        runner_up: fit.runner_up,
        nonphysical_distances: nonphysical,
    })
}
