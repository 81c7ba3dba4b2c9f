//! One-dimensional orientation search shared by both solvers: a coarse
//! grid over `[0, 2π)` followed by golden-section refinement of the best
//! local minima.

use crate::error::SolverError;
use crate::wrap_angle;
use std::f64::consts::TAU;

/// Result of an orientation search.
#[derive(Debug, Clone, Copy)]
pub struct OrientationFit {
    /// Minimizing heading, radians in `[0, 2π)`.
    pub omega: f64,
    /// Residual at the minimizer.
    pub residual: f64,
    /// Set when a second, separated minimum has a residual within the
    /// configured ratio of the best one.
    pub ambiguous: bool,
    /// The runner-up minimum `(omega, residual)` when one exists.
    pub runner_up: Option<(f64, f64)>,
}

pub(crate) struct SearchSettings {
    pub grid_step: f64,
    pub refine_tol: f64,
    pub ambiguity_ratio: f64,
    pub residual_floor: f64,
    pub flat_ratio: f64,
    pub max_candidates: usize,
}

/// Candidates within this factor of the best residual are scanned for a
/// physically valid distance solution. Deliberately much wider than the
/// ambiguity ratio: near an exact fit the refined residuals are all
/// rounding-level and their mutual ratios carry no information.
const PREFERENCE_RATIO: f64 = 1e6;

/// Golden-section minimization of `f` on `[a, b]`, down to an interval
/// of width `tol`. Assumes `f` is unimodal on the bracket.
fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (a + b);
    (xm, f(xm))
}

/// Grid-then-refine search for the heading minimizing `residual`.
///
/// Among near-tied refined minima (within the ambiguity ratio of the
/// best) the first one whose distance solution passes the `physical`
/// check wins; exact-fit headings that imply negative path legs are
/// thereby skipped. The ambiguity flag reports any surviving near-tie.
pub(crate) fn minimize_orientation(
    residual: &dyn Fn(f64) -> f64,
    physical: &dyn Fn(f64) -> bool,
    cfg: &SearchSettings,
) -> Result<OrientationFit, SolverError> {
    let n = (TAU / cfg.grid_step).ceil().max(8.0) as usize;
    let step = TAU / n as f64;
    let grid: Vec<f64> = (0..n).map(|i| residual(i as f64 * step)).collect();

    let mean = grid.iter().sum::<f64>() / n as f64;
    let (best_idx, &best_grid) = grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let _ = best_idx;

    if best_grid > cfg.residual_floor || (mean > 0.0 && best_grid > cfg.flat_ratio * mean) {
        return Err(SolverError::NoConsistentOrientation {
            best: best_grid,
            mean,
            floor: cfg.residual_floor,
        });
    }

    // Local minima on the wrapped grid, most promising first.
    let mut minima: Vec<usize> = (0..n)
        .filter(|&i| {
            let prev = grid[(i + n - 1) % n];
            let next = grid[(i + 1) % n];
            grid[i] <= prev && grid[i] < next
        })
        .collect();
    if minima.is_empty() {
        // Perfectly flat landscape (e.g. identically zero residual).
        return Err(SolverError::NoConsistentOrientation {
            best: best_grid,
            mean,
            floor: cfg.residual_floor,
        });
    }
    minima.sort_by(|&a, &b| grid[a].partial_cmp(&grid[b]).unwrap());
    minima.truncate(cfg.max_candidates);

    let mut refined: Vec<(f64, f64)> = minima
        .iter()
        .map(|&i| {
            let center = i as f64 * step;
            let (w, r) = golden_min(residual, center - step, center + step, cfg.refine_tol);
            (wrap_angle(w), r)
        })
        .collect();

    // Adjacent grid minima can refine into the same point; keep the best.
    refined.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for (w, r) in refined {
        if candidates
            .iter()
            .all(|&(cw, _)| crate::angle_distance(cw, w) > 2.0 * step)
        {
            candidates.push((w, r));
        }
    }

    // A refined exact fit lands anywhere below slope * refine_tol, with
    // the slope on the order of the landscape mean per radian; residuals
    // below that are indistinguishable. Clamp before comparing ratios.
    let exact_fit_floor = mean * 10.0 * cfg.refine_tol;
    let effective = |r: f64| r.max(exact_fit_floor);

    let best_res = effective(candidates[0].1);
    let chosen = candidates
        .iter()
        .take_while(|&&(_, r)| effective(r) <= PREFERENCE_RATIO * best_res)
        .find(|&&(w, _)| physical(w))
        .unwrap_or(&candidates[0]);

    let runner_up = candidates
        .iter()
        .find(|&&(w, _)| crate::angle_distance(w, chosen.0) > 2.0 * step)
        .copied();
    let ambiguous = runner_up
        .map(|(_, r)| effective(r) <= cfg.ambiguity_ratio * effective(chosen.1))
        .unwrap_or(false);

    Ok(OrientationFit {
        omega: chosen.0,
        residual: chosen.1,
        ambiguous,
        runner_up,
    })
}
