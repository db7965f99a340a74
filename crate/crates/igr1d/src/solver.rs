//! Two independent routes to the time-`t` deformation map: damped Newton
//! iteration on the convex objective, and a shooting march on the
//! first-order optimality recurrence with bisection on the free constant.
//! Both land on the same discrete stationarity system, so they agree to
//! solver tolerance.

use serde::Serialize;

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::functional::{
    gradient, hessian, objective_hat, scaled_inf_norm, IgrParams, LinearData, MonotoneMap,
    ObjectiveValue,
};
use crate::grid::Grid;
use crate::measure::DiscreteMeasure;
use crate::tridiag::solve_tridiagonal_spd;

/// Armijo slope fraction for the backtracking line search.
const ARMIJO: f64 = 1e-4;
/// Fraction-to-boundary rule: no cell derivative may drop below this
/// multiple of its current value in a single step.
const BOUNDARY_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Newton,
    Shooting,
}

/// Convergence diagnostics of a variational solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Infinity norm of the mass-scaled gradient at the returned map.
    pub final_grad_norm: f64,
    pub objective: f64,
    pub min_cell_derivative: f64,
    pub max_cell_derivative: f64,
    /// Explicit lower bound on the cell derivatives implied by the data.
    pub derivative_lower_bound: f64,
    pub method: SolveMethod,
}

/// State of the shooting iteration: the trial constant (reciprocal slope
/// on the first cell) and the endpoint defect it produces.
#[derive(Debug, Clone, Copy)]
pub struct ShootingState {
    pub c: f64,
    pub phi_b_gap: f64,
}

/// Derivative floor and pushforward density floor of a solved map.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsRecord {
    pub derivative_lower_bound: f64,
    pub min_cell_derivative: f64,
    /// Smallest cell mass over image-cell width: floor of the transported density.
    pub pushforward_floor: f64,
    pub satisfied: bool,
}

/// Explicit derivative lower bound
/// `min { alpha / (2 ((b-a)^{3/2} + ||t v||_{L^2(mu)}) mu([a,b])), 1/5 }`,
/// evaluated with the pointwise representation of the data functional.
pub fn derivative_lower_bound(
    data: &LinearData,
    t: f64,
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> f64 {
    let veff = data.effective_nodal(params, mu, grid);
    let data_norm = t.abs() * mu.l2_norm(&veff);
    let length = grid.b() - grid.a();
    let candidate = params.alpha / (2.0 * (length.powf(1.5) + data_norm) * mu.total_mass());
    candidate.min(0.2)
}

/// Damped Newton iteration on the convex objective, started from the
/// identity (always strictly feasible) or a caller-provided warm start.
/// Every iterate stays strictly inside the monotone cone.
pub fn solve_newton(
    data: &LinearData,
    t: f64,
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
    warm_start: Option<&MonotoneMap>,
) -> Result<(MonotoneMap, SolveReport)> {
    if !(params.alpha > 0.0) {
        return Err(Error::Params(format!(
            "solve_newton requires alpha > 0, got {}",
            params.alpha
        )));
    }
    let mut phi = match warm_start {
        Some(map) if map.is_strictly_increasing(grid) => map.clone(),
        Some(_) => return Err(Error::Map("warm start must be strictly increasing".into())),
        None => MonotoneMap::identity(grid),
    };
    let mut objective = match objective_hat(&phi, data, t, params, mu, grid) {
        ObjectiveValue::Finite(v) => v,
        ObjectiveValue::PlusInfinity => return Err(Error::Map("warm start is infeasible".into())),
    };

    let mut iterations = 0usize;
    let mut grad = gradient(&phi, data, t, params, mu, grid)?;
    let mut norm = scaled_inf_norm(&grad, mu);
    while norm > params.newton_tol {
        if iterations >= params.max_iter {
            return Err(Error::MaxIterations {
                max_iter: params.max_iter,
                grad_norm: norm,
                t,
            });
        }
        let direction = newton_direction(&phi, &grad, params, mu, grid)?;
        let s_max = fraction_to_boundary(&phi, &direction, grid);
        let slope: f64 = grad.iter().zip(&direction).map(|(g, d)| g * d).sum();
        // once the predicted decrease drops below the rounding noise of the
        // objective, the sufficient-decrease test is meaningless; the noise
        // allowance lets the full (contractive) step through
        let noise = 1e-14 * (1.0 + objective.abs());
        let mut step = s_max;
        let mut accepted = None;
        for _ in 0..60 {
            let candidate = step_map(&phi, &direction, step, grid);
            if let ObjectiveValue::Finite(value) =
                objective_hat(&candidate, data, t, params, mu, grid)
            {
                if value <= objective + ARMIJO * step * slope + noise {
                    accepted = Some((candidate, value));
                    break;
                }
            }
            step *= 0.5;
        }
        let (candidate, value) = accepted.ok_or(Error::LineSearchFailure {
            iteration: iterations,
            grad_norm: norm,
        })?;
        phi = candidate;
        objective = value;
        iterations += 1;
        grad = gradient(&phi, data, t, params, mu, grid)?;
        norm = scaled_inf_norm(&grad, mu);
    }

    // One full polishing step once inside the tolerance: quadratic
    // convergence drops the residual to rounding level, which the
    // cross-solver and uniqueness checks rely on.
    if norm > params.newton_tol * 1e-3 {
        let direction = newton_direction(&phi, &grad, params, mu, grid)?;
        let step = fraction_to_boundary(&phi, &direction, grid).min(1.0);
        let candidate = step_map(&phi, &direction, step, grid);
        if let ObjectiveValue::Finite(value) = objective_hat(&candidate, data, t, params, mu, grid)
        {
            if value <= objective + 1e-12 * (1.0 + objective.abs()) {
                let g = gradient(&candidate, data, t, params, mu, grid)?;
                let n = scaled_inf_norm(&g, mu);
                if n < norm {
                    phi = candidate;
                    objective = value;
                    norm = n;
                    iterations += 1;
                }
            }
        }
    }

    let report = build_report(
        &phi,
        data,
        t,
        params,
        mu,
        grid,
        iterations,
        norm,
        objective,
        SolveMethod::Newton,
    );
    Ok((phi, report))
}

fn newton_direction(
    phi: &MonotoneMap,
    grad: &[f64],
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> Result<Vec<f64>> {
    let mut sys = hessian(phi, params, mu, grid)?;
    sys.rhs = grad.iter().map(|g| -g).collect();
    solve_tridiagonal_spd(&sys)
}

/// Largest step for which every cell derivative keeps at least
/// [`BOUNDARY_FRACTION`] of its current value.
fn fraction_to_boundary(phi: &MonotoneMap, direction: &[f64], grid: &Grid) -> f64 {
    let d = phi.cell_derivatives(grid);
    let n = grid.num_cells();
    let dir_at = |i: usize| {
        if i == 0 || i == n {
            0.0
        } else {
            direction[i - 1]
        }
    };
    let mut s = 1.0f64;
    for c in 0..n {
        let slope_change = (dir_at(c + 1) - dir_at(c)) / grid.cell_widths()[c];
        if slope_change < 0.0 {
            s = s.min(-(1.0 - BOUNDARY_FRACTION) * d[c] / slope_change);
        }
    }
    s
}

fn step_map(phi: &MonotoneMap, direction: &[f64], step: f64, grid: &Grid) -> MonotoneMap {
    let n = grid.num_cells();
    let mut values = phi.values().to_vec();
    for i in 1..n {
        values[i] += step * direction[i - 1];
    }
    MonotoneMap::new(grid, values)
        .expect("fraction-to-boundary step keeps the map strictly increasing")
}

/// Shooting on the optimality recurrence: the reciprocal slope on the
/// first cell is the one free constant; the flux variable accumulates
/// the node residuals across the march and the endpoint defect
/// `phi(b) - b` is driven to zero by bisection. The defect is strictly
/// decreasing in the constant, so a sign-changing bracket pins it down.
///
/// The integration is anchored at the left wall; anchoring at the right
/// wall instead only reparameterizes the constant, which the bisection
/// absorbs. The march carries an exponential dichotomy with wall-to-wall
/// amplification `exp((b-a)/sqrt(alpha))`, so both the march and the
/// bisected constant are kept in double-double precision; plain f64
/// cannot reach the endpoint tolerance below `alpha` around 1e-2.
pub fn solve_shooting(
    data: &LinearData,
    t: f64,
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
    c_tol: f64,
) -> Result<(MonotoneMap, SolveReport)> {
    if !(params.alpha > 0.0) {
        return Err(Error::Params(format!(
            "solve_shooting requires alpha > 0, got {}",
            params.alpha
        )));
    }
    if !(c_tol > 0.0) {
        return Err(Error::Params(format!(
            "c_tol must be positive, got {c_tol}"
        )));
    }
    let veff = data.effective_nodal(params, mu, grid);
    let length = grid.b() - grid.a();
    let tol_abs = c_tol * length;
    let mut evaluations = 0usize;

    let mut march = |c_hat: Dd| -> (Option<Vec<Dd>>, f64) {
        evaluations += 1;
        match march_from_constant(c_hat, &veff, t, params, mu, grid) {
            Some(values) => {
                let gap = values[grid.num_cells()].add_f64(-grid.b()).to_f64();
                (Some(values), gap)
            }
            // a nonpositive flux means the slope blew up mid-march:
            // classify as overshoot for the bisection
            None => (None, f64::INFINITY),
        }
    };

    // bracket around c = 1 (the identity-map value), expanding geometrically
    let one = Dd::from(1.0);
    let (mut best, gap0) = march(one);
    let mut best_state = ShootingState {
        c: 1.0,
        phi_b_gap: gap0,
    };
    let mut lo = (one, gap0);
    let mut hi;
    if gap0 >= 0.0 {
        // need larger c to shrink phi(b)
        let mut prev = lo;
        let mut c = 1.0f64;
        loop {
            c *= 2.0;
            let (vals, gap) = march(Dd::from(c));
            if vals.is_some() && gap.abs() < best_state.phi_b_gap.abs() {
                best = vals;
                best_state = ShootingState { c, phi_b_gap: gap };
            }
            if gap < 0.0 {
                lo = prev;
                hi = (Dd::from(c), gap);
                break;
            }
            prev = (Dd::from(c), gap);
            if c > 1e18 {
                return Err(Error::BracketFailure {
                    c_lo: 1.0,
                    gap_lo: gap0,
                    c_hi: c,
                    gap_hi: gap,
                });
            }
        }
    } else {
        // need smaller c
        hi = lo;
        let mut c = 1.0f64;
        loop {
            c *= 0.5;
            let (vals, gap) = march(Dd::from(c));
            if vals.is_some() && gap.abs() < best_state.phi_b_gap.abs() {
                best = vals;
                best_state = ShootingState { c, phi_b_gap: gap };
            }
            if gap >= 0.0 {
                lo = (Dd::from(c), gap);
                break;
            }
            hi = (Dd::from(c), gap);
            if c < 1e-18 {
                return Err(Error::BracketFailure {
                    c_lo: c,
                    gap_lo: gap,
                    c_hi: 1.0,
                    gap_hi: gap0,
                });
            }
        }
    }

    // bisect to bracket collapse at double-double resolution, keeping the
    // best completed march
    for _ in 0..250 {
        let mid = lo.0.midpoint(hi.0);
        if !lo.0.lt(mid) || !mid.lt(hi.0) {
            break;
        }
        let (vals, gap) = march(mid);
        if vals.is_some() && (best.is_none() || gap.abs() < best_state.phi_b_gap.abs()) {
            best = vals;
            best_state = ShootingState {
                c: mid.to_f64(),
                phi_b_gap: gap,
            };
        }
        if gap >= 0.0 {
            lo = (mid, gap);
        } else {
            hi = (mid, gap);
        }
        if gap == 0.0 || best_state.phi_b_gap.abs() <= 1e-4 * tol_abs {
            break;
        }
    }

    let values = best.ok_or(Error::ShootingTolerance {
        tol: tol_abs,
        gap: best_state.phi_b_gap,
        c: best_state.c,
    })?;
    if best_state.phi_b_gap.abs() > tol_abs {
        return Err(Error::ShootingTolerance {
            tol: tol_abs,
            gap: best_state.phi_b_gap,
            c: best_state.c,
        });
    }

    // absorb the residual endpoint defect multiplicatively so the
    // optimality residual stays uniform across cells
    let n = grid.num_cells();
    let span = values[n].add_f64(-grid.a());
    let scale = Dd::from(length).div(span);
    let mut rescaled: Vec<f64> = values
        .iter()
        .map(|v| v.add_f64(-grid.a()).mul(scale).add_f64(grid.a()).to_f64())
        .collect();
    rescaled[0] = grid.a();
    rescaled[n] = grid.b();
    let phi = MonotoneMap::new(grid, rescaled)?;

    let grad = gradient(&phi, data, t, params, mu, grid)?;
    let norm = scaled_inf_norm(&grad, mu);
    let objective = objective_hat(&phi, data, t, params, mu, grid).expect_finite();
    let report = build_report(
        &phi,
        data,
        t,
        params,
        mu,
        grid,
        evaluations,
        norm,
        objective,
        SolveMethod::Shooting,
    );
    Ok((phi, report))
}

/// Forward march of the optimality recurrence with first-cell reciprocal
/// slope `c_hat`, carried in double-double. Returns `None` if the flux
/// variable leaves the positive cone (infinite slope encountered).
fn march_from_constant(
    c_hat: Dd,
    veff: &[f64],
    t: f64,
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> Option<Vec<Dd>> {
    if !c_hat.is_positive() {
        return None;
    }
    let n = grid.num_cells();
    let x = grid.nodes();
    let m = mu.cell_mass();
    let w = mu.node_weight();
    let mut values: Vec<Dd> = Vec::with_capacity(n + 1);
    values.push(Dd::from(grid.a()));
    // flux on cell c is alpha m_c / (h_c d_c); on cell 0 it is fixed by c_hat
    let mut flux = c_hat.mul_f64(params.alpha * m[0] / grid.cell_widths()[0]);
    for c in 0..n {
        if c > 0 {
            // node residual x_c + t v_c - phi_c, accumulated in dd
            let residual = Dd::from(x[c] + t * veff[c]).sub(values[c]);
            flux = flux.add(residual.mul_f64(w[c]));
        }
        if !flux.is_positive() || !flux.is_finite() {
            return None;
        }
        let next = values[c].add(Dd::from(params.alpha * m[c]).div(flux));
        values.push(next);
    }
    Some(values)
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    phi: &MonotoneMap,
    data: &LinearData,
    t: f64,
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
    iterations: usize,
    final_grad_norm: f64,
    objective: f64,
    method: SolveMethod,
) -> SolveReport {
    SolveReport {
        iterations,
        final_grad_norm,
        objective,
        min_cell_derivative: phi.min_cell_derivative(grid),
        max_cell_derivative: phi.max_cell_derivative(grid),
        derivative_lower_bound: derivative_lower_bound(data, t, params, mu, grid),
        method,
    }
}

/// Evaluate the derivative floor for a solved map and fail with the cell
/// index on violation.
pub fn check_bounds(
    phi: &MonotoneMap,
    data: &LinearData,
    t: f64,
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> Result<BoundsRecord> {
    let bound = derivative_lower_bound(data, t, params, mu, grid);
    let d = phi.cell_derivatives(grid);
    let (mut worst_cell, mut min_d) = (0usize, f64::INFINITY);
    for (c, &v) in d.iter().enumerate() {
        if v < min_d {
            min_d = v;
            worst_cell = c;
        }
    }
    let pushforward_floor = (0..grid.num_cells())
        .map(|c| {
            let spread = phi.values()[c + 1] - phi.values()[c];
            if spread > 0.0 {
                mu.cell_mass()[c] / spread
            } else {
                0.0
            }
        })
        .fold(f64::INFINITY, f64::min);
    if min_d < bound * (1.0 - 1e-6) {
        return Err(Error::BoundViolation {
            cell: worst_cell,
            derivative: min_d,
            bound,
        });
    }
    Ok(BoundsRecord {
        derivative_lower_bound: bound,
        min_cell_derivative: min_d,
        pushforward_floor,
        satisfied: true,
    })
}
