//! Lagrangian time derivatives and evolution. The map at each time is a
//! fresh minimization (no time-marching error); the velocity and
//! acceleration solve SPD tridiagonal systems whose operator is exactly
//! the objective Hessian, so they are the exact time derivatives of the
//! discrete minimizer path.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functional::{hessian, IgrParams, LinearData, MonotoneMap};
use crate::grid::Grid;
use crate::measure::DiscreteMeasure;
use crate::solver::{solve_newton, SolveReport};
use crate::tridiag::solve_tridiagonal_spd;

/// Deformation map with its first two time derivatives at a fixed time.
/// The walls pin both derivatives to zero.
#[derive(Debug, Clone)]
pub struct LagrangianFrame {
    pub t: f64,
    pub phi: MonotoneMap,
    pub phi_dot: Vec<f64>,
    pub phi_ddot: Vec<f64>,
}

/// Ordered frames of one evolution run.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub frames: Vec<LagrangianFrame>,
    pub reports: Vec<SolveReport>,
    pub alpha: f64,
    pub scenario: String,
}

/// How consecutive frames share work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolveMode {
    /// Each solve starts from the previous map (default).
    SequentialWarm,
    /// Frames solved independently from cold starts, concurrently.
    ParallelCold,
}

/// Weak solution of the velocity equation: the Hessian operator applied
/// to `phi_dot` equals the data functional tested against the interior
/// hat functions. With regularized data at the identity map this returns
/// the initial velocity exactly.
pub fn lagrangian_velocity(
    phi: &MonotoneMap,
    data: &LinearData,
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> Result<Vec<f64>> {
    let veff = data.effective_nodal(params, mu, grid);
    let rhs: Vec<f64> = (1..grid.num_cells())
        .map(|i| mu.node_weight()[i] * veff[i])
        .collect();
    solve_dirichlet(phi, params, mu, grid, rhs)
}

/// Weak solution of the acceleration equation: same operator, right side
/// driven by the squared velocity gradient over the cubed map gradient.
pub fn lagrangian_acceleration(
    phi: &MonotoneMap,
    phi_dot: &[f64],
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> Result<Vec<f64>> {
    if phi_dot.len() != grid.num_nodes() {
        return Err(Error::LengthMismatch {
            expected: grid.num_nodes(),
            got: phi_dot.len(),
        });
    }
    let rhs = acceleration_rhs(phi, phi_dot, params, mu, grid)?;
    solve_dirichlet(phi, params, mu, grid, rhs)
}

fn acceleration_rhs(
    phi: &MonotoneMap,
    phi_dot: &[f64],
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> Result<Vec<f64>> {
    let d = phi.cell_derivatives(grid);
    let dv = crate::grid::cell_derivative(grid, phi_dot)?;
    let n = grid.num_cells();
    let m = mu.cell_mass();
    let h = grid.cell_widths();
    // flux per cell: 2 alpha m_c (dv_c)^2 / (h_c d_c^3), tested against
    // the hat-function gradients
    let flux = |c: usize| 2.0 * params.alpha * m[c] * dv[c] * dv[c] / (h[c] * d[c] * d[c] * d[c]);
    Ok((1..n).map(|i| flux(i - 1) - flux(i)).collect())
}

fn solve_dirichlet(
    phi: &MonotoneMap,
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
    rhs: Vec<f64>,
) -> Result<Vec<f64>> {
    let mut sys = hessian(phi, params, mu, grid)?;
    sys.rhs = rhs;
    let interior = solve_tridiagonal_spd(&sys)?;
    let mut full = vec![0.0; grid.num_nodes()];
    full[1..grid.num_cells()].copy_from_slice(&interior);
    Ok(full)
}

/// Solve the variational problem at each requested time and attach the
/// velocity and acceleration solves.
pub fn evolve(
    data: &LinearData,
    mu: &DiscreteMeasure,
    grid: &Grid,
    params: &IgrParams,
    times: &[f64],
    mode: EvolveMode,
    scenario: &str,
) -> Result<TimeSeries> {
    if times.is_empty() {
        return Err(Error::Params("times must be nonempty".into()));
    }
    if times[0] < 0.0 {
        return Err(Error::Params(format!(
            "times must start at t >= 0, got {}",
            times[0]
        )));
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Params("times must be strictly increasing".into()));
        }
    }

    let frame_at = |t: f64, warm: Option<&MonotoneMap>| -> Result<(LagrangianFrame, SolveReport)> {
        let (phi, report) =
            solve_newton(data, t, params, mu, grid, warm).map_err(|e| Error::AtTime {
                t,
                source: Box::new(e),
            })?;
        let phi_dot = lagrangian_velocity(&phi, data, params, mu, grid)?;
        let phi_ddot = lagrangian_acceleration(&phi, &phi_dot, params, mu, grid)?;
        Ok((
            LagrangianFrame {
                t,
                phi,
                phi_dot,
                phi_ddot,
            },
            report,
        ))
    };

    let mut frames = Vec::with_capacity(times.len());
    let mut reports = Vec::with_capacity(times.len());
    match mode {
        EvolveMode::SequentialWarm => {
            let mut warm: Option<MonotoneMap> = None;
            for &t in times {
                let (frame, report) = frame_at(t, warm.as_ref())?;
                warm = Some(frame.phi.clone());
                frames.push(frame);
                reports.push(report);
            }
        }
        EvolveMode::ParallelCold => {
            let results: Vec<Result<(LagrangianFrame, SolveReport)>> =
                times.par_iter().map(|&t| frame_at(t, None)).collect();
            for r in results {
                let (frame, report) = r?;
                frames.push(frame);
                reports.push(report);
            }
        }
    }
    Ok(TimeSeries {
        frames,
        reports,
        alpha: params.alpha,
        scenario: scenario.to_string(),
    })
}

/// Infinity norm over the interior hat functions of the weak-form
/// residual of the second-order Lagrangian equation. Frames produced by
/// [`evolve`] satisfy this to solver precision; the check exists for
/// frames loaded from disk or produced elsewhere.
pub fn lagrangian_residual(
    frame: &LagrangianFrame,
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> Result<f64> {
    let sys = hessian(&frame.phi, params, mu, grid)?;
    let interior: Vec<f64> = frame.phi_ddot[1..grid.num_cells()].to_vec();
    let applied = sys.apply(&interior);
    let rhs = acceleration_rhs(&frame.phi, &frame.phi_dot, params, mu, grid)?;
    Ok(applied
        .iter()
        .zip(&rhs)
        .map(|(a, r)| (a - r).abs())
        .fold(0.0, f64::max))
}

/// Default validation ladder: three halvings of the relative step in
/// `params.fd_step`, scaled by the characteristic time.
pub fn fd_delta_ladder(t_char: f64, params: &IgrParams) -> Vec<f64> {
    (0..3)
        .map(|k| params.fd_step * t_char * 0.5f64.powi(k))
        .collect()
}

/// Central-difference validation of the velocity solve: recompute the
/// minimizer at `t - dt` and `t + dt` and compare the quotient with the
/// elliptic solution at `t`. Returns the infinity-norm error.
pub fn velocity_fd_error(
    data: &LinearData,
    t: f64,
    dt: f64,
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> Result<f64> {
    let (phi, _) = solve_newton(data, t, params, mu, grid, None)?;
    let (phi_plus, _) = solve_newton(data, t + dt, params, mu, grid, Some(&phi))?;
    let (phi_minus, _) = solve_newton(data, t - dt, params, mu, grid, Some(&phi))?;
    let phi_dot = lagrangian_velocity(&phi, data, params, mu, grid)?;
    let mut err = 0.0f64;
    for i in 0..grid.num_nodes() {
        let fd = (phi_plus.values()[i] - phi_minus.values()[i]) / (2.0 * dt);
        err = err.max((fd - phi_dot[i]).abs());
    }
    Ok(err)
}

/// Second-central-difference validation of the acceleration solve.
pub fn acceleration_fd_error(
    data: &LinearData,
    t: f64,
    dt: f64,
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> Result<f64> {
    let (phi, _) = solve_newton(data, t, params, mu, grid, None)?;
    let (phi_plus, _) = solve_newton(data, t + dt, params, mu, grid, Some(&phi))?;
    let (phi_minus, _) = solve_newton(data, t - dt, params, mu, grid, Some(&phi))?;
    let phi_dot = lagrangian_velocity(&phi, data, params, mu, grid)?;
    let phi_ddot = lagrangian_acceleration(&phi, &phi_dot, params, mu, grid)?;
    let mut err = 0.0f64;
    for i in 0..grid.num_nodes() {
        let fd = (phi_plus.values()[i] - 2.0 * phi.values()[i] + phi_minus.values()[i]) / (dt * dt);
        err = err.max((fd - phi_ddot[i]).abs());
    }
    Ok(err)
}
