//! Experiment harnesses: the vanishing-regularization ladder against the
//! sticky baseline, nonexpansiveness sampling over random velocity pairs,
//! and simultaneous space-time refinement of the derivative and Eulerian
//! residual validations.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{acceleration_fd_error, evolve, velocity_fd_error, EvolveMode};
use crate::error::{Error, Result};
use crate::eulerian::{entropic_pressure, eulerian_residual, to_eulerian, total_momentum};
use crate::functional::{make_regularized_data, objective_hat, IgrParams, LinearData, MonotoneMap};
use crate::grid::Grid;
use crate::measure::DiscreteMeasure;
use crate::scenario::Scenario;
use crate::solver::solve_newton;
use crate::sticky::sticky_solution;

/// One rung of the vanishing-regularization ladder.
#[derive(Debug, Clone)]
pub struct GammaStudyRow {
    pub alpha: f64,
    pub sup_distance: f64,
    pub l2mu_distance: f64,
    /// Unregularized energy of the regularized map above the baseline minimum.
    pub energy_gap: f64,
    pub min_derivative: f64,
    /// Diagnostic: relative entropy of the pushforward minus the log-barrier
    /// sum. Zero for uniform measures, quadrature-sized otherwise.
    pub kl_gap: f64,
    /// Diagnostic: sup distance between the minimizers under the
    /// derivative-coupled and the plain data forms.
    pub data_mode_gap: f64,
}

/// Ladder rows plus the baseline they are measured against.
#[derive(Debug, Clone)]
pub struct GammaStudy {
    pub rows: Vec<GammaStudyRow>,
    pub sticky: MonotoneMap,
    /// Minimum of the unregularized functional, attained by the baseline.
    pub min_f0: f64,
}

/// Unregularized energy: quadratic transport cost minus the plain linear
/// data term, no barrier.
pub fn f0_energy(
    phi: &MonotoneMap,
    raw: &LinearData,
    t: f64,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> f64 {
    let params0 = IgrParams {
        alpha: 0.0,
        newton_tol: 1e-10,
        max_iter: 1,
        fd_step: 1e-2,
    };
    objective_hat(phi, raw, t, &params0, mu, grid).expect_finite()
}

/// Solve the regularized problem across a decreasing ladder of `alpha`
/// values (cold starts, rows independent) and compare against the sticky
/// baseline.
pub fn gamma_study(
    u0: &[f64],
    mu: &DiscreteMeasure,
    grid: &Grid,
    t: f64,
    alphas: &[f64],
    base: &IgrParams,
    parallel: bool,
) -> Result<GammaStudy> {
    if alphas.is_empty() {
        return Err(Error::Params("alpha ladder must be nonempty".into()));
    }
    for w in alphas.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Params(
                "alpha ladder must be strictly decreasing".into(),
            ));
        }
    }
    if !(alphas[alphas.len() - 1] > 0.0) {
        return Err(Error::Params("alpha ladder must stay positive".into()));
    }
    let raw = LinearData::raw(grid, u0)?;
    let reg = make_regularized_data(u0, base, mu, grid)?;
    let sticky = sticky_solution(&raw, t, mu, grid)?;
    let min_f0 = f0_energy(&sticky, &raw, t, mu, grid);

    let row_for = |&alpha: &f64| -> Result<GammaStudyRow> {
        let params = IgrParams { alpha, ..*base };
        let (phi, report) = solve_newton(&reg, t, &params, mu, grid, None)?;
        let (phi_raw, _) = solve_newton(&raw, t, &params, mu, grid, None)?;
        let barrier: f64 = phi
            .cell_derivatives(grid)
            .iter()
            .zip(mu.cell_mass())
            .map(|(d, m)| -m * d.ln())
            .sum();
        let kl = match crate::functional::kl_pushforward(&phi, mu, grid) {
            crate::functional::ObjectiveValue::Finite(v) => v,
            crate::functional::ObjectiveValue::PlusInfinity => f64::NAN,
        };
        Ok(GammaStudyRow {
            alpha,
            sup_distance: phi.sup_distance(&sticky),
            l2mu_distance: phi.l2_mu_distance(&sticky, mu),
            energy_gap: f0_energy(&phi, &raw, t, mu, grid) - min_f0,
            min_derivative: report.min_cell_derivative,
            kl_gap: kl - barrier,
            data_mode_gap: phi.sup_distance(&phi_raw),
        })
    };
    let rows: Vec<GammaStudyRow> = if parallel {
        alphas.par_iter().map(row_for).collect::<Result<_>>()?
    } else {
        alphas.iter().map(row_for).collect::<Result<_>>()?
    };
    Ok(GammaStudy {
        rows,
        sticky,
        min_f0,
    })
}

#[derive(Debug, Clone)]
pub struct StabilityRow {
    pub pair: usize,
    pub map_distance: f64,
    pub data_distance: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct StabilityStudy {
    pub rows: Vec<StabilityRow>,
    pub worst_ratio: f64,
}

/// Sample seeded boundary-zero velocity pairs and measure the contraction
/// ratio of the data-to-map solution operator in `L^2(mu)`. With
/// `params.alpha == 0` the sticky projection is used instead of the
/// interior solve.
pub fn stability_study(
    pairs: usize,
    seed: u64,
    mu: &DiscreteMeasure,
    grid: &Grid,
    t: f64,
    params: &IgrParams,
    parallel: bool,
) -> Result<StabilityStudy> {
    if pairs == 0 {
        return Err(Error::Params("need at least one pair".into()));
    }
    let solve_map = |u: &[f64]| -> Result<MonotoneMap> {
        let data = LinearData::raw(grid, u)?;
        if params.alpha > 0.0 {
            Ok(solve_newton(&data, t, params, mu, grid, None)?.0)
        } else {
            sticky_solution(&data, t, mu, grid)
        }
    };
    let row_for = |k: usize| -> Result<StabilityRow> {
        let u = random_velocity(grid, seed, 2 * k as u64, 0.5);
        let v = random_velocity(grid, seed, 2 * k as u64 + 1, 0.5);
        let diff: Vec<f64> = u.iter().zip(&v).map(|(a, b)| t * (a - b)).collect();
        let data_distance = mu.l2_norm(&diff);
        let phi_u = solve_map(&u)?;
        let phi_v = solve_map(&v)?;
        let map_distance = phi_u.l2_mu_distance(&phi_v, mu);
        // coincident draws would give 0/0; they cannot occur for distinct
        // streams, but guard the division anyway
        let ratio = if data_distance > 0.0 {
            map_distance / data_distance
        } else {
            0.0
        };
        Ok(StabilityRow {
            pair: k,
            map_distance,
            data_distance,
            ratio,
        })
    };
    let rows: Vec<StabilityRow> = if parallel {
        (0..pairs)
            .into_par_iter()
            .map(row_for)
            .collect::<Result<_>>()?
    } else {
        (0..pairs).map(row_for).collect::<Result<_>>()?
    };
    let worst_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(StabilityStudy { rows, worst_ratio })
}

/// Boundary-zero random velocity: an eight-mode sine series with decaying
/// coefficients, drawn from a stream derived from `(seed, index)`.
pub fn random_velocity(grid: &Grid, seed: u64, index: u64, amplitude: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let coeffs: Vec<f64> = (1..=8)
        .map(|m| amplitude * rng.gen_range(-1.0..1.0) / (m * m) as f64)
        .collect();
    let a = grid.a();
    let len = grid.b() - a;
    let mut u: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|x| crate::scenario::eval_sine_series(&coeffs, (x - a) / len))
        .collect();
    u[0] = 0.0;
    let last = u.len() - 1;
    u[last] = 0.0;
    u
}

/// One row of the simultaneous space-time refinement study.
#[derive(Debug, Clone)]
pub struct RefinementRow {
    pub n: usize,
    pub delta: f64,
    pub phidot_fd_error: f64,
    pub phiddot_fd_error: f64,
    pub mass_residual: f64,
    pub momentum_residual: f64,
    pub budget_residual: f64,
    /// Observed orders against the previous row; absent on the first row
    /// and wherever an error vanishes.
    pub phidot_order: Option<f64>,
    pub phiddot_order: Option<f64>,
    pub mass_order: Option<f64>,
    pub momentum_order: Option<f64>,
    pub budget_order: Option<f64>,
}

/// Validate the time-derivative solves and the Eulerian residuals across
/// `(N, delta)` pairs refined together. The probe time is half the
/// nominal shock time (pre-shock smooth regime), or `0.5` when the
/// scenario never shocks.
pub fn refinement_study(
    scenario: &Scenario,
    params: &IgrParams,
    ns: &[usize],
    deltas: &[f64],
) -> Result<Vec<RefinementRow>> {
    if ns.is_empty() || ns.len() != deltas.len() {
        return Err(Error::Params(
            "need matching nonempty lists of N and delta".into(),
        ));
    }
    for w in ns.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Params("N values must be increasing".into()));
        }
    }
    let mut rows: Vec<RefinementRow> = Vec::with_capacity(ns.len());
    for (&n, &delta) in ns.iter().zip(deltas) {
        let grid = scenario.grid(n)?;
        let mu = scenario.measure(&grid)?;
        let u0 = scenario.velocity(&grid);
        let t = scenario.shock_time(&grid).map_or(0.5, |tc| 0.5 * tc);
        if !(delta > 0.0) || delta >= t {
            return Err(Error::Params(format!("delta {delta} must lie in (0, {t})")));
        }
        let data = make_regularized_data(&u0, params, &mu, &grid)?;
        let zero_flow = u0.iter().all(|v| *v == 0.0);
        let (phidot_fd_error, phiddot_fd_error, mass_residual, momentum_residual, budget_residual) =
            if zero_flow {
                (0.0, 0.0, 0.0, 0.0, 0.0)
            } else {
                let pd = velocity_fd_error(&data, t, delta, params, &mu, &grid)?;
                let pdd = acceleration_fd_error(&data, t, delta, params, &mu, &grid)?;
                let series = evolve(
                    &data,
                    &mu,
                    &grid,
                    params,
                    &[t - delta, t, t + delta],
                    EvolveMode::SequentialWarm,
                    &scenario.name,
                )?;
                let (mass, momentum) =
                    eulerian_residual(&series.frames, &mu, &grid, &grid, params)?;
                let budget = {
                    let p_plus = total_momentum(&series.frames[2], &mu, &grid);
                    let p_minus = total_momentum(&series.frames[0], &mu, &grid);
                    let state = entropic_pressure(
                        to_eulerian(&series.frames[1], &mu, &grid, &grid)?,
                        params,
                    )?;
                    let sigma = state.sigma.as_ref().unwrap();
                    ((p_plus - p_minus) / (2.0 * delta) + (sigma[sigma.len() - 1] - sigma[0])).abs()
                };
                (pd, pdd, mass, momentum, budget)
            };
        let order_vs_prev = |prev: f64, cur: f64, n_prev: usize| -> Option<f64> {
            if prev > 0.0 && cur > 0.0 {
                Some((prev / cur).ln() / (n as f64 / n_prev as f64).ln())
            } else {
                None
            }
        };
        let (phidot_order, phiddot_order, mass_order, momentum_order, budget_order) =
            if let Some(prev) = rows.last() {
                (
                    order_vs_prev(prev.phidot_fd_error, phidot_fd_error, prev.n),
                    order_vs_prev(prev.phiddot_fd_error, phiddot_fd_error, prev.n),
                    order_vs_prev(prev.mass_residual, mass_residual, prev.n),
                    order_vs_prev(prev.momentum_residual, momentum_residual, prev.n),
                    order_vs_prev(prev.budget_residual, budget_residual, prev.n),
                )
            } else {
                (None, None, None, None, None)
            };
        rows.push(RefinementRow {
            n,
            delta,
            phidot_fd_error,
            phiddot_fd_error,
            mass_residual,
            momentum_residual,
            budget_residual,
            phidot_order,
            phiddot_order,
            mass_order,
            momentum_order,
            budget_order,
        });
    }
    Ok(rows)
}
