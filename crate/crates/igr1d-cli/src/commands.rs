//! The five command implementations plus the scenario listing.

use std::path::{Path, PathBuf};

use serde::Serialize;

use igr1d::{
    check_bounds, conservation_report, entropic_pressure, evolve, make_regularized_data,
    solve_newton, to_eulerian, BoundsRecord, DiscreteMeasure, EvolveMode, Grid, IgrParams,
    LagrangianFrame, LinearData, Scenario, SolveReport,
};

use crate::config::{DataMode, RunConfig};
use crate::output::{format_float, Table};

/// Failures split by exit code: configuration errors exit with 2,
/// numerical failures with 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<igr1d::Error> for CliError {
    fn from(e: igr1d::Error) -> Self {
        use igr1d::Error::*;
        fn classify(e: &igr1d::Error) -> bool {
            match e {
                Grid(_) | Measure(_) | Data(_) | Params(_) | Map(_) | LengthMismatch { .. } => true,
                AtTime { source, .. } => classify(source),
                _ => false,
            }
        }
        if classify(&e) {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("i/o failure: {e}"))
    }
}

struct Problem {
    scenario: Scenario,
    grid: Grid,
    mu: DiscreteMeasure,
    u0: Vec<f64>,
    shock_time: Option<f64>,
}

fn build_problem(cfg: &RunConfig) -> Result<Problem, CliError> {
    let scenario = cfg.scenario()?;
    let grid = scenario.grid(cfg.grid)?;
    let mu = scenario.measure(&grid)?;
    let u0 = scenario.velocity(&grid);
    let shock_time = scenario.shock_time(&grid);
    Ok(Problem {
        scenario,
        grid,
        mu,
        u0,
        shock_time,
    })
}

fn build_data(
    cfg: &RunConfig,
    problem: &Problem,
    params: &IgrParams,
) -> Result<LinearData, CliError> {
    Ok(match cfg.data_mode {
        DataMode::Regularized => {
            make_regularized_data(&problem.u0, params, &problem.mu, &problem.grid)?
        }
        DataMode::Raw => LinearData::raw(&problem.grid, &problem.u0)?,
    })
}

fn data_mode_name(cfg: &RunConfig) -> &'static str {
    match cfg.data_mode {
        DataMode::Regularized => "regularized",
        DataMode::Raw => "raw",
    }
}

fn frame_table(grid: &Grid, frame: &LagrangianFrame) -> Table {
    let mut table = Table::new(&[
        "x [length]",
        "phi [length]",
        "dphi [1]",
        "phidot [length/time]",
        "phiddot [length/time^2]",
    ]);
    let d = frame.phi.cell_derivatives(grid);
    let n = grid.num_cells();
    for i in 0..grid.num_nodes() {
        // the derivative column carries the cell to the right of the node;
        // the last row repeats the final cell
        let dphi = d[i.min(n - 1)];
        table.push(vec![
            Some(grid.nodes()[i]),
            Some(frame.phi.values()[i]),
            Some(dphi),
            Some(frame.phi_dot[i]),
            Some(frame.phi_ddot[i]),
        ]);
    }
    table
}

fn eulerian_table(state: &igr1d::EulerianState) -> Table {
    let mut table = Table::new(&[
        "x [length]",
        "u [length/time]",
        "rho [mass/length]",
        "sigma [mass length/time^2]",
    ]);
    let sigma = state.sigma.as_ref();
    for i in 0..state.x.len() {
        table.push(vec![
            Some(state.x[i]),
            Some(state.u[i]),
            Some(state.rho[i]),
            sigma.map(|s| s[i]),
        ]);
    }
    table
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numerical(format!("serialization failure: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Deterministic time tag used in per-frame file names.
fn time_tag(t: f64) -> String {
    format_float(t)
}

#[derive(Serialize)]
struct SolveArtifact<'a> {
    scenario: &'a str,
    n: usize,
    alpha: f64,
    t: f64,
    data_mode: &'a str,
    seed: u64,
    shock_time: Option<f64>,
    report: &'a SolveReport,
    bounds: &'a BoundsRecord,
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<(), CliError> {
    let alpha = cfg.require_alpha()?;
    let t = cfg
        .t
        .or_else(|| cfg.times.as_ref().filter(|v| v.len() == 1).map(|v| v[0]))
        .ok_or_else(|| CliError::Config("solve needs a single time (--t)".into()))?;
    if t < 0.0 {
        return Err(CliError::Config(format!("t must be nonnegative, got {t}")));
    }
    let problem = build_problem(cfg)?;
    let params = IgrParams::new(alpha)?;
    let data = build_data(cfg, &problem, &params)?;
    let (phi, report) = solve_newton(&data, t, &params, &problem.mu, &problem.grid, None)?;
    let bounds = check_bounds(&phi, &data, t, &params, &problem.mu, &problem.grid)?;
    let phi_dot = igr1d::lagrangian_velocity(&phi, &data, &params, &problem.mu, &problem.grid)?;
    let phi_ddot =
        igr1d::lagrangian_acceleration(&phi, &phi_dot, &params, &problem.mu, &problem.grid)?;
    let frame = LagrangianFrame {
        t,
        phi,
        phi_dot,
        phi_ddot,
    };
    let table = frame_table(&problem.grid, &frame);
    table.write(
        &cfg.out.join(format!("phi.{}", cfg.format.extension())),
        cfg.format,
    )?;
    write_json(
        &cfg.out.join("report.json"),
        &SolveArtifact {
            scenario: &problem.scenario.name,
            n: cfg.grid,
            alpha,
            t,
            data_mode: data_mode_name(cfg),
            seed: cfg.seed,
            shock_time: problem.shock_time,
            report: &report,
            bounds: &bounds,
        },
    )?;
    println!(
        "solve: {} N={} alpha={} t={} -> {} ({} iterations, grad {:.3e})",
        problem.scenario.name,
        cfg.grid,
        alpha,
        t,
        cfg.out.display(),
        report.iterations,
        report.final_grad_norm
    );
    Ok(())
}

pub fn cmd_evolve(cfg: &RunConfig) -> Result<(), CliError> {
    let alpha = cfg.require_alpha()?;
    let times: Vec<f64> = match (&cfg.times, cfg.t) {
        (Some(list), _) => list.clone(),
        (None, Some(t)) => vec![t],
        (None, None) => {
            return Err(CliError::Config(
                "evolve needs --times (or a single --t)".into(),
            ))
        }
    };
    let problem = build_problem(cfg)?;
    let params = IgrParams::new(alpha)?;
    let data = build_data(cfg, &problem, &params)?;
    let mode = if cfg.parallel {
        EvolveMode::ParallelCold
    } else {
        EvolveMode::SequentialWarm
    };
    let series = evolve(
        &data,
        &problem.mu,
        &problem.grid,
        &params,
        &times,
        mode,
        &problem.scenario.name,
    )?;

    let ext = cfg.format.extension();
    let frames_dir = cfg.out.join("frames");
    let eulerian_dir = cfg.out.join("eulerian");
    for frame in &series.frames {
        let tag = time_tag(frame.t);
        let frame_path = frames_dir.join(format!("{tag}.{ext}"));
        // resumed runs skip frames already on disk; determinism makes the
        // rewrite byte-identical anyway
        if !frame_path.exists() {
            frame_table(&problem.grid, frame).write(&frame_path, cfg.format)?;
        }
        let state = entropic_pressure(
            to_eulerian(frame, &problem.mu, &problem.grid, &problem.grid)?,
            &params,
        )?;
        let eul_path = eulerian_dir.join(format!("{tag}.{ext}"));
        if !eul_path.exists() {
            eulerian_table(&state).write(&eul_path, cfg.format)?;
        }
    }

    let rows = conservation_report(&series, &problem.mu, &problem.grid, &problem.grid, &params)?;
    let mut table = Table::new(&[
        "t [time]",
        "mass [mass]",
        "mass_drift [mass]",
        "momentum [mass length/time]",
        "sigma_jump [mass length/time^2]",
        "budget_residual [mass length/time^2]",
    ]);
    for row in &rows {
        table.push(vec![
            Some(row.t),
            Some(row.mass),
            Some(row.mass_drift),
            Some(row.momentum),
            Some(row.sigma_jump),
            row.budget_residual,
        ]);
    }
    table.write(&cfg.out.join(format!("conservation.{ext}")), cfg.format)?;
    println!(
        "evolve: {} N={} alpha={} {} frames -> {}",
        problem.scenario.name,
        cfg.grid,
        alpha,
        series.frames.len(),
        cfg.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct GammaSummary<'a> {
    scenario: &'a str,
    n: usize,
    t: f64,
    shock_time: Option<f64>,
    min_f0: f64,
    alphas: &'a [f64],
}

pub fn cmd_gamma(cfg: &RunConfig) -> Result<(), CliError> {
    let problem = build_problem(cfg)?;
    let t = match (cfg.t, problem.shock_time) {
        (Some(t), _) => t,
        (None, Some(tc)) => 2.0 * tc,
        (None, None) => {
            return Err(CliError::Config(
                "gamma needs --t for scenarios without a shock time".into(),
            ))
        }
    };
    let alphas: Vec<f64> = match (&cfg.alphas, cfg.alpha) {
        (Some(list), _) => list.clone(),
        (None, Some(alpha)) => vec![alpha],
        (None, None) => (0..=6).map(|k| 1e-1 * 0.5f64.powi(k)).collect(),
    };
    let base = IgrParams::new(
        *alphas
            .first()
            .ok_or_else(|| CliError::Config("alpha ladder must be nonempty".into()))?,
    )?;
    let study = igr1d::gamma_study(
        &problem.u0,
        &problem.mu,
        &problem.grid,
        t,
        &alphas,
        &base,
        cfg.parallel,
    )?;
    let ext = cfg.format.extension();
    let mut table = Table::new(&[
        "alpha [length^2]",
        "sup_distance [length]",
        "l2mu_distance [length]",
        "energy_gap [length^2/time^2]",
        "min_derivative [1]",
        "kl_gap [1]",
        "data_mode_gap [length]",
    ]);
    for row in &study.rows {
        table.push(vec![
            Some(row.alpha),
            Some(row.sup_distance),
            Some(row.l2mu_distance),
            Some(row.energy_gap),
            Some(row.min_derivative),
            Some(row.kl_gap),
            Some(row.data_mode_gap),
        ]);
    }
    table.write(&cfg.out.join(format!("gamma.{ext}")), cfg.format)?;

    let mut baseline = Table::new(&["x [length]", "phi_sticky [length]"]);
    for i in 0..problem.grid.num_nodes() {
        baseline.push(vec![
            Some(problem.grid.nodes()[i]),
            Some(study.sticky.values()[i]),
        ]);
    }
    baseline.write(&cfg.out.join(format!("gamma_baseline.{ext}")), cfg.format)?;
    write_json(
        &cfg.out.join("gamma_summary.json"),
        &GammaSummary {
            scenario: &problem.scenario.name,
            n: cfg.grid,
            t,
            shock_time: problem.shock_time,
            min_f0: study.min_f0,
            alphas: &alphas,
        },
    )?;
    println!(
        "gamma: {} N={} t={} {} rungs -> {}",
        problem.scenario.name,
        cfg.grid,
        t,
        study.rows.len(),
        cfg.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct StabilitySummary {
    pairs: usize,
    seed: u64,
    alpha: f64,
    t: f64,
    n: usize,
    worst_ratio: f64,
}

pub fn cmd_stability(cfg: &RunConfig) -> Result<(), CliError> {
    let alpha = cfg.alpha.unwrap_or(1e-2);
    if alpha < 0.0 {
        return Err(CliError::Config(format!(
            "alpha must be nonnegative, got {alpha}"
        )));
    }
    let t = cfg.t.unwrap_or(0.5);
    let problem = build_problem(cfg)?;
    let params = IgrParams {
        alpha,
        newton_tol: 1e-10,
        max_iter: 50,
        fd_step: 1e-2,
    };
    let study = igr1d::stability_study(
        cfg.pairs,
        cfg.seed,
        &problem.mu,
        &problem.grid,
        t,
        &params,
        cfg.parallel,
    )?;
    let ext = cfg.format.extension();
    let mut table = Table::new(&[
        "pair [1]",
        "map_distance [length]",
        "data_distance [length]",
        "ratio [1]",
    ]);
    for row in &study.rows {
        table.push(vec![
            Some(row.pair as f64),
            Some(row.map_distance),
            Some(row.data_distance),
            Some(row.ratio),
        ]);
    }
    table.write(&cfg.out.join(format!("stability.{ext}")), cfg.format)?;
    write_json(
        &cfg.out.join("stability_summary.json"),
        &StabilitySummary {
            pairs: cfg.pairs,
            seed: cfg.seed,
            alpha,
            t,
            n: cfg.grid,
            worst_ratio: study.worst_ratio,
        },
    )?;
    println!(
        "stability: {} pairs, worst ratio {:.12} -> {}",
        cfg.pairs,
        study.worst_ratio,
        cfg.out.display()
    );
    Ok(())
}

pub fn cmd_refine(cfg: &RunConfig) -> Result<(), CliError> {
    let alpha = cfg.require_alpha()?;
    let problem = build_problem(cfg)?;
    let params = IgrParams::new(alpha)?;
    let ns: Vec<usize> = cfg.ns.clone().unwrap_or_else(|| vec![64, 128, 256]);
    let deltas: Vec<f64> = match &cfg.deltas {
        Some(d) => d.clone(),
        None => {
            // tie the time step to the grid: halve it with each doubling,
            // anchored at the relative step in the solver parameters
            let coarse = problem.scenario.grid(*ns.first().unwrap_or(&64))?;
            let t_ref = problem.scenario.shock_time(&coarse).unwrap_or(1.0);
            ns.iter()
                .map(|&n| params.fd_step * t_ref * ns[0] as f64 / n as f64)
                .collect()
        }
    };
    let rows = igr1d::refinement_study(&problem.scenario, &params, &ns, &deltas)?;
    let ext = cfg.format.extension();
    let mut table = Table::new(&[
        "n [1]",
        "delta [time]",
        "phidot_fd_error [length/time]",
        "phiddot_fd_error [length/time^2]",
        "mass_residual [mass/length/time]",
        "momentum_residual [mass/time^2]",
        "budget_residual [mass length/time^2]",
        "phidot_order [1]",
        "phiddot_order [1]",
        "mass_order [1]",
        "momentum_order [1]",
        "budget_order [1]",
    ]);
    for row in &rows {
        table.push(vec![
            Some(row.n as f64),
            Some(row.delta),
            Some(row.phidot_fd_error),
            Some(row.phiddot_fd_error),
            Some(row.mass_residual),
            Some(row.momentum_residual),
            Some(row.budget_residual),
            row.phidot_order,
            row.phiddot_order,
            row.mass_order,
            row.momentum_order,
            row.budget_order,
        ]);
    }
    table.write(&cfg.out.join(format!("refine.{ext}")), cfg.format)?;
    println!(
        "refine: {} {} rows -> {}",
        problem.scenario.name,
        rows.len(),
        cfg.out.display()
    );
    Ok(())
}

pub fn cmd_scenarios() -> Result<(), CliError> {
    println!("available scenarios (defaults: [0, 1], amplitude 1, uniform density):");
    for name in Scenario::names() {
        let sc = Scenario::by_name(name).map_err(|e| CliError::Config(e.to_string()))?;
        let grid = sc.grid(1024)?;
        let shock = match sc.shock_time(&grid) {
            Some(tc) => format!("shock time {tc:.6}"),
            None => "no shock".to_string(),
        };
        println!("  {name:<12} {} ({shock})", sc.describe());
    }
    Ok(())
}

/// Resolve the output directory against an optional root (used by tests).
pub fn ensure_out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&cfg.out)?;
    Ok(cfg.out.clone())
}
