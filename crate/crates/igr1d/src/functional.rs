//! The discrete convex objective whose minimizer is the deformation map
//! at time `t`: lumped quadratic and linear terms per node, a `-log`
//! barrier on the cell derivatives, and an optional gradient coupling
//! term carried by the linear data. Gradient and Hessian come out exact
//! and tridiagonal.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{cell_derivative, interp_linear, Grid};
use crate::measure::DiscreteMeasure;
use crate::tridiag::TridiagonalSystem;

/// Relative slack used when snapping boundary velocities to zero.
const BOUNDARY_SNAP: f64 = 1e-12;

/// Monotone map of `[a, b]` onto itself fixing both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneMap {
    values: Vec<f64>,
}

impl MonotoneMap {
    /// Validates endpoint pinning and monotonicity (flat cells allowed).
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::LengthMismatch {
                expected: grid.num_nodes(),
                got: values.len(),
            });
        }
        if values[0] != grid.a() || *values.last().unwrap() != grid.b() {
            return Err(Error::Map(format!(
                "endpoints must be pinned to [{}, {}]; got [{}, {}]",
                grid.a(),
                grid.b(),
                values[0],
                values.last().unwrap()
            )));
        }
        for i in 0..values.len() - 1 {
            if !(values[i + 1] >= values[i]) {
                return Err(Error::Map(format!(
                    "values must be nondecreasing; violation between nodes {i} and {}",
                    i + 1
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn identity(grid: &Grid) -> Self {
        Self {
            values: grid.nodes().to_vec(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_derivatives(&self, grid: &Grid) -> Vec<f64> {
        cell_derivative(grid, &self.values).expect("lengths checked at construction")
    }

    pub fn min_cell_derivative(&self, grid: &Grid) -> f64 {
        self.cell_derivatives(grid)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_cell_derivative(&self, grid: &Grid) -> f64 {
        self.cell_derivatives(grid)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_strictly_increasing(&self, grid: &Grid) -> bool {
        self.min_cell_derivative(grid) > 0.0
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn l2_mu_distance(&self, other: &Self, mu: &DiscreteMeasure) -> f64 {
        let diff: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        mu.l2_norm(&diff)
    }
}

/// Provenance of the linear data entering the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataKind {
    /// Plain integration of the velocity against the measure.
    RawU0,
    /// Velocity plus the derivative coupling term scaled by alpha.
    RegularizedFAlpha,
}

impl std::fmt::Display for DataKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DataKind::RawU0 => write!(f, "raw-u0"),
            DataKind::RegularizedFAlpha => write!(f, "regularized-f-alpha"),
        }
    }
}

/// Velocity data representing the linear functional in the objective.
/// Boundary values must vanish (no-penetration walls).
#[derive(Debug, Clone)]
pub struct LinearData {
    node_values: Vec<f64>,
    /// Cell derivatives of the velocity; present only for the regularized form.
    cell_derivatives: Option<Vec<f64>>,
    kind: DataKind,
}

impl LinearData {
    /// Raw form: the functional acts as lumped integration of `u0 * phi`.
    pub fn raw(grid: &Grid, u0: &[f64]) -> Result<Self> {
        let node_values = validated_velocity(grid, u0)?;
        Ok(Self {
            node_values,
            cell_derivatives: None,
            kind: DataKind::RawU0,
        })
    }

    /// Raw form for a general integrand that is not a wall-bounded
    /// velocity; skips the boundary-zero requirement.
    pub fn general(grid: &Grid, v: &[f64]) -> Result<Self> {
        if v.len() != grid.num_nodes() {
            return Err(Error::LengthMismatch {
                expected: grid.num_nodes(),
                got: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Data("data values must be finite".into()));
        }
        Ok(Self {
            node_values: v.to_vec(),
            cell_derivatives: None,
            kind: DataKind::RawU0,
        })
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    pub fn kind(&self) -> DataKind {
        self.kind
    }

    pub fn velocity_cell_derivatives(&self) -> Option<&[f64]> {
        self.cell_derivatives.as_deref()
    }

    /// Pointwise nodal representation of the functional: for the regularized
    /// form the derivative coupling is folded in by discrete summation by
    /// parts, so that the functional acts as lumped integration of
    /// `v_eff * phi` exactly. Raw data returns the velocity itself.
    pub fn effective_nodal(
        &self,
        params: &IgrParams,
        mu: &DiscreteMeasure,
        grid: &Grid,
    ) -> Vec<f64> {
        let mut v = self.node_values.clone();
        if let Some(du) = &self.cell_derivatives {
            let m = mu.cell_mass();
            let w = mu.node_weight();
            let h = grid.cell_widths();
            let n = grid.num_cells();
            let flux = |c: usize| m[c] * du[c] / h[c];
            v[0] += params.alpha * (-flux(0)) / w[0];
            for i in 1..n {
                v[i] += params.alpha * (flux(i - 1) - flux(i)) / w[i];
            }
            v[n] += params.alpha * flux(n - 1) / w[n];
        }
        v
    }
}

/// Regularized form: carries the velocity and its cell derivatives so the
/// functional includes the `alpha`-scaled derivative coupling.
pub fn make_regularized_data(
    u0: &[f64],
    _params: &IgrParams,
    _mu: &DiscreteMeasure,
    grid: &Grid,
) -> Result<LinearData> {
    let node_values = validated_velocity(grid, u0)?;
    let cell_derivatives = cell_derivative(grid, &node_values)?;
    Ok(LinearData {
        node_values,
        cell_derivatives: Some(cell_derivatives),
        kind: DataKind::RegularizedFAlpha,
    })
}

fn validated_velocity(grid: &Grid, u0: &[f64]) -> Result<Vec<f64>> {
    if u0.len() != grid.num_nodes() {
        return Err(Error::LengthMismatch {
            expected: grid.num_nodes(),
            got: u0.len(),
        });
    }
    if u0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("velocity must be finite".into()));
    }
    let scale = u0.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut out = u0.to_vec();
    let last = out.len() - 1;
    for idx in [0, last] {
        if out[idx].abs() <= BOUNDARY_SNAP * scale {
            out[idx] = 0.0;
        } else if out[idx] != 0.0 {
            return Err(Error::Data(format!(
                "boundary velocity must vanish; got {} at node {idx}",
                out[idx]
            )));
        }
    }
    Ok(out)
}

/// Solver parameters. `alpha` has the dimension of a squared length and
/// controls the width of the smoothed shocks.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IgrParams {
    pub alpha: f64,
    /// Absolute tolerance on the infinity norm of the mass-scaled gradient.
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Relative time step for finite-difference validations.
    pub fd_step: f64,
}

impl IgrParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Params(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            newton_tol: 1e-10,
            max_iter: 50,
            fd_step: 1e-2,
        })
    }
}

/// Value of the extended-real objective. The barrier is infinite off the
/// strictly monotone cone; a dedicated variant keeps floating infinities
/// out of the linear algebra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveValue {
    Finite(f64),
    PlusInfinity,
}

impl ObjectiveValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, ObjectiveValue::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            ObjectiveValue::Finite(v) => Some(*v),
            ObjectiveValue::PlusInfinity => None,
        }
    }

    pub fn expect_finite(&self) -> f64 {
        self.finite().expect("objective is infinite")
    }

    /// Strict comparison treating the sentinel as larger than any finite value.
    pub fn lt(&self, other: &ObjectiveValue) -> bool {
        match (self, other) {
            (ObjectiveValue::Finite(a), ObjectiveValue::Finite(b)) => a < b,
            (ObjectiveValue::Finite(_), ObjectiveValue::PlusInfinity) => true,
            _ => false,
        }
    }
}

/// Discrete objective at time `t`:
/// lumped `(phi - x)^2/2 - t v phi` terms, the cell-mass weighted
/// `-alpha log` barrier, and (regularized data) the `-t alpha` derivative
/// coupling. Returns the infinity sentinel off the strictly monotone cone
/// whenever the barrier is active.
pub fn objective_hat(
    phi: &MonotoneMap,
    data: &LinearData,
    t: f64,
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> ObjectiveValue {
    let d = phi.cell_derivatives(grid);
    let mut value = 0.0;
    let x = grid.nodes();
    let v = data.node_values();
    for i in 0..grid.num_nodes() {
        let p = phi.values()[i];
        value += mu.node_weight()[i] * (0.5 * (p - x[i]) * (p - x[i]) - t * v[i] * p);
    }
    if params.alpha > 0.0 {
        for c in 0..grid.num_cells() {
            if d[c] <= 0.0 {
                return ObjectiveValue::PlusInfinity;
            }
            value -= params.alpha * mu.cell_mass()[c] * d[c].ln();
        }
    }
    if let Some(du) = data.velocity_cell_derivatives() {
        for c in 0..grid.num_cells() {
            value -= t * params.alpha * mu.cell_mass()[c] * d[c] * du[c];
        }
    }
    ObjectiveValue::Finite(value)
}

/// Action of the data functional on a map (no time scaling): lumped
/// integration of `u0 * phi` plus, for regularized data, the `alpha`-scaled
/// derivative coupling.
pub fn apply_linear(
    data: &LinearData,
    phi: &MonotoneMap,
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> f64 {
    let mut value = 0.0;
    for i in 0..grid.num_nodes() {
        value += mu.node_weight()[i] * data.node_values()[i] * phi.values()[i];
    }
    if let Some(du) = data.velocity_cell_derivatives() {
        let d = phi.cell_derivatives(grid);
        for c in 0..grid.num_cells() {
            value += params.alpha * mu.cell_mass()[c] * d[c] * du[c];
        }
    }
    value
}

/// Exact gradient of [`objective_hat`] with respect to the interior nodes
/// (Dirichlet elimination of the pinned endpoints). Entry `i - 1` holds
/// the derivative with respect to `phi_i`.
pub fn gradient(
    phi: &MonotoneMap,
    data: &LinearData,
    t: f64,
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> Result<Vec<f64>> {
    let d = phi.cell_derivatives(grid);
    if params.alpha > 0.0 && d.iter().any(|&v| v <= 0.0) {
        return Err(Error::Map(
            "gradient requires a strictly increasing map".into(),
        ));
    }
    let n = grid.num_cells();
    let x = grid.nodes();
    let h = grid.cell_widths();
    let m = mu.cell_mass();
    let w = mu.node_weight();
    let v = data.node_values();
    let du = data.velocity_cell_derivatives();
    let mut g = Vec::with_capacity(n - 1);
    for i in 1..n {
        let mut gi = w[i] * (phi.values()[i] - x[i] - t * v[i]);
        if params.alpha > 0.0 {
            gi += params.alpha * (m[i] / (h[i] * d[i]) - m[i - 1] / (h[i - 1] * d[i - 1]));
        }
        if let Some(du) = du {
            gi += t * params.alpha * (m[i] * du[i] / h[i] - m[i - 1] * du[i - 1] / h[i - 1]);
        }
        g.push(gi);
    }
    Ok(g)
}

/// Infinity norm of the gradient divided node-wise by the lumped masses:
/// the pointwise residual of the optimality condition, which is what the
/// solver tolerances refer to.
pub fn scaled_gradient_norm(
    phi: &MonotoneMap,
    data: &LinearData,
    t: f64,
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> Result<f64> {
    let g = gradient(phi, data, t, params, mu, grid)?;
    Ok(scaled_inf_norm(&g, mu))
}

pub(crate) fn scaled_inf_norm(interior_gradient: &[f64], mu: &DiscreteMeasure) -> f64 {
    interior_gradient
        .iter()
        .enumerate()
        .map(|(k, g)| (g / mu.node_weight()[k + 1]).abs())
        .fold(0.0, f64::max)
}

/// Hessian of [`objective_hat`] on the interior nodes: lumped mass diagonal
/// plus the stiffness with cell coefficients `alpha m_c / (h_c d_c^2)`.
/// Returned as an SPD tridiagonal system with a zero right-hand side.
pub fn hessian(
    phi: &MonotoneMap,
    params: &IgrParams,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> Result<TridiagonalSystem> {
    let d = phi.cell_derivatives(grid);
    if params.alpha > 0.0 && d.iter().any(|&v| v <= 0.0) {
        return Err(Error::Map(
            "hessian requires a strictly increasing map".into(),
        ));
    }
    let n = grid.num_cells();
    let h = grid.cell_widths();
    let m = mu.cell_mass();
    let w = mu.node_weight();
    // stiffness coefficient per cell, divided once more by the width when
    // assembled into matrix entries
    let k: Vec<f64> = (0..n)
        .map(|c| {
            if params.alpha > 0.0 {
                params.alpha * m[c] / (h[c] * d[c] * d[c])
            } else {
                0.0
            }
        })
        .collect();
    let mut diag = Vec::with_capacity(n - 1);
    let mut off = Vec::with_capacity(n.saturating_sub(2));
    for i in 1..n {
        diag.push(w[i] + k[i - 1] / h[i - 1] + k[i] / h[i]);
        if i + 1 < n {
            off.push(-k[i] / h[i]);
        }
    }
    TridiagonalSystem::new(diag, off, vec![0.0; n - 1])
}

/// Relative entropy of the pushforward of the measure under `phi` with
/// respect to the measure itself. Cells crushed to a point carry positive
/// mass onto a null set, which the sentinel reports as infinite.
pub fn kl_pushforward(phi: &MonotoneMap, mu: &DiscreteMeasure, grid: &Grid) -> ObjectiveValue {
    let mut total = 0.0;
    for c in 0..grid.num_cells() {
        let m = mu.cell_mass()[c];
        let spread = phi.values()[c + 1] - phi.values()[c];
        if spread <= 0.0 {
            return ObjectiveValue::PlusInfinity;
        }
        let midpoint = 0.5 * (phi.values()[c] + phi.values()[c + 1]);
        let mu_at_image = interp_linear(grid.nodes(), mu.node_density(), midpoint);
        total += m * ((m / spread) / mu_at_image).ln();
    }
    ObjectiveValue::Finite(total)
}
