//! The initial mass distribution as a discrete measure: positive node
//! densities, trapezoid cell masses, and lumped node weights, normalized
//! to total mass one.

use crate::error::{Error, Result};
use crate::grid::{interp_linear, Grid};

/// Discrete probability measure on a [`Grid`].
///
/// `cell_mass[c]` is the trapezoid mass of cell `c`; `node_weight[i]` is the
/// lumped quadrature mass (half the mass of the adjacent cells), so both sum
/// to one after normalization.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    node_density: Vec<f64>,
    cell_mass: Vec<f64>,
    node_weight: Vec<f64>,
}

impl DiscreteMeasure {
    /// Build from a strictly positive density sampled at the grid nodes.
    /// The result is rescaled so the cell masses sum to one; the same factor
    /// is applied to the density, so any positive scaling of the input gives
    /// the same measure.
    pub fn from_density(grid: &Grid, density_at_nodes: &[f64]) -> Result<Self> {
        if density_at_nodes.len() != grid.num_nodes() {
            return Err(Error::LengthMismatch {
                expected: grid.num_nodes(),
                got: density_at_nodes.len(),
            });
        }
        for (i, &d) in density_at_nodes.iter().enumerate() {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Measure(format!(
                    "density must be strictly positive and finite; got {d} at node {i}"
                )));
            }
        }
        let n = grid.num_cells();
        let mut cell_mass: Vec<f64> = (0..n)
            .map(|c| grid.cell_widths()[c] * 0.5 * (density_at_nodes[c] + density_at_nodes[c + 1]))
            .collect();
        let total: f64 = cell_mass.iter().sum();
        let node_density: Vec<f64> = density_at_nodes.iter().map(|d| d / total).collect();
        for m in &mut cell_mass {
            *m /= total;
        }
        let mut node_weight = vec![0.0; grid.num_nodes()];
        for c in 0..n {
            node_weight[c] += 0.5 * cell_mass[c];
            node_weight[c + 1] += 0.5 * cell_mass[c];
        }
        Ok(Self {
            node_density,
            cell_mass,
            node_weight,
        })
    }

    /// Uniform measure on the grid's interval.
    pub fn uniform(grid: &Grid) -> Self {
        Self::from_density(grid, &vec![1.0; grid.num_nodes()]).expect("uniform density is valid")
    }

    pub fn node_density(&self) -> &[f64] {
        &self.node_density
    }

    pub fn cell_mass(&self) -> &[f64] {
        &self.cell_mass
    }

    pub fn node_weight(&self) -> &[f64] {
        &self.node_weight
    }

    /// Total mass (one up to roundoff).
    pub fn total_mass(&self) -> f64 {
        self.cell_mass.iter().sum()
    }

    /// Piecewise-linear density at an arbitrary point of `[a, b]`.
    pub fn density_at(&self, grid: &Grid, x: f64) -> f64 {
        interp_linear(grid.nodes(), &self.node_density, x)
    }

    /// Lumped quadrature of a nodal field against the measure.
    pub fn integrate_lumped(&self, values: &[f64]) -> f64 {
        self.node_weight
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum()
    }

    /// Discrete `L^2(mu)` norm via lumped quadrature.
    pub fn l2_norm(&self, values: &[f64]) -> f64 {
        self.node_weight
            .iter()
            .zip(values)
            .map(|(w, v)| w * v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Exact integral of the product of two piecewise-linear nodal fields
    /// against the piecewise-linear density.
    ///
    /// Per cell the integrand is cubic, so four-point treatment is not
    /// needed: we expand `int mu * f * g` over the cell in closed form.
    pub fn integrate_product(&self, grid: &Grid, f: &[f64], g: &[f64]) -> f64 {
        let mu = &self.node_density;
        let mut total = 0.0;
        for c in 0..grid.num_cells() {
            let h = grid.cell_widths()[c];
            let (m0, m1) = (mu[c], mu[c + 1]);
            let (f0, f1) = (f[c], f[c + 1]);
            let (g0, g1) = (g[c], g[c + 1]);
            // int_0^1 (m0 + s dm)(f0 + s df)(g0 + s dg) ds, expanded by moments
            let dm = m1 - m0;
            let df = f1 - f0;
            let dg = g1 - g0;
            total += h
                * (m0 * f0 * g0
                    + 0.5 * (m0 * (f0 * dg + g0 * df) + dm * f0 * g0)
                    + (m0 * df * dg + dm * (f0 * dg + g0 * df)) / 3.0
                    + 0.25 * dm * df * dg);
        }
        total
    }
}
