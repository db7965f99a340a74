//! 1D node partition of `[a, b]`: the spatial discretization of the
//! Lagrangian label space. Piecewise-linear fields live on the nodes,
//! their derivatives are constant per cell.

use crate::error::{Error, Result};

/// Partition of `[a, b]` into `N` cells with strictly increasing nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    cell_widths: Vec<f64>,
}

impl Grid {
    /// Equispaced partition with `n` cells.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a < b) {
            return Err(Error::Grid(format!("need a < b, got a = {a}, b = {b}")));
        }
        if n < 2 {
            return Err(Error::Grid(format!("need at least 2 cells, got {n}")));
        }
        let h = (b - a) / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|i| a + i as f64 * h).collect();
        // pin the endpoints so no rounding drift survives
        nodes[0] = a;
        nodes[n] = b;
        Self::from_nodes(nodes)
    }

    /// Grid from explicit (strictly increasing) nodes; supports graded meshes.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::Grid(format!(
                "need at least 3 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::Grid("nodes must be finite".into()));
        }
        let mut cell_widths = Vec::with_capacity(nodes.len() - 1);
        for c in 0..nodes.len() - 1 {
            let h = nodes[c + 1] - nodes[c];
            if h <= 0.0 {
                return Err(Error::Grid(format!(
                    "nodes must be strictly increasing; cell {c} has width {h}"
                )));
            }
            cell_widths.push(h);
        }
        let a = nodes[0];
        let b = *nodes.last().unwrap();
        Ok(Self {
            a,
            b,
            nodes,
            cell_widths,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of cells.
    pub fn num_cells(&self) -> usize {
        self.cell_widths.len()
    }

    /// Number of nodes (= cells + 1).
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn cell_widths(&self) -> &[f64] {
        &self.cell_widths
    }

    /// Index of the cell containing `x`, clamped to `[0, N-1]`.
    pub fn cell_of(&self, x: f64) -> usize {
        locate_cell(&self.nodes, x)
    }
}

/// Per-cell derivative `(v[c+1] - v[c]) / h_c` of nodal values.
pub fn cell_derivative(grid: &Grid, node_values: &[f64]) -> Result<Vec<f64>> {
    if node_values.len() != grid.num_nodes() {
        return Err(Error::LengthMismatch {
            expected: grid.num_nodes(),
            got: node_values.len(),
        });
    }
    Ok((0..grid.num_cells())
        .map(|c| (node_values[c + 1] - node_values[c]) / grid.cell_widths()[c])
        .collect())
}

/// Locate the cell of `x` in a sorted breakpoint list by binary search.
/// Values at a breakpoint go to the cell on its right; out-of-range
/// values clamp to the first/last cell.
pub(crate) fn locate_cell(breaks: &[f64], x: f64) -> usize {
    let n_cells = breaks.len() - 1;
    if x <= breaks[0] {
        return 0;
    }
    if x >= breaks[n_cells] {
        return n_cells - 1;
    }
    // partition_point: first index with breaks[i] > x, so the cell is i - 1
    let i = breaks.partition_point(|&node| node <= x);
    (i - 1).min(n_cells - 1)
}

/// Piecewise-linear interpolation of nodal values at `x`.
pub(crate) fn interp_linear(breaks: &[f64], values: &[f64], x: f64) -> f64 {
    let c = locate_cell(breaks, x);
    let w = (x - breaks[c]) / (breaks[c + 1] - breaks[c]);
    values[c] + w.clamp(0.0, 1.0) * (values[c + 1] - values[c])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_partitions_interval() {
        let g = Grid::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.cell_widths(), &[0.25; 4]);
        let g = Grid::uniform(-1.0, 1.0, 2).unwrap();
        assert_eq!(g.nodes(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(Grid::uniform(0.0, 1.0, 1).is_err());
        assert!(Grid::uniform(1.0, 1.0, 4).is_err());
        assert!(Grid::uniform(2.0, 1.0, 4).is_err());
        assert!(Grid::from_nodes(vec![0.0, 0.5, 0.5, 1.0]).is_err());
    }

    #[test]
    fn widths_sum_to_interval_length() {
        let g = Grid::uniform(-2.0, 3.0, 7).unwrap();
        let total: f64 = g.cell_widths().iter().sum();
        assert!((total - 5.0).abs() < 1e-12);
    }

    #[test]
    fn cell_derivative_of_identity_is_one() {
        for nodes in [
            vec![0.0, 0.25, 0.5, 0.75, 1.0],
            vec![0.0, 0.1, 0.5, 0.6, 1.0],
        ] {
            let g = Grid::from_nodes(nodes).unwrap();
            let d = cell_derivative(&g, g.nodes()).unwrap();
            for v in d {
                assert!((v - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cell_derivative_examples() {
        let g = Grid::uniform(0.0, 1.0, 2).unwrap();
        let d = cell_derivative(&g, &[0.0, 0.1, 1.0]).unwrap();
        assert!((d[0] - 0.2).abs() < 1e-14);
        assert!((d[1] - 1.8).abs() < 1e-14);
        let d = cell_derivative(&g, &[3.0, 3.0, 3.0]).unwrap();
        assert_eq!(d, vec![0.0, 0.0]);
        assert!(cell_derivative(&g, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn locate_cell_handles_breakpoints_and_ends() {
        let breaks = [0.0, 0.25, 0.5, 1.0];
        assert_eq!(locate_cell(&breaks, -1.0), 0);
        assert_eq!(locate_cell(&breaks, 0.0), 0);
        assert_eq!(locate_cell(&breaks, 0.25), 1);
        assert_eq!(locate_cell(&breaks, 0.3), 1);
        assert_eq!(locate_cell(&breaks, 1.0), 2);
        assert_eq!(locate_cell(&breaks, 2.0), 2);
    }
}
