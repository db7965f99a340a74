//! The unregularized baseline: weighted isotonic projection of the free
//! flight `Id + t u0` onto the monotone cone. Colliding particles merge
//! into blocks moving at the mass-weighted mean velocity.

use crate::error::{Error, Result};
use crate::functional::{LinearData, MonotoneMap};
use crate::grid::Grid;
use crate::measure::DiscreteMeasure;

/// Weighted isotonic regression by pool-adjacent-violators: the unique
/// minimizer of `sum w_i (y_i - targets_i)^2` over nondecreasing `y`,
/// computed with a stack of merged blocks in O(M).
pub fn isotonic_projection(targets: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    if weights.len() != targets.len() {
        return Err(Error::LengthMismatch {
            expected: targets.len(),
            got: weights.len(),
        });
    }
    for (index, &value) in weights.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveWeight { index, value });
        }
    }
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(Error::Data("targets must be finite".into()));
    }

    // (block mean, block weight, block length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(targets.len());
    for (&t, &w) in targets.iter().zip(weights) {
        blocks.push((t, w, 1));
        while blocks.len() > 1 {
            let last = blocks.len() - 1;
            if blocks[last - 1].0 <= blocks[last].0 {
                break;
            }
            let (v1, w1, n1) = blocks[last - 1];
            let (v2, w2, n2) = blocks[last];
            let w = w1 + w2;
            blocks[last - 1] = ((w1 * v1 + w2 * v2) / w, w, n1 + n2);
            blocks.pop();
        }
    }

    let mut out = Vec::with_capacity(targets.len());
    for (v, _, n) in blocks {
        out.extend(std::iter::repeat(v).take(n));
    }
    Ok(out)
}

/// Deformation map of the sticky-particle solution at time `t`: isotonic
/// projection of `x_i + t u0_i` under the lumped node weights, clamped to
/// the interval and pinned at the walls.
pub fn sticky_solution(
    data: &LinearData,
    t: f64,
    mu: &DiscreteMeasure,
    grid: &Grid,
) -> Result<MonotoneMap> {
    let u0 = data.node_values();
    let targets: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(u0)
        .map(|(x, u)| x + t * u)
        .collect();
    let mut y = isotonic_projection(&targets, mu.node_weight())?;
    for v in &mut y {
        *v = v.clamp(grid.a(), grid.b());
    }
    y[0] = grid.a();
    let last = y.len() - 1;
    y[last] = grid.b();
    MonotoneMap::new(grid, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pools_all_violators_to_the_mean() {
        let y = isotonic_projection(&[3.0, 1.0, 2.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(y, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn nondecreasing_input_is_fixed_point() {
        let t = [0.0, 0.5, 0.5, 1.0, 3.0];
        let y = isotonic_projection(&t, &[1.0, 2.0, 1.0, 0.5, 1.0]).unwrap();
        assert_eq!(y.as_slice(), t.as_slice());
    }

    #[test]
    fn weighted_pooled_mean() {
        let y = isotonic_projection(&[1.0, 0.0], &[1.0, 3.0]).unwrap();
        assert!((y[0] - 0.25).abs() < 1e-15);
        assert!((y[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_weights() {
        assert!(isotonic_projection(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(isotonic_projection(&[1.0, 2.0], &[-1.0, 1.0]).is_err());
    }

    #[test]
    fn idempotent() {
        let t = [5.0, 1.0, 4.0, 2.0, 8.0, 0.0];
        let w = [1.0, 2.0, 0.5, 1.5, 1.0, 3.0];
        let y = isotonic_projection(&t, &w).unwrap();
        let z = isotonic_projection(&y, &w).unwrap();
        assert_eq!(y, z);
    }

    #[test]
    fn zero_time_or_zero_velocity_is_identity() {
        let g = Grid::uniform(0.0, 1.0, 8).unwrap();
        let mu = DiscreteMeasure::uniform(&g);
        let u0: Vec<f64> = g
            .nodes()
            .iter()
            .map(|x| -(std::f64::consts::PI * x).sin())
            .collect();
        let data = LinearData::raw(&g, &u0).unwrap();
        let id = MonotoneMap::identity(&g);
        assert_eq!(sticky_solution(&data, 0.0, &mu, &g).unwrap(), id);
        let zero = LinearData::raw(&g, &vec![0.0; 9]).unwrap();
        assert_eq!(sticky_solution(&zero, 2.5, &mu, &g).unwrap(), id);
    }
}
