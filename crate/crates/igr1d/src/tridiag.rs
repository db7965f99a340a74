//! Symmetric positive definite tridiagonal systems and their direct
//! solution by LDL^T elimination in O(M).

use crate::error::{Error, Result};

/// Symmetric tridiagonal system `A x = rhs` with `diag` on the main
/// diagonal and `off` on both off-diagonals. Callers that assemble mass
/// plus stiffness forms guarantee positive definiteness.
#[derive(Debug, Clone)]
pub struct TridiagonalSystem {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn new(diag: Vec<f64>, off: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        if off.len() + 1 != diag.len() {
            return Err(Error::LengthMismatch {
                expected: diag.len().saturating_sub(1),
                got: off.len(),
            });
        }
        if rhs.len() != diag.len() {
            return Err(Error::LengthMismatch {
                expected: diag.len(),
                got: rhs.len(),
            });
        }
        Ok(Self { diag, off, rhs })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Matrix-vector product `A x` (used by residual checks).
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.len();
        let mut y = vec![0.0; m];
        for i in 0..m {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < m {
                v += self.off[i] * x[i + 1];
            }
            y[i] = v;
        }
        y
    }
}

/// Solve the SPD system by symmetric Thomas elimination.
/// A nonpositive pivot signals a caller bug breaking SPD-ness.
pub fn solve_tridiagonal_spd(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    let m = sys.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    // LDL^T: d holds the pivots, l the unit-lower-diagonal entries
    let mut d = vec![0.0; m];
    let mut l = vec![0.0; m.saturating_sub(1)];
    d[0] = sys.diag[0];
    if !(d[0] > 0.0) {
        return Err(Error::NonSpdPivot {
            row: 0,
            pivot: d[0],
        });
    }
    for i in 1..m {
        l[i - 1] = sys.off[i - 1] / d[i - 1];
        d[i] = sys.diag[i] - l[i - 1] * sys.off[i - 1];
        if !(d[i] > 0.0) {
            return Err(Error::NonSpdPivot {
                row: i,
                pivot: d[i],
            });
        }
    }
    // forward substitution L y = rhs
    let mut x = sys.rhs.clone();
    for i in 1..m {
        x[i] -= l[i - 1] * x[i - 1];
    }
    // diagonal and back substitution L^T x = D^{-1} y
    x[m - 1] /= d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = x[i] / d[i] - l[i] * x[i + 1];
    }
    Ok(x)
}
