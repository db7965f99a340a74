//! Independent oracles shared by the integration tests. Everything here
//! is deliberately naive (dense elimination, cubic-cost formulas,
//! brute-force quadrature) and stays independent of the library paths it
//! checks.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Dense Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot = a[col][col];
        assert!(pivot.abs() > 0.0, "singular matrix in dense oracle");
        for row in col + 1..n {
            let f = a[row][col] / pivot;
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

/// Dense matrix from tridiagonal bands.
pub fn dense_from_tridiagonal(diag: &[f64], off: &[f64]) -> Vec<Vec<f64>> {
    let n = diag.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = diag[i];
        if i + 1 < n {
            a[i][i + 1] = off[i];
            a[i + 1][i] = off[i];
        }
    }
    a
}

/// Exact weighted isotonic regression by the max-min formula
/// `y_i = max_{j <= i} min_{k >= i} mean(targets[j..=k])`, cubic cost.
pub fn isotonic_minimax(targets: &[f64], weights: &[f64]) -> Vec<f64> {
    let n = targets.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut best = f64::NEG_INFINITY;
        for j in 0..=i {
            let mut worst = f64::INFINITY;
            let mut wsum = 0.0;
            let mut vsum = 0.0;
            for k in j..n {
                wsum += weights[k];
                vsum += weights[k] * targets[k];
                if k >= i {
                    worst = worst.min(vsum / wsum);
                }
            }
            best = best.max(worst);
        }
        out[i] = best;
    }
    out
}

/// Composite Simpson quadrature.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    let mut total = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        total += w * f(a + i as f64 * h);
    }
    total * h / 3.0
}

/// Random strictly increasing map values with endpoints pinned to the
/// grid interval and slopes bounded away from zero.
pub fn random_map_values(rng: &mut ChaCha8Rng, a: f64, b: f64, n: usize) -> Vec<f64> {
    let increments: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..3.0)).collect();
    let total: f64 = increments.iter().sum();
    let mut values = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    values.push(a);
    for inc in &increments[..n - 1] {
        acc += inc;
        values.push(a + (b - a) * acc / total);
    }
    values.push(b);
    values
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
