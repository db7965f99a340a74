//! Built-in initial conditions: a quiescent state, a compressive sine
//! wave, smoothed colliding streams, and a seeded random field. All
//! velocities vanish at the walls; the nominal shock time is the first
//! crossing time of the unregularized characteristics.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{cell_derivative, Grid};
use crate::measure::DiscreteMeasure;

/// Density profile of the initial mass distribution (normalized later).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensitySpec {
    Uniform,
    /// `1 + xi / 2` across the interval.
    Ramp,
    /// `1 + amp * exp(-((xi - 1/2) / 0.15)^2)`.
    Bump(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Identity,
    Sinewave,
    Twoblock,
    Randomfield,
}

/// A named initial-condition preset on `[a, b]`.
#[derive(Debug, Clone)]
pub struct Scenario {
    kind: Kind,
    pub name: String,
    pub a: f64,
    pub b: f64,
    /// Velocity amplitude scale.
    pub amplitude: f64,
    /// Seed for the random-field preset.
    pub seed: u64,
    pub density: DensitySpec,
}

impl Scenario {
    pub fn by_name(name: &str) -> Result<Self> {
        let kind = match name {
            "identity" => Kind::Identity,
            "sinewave" => Kind::Sinewave,
            "twoblock" => Kind::Twoblock,
            "randomfield" => Kind::Randomfield,
            other => {
                return Err(Error::Params(format!(
                    "unknown scenario '{other}'; known: {}",
                    Self::names().join(", ")
                )))
            }
        };
        Ok(Self {
            kind,
            name: name.to_string(),
            a: 0.0,
            b: 1.0,
            amplitude: 1.0,
            seed: 42,
            density: DensitySpec::Uniform,
        })
    }

    pub fn names() -> Vec<&'static str> {
        vec!["identity", "sinewave", "twoblock", "randomfield"]
    }

    pub fn describe(&self) -> &'static str {
        match self.kind {
            Kind::Identity => "zero velocity; the map stays the identity",
            Kind::Sinewave => "compressive half sine, steepening against the left wall",
            Kind::Twoblock => "smoothed streams colliding at the midpoint",
            Kind::Randomfield => "seeded sine series with decaying coefficients",
        }
    }

    pub fn with_interval(mut self, a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::Params(format!("need a < b, got {a}, {b}")));
        }
        self.a = a;
        self.b = b;
        Ok(self)
    }

    pub fn with_amplitude(mut self, s: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::Params(format!("amplitude must be >= 0, got {s}")));
        }
        self.amplitude = s;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_density(mut self, density: DensitySpec) -> Self {
        self.density = density;
        self
    }

    pub fn grid(&self, n: usize) -> Result<Grid> {
        Grid::uniform(self.a, self.b, n)
    }

    /// Initial velocity sampled at the grid nodes, exactly zero at the walls.
    pub fn velocity(&self, grid: &Grid) -> Vec<f64> {
        let length = self.b - self.a;
        let s = self.amplitude;
        let mut u0: Vec<f64> = match self.kind {
            Kind::Identity => vec![0.0; grid.num_nodes()],
            Kind::Sinewave => grid
                .nodes()
                .iter()
                .map(|x| {
                    let xi = (x - self.a) / length;
                    -s * (std::f64::consts::PI * xi).sin()
                })
                .collect(),
            Kind::Twoblock => grid
                .nodes()
                .iter()
                .map(|x| {
                    let xi = (x - self.a) / length;
                    -s * ((xi - 0.5) / 0.08).tanh() * (std::f64::consts::PI * xi).sin()
                })
                .collect(),
            Kind::Randomfield => {
                let coeffs = sine_series_coefficients(self.seed, 8, s);
                grid.nodes()
                    .iter()
                    .map(|x| {
                        let xi = (x - self.a) / length;
                        eval_sine_series(&coeffs, xi)
                    })
                    .collect()
            }
        };
        u0[0] = 0.0;
        let last = u0.len() - 1;
        u0[last] = 0.0;
        u0
    }

    pub fn density_values(&self, grid: &Grid) -> Vec<f64> {
        let length = self.b - self.a;
        grid.nodes()
            .iter()
            .map(|x| {
                let xi = (x - self.a) / length;
                match self.density {
                    DensitySpec::Uniform => 1.0,
                    DensitySpec::Ramp => 1.0 + 0.5 * xi,
                    DensitySpec::Bump(amp) => {
                        let z = (xi - 0.5) / 0.15;
                        1.0 + amp * (-z * z).exp()
                    }
                }
            })
            .collect()
    }

    pub fn measure(&self, grid: &Grid) -> Result<DiscreteMeasure> {
        DiscreteMeasure::from_density(grid, &self.density_values(grid))
    }

    /// Nominal shock time `1 / max(-du0)` from the discrete cell
    /// derivatives; `None` when the flow never compresses.
    pub fn shock_time(&self, grid: &Grid) -> Option<f64> {
        let u0 = self.velocity(grid);
        let du = cell_derivative(grid, &u0).ok()?;
        let steepest = du.iter().fold(0.0f64, |acc, d| acc.max(-d));
        if steepest > 0.0 {
            Some(1.0 / steepest)
        } else {
            None
        }
    }
}

/// Decaying coefficients `amplitude * eta_m / m^2` with `eta_m` uniform
/// in `[-1, 1]` from a counter-seeded stream.
pub fn sine_series_coefficients(seed: u64, modes: usize, amplitude: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=modes)
        .map(|m| amplitude * rng.gen_range(-1.0..1.0) / (m * m) as f64)
        .collect()
}

/// Evaluate a boundary-zero sine series at `xi` in `[0, 1]`.
pub fn eval_sine_series(coeffs: &[f64], xi: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * ((k + 1) as f64 * std::f64::consts::PI * xi).sin())
        .sum()
}
