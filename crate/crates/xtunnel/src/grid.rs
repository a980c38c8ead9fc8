//! Uniform grids with Dirichlet ends and functions sampled on them.
//!
//! Quadrature is the trapezoid rule with implicit zero values at `x_min`
//! and `x_max`, so `integrate(f) = h * sum(f_i)`. For `f = 1` on `[0, 1]`
//! this gives `n * h = 1 - h`, not 1.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    /// Interior point count.
    pub n: usize,
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] with {} points", self.x_min, self.x_max, self.n)
    }
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        let g = Grid { x_min, x_max, n };
        g.validate()?;
        Ok(g)
    }

    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    /// Grid on `[x_min, x_max]` whose spacing does not exceed `spacing`.
    pub fn with_spacing(x_min: f64, x_max: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be > 0, got {spacing}")));
        }
        let cells = ((x_max - x_min) / spacing).ceil();
        if !cells.is_finite() || cells < 4.0 {
            return Err(Error::InvalidGrid(format!(
                "spacing {spacing} too coarse for [{x_min}, {x_max}]"
            )));
        }
        Self::new(x_min, x_max, cells as usize - 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if self.x_max <= self.x_min {
            return Err(Error::InvalidGrid(format!(
                "x_max {} must exceed x_min {}",
                self.x_max, self.x_min
            )));
        }
        if self.n < 3 {
            return Err(Error::InvalidGrid(format!("need n >= 3, got {}", self.n)));
        }
        Ok(())
    }

    #[must_use]
    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n + 1) as f64
    }

    #[must_use]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i + 1) as f64 * self.h()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        let h = self.h();
        (0..self.n).map(move |i| self.x_min + (i + 1) as f64 * h)
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { grid: *self, values: self.points().map(f).collect() }
    }

    /// Same box, `2n + 1` points: old point `i` becomes new point `2i + 1`.
    #[must_use]
    pub fn refined(&self) -> Grid {
        Grid { n: 2 * self.n + 1, ..*self }
    }

    /// Index of the grid point nearest to `x`, clamped into range.
    #[must_use]
    pub fn nearest_index(&self, x: f64) -> usize {
        let t = ((x - self.x_min) / self.h() - 1.0).round();
        t.clamp(0.0, (self.n - 1) as f64) as usize
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch { left: *self, right: *other })
        }
    }

    /// True when the points are mirror images under `x -> -x`.
    #[must_use]
    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() <= 1e-12 * (self.x_max - self.x_min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at index {i}")));
        }
        Ok(GridFunction { grid, values })
    }

    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n);
        GridFunction { grid, values }
    }

    #[must_use]
    pub fn zeros(grid: Grid) -> Self {
        GridFunction { grid, values: vec![0.0; grid.n] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[must_use]
    pub fn integrate(&self) -> f64 {
        self.grid.h() * self.values.iter().sum::<f64>()
    }

    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(self.grid.h() * s)
    }

    #[must_use]
    pub fn norm(&self) -> f64 {
        (self.grid.h() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    #[must_use]
    pub fn scaled(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    #[must_use]
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        self.grid.ensure_same(&other.grid)?;
        Ok(GridFunction {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + c * b)
    }

    #[must_use]
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `<f, R f> / <f, f>` with `R` the reflection `x -> -x`; needs a symmetric grid.
    pub fn reflection_overlap(&self) -> Result<f64> {
        if !self.grid.is_symmetric() {
            return Err(Error::InvalidGrid(format!("grid {} is not symmetric", self.grid)));
        }
        let v = &self.values;
        let num: f64 = v.iter().zip(v.iter().rev()).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|a| a * a).sum();
        Ok(if den > 0.0 { num / den } else { 0.0 })
    }
}

pub fn integrate(f: &GridFunction) -> f64 {
    f.integrate()
}

pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    f.inner(g)
}
