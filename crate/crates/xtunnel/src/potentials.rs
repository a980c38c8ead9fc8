//! One-dimensional potentials and the physical constants.

use serde::{Deserialize, Serialize};

use crate::error::{finite, positive, Error, Result};
use crate::grid::{Grid, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsParams {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass: f64,
    /// Interaction strength of the pair kernel.
    #[serde(default = "one")]
    pub e2: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PhysicsParams {
    fn default() -> Self {
        PhysicsParams { hbar: 1.0, mass: 1.0, e2: 1.0 }
    }
}

impl PhysicsParams {
    pub fn validate(&self) -> Result<()> {
        positive("physics.hbar", self.hbar)?;
        positive("physics.mass", self.mass)?;
        positive("physics.e2", self.e2)
    }

    #[must_use]
    pub fn with_hbar(self, hbar: f64) -> Self {
        PhysicsParams { hbar, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleWell {
    pub depth_left: f64,
    pub depth_right: f64,
    pub width: f64,
    pub separation: f64,
}

impl DoubleWell {
    pub fn validate(&self) -> Result<()> {
        positive("potential.depth_left", self.depth_left)?;
        positive("potential.depth_right", self.depth_right)?;
        positive("potential.width", self.width)?;
        finite("potential.separation", self.separation)?;
        if self.separation < 0.0 {
            return Err(Error::InvalidParameter {
                name: "potential.separation",
                reason: format!("must be >= 0, got {}", self.separation),
            });
        }
        Ok(())
    }

    pub fn left_center(&self) -> f64 {
        -0.5 * self.separation
    }

    pub fn right_center(&self) -> f64 {
        0.5 * self.separation
    }

    #[must_use]
    pub fn with_separation(self, separation: f64) -> Self {
        DoubleWell { separation, ..self }
    }

    /// Symmetric box half-width `l/2 + 8w`.
    pub fn default_half_width(&self) -> f64 {
        0.5 * self.separation + 8.0 * self.width
    }

    fn value(&self, x: f64) -> f64 {
        let s = 2.0 * self.width * self.width;
        -self.depth_left * (-(x - self.left_center()).powi(2) / s).exp()
            - self.depth_right * (-(x - self.right_center()).powi(2) / s).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    L,
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    DoubleGaussianWell {
        depth_left: f64,
        depth_right: f64,
        width: f64,
        separation: f64,
    },
    GaussianWell {
        depth: f64,
        width: f64,
        center: f64,
    },
    Harmonic {
        omega: f64,
        #[serde(default)]
        center: f64,
    },
    SoftCoulombWell {
        z: f64,
        core: f64,
        #[serde(default)]
        center: f64,
    },
    InvertedParabolaBarrier {
        u0: f64,
        k: f64,
    },
    Zero,
}

impl From<DoubleWell> for PotentialSpec {
    fn from(w: DoubleWell) -> Self {
        PotentialSpec::DoubleGaussianWell {
            depth_left: w.depth_left,
            depth_right: w.depth_right,
            width: w.width,
            separation: w.separation,
        }
    }
}

impl PotentialSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PotentialSpec::DoubleGaussianWell { .. } => "double_gaussian_well",
            PotentialSpec::GaussianWell { .. } => "gaussian_well",
            PotentialSpec::Harmonic { .. } => "harmonic",
            PotentialSpec::SoftCoulombWell { .. } => "soft_coulomb_well",
            PotentialSpec::InvertedParabolaBarrier { .. } => "inverted_parabola_barrier",
            PotentialSpec::Zero => "zero",
        }
    }

    pub fn double_well(&self) -> Result<DoubleWell> {
        match *self {
            PotentialSpec::DoubleGaussianWell { depth_left, depth_right, width, separation } => {
                Ok(DoubleWell { depth_left, depth_right, width, separation })
            }
            _ => Err(Error::WrongVariant { expected: "double_gaussian_well", got: self.name() }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PotentialSpec::DoubleGaussianWell { .. } => self.double_well()?.validate(),
            PotentialSpec::GaussianWell { depth, width, center } => {
                positive("potential.depth", depth)?;
                positive("potential.width", width)?;
                finite("potential.center", center)
            }
            PotentialSpec::Harmonic { omega, center } => {
                positive("potential.omega", omega)?;
                finite("potential.center", center)
            }
            PotentialSpec::SoftCoulombWell { z, core, center } => {
                positive("potential.z", z)?;
                positive("potential.core", core)?;
                finite("potential.center", center)
            }
            PotentialSpec::InvertedParabolaBarrier { u0, k } => {
                finite("potential.u0", u0)?;
                positive("potential.k", k)
            }
            PotentialSpec::Zero => Ok(()),
        }
    }

    pub fn value(&self, params: &PhysicsParams, x: f64) -> f64 {
        match *self {
            PotentialSpec::DoubleGaussianWell { .. } => {
                self.double_well().map(|w| w.value(x)).unwrap_or(0.0)
            }
            PotentialSpec::GaussianWell { depth, width, center } => {
                -depth * (-(x - center).powi(2) / (2.0 * width * width)).exp()
            }
            PotentialSpec::Harmonic { omega, center } => {
                0.5 * params.mass * omega * omega * (x - center).powi(2)
            }
            PotentialSpec::SoftCoulombWell { z, core, center } => {
                -z / ((x - center).powi(2) + core * core).sqrt()
            }
            PotentialSpec::InvertedParabolaBarrier { u0, k } => u0 - 0.5 * k * x * x,
            PotentialSpec::Zero => 0.0,
        }
    }
}

pub fn sample_potential(spec: &PotentialSpec, params: &PhysicsParams, grid: &Grid) -> GridFunction {
    grid.sample(|x| spec.value(params, x))
}

/// The isolated single well on one side of a double well.
pub fn single_well_spec(spec: &PotentialSpec, side: Side) -> Result<PotentialSpec> {
    let w = spec.double_well()?;
    Ok(match side {
        Side::L => PotentialSpec::GaussianWell {
            depth: w.depth_left,
            width: w.width,
            center: w.left_center(),
        },
        Side::R => PotentialSpec::GaussianWell {
            depth: w.depth_right,
            width: w.width,
            center: w.right_center(),
        },
    })
}

/// Grid point of maximal `u` on `[between.0, between.1]`; the leftmost wins on ties.
pub fn barrier_top(u: &GridFunction, between: (f64, f64)) -> Result<(f64, f64)> {
    let g = u.grid();
    let (a, b) = between;
    let mut best: Option<(usize, f64)> = None;
    for (i, (&v, x)) in u.values().iter().zip(g.points()).enumerate() {
        if x < a || x > b {
            continue;
        }
        if best.is_none_or(|(_, m)| v > m) {
            best = Some((i, v));
        }
    }
    best.map(|(i, v)| (g.x(i), v)).ok_or(Error::EmptyInterval(a, b))
}

/// Grid minimum of `u` on an interval, refined by a three-point parabola.
pub fn well_bottom(u: &GridFunction, between: (f64, f64)) -> Result<(f64, f64)> {
    let g = u.grid();
    let neg = u.map(|v| -v);
    let (x0, _) = barrier_top(&neg, between)?;
    let i = g.nearest_index(x0);
    if i == 0 || i + 1 >= g.n {
        return Ok((x0, u.values()[i]));
    }
    let (ym, y0, yp) = (u.values()[i - 1], u.values()[i], u.values()[i + 1]);
    let curv = ym - 2.0 * y0 + yp;
    if curv <= 0.0 {
        return Ok((x0, y0));
    }
    let t = 0.5 * (ym - yp) / curv;
    Ok((x0 + t * g.h(), y0 - 0.25 * (ym - yp) * t))
}
