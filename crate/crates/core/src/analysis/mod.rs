//! Manufactured solutions, error norms, single runs and convergence studies.

mod norms;
mod run;
mod study;

pub use norms::{compute_errors, ErrorNorms};
pub use run::{run_case, RunConfig, RunRecord};
pub use study::{
    convergence_study, least_squares_rate, run_all, write_csv, write_json, ConvergenceTable, Rates, CSV_HEADER,
};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::assembly::ProblemData;
use crate::error::{Error, Result};
use crate::levelset::LevelSetCase;
use crate::mesh::BoundingBox;
use crate::{Point, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseId {
    HalfPlane,
    Circle,
    Annulus,
    Flower,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [CaseId::HalfPlane, CaseId::Circle, CaseId::Annulus, CaseId::Flower];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::HalfPlane => "halfplane",
            CaseId::Circle => "circle",
            CaseId::Annulus => "annulus",
            CaseId::Flower => "flower",
        }
    }

    pub fn level_set(self) -> LevelSetCase {
        match self {
            CaseId::HalfPlane => LevelSetCase::halfplane(0.63),
            CaseId::Circle => LevelSetCase::circle(),
            CaseId::Annulus => LevelSetCase::annulus(),
            CaseId::Flower => LevelSetCase::flower(),
        }
    }

    pub fn bbox(self) -> BoundingBox {
        let half = match self {
            CaseId::Annulus => 1.0,
            _ => 1.3,
        };
        BoundingBox::centered_square(half).expect("positive half width")
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownCase(s.to_string()))
    }
}

/// Exact solution with its gradient and data `f = -Δu`, `g = u`.
///
/// On the half plane the solution is a fixed polynomial of the run's
/// degree, so the discrete space reproduces it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedCase {
    pub id: CaseId,
    pub level_set: LevelSetCase,
    pub bbox: BoundingBox,
    polynomial_degree: usize,
}

impl ManufacturedCase {
    pub fn new(id: CaseId, degree: usize) -> Self {
        Self {
            id,
            level_set: id.level_set(),
            bbox: id.bbox(),
            polynomial_degree: degree.clamp(1, 3),
        }
    }

    pub fn exact(&self, p: &Point) -> f64 {
        let (x, y) = (p.x, p.y);
        match self.id {
            CaseId::HalfPlane => match self.polynomial_degree {
                1 => 1.0 + 2.0 * x - 3.0 * y,
                2 => x * x + 0.5 * x * y + x - y,
                _ => x.powi(3) + x * y * y - 2.0 * y.powi(3) + x * x,
            },
            CaseId::Circle => (PI * (x * x + y * y) / 2.0).cos(),
            CaseId::Annulus => {
                let r = (x * x + y * y).sqrt();
                20.0 * (0.75 - r) * (r - 0.25)
            }
            CaseId::Flower => (PI * x / 2.0).cos() * (PI * y / 2.0).cos(),
        }
    }

    pub fn gradient(&self, p: &Point) -> Vector {
        let (x, y) = (p.x, p.y);
        match self.id {
            CaseId::HalfPlane => match self.polynomial_degree {
                1 => Vector::new(2.0, -3.0),
                2 => Vector::new(2.0 * x + 0.5 * y + 1.0, 0.5 * x - 1.0),
                _ => Vector::new(3.0 * x * x + y * y + 2.0 * x, 2.0 * x * y - 6.0 * y * y),
            },
            CaseId::Circle => {
                let s = -PI * (PI * (x * x + y * y) / 2.0).sin();
                Vector::new(s * x, s * y)
            }
            CaseId::Annulus => {
                let r = (x * x + y * y).sqrt();
                if r == 0.0 {
                    return Vector::zeros();
                }
                let du = 20.0 * (1.0 - 2.0 * r);
                Vector::new(du * x / r, du * y / r)
            }
            CaseId::Flower => {
                let (cx, sx) = ((PI * x / 2.0).cos(), (PI * x / 2.0).sin());
                let (cy, sy) = ((PI * y / 2.0).cos(), (PI * y / 2.0).sin());
                Vector::new(-PI / 2.0 * sx * cy, -PI / 2.0 * cx * sy)
            }
        }
    }

    pub fn source(&self, p: &Point) -> f64 {
        let (x, y) = (p.x, p.y);
        match self.id {
            CaseId::HalfPlane => match self.polynomial_degree {
                1 => 0.0,
                2 => -2.0,
                _ => -(8.0 * x - 12.0 * y + 2.0),
            },
            CaseId::Circle => {
                let r2 = x * x + y * y;
                PI * PI * r2 * (PI * r2 / 2.0).cos() + 2.0 * PI * (PI * r2 / 2.0).sin()
            }
            CaseId::Annulus => {
                let r = (x * x + y * y).sqrt();
                assert!(r > 0.05, "annulus source evaluated near the origin at ({x}, {y})");
                20.0 * (4.0 - 1.0 / r)
            }
            CaseId::Flower => PI * PI / 2.0 * self.exact(p),
        }
    }

    pub fn dirichlet(&self, p: &Point) -> f64 {
        self.exact(p)
    }
}

impl ProblemData for ManufacturedCase {
    fn source(&self, x: &Point) -> f64 {
        ManufacturedCase::source(self, x)
    }

    fn dirichlet(&self, x: &Point) -> f64 {
        ManufacturedCase::dirichlet(self, x)
    }
}
