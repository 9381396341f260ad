//! Analytic level sets and ray root finding.
//!
//! All level sets are negative inside the physical domain and positive
//! outside. The discrete boundary is reconstructed from nodal samples of
//! these functions; the exact boundary is only ever reached through
//! [`find_zero_along`], which locates the zero of `phi(x + s d)` closest to
//! `s = 0`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::{Point, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelSetCase {
    /// `phi = x - offset`.
    HalfPlane { offset: f64 },
    /// `phi = R - radius`.
    Circle { radius: f64 },
    /// `phi = (R - outer)(R - inner)`.
    Annulus { inner: f64, outer: f64 },
    /// `phi = (R^2 - r(theta)) (R^2 - inner^2)` with
    /// `r(theta) = base + amplitude sin(frequency theta)` and
    /// `theta = arctan(x / y)`.
    ///
    /// Note that `R^2` is compared against `r(theta)` itself, not its square,
    /// and `theta` is measured from the y axis. Both follow the published
    /// definition of this test shape.
    Flower {
        base: f64,
        amplitude: f64,
        frequency: f64,
        inner: f64,
    },
}

impl LevelSetCase {
    pub fn halfplane(offset: f64) -> Self {
        Self::HalfPlane { offset }
    }

    pub fn circle() -> Self {
        Self::Circle { radius: 1.0 }
    }

    pub fn annulus() -> Self {
        Self::Annulus {
            inner: 0.25,
            outer: 0.75,
        }
    }

    pub fn flower() -> Self {
        Self::Flower {
            base: 0.5,
            amplitude: 0.1,
            frequency: 8.0,
            inner: 1.0 / 6.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::HalfPlane { .. } => "halfplane",
            Self::Circle { .. } => "circle",
            Self::Annulus { .. } => "annulus",
            Self::Flower { .. } => "flower",
        }
    }

    pub fn phi(&self, x: &Point) -> f64 {
        match *self {
            Self::HalfPlane { offset } => x.x - offset,
            Self::Circle { radius } => x.coords.norm() - radius,
            Self::Annulus { inner, outer } => {
                let r = x.coords.norm();
                (r - outer) * (r - inner)
            }
            Self::Flower {
                base,
                amplitude,
                frequency,
                inner,
            } => {
                let r2 = x.coords.norm_squared();
                let r_theta = base + amplitude * (frequency * flower_angle(x)).sin();
                (r2 - r_theta) * (r2 - inner * inner)
            }
        }
    }

    pub fn grad(&self, x: &Point) -> Result<Vector> {
        match *self {
            Self::HalfPlane { .. } => Ok(Vector::new(1.0, 0.0)),
            Self::Circle { .. } => {
                let r = x.coords.norm();
                if r == 0.0 {
                    return Err(singular(x, "distance to the centre is not differentiable at the origin"));
                }
                Ok(x.coords / r)
            }
            Self::Annulus { inner, outer } => {
                let r = x.coords.norm();
                if r == 0.0 {
                    return Err(singular(x, "radial level set is not differentiable at the origin"));
                }
                Ok(x.coords / r * (2.0 * r - inner - outer))
            }
            Self::Flower { .. } => {
                let step = 1e-6 * x.coords.norm().max(1.0);
                let ex = Vector::new(step, 0.0);
                let ey = Vector::new(0.0, step);
                Ok(Vector::new(
                    (self.phi(&(x + ex)) - self.phi(&(x - ex))) / (2.0 * step),
                    (self.phi(&(x + ey)) - self.phi(&(x - ey))) / (2.0 * step),
                ))
            }
        }
    }
}

/// `arctan(x / y)` with `theta = 0` on the x axis (including the origin).
fn flower_angle(x: &Point) -> f64 {
    if x.y == 0.0 {
        0.0
    } else {
        (x.x / x.y).atan()
    }
}

fn singular(x: &Point, reason: &'static str) -> Error {
    Error::SingularGradient {
        x: x.x,
        y: x.y,
        reason,
    }
}

impl fmt::Display for LevelSetCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LevelSetCase {
    type Err = Error;

    /// Parses a case name with its default parameters. The half plane uses
    /// the offset `0.63`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "halfplane" => Ok(Self::halfplane(0.63)),
            "circle" => Ok(Self::circle()),
            "annulus" => Ok(Self::annulus()),
            "flower" => Ok(Self::flower()),
            other => Err(Error::UnknownCase(other.to_string())),
        }
    }
}

/// Search parameters for [`find_zero_along`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayRootConfig {
    /// Largest admissible `|s|`.
    pub smax: f64,
    /// Absolute tolerance on `|phi|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Half-width of the first symmetric bracket; callers use `h^2`.
    pub initial_step: f64,
}

impl Default for RayRootConfig {
    fn default() -> Self {
        Self {
            smax: 0.25,
            tol: 1e-12,
            max_iter: 200,
            initial_step: 1e-3,
        }
    }
}

impl RayRootConfig {
    pub fn with_initial_step(mut self, step: f64) -> Self {
        self.initial_step = step;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.smax > 0.0) || !(self.tol > 0.0) || !(self.initial_step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ray root search needs positive smax, tol and initial step, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Signed step `s` such that `phi(x + s d) = 0` to within `cfg.tol`.
///
/// Brackets are grown symmetrically around `s = 0`, doubling from
/// `cfg.initial_step` up to `cfg.smax`, and the first sign change found is
/// refined by bisection safeguarded Newton iterations. When sign changes
/// appear on both sides at the same bracket size the root of smaller
/// magnitude wins.
pub fn find_zero_along(case: &LevelSetCase, x: &Point, d: &Vector, cfg: &RayRootConfig) -> Result<f64> {
    cfg.validate()?;
    if (d.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "ray direction must be a unit vector, |d| = {}",
            d.norm()
        )));
    }
    let f = |s: f64| case.phi(&(x + d * s));
    let f0 = f(0.0);
    if f0.abs() <= cfg.tol {
        return Ok(0.0);
    }

    let mut inner = 0.0;
    let mut outer = cfg.initial_step.min(cfg.smax);
    loop {
        let fp = f(outer);
        let fm = f(-outer);
        let mut best: Option<f64> = None;
        for (sign, fo) in [(1.0, fp), (-1.0, fm)] {
            if fo.abs() <= cfg.tol || fo.signum() != f0.signum() {
                let fi = if inner == 0.0 { f0 } else { f(sign * inner) };
                let root = refine(case, x, d, cfg, sign * inner, fi, sign * outer, fo);
                if best.is_none_or(|b| root.abs() < b.abs()) {
                    best = Some(root);
                }
            }
        }
        if let Some(root) = best {
            return Ok(root);
        }
        if outer >= cfg.smax {
            return Err(Error::NoIntersection {
                x: x.x,
                y: x.y,
                smax: cfg.smax,
            });
        }
        inner = outer;
        outer = (2.0 * outer).min(cfg.smax);
    }
}

/// Root of `phi(x + s d)` in the bracket `[a, b]` (in either order).
#[allow(clippy::too_many_arguments)]
fn refine(
    case: &LevelSetCase,
    x: &Point,
    d: &Vector,
    cfg: &RayRootConfig,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
) -> f64 {
    if fa.abs() <= cfg.tol {
        return a;
    }
    if fb.abs() <= cfg.tol {
        return b;
    }
    let (mut lo, mut flo, mut hi) = if a < b { (a, fa, b) } else { (b, fb, a) };
    let mut s = if fa.abs() < fb.abs() { a } else { b };
    for _ in 0..cfg.max_iter {
        let p = x + d * s;
        let fs = case.phi(&p);
        if fs.abs() <= cfg.tol {
            return s;
        }
        if fs.signum() == flo.signum() {
            lo = s;
            flo = fs;
        } else {
            hi = s;
        }
        if hi - lo <= 4.0 * f64::EPSILON * s.abs().max(1e-300) {
            return s;
        }
        let newton = case
            .grad(&p)
            .ok()
            .map(|g| g.dot(d))
            .filter(|slope| *slope != 0.0 && slope.is_finite())
            .map(|slope| s - fs / slope);
        s = match newton {
            Some(candidate) if candidate > lo && candidate < hi => candidate,
            _ => 0.5 * (lo + hi),
        };
    }
    s
}
