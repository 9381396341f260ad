//! Quadrature on the reference triangle and the unit segment.
//!
//! Segment rules are Gauss-Legendre on `[0, 1]`. Triangle rules are
//! collapsed (Duffy) products of Gauss-Legendre rules on the unit square,
//! which have positive weights and interior points for every degree.

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureDomain {
    /// Reference triangle with vertices `(0,0)`, `(1,0)`, `(0,1)`.
    Triangle,
    /// Unit segment `[0, 1]`, points stored as `[s, 0]`.
    Segment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub domain: QuadratureDomain,
    pub degree: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(domain: QuadratureDomain, degree: usize) -> Result<Self> {
        match domain {
            QuadratureDomain::Triangle => Self::triangle(degree),
            QuadratureDomain::Segment => Self::segment(degree),
        }
    }

    pub fn segment(degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::UnsupportedQuadrature(degree));
        }
        let (nodes, weights) = gauss_legendre_unit(degree / 2 + 1);
        Ok(Self {
            domain: QuadratureDomain::Segment,
            degree,
            points: nodes.into_iter().map(|s| [s, 0.0]).collect(),
            weights,
        })
    }

    pub fn triangle(degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::UnsupportedQuadrature(degree));
        }
        // (s, t) -> (s, (1 - s) t) has Jacobian (1 - s), which raises the
        // polynomial degree in s by one
        let (s_nodes, s_weights) = gauss_legendre_unit(degree.div_ceil(2) + 1);
        let (t_nodes, t_weights) = gauss_legendre_unit(degree / 2 + 1);
        let mut points = Vec::with_capacity(s_nodes.len() * t_nodes.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for (s, ws) in s_nodes.iter().zip(&s_weights) {
            for (t, wt) in t_nodes.iter().zip(&t_weights) {
                points.push([*s, (1.0 - s) * t]);
                weights.push(ws * wt * (1.0 - s));
            }
        }
        Ok(Self {
            domain: QuadratureDomain::Triangle,
            degree,
            points,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; 2], f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
pub fn gauss_legendre_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(m);
    (
        x.iter().map(|xi| 0.5 * (xi + 1.0)).collect(),
        w.iter().map(|wi| 0.5 * wi).collect(),
    )
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`, by Newton
/// iteration on the Legendre polynomial from Chebyshev initial guesses.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1, "Gauss-Legendre rule needs at least one point");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
