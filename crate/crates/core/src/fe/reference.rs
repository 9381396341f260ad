//! Lagrange elements of degree 1 to 3 on the reference triangle.
//!
//! Basis functions are stored as dense monomial expansions in the reference
//! coordinates, so values, gradients and directional derivatives of any
//! order are exact polynomial evaluations.

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};
use crate::{Point, Vector};

pub const MAX_ELEMENT_DEGREE: usize = 3;

/// Bivariate polynomial `sum c_(a,b) xi^a eta^b` with `a + b <= degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    degree: usize,
    coeffs: Vec<f64>,
}

/// Position of the monomial `xi^a eta^b` in the graded ordering
/// `1, xi, eta, xi^2, xi eta, eta^2, ...`.
fn monomial_index(a: usize, b: usize) -> usize {
    let total = a + b;
    total * (total + 1) / 2 + b
}

fn monomial_count(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

fn monomials(degree: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=degree).flat_map(|total| (0..=total).map(move |b| (total - b, b)))
}

impl Polynomial {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![0.0; monomial_count(degree)],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficient(&self, a: usize, b: usize) -> f64 {
        if a + b > self.degree {
            0.0
        } else {
            self.coeffs[monomial_index(a, b)]
        }
    }

    pub fn eval(&self, xi: f64, eta: f64) -> f64 {
        // Horner in eta for each power of xi would be tidier; degree <= 3
        // keeps the direct sum cheap enough
        let mut sum = 0.0;
        for (k, (a, b)) in monomials(self.degree).enumerate() {
            let c = self.coeffs[k];
            if c != 0.0 {
                sum += c * xi.powi(a as i32) * eta.powi(b as i32);
            }
        }
        sum
    }

    pub fn d_xi(&self) -> Self {
        let mut out = Self::zero(self.degree);
        for (k, (a, b)) in monomials(self.degree).enumerate() {
            if a > 0 {
                out.coeffs[monomial_index(a - 1, b)] += a as f64 * self.coeffs[k];
            }
        }
        out
    }

    pub fn d_eta(&self) -> Self {
        let mut out = Self::zero(self.degree);
        for (k, (a, b)) in monomials(self.degree).enumerate() {
            if b > 0 {
                out.coeffs[monomial_index(a, b - 1)] += b as f64 * self.coeffs[k];
            }
        }
        out
    }

    /// Derivative along the reference-space direction `dir`.
    pub fn directional(&self, dir: &Vector) -> Self {
        let dx = self.d_xi();
        let dy = self.d_eta();
        Self {
            degree: self.degree,
            coeffs: dx
                .coeffs
                .iter()
                .zip(&dy.coeffs)
                .map(|(a, b)| dir.x * a + dir.y * b)
                .collect(),
        }
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
        self
    }
}

/// Affine map from the reference triangle onto a physical triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementMap {
    pub origin: Point,
    pub jacobian: Matrix2<f64>,
    pub inverse: Matrix2<f64>,
    pub det: f64,
}

impl ElementMap {
    pub fn new(p: &[Point; 3]) -> Self {
        let jacobian = Matrix2::from_columns(&[p[1] - p[0], p[2] - p[0]]);
        let det = jacobian.determinant();
        let inverse = jacobian
            .try_inverse()
            .expect("element map of a degenerate triangle");
        Self {
            origin: p[0],
            jacobian,
            inverse,
            det,
        }
    }

    pub fn to_physical(&self, xi: &[f64; 2]) -> Point {
        self.origin + self.jacobian * Vector::new(xi[0], xi[1])
    }

    pub fn to_reference(&self, x: &Point) -> [f64; 2] {
        let r = self.inverse * (x - self.origin);
        [r.x, r.y]
    }

    /// Physical gradient from a reference gradient.
    pub fn push_gradient(&self, ref_grad: &Vector) -> Vector {
        self.inverse.transpose() * ref_grad
    }

    /// Reference direction whose derivative equals the physical derivative
    /// along `d`.
    pub fn pull_direction(&self, d: &Vector) -> Vector {
        self.inverse * d
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceElement {
    degree: usize,
    nodes: Vec<[f64; 2]>,
    basis: Vec<Polynomial>,
    grad_xi: Vec<Polynomial>,
    grad_eta: Vec<Polynomial>,
}

/// Local edges as pairs of local vertices, matching the face order of the
/// background mesh.
pub const LOCAL_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

const REFERENCE_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

impl ReferenceElement {
    /// Node layout: the three vertices, then `degree - 1` equispaced nodes on
    /// each local edge (ordered from its first to its second vertex), then
    /// the centroid for cubics.
    pub fn lagrange(degree: usize) -> Result<Self> {
        if degree == 0 || degree > MAX_ELEMENT_DEGREE {
            return Err(Error::InvalidArgument(format!(
                "Lagrange degree must be in 1..={MAX_ELEMENT_DEGREE}, got {degree}"
            )));
        }
        let mut nodes: Vec<[f64; 2]> = REFERENCE_VERTICES.to_vec();
        for [a, b] in LOCAL_EDGES {
            let (pa, pb) = (REFERENCE_VERTICES[a], REFERENCE_VERTICES[b]);
            for j in 1..degree {
                let t = j as f64 / degree as f64;
                nodes.push([pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]);
            }
        }
        if degree == 3 {
            nodes.push([1.0 / 3.0, 1.0 / 3.0]);
        }
        let n = monomial_count(degree);
        debug_assert_eq!(nodes.len(), n);

        let vandermonde = DMatrix::from_fn(n, n, |i, k| {
            let (a, b) = monomials(degree).nth(k).unwrap();
            nodes[i][0].powi(a as i32) * nodes[i][1].powi(b as i32)
        });
        let coeffs = vandermonde
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("singular Lagrange Vandermonde matrix".into()))?;
        let basis: Vec<Polynomial> = (0..n)
            .map(|j| Polynomial {
                degree,
                coeffs: (0..n).map(|k| coeffs[(k, j)]).collect(),
            })
            .collect();
        let grad_xi = basis.iter().map(Polynomial::d_xi).collect();
        let grad_eta = basis.iter().map(Polynomial::d_eta).collect();
        Ok(Self {
            degree,
            nodes,
            basis,
            grad_xi,
            grad_eta,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_basis(&self) -> usize {
        self.basis.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn basis(&self) -> &[Polynomial] {
        &self.basis
    }

    pub fn values(&self, xi: &[f64; 2]) -> Vec<f64> {
        self.basis.iter().map(|p| p.eval(xi[0], xi[1])).collect()
    }

    pub fn values_into(&self, xi: &[f64; 2], out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.basis) {
            *o = p.eval(xi[0], xi[1]);
        }
    }

    /// Reference gradients.
    pub fn gradients(&self, xi: &[f64; 2]) -> Vec<Vector> {
        self.grad_xi
            .iter()
            .zip(&self.grad_eta)
            .map(|(gx, gy)| Vector::new(gx.eval(xi[0], xi[1]), gy.eval(xi[0], xi[1])))
            .collect()
    }

    /// Physical gradients on the element described by `map`.
    pub fn physical_gradients(&self, map: &ElementMap, xi: &[f64; 2]) -> Vec<Vector> {
        self.gradients(xi)
            .iter()
            .map(|g| map.push_gradient(g))
            .collect()
    }

    /// Polynomials of the order-`order` derivative of every basis function
    /// along the physical unit direction `d`. Orders above the element degree
    /// give zero polynomials.
    pub fn directional_derivatives(&self, map: &ElementMap, d: &Vector, order: usize) -> Vec<Polynomial> {
        let dir = map.pull_direction(d);
        self.basis
            .iter()
            .map(|p| {
                if order > self.degree {
                    return Polynomial::zero(self.degree);
                }
                (0..order).fold(p.clone(), |acc, _| acc.directional(&dir))
            })
            .collect()
    }

    /// Values of the order-`order` directional derivatives at one point.
    pub fn eval_directional(&self, map: &ElementMap, d: &Vector, order: usize, xi: &[f64; 2]) -> Vec<f64> {
        self.directional_derivatives(map, d, order)
            .iter()
            .map(|p| p.eval(xi[0], xi[1]))
            .collect()
    }
}
