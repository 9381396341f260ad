use serde::{Deserialize, Serialize};

use crate::analysis::ManufacturedCase;
use crate::assembly::{volume_points, BoundaryQuadrature};
use crate::cut::CutTopology;
use crate::error::Result;
use crate::fe::quadrature::QuadratureRule;
use crate::fe::reference::ElementMap;
use crate::fe::DiscreteSpace;
use crate::mesh::BackgroundMesh;
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    /// `||u - u_h||_{L2(Ω_h)}`.
    pub l2: f64,
    /// `||grad(u - u_h)||_{L2(Ω_h)}`.
    pub h1_semi: f64,
    /// `(|grad e|^2 + h^-1 |e|^2_{Γ_h} + J_h(π_h u - u_h, π_h u - u_h))^{1/2}`
    /// with `e = u - u_h`. The ghost term is evaluated on the discrete
    /// difference `π_h u - u_h`, since the exact solution has no jumps.
    pub triple: f64,
}

/// Errors of the discrete solution `coeffs` against the exact solution,
/// integrated over `Ω_h` with quadrature of exactness `2p + 2`.
pub fn compute_errors(
    mesh: &BackgroundMesh,
    topo: &CutTopology,
    space: &DiscreteSpace,
    coeffs: &[f64],
    case: &ManufacturedCase,
    boundary: &BoundaryQuadrature,
    ghost: &SparseMatrix,
) -> Result<ErrorNorms> {
    let rule = QuadratureRule::triangle(2 * space.degree() + 2)?;
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for &t in space.active() {
        let dofs = space.dofs(t).unwrap();
        for (x, p) in volume_points(mesh, topo, space, &rule, t) {
            let mut uh = 0.0;
            let mut guh = crate::Vector::zeros();
            for (a, &d) in dofs.iter().enumerate() {
                uh += coeffs[d] * p.values[a];
                guh += p.gradients[a] * coeffs[d];
            }
            l2 += p.weight * (case.exact(&x) - uh).powi(2);
            h1 += p.weight * (case.gradient(&x) - guh).norm_squared();
        }
    }

    let element = space.element();
    let mut trace = 0.0;
    for bp in &boundary.points {
        let dofs = space.dofs(bp.element).unwrap();
        let map = ElementMap::new(&mesh.triangle_points(bp.element));
        let values = element.values(&map.to_reference(&bp.x));
        let uh: f64 = values.iter().zip(dofs).map(|(v, d)| v * coeffs[*d]).sum();
        trace += bp.weight * (case.exact(&bp.x) - uh).powi(2);
    }

    let interpolant = space.interpolate(|x| case.exact(x));
    let diff: Vec<f64> = interpolant.iter().zip(coeffs).map(|(a, b)| a - b).collect();
    let jump = ghost.quadratic_form(&diff).max(0.0);

    Ok(ErrorNorms {
        l2: l2.sqrt(),
        h1_semi: h1.sqrt(),
        triple: (h1 + trace / mesh.h + jump).sqrt(),
    })
}
