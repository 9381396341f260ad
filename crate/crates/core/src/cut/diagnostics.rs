use serde::{Deserialize, Serialize};

use crate::cut::CutTopology;
use crate::error::Result;
use crate::fe::quadrature::gauss_legendre_unit;
use crate::levelset::{find_zero_along, LevelSetCase, RayRootConfig};
use crate::mesh::BackgroundMesh;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryDiagnostics {
    pub area_omega_h: f64,
    pub length_gamma_h: f64,
    /// Largest distance along the discrete normal from the interface to the
    /// exact boundary, sampled at three Gauss points per segment.
    pub delta_h: f64,
}

pub fn geometry_diagnostics(
    mesh: &BackgroundMesh,
    topo: &CutTopology,
    case: &LevelSetCase,
    cfg: &RayRootConfig,
) -> Result<GeometryDiagnostics> {
    let (nodes, _) = gauss_legendre_unit(3);
    let mut delta_h: f64 = 0.0;
    for seg in &topo.segments {
        for s in &nodes {
            let rho = find_zero_along(case, &seg.point(*s), &seg.normal, cfg)?;
            delta_h = delta_h.max(rho.abs());
        }
    }
    Ok(GeometryDiagnostics {
        area_omega_h: topo.area(mesh),
        length_gamma_h: topo.boundary_length(),
        delta_h,
    })
}
