//! Assembly of the unfitted penalty-free Nitsche system.
//!
//! For trial `u` and test `v` in the discrete space the matrix represents
//!
//! ```text
//! (grad u, grad v)_{Ω_h} - <grad u · n_h, v>_{Γ_h} + <grad v · n_h, u>_{Γ_h}
//!     + <grad v · n_h, T_{1,k}(u)>_{Γ_h} + J_h(u, v)
//! ```
//!
//! and the load `(f, v)_{Ω_h} + <grad v · n_h, g(x + ϱ_h(x) n_h)>_{Γ_h}`.
//! `T_{1,k}(u)(x) = sum_{i=1..k} D^i_{n_h} u(x) ϱ_h(x)^i / i!` transfers the
//! trace from the discrete boundary to the exact one, where `ϱ_h(x)` is the
//! signed distance to the exact boundary along the discrete normal. The
//! ghost penalty is
//!
//! ```text
//! J_h(u, v) = γ_g sum_{F ghost} sum_{l=1..p} h^{2l-1} <[D^l_{n_F} u], [D^l_{n_F} v]>_F.
//! ```

use crate::cut::{CutTopology, ElementClass, SegmentKind};
use crate::error::{Error, Result};
use crate::fe::quadrature::QuadratureRule;
use crate::fe::reference::{ElementMap, Polynomial};
use crate::fe::DiscreteSpace;
use crate::levelset::{find_zero_along, LevelSetCase, RayRootConfig};
use crate::mesh::{signed_area, BackgroundMesh};
use crate::sparse::{SparseMatrix, TripletBuilder};
use crate::{Point, Vector};

/// Source term and Dirichlet data of a boundary value problem.
pub trait ProblemData {
    fn source(&self, x: &Point) -> f64;
    fn dirichlet(&self, x: &Point) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyConfig {
    pub degree: usize,
    /// Order `k` of the boundary Taylor expansion; `0` disables the
    /// correction.
    pub taylor_order: usize,
    pub ghost_penalty: f64,
    /// Exactness of volume quadrature, `2p` when unset.
    pub volume_degree: Option<usize>,
    /// Exactness of boundary quadrature, `2p + 2` when unset.
    pub boundary_degree: Option<usize>,
    pub root: RayRootConfig,
}

pub const DEFAULT_GHOST_PENALTY: f64 = 0.1;

impl AssemblyConfig {
    pub fn new(degree: usize, taylor_order: usize) -> Self {
        Self {
            degree,
            taylor_order,
            ghost_penalty: DEFAULT_GHOST_PENALTY,
            volume_degree: None,
            boundary_degree: None,
            root: RayRootConfig::default(),
        }
    }

    pub fn with_ghost_penalty(mut self, gamma: f64) -> Self {
        self.ghost_penalty = gamma;
        self
    }

    pub fn volume_quadrature_degree(&self) -> usize {
        self.volume_degree.unwrap_or(2 * self.degree)
    }

    pub fn boundary_quadrature_degree(&self) -> usize {
        self.boundary_degree.unwrap_or(2 * self.degree + 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.taylor_order > self.degree {
            return Err(Error::InvalidArgument(format!(
                "Taylor order k = {} exceeds the polynomial degree p = {}",
                self.taylor_order, self.degree
            )));
        }
        if !(self.ghost_penalty >= 0.0) || !self.ghost_penalty.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "ghost penalty parameter must be finite and nonnegative, got {}",
                self.ghost_penalty
            )));
        }
        Ok(())
    }
}

/// `sum_{i=m..k} D^i w(x) ϱ^i / i!` given `derivatives[i - m] = D^i w(x)`.
pub fn taylor_series_value(derivatives: &[f64], first_order: usize, rho: f64) -> f64 {
    let mut sum = 0.0;
    let mut factor = rho.powi(first_order as i32) / factorial(first_order);
    for (offset, d) in derivatives.iter().enumerate() {
        let order = first_order + offset;
        if offset > 0 {
            factor *= rho / order as f64;
        }
        sum += d * factor;
    }
    sum
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Quadrature point on the discrete boundary with its projection onto the
/// exact boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub element: usize,
    pub x: Point,
    pub weight: f64,
    pub normal: Vector,
    /// Signed distance to the exact boundary along `normal`.
    pub rho: f64,
}

impl BoundaryPoint {
    pub fn projected(&self) -> Point {
        self.x + self.normal * self.rho
    }
}

/// Boundary quadrature points, grouped by segment in topology order. Each
/// point's distance to the exact boundary is computed once and shared by
/// the matrix, the load and the error norms.
#[derive(Debug, Clone)]
pub struct BoundaryQuadrature {
    pub points: Vec<BoundaryPoint>,
    /// `points[ranges[s].0..ranges[s].1]` belong to boundary segment `s`.
    pub ranges: Vec<(usize, usize)>,
}

impl BoundaryQuadrature {
    pub fn build(
        mesh: &BackgroundMesh,
        topo: &CutTopology,
        case: &LevelSetCase,
        degree: usize,
        root: &RayRootConfig,
    ) -> Result<Self> {
        let rule = QuadratureRule::segment(degree)?;
        let root = root.with_initial_step(root.initial_step.min(mesh.h * mesh.h));
        let mut points = Vec::new();
        let mut ranges = Vec::new();
        for seg in topo.boundary_segments() {
            let start = points.len();
            for (q, w) in rule.iter() {
                let x = seg.point(q[0]);
                let rho = match seg.kind {
                    SegmentKind::Interface => find_zero_along(case, &x, &seg.normal, &root).map_err(|e| {
                        Error::Assembly {
                            element: seg.element,
                            source: Box::new(e),
                        }
                    })?,
                    SegmentKind::Fitted => 0.0,
                };
                points.push(BoundaryPoint {
                    element: seg.element,
                    x,
                    weight: w * seg.length,
                    normal: seg.normal,
                    rho,
                });
            }
            ranges.push((start, points.len()));
        }
        Ok(Self { points, ranges })
    }

    pub fn max_abs_rho(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.rho.abs()))
    }
}

#[derive(Debug, Clone)]
pub struct AssembledSystem {
    /// `A_h + J_h`.
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// `J_h` alone.
    pub ghost: SparseMatrix,
    pub ndofs: usize,
}

/// Volume and boundary quadrature point with tabulated basis data.
pub(crate) struct PointData {
    pub(crate) weight: f64,
    pub(crate) values: Vec<f64>,
    pub(crate) gradients: Vec<Vector>,
}

/// Basis values and physical gradients at every volume quadrature point of
/// `K ∩ Ω_h`, with the physical point.
pub(crate) fn volume_points(
    mesh: &BackgroundMesh,
    topo: &CutTopology,
    space: &DiscreteSpace,
    rule: &QuadratureRule,
    t: usize,
) -> Vec<(Point, PointData)> {
    let element = space.element();
    let parent = ElementMap::new(&mesh.triangle_points(t));
    let pieces = match topo.class(t) {
        ElementClass::Inside => vec![mesh.triangle_points(t)],
        ElementClass::Cut => topo.physical_part(mesh, t),
        ElementClass::Outside => Vec::new(),
    };
    let mut out = Vec::with_capacity(pieces.len() * rule.len());
    for piece in pieces {
        let area = signed_area(&piece[0], &piece[1], &piece[2]);
        if area <= 0.0 {
            continue;
        }
        let sub = ElementMap::new(&piece);
        for (q, w) in rule.iter() {
            let x = sub.to_physical(q);
            let xi = parent.to_reference(&x);
            out.push((
                x,
                PointData {
                    weight: w * 2.0 * area,
                    values: element.values(&xi),
                    gradients: element.physical_gradients(&parent, &xi),
                },
            ));
        }
    }
    out
}

fn scatter(builder: &mut TripletBuilder, dofs: &[usize], local: &[f64]) {
    let n = dofs.len();
    for (a, &i) in dofs.iter().enumerate() {
        for (b, &j) in dofs.iter().enumerate() {
            let v = local[a * n + b];
            if v != 0.0 {
                builder.push(i, j, v);
            }
        }
    }
}

/// Volume stiffness and the two antisymmetric Nitsche terms, with the load
/// vector.
pub fn assemble_bulk<P: ProblemData>(
    mesh: &BackgroundMesh,
    topo: &CutTopology,
    space: &DiscreteSpace,
    boundary: &BoundaryQuadrature,
    data: &P,
    cfg: &AssemblyConfig,
) -> Result<(SparseMatrix, Vec<f64>)> {
    let n = space.num_dofs();
    let nloc = space.num_local();
    let rule = QuadratureRule::triangle(cfg.volume_quadrature_degree())?;
    let mut builder = TripletBuilder::with_capacity(n, n, space.active().len() * nloc * nloc);
    let mut rhs = vec![0.0; n];
    let mut local = vec![0.0; nloc * nloc];

    for &t in space.active() {
        let dofs = space.dofs(t).unwrap();
        local.iter_mut().for_each(|v| *v = 0.0);
        for (x, p) in volume_points(mesh, topo, space, &rule, t) {
            let f = data.source(&x);
            for a in 0..nloc {
                rhs[dofs[a]] += p.weight * f * p.values[a];
                for b in 0..nloc {
                    local[a * nloc + b] += p.weight * p.gradients[a].dot(&p.gradients[b]);
                }
            }
        }
        scatter(&mut builder, dofs, &local);
    }

    let element = space.element();
    for &(start, end) in &boundary.ranges {
        let Some(first) = boundary.points.get(start) else {
            continue;
        };
        let t = first.element;
        let dofs = space.dofs(t).ok_or_else(|| Error::Assembly {
            element: t,
            source: Box::new(Error::InvalidArgument("boundary segment on inactive element".into())),
        })?;
        let map = ElementMap::new(&mesh.triangle_points(t));
        local.iter_mut().for_each(|v| *v = 0.0);
        for bp in &boundary.points[start..end] {
            let xi = map.to_reference(&bp.x);
            let values = element.values(&xi);
            let dn: Vec<f64> = element
                .physical_gradients(&map, &xi)
                .iter()
                .map(|g| g.dot(&bp.normal))
                .collect();
            let g = data.dirichlet(&bp.projected());
            for a in 0..nloc {
                rhs[dofs[a]] += bp.weight * dn[a] * g;
                for b in 0..nloc {
                    local[a * nloc + b] += bp.weight * (dn[a] * values[b] - dn[b] * values[a]);
                }
            }
        }
        scatter(&mut builder, dofs, &local);
    }

    Ok((builder.build(), rhs))
}

/// `<grad v · n_h, T_{1,k}(u)>_{Γ_h}`; empty for `k = 0`.
pub fn assemble_taylor_block(
    mesh: &BackgroundMesh,
    space: &DiscreteSpace,
    boundary: &BoundaryQuadrature,
    taylor_order: usize,
) -> SparseMatrix {
    let n = space.num_dofs();
    let nloc = space.num_local();
    let mut builder = TripletBuilder::new(n, n);
    if taylor_order == 0 {
        return builder.build();
    }
    let element = space.element();
    let mut local = vec![0.0; nloc * nloc];
    for &(start, end) in &boundary.ranges {
        let Some(first) = boundary.points.get(start) else {
            continue;
        };
        if boundary.points[start..end].iter().all(|p| p.rho == 0.0) {
            continue;
        }
        let t = first.element;
        let dofs = space.dofs(t).unwrap();
        let map = ElementMap::new(&mesh.triangle_points(t));
        let derivatives: Vec<Vec<Polynomial>> = (1..=taylor_order)
            .map(|i| element.directional_derivatives(&map, &first.normal, i))
            .collect();
        local.iter_mut().for_each(|v| *v = 0.0);
        let mut column = vec![0.0; taylor_order];
        for bp in &boundary.points[start..end] {
            let xi = map.to_reference(&bp.x);
            let dn = &derivatives[0];
            for b in 0..nloc {
                for (i, d) in derivatives.iter().enumerate() {
                    column[i] = d[b].eval(xi[0], xi[1]);
                }
                let taylor = taylor_series_value(&column, 1, bp.rho);
                if taylor == 0.0 {
                    continue;
                }
                for a in 0..nloc {
                    local[a * nloc + b] += bp.weight * dn[a].eval(xi[0], xi[1]) * taylor;
                }
            }
        }
        scatter(&mut builder, dofs, &local);
    }
    builder.build()
}

/// Ghost penalty over the faces of the cut band.
pub fn assemble_ghost_penalty(
    mesh: &BackgroundMesh,
    topo: &CutTopology,
    space: &DiscreteSpace,
    cfg: &AssemblyConfig,
) -> Result<SparseMatrix> {
    let n = space.num_dofs();
    let nloc = space.num_local();
    let p = space.degree();
    let mut builder = TripletBuilder::new(n, n);
    if cfg.ghost_penalty == 0.0 {
        return Ok(builder.build());
    }
    let rule = QuadratureRule::segment(2 * p)?;
    let element = space.element();
    let mut local = vec![0.0; 4 * nloc * nloc];
    let mut dofs = vec![0usize; 2 * nloc];
    let mut jump = vec![0.0; 2 * nloc];
    for &f in &topo.ghost_faces {
        let face = &mesh.faces[f];
        let (k1, k2) = (face.owner(), face.neighbor().expect("ghost faces are interior"));
        let (d1, d2) = match (space.dofs(k1), space.dofs(k2)) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        dofs[..nloc].copy_from_slice(d1);
        dofs[nloc..].copy_from_slice(d2);
        let normal = mesh.face_normal(f);
        let (m1, m2) = (
            ElementMap::new(&mesh.triangle_points(k1)),
            ElementMap::new(&mesh.triangle_points(k2)),
        );
        let [va, vb] = face.vertices;
        let (pa, pb) = (mesh.vertices[va], mesh.vertices[vb]);
        let length = (pb - pa).norm();
        local.iter_mut().for_each(|v| *v = 0.0);
        for l in 1..=p {
            let scale = cfg.ghost_penalty * mesh.h.powi(2 * l as i32 - 1);
            let q1 = element.directional_derivatives(&m1, &normal, l);
            let q2 = element.directional_derivatives(&m2, &normal, l);
            for (q, w) in rule.iter() {
                let x = pa + (pb - pa) * q[0];
                let (x1, x2) = (m1.to_reference(&x), m2.to_reference(&x));
                // normal points from k1 into k2, so k1 is the "+" side
                for a in 0..nloc {
                    jump[a] = q1[a].eval(x1[0], x1[1]);
                    jump[nloc + a] = -q2[a].eval(x2[0], x2[1]);
                }
                let weight = scale * w * length;
                let m = 2 * nloc;
                for a in 0..m {
                    let ja = weight * jump[a];
                    for b in a..m {
                        local[a * m + b] += ja * jump[b];
                    }
                }
            }
        }
        let m = 2 * nloc;
        for a in 0..m {
            for b in 0..a {
                local[a * m + b] = local[b * m + a];
            }
        }
        scatter(&mut builder, &dofs, &local);
    }
    // dofs shared by both elements are summed in different orders for
    // (i, j) and (j, i); mirror the upper triangle to keep J = J^T exactly
    let summed = builder.build();
    let mut mirrored = TripletBuilder::with_capacity(n, n, summed.nnz());
    for (i, j, v) in summed.iter().filter(|(i, j, _)| i <= j) {
        mirrored.push(i, j, v);
        if i != j {
            mirrored.push(j, i, v);
        }
    }
    Ok(mirrored.build())
}

/// The full system `A_h + J_h` and load `L_h`.
pub fn assemble_system<P: ProblemData>(
    mesh: &BackgroundMesh,
    topo: &CutTopology,
    space: &DiscreteSpace,
    case: &LevelSetCase,
    data: &P,
    cfg: &AssemblyConfig,
) -> Result<AssembledSystem> {
    cfg.validate()?;
    let boundary = BoundaryQuadrature::build(mesh, topo, case, cfg.boundary_quadrature_degree(), &cfg.root)?;
    assemble_with_boundary(mesh, topo, space, &boundary, data, cfg)
}

/// As [`assemble_system`], reusing precomputed boundary quadrature.
pub fn assemble_with_boundary<P: ProblemData>(
    mesh: &BackgroundMesh,
    topo: &CutTopology,
    space: &DiscreteSpace,
    boundary: &BoundaryQuadrature,
    data: &P,
    cfg: &AssemblyConfig,
) -> Result<AssembledSystem> {
    cfg.validate()?;
    let (bulk, rhs) = assemble_bulk(mesh, topo, space, boundary, data, cfg)?;
    let taylor = assemble_taylor_block(mesh, space, boundary, cfg.taylor_order);
    let ghost = assemble_ghost_penalty(mesh, topo, space, cfg)?;
    let matrix = bulk.add(&taylor).add(&ghost);
    Ok(AssembledSystem {
        ndofs: space.num_dofs(),
        matrix,
        rhs,
        ghost,
    })
}
