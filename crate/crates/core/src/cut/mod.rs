//! Cut-cell topology of the discrete domain.
//!
//! The discrete domain is `{ I_h phi < 0 }` where `I_h phi` is the piecewise
//! linear nodal interpolant of the level set on the background mesh. On a
//! cut element it is bounded by a single straight segment, and its physical
//! part is a triangle or a quadrilateral.

mod diagnostics;
mod patch;

pub use diagnostics::{geometry_diagnostics, GeometryDiagnostics};
pub use patch::{build_patches, interface_chains, patch_xi, Patch, DEFAULT_CORE_SIZE};

use crate::error::Result;
use crate::fe::reference::LOCAL_EDGES;
use crate::levelset::LevelSetCase;
use crate::mesh::{signed_area, BackgroundMesh};
use crate::{Point, Vector};

/// Relative threshold (times `h`) below which nodal values are snapped to
/// the inside.
pub const SNAP_TOLERANCE: f64 = 1e-12;

/// Relative length (times `h`) below which an interface segment is
/// considered degenerate.
pub const DEGENERATE_LENGTH: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementClass {
    Inside,
    Outside,
    Cut,
}

impl ElementClass {
    pub fn from_values(v: &[f64; 3]) -> Self {
        let negative = v.iter().filter(|x| **x < 0.0).count();
        match negative {
            3 => Self::Inside,
            0 => Self::Outside,
            _ => Self::Cut,
        }
    }

    pub fn is_active(self) -> bool {
        !matches!(self, Self::Outside)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    /// Piece of the reconstructed interface inside a cut element.
    Interface,
    /// Piece of the background mesh boundary lying in the discrete domain.
    /// The exact boundary coincides with it, so no correction applies.
    Fitted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySegment {
    pub element: usize,
    pub endpoints: [Point; 2],
    /// Exterior unit normal, constant along the segment.
    pub normal: Vector,
    pub length: f64,
    pub kind: SegmentKind,
    /// Local edges of `element` carrying the endpoints (interface only).
    pub local_edges: [usize; 2],
}

impl BoundarySegment {
    pub fn point(&self, s: f64) -> Point {
        self.endpoints[0] + (self.endpoints[1] - self.endpoints[0]) * s
    }
}

/// Nodal values `phi(x_i)`, with values of magnitude below
/// `SNAP_TOLERANCE * h` moved to `-SNAP_TOLERANCE * h`.
pub fn nodal_values(mesh: &BackgroundMesh, case: &LevelSetCase) -> Vec<f64> {
    let snap = SNAP_TOLERANCE * mesh.h;
    mesh.vertices
        .iter()
        .map(|x| {
            let v = case.phi(x);
            if v.abs() < snap {
                -snap
            } else {
                v
            }
        })
        .collect()
}

pub fn element_values(mesh: &BackgroundMesh, values: &[f64], t: usize) -> [f64; 3] {
    mesh.triangles[t].map(|v| values[v])
}

/// Element classes and snapped nodal values.
pub fn classify_elements(mesh: &BackgroundMesh, case: &LevelSetCase) -> (Vec<ElementClass>, Vec<f64>) {
    let values = nodal_values(mesh, case);
    let classes = (0..mesh.num_triangles())
        .map(|t| ElementClass::from_values(&element_values(mesh, &values, t)))
        .collect();
    (classes, values)
}

/// Gradient of the linear interpolant of `v` on the triangle `p`.
pub fn linear_gradient(p: &[Point; 3], v: &[f64; 3]) -> Vector {
    let e1 = p[1] - p[0];
    let e2 = p[2] - p[0];
    let det = e1.x * e2.y - e1.y * e2.x;
    let d1 = v[1] - v[0];
    let d2 = v[2] - v[0];
    Vector::new((d1 * e2.y - d2 * e1.y) / det, (d2 * e1.x - d1 * e2.x) / det)
}

/// Zero of the linear interpolant on the edge from `a` to `b`.
fn edge_zero(pa: &Point, pb: &Point, va: f64, vb: f64) -> Point {
    let t = va / (va - vb);
    pa + (pb - pa) * t
}

/// Interface segment of a cut triangle with vertex values `v`, or `None`
/// when the segment is shorter than `DEGENERATE_LENGTH * diameter`.
pub fn reconstruct_interface(p: &[Point; 3], v: &[f64; 3], diameter: f64) -> Option<([Point; 2], [usize; 2], Vector)> {
    let mut ends = Vec::with_capacity(2);
    let mut edges = Vec::with_capacity(2);
    for (e, [a, b]) in LOCAL_EDGES.iter().enumerate() {
        if (v[*a] < 0.0) != (v[*b] < 0.0) {
            ends.push(edge_zero(&p[*a], &p[*b], v[*a], v[*b]));
            edges.push(e);
        }
    }
    if ends.len() != 2 || (ends[1] - ends[0]).norm() < DEGENERATE_LENGTH * diameter {
        return None;
    }
    let normal = linear_gradient(p, v).normalize();
    Some(([ends[0], ends[1]], [edges[0], edges[1]], normal))
}

/// Counter-clockwise polygon `K ∩ { I_h phi <= 0 }`.
pub fn clip_negative(p: &[Point; 3], v: &[f64; 3]) -> Vec<Point> {
    let mut poly = Vec::with_capacity(4);
    for i in 0..3 {
        let j = (i + 1) % 3;
        if v[i] < 0.0 {
            poly.push(p[i]);
        }
        if (v[i] < 0.0) != (v[j] < 0.0) {
            poly.push(edge_zero(&p[i], &p[j], v[i], v[j]));
        }
    }
    poly
}

/// Positively oriented triangles exactly covering the negative part of a cut
/// triangle: one for a corner cut, two for a quadrilateral (split along its
/// shorter diagonal).
pub fn subtriangulate(p: &[Point; 3], v: &[f64; 3]) -> Vec<[Point; 3]> {
    let poly = clip_negative(p, v);
    match poly.len() {
        3 => vec![[poly[0], poly[1], poly[2]]],
        4 => {
            let d02 = (poly[2] - poly[0]).norm();
            let d13 = (poly[3] - poly[1]).norm();
            if d02 <= d13 {
                vec![[poly[0], poly[1], poly[2]], [poly[0], poly[2], poly[3]]]
            } else {
                vec![[poly[1], poly[2], poly[3]], [poly[1], poly[3], poly[0]]]
            }
        }
        _ => Vec::new(),
    }
}

/// Interior faces with both neighbours active and at least one of them cut.
pub fn collect_ghost_faces(mesh: &BackgroundMesh, classes: &[ElementClass]) -> Vec<usize> {
    mesh.faces
        .iter()
        .enumerate()
        .filter_map(|(f, face)| {
            let (a, b) = (face.triangles[0]?, face.triangles[1]?);
            let (ca, cb) = (classes[a], classes[b]);
            let keep = ca.is_active()
                && cb.is_active()
                && (ca == ElementClass::Cut || cb == ElementClass::Cut);
            keep.then_some(f)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct CutTopology {
    pub classes: Vec<ElementClass>,
    pub nodal_values: Vec<f64>,
    /// Inside and cut elements, increasing.
    pub active: Vec<usize>,
    /// Cut elements, increasing.
    pub cut: Vec<usize>,
    /// One interface segment per cut element, parallel to `cut`.
    pub segments: Vec<BoundarySegment>,
    /// Fitted boundary pieces on the background mesh boundary.
    pub fitted: Vec<BoundarySegment>,
    /// Sub-triangles of `K ∩ Ω_h`, parallel to `cut`.
    pub sub_triangles: Vec<Vec<[Point; 3]>>,
    pub ghost_faces: Vec<usize>,
    cut_slot: Vec<Option<usize>>,
}

impl CutTopology {
    pub fn build(mesh: &BackgroundMesh, case: &LevelSetCase) -> Result<Self> {
        let (mut classes, nodal_values) = classify_elements(mesh, case);

        let mut cut = Vec::new();
        let mut segments = Vec::new();
        let mut sub_triangles = Vec::new();
        for t in 0..mesh.num_triangles() {
            if classes[t] != ElementClass::Cut {
                continue;
            }
            let p = mesh.triangle_points(t);
            let v = element_values(mesh, &nodal_values, t);
            match reconstruct_interface(&p, &v, mesh.diameters[t]) {
                Some((endpoints, local_edges, normal)) => {
                    cut.push(t);
                    segments.push(BoundarySegment {
                        element: t,
                        endpoints,
                        normal,
                        length: (endpoints[1] - endpoints[0]).norm(),
                        kind: SegmentKind::Interface,
                        local_edges,
                    });
                    sub_triangles.push(subtriangulate(&p, &v));
                }
                None => {
                    let negative = v.iter().filter(|x| **x < 0.0).count();
                    classes[t] = if negative >= 2 {
                        ElementClass::Inside
                    } else {
                        ElementClass::Outside
                    };
                    log::warn!(
                        "element {t}: degenerate interface segment, reclassified as {:?}",
                        classes[t]
                    );
                }
            }
        }

        let active: Vec<usize> = (0..mesh.num_triangles())
            .filter(|t| classes[*t].is_active())
            .collect();

        let mut fitted = Vec::new();
        for (f, face) in mesh.faces.iter().enumerate() {
            if !face.is_boundary() || !classes[face.owner()].is_active() {
                continue;
            }
            let [a, b] = face.vertices;
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            let (va, vb) = (nodal_values[a], nodal_values[b]);
            let endpoints = match (va < 0.0, vb < 0.0) {
                (true, true) => [pa, pb],
                (true, false) => [pa, edge_zero(&pa, &pb, va, vb)],
                (false, true) => [edge_zero(&pa, &pb, va, vb), pb],
                (false, false) => continue,
            };
            fitted.push(BoundarySegment {
                element: face.owner(),
                endpoints,
                normal: mesh.face_normal(f),
                length: (endpoints[1] - endpoints[0]).norm(),
                kind: SegmentKind::Fitted,
                local_edges: [0, 0],
            });
        }

        let ghost_faces = collect_ghost_faces(mesh, &classes);
        let mut cut_slot = vec![None; mesh.num_triangles()];
        for (k, &t) in cut.iter().enumerate() {
            cut_slot[t] = Some(k);
        }

        Ok(Self {
            classes,
            nodal_values,
            active,
            cut,
            segments,
            fitted,
            sub_triangles,
            ghost_faces,
            cut_slot,
        })
    }

    pub fn class(&self, t: usize) -> ElementClass {
        self.classes[t]
    }

    /// Index of `t` in `cut`, `segments` and `sub_triangles`.
    pub fn cut_index(&self, t: usize) -> Option<usize> {
        self.cut_slot[t]
    }

    pub fn segment(&self, t: usize) -> Option<&BoundarySegment> {
        self.cut_index(t).map(|k| &self.segments[k])
    }

    /// Triangles covering `K ∩ Ω_h` for an active element.
    pub fn physical_part(&self, mesh: &BackgroundMesh, t: usize) -> Vec<[Point; 3]> {
        match self.classes[t] {
            ElementClass::Inside => vec![mesh.triangle_points(t)],
            ElementClass::Cut => self.sub_triangles[self.cut_slot[t].unwrap()].clone(),
            ElementClass::Outside => Vec::new(),
        }
    }

    /// Interface segments followed by fitted segments.
    pub fn boundary_segments(&self) -> impl Iterator<Item = &BoundarySegment> {
        self.segments.iter().chain(self.fitted.iter())
    }

    pub fn area(&self, mesh: &BackgroundMesh) -> f64 {
        self.active
            .iter()
            .map(|&t| match self.classes[t] {
                ElementClass::Inside => mesh.signed_area(t),
                _ => self.sub_triangles[self.cut_slot[t].unwrap()]
                    .iter()
                    .map(|s| signed_area(&s[0], &s[1], &s[2]))
                    .sum(),
            })
            .sum()
    }

    pub fn interface_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary_segments().map(|s| s.length).sum()
    }
}
