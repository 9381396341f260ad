//! Continuous Lagrange spaces restricted to the active elements.

use crate::error::{Error, Result};
use crate::fe::reference::{ElementMap, ReferenceElement, LOCAL_EDGES};
use crate::mesh::BackgroundMesh;
use crate::Point;

#[derive(Debug, Clone)]
pub struct DiscreteSpace {
    element: ReferenceElement,
    dof_coords: Vec<Point>,
    /// Local-to-global map, `num_local` entries per active element.
    local_dofs: Vec<usize>,
    /// Slot of each mesh element in `local_dofs`; `None` when inactive.
    slots: Vec<Option<usize>>,
    active: Vec<usize>,
}

impl DiscreteSpace {
    /// Numbers vertex dofs first, then edge dofs, then (for cubics) element
    /// interior dofs, each group in increasing mesh index order. Only
    /// entities touching an active element receive dofs. Edge dofs are
    /// ordered from the lower- to the higher-numbered edge vertex.
    pub fn build(mesh: &BackgroundMesh, active: &[usize], degree: usize) -> Result<Self> {
        if active.is_empty() {
            return Err(Error::InvalidArgument(
                "finite element space needs at least one active element".into(),
            ));
        }
        let element = ReferenceElement::lagrange(degree)?;
        let mut active: Vec<usize> = active.to_vec();
        active.sort_unstable();
        active.dedup();

        let mut vertex_dof = vec![usize::MAX; mesh.num_vertices()];
        let mut face_used = vec![false; mesh.num_faces()];
        for &t in &active {
            for &v in &mesh.triangles[t] {
                vertex_dof[v] = 0;
            }
            for &f in &mesh.triangle_faces[t] {
                face_used[f] = true;
            }
        }

        let mut dof_coords = Vec::new();
        for (v, dof) in vertex_dof.iter_mut().enumerate() {
            if *dof == 0 {
                *dof = dof_coords.len();
                dof_coords.push(mesh.vertices[v]);
            }
        }

        let per_edge = degree - 1;
        let mut face_base = vec![usize::MAX; mesh.num_faces()];
        if per_edge > 0 {
            for (f, used) in face_used.iter().enumerate() {
                if !used {
                    continue;
                }
                face_base[f] = dof_coords.len();
                let [a, b] = mesh.faces[f].vertices;
                let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                for j in 1..degree {
                    let t = j as f64 / degree as f64;
                    dof_coords.push(pa + (pb - pa) * t);
                }
            }
        }

        let interior = element.num_basis() - 3 - 3 * per_edge;
        let mut element_base = vec![usize::MAX; mesh.num_triangles()];
        if interior > 0 {
            for &t in &active {
                element_base[t] = dof_coords.len();
                let [a, b, c] = mesh.triangle_points(t);
                dof_coords.push(Point::from((a.coords + b.coords + c.coords) / 3.0));
            }
        }

        let num_local = element.num_basis();
        let mut local_dofs = Vec::with_capacity(active.len() * num_local);
        let mut slots = vec![None; mesh.num_triangles()];
        for (slot, &t) in active.iter().enumerate() {
            slots[t] = Some(slot);
            let tri = mesh.triangles[t];
            for &v in &tri {
                local_dofs.push(vertex_dof[v]);
            }
            for (e, [la, lb]) in LOCAL_EDGES.iter().enumerate() {
                let f = mesh.triangle_faces[t][e];
                let forward = tri[*la] < tri[*lb];
                for j in 1..degree {
                    let offset = if forward { j - 1 } else { per_edge - j };
                    local_dofs.push(face_base[f] + offset);
                }
            }
            for k in 0..interior {
                local_dofs.push(element_base[t] + k);
            }
        }

        Ok(Self {
            element,
            dof_coords,
            local_dofs,
            slots,
            active,
        })
    }

    pub fn degree(&self) -> usize {
        self.element.degree()
    }

    pub fn element(&self) -> &ReferenceElement {
        &self.element
    }

    pub fn num_dofs(&self) -> usize {
        self.dof_coords.len()
    }

    pub fn num_local(&self) -> usize {
        self.element.num_basis()
    }

    pub fn dof_coords(&self) -> &[Point] {
        &self.dof_coords
    }

    /// Active elements in increasing order.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_active(&self, t: usize) -> bool {
        self.slots[t].is_some()
    }

    pub fn dofs(&self, t: usize) -> Option<&[usize]> {
        let n = self.num_local();
        self.slots[t].map(|s| &self.local_dofs[s * n..(s + 1) * n])
    }

    /// Value of the discrete function with coefficients `coeffs` at the
    /// physical point `x` of element `t`.
    pub fn eval(&self, mesh: &BackgroundMesh, t: usize, coeffs: &[f64], x: &Point) -> f64 {
        let dofs = self.dofs(t).expect("evaluation on an inactive element");
        let map = ElementMap::new(&mesh.triangle_points(t));
        let xi = map.to_reference(x);
        self.element
            .values(&xi)
            .iter()
            .zip(dofs)
            .map(|(v, d)| v * coeffs[*d])
            .sum()
    }

    /// Nodal (Lagrange) interpolant of `f`.
    pub fn interpolate<F: Fn(&Point) -> f64>(&self, f: F) -> Vec<f64> {
        self.dof_coords.iter().map(f).collect()
    }
}

/// Lagrange interpolation of `f` onto `space`.
pub fn lagrange_interpolate<F: Fn(&Point) -> f64>(space: &DiscreteSpace, f: F) -> Vec<f64> {
    space.interpolate(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundingBox;

    fn unit_mesh(n: usize) -> BackgroundMesh {
        BackgroundMesh::structured(BoundingBox::new(0.0, 0.0, 1.0, 1.0).unwrap(), n).unwrap()
    }

    fn all(mesh: &BackgroundMesh) -> Vec<usize> {
        (0..mesh.num_triangles()).collect()
    }

    #[test]
    fn dof_counts() {
        let mesh = unit_mesh(2);
        assert_eq!(DiscreteSpace::build(&mesh, &all(&mesh), 1).unwrap().num_dofs(), 9);
        assert_eq!(DiscreteSpace::build(&mesh, &all(&mesh), 2).unwrap().num_dofs(), 25);
        assert_eq!(DiscreteSpace::build(&mesh, &all(&mesh), 3).unwrap().num_dofs(), 9 + 32 + 8);
        assert!(DiscreteSpace::build(&mesh, &[], 1).is_err());
    }

    #[test]
    fn partial_activation_counts_touched_entities() {
        let mesh = unit_mesh(2);
        // one triangle: 3 vertices, 3 edges
        let space = DiscreteSpace::build(&mesh, &[5], 3).unwrap();
        assert_eq!(space.num_dofs(), 3 + 6 + 1);
        assert!(space.is_active(5));
        assert!(space.dofs(4).is_none());
    }

    #[test]
    fn shared_edge_dofs_agree_geometrically() {
        let mesh = unit_mesh(3);
        for p in 2..=3 {
            let space = DiscreteSpace::build(&mesh, &all(&mesh), p).unwrap();
            let el = space.element();
            for t in 0..mesh.num_triangles() {
                let map = ElementMap::new(&mesh.triangle_points(t));
                for (node, &dof) in el.nodes().iter().zip(space.dofs(t).unwrap()) {
                    let x = map.to_physical(node);
                    assert!((x - space.dof_coords()[dof]).norm() < 1e-14);
                }
            }
            // every interior edge dof is referenced by exactly two elements
            let mut refs = vec![0usize; space.num_dofs()];
            for t in 0..mesh.num_triangles() {
                for &d in space.dofs(t).unwrap() {
                    refs[d] += 1;
                }
            }
            for (f, face) in mesh.faces.iter().enumerate() {
                let [a, b] = face.vertices;
                let mid = mesh.vertices[a] + (mesh.vertices[b] - mesh.vertices[a]) / p as f64;
                let dof = space
                    .dof_coords()
                    .iter()
                    .position(|c| (c - mid).norm() < 1e-14)
                    .unwrap_or_else(|| panic!("no dof on face {f}"));
                assert_eq!(refs[dof], if face.is_boundary() { 1 } else { 2 });
            }
        }
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let mesh = unit_mesh(4);
        let f = |x: &Point| 1.0 + 2.0 * x.x - x.y + x.x * x.x * x.y - 0.5 * x.y.powi(3);
        let space = DiscreteSpace::build(&mesh, &all(&mesh), 3).unwrap();
        let coeffs = lagrange_interpolate(&space, f);
        for t in 0..mesh.num_triangles() {
            let map = ElementMap::new(&mesh.triangle_points(t));
            for xi in [[0.2, 0.3], [0.6, 0.1], [0.1, 0.8]] {
                let x = map.to_physical(&xi);
                assert!((space.eval(&mesh, t, &coeffs, &x) - f(&x)).abs() < 1e-12);
            }
        }
        let constant = lagrange_interpolate(&space, |_| 3.0);
        assert!(constant.iter().all(|c| *c == 3.0));
    }
}
