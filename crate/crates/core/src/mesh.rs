//! Structured background triangulation.
//!
//! The box is divided into `n x n` squares, each split into two triangles by
//! the diagonal from its lower-left to its upper-right corner. Vertices are
//! numbered row by row starting at the lower-left corner of the box, and the
//! two triangles of square `(i, j)` are `2 (j n + i)` (below the diagonal)
//! and `2 (j n + i) + 1` (above it).

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::{Point, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl BoundingBox {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self> {
        let finite = [xmin, ymin, xmax, ymax].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidBoundingBox(format!(
                "non-finite coordinates [{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        if xmax <= xmin {
            return Err(Error::InvalidBoundingBox(format!(
                "xmax = {xmax} must exceed xmin = {xmin}"
            )));
        }
        if ymax <= ymin {
            return Err(Error::InvalidBoundingBox(format!(
                "ymax = {ymax} must exceed ymin = {ymin}"
            )));
        }
        Ok(Self {
            xmin,
            ymin,
            xmax,
            ymax,
        })
    }

    /// The square `[-half, half]^2`.
    pub fn centered_square(half: f64) -> Result<Self> {
        Self::new(-half, -half, half, half)
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: &Point, slack: f64) -> bool {
        p.x >= self.xmin - slack
            && p.x <= self.xmax + slack
            && p.y >= self.ymin - slack
            && p.y <= self.ymax + slack
    }
}

/// An edge of the triangulation.
///
/// `triangles[0]` is the lower-indexed incident triangle; `triangles[1]` is
/// `None` on the boundary of the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    pub vertices: [usize; 2],
    pub triangles: [Option<usize>; 2],
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.triangles[1].is_none()
    }

    pub fn owner(&self) -> usize {
        self.triangles[0].expect("every face has an owner")
    }

    pub fn neighbor(&self) -> Option<usize> {
        self.triangles[1]
    }

    /// The incident triangle other than `t`.
    pub fn other(&self, t: usize) -> Option<usize> {
        match self.triangles {
            [Some(a), b] if a == t => b,
            [a, Some(b)] if b == t => a,
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BackgroundMesh {
    pub bbox: BoundingBox,
    pub n: usize,
    pub vertices: Vec<Point>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub faces: Vec<Face>,
    /// `triangle_faces[t][e]` is the face joining local vertices `e` and `e + 1`.
    pub triangle_faces: Vec<[usize; 3]>,
    pub diameters: Vec<f64>,
    /// Global mesh parameter, the largest element diameter.
    pub h: f64,
}

impl BackgroundMesh {
    pub fn structured(bbox: BoundingBox, n: usize) -> Result<Self> {
        let bbox = BoundingBox::new(bbox.xmin, bbox.ymin, bbox.xmax, bbox.ymax)?;
        if n == 0 {
            return Err(Error::InvalidArgument(
                "mesh resolution n must be at least 1".into(),
            ));
        }
        let dx = bbox.width() / n as f64;
        let dy = bbox.height() / n as f64;
        let row = n + 1;

        let mut vertices = Vec::with_capacity(row * row);
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Point::new(
                    bbox.xmin + i as f64 * dx,
                    bbox.ymin + j as f64 * dy,
                ));
            }
        }

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = j * row + i;
                let v10 = v00 + 1;
                let v01 = v00 + row;
                let v11 = v01 + 1;
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut faces: Vec<Face> = Vec::new();
        let mut triangle_faces = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let f = *lookup.entry(key).or_insert_with(|| {
                    faces.push(Face {
                        vertices: [key.0, key.1],
                        triangles: [Some(t), None],
                    });
                    faces.len() - 1
                });
                if faces[f].triangles[0] != Some(t) {
                    faces[f].triangles[1] = Some(t);
                }
                local[e] = f;
            }
            triangle_faces.push(local);
        }

        let diameters: Vec<f64> = triangles
            .iter()
            .map(|tri| {
                let p = tri.map(|v| vertices[v]);
                (0..3)
                    .map(|e| (p[(e + 1) % 3] - p[e]).norm())
                    .fold(0.0, f64::max)
            })
            .collect();
        let h = diameters.iter().copied().fold(0.0, f64::max);

        Ok(Self {
            bbox,
            n,
            vertices,
            triangles,
            faces,
            triangle_faces,
            diameters,
            h,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(&a, &b, &c)
    }

    /// Unit normal of face `f`, pointing out of its lower-indexed triangle
    /// (into the higher-indexed one for interior faces).
    pub fn face_normal(&self, f: usize) -> Vector {
        let face = &self.faces[f];
        let a = self.vertices[face.vertices[0]];
        let b = self.vertices[face.vertices[1]];
        let tangent = (b - a).normalize();
        let mut normal = Vector::new(tangent.y, -tangent.x);
        let owner = self.triangles[face.owner()];
        let opposite = owner
            .iter()
            .copied()
            .find(|v| !face.vertices.contains(v))
            .expect("triangle has a vertex off each of its faces");
        if normal.dot(&(self.vertices[opposite] - a)) > 0.0 {
            normal = -normal;
        }
        normal
    }

    pub fn face_length(&self, f: usize) -> f64 {
        let [a, b] = self.faces[f].vertices;
        (self.vertices[b] - self.vertices[a]).norm()
    }

    /// Triangles incident to each vertex, in increasing order.
    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                adj[v].push(t);
            }
        }
        adj
    }

    /// Plain-text dump, one `v x y` line per vertex followed by one
    /// `t i j k` line per triangle.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for v in &self.vertices {
            writeln!(out, "v {} {}", v.x, v.y)?;
        }
        for t in &self.triangles {
            writeln!(out, "t {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

pub fn signed_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_box() -> BoundingBox {
        BoundingBox::new(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn single_square() {
        let mesh = BackgroundMesh::structured(unit_box(), 1).unwrap();
        assert_eq!(mesh.num_vertices(), 4);
        assert_eq!(mesh.num_triangles(), 2);
        assert_eq!(mesh.num_faces(), 5);
        assert_relative_eq!(mesh.h, 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn two_by_two_counts_match_enumeration() {
        let mesh = BackgroundMesh::structured(unit_box(), 2).unwrap();
        // enumerate unique undirected edges directly from the triangles
        let mut edges = std::collections::BTreeSet::new();
        for t in &mesh.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        assert_eq!(mesh.num_vertices(), 9);
        assert_eq!(mesh.num_triangles(), 8);
        assert_eq!(edges.len(), 16);
        assert_eq!(mesh.num_faces(), 16);
        let euler = mesh.num_vertices() as i64 - mesh.num_faces() as i64
            + mesh.num_triangles() as i64;
        assert_eq!(euler, 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(BoundingBox::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(BoundingBox::new(0.0, 0.0, 1.0, 0.0).is_err());
        let bbox = BoundingBox {
            xmin: 0.0,
            ymin: 1.0,
            xmax: 1.0,
            ymax: 0.5,
        };
        let err = BackgroundMesh::structured(bbox, 4).unwrap_err();
        assert!(err.to_string().contains("ymax"));
        assert!(BackgroundMesh::structured(unit_box(), 0).is_err());
    }

    #[test]
    fn adjacency_and_orientation() {
        let bbox = BoundingBox::new(-1.3, -0.7, 1.1, 0.9).unwrap();
        let mesh = BackgroundMesh::structured(bbox, 7).unwrap();
        for t in 0..mesh.num_triangles() {
            assert!(mesh.signed_area(t) > 0.0);
            for &f in &mesh.triangle_faces[t] {
                assert!(mesh.faces[f].triangles.contains(&Some(t)));
            }
        }
        let mut boundary = 0;
        for (f, face) in mesh.faces.iter().enumerate() {
            let incident = face.triangles.iter().flatten().count();
            if face.is_boundary() {
                boundary += 1;
                assert_eq!(incident, 1);
            } else {
                assert_eq!(incident, 2);
                assert!(face.triangles[0] < face.triangles[1]);
                // the normal points into the higher-indexed triangle
                let other = face.neighbor().unwrap();
                let [a, b, c] = mesh.triangle_points(other);
                let centroid = Point::from((a.coords + b.coords + c.coords) / 3.0);
                let mid = mesh.vertices[face.vertices[0]];
                assert!(mesh.face_normal(f).dot(&(centroid - mid)) > 0.0);
            }
            assert_relative_eq!(mesh.face_normal(f).norm(), 1.0, epsilon = 1e-14);
        }
        assert_eq!(boundary, 4 * 7);
    }

    #[test]
    fn areas_partition_the_box() {
        let bbox = BoundingBox::new(-1.3, -0.2, 0.4, 2.0).unwrap();
        for n in [1, 3, 10] {
            let mesh = BackgroundMesh::structured(bbox, n).unwrap();
            let total: f64 = (0..mesh.num_triangles()).map(|t| mesh.signed_area(t)).sum();
            assert_relative_eq!(total, bbox.area(), epsilon = 1e-12);
            let hmin = mesh.diameters.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(mesh.h / hmin <= 2.0);
        }
    }

    #[test]
    fn square_box_diameter() {
        let mesh = BackgroundMesh::structured(BoundingBox::centered_square(1.3).unwrap(), 16).unwrap();
        assert_relative_eq!(mesh.h, 2f64.sqrt() * 2.6 / 16.0, epsilon = 1e-14);
    }

    #[test]
    fn deterministic_and_dumpable() {
        let a = BackgroundMesh::structured(unit_box(), 5).unwrap();
        let b = BackgroundMesh::structured(unit_box(), 5).unwrap();
        assert_eq!(a.triangles, b.triangles);
        let bits = |m: &BackgroundMesh| -> Vec<u64> {
            m.vertices.iter().flat_map(|p| [p.x.to_bits(), p.y.to_bits()]).collect()
        };
        assert_eq!(bits(&a), bits(&b));
        let mut buf = Vec::new();
        a.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 36);
        assert_eq!(text.lines().filter(|l| l.starts_with("t ")).count(), 50);
    }
}
