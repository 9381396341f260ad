//! Boundary patches along the reconstructed interface.
//!
//! The cut elements are ordered into closed chains following the interface
//! and split into consecutive cores. Each patch carries a piecewise linear
//! function that equals the nodal level set on the core vertices and
//! vanishes on the rest of the patch; the mean of its normal derivative over
//! the core's interface, `xi`, is the stability diagnostic reported per run.

use std::collections::{BTreeMap, BTreeSet};

use crate::cut::{linear_gradient, CutTopology};
use crate::error::{Error, Result};
use crate::mesh::BackgroundMesh;

pub const DEFAULT_CORE_SIZE: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    /// Core cut elements, in chain order.
    pub core: Vec<usize>,
    /// Core plus every active element sharing a vertex with it, increasing.
    pub elements: Vec<usize>,
    /// Indices into `CutTopology::segments` of the core's interface pieces.
    pub segments: Vec<usize>,
    /// Vertices of the core elements, increasing.
    pub interior_nodes: Vec<usize>,
    /// Nodal values of the patch function on every patch vertex.
    pub values: BTreeMap<usize, f64>,
}

impl Patch {
    pub fn boundary_length(&self, topo: &CutTopology) -> f64 {
        self.segments.iter().map(|&s| topo.segments[s].length).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.values_mut().for_each(|v| *v *= factor);
        out
    }
}

/// Cut elements grouped into closed chains, each ordered along the
/// interface.
pub fn interface_chains(mesh: &BackgroundMesh, topo: &CutTopology) -> Result<Vec<Vec<usize>>> {
    let mut visited = vec![false; mesh.num_triangles()];
    let mut chains = Vec::new();
    for &start in &topo.cut {
        if visited[start] {
            continue;
        }
        let mut chain = Vec::new();
        let mut current = start;
        let mut exit = topo.segment(start).expect("cut element has a segment").local_edges[1];
        loop {
            visited[current] = true;
            chain.push(current);
            let face = &mesh.faces[mesh.triangle_faces[current][exit]];
            let next = face.other(current).ok_or(Error::OpenChain { element: current })?;
            if next == start {
                break;
            }
            let segment = topo.segment(next).ok_or(Error::BrokenChain { element: current })?;
            if visited[next] {
                return Err(Error::BrokenChain { element: next });
            }
            let shared = mesh.triangle_faces[current][exit];
            let [e0, e1] = segment.local_edges;
            exit = if mesh.triangle_faces[next][e0] == shared {
                e1
            } else if mesh.triangle_faces[next][e1] == shared {
                e0
            } else {
                return Err(Error::BrokenChain { element: next });
            };
            current = next;
        }
        chains.push(chain);
    }
    Ok(chains)
}

/// Splits every chain into cores of `core_size` consecutive cut elements;
/// a shorter remainder is merged into the chain's last core.
pub fn build_patches(mesh: &BackgroundMesh, topo: &CutTopology, core_size: usize) -> Result<Vec<Patch>> {
    if core_size == 0 {
        return Err(Error::InvalidArgument("patch core size must be positive".into()));
    }
    let chains = interface_chains(mesh, topo)?;
    let vertex_triangles = mesh.vertex_triangles();
    let mut patches = Vec::new();
    for chain in &chains {
        let mut cores: Vec<Vec<usize>> = chain.chunks(core_size).map(<[usize]>::to_vec).collect();
        if cores.len() > 1 && cores.last().unwrap().len() < core_size {
            let tail = cores.pop().unwrap();
            cores.last_mut().unwrap().extend(tail);
        }
        for core in cores {
            patches.push(make_patch(mesh, topo, &vertex_triangles, core));
        }
    }
    Ok(patches)
}

fn make_patch(mesh: &BackgroundMesh, topo: &CutTopology, vertex_triangles: &[Vec<usize>], core: Vec<usize>) -> Patch {
    let interior: BTreeSet<usize> = core.iter().flat_map(|&t| mesh.triangles[t]).collect();
    let mut elements: BTreeSet<usize> = core.iter().copied().collect();
    for &v in &interior {
        elements.extend(vertex_triangles[v].iter().filter(|&&t| topo.class(t).is_active()));
    }
    let mut values = BTreeMap::new();
    for &t in &elements {
        for v in mesh.triangles[t] {
            let value = if interior.contains(&v) {
                topo.nodal_values[v]
            } else {
                0.0
            };
            values.insert(v, value);
        }
    }
    let segments = core
        .iter()
        .map(|&t| topo.cut_index(t).expect("core elements are cut"))
        .collect();
    Patch {
        core,
        elements: elements.into_iter().collect(),
        segments,
        interior_nodes: interior.into_iter().collect(),
        values,
    }
}

/// Mean over the core interface of the normal derivative of the patch
/// function. Both factors are constant per segment, so the integral is a
/// length-weighted sum.
pub fn patch_xi(mesh: &BackgroundMesh, topo: &CutTopology, patch: &Patch) -> f64 {
    let mut integral = 0.0;
    let mut length = 0.0;
    for &s in &patch.segments {
        let seg = &topo.segments[s];
        let t = seg.element;
        let v = mesh.triangles[t].map(|i| patch.values.get(&i).copied().unwrap_or(0.0));
        let grad = linear_gradient(&mesh.triangle_points(t), &v);
        integral += seg.length * grad.dot(&seg.normal);
        length += seg.length;
    }
    integral / length
}
