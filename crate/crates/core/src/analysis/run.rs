use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{compute_errors, CaseId, ManufacturedCase};
use crate::assembly::{assemble_with_boundary, AssemblyConfig, BoundaryQuadrature, DEFAULT_GHOST_PENALTY};
use crate::cut::{build_patches, geometry_diagnostics, patch_xi, CutTopology, DEFAULT_CORE_SIZE};
use crate::error::{Error, Result, Stage};
use crate::fe::DiscreteSpace;
use crate::levelset::RayRootConfig;
use crate::mesh::BackgroundMesh;
use crate::solver::solve_linear_system;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub case: CaseId,
    pub degree: usize,
    pub taylor_order: usize,
    pub n: usize,
    pub ghost_penalty: f64,
    pub core_size: usize,
    pub root: RayRootConfig,
}

impl RunConfig {
    pub fn new(case: CaseId, degree: usize, taylor_order: usize, n: usize) -> Self {
        Self {
            case,
            degree,
            taylor_order,
            n,
            ghost_penalty: DEFAULT_GHOST_PENALTY,
            core_size: DEFAULT_CORE_SIZE,
            root: RayRootConfig::default(),
        }
    }

    pub fn with_ghost_penalty(mut self, gamma: f64) -> Self {
        self.ghost_penalty = gamma;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.degree) {
            return Err(Error::InvalidArgument(format!("degree p = {} not in 1..=3", self.degree)));
        }
        if self.taylor_order > 2 || self.taylor_order > self.degree {
            return Err(Error::InvalidArgument(format!(
                "Taylor order k = {} must satisfy k <= 2 and k <= p = {}",
                self.taylor_order, self.degree
            )));
        }
        if self.n < 8 {
            return Err(Error::InvalidArgument(format!("mesh resolution n = {} below 8", self.n)));
        }
        Ok(())
    }

    fn assembly(&self) -> AssemblyConfig {
        AssemblyConfig {
            root: self.root,
            ..AssemblyConfig::new(self.degree, self.taylor_order).with_ghost_penalty(self.ghost_penalty)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub case: String,
    pub p: usize,
    pub k: usize,
    pub gamma_g: f64,
    pub n: usize,
    pub h: f64,
    pub dofs: usize,
    pub l2_error: f64,
    pub h1_semi_error: f64,
    pub triple_error: f64,
    pub area_omega_h: f64,
    pub length_gamma_h: f64,
    pub delta_h: f64,
    /// Smallest patch mean normal derivative; absent when the interface is
    /// not a union of closed curves.
    pub min_xi: Option<f64>,
    pub residual: f64,
    pub wall_time_s: f64,
}

/// Full pipeline for one configuration: mesh, topology, space, assembly,
/// solve, errors and diagnostics.
pub fn run_case(cfg: &RunConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let case = ManufacturedCase::new(cfg.case, cfg.degree);
    let asm = cfg.assembly();

    let mesh = BackgroundMesh::structured(case.bbox, cfg.n).map_err(|e| e.at(Stage::Mesh))?;
    let topo = CutTopology::build(&mesh, &case.level_set).map_err(|e| e.at(Stage::Topology))?;
    let space = DiscreteSpace::build(&mesh, &topo.active, cfg.degree).map_err(|e| e.at(Stage::Space))?;

    let boundary =
        BoundaryQuadrature::build(&mesh, &topo, &case.level_set, asm.boundary_quadrature_degree(), &asm.root)
            .map_err(|e| e.at(Stage::Assembly))?;
    let system =
        assemble_with_boundary(&mesh, &topo, &space, &boundary, &case, &asm).map_err(|e| e.at(Stage::Assembly))?;
    let report = solve_linear_system(&system.matrix, &system.rhs).map_err(|e| e.at(Stage::Solve))?;
    let errors = compute_errors(&mesh, &topo, &space, &report.solution, &case, &boundary, &system.ghost)
        .map_err(|e| e.at(Stage::Errors))?;

    let root = cfg.root.with_initial_step(cfg.root.initial_step.min(mesh.h * mesh.h));
    let geometry = geometry_diagnostics(&mesh, &topo, &case.level_set, &root).map_err(|e| e.at(Stage::Errors))?;
    let min_xi = match build_patches(&mesh, &topo, cfg.core_size) {
        Ok(patches) => patches
            .iter()
            .map(|p| patch_xi(&mesh, &topo, p))
            .reduce(f64::min),
        Err(Error::OpenChain { .. }) => None,
        Err(e) => return Err(e.at(Stage::Topology)),
    };

    let record = RunRecord {
        case: cfg.case.name().to_string(),
        p: cfg.degree,
        k: cfg.taylor_order,
        gamma_g: cfg.ghost_penalty,
        n: cfg.n,
        h: mesh.h,
        dofs: space.num_dofs(),
        l2_error: errors.l2,
        h1_semi_error: errors.h1_semi,
        triple_error: errors.triple,
        area_omega_h: geometry.area_omega_h,
        length_gamma_h: geometry.length_gamma_h,
        delta_h: geometry.delta_h,
        min_xi,
        residual: report.relative_residual,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    log::info!(
        "{} p={} k={} n={}: dofs {} l2 {:.3e} h1 {:.3e} residual {:.1e} ({:.2}s)",
        record.case,
        record.p,
        record.k,
        record.n,
        record.dofs,
        record.l2_error,
        record.h1_semi_error,
        record.residual,
        record.wall_time_s
    );
    Ok(record)
}
