//! Fixtures shared by the criterion benches.

use cutfem::assembly::BoundaryQuadrature;
use cutfem::{AssemblyConfig, BackgroundMesh, CaseId, CutTopology, DiscreteSpace, ManufacturedCase, RayRootConfig};

pub struct Fixture {
    pub case: ManufacturedCase,
    pub mesh: BackgroundMesh,
    pub topo: CutTopology,
    pub space: DiscreteSpace,
    pub boundary: BoundaryQuadrature,
    pub cfg: AssemblyConfig,
}

impl Fixture {
    pub fn new(id: CaseId, p: usize, k: usize, n: usize) -> Fixture {
        let case = ManufacturedCase::new(id, p);
        let mesh = BackgroundMesh::structured(case.bbox, n).expect("mesh");
        let topo = CutTopology::build(&mesh, &case.level_set).expect("topology");
        let space = DiscreteSpace::build(&mesh, &topo.active, p).expect("space");
        let cfg = AssemblyConfig::new(p, k);
        let root = RayRootConfig::default().with_initial_step(mesh.h * mesh.h);
        let boundary = BoundaryQuadrature::build(&mesh, &topo, &case.level_set, cfg.boundary_quadrature_degree(), &root)
            .expect("boundary quadrature");
        Fixture {
            case,
            mesh,
            topo,
            space,
            boundary,
            cfg,
        }
    }
}
