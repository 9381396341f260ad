//! Acceptance criteria. Every criterion prints one PASS/FAIL line; the
//! expensive runs are computed once and shared.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use cutfem::analysis::{compute_errors, run_all, ConvergenceTable};
use cutfem::assembly::{assemble_ghost_penalty, BoundaryQuadrature};
use cutfem::cut::subtriangulate;
use cutfem::fe::reference::ElementMap;
use cutfem::levelset::find_zero_along;
use cutfem::mesh::signed_area;
use cutfem::{
    AssemblyConfig, BackgroundMesh, BoundingBox, CaseId, CutTopology, DiscreteSpace, LevelSetCase, ManufacturedCase,
    Point, QuadratureRule, RayRootConfig, ReferenceElement, RunConfig, RunRecord, SparseMatrix, Vector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RATE_LEVELS: [usize; 4] = [16, 32, 64, 128];
const ROBUST_LEVELS: [usize; 3] = [32, 64, 128];

type Key = (CaseId, usize, usize);

struct Runs {
    tables: BTreeMap<Key, ConvergenceTable>,
    elapsed: Duration,
}

impl Runs {
    fn table(&self, case: CaseId, p: usize, k: usize) -> &ConvergenceTable {
        &self.tables[&(case, p, k)]
    }

    fn record(&self, case: CaseId, p: usize, k: usize, n: usize) -> &RunRecord {
        self.table(case, p, k).records.iter().find(|r| r.n == n).unwrap()
    }
}

fn runs() -> &'static Runs {
    static RUNS: OnceLock<Runs> = OnceLock::new();
    RUNS.get_or_init(|| {
        let mut plan: Vec<(Key, Vec<usize>)> = Vec::new();
        for (p, k) in [(2, 0), (2, 1), (2, 2), (3, 1), (3, 2)] {
            plan.push(((CaseId::Circle, p, k), RATE_LEVELS.to_vec()));
        }
        plan.push(((CaseId::Annulus, 2, 1), ROBUST_LEVELS.to_vec()));
        plan.push(((CaseId::Flower, 2, 1), ROBUST_LEVELS.to_vec()));

        let configs: Vec<RunConfig> = plan
            .iter()
            .flat_map(|((case, p, k), levels)| levels.iter().map(move |&n| RunConfig::new(*case, *p, *k, n)))
            .collect();
        let start = Instant::now();
        let mut results = run_all(&configs).into_iter();
        let elapsed = start.elapsed();
        let mut tables = BTreeMap::new();
        for (key, levels) in plan {
            let records: Vec<RunRecord> = results
                .by_ref()
                .take(levels.len())
                .map(|r| r.unwrap_or_else(|e| panic!("{key:?}: {e}")))
                .collect();
            tables.insert(key, ConvergenceTable::from_records(records).unwrap());
        }
        Runs { tables, elapsed }
    })
}

fn report(criterion: usize, pass: bool, detail: &str) {
    println!("criterion {criterion} {}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_optimal_rates_with_first_order_correction() {
    let runs = runs();
    let mut pass = runs.elapsed < Duration::from_secs(300);
    let mut detail = format!("all runs {:.1}s;", runs.elapsed.as_secs_f64());
    for p in [2, 3] {
        let r = runs.table(CaseId::Circle, p, 1).rates.unwrap();
        let pf = p as f64;
        let ok = (pf - 0.25..=pf + 0.4).contains(&r.h1_semi) && r.l2 >= pf + 0.4;
        pass &= ok;
        detail += &format!(
            " p={p} h1 {:.3} in [{:.2}, {:.2}], l2 {:.3} >= {:.2};",
            r.h1_semi,
            pf - 0.25,
            pf + 0.4,
            r.l2,
            pf + 0.4
        );
    }
    report(1, pass, &detail);
}

#[test]
fn criterion_2_uncorrected_boundary_degrades_h1_rate() {
    let runs = runs();
    let r0 = runs.table(CaseId::Circle, 2, 0).rates.unwrap();
    let r1 = runs.table(CaseId::Circle, 2, 1).rates.unwrap();
    let pass = r0.h1_semi <= 1.8 && r1.h1_semi - r0.h1_semi >= 0.15;
    report(
        2,
        pass,
        &format!(
            "p=2 k=0 h1 rate {:.3} (<= 1.8), k=1 minus k=0 {:.3} (>= 0.15); k=0 l2 rate {:.3}, triple rate {:.3}",
            r0.h1_semi,
            r1.h1_semi - r0.h1_semi,
            r0.l2,
            r0.triple
        ),
    );
}

#[test]
fn criterion_3_no_gain_beyond_first_order() {
    let runs = runs();
    let mut pass = true;
    let mut detail = String::new();
    for p in [2, 3] {
        let (t1, t2) = (runs.table(CaseId::Circle, p, 1), runs.table(CaseId::Circle, p, 2));
        let (r1, r2) = (t1.rates.unwrap(), t2.rates.unwrap());
        let (f1, f2) = (t1.finest(), t2.finest());
        let dl2 = (r2.l2 - r1.l2).abs();
        let dh1 = (r2.h1_semi - r1.h1_semi).abs();
        let el2 = (f2.l2_error - f1.l2_error).abs() / f1.l2_error;
        let eh1 = (f2.h1_semi_error - f1.h1_semi_error).abs() / f1.h1_semi_error;
        pass &= dl2 <= 0.15 && dh1 <= 0.15 && el2 <= 0.25 && eh1 <= 0.25;
        detail += &format!(
            " p={p} rate gaps l2 {dl2:.3} h1 {dh1:.3} (<= 0.15), final error gaps l2 {:.1}% h1 {:.1}% (<= 25%);",
            100.0 * el2,
            100.0 * eh1
        );
    }
    report(3, pass, &detail);
}

#[test]
fn criterion_4_geometry_fidelity() {
    let runs = runs();
    let records: Vec<&RunRecord> = ROBUST_LEVELS.iter().map(|&n| runs.record(CaseId::Circle, 2, 1, n)).collect();
    let scaled: Vec<f64> = records.iter().map(|r| r.delta_h / (r.h * r.h)).collect();
    let band = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let area_ok = records.iter().all(|r| (r.area_omega_h - PI).abs() <= 10.0 * r.h * r.h);
    let worst_area = records
        .iter()
        .map(|r| (r.area_omega_h - PI).abs() / (r.h * r.h))
        .fold(0.0, f64::max);
    report(
        4,
        band <= 4.0 && area_ok,
        &format!(
            "delta_h/h^2 = {:.4?}, band {band:.3} (<= 4); max |area - pi|/h^2 = {worst_area:.3} (<= 10)",
            scaled
        ),
    );
}

#[test]
fn criterion_5_exact_on_fitted_linear_boundary() {
    let mut pass = true;
    let mut detail = String::new();
    for p in 1..=3 {
        for n in [16, 32] {
            let case = ManufacturedCase::new(CaseId::HalfPlane, p);
            let mesh = BackgroundMesh::structured(case.bbox, n).unwrap();
            let topo = CutTopology::build(&mesh, &case.level_set).unwrap();
            let space = DiscreteSpace::build(&mesh, &topo.active, p).unwrap();
            let boundary =
                BoundaryQuadrature::build(&mesh, &topo, &case.level_set, 2 * p + 2, &RayRootConfig::default()).unwrap();
            let zero = vec![0.0; space.num_dofs()];
            let none = SparseMatrix::zeros(space.num_dofs(), space.num_dofs());
            let norms = compute_errors(&mesh, &topo, &space, &zero, &case, &boundary, &none).unwrap();
            let mut worst: f64 = 0.0;
            for k in 0..=p.min(2) {
                let r = cutfem::run_case(&RunConfig::new(CaseId::HalfPlane, p, k, n)).unwrap();
                worst = worst.max(r.l2_error / norms.l2).max(r.h1_semi_error / norms.h1_semi);
            }
            pass &= worst <= 1e-8;
            detail += &format!(" p={p} n={n} rel {worst:.1e};");
        }
    }
    report(5, pass, &format!("relative L2/H1 errors (<= 1e-8):{detail}"));
}

#[test]
fn criterion_6_ghost_penalty_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut pass = true;
    let mut asym: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    let mut kernel: f64 = 0.0;
    for n in [16, 32] {
        for p in 1..=3 {
            let case = ManufacturedCase::new(CaseId::Circle, p);
            let mesh = BackgroundMesh::structured(case.bbox, n).unwrap();
            let topo = CutTopology::build(&mesh, &case.level_set).unwrap();
            let space = DiscreteSpace::build(&mesh, &topo.active, p).unwrap();
            let j = assemble_ghost_penalty(&mesh, &topo, &space, &AssemblyConfig::new(p, 1)).unwrap();
            let scale = j.max_abs();
            asym = asym.max(j.sub(&j.transpose()).max_abs() / scale);
            for _ in 0..100 {
                let v: Vec<f64> = (0..space.num_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let vv: f64 = v.iter().map(|x| x * x).sum();
                min_ratio = min_ratio.min(j.quadratic_form(&v) / (scale * vv));
            }
            let c = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let poly = space.interpolate(|x| {
                let (a, b) = (x.x, x.y);
                let mut v = c[0] + c[1] * a - c[2] * b;
                if p >= 2 {
                    v += c[2] * a * a - c[0] * a * b + c[1] * b * b;
                }
                if p >= 3 {
                    v += c[1] * a.powi(3) + c[0] * a * a * b - c[2] * b.powi(3);
                }
                v
            });
            kernel = kernel.max(j.matvec(&poly).iter().fold(0.0, |m, v| m.max(v.abs())));
        }
    }
    pass &= asym <= f64::EPSILON && min_ratio >= -1e-12 && kernel <= 1e-10;
    report(
        6,
        pass,
        &format!(
            "max |J - J^T|/max|J| = {asym:.1e} (<= eps); min v'Jv/(max|J| |v|^2) = {min_ratio:.2e} (>= -1e-12); \
             max |J c_P| = {kernel:.1e} (<= 1e-10)"
        ),
    );
}

#[test]
fn criterion_7_patch_diagnostic_positive() {
    let runs = runs();
    let mut pass = true;
    let mut detail = String::new();
    for case in [CaseId::Circle, CaseId::Flower] {
        for n in [32, 64] {
            let xi = runs.record(case, 2, 1, n).min_xi;
            pass &= xi.is_some_and(|v| v > 0.0);
            detail += &format!(" {case} n={n} min_xi {:.4};", xi.unwrap_or(f64::NAN));
        }
    }
    let every = runs.tables.iter().all(|((case, _, _), t)| {
        *case == CaseId::HalfPlane || t.records.iter().all(|r| r.min_xi.is_some())
    });
    pass &= every;
    report(7, pass, &format!("min_j xi_j > 0 (core size 4):{detail} reported in every record: {every}"));
}

#[test]
fn criterion_8_cross_geometry_robustness() {
    let runs = runs();
    let mut pass = true;
    let mut detail = String::new();
    for case in [CaseId::Annulus, CaseId::Flower] {
        let r = runs.table(case, 2, 1).rates.unwrap();
        pass &= r.h1_semi >= 1.75;
        detail += &format!(" {case} h1 rate {:.3} (>= 1.75), l2 rate {:.3};", r.h1_semi, r.l2);
    }
    // the flower data are genuinely inhomogeneous on the exact boundary
    let flower = ManufacturedCase::new(CaseId::Flower, 2);
    let mesh = BackgroundMesh::structured(flower.bbox, 32).unwrap();
    let topo = CutTopology::build(&mesh, &flower.level_set).unwrap();
    let boundary =
        BoundaryQuadrature::build(&mesh, &topo, &flower.level_set, 6, &RayRootConfig::default()).unwrap();
    let gmax = boundary
        .points
        .iter()
        .map(|bp| flower.dirichlet(&bp.projected()).abs())
        .fold(0.0, f64::max);
    pass &= gmax > 0.5;
    detail += &format!(" flower max |g(p_h(x))| = {gmax:.3};");
    report(8, pass, &detail);
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[test]
fn criterion_9_oracle_suites() {
    // quadrature against a!b!/(a+b+2)!
    let mut quad: f64 = 0.0;
    for d in 0..=10 {
        let rule = QuadratureRule::triangle(d).unwrap();
        for a in 0..=d {
            for b in 0..=d - a {
                let q: f64 = rule.iter().map(|(x, w)| w * x[0].powi(a as i32) * x[1].powi(b as i32)).sum();
                quad = quad.max((q - factorial(a) * factorial(b) / factorial(a + b + 2)).abs());
            }
        }
    }

    // sub-triangles plus the clipped positive part tile each cut element
    let mut area: f64 = 0.0;
    for (case, half) in [(LevelSetCase::circle(), 1.3), (LevelSetCase::annulus(), 1.0), (LevelSetCase::flower(), 1.3)] {
        let mesh = BackgroundMesh::structured(BoundingBox::centered_square(half).unwrap(), 64).unwrap();
        let topo = CutTopology::build(&mesh, &case).unwrap();
        for &t in &topo.cut {
            let p = mesh.triangle_points(t);
            let v = mesh.triangles[t].map(|i| topo.nodal_values[i]);
            let neg: f64 = subtriangulate(&p, &v).iter().map(|s| signed_area(&s[0], &s[1], &s[2])).sum();
            let mut pos = Vec::new();
            for i in 0..3 {
                let j = (i + 1) % 3;
                if v[i] >= 0.0 {
                    pos.push(p[i]);
                }
                if (v[i] >= 0.0) != (v[j] >= 0.0) {
                    pos.push(p[i] + (p[j] - p[i]) * (v[i] / (v[i] - v[j])));
                }
            }
            let pos_area: f64 = (0..pos.len())
                .map(|i| {
                    let (a, b) = (pos[i], pos[(i + 1) % pos.len()]);
                    a.x * b.y - b.x * a.y
                })
                .sum::<f64>()
                / 2.0;
            area = area.max((neg + pos_area - mesh.signed_area(t)).abs());
        }
    }

    // ray roots against plain bisection
    let mut root: f64 = 0.0;
    for (case, half) in [(LevelSetCase::circle(), 1.3), (LevelSetCase::annulus(), 1.0), (LevelSetCase::flower(), 1.3)] {
        let mesh = BackgroundMesh::structured(BoundingBox::centered_square(half).unwrap(), 32).unwrap();
        let topo = CutTopology::build(&mesh, &case).unwrap();
        let cfg = RayRootConfig::default().with_initial_step(mesh.h * mesh.h);
        for seg in topo.segments.iter().step_by(5) {
            let x = seg.point(0.5);
            let s = find_zero_along(&case, &x, &seg.normal, &cfg).unwrap();
            let f = |t: f64| case.phi(&(x + seg.normal * t));
            let (mut a, mut b) = (s - 1e-4, s + 1e-4);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if f(a) * f(m) <= 0.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            root = root.max((0.5 * (a + b) - s).abs());
        }
    }

    // directional derivatives against central differences
    let mut deriv: f64 = 0.0;
    let tri = [Point::new(0.1, -0.2), Point::new(0.35, -0.15), Point::new(0.18, 0.07)];
    let map = ElementMap::new(&tri);
    let d = Vector::new(0.6, -0.8);
    let x = Point::new(0.2, -0.1);
    let xi = map.to_reference(&x);
    for p in 1..=3 {
        let el = ReferenceElement::lagrange(p).unwrap();
        let value = |y: Point| el.values(&map.to_reference(&y));
        for (order, s) in [(1usize, 1e-5), (2, 1e-3)] {
            let exact = el.eval_directional(&map, &d, order, &xi);
            let (fp, f0, fm) = (value(x + d * s), value(x), value(x - d * s));
            for i in 0..el.num_basis() {
                let fd = if order == 1 {
                    (fp[i] - fm[i]) / (2.0 * s)
                } else {
                    (fp[i] - 2.0 * f0[i] + fm[i]) / (s * s)
                };
                deriv = deriv.max((fd - exact[i]).abs() / exact[i].abs().max(1.0));
            }
        }
    }

    let runs = runs();
    let residual = runs
        .tables
        .values()
        .flat_map(|t| &t.records)
        .map(|r| r.residual)
        .fold(0.0, f64::max);

    let pass = quad <= 1e-14 && area <= 1e-14 && root <= 1e-10 && deriv <= 1e-6 && residual <= 1e-10;
    report(
        9,
        pass,
        &format!(
            "quadrature {quad:.1e} (<= 1e-14), cut areas {area:.1e} (<= 1e-14), roots {root:.1e} (<= 1e-10), \
             derivatives {deriv:.1e} (<= 1e-6 rel), max solver residual {residual:.1e} (<= 1e-10)"
        ),
    );
}
