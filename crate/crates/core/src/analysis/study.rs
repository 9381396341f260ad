use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::analysis::{run_case, CaseId, RunConfig, RunRecord};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 13] = [
    "case",
    "p",
    "k",
    "gamma_g",
    "n",
    "h",
    "dofs",
    "l2_error",
    "h1_semi_error",
    "triple_error",
    "delta_h",
    "min_xi",
    "residual",
];

/// Least-squares slopes of `log(error)` against `log(h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub l2: f64,
    pub h1_semi: f64,
    pub triple: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub case: String,
    pub p: usize,
    pub k: usize,
    pub gamma_g: f64,
    /// Ordered from coarsest to finest.
    pub records: Vec<RunRecord>,
    /// Present from three levels on.
    pub rates: Option<Rates>,
}

impl ConvergenceTable {
    pub fn from_records(records: Vec<RunRecord>) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::InvalidArgument("convergence table needs at least one run".into()))?;
        let (case, p, k, gamma_g) = (first.case.clone(), first.p, first.k, first.gamma_g);
        let rates = (records.len() >= 3).then(|| {
            let h: Vec<f64> = records.iter().map(|r| r.h).collect();
            let rate = |f: fn(&RunRecord) -> f64| {
                let e: Vec<f64> = records.iter().map(f).collect();
                least_squares_rate(&h, &e)
            };
            Rates {
                l2: rate(|r| r.l2_error),
                h1_semi: rate(|r| r.h1_semi_error),
                triple: rate(|r| r.triple_error),
            }
        });
        Ok(Self {
            case,
            p,
            k,
            gamma_g,
            records,
            rates,
        })
    }

    pub fn finest(&self) -> &RunRecord {
        self.records.last().expect("tables are never empty")
    }
}

/// Slope of the least-squares line through `(log h_i, log e_i)`.
pub fn least_squares_rate(h: &[f64], errors: &[f64]) -> f64 {
    assert_eq!(h.len(), errors.len());
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Runs every configuration, using up to the available hardware threads.
/// Results keep the order of `configs`.
pub fn run_all(configs: &[RunConfig]) -> Vec<Result<RunRecord>> {
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(configs.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunRecord>>>> = Mutex::new((0..configs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= configs.len() {
                    break;
                }
                let r = run_case(&configs[i]);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every run completes"))
        .collect()
}

/// One table per `(p, k)` pair, each over `n = n0 * 2^j`, `j < levels`.
pub fn convergence_study(
    case: CaseId,
    degrees: &[usize],
    taylor_orders: &[usize],
    n0: usize,
    levels: usize,
    ghost_penalty: f64,
) -> Result<Vec<ConvergenceTable>> {
    if levels < 3 {
        return Err(Error::InvalidArgument(format!(
            "a convergence study needs at least 3 levels, got {levels}"
        )));
    }
    let mut configs = Vec::new();
    for &p in degrees {
        for &k in taylor_orders {
            for j in 0..levels {
                let cfg = RunConfig::new(case, p, k, n0 << j).with_ghost_penalty(ghost_penalty);
                cfg.validate()?;
                configs.push(cfg);
            }
        }
    }
    let mut results = run_all(&configs).into_iter();
    let mut tables = Vec::new();
    for _ in 0..degrees.len() * taylor_orders.len() {
        let records = results.by_ref().take(levels).collect::<Result<Vec<_>>>()?;
        tables.push(ConvergenceTable::from_records(records)?);
    }
    Ok(tables)
}

fn float(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_csv<W: Write>(out: W, tables: &[ConvergenceTable]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in tables.iter().flat_map(|t| &t.records) {
        w.write_record([
            r.case.clone(),
            r.p.to_string(),
            r.k.to_string(),
            float(r.gamma_g),
            r.n.to_string(),
            float(r.h),
            r.dofs.to_string(),
            float(r.l2_error),
            float(r.h1_semi_error),
            float(r.triple_error),
            float(r.delta_h),
            r.min_xi.map(float).unwrap_or_default(),
            float(r.residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty-printed JSON array of run records.
pub fn write_json<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    serde_json::to_writer_pretty(out, records)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_rate() {
        assert!((least_squares_rate(&[0.1, 0.05], &[1e-2, 2.5e-3]) - 2.0).abs() < 1e-12);
        let h = [0.2, 0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powf(2.5)).collect();
        assert!((least_squares_rate(&h, &e) - 2.5).abs() < 1e-12);
    }

    fn record(h: f64, e: f64) -> RunRecord {
        RunRecord {
            case: "circle".into(),
            p: 2,
            k: 1,
            gamma_g: 0.1,
            n: (1.0 / h) as usize,
            h,
            dofs: 1,
            l2_error: e * h,
            h1_semi_error: e,
            triple_error: e,
            area_omega_h: 3.0,
            length_gamma_h: 6.0,
            delta_h: h * h,
            min_xi: None,
            residual: 1e-14,
            wall_time_s: 0.0,
        }
    }

    #[test]
    fn rates_need_three_levels() {
        let two = ConvergenceTable::from_records(vec![record(0.1, 0.01), record(0.05, 0.0025)]).unwrap();
        assert!(two.rates.is_none());
        let three =
            ConvergenceTable::from_records(vec![record(0.1, 0.01), record(0.05, 0.0025), record(0.025, 0.000625)])
                .unwrap();
        let rates = three.rates.unwrap();
        assert!((rates.h1_semi - 2.0).abs() < 1e-12);
        assert!((rates.l2 - 3.0).abs() < 1e-12);
        assert!(ConvergenceTable::from_records(Vec::new()).is_err());
    }

    #[test]
    fn csv_header_and_empty_xi() {
        let table = ConvergenceTable::from_records(vec![record(0.1, 0.01)]).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &[table]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "case,p,k,gamma_g,n,h,dofs,l2_error,h1_semi_error,triple_error,delta_h,min_xi,residual"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 13);
        assert_eq!(row[0], "circle");
        assert_eq!(row[11], "");
    }

    #[test]
    fn too_few_levels_rejected() {
        assert!(convergence_study(CaseId::Circle, &[2], &[1], 16, 2, 0.1).is_err());
    }
}
