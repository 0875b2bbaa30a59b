//! JSON reports. Every report is `{"meta": …, "result": …}`.

use std::time::Instant;

use haydys_core::haydys::{SolveReport, TmaxReport};
use haydys_core::linear_model::IdentityReport;
use haydys_core::Grid;
use serde::Serialize;
use serde_json::{json, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct GridMeta {
    pub n: usize,
    pub h: f64,
    pub radius: f64,
    pub interior_sites: usize,
}

impl From<&Grid> for GridMeta {
    fn from(g: &Grid) -> GridMeta {
        GridMeta { n: g.n(), h: g.h(), radius: g.radius(), interior_sites: g.interior_count() }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Meta {
    pub version: &'static str,
    pub command: String,
    pub grid: Option<GridMeta>,
    pub rng_seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
}

/// Wall clock for reports. A fixed clock always reads zero, which makes
/// reports from identical runs byte-identical.
#[derive(Clone, Copy, Debug)]
pub struct Clock {
    start: Instant,
    fixed: bool,
}

impl Clock {
    pub fn start(fixed: bool) -> Clock {
        Clock { start: Instant::now(), fixed }
    }

    pub fn elapsed(&self) -> f64 {
        if self.fixed {
            0.0
        } else {
            self.start.elapsed().as_secs_f64()
        }
    }
}

pub fn envelope(meta: &Meta, result: Value) -> Value {
    json!({ "meta": meta, "result": result })
}

pub fn solve_report(r: &SolveReport) -> Value {
    let history: Vec<Value> = r
        .history
        .iter()
        .map(|h| {
            json!({
                "increment": h.increment,
                "ratio": h.ratio,
                "u_norm": h.u_norm,
                "u_h2": h.u_h2,
                "residual": h.residual,
                "cg_iterations": h.cg_iterations,
            })
        })
        .collect();
    json!({
        "t": r.t,
        "s": r.s,
        "norm_dstar": r.norm_dstar,
        "iterations": r.iterations,
        "converged": r.converged,
        "diverged": r.diverged,
        "monotone": r.monotone(),
        "contraction": r.contraction(),
        "ratios": r.ratios(),
        "kappa_norms": r.kappa_norms,
        "gauge_residual": r.gauge_residual,
        "total_residual": r.total_residual(),
        "imaginary_norm": r.imaginary_norm,
        "floor": r.floor,
        "history": history,
    })
}

pub fn tmax_report(r: &TmaxReport) -> Value {
    let probes: Vec<Value> = r
        .probes
        .iter()
        .map(|p| json!({ "t": p.t, "max_ratio": p.max_ratio, "contracted": p.contracted }))
        .collect();
    json!({
        "t_max": r.t_max,
        "green_norm": r.green_norm,
        "norm_dstar": r.norm_dstar,
        "probes": probes,
    })
}

pub fn identity_report(r: &IdentityReport) -> Value {
    let checks: Vec<Value> = r
        .checks
        .iter()
        .map(|c| json!({ "name": c.name, "max_defect": c.max_defect, "tolerance": c.tolerance, "passed": c.passed() }))
        .collect();
    let refuted: Vec<Value> =
        r.refuted.iter().map(|c| json!({ "name": c.name, "min_defect": c.max_defect })).collect();
    json!({ "checks": checks, "refuted": refuted, "all_passed": r.all_passed() })
}
