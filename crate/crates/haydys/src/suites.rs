//! Verification suites shared by `verify-all` and the test suite.

use haydys_core::bps::{self, Configuration};
use haydys_core::dimred::{self, selfdual_part, vafa_witten_iso};
use haydys_core::haydys::{
    displace, gauge_fix_residual, kappa, l_term, linearized_kappa, q_term, HaydysProblem, PairStack, SolveOptions,
};
use haydys_core::krylov::KVec;
use haydys_core::linear_model::{self, ComplexStructureId, IdentityReport, LMPoint, Su};
use haydys_core::linops::{Direction, LinearizedOperator};
use haydys_core::rng::{self, TrialRng};
use haydys_core::{Field0, Field1, Grid, Pair};
use serde::Serialize;
use serde_json::{json, Value};

use crate::parallel::Threads;

/// One named quantity compared with a bound.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, max: f64) -> Check {
        Check { name: name.into(), value, bound: format!("<= {max:e}"), passed: value <= max }
    }

    pub fn at_least(name: &str, value: f64, min: f64) -> Check {
        Check { name: name.into(), value, bound: format!(">= {min:e}"), passed: value >= min }
    }

    pub fn within(name: &str, value: f64, target: f64, tol: f64) -> Check {
        Check {
            name: name.into(),
            value,
            bound: format!("{target} +- {tol}"),
            passed: (value - target).abs() <= tol,
        }
    }

    pub fn flag(name: &str, ok: bool) -> Check {
        Check { name: name.into(), value: if ok { 1.0 } else { 0.0 }, bound: "== 1".into(), passed: ok }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn from_identities(prefix: &str, rep: &IdentityReport, out: &mut Vec<Check>) {
    for c in &rep.checks {
        out.push(Check::at_most(&format!("{prefix}: {}", c.name), c.max_defect, c.tolerance));
    }
}

/// Every identity of the linear model over su(N).
pub fn linear_model_identities(n: usize, trials: usize, rng: &mut TrialRng) -> haydys_core::Result<IdentityReport> {
    let mut rep = linear_model::clifford_check(n, trials, rng)?;
    rep.merge(linear_model::moment_transform_check(n, trials, rng)?);
    rep.merge(linear_model::lagrangian_check(n, trials, rng)?);
    rep.merge(linear_model::equivariance_check(n, trials, rng)?);
    Ok(rep)
}

/// Largest deviation of the log-log slope of the Hamiltonian finite
/// difference from one, over all nine structures and `trials` points,
/// and the largest error relative to `|ξ||p||w|` at `ε = 1e−7`.
pub fn hamiltonian_slope(n: usize, trials: usize, rng: &mut TrialRng) -> (f64, f64) {
    let eps = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let (mut worst, mut err) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let (p, w, xi) = (LMPoint::random(n, rng), LMPoint::random(n, rng), Su::random(n, rng));
        let scale = xi.norm() * p.norm() * w.norm();
        for id in ComplexStructureId::all() {
            let pts = linear_model::hamiltonian_errors(id, &p, &w, &xi, &eps);
            worst = worst.max((linear_model::loglog_slope(&pts) - 1.0).abs());
            let small = linear_model::hamiltonian_errors(id, &p, &w, &xi, &[1e-7]);
            err = err.max(small[0].1 / scale);
        }
    }
    (worst, err)
}

fn rel(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// A perturbation with independent coefficients on interior sites.
pub fn random_perturbation(g: &Grid, rng: &mut TrialRng) -> PairStack {
    PairStack { u1: Pair::random_interior(g, rng), u2: Pair::random_interior(g, rng) }
}

/// `(m₀, t v₀)` with a random real part and a random `v₀`.
fn random_base(g: &Grid, t: f64, rng: &mut TrialRng) -> (Configuration, Pair) {
    let c = Configuration::random(g, rng);
    let v0 = c.imaginary_part();
    let mut c0 = c.clone();
    c0.a = v0.one.scaled(t);
    c0.psi = v0.zero.scaled(t);
    (c0, v0)
}

/// Defects of the Haydys-map identities on random inputs:
/// third differences, the Taylor reconstruction with `Q` taken at another
/// base point, and the block decomposition.
pub fn kappa_defects(g: &Grid, trials: usize, rng: &mut TrialRng) -> haydys_core::Result<[f64; 3]> {
    let mut worst = [0.0f64; 3];
    for _ in 0..trials {
        let t = 0.5;
        let (c0, _) = random_base(g, t, rng);
        let dc = random_perturbation(g, rng);
        let line = |s: f64| -> haydys_core::Result<Configuration> {
            let mut d = dc.clone();
            d.scale_mut(s);
            displace(&c0, &d)
        };
        let k: Vec<_> = [0.0, 1.0, 2.0, 3.0].iter().map(|&s| line(s).map(|c| kappa(&c))).collect::<Result<_, _>>()?;
        // κ(3) − 3κ(2) + 3κ(1) − κ(0)
        let mut third = k[3].sub(&k[0])?;
        let d21 = k[2].sub(&k[1])?;
        third.first.axpy(-3.0, &d21.first);
        third.second.axpy(-3.0, &d21.second);
        third.third.axpy(-3.0, &d21.third);
        worst[0] = worst[0].max(rel(third.l2_norm(), k[3].l2_norm()));

        // κ(c₀ + εδ) − κ(c₀) − ε dκ_{c₀}(δ) = ε² Q_{c₁}(δ)
        let (c1, _) = random_base(g, t, rng);
        let q = q_term(&c1, &dc)?;
        let dk = linearized_kappa(&c0, &dc)?.stack(Field0::zeros(g));
        for eps in [0.5, 0.25] {
            let ke = kappa(&line(eps)?).sub(&k[0])?.stack(Field0::zeros(g));
            let mut lhs = ke.clone();
            lhs.axpy(-eps, &dk);
            let mut qq = q.clone();
            qq.u1.zero = Field0::zeros(g);
            lhs.axpy(-eps * eps, &qq);
            worst[1] = worst[1].max(rel(lhs.l2_norm(), ke.l2_norm()));
        }

        // κ̂(c₀+δ) = κ̂(c₀) + (Dδm, Dδv) + t L(δ) + Q(δ)
        let m0 = Configuration::real(c0.nabla.clone(), c0.phi.clone())?;
        let op = LinearizedOperator::new(&m0)?;
        let lhs = kappa(&line(1.0)?).stack(gauge_fix_residual(&c0, &dc)?);
        let mut rhs = k[0].clone().stack(Field0::zeros(g));
        rhs.axpy(1.0, &PairStack { u1: op.apply_d(&dc.u1)?, u2: op.apply_d(&dc.u2)? });
        rhs.axpy(t, &l_term(&op, &c0, t, &dc)?);
        rhs.axpy(1.0, &q_term(&c0, &dc)?);
        let mut diff = lhs.clone();
        diff.axpy(-1.0, &rhs);
        worst[2] = worst[2].max(rel(diff.l2_norm(), lhs.l2_norm()));
    }
    Ok(worst)
}

/// Reduction defects and Vafa–Witten self-duality on random fields.
pub fn dimred_defects(g: &Grid, trials: usize, rng: &mut TrialRng) -> haydys_core::Result<(f64, f64)> {
    let (mut reduction, mut vw) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let c = Configuration::random(g, rng);
        reduction = reduction.max(dimred::dimred_check(&c)?.max_defect());
        let b = Field1::random_interior(g, rng);
        let v = vafa_witten_iso(&b);
        vw = vw.max(rel(selfdual_part(&v).sub(&v)?.l2_norm(), v.l2_norm()));
    }
    Ok((reduction, vw))
}

/// Largest correspondence defect over random configurations.
pub fn correspondence_defect(g: &Grid, trials: usize, rng: &mut TrialRng) -> haydys_core::Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let c = Configuration::random(g, rng);
        worst = worst.max(linear_model::field_moment_correspondence(&c)?.max_defect());
    }
    Ok(worst)
}

/// The machine-precision suite: linear model over su(2) and su(3),
/// reduction, correspondence and the Haydys-map identities.
pub fn identity_suite(trials: usize, seed: u64) -> haydys_core::Result<(Vec<Check>, Value)> {
    let mut r = rng::seeded(seed);
    let mut checks = Vec::new();
    let mut details = serde_json::Map::new();
    for n in [2usize, 3] {
        let rep = linear_model_identities(n, trials, &mut r)?;
        from_identities(&format!("su({n})"), &rep, &mut checks);
        details.insert(format!("su{n}"), crate::report::identity_report(&rep));
    }
    let (slope, fd_err) = hamiltonian_slope(2, 20, &mut r);
    checks.push(Check::at_most("hamiltonian finite-difference slope |p - 1|", slope, 0.1));
    checks.push(Check::at_most("hamiltonian finite-difference error at eps = 1e-7", fd_err, 1e-6));
    let small = Grid::with_radius(13, 2.0)?;
    let (reduction, vw) = dimred_defects(&small, 10, &mut r)?;
    checks.push(Check::at_most("dimensional reduction defect", reduction, 1e-12));
    checks.push(Check::at_most("Vafa-Witten image self-duality defect", vw, 1e-12));
    let corr = correspondence_defect(&small, 10, &mut r)?;
    checks.push(Check::at_most("field moment-map correspondence defect", corr, 1e-12));
    let [third, taylor, decomp] = kappa_defects(&small, 3, &mut r)?;
    checks.push(Check::at_most("kappa third difference", third, 1e-12));
    checks.push(Check::at_most("kappa Taylor expansion with Q at another base", taylor, 1e-12));
    checks.push(Check::at_most("kappa-hat decomposition reconstruction", decomp, 1e-12));
    Ok((checks, Value::Object(details)))
}

/// Lattice spacing of the default grid, `n = 65` at `R = 8`.
pub const DEFAULT_H: f64 = 0.25;

/// One percent at the default spacing, growing like `h²` on coarser grids.
pub fn pairing_tolerance(g: &Grid) -> f64 {
    let r = g.h() / DEFAULT_H;
    0.01 * (r * r).max(1.0)
}

/// Diagnostics of the charge-1 seed on `g`.
pub fn seed_suite(g: &Grid) -> haydys_core::Result<(Vec<Check>, Value)> {
    let m = bps::bps_seed(g);
    let res = bps::bogomolny_residual(&m).l2_norm();
    let e = bps::energy(&m);
    let pairing = (e.curvature - e.grad_phi).abs() / (0.5 * (e.curvature + e.grad_phi));
    let shell = (0.75 * g.radius()).min(6.0);
    let q = bps::charge(&m, shell)?;
    let qr = bps::charge(&bps::reflect(&m), shell)?;
    let asym = bps::asymptotic_check(&m)?;
    let checks = vec![
        Check::at_most("Bogomolny energy pairing |F^2 - (dPhi)^2| / mean", pairing, pairing_tolerance(g)),
        Check::within("charge", q, 1.0, 0.05),
        Check::within("charge of the reflected seed", qr, -1.0, 0.05),
        Check::within("asymptotic c0", asym.c0, 1.0, 0.02),
        Check::within("asymptotic c1", asym.c1, 2.0, 0.2),
        Check::within("decay slope of |dPhi|", asym.decay_slope, -2.0, 0.2),
    ];
    let details = json!({
        "bogomolny_residual": res,
        "energy": e.total(),
        "energy_terms": e.as_array().iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "charge_shell": shell,
        "charge": q,
        "asymptotics": {
            "c0": asym.c0, "c1": asym.c1, "remainder_rms": asym.remainder_rms,
            "decay_slope": asym.decay_slope, "shells": asym.shells, "samples": asym.samples,
        },
    });
    Ok((checks, details))
}

/// `max |⟨Dv, w⟩ − ⟨v, D*w⟩| / (‖Dv‖‖w‖ + ‖v‖‖D*w‖)` over random pairs.
pub fn adjointness_defect(op: &LinearizedOperator, trials: usize, rng: &mut TrialRng) -> haydys_core::Result<f64> {
    let g = op.grid().clone();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let (v, w) = (Pair::random_interior(&g, rng), Pair::random_interior(&g, rng));
        let (dv, dsw) = (op.apply_d(&v)?, op.apply_dstar(&w)?);
        let (lhs, rhs) = (dv.l2_inner(&w)?, v.l2_inner(&dsw)?);
        let scale = dv.l2_norm() * w.l2_norm() + v.l2_norm() * dsw.l2_norm();
        worst = worst.max(rel((lhs - rhs).abs(), scale));
    }
    Ok(worst)
}

/// Spectral checks and one fixed-point solve at `t` along `dir`.
pub fn solver_suite(g: &Grid, dir: Direction, t: f64, seed: u64, threads: Threads) -> haydys_core::Result<(Vec<Check>, Value)> {
    let m = bps::bps_seed(g);
    let op = LinearizedOperator::new(&m)?;
    let mut r = rng::seeded(seed);
    let adj = adjointness_defect(&op, 5, &mut r)?;
    let lmin = op.lambda_min_ddstar(seed)?;
    let nd = op.norm_dstar(seed)?;
    let v0 = op.make_tangent(dir)?;
    let problem = HaydysProblem::new(&op, &m, &v0, nd)?;
    let tol = 1e-6;
    let sol = problem.solve(t, &SolveOptions::new(tol, 60, &op), None, &threads)?;
    let rep = &sol.report;
    let checks = vec![
        Check::at_most("adjointness of D and D*", adj, 1e-12),
        Check::at_least("lambda_min(DD*)", lmin, f64::MIN_POSITIVE),
        Check::flag("fixed point converged", rep.converged),
        Check::flag("contraction ratios below one", rep.monotone()),
        Check::at_most("residual / (tol + floor)", rep.total_residual() / (tol + rep.floor), 5.0),
        Check::at_least("|(a, Psi)| / t", rep.imaginary_norm / t, 0.5),
    ];
    let details = json!({
        "lambda_min": lmin,
        "norm_dstar": nd,
        "direction": dir.name(),
        "solve": crate::report::solve_report(rep),
    });
    Ok((checks, details))
}
