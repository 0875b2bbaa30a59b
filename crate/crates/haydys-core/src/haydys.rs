//! The Haydys map, gauge fixing and the fixed-point construction of Haydys
//! monopoles near a Bogomolny monopole.
//!
//! ```text
//! κ(∇, Φ, a, Ψ) = ( ∗F_∇ − d_∇Φ − ½∗[a∧a] + [a, Ψ],
//!                   ∗d_∇a − d_∇Ψ − [a, Φ],
//!                   d_∇*a + [Ψ, Φ] )
//! ```
//!
//! Around `c₀ = (m₀, t v₀)` the gauge-fixed map `κ̂(δc) = (κ(c₀ + δc), g(δc))`
//! is regrouped into two pairs: block 1 holds the first row of `κ` and the
//! gauge row, block 2 the second and third rows. In this grouping the
//! linearisation at a real base is `D ⊕ D`.

use alloc::vec::Vec;

use crate::bps::{self, Configuration};
use crate::calculus::{self, ad3, add3, bwd, norm_h2, scale3, sub3, Stencil};
use crate::field::{Field0, Field1, Pair};
use crate::krylov::{CgStats, KVec};
use crate::linops::LinearizedOperator;
use crate::{Error, Result};

/// The three rows of `κ`, or of anything with the same shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Rows {
    pub first: Field1,
    pub second: Field1,
    pub third: Field0,
}

impl Rows {
    /// Interior L² norms of the three rows.
    pub fn norms(&self) -> [f64; 3] {
        [self.first.l2_norm(), self.second.l2_norm(), self.third.l2_norm()]
    }

    /// Interior L² norm of the whole triple.
    pub fn l2_norm(&self) -> f64 {
        let [a, b, c] = self.norms();
        libm::sqrt(a * a + b * b + c * c)
    }

    pub fn sub(&self, o: &Rows) -> Result<Rows> {
        Ok(Rows { first: self.first.sub(&o.first)?, second: self.second.sub(&o.second)?, third: self.third.sub(&o.third)? })
    }

    /// Block form `((first, gauge), (second, third))`.
    pub fn stack(self, gauge: Field0) -> PairStack {
        PairStack { u1: Pair { one: self.first, zero: gauge }, u2: Pair { one: self.second, zero: self.third } }
    }
}

/// `u = (u₁, u₂)`, two pairs on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PairStack {
    pub u1: Pair,
    pub u2: Pair,
}

impl PairStack {
    pub fn zeros(grid: &crate::Grid) -> PairStack {
        PairStack { u1: Pair::zeros(grid), u2: Pair::zeros(grid) }
    }

    pub fn new(u1: Pair, u2: Pair) -> Result<PairStack> {
        u1.grid().check(u2.grid())?;
        Ok(PairStack { u1, u2 })
    }

    pub fn l2_norm(&self) -> f64 {
        KVec::norm(self)
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }
}

impl KVec for PairStack {
    fn dot(&self, o: &Self) -> f64 {
        self.u1.dot(&o.u1) + self.u2.dot(&o.u2)
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        self.u1.axpy(a, &x.u1);
        self.u2.axpy(a, &x.u2);
    }

    fn scale_mut(&mut self, a: f64) {
        self.u1.scale_mut(a);
        self.u2.scale_mut(a);
    }

    fn zero_like(&self) -> Self {
        PairStack { u1: self.u1.zero_like(), u2: self.u2.zero_like() }
    }
}

/// `κ(c)` on interior sites.
pub fn kappa(c: &Configuration) -> Rows {
    rows(c, 1.0)
}

/// The Kapustin–Witten residual: `κ` with the signs of `d_∇Ψ` and `[a, Φ]`
/// flipped in the second row. The first and third rows agree with `κ`.
pub fn kw_residual(c: &Configuration) -> Rows {
    rows(c, -1.0)
}

fn rows(c: &Configuration, sign: f64) -> Rows {
    let g = c.grid();
    let st = Stencil::new(g);
    let first = calculus::interior1(g, |s| {
        let (na, p, a, psi) = (&c.nabla.data[s], c.phi.data[s], &c.a.data[s], c.psi.data[s]);
        let f = add3(st.curl(&c.nabla.data, s), scale3(0.5, bwd(na, na)));
        let dphi = add3(st.grad(&c.phi.data, s), ad3(na, p));
        let quad = sub3(ad3(a, psi), scale3(0.5, bwd(a, a)));
        add3(sub3(f, dphi), quad)
    });
    let second = calculus::interior1(g, |s| {
        let (na, p, a, psi) = (&c.nabla.data[s], c.phi.data[s], &c.a.data[s], c.psi.data[s]);
        let da = add3(st.curl(&c.a.data, s), bwd(na, a));
        let dpsi = add3(st.grad(&c.psi.data, s), ad3(na, psi));
        sub3(da, scale3(sign, add3(dpsi, ad3(a, p))))
    });
    let third = calculus::interior0(g, |s| {
        let (na, p, a, psi) = (&c.nabla.data[s], c.phi.data[s], &c.a.data[s], c.psi.data[s]);
        let div = st.div(&c.a.data, s) + na[0].bracket(a[0]) + na[1].bracket(a[1]) + na[2].bracket(a[2]);
        psi.bracket(p) - div
    });
    Rows { first, second, third }
}

/// A perturbation `δc = (b₁, φ, b₂, ψ)`: `dm = (b₁, φ)`, `dv = (b₂, ψ)`.
pub type Perturbation = PairStack;

fn check(c0: &Configuration, dc: &Perturbation) -> Result<()> {
    c0.grid().check(dc.u1.grid())?;
    c0.grid().check(dc.u2.grid())
}

/// `c₀ + δc`.
pub fn displace(c0: &Configuration, dc: &Perturbation) -> Result<Configuration> {
    check(c0, dc)?;
    Ok(Configuration {
        nabla: c0.nabla.add(&dc.u1.one)?,
        phi: c0.phi.add(&dc.u1.zero)?,
        a: c0.a.add(&dc.u2.one)?,
        psi: c0.psi.add(&dc.u2.zero)?,
    })
}

/// `g_{c₀}(δc) = d₁*(b₁, φ) − ∗[a₀∧∗b₂] − [Ψ₀, ψ]`, where
/// `d₁*(b, φ) = d_∇₀*b + [φ, Φ₀]` and `∗[a₀∧∗b₂] = Σ_i [a₀_i, b₂_i]`.
/// `a₀` and `Ψ₀` are the imaginary part of `c₀`.
pub fn gauge_fix_residual(c0: &Configuration, dc: &Perturbation) -> Result<Field0> {
    check(c0, dc)?;
    let g = c0.grid();
    let st = Stencil::new(g);
    let (b1, phi, b2, psi) = (&dc.u1.one, &dc.u1.zero, &dc.u2.one, &dc.u2.zero);
    Ok(calculus::interior0(g, |s| {
        let (na, p0, a0) = (&c0.nabla.data[s], c0.phi.data[s], &c0.a.data[s]);
        let b = &b1.data[s];
        let div = st.div(&b1.data, s) + na[0].bracket(b[0]) + na[1].bracket(b[1]) + na[2].bracket(b[2]);
        let c = &b2.data[s];
        let wedge = a0[0].bracket(c[0]) + a0[1].bracket(c[1]) + a0[2].bracket(c[2]);
        phi.data[s].bracket(p0) - div - wedge - c0.psi.data[s].bracket(psi.data[s])
    }))
}

/// `dκ_{c₀}(δc)`, the derivative of `κ` at `c₀` in the direction `δc`:
///
/// ```text
/// ( d₂(b₁, φ) − ∗[a₀∧b₂] + [b₂, Ψ₀] + [a₀, ψ],
///   d₂(b₂, ψ) + ∗[b₁∧a₀] − [b₁, Ψ₀] − [a₀, φ],
///   d₁*(b₂, ψ) − ∗[b₁∧∗a₀] + [Ψ₀, φ] )
/// ```
///
/// with `d₂(b, φ) = ∗d_∇₀b − d_∇₀φ − [b, Φ₀]`.
pub fn linearized_kappa(c0: &Configuration, dc: &Perturbation) -> Result<Rows> {
    check(c0, dc)?;
    let g = c0.grid();
    let st = Stencil::new(g);
    let (b1, phi, b2, psi) = (&dc.u1.one, &dc.u1.zero, &dc.u2.one, &dc.u2.zero);
    let d2 = |s: usize, b: &Field1, f: &Field0| {
        let (na, p0) = (&c0.nabla.data[s], c0.phi.data[s]);
        let curl = add3(st.curl(&b.data, s), bwd(na, &b.data[s]));
        let grad = add3(st.grad(&f.data, s), ad3(na, f.data[s]));
        sub3(sub3(curl, grad), ad3(&b.data[s], p0))
    };
    let d1s = |s: usize, b: &Field1, f: &Field0| {
        let (na, p0) = (&c0.nabla.data[s], c0.phi.data[s]);
        let v = &b.data[s];
        let div = st.div(&b.data, s) + na[0].bracket(v[0]) + na[1].bracket(v[1]) + na[2].bracket(v[2]);
        f.data[s].bracket(p0) - div
    };
    let first = calculus::interior1(g, |s| {
        let (a0, psi0) = (&c0.a.data[s], c0.psi.data[s]);
        let extra = sub3(add3(ad3(&b2.data[s], psi0), ad3(a0, psi.data[s])), bwd(a0, &b2.data[s]));
        add3(d2(s, b1, phi), extra)
    });
    let second = calculus::interior1(g, |s| {
        let (a0, psi0) = (&c0.a.data[s], c0.psi.data[s]);
        let extra = sub3(sub3(bwd(&b1.data[s], a0), ad3(&b1.data[s], psi0)), ad3(a0, phi.data[s]));
        add3(d2(s, b2, psi), extra)
    });
    let third = calculus::interior0(g, |s| {
        let (a0, psi0) = (&c0.a.data[s], c0.psi.data[s]);
        let b = &b1.data[s];
        let inner = b[0].bracket(a0[0]) + b[1].bracket(a0[1]) + b[2].bracket(a0[2]);
        d1s(s, b2, psi) - inner + psi0.bracket(phi.data[s])
    });
    Ok(Rows { first, second, third })
}

/// `κ̂_{c₀}(δc) − κ̂_{c₀}(0)` in block form.
fn kappa_hat_increment(c0: &Configuration, k0: &Rows, dc: &Perturbation) -> Result<PairStack> {
    let k = kappa(&displace(c0, dc)?).sub(k0)?;
    Ok(k.stack(gauge_fix_residual(c0, dc)?))
}

/// `dκ̂_{c₀}(δc)` in block form.
pub fn linearized_kappa_hat(c0: &Configuration, dc: &Perturbation) -> Result<PairStack> {
    Ok(linearized_kappa(c0, dc)?.stack(gauge_fix_residual(c0, dc)?))
}

/// `(Dδm, Dδv)` at the real part of `c₀`.
fn block_d(op: &LinearizedOperator, dc: &Perturbation) -> Result<PairStack> {
    Ok(PairStack { u1: op.apply_d(&dc.u1)?, u2: op.apply_d(&dc.u2)? })
}

/// `L_{c₀}(δc) = (dκ̂_{c₀}(δc) − (Dδm, Dδv)) / t` for `c₀ = (m₀, t v₀)`.
/// `op` must be built at `m₀`. The result only contains brackets with `v₀`.
pub fn l_term(op: &LinearizedOperator, c0: &Configuration, t: f64, dc: &Perturbation) -> Result<PairStack> {
    if t == 0.0 || !t.is_finite() {
        return Err(Error::InvalidArgument("t must be finite and nonzero"));
    }
    let mut out = linearized_kappa_hat(c0, dc)?;
    let d = block_d(op, dc)?;
    out.axpy(-1.0, &d);
    out.scale_mut(1.0 / t);
    Ok(out)
}

/// `Q_{c₀}(δc, δc) = κ̂_{c₀}(δc) − κ̂_{c₀}(0) − dκ̂_{c₀}(δc)`, evaluated
/// directly. `κ̂` is quadratic, so this is exact and independent of `c₀`.
pub fn q_term(c0: &Configuration, dc: &Perturbation) -> Result<PairStack> {
    let k0 = kappa(c0);
    let mut out = kappa_hat_increment(c0, &k0, dc)?;
    out.axpy(-1.0, &linearized_kappa_hat(c0, dc)?);
    Ok(out)
}

/// Runs two independent closures, possibly concurrently.
pub trait Parallel {
    fn join<A, B, RA, RB>(&self, a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send;
}

/// Runs `a` then `b` on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Parallel for Sequential {
    fn join<A, B, RA, RB>(&self, a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send,
    {
        (a(), b())
    }
}

/// Controls for [`HaydysProblem::solve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Stop when `‖u_{n+1} − u_n‖ ≤ tol ‖u_n‖`.
    pub tol: f64,
    pub max_outer: usize,
    /// Relative tolerance of each Green solve.
    pub cg_tol: f64,
    pub cg_max: usize,
    /// Record `‖u‖_{H₂}` per iteration.
    pub track_h2: bool,
}

impl SolveOptions {
    pub fn new(tol: f64, max_outer: usize, op: &LinearizedOperator) -> SolveOptions {
        SolveOptions { tol, max_outer, cg_tol: op.cg_tol, cg_max: op.cg_max, track_h2: false }
    }
}

/// One outer iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    /// `‖u_{n+1} − u_n‖`.
    pub increment: f64,
    /// `‖u_{n+1} − u_n‖ / ‖u_n − u_{n−1}‖`, absent on the first step.
    pub ratio: Option<f64>,
    /// `‖u_{n+1}‖`.
    pub u_norm: f64,
    /// `‖u_{n+1}‖_{H₂}` when tracked.
    pub u_h2: Option<f64>,
    /// `‖κ(c_n)‖ + ‖g(δc_n)‖` at the configuration the step started from.
    pub residual: f64,
    /// CG iterations of the two Green solves.
    pub cg_iterations: [usize; 2],
}

/// Outcome of a fixed-point solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub t: f64,
    pub s: f64,
    pub norm_dstar: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Three consecutive ratios at or above one.
    pub diverged: bool,
    pub history: Vec<IterationRecord>,
    /// `‖κ(c)‖` per row at the output.
    pub kappa_norms: [f64; 3],
    /// `‖g_{c₀}(δc)‖` at the output.
    pub gauge_residual: f64,
    /// `‖(a, Ψ)‖` of the output.
    pub imaginary_norm: f64,
    /// `‖∗F − d_∇Φ‖` of the base, the discretisation floor.
    pub floor: f64,
}

impl SolveReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.history.iter().filter_map(|h| h.ratio).collect()
    }

    /// `‖κ(c)‖ + ‖g(δc)‖`.
    pub fn total_residual(&self) -> f64 {
        let [a, b, c] = self.kappa_norms;
        libm::sqrt(a * a + b * b + c * c) + self.gauge_residual
    }

    /// `‖u₂ − u₁‖ / ‖u₁ − u₀‖`, the contraction measured before the
    /// increments reach the precision of the Green solves.
    pub fn contraction(&self) -> Option<f64> {
        self.history.get(1).and_then(|h| h.ratio)
    }

    /// All ratios are below one.
    pub fn monotone(&self) -> bool {
        self.ratios().iter().all(|&r| r < 1.0)
    }
}

/// The output of a solve.
#[derive(Clone, Debug)]
pub struct Solution {
    pub config: Configuration,
    pub u: PairStack,
    pub report: SolveReport,
}

/// One probe of [`HaydysProblem::t_max_probe`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub t: f64,
    pub max_ratio: f64,
    pub contracted: bool,
}

/// Result of the `t_max` search with the spectral surrogates.
#[derive(Clone, Debug, PartialEq)]
pub struct TmaxReport {
    pub t_max: f64,
    pub probes: Vec<Probe>,
    /// `‖G‖ ≈ 1/λ_min(DD*)`.
    pub green_norm: f64,
    pub norm_dstar: f64,
}

/// The fixed-point problem around `(m₀, t v₀)` for a unit tangent `v₀`.
pub struct HaydysProblem<'a> {
    op: &'a LinearizedOperator,
    m0: Configuration,
    v0: Pair,
    norm_dstar: f64,
    /// `κ(m₀, v₀)` in block form with a zero gauge row.
    kappa0: PairStack,
    floor: f64,
}

impl<'a> HaydysProblem<'a> {
    /// `op` must be built at the real configuration `m0`; `norm_dstar` is
    /// `‖D*‖`. `v0` must have unit norm and lie in `ker D`.
    pub fn new(op: &'a LinearizedOperator, m0: &Configuration, v0: &Pair, norm_dstar: f64) -> Result<HaydysProblem<'a>> {
        op.grid().check(m0.grid())?;
        op.grid().check(v0.grid())?;
        if !(norm_dstar > 0.0) || !norm_dstar.is_finite() {
            return Err(Error::InvalidArgument("norm of D* must be positive"));
        }
        if libm::fabs(v0.l2_norm() - 1.0) > 1e-6 {
            return Err(Error::InvalidArgument("tangent vector must have unit norm"));
        }
        if op.apply_d(v0)?.l2_norm() > 1e-5 {
            return Err(Error::InvalidArgument("tangent vector is not in the kernel of D"));
        }
        let m0 = Configuration::real(m0.nabla.clone(), m0.phi.clone())?;
        let k = kappa(&Configuration::from_parts(&m0.real_part(), v0)?);
        let floor = bps::bogomolny_residual(&m0).l2_norm();
        Ok(HaydysProblem {
            op,
            kappa0: k.stack(Field0::zeros(m0.grid())),
            m0,
            v0: v0.clone(),
            norm_dstar,
            floor,
        })
    }

    pub fn norm_dstar(&self) -> f64 {
        self.norm_dstar
    }

    /// `s(t) = t/‖D*‖`.
    pub fn s(&self, t: f64) -> f64 {
        t / self.norm_dstar
    }

    /// `c₀ = (m₀, t v₀)`.
    pub fn base(&self, t: f64) -> Configuration {
        let mut c = self.m0.clone();
        c.a = self.v0.one.scaled(t);
        c.psi = self.v0.zero.scaled(t);
        c
    }

    fn dstar(&self, u: &PairStack, s: f64, par: &impl Parallel) -> Result<Perturbation> {
        let (a, b) = par.join(|| self.op.apply_dstar(&u.u1), || self.op.apply_dstar(&u.u2));
        let mut dc = PairStack { u1: a?, u2: b? };
        dc.scale_mut(s);
        Ok(dc)
    }

    fn green(&self, r: &PairStack, x0: Option<PairStack>, opts: &SolveOptions, par: &impl Parallel) -> Result<(PairStack, [CgStats; 2])> {
        let (w1, w2) = match x0 {
            Some(x) => (Some(x.u1), Some(x.u2)),
            None => (None, None),
        };
        let (a, b) = par.join(
            || self.op.green_solve_from(&r.u1, w1, opts.cg_tol, opts.cg_max),
            || self.op.green_solve_from(&r.u2, w2, opts.cg_tol, opts.cg_max),
        );
        let (a, b) = (a?, b?);
        Ok((PairStack { u1: a.0, u2: b.0 }, [a.1, b.1]))
    }

    fn u_h2(&self, u: &PairStack) -> Result<f64> {
        let h1 = norm_h2(&self.m0.nabla, &self.m0.phi, &u.u1)?;
        let h2 = norm_h2(&self.m0.nabla, &self.m0.phi, &u.u2)?;
        Ok(libm::sqrt(h1 * h1 + h2 * h2))
    }

    /// Iterates `u ↦ F(u)` from `u_init` (zero by default), where
    ///
    /// ```text
    /// F(u) = −(t²/s) G(κ(m₀, v₀), 0) − t G(L(D*u)) − s G(Q(D*u, D*u))
    /// ```
    ///
    /// and `s = t/‖D*‖`. The three Green terms share one right-hand side
    /// per block. Returns `c = (m₀ + s D*u₁, t v₀ + s D*u₂)`.
    pub fn solve(&self, t: f64, opts: &SolveOptions, u_init: Option<PairStack>, par: &impl Parallel) -> Result<Solution> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument("t must be finite and nonnegative"));
        }
        if !(opts.tol > 0.0) || opts.max_outer == 0 {
            return Err(Error::InvalidArgument("tolerance must be positive and max_outer nonzero"));
        }
        let grid = self.m0.grid();
        let c0 = self.base(t);
        let k_c0 = kappa(&c0);
        if t == 0.0 {
            let k = k_c0.norms();
            let report = SolveReport {
                t,
                s: 0.0,
                norm_dstar: self.norm_dstar,
                iterations: 1,
                converged: true,
                diverged: false,
                history: alloc::vec![IterationRecord {
                    increment: 0.0,
                    ratio: None,
                    u_norm: 0.0,
                    u_h2: if opts.track_h2 { Some(0.0) } else { None },
                    residual: k_c0.l2_norm(),
                    cg_iterations: [0, 0],
                }],
                kappa_norms: k,
                gauge_residual: 0.0,
                imaginary_norm: 0.0,
                floor: self.floor,
            };
            return Ok(Solution { config: c0, u: PairStack::zeros(grid), report });
        }
        let s = self.s(t);
        let mut base_rhs = self.kappa0.clone();
        base_rhs.scale_mut(t * t);

        let mut u = match u_init {
            Some(u) => {
                grid.check(u.u1.grid())?;
                grid.check(u.u2.grid())?;
                u
            }
            None => PairStack::zeros(grid),
        };
        let mut history = Vec::new();
        let mut prev_inc: Option<f64> = None;
        let mut above_one = 0;
        let mut converged = false;
        let mut diverged = false;
        let mut warm: Option<PairStack> = None;
        for _ in 0..opts.max_outer {
            let dc = self.dstar(&u, s, par)?;
            let k_c = kappa(&displace(&c0, &dc)?);
            let gauge = gauge_fix_residual(&c0, &dc)?;
            let residual = k_c.l2_norm() + gauge.l2_norm();
            let inc_k = k_c.sub(&k_c0)?.stack(gauge);
            // r = t²(κ(m₀,v₀),0) + st L(D*u) + s² Q(D*u,D*u)
            let mut r = base_rhs.clone();
            r.axpy(1.0, &inc_k);
            r.axpy(-1.0, &block_d(self.op, &dc)?);
            let (w, stats) = self.green(&r, warm.take(), opts, par)?;
            let mut next = w.clone();
            next.scale_mut(-1.0 / s);
            warm = Some(w);
            if !next.is_finite() {
                return Err(Error::NotConverged { iterations: history.len() + 1, residual: f64::INFINITY });
            }
            let mut diff = next.clone();
            diff.axpy(-1.0, &u);
            let inc = diff.l2_norm();
            let ratio = prev_inc.map(|p| if p > 0.0 { inc / p } else if inc == 0.0 { 0.0 } else { f64::INFINITY });
            let u_norm_prev = u.l2_norm();
            history.push(IterationRecord {
                increment: inc,
                ratio,
                u_norm: next.l2_norm(),
                u_h2: if opts.track_h2 { Some(self.u_h2(&next)?) } else { None },
                residual,
                cg_iterations: [stats[0].iterations, stats[1].iterations],
            });
            u = next;
            if inc <= opts.tol * u_norm_prev {
                converged = true;
                break;
            }
            if let Some(q) = ratio {
                above_one = if q >= 1.0 { above_one + 1 } else { 0 };
                if above_one >= 3 {
                    diverged = true;
                    break;
                }
            }
            prev_inc = Some(inc);
        }

        let dc = self.dstar(&u, s, par)?;
        let config = displace(&c0, &dc)?;
        let k = kappa(&config);
        let gauge = gauge_fix_residual(&c0, &dc)?;
        let imaginary_norm = config.imaginary_part().l2_norm();
        let report = SolveReport {
            t,
            s,
            norm_dstar: self.norm_dstar,
            iterations: history.len(),
            converged,
            diverged,
            history,
            kappa_norms: k.norms(),
            gauge_residual: gauge.l2_norm(),
            imaginary_norm,
            floor: self.floor,
        };
        Ok(Solution { config, u, report })
    }

    /// Dyadic search for the largest `t` whose iteration contracts, that is
    /// keeps every ratio below 0.9 over five ratios (or converges sooner).
    /// Starts at `t_start`, doubling while the probe contracts and halving
    /// while it does not; returns zero if every probe fails.
    pub fn t_max_probe(&self, t_start: f64, opts: &SolveOptions, green_norm: f64, par: &impl Parallel) -> Result<TmaxReport> {
        if !(t_start > 0.0) {
            return Err(Error::InvalidArgument("t_start must be positive"));
        }
        let probe_opts = SolveOptions { max_outer: 6, track_h2: false, ..*opts };
        let mut probes = Vec::new();
        let mut run = |t: f64| -> Result<Probe> {
            let contracted_probe = match self.solve(t, &probe_opts, None, par) {
                Ok(sol) => {
                    let r = sol.report.ratios();
                    let max_ratio = r.iter().copied().fold(0.0, f64::max);
                    let finished = sol.report.converged || r.len() >= 5;
                    Probe { t, max_ratio, contracted: finished && max_ratio < 0.9 }
                }
                Err(Error::NotConverged { .. }) => Probe { t, max_ratio: f64::INFINITY, contracted: false },
                Err(e) => return Err(e),
            };
            probes.push(contracted_probe);
            Ok(contracted_probe)
        };
        let mut t = t_start;
        let mut best = 0.0;
        if run(t)?.contracted {
            best = t;
            for _ in 0..16 {
                t *= 2.0;
                if !run(t)?.contracted {
                    break;
                }
                best = t;
            }
        } else {
            for _ in 0..16 {
                t *= 0.5;
                if run(t)?.contracted {
                    best = t;
                    break;
                }
            }
        }
        Ok(TmaxReport { t_max: best, probes, green_norm, norm_dstar: self.norm_dstar })
    }
}

/// Builds the operator at `m0`, measures `‖D*‖` and runs
/// [`HaydysProblem::solve`] sequentially from `u = 0`.
pub fn fixed_point_solve(m0: &Configuration, v0: &Pair, t: f64, tol: f64, max_outer: usize) -> Result<(Configuration, SolveReport)> {
    let op = LinearizedOperator::new(m0)?;
    let nd = op.norm_dstar(0)?;
    let problem = HaydysProblem::new(&op, m0, v0, nd)?;
    let sol = problem.solve(t, &SolveOptions::new(tol, max_outer, &op), None, &Sequential)?;
    Ok((sol.config, sol.report))
}

/// Empirical `t_max` with the surrogates `‖G‖ ≈ 1/λ_min(DD*)` and `‖D*‖`.
pub fn t_max_probe(m0: &Configuration, v0: &Pair) -> Result<TmaxReport> {
    let op = LinearizedOperator::new(m0)?;
    let nd = op.norm_dstar(0)?;
    let green_norm = 1.0 / op.lambda_min_ddstar(0)?;
    let problem = HaydysProblem::new(&op, m0, v0, nd)?;
    problem.t_max_probe(0.05, &SolveOptions::new(1e-6, 6, &op), green_norm, &Sequential)
}
