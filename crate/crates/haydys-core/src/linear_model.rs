//! The quaternionic linear model `V_ℂ = g ⊗ ℍ ⊕ i(g ⊗ ℍ)` and its moment
//! maps, plus their evaluation on lattice configurations.
//!
//! A point is `(A, B)` with `A = A₀ + iA₁ + jA₂ + kA₃`. The quaternion units
//! act on the left:
//!
//! ```text
//! I(A) = (−A₁,  A₀, −A₃,  A₂)
//! J(A) = (−A₂,  A₃,  A₀, −A₁)
//! K(A) = (−A₃, −A₂,  A₁,  A₀)
//! ```
//!
//! and for `L ∈ {I, J, K}` the three structures on `V_ℂ` are
//! `L₁(A, B) = (−B, A)`, `L₂(A, B) = (LA, −LB)`, `L₃(A, B) = (LB, LA)`.
//! Symplectic forms are `ω_X(x, y) = ⟨Xx, y⟩`, and the group acts by
//! `ξ*(A, B) = ([ξ, A], [ξ, B])`.
//!
//! This side is the one for which the moment-map formulas satisfy
//! `d⟨ξ, μ_X⟩ = ω_X(ξ*, ·)`. With it `L₂M₂ = ι N₂` for cyclic `(L, M, N)`,
//! hence `I₂J₂K₂ = −ι` with `ι = diag(1, −1)`, and `I₃J₃K₃` is the block
//! swap with a minus sign.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Neg, Sub};

use num_complex::Complex64;

use crate::bps::Configuration;
use crate::calculus::{self, two_form_entry};
use crate::field::Field0;
use crate::haydys::kappa;
use crate::lie::LieValue;
use crate::rng::{self, TrialRng};
use crate::{Error, Result};

/// An element of su(N) as an anti-Hermitian traceless matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Su {
    n: usize,
    m: Vec<Complex64>,
}

impl Su {
    pub fn zero(n: usize) -> Su {
        Su { n, m: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    /// `Σ x_a τ_a` with `τ_a = iσ_a/2`.
    pub fn from_lie(x: LieValue) -> Su {
        let [a, b, c] = x.0;
        let h = 0.5;
        Su {
            n: 2,
            m: vec![
                Complex64::new(0.0, h * c),
                Complex64::new(h * b, h * a),
                Complex64::new(-h * b, h * a),
                Complex64::new(0.0, -h * c),
            ],
        }
    }

    /// Random element with standard normal entries before projection.
    pub fn random(n: usize, rng: &mut TrialRng) -> Su {
        let mut z: Vec<Complex64> = (0..n * n).map(|_| Complex64::new(rng::normal(rng), rng::normal(rng))).collect();
        for i in 0..n {
            for j in 0..i {
                let x = 0.5 * (z[i * n + j] - z[j * n + i].conj());
                z[i * n + j] = x;
                z[j * n + i] = -x.conj();
            }
            z[i * n + i] = Complex64::new(0.0, z[i * n + i].im);
        }
        let tr: f64 = (0..n).map(|i| z[i * n + i].im).sum::<f64>() / n as f64;
        for i in 0..n {
            z[i * n + i].im -= tr;
        }
        Su { n, m: z }
    }

    fn mul(&self, o: &Su) -> Vec<Complex64> {
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.m[i * n + k];
                for j in 0..n {
                    out[i * n + j] += a * o.m[k * n + j];
                }
            }
        }
        out
    }

    pub fn bracket(&self, o: &Su) -> Su {
        let (xy, yx) = (self.mul(o), o.mul(self));
        Su { n: self.n, m: xy.iter().zip(yx.iter()).map(|(a, b)| a - b).collect() }
    }

    /// `⟨x, y⟩ = −2 Re tr(xy)`.
    pub fn inner(&self, o: &Su) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for k in 0..n {
                acc += (self.m[i * n + k] * o.m[k * n + i]).re;
            }
        }
        -2.0 * acc
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.inner(self).max(0.0))
    }

    pub fn scaled(&self, a: f64) -> Su {
        Su { n: self.n, m: self.m.iter().map(|z| z * a).collect() }
    }

    /// `u x u†`.
    pub fn conjugate(&self, u: &Unitary) -> Su {
        let n = self.n;
        let mut out = Su::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    for l in 0..n {
                        acc += u.m[i * n + k] * self.m[k * n + l] * u.m[j * n + l].conj();
                    }
                }
                out.m[i * n + j] = acc;
            }
        }
        out
    }
}

impl Add for Su {
    type Output = Su;
    fn add(self, o: Su) -> Su {
        Su { n: self.n, m: self.m.iter().zip(o.m.iter()).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for Su {
    type Output = Su;
    fn sub(self, o: Su) -> Su {
        Su { n: self.n, m: self.m.iter().zip(o.m.iter()).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for Su {
    type Output = Su;
    fn neg(self) -> Su {
        self.scaled(-1.0)
    }
}

/// A unitary matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary {
    n: usize,
    m: Vec<Complex64>,
}

impl Unitary {
    /// Gram–Schmidt on a matrix with standard normal entries.
    pub fn random(n: usize, rng: &mut TrialRng) -> Unitary {
        let mut rows: Vec<Vec<Complex64>> =
            (0..n).map(|_| (0..n).map(|_| Complex64::new(rng::normal(rng), rng::normal(rng))).collect()).collect();
        for i in 0..n {
            for j in 0..i {
                let d: Complex64 = (0..n).map(|k| rows[j][k].conj() * rows[i][k]).sum();
                for k in 0..n {
                    let v = rows[j][k];
                    rows[i][k] -= d * v;
                }
            }
            let nrm = libm::sqrt(rows[i].iter().map(|z| z.norm_sqr()).sum::<f64>());
            for z in rows[i].iter_mut() {
                *z /= nrm;
            }
        }
        Unitary { n, m: rows.into_iter().flatten().collect() }
    }

    pub fn rank(&self) -> usize {
        self.n
    }
}

/// The quaternion units acting on the left.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    I,
    J,
    K,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::I, Family::J, Family::K];

    /// Imaginary index `p` with `(p, q, r)` the cyclic triple starting at it.
    fn cyclic(self) -> (usize, usize, usize) {
        match self {
            Family::I => (1, 2, 3),
            Family::J => (2, 3, 1),
            Family::K => (3, 1, 2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::I => "I",
            Family::J => "J",
            Family::K => "K",
        }
    }

    pub fn next(self) -> Family {
        match self {
            Family::I => Family::J,
            Family::J => Family::K,
            Family::K => Family::I,
        }
    }
}

/// Left multiplication by a unit on `(A₀, A₁, A₂, A₃)`.
pub fn quaternion_left<T: Clone + Neg<Output = T>>(f: Family, a: &[T; 4]) -> [T; 4] {
    let [a0, a1, a2, a3] = a.clone();
    match f {
        Family::I => [-a1, a0, -a3, a2],
        Family::J => [-a2, a3, a0, -a1],
        Family::K => [-a3, -a2.clone(), a1, a0],
    }
}

/// One of the nine structures `L_index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComplexStructureId {
    pub family: Family,
    pub index: u8,
}

impl ComplexStructureId {
    pub const fn new(family: Family, index: u8) -> ComplexStructureId {
        ComplexStructureId { family, index }
    }

    pub fn all() -> [ComplexStructureId; 9] {
        let mut out = [ComplexStructureId::new(Family::I, 1); 9];
        for (n, f) in Family::ALL.iter().enumerate() {
            for i in 0..3 {
                out[3 * n + i] = ComplexStructureId::new(*f, i as u8 + 1);
            }
        }
        out
    }
}

/// `(A, B) ∈ V ⊕ V` over su(N).
#[derive(Clone, Debug, PartialEq)]
pub struct LMPoint {
    pub a: [Su; 4],
    pub b: [Su; 4],
}

impl LMPoint {
    pub fn zero(n: usize) -> LMPoint {
        let z = || [Su::zero(n), Su::zero(n), Su::zero(n), Su::zero(n)];
        LMPoint { a: z(), b: z() }
    }

    pub fn random(n: usize, rng: &mut TrialRng) -> LMPoint {
        let mut z = || [Su::random(n, rng), Su::random(n, rng), Su::random(n, rng), Su::random(n, rng)];
        let a = z();
        LMPoint { a, b: z() }
    }

    pub fn rank(&self) -> usize {
        self.a[0].rank()
    }

    pub fn add(&self, o: &LMPoint) -> LMPoint {
        let f = |x: &[Su; 4], y: &[Su; 4]| core::array::from_fn(|i| x[i].clone() + y[i].clone());
        LMPoint { a: f(&self.a, &o.a), b: f(&self.b, &o.b) }
    }

    pub fn sub(&self, o: &LMPoint) -> LMPoint {
        self.add(&o.scaled(-1.0))
    }

    pub fn scaled(&self, s: f64) -> LMPoint {
        LMPoint { a: core::array::from_fn(|i| self.a[i].scaled(s)), b: core::array::from_fn(|i| self.b[i].scaled(s)) }
    }

    /// `⟨(A, B), (A', B')⟩ = Σ ⟨A_i, A'_i⟩ + ⟨B_i, B'_i⟩`.
    pub fn inner(&self, o: &LMPoint) -> f64 {
        (0..4).map(|i| self.a[i].inner(&o.a[i]) + self.b[i].inner(&o.b[i])).sum()
    }

    /// `b((A, B), (A', B')) = ⟨A, A'⟩ − ⟨B, B'⟩`.
    pub fn indefinite(&self, o: &LMPoint) -> f64 {
        (0..4).map(|i| self.a[i].inner(&o.a[i]) - self.b[i].inner(&o.b[i])).sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.inner(self).max(0.0))
    }

    /// `ι(A, B) = (A, −B)`.
    pub fn iota(&self) -> LMPoint {
        LMPoint { a: self.a.clone(), b: core::array::from_fn(|i| -self.b[i].clone()) }
    }

    /// `(A, B) ↦ (B, A)`.
    pub fn swap(&self) -> LMPoint {
        LMPoint { a: self.b.clone(), b: self.a.clone() }
    }

    /// `ξ*(A, B) = ([ξ, A_i], [ξ, B_i])`.
    pub fn infinitesimal(&self, xi: &Su) -> LMPoint {
        LMPoint { a: core::array::from_fn(|i| xi.bracket(&self.a[i])), b: core::array::from_fn(|i| xi.bracket(&self.b[i])) }
    }

    pub fn conjugate(&self, u: &Unitary) -> LMPoint {
        LMPoint { a: core::array::from_fn(|i| self.a[i].conjugate(u)), b: core::array::from_fn(|i| self.b[i].conjugate(u)) }
    }
}

pub fn apply_cs(id: ComplexStructureId, p: &LMPoint) -> LMPoint {
    let l = |x: &[Su; 4]| quaternion_left(id.family, x);
    match id.index {
        1 => LMPoint { a: core::array::from_fn(|i| -p.b[i].clone()), b: p.a.clone() },
        2 => {
            let lb = l(&p.b);
            LMPoint { a: l(&p.a), b: core::array::from_fn(|i| -lb[i].clone()) }
        }
        3 => LMPoint { a: l(&p.b), b: l(&p.a) },
        _ => panic!("complex structure index must be 1, 2 or 3"),
    }
}

/// `ω_X(x, y) = ⟨Xx, y⟩`.
pub fn omega(id: ComplexStructureId, x: &LMPoint, y: &LMPoint) -> f64 {
    apply_cs(id, x).inner(y)
}

/// The nine moment maps, indexed `[family][index − 1]`.
pub type Moments<X> = [[X; 3]; 3];

/// Moment maps with the bracket supplied by the caller, so the same
/// formulas serve matrices and lattice fields:
///
/// ```text
/// μ_{L₁} = Σ_i [A_i, B_i]
/// μ_{L₂} = ([A₀,A_p] + [A_q,A_r]) − ([B₀,B_p] + [B_q,B_r])
/// μ_{L₃} = ([A₀,B_p] + [A_q,B_r]) − ([A_p,B₀] + [A_r,B_q])
/// ```
///
/// for `(p, q, r)` the cyclic triple of `L`.
pub fn moments_with<T, X, F>(a: &[T; 4], b: &[T; 4], br: F) -> Moments<X>
where
    X: Clone + Add<Output = X> + Sub<Output = X>,
    F: Fn(&T, &T) -> X,
{
    let m1 = br(&a[0], &b[0]) + br(&a[1], &b[1]) + br(&a[2], &b[2]) + br(&a[3], &b[3]);
    let fam = |f: Family| {
        let (p, q, r) = f.cyclic();
        let m2 = (br(&a[0], &a[p]) + br(&a[q], &a[r])) - (br(&b[0], &b[p]) + br(&b[q], &b[r]));
        let m3 = (br(&a[0], &b[p]) + br(&a[q], &b[r])) - (br(&a[p], &b[0]) + br(&a[r], &b[q]));
        [m1.clone(), m2, m3]
    };
    [fam(Family::I), fam(Family::J), fam(Family::K)]
}

/// `ν_p(A) = [A₀, A_p] + [A_q, A_r]` for `p = 1, 2, 3`.
pub fn nu_moment(a: &[Su; 4]) -> [Su; 3] {
    core::array::from_fn(|n| {
        let (p, q, r) = Family::ALL[n].cyclic();
        a[0].bracket(&a[p]) + a[q].bracket(&a[r])
    })
}

pub fn mu_moments(p: &LMPoint) -> Moments<Su> {
    moments_with(&p.a, &p.b, |x: &Su, y: &Su| x.bracket(y))
}

/// Worst defect of one identity over all trials.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub max_defect: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.max_defect <= self.tolerance
    }
}

/// A set of identity checks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
    /// Relations stated in a form that does not hold, with their defect.
    pub refuted: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    pub fn violations(&self) -> Vec<&IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn max_defect(&self) -> f64 {
        self.checks.iter().map(|c| c.max_defect).fold(0.0, f64::max)
    }

    fn record(&mut self, name: &'static str, defect: f64, tolerance: f64) {
        match self.checks.iter_mut().find(|c| c.name == name) {
            Some(c) => c.max_defect = c.max_defect.max(defect),
            None => self.checks.push(IdentityCheck { name, max_defect: defect, tolerance }),
        }
    }

    fn refute(&mut self, name: &'static str, defect: f64) {
        match self.refuted.iter_mut().find(|c| c.name == name) {
            Some(c) => c.max_defect = c.max_defect.min(defect),
            None => self.refuted.push(IdentityCheck { name, max_defect: defect, tolerance: 0.0 }),
        }
    }

    pub fn merge(&mut self, o: IdentityReport) {
        for c in o.checks {
            self.record(c.name, c.max_defect, c.tolerance);
        }
        for c in o.refuted {
            self.refute(c.name, c.max_defect);
        }
    }
}

/// Tolerance for relative defects of the algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-14;

fn rel(x: &LMPoint, y: &LMPoint) -> f64 {
    let scale = x.norm().max(y.norm()).max(1.0);
    x.sub(y).norm() / scale
}

fn rel_su(x: &Su, y: &Su) -> f64 {
    let scale = x.norm().max(y.norm()).max(1.0);
    (x.clone() - y.clone()).norm() / scale
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1"));
    }
    Ok(())
}

/// Relations among the nine structures on random points of `V_ℂ` over
/// su(N): squares, `I₁ = J₁ = K₁`, anti-commutation of
/// `e₁ = I₁, e₂ = I₂, e₃ = J₂, e₄ = K₂` and their independence
/// (`⟨e_a p, e_b p⟩ = δ_ab |p|²`), `L₂M₂ = ι N₂`, and the triple products.
pub fn clifford_check(n: usize, trials: usize, rng: &mut TrialRng) -> Result<IdentityReport> {
    check_trials(trials)?;
    let mut rep = IdentityReport::default();
    let cs = |f, i| ComplexStructureId::new(f, i);
    let e = [cs(Family::I, 1), cs(Family::I, 2), cs(Family::J, 2), cs(Family::K, 2)];
    for _ in 0..trials {
        let p = LMPoint::random(n, rng);
        for id in ComplexStructureId::all() {
            let sq = apply_cs(id, &apply_cs(id, &p));
            rep.record("X^2 = -1 for all nine structures", rel(&sq, &p.scaled(-1.0)), ALGEBRA_TOL);
            let xp = apply_cs(id, &p);
            rep.record("structures preserve the metric", libm::fabs(xp.norm() - p.norm()) / p.norm(), ALGEBRA_TOL);
        }
        let i1 = apply_cs(cs(Family::I, 1), &p);
        let d = rel(&i1, &apply_cs(cs(Family::J, 1), &p)).max(rel(&i1, &apply_cs(cs(Family::K, 1), &p)));
        rep.record("I1 = J1 = K1", d, ALGEBRA_TOL);
        let pn = p.inner(&p);
        for a in 0..4 {
            for b in a + 1..4 {
                let ab = apply_cs(e[a], &apply_cs(e[b], &p));
                let ba = apply_cs(e[b], &apply_cs(e[a], &p));
                rep.record("e_a e_b + e_b e_a = 0 (a != b)", rel(&ab.add(&ba), &LMPoint::zero(n)), ALGEBRA_TOL);
            }
            for b in 0..4 {
                let g = apply_cs(e[a], &p).inner(&apply_cs(e[b], &p));
                let want = if a == b { pn } else { 0.0 };
                rep.record("<e_a p, e_b p> = delta_ab |p|^2", libm::fabs(g - want) / pn, ALGEBRA_TOL);
            }
        }
        for f in Family::ALL {
            let (g, h) = (f.next(), f.next().next());
            let lhs = apply_cs(cs(f, 2), &apply_cs(cs(g, 2), &p));
            rep.record("L2 M2 = iota N2 (cyclic L, M, N)", rel(&lhs, &apply_cs(cs(h, 2), &p).iota()), ALGEBRA_TOL);
            let _ = h;
        }
        let t2 = apply_cs(cs(Family::I, 2), &apply_cs(cs(Family::J, 2), &apply_cs(cs(Family::K, 2), &p)));
        let t3 = apply_cs(cs(Family::I, 3), &apply_cs(cs(Family::J, 3), &apply_cs(cs(Family::K, 3), &p)));
        rep.record("I2 J2 K2 = -iota", rel(&t2, &p.iota().scaled(-1.0)), ALGEBRA_TOL);
        rep.record("I3 J3 K3 = -swap", rel(&t3, &p.swap().scaled(-1.0)), ALGEBRA_TOL);
        rep.refute("I2 J2 K2 = diag(1,-1)", rel(&t2, &p.iota()));
        rep.refute("I3 J3 K3 = diag(1,-1)", rel(&t3, &p.iota()));
    }
    Ok(rep)
}

/// The identities `μ_{L₂}∘M₂ = −μ_{L₂}`, `μ_{L₂}∘M₃ = μ_{L₂}`,
/// `μ_{L₃}∘M₂ = μ_{L₃}`, `μ_{L₃}∘M₃ = −μ_{L₃}` for cyclic `(L, M)`, and the
/// ι-parity `μ_{L₁}∘ι = −μ_{L₁}`, `μ_{L₂}∘ι = μ_{L₂}`, `μ_{L₃}∘ι = −μ_{L₃}`.
pub fn moment_transform_check(n: usize, trials: usize, rng: &mut TrialRng) -> Result<IdentityReport> {
    check_trials(trials)?;
    let mut rep = IdentityReport::default();
    for _ in 0..trials {
        let p = LMPoint::random(n, rng);
        let mu = mu_moments(&p);
        for (li, l) in Family::ALL.iter().enumerate() {
            let m = l.next();
            let m2 = mu_moments(&apply_cs(ComplexStructureId::new(m, 2), &p));
            let m3 = mu_moments(&apply_cs(ComplexStructureId::new(m, 3), &p));
            rep.record("mu_L2 o M2 = -mu_L2", rel_su(&m2[li][1], &-mu[li][1].clone()), ALGEBRA_TOL);
            rep.record("mu_L2 o M3 = mu_L2", rel_su(&m3[li][1], &mu[li][1]), ALGEBRA_TOL);
            rep.record("mu_L3 o M2 = mu_L3", rel_su(&m2[li][2], &mu[li][2]), ALGEBRA_TOL);
            rep.record("mu_L3 o M3 = -mu_L3", rel_su(&m3[li][2], &-mu[li][2].clone()), ALGEBRA_TOL);
        }
        let mi = mu_moments(&p.iota());
        for li in 0..3 {
            rep.record("mu_L1 o iota = -mu_L1", rel_su(&mi[li][0], &-mu[li][0].clone()), ALGEBRA_TOL);
            rep.record("mu_L2 o iota = mu_L2", rel_su(&mi[li][1], &mu[li][1]), ALGEBRA_TOL);
            rep.record("mu_L3 o iota = -mu_L3", rel_su(&mi[li][2], &-mu[li][2].clone()), ALGEBRA_TOL);
        }
        let d = rel_su(&mu[0][0], &mu[1][0]).max(rel_su(&mu[0][0], &mu[2][0]));
        rep.record("mu_I1 = mu_J1 = mu_K1", d, ALGEBRA_TOL);
        let nu = nu_moment(&p.a);
        let pa = LMPoint { a: p.a.clone(), b: LMPoint::zero(n).b };
        let ma = mu_moments(&pa);
        for li in 0..3 {
            rep.record("B = 0: mu_L2 = nu_L(A)", rel_su(&ma[li][1], &nu[li]), ALGEBRA_TOL);
        }
    }
    Ok(rep)
}

/// Tangent vectors to `Fix(ι)` have `B = 0`: `ω_{L₁}` and `ω_{L₃}` vanish on
/// pairs of them and `L₂` keeps them tangent.
pub fn lagrangian_check(n: usize, trials: usize, rng: &mut TrialRng) -> Result<IdentityReport> {
    check_trials(trials)?;
    let mut rep = IdentityReport::default();
    for _ in 0..trials {
        let mut u = LMPoint::random(n, rng);
        let mut v = LMPoint::random(n, rng);
        u.b = LMPoint::zero(n).b;
        v.b = LMPoint::zero(n).b;
        let scale = u.norm() * v.norm();
        for f in Family::ALL {
            rep.record("omega_L1(u, v) = 0 on Fix(iota)", libm::fabs(omega(ComplexStructureId::new(f, 1), &u, &v)) / scale, ALGEBRA_TOL);
            rep.record("omega_L3(u, v) = 0 on Fix(iota)", libm::fabs(omega(ComplexStructureId::new(f, 3), &u, &v)) / scale, ALGEBRA_TOL);
            let lu = apply_cs(ComplexStructureId::new(f, 2), &u);
            let off: f64 = lu.b.iter().map(|x| x.norm()).fold(0.0, f64::max) / u.norm();
            rep.record("L2 keeps Fix(iota) tangent", off, ALGEBRA_TOL);
        }
    }
    Ok(rep)
}

/// Adjoint equivariance `ν(gAg⁻¹) = g ν(A) g⁻¹` and `μ(g·p) = g μ(p) g⁻¹`.
pub fn equivariance_check(n: usize, trials: usize, rng: &mut TrialRng) -> Result<IdentityReport> {
    check_trials(trials)?;
    let mut rep = IdentityReport::default();
    for _ in 0..trials {
        let p = LMPoint::random(n, rng);
        let u = Unitary::random(n, rng);
        let gp = p.conjugate(&u);
        let (nu, gnu) = (nu_moment(&p.a), nu_moment(&gp.a));
        for i in 0..3 {
            rep.record("nu(g.A) = Ad_g nu(A)", rel_su(&gnu[i], &nu[i].conjugate(&u)), 1e-12);
        }
        let (mu, gmu) = (mu_moments(&p), mu_moments(&gp));
        for f in 0..3 {
            for i in 0..3 {
                rep.record("mu(g.p) = Ad_g mu(p)", rel_su(&gmu[f][i], &mu[f][i].conjugate(&u)), 1e-12);
            }
        }
    }
    Ok(rep)
}

/// Forward-difference test of `d⟨ξ, μ_X⟩(w) = ω_X(ξ*, w)` at one point.
/// Returns `(ε, |FD − ω|)` pairs; `μ` is quadratic, so the error is exactly
/// linear in `ε`.
pub fn hamiltonian_errors(id: ComplexStructureId, p: &LMPoint, w: &LMPoint, xi: &Su, eps: &[f64]) -> Vec<(f64, f64)> {
    let (f, i) = (Family::ALL.iter().position(|x| *x == id.family).unwrap(), id.index as usize - 1);
    let base = xi.inner(&mu_moments(p)[f][i]);
    let exact = omega(id, &p.infinitesimal(xi), w);
    eps.iter()
        .map(|&e| {
            let moved = xi.inner(&mu_moments(&p.add(&w.scaled(e)))[f][i]);
            (e, libm::fabs((moved - base) / e - exact))
        })
        .collect()
}

/// Least-squares slope of `log err` against `log ε`.
pub fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| libm::log(p.0)).collect();
    let ys: Vec<f64> = pts.iter().map(|p| libm::log(p.1)).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys.iter()).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slot of the field-level quaternionic coordinates: a Λ⁰ field or the
/// covariant derivative `∇_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Field(usize),
    Nabla(usize),
}

/// How lattice fields fill the quaternionic slots and which row of `κ`
/// each index of moment maps reproduces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConventionTable {
    /// Signs on `Φ`, `Ψ` and `a` in `A = (±Φ, ∇₁, ∇₂, ∇₃)`,
    /// `B = (±Ψ, ±a₁, ±a₂, ±a₃)`.
    pub signs: [f64; 3],
    /// `rows[index − 1] = (row of κ, sign)`: `μ_{·,index} = sign · κ_row`.
    pub rows: [(usize, f64); 3],
}

/// The frozen table: `A = (Φ, ∇)`, `B = (Ψ, a)`, the index-2 triple is the
/// first row of `κ`, the index-3 triple the second, and index 1 is minus
/// the third.
pub const CONVENTION: ConventionTable = ConventionTable { signs: [1.0, 1.0, 1.0], rows: [(3, -1.0), (1, 1.0), (2, 1.0)] };

/// Field-level moment maps at every interior site, using
///
/// ```text
/// [∇_i, X] = (d_∇X)_i,   [X, ∇_i] = −(d_∇X)_i,   [∇_i, ∇_j] = F_ij,
/// ```
///
/// so `Moments` entries are lattice fields.
pub fn field_moments(c: &Configuration, signs: [f64; 3]) -> Result<Moments<Field0>> {
    let g = c.grid().clone();
    let [sphi, spsi, sa] = signs;
    let fields = [
        c.phi.scaled(sphi),
        c.psi.scaled(spsi),
        c.a.component(0).scaled(sa),
        c.a.component(1).scaled(sa),
        c.a.component(2).scaled(sa),
    ];
    let derivs: Vec<_> = fields.iter().map(|f| calculus::d0(&c.nabla, f)).collect::<Result<_>>()?;
    let f = calculus::curvature(&c.nabla);
    let a = [Slot::Field(0), Slot::Nabla(0), Slot::Nabla(1), Slot::Nabla(2)];
    let b = [Slot::Field(1), Slot::Field(2), Slot::Field(3), Slot::Field(4)];
    let mut out: Moments<Field0> = core::array::from_fn(|_| core::array::from_fn(|_| Field0::zeros(&g)));
    g.for_each_interior(|s| {
        let br = |x: &Slot, y: &Slot| -> LieValue {
            match (*x, *y) {
                (Slot::Field(p), Slot::Field(q)) => fields[p].data[s].bracket(fields[q].data[s]),
                (Slot::Nabla(i), Slot::Field(q)) => derivs[q].data[s][i],
                (Slot::Field(p), Slot::Nabla(i)) => -derivs[p].data[s][i],
                (Slot::Nabla(i), Slot::Nabla(j)) => two_form_entry(&f.data[s], i, j),
            }
        };
        let m = moments_with(&a, &b, br);
        for fam in 0..3 {
            for i in 0..3 {
                out[fam][i].data[s] = m[fam][i];
            }
        }
    });
    Ok(out)
}

/// Relative defects of the correspondence under a convention table:
/// `[index 1, index 2, index 3]`, each maximised over the families.
pub fn correspondence_defects(c: &Configuration, table: &ConventionTable) -> Result<[f64; 3]> {
    let mu = field_moments(c, table.signs)?;
    let k = kappa(c);
    let mut out = [0.0; 3];
    for (idx, &(row, sign)) in table.rows.iter().enumerate() {
        for fam in 0..3 {
            let target = match row {
                1 => k.first.component(fam),
                2 => k.second.component(fam),
                _ => k.third.clone(),
            };
            let target = target.scaled(sign);
            let m = &mu[fam][idx];
            let scale = m.l2_norm().max(target.l2_norm());
            let d = m.sub(&target)?.l2_norm();
            out[idx] = f64::max(out[idx], if scale > 0.0 { d / scale } else { d });
        }
    }
    Ok(out)
}

/// The correspondence with the frozen [`CONVENTION`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrespondenceReport {
    /// Relative defects for indices 1, 2, 3.
    pub defects: [f64; 3],
}

impl CorrespondenceReport {
    pub fn max_defect(&self) -> f64 {
        self.defects.iter().copied().fold(0.0, f64::max)
    }
}

pub fn field_moment_correspondence(c: &Configuration) -> Result<CorrespondenceReport> {
    Ok(CorrespondenceReport { defects: correspondence_defects(c, &CONVENTION)? })
}

/// Every table (sign choices and index-to-row assignments with overall
/// signs) under which the correspondence holds on `c` to `tol`.
pub fn convention_search(c: &Configuration, tol: f64) -> Result<Vec<ConventionTable>> {
    let perms = [[1, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]];
    let mut found = Vec::new();
    for code in 0..8u32 {
        let signs: [f64; 3] = core::array::from_fn(|i| if code >> i & 1 == 1 { -1.0 } else { 1.0 });
        for perm in perms.iter() {
            for sc in 0..8u32 {
                let rows: [(usize, f64); 3] =
                    core::array::from_fn(|i| (perm[i], if sc >> i & 1 == 1 { -1.0 } else { 1.0 }));
                let table = ConventionTable { signs, rows };
                if correspondence_defects(c, &table)?.iter().all(|&d| d <= tol) {
                    found.push(table);
                }
            }
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn su2_embedding_matches_lie_values() {
        let mut r = rng::seeded(1);
        for _ in 0..20 {
            let (x, y) = (rng::lie(&mut r), rng::lie(&mut r));
            let (sx, sy) = (Su::from_lie(x), Su::from_lie(y));
            assert!(rel_su(&sx.bracket(&sy), &Su::from_lie(x.bracket(y))) < 1e-15);
            assert!((sx.inner(&sy) - x.inner(y)).abs() < 1e-15);
        }
    }

    #[test]
    fn i1_is_block_rotation() {
        let mut r = rng::seeded(2);
        let p = LMPoint::random(2, &mut r);
        let q = apply_cs(ComplexStructureId::new(Family::I, 1), &p);
        assert_eq!(q.a, core::array::from_fn(|i| -p.b[i].clone()));
        assert_eq!(q.b, p.a);
        let q = apply_cs(ComplexStructureId::new(Family::I, 2), &p);
        assert_eq!(q.a, quaternion_left(Family::I, &p.a));
    }

    #[test]
    fn unitary_is_unitary() {
        let mut r = rng::seeded(3);
        let u = Unitary::random(3, &mut r);
        let x = Su::random(3, &mut r);
        assert!((x.conjugate(&u).norm() - x.norm()).abs() < 1e-13);
    }

    #[test]
    fn printed_triple_products_fail_by_order_one() {
        let mut r = rng::seeded(4);
        let rep = clifford_check(2, 5, &mut r).unwrap();
        assert!(rep.all_passed(), "{:?}", rep.violations());
        assert_eq!(rep.refuted.len(), 2);
        assert!(rep.refuted.iter().all(|c| c.max_defect > 0.5));
    }
    fn random_config(n: usize, seed: u64) -> Configuration {
        use crate::field::Field1;
        use crate::grid::Grid;
        let g = Grid::with_radius(n, 2.0).unwrap();
        let mut r = rng::seeded(seed);
        Configuration::new(
            Field1::from_fn(&g, |_| [rng::lie(&mut r), rng::lie(&mut r), rng::lie(&mut r)]),
            Field0::from_fn(&g, |_| rng::lie(&mut r)),
            Field1::from_fn(&g, |_| [rng::lie(&mut r), rng::lie(&mut r), rng::lie(&mut r)]),
            Field0::from_fn(&g, |_| rng::lie(&mut r)),
        )
        .unwrap()
    }

    #[test]
    fn frozen_table_is_the_only_one_up_to_iota() {
        let c = random_config(9, 6);
        assert!(field_moment_correspondence(&c).unwrap().max_defect() < 1e-13);
        let found = convention_search(&c, 1e-10).unwrap();
        assert_eq!(found.len(), 2, "{found:?}");
        assert!(found.contains(&CONVENTION));
        let image = ConventionTable { signs: [1.0, -1.0, -1.0], rows: [(3, 1.0), (1, 1.0), (2, -1.0)] };
        assert!(found.contains(&image));
    }

    #[test]
    fn hamiltonian_error_is_linear_in_step() {
        let mut r = rng::seeded(7);
        let (p, w, xi) = (LMPoint::random(2, &mut r), LMPoint::random(2, &mut r), Su::random(2, &mut r));
        for id in ComplexStructureId::all() {
            let pts = hamiltonian_errors(id, &p, &w, &xi, &[1e-2, 5e-3, 2.5e-3, 1.25e-3]);
            assert!((loglog_slope(&pts) - 1.0).abs() < 0.05, "{id:?}");
        }
    }
    #[test]
    fn moment_identities_hold() {
        let mut r = rng::seeded(8);
        for n in [2, 3] {
            for rep in [
                moment_transform_check(n, 3, &mut r).unwrap(),
                lagrangian_check(n, 3, &mut r).unwrap(),
                equivariance_check(n, 3, &mut r).unwrap(),
            ] {
                assert!(rep.all_passed(), "{:?}", rep.violations());
            }
        }
        assert!(clifford_check(2, 0, &mut r).is_err());
    }
}
