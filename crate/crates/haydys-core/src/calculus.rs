//! Covariant exterior calculus on the lattice.
//!
//! Derivatives are central differences. Two-forms are stored through their
//! Hodge duals, `w_k = ½ ε_kij F_ij`, so `F_ij = ε_ijk w_k`, and the Hodge
//! star is the identity on stored data. Differential operators evaluate on
//! interior sites, reading neighbours as stored, and leave zero on boundary
//! sites. The adjoints are the exact transposes of [`d0`] and [`d1`] on
//! fields that vanish at boundary sites, the space perturbations live in.

use alloc::vec::Vec;

use crate::field::{Field0, Field1, Pair};
use crate::grid::Grid;
use crate::lie::LieValue;
use crate::reduce::pairwise_sum;
use crate::Result;

const Z: LieValue = LieValue::ZERO;

/// Central-difference stencil for one grid.
#[derive(Clone, Copy)]
pub(crate) struct Stencil {
    st: [usize; 3],
    inv2h: f64,
}

impl Stencil {
    pub(crate) fn new(g: &Grid) -> Stencil {
        Stencil { st: g.strides(), inv2h: 0.5 / g.h() }
    }

    /// `(δ₁f, δ₂f, δ₃f)` at `s`.
    #[inline(always)]
    pub(crate) fn grad(&self, f: &[LieValue], s: usize) -> [LieValue; 3] {
        let d = |i: usize| self.inv2h * (f[s + self.st[i]] - f[s - self.st[i]]);
        [d(0), d(1), d(2)]
    }

    /// Dual-stored `δw`: component `k` is `Σ ε_kij δ_i w_j`.
    #[inline(always)]
    pub(crate) fn curl(&self, w: &[[LieValue; 3]], s: usize) -> [LieValue; 3] {
        let d = |i: usize, j: usize| self.inv2h * (w[s + self.st[i]][j] - w[s - self.st[i]][j]);
        [d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)]
    }

    /// `Σ δ_i w_i` at `s`.
    #[inline(always)]
    pub(crate) fn div(&self, w: &[[LieValue; 3]], s: usize) -> LieValue {
        let d = |i: usize| self.inv2h * (w[s + self.st[i]][i] - w[s - self.st[i]][i]);
        d(0) + d(1) + d(2)
    }
}

/// Pointwise `∗[a∧b]`: component `k` is `Σ ε_kij [a_i, b_j]`.
#[inline(always)]
pub fn bwd(a: &[LieValue; 3], b: &[LieValue; 3]) -> [LieValue; 3] {
    [
        a[1].bracket(b[2]) - a[2].bracket(b[1]),
        a[2].bracket(b[0]) - a[0].bracket(b[2]),
        a[0].bracket(b[1]) - a[1].bracket(b[0]),
    ]
}

/// Pointwise `[a_i, f]` for each `i`.
#[inline(always)]
pub(crate) fn ad3(a: &[LieValue; 3], f: LieValue) -> [LieValue; 3] {
    [a[0].bracket(f), a[1].bracket(f), a[2].bracket(f)]
}

#[inline(always)]
pub(crate) fn add3(x: [LieValue; 3], y: [LieValue; 3]) -> [LieValue; 3] {
    [x[0] + y[0], x[1] + y[1], x[2] + y[2]]
}

#[inline(always)]
pub(crate) fn sub3(x: [LieValue; 3], y: [LieValue; 3]) -> [LieValue; 3] {
    [x[0] - y[0], x[1] - y[1], x[2] - y[2]]
}

#[inline(always)]
pub(crate) fn scale3(a: f64, x: [LieValue; 3]) -> [LieValue; 3] {
    [a * x[0], a * x[1], a * x[2]]
}

#[inline(always)]
pub(crate) fn norm_sq3(x: &[LieValue; 3]) -> f64 {
    x[0].norm_sq() + x[1].norm_sq() + x[2].norm_sq()
}

/// `F_ij = ε_ijk w_k` recovered from dual storage.
pub fn two_form_entry(w: &[LieValue; 3], i: usize, j: usize) -> LieValue {
    match (i, j) {
        (0, 1) => w[2],
        (1, 2) => w[0],
        (2, 0) => w[1],
        (1, 0) => -w[2],
        (2, 1) => -w[0],
        (0, 2) => -w[1],
        _ => Z,
    }
}

/// Field with `f(s)` on interior sites and zero elsewhere.
pub(crate) fn interior0<F: FnMut(usize) -> LieValue>(g: &Grid, mut f: F) -> Field0 {
    let mut out = Field0::zeros(g);
    g.for_each_interior(|s| out.data[s] = f(s));
    out
}

pub(crate) fn interior1<F: FnMut(usize) -> [LieValue; 3]>(g: &Grid, mut f: F) -> Field1 {
    let mut out = Field1::zeros(g);
    g.for_each_interior(|s| out.data[s] = f(s));
    out
}

/// `h³ Σ_interior f(s)` through the pairwise tree.
pub(crate) fn interior_sum<F: Fn(usize) -> f64>(g: &Grid, f: F) -> f64 {
    let sites = g.interior_sites();
    pairwise_sum(0, sites.len(), &|i| f(sites[i] as usize)) * g.cell_volume()
}

/// Hodge star on a dual-stored 2-form. The stored data is already `∗w`,
/// so this returns a copy; orientation is `dx¹∧dx²∧dx³`.
pub fn hodge_star(w: &Field1) -> Field1 {
    w.clone()
}

/// `∗[a∧b]` at every site.
pub fn bracket_wedge_dual(a: &Field1, b: &Field1) -> Result<Field1> {
    a.grid.check(&b.grid)?;
    Ok(Field1 {
        grid: a.grid.clone(),
        data: a.data.iter().zip(b.data.iter()).map(|(x, y)| bwd(x, y)).collect(),
    })
}

/// `d_∇f = df + [A, f]`.
pub fn d0(nabla: &Field1, f: &Field0) -> Result<Field1> {
    nabla.grid.check(&f.grid)?;
    let st = Stencil::new(&f.grid);
    Ok(interior1(&f.grid, |s| add3(st.grad(&f.data, s), ad3(&nabla.data[s], f.data[s]))))
}

/// `∗d_∇w = curl w + ∗[A∧w]`.
pub fn d1(nabla: &Field1, w: &Field1) -> Result<Field1> {
    nabla.grid.check(&w.grid)?;
    let st = Stencil::new(&w.grid);
    Ok(interior1(&w.grid, |s| add3(st.curl(&w.data, s), bwd(&nabla.data[s], &w.data[s]))))
}

/// `∗F_∇ = curl A + ½∗[A∧A]`.
pub fn curvature(nabla: &Field1) -> Field1 {
    let st = Stencil::new(&nabla.grid);
    interior1(&nabla.grid, |s| {
        let a = &nabla.data[s];
        add3(st.curl(&nabla.data, s), scale3(0.5, bwd(a, a)))
    })
}

/// `d_∇*w = −Σ_i (δ_i w_i + [A_i, w_i])`, reading `w` as stored.
pub fn codifferential(nabla: &Field1, w: &Field1) -> Result<Field0> {
    nabla.grid.check(&w.grid)?;
    let st = Stencil::new(&w.grid);
    Ok(interior0(&w.grid, |s| {
        let (a, v) = (&nabla.data[s], &w.data[s]);
        -(st.div(&w.data, s) + a[0].bracket(v[0]) + a[1].bracket(v[1]) + a[2].bracket(v[2]))
    }))
}

/// Exact discrete adjoint of [`d0`]: `⟨d0 f, w⟩ = ⟨f, d0_adjoint w⟩` for
/// every `w` and every `f` vanishing at boundary sites.
pub fn d0_adjoint(nabla: &Field1, w: &Field1) -> Result<Field0> {
    let mut m = w.clone();
    m.mask();
    codifferential(nabla, &m)
}

/// Exact discrete adjoint of [`d1`]. The stencil is symmetric, so this is
/// [`d1`] applied to the masked input.
pub fn d1_adjoint(nabla: &Field1, w: &Field1) -> Result<Field1> {
    let mut m = w.clone();
    m.mask();
    d1(nabla, &m)
}

/// The four Λ⁰ components `(a₁, a₂, a₃, Ψ)` of a pair.
fn components(c: &Pair) -> [Field0; 4] {
    [c.one.component(0), c.one.component(1), c.one.component(2), c.zero.clone()]
}

/// `‖c‖_{H₀} = ‖c‖`.
pub fn norm_h0(c: &Pair) -> f64 {
    c.l2_norm()
}

/// `‖c‖²_{H₁} = ‖∇₀c‖² + ‖ρ⁻¹c‖² + ‖[Φ₀, c]‖²`.
pub fn norm_h1(nabla: &Field1, phi: &Field0, c: &Pair) -> Result<f64> {
    nabla.grid.check(c.grid())?;
    phi.grid.check(c.grid())?;
    let g = c.grid();
    let comps = components(c);
    let grads: Vec<Field1> = comps.iter().map(|f| d0(nabla, f)).collect::<Result<_>>()?;
    let total = interior_sum(g, |s| {
        let rho2 = 1.0 / (g.rho(s) * g.rho(s));
        let mut acc = 0.0;
        for (f, df) in comps.iter().zip(grads.iter()) {
            let v = f.data[s];
            acc += norm_sq3(&df.data[s]) + rho2 * v.norm_sq() + phi.data[s].bracket(v).norm_sq();
        }
        acc
    });
    Ok(libm::sqrt(total))
}

/// `‖c‖²_{H₂} = ‖∇₀²c‖² + ‖ρ⁻¹∇₀c‖² + ‖[Φ₀,∇₀c]‖² + ‖[Φ₀,[Φ₀,c]]‖²
/// + ‖[Φ₀,ρ⁻¹c]‖² + ‖ρ⁻²c‖²`.
pub fn norm_h2(nabla: &Field1, phi: &Field0, c: &Pair) -> Result<f64> {
    nabla.grid.check(c.grid())?;
    phi.grid.check(c.grid())?;
    let g = c.grid();
    let comps = components(c);
    let mut grads = Vec::with_capacity(4);
    let mut hess = Vec::with_capacity(12);
    for f in comps.iter() {
        let df = d0(nabla, f)?;
        for i in 0..3 {
            hess.push(d0(nabla, &df.component(i))?);
        }
        grads.push(df);
    }
    let total = interior_sum(g, |s| {
        let rho2 = 1.0 / (g.rho(s) * g.rho(s));
        let p = phi.data[s];
        let mut acc = 0.0;
        for (m, f) in comps.iter().enumerate() {
            let v = f.data[s];
            let dv = &grads[m].data[s];
            for i in 0..3 {
                acc += norm_sq3(&hess[3 * m + i].data[s]);
                acc += rho2 * dv[i].norm_sq() + p.bracket(dv[i]).norm_sq();
            }
            let pv = p.bracket(v);
            acc += p.bracket(pv).norm_sq() + rho2 * pv.norm_sq() + rho2 * rho2 * v.norm_sq();
        }
        acc
    });
    Ok(libm::sqrt(total))
}
