//! The linearised Bogomolny operator `D = d₂ ⊕ d₁*` at a real base
//! `m₀ = (∇₀, Φ₀)`, its adjoint, spectra, Green solves, and tangent vectors.
//!
//! ```text
//! D(a, Ψ)  = (∗d_∇₀a − d_∇₀Ψ − [a, Φ₀],  d_∇₀*a − [Φ₀, Ψ])
//! D*(b, χ) = (∗d_∇₀b − [Φ₀, b] + d_∇₀χ,  −d_∇₀*b + [Φ₀, χ])
//! ```
//!
//! Both read their input as stored and write interior sites only; on pairs
//! vanishing at boundary sites `D*` is the exact transpose of `D`. Spectra
//! are measured in the discrete L² norm.

use alloc::vec::Vec;

use crate::bps::{self, Configuration};
use crate::calculus::{self, add3, bwd, Stencil};
use crate::field::{Field0, Field1, Pair};
use crate::grid::Grid;
use crate::krylov::{self, CgStats, KVec};
use crate::lie::LieValue;
use crate::rng;
use crate::{Error, Result};

type L = LieValue;

/// Same-site part of `D` at one site.
#[inline(always)]
fn d_local(na: &[L; 3], p: L, a: &[L; 3], psi: L) -> ([L; 3], L) {
    let w = bwd(na, a);
    let one = [
        w[0] - na[0].bracket(psi) + p.bracket(a[0]),
        w[1] - na[1].bracket(psi) + p.bracket(a[1]),
        w[2] - na[2].bracket(psi) + p.bracket(a[2]),
    ];
    let zero = -(na[0].bracket(a[0]) + na[1].bracket(a[1]) + na[2].bracket(a[2])) - p.bracket(psi);
    (one, zero)
}

/// Same-site part of `D*` at one site.
#[inline(always)]
fn dstar_local(na: &[L; 3], p: L, b: &[L; 3], chi: L) -> ([L; 3], L) {
    let w = bwd(na, b);
    let one = [
        w[0] - p.bracket(b[0]) + na[0].bracket(chi),
        w[1] - p.bracket(b[1]) + na[1].bracket(chi),
        w[2] - p.bracket(b[2]) + na[2].bracket(chi),
    ];
    let zero = na[0].bracket(b[0]) + na[1].bracket(b[1]) + na[2].bracket(b[2]) + p.bracket(chi);
    (one, zero)
}

/// Tangent directions at a charge-1 monopole.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    X,
    Y,
    Z,
    Phase,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::X, Direction::Y, Direction::Z, Direction::Phase];

    pub fn name(self) -> &'static str {
        match self {
            Direction::X => "x",
            Direction::Y => "y",
            Direction::Z => "z",
            Direction::Phase => "phase",
        }
    }

    pub fn parse(s: &str) -> Option<Direction> {
        match s {
            "x" => Some(Direction::X),
            "y" => Some(Direction::Y),
            "z" => Some(Direction::Z),
            "phase" => Some(Direction::Phase),
            _ => None,
        }
    }
}

/// `D` and friends at a fixed real base configuration.
#[derive(Clone, Debug)]
pub struct LinearizedOperator {
    grid: Grid,
    nabla: Field1,
    phi: Field0,
    dphi: Field1,
    inv_diag_ddstar: Pair,
    inv_diag_dstard: Pair,
    base_residual: f64,
    /// CG tolerance for Green solves.
    pub cg_tol: f64,
    /// CG iteration cap.
    pub cg_max: usize,
}

impl LinearizedOperator {
    /// Builds the operator at the real part of `m0`.
    pub fn new(m0: &Configuration) -> Result<LinearizedOperator> {
        let grid = m0.grid().clone();
        let nabla = m0.nabla.clone();
        let phi = m0.phi.clone();
        let dphi = calculus::d0(&nabla, &phi)?;
        let base_residual = bps::bogomolny_residual(m0).l2_norm();
        let (dd, sd) = jacobi_diagonals(&grid, &nabla, &phi);
        let dofs = 12 * grid.interior_count();
        let cg_max = 10 * libm::sqrt(dofs as f64) as usize;
        Ok(LinearizedOperator {
            grid,
            nabla,
            phi,
            dphi,
            inv_diag_ddstar: dd,
            inv_diag_dstard: sd,
            base_residual,
            cg_tol: 1e-8,
            cg_max,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nabla(&self) -> &Field1 {
        &self.nabla
    }

    pub fn phi(&self) -> &Field0 {
        &self.phi
    }

    /// Cached `d_∇₀Φ₀`.
    pub fn dphi(&self) -> &Field1 {
        &self.dphi
    }

    /// Interior L² norm of the base's Bogomolny residual.
    pub fn base_residual(&self) -> f64 {
        self.base_residual
    }

    /// `D(a, Ψ)`.
    pub fn apply_d(&self, v: &Pair) -> Result<Pair> {
        self.grid.check(v.grid())?;
        let st = Stencil::new(&self.grid);
        let mut out = Pair::zeros(&self.grid);
        let (a, psi) = (&v.one.data, &v.zero.data);
        self.grid.for_each_interior(|s| {
            let (na, p) = (&self.nabla.data[s], self.phi.data[s]);
            let (one, zero) = d_local(na, p, &a[s], psi[s]);
            let curl = st.curl(a, s);
            let grad = st.grad(psi, s);
            out.one.data[s] = [one[0] + curl[0] - grad[0], one[1] + curl[1] - grad[1], one[2] + curl[2] - grad[2]];
            out.zero.data[s] = zero - st.div(a, s);
        });
        Ok(out)
    }

    /// `D*(b, χ)`, the exact transpose of [`apply_d`](Self::apply_d).
    pub fn apply_dstar(&self, w: &Pair) -> Result<Pair> {
        self.grid.check(w.grid())?;
        let st = Stencil::new(&self.grid);
        let mut out = Pair::zeros(&self.grid);
        let (b, chi) = (&w.one.data, &w.zero.data);
        self.grid.for_each_interior(|s| {
            let (na, p) = (&self.nabla.data[s], self.phi.data[s]);
            let (one, zero) = dstar_local(na, p, &b[s], chi[s]);
            let curl = st.curl(b, s);
            let grad = st.grad(chi, s);
            out.one.data[s] = [one[0] + curl[0] + grad[0], one[1] + curl[1] + grad[1], one[2] + curl[2] + grad[2]];
            out.zero.data[s] = zero + st.div(b, s);
        });
        Ok(out)
    }

    pub fn apply_ddstar(&self, w: &Pair) -> Result<Pair> {
        self.apply_d(&self.apply_dstar(w)?)
    }

    pub fn apply_dstard(&self, v: &Pair) -> Result<Pair> {
        self.apply_dstar(&self.apply_d(v)?)
    }

    /// `(d_∇₀Φ₀)^W(a, Ψ) = (∗[a ∧ d_∇₀Φ₀] − [d_∇₀Φ₀, Ψ], Σᵢ[(d_∇₀Φ₀)ᵢ, aᵢ])`,
    /// where `[d_∇₀Φ₀, Ψ]` is the 1-form with components `[(d_∇₀Φ₀)ᵢ, Ψ]`.
    pub fn dphi_w(&self, c: &Pair) -> Result<Pair> {
        self.grid.check(c.grid())?;
        let mut out = Pair::zeros(&self.grid);
        self.grid.for_each_interior(|s| {
            let (a, psi, dp) = (&c.one.data[s], c.zero.data[s], &self.dphi.data[s]);
            let w = bwd(a, dp);
            out.one.data[s] = [w[0] - dp[0].bracket(psi), w[1] - dp[1].bracket(psi), w[2] - dp[2].bracket(psi)];
            out.zero.data[s] = dp[0].bracket(a[0]) + dp[1].bracket(a[1]) + dp[2].bracket(a[2]);
        });
        Ok(out)
    }

    /// `‖D*Dc − DD*c − 2(d_∇₀Φ₀)^W c‖ / ‖c‖_{H₁}`.
    pub fn weitzenbock_defect(&self, c: &Pair) -> Result<f64> {
        let h1 = calculus::norm_h1(&self.nabla, &self.phi, c)?;
        if h1 == 0.0 {
            return Err(Error::ZeroInput);
        }
        let mut r = self.apply_dstard(c)?;
        r.axpy(-1.0, &self.apply_ddstar(c)?);
        r.axpy(-2.0, &self.dphi_w(c)?);
        Ok(r.l2_norm() / h1)
    }

    fn precond_ddstar(&self, r: &Pair) -> Pair {
        hadamard(&self.inv_diag_ddstar, r)
    }

    fn precond_dstard(&self, r: &Pair) -> Pair {
        hadamard(&self.inv_diag_dstard, r)
    }

    /// `G(rhs)`: solves `DD* u = rhs` by Jacobi-preconditioned CG.
    pub fn green_solve(&self, rhs: &Pair, tol: f64, max_iter: usize) -> Result<(Pair, CgStats)> {
        self.green_solve_from(rhs, None, tol, max_iter)
    }

    /// [`green_solve`](Self::green_solve) warm-started at `x0`.
    pub fn green_solve_from(&self, rhs: &Pair, x0: Option<Pair>, tol: f64, max_iter: usize) -> Result<(Pair, CgStats)> {
        self.grid.check(rhs.grid())?;
        if !rhs.is_finite() {
            return Err(Error::InvalidArgument("right-hand side is not finite"));
        }
        let mut b = rhs.clone();
        b.mask();
        let apply = |x: &Pair| self.apply_ddstar(x).expect("grid checked");
        krylov::cg(apply, |r: &Pair| self.precond_ddstar(r), &b, x0, tol, max_iter)
    }

    /// Solves `D*D v = rhs`.
    pub fn solve_dstard(&self, rhs: &Pair, tol: f64, max_iter: usize) -> Result<(Pair, CgStats)> {
        self.grid.check(rhs.grid())?;
        let mut b = rhs.clone();
        b.mask();
        let apply = |x: &Pair| self.apply_dstard(x).expect("grid checked");
        krylov::cg(apply, |r: &Pair| self.precond_dstard(r), &b, None, tol, max_iter)
    }

    fn random_block(&self, seed: u64, k: usize) -> Vec<Pair> {
        let mut r = rng::seeded(seed);
        (0..k).map(|_| Pair::random_interior(&self.grid, &mut r)).collect()
    }

    /// Smallest eigenvalues of `DD*` (ascending) by shift-invert block
    /// Lanczos: the Krylov space of `G` from a random block of size `block`
    /// grown to `max_dim` vectors. Each step is one Green solve.
    pub fn low_spectrum_ddstar(&self, seed: u64, block: usize, max_dim: usize) -> Result<Vec<f64>> {
        let start = self.random_block(seed, block);
        let mu = krylov::block_lanczos(
            |x: &Pair| Ok(self.green_solve(x, self.cg_tol, self.cg_max)?.0),
            start,
            max_dim,
        )?;
        Ok(invert_ritz(mu))
    }

    /// Smallest eigenvalues of `D*D` (ascending) by shift-invert block
    /// Lanczos, as [`low_spectrum_ddstar`](Self::low_spectrum_ddstar).
    pub fn low_spectrum_dstard(&self, seed: u64, block: usize, max_dim: usize) -> Result<Vec<f64>> {
        let start = self.random_block(seed, block);
        let mu = krylov::block_lanczos(
            |x: &Pair| Ok(self.solve_dstard(x, self.cg_tol, self.cg_max)?.0),
            start,
            max_dim,
        )?;
        Ok(invert_ritz(mu))
    }

    /// `λ_min(DD*)`: inverse iteration through [`green_solve`](Self::green_solve),
    /// accelerated as a block Krylov method (block 4, 16 vectors).
    pub fn lambda_min_ddstar(&self, seed: u64) -> Result<f64> {
        let vals = self.low_spectrum_ddstar(seed, 4, 16)?;
        vals.first().copied().ok_or(Error::Stagnation)
    }

    /// `λ_max(DD*)` from a 60-dimensional Krylov space.
    pub fn lambda_max_ddstar(&self, seed: u64) -> Result<f64> {
        let start = self.random_block(seed, 1);
        let vals = krylov::block_lanczos(|x: &Pair| self.apply_ddstar(x), start, 60)?;
        vals.last().copied().ok_or(Error::Stagnation)
    }

    /// `‖D*‖ = λ_max(DD*)^½`.
    pub fn norm_dstar(&self, seed: u64) -> Result<f64> {
        Ok(libm::sqrt(self.lambda_max_ddstar(seed)?))
    }

    /// Raw zero-mode candidate on every site. Translations use
    /// `(ι_{e_k}F, ∇_kΦ)`, the phase uses `(d_∇Φ, 0)`.
    pub fn tangent_candidate(&self, dir: Direction) -> Pair {
        let (b, dphi) = full_derivatives(&self.grid, &self.nabla, &self.phi);
        let mut c = Pair::zeros(&self.grid);
        match dir {
            Direction::Phase => c.one = dphi,
            _ => {
                let k = dir as usize;
                for s in 0..self.grid.sites() {
                    let bs = &b.data[s];
                    let mut a = [LieValue::ZERO; 3];
                    for (j, aj) in a.iter_mut().enumerate() {
                        for (l, bl) in bs.iter().enumerate() {
                            *aj += levi_civita(k, j, l) * *bl;
                        }
                    }
                    c.one.data[s] = a;
                    c.zero.data[s] = dphi.data[s][k];
                }
            }
        }
        c
    }

    /// A unit tangent vector: the candidate projected onto `ker D` by
    /// `v = c − D*G(Dc)`, then scaled to unit interior L² norm.
    ///
    /// The boundary values of the candidate are kept, as for the seed; the
    /// correction is interior, so `Dv = 0` holds with `D` reading them.
    pub fn make_tangent(&self, dir: Direction) -> Result<Pair> {
        let cand = self.tangent_candidate(dir);
        let dc = self.apply_d(&cand)?;
        let (u, _) = self.green_solve(&dc, self.cg_tol, self.cg_max)?;
        let mut v = cand.clone();
        v.axpy(-1.0, &self.apply_dstar(&u)?);
        let n = v.l2_norm();
        if !(n > 1e-6 * cand.l2_norm()) {
            return Err(Error::DegenerateDirection);
        }
        v.scale_mut(1.0 / n);
        Ok(v)
    }
}

fn invert_ritz(mu: Vec<f64>) -> Vec<f64> {
    let mut vals: Vec<f64> = mu.into_iter().filter(|&m| m > 0.0).map(|m| 1.0 / m).collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

fn hadamard(d: &Pair, r: &Pair) -> Pair {
    let mut out = r.clone();
    for (o, w) in out.one.data.iter_mut().zip(d.one.data.iter()) {
        for i in 0..3 {
            for a in 0..3 {
                o[i].0[a] *= w[i].0[a];
            }
        }
    }
    for (o, w) in out.zero.data.iter_mut().zip(d.zero.data.iter()) {
        for a in 0..3 {
            o.0[a] *= w.0[a];
        }
    }
    out
}

pub(crate) fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Inverse Jacobi diagonals of `DD*` and `D*D` from exact row and column
/// norms: a same-site block plus `1/(4h²)` per interior neighbour.
fn jacobi_diagonals(g: &Grid, nabla: &Field1, phi: &Field0) -> (Pair, Pair) {
    let mut dd = Pair::zeros(g);
    let mut sd = Pair::zeros(g);
    let n = g.n();
    let stride = g.strides();
    let q = 0.25 / (g.h() * g.h());
    g.for_each_interior(|s| {
        let mut nb = 0.0;
        for &st in stride.iter() {
            for t in [s + st, s - st] {
                if t < n * n * n && g.is_interior(t) {
                    nb += 1.0;
                }
            }
        }
        let (na, p) = (&nabla.data[s], phi.data[s]);
        let sq = |o: ([L; 3], L)| calculus::norm_sq3(&o.0) + o.1.norm_sq();
        for e in 0..3 {
            let ev = LieValue::basis(e);
            for j in 0..3 {
                let mut a = [LieValue::ZERO; 3];
                a[j] = ev;
                dd.one.data[s][j].0[e] = 1.0 / (sq(dstar_local(na, p, &a, LieValue::ZERO)) + nb * q);
                sd.one.data[s][j].0[e] = 1.0 / (sq(d_local(na, p, &a, LieValue::ZERO)) + nb * q);
            }
            let z = [LieValue::ZERO; 3];
            dd.zero.data[s].0[e] = 1.0 / (sq(dstar_local(na, p, &z, ev)) + nb * q);
            sd.zero.data[s].0[e] = 1.0 / (sq(d_local(na, p, &z, ev)) + nb * q);
        }
    });
    (dd, sd)
}

/// `∗F_∇` and `d_∇Φ` at every site: central differences inside the cube,
/// second-order one-sided differences on its faces.
pub fn full_derivatives(g: &Grid, nabla: &Field1, phi: &Field0) -> (Field1, Field1) {
    let n = g.n();
    let strides = g.strides();
    let inv2h = 0.5 / g.h();
    let diff = |s: usize, i: usize, f: &dyn Fn(usize) -> LieValue| -> LieValue {
        let c = g.coords(s)[i];
        let st = strides[i];
        if c == 0 {
            inv2h * (-3.0 * f(s) + 4.0 * f(s + st) - f(s + 2 * st))
        } else if c == n - 1 {
            inv2h * (3.0 * f(s) - 4.0 * f(s - st) + f(s - 2 * st))
        } else {
            inv2h * (f(s + st) - f(s - st))
        }
    };
    let mut b = Field1::zeros(g);
    let mut dphi = Field1::zeros(g);
    for s in 0..g.sites() {
        let na = &nabla.data[s];
        let d = |i: usize, j: usize| diff(s, i, &|t| nabla.data[t][j]);
        let curl = [d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)];
        b.data[s] = add3(curl, calculus::scale3(0.5, bwd(na, na)));
        let gp = [0, 1, 2].map(|i| diff(s, i, &|t| phi.data[t]));
        dphi.data[s] = add3(gp, calculus::ad3(na, phi.data[s]));
    }
    (b, dphi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn small_op() -> LinearizedOperator {
        let g = Grid::with_radius(13, 3.0).unwrap();
        LinearizedOperator::new(&bps::bps_seed(&g)).unwrap()
    }

    #[test]
    fn dstar_is_the_transpose_of_d() {
        let op = small_op();
        let mut r = seeded(5);
        for _ in 0..5 {
            let v = Pair::random_interior(op.grid(), &mut r);
            let w = Pair::random_interior(op.grid(), &mut r);
            let lhs = op.apply_d(&v).unwrap().l2_inner(&w).unwrap();
            let rhs = v.l2_inner(&op.apply_dstar(&w).unwrap()).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn jacobi_diagonal_matches_probing() {
        let op = small_op();
        let g = op.grid().clone();
        let c = g.center();
        for s in [g.index(c, c, c), g.index(c + 2, c - 1, c + 3), g.index(1, c, c)] {
            for comp in 0..4 {
                for e in 0..3 {
                    let mut v = Pair::zeros(&g);
                    if comp < 3 {
                        v.one.data[s][comp] = LieValue::basis(e);
                    } else {
                        v.zero.data[s] = LieValue::basis(e);
                    }
                    let vol = g.cell_volume();
                    let exact = op.apply_ddstar(&v).unwrap().l2_inner(&v).unwrap() / vol;
                    let diag = if comp < 3 {
                        op.inv_diag_ddstar.one.data[s][comp].0[e]
                    } else {
                        op.inv_diag_ddstar.zero.data[s].0[e]
                    };
                    assert!((1.0 / diag - exact).abs() < 1e-10 * exact);
                    let exact = op.apply_dstard(&v).unwrap().l2_inner(&v).unwrap() / vol;
                    let diag = if comp < 3 {
                        op.inv_diag_dstard.one.data[s][comp].0[e]
                    } else {
                        op.inv_diag_dstard.zero.data[s].0[e]
                    };
                    assert!((1.0 / diag - exact).abs() < 1e-10 * exact);
                }
            }
        }
    }

    #[test]
    fn flat_base_reduces_to_curl_grad_div() {
        let g = Grid::with_radius(11, 2.5).unwrap();
        let op = LinearizedOperator::new(&Configuration::zeros(&g)).unwrap();
        let mut r = seeded(9);
        let v = Pair::random_interior(&g, &mut r);
        let dv = op.apply_d(&v).unwrap();
        let z = Field1::zeros(&g);
        let mut expect = calculus::d1(&z, &v.one).unwrap();
        expect.axpy(-1.0, &calculus::d0(&z, &v.zero).unwrap());
        assert_eq!(dv.one, expect);
        assert_eq!(dv.zero, calculus::codifferential(&z, &v.one).unwrap());
    }
}
