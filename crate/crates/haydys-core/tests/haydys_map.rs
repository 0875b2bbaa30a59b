use haydys_core::bps::{self, Configuration};
use haydys_core::haydys::{
    displace, gauge_fix_residual, kappa, kw_residual, l_term, linearized_kappa, q_term, HaydysProblem, PairStack,
    Rows, Sequential, SolveOptions,
};
use haydys_core::krylov::KVec;
use haydys_core::linops::{Direction, LinearizedOperator};
use haydys_core::rng::{self, TrialRng};
use haydys_core::{calculus, Field0, Grid, LieValue, Pair};

fn grid() -> Grid {
    Grid::with_radius(11, 2.0).unwrap()
}

fn perturbation(g: &Grid, r: &mut TrialRng) -> PairStack {
    PairStack { u1: Pair::random_interior(g, r), u2: Pair::random_interior(g, r) }
}

/// `(m₀, t v₀)` for a random real `m₀` and random `v₀`.
fn base(g: &Grid, t: f64, r: &mut TrialRng) -> (Configuration, Pair) {
    let c = Configuration::random(g, r);
    let v0 = c.imaginary_part();
    let mut c0 = c;
    c0.a = v0.one.scaled(t);
    c0.psi = v0.zero.scaled(t);
    (c0, v0)
}

fn rel(a: &PairStack, b: &PairStack) -> f64 {
    let mut d = a.clone();
    d.axpy(-1.0, b);
    d.l2_norm() / a.l2_norm().max(b.l2_norm()).max(1e-300)
}

fn scaled(dc: &PairStack, s: f64) -> PairStack {
    let mut d = dc.clone();
    d.scale_mut(s);
    d
}

#[test]
fn kappa_and_kw_share_the_first_row() {
    let g = grid();
    let mut r = rng::seeded(1);
    let c = Configuration::random(&g, &mut r);
    let (k, kw) = (kappa(&c), kw_residual(&c));
    assert_eq!(k.first, kw.first);
    assert!(k.second != kw.second);
}

#[test]
fn real_bogomolny_data_leaves_only_the_bogomolny_residual() {
    let g = Grid::with_radius(21, 4.0).unwrap();
    let m = bps::bps_seed(&g);
    let k = kappa(&m);
    assert_eq!(k.first, bps::bogomolny_residual(&m));
    assert_eq!(k.second.l2_norm(), 0.0);
    assert_eq!(k.third.l2_norm(), 0.0);
}

#[test]
fn linearization_is_exact_up_to_the_quadratic_term() {
    let g = grid();
    let mut r = rng::seeded(2);
    let (c0, _) = base(&g, 0.7, &mut r);
    let (c1, _) = base(&g, 0.3, &mut r);
    let dc = perturbation(&g, &mut r);
    let k0 = kappa(&c0);
    let dk = linearized_kappa(&c0, &dc).unwrap();
    // Q does not depend on the base point, so take it at c₁.
    let q = q_term(&c1, &dc).unwrap();
    for eps in [1.0, 0.1, 0.01] {
        let ke = kappa(&displace(&c0, &scaled(&dc, eps)).unwrap()).sub(&k0).unwrap();
        let mut lhs = ke.clone().stack(Field0::zeros(&g));
        lhs.axpy(-eps, &dk.clone().stack(Field0::zeros(&g)));
        let mut qq = q.clone();
        qq.u1.zero = Field0::zeros(&g);
        lhs.axpy(-eps * eps, &qq);
        assert!(lhs.l2_norm() <= 1e-12 * ke.l2_norm(), "eps = {eps}: {}", lhs.l2_norm());
    }
}

#[test]
fn decomposition_reconstructs_kappa_hat() {
    let g = grid();
    let mut r = rng::seeded(3);
    let t = 0.4;
    let (c0, _) = base(&g, t, &mut r);
    let m0 = Configuration::real(c0.nabla.clone(), c0.phi.clone()).unwrap();
    let op = LinearizedOperator::new(&m0).unwrap();
    let dc = perturbation(&g, &mut r);
    let lhs = kappa(&displace(&c0, &dc).unwrap()).stack(gauge_fix_residual(&c0, &dc).unwrap());
    let mut rhs = kappa(&c0).stack(Field0::zeros(&g));
    rhs.axpy(1.0, &PairStack { u1: op.apply_d(&dc.u1).unwrap(), u2: op.apply_d(&dc.u2).unwrap() });
    rhs.axpy(t, &l_term(&op, &c0, t, &dc).unwrap());
    rhs.axpy(1.0, &q_term(&c0, &dc).unwrap());
    assert!(rel(&lhs, &rhs) < 1e-12);
}

#[test]
fn l_is_independent_of_t_and_vanishes_without_v0() {
    let g = grid();
    let mut r = rng::seeded(4);
    let c = Configuration::random(&g, &mut r);
    let m0 = Configuration::real(c.nabla.clone(), c.phi.clone()).unwrap();
    let v0 = c.imaginary_part();
    let op = LinearizedOperator::new(&m0).unwrap();
    let dc = perturbation(&g, &mut r);
    let at = |t: f64| {
        let c0 = Configuration::from_parts(&m0.real_part(), &v0.scaled(t)).unwrap();
        l_term(&op, &c0, t, &dc).unwrap()
    };
    assert!(rel(&at(0.3), &at(0.6)) < 1e-12);
    let zero = l_term(&op, &m0, 0.5, &dc).unwrap();
    let scale = PairStack { u1: op.apply_d(&dc.u1).unwrap(), u2: op.apply_d(&dc.u2).unwrap() }.l2_norm();
    assert!(zero.l2_norm() <= 1e-13 * scale, "{}", zero.l2_norm());
    assert!(l_term(&op, &m0, 0.0, &dc).is_err());
}

#[test]
fn l_is_algebraic() {
    // A perturbation at one site produces L at that site only.
    let g = grid();
    let mut r = rng::seeded(5);
    let (c0, _) = base(&g, 0.5, &mut r);
    let m0 = Configuration::real(c0.nabla.clone(), c0.phi.clone()).unwrap();
    let op = LinearizedOperator::new(&m0).unwrap();
    let s = g.index(5, 5, 5);
    let mut dc = PairStack::zeros(&g);
    dc.u1.one.data[s] = [rng::lie(&mut r), rng::lie(&mut r), rng::lie(&mut r)];
    dc.u1.zero.data[s] = rng::lie(&mut r);
    dc.u2.one.data[s] = [rng::lie(&mut r), rng::lie(&mut r), rng::lie(&mut r)];
    dc.u2.zero.data[s] = rng::lie(&mut r);
    let l = l_term(&op, &c0, 0.5, &dc).unwrap();
    for x in 0..g.sites() {
        if x != s {
            let v = l.u1.one.data[x].iter().chain(l.u2.one.data[x].iter()).map(|y| y.norm()).sum::<f64>()
                + l.u1.zero.data[x].norm()
                + l.u2.zero.data[x].norm();
            assert!(v < 1e-13, "site {x}: {v}");
        }
    }
    assert!(l.l2_norm() > 0.0);
}

#[test]
fn l_matches_the_bracket_terms() {
    // With a₀ = t α and Ψ₀ = t β the v₀ terms of dκ̂ are, row by row,
    // −∗[α∧b₂] + [b₂,β] + [α,ψ], ∗[b₁∧α] − [b₁,β] − [α,φ],
    // −Σ[b₁_i, α_i] + [β,φ], and the gauge row −Σ[α_i,b₂_i] − [β,ψ].
    let g = grid();
    let mut r = rng::seeded(6);
    let t = 0.25;
    let (c0, v0) = base(&g, t, &mut r);
    let m0 = Configuration::real(c0.nabla.clone(), c0.phi.clone()).unwrap();
    let op = LinearizedOperator::new(&m0).unwrap();
    let dc = perturbation(&g, &mut r);
    let l = l_term(&op, &c0, t, &dc).unwrap();
    let cross = |a: &[LieValue; 3], b: &[LieValue; 3]| calculus::bwd(a, b);
    let ad = |a: &[LieValue; 3], x: LieValue| [a[0].bracket(x), a[1].bracket(x), a[2].bracket(x)];
    let mut worst = 0.0f64;
    g.for_each_interior(|s| {
        let (al, be) = (&v0.one.data[s], v0.zero.data[s]);
        let (b1, ph, b2, ps) = (&dc.u1.one.data[s], dc.u1.zero.data[s], &dc.u2.one.data[s], dc.u2.zero.data[s]);
        let row1: [LieValue; 3] = core::array::from_fn(|i| {
            -cross(al, b2)[i] + b2[i].bracket(be) + al[i].bracket(ps)
        });
        let row2: [LieValue; 3] = core::array::from_fn(|i| cross(b1, al)[i] - ad(b1, be)[i] - al[i].bracket(ph));
        let row3 = be.bracket(ph) - (0..3).fold(LieValue::ZERO, |acc, i| acc + b1[i].bracket(al[i]));
        let gauge = -(0..3).fold(LieValue::ZERO, |acc, i| acc + al[i].bracket(b2[i])) - be.bracket(ps);
        for i in 0..3 {
            worst = worst.max((l.u1.one.data[s][i] - row1[i]).norm());
            worst = worst.max((l.u2.one.data[s][i] - row2[i]).norm());
        }
        worst = worst.max((l.u2.zero.data[s] - row3).norm());
        worst = worst.max((l.u1.zero.data[s] - gauge).norm());
    });
    assert!(worst < 1e-13, "{worst}");
}

#[test]
fn q_is_homogeneous_and_base_independent() {
    let g = grid();
    let mut r = rng::seeded(7);
    let (c0, _) = base(&g, 0.5, &mut r);
    let c1 = Configuration::random(&g, &mut r);
    let dc = perturbation(&g, &mut r);
    let q = q_term(&c0, &dc).unwrap();
    assert!(rel(&q_term(&c0, &scaled(&dc, 2.0)).unwrap(), &scaled(&q, 4.0)) < 1e-12);
    assert!(rel(&q_term(&c1, &dc).unwrap(), &q) < 1e-12);
    assert_eq!(q_term(&c0, &PairStack::zeros(&g)).unwrap().l2_norm(), 0.0);
}

#[test]
fn gauge_residual_at_a_real_base_is_d1_star() {
    let g = grid();
    let mut r = rng::seeded(8);
    let c = Configuration::random(&g, &mut r);
    let m0 = Configuration::real(c.nabla.clone(), c.phi.clone()).unwrap();
    let op = LinearizedOperator::new(&m0).unwrap();
    let dc = perturbation(&g, &mut r);
    let gf = gauge_fix_residual(&m0, &dc).unwrap();
    assert!(gf.sub(&op.apply_d(&dc.u1).unwrap().zero).unwrap().l2_norm() < 1e-12 * gf.l2_norm());
    assert_eq!(gauge_fix_residual(&c, &PairStack::zeros(&g)).unwrap().l2_norm(), 0.0);
}

#[test]
fn linearization_at_a_real_base_is_block_d() {
    let g = grid();
    let mut r = rng::seeded(9);
    let c = Configuration::random(&g, &mut r);
    let m0 = Configuration::real(c.nabla.clone(), c.phi.clone()).unwrap();
    let op = LinearizedOperator::new(&m0).unwrap();
    let dc = perturbation(&g, &mut r);
    let Rows { first, second, third } = linearized_kappa(&m0, &dc).unwrap();
    let (d1, d2) = (op.apply_d(&dc.u1).unwrap(), op.apply_d(&dc.u2).unwrap());
    assert!(first.sub(&d1.one).unwrap().l2_norm() < 1e-12 * first.l2_norm());
    assert!(second.sub(&d2.one).unwrap().l2_norm() < 1e-12 * second.l2_norm());
    assert!(third.sub(&d2.zero).unwrap().l2_norm() < 1e-12 * third.l2_norm());
}

fn small_problem() -> (Grid, Configuration, LinearizedOperator) {
    let g = Grid::with_radius(17, 4.0).unwrap();
    let m = bps::bps_seed(&g);
    let op = LinearizedOperator::new(&m).unwrap();
    (g, m, op)
}

#[test]
fn fixed_point_at_t_zero_is_the_base() {
    let (g, m, op) = small_problem();
    let v0 = op.make_tangent(Direction::Z).unwrap();
    let nd = op.norm_dstar(0).unwrap();
    let p = HaydysProblem::new(&op, &m, &v0, nd).unwrap();
    let sol = p.solve(0.0, &SolveOptions::new(1e-6, 10, &op), None, &Sequential).unwrap();
    assert_eq!(sol.report.iterations, 1);
    assert_eq!(sol.config, Configuration::real(m.nabla.clone(), m.phi.clone()).unwrap());
    assert_eq!(sol.u, PairStack::zeros(&g));
}

#[test]
fn fixed_point_is_unique_from_two_starts() {
    let (g, m, op) = small_problem();
    let v0 = op.make_tangent(Direction::X).unwrap();
    let nd = op.norm_dstar(0).unwrap();
    let p = HaydysProblem::new(&op, &m, &v0, nd).unwrap();
    let tol = 1e-8;
    let opts = SolveOptions::new(tol, 60, &op);
    let a = p.solve(0.05, &opts, None, &Sequential).unwrap();
    assert!(a.report.converged && a.report.monotone(), "{:?}", a.report.ratios());
    let mut r = rng::seeded(10);
    let mut u0 = PairStack { u1: Pair::random_interior(&g, &mut r), u2: Pair::random_interior(&g, &mut r) };
    u0.scale_mut(1e-3 / u0.l2_norm());
    let b = p.solve(0.05, &opts, Some(u0), &Sequential).unwrap();
    assert!(b.report.converged);
    let mut d = a.u.clone();
    d.axpy(-1.0, &b.u);
    assert!(d.l2_norm() <= 10.0 * tol * a.u.l2_norm().max(1.0), "{} vs {}", d.l2_norm(), a.u.l2_norm());
    assert!(a.report.imaginary_norm >= 0.5 * 0.05);
}

#[test]
fn problem_rejects_tangents_outside_the_kernel() {
    let (g, m, op) = small_problem();
    let mut r = rng::seeded(11);
    let mut v = Pair::random_interior(&g, &mut r);
    v.scale_mut(1.0 / v.l2_norm());
    assert!(HaydysProblem::new(&op, &m, &v, 1.0).is_err());
    let v0 = op.make_tangent(Direction::Y).unwrap();
    assert!(HaydysProblem::new(&op, &m, &v0.scaled(2.0), 1.0).is_err());
    assert!(HaydysProblem::new(&op, &m, &v0, 0.0).is_err());
}
