use haydys_core::bps::{self, Configuration};
use haydys_core::calculus::{self, bracket_wedge_dual};
use haydys_core::dimred::{antiselfdual_part, selfdual_part, TwoForm4};
use haydys_core::linear_model::{self, apply_cs, ComplexStructureId, Family, LMPoint};
use haydys_core::linops::LinearizedOperator;
use haydys_core::rng;
use haydys_core::{Field0, Field1, Grid, LieValue};
use proptest::prelude::*;

fn lie() -> impl Strategy<Value = LieValue> {
    prop::array::uniform3(-10.0f64..10.0).prop_map(LieValue)
}

fn small_grid() -> Grid {
    Grid::with_radius(11, 2.5).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric_and_ad_invariant(x in lie(), y in lie(), z in lie()) {
        let s = x.bracket(y) + y.bracket(x);
        prop_assert_eq!(s, LieValue::ZERO);
        let scale = 1.0 + x.norm() * y.norm() * z.norm();
        prop_assert!((x.bracket(y).inner(z) - x.inner(y.bracket(z))).abs() <= 1e-13 * scale);
    }

    #[test]
    fn jacobi(x in lie(), y in lie(), z in lie()) {
        let j = x.bracket(y.bracket(z)) + y.bracket(z.bracket(x)) + z.bracket(x.bracket(y));
        prop_assert!(j.norm() <= 1e-12 * (1.0 + x.norm() * y.norm() * z.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn exterior_derivatives_have_exact_adjoints(seed in any::<u64>()) {
        let g = small_grid();
        let mut r = rng::seeded(seed);
        let nabla = Field1::from_fn(&g, |_| [rng::lie(&mut r), rng::lie(&mut r), rng::lie(&mut r)]);
        let f = Field0::random_interior(&g, &mut r);
        let w = Field1::random_interior(&g, &mut r);
        let lhs = calculus::d0(&nabla, &f).unwrap().l2_inner(&w).unwrap();
        let rhs = f.l2_inner(&calculus::d0_adjoint(&nabla, &w).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        let v = Field1::random_interior(&g, &mut r);
        let lhs = calculus::d1(&nabla, &v).unwrap().l2_inner(&w).unwrap();
        let rhs = v.l2_inner(&calculus::d1_adjoint(&nabla, &w).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn wedge_of_one_forms_is_symmetric(seed in any::<u64>()) {
        let g = small_grid();
        let mut r = rng::seeded(seed);
        let a = Field1::random_interior(&g, &mut r);
        let b = Field1::random_interior(&g, &mut r);
        prop_assert_eq!(bracket_wedge_dual(&a, &b).unwrap(), bracket_wedge_dual(&b, &a).unwrap());
    }

    #[test]
    fn d_and_dstar_are_adjoint_and_ddstar_positive(seed in any::<u64>()) {
        let g = small_grid();
        let mut r = rng::seeded(seed);
        let m = Configuration::random(&g, &mut r);
        let op = LinearizedOperator::new(&m).unwrap();
        let v = haydys_core::Pair::random_interior(&g, &mut r);
        let w = haydys_core::Pair::random_interior(&g, &mut r);
        let (dv, dsw) = (op.apply_d(&v).unwrap(), op.apply_dstar(&w).unwrap());
        let (lhs, rhs) = (dv.l2_inner(&w).unwrap(), v.l2_inner(&dsw).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (dv.l2_norm() * w.l2_norm()));
        prop_assert!(op.apply_ddstar(&w).unwrap().l2_inner(&w).unwrap() > 0.0);
        let sym = op.apply_ddstar(&v).unwrap().l2_inner(&w).unwrap() - v.l2_inner(&op.apply_ddstar(&w).unwrap()).unwrap();
        prop_assert!(sym.abs() <= 1e-12 * lhs.abs().max(1.0) * 10.0);
    }

    #[test]
    fn energy_is_nonnegative(seed in any::<u64>()) {
        let g = small_grid();
        let mut r = rng::seeded(seed);
        let c = Configuration::random(&g, &mut r);
        let e = bps::energy(&c);
        prop_assert!(e.as_array().iter().all(|(_, v)| *v >= 0.0));
        prop_assert!(e.total() > 0.0);
    }

    #[test]
    fn selfdual_projection_is_idempotent(seed in any::<u64>()) {
        let g = small_grid();
        let mut r = rng::seeded(seed);
        let w = TwoForm4 { space: Field1::random_interior(&g, &mut r), time: Field1::random_interior(&g, &mut r) };
        let p = selfdual_part(&w);
        prop_assert_eq!(selfdual_part(&p), p.clone());
        prop_assert!(p.l2_inner(&antiselfdual_part(&w)).unwrap().abs() <= 1e-12 * w.l2_norm().powi(2));
        prop_assert_eq!(w.hodge_star().hodge_star(), w);
    }

    #[test]
    fn field_moment_maps_have_iota_parity(seed in any::<u64>()) {
        let g = small_grid();
        let mut r = rng::seeded(seed);
        let c = Configuration::random(&g, &mut r);
        let mut flipped = c.clone();
        flipped.a = c.a.scaled(-1.0);
        flipped.psi = c.psi.scaled(-1.0);
        let signs = linear_model::CONVENTION.signs;
        let (m, mf) = (linear_model::field_moments(&c, signs).unwrap(), linear_model::field_moments(&flipped, signs).unwrap());
        for fam in 0..3 {
            prop_assert!(mf[fam][0].add(&m[fam][0]).unwrap().l2_norm() <= 1e-13 * m[fam][0].l2_norm());
            prop_assert!(mf[fam][2].add(&m[fam][2]).unwrap().l2_norm() <= 1e-13 * m[fam][2].l2_norm());
        }
        prop_assert!(linear_model::field_moment_correspondence(&c).unwrap().max_defect() <= 1e-12);
    }

    #[test]
    fn complex_structures_are_isometric(seed in any::<u64>(), n in 2usize..4) {
        let mut r = rng::seeded(seed);
        let p = LMPoint::random(n, &mut r);
        for id in ComplexStructureId::all() {
            let q = apply_cs(id, &p);
            prop_assert!((q.norm() - p.norm()).abs() <= 1e-13 * p.norm());
            prop_assert!(apply_cs(id, &q).add(&p).norm() <= 1e-14 * p.norm());
        }
        let i1 = ComplexStructureId::new(Family::I, 1);
        prop_assert_eq!(apply_cs(i1, &p), apply_cs(ComplexStructureId::new(Family::K, 1), &p));
    }
}

#[test]
fn bogomolny_residual_shrinks_like_h_squared() {
    let norm = |n: usize| bps::bogomolny_residual(&bps::bps_seed(&Grid::with_radius(n, 4.0).unwrap())).l2_norm();
    let ratio = norm(17) / norm(33);
    assert!((ratio - 4.0).abs() <= 1.0, "{ratio}");
}

#[test]
fn charge_is_gauge_invariant_and_flat_pairs_carry_none() {
    let g = Grid::with_radius(33, 8.0).unwrap();
    let m = bps::bps_seed(&g);
    let q = bps::charge(&m, 6.0).unwrap();
    let theta = |x: [f64; 3]| {
        let th = 0.3 * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 8.0).exp();
        (th, [-th * x[0] / 4.0, -th * x[1] / 4.0, -th * x[2] / 4.0])
    };
    let mg = bps::gauge_transform(&m, LieValue::new(0.0, 0.6, 0.8), theta);
    assert!((bps::charge(&mg, 6.0).unwrap() - q).abs() < 1e-3);
    let flat = Configuration::real(Field1::zeros(&g), Field0::from_fn(&g, |_| LieValue::new(0.0, 0.0, 1.0))).unwrap();
    assert!(bps::charge(&flat, 6.0).unwrap().abs() < 1e-12);
    assert!(bps::charge(&m, 9.0).is_err());
}
