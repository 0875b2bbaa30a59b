//! Static four-dimensional forms on `M × ℝ_t` and the reduction of the
//! Haydys instanton equation to the Haydys monopole equations.
//!
//! A 4D connection `𝐀 = ∇ + Φ dt + i(a + Ψ dt)` is t-independent, so every
//! 4D object is a pair of 3D fields. A 2-form is stored as
//! `w = ∗₃⁻¹s + β∧dt` with `s, β` lattice 1-forms. With the orientation
//! `dt∧dx¹∧dx²∧dx³`,
//!
//! ```text
//! ∗₄(dx²∧dx³) = dt∧dx¹ = −dx¹∧dt,   ∗₄(dx¹∧dt) = −dx²∧dx³
//! ```
//!
//! and cyclically, so `∗₄(s, β) = (−β, −s)` and `w⁺ = ½(s − β, β − s)`.

use crate::bps::Configuration;
use crate::calculus::{self, ad3, add3, bwd, scale3, Stencil};
use crate::field::{Field0, Field1};
use crate::haydys::kappa;
use crate::Result;

/// `A = ∇ + Φ dt` and `B = a + Ψ dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourDPieces {
    pub a3: Field1,
    pub a_t: Field0,
    pub b3: Field1,
    pub b_t: Field0,
}

/// A static 2-form `∗₃⁻¹space + time∧dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm4 {
    pub space: Field1,
    pub time: Field1,
}

impl TwoForm4 {
    pub fn hodge_star(&self) -> TwoForm4 {
        TwoForm4 { space: self.time.scaled(-1.0), time: self.space.scaled(-1.0) }
    }

    pub fn add(&self, o: &TwoForm4) -> Result<TwoForm4> {
        Ok(TwoForm4 { space: self.space.add(&o.space)?, time: self.time.add(&o.time)? })
    }

    pub fn sub(&self, o: &TwoForm4) -> Result<TwoForm4> {
        Ok(TwoForm4 { space: self.space.sub(&o.space)?, time: self.time.sub(&o.time)? })
    }

    pub fn scaled(&self, a: f64) -> TwoForm4 {
        TwoForm4 { space: self.space.scaled(a), time: self.time.scaled(a) }
    }

    /// `⟨w, w'⟩ = Σ_{μ<ν} ⟨w_μν, w'_μν⟩` over interior sites.
    pub fn l2_inner(&self, o: &TwoForm4) -> Result<f64> {
        Ok(self.space.l2_inner(&o.space)? + self.time.l2_inner(&o.time)?)
    }

    pub fn l2_norm(&self) -> f64 {
        libm::hypot(self.space.l2_norm(), self.time.l2_norm())
    }
}

/// `w⁺ = ½(w + ∗₄w)`.
pub fn selfdual_part(w: &TwoForm4) -> TwoForm4 {
    let d = w.space.sub(&w.time).expect("same grid");
    TwoForm4 { space: d.scaled(0.5), time: d.scaled(-0.5) }
}

/// `w⁻ = ½(w − ∗₄w)`.
pub fn antiselfdual_part(w: &TwoForm4) -> TwoForm4 {
    let d = w.space.add(&w.time).expect("same grid");
    TwoForm4 { space: d.scaled(0.5), time: d.scaled(0.5) }
}

/// `b ↦ ½(dt∧b + ∗₃b) = (½b, −½b)`. Self-dual, with
/// `‖vafa_witten_iso(b)‖² = ½‖b‖²`.
pub fn vafa_witten_iso(b: &Field1) -> TwoForm4 {
    TwoForm4 { space: b.scaled(0.5), time: b.scaled(-0.5) }
}

pub fn assemble_4d(c: &Configuration) -> FourDPieces {
    FourDPieces { a3: c.nabla.clone(), a_t: c.phi.clone(), b3: c.a.clone(), b_t: c.psi.clone() }
}

pub fn disassemble(p: &FourDPieces) -> Result<Configuration> {
    Configuration::new(p.a3.clone(), p.a_t.clone(), p.b3.clone(), p.b_t.clone())
}

/// `(Re F_𝐀, Im F_𝐀)` with `Re F_𝐀 = F_A − ½[B∧B]` and `Im F_𝐀 = d_A B`.
/// For static pieces:
///
/// ```text
/// F_A      = (∗F_∇,              d_∇Φ)
/// ½[B∧B]   = (½∗[a∧a],           [a, Ψ])
/// d_A B    = (∗d_∇a,             d_∇Ψ + [a, Φ])
/// ```
pub fn curvature_decomp(p: &FourDPieces) -> Result<(TwoForm4, TwoForm4)> {
    let g = p.a3.grid.clone();
    g.check(&p.a_t.grid)?;
    g.check(&p.b3.grid)?;
    g.check(&p.b_t.grid)?;
    let f = calculus::curvature(&p.a3);
    let dphi = calculus::d0(&p.a3, &p.a_t)?;
    let st = Stencil::new(&g);
    let half_bb_space = calculus::interior1(&g, |s| scale3(0.5, bwd(&p.b3.data[s], &p.b3.data[s])));
    let half_bb_time = calculus::interior1(&g, |s| ad3(&p.b3.data[s], p.b_t.data[s]));
    let re = TwoForm4 { space: f.sub(&half_bb_space)?, time: dphi.sub(&half_bb_time)? };
    let im_space = calculus::d1(&p.a3, &p.b3)?;
    let im_time = calculus::interior1(&g, |s| {
        let dpsi = add3(st.grad(&p.b_t.data, s), ad3(&p.a3.data[s], p.b_t.data[s]));
        add3(dpsi, ad3(&p.b3.data[s], p.a_t.data[s]))
    });
    Ok((re, TwoForm4 { space: im_space, time: im_time }))
}

/// `d_A^{∗₄}B = d_∇*a − [Φ, Ψ]`, the t-component contributing `−[Φ, Ψ]`.
pub fn codifferential_4d(p: &FourDPieces) -> Result<Field0> {
    let d = calculus::codifferential(&p.a3, &p.b3)?;
    let g = p.a3.grid.clone();
    let br = calculus::interior0(&g, |s| p.a_t.data[s].bracket(p.b_t.data[s]));
    d.sub(&br)
}

/// Defects of the reduction identities and the 4D residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimredReport {
    /// `‖Re(F_𝐀)⁺ − VW(κ₁)‖ / scale`.
    pub re_defect: f64,
    /// `‖Im(F_𝐀)⁺ − VW(κ₂)‖ / scale`.
    pub im_defect: f64,
    /// `‖d_A^{∗₄}B − κ₃‖ / scale`.
    pub div_defect: f64,
    /// `(‖Re⁺‖² + ‖Im⁺‖² + ‖d_A^{∗₄}B‖²)^½`, the Haydys instanton residual.
    pub asd_residual: f64,
    /// `‖κ‖`.
    pub kappa_norm: f64,
}

impl DimredReport {
    pub fn max_defect(&self) -> f64 {
        self.re_defect.max(self.im_defect).max(self.div_defect)
    }
}

fn relative(diff: f64, a: f64, b: f64) -> f64 {
    let scale = a.max(b);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Compares the self-dual parts of `F_𝐀` and the 4D divergence of `B` with
/// the rows of `κ` under `Λ¹M ≅ Λ²₊X`.
pub fn dimred_check(c: &Configuration) -> Result<DimredReport> {
    let p = assemble_4d(c);
    let (re, im) = curvature_decomp(&p)?;
    let div = codifferential_4d(&p)?;
    let k = kappa(c);
    let (re_p, im_p) = (selfdual_part(&re), selfdual_part(&im));
    let (vw1, vw2) = (vafa_witten_iso(&k.first), vafa_witten_iso(&k.second));
    let re_defect = relative(re_p.sub(&vw1)?.l2_norm(), re_p.l2_norm(), vw1.l2_norm());
    let im_defect = relative(im_p.sub(&vw2)?.l2_norm(), im_p.l2_norm(), vw2.l2_norm());
    let div_defect = relative(div.sub(&k.third)?.l2_norm(), div.l2_norm(), k.third.l2_norm());
    let asd = libm::hypot(libm::hypot(re_p.l2_norm(), im_p.l2_norm()), div.l2_norm());
    Ok(DimredReport { re_defect, im_defect, div_defect, asd_residual: asd, kappa_norm: k.l2_norm() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::lie::LieValue;
    use crate::rng;

    fn sq(x: f64) -> f64 {
        x * x
    }

    fn random_config(g: &Grid, seed: u64) -> Configuration {
        let mut r = rng::seeded(seed);
        Configuration::new(
            Field1::from_fn(g, |_| [rng::lie(&mut r), rng::lie(&mut r), rng::lie(&mut r)]),
            Field0::from_fn(g, |_| rng::lie(&mut r)),
            Field1::from_fn(g, |_| [rng::lie(&mut r), rng::lie(&mut r), rng::lie(&mut r)]),
            Field0::from_fn(g, |_| rng::lie(&mut r)),
        )
        .unwrap()
    }

    #[test]
    fn star_sign_table() {
        let g = Grid::new(9, 0.5).unwrap();
        let s = g.index(4, 4, 4);
        let e = LieValue::basis(0);
        for k in 0..3 {
            // ∗₄ of the spatial bivector dual to dx^k is −(dx^k ∧ dt)
            let mut w = TwoForm4 { space: Field1::zeros(&g), time: Field1::zeros(&g) };
            w.space.data[s][k] = e;
            let sw = w.hodge_star();
            assert_eq!(sw.time.data[s][k], -e);
            assert_eq!(sw.hodge_star(), w);
            // the stored dual of dx^{k+1}∧dx^{k+2} is e_k
            let wedge = calculus::two_form_entry(&w.space.data[s], (k + 1) % 3, (k + 2) % 3).inner(e);
            assert_eq!(wedge, 1.0);
        }
    }

    #[test]
    fn reduction_identities_hold_on_random_fields() {
        let g = Grid::with_radius(11, 2.0).unwrap();
        let c = random_config(&g, 3);
        let r = dimred_check(&c).unwrap();
        assert!(r.max_defect() < 1e-13, "{r:?}");
        let back = disassemble(&assemble_4d(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn projections_split_orthogonally() {
        let g = Grid::with_radius(9, 2.0).unwrap();
        let mut r = rng::seeded(5);
        let w = TwoForm4 { space: Field1::random_interior(&g, &mut r), time: Field1::random_interior(&g, &mut r) };
        let (p, m) = (selfdual_part(&w), antiselfdual_part(&w));
        assert!(p.l2_inner(&m).unwrap().abs() < 1e-12);
        let total = sq(p.l2_norm()) + sq(m.l2_norm());
        assert!((total - sq(w.l2_norm())).abs() < 1e-12 * total);
        assert_eq!(selfdual_part(&p), p);
        let b = Field1::random_interior(&g, &mut r);
        let v = vafa_witten_iso(&b);
        assert_eq!(selfdual_part(&v), v);
        assert!((sq(v.l2_norm()) / sq(b.l2_norm()) - 0.5).abs() < 1e-14);
    }
}
