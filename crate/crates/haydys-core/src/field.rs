//! Lie-algebra-valued lattice fields.
//!
//! [`Field0`] holds a section of Λ⁰⊗g, [`Field1`] a section of Λ¹⊗g with
//! components along dx¹, dx², dx³. Two-forms are stored through their Hodge
//! duals in a [`Field1`]. Values are kept on every site of the cube; inner
//! products and norms only see interior sites.

use alloc::vec::Vec;

use crate::grid::Grid;
use crate::lie::LieValue;
use crate::reduce::pairwise_sum;
use crate::rng::{self, TrialRng};
use crate::Result;

/// Λ⁰⊗g on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field0 {
    pub grid: Grid,
    pub data: Vec<LieValue>,
}

/// Λ¹⊗g on a grid; `data[s][i]` is the dxⁱ component at site `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field1 {
    pub grid: Grid,
    pub data: Vec<[LieValue; 3]>,
}

/// `(one, zero) ∈ Ω¹ ⊕ Ω⁰`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pair {
    pub one: Field1,
    pub zero: Field0,
}

impl Field0 {
    pub fn zeros(grid: &Grid) -> Field0 {
        Field0 { grid: grid.clone(), data: alloc::vec![LieValue::ZERO; grid.sites()] }
    }

    /// Field with value `f(s)` at every site.
    pub fn from_fn<F: FnMut(usize) -> LieValue>(grid: &Grid, f: F) -> Field0 {
        Field0 { grid: grid.clone(), data: (0..grid.sites()).map(f).collect() }
    }

    /// Independent uniform coefficients on interior sites, zero elsewhere.
    pub fn random_interior(grid: &Grid, rng: &mut TrialRng) -> Field0 {
        let mut f = Field0::zeros(grid);
        grid.for_each_interior(|s| f.data[s] = rng::lie(rng));
        f
    }

    /// Zeroes every boundary site.
    pub fn mask(&mut self) {
        for s in 0..self.data.len() {
            if !self.grid.is_interior(s) {
                self.data[s] = LieValue::ZERO;
            }
        }
    }

    pub fn scaled(&self, a: f64) -> Field0 {
        Field0 { grid: self.grid.clone(), data: self.data.iter().map(|&v| a * v).collect() }
    }

    pub fn add(&self, o: &Field0) -> Result<Field0> {
        self.grid.check(&o.grid)?;
        Ok(self.zip(o, |x, y| x + y))
    }

    pub fn sub(&self, o: &Field0) -> Result<Field0> {
        self.grid.check(&o.grid)?;
        Ok(self.zip(o, |x, y| x - y))
    }

    pub(crate) fn zip<F: Fn(LieValue, LieValue) -> LieValue>(&self, o: &Field0, f: F) -> Field0 {
        Field0 {
            grid: self.grid.clone(),
            data: self.data.iter().zip(o.data.iter()).map(|(&x, &y)| f(x, y)).collect(),
        }
    }

    /// `self += a·x`.
    pub fn axpy(&mut self, a: f64, x: &Field0) {
        for (y, &v) in self.data.iter_mut().zip(x.data.iter()) {
            *y += a * v;
        }
    }

    /// Discrete L² inner product `h³ Σ_interior ⟨x, y⟩`.
    pub fn l2_inner(&self, o: &Field0) -> Result<f64> {
        self.grid.check(&o.grid)?;
        Ok(self.l2_inner_unchecked(o))
    }

    pub(crate) fn l2_inner_unchecked(&self, o: &Field0) -> f64 {
        let sites = self.grid.interior_sites();
        let sum = pairwise_sum(0, sites.len(), &|i| {
            let s = sites[i] as usize;
            self.data[s].inner(o.data[s])
        });
        sum * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.l2_inner_unchecked(self))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest pointwise norm over interior sites.
    pub fn max_norm(&self) -> f64 {
        let mut m: f64 = 0.0;
        self.grid.for_each_interior(|s| m = m.max(self.data[s].norm()));
        m
    }
}

impl Field1 {
    pub fn zeros(grid: &Grid) -> Field1 {
        Field1 { grid: grid.clone(), data: alloc::vec![[LieValue::ZERO; 3]; grid.sites()] }
    }

    pub fn from_fn<F: FnMut(usize) -> [LieValue; 3]>(grid: &Grid, f: F) -> Field1 {
        Field1 { grid: grid.clone(), data: (0..grid.sites()).map(f).collect() }
    }

    pub fn random_interior(grid: &Grid, rng: &mut TrialRng) -> Field1 {
        let mut f = Field1::zeros(grid);
        grid.for_each_interior(|s| f.data[s] = [rng::lie(rng), rng::lie(rng), rng::lie(rng)]);
        f
    }

    /// The `i`-th component as a [`Field0`].
    pub fn component(&self, i: usize) -> Field0 {
        Field0 { grid: self.grid.clone(), data: self.data.iter().map(|v| v[i]).collect() }
    }

    pub fn mask(&mut self) {
        for s in 0..self.data.len() {
            if !self.grid.is_interior(s) {
                self.data[s] = [LieValue::ZERO; 3];
            }
        }
    }

    pub fn scaled(&self, a: f64) -> Field1 {
        Field1 {
            grid: self.grid.clone(),
            data: self.data.iter().map(|v| [a * v[0], a * v[1], a * v[2]]).collect(),
        }
    }

    pub fn add(&self, o: &Field1) -> Result<Field1> {
        self.grid.check(&o.grid)?;
        Ok(self.zip(o, |x, y| x + y))
    }

    pub fn sub(&self, o: &Field1) -> Result<Field1> {
        self.grid.check(&o.grid)?;
        Ok(self.zip(o, |x, y| x - y))
    }

    pub(crate) fn zip<F: Fn(LieValue, LieValue) -> LieValue>(&self, o: &Field1, f: F) -> Field1 {
        Field1 {
            grid: self.grid.clone(),
            data: self
                .data
                .iter()
                .zip(o.data.iter())
                .map(|(x, y)| [f(x[0], y[0]), f(x[1], y[1]), f(x[2], y[2])])
                .collect(),
        }
    }

    pub fn axpy(&mut self, a: f64, x: &Field1) {
        for (y, v) in self.data.iter_mut().zip(x.data.iter()) {
            y[0] += a * v[0];
            y[1] += a * v[1];
            y[2] += a * v[2];
        }
    }

    pub fn l2_inner(&self, o: &Field1) -> Result<f64> {
        self.grid.check(&o.grid)?;
        Ok(self.l2_inner_unchecked(o))
    }

    pub(crate) fn l2_inner_unchecked(&self, o: &Field1) -> f64 {
        let sites = self.grid.interior_sites();
        let sum = pairwise_sum(0, sites.len(), &|i| {
            let s = sites[i] as usize;
            let (x, y) = (&self.data[s], &o.data[s]);
            x[0].inner(y[0]) + x[1].inner(y[1]) + x[2].inner(y[2])
        });
        sum * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.l2_inner_unchecked(self))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.iter().all(|c| c.is_finite()))
    }

    /// Largest pointwise norm `(Σᵢ|wᵢ|²)^½` over interior sites.
    pub fn max_norm(&self) -> f64 {
        let mut m: f64 = 0.0;
        self.grid.for_each_interior(|s| {
            let v = &self.data[s];
            m = m.max(libm::sqrt(v[0].norm_sq() + v[1].norm_sq() + v[2].norm_sq()));
        });
        m
    }
}

impl Pair {
    pub fn zeros(grid: &Grid) -> Pair {
        Pair { one: Field1::zeros(grid), zero: Field0::zeros(grid) }
    }

    pub fn new(one: Field1, zero: Field0) -> Result<Pair> {
        one.grid.check(&zero.grid)?;
        Ok(Pair { one, zero })
    }

    pub fn random_interior(grid: &Grid, rng: &mut TrialRng) -> Pair {
        let one = Field1::random_interior(grid, rng);
        let zero = Field0::random_interior(grid, rng);
        Pair { one, zero }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.zero.grid
    }

    pub fn mask(&mut self) {
        self.one.mask();
        self.zero.mask();
    }

    pub fn scaled(&self, a: f64) -> Pair {
        Pair { one: self.one.scaled(a), zero: self.zero.scaled(a) }
    }

    pub fn add(&self, o: &Pair) -> Result<Pair> {
        Ok(Pair { one: self.one.add(&o.one)?, zero: self.zero.add(&o.zero)? })
    }

    pub fn sub(&self, o: &Pair) -> Result<Pair> {
        Ok(Pair { one: self.one.sub(&o.one)?, zero: self.zero.sub(&o.zero)? })
    }

    pub fn axpy(&mut self, a: f64, x: &Pair) {
        self.one.axpy(a, &x.one);
        self.zero.axpy(a, &x.zero);
    }

    /// `⟨x, y⟩ = ⟨x₁, y₁⟩ + ⟨x₀, y₀⟩` in discrete L².
    pub fn l2_inner(&self, o: &Pair) -> Result<f64> {
        self.grid().check(o.grid())?;
        Ok(self.l2_inner_unchecked(o))
    }

    pub(crate) fn l2_inner_unchecked(&self, o: &Pair) -> f64 {
        let sites = self.grid().interior_sites();
        let (a, b) = (&self.one.data, &o.one.data);
        let (p, q) = (&self.zero.data, &o.zero.data);
        let sum = pairwise_sum(0, sites.len(), &|i| {
            let s = sites[i] as usize;
            a[s][0].inner(b[s][0]) + a[s][1].inner(b[s][1]) + a[s][2].inner(b[s][2]) + p[s].inner(q[s])
        });
        sum * self.grid().cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.l2_inner_unchecked(self))
    }

    pub fn is_finite(&self) -> bool {
        self.one.is_finite() && self.zero.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn inner_products_only_see_interior_sites() {
        let g = Grid::with_radius(9, 2.0).unwrap();
        let f = Field0::from_fn(&g, |_| LieValue::new(1.0, 0.0, 0.0));
        let expect = g.interior_count() as f64 * g.cell_volume();
        assert!((f.l2_inner(&f).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = Field0::zeros(&Grid::with_radius(9, 2.0).unwrap());
        let b = Field0::zeros(&Grid::with_radius(11, 2.0).unwrap());
        assert_eq!(a.l2_inner(&b), Err(crate::Error::GridMismatch));
    }

    #[test]
    fn reductions_are_bit_reproducible() {
        let g = Grid::with_radius(17, 4.0).unwrap();
        let mut rng = seeded(3);
        let p = Pair::random_interior(&g, &mut rng);
        let q = Pair::random_interior(&g, &mut rng);
        let first = p.l2_inner(&q).unwrap();
        for _ in 0..3 {
            assert_eq!(p.l2_inner(&q).unwrap().to_bits(), first.to_bits());
        }
    }
}
