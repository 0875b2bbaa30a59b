//! Truncated cubic lattice centred at the origin.
//!
//! Sites are indexed x-fastest: `s = i + n (j + n k)`. The site with index
//! `(c, c, c)`, `c = (n−1)/2`, is the origin and `R = h c`. The *interior*
//! is the union of the aligned 2×2×2 cells, anchored at odd indices, whose
//! eight sites all satisfy `|x| ≤ R` and lie off the outer faces of the
//! cube; everything else is *boundary*. Every interior site therefore has
//! its six axis neighbours in the cube, and every axis line meets the
//! interior in runs of even length. On runs of odd length the central
//! difference has an alternating null vector, which makes the truncated
//! operators singular.
//!
//! Operators produce values on interior sites only. Boundary values of
//! background fields (the seed, tangent vectors) hold their prescribed
//! model; perturbations vanish there.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::{Error, Result};

struct Layout {
    mask: Vec<bool>,
    rows: Vec<(usize, usize)>,
    sites: Vec<u32>,
}

/// Lattice parameters plus the cached interior layout.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    h: f64,
    layout: Arc<Layout>,
}

impl core::fmt::Debug for Grid {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).field("h", &self.h).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, o: &Grid) -> bool {
        self.n == o.n && self.h.to_bits() == o.h.to_bits()
    }
}

impl Grid {
    /// Grid with `n` sites per axis and spacing `h`.
    pub fn new(n: usize, h: f64) -> Result<Grid> {
        if n < 9 || n % 2 == 0 || !(h > 0.0) || !h.is_finite() || n > 4097 {
            return Err(Error::InvalidGrid { n, h });
        }
        let c = (n - 1) / 2;
        let m2 = (c * c) as i64;
        let inside = |i: usize, j: usize, k: usize| {
            let d = |v: usize| v as i64 - c as i64;
            let r2 = d(i) * d(i) + d(j) * d(j) + d(k) * d(k);
            i <= n - 2 && j <= n - 2 && k <= n - 2 && r2 <= m2
        };
        let mut mask = alloc::vec![false; n * n * n];
        for k in (1..n - 2).step_by(2) {
            for j in (1..n - 2).step_by(2) {
                for i in (1..n - 2).step_by(2) {
                    let cell = (0..8).all(|m| inside(i + (m & 1), j + ((m >> 1) & 1), k + (m >> 2)));
                    if cell {
                        for m in 0..8 {
                            mask[(i + (m & 1)) + n * ((j + ((m >> 1) & 1)) + n * (k + (m >> 2)))] = true;
                        }
                    }
                }
            }
        }
        let mut rows = Vec::new();
        let mut sites = Vec::new();
        for k in 1..n - 1 {
            for j in 1..n - 1 {
                let base = n * (j + n * k);
                let mut i = 1;
                while i < n - 1 {
                    if mask[base + i] {
                        let start = i;
                        while i < n - 1 && mask[base + i] {
                            sites.push((base + i) as u32);
                            i += 1;
                        }
                        rows.push((base + start, i - start));
                    } else {
                        i += 1;
                    }
                }
            }
        }
        Ok(Grid { n, h, layout: Arc::new(Layout { mask, rows, sites }) })
    }

    /// Grid with `n` sites per axis spanning `[-radius, radius]`.
    pub fn with_radius(n: usize, radius: f64) -> Result<Grid> {
        if n < 2 {
            return Err(Error::InvalidGrid { n, h: radius });
        }
        Grid::new(n, 2.0 * radius / (n as f64 - 1.0))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Truncation radius `R = h (n−1)/2`.
    #[inline]
    pub fn radius(&self) -> f64 {
        self.h * self.center() as f64
    }

    /// Index of the origin along each axis.
    #[inline]
    pub fn center(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Total number of sites `n³`.
    #[inline]
    pub fn sites(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn interior_count(&self) -> usize {
        self.layout.sites.len()
    }

    /// Interior sites in increasing index order.
    #[inline]
    pub fn interior_sites(&self) -> &[u32] {
        &self.layout.sites
    }

    /// Site strides along x, y, z.
    #[inline]
    pub fn strides(&self) -> [usize; 3] {
        [1, self.n, self.n * self.n]
    }

    /// Cell volume `h³`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    #[inline]
    pub fn coords(&self, s: usize) -> [usize; 3] {
        [s % self.n, (s / self.n) % self.n, s / (self.n * self.n)]
    }

    /// Euclidean position of site `s`.
    #[inline]
    pub fn position(&self, s: usize) -> [f64; 3] {
        let c = self.center() as f64;
        let [i, j, k] = self.coords(s);
        [(i as f64 - c) * self.h, (j as f64 - c) * self.h, (k as f64 - c) * self.h]
    }

    #[inline]
    pub fn r(&self, s: usize) -> f64 {
        let [x, y, z] = self.position(s);
        libm::sqrt(x * x + y * y + z * z)
    }

    /// Weight `ρ = (1 + |x|²)^½`.
    #[inline]
    pub fn rho(&self, s: usize) -> f64 {
        let [x, y, z] = self.position(s);
        libm::sqrt(1.0 + x * x + y * y + z * z)
    }

    #[inline]
    pub fn is_interior(&self, s: usize) -> bool {
        self.layout.mask[s]
    }

    /// Interior sites as contiguous x-rows `(first site, length)`.
    #[inline]
    pub fn interior_rows(&self) -> &[(usize, usize)] {
        &self.layout.rows
    }

    /// Calls `f` on every interior site in increasing index order.
    #[inline]
    pub fn for_each_interior<F: FnMut(usize)>(&self, mut f: F) {
        for &(start, len) in self.layout.rows.iter() {
            for s in start..start + len {
                f(s);
            }
        }
    }

    /// Largest `ρ` over interior sites.
    pub fn max_rho(&self) -> f64 {
        let mut m: f64 = 1.0;
        self.for_each_interior(|s| m = m.max(self.rho(s)));
        m
    }

    pub(crate) fn check(&self, o: &Grid) -> Result<()> {
        if self == o {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(Grid::new(8, 0.5).is_err());
        assert!(Grid::new(7, 0.5).is_err());
        assert!(Grid::new(9, 0.0).is_err());
        assert!(Grid::new(9, f64::NAN).is_err());
    }

    #[test]
    fn interior_sites_have_all_neighbours_inside_the_cube() {
        let g = Grid::with_radius(17, 4.0).unwrap();
        let n = g.n();
        let mut count = 0;
        for s in 0..g.sites() {
            if g.is_interior(s) {
                count += 1;
                let [i, j, k] = g.coords(s);
                assert!(i >= 1 && j >= 1 && k >= 1 && i + 1 < n && j + 1 < n && k + 1 < n);
                assert!(g.r(s) <= g.radius() + 1e-12);
            }
        }
        assert_eq!(count, g.interior_count());
        let c = g.center();
        assert!(g.is_interior(g.index(c, c, c)));
        assert!(!g.is_interior(g.index(0, c, c)));
    }

    #[test]
    fn axis_runs_have_even_length() {
        let g = Grid::with_radius(21, 5.0).unwrap();
        let n = g.n();
        for axis in 0..3 {
            let st = g.strides()[axis];
            for s in 0..g.sites() {
                let starts_run = g.is_interior(s) && !g.is_interior(s - st);
                if starts_run {
                    let mut len = 0;
                    while g.is_interior(s + len * st) {
                        len += 1;
                    }
                    assert_eq!(len % 2, 0, "axis {axis} site {s}");
                    assert!(g.coords(s)[axis] + len < n);
                }
            }
        }
    }

    #[test]
    fn origin_and_radius() {
        let g = Grid::with_radius(65, 8.0).unwrap();
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.radius(), 8.0);
        let c = g.center();
        assert_eq!(g.position(g.index(c, c, c)), [0.0; 3]);
    }
}
