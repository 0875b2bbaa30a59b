//! The charge-1 Prasad–Sommerfield seed and Bogomolny diagnostics.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::calculus::{self, bwd, interior_sum, norm_sq3, Stencil};
use crate::field::{Field0, Field1, Pair};
use crate::grid::Grid;
use crate::lie::LieValue;
use crate::reduce::pairwise_sum;
use crate::rng::{self, TrialRng};
use crate::{Error, Result};

/// A point `(∇, Φ, a, Ψ)` of the configuration space. `nabla` is the
/// connection form relative to the product connection.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub nabla: Field1,
    pub phi: Field0,
    pub a: Field1,
    pub psi: Field0,
}

impl Configuration {
    pub fn zeros(grid: &Grid) -> Configuration {
        Configuration {
            nabla: Field1::zeros(grid),
            phi: Field0::zeros(grid),
            a: Field1::zeros(grid),
            psi: Field0::zeros(grid),
        }
    }

    /// `(∇, Φ, 0, 0)`.
    pub fn real(nabla: Field1, phi: Field0) -> Result<Configuration> {
        nabla.grid.check(&phi.grid)?;
        let g = phi.grid.clone();
        Ok(Configuration { nabla, phi, a: Field1::zeros(&g), psi: Field0::zeros(&g) })
    }

    pub fn new(nabla: Field1, phi: Field0, a: Field1, psi: Field0) -> Result<Configuration> {
        nabla.grid.check(&phi.grid)?;
        nabla.grid.check(&a.grid)?;
        nabla.grid.check(&psi.grid)?;
        Ok(Configuration { nabla, phi, a, psi })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.phi.grid
    }

    /// True when `a` and `Ψ` vanish identically.
    pub fn is_real(&self) -> bool {
        self.a.data.iter().all(|v| *v == [LieValue::ZERO; 3])
            && self.psi.data.iter().all(|v| *v == LieValue::ZERO)
    }

    /// The real part `(∇, Φ)` as a pair.
    pub fn real_part(&self) -> Pair {
        Pair { one: self.nabla.clone(), zero: self.phi.clone() }
    }

    /// The imaginary part `(a, Ψ)` as a pair.
    pub fn imaginary_part(&self) -> Pair {
        Pair { one: self.a.clone(), zero: self.psi.clone() }
    }

    /// Builds `(m, v)` from real and imaginary pairs.
    pub fn from_parts(m: &Pair, v: &Pair) -> Result<Configuration> {
        m.grid().check(v.grid())?;
        Ok(Configuration {
            nabla: m.one.clone(),
            phi: m.zero.clone(),
            a: v.one.clone(),
            psi: v.zero.clone(),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.nabla.is_finite() && self.phi.is_finite() && self.a.is_finite() && self.psi.is_finite()
    }

    /// Independent uniform coefficients at every site, boundary included.
    pub fn random(grid: &Grid, rng: &mut TrialRng) -> Configuration {
        let mut one = || Field1::from_fn(grid, |_| [rng::lie(rng), rng::lie(rng), rng::lie(rng)]);
        let (nabla, a) = (one(), one());
        let mut zero = || Field0::from_fn(grid, |_| rng::lie(rng));
        let (phi, psi) = (zero(), zero());
        Configuration { nabla, phi, a, psi }
    }
}

/// `H(r) = coth r − 1/r`, with its series below `r = 1e−3`.
pub fn profile_h(r: f64) -> f64 {
    if r < 1e-3 {
        r / 3.0 - r * r * r / 45.0
    } else {
        1.0 / libm::tanh(r) - 1.0 / r
    }
}

/// `K(r) = 1 − r/sinh r`, with its series below `r = 1e−3`.
pub fn profile_k(r: f64) -> f64 {
    if r < 1e-3 {
        r * r / 6.0 - 7.0 * r * r * r * r / 360.0
    } else {
        1.0 - r / libm::sinh(r)
    }
}

/// Closed-form seed values `(A, Φ)` at a point.
pub fn seed_at(x: [f64; 3]) -> ([LieValue; 3], LieValue) {
    let r = libm::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    if r == 0.0 {
        return ([LieValue::ZERO; 3], LieValue::ZERO);
    }
    let xh = [x[0] / r, x[1] / r, x[2] / r];
    let h = profile_h(r);
    let c = -profile_k(r) / r;
    // A_i = −(K/r) e_i × x̂
    let a = [
        LieValue::new(0.0, -c * xh[2], c * xh[1]),
        LieValue::new(c * xh[2], 0.0, -c * xh[0]),
        LieValue::new(-c * xh[1], c * xh[0], 0.0),
    ];
    (a, LieValue::new(h * xh[0], h * xh[1], h * xh[2]))
}

/// The Prasad–Sommerfield hedgehog, sampled at every site including the
/// boundary, where it serves as the asymptotic model.
pub fn bps_seed(grid: &Grid) -> Configuration {
    let mut nabla = Field1::zeros(grid);
    let mut phi = Field0::zeros(grid);
    for s in 0..grid.sites() {
        let (a, p) = seed_at(grid.position(s));
        nabla.data[s] = a;
        phi.data[s] = p;
    }
    Configuration { a: Field1::zeros(grid), psi: Field0::zeros(grid), nabla, phi }
}

/// `∗F_∇ − d_∇Φ`.
pub fn bogomolny_residual(m: &Configuration) -> Field1 {
    let g = m.grid();
    let st = Stencil::new(g);
    calculus::interior1(g, |s| {
        let a = &m.nabla.data[s];
        let f = calculus::add3(st.curl(&m.nabla.data, s), calculus::scale3(0.5, bwd(a, a)));
        let dphi = calculus::add3(st.grad(&m.phi.data, s), calculus::ad3(a, m.phi.data[s]));
        calculus::sub3(f, dphi)
    })
}

/// The eight squared terms of the energy functional.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyTerms {
    pub curvature: f64,
    pub grad_a: f64,
    pub grad_phi: f64,
    pub grad_psi: f64,
    pub a_wedge_a: f64,
    pub a_phi: f64,
    pub a_psi: f64,
    pub psi_phi: f64,
}

impl EnergyTerms {
    pub fn total(&self) -> f64 {
        self.curvature
            + self.grad_a
            + self.grad_phi
            + self.grad_psi
            + self.a_wedge_a
            + self.a_phi
            + self.a_psi
            + self.psi_phi
    }

    pub fn as_array(&self) -> [(&'static str, f64); 8] {
        [
            ("curvature", self.curvature),
            ("grad_a", self.grad_a),
            ("grad_phi", self.grad_phi),
            ("grad_psi", self.grad_psi),
            ("a_wedge_a", self.a_wedge_a),
            ("a_phi", self.a_phi),
            ("a_psi", self.a_psi),
            ("psi_phi", self.psi_phi),
        ]
    }
}

/// `‖F‖² + ‖∇a‖² + ‖∇Φ‖² + ‖∇Ψ‖² + ¼‖[a∧a]‖² + ‖[a,Φ]‖² + ‖[a,Ψ]‖² + ‖[Ψ,Φ]‖²`.
pub fn energy(c: &Configuration) -> EnergyTerms {
    let g = c.grid();
    let st = Stencil::new(g);
    let cov = |f: &[LieValue], a: &[LieValue; 3], s: usize, v: LieValue| {
        calculus::add3(st.grad(f, s), calculus::ad3(a, v))
    };
    let (a_comp, f) = ([c.a.component(0), c.a.component(1), c.a.component(2)], calculus::curvature(&c.nabla));
    let term = |k: usize| {
        interior_sum(g, |s| {
            let na = &c.nabla.data[s];
            let (a, phi, psi) = (&c.a.data[s], c.phi.data[s], c.psi.data[s]);
            match k {
                0 => norm_sq3(&f.data[s]),
                1 => (0..3).map(|j| norm_sq3(&cov(&a_comp[j].data, na, s, a[j]))).sum(),
                2 => norm_sq3(&cov(&c.phi.data, na, s, phi)),
                3 => norm_sq3(&cov(&c.psi.data, na, s, psi)),
                4 => 0.25 * norm_sq3(&bwd(a, a)),
                5 => (0..3).map(|i| a[i].bracket(phi).norm_sq()).sum(),
                6 => (0..3).map(|i| a[i].bracket(psi).norm_sq()).sum(),
                _ => psi.bracket(phi).norm_sq(),
            }
        })
    };
    EnergyTerms {
        curvature: term(0),
        grad_a: term(1),
        grad_phi: term(2),
        grad_psi: term(3),
        a_wedge_a: term(4),
        a_phi: term(5),
        a_psi: term(6),
        psi_phi: term(7),
    }
}

/// Unit vectors of the geodesic icosahedron after `levels` subdivisions
/// (`10·4^levels + 2` points).
pub fn icosphere(levels: usize) -> Vec<[f64; 3]> {
    let t = (1.0 + libm::sqrt(5.0)) / 2.0;
    let mut pts: Vec<[f64; 3]> = alloc::vec![
        [-1.0, t, 0.0], [1.0, t, 0.0], [-1.0, -t, 0.0], [1.0, -t, 0.0],
        [0.0, -1.0, t], [0.0, 1.0, t], [0.0, -1.0, -t], [0.0, 1.0, -t],
        [t, 0.0, -1.0], [t, 0.0, 1.0], [-t, 0.0, -1.0], [-t, 0.0, 1.0],
    ];
    let mut faces: Vec<[usize; 3]> = alloc::vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    let unit = |p: [f64; 3]| {
        let r = libm::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        [p[0] / r, p[1] / r, p[2] / r]
    };
    for p in pts.iter_mut() {
        *p = unit(*p);
    }
    for _ in 0..levels {
        let mut mids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, pts: &mut Vec<[f64; 3]>| {
            let key = (a.min(b), a.max(b));
            *mids.entry(key).or_insert_with(|| {
                let (p, q) = (pts[a], pts[b]);
                pts.push(unit([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                pts.len() - 1
            })
        };
        for &[a, b, c] in faces.iter() {
            let ab = mid(a, b, &mut pts);
            let bc = mid(b, c, &mut pts);
            let ca = mid(c, a, &mut pts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    pts
}

/// Trilinear interpolation weights: 8 `(site, weight)` pairs, or `None`
/// when a corner is not an interior site.
pub(crate) fn trilinear(g: &Grid, x: [f64; 3]) -> Option<[(usize, f64); 8]> {
    let c = g.center() as f64;
    let mut base = [0usize; 3];
    let mut frac = [0.0; 3];
    for i in 0..3 {
        let u = x[i] / g.h() + c;
        if !(u >= 0.0) || u >= (g.n() - 1) as f64 {
            return None;
        }
        let f = libm::floor(u);
        base[i] = f as usize;
        frac[i] = u - f;
    }
    let mut out = [(0usize, 0.0); 8];
    for (m, slot) in out.iter_mut().enumerate() {
        let (di, dj, dk) = (m & 1, (m >> 1) & 1, (m >> 2) & 1);
        let s = g.index(base[0] + di, base[1] + dj, base[2] + dk);
        if !g.is_interior(s) {
            return None;
        }
        let w = |d: usize, f: f64| if d == 1 { f } else { 1.0 - f };
        *slot = (s, w(di, frac[0]) * w(dj, frac[1]) * w(dk, frac[2]));
    }
    Some(out)
}

/// Threshold below which `|Φ|` counts as vanishing on a charge shell.
pub const HIGGS_THRESHOLD: f64 = 0.05;

/// Flux charge `(1/4π) ∮ ⟨Φ̂, ∗F⟩` over the sphere `|x| = r_shell`, using
/// trilinear interpolation at the 642 points of a geodesic icosahedron.
pub fn charge(m: &Configuration, r_shell: f64) -> Result<f64> {
    let g = m.grid();
    if !(r_shell > 0.0) {
        return Err(Error::InvalidArgument("r_shell must be positive"));
    }
    let pts = icosphere(3);
    let mut stencils = Vec::with_capacity(pts.len());
    for p in pts.iter() {
        let x = [r_shell * p[0], r_shell * p[1], r_shell * p[2]];
        match trilinear(g, x) {
            Some(w) => stencils.push(w),
            None => return Err(Error::ShellOutsideGrid { r_shell, radius: g.radius() }),
        }
    }
    let f = calculus::curvature(&m.nabla);
    let mut min_norm = f64::INFINITY;
    let mut vals = Vec::with_capacity(pts.len());
    for (p, w) in pts.iter().zip(stencils.iter()) {
        let mut phi = LieValue::ZERO;
        let mut b = [LieValue::ZERO; 3];
        for &(s, wt) in w.iter() {
            phi += wt * m.phi.data[s];
            for i in 0..3 {
                b[i] += wt * f.data[s][i];
            }
        }
        let norm = phi.norm();
        min_norm = min_norm.min(norm);
        let flux = p[0] * b[0] + p[1] * b[1] + p[2] * b[2];
        vals.push(phi.inner(flux) / norm.max(f64::MIN_POSITIVE));
    }
    if min_norm < HIGGS_THRESHOLD {
        return Err(Error::HiggsVanishesOnShell { min_norm });
    }
    let mean = pairwise_sum(0, vals.len(), &|i| vals[i]) / vals.len() as f64;
    // ∮ ≈ 4π r² · mean, divided by 4π.
    Ok(r_shell * r_shell * mean)
}

/// Pullback under `x ↦ −x`.
pub fn reflect(m: &Configuration) -> Configuration {
    let g = m.grid();
    let last = g.sites() - 1;
    let zero = |f: &Field0| Field0::from_fn(g, |s| f.data[last - s]);
    let one = |f: &Field1| {
        Field1::from_fn(g, |s| {
            let v = f.data[last - s];
            [-v[0], -v[1], -v[2]]
        })
    };
    Configuration { nabla: one(&m.nabla), phi: zero(&m.phi), a: one(&m.a), psi: zero(&m.psi) }
}

/// Gauge transform by `g = exp(θ(x) n)` for a unit `n`. `theta` returns
/// `θ` and its gradient at a point.
pub fn gauge_transform<T>(m: &Configuration, n: LieValue, theta: T) -> Configuration
where
    T: Fn([f64; 3]) -> (f64, [f64; 3]),
{
    let g = m.grid();
    let mut out = m.clone();
    for s in 0..g.sites() {
        let (th, dth) = theta(g.position(s));
        let ad = |v: LieValue| v.ad_exp(n, th);
        out.phi.data[s] = ad(m.phi.data[s]);
        out.psi.data[s] = ad(m.psi.data[s]);
        for i in 0..3 {
            out.nabla.data[s][i] = ad(m.nabla.data[s][i]) - dth[i] * n;
            out.a.data[s][i] = ad(m.a.data[s][i]);
        }
    }
    out
}

/// Result of [`asymptotic_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticReport {
    /// Fitted `|Φ∞|`.
    pub c0: f64,
    /// Fitted mass term in `|Φ| ≈ c₀ − c₁/(2r)`.
    pub c1: f64,
    /// RMS of the fit remainder.
    pub remainder_rms: f64,
    /// Log-log slope of `|d_∇Φ|` against `r`.
    pub decay_slope: f64,
    /// Number of distinct shells used.
    pub shells: usize,
    /// Number of sites used.
    pub samples: usize,
}

/// Least-squares fits of `|Φ|` against `{1, 1/r}` and of `log|d_∇Φ|`
/// against `log r` over interior sites with `R/2 ≤ r ≤ R`.
pub fn asymptotic_check(m: &Configuration) -> Result<AsymptoticReport> {
    let g = m.grid();
    let dphi = calculus::d0(&m.nabla, &m.phi)?;
    let (lo, hi) = (0.5 * g.radius(), g.radius());
    let c = g.center() as i64;
    let mut shells = BTreeMap::new();
    let mut samples: Vec<(f64, f64, f64)> = Vec::new();
    g.for_each_interior(|s| {
        let r = g.r(s);
        if r >= lo && r <= hi {
            let [i, j, k] = g.coords(s);
            let (di, dj, dk) = (i as i64 - c, j as i64 - c, k as i64 - c);
            shells.insert(di * di + dj * dj + dk * dk, ());
            let dn = libm::sqrt(norm_sq3(&dphi.data[s]));
            samples.push((r, m.phi.data[s].norm(), dn));
        }
    });
    if shells.len() < 3 {
        return Err(Error::TooFewShells(shells.len()));
    }
    let n = samples.len();
    let sum = |f: &dyn Fn(&(f64, f64, f64)) -> f64| pairwise_sum(0, n, &|i| f(&samples[i]));
    let (alpha, beta) = fit_line(
        n as f64,
        sum(&|p| 1.0 / p.0),
        sum(&|p| 1.0 / (p.0 * p.0)),
        sum(&|p| p.1),
        sum(&|p| p.1 / p.0),
    );
    let rss = sum(&|p| {
        let e = p.1 - alpha - beta / p.0;
        e * e
    });
    let mut slope = f64::NAN;
    let positive = samples.iter().all(|p| p.2 > 0.0);
    if positive {
        let (_, b) = fit_line(
            n as f64,
            sum(&|p| libm::log(p.0)),
            sum(&|p| libm::log(p.0) * libm::log(p.0)),
            sum(&|p| libm::log(p.2)),
            sum(&|p| libm::log(p.2) * libm::log(p.0)),
        );
        slope = b;
    }
    Ok(AsymptoticReport {
        c0: alpha,
        c1: -2.0 * beta,
        remainder_rms: libm::sqrt(rss / n as f64),
        decay_slope: slope,
        shells: shells.len(),
        samples: n,
    })
}

/// Solves the 2×2 normal equations of `y ≈ α + β x` from the sums
/// `n, Σx, Σx², Σy, Σxy`.
fn fit_line(n: f64, sx: f64, sxx: f64, sy: f64, sxy: f64) -> (f64, f64) {
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return (sy / n, 0.0);
    }
    ((sxx * sy - sx * sxy) / det, (n * sxy - sx * sy) / det)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_are_continuous_at_the_series_switch() {
        let r = 1e-3;
        assert!((profile_h(r * (1.0 - 1e-12)) - profile_h(r)).abs() < 1e-12);
        assert!((profile_k(r * (1.0 - 1e-12)) - profile_k(r)).abs() < 1e-12);
    }

    #[test]
    fn seed_vanishes_at_origin() {
        let g = Grid::with_radius(9, 2.0).unwrap();
        let m = bps_seed(&g);
        let c = g.center();
        let o = g.index(c, c, c);
        assert_eq!(m.phi.data[o], LieValue::ZERO);
        assert_eq!(m.nabla.data[o], [LieValue::ZERO; 3]);
        assert!(m.is_real());
    }

    #[test]
    fn higgs_norm_at_r8() {
        let (_, p) = seed_at([0.0, 0.0, 8.0]);
        let expect = 1.0 / libm::tanh(8.0) - 0.125;
        assert!((p.norm() - expect).abs() < 1e-14);
        assert!((p.norm() - 0.875).abs() < 1e-3);
    }

    #[test]
    fn icosphere_has_642_unit_points() {
        let p = icosphere(3);
        assert_eq!(p.len(), 642);
        for q in p {
            assert!((q[0] * q[0] + q[1] * q[1] + q[2] * q[2] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn energy_of_zero_configuration() {
        let g = Grid::with_radius(9, 2.0).unwrap();
        assert_eq!(energy(&Configuration::zeros(&g)).total(), 0.0);
    }
}
