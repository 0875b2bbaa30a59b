//! Matrix-free Krylov methods: preconditioned conjugate gradients, block
//! Lanczos with full reorthogonalisation, and a dense symmetric eigensolver
//! for the projected matrices.

use alloc::vec::Vec;

use crate::field::Pair;
use crate::{Error, Result};

/// Vector space operations needed by the solvers.
pub trait KVec: Clone {
    fn dot(&self, o: &Self) -> f64;
    fn axpy(&mut self, a: f64, x: &Self);
    fn scale_mut(&mut self, a: f64);
    fn zero_like(&self) -> Self;

    fn norm(&self) -> f64 {
        libm::sqrt(self.dot(self).max(0.0))
    }
}

impl KVec for Pair {
    fn dot(&self, o: &Pair) -> f64 {
        self.l2_inner_unchecked(o)
    }

    fn axpy(&mut self, a: f64, x: &Pair) {
        Pair::axpy(self, a, x)
    }

    fn scale_mut(&mut self, a: f64) {
        for v in self.one.data.iter_mut() {
            for c in v.iter_mut() {
                *c = a * *c;
            }
        }
        for v in self.zero.data.iter_mut() {
            *v = a * *v;
        }
    }

    fn zero_like(&self) -> Pair {
        Pair::zeros(self.grid())
    }
}

/// Outcome of a CG run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    /// Final `‖b − Ax‖ / ‖b‖`.
    pub relative_residual: f64,
}

/// Preconditioned conjugate gradients for a symmetric positive `apply`.
///
/// Stops when `‖b − Ax‖ ≤ tol ‖b‖`. A zero right-hand side returns zero
/// after 0 iterations. The true residual is recomputed at exit.
pub fn cg<V, A, P>(apply: A, precond: P, rhs: &V, x0: Option<V>, tol: f64, max_iter: usize) -> Result<(V, CgStats)>
where
    V: KVec,
    A: Fn(&V) -> V,
    P: Fn(&V) -> V,
{
    let bnorm = rhs.norm();
    if bnorm == 0.0 {
        return Ok((rhs.zero_like(), CgStats::default()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive"));
    }
    let mut x = x0.unwrap_or_else(|| rhs.zero_like());
    let mut r = rhs.clone();
    r.axpy(-1.0, &apply(&x));
    let target = tol * bnorm;
    let mut rnorm = r.norm();
    if rnorm <= target {
        return Ok((x, CgStats { iterations: 0, relative_residual: rnorm / bnorm }));
    }
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    for it in 1..=max_iter {
        let q = apply(&p);
        let pq = p.dot(&q);
        if !(pq > 0.0) {
            return Err(Error::NotConverged { iterations: it, residual: rnorm / bnorm });
        }
        let alpha = rz / pq;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &q);
        rnorm = r.norm();
        if rnorm <= target {
            let mut t = rhs.clone();
            t.axpy(-1.0, &apply(&x));
            let true_res = t.norm();
            if true_res <= 2.0 * target {
                return Ok((x, CgStats { iterations: it, relative_residual: true_res / bnorm }));
            }
            // Restart from the true residual.
            r = t;
            rnorm = true_res;
            z = precond(&r);
            rz = r.dot(&z);
            p = z;
            continue;
        }
        z = precond(&r);
        let rz_new = r.dot(&z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.scale_mut(beta);
        p.axpy(1.0, &z);
    }
    Err(Error::NotConverged { iterations: max_iter, residual: rnorm / bnorm })
}

/// Orthogonalises `w` against `basis` (two passes of modified
/// Gram–Schmidt) and returns the remaining norm.
pub fn orthogonalize<V: KVec>(w: &mut V, basis: &[V]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(w);
            w.axpy(-c, b);
        }
    }
    w.norm()
}

/// Ritz values (ascending) of a symmetric `apply` from a block Krylov space
/// started at `start`, with full reorthogonalisation. Runs until the basis
/// holds `max_dim` vectors or the space becomes invariant.
///
/// The projected matrix is `Vᵀ A V` accumulated column by column and
/// symmetrised, so only the basis is stored.
pub fn block_lanczos<V, A>(apply: A, start: Vec<V>, max_dim: usize) -> Result<Vec<f64>>
where
    V: KVec,
    A: FnMut(&V) -> Result<V>,
{
    let (basis, t) = block_lanczos_basis(apply, start, max_dim)?;
    let k = basis.len();
    Ok(sym_eigen(t, k, false).0)
}

/// As [`block_lanczos`], also returning the basis and the projected matrix
/// (row-major `k×k`).
pub fn block_lanczos_basis<V, A>(mut apply: A, start: Vec<V>, max_dim: usize) -> Result<(Vec<V>, Vec<f64>)>
where
    V: KVec,
    A: FnMut(&V) -> Result<V>,
{
    if start.is_empty() || max_dim == 0 {
        return Err(Error::InvalidArgument("block Lanczos needs a start block"));
    }
    let mut basis: Vec<V> = Vec::new();
    let mut block: Vec<usize> = Vec::new();
    for mut v in start {
        let before = v.norm();
        let after = orthogonalize(&mut v, &basis);
        if before > 0.0 && after > 1e-10 * before && basis.len() < max_dim {
            v.scale_mut(1.0 / after);
            block.push(basis.len());
            basis.push(v);
        }
    }
    if basis.is_empty() {
        return Err(Error::ZeroInput);
    }
    // t[i][j] = ⟨v_i, A v_j⟩ filled for i ≤ j as columns are produced.
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut pending: Vec<V> = Vec::new();
    let mut next = 0;
    while next < basis.len() {
        let j = next;
        next += 1;
        let w = apply(&basis[j])?;
        let col: Vec<f64> = basis.iter().map(|b| b.dot(&w)).collect();
        cols.push(col);
        pending.push(w);
        let end_of_block = block.last().map_or(true, |&last| j == last);
        if end_of_block {
            let mut new_block = Vec::new();
            for mut w in pending.drain(..) {
                if basis.len() >= max_dim {
                    break;
                }
                let before = w.norm();
                let after = orthogonalize(&mut w, &basis);
                if before > 0.0 && after > 1e-10 * before {
                    w.scale_mut(1.0 / after);
                    new_block.push(basis.len());
                    basis.push(w);
                }
            }
            if new_block.is_empty() {
                break;
            }
            block = new_block;
        }
    }
    let k = cols.len();
    let mut t = alloc::vec![0.0; k * k];
    for j in 0..k {
        for i in 0..k {
            let tij = cols[j].get(i).copied();
            let tji = if i < k { cols[i].get(j).copied() } else { None };
            t[i * k + j] = match (tij, tji) {
                (Some(a), Some(b)) => 0.5 * (a + b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => 0.0,
            };
        }
    }
    basis.truncate(k);
    Ok((basis, t))
}

/// Eigenvalues (ascending) of a dense symmetric `n×n` row-major matrix by
/// the cyclic Jacobi method, with eigenvectors as columns of a row-major
/// matrix when `vectors` is set.
pub fn sym_eigen(mut a: Vec<f64>, n: usize, vectors: bool) -> (Vec<f64>, Vec<f64>) {
    let mut v = alloc::vec![0.0; if vectors { n * n } else { 0 }];
    if vectors {
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            diag += a[i * n + i] * a[i * n + i];
            for j in 0..n {
                if i != j {
                    off += a[i * n + j] * a[i * n + j];
                }
            }
        }
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = libm::copysign(1.0, theta) / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                if vectors {
                    for k in 0..n {
                        let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let vals = order.iter().map(|&i| a[i * n + i]).collect();
    if !vectors {
        return (vals, v);
    }
    let mut sorted = alloc::vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            sorted[k * n + new] = v[k * n + old];
        }
    }
    (vals, sorted)
}

/// Largest eigenvalue of a symmetric positive `apply` by power iteration
/// with Rayleigh quotients; stops when successive quotients agree to `tol`.
pub fn power_iteration<V, A>(mut apply: A, start: V, tol: f64, max_iter: usize) -> Result<f64>
where
    V: KVec,
    A: FnMut(&V) -> Result<V>,
{
    let mut x = start;
    let n = x.norm();
    if n == 0.0 {
        return Err(Error::ZeroInput);
    }
    x.scale_mut(1.0 / n);
    let mut last = f64::NAN;
    for _ in 0..max_iter {
        let y = apply(&x)?;
        let rq = x.dot(&y);
        let ny = y.norm();
        if ny == 0.0 {
            return Ok(0.0);
        }
        if (rq - last).abs() <= tol * rq.abs() {
            return Ok(rq);
        }
        last = rq;
        x = y;
        x.scale_mut(1.0 / ny);
    }
    Err(Error::Stagnation)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Debug)]
    struct V(Vec<f64>);

    impl KVec for V {
        fn dot(&self, o: &V) -> f64 {
            self.0.iter().zip(o.0.iter()).map(|(a, b)| a * b).sum()
        }
        fn axpy(&mut self, a: f64, x: &V) {
            for (y, v) in self.0.iter_mut().zip(x.0.iter()) {
                *y += a * v;
            }
        }
        fn scale_mut(&mut self, a: f64) {
            for y in self.0.iter_mut() {
                *y *= a;
            }
        }
        fn zero_like(&self) -> V {
            V(alloc::vec![0.0; self.0.len()])
        }
    }

    fn laplacian(x: &V) -> V {
        let n = x.0.len();
        V((0..n)
            .map(|i| {
                let l = if i > 0 { x.0[i - 1] } else { 0.0 };
                let r = if i + 1 < n { x.0[i + 1] } else { 0.0 };
                2.0 * x.0[i] - l - r
            })
            .collect())
    }

    #[test]
    fn cg_solves_a_path_laplacian() {
        let b = V((0..50).map(|i| (i as f64 * 0.3).sin()).collect());
        let (x, st) = cg(laplacian, |r: &V| r.clone(), &b, None, 1e-12, 200).unwrap();
        let mut res = b.clone();
        res.axpy(-1.0, &laplacian(&x));
        assert!(res.norm() <= 1e-11 * b.norm());
        assert!(st.iterations <= 50);
    }

    #[test]
    fn zero_rhs_takes_no_iterations() {
        let b = V(alloc::vec![0.0; 10]);
        let (x, st) = cg(laplacian, |r: &V| r.clone(), &b, None, 1e-8, 10).unwrap();
        assert_eq!(st.iterations, 0);
        assert_eq!(x.norm(), 0.0);
    }

    #[test]
    fn lanczos_recovers_the_path_spectrum() {
        let n = 20;
        let start: Vec<V> = (0..2).map(|k| V((0..n).map(|i| ((i * (k + 3)) as f64).cos()).collect())).collect();
        let vals = block_lanczos(|x: &V| Ok(laplacian(x)), start, n).unwrap();
        let pi = core::f64::consts::PI;
        for (j, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * libm::cos(pi * (j + 1) as f64 / (n + 1) as f64);
            assert!((v - exact).abs() < 1e-10, "{j}: {v} vs {exact}");
        }
    }

    #[test]
    fn block_lanczos_sees_multiplicity() {
        // diag(1, 1, 1, 2, 3, ...) has a triple eigenvalue.
        let n = 12;
        let d: Vec<f64> = (0..n).map(|i| if i < 3 { 1.0 } else { i as f64 - 1.0 }).collect();
        let op = |x: &V| Ok(V(x.0.iter().zip(d.iter()).map(|(a, b)| a * b).collect()));
        let start: Vec<V> = (0..3).map(|k| V((0..n).map(|i| 1.0 + ((i + 7 * k) as f64).sin()).collect())).collect();
        let vals = block_lanczos(op, start, n).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_eigenvectors() {
        let a = alloc::vec![2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0];
        let (vals, vecs) = sym_eigen(a.clone(), 3, true);
        for j in 0..3 {
            for i in 0..3 {
                let av: f64 = (0..3).map(|k| a[i * 3 + k] * vecs[k * 3 + j]).sum();
                assert!((av - vals[j] * vecs[i * 3 + j]).abs() < 1e-12);
            }
        }
    }
}
