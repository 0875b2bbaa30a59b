//! Fixed-order pairwise summation.
//!
//! Every inner product and norm in the crate goes through [`pairwise_sum`],
//! which splits an index range in halves down to blocks of [`LEAF`] terms.
//! The tree depends only on the range length, so results are bit-identical
//! no matter who calls it or how often.

/// Number of terms summed sequentially at the leaves.
pub const LEAF: usize = 32;

/// Pairwise sum of `f(i)` over `i in lo..hi`.
pub fn pairwise_sum<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
    let len = hi - lo;
    if len <= LEAF {
        let mut s = 0.0;
        for i in lo..hi {
            s += f(i);
        }
        s
    } else {
        let mid = lo + len / 2;
        pairwise_sum(lo, mid, f) + pairwise_sum(mid, hi, f)
    }
}

/// Pairwise sum of a slice.
pub fn pairwise_slice(xs: &[f64]) -> f64 {
    pairwise_sum(0, xs.len(), &|i| xs[i])
}
