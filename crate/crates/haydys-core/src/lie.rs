//! su(2) values in the basis `τ_a = iσ_a/2`.
//!
//! With this basis `[τ_a, τ_b] = −ε_abc τ_c`, so the bracket is the negated
//! cross product of coefficient vectors, and `⟨x, y⟩ = −2 tr(xy)` is the
//! Euclidean dot product times [`INNER_SCALE`].

use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Scale between `⟨x, y⟩ = −2 tr(xy)` and the dot product of coefficients.
pub const INNER_SCALE: f64 = 1.0;

/// Sign relating the bracket to the cross product of coefficients.
pub const BRACKET_SIGN: f64 = -1.0;

/// An element of su(2) stored as its three coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LieValue(pub [f64; 3]);

impl LieValue {
    pub const ZERO: LieValue = LieValue([0.0; 3]);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        LieValue([x, y, z])
    }

    /// Basis element `τ_a`.
    #[inline]
    pub fn basis(a: usize) -> Self {
        let mut v = [0.0; 3];
        v[a] = 1.0;
        LieValue(v)
    }

    /// `[self, other]`.
    #[inline(always)]
    pub fn bracket(self, o: LieValue) -> LieValue {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        LieValue([
            BRACKET_SIGN * (a1 * b2 - a2 * b1),
            BRACKET_SIGN * (a2 * b0 - a0 * b2),
            BRACKET_SIGN * (a0 * b1 - a1 * b0),
        ])
    }

    /// `⟨self, other⟩ = −2 tr(self·other)`.
    #[inline(always)]
    pub fn inner(self, o: LieValue) -> f64 {
        INNER_SCALE * (self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2])
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.inner(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        libm::sqrt(self.norm_sq())
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Adjoint action of `exp(θ n)` for a unit coefficient vector `n`.
    ///
    /// With the negated cross product this is a rotation by `−θ` about `n`.
    pub fn ad_exp(self, n: LieValue, theta: f64) -> LieValue {
        let (s, c) = (libm::sin(BRACKET_SIGN * theta), libm::cos(theta));
        let [n0, n1, n2] = n.0;
        let [v0, v1, v2] = self.0;
        let cross = [n1 * v2 - n2 * v1, n2 * v0 - n0 * v2, n0 * v1 - n1 * v0];
        let d = n0 * v0 + n1 * v1 + n2 * v2;
        LieValue([
            v0 * c + cross[0] * s + n0 * d * (1.0 - c),
            v1 * c + cross[1] * s + n1 * d * (1.0 - c),
            v2 * c + cross[2] * s + n2 * d * (1.0 - c),
        ])
    }
}

impl Add for LieValue {
    type Output = LieValue;
    #[inline(always)]
    fn add(self, o: LieValue) -> LieValue {
        LieValue([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for LieValue {
    type Output = LieValue;
    #[inline(always)]
    fn sub(self, o: LieValue) -> LieValue {
        LieValue([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for LieValue {
    type Output = LieValue;
    #[inline(always)]
    fn neg(self) -> LieValue {
        LieValue([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<LieValue> for f64 {
    type Output = LieValue;
    #[inline(always)]
    fn mul(self, v: LieValue) -> LieValue {
        LieValue([self * v.0[0], self * v.0[1], self * v.0[2]])
    }
}

impl AddAssign for LieValue {
    #[inline(always)]
    fn add_assign(&mut self, o: LieValue) {
        *self = *self + o;
    }
}

impl SubAssign for LieValue {
    #[inline(always)]
    fn sub_assign(&mut self, o: LieValue) {
        *self = *self - o;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_brackets_follow_structure_constants() {
        let t = LieValue::basis;
        assert_eq!(t(0).bracket(t(1)), -1.0 * t(2));
        assert_eq!(t(1).bracket(t(2)), -1.0 * t(0));
        assert_eq!(t(2).bracket(t(0)), -1.0 * t(1));
    }

    #[test]
    fn ad_invariance_on_basis_triples() {
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let (x, y, z) = (LieValue::basis(a), LieValue::basis(b), LieValue::basis(c));
                    assert_eq!(x.bracket(y).inner(z) + y.inner(x.bracket(z)), 0.0);
                }
            }
        }
    }

    #[test]
    fn ad_exp_matches_the_bracket_to_first_order() {
        let n = LieValue::new(0.0, 0.6, 0.8);
        let v = LieValue::new(0.3, -1.2, 0.5);
        let eps = 1e-6;
        let d = (1.0 / eps) * (v.ad_exp(n, eps) - v);
        let lin = n.bracket(v);
        assert!((d - lin).norm() < 1e-5);
    }
}
