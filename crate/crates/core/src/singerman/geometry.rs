//! Floating-point model of a triangle group in `PSL₂(ℝ)`, used to check that
//! embedding words send positive rotations to positive rotations.

use core::f64::consts::PI;

use libm::{atan2, cos, sin, sqrt};

use crate::fpgroup::{Letter, Word};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse(&self) -> Mat2 {
        Mat2 { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Counterclockwise rotation angle in `[0, 2π)` about the fixed point in
    /// the upper half plane; `None` unless elliptic.
    pub fn rotation_angle(&self) -> Option<f64> {
        let t = self.trace();
        if t.abs() >= 2.0 - 1e-12 || self.c.abs() < 1e-300 {
            return None;
        }
        let s = sqrt(4.0 - t * t) * self.c.signum();
        // The derivative at the fixed point is 1 / (t/2 + i s/2)².
        let theta = -2.0 * atan2(s / 2.0, t / 2.0);
        Some(theta.rem_euclid(2.0 * PI))
    }
}

/// `z ↦ λ·R(z/λ)`: rotation by `2θ` about `iλ`.
fn rotation(theta: f64, lambda: f64) -> Mat2 {
    let (s, c) = (sin(theta), cos(theta));
    Mat2 { a: c, b: lambda * s, c: -s / lambda, d: c }
}

/// Matrices for `γ0` and `γ1` of `Δ(e0, e1, e2)` with the entries in the
/// given order: `γ0` rotates by `2π/e0` about `i`, `γ1` by `2π/e1` about
/// `iλ`, and `(γ0γ1)⁻¹` by `2π/e2`.
#[derive(Debug, Clone, Copy)]
pub struct TriangleModel {
    gens: [Mat2; 2],
}

impl TriangleModel {
    pub fn new(orders: [u32; 3]) -> TriangleModel {
        let [al, be, ga] = orders.map(|e| PI / e as f64);
        let cosh = (cos(al) * cos(be) + cos(ga)) / (sin(al) * sin(be));
        let lambda = cosh + sqrt(cosh * cosh - 1.0);
        let target = 2.0 * ga;
        let a = rotation(al, 1.0);
        [lambda, 1.0 / lambda]
            .into_iter()
            .map(|l| TriangleModel { gens: [a, rotation(be, l)] })
            .find(|m| {
                let c = m.gens[0].mul(&m.gens[1]).inverse();
                c.rotation_angle().is_some_and(|t| (t - target).abs() < 1e-9)
            })
            .expect("one orientation of the triangle closes up")
    }

    pub fn eval(&self, w: &Word) -> Mat2 {
        let inv = [self.gens[0].inverse(), self.gens[1].inverse()];
        w.letters().fold(Mat2::IDENTITY, |m, l| {
            let g = match l {
                Letter::G0 => &self.gens[0],
                Letter::G1 => &self.gens[1],
                Letter::G0Inv => &inv[0],
                Letter::G1Inv => &inv[1],
            };
            m.mul(g)
        })
    }

    /// True if `w` is a counterclockwise rotation by `2π/order`.
    pub fn is_positive_rotation(&self, w: &Word, order: u32) -> bool {
        let target = 2.0 * PI / order as f64;
        self.eval(w).rotation_angle().is_some_and(|t| (t - target).abs() < 1e-7)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_rotate_positively() {
        for orders in [[2, 3, 7], [7, 7, 7], [3, 2, 7], [5, 4, 2]] {
            let m = TriangleModel::new(orders);
            assert!(m.is_positive_rotation(&Word::parse("a").unwrap(), orders[0]));
            assert!(m.is_positive_rotation(&Word::parse("b").unwrap(), orders[1]));
            assert!(m.is_positive_rotation(&Word::parse("b^-1 a^-1").unwrap(), orders[2]));
            assert!(!m.is_positive_rotation(&Word::parse("a^-1").unwrap(), orders[0]) || orders[0] == 2);
        }
    }

    #[test]
    fn relators_are_trivial() {
        let m = TriangleModel::new([2, 3, 7]);
        let r = m.eval(&Word::parse("(a b)^7").unwrap());
        assert!((r.trace().abs() - 2.0).abs() < 1e-9 && r.b.abs() < 1e-9 && r.c.abs() < 1e-9);
    }
}
