//! Second-order jet arithmetic.
//!
//! A [`Jet2`] carries the value, gradient and Hessian of a scalar field at a
//! point. Arithmetic on jets applies the product, quotient and chain rules
//! exactly, so derivatives are correct to floating-point round-off — there is
//! no truncation error to confuse with quadrature error downstream.
//!
//! The Hessian is stored as the upper triangle of a symmetric matrix in
//! row-major packed order: entry `(i, j)` with `i ≤ j` lives at
//! `i*m - i*(i-1)/2 + (j-i)`.

/// Value, gradient and upper-triangular Hessian of a scalar field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    /// Number of ambient coordinates.
    pub dim: usize,
    /// Field value.
    pub value: f64,
    /// Gradient, length `dim`.
    pub grad: Vec<f64>,
    /// Packed upper triangle of the Hessian, length `dim*(dim+1)/2`.
    pub hess: Vec<f64>,
}

#[inline]
pub(crate) fn tri_len(m: usize) -> usize {
    m * (m + 1) / 2
}

#[inline]
pub(crate) fn tri_idx(m: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < m);
    i * (2 * m - i + 1) / 2 + (j - i)
}

impl Jet2 {
    /// Jet of a constant field.
    pub fn constant(dim: usize, value: f64) -> Self {
        Jet2 { dim, value, grad: vec![0.0; dim], hess: vec![0.0; tri_len(dim)] }
    }

    /// Jet of the `axis`-th coordinate function seeded with `value`.
    pub fn coordinate(dim: usize, axis: usize, value: f64) -> Self {
        let mut grad = vec![0.0; dim];
        grad[axis] = 1.0;
        Jet2 { dim, value, grad, hess: vec![0.0; tri_len(dim)] }
    }

    /// Symmetric Hessian entry `(i, j)` in any order.
    #[inline]
    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.hess[tri_idx(self.dim, a, b)]
    }

    /// True when value, gradient and Hessian are all finite.
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().all(|h| h.is_finite())
    }

    pub fn neg(&self) -> Jet2 {
        Jet2 {
            dim: self.dim,
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
        }
    }

    pub fn add(&self, rhs: &Jet2) -> Jet2 {
        debug_assert_eq!(self.dim, rhs.dim);
        Jet2 {
            dim: self.dim,
            value: self.value + rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Jet2) -> Jet2 {
        debug_assert_eq!(self.dim, rhs.dim);
        Jet2 {
            dim: self.dim,
            value: self.value - rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a - b).collect(),
        }
    }

    /// Product rule: `(fg)'' = f''g + f'g' + g'f' + fg''`.
    pub fn mul(&self, rhs: &Jet2) -> Jet2 {
        debug_assert_eq!(self.dim, rhs.dim);
        let m = self.dim;
        let value = self.value * rhs.value;
        let grad: Vec<f64> = (0..m)
            .map(|i| self.grad[i] * rhs.value + self.value * rhs.grad[i])
            .collect();
        let mut hess = vec![0.0; tri_len(m)];
        let mut k = 0;
        for i in 0..m {
            for j in i..m {
                hess[k] = self.hess[k] * rhs.value
                    + self.grad[i] * rhs.grad[j]
                    + self.grad[j] * rhs.grad[i]
                    + self.value * rhs.hess[k];
                k += 1;
            }
        }
        Jet2 { dim: m, value, grad, hess }
    }

    pub fn scale(&self, c: f64) -> Jet2 {
        Jet2 {
            dim: self.dim,
            value: c * self.value,
            grad: self.grad.iter().map(|g| c * g).collect(),
            hess: self.hess.iter().map(|h| c * h).collect(),
        }
    }

    /// Chain rule for a smooth univariate function with derivatives
    /// `(g, g', g'')` evaluated at `self.value`.
    pub fn compose(&self, g0: f64, g1: f64, g2: f64) -> Jet2 {
        let m = self.dim;
        let grad: Vec<f64> = self.grad.iter().map(|fi| g1 * fi).collect();
        let mut hess = vec![0.0; tri_len(m)];
        let mut k = 0;
        for i in 0..m {
            for j in i..m {
                hess[k] = g1 * self.hess[k] + g2 * self.grad[i] * self.grad[j];
                k += 1;
            }
        }
        Jet2 { dim: m, value: g0, grad, hess }
    }

    pub fn recip(&self) -> Jet2 {
        let v = self.value;
        self.compose(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn div(&self, rhs: &Jet2) -> Jet2 {
        self.mul(&rhs.recip())
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.compose(e, e, e)
    }

    pub fn ln(&self) -> Jet2 {
        let v = self.value;
        self.compose(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn sqrt(&self) -> Jet2 {
        let s = self.value.sqrt();
        self.compose(s, 0.5 / s, -0.25 / (s * s * s))
    }

    pub fn sinh(&self) -> Jet2 {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.compose(s, c, s)
    }

    pub fn cosh(&self) -> Jet2 {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.compose(c, s, c)
    }

    pub fn tanh(&self) -> Jet2 {
        let t = self.value.tanh();
        let sech2 = 1.0 - t * t;
        self.compose(t, sech2, -2.0 * t * sech2)
    }

    /// cosh/sinh; the caller guards the pole at 0.
    pub fn coth(&self) -> Jet2 {
        let c = 1.0 / self.value.tanh();
        let csch2 = c * c - 1.0;
        self.compose(c, -csch2, 2.0 * c * csch2)
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.compose(c, -s, -c)
    }

    /// `±self` by the sign of the value; the caller guards the kink at 0.
    pub fn abs(&self) -> Jet2 {
        if self.value >= 0.0 {
            self.clone()
        } else {
            self.neg()
        }
    }

    /// Integer power, valid for any base (including negative).
    pub fn powi(&self, k: i32) -> Jet2 {
        let v = self.value;
        match k {
            0 => Jet2::constant(self.dim, 1.0),
            1 => self.clone(),
            _ => {
                let g0 = v.powi(k);
                let g1 = f64::from(k) * v.powi(k - 1);
                let g2 = f64::from(k) * f64::from(k - 1) * v.powi(k - 2);
                self.compose(g0, g1, g2)
            }
        }
    }

    /// Real power; the caller guards non-positive bases.
    pub fn powf(&self, e: f64) -> Jet2 {
        let v = self.value;
        let g0 = v.powf(e);
        let g1 = e * v.powf(e - 1.0);
        let g2 = e * (e - 1.0) * v.powf(e - 2.0);
        self.compose(g0, g1, g2)
    }
}

/// First-order jet (value plus ambient gradient). Internal workhorse for
/// divergence assembly in [`crate::geometry`] and [`crate::weights`], where
/// second derivatives of composite frame components are never needed.
#[derive(Debug, Clone)]
pub(crate) struct Dual {
    pub v: f64,
    pub g: Vec<f64>,
}

impl Dual {
    pub fn constant(dim: usize, v: f64) -> Self {
        Dual { v, g: vec![0.0; dim] }
    }

    /// Forget the Hessian of a full jet.
    pub fn from_jet(j: &Jet2) -> Self {
        Dual { v: j.value, g: j.grad.clone() }
    }

    pub fn add(&self, rhs: &Dual) -> Dual {
        Dual {
            v: self.v + rhs.v,
            g: self.g.iter().zip(&rhs.g).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn mul(&self, rhs: &Dual) -> Dual {
        Dual {
            v: self.v * rhs.v,
            g: self
                .g
                .iter()
                .zip(&rhs.g)
                .map(|(a, b)| a * rhs.v + self.v * b)
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Dual {
        Dual { v: c * self.v, g: self.g.iter().map(|a| c * a).collect() }
    }

    pub fn recip(&self) -> Dual {
        let inv = 1.0 / self.v;
        let d = -inv * inv;
        Dual { v: inv, g: self.g.iter().map(|a| a * d).collect() }
    }

    /// Real power of a positive dual.
    pub fn powf(&self, e: f64) -> Dual {
        let v0 = self.v.powf(e);
        let d = e * self.v.powf(e - 1.0);
        Dual { v: v0, g: self.g.iter().map(|a| a * d).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet_xy(x: f64, y: f64) -> (Jet2, Jet2) {
        (Jet2::coordinate(2, 0, x), Jet2::coordinate(2, 1, y))
    }

    #[test]
    fn bilinear_product() {
        // x*y at (3,5): value 15, grad (5,3), mixed second derivative 1
        let (x, y) = jet_xy(3.0, 5.0);
        let p = x.mul(&y);
        assert_eq!(p.value, 15.0);
        assert_eq!(p.grad, vec![5.0, 3.0]);
        assert_eq!(p.hess_at(0, 1), 1.0);
        assert_eq!(p.hess_at(0, 0), 0.0);
        assert_eq!(p.hess_at(1, 1), 0.0);
    }

    #[test]
    fn chain_rule_exp_of_square() {
        // g = exp(x^2) at x=0.7: g' = 2x e^{x^2}, g'' = (2 + 4x^2) e^{x^2}
        let x = Jet2::coordinate(1, 0, 0.7);
        let g = x.mul(&x).exp();
        let e = (0.7f64 * 0.7).exp();
        assert!((g.value - e).abs() < 1e-15);
        assert!((g.grad[0] - 2.0 * 0.7 * e).abs() < 1e-14);
        assert!((g.hess_at(0, 0) - (2.0 + 4.0 * 0.49) * e).abs() < 1e-13);
    }

    #[test]
    fn quotient_rule() {
        // x/y at (1,2): d/dx = 1/y, d/dy = -x/y^2, d2/dy2 = 2x/y^3, d2/dxdy = -1/y^2
        let (x, y) = jet_xy(1.0, 2.0);
        let q = x.div(&y);
        assert!((q.value - 0.5).abs() < 1e-15);
        assert!((q.grad[0] - 0.5).abs() < 1e-15);
        assert!((q.grad[1] + 0.25).abs() < 1e-15);
        assert!((q.hess_at(1, 1) - 0.25).abs() < 1e-14);
        assert!((q.hess_at(0, 1) + 0.25).abs() < 1e-14);
    }

    #[test]
    fn powf_matches_exp_log() {
        let x = Jet2::coordinate(1, 0, 1.3);
        let a = x.powf(-2.5);
        let b = x.ln().scale(-2.5).exp();
        assert!((a.value - b.value).abs() / a.value.abs() < 1e-14);
        assert!((a.grad[0] - b.grad[0]).abs() / a.grad[0].abs() < 1e-13);
        assert!((a.hess_at(0, 0) - b.hess_at(0, 0)).abs() / a.hess_at(0, 0).abs() < 1e-13);
    }

    #[test]
    fn coth_is_cosh_over_sinh() {
        let x = Jet2::coordinate(1, 0, 0.9);
        let a = x.coth();
        let b = x.cosh().div(&x.sinh());
        assert!((a.value - b.value).abs() < 1e-14);
        assert!((a.grad[0] - b.grad[0]).abs() < 1e-13);
        assert!((a.hess_at(0, 0) - b.hess_at(0, 0)).abs() < 1e-12);
    }
}
