//! Truncated bivariate Taylor arithmetic (jets) up to order 4, plus a
//! finite-difference fallback used as an independent oracle.
//!
//! Surfaces are written once as maps over a generic scalar; evaluating them
//! over [`Jet2`] seeds yields every partial derivative up to order 4 at
//! machine precision, while evaluating over `f64` feeds the central-difference
//! oracle that cross-checks the same quantities.

use crate::{Error, Result};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest derivative order carried by a [`Jet2`].
pub const MAX_ORDER: usize = 4;

/// Number of multi-indices (i, j) with i + j <= 4.
const LEN: usize = 15;

#[inline]
fn idx(i: usize, j: usize) -> usize {
    let d = i + j;
    debug_assert!(d <= MAX_ORDER);
    d * (d + 1) / 2 + j
}

/// Scalar abstraction: implemented by `f64` and by [`Jet2`], so the same
/// surface/frame code runs in plain arithmetic or in jet arithmetic.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    /// The underlying point value (Taylor coefficient of order zero).
    fn value(self) -> f64;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn scale(self, k: f64) -> Self;
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn value(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
}

/// Order-4 jet in two variables.
///
/// `c[idx(i, j)]` stores the Taylor coefficient of `du^i dv^j`, i.e.
/// `(d^{i+j} f / du^i dv^j) / (i! j!)` at the base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    c: [f64; LEN],
}

impl Jet2 {
    pub fn constant(x: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = x;
        Jet2 { c }
    }

    /// Seed for an independent variable: `dir` 0 is u, 1 is v.
    pub fn variable(x: f64, dir: usize) -> Self {
        let mut c = [0.0; LEN];
        c[0] = x;
        c[if dir == 0 { idx(1, 0) } else { idx(0, 1) }] = 1.0;
        Jet2 { c }
    }

    /// Taylor coefficient of the multi-index (i, j).
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.c[idx(i, j)]
    }

    /// Partial derivative value d^{i+j}/du^i dv^j (coefficient times i! j!).
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        self.c[idx(i, j)] * (factorial(i) * factorial(j)) as f64
    }

    /// Formal derivative along `dir`. The result is valid one order lower
    /// than the input; the top-degree coefficients of the result are zeroed.
    pub fn d(&self, dir: usize) -> Jet2 {
        let mut out = [0.0; LEN];
        for i in 0..=MAX_ORDER {
            for j in 0..=(MAX_ORDER - i) {
                if i + j == MAX_ORDER {
                    continue;
                }
                out[idx(i, j)] = if dir == 0 {
                    self.c[idx(i + 1, j)] * (i + 1) as f64
                } else {
                    self.c[idx(i, j + 1)] * (j + 1) as f64
                };
            }
        }
        Jet2 { c: out }
    }

    /// Evaluates the analytic continuation `sum_k coeffs[k] * d^k` where `d`
    /// is the nilpotent part of `self`. `coeffs[k]` must be `f^{(k)}(x0)/k!`.
    fn compose(self, coeffs: [f64; MAX_ORDER + 1]) -> Jet2 {
        let mut d = self;
        d.c[0] = 0.0;
        // Horner evaluation in the nilpotent part.
        let mut acc = Jet2::constant(coeffs[MAX_ORDER]);
        for k in (0..MAX_ORDER).rev() {
            acc = acc * d + Jet2::constant(coeffs[k]);
        }
        acc
    }

    pub fn recip(self) -> Jet2 {
        let x0 = self.c[0];
        let mut coeffs = [0.0; MAX_ORDER + 1];
        let mut p = 1.0 / x0;
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c = if k % 2 == 0 { p } else { -p };
            p /= x0;
        }
        self.compose(coeffs)
    }
}

fn factorial(k: usize) -> usize {
    (1..=k).product::<usize>().max(1)
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: Jet2) -> Jet2 {
        for k in 0..LEN {
            self.c[k] += rhs.c[k];
        }
        self
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(mut self, rhs: Jet2) -> Jet2 {
        for k in 0..LEN {
            self.c[k] -= rhs.c[k];
        }
        self
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(mut self) -> Jet2 {
        for k in 0..LEN {
            self.c[k] = -self.c[k];
        }
        self
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let mut out = [0.0; LEN];
        for i1 in 0..=MAX_ORDER {
            for j1 in 0..=(MAX_ORDER - i1) {
                let a = self.c[idx(i1, j1)];
                if a == 0.0 {
                    continue;
                }
                for i2 in 0..=(MAX_ORDER - i1 - j1) {
                    for j2 in 0..=(MAX_ORDER - i1 - j1 - i2) {
                        out[idx(i1 + i2, j1 + j2)] += a * rhs.c[idx(i2, j2)];
                    }
                }
            }
        }
        Jet2 { c: out }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    // Division is multiplication by the series reciprocal.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet2) -> Jet2 {
        self * rhs.recip()
    }
}

impl Real for Jet2 {
    fn from_f64(x: f64) -> Self {
        Jet2::constant(x)
    }
    fn value(self) -> f64 {
        self.c[0]
    }
    fn sqrt(self) -> Self {
        let x0 = self.c[0];
        let v = x0.sqrt();
        self.compose([
            v,
            0.5 / v,
            -1.0 / (8.0 * x0 * v),
            1.0 / (16.0 * x0 * x0 * v),
            -5.0 / (128.0 * x0 * x0 * x0 * v),
        ])
    }
    fn sin(self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        self.compose([s, c, -s / 2.0, -c / 6.0, s / 24.0])
    }
    fn cos(self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        self.compose([c, -s, -c / 2.0, s / 6.0, c / 24.0])
    }
    fn exp(self) -> Self {
        let e = self.c[0].exp();
        self.compose([e, e, e / 2.0, e / 6.0, e / 24.0])
    }
    fn scale(mut self, k: f64) -> Self {
        for c in self.c.iter_mut() {
            *c *= k;
        }
        self
    }
}

/// Table of ambient-vector partial derivatives of a 2-domain map at one point.
#[derive(Debug, Clone)]
pub struct JetTable {
    pub base: (f64, f64),
    pub order: usize,
    /// `partials[idx(i, j)]` is the derivative value d^{i+j} g / du^i dv^j.
    partials: Vec<Vec<f64>>,
}

impl JetTable {
    pub fn partial(&self, i: usize, j: usize) -> &[f64] {
        assert!(i + j <= self.order, "partial ({i},{j}) beyond table order");
        &self.partials[idx(i, j)]
    }

    pub fn ambient_dim(&self) -> usize {
        self.partials[0].len()
    }

    /// Builds a table from jet components, converting Taylor coefficients to
    /// derivative values.
    pub fn from_jets(base: (f64, f64), order: usize, comps: &[Jet2]) -> JetTable {
        let mut partials = vec![Vec::new(); idx(0, order) + 1];
        for i in 0..=order {
            for j in 0..=(order - i) {
                partials[idx(i, j)] = comps.iter().map(|c| c.partial(i, j)).collect();
            }
        }
        JetTable {
            base,
            order,
            partials,
        }
    }
}

/// Central-difference stencil coefficients, O(step^2), for derivative
/// orders 0..=4. Offsets are in units of the step.
fn stencil(order: usize) -> (&'static [isize], &'static [f64]) {
    match order {
        0 => (&[0], &[1.0]),
        1 => (&[-1, 1], &[-0.5, 0.5]),
        2 => (&[-1, 0, 1], &[1.0, -2.0, 1.0]),
        3 => (&[-2, -1, 1, 2], &[-0.5, 1.0, -1.0, 0.5]),
        4 => (&[-2, -1, 0, 1, 2], &[1.0, -4.0, 6.0, -4.0, 1.0]),
        _ => panic!("stencil order > 4"),
    }
}

/// Finite-difference jet of an arbitrary ambient-valued map.
///
/// Error model: each derivative of order k carries an O(step^2) truncation
/// error with a constant growing with k, on top of roundoff amplified by
/// step^-k.
pub fn fd_jet_of<F>(f: F, base: (f64, f64), order: usize, step: f64) -> Result<JetTable>
where
    F: Fn(f64, f64) -> Vec<f64>,
{
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    if !(step > 0.0) {
        return Err(Error::ZeroStep);
    }
    let dim = f(base.0, base.1).len();
    let mut partials = vec![Vec::new(); idx(0, order) + 1];
    for i in 0..=order {
        for j in 0..=(order - i) {
            let (off_u, w_u) = stencil(i);
            let (off_v, w_v) = stencil(j);
            let mut acc = vec![0.0; dim];
            for (ou, wu) in off_u.iter().zip(w_u) {
                for (ov, wv) in off_v.iter().zip(w_v) {
                    let val = f(base.0 + *ou as f64 * step, base.1 + *ov as f64 * step);
                    let w = wu * wv;
                    for (a, v) in acc.iter_mut().zip(&val) {
                        *a += w * v;
                    }
                }
            }
            let scale = step.powi((i + j) as i32);
            for a in acc.iter_mut() {
                *a /= scale;
            }
            partials[idx(i, j)] = acc;
        }
    }
    Ok(JetTable {
        base,
        order,
        partials,
    })
}

/// Removes from `v` its components along the span of `basis`.
/// The basis need not be orthonormal, only linearly independent.
pub fn project_orthogonal(v: &[f64], basis: &[Vec<f64>], tol: f64) -> Result<Vec<f64>> {
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(basis.len());
    for b in basis {
        let mut w = b.clone();
        for o in &ortho {
            let d = dot(&w, o);
            for (wk, ok) in w.iter_mut().zip(o) {
                *wk -= d * ok;
            }
        }
        let n = norm(&w);
        if n <= tol * (1.0 + norm(b)) {
            return Err(Error::DegenerateBasis);
        }
        for wk in w.iter_mut() {
            *wk /= n;
        }
        ortho.push(w);
    }
    let mut out = v.to_vec();
    for o in &ortho {
        let d = dot(&out, o);
        for (vk, ok) in out.iter_mut().zip(o) {
            *vk -= d * ok;
        }
    }
    Ok(out)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn jet_product_rule() {
        let u = Jet2::variable(0.3, 0);
        let v = Jet2::variable(-0.7, 1);
        let f = u.sin() * v.exp() + u * u * v;
        // d^2 f / du dv = cos(u) e^v + 2u
        let expect = 0.3f64.cos() * (-0.7f64).exp() + 0.6;
        assert!(close(f.partial(1, 1), expect, 1e-13));
        // d^3 f / du^2 dv = -sin(u) e^v + 2
        let expect3 = -(0.3f64.sin()) * (-0.7f64).exp() + 2.0;
        assert!(close(f.partial(2, 1), expect3, 1e-13));
    }

    #[test]
    fn jet_division_and_sqrt() {
        let u = Jet2::variable(1.2, 0);
        let f = (u * u + Jet2::constant(1.0)).sqrt() / u;
        let g = |x: f64| (x * x + 1.0).sqrt() / x;
        let h = 1e-5;
        let fd = (g(1.2 + h) - g(1.2 - h)) / (2.0 * h);
        assert!(close(f.partial(1, 0), fd, 1e-9));
        let fd2 = (g(1.2 + h) - 2.0 * g(1.2) + g(1.2 - h)) / (h * h);
        assert!(close(f.partial(2, 0), fd2, 1e-5));
    }

    #[test]
    fn jet_derivative_operator_matches_shifted_coeffs() {
        let u = Jet2::variable(0.4, 0);
        let v = Jet2::variable(0.9, 1);
        let f = (u * v).sin();
        let fu = f.d(0);
        assert!(close(fu.value(), f.partial(1, 0), 1e-14));
        assert!(close(fu.partial(0, 1), f.partial(1, 1), 1e-14));
        assert!(close(fu.partial(2, 1), f.partial(3, 1), 1e-13));
    }

    #[test]
    fn top_order_coefficients_of_elementary_functions() {
        let x = 0.7;
        let u = Jet2::variable(x, 0);
        assert!(close(u.cos().partial(4, 0), x.cos(), 1e-13));
        assert!(close(u.sin().partial(4, 0), x.sin(), 1e-13));
        assert!(close(u.exp().partial(4, 0), x.exp(), 1e-13));
        // (x^{1/2})'''' = -15/16 x^{-7/2}
        assert!(close(
            u.sqrt().partial(4, 0),
            -15.0 / 16.0 * x.powf(-3.5),
            1e-12
        ));
        assert!(close(u.recip().partial(4, 0), 24.0 / x.powi(5), 1e-11));
    }

    #[test]
    fn fd_jet_constant_map_higher_partials_vanish() {
        let t = fd_jet_of(|_, _| vec![2.0, -1.0], (0.0, 0.0), 3, 1e-3).unwrap();
        for i in 0..=3usize {
            for j in 0..=(3 - i) {
                if i + j == 0 {
                    continue;
                }
                assert!(norm(t.partial(i, j)) < 1e-9);
            }
        }
    }

    #[test]
    fn fd_jet_rejects_zero_step() {
        assert!(matches!(
            fd_jet_of(|u, v| vec![u * v], (0.0, 0.0), 1, 0.0),
            Err(Error::ZeroStep)
        ));
    }

    #[test]
    fn project_orthogonal_hand_cases() {
        let tol = 1e-8;
        // v in span(basis) -> zero
        let r = project_orthogonal(&[2.0, 0.0, 0.0], &[vec![1.0, 0.0, 0.0]], tol).unwrap();
        assert!(norm(&r) < 1e-14);
        // v orthogonal to basis -> unchanged
        let r = project_orthogonal(&[0.0, 3.0, 0.0], &[vec![1.0, 0.0, 0.0]], tol).unwrap();
        assert!(close(r[1], 3.0, 1e-14));
        // mixed
        let r = project_orthogonal(&[1.0, 1.0, 0.0], &[vec![1.0, 0.0, 0.0]], tol).unwrap();
        assert_eq!(r, vec![0.0, 1.0, 0.0]);
        // rank-deficient basis
        assert!(matches!(
            project_orthogonal(
                &[1.0, 0.0, 0.0],
                &[vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]],
                tol
            ),
            Err(Error::DegenerateBasis)
        ));
    }
}
