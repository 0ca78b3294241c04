//! Forward-mode hyper-dual numbers.
//!
//! A [`HyperDual`] of depth `k` is an element of the truncated algebra
//! `R[e_1, ..., e_k] / (e_i^2)`: every infinitesimal squares to zero but
//! products of distinct infinitesimals survive. This is the flattened form of
//! `k` nested dual numbers; coefficients are stored by subset bitmask, so the
//! coefficient of `e_1 e_3` lives at index `0b101`.
//!
//! Each differentiation pass appends one new infinitesimal. Seeding the pass
//! `l` with a coordinate direction and reading back the `e_l` coefficient is
//! exactly one partial derivative, so three nested passes give third
//! derivatives without any symbolic work.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Number of infinitesimals that fit in a [`HyperDual`].
pub const MAX_DEPTH: usize = 4;
const CAP: usize = 1 << MAX_DEPTH;

#[derive(Clone, Copy, PartialEq)]
pub struct HyperDual {
    depth: u8,
    parts: [f64; CAP],
}

impl fmt::Debug for HyperDual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HyperDual")
            .field("depth", &self.depth)
            .field("parts", &&self.parts[..self.len()])
            .finish()
    }
}

impl Default for HyperDual {
    fn default() -> Self {
        Self::constant(0.0)
    }
}

impl From<f64> for HyperDual {
    fn from(v: f64) -> Self {
        Self::constant(v)
    }
}

impl HyperDual {
    pub const ZERO: HyperDual = HyperDual {
        depth: 0,
        parts: [0.0; CAP],
    };

    pub const fn constant(v: f64) -> Self {
        let mut parts = [0.0; CAP];
        parts[0] = v;
        HyperDual { depth: 0, parts }
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.depth as usize
    }

    #[inline]
    fn len(&self) -> usize {
        1 << self.depth
    }

    /// The real (infinitesimal-free) part.
    #[inline]
    pub fn value(&self) -> f64 {
        self.parts[0]
    }

    /// Coefficient of the monomial whose infinitesimals are the set bits of `mask`.
    pub fn coefficient(&self, mask: usize) -> f64 {
        if mask < self.len() {
            self.parts[mask]
        } else {
            0.0
        }
    }

    pub fn is_zero(&self) -> bool {
        self.parts[..self.len()].iter().all(|&p| p == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.parts[..self.len()].iter().all(|p| p.is_finite())
    }

    /// Embed into a larger depth (new coefficients are zero).
    fn lifted(mut self, depth: usize) -> Self {
        if depth > self.depth() {
            assert!(depth <= MAX_DEPTH, "hyper-dual depth {depth} exceeds {MAX_DEPTH}");
            self.depth = depth as u8;
        }
        self
    }

    /// `self + seed * e_new`, where `e_new` is a fresh infinitesimal placed
    /// after the first `base` ones. The result has depth `base + 1`.
    pub fn perturbed(self, base: usize, seed: f64) -> Self {
        assert!(
            base < MAX_DEPTH,
            "differentiation nesting exceeds the supported depth {MAX_DEPTH}"
        );
        debug_assert!(self.depth() <= base);
        let mut out = self.lifted(base + 1);
        out.parts[1 << base] += seed;
        out
    }

    /// Coefficient of the infinitesimal introduced at position `base`, as a
    /// hyper-dual of depth `base`.
    pub fn derivative_part(&self, base: usize) -> Self {
        let mut out = HyperDual {
            depth: base as u8,
            parts: [0.0; CAP],
        };
        if self.depth() > base {
            let bit = 1 << base;
            for mask in 0..bit {
                out.parts[mask] = self.parts[mask | bit];
            }
        }
        out
    }

    /// Drop every infinitesimal at position `base` or later.
    pub fn truncated(&self, base: usize) -> Self {
        let mut out = *self;
        if out.depth() > base {
            let len = out.len();
            for p in out.parts[(1 << base)..len].iter_mut() {
                *p = 0.0;
            }
            out.depth = base as u8;
        }
        out
    }

    /// Apply a smooth scalar function given its derivatives at the real part:
    /// `derivs[k] = f^(k)(self.value())` for `k = 0..=depth`.
    pub fn apply(&self, derivs: &[f64]) -> Self {
        let d = self.depth();
        debug_assert!(derivs.len() > d || d == 0);
        let mut nil = *self;
        nil.parts[0] = 0.0;
        let mut out = HyperDual::constant(derivs[0]).lifted(d);
        let mut power = HyperDual::constant(1.0).lifted(d);
        let mut factorial = 1.0;
        for (k, dk) in derivs.iter().enumerate().take(d + 1).skip(1) {
            power = power * nil;
            factorial *= k as f64;
            if power.is_zero() {
                break;
            }
            out += power * (dk / factorial);
        }
        out
    }

    fn order(&self) -> usize {
        self.depth()
    }

    pub fn recip(self) -> Self {
        let a = self.value();
        let mut derivs = [0.0; MAX_DEPTH + 1];
        let mut term = 1.0 / a;
        for (k, slot) in derivs.iter_mut().enumerate().take(self.order() + 1) {
            *slot = term;
            term *= -((k + 1) as f64) / a;
        }
        self.apply(&derivs)
    }

    pub fn exp(self) -> Self {
        let e = self.value().exp();
        self.apply(&[e; MAX_DEPTH + 1])
    }

    pub fn ln(self) -> Self {
        let a = self.value();
        let mut derivs = [0.0; MAX_DEPTH + 1];
        derivs[0] = a.ln();
        let mut term = 1.0 / a;
        for (k, slot) in derivs.iter_mut().enumerate().take(self.order() + 1).skip(1) {
            *slot = term;
            term *= -(k as f64) / a;
        }
        self.apply(&derivs)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.apply(&[s, c, -s, -c, s])
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.apply(&[c, -s, -c, s, c])
    }

    pub fn powf(self, p: f64) -> Self {
        let a = self.value();
        let mut derivs = [0.0; MAX_DEPTH + 1];
        let mut coeff = 1.0;
        for (k, slot) in derivs.iter_mut().enumerate().take(self.order() + 1) {
            *slot = coeff * a.powf(p - k as f64);
            coeff *= p - k as f64;
        }
        self.apply(&derivs)
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return HyperDual::constant(1.0);
        }
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut out = self;
        for _ in 1..n {
            out = out * self;
        }
        out
    }

    pub fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    pub fn sqr(self) -> Self {
        self * self
    }
}

impl Add for HyperDual {
    type Output = HyperDual;
    #[inline]
    fn add(self, rhs: HyperDual) -> HyperDual {
        let d = self.depth.max(rhs.depth);
        let mut out = HyperDual {
            depth: d,
            parts: self.parts,
        };
        for i in 0..(1usize << d) {
            out.parts[i] += rhs.parts[i];
        }
        out
    }
}

impl Sub for HyperDual {
    type Output = HyperDual;
    #[inline]
    fn sub(self, rhs: HyperDual) -> HyperDual {
        let d = self.depth.max(rhs.depth);
        let mut out = HyperDual {
            depth: d,
            parts: self.parts,
        };
        for i in 0..(1usize << d) {
            out.parts[i] -= rhs.parts[i];
        }
        out
    }
}

impl Mul for HyperDual {
    type Output = HyperDual;
    #[inline]
    fn mul(self, rhs: HyperDual) -> HyperDual {
        if self.depth == 0 {
            return rhs * self.parts[0];
        }
        if rhs.depth == 0 {
            return self * rhs.parts[0];
        }
        let d = self.depth.max(rhs.depth);
        let mut out = HyperDual {
            depth: d,
            parts: [0.0; CAP],
        };
        for mask in 0..(1usize << d) {
            let mut acc = 0.0;
            let mut sub = mask;
            loop {
                acc += self.parts[sub] * rhs.parts[mask ^ sub];
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
            out.parts[mask] = acc;
        }
        out
    }
}

impl Div for HyperDual {
    type Output = HyperDual;
    fn div(self, rhs: HyperDual) -> HyperDual {
        if rhs.depth == 0 {
            return self * (1.0 / rhs.parts[0]);
        }
        self * rhs.recip()
    }
}

impl Neg for HyperDual {
    type Output = HyperDual;
    fn neg(mut self) -> HyperDual {
        let len = self.len();
        for p in self.parts[..len].iter_mut() {
            *p = -*p;
        }
        self
    }
}

impl Add<f64> for HyperDual {
    type Output = HyperDual;
    fn add(mut self, rhs: f64) -> HyperDual {
        self.parts[0] += rhs;
        self
    }
}

impl Sub<f64> for HyperDual {
    type Output = HyperDual;
    fn sub(mut self, rhs: f64) -> HyperDual {
        self.parts[0] -= rhs;
        self
    }
}

impl Mul<f64> for HyperDual {
    type Output = HyperDual;
    #[inline]
    fn mul(mut self, rhs: f64) -> HyperDual {
        let len = self.len();
        for p in self.parts[..len].iter_mut() {
            *p *= rhs;
        }
        self
    }
}

impl Div<f64> for HyperDual {
    type Output = HyperDual;
    fn div(self, rhs: f64) -> HyperDual {
        self * (1.0 / rhs)
    }
}

impl Add<HyperDual> for f64 {
    type Output = HyperDual;
    fn add(self, rhs: HyperDual) -> HyperDual {
        rhs + self
    }
}

impl Sub<HyperDual> for f64 {
    type Output = HyperDual;
    fn sub(self, rhs: HyperDual) -> HyperDual {
        -rhs + self
    }
}

impl Mul<HyperDual> for f64 {
    type Output = HyperDual;
    fn mul(self, rhs: HyperDual) -> HyperDual {
        rhs * self
    }
}

impl Div<HyperDual> for f64 {
    type Output = HyperDual;
    fn div(self, rhs: HyperDual) -> HyperDual {
        rhs.recip() * self
    }
}

impl AddAssign for HyperDual {
    fn add_assign(&mut self, rhs: HyperDual) {
        *self = *self + rhs;
    }
}

impl SubAssign for HyperDual {
    fn sub_assign(&mut self, rhs: HyperDual) {
        *self = *self - rhs;
    }
}

impl MulAssign for HyperDual {
    fn mul_assign(&mut self, rhs: HyperDual) {
        *self = *self * rhs;
    }
}

impl MulAssign<f64> for HyperDual {
    fn mul_assign(&mut self, rhs: f64) {
        *self = *self * rhs;
    }
}

impl Sum for HyperDual {
    fn sum<I: Iterator<Item = HyperDual>>(iter: I) -> HyperDual {
        iter.fold(HyperDual::ZERO, |a, b| a + b)
    }
}

/// Promote a real point to depth-0 hyper-duals.
pub fn lift_point(point: &[f64]) -> Vec<HyperDual> {
    point.iter().map(|&x| HyperDual::constant(x)).collect()
}

/// Largest depth among the coordinates of a point.
pub fn point_depth(point: &[HyperDual]) -> usize {
    point.iter().map(|x| x.depth()).max().unwrap_or(0)
}

/// First partial derivatives of `f` at `point`, each at the point's own depth.
pub fn gradient<F>(f: F, point: &[HyperDual]) -> Vec<HyperDual>
where
    F: Fn(&[HyperDual]) -> HyperDual,
{
    let base = point_depth(point);
    (0..point.len())
        .map(|i| {
            let shifted = shifted_point(point, base, i);
            f(&shifted).derivative_part(base)
        })
        .collect()
}

/// The point with coordinate `i` perturbed along a fresh infinitesimal at position `base`.
pub fn shifted_point(point: &[HyperDual], base: usize, i: usize) -> Vec<HyperDual> {
    point
        .iter()
        .enumerate()
        .map(|(k, &x)| if k == i { x.perturbed(base, 1.0) } else { x })
        .collect()
}
