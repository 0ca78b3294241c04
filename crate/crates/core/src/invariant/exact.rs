//! Exact numbers `a + b√d` with rational `a`, `b` and a square-free radicand.
//!
//! Values with `b = 0` are plain rationals and combine with any radicand.
//! Mixing two different nonzero radicands is a logic error and panics.

use num::bigint::BigInt;
use num::integer::Roots;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Exact {
    a: BigRational,
    b: BigRational,
    d: i64,
}

impl Exact {
    pub fn zero() -> Self {
        Self::from_rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn from_rational(a: BigRational) -> Self {
        Exact {
            a,
            b: BigRational::zero(),
            d: 1,
        }
    }

    /// `a + b√d`; `d` must be a square-free integer greater than one.
    pub fn quadratic(a: BigRational, b: BigRational, d: i64) -> Self {
        assert!(
            d > 1 && square_free_part(d as u64).1 == d as u64,
            "radicand {d} is not square-free"
        );
        Exact { a, b, d }.normalized()
    }

    fn normalized(mut self) -> Self {
        if self.b.is_zero() {
            self.d = 1;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn radical_part(&self) -> &BigRational {
        &self.b
    }

    /// Radicand, or 1 for rationals.
    pub fn radicand(&self) -> i64 {
        self.d
    }

    fn join(&self, other: &Exact) -> i64 {
        match (self.d, other.d) {
            (1, d) | (d, 1) => d,
            (d, e) if d == e => d,
            (d, e) => panic!("mixed radicands √{d} and √{e}"),
        }
    }

    pub fn conjugate(&self) -> Self {
        Exact {
            a: self.a.clone(),
            b: -self.b.clone(),
            d: self.d,
        }
    }

    /// `a^2 - d b^2`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d))
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(Exact {
            a: &self.a / &n,
            b: -&self.b / &n,
            d: self.d,
        })
    }

    pub fn signum(&self) -> i32 {
        let sa = sign(&self.a);
        let sb = sign(&self.b);
        if sb == 0 || sa == sb {
            return if sa != 0 { sa } else { sb };
        }
        if sa == 0 {
            return sb;
        }
        // opposite signs: compare a^2 with d b^2
        let d = BigRational::from_integer(BigInt::from(self.d));
        match (&self.a * &self.a).cmp(&(&self.b * &self.b * d)) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    /// Exact square root of a nonnegative rational, when it lies in some
    /// `Q(√d)`.
    pub fn sqrt(&self) -> Option<Self> {
        if !self.is_rational() || self.a.is_negative() {
            return None;
        }
        if self.a.is_zero() {
            return Some(Exact::zero());
        }
        // √(p/q) = √(p q) / q
        let q = self.a.denom().clone();
        let pq = self.a.numer() * &q;
        let pq = pq.to_u64()?;
        let (s, d) = square_free_part(pq);
        let coeff = BigRational::new(BigInt::from(s), q);
        Some(if d == 1 {
            Exact::from_rational(coeff)
        } else {
            Exact::quadratic(BigRational::zero(), coeff, d as i64)
        })
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * (self.d as f64).sqrt()
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

fn sign(x: &BigRational) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// `n = s^2 d` with `d` square-free.
fn square_free_part(n: u64) -> (u64, u64) {
    let mut s = 1;
    let mut d = n;
    let mut p = 2;
    while p * p <= d {
        while d % (p * p) == 0 {
            d /= p * p;
            s *= p;
        }
        p += 1;
    }
    let r = d.sqrt();
    if r * r == d {
        (s * r, 1)
    } else {
        (s, d)
    }
}

impl Default for Exact {
    fn default() -> Self {
        Exact::zero()
    }
}

impl From<i64> for Exact {
    fn from(n: i64) -> Self {
        Exact::int(n)
    }
}

impl PartialOrd for Exact {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(match (self - other).signum() {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        })
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            write!(f, "{}√{}", self.b, self.d)
        } else if self.b.is_negative() {
            write!(f, "{}-{}√{}", self.a, -self.b.clone(), self.d)
        } else {
            write!(f, "{}+{}√{}", self.a, self.b, self.d)
        }
    }
}

impl fmt::Debug for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Exact {
    type Err = String;

    /// Integers, decimals-free fractions `p/q`.
    fn from_str(s: &str) -> Result<Self, String> {
        BigRational::from_str(s.trim())
            .map(Exact::from_rational)
            .map_err(|e| format!("bad rational {s:?}: {e}"))
    }
}

impl Add<&Exact> for &Exact {
    type Output = Exact;
    fn add(self, o: &Exact) -> Exact {
        let d = self.join(o);
        Exact {
            a: &self.a + &o.a,
            b: &self.b + &o.b,
            d,
        }
        .normalized()
    }
}

impl Sub<&Exact> for &Exact {
    type Output = Exact;
    fn sub(self, o: &Exact) -> Exact {
        let d = self.join(o);
        Exact {
            a: &self.a - &o.a,
            b: &self.b - &o.b,
            d,
        }
        .normalized()
    }
}

impl Mul<&Exact> for &Exact {
    type Output = Exact;
    fn mul(self, o: &Exact) -> Exact {
        let d = self.join(o);
        let dd = BigRational::from_integer(BigInt::from(d));
        Exact {
            a: &self.a * &o.a + &self.b * &o.b * dd,
            b: &self.a * &o.b + &self.b * &o.a,
            d,
        }
        .normalized()
    }
}

impl Div<&Exact> for &Exact {
    type Output = Exact;
    fn div(self, o: &Exact) -> Exact {
        self * &o.recip().expect("division by exact zero")
    }
}

impl Neg for &Exact {
    type Output = Exact;
    fn neg(self) -> Exact {
        Exact {
            a: -self.a.clone(),
            b: -self.b.clone(),
            d: self.d,
        }
    }
}

impl Neg for Exact {
    type Output = Exact;
    fn neg(self) -> Exact {
        -&self
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr<Exact> for Exact {
            type Output = Exact;
            fn $f(self, o: Exact) -> Exact {
                (&self).$f(&o)
            }
        }
        impl $tr<&Exact> for Exact {
            type Output = Exact;
            fn $f(self, o: &Exact) -> Exact {
                (&self).$f(o)
            }
        }
        impl $tr<Exact> for &Exact {
            type Output = Exact;
            fn $f(self, o: Exact) -> Exact {
                self.$f(&o)
            }
        }
    )*};
}

owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl AddAssign<&Exact> for Exact {
    fn add_assign(&mut self, o: &Exact) {
        *self = &*self + o;
    }
}

impl AddAssign for Exact {
    fn add_assign(&mut self, o: Exact) {
        *self = &*self + &o;
    }
}

impl SubAssign<&Exact> for Exact {
    fn sub_assign(&mut self, o: &Exact) {
        *self = &*self - o;
    }
}

impl MulAssign<&Exact> for Exact {
    fn mul_assign(&mut self, o: &Exact) {
        *self = &*self * o;
    }
}

impl Sum for Exact {
    fn sum<I: Iterator<Item = Exact>>(iter: I) -> Exact {
        iter.fold(Exact::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Exact> for Exact {
    fn sum<I: Iterator<Item = &'a Exact>>(iter: I) -> Exact {
        iter.fold(Exact::zero(), |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, r: i64) -> Exact {
        Exact::ratio(p, r)
    }

    #[test]
    fn rational_field() {
        assert_eq!(q(1, 2) + q(1, 3), q(5, 6));
        assert_eq!(q(2, 3) * q(3, 4), q(1, 2));
        assert_eq!(q(1, 2) / q(1, 4), Exact::int(2));
        assert_eq!("-6/4".parse::<Exact>().unwrap(), q(-3, 2));
        assert!("x".parse::<Exact>().is_err());
    }

    #[test]
    fn square_roots() {
        let r = q(1, 3).sqrt().unwrap();
        assert_eq!(&r * &r, q(1, 3));
        assert_eq!(r.radicand(), 3);
        assert_eq!(q(9, 4).sqrt().unwrap(), q(3, 2));
        assert_eq!(Exact::int(12).sqrt().unwrap().to_string(), "2√3");
        assert!(Exact::int(-1).sqrt().is_none());
    }

    #[test]
    fn quadratic_inverse_and_sign() {
        let s3 = Exact::int(3).sqrt().unwrap();
        let x = Exact::int(2) - &s3;
        assert_eq!(&x * x.recip().unwrap(), Exact::one());
        assert_eq!(x.signum(), 1);
        assert_eq!((Exact::int(1) - &s3).signum(), -1);
        assert_eq!((&s3 - &s3).signum(), 0);
        assert!((x.to_f64() - (2.0 - 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    #[should_panic(expected = "mixed radicands")]
    fn mixed_radicands_panic() {
        let _ = Exact::int(2).sqrt().unwrap() + Exact::int(3).sqrt().unwrap();
    }
}
