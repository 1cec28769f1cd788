//! Exact coefficient fields: rationals and Gaussian rationals.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Reduced fraction with positive denominator.
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Generalized binomial coefficient `C(a, n)` for rational `a`.
pub fn binomial_rat(a: &Rat, n: u32) -> Rat {
    let mut acc = Rat::one();
    for i in 0..n {
        acc = acc * (a - rat_int(i as i64)) / rat_int(i as i64 + 1);
    }
    acc
}

pub fn rat_pow(r: &Rat, e: i64) -> Rat {
    if e >= 0 {
        num_traits::pow(r.clone(), e as usize)
    } else {
        num_traits::pow(r.recip(), (-e) as usize)
    }
}

/// Exact integer n-th root of a nonnegative integer, if it exists.
pub fn exact_int_root(x: &BigInt, n: u32) -> Option<BigInt> {
    if x.is_negative() {
        return None;
    }
    let r = x.nth_root(n);
    if num_traits::pow(r.clone(), n as usize) == *x {
        Some(r)
    } else {
        None
    }
}

/// Exact n-th root of a positive rational, if it exists.
pub fn exact_rat_root(x: &Rat, n: u32) -> Option<Rat> {
    let num = exact_int_root(x.numer(), n)?;
    let den = exact_int_root(x.denom(), n)?;
    Some(Rat::new(num, den))
}

/// Coefficient ring interface shared by the sparse series types.
pub trait Coeff: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero_elem() -> Self;
    fn one_elem() -> Self;
    fn is_zero_elem(&self) -> bool;
    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn add_assign_ref(&mut self, other: &Self);
    fn from_rat(r: &Rat) -> Self;
}

impl Coeff for Rat {
    fn zero_elem() -> Self {
        Zero::zero()
    }
    fn one_elem() -> Self {
        One::one()
    }
    fn is_zero_elem(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
}

/// Gaussian rational `re + i·im`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussRat {
    pub re: Rat,
    pub im: Rat,
}

impl GaussRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat::default()
    }

    pub fn one() -> Self {
        GaussRat::real(Rat::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn real(re: Rat) -> Self {
        GaussRat { re, im: Rat::zero() }
    }

    pub fn i() -> Self {
        GaussRat { re: Rat::zero(), im: Rat::one() }
    }

    /// `i^n` for any integer `n`.
    pub fn i_pow(n: i64) -> Self {
        match n.rem_euclid(4) {
            0 => GaussRat::real(Rat::one()),
            1 => GaussRat::i(),
            2 => GaussRat::real(-Rat::one()),
            _ => GaussRat::new(Rat::zero(), -Rat::one()),
        }
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -&self.im }
    }

    pub fn norm_sqr(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return None;
        }
        Some(GaussRat { re: &self.re / &n, im: -&self.im / &n })
    }

    pub fn scale(&self, r: &Rat) -> Self {
        GaussRat { re: &self.re * r, im: &self.im * r }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = GaussRat::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            base = base.mul_ref(&base);
            e >>= 1;
        }
        acc
    }

    pub fn div_ref(&self, other: &Self) -> Option<Self> {
        Some(self.mul_ref(&other.inv()?))
    }
}

impl Coeff for GaussRat {
    fn zero_elem() -> Self {
        GaussRat::zero()
    }
    fn one_elem() -> Self {
        GaussRat::one()
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn add_ref(&self, other: &Self) -> Self {
        GaussRat { re: &self.re + &other.re, im: &self.im + &other.im }
    }
    fn sub_ref(&self, other: &Self) -> Self {
        GaussRat { re: &self.re - &other.re, im: &self.im - &other.im }
    }
    fn mul_ref(&self, other: &Self) -> Self {
        if self.im.is_zero() && other.im.is_zero() {
            return GaussRat::real(&self.re * &other.re);
        }
        GaussRat {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }
    fn neg_ref(&self) -> Self {
        GaussRat { re: -&self.re, im: -&self.im }
    }
    fn add_assign_ref(&mut self, other: &Self) {
        self.re += &other.re;
        self.im += &other.im;
    }
    fn from_rat(r: &Rat) -> Self {
        GaussRat::real(r.clone())
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: GaussRat) -> GaussRat {
        self.add_ref(&rhs)
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: GaussRat) -> GaussRat {
        self.sub_ref(&rhs)
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: GaussRat) -> GaussRat {
        self.mul_ref(&rhs)
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        self.neg_ref()
    }
}

impl AddAssign<&GaussRat> for GaussRat {
    fn add_assign(&mut self, rhs: &GaussRat) {
        self.add_assign_ref(rhs);
    }
}

impl SubAssign<&GaussRat> for GaussRat {
    fn sub_assign(&mut self, rhs: &GaussRat) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl From<Rat> for GaussRat {
    fn from(r: Rat) -> Self {
        GaussRat::real(r)
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re, self.im)
    }
}

/// Rotation `z -> i^index · z` by a multiple of a quarter turn.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct QuarterTurn(u8);

impl QuarterTurn {
    pub const IDENTITY: QuarterTurn = QuarterTurn(0);

    pub fn new(index: u8) -> Self {
        QuarterTurn(index % 4)
    }

    pub fn index(&self) -> u8 {
        self.0
    }

    pub fn unit(&self) -> GaussRat {
        GaussRat::i_pow(self.0 as i64)
    }

    pub fn compose(&self, other: QuarterTurn) -> QuarterTurn {
        QuarterTurn::new(self.0 + other.0)
    }

    pub fn inverse(&self) -> QuarterTurn {
        QuarterTurn::new(4 - self.0)
    }

    /// Recognizes `1, i, -1, -i`.
    pub fn from_unit(u: &GaussRat) -> Option<QuarterTurn> {
        (0..4).map(QuarterTurn).find(|q| q.unit() == *u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(3, 5), BigInt::zero());
        assert_eq!(binomial_rat(&rat(-1, 2), 1), rat(-1, 2));
        assert_eq!(binomial_rat(&rat(-1, 2), 2), rat(3, 8));
        assert_eq!(binomial_rat(&rat_int(-1), 3), rat_int(-1));
    }

    #[test]
    fn gauss_arithmetic() {
        let a = GaussRat::new(rat(1, 2), rat(3, 1));
        let inv = a.inv().unwrap();
        assert_eq!(a.mul_ref(&inv), GaussRat::one());
        assert_eq!(GaussRat::i().pow(2), GaussRat::real(rat_int(-1)));
        assert_eq!(GaussRat::i_pow(-1), GaussRat::new(rat_int(0), rat_int(-1)));
        assert_eq!(a.conj().conj(), a);
    }

    #[test]
    fn roots() {
        assert_eq!(exact_rat_root(&rat(16, 81), 4), Some(rat(2, 3)));
        assert_eq!(exact_rat_root(&rat(2, 1), 2), None);
        assert_eq!(rat_pow(&rat(2, 3), -2), rat(9, 4));
    }
}
