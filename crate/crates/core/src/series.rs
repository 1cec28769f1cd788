//! Sparse truncated power series graded by weight.
//!
//! `x`, `y`, `z` carry weight one and `u`, `w` carry weight `k`. Every series
//! is truncated by weight, never by total degree: a monomial `x^j y^l u^m`
//! has weight `j + l + k·m` and is dropped as soon as that exceeds the
//! truncation weight `N`. Coefficients are exact and no zero coefficient is
//! ever stored, so structural equality is mathematical equality.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::number::{binomial, Coeff, GaussRat, Rat};

/// Exponent triple. In the real basis this is `x^j y^l u^m`, in the complex
/// basis `z^j z̄^l u^m`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Monomial {
    pub j: u32,
    pub l: u32,
    pub m: u32,
}

impl Monomial {
    pub const fn new(j: u32, l: u32, m: u32) -> Self {
        Monomial { j, l, m }
    }

    pub fn weight(&self, k: u32) -> u32 {
        self.j + self.l + k * self.m
    }
}

/// Marker for the `(x, y, u)` basis.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Xyu;

/// Marker for the `(z, z̄, u)` basis.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Zzu;

pub trait Basis: Clone + Copy + PartialEq + fmt::Debug + Send + Sync {
    const VARS: [&'static str; 3];
}

impl Basis for Xyu {
    const VARS: [&'static str; 3] = ["x", "y", "u"];
}

impl Basis for Zzu {
    const VARS: [&'static str; 3] = ["z", "zb", "u"];
}

/// Sparse series in three variables truncated at weight `n`.
#[derive(Clone, PartialEq)]
pub struct Series<C, B = Xyu> {
    k: u32,
    n: u32,
    terms: BTreeMap<Monomial, C>,
    basis: PhantomData<B>,
}

/// Real defining functions `F(x, y, u)`.
pub type RealSeries = Series<Rat, Xyu>;
/// Complex-valued series in `(x, y, u)`; produced by restricting holomorphic
/// series to a hypersurface.
pub type XyuComplex = Series<GaussRat, Xyu>;
/// Series in `(z, z̄, u)` with Gaussian rational coefficients.
pub type ComplexSeries = Series<GaussRat, Zzu>;

pub(crate) fn check_type(k: u32, n: u32) -> Result<()> {
    if k < 3 {
        return Err(Error::UnsupportedType(k));
    }
    if n < 2 * k {
        return Err(Error::TruncationTooLow { n, min: 2 * k });
    }
    Ok(())
}

impl<C: Coeff, B: Basis> Series<C, B> {
    /// Empty series. Rejects `k < 3` and `n < 2k`.
    pub fn new(k: u32, n: u32) -> Result<Self> {
        check_type(k, n)?;
        Ok(Self::zero_with(k, n))
    }

    /// Empty series without the minimum-truncation check; used for
    /// intermediate truncations inside weight recursions.
    pub fn zero_with(k: u32, n: u32) -> Self {
        Series { k, n, terms: BTreeMap::new(), basis: PhantomData }
    }

    pub fn from_terms<I>(k: u32, n: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, C)>,
    {
        let mut s = Self::new(k, n)?;
        for (mono, c) in terms {
            s.add_term(mono, &c)?;
        }
        Ok(s)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn get(&self, mono: &Monomial) -> Option<&C> {
        self.terms.get(mono)
    }

    pub fn coeff(&self, j: u32, l: u32, m: u32) -> C {
        self.terms.get(&Monomial::new(j, l, m)).cloned().unwrap_or_else(C::zero_elem)
    }

    pub fn weight_of(&self, mono: &Monomial) -> u32 {
        mono.weight(self.k)
    }

    /// Sets a coefficient (removing it when zero).
    pub fn set(&mut self, mono: Monomial, c: C) -> Result<()> {
        let weight = mono.weight(self.k);
        if weight > self.n {
            return Err(Error::WeightExceeded { weight, n: self.n });
        }
        if c.is_zero_elem() {
            self.terms.remove(&mono);
        } else {
            self.terms.insert(mono, c);
        }
        Ok(())
    }

    /// Adds `c` to the coefficient of `mono`.
    pub fn add_term(&mut self, mono: Monomial, c: &C) -> Result<()> {
        let weight = mono.weight(self.k);
        if weight > self.n {
            return Err(Error::WeightExceeded { weight, n: self.n });
        }
        self.accumulate(mono, c);
        Ok(())
    }

    /// Adds `c` to `mono`, silently dropping it above the truncation weight.
    pub(crate) fn accumulate(&mut self, mono: Monomial, c: &C) {
        if mono.weight(self.k) > self.n || c.is_zero_elem() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(existing) => {
                existing.add_assign_ref(c);
                if existing.is_zero_elem() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, c.clone());
            }
        }
    }

    pub fn truncate(&self, n: u32) -> Self {
        let n = n.min(self.n);
        let k = self.k;
        Series {
            k,
            n,
            terms: self
                .terms
                .iter()
                .filter(|(mono, _)| mono.weight(k) <= n)
                .map(|(mono, c)| (*mono, c.clone()))
                .collect(),
            basis: PhantomData,
        }
    }

    /// Same terms, larger truncation weight. Only meaningful when the caller
    /// knows the series is exact (e.g. a polynomial).
    pub fn with_truncation(&self, n: u32) -> Self {
        let mut out = self.truncate(n);
        out.n = n;
        out
    }

    /// Weighted-homogeneous component of weight `w`.
    pub fn homogeneous(&self, w: u32) -> Self {
        let k = self.k;
        Series {
            k,
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(mono, _)| mono.weight(k) == w)
                .map(|(mono, c)| (*mono, c.clone()))
                .collect(),
            basis: PhantomData,
        }
    }

    pub fn filter<P: Fn(&Monomial) -> bool>(&self, keep: P) -> Self {
        Series {
            k: self.k,
            n: self.n,
            terms: self.terms.iter().filter(|(mono, _)| keep(mono)).map(|(mono, c)| (*mono, c.clone())).collect(),
            basis: PhantomData,
        }
    }

    pub fn min_weight(&self) -> Option<u32> {
        self.terms.keys().map(|mono| mono.weight(self.k)).min()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.k != other.k || self.n != other.n {
            return Err(Error::Mismatch(format!(
                "(k, N) = ({}, {}) vs ({}, {})",
                self.k, self.n, other.k, other.n
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.add_unchecked(&other.neg_series()))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn add_unchecked(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (mono, c) in &other.terms {
            out.accumulate(*mono, c);
        }
        out
    }

    /// Product truncated at `min(self.n, other.n)`.
    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let k = self.k;
        let n = self.n.min(other.n);
        let mut out = Self::zero_with(k, n);
        if self.is_zero() || other.is_zero() {
            return out;
        }
        let mut rhs: Vec<(u32, &Monomial, &C)> =
            other.terms.iter().map(|(mono, c)| (mono.weight(k), mono, c)).collect();
        rhs.sort_by_key(|(w, _, _)| *w);
        for (ma, ca) in &self.terms {
            let wa = ma.weight(k);
            for (wb, mb, cb) in &rhs {
                if wa + wb > n {
                    break;
                }
                let mono = Monomial::new(ma.j + mb.j, ma.l + mb.l, ma.m + mb.m);
                let prod = ca.mul_ref(cb);
                match out.terms.get_mut(&mono) {
                    Some(existing) => existing.add_assign_ref(&prod),
                    None => {
                        out.terms.insert(mono, prod);
                    }
                }
            }
        }
        out.terms.retain(|_, c| !c.is_zero_elem());
        out
    }

    pub fn neg_series(&self) -> Self {
        self.map_coeffs(|c| c.neg_ref())
    }

    pub fn scale(&self, s: &C) -> Self {
        if s.is_zero_elem() {
            return Self::zero_with(self.k, self.n);
        }
        self.map_coeffs(|c| c.mul_ref(s))
    }

    pub fn map_coeffs<F: Fn(&C) -> C>(&self, f: F) -> Self {
        let mut out = Self::zero_with(self.k, self.n);
        for (mono, c) in &self.terms {
            let v = f(c);
            if !v.is_zero_elem() {
                out.terms.insert(*mono, v);
            }
        }
        out
    }

    /// Multiplies each coefficient by a function of its monomial.
    pub fn map_terms<F: Fn(&Monomial, &C) -> C>(&self, f: F) -> Self {
        let mut out = Self::zero_with(self.k, self.n);
        for (mono, c) in &self.terms {
            let v = f(mono, c);
            if !v.is_zero_elem() {
                out.terms.insert(*mono, v);
            }
        }
        out
    }

    pub fn monomial(k: u32, n: u32, mono: Monomial, c: C) -> Self {
        let mut s = Self::zero_with(k, n);
        s.accumulate(mono, &c);
        s
    }

    pub fn one(k: u32, n: u32) -> Self {
        Self::monomial(k, n, Monomial::new(0, 0, 0), C::one_elem())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.k, self.n);
        for _ in 0..e {
            acc = acc.mul_unchecked(self);
        }
        acc
    }

    /// Successive powers `self^0 ..= self^max`.
    pub(crate) fn powers(&self, max: u32) -> Vec<Self> {
        let mut out = Vec::with_capacity(max as usize + 1);
        out.push(Self::one(self.k, self.n));
        for i in 1..=max as usize {
            let next = out[i - 1].mul_unchecked(self);
            out.push(next);
        }
        out
    }

    pub fn is_u_free(&self) -> bool {
        self.terms.keys().all(|mono| mono.m == 0)
    }
}

impl<B: Basis> Series<Rat, B> {
    pub fn to_gauss(&self) -> Series<GaussRat, B> {
        Series {
            k: self.k,
            n: self.n,
            terms: self.terms.iter().map(|(mono, c)| (*mono, GaussRat::real(c.clone()))).collect(),
            basis: PhantomData,
        }
    }
}

impl<B: Basis> Series<GaussRat, B> {
    pub fn re(&self) -> Series<Rat, B> {
        self.part(|c| c.re.clone())
    }

    pub fn im(&self) -> Series<Rat, B> {
        self.part(|c| c.im.clone())
    }

    fn part<F: Fn(&GaussRat) -> Rat>(&self, f: F) -> Series<Rat, B> {
        let mut out = Series::zero_with(self.k, self.n);
        for (mono, c) in &self.terms {
            let v = f(c);
            if !v.is_zero_elem() {
                out.terms.insert(*mono, v);
            }
        }
        out
    }
}

impl RealSeries {
    /// Whether every monomial is a pure power of `x`.
    pub fn is_univariate_x(&self) -> bool {
        self.terms.keys().all(|mono| mono.l == 0 && mono.m == 0)
    }

    pub fn is_y_free(&self) -> bool {
        self.terms.keys().all(|mono| mono.l == 0)
    }
}

impl ComplexSeries {
    /// Reality symmetry: coefficient of `(j, l, m)` is the conjugate of the
    /// coefficient of `(l, j, m)`.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(mono, c)| {
            let mirror = Monomial::new(mono.l, mono.j, mono.m);
            match self.terms.get(&mirror) {
                Some(d) => *d == c.conj(),
                None => false,
            }
        })
    }
}

impl<C: Coeff, B: Basis> Add for &Series<C, B> {
    type Output = Series<C, B>;
    fn add(self, rhs: Self) -> Series<C, B> {
        self.checked_add(rhs).expect("series addition")
    }
}

impl<C: Coeff, B: Basis> Sub for &Series<C, B> {
    type Output = Series<C, B>;
    fn sub(self, rhs: Self) -> Series<C, B> {
        self.checked_sub(rhs).expect("series subtraction")
    }
}

impl<C: Coeff, B: Basis> Mul for &Series<C, B> {
    type Output = Series<C, B>;
    fn mul(self, rhs: Self) -> Series<C, B> {
        self.checked_mul(rhs).expect("series multiplication")
    }
}

impl<C: Coeff, B: Basis> Neg for &Series<C, B> {
    type Output = Series<C, B>;
    fn neg(self) -> Series<C, B> {
        self.neg_series()
    }
}

impl<C: Coeff + fmt::Display, B: Basis> fmt::Display for Series<C, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by_key(|(mono, _)| (mono.weight(self.k), mono.j, mono.l, mono.m));
        if ordered.is_empty() {
            write!(f, "0")?;
        }
        for (i, (mono, c)) in ordered.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})", c)?;
            for (name, e) in B::VARS.iter().zip([mono.j, mono.l, mono.m]) {
                match e {
                    0 => {}
                    1 => write!(f, "*{}", name)?,
                    _ => write!(f, "*{}^{}", name, e)?,
                }
            }
        }
        write!(f, " + O(wt {})", self.n + 1)
    }
}

impl<C: Coeff, B: Basis> fmt::Debug for Series<C, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Series")
            .field("k", &self.k)
            .field("n", &self.n)
            .field("terms", &self.terms)
            .finish()
    }
}

// ---------------------------------------------------------------------------
// change of basis

/// `((z+z̄)/2)^j` as coefficients of `z^a z̄^(j-a)`, indexed by `a`.
fn x_power_in_z(j: u32) -> Vec<GaussRat> {
    let denom = Rat::from_integer(BigInt::from(2u32).pow(j));
    (0..=j).map(|a| GaussRat::real(Rat::from_integer(binomial(j, a)) / &denom)).collect()
}

/// `((z-z̄)/(2i))^l` as coefficients of `z^b z̄^(l-b)`, indexed by `b`.
fn y_power_in_z(l: u32) -> Vec<GaussRat> {
    let two_i_pow = GaussRat::i().scale(&Rat::from_integer(BigInt::from(2))).pow(l);
    let inv = two_i_pow.inv().expect("nonzero");
    (0..=l)
        .map(|b| {
            let sign = if (l - b).is_multiple_of(2) { Rat::one() } else { -Rat::one() };
            inv.scale(&(Rat::from_integer(binomial(l, b)) * sign))
        })
        .collect()
}

/// Exact substitution `x = (z+z̄)/2`, `y = (z-z̄)/(2i)`.
pub fn to_complex_basis(a: &RealSeries) -> ComplexSeries {
    let mut out = ComplexSeries::zero_with(a.k, a.n);
    for (mono, c) in &a.terms {
        let xs = x_power_in_z(mono.j);
        let ys = y_power_in_z(mono.l);
        for (ia, xa) in xs.iter().enumerate() {
            for (ib, yb) in ys.iter().enumerate() {
                let (ia, ib) = (ia as u32, ib as u32);
                let target = Monomial::new(ia + ib, (mono.j - ia) + (mono.l - ib), mono.m);
                out.accumulate(target, &xa.mul_ref(yb).scale(c));
            }
        }
    }
    out
}

/// Exact substitution `z = x+iy`, `z̄ = x-iy`. Fails unless the input has
/// the reality symmetry.
pub fn to_real_basis(c: &ComplexSeries) -> Result<RealSeries> {
    if !c.is_real() {
        return Err(Error::NotReal("complex-basis series lacks the reality symmetry".into()));
    }
    let mut acc = XyuComplex::zero_with(c.k, c.n);
    for (mono, coeff) in &c.terms {
        let (p, q) = (mono.j, mono.l);
        for s in 0..=p {
            for t in 0..=q {
                let factor = Rat::from_integer(binomial(p, s) * binomial(q, t));
                let unit = GaussRat::i_pow(s as i64 - t as i64);
                let value = unit.scale(&factor).mul_ref(coeff);
                acc.accumulate(Monomial::new(p - s + q - t, s + t, mono.m), &value);
            }
        }
    }
    if !acc.im().is_zero() {
        return Err(Error::Internal("imaginary residue after basis change".into()));
    }
    Ok(acc.re())
}

// ---------------------------------------------------------------------------
// holomorphic series

/// Exponent pair of `z^j w^m`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct HoloMonomial {
    pub j: u32,
    pub m: u32,
}

impl HoloMonomial {
    pub const fn new(j: u32, m: u32) -> Self {
        HoloMonomial { j, m }
    }

    pub fn weight(&self, k: u32) -> u32 {
        self.j + k * self.m
    }
}

/// Truncated holomorphic series in `(z, w)`.
#[derive(Clone, PartialEq)]
pub struct HoloSeries {
    k: u32,
    n: u32,
    terms: BTreeMap<HoloMonomial, GaussRat>,
}

impl HoloSeries {
    pub fn zero(k: u32, n: u32) -> Self {
        HoloSeries { k, n, terms: BTreeMap::new() }
    }

    pub fn from_terms<I>(k: u32, n: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (HoloMonomial, GaussRat)>,
    {
        let mut s = HoloSeries::zero(k, n);
        for (mono, c) in terms {
            let weight = mono.weight(k);
            if weight > n {
                return Err(Error::WeightExceeded { weight, n });
            }
            s.accumulate(mono, &c);
        }
        Ok(s)
    }

    pub fn z(k: u32, n: u32) -> Self {
        HoloSeries::from_terms(k, n, [(HoloMonomial::new(1, 0), GaussRat::one())]).expect("z")
    }

    pub fn w(k: u32, n: u32) -> Self {
        HoloSeries::monomial(k, n, HoloMonomial::new(0, 1), GaussRat::one())
    }

    pub fn monomial(k: u32, n: u32, mono: HoloMonomial, c: GaussRat) -> Self {
        let mut s = HoloSeries::zero(k, n);
        s.accumulate(mono, &c);
        s
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&HoloMonomial, &GaussRat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, j: u32, m: u32) -> GaussRat {
        self.terms.get(&HoloMonomial::new(j, m)).cloned().unwrap_or_default()
    }

    pub fn set(&mut self, mono: HoloMonomial, c: GaussRat) -> Result<()> {
        let weight = mono.weight(self.k);
        if weight > self.n {
            return Err(Error::WeightExceeded { weight, n: self.n });
        }
        if c.is_zero() {
            self.terms.remove(&mono);
        } else {
            self.terms.insert(mono, c);
        }
        Ok(())
    }

    pub(crate) fn accumulate(&mut self, mono: HoloMonomial, c: &GaussRat) {
        if mono.weight(self.k) > self.n || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(existing) => {
                existing.add_assign_ref(c);
                if existing.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, c.clone());
            }
        }
    }

    pub fn min_weight(&self) -> Option<u32> {
        self.terms.keys().map(|mono| mono.weight(self.k)).min()
    }

    pub fn max_weight(&self) -> Option<u32> {
        self.terms.keys().map(|mono| mono.weight(self.k)).max()
    }

    pub fn truncate(&self, n: u32) -> Self {
        let n = n.min(self.n);
        let k = self.k;
        HoloSeries {
            k,
            n,
            terms: self.terms.iter().filter(|(mono, _)| mono.weight(k) <= n).map(|(a, b)| (*a, b.clone())).collect(),
        }
    }

    /// Same terms, truncation weight `n` (terms above `n` dropped).
    pub fn with_truncation(&self, n: u32) -> Self {
        let mut out = self.truncate(n);
        out.n = n;
        out
    }

    pub fn homogeneous(&self, w: u32) -> Self {
        let k = self.k;
        HoloSeries {
            k,
            n: self.n,
            terms: self.terms.iter().filter(|(mono, _)| mono.weight(k) == w).map(|(a, b)| (*a, b.clone())).collect(),
        }
    }

    /// Sum truncated at `self.n`.
    pub fn add(&self, other: &HoloSeries) -> HoloSeries {
        let mut out = self.clone();
        for (mono, c) in &other.terms {
            out.accumulate(*mono, c);
        }
        out
    }

    pub fn sub(&self, other: &HoloSeries) -> HoloSeries {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> HoloSeries {
        self.map_coeffs(|c| c.neg_ref())
    }

    pub fn scale(&self, s: &GaussRat) -> HoloSeries {
        self.map_coeffs(|c| c.mul_ref(s))
    }

    pub fn map_coeffs<F: Fn(&GaussRat) -> GaussRat>(&self, f: F) -> HoloSeries {
        self.map_terms(|_, c| f(c))
    }

    pub fn map_terms<F: Fn(&HoloMonomial, &GaussRat) -> GaussRat>(&self, f: F) -> HoloSeries {
        let mut out = HoloSeries::zero(self.k, self.n);
        for (mono, c) in &self.terms {
            let v = f(mono, c);
            if !v.is_zero() {
                out.terms.insert(*mono, v);
            }
        }
        out
    }

    /// Product truncated at `min(self.n, other.n)`.
    pub fn mul(&self, other: &HoloSeries) -> HoloSeries {
        let k = self.k;
        let n = self.n.min(other.n);
        let mut out = HoloSeries::zero(k, n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mono = HoloMonomial::new(ma.j + mb.j, ma.m + mb.m);
                if mono.weight(k) <= n {
                    out.accumulate(mono, &ca.mul_ref(cb));
                }
            }
        }
        out
    }

    fn one(k: u32, n: u32) -> HoloSeries {
        HoloSeries::monomial(k, n, HoloMonomial::new(0, 0), GaussRat::one())
    }

    /// Substitutes `z -> p`, `w -> q`, truncating at weight `n`.
    ///
    /// `p` must have no terms of weight below one and `q` none below `k`, so
    /// that the substitution never lowers weight.
    pub fn compose(&self, p: &HoloSeries, q: &HoloSeries, n: u32) -> Result<HoloSeries> {
        let k = self.k;
        if p.terms.keys().any(|mono| mono.weight(k) < 1) || q.terms.keys().any(|mono| mono.weight(k) < k) {
            return Err(Error::MapForm("substitution would lower weight".into()));
        }
        let p = p.with_truncation(n);
        let q = q.with_truncation(n);
        let max_j = self.terms.keys().map(|mono| mono.j).max().unwrap_or(0);
        let max_m = self.terms.keys().map(|mono| mono.m).max().unwrap_or(0);
        let mut p_pows = vec![HoloSeries::one(k, n)];
        for i in 1..=max_j as usize {
            let next = p_pows[i - 1].mul(&p);
            p_pows.push(next);
        }
        let mut out = HoloSeries::zero(k, n);
        let mut q_pow = HoloSeries::one(k, n);
        for m in 0..=max_m {
            let mut inner = HoloSeries::zero(k, n);
            for (mono, c) in self.terms.iter().filter(|(mono, _)| mono.m == m) {
                if mono.weight(k) > n {
                    continue;
                }
                inner = inner.add(&p_pows[mono.j as usize].scale(c));
            }
            if !inner.is_zero() {
                out = out.add(&inner.mul(&q_pow));
            }
            q_pow = q_pow.mul(&q);
        }
        Ok(out)
    }

    /// Substitutes `z -> a·z`, `w -> d·w`.
    pub fn rescale(&self, a: &GaussRat, d: &GaussRat) -> HoloSeries {
        self.map_terms(|mono, c| c.mul_ref(&a.pow(mono.j)).mul_ref(&d.pow(mono.m)))
    }
}

impl fmt::Debug for HoloSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HoloSeries")
            .field("k", &self.k)
            .field("n", &self.n)
            .field("terms", &self.terms)
            .finish()
    }
}

// ---------------------------------------------------------------------------
// restriction to the hypersurface

/// Cached powers of `z = x+iy` and `w = u+iF` on the hypersurface `v = F`.
#[derive(Clone, Debug)]
pub struct Restriction {
    k: u32,
    n: u32,
    z_pows: Vec<XyuComplex>,
    w_pows: Vec<XyuComplex>,
}

impl Restriction {
    /// Powers through weight `n` (at most `F.n()`).
    pub fn new(f: &RealSeries, n: u32) -> Self {
        let k = f.k();
        let n = n.min(f.n());
        let mut z = XyuComplex::zero_with(k, n);
        z.accumulate(Monomial::new(1, 0, 0), &GaussRat::one());
        z.accumulate(Monomial::new(0, 1, 0), &GaussRat::i());
        let mut w = f.truncate(n).to_gauss().scale(&GaussRat::i());
        w.n = n;
        w.accumulate(Monomial::new(0, 0, 1), &GaussRat::one());
        Restriction { k, n, z_pows: z.powers(n), w_pows: w.powers(n / k) }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// The same powers truncated at a lower weight.
    pub fn truncated(&self, n: u32) -> Restriction {
        let n = n.min(self.n);
        let k = self.k;
        Restriction {
            k,
            n,
            z_pows: self.z_pows[..=n as usize].iter().map(|p| p.truncate(n)).collect(),
            w_pows: self.w_pows[..=(n / k) as usize].iter().map(|p| p.truncate(n)).collect(),
        }
    }

    /// `h(x+iy, u+iF)` as a complex-valued series in `(x, y, u)`.
    pub fn apply(&self, h: &HoloSeries) -> XyuComplex {
        let (k, n) = (self.k, self.n);
        let mut out = XyuComplex::zero_with(k, n);
        for m in 0..self.w_pows.len() as u32 {
            let mut inner = XyuComplex::zero_with(k, n);
            for (mono, c) in h.terms.iter().filter(|(mono, _)| mono.m == m) {
                if mono.weight(k) > n {
                    continue;
                }
                for (zm, zc) in &self.z_pows[mono.j as usize].terms {
                    inner.accumulate(*zm, &zc.mul_ref(c));
                }
            }
            if inner.is_zero() {
                continue;
            }
            let part = if m == 0 { inner } else { inner.mul_unchecked(&self.w_pows[m as usize]) };
            for (mono, c) in &part.terms {
                out.accumulate(*mono, c);
            }
        }
        out
    }
}

/// Evaluates `h(x+iy, u+iF(x,y,u))` and returns its real and imaginary
/// parts, truncated at `h.n()`.
pub fn restrict_to_m(h: &HoloSeries, f: &RealSeries) -> Result<(RealSeries, RealSeries)> {
    if h.k() != f.k() {
        return Err(Error::Mismatch(format!("k = {} vs {}", h.k(), f.k())));
    }
    if h.n() > f.n() {
        return Err(Error::Mismatch(format!("holomorphic truncation {} exceeds {}", h.n(), f.n())));
    }
    let restricted = Restriction::new(f, h.n()).apply(h);
    Ok((restricted.re(), restricted.im()))
}
