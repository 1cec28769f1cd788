//! Defining equations `v = F(x, y, u)` of finite type `k`, their models and
//! the integer invariants `e` and `L`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::number::{binomial, Coeff, GaussRat, QuarterTurn, Rat};
use crate::series::{to_complex_basis, ComplexSeries, Monomial, RealSeries};

/// Basis the hypersurface was supplied in; also used when serializing.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum BasisTag {
    Xyu,
    Zzu,
}

impl BasisTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            BasisTag::Xyu => "xyu",
            BasisTag::Zzu => "zzu",
        }
    }
}

/// Real hypersurface `v = F(x, y, u)` through weight `N`.
///
/// Every monomial of `F` has weight at least `k`, and the weight-`k` part is
/// a `u`-free real homogeneous polynomial with a nonzero mixed part.
#[derive(Clone, PartialEq, Debug)]
pub struct Hypersurface {
    basis: BasisTag,
    f: RealSeries,
}

impl Hypersurface {
    /// Accepts any finite-type defining function of type `F.k()`.
    pub fn new(f: RealSeries, basis: BasisTag) -> Result<Self> {
        let k = f.k();
        if k < 3 {
            return Err(Error::UnsupportedType(k));
        }
        for (mono, _) in f.iter() {
            let w = mono.weight(k);
            if w < k {
                return Err(Error::NotPrenormalized(format!(
                    "monomial x^{} y^{} u^{} has weight {} < k",
                    mono.j, mono.l, mono.m, w
                )));
            }
        }
        if !f.coeff(0, 0, 1).is_zero() {
            return Err(Error::NotPrenormalized("defining function contains a linear u term".into()));
        }
        let leading = to_complex_basis(&f.homogeneous(k));
        if (1..k).all(|j| leading.coeff(j, k - j, 0).is_zero()) {
            return Err(Error::InfiniteType);
        }
        Ok(Hypersurface { basis, f })
    }

    /// From a complex-basis series; it must carry the reality symmetry.
    pub fn from_complex(c: &ComplexSeries) -> Result<Self> {
        let f = crate::series::to_real_basis(c)?;
        Hypersurface::new(f, BasisTag::Zzu)
    }

    pub fn k(&self) -> u32 {
        self.f.k()
    }

    pub fn n(&self) -> u32 {
        self.f.n()
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn with_basis(mut self, basis: BasisTag) -> Self {
        self.basis = basis;
        self
    }

    pub fn defining(&self) -> &RealSeries {
        &self.f
    }

    pub fn complex(&self) -> ComplexSeries {
        to_complex_basis(&self.f)
    }

    /// Weight-`k` part in the complex basis.
    pub fn leading(&self) -> ComplexSeries {
        to_complex_basis(&self.f.homogeneous(self.k()))
    }

    /// `F` minus its weight-`k` part.
    pub fn tail(&self) -> RealSeries {
        let k = self.k();
        self.f.filter(|mono| mono.weight(k) > k)
    }

    /// Leading part exactly `x^k`.
    pub fn is_tube_form(&self) -> bool {
        let lead = self.f.homogeneous(self.k());
        lead.len() == 1 && lead.coeff(self.k(), 0, 0).is_one()
    }

    pub fn is_rigid(&self) -> bool {
        self.f.is_u_free()
    }

    pub fn is_y_free(&self) -> bool {
        self.f.is_y_free()
    }

    /// `F` depends on `x` alone.
    pub fn is_tube(&self) -> bool {
        self.f.is_univariate_x()
    }

    pub fn model_info(&self) -> Result<ModelInfo> {
        detect_tube_model(&self.leading())
    }
}

/// Accepts `F` only in pre-normalized tube form: leading part exactly `x^k`
/// and all other monomials of weight at least `k + 1`.
pub fn validate(f: RealSeries, k: u32) -> Result<Hypersurface> {
    if k < 3 {
        return Err(Error::UnsupportedType(k));
    }
    if f.k() != k {
        return Err(Error::Mismatch(format!("series has k = {}, expected {}", f.k(), k)));
    }
    let h = Hypersurface::new(f, BasisTag::Xyu)?;
    if !h.is_tube_form() {
        let extra: Vec<String> = h
            .defining()
            .homogeneous(k)
            .iter()
            .filter(|(mono, _)| **mono != Monomial::new(k, 0, 0))
            .map(|(mono, c)| format!("{}·x^{}y^{}", c, mono.j, mono.l))
            .collect();
        return Err(Error::NotPrenormalized(format!(
            "weight-{} part must be exactly x^{} (found extra terms: {}; run prenormalize_tube)",
            k,
            k,
            if extra.is_empty() { "scaled leading coefficient".to_string() } else { extra.join(", ") }
        )));
    }
    Ok(h)
}

/// Tube data of a leading polynomial whose mixed part is
/// `λ·((αz + ᾱz̄)/2)^k` restricted to mixed terms.
#[derive(Clone, PartialEq, Debug)]
pub struct TubeModel {
    /// `ρ = α²`, the constant ratio `a_{j+1}C(k,j) / (a_j C(k,j+1))`.
    pub ratio: GaussRat,
    /// Least quarter turn equal to `±α`, when `α` is a quarter turn.
    pub rotation: Option<QuarterTurn>,
    /// `λ` relative to `((αz+ᾱz̄)/2)^k` for the chosen `α`.
    pub scale: Option<Rat>,
}

#[derive(Clone, PartialEq, Debug)]
pub struct ModelInfo {
    pub k: u32,
    pub leading: ComplexSeries,
    pub e: u32,
    pub l_invariant: Option<u32>,
    pub tube: Option<TubeModel>,
}

impl ModelInfo {
    pub fn is_tube(&self) -> bool {
        self.tube.is_some()
    }
}

fn leading_degree(leading: &ComplexSeries) -> Result<u32> {
    let mut degree = None;
    for (mono, _) in leading.iter() {
        if mono.m != 0 {
            return Err(Error::ModelMismatch("leading polynomial depends on u".into()));
        }
        let d = mono.j + mono.l;
        match degree {
            None => degree = Some(d),
            Some(prev) if prev != d => {
                return Err(Error::ModelMismatch("leading polynomial is not homogeneous".into()));
            }
            _ => {}
        }
    }
    degree.ok_or(Error::InfiniteType)
}

/// Mixed coefficient `a_j` of `z^j z̄^(k-j)`.
fn mixed(leading: &ComplexSeries, k: u32, j: u32) -> GaussRat {
    leading.coeff(j, k - j, 0)
}

/// Lowest `j ≥ 1` with `a_j ≠ 0`.
pub fn essential_type(leading: &ComplexSeries) -> Result<u32> {
    let k = leading_degree(leading)?;
    (1..k).find(|&j| !mixed(leading, k, j).is_zero()).ok_or(Error::InfiniteType)
}

/// `gcd{k - 2m : a_m ≠ 0, m < k/2}`; undefined when `e = k/2`.
pub fn invariant_l(leading: &ComplexSeries, e: u32) -> Result<u32> {
    let k = leading_degree(leading)?;
    if 2 * e >= k {
        return Err(Error::LUndefined);
    }
    let g = (1..k)
        .filter(|&m| 2 * m < k && !mixed(leading, k, m).is_zero())
        .fold(0u32, |acc, m| acc.gcd(&(k - 2 * m)));
    if g == 0 {
        return Err(Error::LUndefined);
    }
    Ok(g)
}

/// Decides whether the mixed part of `leading` comes from a tube model.
pub fn detect_tube_model(leading: &ComplexSeries) -> Result<ModelInfo> {
    let k = leading_degree(leading)?;
    let e = essential_type(leading)?;
    let l_invariant = if 2 * e < k { Some(invariant_l(leading, e)?) } else { None };
    let info = |tube| ModelInfo { k, leading: leading.clone(), e, l_invariant, tube };

    let a: Vec<GaussRat> = (0..=k).map(|j| mixed(leading, k, j)).collect();
    if (1..k).any(|j| a[j as usize].is_zero()) {
        return Ok(info(None));
    }
    let ratio_at = |j: u32| -> GaussRat {
        let num = a[j as usize + 1].scale(&Rat::from_integer(binomial(k, j)));
        let den = a[j as usize].scale(&Rat::from_integer(binomial(k, j + 1)));
        num.div_ref(&den).expect("nonzero mixed coefficient")
    };
    let ratio = ratio_at(1);
    if (2..k - 1).any(|j| ratio_at(j) != ratio) || !ratio.norm_sqr().is_one() {
        return Ok(info(None));
    }
    // ρ = α²; α is a quarter turn exactly when ρ = ±1.
    let rotation = if ratio == GaussRat::one() {
        Some(QuarterTurn::new(0))
    } else if ratio == GaussRat::real(-Rat::one()) {
        Some(QuarterTurn::new(1))
    } else {
        None
    };
    let scale = rotation.map(|q| {
        let alpha = q.unit();
        // a_1 = λ·k·α·ᾱ^(k-1) / 2^k
        let basis = alpha.mul_ref(&alpha.conj().pow(k - 1)).scale(&Rat::from_integer(BigInt::from(k)));
        let two_k = Rat::from_integer(BigInt::from(2u32).pow(k));
        a[1].scale(&two_k).div_ref(&basis).expect("unit").re
    });
    Ok(info(Some(TubeModel { ratio, rotation, scale })))
}

/// Coordinate change `z* = r·z` acting on `F`: `c*_{jlm} = c_{jlm}·r^(l-j)`.
pub(crate) fn rotate_defining(f: &RealSeries, turn: QuarterTurn) -> Result<RealSeries> {
    if turn == QuarterTurn::IDENTITY {
        return Ok(f.clone());
    }
    let idx = turn.index() as i64;
    let rotated = to_complex_basis(f)
        .map_terms(|mono, c| c.mul_ref(&GaussRat::i_pow(idx * (mono.l as i64 - mono.j as i64))));
    crate::series::to_real_basis(&rotated)
}

/// Coordinate change `w* = s·w` acting on `F`: `A*_{jlm} = s^(1-m) A_{jlm}`.
pub(crate) fn scale_w(f: &RealSeries, s: &Rat) -> RealSeries {
    f.map_terms(|mono, c| c * crate::number::rat_pow(s, 1 - mono.m as i64))
}

/// Record of the linear normalization performed by [`prenormalize_tube`]:
/// first `z* = r·z`, `w* = s·w`, then `w** = w* + β·(z*)^k`.
#[derive(Clone, PartialEq, Debug)]
pub struct PrenormalRecord {
    pub rotation: QuarterTurn,
    pub w_scale: Rat,
    pub harmonic: GaussRat,
}

/// Brings a hypersurface with a tube model to leading term exactly `x^k`.
pub fn prenormalize_tube(f: &RealSeries) -> Result<(Hypersurface, PrenormalRecord)> {
    let h = Hypersurface::new(f.clone(), BasisTag::Xyu)?;
    let k = h.k();
    let info = h.model_info()?;
    let tube = info.tube.ok_or_else(|| Error::ModelMismatch("leading polynomial is not a tube model".into()))?;
    let (Some(mut rotation), Some(lambda)) = (tube.rotation, tube.scale) else {
        return Err(Error::NotExactlyRepresentable(format!(
            "tube direction α satisfies α² = {}; normalizing requires rotation by a primitive 8th root of unity",
            tube.ratio
        )));
    };
    let w_scale = if lambda.is_negative() && k % 2 == 1 {
        rotation = rotation.compose(QuarterTurn::new(2));
        lambda.abs().recip()
    } else {
        lambda.recip()
    };
    let rotated = rotate_defining(h.defining(), rotation)?;
    let scaled = scale_w(&rotated, &w_scale);

    // Remove the harmonic residue at weight k via w** = w* + β z^k.
    let target = to_complex_basis(&RealSeries::monomial(k, f.n(), Monomial::new(k, 0, 0), Rat::one()));
    let current = to_complex_basis(&scaled.homogeneous(k));
    let c = target.coeff(k, 0, 0).sub_ref(&current.coeff(k, 0, 0));
    let beta = GaussRat::i().mul_ref(&c).scale(&Rat::from_integer(BigInt::from(2)));
    let normalized = if beta.is_zero() { scaled } else { harmonic_shift(&scaled, &beta)? };

    let out = validate(normalized, k)?;
    let e = essential_type(&out.leading())?;
    if e != 1 {
        return Err(Error::Internal(format!("tube model with e = {}", e)));
    }
    Ok((out, PrenormalRecord { rotation, w_scale, harmonic: beta }))
}

/// `F*(x, y, u) = F(x, y, u - Re(β z^k)) + Im(β z^k)`.
pub(crate) fn harmonic_shift(f: &RealSeries, beta: &GaussRat) -> Result<RealSeries> {
    let (k, n) = (f.k(), f.n());
    let zk = crate::series::HoloSeries::monomial(k, n, crate::series::HoloMonomial::new(k, 0), beta.clone());
    // z^k does not involve w, so restriction to any F gives the plain polynomial.
    let (re, im) = crate::series::restrict_to_m(&zk, f)?;
    let mut shifted_u = RealSeries::monomial(k, n, Monomial::new(0, 0, 1), Rat::one());
    shifted_u = shifted_u.add_unchecked(&re.neg_series());
    let max_m = f.iter().map(|(mono, _)| mono.m).max().unwrap_or(0);
    let u_pows = shifted_u.powers(max_m);
    let mut out = im;
    for (mono, c) in f.iter() {
        let xy = RealSeries::monomial(k, n, Monomial::new(mono.j, mono.l, 0), c.clone());
        out = out.add_unchecked(&xy.mul_unchecked(&u_pows[mono.m as usize]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::{rat, rat_int};

    fn real(k: u32, n: u32, terms: &[(u32, u32, u32, Rat)]) -> RealSeries {
        RealSeries::from_terms(k, n, terms.iter().map(|(j, l, m, c)| (Monomial::new(*j, *l, *m), c.clone()))).unwrap()
    }

    fn cplx(k: u32, n: u32, terms: &[(u32, u32, GaussRat)]) -> ComplexSeries {
        ComplexSeries::from_terms(k, n, terms.iter().map(|(j, l, c)| (Monomial::new(*j, *l, 0), c.clone()))).unwrap()
    }

    fn one() -> GaussRat {
        GaussRat::one()
    }

    #[test]
    fn validate_weight_bookkeeping() {
        let bad = real(4, 8, &[(4, 0, 0, rat_int(1)), (3, 1, 0, rat_int(1))]);
        assert!(matches!(validate(bad, 4), Err(Error::NotPrenormalized(_))));
        let good = real(4, 8, &[(4, 0, 0, rat_int(1)), (3, 1, 1, rat_int(1))]);
        assert!(validate(good, 4).is_ok());
        let sq = real(3, 6, &[(2, 0, 0, rat_int(1))]);
        assert!(matches!(validate(sq, 2), Err(Error::UnsupportedType(2))));
    }

    #[test]
    fn essential_type_examples() {
        let x4 = to_complex_basis(&real(4, 8, &[(4, 0, 0, rat_int(1))]));
        assert_eq!(essential_type(&x4).unwrap(), 1);
        let s4 = cplx(4, 8, &[(2, 2, one())]);
        assert_eq!(essential_type(&s4).unwrap(), 2);
        let k6 = cplx(6, 12, &[(2, 4, one()), (4, 2, one())]);
        assert_eq!(essential_type(&k6).unwrap(), 2);
        let harmonic = cplx(4, 8, &[(4, 0, one()), (0, 4, one())]);
        assert_eq!(essential_type(&harmonic), Err(Error::InfiniteType));
    }

    #[test]
    fn invariant_l_examples() {
        let x4 = to_complex_basis(&real(4, 8, &[(4, 0, 0, rat_int(1))]));
        assert_eq!(invariant_l(&x4, 1).unwrap(), 2);
        let k6 = cplx(6, 12, &[(1, 5, one()), (5, 1, one()), (2, 4, one()), (4, 2, one())]);
        assert_eq!(invariant_l(&k6, 1).unwrap(), 2);
        let k7 = cplx(7, 14, &[(1, 6, one()), (6, 1, one())]);
        assert_eq!(invariant_l(&k7, 1).unwrap(), 5);
        let s4 = cplx(4, 8, &[(2, 2, one())]);
        assert_eq!(invariant_l(&s4, 2), Err(Error::LUndefined));
    }

    #[test]
    fn tube_detection() {
        let x5 = to_complex_basis(&real(5, 10, &[(5, 0, 0, rat_int(1))]));
        let info = detect_tube_model(&x5).unwrap();
        let tube = info.tube.unwrap();
        assert_eq!(tube.ratio, one());
        assert_eq!(tube.scale, Some(rat_int(1)));
        assert_eq!(info.e, 1);

        let s4 = cplx(4, 8, &[(2, 2, one())]);
        assert!(!detect_tube_model(&s4).unwrap().is_tube());
    }

    #[test]
    fn prenormalize_pure_scaling() {
        let f = real(4, 8, &[(4, 0, 0, rat_int(16)), (5, 0, 0, rat_int(2))]);
        let (h, rec) = prenormalize_tube(&f).unwrap();
        assert_eq!(rec.w_scale, rat(1, 16));
        assert_eq!(h.defining().coeff(5, 0, 0), rat(1, 8));
        assert!(h.is_tube_form());
    }

    #[test]
    fn prenormalize_removes_harmonic_term() {
        // x^4 + Re z^4 = x^4 + x^4 - 6x^2y^2 + y^4
        let f = real(4, 8, &[(4, 0, 0, rat_int(2)), (2, 2, 0, rat_int(-6)), (0, 4, 0, rat_int(1))]);
        let (h, rec) = prenormalize_tube(&f).unwrap();
        assert_eq!(rec.rotation, QuarterTurn::IDENTITY);
        assert_eq!(h.defining(), &real(4, 8, &[(4, 0, 0, rat_int(1))]));
    }
}
