//! Formal maps `z* = a(z + f)`, `w* = d(w + g)` and their action on
//! defining equations.
//!
//! A map is stored factored: a unipotent part `(f, g)` with `f` of weight
//! greater than one and `g` of weight greater than `k`, followed by a
//! linear factor `z* = δ·r·z`, `w* = δ^k·w`. Truncation is canonical: `f`
//! is kept through weight `N - k + 1` and `g` through `N`, which is exactly
//! what influences a defining function through weight `N`.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hypersurface::{rotate_defining, Hypersurface};
use crate::number::{binomial_rat, rat_int, rat_pow, GaussRat, QuarterTurn, Rat};
use crate::series::{HoloMonomial, HoloSeries, Monomial, RealSeries, Restriction, XyuComplex};

/// `z* = δ·r·z`, `w* = δ^k·w`.
#[derive(Clone, PartialEq, Debug)]
pub struct LinearFactor {
    delta: Rat,
    rotation: QuarterTurn,
}

impl LinearFactor {
    pub fn new(delta: Rat, rotation: QuarterTurn) -> Result<Self> {
        if delta.is_zero() {
            return Err(Error::ZeroDilation);
        }
        Ok(LinearFactor { delta, rotation })
    }

    pub fn dilation(delta: Rat) -> Result<Self> {
        LinearFactor::new(delta, QuarterTurn::IDENTITY)
    }

    pub fn identity() -> Self {
        LinearFactor { delta: Rat::one(), rotation: QuarterTurn::IDENTITY }
    }

    pub fn delta(&self) -> &Rat {
        &self.delta
    }

    pub fn rotation(&self) -> QuarterTurn {
        self.rotation
    }

    pub fn is_identity(&self) -> bool {
        self.delta.is_one() && self.rotation == QuarterTurn::IDENTITY
    }

    /// Multiplier of `z`.
    pub fn z_factor(&self) -> GaussRat {
        self.rotation.unit().scale(&self.delta)
    }

    /// Multiplier of `w`.
    pub fn w_factor(&self, k: u32) -> Rat {
        rat_pow(&self.delta, k as i64)
    }

    /// `self ∘ inner`.
    pub fn then_after(&self, inner: &LinearFactor) -> LinearFactor {
        LinearFactor { delta: &self.delta * &inner.delta, rotation: self.rotation.compose(inner.rotation) }
    }

    pub fn inverse(&self) -> LinearFactor {
        LinearFactor { delta: self.delta.recip(), rotation: self.rotation.inverse() }
    }
}

/// Parameters `(δ, θ, μ)` of the automorphisms of `v = |z|^k`.
#[derive(Clone, PartialEq, Debug)]
pub struct ModelAutParams {
    pub delta: Rat,
    pub theta: QuarterTurn,
    pub mu: Rat,
}

/// Formal map, unipotent part then linear factor.
#[derive(Clone, PartialEq, Debug)]
pub struct FormalMap {
    k: u32,
    n: u32,
    f: HoloSeries,
    g: HoloSeries,
    linear: LinearFactor,
}

fn f_truncation(k: u32, n: u32) -> u32 {
    (n + 1).saturating_sub(k)
}

impl FormalMap {
    pub fn new(k: u32, n: u32, f: HoloSeries, g: HoloSeries, linear: LinearFactor) -> Result<Self> {
        if f.k() != k || g.k() != k {
            return Err(Error::Mismatch("map components have different k".into()));
        }
        if let Some(w) = f.min_weight().filter(|&w| w <= 1) {
            return Err(Error::MapForm(format!("f has a term of weight {} (must exceed 1)", w)));
        }
        if let Some(w) = g.min_weight().filter(|&w| w <= k) {
            return Err(Error::MapForm(format!("g has a term of weight {} (must exceed k = {})", w, k)));
        }
        Ok(FormalMap {
            k,
            n,
            f: f.with_truncation(f_truncation(k, n)),
            g: g.with_truncation(n),
            linear,
        })
    }

    pub fn unipotent(k: u32, n: u32, f: HoloSeries, g: HoloSeries) -> Result<Self> {
        FormalMap::new(k, n, f, g, LinearFactor::identity())
    }

    pub fn identity(k: u32, n: u32) -> Self {
        FormalMap::from_linear(k, n, LinearFactor::identity())
    }

    pub fn from_linear(k: u32, n: u32, linear: LinearFactor) -> Self {
        FormalMap {
            k,
            n,
            f: HoloSeries::zero(k, f_truncation(k, n)),
            g: HoloSeries::zero(k, n),
            linear,
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn f(&self) -> &HoloSeries {
        &self.f
    }

    pub fn g(&self) -> &HoloSeries {
        &self.g
    }

    /// The linear factor, when it is not the identity.
    pub fn linear(&self) -> Option<&LinearFactor> {
        (!self.linear.is_identity()).then_some(&self.linear)
    }

    pub fn linear_factor(&self) -> &LinearFactor {
        &self.linear
    }

    pub fn is_identity(&self) -> bool {
        self.f.is_zero() && self.g.is_zero() && self.linear.is_identity()
    }

    pub fn truncate(&self, n: u32) -> FormalMap {
        let n = n.min(self.n);
        FormalMap {
            k: self.k,
            n,
            f: self.f.truncate(f_truncation(self.k, n)),
            g: self.g.truncate(n),
            linear: self.linear.clone(),
        }
    }

    fn unipotent_part(&self) -> FormalMap {
        FormalMap { linear: LinearFactor::identity(), ..self.clone() }
    }

    /// `L⁻¹ ∘ U ∘ L` for the unipotent part `U` and `L = z -> a z, w -> d w`.
    fn conjugate_unipotent(&self, by: &LinearFactor) -> FormalMap {
        let a = by.z_factor();
        let d = GaussRat::real(by.w_factor(self.k));
        let a_inv = a.inv().expect("nonzero");
        let d_inv = d.inv().expect("nonzero");
        FormalMap {
            k: self.k,
            n: self.n,
            f: self.f.rescale(&a, &d).scale(&a_inv),
            g: self.g.rescale(&a, &d).scale(&d_inv),
            linear: LinearFactor::identity(),
        }
    }
}

fn check_same(a: &FormalMap, b: &FormalMap) -> Result<()> {
    if a.k != b.k {
        return Err(Error::Mismatch(format!("maps of type {} and {}", a.k, b.k)));
    }
    Ok(())
}

/// Unipotent composition `outer ∘ inner`.
fn compose_unipotent(outer: &FormalMap, inner: &FormalMap, n: u32) -> Result<FormalMap> {
    let k = outer.k;
    let nf = f_truncation(k, n);
    let p = HoloSeries::z(k, n).add(&inner.f.with_truncation(n));
    let q = HoloSeries::w(k, n).add(&inner.g.with_truncation(n));
    let f = inner.f.with_truncation(nf).add(&outer.f.compose(&p, &q, nf)?);
    let g = inner.g.with_truncation(n).add(&outer.g.compose(&p, &q, n)?);
    FormalMap::unipotent(k, n, f, g)
}

/// `outer ∘ inner` (apply `inner` first), re-factored as unipotent part then
/// linear factor. The result is truncated at the smaller of the two weights.
pub fn compose(outer: &FormalMap, inner: &FormalMap) -> Result<FormalMap> {
    check_same(outer, inner)?;
    let n = outer.n.min(inner.n);
    let outer = outer.truncate(n);
    let inner = inner.truncate(n);
    let conj = outer.unipotent_part().conjugate_unipotent(&inner.linear);
    let mut out = compose_unipotent(&conj, &inner.unipotent_part(), n)?;
    out.linear = outer.linear.then_after(&inner.linear);
    Ok(out)
}

/// Inverse through the truncation weight.
pub fn invert(t: &FormalMap) -> Result<FormalMap> {
    let (k, n) = (t.k, t.n);
    let nf = f_truncation(k, n);
    // Fixed point p = -f(z+p, w+q), q = -g(z+p, w+q); each sweep fixes at
    // least one more weight.
    let mut p = HoloSeries::zero(k, nf);
    let mut q = HoloSeries::zero(k, n);
    for _ in 0..=n {
        let zp = HoloSeries::z(k, n).add(&p.with_truncation(n));
        let wq = HoloSeries::w(k, n).add(&q);
        let next_p = t.f.compose(&zp, &wq, nf)?.neg();
        let next_q = t.g.compose(&zp, &wq, n)?.neg();
        let done = next_p == p && next_q == q;
        p = next_p;
        q = next_q;
        if done {
            break;
        }
    }
    let u_inv = FormalMap::unipotent(k, n, p, q)?;
    // (L∘U)⁻¹ = U⁻¹ ∘ L⁻¹ = L⁻¹ ∘ (L U⁻¹ L⁻¹)
    let l_inv = t.linear.inverse();
    let mut out = u_inv.conjugate_unipotent(&l_inv);
    out.linear = l_inv;
    Ok(out)
}

/// Solves `F*(x + Re f, y + Im f, u + Re g) = F + Im g` on `v = F` through
/// weight `n`, with `f`, `g` restricted to the hypersurface.
pub(crate) fn pushforward_defining(f: &RealSeries, fmap: &HoloSeries, gmap: &HoloSeries, n: u32) -> RealSeries {
    let restriction = Restriction::new(f, n);
    pushforward_with(&restriction, f, fmap, gmap)
}

/// `x + Re f|M`, `y + Im f|M`, `u + Re g|M`.
pub(crate) fn shifted_variables(f_m: &XyuComplex, g_m: &XyuComplex) -> (RealSeries, RealSeries, RealSeries) {
    let shifted = |mono: Monomial, delta: RealSeries| {
        let mut s = delta;
        s.accumulate(mono, &Rat::one());
        s
    };
    (
        shifted(Monomial::new(1, 0, 0), f_m.re()),
        shifted(Monomial::new(0, 1, 0), f_m.im()),
        shifted(Monomial::new(0, 0, 1), g_m.re()),
    )
}

pub(crate) fn pushforward_with(
    restriction: &Restriction,
    f: &RealSeries,
    fmap: &HoloSeries,
    gmap: &HoloSeries,
) -> RealSeries {
    let n = restriction.n();
    let k = f.k();
    let f_m = restriction.apply(fmap);
    let g_m = restriction.apply(gmap);
    let rhs = f.truncate(n).add_unchecked(&g_m.im());
    if f_m.is_zero() && g_m.is_zero() {
        return rhs;
    }
    let (x, y, u) = shifted_variables(&f_m, &g_m);
    let x_pows = x.powers(n);
    let y_pows = y.powers(n);
    let u_pows = u.powers(n / k);
    let mut yu_cache: HashMap<(u32, u32), RealSeries> = HashMap::new();

    // correction = Σ A*_mono (mono∘shift - mono), filled weight by weight.
    let mut correction = RealSeries::zero_with(k, n);
    let mut out = RealSeries::zero_with(k, n);
    for weight in 0..=n {
        let level: Vec<Monomial> = rhs
            .iter()
            .chain(correction.iter())
            .map(|(mono, _)| *mono)
            .filter(|mono| mono.weight(k) == weight)
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        for mono in level {
            let coeff = rhs.coeff(mono.j, mono.l, mono.m) - correction.coeff(mono.j, mono.l, mono.m);
            if coeff.is_zero() {
                continue;
            }
            out.accumulate(mono, &coeff);
            if weight == n {
                continue;
            }
            let yu = yu_cache
                .entry((mono.l, mono.m))
                .or_insert_with(|| y_pows[mono.l as usize].mul_unchecked(&u_pows[mono.m as usize]));
            let image = x_pows[mono.j as usize].mul_unchecked(yu);
            for (m2, c2) in image.iter() {
                if m2.weight(k) > weight {
                    correction.accumulate(*m2, &(c2 * &coeff));
                }
            }
        }
    }
    out
}

/// Coefficient action of a linear factor:
/// `c*_{jlm} = c_{jlm}·δ^(k - wt)·r^(l - j)` in the complex basis.
pub fn apply_linear(h: &Hypersurface, l: &LinearFactor) -> Result<Hypersurface> {
    if l.delta.is_zero() {
        return Err(Error::ZeroDilation);
    }
    let k = h.k();
    let rotated = rotate_defining(h.defining(), l.rotation)?;
    let scaled = rotated.map_terms(|mono, c| c * rat_pow(&l.delta, k as i64 - mono.weight(k) as i64));
    Hypersurface::new(scaled, h.basis())
}

/// Image of `h` under `t` through weight `h.n()`.
pub fn pushforward(h: &Hypersurface, t: &FormalMap) -> Result<Hypersurface> {
    if t.k != h.k() {
        return Err(Error::Mismatch(format!("map type {} vs hypersurface type {}", t.k, h.k())));
    }
    if t.n < h.n() {
        return Err(Error::Mismatch(format!("map truncated at {} below hypersurface weight {}", t.n, h.n())));
    }
    let t = t.truncate(h.n());
    let f_star = pushforward_defining(h.defining(), &t.f, &t.g, h.n());
    let unipotent_image = Hypersurface::new(f_star, h.basis())?;
    if t.linear.is_identity() {
        Ok(unipotent_image)
    } else {
        apply_linear(&unipotent_image, &t.linear)
    }
}

/// Automorphism `z* = δe^{iθ}z/(1+μw)^{2/k}`, `w* = δ^k w/(1+μw)` of
/// `v = |z|^k` for even `k`.
pub fn model_automorphism(k: u32, n: u32, p: &ModelAutParams) -> Result<FormalMap> {
    if k % 2 == 1 {
        return Err(Error::OddType("model automorphism of v = |z|^k"));
    }
    if p.delta <= Rat::zero() {
        return Err(Error::MapForm("model automorphism needs δ > 0".into()));
    }
    let e = k / 2;
    let nf = f_truncation(k, n);
    let exponent = -Rat::one() / rat_int(e as i64);
    let mut f = HoloSeries::zero(k, nf);
    let mut g = HoloSeries::zero(k, n);
    let mut s = 1;
    while k * s < nf {
        let c = binomial_rat(&exponent, s) * rat_pow(&p.mu, s as i64);
        f.accumulate(HoloMonomial::new(1, s), &GaussRat::real(c));
        s += 1;
    }
    let mut s = 2;
    while k * s <= n {
        let c = rat_pow(&-p.mu.clone(), s as i64 - 1);
        g.accumulate(HoloMonomial::new(0, s), &GaussRat::real(c));
        s += 1;
    }
    FormalMap::new(k, n, f, g, LinearFactor::new(p.delta.clone(), p.theta)?)
}

/// Whether the unipotent coefficient pair `(f, g)` vanishes identically.
pub fn is_unipotent_identity(t: &FormalMap) -> bool {
    t.f.is_zero() && t.g.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::{validate, BasisTag};
    use crate::number::{rat, rat_int};

    fn tube(k: u32, n: u32, coeffs: &[(u32, Rat)]) -> Hypersurface {
        let f = RealSeries::from_terms(k, n, coeffs.iter().map(|(j, c)| (Monomial::new(*j, 0, 0), c.clone()))).unwrap();
        validate(f, k).unwrap()
    }

    #[test]
    fn identity_pushforward() {
        let h = tube(4, 12, &[(4, rat_int(1)), (5, rat(2, 3)), (9, rat_int(-1))]);
        assert_eq!(pushforward(&h, &FormalMap::identity(4, 12)).unwrap(), h);
    }

    #[test]
    fn dilation_of_tube() {
        let h = tube(4, 8, &[(4, rat_int(1)), (6, rat_int(1))]);
        let out = apply_linear(&h, &LinearFactor::dilation(rat_int(2)).unwrap()).unwrap();
        assert_eq!(out.defining().coeff(6, 0, 0), rat(1, 4));
        assert_eq!(out.defining().coeff(4, 0, 0), rat_int(1));
        let back = apply_linear(&out, &LinearFactor::dilation(rat(1, 2)).unwrap()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn reflection_sign_bookkeeping() {
        let h = tube(3, 9, &[(3, rat_int(1)), (4, rat_int(1)), (5, rat_int(1))]);
        let f = RealSeries::from_terms(3, 9, [(Monomial::new(3, 0, 0), rat_int(1)), (Monomial::new(2, 1, 1), rat_int(7))]).unwrap();
        let h2 = Hypersurface::new(f, BasisTag::Xyu).unwrap();
        let refl = LinearFactor::dilation(rat_int(-1)).unwrap();
        let out = apply_linear(&h, &refl).unwrap();
        assert_eq!(out.defining().coeff(4, 0, 0), rat_int(-1));
        assert_eq!(out.defining().coeff(5, 0, 0), rat_int(1));
        // weight 6: (-1)^(3-6) = -1
        assert_eq!(apply_linear(&h2, &refl).unwrap().defining().coeff(2, 1, 1), rat_int(-7));
        assert_eq!(apply_linear(&h, &LinearFactor::dilation(rat_int(0)).unwrap_or(LinearFactor::identity())).unwrap(), h);
        assert_eq!(LinearFactor::dilation(rat_int(0)), Err(Error::ZeroDilation));
    }

    #[test]
    fn dilations_compose() {
        let a = FormalMap::from_linear(3, 9, LinearFactor::dilation(rat_int(2)).unwrap());
        let b = FormalMap::from_linear(3, 9, LinearFactor::dilation(rat(1, 3)).unwrap());
        let c = compose(&a, &b).unwrap();
        assert_eq!(c, FormalMap::from_linear(3, 9, LinearFactor::dilation(rat(2, 3)).unwrap()));
    }

    #[test]
    fn map_form_is_enforced() {
        let k = 4;
        let f = HoloSeries::monomial(k, 12, HoloMonomial::new(1, 0), GaussRat::one());
        assert!(matches!(FormalMap::unipotent(k, 12, f, HoloSeries::zero(k, 12)), Err(Error::MapForm(_))));
        let g = HoloSeries::monomial(k, 12, HoloMonomial::new(0, 1), GaussRat::one());
        assert!(matches!(FormalMap::unipotent(k, 12, HoloSeries::zero(k, 12), g), Err(Error::MapForm(_))));
    }

    #[test]
    fn model_automorphism_coefficients() {
        let p = ModelAutParams { delta: rat_int(1), theta: QuarterTurn::IDENTITY, mu: rat_int(1) };
        let t = model_automorphism(4, 16, &p).unwrap();
        assert_eq!(t.g().coeff(0, 2), GaussRat::real(rat_int(-1)));
        assert_eq!(t.g().coeff(0, 3), GaussRat::real(rat_int(1)));
        assert_eq!(t.g().coeff(0, 4), GaussRat::real(rat_int(-1)));
        assert_eq!(t.f().coeff(1, 1), GaussRat::real(rat(-1, 2)));
        assert_eq!(t.f().coeff(1, 2), GaussRat::real(rat(3, 8)));

        let dil = ModelAutParams { delta: rat_int(3), theta: QuarterTurn::IDENTITY, mu: rat_int(0) };
        let t = model_automorphism(4, 12, &dil).unwrap();
        assert_eq!(t, FormalMap::from_linear(4, 12, LinearFactor::dilation(rat_int(3)).unwrap()));
        assert!(model_automorphism(5, 15, &dil).is_err());
    }
}
