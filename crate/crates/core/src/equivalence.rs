//! Equivalence of tubes `v = F(x)` and dilation matching for rigid forms.
//!
//! Every origin-preserving equivalence between tubes has the form
//! `z* = az + ibw`, `w* = cw` with real `a, b, c`, and exists exactly when
//! `G(ax - bF(x)) = cF(x)`. The decision procedure scales both leading
//! coefficients to one, removes the `x^(2k-1)` coefficient with a shift
//! `z* = z + ihw`, and then looks for a dilation `δ` with `B_j = δ^(k-j) A_j`.
//! All statements hold through the common truncation weight.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::hypersurface::Hypersurface;
use crate::normalize::{check, NormalFormKind};
use crate::number::{exact_rat_root, rat_int, rat_pow, QuarterTurn, Rat};
use crate::series::{Monomial, RealSeries};
use crate::transform::LinearFactor;

/// The real number `sign·|base|^(1/root_index)`.
///
/// Values built by this module are canonical: `base ≥ 0`, and `root_index`
/// is the least positive integer `n` with `value^n` rational.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct RadicalReal {
    pub base: Rat,
    pub root_index: u32,
    pub sign: i8,
}

impl RadicalReal {
    pub fn from_rat(r: &Rat) -> RadicalReal {
        RadicalReal { base: r.abs(), root_index: 1, sign: if r.is_negative() { -1 } else { 1 } }
    }

    /// Real `n`-th root of `beta` with the given sign, reduced to the least
    /// root index. `None` when no such real root exists.
    pub fn root(beta: &Rat, n: u32, sign: i8) -> Option<RadicalReal> {
        if n == 0 || beta.is_zero() {
            return None;
        }
        if n.is_multiple_of(2) && beta.is_negative() {
            return None;
        }
        if n % 2 == 1 && (beta.is_negative() != (sign < 0)) {
            return None;
        }
        let (mut base, mut index) = (beta.abs(), n);
        let mut p = 2;
        while p <= index {
            if index % p == 0 {
                if let Some(r) = exact_rat_root(&base, p) {
                    base = r;
                    index /= p;
                    continue;
                }
            }
            p += 1;
        }
        Some(RadicalReal { base, root_index: index, sign })
    }

    pub fn as_rat(&self) -> Option<Rat> {
        if self.root_index != 1 {
            return None;
        }
        Some(if self.sign < 0 { -self.base.clone() } else { self.base.clone() })
    }

    /// `value^root_index`, a rational.
    pub fn power_value(&self) -> Rat {
        let mut v = self.base.clone();
        if self.sign < 0 && self.root_index % 2 == 1 {
            v = -v;
        }
        v
    }

    pub fn negate(&self) -> RadicalReal {
        RadicalReal { sign: -self.sign, ..self.clone() }
    }
}

impl fmt::Display for RadicalReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rat() {
            Some(r) => write!(f, "{}", fmt_rat(&r)),
            None => {
                let sign = if self.sign < 0 { "-" } else { "" };
                write!(f, "{}({})^(1/{})", sign, fmt_rat(&self.base), self.root_index)
            }
        }
    }
}

/// Always `p/q`, including integers.
pub(crate) fn fmt_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// An element `Σ coeffs[i]·θ^i` of `ℚ(θ)` for a real radical `θ`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RadicalExpr {
    pub theta: RadicalReal,
    pub coeffs: Vec<Rat>,
}

impl RadicalExpr {
    pub fn rational(theta: &RadicalReal, r: Rat) -> RadicalExpr {
        let mut coeffs = vec![Rat::zero(); theta.root_index as usize];
        coeffs[0] = r;
        RadicalExpr { theta: theta.clone(), coeffs }
    }

    /// `θ^e` reduced with `θ^n = β`.
    pub fn theta_pow(theta: &RadicalReal, e: u32) -> RadicalExpr {
        let n = theta.root_index;
        let mut coeffs = vec![Rat::zero(); n as usize];
        coeffs[(e % n) as usize] = rat_pow(&theta.power_value(), (e / n) as i64);
        RadicalExpr { theta: theta.clone(), coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn as_rat(&self) -> Option<Rat> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn add(&self, other: &RadicalExpr) -> RadicalExpr {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        RadicalExpr { theta: self.theta.clone(), coeffs }
    }

    pub fn sub(&self, other: &RadicalExpr) -> RadicalExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RadicalExpr {
        RadicalExpr { theta: self.theta.clone(), coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, r: &Rat) -> RadicalExpr {
        RadicalExpr { theta: self.theta.clone(), coeffs: self.coeffs.iter().map(|a| a * r).collect() }
    }

    pub fn mul(&self, other: &RadicalExpr) -> RadicalExpr {
        let n = self.coeffs.len();
        let beta = self.theta.power_value();
        let mut coeffs = vec![Rat::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let p = a * b;
                if i + j >= n {
                    coeffs[i + j - n] += p * &beta;
                } else {
                    coeffs[i + j] += p;
                }
            }
        }
        RadicalExpr { theta: self.theta.clone(), coeffs }
    }
}

impl fmt::Display for RadicalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rat() {
            return write!(f, "{}", fmt_rat(&r));
        }
        let n = self.theta.root_index;
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut c = c.clone();
            if i == 0 {
                parts.push(fmt_rat(&c));
                continue;
            }
            if self.theta.sign < 0 && i % 2 == 1 {
                c = -c;
            }
            let g = (i as u32).gcd(&n);
            parts.push(format!("{}*({})^({}/{})", fmt_rat(&c), fmt_rat(&self.theta.base), i as u32 / g, n / g));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// A map `z* = az + ibw`, `w* = cw` between tubes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TubeWitness {
    pub a: RadicalExpr,
    pub b: RadicalExpr,
    pub c: RadicalExpr,
}

impl TubeWitness {
    pub fn from_rats(a: Rat, b: Rat, c: Rat) -> TubeWitness {
        let one = RadicalReal::from_rat(&Rat::one());
        TubeWitness {
            a: RadicalExpr::rational(&one, a),
            b: RadicalExpr::rational(&one, b),
            c: RadicalExpr::rational(&one, c),
        }
    }

    /// The same map with coefficients read in `ℚ(θ)`; `self` must be rational.
    fn lift(&self, theta: &RadicalReal) -> TubeWitness {
        let lift = |x: &RadicalExpr| RadicalExpr::rational(theta, x.as_rat().expect("rational factor"));
        TubeWitness { a: lift(&self.a), b: lift(&self.b), c: lift(&self.c) }
    }

    pub fn as_rats(&self) -> Option<(Rat, Rat, Rat)> {
        Some((self.a.as_rat()?, self.b.as_rat()?, self.c.as_rat()?))
    }

    /// `self ∘ inner`: `(a₂a₁, a₂b₁ + b₂c₁, c₂c₁)`.
    pub fn after(&self, inner: &TubeWitness) -> TubeWitness {
        TubeWitness {
            a: self.a.mul(&inner.a),
            b: self.a.mul(&inner.b).add(&self.b.mul(&inner.c)),
            c: self.c.mul(&inner.c),
        }
    }
}

impl fmt::Display for TubeWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a={} b={} c={}", self.a, self.b, self.c)
    }
}

/// One witness together with the maps it was composed from, innermost first.
#[derive(Clone, PartialEq, Debug)]
pub struct TubeMatch {
    pub witness: TubeWitness,
    pub factors: Vec<TubeWitness>,
}

#[derive(Clone, PartialEq, Debug)]
pub struct TubeEquivalence {
    /// Weight through which the equivalence holds.
    pub order: u32,
    pub matches: Vec<TubeMatch>,
}

/// A tube brought to leading coefficient one and `A_{2k-1} = 0`.
#[derive(Clone, PartialEq, Debug)]
pub struct TubeReduction {
    pub leading: Rat,
    pub h: Rat,
    pub normal: RealSeries,
}

/// Dense coefficients `F_0..=F_n` of a series in `x` alone.
fn dense_x(f: &RealSeries) -> Result<Vec<Rat>> {
    if !f.is_univariate_x() {
        return Err(Error::Mismatch("tube series must depend on x alone".into()));
    }
    Ok((0..=f.n()).map(|j| f.coeff(j, 0, 0)).collect())
}

fn from_dense(k: u32, n: u32, c: &[Rat]) -> Result<RealSeries> {
    RealSeries::from_terms(k, n, c.iter().enumerate().map(|(j, v)| (Monomial::new(j as u32, 0, 0), v.clone())))
}

/// Lowest degree, which must equal the series' `k`.
fn tube_type(f: &RealSeries, dense: &[Rat]) -> Result<u32> {
    let low = dense.iter().position(|c| !c.is_zero()).ok_or(Error::ZeroSeries)? as u32;
    if low < 3 {
        return Err(Error::UnsupportedType(low));
    }
    if low != f.k() {
        return Err(Error::Mismatch(format!("lowest degree {} differs from k = {}", low, f.k())));
    }
    Ok(low)
}

fn uni_mul(p: &[Rat], q: &[Rat], n: usize) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); n + 1];
    for (i, a) in p.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
        for (j, b) in q.iter().enumerate().take(n + 1 - i.min(n + 1)) {
            if i + j <= n && !b.is_zero() {
                out[i + j] += a * b;
            }
        }
    }
    out
}

/// `p(q(x))` through degree `n`, with `q(0) = 0`.
fn uni_compose(p: &[Rat], q: &[Rat], n: usize) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); n + 1];
    for c in p.iter().take(n + 1).rev() {
        out = uni_mul(&out, q, n);
        out[0] += c;
    }
    out
}

/// Compositional inverse of `φ = x + O(x²)` through degree `n`.
fn uni_revert(phi: &[Rat], n: usize) -> Vec<Rat> {
    let mut psi = vec![Rat::zero(); n + 1];
    if n >= 1 {
        psi[1] = Rat::one();
    }
    // ψ ← x − (φ(ψ) − ψ); each pass fixes one more degree.
    let mut higher = phi.to_vec();
    higher[1] = Rat::zero();
    for _ in 1..n {
        let h = uni_compose(&higher, &psi, n);
        for (d, slot) in psi.iter_mut().enumerate() {
            *slot = if d == 1 { Rat::one() } else { Rat::zero() } - &h[d];
        }
    }
    psi
}

/// Scales `F` to leading coefficient one and removes `A_{2k-1}` with the
/// shift `z* = z + ihw`, `h = -A_{2k-1}/k`.
pub fn reduce_tube(f: &RealSeries) -> Result<TubeReduction> {
    let dense = dense_x(f)?;
    let k = tube_type(f, &dense)? as usize;
    let n = f.n() as usize;
    let leading = dense[k].clone();
    let f1: Vec<Rat> = dense.iter().map(|c| c / &leading).collect();
    let h = if 2 * k - 1 <= n { -&f1[2 * k - 1] / rat_int(k as i64) } else { Rat::zero() };
    // F₂(x − hF₁(x)) = F₁(x).
    let phi: Vec<Rat> = (0..=n).map(|d| if d == 1 { Rat::one() } else { Rat::zero() } - &h * &f1[d]).collect();
    let f2 = if h.is_zero() { f1 } else { uni_compose(&f1, &uni_revert(&phi, n), n) };
    Ok(TubeReduction { leading, h, normal: from_dense(k as u32, n as u32, &f2)? })
}

/// Real `δ` with `δ^p = r` for every constraint `(p, r)`, `p ≥ 1`.
///
/// Consistency is decided in ℚ: with `g = gcd(p)` and Bézout
/// `g = Σ s_p p`, `δ^g = Π r_p^(s_p)` must reproduce every `r_p`.
/// Returns both signs when both work, positive first.
pub fn solve_dilation(constraints: &[(u32, Rat)]) -> Option<Vec<RadicalReal>> {
    let one = RadicalReal::from_rat(&Rat::one());
    let Some((first, rest)) = constraints.split_first() else {
        return Some(vec![one]);
    };
    if constraints.iter().any(|(p, r)| *p == 0 || r.is_zero()) {
        return None;
    }
    let (mut g, mut beta) = (first.0 as i64, first.1.clone());
    for (p, r) in rest {
        let e = g.extended_gcd(&(*p as i64));
        beta = rat_pow(&beta, e.x) * rat_pow(r, e.y);
        g = e.gcd;
    }
    if constraints.iter().any(|(p, r)| rat_pow(&beta, *p as i64 / g) != *r) {
        return None;
    }
    let g = g as u32;
    if g % 2 == 1 {
        let sign = if beta.is_negative() { -1 } else { 1 };
        return Some(vec![RadicalReal::root(&beta, g, sign)?]);
    }
    let pos = RadicalReal::root(&beta, g, 1)?;
    let neg = pos.negate();
    Some(vec![pos, neg])
}

/// Decides whether `v = F(x)` and `v = G(x)` are equivalent through the
/// smaller of their truncation weights. `None` means inequivalent.
pub fn tube_equivalent(f: &RealSeries, g: &RealSeries) -> Result<Option<TubeEquivalence>> {
    let (df, dg) = (dense_x(f)?, dense_x(g)?);
    let (kf, kg) = (tube_type(f, &df)?, tube_type(g, &dg)?);
    if kf != kg {
        return Ok(None);
    }
    let k = kf;
    let order = f.n().min(g.n());
    let f = f.with_truncation(order);
    let g = g.with_truncation(order);
    let (rf, rg) = (reduce_tube(&f)?, reduce_tube(&g)?);

    let mut constraints = Vec::new();
    for j in k + 1..=order {
        let (a, b) = (rf.normal.coeff(j, 0, 0), rg.normal.coeff(j, 0, 0));
        match (a.is_zero(), b.is_zero()) {
            (true, true) => {}
            (false, false) => constraints.push((j - k, a / b)),
            _ => return Ok(None),
        }
    }
    let Some(deltas) = solve_dilation(&constraints) else {
        return Ok(None);
    };

    let scale_f = TubeWitness::from_rats(Rat::one(), Rat::zero(), rf.leading.recip());
    let shift_f = TubeWitness::from_rats(Rat::one(), rf.h.clone(), Rat::one());
    let unshift_g = TubeWitness::from_rats(Rat::one(), -rg.h.clone(), Rat::one());
    let unscale_g = TubeWitness::from_rats(Rat::one(), Rat::zero(), rg.leading.clone());

    let mut matches = Vec::new();
    for delta in deltas {
        let dilation = TubeWitness {
            a: RadicalExpr::theta_pow(&delta, 1),
            b: RadicalExpr::rational(&delta, Rat::zero()),
            c: RadicalExpr::theta_pow(&delta, k),
        };
        let factors = vec![
            scale_f.lift(&delta),
            shift_f.lift(&delta),
            dilation,
            unshift_g.lift(&delta),
            unscale_g.lift(&delta),
        ];
        let witness = factors[1..].iter().fold(factors[0].clone(), |acc, m| m.after(&acc));
        if !verify_tube_witness(&f, &g, &witness)? {
            return Err(Error::Internal(format!("tube witness {} fails the defining identity", witness)));
        }
        matches.push(TubeMatch { witness, factors });
    }
    Ok(Some(TubeEquivalence { order, matches }))
}

/// `G(ax − bF(x)) = cF(x)` through the smaller truncation weight.
pub fn verify_tube_witness(f: &RealSeries, g: &RealSeries, w: &TubeWitness) -> Result<bool> {
    let (df, dg) = (dense_x(f)?, dense_x(g)?);
    let n = f.n().min(g.n()) as usize;
    let theta = &w.a.theta;
    if w.b.theta != *theta || w.c.theta != *theta {
        return Err(Error::Mismatch("witness coefficients live in different fields".into()));
    }
    let zero = RadicalExpr::rational(theta, Rat::zero());
    let lift = |c: &Rat| RadicalExpr::rational(theta, c.clone());
    let mul = |p: &[RadicalExpr], q: &[RadicalExpr]| -> Vec<RadicalExpr> {
        let mut out = vec![zero.clone(); n + 1];
        for (i, a) in p.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in q.iter().enumerate() {
                if i + j <= n && !b.is_zero() {
                    out[i + j] = out[i + j].add(&a.mul(b));
                }
            }
        }
        out
    };
    let x_image: Vec<RadicalExpr> = (0..=n)
        .map(|d| {
            let base = if d == 1 { w.a.clone() } else { zero.clone() };
            base.sub(&w.b.scale(&df[d]))
        })
        .collect();
    let mut lhs = vec![zero.clone(); n + 1];
    for c in dg.iter().take(n + 1).rev() {
        lhs = mul(&lhs, &x_image);
        lhs[0] = lhs[0].add(&lift(c));
    }
    Ok((0..=n).all(|d| lhs[d] == w.c.scale(&df[d])))
}

/// Dilations `δ` carrying one rigid t-normal form onto another.
#[derive(Clone, PartialEq, Debug)]
pub struct DilationMatch {
    pub order: u32,
    pub deltas: Vec<RadicalReal>,
}

impl DilationMatch {
    /// The matching dilations that are rational.
    pub fn linear_factors(&self) -> Vec<LinearFactor> {
        self.deltas
            .iter()
            .filter_map(|d| d.as_rat())
            .filter_map(|d| LinearFactor::new(d, QuarterTurn::IDENTITY).ok())
            .collect()
    }
}

/// Matches two rigid t-normal forms through a dilation
/// `A⁽²⁾_{jl} = δ^(k-j-l) A⁽¹⁾_{jl}`.
pub fn rigid_equivalence_reduce(h1: &Hypersurface, h2: &Hypersurface) -> Result<Option<DilationMatch>> {
    for h in [h1, h2] {
        if h.is_tube() {
            return Err(Error::Tubular("use tube equivalence".into()));
        }
        if !h.is_rigid() {
            return Err(Error::NotRigid);
        }
        let violations = check(h, &NormalFormKind::RigidT)?;
        if let Some(v) = violations.first() {
            return Err(Error::NotPrenormalized(format!("rigid t-normal condition {} fails", v.condition)));
        }
    }
    if h1.k() != h2.k() {
        return Ok(None);
    }
    let k = h1.k();
    let order = h1.n().min(h2.n());
    let (t1, t2) = (h1.tail().with_truncation(order), h2.tail().with_truncation(order));
    let mut constraints = Vec::new();
    for (mono, a) in t1.iter() {
        let b = t2.coeff(mono.j, mono.l, mono.m);
        if b.is_zero() {
            return Ok(None);
        }
        constraints.push((mono.weight(k) - k, a / b));
    }
    if t2.iter().any(|(mono, _)| t1.coeff(mono.j, mono.l, mono.m).is_zero()) {
        return Ok(None);
    }
    Ok(solve_dilation(&constraints).map(|deltas| DilationMatch { order, deltas }))
}
