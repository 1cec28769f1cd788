//! Linear automorphisms and the isotropy group `Aut(M, 0)`.
//!
//! In normal coordinates every automorphism is linear, `z* = δρz`,
//! `w* = δ^k w`, so the group is read off the coefficients. Roots of unity
//! act on `c_{jlm}` by `ρ^(l-j)` and are handled by exponent arithmetic:
//! nothing is ever evaluated numerically.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::hypersurface::{detect_tube_model, Hypersurface};
use crate::normalize::{check, NormalFormKind};
use crate::number::{QuarterTurn, Rat};
use crate::series::ComplexSeries;
use crate::transform::{apply_linear, LinearFactor};

/// `e^(2πi·num/den)` with `0 ≤ num < den` in lowest terms.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct RootOfUnity {
    num: u32,
    den: u32,
}

impl RootOfUnity {
    pub const ONE: RootOfUnity = RootOfUnity { num: 0, den: 1 };

    pub fn new(num: u32, den: u32) -> RootOfUnity {
        assert!(den > 0, "root of unity needs a positive order");
        let num = num % den;
        let g = num.gcd(&den);
        RootOfUnity { num: num / g, den: den / g }
    }

    pub fn primitive(order: u32) -> RootOfUnity {
        RootOfUnity::new(1, order)
    }

    pub fn from_quarter_turn(q: QuarterTurn) -> RootOfUnity {
        RootOfUnity::new(q.index() as u32, 4)
    }

    pub fn num(&self) -> u32 {
        self.num
    }

    pub fn order(&self) -> u32 {
        self.den
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp(2πi·{}/{})", self.num, self.den)
    }
}

/// `z* = δρz`, `w* = δ^k w`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearSymmetry {
    pub delta: Rat,
    pub rotation: RootOfUnity,
}

impl LinearSymmetry {
    pub fn rotation(rotation: RootOfUnity) -> LinearSymmetry {
        LinearSymmetry { delta: Rat::one(), rotation }
    }

    pub fn reflection(rotation: RootOfUnity) -> LinearSymmetry {
        LinearSymmetry { delta: -Rat::one(), rotation }
    }
}

/// Whether the multiplier `δ^(k-wt)·ρ^(l-j)` equals one on every nonzero
/// coefficient of `c`.
fn fixes(c: &ComplexSeries, s: &LinearSymmetry) -> bool {
    let k = c.k() as i64;
    let unit = s.delta.abs().is_one();
    let (num, den) = (s.rotation.num as i64, s.rotation.den as i64);
    c.iter().all(|(mono, _)| {
        let excess = k - mono.weight(c.k()) as i64;
        if !unit && excess != 0 {
            return false;
        }
        // The multiplier is e^(iπ t) with t = [δ<0]·excess + 2·num·(l-j)/den.
        let half_turns = if s.delta.is_negative() { excess } else { 0 };
        let t_times_den = half_turns * den + 2 * num * (mono.l as i64 - mono.j as i64);
        t_times_den.rem_euclid(2 * den) == 0
    })
}

/// Exact invariance test for an arbitrary root-of-unity rotation.
pub fn is_symmetry(h: &Hypersurface, s: &LinearSymmetry) -> bool {
    !s.delta.is_zero() && fixes(&h.complex(), s)
}

/// `apply_linear(h, l) = h` through the truncation weight.
pub fn is_linear_automorphism(h: &Hypersurface, l: &LinearFactor) -> Result<bool> {
    Ok(apply_linear(h, l)?.defining() == h.defining())
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RotationOrder {
    Finite(u32),
    Infinite,
}

impl fmt::Display for RotationOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RotationOrder::Finite(m) => write!(f, "{}", m),
            RotationOrder::Infinite => write!(f, "infinite"),
        }
    }
}

/// Order of the group of rotations `z* = ρz` preserving `h`:
/// `gcd{|j - l|}` over nonzero coefficients, infinite when all have `j = l`.
pub fn rotation_order(h: &Hypersurface) -> Result<RotationOrder> {
    let c = h.complex();
    if c.is_zero() {
        return Err(Error::ZeroSeries);
    }
    let g = c.iter().fold(0u32, |acc, (mono, _)| acc.gcd(&mono.j.abs_diff(mono.l)));
    if g == 0 {
        return Ok(RotationOrder::Infinite);
    }
    if !fixes(&c, &LinearSymmetry::rotation(RootOfUnity::primitive(g))) {
        return Err(Error::Internal(format!("rotation of order {} does not fix the hypersurface", g)));
    }
    Ok(RotationOrder::Finite(g))
}

/// A reflection `z* = -ρz`, `w* = -w` for odd `k`, when one exists.
fn find_reflection(c: &ComplexSeries, order: RotationOrder) -> Option<RootOfUnity> {
    if c.k().is_multiple_of(2) {
        return None;
    }
    // ρ² is then a rotation symmetry, so ρ is a root of unity of order 2m.
    let candidates = match order {
        RotationOrder::Infinite => vec![RootOfUnity::ONE],
        RotationOrder::Finite(m) => (0..2 * m).map(|a| RootOfUnity::new(a, 2 * m)).collect(),
    };
    candidates.into_iter().find(|rho| fixes(c, &LinearSymmetry::reflection(*rho)))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AutTag {
    /// Isotropy of dimension three: `F = c|z|^k`.
    Dim3,
    /// `ℝ⁺ ⊕ ℤ_m`: the model itself with `e < k/2`.
    RplusZ(u32),
    /// `S¹`: every monomial has `j = l`.
    Circle,
    /// Finite cyclic group of order `m`.
    Zm(u32),
}

impl fmt::Display for AutTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AutTag::Dim3 => write!(f, "Dim3"),
            AutTag::RplusZ(m) => write!(f, "RplusZ({})", m),
            AutTag::Circle => write!(f, "Circle"),
            AutTag::Zm(m) => write!(f, "Zm({})", m),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Generator {
    /// `z* = δz`, `w* = δ^k w` for the sample `δ`.
    Dilation(Rat),
    Rotation(RootOfUnity),
    /// `z* = -ρz`, `w* = -w` (odd `k`).
    Reflection(RootOfUnity),
    /// The full circle `z* = e^(iθ)z`.
    Circle,
}

impl Generator {
    pub fn verify(&self, h: &Hypersurface) -> bool {
        match self {
            Generator::Dilation(d) => is_symmetry(h, &LinearSymmetry { delta: d.clone(), rotation: RootOfUnity::ONE }),
            Generator::Rotation(r) => is_symmetry(h, &LinearSymmetry::rotation(*r)),
            Generator::Reflection(r) => is_symmetry(h, &LinearSymmetry::reflection(*r)),
            Generator::Circle => h.complex().iter().all(|(mono, _)| mono.j == mono.l),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Dilation(d) => write!(f, "dilation delta={}/{}", d.numer(), d.denom()),
            Generator::Rotation(r) => write!(f, "rotation {}", r),
            Generator::Reflection(r) => write!(f, "reflection -{}", r),
            Generator::Circle => write!(f, "circle"),
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct AutClass {
    pub tag: AutTag,
    pub evidence: Vec<Generator>,
    /// Normal form against which `h` was checked, if it passed.
    pub normal_form: Option<NormalFormKind>,
    /// Set when `h` could not be confirmed to be in normal coordinates.
    pub conditional: Option<String>,
}

/// Normal form matching the model of `h`.
fn matching_kind(h: &Hypersurface) -> Result<NormalFormKind> {
    let info = detect_tube_model(&h.leading())?;
    Ok(if 2 * info.e == h.k() {
        NormalFormKind::Ko1HalfType
    } else if info.is_tube() {
        NormalFormKind::Ko1Tube
    } else {
        NormalFormKind::Ko1NonTube
    })
}

/// Classifies `Aut(M, 0)` from the normal-coordinate equation.
pub fn classify_aut(h: &Hypersurface) -> Result<AutClass> {
    let k = h.k();
    let c = h.complex();
    if c.is_zero() {
        return Err(Error::ZeroSeries);
    }
    let (normal_form, conditional) = match matching_kind(h) {
        Ok(kind) => match check(h, &kind) {
            Ok(v) if v.is_empty() => (Some(kind), None),
            Ok(v) => (None, Some(format!("{} condition {} fails", kind.name(), v[0].condition))),
            Err(e) => (None, Some(e.to_string())),
        },
        Err(e) => (None, Some(e.to_string())),
    };

    let order = rotation_order(h)?;
    let reflection = find_reflection(&c, order);
    let finite_order = |m: u32| if reflection.is_some() { 2 * m } else { m };
    let mut evidence = Vec::new();
    let is_model = h.tail().is_zero();
    let half = c.len() == 1 && k.is_multiple_of(2) && !c.coeff(k / 2, k / 2, 0).is_zero();

    let tag = if half {
        evidence.push(Generator::Dilation(Rat::from_integer(2.into())));
        evidence.push(Generator::Circle);
        AutTag::Dim3
    } else if is_model && 2 * detect_tube_model(&h.leading())?.e < k {
        evidence.push(Generator::Dilation(Rat::from_integer(2.into())));
        let m = match order {
            RotationOrder::Finite(m) => m,
            RotationOrder::Infinite => {
                return Err(Error::Internal("model with e < k/2 has a mixed term with j ≠ l".into()));
            }
        };
        evidence.push(Generator::Rotation(RootOfUnity::primitive(m)));
        AutTag::RplusZ(finite_order(m))
    } else {
        match order {
            RotationOrder::Infinite => {
                evidence.push(Generator::Circle);
                AutTag::Circle
            }
            RotationOrder::Finite(m) => {
                evidence.push(Generator::Rotation(RootOfUnity::primitive(m)));
                AutTag::Zm(finite_order(m))
            }
        }
    };
    if let Some(rho) = reflection {
        evidence.push(Generator::Reflection(rho));
    }
    if let Some(bad) = evidence.iter().find(|g| !g.verify(h)) {
        return Err(Error::Internal(format!("generator {} does not fix the hypersurface", bad)));
    }
    Ok(AutClass { tag, evidence, normal_form, conditional })
}
