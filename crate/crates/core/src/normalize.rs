//! Normal-form solvers and condition checkers.
//!
//! Every solver works weight by weight. At weight `μ` the unknown map
//! coefficients enter the new defining function only through the linear
//! operator
//!
//! ```text
//! L_μ(f, g) = Re{ i·g_μ(z, u + i x^k) + k·x^(k-1)·f_(μ-k+1)(z, u + i x^k) }
//! ```
//!
//! so `F*_μ = P_μ - L_μ(f, g)` where `P_μ` is what the already determined
//! lower-weight part of the map produces. Selecting the rows that a normal
//! form constrains gives a square rational system, solved exactly.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hypersurface::{detect_tube_model, BasisTag, Hypersurface};
use crate::linalg::Matrix;
use crate::number::{Coeff, GaussRat, Rat};
use crate::series::{to_complex_basis, ComplexSeries, HoloMonomial, HoloSeries, Monomial, RealSeries, Restriction};
use crate::transform::{compose, pushforward_defining, FormalMap};

/// Which set of normal-form conditions to check or solve for.
#[derive(Clone, PartialEq, Debug)]
pub enum NormalFormKind {
    TNormal,
    /// t-normal form with `X_{2k-1,0} = A` and `X_{2k-1,1} = B` at `u^0`.
    TNormalAB { a: Rat, b: Rat },
    RigidT,
    Nontransversal,
    Stanton,
    Ko1NonTube,
    Ko1Tube,
    Ko1HalfType,
}

impl NormalFormKind {
    pub fn name(&self) -> &'static str {
        match self {
            NormalFormKind::TNormal => "t",
            NormalFormKind::TNormalAB { .. } => "t-ab",
            NormalFormKind::RigidT => "rigid",
            NormalFormKind::Nontransversal => "nt",
            NormalFormKind::Stanton => "stanton",
            NormalFormKind::Ko1NonTube => "ko1-nontube",
            NormalFormKind::Ko1Tube => "ko1-tube",
            NormalFormKind::Ko1HalfType => "ko1-half",
        }
    }
}

/// One failed condition.
#[derive(Clone, PartialEq, Debug)]
pub struct Violation {
    /// Condition label such as `X_{3,1}` or `Z_{2,2}`.
    pub condition: String,
    pub basis: BasisTag,
    /// Offending monomial; absent for conditions that combine several.
    pub monomial: Option<Monomial>,
    pub value: GaussRat,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.condition)?;
        if let Some(mono) = self.monomial {
            write!(f, " at ({} {} {}) [{}]", mono.j, mono.l, mono.m, self.basis.as_str())?;
        }
        if self.value.is_real() {
            write!(f, " = {}", self.value.re)
        } else {
            write!(f, " = {} + {}i", self.value.re, self.value.im)
        }
    }
}

/// Size of the linear system solved at one weight.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct WeightReport {
    pub weight: u32,
    pub unknowns: usize,
    pub conditions: usize,
    pub rank: usize,
}

#[derive(Clone, PartialEq, Debug)]
pub struct NormalizationResult {
    pub h_normal: Hypersurface,
    pub map: FormalMap,
    pub per_weight_report: Vec<WeightReport>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum MapComponent {
    F,
    G,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Part {
    Re,
    Im,
}

/// Real or imaginary part of the coefficient of `z^j w^m` in `f` or `g`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct Unknown {
    pub component: MapComponent,
    pub j: u32,
    pub m: u32,
    pub part: Part,
}

impl Unknown {
    fn unit(&self) -> GaussRat {
        match self.part {
            Part::Re => GaussRat::one(),
            Part::Im => GaussRat::i(),
        }
    }

    /// Reads this unknown's value off a map.
    pub fn value(&self, f: &HoloSeries, g: &HoloSeries) -> Rat {
        let c = match self.component {
            MapComponent::F => f.coeff(self.j, self.m),
            MapComponent::G => g.coeff(self.j, self.m),
        };
        match self.part {
            Part::Re => c.re,
            Part::Im => c.im,
        }
    }
}

/// Which family of unknowns and rows a solver uses.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum SystemFamily {
    /// All `f_{jm}`, `g_{jm}`; rows of the t-normal form.
    T,
    /// `f_j z^j`, `g_j z^j` only; rows of the rigid t-normal form.
    Rigid,
    /// `f_{0m}`, `g_{0m}` only; rows `X_0, X_{k-1}, X_k, X_{2k-1}`.
    Nontransversal,
}

/// The system `L_μ` restricted to the constrained rows at weight `μ`.
#[derive(Clone, PartialEq, Debug)]
pub struct WeightSystem {
    pub weight: u32,
    pub unknowns: Vec<Unknown>,
    pub rows: Vec<Monomial>,
    /// `matrix[r][c]` is the coefficient of `rows[r]` in `L_μ(unknowns[c])`.
    pub matrix: Matrix,
}

impl WeightSystem {
    pub fn new(family: SystemFamily, k: u32, mu: u32) -> WeightSystem {
        let unknowns = unknowns_for(family, k, mu);
        let rows = rows_for(family, k, mu);
        let mut matrix = Matrix::zeros(rows.len(), unknowns.len());
        for (c, unknown) in unknowns.iter().enumerate() {
            let mono = HoloMonomial::new(unknown.j, unknown.m);
            let series = HoloSeries::monomial(k, mu, mono, unknown.unit());
            let zero = HoloSeries::zero(k, mu);
            let column = match unknown.component {
                MapComponent::F => linear_operator(k, mu, &series, &zero),
                MapComponent::G => linear_operator(k, mu, &zero, &series),
            };
            for (r, row) in rows.iter().enumerate() {
                matrix.set(r, c, column.coeff(row.j, row.l, row.m));
            }
        }
        WeightSystem { weight: mu, unknowns, rows, matrix }
    }

    /// Row values `L_μ(f, g)` restricted to the constrained rows.
    pub fn apply(&self, f: &HoloSeries, g: &HoloSeries) -> Vec<Rat> {
        let x: Vec<Rat> = self.unknowns.iter().map(|u| u.value(f, g)).collect();
        self.matrix.mul_vec(&x)
    }

    pub fn report(&self) -> WeightReport {
        WeightReport {
            weight: self.weight,
            unknowns: self.unknowns.len(),
            conditions: self.rows.len(),
            rank: self.matrix.rank(),
        }
    }
}

struct CachedSystem {
    system: WeightSystem,
    report: WeightReport,
}

/// Per-weight systems depend only on the family, `k` and `μ`.
fn cached_system(family: SystemFamily, k: u32, mu: u32) -> std::sync::Arc<CachedSystem> {
    use std::collections::HashMap;
    use std::sync::{Arc, Mutex, OnceLock};
    type Cache = Mutex<HashMap<(SystemFamily, u32, u32), Arc<CachedSystem>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("system cache").get(&(family, k, mu)) {
        return hit.clone();
    }
    let system = WeightSystem::new(family, k, mu);
    let report = system.report();
    let entry = Arc::new(CachedSystem { system, report });
    cache.lock().expect("system cache").insert((family, k, mu), entry.clone());
    entry
}

fn push_pair(out: &mut Vec<Unknown>, component: MapComponent, j: u32, m: u32) {
    out.push(Unknown { component, j, m, part: Part::Re });
    out.push(Unknown { component, j, m, part: Part::Im });
}

fn unknowns_for(family: SystemFamily, k: u32, mu: u32) -> Vec<Unknown> {
    let mut out = Vec::new();
    let wf = mu + 1 - k;
    match family {
        SystemFamily::T => {
            for m in 0..=wf / k {
                push_pair(&mut out, MapComponent::F, wf - k * m, m);
            }
            for m in 0..=mu / k {
                push_pair(&mut out, MapComponent::G, mu - k * m, m);
            }
        }
        SystemFamily::Rigid => {
            push_pair(&mut out, MapComponent::F, wf, 0);
            push_pair(&mut out, MapComponent::G, mu, 0);
        }
        SystemFamily::Nontransversal => {
            if wf.is_multiple_of(k) && wf >= k {
                push_pair(&mut out, MapComponent::F, 0, wf / k);
            }
            if mu.is_multiple_of(k) && mu >= 2 * k {
                push_pair(&mut out, MapComponent::G, 0, mu / k);
            }
        }
    }
    out
}

fn rows_for(family: SystemFamily, k: u32, mu: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    match family {
        SystemFamily::T => {
            for m in 0..=mu / k {
                let rest = mu - k * m;
                for j in [0, 1, k - 1, k] {
                    if j <= rest {
                        out.push(Monomial::new(j, rest - j, m));
                    }
                }
                if rest == 2 * k - 1 {
                    out.push(Monomial::new(2 * k - 1, 0, m));
                }
                if rest == 2 * k {
                    out.push(Monomial::new(2 * k - 1, 1, m));
                }
            }
        }
        SystemFamily::Rigid => {
            for j in [0, 1, k - 1, k] {
                if j <= mu {
                    out.push(Monomial::new(j, mu - j, 0));
                }
            }
        }
        SystemFamily::Nontransversal => {
            for m in 0..=mu / k {
                let rest = mu - k * m;
                if [0, k - 1, k, 2 * k - 1].contains(&rest) {
                    out.push(Monomial::new(rest, 0, m));
                }
            }
        }
    }
    out.sort();
    out
}

/// Weight-`μ` part of `Re{ i·g(z, u+ix^k) + k·x^(k-1)·f(z, u+ix^k) }`, using
/// only the weight-`μ` part of `g` and the weight-`(μ-k+1)` part of `f`.
pub fn linear_operator(k: u32, mu: u32, f: &HoloSeries, g: &HoloSeries) -> RealSeries {
    let model = RealSeries::monomial(k, mu, Monomial::new(k, 0, 0), Rat::one());
    let restriction = Restriction::new(&model, mu);
    let g_part = restriction.apply(&g.homogeneous(mu).with_truncation(mu)).scale(&GaussRat::i());
    let f_part = restriction.apply(&f.homogeneous(mu + 1 - k).with_truncation(mu));
    let xk1 = crate::series::XyuComplex::monomial(
        k,
        mu,
        Monomial::new(k - 1, 0, 0),
        GaussRat::real(Rat::from_integer(k.into())),
    );
    let total = g_part.add_unchecked(&f_part.mul_unchecked(&xk1));
    total.re().homogeneous(mu)
}

fn require_tube_form(h: &Hypersurface) -> Result<()> {
    if !h.is_tube_form() {
        return Err(Error::NotPrenormalized(format!("weight-{} part must be exactly x^{}", h.k(), h.k())));
    }
    Ok(())
}

fn normalize_with(
    h: &Hypersurface,
    family: SystemFamily,
    targets: &BTreeMap<Monomial, Rat>,
    kind: &NormalFormKind,
) -> Result<NormalizationResult> {
    let (k, n) = (h.k(), h.n());
    crate::series::check_type(k, n)?;
    require_tube_form(h)?;
    let mut report = Vec::new();
    let trivial = h.tail().is_zero() && targets.is_empty();
    // Compose one weight-homogeneous correction per weight; after step μ the
    // current series is normal through weight μ and only weights above μ
    // change later.
    let mut current = h.defining().clone();
    let mut map = FormalMap::identity(k, n);

    for mu in k + 1..=n {
        let system = cached_system(family, k, mu);
        let entry = system.report;
        report.push(entry);
        if entry.unknowns != entry.conditions || entry.rank != entry.unknowns {
            return Err(Error::Internal(format!(
                "weight {} system is {}x{} with rank {}",
                mu, entry.conditions, entry.unknowns, entry.rank
            )));
        }
        if trivial || system.system.unknowns.is_empty() {
            continue;
        }
        let rows = &system.system.rows;
        let rhs: Vec<Rat> = rows
            .iter()
            .map(|row| {
                let target = targets.get(row).cloned().unwrap_or_else(Rat::zero);
                current.coeff(row.j, row.l, row.m) - target
            })
            .collect();
        if rhs.iter().all(|v| v.is_zero()) {
            continue;
        }
        let solution = system
            .system
            .matrix
            .solve(&rhs)
            .ok_or_else(|| Error::Internal(format!("weight {} system is singular", mu)))?;
        let mut step_f = HoloSeries::zero(k, n + 1 - k);
        let mut step_g = HoloSeries::zero(k, n);
        for (unknown, value) in system.system.unknowns.iter().zip(solution) {
            let c = match unknown.part {
                Part::Re => GaussRat::real(value),
                Part::Im => GaussRat::new(Rat::zero(), value),
            };
            let target = match unknown.component {
                MapComponent::F => &mut step_f,
                MapComponent::G => &mut step_g,
            };
            target.accumulate(HoloMonomial::new(unknown.j, unknown.m), &c);
        }
        current = pushforward_defining(&current, &step_f, &step_g, n);
        if let Some(row) = rows.iter().find(|row| {
            current.coeff(row.j, row.l, row.m) != targets.get(row).cloned().unwrap_or_else(Rat::zero)
        }) {
            return Err(Error::Internal(format!("weight {} correction left ({} {} {}) unsolved", mu, row.j, row.l, row.m)));
        }
        let step = FormalMap::unipotent(k, n, step_f, step_g)?;
        map = compose(&step, &map)?;
    }

    let h_normal = Hypersurface::new(current, h.basis())?;
    let remaining = check(&h_normal, kind)?;
    if let Some(v) = remaining.first() {
        return Err(Error::Internal(format!("normalized series still violates {}", v)));
    }
    Ok(NormalizationResult { h_normal, map, per_weight_report: report })
}

/// The unique unipotent map into t-normal form, optionally with the
/// constants `A`, `B` imposed on `X_{2k-1,0}` and `X_{2k-1,1}`.
pub fn t_normalize(h: &Hypersurface, targets: Option<(Rat, Rat)>) -> Result<NormalizationResult> {
    let k = h.k();
    let mut map = BTreeMap::new();
    let kind = match targets {
        Some((a, b)) => {
            if !a.is_zero() {
                map.insert(Monomial::new(2 * k - 1, 0, 0), a.clone());
            }
            if !b.is_zero() {
                map.insert(Monomial::new(2 * k - 1, 1, 0), b.clone());
            }
            NormalFormKind::TNormalAB { a, b }
        }
        None => NormalFormKind::TNormal,
    };
    normalize_with(h, SystemFamily::T, &map, &kind)
}

/// Rigid t-normal form by a map `z + Σ f_i z^i`, `w + Σ g_i z^i`.
pub fn rigid_normalize(h: &Hypersurface) -> Result<NormalizationResult> {
    if !h.is_rigid() {
        return Err(Error::NotRigid);
    }
    normalize_with(h, SystemFamily::Rigid, &BTreeMap::new(), &NormalFormKind::RigidT)
}

/// Normal form for `v = x^k + G(x, u)` by a map `z + ψ(w)`, `w + φ(w)`.
pub fn nt_normalize(h: &Hypersurface) -> Result<NormalizationResult> {
    if !h.is_y_free() {
        return Err(Error::NotYIndependent);
    }
    normalize_with(h, SystemFamily::Nontransversal, &BTreeMap::new(), &NormalFormKind::Nontransversal)
}

// ---------------------------------------------------------------------------
// checkers

fn real_violation(condition: String, mono: Monomial, value: &Rat) -> Violation {
    Violation { condition, basis: BasisTag::Xyu, monomial: Some(mono), value: GaussRat::real(value.clone()) }
}

fn complex_violation(condition: String, mono: Monomial, value: &GaussRat) -> Violation {
    Violation { condition, basis: BasisTag::Zzu, monomial: Some(mono), value: value.clone() }
}

fn t_conditions(h: &Hypersurface, targets: Option<(&Rat, &Rat)>) -> Result<Vec<Violation>> {
    require_tube_form(h)?;
    let k = h.k();
    let tail = h.tail();
    let mut out = Vec::new();
    let special = |mono: &Monomial| mono.j == 2 * k - 1 && mono.l <= 1;
    for (mono, c) in tail.iter() {
        if [0, 1, k - 1, k].contains(&mono.j) {
            out.push(real_violation(format!("X_{{{},{}}}", mono.j, mono.l), *mono, c));
        }
    }
    let mut expected: BTreeMap<Monomial, Rat> = BTreeMap::new();
    for (mono, _) in tail.iter().filter(|(mono, _)| special(mono)) {
        expected.insert(*mono, Rat::zero());
    }
    if let Some((a, b)) = targets {
        expected.insert(Monomial::new(2 * k - 1, 0, 0), a.clone());
        expected.insert(Monomial::new(2 * k - 1, 1, 0), b.clone());
    }
    for (mono, target) in expected {
        let c = tail.coeff(mono.j, mono.l, mono.m);
        if c != target {
            out.push(real_violation(format!("X_{{{},{}}}", mono.j, mono.l), mono, &(c - target)));
        }
    }
    Ok(sorted(out, k))
}

fn rigid_conditions(h: &Hypersurface) -> Result<Vec<Violation>> {
    require_tube_form(h)?;
    let k = h.k();
    let mut out = Vec::new();
    for (mono, c) in h.tail().iter() {
        if mono.m > 0 {
            out.push(real_violation("rigidity (u-dependence)".into(), *mono, c));
        } else if [0, 1, k - 1, k].contains(&mono.j) {
            out.push(real_violation(format!("A_{{{},{}}}", mono.j, mono.l), *mono, c));
        }
    }
    Ok(sorted(out, k))
}

fn nt_conditions(h: &Hypersurface) -> Result<Vec<Violation>> {
    require_tube_form(h)?;
    let k = h.k();
    let mut out = Vec::new();
    for (mono, c) in h.tail().iter() {
        if mono.l > 0 {
            out.push(real_violation("y-dependence".into(), *mono, c));
        } else if [0, k - 1, k, 2 * k - 1].contains(&mono.j) {
            out.push(real_violation(format!("X_{{{}}}", mono.j), *mono, c));
        }
    }
    Ok(sorted(out, k))
}

/// `F` minus its weight-`k` part, in the complex basis.
fn complex_tail(h: &Hypersurface) -> ComplexSeries {
    to_complex_basis(&h.tail())
}

fn stanton_conditions(h: &Hypersurface) -> Result<Vec<Violation>> {
    require_tube_form(h)?;
    let k = h.k();
    let mut out = Vec::new();
    for (mono, c) in complex_tail(h).iter() {
        if mono.m > 0 {
            out.push(complex_violation("rigidity (u-dependence)".into(), *mono, c));
        } else if mono.j <= 1 && mono.l >= 1 {
            out.push(complex_violation(format!("A_{{{},{}}}", mono.j, mono.l), *mono, c));
        }
    }
    Ok(sorted(out, k))
}

fn z_label(j: u32, l: u32) -> String {
    format!("Z_{{{},{}}}", j, l)
}

fn ko1_nontube(h: &Hypersurface) -> Result<Vec<Violation>> {
    let k = h.k();
    let info = detect_tube_model(&h.leading())?;
    if info.is_tube() {
        return Err(Error::ModelMismatch("model is a tube; use the tube conditions".into()));
    }
    let e = info.e;
    if 2 * e >= k {
        return Err(Error::ModelMismatch(format!("e = {} is not below k/2", e)));
    }
    let tail = complex_tail(h);
    let mut out = Vec::new();
    for (mono, c) in tail.iter() {
        let (j, l) = (mono.j, mono.l);
        let hit = (l == 0 && j >= 1) || (l == e && j >= k - e) || (j == 2 * k - 2 * e && l == 2 * e);
        if hit {
            out.push(complex_violation(z_label(j, l), *mono, c));
        }
    }
    // Σ_{j=1}^{k-2} Z_{j,k-1-j}(u)·(j+1)·conj(a_{j+1}), one equation per power of u.
    let max_m = h.n() / k;
    for m in 0..=max_m {
        let mut acc = GaussRat::zero();
        for j in 1..=k - 2 {
            let z = tail.coeff(j, k - 1 - j, m);
            if z.is_zero() {
                continue;
            }
            let a = info.leading.coeff(j + 1, k - j - 1, 0).conj();
            acc.add_assign_ref(&z.mul_ref(&a).scale(&Rat::from_integer((j + 1).into())));
        }
        if !acc.is_zero() {
            out.push(Violation {
                condition: format!("(Z_{{k-1}}, P_z) at u^{}", m),
                basis: BasisTag::Zzu,
                monomial: None,
                value: acc,
            });
        }
    }
    Ok(out)
}

fn ko1_tube(h: &Hypersurface) -> Result<Vec<Violation>> {
    require_tube_form(h)?;
    let k = h.k();
    let mut out = Vec::new();
    for (mono, c) in complex_tail(h).iter() {
        let (j, l) = (mono.j, mono.l);
        let full = (l == 0 && j >= 1) || (l == 1 && j >= k - 1) || (j == 2 * k - 2 && l == 2);
        if full {
            out.push(complex_violation(z_label(j, l), *mono, c));
            continue;
        }
        let real_part = (j == k - 2 && l == 1) || (j == k && l == k - 1);
        if real_part && !c.re.is_zero() {
            out.push(complex_violation(format!("Re {}", z_label(j, l)), *mono, &GaussRat::real(c.re.clone())));
        }
    }
    Ok(out)
}

fn ko1_half(h: &Hypersurface) -> Result<Vec<Violation>> {
    let k = h.k();
    if k % 2 == 1 {
        return Err(Error::OddType("half-type normal form"));
    }
    let e = k / 2;
    let lead = h.leading();
    if (1..k).any(|j| j != e && !lead.coeff(j, k - j, 0).is_zero()) || lead.coeff(e, e, 0).is_zero() {
        return Err(Error::ModelMismatch("model is not a multiple of |z|^k".into()));
    }
    let mut out = Vec::new();
    for (mono, c) in complex_tail(h).iter() {
        let (j, l) = (mono.j, mono.l);
        let hit = l == 0
            || (j == e && l >= e)
            || (j == 2 * e && l == 2 * e)
            || (j == 3 * e && l == 3 * e)
            || (j == 2 * e && l + 1 == 2 * e);
        if hit {
            out.push(complex_violation(z_label(j, l), *mono, c));
        }
    }
    Ok(out)
}

fn sorted(mut v: Vec<Violation>, k: u32) -> Vec<Violation> {
    v.sort_by_key(|x| x.monomial.map(|m| (m.weight(k), m.j, m.l, m.m)));
    v
}

/// Conditions of `kind` that `h` violates through its truncation weight.
pub fn check(h: &Hypersurface, kind: &NormalFormKind) -> Result<Vec<Violation>> {
    let out = match kind {
        NormalFormKind::TNormal => t_conditions(h, None)?,
        NormalFormKind::TNormalAB { a, b } => t_conditions(h, Some((a, b)))?,
        NormalFormKind::RigidT => rigid_conditions(h)?,
        NormalFormKind::Nontransversal => nt_conditions(h)?,
        NormalFormKind::Stanton => stanton_conditions(h)?,
        NormalFormKind::Ko1NonTube => ko1_nontube(h)?,
        NormalFormKind::Ko1Tube => ko1_tube(h)?,
        NormalFormKind::Ko1HalfType => ko1_half(h)?,
    };
    Ok(out)
}
