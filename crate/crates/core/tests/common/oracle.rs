//! Straightforward reference computations that share no code with the
//! library: dense maps keyed by exponents, schoolbook products, fixed-point
//! iteration instead of weight recursion, and cyclotomic arithmetic for
//! roots of unity.

use std::collections::BTreeMap;

use crnf_core::Rat;
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Complex number as a pair of rationals.
pub type C = (Rat, Rat);

pub fn c_mul(a: &C, b: &C) -> C {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

pub fn c_add(a: &C, b: &C) -> C {
    (&a.0 + &b.0, &a.1 + &b.1)
}

pub fn c_zero() -> C {
    (Rat::zero(), Rat::zero())
}

pub fn c_is_zero(a: &C) -> bool {
    a.0.is_zero() && a.1.is_zero()
}

/// Complex-valued polynomial in `x, y, u`, truncated at weight `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub k: u32,
    pub n: u32,
    pub c: BTreeMap<(u32, u32, u32), C>,
}

impl Poly {
    pub fn zero(k: u32, n: u32) -> Poly {
        Poly { k, n, c: BTreeMap::new() }
    }

    pub fn weight(&self, e: &(u32, u32, u32)) -> u32 {
        e.0 + e.1 + self.k * e.2
    }

    pub fn term(k: u32, n: u32, e: (u32, u32, u32), v: C) -> Poly {
        let mut p = Poly::zero(k, n);
        p.add_term(e, v);
        p
    }

    pub fn real(k: u32, n: u32, terms: &BTreeMap<(u32, u32, u32), Rat>) -> Poly {
        let mut p = Poly::zero(k, n);
        for (e, v) in terms {
            p.add_term(*e, (v.clone(), Rat::zero()));
        }
        p
    }

    pub fn add_term(&mut self, e: (u32, u32, u32), v: C) {
        if self.weight(&e) > self.n || c_is_zero(&v) {
            return;
        }
        let slot = self.c.entry(e).or_insert_with(c_zero);
        *slot = c_add(slot, &v);
        if c_is_zero(slot) {
            self.c.remove(&e);
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, v) in &o.c {
            out.add_term(*e, v.clone());
        }
        out
    }

    pub fn scale(&self, s: &C) -> Poly {
        let mut out = Poly::zero(self.k, self.n);
        for (e, v) in &self.c {
            out.add_term(*e, c_mul(v, s));
        }
        out
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(&(-Rat::one(), Rat::zero())))
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::zero(self.k, self.n);
        for (a, x) in &self.c {
            for (b, y) in &o.c {
                out.add_term((a.0 + b.0, a.1 + b.1, a.2 + b.2), c_mul(x, y));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::term(self.k, self.n, (0, 0, 0), (Rat::one(), Rat::zero()));
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn re(&self) -> BTreeMap<(u32, u32, u32), Rat> {
        self.c.iter().filter(|(_, v)| !v.0.is_zero()).map(|(e, v)| (*e, v.0.clone())).collect()
    }

    pub fn im(&self) -> BTreeMap<(u32, u32, u32), Rat> {
        self.c.iter().filter(|(_, v)| !v.1.is_zero()).map(|(e, v)| (*e, v.1.clone())).collect()
    }
}

fn binom(n: u32, r: u32) -> Rat {
    let mut acc = Rat::one();
    for i in 0..r {
        acc = acc * Rat::from_integer(BigInt::from(n - i)) / Rat::from_integer(BigInt::from(i + 1));
    }
    acc
}

fn i_pow(e: u32) -> C {
    match e % 4 {
        0 => (Rat::one(), Rat::zero()),
        1 => (Rat::zero(), Rat::one()),
        2 => (-Rat::one(), Rat::zero()),
        _ => (Rat::zero(), -Rat::one()),
    }
}

/// `(x + iy)^j` by the binomial theorem.
pub fn z_pow(k: u32, n: u32, j: u32) -> Poly {
    let mut p = Poly::zero(k, n);
    for b in 0..=j {
        let c = c_mul(&(binom(j, b), Rat::zero()), &i_pow(b));
        p.add_term((j - b, b, 0), c);
    }
    p
}

/// `h(x + iy, u + iF)` for `h = Σ c_{jm} z^j w^m`.
pub fn restrict(h: &BTreeMap<(u32, u32), C>, f: &BTreeMap<(u32, u32, u32), Rat>, k: u32, n: u32) -> Poly {
    let mut w = Poly::real(k, n, f).scale(&(Rat::zero(), Rat::one()));
    w.add_term((0, 0, 1), (Rat::one(), Rat::zero()));
    let mut out = Poly::zero(k, n);
    for ((j, m), c) in h {
        if j + k * m > n {
            continue;
        }
        out = out.add(&z_pow(k, n, *j).mul(&w.pow(*m)).scale(c));
    }
    out
}

/// `P(X, Y, U)` by substituting each monomial.
pub fn substitute(p: &Poly, x: &Poly, y: &Poly, u: &Poly) -> Poly {
    Substitution::new(x, y, u).apply(p)
}

/// Powers of `X, Y, U` cached for repeated substitution.
pub struct Substitution {
    x: Vec<Poly>,
    y: Vec<Poly>,
    u: Vec<Poly>,
}

impl Substitution {
    pub fn new(x: &Poly, y: &Poly, u: &Poly) -> Substitution {
        let powers = |p: &Poly, count: u32| {
            let mut out = vec![p.pow(0)];
            for i in 1..=count as usize {
                let next = out[i - 1].mul(p);
                out.push(next);
            }
            out
        };
        Substitution { x: powers(x, x.n), y: powers(y, y.n), u: powers(u, u.n / u.k) }
    }

    pub fn apply(&self, p: &Poly) -> Poly {
        let mut out = Poly::zero(p.k, p.n);
        for ((a, b, m), c) in &p.c {
            let term = self.x[*a as usize].mul(&self.y[*b as usize]).mul(&self.u[*m as usize]).scale(c);
            out = out.add(&term);
        }
        out
    }
}

/// A map `z* = z + f`, `w* = w + g`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Map {
    pub f: BTreeMap<(u32, u32), C>,
    pub g: BTreeMap<(u32, u32), C>,
}

/// `F*` with `F*(x + Re f, y + Im f, u + Re g) = F + Im g` on `v = F`,
/// found by iterating `F* ← F + Im g − (F*(X,Y,U) − F*)` until it is stable.
pub fn pushforward(f: &BTreeMap<(u32, u32, u32), Rat>, map: &Map, k: u32, n: u32) -> BTreeMap<(u32, u32, u32), Rat> {
    let fm = restrict(&map.f, f, k, n);
    let gm = restrict(&map.g, f, k, n);
    let var = |e: (u32, u32, u32)| Poly::term(k, n, e, (Rat::one(), Rat::zero()));
    let x = var((1, 0, 0)).add(&Poly::real(k, n, &fm.re()));
    let y = var((0, 1, 0)).add(&Poly::real(k, n, &fm.im()));
    let u = var((0, 0, 1)).add(&Poly::real(k, n, &gm.re()));
    let base = Poly::real(k, n, f).add(&Poly::real(k, n, &gm.im()));
    let subst = Substitution::new(&x, &y, &u);
    let mut cur = base.clone();
    for _ in 0..=n + 1 {
        let next = base.sub(&subst.apply(&cur).sub(&cur));
        if next == cur {
            return cur.re();
        }
        cur = next;
    }
    panic!("pushforward oracle did not stabilize");
}

/// `z* = λz`, `w* = sw`: `F*(x*, y*, u*) = s·F(Re(z*/λ), Im(z*/λ), u*/s)`.
pub fn linear_image(f: &BTreeMap<(u32, u32, u32), Rat>, lambda: &C, s: &Rat, k: u32, n: u32) -> BTreeMap<(u32, u32, u32), Rat> {
    let norm = &lambda.0 * &lambda.0 + &lambda.1 * &lambda.1;
    let inv = (&lambda.0 / &norm, -&lambda.1 / &norm);
    // z*/λ = (p + iq)(x* + iy*) with inv = p + iq.
    let mut x = Poly::zero(k, n);
    x.add_term((1, 0, 0), (inv.0.clone(), Rat::zero()));
    x.add_term((0, 1, 0), (-inv.1.clone(), Rat::zero()));
    let mut y = Poly::zero(k, n);
    y.add_term((1, 0, 0), (inv.1.clone(), Rat::zero()));
    y.add_term((0, 1, 0), (inv.0.clone(), Rat::zero()));
    let u = Poly::term(k, n, (0, 0, 1), (s.recip(), Rat::zero()));
    substitute(&Poly::real(k, n, f), &x, &y, &u).scale(&(s.clone(), Rat::zero())).re()
}

/// Gauss–Jordan elimination; `None` when singular or not square.
pub fn solve(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col].clone();
        for c in 0..n {
            a[col][c] = &a[col][c] / &p;
        }
        b[col] = &b[col] / &p;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in 0..n {
                    let v = &factor * &a[col][c];
                    a[r][c] -= v;
                }
                let v = &factor * &b[col];
                b[r] -= v;
            }
        }
    }
    Some(b)
}

/// Conditions of the t-normal form at weight `mu`: monomials `x^j y^l u^m`
/// with `j ∈ {0, 1, k−1, k}`, plus `x^(2k−1) u^m` and `x^(2k−1) y u^m`.
pub fn t_rows(k: u32, mu: u32) -> Vec<(u32, u32, u32)> {
    let mut rows = Vec::new();
    for m in 0..=mu / k {
        let rest = mu - k * m;
        for j in [0, 1, k - 1, k] {
            if j <= rest {
                rows.push((j, rest - j, m));
            }
        }
        if rest == 2 * k - 1 {
            rows.push((2 * k - 1, 0, m));
        }
        if rest == 2 * k {
            rows.push((2 * k - 1, 1, m));
        }
    }
    rows.sort();
    rows.dedup();
    rows
}

/// Unknowns at weight `mu`: real and imaginary parts of every `f_{jm}` of
/// weight `mu − k + 1` and every `g_{jm}` of weight `mu`.
pub fn t_unknowns(k: u32, mu: u32) -> Vec<(bool, u32, u32, bool)> {
    let mut out = Vec::new();
    let fw = mu + 1 - k;
    for m in 0..=fw / k {
        for im in [false, true] {
            out.push((true, fw - k * m, m, im));
        }
    }
    for m in 0..=mu / k {
        for im in [false, true] {
            out.push((false, mu - k * m, m, im));
        }
    }
    out
}

fn set_unknown(map: &mut Map, u: &(bool, u32, u32, bool), v: Rat) {
    let target = if u.0 { &mut map.f } else { &mut map.g };
    let slot = target.entry((u.1, u.2)).or_insert_with(c_zero);
    if u.3 {
        slot.1 = v;
    } else {
        slot.0 = v;
    }
    if c_is_zero(slot) {
        target.remove(&(u.1, u.2));
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Family {
    T,
    Rigid,
    Nt,
}

pub fn rows(family: Family, k: u32, mu: u32) -> Vec<(u32, u32, u32)> {
    match family {
        Family::T => t_rows(k, mu),
        Family::Rigid => [0, 1, k - 1, k].iter().filter(|&&j| j <= mu).map(|&j| (j, mu - j, 0)).collect(),
        Family::Nt => {
            let mut out: Vec<_> = [0, k - 1, k, 2 * k - 1]
                .iter()
                .filter(|&&j| j <= mu && (mu - j).is_multiple_of(k))
                .map(|&j| (j, 0, (mu - j) / k))
                .collect();
            out.sort();
            out
        }
    }
}

pub fn unknowns(family: Family, k: u32, mu: u32) -> Vec<(bool, u32, u32, bool)> {
    let fw = mu + 1 - k;
    let mut out = Vec::new();
    let mut push = |is_f: bool, j: u32, m: u32| {
        for im in [false, true] {
            out.push((is_f, j, m, im));
        }
    };
    match family {
        Family::T => return t_unknowns(k, mu),
        Family::Rigid => {
            push(true, fw, 0);
            push(false, mu, 0);
        }
        Family::Nt => {
            if fw.is_multiple_of(k) {
                push(true, 0, fw / k);
            }
            if mu.is_multiple_of(k) {
                push(false, 0, mu / k);
            }
        }
    }
    out
}

/// Brute-force t-normalization.
pub fn t_normalize(f: &BTreeMap<(u32, u32, u32), Rat>, k: u32, n: u32) -> (Map, BTreeMap<(u32, u32, u32), Rat>) {
    normalize(Family::T, f, k, n)
}

/// At each weight, probe the pushforward oracle with every unit unknown,
/// assemble the affine system on the condition rows and solve it.
pub fn normalize(family: Family, f: &BTreeMap<(u32, u32, u32), Rat>, k: u32, n: u32) -> (Map, BTreeMap<(u32, u32, u32), Rat>) {
    let mut map = Map::default();
    for mu in k + 1..=n {
        let unknowns = unknowns(family, k, mu);
        let rows = rows(family, k, mu);
        assert_eq!(unknowns.len(), rows.len(), "square system at weight {}", mu);
        if rows.is_empty() {
            continue;
        }
        let eval = |m: &Map| -> Vec<Rat> {
            let out = pushforward(f, m, k, mu);
            rows.iter().map(|r| out.get(r).cloned().unwrap_or_else(Rat::zero)).collect()
        };
        let base = eval(&map);
        let mut cols = Vec::new();
        for u in &unknowns {
            let mut probe = map.clone();
            set_unknown(&mut probe, u, Rat::one());
            let v = eval(&probe);
            cols.push(v.iter().zip(&base).map(|(a, b)| a - b).collect::<Vec<_>>());
        }
        let a: Vec<Vec<Rat>> = (0..rows.len()).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
        let rhs: Vec<Rat> = base.iter().map(|b| -b).collect();
        let sol = solve(a, rhs).expect("nonsingular weight system");
        for (u, v) in unknowns.iter().zip(sol) {
            set_unknown(&mut map, u, v);
        }
    }
    let out = pushforward(f, &map, k, n);
    (map, out)
}

// ---------------------------------------------------------------------------
// univariate tubes

/// `G` with `G(ax − bF(x)) = cF(x)`, solved degree by degree.
pub fn tube_image(f: &[Rat], a: &Rat, b: &Rat, c: &Rat) -> Vec<Rat> {
    let n = f.len() - 1;
    let phi: Vec<Rat> = (0..=n).map(|d| if d == 1 { a.clone() } else { Rat::zero() } - b * &f[d]).collect();
    let mut g = vec![Rat::zero(); n + 1];
    for d in 1..=n {
        // Coefficient of x^d in Σ_{i<d} g_i φ^i; the new g_d contributes g_d a^d.
        let partial = uni_eval(&g, &phi, n);
        let a_pow = num_traits::pow(a.clone(), d);
        g[d] = (c * &f[d] - &partial[d]) / a_pow;
    }
    g
}

pub fn uni_eval(p: &[Rat], q: &[Rat], n: usize) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); n + 1];
    let mut power = vec![Rat::zero(); n + 1];
    power[0] = Rat::one();
    for coeff in p.iter().take(n + 1) {
        if !coeff.is_zero() {
            for d in 0..=n {
                out[d] += coeff * &power[d];
            }
        }
        let mut next = vec![Rat::zero(); n + 1];
        for (i, x) in power.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in q.iter().enumerate() {
                if i + j <= n {
                    next[i + j] += x * y;
                }
            }
        }
        power = next;
    }
    out
}

// ---------------------------------------------------------------------------
// roots of unity

/// Integer coefficients of the cyclotomic polynomial `Φ_n`, low degree first.
pub fn cyclotomic(n: u32) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); n as usize + 1];
    p[0] = -BigInt::one();
    p[n as usize] = BigInt::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            p = poly_div_exact(&p, &cyclotomic(d));
        }
    }
    p
}

fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![BigInt::zero(); rem.len() - dd];
    for i in (0..q.len()).rev() {
        let c = &rem[i + dd] / &den[dd];
        for (j, dj) in den.iter().enumerate() {
            rem[i + j] -= &c * dj;
        }
        q[i] = c;
    }
    assert!(rem.iter().all(Zero::is_zero));
    q
}

/// Reduces `Σ c_e ζ^e` modulo `Φ_n` (monic), returning a canonical vector.
pub fn reduce_cyclotomic(c: &BTreeMap<u32, Rat>, n: u32) -> Vec<Rat> {
    let phi = cyclotomic(n);
    let deg = phi.len() - 1;
    let mut v = vec![Rat::zero(); n as usize];
    for (e, x) in c {
        v[(*e % n) as usize] += x;
    }
    for i in (deg..v.len()).rev() {
        let lead = v[i].clone();
        if lead.is_zero() {
            continue;
        }
        for (j, pj) in phi.iter().enumerate() {
            v[i - deg + j] -= &lead * Rat::from_integer(pj.clone());
        }
    }
    v.truncate(deg);
    v
}

/// Whether `z* = σζ_q^a z`, `w* = σ^k w` (σ = ±1) fixes every complex-basis
/// coefficient `c_{jlm}`, computed in `ℚ(ζ_n)` with `n = lcm(4, q)`.
pub fn fixes_root(coeffs: &BTreeMap<(u32, u32, u32), C>, k: u32, q: u32, a: u32, sigma: i32) -> bool {
    let n = num_integer::lcm(4, q);
    let step = n / q;
    let quarter = n / 4;
    coeffs.iter().all(|((j, l, m), c)| {
        let wt = j + l + k * m;
        // multiplier σ^(k − wt)·ζ^(a(l − j))
        let e = ((a as i64 * step as i64 * (*l as i64 - *j as i64)).rem_euclid(n as i64)) as u32;
        let sign = if sigma < 0 && (k as i64 - wt as i64).rem_euclid(2) == 1 { -Rat::one() } else { Rat::one() };
        let mut before = BTreeMap::new();
        before.insert(0, c.0.clone());
        *before.entry(quarter).or_insert_with(Rat::zero) += &c.1;
        let mut after: BTreeMap<u32, Rat> = BTreeMap::new();
        *after.entry(e % n).or_insert_with(Rat::zero) += &c.0 * &sign;
        *after.entry((e + quarter) % n).or_insert_with(Rat::zero) += &c.1 * &sign;
        reduce_cyclotomic(&before, n) == reduce_cyclotomic(&after, n)
    })
}

/// Complex-basis coefficients of `F` by direct expansion of
/// `x = (z + z̄)/2`, `y = (z − z̄)/(2i)`.
pub fn complex_coeffs(f: &BTreeMap<(u32, u32, u32), Rat>) -> BTreeMap<(u32, u32, u32), C> {
    let mut out: BTreeMap<(u32, u32, u32), C> = BTreeMap::new();
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    for ((a, b, m), v) in f {
        // x^a = 2^-a Σ C(a,s) z^s z̄^(a−s); y^b = (2i)^-b Σ C(b,t) (−1)^(b−t) z^t z̄^(b−t)
        let scale = num_traits::pow(half.clone(), (a + b) as usize) * v;
        let ib = i_pow((4 - b % 4) % 4);
        for s in 0..=*a {
            for t in 0..=*b {
                let mut c = binom(*a, s) * binom(*b, t) * &scale;
                if (b - t) % 2 == 1 {
                    c = -c;
                }
                let term = c_mul(&(c, Rat::zero()), &ib);
                let slot = out.entry((s + t, a - s + b - t, *m)).or_insert_with(c_zero);
                *slot = c_add(slot, &term);
            }
        }
    }
    out.retain(|_, v| !c_is_zero(v));
    out
}
