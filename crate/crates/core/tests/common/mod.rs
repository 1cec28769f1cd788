#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeMap;

use crnf_core::number::rat;
use crnf_core::{validate, FormalMap, GaussRat, HoloMonomial, HoloSeries, Hypersurface, Monomial, Rat, RealSeries};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = BTreeMap<(u32, u32, u32), Rat>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p/q` with `q ≤ 3` and `|p/q| ≤ 5`.
pub fn small_rat(r: &mut ChaCha8Rng) -> Rat {
    let q = r.gen_range(1..=3i64);
    let p = r.gen_range(-5 * q..=5 * q);
    rat(p, q)
}

pub fn nonzero_rat(r: &mut ChaCha8Rng) -> Rat {
    loop {
        let v = small_rat(r);
        if !v.is_zero() {
            return v;
        }
    }
}

pub fn gauss(r: &mut ChaCha8Rng) -> GaussRat {
    GaussRat::new(small_rat(r), small_rat(r))
}

/// A random monomial of weight in `k+1..=n` accepted by `keep`.
pub fn monomial<P: Fn(&Monomial) -> bool>(r: &mut ChaCha8Rng, k: u32, n: u32, keep: &P) -> Monomial {
    loop {
        let w = r.gen_range(k + 1..=n);
        let m = r.gen_range(0..=w / k);
        let rest = w - k * m;
        let j = r.gen_range(0..=rest);
        let mono = Monomial::new(j, rest - j, m);
        if keep(&mono) {
            return mono;
        }
    }
}

pub fn tail<P: Fn(&Monomial) -> bool>(r: &mut ChaCha8Rng, k: u32, n: u32, count: usize, keep: P) -> Vec<(Monomial, Rat)> {
    (0..count).map(|_| (monomial(r, k, n, &keep), nonzero_rat(r))).collect()
}

pub fn with_leading(k: u32, n: u32, tail: Vec<(Monomial, Rat)>) -> Hypersurface {
    let mut terms = vec![(Monomial::new(k, 0, 0), Rat::one())];
    terms.extend(tail);
    validate(RealSeries::from_terms(k, n, terms).unwrap(), k).unwrap()
}

pub fn random_h(r: &mut ChaCha8Rng, k: u32, n: u32, count: usize) -> Hypersurface {
    let t = tail(r, k, n, count, |_| true);
    with_leading(k, n, t)
}

pub fn is_t_condition(k: u32, mono: &Monomial) -> bool {
    [0, 1, k - 1, k].contains(&mono.j) || (mono.j == 2 * k - 1 && mono.l <= 1)
}

pub fn random_t_normal(r: &mut ChaCha8Rng, k: u32, n: u32, count: usize) -> Hypersurface {
    let t = tail(r, k, n, count, |mono| !is_t_condition(k, mono));
    with_leading(k, n, t)
}

/// Rigid t-normal form with at least one `y`-dependent term.
pub fn random_rigid_normal(r: &mut ChaCha8Rng, k: u32, n: u32, count: usize) -> Hypersurface {
    let keep = |mono: &Monomial| mono.m == 0 && ![0, 1, k - 1, k].contains(&mono.j);
    loop {
        let h = with_leading(k, n, tail(r, k, n, count, keep));
        if !h.is_tube() {
            return h;
        }
    }
}

pub fn random_nt_normal(r: &mut ChaCha8Rng, k: u32, n: u32, count: usize) -> Hypersurface {
    let keep = |mono: &Monomial| mono.l == 0 && ![0, k - 1, k, 2 * k - 1].contains(&mono.j);
    with_leading(k, n, tail(r, k, n, count, keep))
}

/// Univariate `F` with leading coefficient `lead`.
pub fn random_tube(r: &mut ChaCha8Rng, k: u32, n: u32, lead: Rat, count: usize) -> RealSeries {
    let mut terms = vec![(Monomial::new(k, 0, 0), lead)];
    for _ in 0..count {
        terms.push((Monomial::new(r.gen_range(k + 1..=n), 0, 0), small_rat(r)));
    }
    RealSeries::from_terms(k, n, terms).unwrap()
}

/// Random `(f, g)` with `count` terms in each component.
pub fn random_unipotent(r: &mut ChaCha8Rng, k: u32, n: u32, count: usize) -> FormalMap {
    let nf = n + 1 - k;
    let mut f = Vec::new();
    for _ in 0..count {
        let w = r.gen_range(2..=nf);
        let m = r.gen_range(0..=w / k);
        f.push((HoloMonomial::new(w - k * m, m), gauss(r)));
    }
    let mut g = Vec::new();
    for _ in 0..count {
        let w = r.gen_range(k + 1..=n);
        let m = r.gen_range(0..=w / k);
        g.push((HoloMonomial::new(w - k * m, m), gauss(r)));
    }
    let f = HoloSeries::from_terms(k, nf, f).unwrap();
    let g = HoloSeries::from_terms(k, n, g).unwrap();
    FormalMap::unipotent(k, n, f, g).unwrap()
}

pub fn dense(f: &RealSeries) -> Dense {
    f.iter().map(|(m, c)| ((m.j, m.l, m.m), c.clone())).collect()
}

pub fn from_dense(k: u32, n: u32, d: &Dense) -> RealSeries {
    RealSeries::from_terms(k, n, d.iter().map(|((j, l, m), c)| (Monomial::new(*j, *l, *m), c.clone()))).unwrap()
}

pub fn holo_dense(h: &HoloSeries) -> BTreeMap<(u32, u32), oracle::C> {
    h.iter().map(|(m, c)| ((m.j, m.m), (c.re.clone(), c.im.clone()))).collect()
}

pub fn oracle_map(t: &FormalMap) -> oracle::Map {
    assert!(t.linear().is_none(), "oracle maps are unipotent");
    oracle::Map { f: holo_dense(t.f()), g: holo_dense(t.g()) }
}

pub fn holo_from_dense(k: u32, n: u32, d: &BTreeMap<(u32, u32), oracle::C>) -> HoloSeries {
    HoloSeries::from_terms(
        k,
        n,
        d.iter().map(|((j, m), c)| (HoloMonomial::new(*j, *m), GaussRat::new(c.0.clone(), c.1.clone()))),
    )
    .unwrap()
}
