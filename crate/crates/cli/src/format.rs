//! Plain-text series and map files.
//!
//! A series file starts with a header `k=<int> N=<int> basis=<xyu|zzu>`
//! (optionally followed by `kind=<word>`) and then holds one record per
//! monomial: `j l m p/q` in the real basis or `j l m re im` in the complex
//! basis. A map file has the header `k=<int> N=<int>`, an `f` section and a
//! `g` section of `j m re im` records, and optionally a final line
//! `linear delta=<p/q> rot=<0..3>`. `#` starts a comment.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

use crnf_core::{
    BasisTag, ComplexSeries, FormalMap, GaussRat, HoloMonomial, HoloSeries, Hypersurface, LinearFactor, Monomial, QuarterTurn,
    Rat, RealSeries,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, message: message.into() })
}

/// `p/q` with a positive denominator, always written as a fraction.
pub fn frac(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn gauss(c: &GaussRat) -> String {
    format!("{} {}", frac(&c.re), frac(&c.im))
}

pub fn parse_rat(s: &str) -> Result<Rat, String> {
    Rat::from_str(s).map_err(|e| format!("bad number '{}': {}", s, e))
}

/// Non-empty lines with comments removed, numbered from one.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_u32(line: usize, s: &str, what: &str) -> Result<u32, ParseError> {
    s.parse().or_else(|_| err(line, format!("bad {} '{}'", what, s)))
}

fn header_fields<'a>(line: usize, text: &'a str, allowed: &[&str]) -> Result<Vec<(&'a str, &'a str)>, ParseError> {
    let mut out = Vec::new();
    for token in text.split_whitespace() {
        let Some((key, value)) = token.split_once('=') else {
            return err(line, format!("expected key=value in header, found '{}'", token));
        };
        if !allowed.contains(&key) {
            return err(line, format!("unknown header key '{}'", key));
        }
        if out.iter().any(|(k, _)| *k == key) {
            return err(line, format!("header key '{}' given twice", key));
        }
        out.push((key, value));
    }
    Ok(out)
}

fn header_value<'a>(fields: &[(&str, &'a str)], key: &str) -> Option<&'a str> {
    fields.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

fn check_cap(line: usize, n: u32, max_weight: u32) -> Result<(), ParseError> {
    if n > max_weight {
        return err(line, format!("N = {} exceeds the weight cap {} (CRNF_MAX_WEIGHT)", n, max_weight));
    }
    Ok(())
}

#[derive(Clone, PartialEq, Debug)]
pub enum SeriesBody {
    Real(RealSeries),
    Complex(ComplexSeries),
}

#[derive(Clone, PartialEq, Debug)]
pub struct SeriesFile {
    pub kind: Option<String>,
    pub body: SeriesBody,
}

impl SeriesFile {
    pub fn basis(&self) -> BasisTag {
        match self.body {
            SeriesBody::Real(_) => BasisTag::Xyu,
            SeriesBody::Complex(_) => BasisTag::Zzu,
        }
    }

    pub fn hypersurface(&self) -> crnf_core::Result<Hypersurface> {
        match &self.body {
            SeriesBody::Real(f) => Hypersurface::new(f.clone(), BasisTag::Xyu),
            SeriesBody::Complex(c) => Hypersurface::from_complex(c),
        }
    }

    pub fn from_hypersurface(h: &Hypersurface, basis: BasisTag) -> SeriesFile {
        let body = match basis {
            BasisTag::Xyu => SeriesBody::Real(h.defining().clone()),
            BasisTag::Zzu => SeriesBody::Complex(h.complex()),
        };
        SeriesFile { kind: None, body }
    }

    pub fn parse(text: &str, max_weight: u32) -> Result<SeriesFile, ParseError> {
        let mut lines = content_lines(text);
        let Some((hl, header)) = lines.next() else {
            return err(0, "empty series file");
        };
        let fields = header_fields(hl, header, &["k", "N", "basis", "kind"])?;
        let k = parse_u32(hl, header_value(&fields, "k").ok_or(ParseError { line: hl, message: "missing k".into() })?, "k")?;
        let n = parse_u32(hl, header_value(&fields, "N").ok_or(ParseError { line: hl, message: "missing N".into() })?, "N")?;
        check_cap(hl, n, max_weight)?;
        let basis = match header_value(&fields, "basis") {
            Some("xyu") => BasisTag::Xyu,
            Some("zzu") => BasisTag::Zzu,
            Some(other) => return err(hl, format!("unknown basis '{}'", other)),
            None => return err(hl, "missing basis"),
        };
        let kind = header_value(&fields, "kind").map(str::to_string);
        let width = if basis == BasisTag::Xyu { 4 } else { 5 };
        let mut seen = HashSet::new();
        let mut terms = Vec::new();
        for (ln, line) in lines {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != width {
                return err(ln, format!("expected {} fields, found {}", width, tokens.len()));
            }
            let mono = Monomial::new(parse_u32(ln, tokens[0], "j")?, parse_u32(ln, tokens[1], "l")?, parse_u32(ln, tokens[2], "m")?);
            let weight = mono.j + mono.l + k * mono.m;
            if weight > n {
                return err(ln, format!("monomial ({} {} {}) has weight {} > N = {}", mono.j, mono.l, mono.m, weight, n));
            }
            if !seen.insert(mono) {
                return err(ln, format!("duplicate monomial ({} {} {})", mono.j, mono.l, mono.m));
            }
            let re = parse_rat(tokens[3]).or_else(|m| err(ln, m))?;
            let im = if width == 5 { parse_rat(tokens[4]).or_else(|m| err(ln, m))? } else { Rat::from_integer(0.into()) };
            terms.push((mono, GaussRat::new(re, im)));
        }
        let body = match basis {
            BasisTag::Xyu => SeriesBody::Real(RealSeries::from_terms(k, n, terms.into_iter().map(|(m, c)| (m, c.re))).or_else(|e| err(0, e.to_string()))?),
            BasisTag::Zzu => SeriesBody::Complex(ComplexSeries::from_terms(k, n, terms).or_else(|e| err(0, e.to_string()))?),
        };
        Ok(SeriesFile { kind, body })
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let (k, n) = match &self.body {
            SeriesBody::Real(f) => (f.k(), f.n()),
            SeriesBody::Complex(c) => (c.k(), c.n()),
        };
        write!(out, "k={} N={} basis={}", k, n, self.basis().as_str()).unwrap();
        if let Some(kind) = &self.kind {
            write!(out, " kind={}", kind).unwrap();
        }
        out.push('\n');
        let key = |m: &Monomial| (m.j + m.l + k * m.m, m.j, m.l, m.m);
        match &self.body {
            SeriesBody::Real(f) => {
                let mut terms: Vec<_> = f.iter().collect();
                terms.sort_by_key(|(m, _)| key(m));
                for (m, c) in terms {
                    writeln!(out, "{} {} {} {}", m.j, m.l, m.m, frac(c)).unwrap();
                }
            }
            SeriesBody::Complex(s) => {
                let mut terms: Vec<_> = s.iter().collect();
                terms.sort_by_key(|(m, _)| key(m));
                for (m, c) in terms {
                    writeln!(out, "{} {} {} {}", m.j, m.l, m.m, gauss(c)).unwrap();
                }
            }
        }
        out
    }
}

pub fn parse_map(text: &str, max_weight: u32) -> Result<FormalMap, ParseError> {
    let mut lines = content_lines(text);
    let Some((hl, header)) = lines.next() else {
        return err(0, "empty map file");
    };
    let fields = header_fields(hl, header, &["k", "N"])?;
    let k = parse_u32(hl, header_value(&fields, "k").ok_or(ParseError { line: hl, message: "missing k".into() })?, "k")?;
    let n = parse_u32(hl, header_value(&fields, "N").ok_or(ParseError { line: hl, message: "missing N".into() })?, "N")?;
    check_cap(hl, n, max_weight)?;
    if n + 1 < k {
        return err(hl, "N is below k");
    }
    let nf = n + 1 - k;
    let mut section = None;
    let (mut f, mut g) = (Vec::new(), Vec::new());
    let mut seen = HashSet::new();
    let mut linear = LinearFactor::identity();
    let mut linear_seen = false;
    for (ln, line) in lines {
        match line {
            "f" | "g" => {
                section = Some(line == "f");
                continue;
            }
            _ => {}
        }
        if let Some(rest) = line.strip_prefix("linear") {
            if linear_seen {
                return err(ln, "linear factor given twice");
            }
            let fields = header_fields(ln, rest, &["delta", "rot"])?;
            let delta = match header_value(&fields, "delta") {
                Some(d) => parse_rat(d).or_else(|m| err(ln, m))?,
                None => return err(ln, "missing delta"),
            };
            let rot = match header_value(&fields, "rot") {
                Some(r @ ("0" | "1" | "2" | "3")) => r.parse::<u8>().unwrap(),
                Some(r) => return err(ln, format!("rot must be 0..3, found '{}'", r)),
                None => 0,
            };
            linear = LinearFactor::new(delta, QuarterTurn::new(rot)).or_else(|e| err(ln, e.to_string()))?;
            linear_seen = true;
            continue;
        }
        let Some(is_f) = section else {
            return err(ln, "record outside an f or g section");
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 4 {
            return err(ln, format!("expected 4 fields, found {}", tokens.len()));
        }
        let mono = HoloMonomial::new(parse_u32(ln, tokens[0], "j")?, parse_u32(ln, tokens[1], "m")?);
        let weight = mono.j + k * mono.m;
        let cap = if is_f { nf } else { n };
        if weight > cap {
            return err(ln, format!("{} term z^{} w^{} has weight {} > {}", if is_f { "f" } else { "g" }, mono.j, mono.m, weight, cap));
        }
        if !seen.insert((is_f, mono)) {
            return err(ln, format!("duplicate monomial ({} {})", mono.j, mono.m));
        }
        let c = GaussRat::new(parse_rat(tokens[2]).or_else(|m| err(ln, m))?, parse_rat(tokens[3]).or_else(|m| err(ln, m))?);
        if is_f { &mut f } else { &mut g }.push((mono, c));
    }
    let f = HoloSeries::from_terms(k, nf, f).or_else(|e| err(0, e.to_string()))?;
    let g = HoloSeries::from_terms(k, n, g).or_else(|e| err(0, e.to_string()))?;
    FormalMap::new(k, n, f, g, linear).or_else(|e| err(0, e.to_string()))
}

pub fn serialize_map(t: &FormalMap) -> String {
    let k = t.k();
    let mut out = format!("k={} N={}\n", k, t.n());
    for (name, s) in [("f", t.f()), ("g", t.g())] {
        out.push_str(name);
        out.push('\n');
        let mut terms: Vec<_> = s.iter().collect();
        terms.sort_by_key(|(m, _)| (m.j + k * m.m, m.j, m.m));
        for (m, c) in terms {
            writeln!(out, "{} {} {}", m.j, m.m, gauss(c)).unwrap();
        }
    }
    if let Some(l) = t.linear() {
        writeln!(out, "linear delta={} rot={}", frac(l.delta()), l.rotation().index()).unwrap();
    }
    out
}
