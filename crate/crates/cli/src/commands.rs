use serde_json::{json, Map, Value};

use crnf_core::equivalence::TubeEquivalence;
use crnf_core::hypersurface::prenormalize_tube;
use crnf_core::normalize::NormalizationResult;
use crnf_core::{
    check, classify_aut, nt_normalize, pushforward, rigid_normalize, t_normalize, tube_equivalent, BasisTag, Error,
    Hypersurface, NormalFormKind, Rat,
};

use crate::format::{frac, parse_map, SeriesBody, SeriesFile};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILS: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

/// Ordered key/value report rendered either as text or as JSON.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub code: u8,
    pub fields: Vec<(String, Value)>,
}

impl Report {
    fn new(code: u8) -> Report {
        Report { code, fields: Vec::new() }
    }

    fn with(mut self, key: &str, value: impl Into<Value>) -> Report {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn error(code: u8, message: impl Into<String>) -> Report {
        Report::new(code).with("error", message.into())
    }

    pub fn is_error(&self) -> bool {
        self.get("error").is_some()
    }

    /// Multi-line strings are printed verbatim, lists one item per line.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.fields {
            match value {
                Value::String(s) if s.contains('\n') => out.push_str(s),
                Value::Array(items) if items.is_empty() => out.push_str(&format!("{}: none\n", key)),
                Value::Array(items) => {
                    for item in items {
                        out.push_str(&format!("{}: {}\n", key, scalar(item)));
                    }
                }
                other => out.push_str(&format!("{}: {}\n", key, scalar(other))),
            }
        }
        out
    }

    pub fn json(&self) -> Value {
        let mut map = Map::new();
        for (key, value) in &self.fields {
            map.insert(key.clone(), value.clone());
        }
        Value::Object(map)
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

fn failure(e: &Error) -> Report {
    let code = if matches!(e, Error::Internal(_)) { EXIT_INTERNAL } else { EXIT_INPUT };
    Report::error(code, e.to_string())
}

/// Operation applied to each input series file.
#[derive(Clone, Debug)]
pub enum Action {
    Analyze,
    TNormal { targets: Option<(Rat, Rat)> },
    Rigid,
    Nt,
    Check { form: NormalFormKind },
    Apply { map: String },
    Classify,
    Prenormalize,
}

pub fn parse_form(name: &str, targets: Option<(Rat, Rat)>) -> Option<NormalFormKind> {
    Some(match name {
        "t" => match targets {
            Some((a, b)) => NormalFormKind::TNormalAB { a, b },
            None => NormalFormKind::TNormal,
        },
        "rigid" => NormalFormKind::RigidT,
        "nt" => NormalFormKind::Nontransversal,
        "stanton" => NormalFormKind::Stanton,
        "ko1-nontube" => NormalFormKind::Ko1NonTube,
        "ko1-tube" => NormalFormKind::Ko1Tube,
        "ko1-half" => NormalFormKind::Ko1HalfType,
        _ => return None,
    })
}

pub fn run(action: &Action, text: &str, max_weight: u32) -> Report {
    let file = match SeriesFile::parse(text, max_weight) {
        Ok(f) => f,
        Err(e) => return Report::error(EXIT_INPUT, e.to_string()),
    };
    let h = match file.hypersurface() {
        Ok(h) => h,
        Err(e) => return failure(&e),
    };
    let basis = file.basis();
    let outcome = match action {
        Action::Analyze => Ok(analyze(&h)),
        Action::TNormal { targets } => t_normalize(&h, targets.clone()).map(|r| normalized(&r, basis)),
        Action::Rigid => rigid_normalize(&h).map(|r| normalized(&r, basis)),
        Action::Nt => nt_normalize(&h).map(|r| normalized(&r, basis)),
        Action::Check { form } => check(&h, form).map(|v| {
            let lines: Vec<Value> = v.iter().map(|x| Value::String(violation(x))).collect();
            let code = if v.is_empty() { EXIT_OK } else { EXIT_FAILS };
            Report::new(code).with("form", form.name()).with("holds", v.is_empty()).with("violations", lines)
        }),
        Action::Apply { map } => match parse_map(map, max_weight) {
            Ok(t) => pushforward(&h, &t).map(|out| Report::new(EXIT_OK).with("series", SeriesFile::from_hypersurface(&out, basis).serialize())),
            Err(e) => return Report::error(EXIT_INPUT, format!("map file: {}", e)),
        },
        Action::Classify => classify_aut(&h).map(|c| {
            let evidence: Vec<Value> = c.evidence.iter().map(|g| Value::String(g.to_string())).collect();
            Report::new(EXIT_OK)
                .with("class", c.tag.to_string())
                .with("evidence", evidence)
                .with("normal_form", c.normal_form.map(|k| k.name().to_string()))
                .with("conditional", c.conditional)
        }),
        Action::Prenormalize => prenormalize_tube(h.defining()).map(|(out, record)| {
            Report::new(EXIT_OK)
                .with("rotation", record.rotation.index())
                .with("w_scale", frac(&record.w_scale))
                .with("harmonic", format!("{} {}", frac(&record.harmonic.re), frac(&record.harmonic.im)))
                .with("series", SeriesFile::from_hypersurface(&out, BasisTag::Xyu).serialize())
        }),
    };
    outcome.unwrap_or_else(|e| failure(&e))
}

fn violation(v: &crnf_core::normalize::Violation) -> String {
    let mut s = v.condition.clone();
    if let Some(m) = v.monomial {
        s.push_str(&format!(" at ({} {} {}) [{}]", m.j, m.l, m.m, v.basis.as_str()));
    }
    s.push_str(&format!(" = {} {}", frac(&v.value.re), frac(&v.value.im)));
    s
}

fn analyze(h: &Hypersurface) -> Report {
    let mut r = Report::new(EXIT_OK).with("k", h.k()).with("N", h.n()).with("basis", h.basis().as_str());
    match h.model_info() {
        Ok(info) => {
            r = r.with("e", info.e).with("L", info.l_invariant.map(Value::from).unwrap_or_else(|| "undefined".into()));
            r = match &info.tube {
                Some(t) => r
                    .with("model", "tube")
                    .with("tube_ratio", format!("{} {}", frac(&t.ratio.re), frac(&t.ratio.im)))
                    .with("tube_rotation", t.rotation.map(|q| q.index())),
                None => r.with("model", "non-tube"),
            };
        }
        Err(e) => r = r.with("e", Value::Null).with("L", Value::Null).with("model", e.to_string()),
    }
    r.with("rigid", h.is_rigid()).with("tube", h.is_tube()).with("y_free", h.is_y_free())
}

fn normalized(res: &NormalizationResult, basis: BasisTag) -> Report {
    let weights: Vec<Value> = res
        .per_weight_report
        .iter()
        .map(|w| Value::String(format!("{}: {} conditions, {} unknowns, rank {}", w.weight, w.conditions, w.unknowns, w.rank)))
        .collect();
    Report::new(EXIT_OK)
        .with("normal_form", SeriesFile::from_hypersurface(&res.h_normal, basis).serialize())
        .with("map", crate::format::serialize_map(&res.map))
        .with("weights", weights)
}

pub fn tube_equiv(a: &str, b: &str, max_weight: u32) -> Report {
    let parse = |text: &str| -> Result<_, Report> {
        match SeriesFile::parse(text, max_weight) {
            Ok(SeriesFile { body: SeriesBody::Real(f), .. }) => Ok(f),
            Ok(_) => Err(Report::error(EXIT_INPUT, "tube files must use basis=xyu")),
            Err(e) => Err(Report::error(EXIT_INPUT, e.to_string())),
        }
    };
    let (f, g) = match (parse(a), parse(b)) {
        (Ok(f), Ok(g)) => (f, g),
        (Err(r), _) | (_, Err(r)) => return r,
    };
    match tube_equivalent(&f, &g) {
        Ok(Some(TubeEquivalence { order, matches })) => {
            let witnesses: Vec<Value> = matches.iter().map(|m| Value::String(m.witness.to_string())).collect();
            Report::new(EXIT_OK).with("verdict", format!("EQUIVALENT(order {})", order)).with("witness", witnesses)
        }
        Ok(None) => Report::new(EXIT_FAILS).with("verdict", format!("INEQUIVALENT(order {})", f.n().min(g.n()))),
        Err(e) => failure(&e),
    }
}

/// Reports of a batch keyed by input name.
pub fn batch_json(items: &[(String, Report)]) -> Value {
    Value::Array(
        items
            .iter()
            .map(|(name, r)| {
                let mut v = r.json();
                v.as_object_mut().unwrap().insert("file".into(), json!(name));
                v
            })
            .collect(),
    )
}
