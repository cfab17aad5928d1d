//! Wire formats: vectors, move traces, nodal-cycle lists and reports.
//!
//! A vector is either JSON, `{"r": 2, "c1": [..10..], "s": 0, "kappa": 1}`
//! (with `"a"` accepted in place of `"s"`, `s = −2a`), or the bracket form
//! `[r; d1,d2,e1,…,e8; s; kappa]` where `…` pads the class with zeros.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::existence::ExistenceVerdict;
use crate::lattice::{E8Vector, MukaiVector, NSClass, NS_RANK};
use crate::moves::{Move, MoveKind, MoveTrace, Snapshot};
use crate::reduction::CanonicalForm;

/// A parsed vector and whether its torsion bit was given explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParsedVector {
    pub vector: MukaiVector,
    pub kappa_given: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorWire {
    r: i64,
    c1: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kappa: Option<u8>,
}

fn class_from(coords: &[i64], kappa: bool) -> Result<NSClass> {
    let arr: [i64; NS_RANK] = coords.try_into().map_err(|_| {
        Error::Input(format!(
            "expected {NS_RANK} coordinates, got {}",
            coords.len()
        ))
    })?;
    Ok(NSClass::from_coords(arr).with_kappa(kappa))
}

fn kappa_from(k: Option<u8>) -> Result<(bool, bool)> {
    match k {
        None => Ok((false, false)),
        Some(0) => Ok((false, true)),
        Some(1) => Ok((true, true)),
        Some(x) => Err(Error::Input(format!("kappa must be 0 or 1, got {x}"))),
    }
}

/// `s = −2a` for `a` given as an integer, a half-integer number, or `"p/q"`.
fn s_from_a(a: &Value) -> Result<i64> {
    let bad = || {
        Error::Input(format!(
            "cannot read χ-slot a = {a}; need an integer, half-integer or \"p/q\""
        ))
    };
    let (num, den): (i64, i64) = match a {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                (i, 1)
            } else {
                let f = n.as_f64().ok_or_else(bad)?;
                let twice = f * 2.0;
                if twice.fract() != 0.0 || twice.abs() > 2f64.powi(52) {
                    return Err(bad());
                }
                (twice as i64, 2)
            }
        }
        Value::String(t) => {
            let (p, q) = t.split_once('/').unwrap_or((t.as_str(), "1"));
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q <= 0 {
                return Err(bad());
            }
            (p, q)
        }
        _ => return Err(bad()),
    };
    let twice = num.checked_mul(2).ok_or(Error::Overflow)?;
    if twice % den != 0 {
        return Err(Error::Input(format!(
            "a = {num}/{den} is not a half-integer"
        )));
    }
    (twice / den).checked_neg().ok_or(Error::Overflow)
}

fn vector_from_wire(w: &VectorWire) -> Result<ParsedVector> {
    let (kappa, kappa_given) = kappa_from(w.kappa)?;
    let c1 = class_from(&w.c1, kappa)?;
    let s = match (&w.s, &w.a) {
        (Some(s), None) => *s,
        (None, Some(a)) => s_from_a(a)?,
        (Some(_), Some(_)) => {
            return Err(Error::Input("give either \"s\" or \"a\", not both".into()))
        }
        (None, None) => return Err(Error::Input("missing \"s\" (or \"a\")".into())),
    };
    Ok(ParsedVector {
        vector: MukaiVector::new(w.r, c1, s)?,
        kappa_given,
    })
}

fn vector_to_wire(v: &MukaiVector) -> VectorWire {
    VectorWire {
        r: v.r(),
        c1: v.c1().coords().to_vec(),
        s: Some(v.s()),
        a: None,
        kappa: Some(u8::from(v.kappa())),
    }
}

pub fn vector_to_json(v: &MukaiVector) -> Value {
    serde_json::to_value(vector_to_wire(v)).expect("vector serializes")
}

fn parse_int(t: &str) -> Result<i64> {
    t.trim()
        .parse()
        .map_err(|_| Error::Input(format!("not an integer: {t:?}")))
}

/// Expand `d1,d2,…` style coordinates; one ellipsis pads with zeros.
fn parse_coords(text: &str) -> Result<[i64; NS_RANK]> {
    let text = text.replace("...", "…");
    let (head, tail) = match text.split_once('…') {
        Some((h, t)) => {
            if t.contains('…') {
                return Err(Error::Input("at most one ellipsis in a class".into()));
            }
            (h.to_string(), Some(t.to_string()))
        }
        None => (text.clone(), None),
    };
    let ints = |part: &str| -> Result<Vec<i64>> {
        part.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(parse_int)
            .collect()
    };
    let front = ints(&head)?;
    let back = match &tail {
        Some(t) => ints(t)?,
        None => Vec::new(),
    };
    let used = front.len() + back.len();
    if used > NS_RANK || (tail.is_none() && used != NS_RANK) {
        return Err(Error::Input(format!(
            "expected {NS_RANK} coordinates in {text:?}"
        )));
    }
    let mut out = [0; NS_RANK];
    out[..front.len()].copy_from_slice(&front);
    out[NS_RANK - back.len()..].copy_from_slice(&back);
    Ok(out)
}

fn parse_bracket(text: &str) -> Result<ParsedVector> {
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| {
            Error::Input(format!(
                "bracket vector must look like [r; c1; s; kappa], got {text:?}"
            ))
        })?;
    let parts: Vec<&str> = inner.split(';').collect();
    if parts.len() != 3 && parts.len() != 4 {
        return Err(Error::Input(format!(
            "expected 3 or 4 ';'-separated fields, got {}",
            parts.len()
        )));
    }
    let r = parse_int(parts[0])?;
    let coords = parse_coords(parts[1])?;
    let s = parse_int(parts[2])?;
    let kappa = match parts.get(3) {
        Some(k) => Some(
            u8::try_from(parse_int(k)?).map_err(|_| Error::Input("kappa must be 0 or 1".into()))?,
        ),
        None => None,
    };
    let (kappa, kappa_given) = kappa_from(kappa)?;
    let c1 = NSClass::from_coords(coords).with_kappa(kappa);
    Ok(ParsedVector {
        vector: MukaiVector::new(r, c1, s)?,
        kappa_given,
    })
}

/// Parse JSON or bracket notation. An explicit `kappa_override` wins.
pub fn parse_vector(text: &str, kappa_override: Option<bool>) -> Result<ParsedVector> {
    let trimmed = text.trim();
    let mut parsed = if trimmed.starts_with('{') {
        let w: VectorWire =
            serde_json::from_str(trimmed).map_err(|e| Error::Input(format!("vector JSON: {e}")))?;
        vector_from_wire(&w)?
    } else {
        parse_bracket(trimmed)?
    };
    if let Some(k) = kappa_override {
        parsed.vector = parsed.vector.with_kappa(k);
        parsed.kappa_given = true;
    }
    Ok(parsed)
}

/// The `(r, s)` pair of an input, read without enforcing parity.
pub fn raw_rank_and_s(text: &str) -> Option<(i64, i64)> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        let w: VectorWire = serde_json::from_str(trimmed).ok()?;
        let s = match (&w.s, &w.a) {
            (Some(s), None) => *s,
            (None, Some(a)) => s_from_a(a).ok()?,
            _ => return None,
        };
        Some((w.r, s))
    } else {
        let inner = trimmed.strip_prefix('[')?.strip_suffix(']')?;
        let parts: Vec<&str> = inner.split(';').collect();
        Some((
            parse_int(parts.first()?).ok()?,
            parse_int(parts.get(2)?).ok()?,
        ))
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotWire {
    square: i64,
    ell: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum StepWire {
    Twist {
        #[serde(rename = "D")]
        d: [i64; NS_RANK],
        #[serde(rename = "kappaD", default)]
        kappa_d: u8,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        snapshot: Option<SnapshotWire>,
    },
    Reflect {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        snapshot: Option<SnapshotWire>,
    },
    HypChange {
        eta: [i64; 8],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        snapshot: Option<SnapshotWire>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceWire {
    initial: VectorWire,
    steps: Vec<StepWire>,
    #[serde(rename = "final")]
    result: VectorWire,
}

fn step_to_wire(m: &Move) -> StepWire {
    let snapshot = m.before.map(|s| SnapshotWire {
        square: s.square,
        ell: s.ell,
    });
    match m.kind {
        MoveKind::Twist(d) => StepWire::Twist {
            d: d.coords(),
            kappa_d: u8::from(d.kappa),
            snapshot,
        },
        MoveKind::Reflect => StepWire::Reflect { snapshot },
        MoveKind::HypChange(eta) => StepWire::HypChange {
            eta: eta.0,
            snapshot,
        },
    }
}

fn step_from_wire(w: &StepWire) -> Result<Move> {
    let snap = |s: &Option<SnapshotWire>| {
        s.map(|s| Snapshot {
            square: s.square,
            ell: s.ell,
        })
    };
    Ok(match w {
        StepWire::Twist {
            d,
            kappa_d,
            snapshot,
        } => {
            let (k, _) = kappa_from(Some(*kappa_d))?;
            Move {
                kind: MoveKind::Twist(NSClass::from_coords(*d).with_kappa(k)),
                before: snap(snapshot),
            }
        }
        StepWire::Reflect { snapshot } => Move {
            kind: MoveKind::Reflect,
            before: snap(snapshot),
        },
        StepWire::HypChange { eta, snapshot } => Move {
            kind: MoveKind::HypChange(E8Vector(*eta)),
            before: snap(snapshot),
        },
    })
}

pub fn trace_to_json(t: &MoveTrace) -> Value {
    let w = TraceWire {
        initial: vector_to_wire(&t.initial),
        steps: t.steps.iter().map(step_to_wire).collect(),
        result: vector_to_wire(&t.result),
    };
    serde_json::to_value(w).expect("trace serializes")
}

/// A bare trace, or any object carrying one under `"trace"` (such as the
/// output of [`canonical_to_json`]).
pub fn parse_trace(text: &str) -> Result<MoveTrace> {
    let bad = |e: serde_json::Error| Error::Input(format!("trace JSON: {e}"));
    let mut value: Value = serde_json::from_str(text).map_err(bad)?;
    if let Some(inner) = value.get_mut("trace") {
        value = inner.take();
    }
    let w: TraceWire = serde_json::from_value(value).map_err(bad)?;
    Ok(MoveTrace {
        initial: vector_from_wire(&w.initial)?.vector,
        steps: w.steps.iter().map(step_from_wire).collect::<Result<_>>()?,
        result: vector_from_wire(&w.result)?.vector,
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CycleWire {
    Bare(Vec<i64>),
    Tagged {
        c1: Vec<i64>,
        #[serde(default)]
        kappa: Option<u8>,
    },
}

/// A JSON array of classes, each `[10 ints]` or `{"c1": [10 ints], "kappa": 0|1}`.
pub fn parse_nodal_cycles(text: &str) -> Result<Vec<NSClass>> {
    let items: Vec<CycleWire> =
        serde_json::from_str(text).map_err(|e| Error::Input(format!("nodal cycle list: {e}")))?;
    items
        .iter()
        .map(|c| match c {
            CycleWire::Bare(coords) => class_from(coords, false),
            CycleWire::Tagged { c1, kappa } => class_from(c1, kappa_from(*kappa)?.0),
        })
        .collect()
}

pub fn parse_class(coords: &[i64]) -> Result<NSClass> {
    class_from(coords, false)
}

pub fn canonical_to_json(form: &CanonicalForm) -> Value {
    serde_json::json!({
        "input": vector_to_json(&form.trace.initial),
        "canonical": vector_to_json(&form.vector),
        "ell": form.ell,
        "trace": trace_to_json(&form.trace),
    })
}

pub fn verdict_to_json(v: &ExistenceVerdict) -> Value {
    serde_json::to_value(v).expect("verdict serializes")
}

/// `a = −s/2` as a reduced fraction string.
pub fn chi_slot(s: i64) -> String {
    if s % 2 == 0 {
        format!("{}", -(s / 2))
    } else {
        format!("{}/2", -s)
    }
}

/// Numerical summary of a single vector.
pub fn analysis(v: &MukaiVector) -> Result<Value> {
    let classification = match v.classify_content() {
        Ok(c) => serde_json::json!({"ell": c.ell, "r_plus_s_mod4": c.r_plus_s_mod4}),
        Err(Error::NotPrimitive) => Value::String("not primitive".into()),
        Err(e) => return Err(e),
    };
    Ok(serde_json::json!({
        "vector": vector_to_json(v),
        "r": v.r(),
        "s": v.s(),
        "a": chi_slot(v.s()),
        "kappa": u8::from(v.kappa()),
        "ell": if v.is_zero() { Value::Null } else { v.content()?.into() },
        "square": v.square()?,
        "primitive": v.is_primitive(),
        "c1_parity_class": v.c1().parity_class(),
        "classification": classification,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moves::TraceBuilder;

    #[test]
    fn bracket_forms() {
        let p = parse_vector("[2;0…0;0;1]", None).unwrap();
        assert_eq!(
            p.vector,
            MukaiVector::new(2, NSClass::ZERO.with_kappa(true), 0).unwrap()
        );
        assert!(p.kappa_given);
        let p = parse_vector("[2;2,0,…;2]", None).unwrap();
        assert_eq!(p.vector.c1().coords()[0], 2);
        assert!(!p.kappa_given);
        let p = parse_vector("[4;1,1,0...;0]", None).unwrap();
        assert_eq!(p.vector.square().unwrap(), 2);
        let p = parse_vector("[1; 0,0,0,0,0,0,0,0,0,1; 1; 0]", None).unwrap();
        assert_eq!(p.vector.c1().e.0[7], 1);
        assert!(matches!(
            parse_vector("[1;0…;0]", None),
            Err(Error::Parity { .. })
        ));
        assert!(matches!(
            parse_vector("[1;0,0;1]", None),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            parse_vector("[1;0…;1;2]", None),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn json_forms() {
        let p = parse_vector(
            r#"{"r":2,"c1":[0,0,0,0,0,0,0,0,0,0],"s":0,"kappa":1}"#,
            None,
        )
        .unwrap();
        assert!(p.vector.kappa());
        let p = parse_vector(r#"{"r":0,"c1":[0,1,0,0,0,0,0,0,0,0],"a":1}"#, None).unwrap();
        assert_eq!(p.vector.s(), -2);
        let p = parse_vector(r#"{"r":1,"c1":[0,0,0,0,0,0,0,0,0,0],"a":"1/2"}"#, None).unwrap();
        assert_eq!(p.vector.s(), -1);
        let p = parse_vector(r#"{"r":1,"c1":[0,0,0,0,0,0,0,0,0,0],"a":-0.5}"#, Some(true)).unwrap();
        assert_eq!(p.vector.s(), 1);
        assert!(p.vector.kappa());
        assert!(matches!(
            parse_vector(r#"{"r":1,"c1":[0,0,0,0,0,0,0,0,0,0],"a":"1/3"}"#, None),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            parse_vector(r#"{"r":1,"c1":[0,0],"s":1}"#, None),
            Err(Error::Input(_))
        ));
        assert_eq!(
            raw_rank_and_s(r#"{"r":0,"c1":[0,1,0,0,0,0,0,0,0,0],"s":1}"#),
            Some((0, 1))
        );
        assert_eq!(raw_rank_and_s("[0;0…;1]"), Some((0, 1)));
    }

    #[test]
    fn vector_round_trip() {
        let v = MukaiVector::new(
            3,
            NSClass::from_coords([1, -2, 0, 0, 4, 0, 0, 0, 0, 1]).with_kappa(true),
            -5,
        )
        .unwrap();
        let text = vector_to_json(&v).to_string();
        assert_eq!(parse_vector(&text, None).unwrap().vector, v);
        assert_eq!(parse_vector(&v.to_string(), None).unwrap().vector, v);
    }

    #[test]
    fn trace_round_trip() {
        let v = MukaiVector::new(
            4,
            NSClass::sigma().checked_add(&NSClass::root(2)).unwrap(),
            6,
        )
        .unwrap();
        let mut tb = TraceBuilder::new(v);
        tb.twist(NSClass::root(3).with_kappa(true)).unwrap();
        tb.hyp_change(E8Vector::simple_root(5)).unwrap();
        tb.twist(NSClass::fiber()).unwrap();
        let t = tb.finish();
        let json = trace_to_json(&t);
        assert_eq!(json["steps"][0]["kind"], "twist");
        assert_eq!(json["steps"][0]["kappaD"], 1);
        assert_eq!(json["steps"][1]["kind"], "hyp_change");
        assert!(json.get("final").is_some());
        assert_eq!(parse_trace(&json.to_string()).unwrap(), t);

        let bare = r#"{"initial":{"r":2,"c1":[1,0,0,0,0,0,0,0,0,0],"s":0},
            "steps":[{"kind":"twist","D":[0,1,0,0,0,0,0,0,0,0]}],
            "final":{"r":2,"c1":[1,2,0,0,0,0,0,0,0,0],"s":-2}}"#;
        let t = parse_trace(bare).unwrap();
        assert_eq!(crate::moves::replay(&t).unwrap(), t.result);
        let wrapped = format!(r#"{{"ell": 1, "trace": {bare}}}"#);
        assert_eq!(parse_trace(&wrapped).unwrap(), t);
    }

    #[test]
    fn nodal_cycle_lists() {
        let cycles = parse_nodal_cycles(
            r#"[[0,0,1,0,0,0,0,0,0,0], {"c1":[1,0,1,0,0,0,0,0,0,0],"kappa":1}]"#,
        )
        .unwrap();
        assert_eq!(cycles.len(), 2);
        assert!(!cycles[0].kappa && cycles[1].kappa);
        assert!(parse_nodal_cycles("[[1,2]]").is_err());
    }

    #[test]
    fn analysis_examples() {
        let rep = analysis(&parse_vector("[2;0…0;0;1]", None).unwrap().vector).unwrap();
        assert_eq!(rep["ell"], 2);
        assert_eq!(rep["square"], 0);
        assert_eq!(rep["primitive"], true);
        let rep = analysis(&parse_vector("[2;2,0,…;2]", None).unwrap().vector).unwrap();
        assert_eq!(rep["primitive"], false);
        assert_eq!(rep["classification"], "not primitive");
        let rep = analysis(&parse_vector("[4;1,1,0…;0]", None).unwrap().vector).unwrap();
        assert_eq!(
            (rep["ell"].as_i64(), rep["square"].as_i64()),
            (Some(1), Some(2))
        );
        assert_eq!(chi_slot(-1), "1/2");
        assert_eq!(chi_slot(4), "-2");
    }
}
