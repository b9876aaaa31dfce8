//! JSON documents for windows, patches and frequency families.
//!
//! Output is written by hand so field order and number formatting are fixed:
//! every real number carries 17 significant digits, which round-trips `f64`
//! exactly, so export → import → export is byte-identical.

use serde_json::{Map, Value};

use crate::dpv::DpvKind;
use crate::error::{IlcError, Result};
use crate::geometry::{validate_patch, Aabb, Label, Patch, Provenance, Tile, TilingWindow, GEOM_TOL};
use crate::measures::TrimSet;
use crate::solenoid::SolLabel;

/// `f64` with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn nums(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| num(x)).collect();
    format!("[{}]", parts.join(","))
}

fn boxed(b: &Aabb) -> String {
    format!("[{},{}]", nums(b.lo()), nums(b.hi()))
}

fn label_json(l: &Label) -> String {
    match l {
        Label::Length(x) => num(*x),
        Label::Dpv(k) => format!("\"{}\"", k.name()),
        Label::Sol(SolLabel::Int(n)) => format!("{{\"sol\":{n}}}"),
        Label::Sol(s @ SolLabel::Limit(_)) => format!("{{\"sol\":\"{s}\"}}"),
        Label::Symbol(n) => format!("{{\"sym\":{n}}}"),
    }
}

fn tiles_json(p: &Patch) -> String {
    let parts: Vec<String> = p
        .tiles()
        .iter()
        .map(|t| {
            format!(
                "{{\"label\":{},\"support\":{},\"control\":{}}}",
                label_json(&t.label),
                boxed(&t.support),
                nums(t.control())
            )
        })
        .collect();
    format!("[{}]", parts.join(","))
}

fn provenance_json(p: &Provenance) -> String {
    let params: Vec<String> = p
        .params
        .iter()
        .map(|(k, v)| format!("{}:{}", Value::String(k.clone()), num(*v)))
        .collect();
    let extents: Vec<String> = p.extents.iter().map(boxed).collect();
    format!(
        "{{\"system\":{},\"params\":{{{}}},\"iterations\":{},\"anchor\":{},\"extents\":[{}]}}",
        Value::String(p.system.clone()),
        params.join(","),
        p.iterations,
        nums(&p.anchor),
        extents.join(",")
    )
}

/// `{"tiles":[…],"window":[[lo],[hi]],"provenance":{…}}` on one line.
pub fn window_to_json(w: &TilingWindow) -> String {
    format!(
        "{{\"tiles\":{},\"window\":{},\"provenance\":{}}}",
        tiles_json(&w.patch),
        boxed(&w.window),
        provenance_json(&w.provenance)
    )
}

fn cfg(path: &str, what: impl std::fmt::Display) -> IlcError {
    IlcError::Config(format!("{path}: {what}"))
}

fn parse_value(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| IlcError::Config(format!("line {}, column {}: {e}", e.line(), e.column())))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| cfg(path, "expected a number"))
}

fn as_f64s(v: &Value, path: &str) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| cfg(path, "expected an array of numbers"))?
        .iter()
        .enumerate()
        .map(|(i, x)| as_f64(x, &format!("{path}[{i}]")))
        .collect()
}

fn as_box(v: &Value, path: &str) -> Result<Aabb> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| cfg(path, "expected [[lo...],[hi...]]"))?;
    let lo = as_f64s(&pair[0], &format!("{path}[0]"))?;
    let hi = as_f64s(&pair[1], &format!("{path}[1]"))?;
    Aabb::new(&lo, &hi).map_err(|e| cfg(path, e))
}

fn as_label(v: &Value, path: &str) -> Result<Label> {
    match v {
        Value::Number(n) => Ok(Label::Length(n.as_f64().ok_or_else(|| cfg(path, "bad number"))?)),
        Value::String(s) => match s.as_str() {
            "A" => Ok(Label::Dpv(DpvKind::A)),
            "B" => Ok(Label::Dpv(DpvKind::B)),
            _ => Err(cfg(path, format!("unknown label {s:?}"))),
        },
        Value::Object(m) => {
            if let Some(s) = m.get("sol") {
                let text = match s {
                    Value::Number(n) => n.to_string(),
                    Value::String(t) => t.clone(),
                    _ => return Err(cfg(path, "\"sol\" must be an integer or \"infK\"")),
                };
                return text.parse().map(Label::Sol).map_err(|e| cfg(path, e));
            }
            if let Some(s) = m.get("sym") {
                let n = s
                    .as_u64()
                    .and_then(|n| u32::try_from(n).ok())
                    .ok_or_else(|| cfg(path, "\"sym\" must be a nonnegative integer"))?;
                return Ok(Label::Symbol(n));
            }
            Err(cfg(path, "label object needs \"sol\" or \"sym\""))
        }
        _ => Err(cfg(path, "unrecognized label")),
    }
}

fn as_tiles(v: &Value, path: &str) -> Result<Vec<Tile>> {
    let arr = v.as_array().ok_or_else(|| cfg(path, "expected an array of tiles"))?;
    arr.iter()
        .enumerate()
        .map(|(i, t)| {
            let p = format!("{path}[{i}]");
            let obj = t.as_object().ok_or_else(|| cfg(&p, "expected a tile object"))?;
            let field = |k: &str| obj.get(k).ok_or_else(|| cfg(&p, format!("missing \"{k}\"")));
            let label = as_label(field("label")?, &format!("{p}.label"))?;
            let support = as_box(field("support")?, &format!("{p}.support"))?;
            match obj.get("control") {
                Some(c) => {
                    let c = as_f64s(c, &format!("{p}.control"))?;
                    Tile::new(label, support, &c).map_err(|e| cfg(&format!("{p}.control"), e))
                }
                None => Ok(Tile::at_lower_corner(label, support)),
            }
        })
        .collect()
}

fn as_provenance(v: &Value, dim: usize) -> Result<Provenance> {
    let path = "provenance";
    let obj = v.as_object().ok_or_else(|| cfg(path, "expected an object"))?;
    let mut p = Provenance {
        anchor: vec![0.0; dim],
        ..Provenance::default()
    };
    if let Some(s) = obj.get("system") {
        p.system = s
            .as_str()
            .ok_or_else(|| cfg("provenance.system", "expected a string"))?
            .to_string();
    }
    if let Some(params) = obj.get("params") {
        let m: &Map<String, Value> = params
            .as_object()
            .ok_or_else(|| cfg("provenance.params", "expected an object"))?;
        for (k, x) in m {
            p.params
                .push((k.clone(), as_f64(x, &format!("provenance.params.{k}"))?));
        }
    }
    if let Some(n) = obj.get("iterations") {
        p.iterations = n
            .as_u64()
            .and_then(|n| u32::try_from(n).ok())
            .ok_or_else(|| cfg("provenance.iterations", "expected a nonnegative integer"))?;
    }
    if let Some(a) = obj.get("anchor") {
        p.anchor = as_f64s(a, "provenance.anchor")?;
    }
    if let Some(e) = obj.get("extents") {
        let arr = e
            .as_array()
            .ok_or_else(|| cfg("provenance.extents", "expected an array"))?;
        for (i, b) in arr.iter().enumerate() {
            p.extents.push(as_box(b, &format!("provenance.extents[{i}]"))?);
        }
    }
    Ok(p)
}

fn window_from_value(v: &Value) -> Result<TilingWindow> {
    let obj = v.as_object().ok_or_else(|| cfg("document", "expected an object"))?;
    let tiles = as_tiles(
        obj.get("tiles").ok_or_else(|| cfg("document", "missing \"tiles\""))?,
        "tiles",
    )?;
    let patch = validate_patch(tiles, GEOM_TOL)?;
    let window = match obj.get("window") {
        Some(w) => as_box(w, "window")?,
        None => patch.bounding_box().expect("validated patches are nonempty"),
    };
    let provenance = match obj.get("provenance") {
        Some(p) => as_provenance(p, patch.dim())?,
        None => Provenance {
            system: patch.tiles()[0].label.system().name().to_string(),
            anchor: vec![0.0; patch.dim()],
            ..Provenance::default()
        },
    };
    TilingWindow::new(patch, window, provenance)
}

/// Reads a window document. `window` defaults to the bounding box of the
/// tiles and `provenance` to an empty record; tile `control` defaults to the
/// lower corner.
pub fn window_from_json(text: &str) -> Result<TilingWindow> {
    window_from_value(&parse_value(text)?)
}

/// Reads a frequency family:
/// `{"kind":"length_range","lo":..,"hi":..}`, `{"kind":"label","label":..}`
/// or `{"kind":"patch","eps":..,"tiles":[…]}`.
pub fn family_from_json(text: &str) -> Result<TrimSet> {
    let v = parse_value(text)?;
    let obj = v.as_object().ok_or_else(|| cfg("family", "expected an object"))?;
    let field = |k: &str| obj.get(k).ok_or_else(|| cfg("family", format!("missing \"{k}\"")));
    let kind = field("kind")?
        .as_str()
        .ok_or_else(|| cfg("family.kind", "expected a string"))?;
    match kind {
        "length_range" => {
            let lo = as_f64(field("lo")?, "family.lo")?;
            let hi = as_f64(field("hi")?, "family.hi")?;
            if lo > hi {
                return Err(cfg("family", "lo exceeds hi"));
            }
            Ok(TrimSet::LengthRange { lo, hi })
        }
        "label" => Ok(TrimSet::Label(as_label(field("label")?, "family.label")?)),
        "patch" => {
            let eps = as_f64(field("eps")?, "family.eps")?;
            let tiles = as_tiles(field("tiles")?, "family.tiles")?;
            Ok(TrimSet::Patch {
                base: validate_patch(tiles, GEOM_TOL)?,
                eps,
            })
        }
        other => Err(cfg("family.kind", format!("unknown kind {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpv::{dpv_window, DpvParams, DpvRule};
    use crate::solenoid::{toeplitz_fill, CompactificationSpec};
    use crate::subst1d::iterate;

    fn round_trip(w: &TilingWindow) {
        let text = window_to_json(w);
        let back = window_from_json(&text).unwrap();
        assert_eq!(&back, w);
        assert_eq!(window_to_json(&back), text);
    }

    #[test]
    fn round_trips_every_system() {
        round_trip(&iterate(1.625, 6).unwrap().window_at(3).unwrap());
        round_trip(&dpv_window(DpvKind::B, 3, &DpvParams::natural(), DpvRule::Varied).unwrap());
        round_trip(&toeplitz_fill(-8, 8, None, &CompactificationSpec::one_point()).unwrap());
    }

    #[test]
    fn number_format() {
        assert_eq!(num(1.5), "1.5000000000000000e0");
        assert_eq!(num(-0.1), "-1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn minimal_documents() {
        let w = window_from_json(
            r#"{"tiles":[{"label":{"sym":0},"support":[[0],[1]]},{"label":{"sym":1},"support":[[1],[2]]}]}"#,
        )
        .unwrap();
        assert_eq!(w.window, Aabb::interval(0.0, 2.0));
        assert_eq!(w.provenance.system, "symbolic");
        let l = window_from_json(r#"{"tiles":[{"label":{"sol":"inf1"},"support":[[0],[1]]}]}"#).unwrap();
        assert_eq!(l.patch.tiles()[0].label, Label::Sol(SolLabel::Limit(1)));
    }

    #[test]
    fn diagnostics_name_the_field() {
        let e = window_from_json(r#"{"tiles":[{"label":"C","support":[[0],[1]]}]}"#).unwrap_err();
        assert!(e.to_string().contains("tiles[0].label"), "{e}");
        let e = window_from_json("{\n\"tiles\": [,]}").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = window_from_json(r#"{"tiles":[{"label":1.0,"support":[[0],[1]]},{"label":1.0,"support":[[3],[4]]}]}"#)
            .unwrap_err();
        assert!(matches!(e, IlcError::Disconnected { .. }));
    }

    #[test]
    fn families() {
        assert_eq!(
            family_from_json(r#"{"kind":"length_range","lo":1,"hi":2}"#).unwrap(),
            TrimSet::LengthRange { lo: 1.0, hi: 2.0 }
        );
        assert_eq!(
            family_from_json(r#"{"kind":"label","label":"A"}"#).unwrap(),
            TrimSet::Label(Label::Dpv(DpvKind::A))
        );
        assert!(matches!(
            family_from_json(r#"{"kind":"patch","eps":0.01,"tiles":[{"label":1.5,"support":[[0],[1.5]]}]}"#).unwrap(),
            TrimSet::Patch { .. }
        ));
        assert!(family_from_json(r#"{"kind":"blob"}"#).is_err());
    }
}
