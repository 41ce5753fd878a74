//! JSON documents for curves and scenarios.
//!
//! ```json
//! {"type":"concave","segments":[{"rate":1.0,"burst":1.0}]}
//! {"type":"convex","segments":[{"rate":3.0,"latency":0.0}]}
//! {"seed":1,"foi":<concave>,"cross":[<concave>,...],"beta":<convex>}
//! ```
//!
//! Curves are normalized on load.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::curve::{normalize_concave, normalize_convex, ConcaveCurve, ConvexCurve, RateLatency, TokenBucket};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CurveDoc {
    Concave { segments: Vec<TokenBucket> },
    Convex { segments: Vec<RateLatency> },
}

impl CurveDoc {
    pub fn from_concave(c: &ConcaveCurve) -> Self {
        CurveDoc::Concave { segments: c.segments().to_vec() }
    }

    pub fn from_convex(c: &ConvexCurve) -> Self {
        CurveDoc::Convex { segments: c.segments().to_vec() }
    }

    fn concave(&self, field: &str) -> Result<ConcaveCurve> {
        match self {
            CurveDoc::Concave { segments } => {
                normalize_concave(segments).map_err(|e| parse_error(format!("{field}.segments"), e))
            }
            CurveDoc::Convex { .. } => {
                Err(Error::Parse { field: field.into(), message: "expected a concave curve".into() })
            }
        }
    }

    fn convex(&self, field: &str) -> Result<ConvexCurve> {
        match self {
            CurveDoc::Convex { segments } => {
                normalize_convex(segments).map_err(|e| parse_error(format!("{field}.segments"), e))
            }
            CurveDoc::Concave { .. } => {
                Err(Error::Parse { field: field.into(), message: "expected a convex curve".into() })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default)]
    pub seed: u64,
    pub foi: CurveDoc,
    pub cross: Vec<CurveDoc>,
    pub beta: CurveDoc,
}

/// Scenario with curves kept as raw JSON so their errors carry full paths.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    seed: u64,
    foi: Value,
    cross: Vec<Value>,
    beta: Value,
}

fn parse_error(field: String, e: Error) -> Error {
    let message = match e {
        Error::Argument(m) => m,
        other => other.to_string(),
    };
    Error::Parse { field, message }
}

fn join(prefix: &str, path: &str) -> String {
    match path {
        "." | "?" if prefix.is_empty() => "<root>".to_string(),
        p if prefix.is_empty() => p.to_string(),
        "." => prefix.to_string(),
        p if p.starts_with('[') => format!("{prefix}{p}"),
        p => format!("{prefix}.{p}"),
    }
}

fn deserialize_at<'de, T, D>(de: D, prefix: &str) -> Result<T>
where
    T: Deserialize<'de>,
    D: serde::Deserializer<'de, Error = serde_json::Error>,
{
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = join(prefix, &e.path().to_string());
        Error::Parse { field, message: e.into_inner().to_string() }
    })
}

fn curve_doc(v: &Value, field: &str) -> Result<CurveDoc> {
    let Some(obj) = v.as_object() else {
        return Err(Error::Parse { field: field.into(), message: "expected a curve object".into() });
    };
    if let Some(key) = obj.keys().find(|k| *k != "type" && *k != "segments") {
        return Err(Error::Parse { field: format!("{field}.{key}"), message: "unknown field".into() });
    }
    let segments = obj.get("segments").ok_or_else(|| Error::Parse {
        field: format!("{field}.segments"),
        message: "missing field `segments`".into(),
    })?;
    let at = format!("{field}.segments");
    match obj.get("type").and_then(Value::as_str) {
        Some("concave") => Ok(CurveDoc::Concave { segments: deserialize_at(segments, &at)? }),
        Some("convex") => Ok(CurveDoc::Convex { segments: deserialize_at(segments, &at)? }),
        _ => Err(Error::Parse { field: format!("{field}.type"), message: "expected \"concave\" or \"convex\"".into() }),
    }
}

pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    let raw: RawScenario = deserialize_at(&mut serde_json::Deserializer::from_str(text), "")?;
    let cross = raw
        .cross
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let field = format!("cross[{i}]");
            curve_doc(c, &field)?.concave(&field)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Scenario {
        foi: curve_doc(&raw.foi, "foi")?.concave("foi")?,
        cross_flows: cross,
        beta: curve_doc(&raw.beta, "beta")?.convex("beta")?,
        seed: raw.seed,
    })
}

pub fn scenario_to_doc(s: &Scenario) -> ScenarioDoc {
    ScenarioDoc {
        seed: s.seed,
        foi: CurveDoc::from_concave(&s.foi),
        cross: s.cross_flows.iter().map(CurveDoc::from_concave).collect(),
        beta: CurveDoc::from_convex(&s.beta),
    }
}

pub fn scenario_to_json(s: &Scenario) -> String {
    serde_json::to_string_pretty(&scenario_to_doc(s)).expect("plain data serializes")
}

fn curve_from_json(text: &str) -> Result<CurveDoc> {
    let v: Value = deserialize_at(&mut serde_json::Deserializer::from_str(text), "")?;
    curve_doc(&v, "<root>")
}

pub fn concave_from_json(text: &str) -> Result<ConcaveCurve> {
    curve_from_json(text)?.concave("<root>")
}

pub fn convex_from_json(text: &str) -> Result<ConvexCurve> {
    curve_from_json(text)?.convex("<root>")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_scenario, ScenarioConfig};

    const E1: &str = r#"{"seed":0,
        "foi":{"type":"concave","segments":[{"rate":1,"burst":1}]},
        "cross":[{"type":"concave","segments":[{"rate":1,"burst":1}]}],
        "beta":{"type":"convex","segments":[{"rate":3,"latency":0}]}}"#;

    fn field_of(text: &str) -> String {
        match scenario_from_json(text) {
            Err(Error::Parse { field, .. }) => field,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn loads_e1() {
        let s = scenario_from_json(E1).unwrap();
        assert_eq!(s.cross_flows.len(), 1);
        assert_eq!(s.beta.top_rate(), 3.0);
    }

    #[test]
    fn round_trip_generated() {
        let s = generate_scenario(&ScenarioConfig::new(4, 4, 99)).unwrap();
        assert_eq!(scenario_from_json(&scenario_to_json(&s)).unwrap(), s);
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(field_of(&E1.replace(r#""rate":3"#, r#""rate":"x""#)), "beta.segments[0].rate");
        assert_eq!(field_of(&E1.replace(r#"{"rate":1,"burst":1}]}]"#, r#"{"rate":1}]}]"#)), "cross[0].segments[0]");
        assert_eq!(field_of(&E1.replace(r#""type":"convex""#, r#""type":"concave""#)), "beta.segments[0]");
        let err = scenario_from_json(&E1.replace(r#""type":"convex""#, r#""type":"concave""#)).unwrap_err();
        assert!(err.to_string().contains("burst"), "{err}");
        assert_eq!(field_of(&E1.replace(r#""type":"convex""#, r#""type":"line""#)), "beta.type");
        assert_eq!(field_of(&E1.replace(r#""seed":0"#, r#""seed":0,"extra":1"#)), "extra");
        assert_eq!(field_of(&E1.replace(r#""rate":3"#, r#""rate":-3"#)), "beta.segments");
        assert_eq!(
            field_of(&E1.replace(r#""segments":[{"rate":1,"burst":1}]},"#, r#""segments":[]},"#)),
            "foi.segments"
        );
        assert_eq!(field_of(r#"{"seed":0}"#), "<root>");
        assert_eq!(field_of(r#"{"seed":0"#), "<root>");
    }

    #[test]
    fn single_curves() {
        let c =
            concave_from_json(r#"{"type":"concave","segments":[{"rate":1,"burst":4},{"rate":4,"burst":1}]}"#).unwrap();
        assert_eq!(c.breakpoints(), &[1.0]);
        assert!(convex_from_json(r#"{"type":"concave","segments":[{"rate":1,"burst":4}]}"#).is_err());
    }
}
