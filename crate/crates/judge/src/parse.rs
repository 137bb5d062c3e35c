//! Extraction and validation of the structured object in a model reply.

use graphsim_core::Choice;
use graphsim_harness::{Placement, Triplet};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Slot {
    T1,
    T2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub selected: Slot,
    pub rationale: String,
    pub confidence: u8,
    pub criteria: [i8; 6],
    /// Filled in by the caller that timed the request.
    pub latency_ms: Option<u64>,
    pub raw_payload: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("no JSON object in reply")]
    NoObject,
    #[error("missing field {0}")]
    MissingField(&'static str),
    #[error("{field}: {message}")]
    Constraint { field: &'static str, message: String },
    #[error("unknown selection {0:?}")]
    UnknownSelection(String),
}

/// Every top-level JSON object embedded in `raw`, in order of appearance.
fn objects(raw: &str) -> impl Iterator<Item = Map<String, Value>> + '_ {
    raw.char_indices().filter(|&(_, c)| c == '{').filter_map(move |(i, _)| {
        let mut stream = serde_json::Deserializer::from_str(&raw[i..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(Value::Object(map))) => Some(map),
            _ => None,
        }
    })
}

fn field<'a>(map: &'a Map<String, Value>, names: &[&str]) -> Option<&'a Value> {
    names.iter().find_map(|n| map.iter().find(|(k, _)| k.trim().eq_ignore_ascii_case(n)).map(|(_, v)| v))
}

fn slot(v: &Value) -> Result<Slot, ParseError> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Array(items) if items.len() == 1 => return slot(&items[0]),
        other => return Err(ParseError::UnknownSelection(other.to_string())),
    };
    let norm: String = text.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_uppercase();
    match norm.as_str() {
        "T1" | "TARGET1" | "TARGETGRAPH1" => Ok(Slot::T1),
        "T2" | "TARGET2" | "TARGETGRAPH2" => Ok(Slot::T2),
        _ => Err(ParseError::UnknownSelection(text)),
    }
}

fn integer(v: &Value) -> Option<i64> {
    match v {
        Value::Number(n) => n.as_i64().or_else(|| n.as_f64().filter(|f| f.fract() == 0.0).map(|f| f as i64)),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn response_from(map: &Map<String, Value>, raw: &str) -> Result<ModelResponse, ParseError> {
    let selected = slot(field(map, &["selected", "decision"]).ok_or(ParseError::MissingField("selected"))?)?;
    let rationale = match field(map, &["rationale"]) {
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
        None => return Err(ParseError::MissingField("rationale")),
    };
    let conf_value = field(map, &["confidence"]).ok_or(ParseError::MissingField("confidence"))?;
    let confidence = integer(conf_value)
        .filter(|c| (1..=5).contains(c))
        .ok_or_else(|| ParseError::Constraint { field: "confidence", message: format!("{conf_value} is not an integer in 1..=5") })?
        as u8;
    let crit_value = field(map, &["features", "criteria"]).ok_or(ParseError::MissingField("features"))?;
    let items = crit_value.as_array().ok_or_else(|| ParseError::Constraint { field: "features", message: "not an array".into() })?;
    if items.len() != 6 {
        return Err(ParseError::Constraint { field: "features", message: format!("length {} instead of 6", items.len()) });
    }
    let mut criteria = [0i8; 6];
    for (slot, v) in criteria.iter_mut().zip(items) {
        *slot = integer(v)
            .filter(|x| (-1..=1).contains(x))
            .ok_or_else(|| ParseError::Constraint { field: "features", message: format!("{v} is not in {{-1, 0, 1}}") })?
            as i8;
    }
    Ok(ModelResponse { selected, rationale, confidence, criteria, latency_ms: None, raw_payload: raw.to_string() })
}

/// Parses the first JSON object that carries a selection; later objects are ignored.
pub fn parse_response(raw: &str) -> Result<ModelResponse, ParseError> {
    let mut first_error = None;
    for map in objects(raw) {
        if field(&map, &["selected", "decision"]).is_none() {
            continue;
        }
        match response_from(&map, raw) {
            Ok(r) => return Ok(r),
            Err(e) => {
                first_error.get_or_insert(e);
                break;
            }
        }
    }
    Err(first_error.unwrap_or(ParseError::NoObject))
}

/// Maps the on-screen slot back to the stored target.
pub fn slot_to_choice(slot: Slot, placement: &Placement, triplet: &Triplet) -> Choice {
    let id = match slot {
        Slot::T1 => &placement.left_id,
        Slot::T2 => &placement.right_id,
    };
    if *id == triplet.target_a_id {
        Choice::TargetA
    } else {
        Choice::TargetB
    }
}
