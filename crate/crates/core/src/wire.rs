//! JSON documents shared by the CLI, the HTTP service and the browser
//! demo. Labels travel as strings (`a`, `~a`, `sigma`, `tau`) and
//! horizons as 0 or 1.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::PredictionValue;
use crate::coherence::{CoherenceReport, Verdict, Violation, ViolationKind};
use crate::label::{Action, Horizon, Label, LabelSet};
use crate::lts::{Lts, Transition};
use crate::parser::parse_process;
use crate::semantics::{Blocking, StrategicLabel};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockingEntry {
    pub horizon: u8,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub h0: Vec<String>,
    pub h1: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TransitionDoc {
    pub index: usize,
    pub source: usize,
    pub action: String,
    pub blocking: Vec<BlockingEntry>,
    pub prediction: Prediction,
    pub target: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_term: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDoc {
    pub id: usize,
    pub term: String,
    #[serde(default = "yes")]
    pub expanded: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LtsDoc {
    pub initial: usize,
    pub complete: bool,
    pub states: Vec<StateDoc>,
    pub transitions: Vec<TransitionDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationDoc {
    pub kind: ViolationKind,
    pub state: usize,
    pub pair: [TransitionDoc; 2],
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoherenceDoc {
    pub verdict: Verdict,
    pub states_checked: usize,
    pub violations: Vec<ViolationDoc>,
}

fn labels_out(ls: &LabelSet) -> Vec<String> {
    let mut v: Vec<String> = ls.iter().map(ToString::to_string).collect();
    v.sort();
    v
}

fn labels_in(v: &[String]) -> Result<LabelSet, Error> {
    v.iter()
        .map(|s| Label::from_wire(s).ok_or_else(|| Error::Json(format!("bad label `{s}`"))))
        .collect()
}

pub fn label_doc(label: &StrategicLabel) -> (String, Vec<BlockingEntry>, Prediction) {
    let blocking = label
        .blocking
        .entries
        .iter()
        .map(|(h, ls)| BlockingEntry {
            horizon: h.as_u8(),
            labels: labels_out(ls),
        })
        .collect();
    let prediction = Prediction {
        h0: labels_out(&label.prediction.at_h0),
        h1: labels_out(&label.prediction.at_h1),
    };
    (label.action.to_string(), blocking, prediction)
}

pub fn label_from_doc(action: &str, blocking: &[BlockingEntry], prediction: &Prediction) -> Result<StrategicLabel, Error> {
    let action = Action::from_wire(action).ok_or_else(|| Error::Json(format!("bad action `{action}`")))?;
    let blocking = blocking
        .iter()
        .map(|e| {
            let h = match e.horizon {
                0 => Horizon::H0,
                1 => Horizon::H1,
                n => return Err(Error::Json(format!("bad horizon {n}"))),
            };
            Ok((h, labels_in(&e.labels)?))
        })
        .collect::<Result<Blocking, Error>>()?;
    let prediction = PredictionValue {
        at_h0: labels_in(&prediction.h0)?,
        at_h1: labels_in(&prediction.h1)?,
    };
    Ok(StrategicLabel {
        action,
        blocking,
        prediction,
    })
}

/// `index` is the position in whatever list the caller is serializing.
pub fn transition_doc(index: usize, t: &Transition, lts: Option<&Lts>) -> TransitionDoc {
    let (action, blocking, prediction) = label_doc(&t.label);
    TransitionDoc {
        index,
        source: t.source,
        action,
        blocking,
        prediction,
        target: t.target,
        target_term: lts.map(|l| l.states[t.target].to_string()),
    }
}

/// The transitions leaving `state`, numbered from zero.
pub fn outgoing_docs(lts: &Lts, state: usize) -> Vec<TransitionDoc> {
    lts.outgoing(state)
        .enumerate()
        .map(|(i, t)| transition_doc(i, t, Some(lts)))
        .collect()
}

pub fn lts_doc(lts: &Lts) -> LtsDoc {
    LtsDoc {
        initial: lts.initial,
        complete: lts.complete,
        states: lts
            .states
            .iter()
            .enumerate()
            .map(|(id, t)| StateDoc {
                id,
                term: t.to_string(),
                expanded: lts.expanded[id],
            })
            .collect(),
        transitions: lts
            .transitions
            .iter()
            .enumerate()
            .map(|(i, t)| transition_doc(i, t, None))
            .collect(),
    }
}

pub fn lts_from_doc(doc: &LtsDoc) -> Result<Lts, Error> {
    let n = doc.states.len();
    let mut states = Vec::with_capacity(n);
    let mut expanded = Vec::with_capacity(n);
    for (i, s) in doc.states.iter().enumerate() {
        if s.id != i {
            return Err(Error::Json(format!("state {} listed at position {i}", s.id)));
        }
        states.push(parse_process(&s.term).map_err(Error::Syntax)?);
        expanded.push(s.expanded);
    }
    let in_range = |id: usize| if id < n { Ok(id) } else { Err(Error::Json(format!("state {id} out of range"))) };
    let transitions = doc
        .transitions
        .iter()
        .map(|t| {
            Ok(Transition {
                source: in_range(t.source)?,
                label: label_from_doc(&t.action, &t.blocking, &t.prediction)?,
                target: in_range(t.target)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    if n > 0 {
        in_range(doc.initial)?;
    }
    Ok(Lts::assemble(states, transitions, doc.initial, doc.complete, expanded))
}

pub fn lts_to_json(lts: &Lts) -> String {
    serde_json::to_string_pretty(&lts_doc(lts)).expect("LTS documents always serialize")
}

pub fn lts_from_json(s: &str) -> Result<Lts, Error> {
    let doc: LtsDoc = serde_json::from_str(s).map_err(|e| Error::Json(e.to_string()))?;
    lts_from_doc(&doc)
}

fn violation_doc(v: &Violation) -> ViolationDoc {
    ViolationDoc {
        kind: v.kind,
        state: v.state,
        pair: [transition_doc(0, &v.pair.0, None), transition_doc(1, &v.pair.1, None)],
        detail: v.detail.clone(),
    }
}

pub fn coherence_doc(r: &CoherenceReport) -> CoherenceDoc {
    CoherenceDoc {
        verdict: r.verdict,
        states_checked: r.states_checked,
        violations: r.violations.iter().map(violation_doc).collect(),
    }
}

/// Sorted object keys, sorted string arrays, no whitespace. Two answers
/// are equal iff their canonical forms are byte-identical.
pub fn canonical_json(v: &Value) -> String {
    fn norm(v: &Value) -> Value {
        match v {
            Value::Array(items) => {
                let mut items: Vec<Value> = items.iter().map(norm).collect();
                if items.iter().all(Value::is_string) {
                    items.sort_by(|a, b| a.as_str().cmp(&b.as_str()));
                }
                Value::Array(items)
            }
            Value::Object(m) => {
                let mut keys: Vec<&String> = m.keys().collect();
                keys.sort();
                Value::Object(keys.into_iter().map(|k| (k.clone(), norm(&m[k]))).collect())
            }
            other => other.clone(),
        }
    }
    norm(v).to_string()
}

pub fn canonical<T: Serialize>(x: &T) -> String {
    canonical_json(&serde_json::to_value(x).expect("wire documents always serialize"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::explore;
    use crate::parser::parse;

    const STORE: &str = "S = r:{w}.S + w:{w}.S1; S1 = sigma:{sigma}.S; main = S";

    #[test]
    fn lts_round_trip() {
        let lts = explore(&parse(STORE).unwrap(), 100).unwrap();
        let back = lts_from_json(&lts_to_json(&lts)).unwrap();
        assert_eq!(back, lts);
    }

    #[test]
    fn truncated_round_trip_keeps_flags() {
        let lts = explore(&parse("P = a.(P | P); main = P").unwrap(), 4).unwrap();
        let back = lts_from_json(&lts_to_json(&lts)).unwrap();
        assert!(!back.complete);
        assert_eq!(back.expanded, lts.expanded);
    }

    #[test]
    fn store_read_on_the_wire() {
        let lts = explore(&parse(STORE).unwrap(), 100).unwrap();
        let docs = outgoing_docs(&lts, 0);
        let r = docs.iter().find(|d| d.action == "r").unwrap();
        assert_eq!(
            serde_json::to_value(r).unwrap(),
            serde_json::json!({
                "index": r.index, "source": 0, "action": "r",
                "blocking": [{"horizon": 1, "labels": ["w"]}],
                "prediction": {"h0": ["w"], "h1": ["w"]},
                "target": 0, "targetTerm": "S"
            })
        );
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(lts_from_json("{").is_err());
        let bad = r#"{"initial":0,"complete":true,"states":[{"id":0,"term":"0_0"}],
            "transitions":[{"index":0,"source":0,"action":"tau","blocking":[],
            "prediction":{"h0":[],"h1":[]},"target":3}]}"#;
        assert!(matches!(lts_from_json(bad), Err(Error::Json(_))));
        let bad_label = bad.replace("\"h0\":[]", "\"h0\":[\"Tau\"]").replace("3}", "0}");
        assert!(lts_from_json(&bad_label).is_err());
    }

    #[test]
    fn canonical_form_sorts_keys_and_labels() {
        let a = serde_json::json!({"b": ["~a", "a"], "a": {"y": 1, "x": [2, 1]}});
        assert_eq!(canonical_json(&a), r#"{"a":{"x":[2,1],"y":1},"b":["a","~a"]}"#);
    }
}
