//! Browser bindings: load a program, step through it, check coherence.
//!
//! Every method exchanges JSON strings so the page needs no glue beyond
//! `JSON.parse`.

use ccslm::coherence::check_lts;
use ccslm::lts::explore;
use ccslm::session::Session;
use ccslm::wire::{coherence_doc, lts_doc, outgoing_docs};
use ccslm::{CongruenceConfig, Error, Program};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn to_js(e: Error) -> JsValue {
    JsValue::from_str(&error_json(&e))
}

fn error_json(e: &Error) -> String {
    json!({ "error": e.to_string(), "diagnostics": e.diagnostics() }).to_string()
}

#[wasm_bindgen]
pub struct Explorer {
    program: Program,
    session: Session,
}

#[wasm_bindgen]
impl Explorer {
    /// Parses and checks `source`. Errors are JSON with a `diagnostics` list.
    #[wasm_bindgen(constructor)]
    pub fn new(source: &str) -> Result<Explorer, JsValue> {
        Explorer::load(source).map_err(to_js)
    }

    pub fn cursor(&self) -> usize {
        self.session.cursor()
    }

    /// Outgoing transitions of the cursor state.
    pub fn transitions(&mut self) -> Result<String, JsValue> {
        self.transitions_json().map_err(to_js)
    }

    /// Fires transition `index` of the cursor; returns `{newState, stateTerm}`.
    pub fn step(&mut self, index: usize) -> Result<String, JsValue> {
        self.step_json(index).map_err(to_js)
    }

    /// Returns the new cursor, or `undefined` at the start.
    pub fn undo(&mut self) -> Option<usize> {
        self.session.undo()
    }

    /// The part of the state space visited so far, plus the trail.
    pub fn graph(&self) -> String {
        self.graph_json()
    }

    pub fn coherence(&self, bound: usize) -> Result<String, JsValue> {
        self.coherence_json(bound).map_err(to_js)
    }
}

impl Explorer {
    pub fn load(source: &str) -> Result<Explorer, Error> {
        let program = ccslm::load(source)?;
        let session = Session::new(&program)?;
        Ok(Explorer { program, session })
    }

    pub fn transitions_json(&mut self) -> Result<String, Error> {
        let s = self.session.cursor();
        self.session.transitions(s)?;
        Ok(serde_json::to_string(&outgoing_docs(&self.session.graph_so_far(), s)).expect("documents serialize"))
    }

    pub fn step_json(&mut self, index: usize) -> Result<String, Error> {
        let s = self.session.step(self.session.cursor(), index)?;
        Ok(json!({ "newState": s, "stateTerm": self.session.state_term(s)?.to_string() }).to_string())
    }

    pub fn graph_json(&self) -> String {
        let trail: Vec<_> = self.session.history().iter().map(|t| (t.source, t.target)).collect();
        json!({
            "lts": lts_doc(&self.session.graph_so_far()),
            "cursor": self.session.cursor(),
            "trail": trail,
        })
        .to_string()
    }

    pub fn coherence_json(&self, bound: usize) -> Result<String, Error> {
        let lts = explore(&self.program, bound)?;
        let report = check_lts(&lts, CongruenceConfig::default())?;
        Ok(serde_json::to_string(&coherence_doc(&report)).expect("documents serialize"))
    }
}
