//! Command-line front end and HTTP/JSON stepping service for `ccslm`.

pub mod cli;
pub mod server;

use ccslm::{CongruenceConfig, LabelMode, Relation};
use serde::Serialize;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILS: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INCONCLUSIVE: i32 = 3;
}

/// Parses the `--cong` / `--labels` pair shared by the CLI and the service.
pub fn congruence(cong: Option<&str>, labels: Option<&str>) -> Result<CongruenceConfig, String> {
    let relation = match cong.unwrap_or("strong") {
        "strong" => Relation::Strong,
        "weak" => Relation::Weak,
        other => return Err(format!("unknown congruence `{other}` (expected strong or weak)")),
    };
    let label_mode = match labels.unwrap_or("action") {
        "action" => LabelMode::ActionOnly,
        "full" => LabelMode::FullStrategic,
        other => return Err(format!("unknown label mode `{other}` (expected action or full)")),
    };
    let cfg = CongruenceConfig { relation, label_mode };
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StepReply {
    pub new_state: usize,
    pub state_term: String,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StateDoc {
    pub id: usize,
    pub term: String,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReduceDoc {
    pub from: usize,
    pub normal_forms: Vec<StateDoc>,
    pub unique_modulo_cong: ccslm::Tristate,
    pub complete: bool,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BisimDoc {
    pub left: String,
    pub right: String,
    pub config: CongruenceConfig,
    pub congruent: ccslm::Tristate,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConfluenceDoc {
    pub config: CongruenceConfig,
    pub determinate: ccslm::Tristate,
    pub confluent: ccslm::Tristate,
    pub complete: bool,
}

/// Normal forms reachable from the initial state.
pub fn reduce_doc(lts: &ccslm::Lts, cfg: CongruenceConfig) -> Result<ReduceDoc, ccslm::Error> {
    let nf = ccslm::lts::normal_forms(lts, lts.initial, cfg)?;
    Ok(ReduceDoc {
        from: lts.initial,
        normal_forms: nf
            .normal_forms
            .iter()
            .map(|&id| StateDoc {
                id,
                term: lts.states[id].to_string(),
            })
            .collect(),
        unique_modulo_cong: nf.unique_modulo_cong,
        complete: lts.complete,
    })
}

pub fn confluence_doc(lts: &ccslm::Lts, cfg: CongruenceConfig) -> Result<ConfluenceDoc, ccslm::Error> {
    Ok(ConfluenceDoc {
        config: cfg,
        determinate: ccslm::coherence::milner_determinate(lts, cfg)?,
        confluent: ccslm::coherence::milner_confluent(lts, cfg)?,
        complete: lts.complete,
    })
}
