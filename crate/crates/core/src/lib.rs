//! A workbench for single-clock CCS with priority guards: strategic
//! transitions `α:B[ι]`, explicit state spaces, bisimulation, and checkers
//! for determinacy, confluence, observability and coherence.

pub mod analysis;
pub mod coherence;
pub mod equivalence;
pub mod label;
pub mod lts;
pub mod parser;
pub mod semantics;
pub mod session;
pub mod term;
pub mod wire;

pub use analysis::{Analysis, PredictionValue};
pub use coherence::{CoherenceReport, Verdict, Violation, ViolationKind};
pub use equivalence::{CongruenceConfig, LabelMode, Partition, Relation, Tristate};
pub use label::{Action, Horizon, Label, LabelSet};
pub use lts::{Lts, StateId, Transition};
pub use parser::{parse, parse_process, pretty, pretty_process, Diagnostic, Span};
pub use semantics::{Blocking, Semantics, StrategicLabel};
pub use term::{canonicalize, term_eq, Program, ProcessTerm, ThreadTerm};

/// Default exploration bound, in states.
pub const DEFAULT_BOUND: usize = 10_000;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("process name `{0}` is not defined")]
    UnresolvedName(String),
    #[error("program is not well-formed ({} diagnostic(s))", .0.len())]
    IllFormed(Vec<Diagnostic>),
    #[error("syntax error ({} diagnostic(s))", .0.len())]
    Syntax(Vec<Diagnostic>),
    #[error("unknown state id {0}")]
    UnknownState(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("state {from} is not the current state {cursor}")]
    Stale { from: usize, cursor: usize },
    #[error("state {state} has no transition {index}")]
    NoSuchTransition { state: usize, index: usize },
    #[error("malformed LTS document: {0}")]
    Json(String),
}

impl Error {
    /// Diagnostics carried by parse or well-formedness failures.
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            Error::IllFormed(d) | Error::Syntax(d) => d,
            _ => &[],
        }
    }
}

/// Parses and checks a source text in one go.
pub fn load(src: &str) -> Result<Program, Error> {
    let prog = parse(src).map_err(Error::Syntax)?;
    let diags = analysis::well_formed(&prog);
    if diags.is_empty() {
        Ok(prog)
    } else {
        Err(Error::IllFormed(diags))
    }
}
