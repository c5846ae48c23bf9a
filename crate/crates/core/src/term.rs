//! Process and thread terms, programs, and the canonical form used for
//! state identity.

use std::collections::{BTreeMap, BTreeSet};

use crate::label::{Action, Horizon, LabelSet};
use crate::parser::Span;

/// Processes. `Par` is n-ary; the parser produces one node per
/// unparenthesised chain `P | Q | R`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProcessTerm {
    Name(String),
    Par(Vec<ProcessTerm>),
    Restrict(Box<ProcessTerm>, BTreeSet<String>),
    Thread(ThreadTerm),
}

/// Threads: nil, guarded prefixes and (n-ary) sums of threads.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ThreadTerm {
    Nil(Horizon),
    Prefix {
        action: Action,
        guard: LabelSet,
        cont: Box<ProcessTerm>,
    },
    Sum(Vec<ThreadTerm>),
}

impl ProcessTerm {
    pub fn name(n: impl Into<String>) -> Self {
        ProcessTerm::Name(n.into())
    }

    pub fn nil(h: Horizon) -> Self {
        ProcessTerm::Thread(ThreadTerm::Nil(h))
    }

    pub fn prefix(action: Action, guard: LabelSet, cont: ProcessTerm) -> Self {
        ProcessTerm::Thread(ThreadTerm::Prefix {
            action,
            guard,
            cont: Box::new(cont),
        })
    }

    pub fn par(children: Vec<ProcessTerm>) -> Self {
        ProcessTerm::Par(children)
    }

    pub fn restrict(body: ProcessTerm, channels: impl IntoIterator<Item = impl Into<String>>) -> Self {
        ProcessTerm::Restrict(Box::new(body), channels.into_iter().map(Into::into).collect())
    }

    /// Visits every process name occurring in the term.
    pub fn for_each_name(&self, f: &mut impl FnMut(&str)) {
        match self {
            ProcessTerm::Name(n) => f(n),
            ProcessTerm::Par(ps) => ps.iter().for_each(|p| p.for_each_name(f)),
            ProcessTerm::Restrict(p, _) => p.for_each_name(f),
            ProcessTerm::Thread(t) => t.for_each_name(f),
        }
    }
}

impl ThreadTerm {
    pub fn for_each_name(&self, f: &mut impl FnMut(&str)) {
        match self {
            ThreadTerm::Nil(_) => {}
            ThreadTerm::Prefix { cont, .. } => cont.for_each_name(f),
            ThreadTerm::Sum(ms) => ms.iter().for_each(|m| m.for_each_name(f)),
        }
    }
}

/// A system of (mutually recursive) definitions plus an entry process.
#[derive(Clone, Debug, Default)]
pub struct Program {
    pub defs: BTreeMap<String, ProcessTerm>,
    pub entry: ProcessTerm,
    /// Source positions of definitions (`"main"` for the entry), when parsed.
    pub spans: BTreeMap<String, Span>,
}

impl Default for ProcessTerm {
    fn default() -> Self {
        ProcessTerm::nil(Horizon::H0)
    }
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.defs == other.defs && self.entry == other.entry
    }
}

impl Eq for Program {}

impl Program {
    pub fn new(defs: BTreeMap<String, ProcessTerm>, entry: ProcessTerm) -> Self {
        Program {
            defs,
            entry,
            spans: BTreeMap::new(),
        }
    }

    pub fn def(&self, name: &str) -> Option<&ProcessTerm> {
        self.defs.get(name)
    }

    /// Same definitions, different entry process.
    pub fn with_entry(&self, entry: ProcessTerm) -> Program {
        Program {
            defs: self.defs.clone(),
            entry,
            spans: self.spans.clone(),
        }
    }
}

/// Flattens nested `|` and `+`, sorts their operands, merges directly nested
/// restrictions and drops empty ones. Idempotent.
pub fn canonicalize(t: &ProcessTerm) -> ProcessTerm {
    match t {
        ProcessTerm::Name(_) => t.clone(),
        ProcessTerm::Par(children) => {
            let mut flat = Vec::with_capacity(children.len());
            for c in children {
                match canonicalize(c) {
                    ProcessTerm::Par(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            match flat.len() {
                0 => ProcessTerm::nil(Horizon::H0),
                1 => flat.pop().unwrap(),
                _ => {
                    flat.sort();
                    ProcessTerm::Par(flat)
                }
            }
        }
        ProcessTerm::Restrict(body, chans) => {
            let body = canonicalize(body);
            let (body, chans) = match body {
                ProcessTerm::Restrict(inner, inner_chans) => {
                    (*inner, inner_chans.union(chans).cloned().collect())
                }
                other => (other, chans.clone()),
            };
            if chans.is_empty() {
                body
            } else {
                ProcessTerm::Restrict(Box::new(body), chans)
            }
        }
        ProcessTerm::Thread(th) => ProcessTerm::Thread(canonicalize_thread(th)),
    }
}

fn canonicalize_thread(t: &ThreadTerm) -> ThreadTerm {
    match t {
        ThreadTerm::Nil(_) => t.clone(),
        ThreadTerm::Prefix { action, guard, cont } => ThreadTerm::Prefix {
            action: action.clone(),
            guard: guard.clone(),
            cont: Box::new(canonicalize(cont)),
        },
        ThreadTerm::Sum(children) => {
            let mut flat = Vec::with_capacity(children.len());
            for c in children {
                match canonicalize_thread(c) {
                    ThreadTerm::Sum(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            if flat.len() == 1 {
                return flat.pop().unwrap();
            }
            flat.sort();
            ThreadTerm::Sum(flat)
        }
    }
}

/// Structural equality modulo canonicalisation (state identity).
pub fn term_eq(a: &ProcessTerm, b: &ProcessTerm) -> bool {
    canonicalize(a) == canonicalize(b)
}
