//! A stepping session: a cursor moving through a state space that is only
//! expanded where the user has looked.

use std::collections::HashMap;

use crate::lts::{Lts, StateId, Transition};
use crate::semantics::Semantics;
use crate::term::{canonicalize, Program, ProcessTerm};
use crate::Error;

#[derive(Debug)]
pub struct Session {
    sem: Semantics,
    states: Vec<ProcessTerm>,
    index: HashMap<ProcessTerm, StateId>,
    outgoing: Vec<Option<Vec<Transition>>>,
    cursor: StateId,
    history: Vec<Transition>,
}

impl Session {
    pub fn new(program: &Program) -> Result<Self, Error> {
        let sem = Semantics::new(program)?;
        let root = canonicalize(&program.entry);
        Ok(Session {
            sem,
            states: vec![root.clone()],
            index: HashMap::from([(root, 0)]),
            outgoing: vec![None],
            cursor: 0,
            history: Vec::new(),
        })
    }

    pub fn program(&self) -> &Program {
        self.sem.program()
    }

    pub fn initial(&self) -> StateId {
        0
    }

    pub fn cursor(&self) -> StateId {
        self.cursor
    }

    /// Fired transitions, oldest first.
    pub fn history(&self) -> &[Transition] {
        &self.history
    }

    pub fn state_term(&self, s: StateId) -> Result<&ProcessTerm, Error> {
        self.states.get(s).ok_or(Error::UnknownState(s))
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// The strategic transitions of `s`, in a fixed order; their positions
    /// are the indices accepted by [`Session::step`].
    pub fn transitions(&mut self, s: StateId) -> Result<&[Transition], Error> {
        if s >= self.states.len() {
            return Err(Error::UnknownState(s));
        }
        if self.outgoing[s].is_none() {
            let succs = self.sem.enabled_transitions(&self.states[s])?;
            let mut out = Vec::with_capacity(succs.len());
            for (label, target) in succs {
                let target = match self.index.get(&target) {
                    Some(&t) => t,
                    None => {
                        let t = self.states.len();
                        self.index.insert(target.clone(), t);
                        self.states.push(target);
                        self.outgoing.push(None);
                        t
                    }
                };
                out.push(Transition { source: s, label, target });
            }
            self.outgoing[s] = Some(out);
        }
        Ok(self.outgoing[s].as_deref().unwrap_or_default())
    }

    /// Fires transition `index` of `from`, which must be the cursor.
    pub fn step(&mut self, from: StateId, index: usize) -> Result<StateId, Error> {
        if from >= self.states.len() {
            return Err(Error::UnknownState(from));
        }
        if from != self.cursor {
            return Err(Error::Stale { from, cursor: self.cursor });
        }
        let t = self
            .transitions(from)?
            .get(index)
            .cloned()
            .ok_or(Error::NoSuchTransition { state: from, index })?;
        self.cursor = t.target;
        self.history.push(t);
        Ok(self.cursor)
    }

    /// Moves the cursor back one step; `None` when nothing was fired.
    pub fn undo(&mut self) -> Option<StateId> {
        let t = self.history.pop()?;
        self.cursor = t.source;
        Some(self.cursor)
    }

    /// Everything discovered so far. Unvisited frontier states are marked
    /// unexpanded and the result counts as incomplete unless none remain.
    pub fn graph_so_far(&self) -> Lts {
        let expanded: Vec<bool> = self.outgoing.iter().map(Option::is_some).collect();
        let transitions = self.outgoing.iter().flatten().flatten().cloned().collect();
        let complete = expanded.iter().all(|&e| e);
        Lts::assemble(self.states.clone(), transitions, 0, complete, expanded)
    }
}
