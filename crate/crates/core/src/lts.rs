//! Bounded explicit-state exploration and the resulting transition system.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::equivalence::{Congruence, CongruenceConfig, Tristate};
use crate::label::Action;
use crate::semantics::{Semantics, StrategicLabel};
use crate::term::{canonicalize, Program, ProcessTerm};
use crate::Error;

pub type StateId = usize;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: StateId,
    pub label: StrategicLabel,
    pub target: StateId,
}

/// Reachable states (canonical terms, numbered in BFS order) and their
/// strategic transitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts {
    pub states: Vec<ProcessTerm>,
    pub transitions: Vec<Transition>,
    pub initial: StateId,
    /// `false` iff the state bound cut exploration short.
    pub complete: bool,
    /// `expanded[s]`: every transition of `s` is recorded.
    pub expanded: Vec<bool>,
    outgoing: Vec<Vec<usize>>,
}

impl Lts {
    /// Builds an LTS from raw parts. States without a term get a placeholder
    /// name; every state counts as expanded.
    pub fn from_edges(num_states: usize, initial: StateId, edges: Vec<(StateId, StrategicLabel, StateId)>) -> Self {
        let states = (0..num_states).map(|i| ProcessTerm::name(format!("S{i}"))).collect();
        let transitions = edges
            .into_iter()
            .map(|(source, label, target)| Transition { source, label, target })
            .collect();
        Lts::assemble(states, transitions, initial, true, vec![true; num_states])
    }

    pub(crate) fn assemble(
        states: Vec<ProcessTerm>,
        transitions: Vec<Transition>,
        initial: StateId,
        complete: bool,
        expanded: Vec<bool>,
    ) -> Self {
        let mut outgoing = vec![Vec::new(); states.len()];
        for (i, t) in transitions.iter().enumerate() {
            outgoing[t.source].push(i);
        }
        Lts {
            states,
            transitions,
            initial,
            complete,
            expanded,
            outgoing,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn outgoing(&self, s: StateId) -> impl Iterator<Item = &Transition> + '_ {
        self.outgoing[s].iter().map(move |&i| &self.transitions[i])
    }

    pub fn check_state(&self, s: StateId) -> Result<(), Error> {
        if s < self.states.len() {
            Ok(())
        } else {
            Err(Error::UnknownState(s))
        }
    }

    pub fn state_of(&self, term: &ProcessTerm) -> Option<StateId> {
        let c = canonicalize(term);
        self.states.iter().position(|s| *s == c)
    }

    /// Graphviz rendering; edges are labelled `α:{B}[ι]`.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph lts {\n  node [shape=box, fontname=\"monospace\"];\n");
        for (i, t) in self.states.iter().enumerate() {
            let peripheries = if i == self.initial { ", peripheries=2" } else { "" };
            let dashed = if self.expanded[i] { "" } else { ", style=dashed" };
            let _ = writeln!(s, "  s{i} [label=\"{i}: {}\"{peripheries}{dashed}];", escape(&t.to_string()));
        }
        for t in &self.transitions {
            let _ = writeln!(s, "  s{} -> s{} [label=\"{}\"];", t.source, t.target, escape(&t.label.to_string()));
        }
        s.push_str("}\n");
        s
    }

    /// Shortest witness reaching `goal`, as transition indices. `None` is
    /// conclusive only when the LTS is complete.
    pub fn find_trace(&self, goal: &Goal<'_>) -> Option<Vec<usize>> {
        let mut pred: Vec<Option<usize>> = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        let path_to = |mut s: StateId, pred: &Vec<Option<usize>>| {
            let mut path = Vec::new();
            while let Some(ti) = pred[s] {
                path.push(ti);
                s = self.transitions[ti].source;
            }
            path.reverse();
            path
        };
        while let Some(s) = queue.pop_front() {
            if let Goal::State(f) = goal {
                if f(&self.states[s]) {
                    return Some(path_to(s, &pred));
                }
            }
            for &ti in &self.outgoing[s] {
                let t = &self.transitions[ti];
                if let Goal::Action(f) = goal {
                    if f(&t.label.action) {
                        let mut path = path_to(s, &pred);
                        path.push(ti);
                        return Some(path);
                    }
                }
                if !seen[t.target] {
                    seen[t.target] = true;
                    pred[t.target] = Some(ti);
                    queue.push_back(t.target);
                }
            }
        }
        None
    }

    /// Every state reachable from `s` (including `s`) is expanded.
    pub fn closed_states(&self) -> Vec<bool> {
        let mut incoming = vec![Vec::new(); self.len()];
        for t in &self.transitions {
            incoming[t.target].push(t.source);
        }
        let mut open = vec![false; self.len()];
        let mut queue: VecDeque<StateId> = (0..self.len()).filter(|&s| !self.expanded[s]).collect();
        for &s in &queue {
            open[s] = true;
        }
        while let Some(s) = queue.pop_front() {
            for &p in &incoming[s] {
                if !open[p] {
                    open[p] = true;
                    queue.push_back(p);
                }
            }
        }
        open.into_iter().map(|o| !o).collect()
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Targets for [`Lts::find_trace`].
pub enum Goal<'a> {
    State(Box<dyn Fn(&ProcessTerm) -> bool + 'a>),
    Action(Box<dyn Fn(&Action) -> bool + 'a>),
}

#[derive(Clone, Copy, Debug)]
pub struct ExploreOptions {
    pub bound: usize,
    /// Worker threads for frontier expansion; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            bound: crate::DEFAULT_BOUND,
            workers: None,
        }
    }
}

/// Explores `prog.entry` breadth-first, up to `bound` states.
pub fn explore(prog: &Program, bound: usize) -> Result<Lts, Error> {
    let sem = Semantics::new(prog)?;
    explore_from(&sem, std::slice::from_ref(&prog.entry), ExploreOptions { bound, workers: None })
}

/// Explores from several roots at once; the first root is the initial state.
pub fn explore_from(sem: &Semantics, roots: &[ProcessTerm], opts: ExploreOptions) -> Result<Lts, Error> {
    #[cfg(feature = "parallel")]
    if let Some(n) = opts.workers {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        return pool.install(|| explore_inner(sem, roots, opts.bound));
    }
    explore_inner(sem, roots, opts.bound)
}

fn explore_inner(sem: &Semantics, roots: &[ProcessTerm], bound: usize) -> Result<Lts, Error> {
    let bound = bound.max(1);
    let mut states: Vec<ProcessTerm> = Vec::new();
    let mut index: HashMap<ProcessTerm, StateId> = HashMap::new();
    let mut transitions = Vec::new();
    let mut expanded = Vec::new();
    let mut complete = true;

    let mut frontier = Vec::new();
    for r in roots {
        let c = canonicalize(r);
        if index.contains_key(&c) {
            continue;
        }
        if states.len() >= bound {
            complete = false;
            break;
        }
        index.insert(c.clone(), states.len());
        frontier.push(states.len());
        states.push(c);
        expanded.push(false);
    }

    while !frontier.is_empty() {
        let results = expand_level(sem, &frontier, &states)?;
        let mut next = Vec::new();
        for (&sid, succs) in frontier.iter().zip(results) {
            let mut full = true;
            for (label, target) in succs {
                let tid = match index.get(&target) {
                    Some(&t) => t,
                    None if states.len() >= bound => {
                        full = false;
                        complete = false;
                        continue;
                    }
                    None => {
                        let t = states.len();
                        index.insert(target.clone(), t);
                        states.push(target);
                        expanded.push(false);
                        next.push(t);
                        t
                    }
                };
                if cfg!(debug_assertions) {
                    let a = sem.analysis();
                    debug_assert_eq!(
                        a.clk_unchecked(&states[sid]),
                        a.clk_unchecked(&states[tid]),
                        "clock horizon changed along {label}"
                    );
                }
                transitions.push(Transition {
                    source: sid,
                    label,
                    target: tid,
                });
            }
            expanded[sid] = full;
        }
        frontier = next;
    }
    Ok(Lts::assemble(states, transitions, 0, complete, expanded))
}

type Successors = Vec<(StrategicLabel, ProcessTerm)>;

#[cfg(feature = "parallel")]
fn expand_level(sem: &Semantics, frontier: &[StateId], states: &[ProcessTerm]) -> Result<Vec<Successors>, Error> {
    use rayon::prelude::*;
    frontier
        .par_iter()
        .map(|&s| sem.enabled_transitions(&states[s]))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn expand_level(sem: &Semantics, frontier: &[StateId], states: &[ProcessTerm]) -> Result<Vec<Successors>, Error> {
    frontier
        .iter()
        .map(|&s| sem.enabled_transitions(&states[s]))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalFormResult {
    pub normal_forms: Vec<StateId>,
    pub unique_modulo_cong: Tristate,
}

/// The τ-normal forms reachable from `from` by strong τ-steps, and whether
/// they are all congruent.
pub fn normal_forms(lts: &Lts, from: StateId, cfg: CongruenceConfig) -> Result<NormalFormResult, Error> {
    let cong = Congruence::new(lts, cfg)?;
    normal_forms_with(lts, from, &cong)
}

pub fn normal_forms_with(lts: &Lts, from: StateId, cong: &Congruence<'_>) -> Result<NormalFormResult, Error> {
    lts.check_state(from)?;
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    let mut forms = Vec::new();
    let mut truncated = false;
    while let Some(s) = queue.pop_front() {
        truncated |= !lts.expanded[s];
        let mut has_tau = false;
        for t in lts.outgoing(s).filter(|t| t.label.action.is_tau()) {
            has_tau = true;
            if seen.insert(t.target) {
                queue.push_back(t.target);
            }
        }
        if !has_tau && lts.expanded[s] {
            forms.push(s);
        }
    }
    forms.sort_unstable();
    let mut unique = if truncated { Tristate::Inconclusive } else { Tristate::Yes };
    if let Some(&first) = forms.first() {
        for &other in &forms[1..] {
            unique = unique.and(cong.congruent(first, other)?);
        }
    }
    Ok(NormalFormResult {
        normal_forms: forms,
        unique_modulo_cong: unique,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse, parse_process};

    #[test]
    fn store_alone() {
        let prog = parse("S = r:{w}.S + w:{w}.S1; S1 = sigma:{sigma}.S; main = S").unwrap();
        let lts = explore(&prog, 100).unwrap();
        assert!(lts.complete);
        assert_eq!(lts.len(), 2);
        assert_eq!(lts.transitions.len(), 3);
        let dot = lts.to_dot();
        assert!(dot.contains("r:{(1,{w})}[0:{w},1:{w}]"));
    }

    #[test]
    fn unbounded_growth_is_truncated() {
        let prog = parse("P = a.(P | P); main = P").unwrap();
        let lts = explore(&prog, 100).unwrap();
        assert!(!lts.complete);
        assert_eq!(lts.len(), 100);
        assert!(lts.transitions.iter().all(|t| t.target < lts.len()));
        assert!(!lts.closed_states()[0]);
    }

    #[test]
    fn single_state_dot() {
        let prog = parse("main = 0_0").unwrap();
        let lts = explore(&prog, 10).unwrap();
        assert_eq!(lts.len(), 1);
        let dot = lts.to_dot();
        assert_eq!(dot.matches("->").count(), 0);
        assert_eq!(dot.matches("[label=").count(), 1);
    }

    #[test]
    fn nil_is_its_own_normal_form() {
        let prog = parse("main = 0_0").unwrap();
        let lts = explore(&prog, 10).unwrap();
        let nf = normal_forms(&lts, 0, CongruenceConfig::default()).unwrap();
        assert_eq!(nf.normal_forms, vec![0]);
        assert_eq!(nf.unique_modulo_cong, Tristate::Yes);
        assert!(matches!(normal_forms(&lts, 5, CongruenceConfig::default()), Err(Error::UnknownState(5))));
    }

    #[test]
    fn trace_queries() {
        let prog = parse("main = a.b.0_0").unwrap();
        let lts = explore(&prog, 10).unwrap();
        let init = lts.states[0].clone();
        assert_eq!(lts.find_trace(&Goal::State(Box::new(move |t| *t == init))), Some(vec![]));
        let b = Action::from_wire("b").unwrap();
        assert_eq!(lts.find_trace(&Goal::Action(Box::new(move |a| *a == b))).map(|p| p.len()), Some(2));
        let c = Action::from_wire("c").unwrap();
        assert_eq!(lts.find_trace(&Goal::Action(Box::new(move |a| *a == c))), None);
    }

    #[test]
    fn worker_count_does_not_change_numbering() {
        let prog = parse(
            "A = a.sigma.A + b.sigma.A; B = ~a.sigma.B + c.sigma.B; main = (A | B | A) \\ {a}",
        )
        .unwrap();
        let sem = Semantics::new(&prog).unwrap();
        let one = explore_from(&sem, std::slice::from_ref(&prog.entry), ExploreOptions { bound: 1000, workers: Some(1) }).unwrap();
        let four = explore_from(&sem, std::slice::from_ref(&prog.entry), ExploreOptions { bound: 1000, workers: Some(4) }).unwrap();
        assert_eq!(one, four);
        assert!(one.len() > 3);
    }

    #[test]
    fn multiple_roots() {
        let prog = parse("main = a.0_0").unwrap();
        let sem = Semantics::new(&prog).unwrap();
        let roots = [parse_process("a.0_0").unwrap(), parse_process("b.0_0").unwrap()];
        let lts = explore_from(&sem, &roots, ExploreOptions::default()).unwrap();
        assert_eq!(lts.len(), 3);
        assert_eq!(lts.state_of(&roots[1]), Some(1));
    }
}
