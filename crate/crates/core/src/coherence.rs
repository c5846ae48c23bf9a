//! Observability, independence, the Diamond Property and coherence, plus
//! Milner's determinacy and confluence as baselines.
//!
//! Every check quantifies over the states of an explored LTS, which is the
//! derivative-closed class of the entry process. Verdicts are only positive
//! when the LTS is complete and no congruence answer was inconclusive.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::equivalence::{saturate, Congruence, CongruenceConfig, Relation, Tristate};
use crate::label::{Horizon, Label};
use crate::lts::{explore, Lts, StateId, Transition};
use crate::semantics::{blocked_set, blocking_leq, prediction_leq};
use crate::term::Program;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Coherent,
    Incoherent,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    NotObservable,
    NoReconvergence,
    MonotonicityFailed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub state: StateId,
    pub pair: (Transition, Transition),
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoherenceReport {
    pub verdict: Verdict,
    pub violations: Vec<Violation>,
    pub states_checked: usize,
}

/// Shared state for one round of checks over an LTS.
pub struct Checker<'a> {
    lts: &'a Lts,
    cong: Congruence<'a>,
    inconclusive: Cell<bool>,
}

fn in_pred_h1(label: &Label, t: &Transition) -> bool {
    t.label.prediction.at(Horizon::H1).contains(label)
}

impl<'a> Checker<'a> {
    pub fn new(lts: &'a Lts, cfg: CongruenceConfig) -> Result<Self, Error> {
        Ok(Checker {
            lts,
            cong: Congruence::new(lts, cfg)?,
            inconclusive: Cell::new(false),
        })
    }

    pub fn congruence(&self) -> &Congruence<'a> {
        &self.cong
    }

    /// Whether some answer so far depended on truncated exploration.
    pub fn saw_inconclusive(&self) -> bool {
        self.inconclusive.get()
    }

    fn cong(&self, a: StateId, b: StateId) -> Tristate {
        let r = self.cong.congruent(a, b).expect("state ids come from the LTS");
        if r == Tristate::Inconclusive {
            self.inconclusive.set(true);
        }
        r
    }

    fn outgoing(&self, s: StateId) -> Vec<&'a Transition> {
        if !self.lts.expanded[s] {
            self.inconclusive.set(true);
        }
        self.lts.outgoing(s).collect()
    }

    /// Competing visible transitions must predict each other at horizon 1.
    pub fn observable_violations_at(&self, s: StateId) -> Vec<Violation> {
        let ts = self.outgoing(s);
        let mut out = Vec::new();
        for (i, t1) in ts.iter().enumerate() {
            for t2 in &ts[i..] {
                let (Some(a1), Some(a2)) = (t1.label.action.label(), t2.label.action.label()) else {
                    continue;
                };
                let competing = a1 != a2 || self.cong(t1.target, t2.target) != Tristate::Yes;
                if !competing {
                    continue;
                }
                if a1 == a2 && self.cong(t1.target, t2.target) == Tristate::Inconclusive {
                    continue;
                }
                if !(in_pred_h1(a1, t2) && in_pred_h1(a2, t1)) {
                    out.push(Violation {
                        kind: ViolationKind::NotObservable,
                        state: s,
                        pair: ((*t1).clone(), (*t2).clone()),
                        detail: format!(
                            "`{}` and `{}` compete but do not predict each other within horizon 1",
                            t1.label, t2.label
                        ),
                    });
                }
            }
        }
        out
    }

    /// Independence of two transitions out of the same state.
    pub fn independent(&self, t1: &Transition, t2: &Transition) -> Tristate {
        let (a1, a2) = (&t1.label.action, &t2.label.action);
        let both_clock = a1.is_clock() && a2.is_clock();
        let rendezvous_or_tau = a1.is_rendezvous_or_tau() && a2.is_rendezvous_or_tau();
        if !(both_clock || rendezvous_or_tau) {
            return Tristate::No;
        }
        let not_blocked = |a: &crate::label::Action, t: &Transition| {
            a.label()
                .is_none_or(|l| !blocked_set(&t.label.blocking, Horizon::H1).contains(l))
        };
        let cond1 = !(a1.is_tau() && a2.is_tau()) && not_blocked(a1, t2) && not_blocked(a2, t1);
        if cond1 {
            return Tristate::Yes;
        }
        if a1 != a2 {
            return Tristate::No;
        }
        !self.cong(t1.target, t2.target)
    }

    /// Every independent pair out of `s` (a transition paired with itself
    /// included) must reconverge monotonically.
    pub fn diamond_violations_at(&self, s: StateId) -> Vec<Violation> {
        let ts = self.outgoing(s);
        let mut out = Vec::new();
        for (i, t1) in ts.iter().enumerate() {
            for t2 in &ts[i..] {
                match self.independent(t1, t2) {
                    Tristate::No => continue,
                    Tristate::Inconclusive => continue,
                    Tristate::Yes => {}
                }
                if let Some(v) = self.reconverge(s, t1, t2) {
                    out.push(v);
                }
            }
        }
        out
    }

    fn reconverge(&self, s: StateId, t1: &Transition, t2: &Transition) -> Option<Violation> {
        let (a1, a2) = (&t1.label.action, &t2.label.action);
        let from_q1: Vec<_> = self.outgoing(t1.target).into_iter().filter(|t| t.label.action == *a2).collect();
        let from_q2: Vec<_> = self.outgoing(t2.target).into_iter().filter(|t| t.label.action == *a1).collect();
        let mut squares = 0usize;
        let mut unsure = false;
        for u2 in &from_q1 {
            for u1 in &from_q2 {
                match self.cong(u2.target, u1.target) {
                    Tristate::Yes => {}
                    Tristate::Inconclusive => {
                        unsure = true;
                        continue;
                    }
                    Tristate::No => continue,
                }
                squares += 1;
                let blocking_ok =
                    blocking_leq(&u2.label.blocking, &t2.label.blocking) && blocking_leq(&u1.label.blocking, &t1.label.blocking);
                let pred_ok = (!a2.is_rendezvous() || prediction_leq(&u2.label.prediction, &t2.label.prediction))
                    && (!a1.is_rendezvous() || prediction_leq(&u1.label.prediction, &t1.label.prediction));
                if blocking_ok && pred_ok {
                    return None;
                }
            }
        }
        if unsure || !self.lts.expanded[t1.target] || !self.lts.expanded[t2.target] {
            self.inconclusive.set(true);
            return None;
        }
        let (kind, detail) = if squares == 0 {
            (
                ViolationKind::NoReconvergence,
                format!(
                    "independent `{}` and `{}` have no congruent reconvergence",
                    t1.label, t2.label
                ),
            )
        } else {
            (
                ViolationKind::MonotonicityFailed,
                format!(
                    "`{}` and `{}` reconverge only with larger blocking or prediction",
                    t1.label, t2.label
                ),
            )
        };
        Some(Violation {
            kind,
            state: s,
            pair: (t1.clone(), t2.clone()),
            detail,
        })
    }

    /// Observability and the Diamond Property at every state.
    pub fn report(&self) -> CoherenceReport {
        let mut violations = Vec::new();
        for s in 0..self.lts.len() {
            violations.extend(self.observable_violations_at(s));
            violations.extend(self.diamond_violations_at(s));
        }
        violations.sort_by(|a, b| (a.state, a.kind, &a.pair).cmp(&(b.state, b.kind, &b.pair)));
        let verdict = if !violations.is_empty() {
            Verdict::Incoherent
        } else if !self.lts.complete || self.saw_inconclusive() {
            Verdict::Inconclusive
        } else {
            Verdict::Coherent
        };
        CoherenceReport {
            verdict,
            violations,
            states_checked: self.lts.len(),
        }
    }
}

pub fn observable_violations(lts: &Lts, cfg: CongruenceConfig) -> Result<Vec<Violation>, Error> {
    let c = Checker::new(lts, cfg)?;
    Ok((0..lts.len()).flat_map(|s| c.observable_violations_at(s)).collect())
}

pub fn independent(t1: &Transition, t2: &Transition, lts: &Lts, cfg: CongruenceConfig) -> Result<Tristate, Error> {
    Ok(Checker::new(lts, cfg)?.independent(t1, t2))
}

pub fn diamond_violations(state: StateId, lts: &Lts, cfg: CongruenceConfig) -> Result<Vec<Violation>, Error> {
    lts.check_state(state)?;
    Ok(Checker::new(lts, cfg)?.diamond_violations_at(state))
}

pub fn check_lts(lts: &Lts, cfg: CongruenceConfig) -> Result<CoherenceReport, Error> {
    Ok(Checker::new(lts, cfg)?.report())
}

/// Explores `prog` and checks coherence of every reachable state.
pub fn check_coherence(prog: &Program, bound: usize, cfg: CongruenceConfig) -> Result<CoherenceReport, Error> {
    cfg.validate()?;
    let lts = explore(prog, bound)?;
    check_lts(&lts, cfg)
}

/// Transitions as the Milner checks see them: strong, or τ-saturated for
/// the weak relation.
fn milner_edges(lts: &Lts, relation: Relation) -> Vec<Vec<(crate::label::Action, StateId)>> {
    match relation {
        Relation::Strong => (0..lts.len())
            .map(|s| lts.outgoing(s).map(|t| (t.label.action.clone(), t.target)).collect())
            .collect(),
        Relation::Weak => saturate(lts).into_iter().map(|set| set.into_iter().collect()).collect(),
    }
}

fn base_verdict(lts: &Lts) -> Tristate {
    if lts.complete {
        Tristate::Yes
    } else {
        Tristate::Inconclusive
    }
}

/// Same-action derivatives are congruent, at every reachable state.
pub fn milner_determinate(lts: &Lts, cfg: CongruenceConfig) -> Result<Tristate, Error> {
    let cong = Congruence::new(lts, cfg)?;
    let edges = milner_edges(lts, cfg.relation);
    let mut result = base_verdict(lts);
    for out in &edges {
        for (i, (a1, q1)) in out.iter().enumerate() {
            for (a2, q2) in &out[i + 1..] {
                if a1 == a2 {
                    result = result.and(cong.congruent(*q1, *q2)?);
                }
            }
        }
    }
    Ok(result)
}

/// Determinacy plus reconvergence of every distinctly-labelled pair.
pub fn milner_confluent(lts: &Lts, cfg: CongruenceConfig) -> Result<Tristate, Error> {
    let mut result = milner_determinate(lts, cfg)?;
    if result == Tristate::No {
        return Ok(result);
    }
    let cong = Congruence::new(lts, cfg)?;
    let edges = milner_edges(lts, cfg.relation);
    for out in &edges {
        for (a1, q1) in out {
            for (a2, q2) in out {
                if a1 == a2 {
                    continue;
                }
                let mut found = Tristate::No;
                'search: for (b2, q1p) in &edges[*q1] {
                    if b2 != a2 {
                        continue;
                    }
                    for (b1, q2p) in &edges[*q2] {
                        if b1 != a1 {
                            continue;
                        }
                        match cong.congruent(*q1p, *q2p)? {
                            Tristate::Yes => {
                                found = Tristate::Yes;
                                break 'search;
                            }
                            Tristate::Inconclusive => found = Tristate::Inconclusive,
                            Tristate::No => {}
                        }
                    }
                }
                if found != Tristate::Yes && !(lts.expanded[*q1] && lts.expanded[*q2]) {
                    found = Tristate::Inconclusive;
                }
                result = result.and(found);
                if result == Tristate::No {
                    return Ok(result);
                }
            }
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    const STORE: &str = "S = r:{w}.S + w:{w}.S1; S1 = sigma:{sigma}.S; main = S";

    fn lts_of(src: &str) -> Lts {
        explore(&parse(src).unwrap(), 1000).unwrap()
    }

    #[test]
    fn store_is_observable_and_coherent() {
        let lts = lts_of(STORE);
        assert!(observable_violations(&lts, CongruenceConfig::default()).unwrap().is_empty());
        for s in 0..lts.len() {
            assert!(diamond_violations(s, &lts, CongruenceConfig::default()).unwrap().is_empty());
        }
        let report = check_lts(&lts, CongruenceConfig::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Coherent);
        assert_eq!(report.states_checked, 2);
    }

    #[test]
    fn store_independence() {
        let lts = lts_of(STORE);
        let cfg = CongruenceConfig::default();
        let find = |s: StateId, a: &str| {
            lts.outgoing(s)
                .find(|t| t.label.action.to_string() == a)
                .unwrap()
                .clone()
        };
        let (r, w) = (find(0, "r"), find(0, "w"));
        assert_eq!(independent(&r, &r, &lts, cfg).unwrap(), Tristate::Yes);
        assert_eq!(independent(&r, &w, &lts, cfg).unwrap(), Tristate::No);
        assert_eq!(independent(&w, &w, &lts, cfg).unwrap(), Tristate::No);
        let tick = find(1, "sigma");
        assert_eq!(independent(&tick, &tick, &lts, cfg).unwrap(), Tristate::No);
    }

    #[test]
    fn one_shot_prefix_has_no_reconvergence() {
        let lts = lts_of("main = a.0_0");
        let v = diamond_violations(0, &lts, CongruenceConfig::default()).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::NoReconvergence);
        assert_eq!(v[0].pair.0, v[0].pair.1);
    }

    #[test]
    fn nondeterministic_prefix_is_not_observable() {
        let report = check_coherence(
            &parse("main = a.b.0_0 + a.c.0_0").unwrap(),
            100,
            CongruenceConfig::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Incoherent);
        assert!(report.violations.iter().any(|v| v.kind == ViolationKind::NotObservable));
    }

    #[test]
    fn ticks_into_distinct_states_are_not_observable() {
        let report = check_coherence(
            &parse("main = sigma.a.0_1 + sigma.b.0_1").unwrap(),
            100,
            CongruenceConfig::default(),
        )
        .unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::NotObservable && v.pair.0.label.action.is_clock()));
    }

    #[test]
    fn blocked_system_is_vacuously_coherent() {
        let report = check_coherence(
            &parse("S = w:{w}.S + r:{w}.S + sigma:{r,w}.S; W = ~w.0_1; main = (W | W | S) \\ {r,w}").unwrap(),
            100,
            CongruenceConfig::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Coherent);
        assert_eq!(report.states_checked, 1);
    }

    #[test]
    fn monotonicity_failure_is_reported() {
        // after `a` the competing `b` picks up an extra guard
        let report = check_coherence(
            &parse("P = a:{a}.Q + b:{b}.R; Q = b:{b,c}.T; R = a:{a}.T; T = 0_0; main = P").unwrap(),
            100,
            CongruenceConfig::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Incoherent);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].kind, ViolationKind::MonotonicityFailed);
        assert_eq!(report.violations[0].state, 0);
    }

    #[test]
    fn truncated_exploration_is_inconclusive() {
        let report = check_coherence(&parse("P = a:{a}.(P | P); main = P").unwrap(), 10, CongruenceConfig::default()).unwrap();
        assert_ne!(report.verdict, Verdict::Coherent);
    }

    #[test]
    fn milner_baselines_on_simple_terms() {
        let cfg = CongruenceConfig::default();
        let lts = lts_of("main = a.0_0");
        assert_eq!(milner_determinate(&lts, cfg).unwrap(), Tristate::Yes);
        let lts = lts_of("main = a.b.0_0 + a.c.0_0");
        assert_eq!(milner_determinate(&lts, cfg).unwrap(), Tristate::No);
        let lts = lts_of("main = a.b.0_0 + b.a.0_0");
        assert_eq!(milner_confluent(&lts, cfg).unwrap(), Tristate::Yes);
        let lts = lts_of("main = a.0_0 + b.0_0");
        assert_eq!(milner_confluent(&lts, cfg).unwrap(), Tristate::No);
    }
}
