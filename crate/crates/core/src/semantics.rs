//! Strategic transitions `α:B[ι]`: the blocking/prediction algebra and the
//! structural operational rules (Con, Com, Par, Act, Sum, Restr).
//!
//! Par and Sum are n-ary in the term representation. A Par node is folded
//! left to right, applying the binary Par rule on both sides and Com between
//! the accumulated group and the next component; since `eschews` distributes
//! over union this yields the same transitions for every bracketing.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::analysis::{initial_actions, Analysis, PredictionValue};
use crate::label::{complement_set, fmt_labels, strip_channels, Action, Horizon, Label, LabelSet};
use crate::term::{canonicalize, Program, ProcessTerm, ThreadTerm};
use crate::Error;

/// Horizon-scoped blocking constraints.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Blocking {
    pub entries: BTreeSet<(Horizon, LabelSet)>,
}

impl Blocking {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(h: Horizon, labels: LabelSet) -> Self {
        Blocking {
            entries: [(h, labels)].into_iter().collect(),
        }
    }
}

impl FromIterator<(Horizon, LabelSet)> for Blocking {
    fn from_iter<I: IntoIterator<Item = (Horizon, LabelSet)>>(iter: I) -> Self {
        Blocking {
            entries: iter.into_iter().collect(),
        }
    }
}

/// `[B](C)`: every label blocking within horizon `c`.
pub fn blocked_set(b: &Blocking, c: Horizon) -> LabelSet {
    b.entries
        .iter()
        .filter(|(h, _)| h.subset_of(c))
        .flat_map(|(_, ls)| ls.iter().cloned())
        .collect()
}

/// `B1 ⊑ B2` iff `[B1](C) ⊆ [B2](C)` at both horizons.
pub fn blocking_leq(b1: &Blocking, b2: &Blocking) -> bool {
    Horizon::ALL
        .iter()
        .all(|&h| blocked_set(b1, h).is_subset(&blocked_set(b2, h)))
}

/// Pointwise inclusion.
pub fn prediction_leq(i1: &PredictionValue, i2: &PredictionValue) -> bool {
    Horizon::ALL.iter().all(|&h| i1.at(h).is_subset(i2.at(h)))
}

/// The prediction has no label that synchronises with any blocking entry
/// in that entry's horizon.
pub fn eschews(i: &PredictionValue, b: &Blocking) -> bool {
    b.entries
        .iter()
        .all(|(h, ls)| i.at(*h).is_disjoint(&complement_set(ls)))
}

pub fn blocking_union(b1: &Blocking, b2: &Blocking) -> Blocking {
    Blocking {
        entries: b1.entries.union(&b2.entries).cloned().collect(),
    }
}

pub fn prediction_sum(i1: &PredictionValue, i2: &PredictionValue) -> PredictionValue {
    PredictionValue {
        at_h0: i1.at_h0.union(&i2.at_h0).cloned().collect(),
        at_h1: i1.at_h1.union(&i2.at_h1).cloned().collect(),
    }
}

pub fn blocking_restrict(b: &Blocking, chans: &BTreeSet<String>) -> Blocking {
    b.entries
        .iter()
        .map(|(h, ls)| (*h, strip_channels(ls, chans)))
        .collect()
}

pub fn prediction_restrict(i: &PredictionValue, chans: &BTreeSet<String>) -> PredictionValue {
    PredictionValue {
        at_h0: strip_channels(&i.at_h0, chans),
        at_h1: strip_channels(&i.at_h1, chans),
    }
}

/// `α:B[ι]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrategicLabel {
    pub action: Action,
    pub blocking: Blocking,
    pub prediction: PredictionValue,
}

impl fmt::Display for Blocking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .entries
            .iter()
            .map(|(h, ls)| format!("({h},{})", fmt_labels(ls)))
            .collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

impl fmt::Display for PredictionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[0:{},1:{}]", fmt_labels(&self.at_h0), fmt_labels(&self.at_h1))
    }
}

impl fmt::Display for StrategicLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}{}", self.action, self.blocking, self.prediction)
    }
}

/// One rule instance: a label and the (non-canonical) derivative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub label: StrategicLabel,
    pub target: ProcessTerm,
}

/// The transition engine for one program. Results for `Name` nodes are
/// memoised, so repeated unfoldings during exploration are cheap.
#[derive(Debug)]
pub struct Semantics {
    analysis: Analysis,
    cache: Mutex<HashMap<String, Arc<Vec<Derivation>>>>,
}

impl Semantics {
    pub fn new(program: &Program) -> Result<Self, Error> {
        Ok(Semantics {
            analysis: Analysis::new(program)?,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn analysis(&self) -> &Analysis {
        &self.analysis
    }

    pub fn program(&self) -> &Program {
        self.analysis.program()
    }

    /// Every rule instance for `p`, targets left exactly as the rules build
    /// them. Duplicates are kept.
    pub fn derivations(&self, p: &ProcessTerm) -> Result<Vec<Derivation>, Error> {
        match p {
            ProcessTerm::Name(n) => {
                if let Some(hit) = self.cache.lock().unwrap().get(n) {
                    return Ok(hit.as_ref().clone());
                }
                let body = self.analysis.def(n)?.clone();
                let ds = self.derivations(&body)?;
                self.cache.lock().unwrap().insert(n.clone(), Arc::new(ds.clone()));
                Ok(ds)
            }
            ProcessTerm::Thread(t) => self.thread_derivations(t),
            ProcessTerm::Restrict(body, chans) => Ok(self
                .derivations(body)?
                .into_iter()
                .filter(|d| d.label.action.label().and_then(Label::channel).is_none_or(|c| !chans.contains(c)))
                .map(|d| Derivation {
                    label: StrategicLabel {
                        action: d.label.action,
                        blocking: blocking_restrict(&d.label.blocking, chans),
                        prediction: prediction_restrict(&d.label.prediction, chans),
                    },
                    target: ProcessTerm::Restrict(Box::new(d.target), chans.clone()),
                })
                .collect()),
            ProcessTerm::Par(children) => self.par_derivations(children),
        }
    }

    fn thread_derivations(&self, t: &ThreadTerm) -> Result<Vec<Derivation>, Error> {
        match t {
            ThreadTerm::Nil(_) => Ok(Vec::new()),
            ThreadTerm::Prefix { action, guard, cont } => {
                Ok(vec![Derivation {
                    label: StrategicLabel {
                        action: action.clone(),
                        blocking: Blocking::single(self.analysis.clk_unchecked(cont), guard.clone()),
                        prediction: PredictionValue::empty(),
                    },
                    target: (**cont).clone(),
                }])
            }
            ThreadTerm::Sum(ms) => {
                let mut out = Vec::new();
                for (i, m) in ms.iter().enumerate() {
                    let others: BTreeSet<Action> = ms
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .flat_map(|(_, n)| initial_actions(n))
                        .collect();
                    for d in self.thread_derivations(m)? {
                        let competitors: LabelSet = others
                            .iter()
                            .filter(|a| **a != d.label.action)
                            .filter_map(|a| a.label().cloned())
                            .collect();
                        out.push(Derivation {
                            label: StrategicLabel {
                                prediction: prediction_sum(
                                    &d.label.prediction,
                                    &PredictionValue::constant(competitors),
                                ),
                                ..d.label
                            },
                            target: d.target,
                        });
                    }
                }
                Ok(out)
            }
        }
    }

    fn par_derivations(&self, children: &[ProcessTerm]) -> Result<Vec<Derivation>, Error> {
        let Some((first, rest)) = children.split_first() else {
            return Ok(Vec::new());
        };
        // Group = children[..k]; a group target is the list of components
        // that moved, by position.
        type Moves = Vec<(usize, ProcessTerm)>;
        let mut group: Vec<(StrategicLabel, Moves)> = self
            .derivations(first)?
            .into_iter()
            .map(|d| (d.label, vec![(0, d.target)]))
            .collect();
        let mut group_pred = self.analysis.prediction_star_unchecked(first);
        let mut group_clk = self.analysis.clk_unchecked(first);

        for (j, q) in rest.iter().enumerate().map(|(i, q)| (i + 1, q)) {
            let q_steps = self.derivations(q)?;
            let q_pred = self.analysis.prediction_star_unchecked(q);
            let q_clk = self.analysis.clk_unchecked(q);
            let mut next = Vec::new();

            // Com, before the group moves are consumed by Par.
            for (l, moves) in &group {
                let Some(ell) = l.action.label() else { continue };
                for d in &q_steps {
                    if d.label.action.label() != Some(&ell.complement()) {
                        continue;
                    }
                    if !(eschews(&l.prediction, &d.label.blocking) && eschews(&d.label.prediction, &l.blocking)) {
                        continue;
                    }
                    let action = if ell.is_rendezvous() {
                        Action::Tau
                    } else {
                        Action::Vis(Label::Clock)
                    };
                    let mut m = moves.clone();
                    m.push((j, d.target.clone()));
                    next.push((
                        StrategicLabel {
                            action,
                            blocking: blocking_union(&l.blocking, &d.label.blocking),
                            prediction: prediction_sum(&l.prediction, &d.label.prediction),
                        },
                        m,
                    ));
                }
            }
            // Par, group moves alone.
            for (l, moves) in group {
                if eschews(&q_pred, &l.blocking) && !(l.action.is_clock() && q_clk.contains_clock()) {
                    let prediction = prediction_sum(&l.prediction, &q_pred);
                    next.push((StrategicLabel { prediction, ..l }, moves));
                }
            }
            // Par, q moves alone.
            for d in q_steps {
                if eschews(&group_pred, &d.label.blocking)
                    && !(d.label.action.is_clock() && group_clk.contains_clock())
                {
                    let prediction = prediction_sum(&d.label.prediction, &group_pred);
                    next.push((StrategicLabel { prediction, ..d.label }, vec![(j, d.target)]));
                }
            }

            group = next;
            group_pred = prediction_sum(&group_pred, &q_pred);
            group_clk = group_clk.union(q_clk);
        }
        Ok(group
            .into_iter()
            .map(|(label, moves)| {
                let mut parts = children.to_vec();
                for (i, t) in moves {
                    parts[i] = t;
                }
                Derivation {
                    label,
                    target: ProcessTerm::Par(parts),
                }
            })
            .collect())
    }

    /// The strategic transitions of `p`: targets canonicalised, duplicates
    /// (same label, same canonical target) removed, sorted.
    pub fn enabled_transitions(&self, p: &ProcessTerm) -> Result<Vec<(StrategicLabel, ProcessTerm)>, Error> {
        let set: BTreeSet<(StrategicLabel, ProcessTerm)> = self
            .derivations(p)?
            .into_iter()
            .map(|d| (d.label, canonicalize(&d.target)))
            .collect();
        Ok(set.into_iter().collect())
    }
}

/// One-shot form of [`Semantics::enabled_transitions`].
pub fn enabled_transitions(
    p: &ProcessTerm,
    prog: &Program,
) -> Result<Vec<(StrategicLabel, ProcessTerm)>, Error> {
    Semantics::new(prog)?.enabled_transitions(p)
}
