//! Strong and weak bisimilarity over an explored LTS, by partition
//! refinement.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::label::Action;
use crate::lts::{Lts, StateId};
use crate::semantics::StrategicLabel;
use crate::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    #[default]
    Strong,
    Weak,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelMode {
    /// Compare transitions by action only.
    #[default]
    ActionOnly,
    /// Compare the whole `α:B[ι]`.
    FullStrategic,
}

/// Which `≅` the checkers use. Weak bisimilarity only exists with
/// action-only labels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CongruenceConfig {
    pub relation: Relation,
    pub label_mode: LabelMode,
}

impl CongruenceConfig {
    pub fn strong() -> Self {
        Self::default()
    }

    pub fn weak() -> Self {
        CongruenceConfig {
            relation: Relation::Weak,
            label_mode: LabelMode::ActionOnly,
        }
    }

    pub fn full_strategic() -> Self {
        CongruenceConfig {
            relation: Relation::Strong,
            label_mode: LabelMode::FullStrategic,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.relation == Relation::Weak && self.label_mode == LabelMode::FullStrategic {
            return Err(Error::InvalidConfig(
                "weak bisimilarity compares actions only; use --labels action".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tristate {
    Yes,
    No,
    Inconclusive,
}

impl Tristate {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Tristate::Yes
        } else {
            Tristate::No
        }
    }

    /// Three-valued conjunction: any `No` wins, then any `Inconclusive`.
    pub fn and(self, other: Tristate) -> Tristate {
        match (self, other) {
            (Tristate::No, _) | (_, Tristate::No) => Tristate::No,
            (Tristate::Inconclusive, _) | (_, Tristate::Inconclusive) => Tristate::Inconclusive,
            _ => Tristate::Yes,
        }
    }

}

impl std::ops::Not for Tristate {
    type Output = Tristate;

    fn not(self) -> Tristate {
        match self {
            Tristate::Yes => Tristate::No,
            Tristate::No => Tristate::Yes,
            Tristate::Inconclusive => Tristate::Inconclusive,
        }
    }
}

/// Disjoint blocks covering all states. Blocks are numbered by their
/// smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<usize>,
}

impl Partition {
    pub fn block_of(&self, s: StateId) -> usize {
        self.block_of[s]
    }

    pub fn same_block(&self, a: StateId, b: StateId) -> bool {
        self.block_of[a] == self.block_of[b]
    }

    pub fn num_blocks(&self) -> usize {
        self.block_of.iter().max().map_or(0, |m| m + 1)
    }

    pub fn blocks(&self) -> Vec<Vec<StateId>> {
        let mut out = vec![Vec::new(); self.num_blocks()];
        for (s, &b) in self.block_of.iter().enumerate() {
            out[b].push(s);
        }
        out
    }

    /// Every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let mut image: HashMap<usize, usize> = HashMap::new();
        self.block_of
            .iter()
            .zip(&coarser.block_of)
            .all(|(&b, &c)| *image.entry(b).or_insert(c) == c)
    }
}

/// Signature refinement: split blocks by the set of (label, target block)
/// pairs until stable. `edges[s]` lists interned labels and targets.
pub fn refine(edges: &[Vec<(usize, StateId)>]) -> Partition {
    let n = edges.len();
    let mut block_of = vec![0usize; n];
    let mut count = usize::from(n > 0);
    loop {
        let mut ids: HashMap<(usize, Vec<(usize, usize)>), usize> = HashMap::new();
        let mut next = Vec::with_capacity(n);
        for s in 0..n {
            let sig: BTreeSet<(usize, usize)> = edges[s].iter().map(|&(l, t)| (l, block_of[t])).collect();
            let key = (block_of[s], sig.into_iter().collect());
            let fresh = ids.len();
            next.push(*ids.entry(key).or_insert(fresh));
        }
        let new_count = ids.len();
        block_of = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    Partition { block_of }
}

fn intern<K: Ord + Clone>(lts: &Lts, key: impl Fn(&StrategicLabel) -> K) -> Vec<Vec<(usize, StateId)>> {
    let mut table: BTreeMap<K, usize> = BTreeMap::new();
    let mut edges = vec![Vec::new(); lts.len()];
    for t in &lts.transitions {
        let k = key(&t.label);
        let fresh = table.len();
        let id = *table.entry(k).or_insert(fresh);
        edges[t.source].push((id, t.target));
    }
    edges
}

/// Coarsest strong bisimulation.
pub fn strong_bisim(lts: &Lts, cfg: CongruenceConfig) -> Partition {
    let edges = match cfg.label_mode {
        LabelMode::ActionOnly => intern(lts, |l| l.action.clone()),
        LabelMode::FullStrategic => intern(lts, Clone::clone),
    };
    refine(&edges)
}

/// Reflexive-transitive τ-closure of every state.
fn tau_closures(lts: &Lts) -> Vec<Vec<StateId>> {
    (0..lts.len())
        .map(|s| {
            let mut seen = BTreeSet::from([s]);
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for t in lts.outgoing(u).filter(|t| t.label.action.is_tau()) {
                    if seen.insert(t.target) {
                        queue.push_back(t.target);
                    }
                }
            }
            seen.into_iter().collect()
        })
        .collect()
}

/// Weak transitions: `τ*` for τ (zero steps included), `τ* α τ*` for
/// visible α.
pub fn saturate(lts: &Lts) -> Vec<BTreeSet<(Action, StateId)>> {
    let closure = tau_closures(lts);
    (0..lts.len())
        .map(|s| {
            let mut out: BTreeSet<(Action, StateId)> = closure[s].iter().map(|&t| (Action::Tau, t)).collect();
            for &u in &closure[s] {
                for t in lts.outgoing(u).filter(|t| !t.label.action.is_tau()) {
                    for &v in &closure[t.target] {
                        out.insert((t.label.action.clone(), v));
                    }
                }
            }
            out
        })
        .collect()
}

/// Coarsest weak bisimulation (observation equivalence).
pub fn weak_bisim(lts: &Lts) -> Partition {
    let sat = saturate(lts);
    let mut table: BTreeMap<Action, usize> = BTreeMap::new();
    let edges: Vec<Vec<(usize, StateId)>> = sat
        .iter()
        .map(|set| {
            set.iter()
                .map(|(a, t)| {
                    let fresh = table.len();
                    (*table.entry(a.clone()).or_insert(fresh), *t)
                })
                .collect()
        })
        .collect();
    refine(&edges)
}

/// A computed `≅` for one LTS. Answers are inconclusive for states whose
/// reachable part was cut off by the exploration bound.
#[derive(Debug)]
pub struct Congruence<'a> {
    lts: &'a Lts,
    cfg: CongruenceConfig,
    partition: Partition,
    closed: Vec<bool>,
}

impl<'a> Congruence<'a> {
    pub fn new(lts: &'a Lts, cfg: CongruenceConfig) -> Result<Self, Error> {
        cfg.validate()?;
        let partition = match cfg.relation {
            Relation::Strong => strong_bisim(lts, cfg),
            Relation::Weak => weak_bisim(lts),
        };
        Ok(Congruence {
            lts,
            cfg,
            partition,
            closed: lts.closed_states(),
        })
    }

    pub fn config(&self) -> CongruenceConfig {
        self.cfg
    }

    pub fn lts(&self) -> &'a Lts {
        self.lts
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn congruent(&self, s1: StateId, s2: StateId) -> Result<Tristate, Error> {
        self.lts.check_state(s1)?;
        self.lts.check_state(s2)?;
        if s1 == s2 {
            return Ok(Tristate::Yes);
        }
        if !(self.closed[s1] && self.closed[s2]) {
            return Ok(Tristate::Inconclusive);
        }
        Ok(Tristate::from_bool(self.partition.same_block(s1, s2)))
    }
}

/// One-shot congruence query.
pub fn congruent(lts: &Lts, s1: StateId, s2: StateId, cfg: CongruenceConfig) -> Result<Tristate, Error> {
    Congruence::new(lts, cfg)?.congruent(s1, s2)
}
