#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ccslm::analysis::well_formed;
use ccslm::coherence::check_lts;
use ccslm::lts::explore;
use ccslm::{
    Action, Blocking, CongruenceConfig, Horizon, Label, LabelSet, Lts, PredictionValue, ProcessTerm, Program,
    StrategicLabel, ThreadTerm, Verdict,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CHANNELS: [&str; 3] = ["a", "b", "c"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn visible(rng: &mut impl Rng, chans: &[&str]) -> Label {
    let c = *chans.choose(rng).unwrap();
    if rng.gen_bool(0.5) {
        Label::chan(c)
    } else {
        Label::co(c)
    }
}

/// Random programs whose prefixes are mostly self-blocking, so a fair
/// share of them turns out coherent.
pub struct ProgramGen {
    pub rng: ChaCha8Rng,
    pub chans: Vec<&'static str>,
    pub max_depth: usize,
}

impl ProgramGen {
    pub fn new(seed: u64) -> Self {
        ProgramGen {
            rng: rng(seed),
            chans: CHANNELS.to_vec(),
            max_depth: 3,
        }
    }

    fn guard(&mut self, action: &Action) -> LabelSet {
        let mut g = LabelSet::new();
        if let Some(l) = action.label() {
            if self.rng.gen_bool(0.8) {
                g.insert(l.clone());
            }
        }
        while self.rng.gen_bool(0.25) {
            let chans = self.chans.clone();
            g.insert(visible(&mut self.rng, &chans));
        }
        g
    }

    fn cont(&mut self, h: Horizon, depth: usize, names: &[(String, Horizon)]) -> ProcessTerm {
        let same: Vec<&String> = names.iter().filter(|(_, nh)| *nh == h).map(|(n, _)| n).collect();
        let roll: f64 = self.rng.gen();
        if depth > 0 && roll < 0.4 {
            ProcessTerm::Thread(self.thread(h, depth - 1, names))
        } else if depth > 0 && roll < 0.42 {
            ProcessTerm::par(vec![
                ProcessTerm::Thread(self.thread(h, depth - 1, names)),
                ProcessTerm::Thread(self.thread(h, depth - 1, names)),
            ])
        } else if !same.is_empty() && roll < 0.8 {
            ProcessTerm::name((*same.choose(&mut self.rng).unwrap()).clone())
        } else {
            ProcessTerm::nil(h)
        }
    }

    fn prefix(&mut self, h: Horizon, depth: usize, names: &[(String, Horizon)]) -> ThreadTerm {
        let roll: f64 = self.rng.gen();
        let action = if h == Horizon::H1 && roll < 0.2 {
            Action::Vis(Label::Clock)
        } else if roll < 0.35 {
            Action::Tau
        } else {
            let chans = self.chans.clone();
            Action::Vis(visible(&mut self.rng, &chans))
        };
        let guard = self.guard(&action);
        let cont = self.cont(h, depth, names);
        ThreadTerm::Prefix {
            action,
            guard,
            cont: Box::new(cont),
        }
    }

    pub fn thread(&mut self, h: Horizon, depth: usize, names: &[(String, Horizon)]) -> ThreadTerm {
        if self.rng.gen_bool(0.3) {
            ThreadTerm::Sum(vec![self.prefix(h, depth, names), self.prefix(h, depth, names)])
        } else {
            self.prefix(h, depth, names)
        }
    }

    /// A well-formed program, or `None` when the draw was ill-formed.
    pub fn try_program(&mut self) -> Option<Program> {
        let k = self.rng.gen_range(1..=3);
        let names: Vec<(String, Horizon)> = (0..k)
            .map(|i| {
                let h = if self.rng.gen_bool(0.3) { Horizon::H1 } else { Horizon::H0 };
                (format!("D{i}"), h)
            })
            .collect();
        let mut defs = BTreeMap::new();
        for (n, h) in &names {
            let depth = self.max_depth;
            defs.insert(n.clone(), ProcessTerm::Thread(self.thread(*h, depth, &names)));
        }
        let parts = self.rng.gen_range(2..=3);
        let mut comps = Vec::new();
        for _ in 0..parts {
            if self.rng.gen_bool(0.6) {
                comps.push(ProcessTerm::name(names.choose(&mut self.rng).unwrap().0.clone()));
            } else {
                let h = if self.rng.gen_bool(0.3) { Horizon::H1 } else { Horizon::H0 };
                let depth = self.max_depth - 1;
                comps.push(ProcessTerm::Thread(self.thread(h, depth, &names)));
            }
        }
        let mut entry = if comps.len() == 1 { comps.pop().unwrap() } else { ProcessTerm::par(comps) };
        if self.rng.gen_bool(0.6) {
            let chans: Vec<&str> = self.chans.iter().copied().filter(|_| self.rng.gen_bool(0.6)).collect();
            if !chans.is_empty() {
                entry = ProcessTerm::restrict(entry, chans);
            }
        }
        let prog = Program::new(defs, entry);
        well_formed(&prog).is_empty().then_some(prog)
    }

    /// Draws until the checker declares a program coherent on a complete
    /// state space of at most `bound` states.
    pub fn coherent(&mut self, bound: usize, cfg: CongruenceConfig) -> (Program, Lts) {
        self.coherent_where(bound, cfg, |_| true)
    }

    /// As [`ProgramGen::coherent`], keeping only state spaces that `keep`
    /// accepts.
    pub fn coherent_where(&mut self, bound: usize, cfg: CongruenceConfig, keep: impl Fn(&Lts) -> bool) -> (Program, Lts) {
        loop {
            let Some(p) = self.try_program() else { continue };
            let lts = explore(&p, bound).unwrap();
            if !lts.complete || !keep(&lts) {
                continue;
            }
            if check_lts(&lts, cfg).unwrap().verdict == Verdict::Coherent {
                return (p, lts);
            }
        }
    }
}

/// Number of states with two or more τ-transitions.
pub fn tau_branching(lts: &Lts) -> usize {
    (0..lts.len())
        .filter(|&s| lts.outgoing(s).filter(|t| t.label.action.is_tau()).count() > 1)
        .count()
}

/// Renames process names with a prefix and channels through `chan`.
pub fn rename(t: &ProcessTerm, prefix: &str, chan: &dyn Fn(&str) -> String) -> ProcessTerm {
    let label = |l: &Label| match l {
        Label::Chan(a) => Label::chan(chan(a)),
        Label::CoChan(a) => Label::co(chan(a)),
        Label::Clock => Label::Clock,
    };
    fn thread(m: &ThreadTerm, prefix: &str, chan: &dyn Fn(&str) -> String, label: &dyn Fn(&Label) -> Label) -> ThreadTerm {
        match m {
            ThreadTerm::Nil(h) => ThreadTerm::Nil(*h),
            ThreadTerm::Prefix { action, guard, cont } => ThreadTerm::Prefix {
                action: match action {
                    Action::Vis(l) => Action::Vis(label(l)),
                    Action::Tau => Action::Tau,
                },
                guard: guard.iter().map(label).collect(),
                cont: Box::new(rename(cont, prefix, chan)),
            },
            ThreadTerm::Sum(ms) => ThreadTerm::Sum(ms.iter().map(|m| thread(m, prefix, chan, label)).collect()),
        }
    }
    match t {
        ProcessTerm::Name(n) => ProcessTerm::name(format!("{prefix}{n}")),
        ProcessTerm::Par(ps) => ProcessTerm::par(ps.iter().map(|p| rename(p, prefix, chan)).collect()),
        ProcessTerm::Restrict(p, a) => ProcessTerm::Restrict(Box::new(rename(p, prefix, chan)), a.iter().map(|c| chan(c)).collect()),
        ProcessTerm::Thread(m) => ProcessTerm::Thread(thread(m, prefix, chan, &label)),
    }
}

/// `P1 | P2` with the definitions of both, kept apart by name prefixes.
pub fn compose(p1: &Program, p2: &Program, chan2: &dyn Fn(&str) -> String) -> Program {
    let same = |c: &str| c.to_string();
    let mut defs = BTreeMap::new();
    for (n, b) in &p1.defs {
        defs.insert(format!("L{n}"), rename(b, "L", &same));
    }
    for (n, b) in &p2.defs {
        defs.insert(format!("R{n}"), rename(b, "R", chan2));
    }
    let entry = ProcessTerm::par(vec![rename(&p1.entry, "L", &same), rename(&p2.entry, "R", chan2)]);
    Program::new(defs, entry)
}

pub fn random_label(rng: &mut impl Rng, actions: &[Action], full: bool) -> StrategicLabel {
    let action = actions.choose(rng).unwrap().clone();
    if !full {
        return StrategicLabel {
            action,
            blocking: Blocking::empty(),
            prediction: PredictionValue::empty(),
        };
    }
    let mut labels = LabelSet::new();
    if rng.gen_bool(0.5) {
        labels.insert(visible(rng, &["a", "b"]));
    }
    let h = if rng.gen_bool(0.5) { Horizon::H0 } else { Horizon::H1 };
    StrategicLabel {
        action,
        blocking: Blocking::single(h, labels),
        prediction: PredictionValue::empty(),
    }
}

/// A random LTS with up to `max_states` states.
pub fn random_lts(rng: &mut impl Rng, max_states: usize, full_labels: bool) -> Lts {
    let n = rng.gen_range(1..=max_states);
    let actions = [Action::Tau, Action::Vis(Label::chan("a")), Action::Vis(Label::co("a")), Action::Vis(Label::chan("b"))];
    let density = rng.gen_range(0.5..2.5);
    let m = ((n as f64) * density) as usize;
    let edges = (0..m)
        .map(|_| {
            let s = rng.gen_range(0..n);
            let t = rng.gen_range(0..n);
            (s, random_label(rng, &actions, full_labels), t)
        })
        .collect();
    Lts::from_edges(n, 0, edges)
}

/// Greatest-fixpoint bisimilarity by repeated removal of bad pairs, on
/// explicit successor sets.
pub fn naive_bisim<K: Ord + Clone>(succ: &[BTreeSet<(K, usize)>]) -> Vec<Vec<bool>> {
    let n = succ.len();
    let mut rel = vec![vec![true; n]; n];
    loop {
        let mut changed = false;
        for s in 0..n {
            for t in 0..n {
                if !rel[s][t] {
                    continue;
                }
                let sim = |x: usize, y: usize, rel: &Vec<Vec<bool>>| {
                    succ[x].iter().all(|(k, x2)| succ[y].iter().any(|(k2, y2)| k == k2 && rel[*x2][*y2]))
                };
                if !(sim(s, t, &rel) && sim(t, s, &rel)) {
                    rel[s][t] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return rel;
        }
    }
}

pub fn strong_succ<K: Ord + Clone>(lts: &Lts, key: impl Fn(&StrategicLabel) -> K) -> Vec<BTreeSet<(K, usize)>> {
    (0..lts.len())
        .map(|s| lts.outgoing(s).map(|t| (key(&t.label), t.target)).collect())
        .collect()
}

/// Weak successors computed the slow way: τ* by repeated composition.
pub fn weak_succ(lts: &Lts) -> Vec<BTreeSet<(Option<Label>, usize)>> {
    let n = lts.len();
    let mut tau = vec![vec![false; n]; n];
    for (s, row) in tau.iter_mut().enumerate() {
        row[s] = true;
    }
    for t in &lts.transitions {
        if t.label.action.is_tau() {
            tau[t.source][t.target] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if tau[i][k] {
                for j in 0..n {
                    if tau[k][j] {
                        tau[i][j] = true;
                    }
                }
            }
        }
    }
    let mut out = vec![BTreeSet::new(); n];
    for s in 0..n {
        for u in 0..n {
            if !tau[s][u] {
                continue;
            }
            out[s].insert((None, u));
            for t in lts.outgoing(u) {
                if let Some(l) = t.label.action.label() {
                    for v in 0..n {
                        if tau[t.target][v] {
                            out[s].insert((Some(l.clone()), v));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Classical CCS transitions: prefixes fire, components of `|` move alone
/// or hand-shake on complementary names, restriction hides channels.
/// Guards and strategic labels play no part.
pub fn ccs_steps(p: &ProcessTerm, defs: &BTreeMap<String, ProcessTerm>) -> Vec<(Action, ProcessTerm)> {
    fn thread(m: &ThreadTerm) -> Vec<(Action, ProcessTerm)> {
        match m {
            ThreadTerm::Nil(_) => vec![],
            ThreadTerm::Prefix { action, cont, .. } => vec![(action.clone(), (**cont).clone())],
            ThreadTerm::Sum(ms) => ms.iter().flat_map(thread).collect(),
        }
    }
    match p {
        ProcessTerm::Name(n) => ccs_steps(&defs[n], defs),
        ProcessTerm::Thread(m) => thread(m),
        ProcessTerm::Restrict(q, chans) => ccs_steps(q, defs)
            .into_iter()
            .filter(|(a, _)| a.label().and_then(Label::channel).is_none_or(|c| !chans.contains(c)))
            .map(|(a, q2)| (a, ProcessTerm::Restrict(Box::new(q2), chans.clone())))
            .collect(),
        ProcessTerm::Par(ps) => {
            let steps: Vec<_> = ps.iter().map(|q| ccs_steps(q, defs)).collect();
            let mut out = Vec::new();
            for (i, si) in steps.iter().enumerate() {
                for (a, qi) in si {
                    let mut v = ps.clone();
                    v[i] = qi.clone();
                    out.push((a.clone(), ProcessTerm::Par(v)));
                }
                for (j, sj) in steps.iter().enumerate().skip(i + 1) {
                    for (a, qi) in si {
                        for (b, qj) in sj {
                            let (Some(la), Some(lb)) = (a.label(), b.label()) else { continue };
                            if la.is_rendezvous() && la.complement() == *lb {
                                let mut v = ps.clone();
                                v[i] = qi.clone();
                                v[j] = qj.clone();
                                out.push((Action::Tau, ProcessTerm::Par(v)));
                            }
                        }
                    }
                }
            }
            out
        }
    }
}

/// Guard-free, clock-free terms of depth at most `depth`, over the
/// definitions `D0`, `D1` (which the caller must supply).
pub fn ccs_term(rng: &mut impl Rng, depth: usize, names: bool) -> ProcessTerm {
    fn thread(rng: &mut impl Rng, depth: usize, names: bool) -> ThreadTerm {
        if depth == 0 || rng.gen_bool(0.15) {
            return ThreadTerm::Nil(Horizon::H0);
        }
        if rng.gen_bool(0.25) {
            let k = rng.gen_range(2..=3);
            return ThreadTerm::Sum((0..k).map(|_| prefix(rng, depth - 1, names)).collect());
        }
        prefix(rng, depth, names)
    }
    fn prefix(rng: &mut impl Rng, depth: usize, names: bool) -> ThreadTerm {
        let action = if rng.gen_bool(0.2) { Action::Tau } else { Action::Vis(visible(rng, &CHANNELS)) };
        ThreadTerm::Prefix {
            action,
            guard: LabelSet::new(),
            cont: Box::new(ccs_term(rng, depth.saturating_sub(1), names)),
        }
    }
    let roll: f64 = rng.gen();
    if depth == 0 {
        return ProcessTerm::nil(Horizon::H0);
    }
    if names && roll < 0.1 {
        ProcessTerm::name(if rng.gen_bool(0.5) { "D0" } else { "D1" })
    } else if roll < 0.35 {
        let k = rng.gen_range(2..=3);
        ProcessTerm::par((0..k).map(|_| ccs_term(rng, depth - 1, names)).collect())
    } else if roll < 0.45 {
        let chans: Vec<&str> = CHANNELS.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        ProcessTerm::restrict(ccs_term(rng, depth - 1, names), chans)
    } else {
        ProcessTerm::Thread(thread(rng, depth, names))
    }
}
