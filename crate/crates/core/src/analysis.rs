//! Static side conditions of the transition rules: sorts, clock horizons,
//! initial actions, up-to-clock predictions, and well-formedness.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;

use crate::label::{Action, Horizon, Label, LabelSet};
use crate::parser::{Diagnostic, Span};
use crate::term::{Program, ProcessTerm, ThreadTerm};
use crate::Error;

/// A prediction function, tabulated at both horizons.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredictionValue {
    pub at_h0: LabelSet,
    pub at_h1: LabelSet,
}

impl PredictionValue {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The same label set at both horizons.
    pub fn constant(labels: LabelSet) -> Self {
        PredictionValue {
            at_h0: labels.clone(),
            at_h1: labels,
        }
    }

    pub fn at(&self, h: Horizon) -> &LabelSet {
        match h {
            Horizon::H0 => &self.at_h0,
            Horizon::H1 => &self.at_h1,
        }
    }

    pub fn is_antitone(&self) -> bool {
        self.at_h1.is_subset(&self.at_h0)
    }
}

/// `iA(M)`: the actions a thread offers immediately. May contain `tau`.
pub fn initial_actions(m: &ThreadTerm) -> BTreeSet<Action> {
    let mut out = BTreeSet::new();
    collect_initial(m, &mut out);
    out
}

fn collect_initial(m: &ThreadTerm, out: &mut BTreeSet<Action>) {
    match m {
        ThreadTerm::Nil(_) => {}
        ThreadTerm::Prefix { action, .. } => {
            out.insert(action.clone());
        }
        ThreadTerm::Sum(ms) => ms.iter().for_each(|t| collect_initial(t, out)),
    }
}

/// Least fixpoints of sort, clock and `iA*` over a program's definitions,
/// computed once. Per-term queries are answered from this table and
/// memoised.
#[derive(Debug)]
pub struct Analysis {
    program: Program,
    sorts: BTreeMap<String, LabelSet>,
    clocks: BTreeMap<String, Horizon>,
    predictions: BTreeMap<String, PredictionValue>,
    pred_cache: Mutex<HashMap<ProcessTerm, PredictionValue>>,
}

/// One step of the simultaneous Kleene iteration.
fn iterate<T: PartialEq + Clone>(
    prog: &Program,
    init: T,
    mut eval: impl FnMut(&ProcessTerm, &BTreeMap<String, T>) -> T,
) -> BTreeMap<String, T> {
    let mut table: BTreeMap<String, T> = prog.defs.keys().map(|k| (k.clone(), init.clone())).collect();
    loop {
        let next: BTreeMap<String, T> = prog
            .defs
            .iter()
            .map(|(k, body)| (k.clone(), eval(body, &table)))
            .collect();
        if next == table {
            return table;
        }
        table = next;
    }
}

fn unresolved(name: &str) -> Error {
    Error::UnresolvedName(name.to_string())
}

fn check_names(prog: &Program, t: &ProcessTerm) -> Result<(), Error> {
    let mut missing = None;
    t.for_each_name(&mut |n| {
        if missing.is_none() && !prog.defs.contains_key(n) {
            missing = Some(n.to_string());
        }
    });
    missing.map_or(Ok(()), |n| Err(unresolved(&n)))
}

fn sort_in(t: &ProcessTerm, table: &BTreeMap<String, LabelSet>) -> LabelSet {
    match t {
        ProcessTerm::Name(n) => table.get(n).cloned().unwrap_or_default(),
        ProcessTerm::Par(ps) => ps.iter().flat_map(|p| sort_in(p, table)).collect(),
        ProcessTerm::Restrict(p, chans) => crate::label::strip_channels(&sort_in(p, table), chans),
        ProcessTerm::Thread(th) => sort_thread_in(th, table),
    }
}

fn sort_thread_in(t: &ThreadTerm, table: &BTreeMap<String, LabelSet>) -> LabelSet {
    match t {
        ThreadTerm::Nil(Horizon::H0) => LabelSet::new(),
        ThreadTerm::Nil(Horizon::H1) => [Label::Clock].into_iter().collect(),
        ThreadTerm::Prefix { action, guard, cont } => {
            let mut out = sort_in(cont, table);
            out.extend(guard.iter().cloned());
            if let Some(l) = action.label() {
                out.insert(l.clone());
            }
            out
        }
        ThreadTerm::Sum(ms) => ms.iter().flat_map(|m| sort_thread_in(m, table)).collect(),
    }
}

fn clk_in(t: &ProcessTerm, table: &BTreeMap<String, Horizon>) -> Horizon {
    match t {
        ProcessTerm::Name(n) => table.get(n).copied().unwrap_or(Horizon::H0),
        ProcessTerm::Par(ps) => ps.iter().map(|p| clk_in(p, table)).fold(Horizon::H0, Horizon::union),
        ProcessTerm::Restrict(p, _) => clk_in(p, table),
        ProcessTerm::Thread(th) => clk_thread_in(th, table),
    }
}

fn clk_thread_in(t: &ThreadTerm, table: &BTreeMap<String, Horizon>) -> Horizon {
    match t {
        ThreadTerm::Nil(h) => *h,
        ThreadTerm::Prefix { action, cont, .. } => {
            if action.is_clock() {
                Horizon::H1
            } else {
                clk_in(cont, table)
            }
        }
        ThreadTerm::Sum(ms) => ms.iter().map(|m| clk_thread_in(m, table)).fold(Horizon::H0, Horizon::union),
    }
}

/// `iA*_C` with names looked up in `table` (which holds both horizons).
fn pred_in(t: &ProcessTerm, h: Horizon, table: &BTreeMap<String, PredictionValue>) -> LabelSet {
    match t {
        ProcessTerm::Name(n) => table.get(n).map(|p| p.at(h).clone()).unwrap_or_default(),
        ProcessTerm::Par(ps) => ps.iter().flat_map(|p| pred_in(p, h, table)).collect(),
        ProcessTerm::Restrict(p, chans) => crate::label::strip_channels(&pred_in(p, h, table), chans),
        ProcessTerm::Thread(th) => pred_thread_in(th, h, table),
    }
}

fn pred_thread_in(t: &ThreadTerm, h: Horizon, table: &BTreeMap<String, PredictionValue>) -> LabelSet {
    match t {
        ThreadTerm::Nil(_) => LabelSet::new(),
        ThreadTerm::Prefix { action, cont, .. } => {
            // the clock cuts the horizon-1 prediction
            if action.is_clock() && h.contains_clock() {
                return [Label::Clock].into_iter().collect();
            }
            let mut out = pred_in(cont, h, table);
            if let Some(l) = action.label() {
                out.insert(l.clone());
            }
            out
        }
        ThreadTerm::Sum(ms) => ms.iter().flat_map(|m| pred_thread_in(m, h, table)).collect(),
    }
}

fn pred_both(t: &ProcessTerm, table: &BTreeMap<String, PredictionValue>) -> PredictionValue {
    PredictionValue {
        at_h0: pred_in(t, Horizon::H0, table),
        at_h1: pred_in(t, Horizon::H1, table),
    }
}

impl Analysis {
    /// Builds the fixpoint tables. Fails if any name is undefined.
    pub fn new(program: &Program) -> Result<Self, Error> {
        for body in program.defs.values().chain(std::iter::once(&program.entry)) {
            check_names(program, body)?;
        }
        let sorts = iterate(program, LabelSet::new(), sort_in);
        let clocks = iterate(program, Horizon::H0, clk_in);
        let predictions = iterate(program, PredictionValue::empty(), pred_both);
        Ok(Analysis {
            program: program.clone(),
            sorts,
            clocks,
            predictions,
            pred_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn def(&self, name: &str) -> Result<&ProcessTerm, Error> {
        self.program.def(name).ok_or_else(|| unresolved(name))
    }

    /// `L(P)`: free labels, including guard labels.
    pub fn sort(&self, t: &ProcessTerm) -> Result<LabelSet, Error> {
        check_names(&self.program, t)?;
        Ok(sort_in(t, &self.sorts))
    }

    pub fn clk(&self, t: &ProcessTerm) -> Result<Horizon, Error> {
        check_names(&self.program, t)?;
        Ok(clk_in(t, &self.clocks))
    }

    pub fn clk_thread(&self, t: &ThreadTerm) -> Horizon {
        clk_thread_in(t, &self.clocks)
    }

    /// `iA*_-(P)` at both horizons.
    pub fn prediction_star(&self, t: &ProcessTerm) -> Result<PredictionValue, Error> {
        check_names(&self.program, t)?;
        Ok(self.prediction_star_unchecked(t))
    }

    pub(crate) fn prediction_star_unchecked(&self, t: &ProcessTerm) -> PredictionValue {
        if let Some(p) = self.pred_cache.lock().unwrap().get(t) {
            return p.clone();
        }
        let p = pred_both(t, &self.predictions);
        self.pred_cache.lock().unwrap().insert(t.clone(), p.clone());
        p
    }

    pub(crate) fn clk_unchecked(&self, t: &ProcessTerm) -> Horizon {
        clk_in(t, &self.clocks)
    }
}

/// Convenience wrappers over a fresh [`Analysis`].
pub fn sort(p: &ProcessTerm, prog: &Program) -> Result<LabelSet, Error> {
    Analysis::new(prog)?.sort(p)
}

pub fn clk(p: &ProcessTerm, prog: &Program) -> Result<Horizon, Error> {
    Analysis::new(prog)?.clk(p)
}

pub fn prediction_star(p: &ProcessTerm, prog: &Program) -> Result<PredictionValue, Error> {
    Analysis::new(prog)?.prediction_star(p)
}

/// Checks names, horizon agreement inside threads, clock stability of
/// prefixes and guarded recursion. Returns every violation found.
pub fn well_formed(prog: &Program) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let span_of = |key: &str| {
        prog.spans.get(key).copied().unwrap_or(Span {
            line: 1,
            column: 1,
            length: 0,
        })
    };
    let bodies: Vec<(&str, &ProcessTerm)> = prog
        .defs
        .iter()
        .map(|(k, v)| (k.as_str(), v))
        .chain(std::iter::once(("main", &prog.entry)))
        .collect();

    let mut missing = BTreeSet::new();
    for (key, body) in &bodies {
        body.for_each_name(&mut |n| {
            if !prog.defs.contains_key(n) && missing.insert((key.to_string(), n.to_string())) {
                diags.push(Diagnostic::error(
                    span_of(key),
                    "E-undefined",
                    format!("process name `{n}` is not defined (used in `{key}`)"),
                ));
            }
        });
    }
    if !diags.is_empty() {
        return diags;
    }

    let clocks = iterate(prog, Horizon::H0, clk_in);
    for (key, body) in &bodies {
        check_horizons(body, &clocks, span_of(key), key, &mut diags);
    }

    // Unguarded recursion: a name reachable from its own body without
    // passing through a prefix.
    let unguarded: BTreeMap<&str, BTreeSet<String>> = prog
        .defs
        .iter()
        .map(|(k, v)| {
            let mut out = BTreeSet::new();
            unguarded_names(v, &mut out);
            (k.as_str(), out)
        })
        .collect();
    for start in prog.defs.keys() {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<String> = unguarded[start.as_str()].iter().cloned().collect();
        while let Some(n) = stack.pop() {
            if n == *start {
                diags.push(Diagnostic::error(
                    span_of(start),
                    "E-unguarded",
                    format!("`{start}` refers to itself without an intervening prefix"),
                ));
                break;
            }
            if seen.insert(n.clone()) {
                stack.extend(unguarded[n.as_str()].iter().cloned());
            }
        }
    }
    diags
}

fn unguarded_names(t: &ProcessTerm, out: &mut BTreeSet<String>) {
    match t {
        ProcessTerm::Name(n) => {
            out.insert(n.clone());
        }
        ProcessTerm::Par(ps) => ps.iter().for_each(|p| unguarded_names(p, out)),
        ProcessTerm::Restrict(p, _) => unguarded_names(p, out),
        ProcessTerm::Thread(_) => {}
    }
}

fn check_horizons(
    t: &ProcessTerm,
    clocks: &BTreeMap<String, Horizon>,
    span: Span,
    key: &str,
    diags: &mut Vec<Diagnostic>,
) {
    match t {
        ProcessTerm::Name(_) => {}
        ProcessTerm::Par(ps) => ps.iter().for_each(|p| check_horizons(p, clocks, span, key, diags)),
        ProcessTerm::Restrict(p, _) => check_horizons(p, clocks, span, key, diags),
        ProcessTerm::Thread(th) => check_thread_horizons(th, clocks, span, key, diags),
    }
}

fn check_thread_horizons(
    t: &ThreadTerm,
    clocks: &BTreeMap<String, Horizon>,
    span: Span,
    key: &str,
    diags: &mut Vec<Diagnostic>,
) {
    match t {
        ThreadTerm::Nil(_) => {}
        ThreadTerm::Prefix { action, cont, .. } => {
            if action.is_clock() && clk_in(cont, clocks) != Horizon::H1 {
                diags.push(Diagnostic::error(
                    span,
                    "E-clock-stability",
                    format!(
                        "in `{key}`: `sigma.{}` continues with a horizon-0 process; only horizon-1 threads may tick",
                        cont
                    ),
                ));
            }
            check_horizons(cont, clocks, span, key, diags);
        }
        ThreadTerm::Sum(ms) => {
            let hs: BTreeSet<Horizon> = ms.iter().map(|m| clk_thread_in(m, clocks)).collect();
            if hs.len() > 1 {
                diags.push(Diagnostic::error(
                    span,
                    "E-horizon-mismatch",
                    format!(
                        "in `{key}`: summands of `{}` have different clock horizons",
                        ProcessTerm::Thread(t.clone())
                    ),
                ));
            }
            ms.iter().for_each(|m| check_thread_horizons(m, clocks, span, key, diags));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse, parse_process};

    fn labels(ls: &[&str]) -> LabelSet {
        ls.iter().map(|s| Label::from_wire(s).unwrap()).collect()
    }

    fn empty_prog() -> Program {
        Program::default()
    }

    #[test]
    fn sort_examples() {
        let prog = empty_prog();
        let t = parse_process("a.b.sigma.c.0_1 | ~a.0_0").unwrap();
        assert_eq!(sort(&t, &prog).unwrap(), labels(&["a", "b", "sigma", "c", "~a"]));
        let t = parse_process("(a.0_0) \\ {a}").unwrap();
        assert!(sort(&t, &prog).unwrap().is_empty());
        let prog = parse("P = a.P; main = P").unwrap();
        assert_eq!(sort(&prog.entry, &prog).unwrap(), labels(&["a"]));
    }

    #[test]
    fn sort_includes_guards() {
        let t = parse_process("a:{~b}.0_0").unwrap();
        assert_eq!(sort(&t, &empty_prog()).unwrap(), labels(&["a", "~b"]));
    }

    #[test]
    fn clk_examples() {
        let prog = empty_prog();
        assert_eq!(clk(&parse_process("0_1").unwrap(), &prog).unwrap(), Horizon::H1);
        assert_eq!(clk(&parse_process("~r.0_1").unwrap(), &prog).unwrap(), Horizon::H1);
        assert_eq!(clk(&parse_process("a.0_0").unwrap(), &prog).unwrap(), Horizon::H0);
        // guards never count towards the clock
        assert_eq!(clk(&parse_process("a:{sigma}.0_0").unwrap(), &prog).unwrap(), Horizon::H0);
        let prog = parse("P = a.Q; Q = sigma.P; main = P \\ {a}").unwrap();
        assert_eq!(clk(&prog.entry, &prog).unwrap(), Horizon::H1);
    }

    #[test]
    fn initial_action_examples() {
        let ProcessTerm::Thread(t) = parse_process("a.c.0_0 + b.d.0_0").unwrap() else { panic!() };
        assert_eq!(initial_actions(&t), [Action::from_wire("a").unwrap(), Action::from_wire("b").unwrap()].into());
        assert!(initial_actions(&ThreadTerm::Nil(Horizon::H1)).is_empty());
        let ProcessTerm::Thread(t) = parse_process("tau:{a}.P + a.Q").unwrap() else { panic!() };
        assert_eq!(initial_actions(&t), [Action::Tau, Action::from_wire("a").unwrap()].into());
    }

    #[test]
    fn prediction_star_examples() {
        let prog = empty_prog();
        let t = parse_process("a.b.sigma.c.0_1 | ~a.0_0").unwrap();
        let p = prediction_star(&t, &prog).unwrap();
        assert_eq!(p.at_h1, labels(&["a", "b", "sigma", "~a"]));
        assert_eq!(p.at_h0, labels(&["a", "b", "sigma", "c", "~a"]));
        let p = prediction_star(&parse_process("0_0").unwrap(), &prog).unwrap();
        assert_eq!(p, PredictionValue::empty());
    }

    #[test]
    fn prediction_drops_tau_and_guards() {
        let p = prediction_star(&parse_process("tau:{b}.a.0_0").unwrap(), &empty_prog()).unwrap();
        assert_eq!(p.at_h0, labels(&["a"]));
    }

    #[test]
    fn prediction_through_recursion_and_restriction() {
        let prog = parse("P = a.sigma.Q; Q = b.P; main = P \\ {b}").unwrap();
        let p = prediction_star(&prog.entry, &prog).unwrap();
        assert_eq!(p.at_h1, labels(&["a", "sigma"]));
        assert_eq!(p.at_h0, labels(&["a", "sigma"]));
        let p = prediction_star(&ProcessTerm::name("Q"), &prog).unwrap();
        assert_eq!(p.at_h0, labels(&["a", "b", "sigma"]));
    }

    #[test]
    fn unresolved_name_is_an_error() {
        let prog = empty_prog();
        assert!(matches!(sort(&ProcessTerm::name("X"), &prog), Err(Error::UnresolvedName(_))));
        assert!(clk(&ProcessTerm::name("X"), &prog).is_err());
        assert!(prediction_star(&ProcessTerm::name("X"), &prog).is_err());
    }

    #[test]
    fn well_formed_examples() {
        let d = well_formed(&parse("main = a.0_0 + sigma.0_1").unwrap());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, "E-horizon-mismatch");
        let d = well_formed(&parse("main = sigma.0_0").unwrap());
        assert_eq!(d[0].code, "E-clock-stability");
        let store = parse("S = r:{w}.S + w:{w}.S1; S1 = sigma:{sigma}.S; main = S").unwrap();
        assert!(well_formed(&store).is_empty());
    }

    #[test]
    fn well_formed_names_and_guardedness() {
        let d = well_formed(&parse("main = X").unwrap());
        assert_eq!(d[0].code, "E-undefined");
        let d = well_formed(&parse("X = Y | a.0_0; Y = X \\ {a}; main = X").unwrap());
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|d| d.code == "E-unguarded"));
        assert!(well_formed(&parse("X = a.(X | X); main = X").unwrap()).is_empty());
    }

    #[test]
    fn diagnostics_point_at_the_definition() {
        let d = well_formed(&parse("P = a.P;\nQ = sigma.0_0;\nmain = P | Q").unwrap());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].span.line, 2);
    }
}
