//! Labels, actions and clock horizons.

use std::collections::BTreeSet;
use std::fmt;

/// A synchronisation label: a channel, its co-name, or the single clock.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Chan(String),
    CoChan(String),
    Clock,
}

pub type LabelSet = BTreeSet<Label>;

impl Label {
    pub fn chan(name: impl Into<String>) -> Self {
        Label::Chan(name.into())
    }

    pub fn co(name: impl Into<String>) -> Self {
        Label::CoChan(name.into())
    }

    /// `a <-> ~a`, and the clock is its own complement.
    pub fn complement(&self) -> Label {
        match self {
            Label::Chan(a) => Label::CoChan(a.clone()),
            Label::CoChan(a) => Label::Chan(a.clone()),
            Label::Clock => Label::Clock,
        }
    }

    /// Rendezvous labels are the channels and co-channels.
    pub fn is_rendezvous(&self) -> bool {
        !matches!(self, Label::Clock)
    }

    /// The underlying channel name, if any.
    pub fn channel(&self) -> Option<&str> {
        match self {
            Label::Chan(a) | Label::CoChan(a) => Some(a),
            Label::Clock => None,
        }
    }

    /// Parses the wire form: `a`, `~a` or `sigma`.
    pub fn from_wire(s: &str) -> Option<Label> {
        if s == "sigma" {
            return Some(Label::Clock);
        }
        let (co, name) = match s.strip_prefix('~') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        if !is_channel_name(name) {
            return None;
        }
        Some(if co {
            Label::co(name)
        } else {
            Label::chan(name)
        })
    }
}

pub(crate) fn is_channel_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && s != "tau"
        && s != "sigma"
        && s != "main"
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Chan(a) => write!(f, "{a}"),
            Label::CoChan(a) => write!(f, "~{a}"),
            Label::Clock => f.write_str("sigma"),
        }
    }
}

/// `L-bar`: the pointwise complement of a label set.
pub fn complement_set(labels: &LabelSet) -> LabelSet {
    labels.iter().map(Label::complement).collect()
}

/// Removes every channel of `channels` together with its co-name.
pub fn strip_channels(labels: &LabelSet, channels: &BTreeSet<String>) -> LabelSet {
    labels
        .iter()
        .filter(|l| l.channel().is_none_or(|c| !channels.contains(c)))
        .cloned()
        .collect()
}

/// An action is a visible label or the silent action.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Vis(Label),
    Tau,
}

impl Action {
    pub fn label(&self) -> Option<&Label> {
        match self {
            Action::Vis(l) => Some(l),
            Action::Tau => None,
        }
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Action::Tau)
    }

    pub fn is_clock(&self) -> bool {
        matches!(self, Action::Vis(Label::Clock))
    }

    /// Member of `R ∪ {τ}`.
    pub fn is_rendezvous_or_tau(&self) -> bool {
        match self {
            Action::Vis(l) => l.is_rendezvous(),
            Action::Tau => true,
        }
    }

    pub fn is_rendezvous(&self) -> bool {
        matches!(self, Action::Vis(l) if l.is_rendezvous())
    }

    pub fn from_wire(s: &str) -> Option<Action> {
        if s == "tau" {
            Some(Action::Tau)
        } else {
            Label::from_wire(s).map(Action::Vis)
        }
    }
}

impl From<Label> for Action {
    fn from(l: Label) -> Self {
        Action::Vis(l)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Vis(l) => l.fmt(f),
            Action::Tau => f.write_str("tau"),
        }
    }
}

/// Clock horizon: `H0` is the empty clock set, `H1` is `{sigma}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Horizon {
    H0,
    H1,
}

impl Horizon {
    pub const ALL: [Horizon; 2] = [Horizon::H0, Horizon::H1];

    /// Subset order on the underlying clock sets.
    pub fn subset_of(self, other: Horizon) -> bool {
        self <= other
    }

    pub fn union(self, other: Horizon) -> Horizon {
        self.max(other)
    }

    pub fn contains_clock(self) -> bool {
        self == Horizon::H1
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Horizon::H0 => 0,
            Horizon::H1 => 1,
        }
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Renders `{a,~b,sigma}`.
pub(crate) fn fmt_labels(labels: &LabelSet) -> String {
    let items: Vec<String> = labels.iter().map(ToString::to_string).collect();
    format!("{{{}}}", items.join(","))
}
