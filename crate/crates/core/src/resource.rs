//! The version resource semiring.
//!
//! A resource is either `Bottom` (the semiring zero, "irrelevant") or a finite
//! set of version labels. The empty set is the semiring one and means "no
//! version restriction". Addition joins two data flows, multiplication
//! propagates a version requirement through a data flow; both are union on
//! label sets and differ only in how they treat `Bottom`.

use std::collections::BTreeSet;
use std::fmt;

/// A version label such as `l1` or `v2.0.0`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

impl Label {
    /// Builds a label, returning `None` when `name` does not follow the label
    /// grammar (a letter, then letters, digits, `_` or `.`-separated segments).
    pub fn new(name: impl Into<String>) -> Option<Label> {
        let name = name.into();
        if is_label(&name) {
            Some(Label(name))
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn is_label(s: &str) -> bool {
    let mut segments = s.split('.');
    let Some(head) = segments.next() else {
        return false;
    };
    let mut chars = head.chars();
    let starts_with_letter = chars.next().is_some_and(|c| c.is_ascii_alphabetic());
    let is_word = |c: char| c.is_ascii_alphanumeric() || c == '_';
    starts_with_letter
        && chars.all(is_word)
        && segments.all(|seg| !seg.is_empty() && seg.chars().all(is_word))
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An element of the version resource semiring.
///
/// `Bottom` and `Labels(∅)` are distinct: the first is the additive identity
/// and absorbs under multiplication, the second is the multiplicative
/// identity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Resource {
    Bottom,
    Labels(BTreeSet<Label>),
}

impl Resource {
    /// The semiring zero.
    pub const fn zero() -> Resource {
        Resource::Bottom
    }

    /// The semiring one, the empty label set.
    pub fn one() -> Resource {
        Resource::Labels(BTreeSet::new())
    }

    pub fn singleton(label: Label) -> Resource {
        Resource::Labels(BTreeSet::from([label]))
    }

    pub fn from_labels<I: IntoIterator<Item = Label>>(labels: I) -> Resource {
        Resource::Labels(labels.into_iter().collect())
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Resource::Bottom)
    }

    /// The label set, or `None` for `Bottom`.
    pub fn labels(&self) -> Option<&BTreeSet<Label>> {
        match self {
            Resource::Bottom => None,
            Resource::Labels(set) => Some(set),
        }
    }

    /// `l ∈ r`. Never true for `Bottom`.
    pub fn contains(&self, label: &Label) -> bool {
        self.labels().is_some_and(|set| set.contains(label))
    }

    /// Semiring addition: `Bottom` is the identity, union otherwise.
    pub fn plus(&self, other: &Resource) -> Resource {
        match (self, other) {
            (_, Resource::Bottom) => self.clone(),
            (Resource::Bottom, _) => other.clone(),
            (Resource::Labels(a), Resource::Labels(b)) => Resource::Labels(a | b),
        }
    }

    /// Semiring multiplication: `Bottom` absorbs, union otherwise.
    pub fn times(&self, other: &Resource) -> Resource {
        match (self, other) {
            (Resource::Bottom, _) | (_, Resource::Bottom) => Resource::Bottom,
            (Resource::Labels(a), Resource::Labels(b)) => Resource::Labels(a | b),
        }
    }

    /// The semiring order: `Bottom` below everything, subset on label sets.
    /// No label set is below `Bottom`.
    pub fn leq(&self, other: &Resource) -> bool {
        match (self, other) {
            (Resource::Bottom, _) => true,
            (Resource::Labels(_), Resource::Bottom) => false,
            (Resource::Labels(a), Resource::Labels(b)) => a.is_subset(b),
        }
    }

    /// Greatest lower bound with respect to [`Resource::leq`].
    pub fn meet(&self, other: &Resource) -> Resource {
        match (self, other) {
            (Resource::Bottom, _) | (_, Resource::Bottom) => Resource::Bottom,
            (Resource::Labels(a), Resource::Labels(b)) => Resource::Labels(a & b),
        }
    }

    /// Labels of `self` missing from `other` (all of `self` when `other` is
    /// `Bottom`).
    pub fn missing_from(&self, other: &Resource) -> Vec<Label> {
        match (self, other) {
            (Resource::Bottom, _) => Vec::new(),
            (Resource::Labels(a), Resource::Bottom) => a.iter().cloned().collect(),
            (Resource::Labels(a), Resource::Labels(b)) => a.difference(b).cloned().collect(),
        }
    }

    /// Every resource over `universe`: `Bottom` followed by all subsets,
    /// ordered by size and then lexicographically.
    pub fn enumerate(universe: &[Label]) -> Vec<Resource> {
        let n = universe.len();
        assert!(n < 16, "resource enumeration over {n} labels");
        let mut subsets: Vec<BTreeSet<Label>> = (0u32..1 << n)
            .map(|mask| {
                universe
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, l)| l.clone())
                    .collect()
            })
            .collect();
        subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        std::iter::once(Resource::Bottom)
            .chain(subsets.into_iter().map(Resource::Labels))
            .collect()
    }
}

pub fn plus(r1: &Resource, r2: &Resource) -> Resource {
    r1.plus(r2)
}

pub fn times(r1: &Resource, r2: &Resource) -> Resource {
    r1.times(r2)
}

pub fn leq(r1: &Resource, r2: &Resource) -> bool {
    r1.leq(r2)
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resource::Bottom => f.write_str("bot"),
            Resource::Labels(set) => {
                f.write_str("{")?;
                for (i, l) in set.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{l}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl fmt::Debug for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
pub(crate) fn labels(names: &[&str]) -> Resource {
    Resource::from_labels(names.iter().map(|n| Label::new(*n).unwrap()))
}
