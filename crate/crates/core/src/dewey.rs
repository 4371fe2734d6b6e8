use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Hierarchical element label. The document root is `0`; the i-th child of a
/// node appends `i` (1-based), so `0.1.3` is the third child of the first
/// child of the root.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DeweyId(Vec<u32>);

impl DeweyId {
    pub fn root() -> Self {
        DeweyId(vec![0])
    }

    pub fn from_components(components: Vec<u32>) -> Option<Self> {
        match components.first() {
            Some(0) => Some(DeweyId(components)),
            _ => None,
        }
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    /// Number of components; the root has depth 1.
    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.len() == 1
    }

    pub fn child(&self, position: u32) -> Self {
        let mut components = Vec::with_capacity(self.0.len() + 1);
        components.extend_from_slice(&self.0);
        components.push(position);
        DeweyId(components)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.is_root() {
            None
        } else {
            Some(DeweyId(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// True if `self` is a strict ancestor of `other`.
    pub fn is_ancestor_of(&self, other: &DeweyId) -> bool {
        self.0.len() < other.0.len() && other.0.starts_with(&self.0)
    }

    pub fn overlaps(&self, other: &DeweyId) -> bool {
        self.is_ancestor_of(other) || other.is_ancestor_of(self)
    }

    /// Strict ancestors from the parent up to the root.
    pub fn ancestors(&self) -> impl Iterator<Item = DeweyId> + '_ {
        (1..self.0.len()).rev().map(|len| DeweyId(self.0[..len].to_vec()))
    }
}

impl Ord for DeweyId {
    fn cmp(&self, other: &Self) -> Ordering {
        // slice ordering is lexicographic with a proper prefix sorting first
        self.0.cmp(&other.0)
    }
}

impl PartialOrd for DeweyId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DeweyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for DeweyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DeweyId({self})")
    }
}

impl FromStr for DeweyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let components = s
            .split('.')
            .map(|part| part.parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| Error::Domain(format!("invalid Dewey id `{s}`")))?;
        DeweyId::from_components(components).ok_or_else(|| Error::Domain(format!("Dewey id `{s}` must start with 0")))
    }
}
