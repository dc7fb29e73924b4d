//! Finite sort-indexed families of named elements.
//!
//! Every carrier in this crate — variable sets, node sets, boundaries —
//! is a finite set of string names in which each name is assigned a sort.
//! Functions between such sets are plain name maps checked for totality,
//! sort preservation and (where required) injectivity.

use std::collections::BTreeMap;
use thiserror::Error;

/// Characters that may not occur in element names. `$` marks input
/// references in the file formats, `<`/`>` delimit cut markers, and the
/// rest are punctuation of the text formats.
const RESERVED: &[char] = &[
    '(', ')', '[', ']', '{', '}', ',', ';', ':', '=', '"', '$', '<', '>', '#',
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("invalid name {0:?}: names must be nonempty and free of whitespace and punctuation")]
    InvalidName(String),
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("map is not total: missing {0:?}")]
    NotTotal(String),
    #[error("map does not preserve sorts at {name:?}: {from} vs {to}")]
    SortMismatch {
        name: String,
        from: String,
        to: String,
    },
    #[error("map is not injective: {0:?} and {1:?} share an image")]
    NotInjective(String, String),
}

/// Check that a name is usable as an element, operation or node name.
pub fn validate_name(name: &str) -> Result<(), FamilyError> {
    if name.is_empty()
        || name
            .chars()
            .any(|c| c.is_whitespace() || RESERVED.contains(&c))
    {
        return Err(FamilyError::InvalidName(name.to_string()));
    }
    Ok(())
}

/// A finite sort-indexed set: each element name carries its sort.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SortedSet {
    elems: BTreeMap<String, String>,
}

impl SortedSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from `(name, sort)` pairs, rejecting duplicates and bad names.
    pub fn from_pairs<I, S, T>(pairs: I) -> Result<Self, FamilyError>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut set = SortedSet::new();
        for (name, sort) in pairs {
            set.insert(name.into(), sort.into())?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, name: String, sort: String) -> Result<(), FamilyError> {
        validate_name(&name)?;
        if self.elems.contains_key(&name) {
            return Err(FamilyError::DuplicateName(name));
        }
        self.elems.insert(name, sort);
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.elems.contains_key(name)
    }

    pub fn sort_of(&self, name: &str) -> Option<&str> {
        self.elems.get(name).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// Names in lexicographic order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.elems.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.elems.iter().map(|(n, s)| (n.as_str(), s.as_str()))
    }

    /// Union of two sorted sets with disjoint name sets.
    pub fn disjoint_union(&self, other: &SortedSet) -> Result<SortedSet, FamilyError> {
        let mut out = self.clone();
        for (name, sort) in other.iter() {
            out.insert(name.to_string(), sort.to_string())?;
        }
        Ok(out)
    }

    /// True when both sets assign the same sorts to the same names.
    pub fn same_as(&self, other: &SortedSet) -> bool {
        self == other
    }
}

/// Check that `map` is a total sort-preserving function `dom → cod`.
pub fn check_function(
    dom: &SortedSet,
    cod: &SortedSet,
    map: &BTreeMap<String, String>,
) -> Result<(), FamilyError> {
    for (name, _) in dom.iter() {
        let image = map
            .get(name)
            .ok_or_else(|| FamilyError::NotTotal(name.to_string()))?;
        let to_sort = cod
            .sort_of(image)
            .ok_or_else(|| FamilyError::UnknownElement(image.clone()))?;
        let from_sort = dom.sort_of(name).unwrap();
        if from_sort != to_sort {
            return Err(FamilyError::SortMismatch {
                name: name.to_string(),
                from: from_sort.to_string(),
                to: to_sort.to_string(),
            });
        }
    }
    for key in map.keys() {
        if !dom.contains(key) {
            return Err(FamilyError::UnknownElement(key.clone()));
        }
    }
    Ok(())
}

/// Check injectivity of a function given as a name map.
pub fn check_injective(map: &BTreeMap<String, String>) -> Result<(), FamilyError> {
    let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
    for (name, image) in map {
        if let Some(prev) = seen.insert(image.as_str(), name.as_str()) {
            return Err(FamilyError::NotInjective(prev.to_string(), name.clone()));
        }
    }
    Ok(())
}

/// Identity map on the names of a sorted set.
pub fn identity_map(set: &SortedSet) -> BTreeMap<String, String> {
    set.names().map(|n| (n.to_string(), n.to_string())).collect()
}

/// Compose two name maps (`second . first`).
pub fn compose_maps(
    first: &BTreeMap<String, String>,
    second: &BTreeMap<String, String>,
) -> Option<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (name, mid) in first {
        out.insert(name.clone(), second.get(mid)?.clone());
    }
    Some(out)
}

/// Pick a name based on `base` that is absent from `used`, by appending
/// `_1`, `_2`, … when needed.
pub fn fresh_name(base: &str, used: &dyn Fn(&str) -> bool) -> String {
    if !used(base) {
        return base.to_string();
    }
    for i in 1.. {
        let candidate = format!("{base}_{i}");
        if !used(&candidate) {
            return candidate;
        }
    }
    unreachable!()
}
