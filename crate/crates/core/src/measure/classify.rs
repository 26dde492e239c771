use std::collections::{BTreeMap, BTreeSet};

use super::CoincidencePattern;
use crate::error::{Error, Result};

/// Text used wherever a pattern matches no class.
pub const UNCLASSIFIED: &str = "unclassified";

/// Disjoint pattern classes, each mapped to a label.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationTable<L> {
    classes: Vec<(L, BTreeSet<CoincidencePattern>)>,
    index: BTreeMap<CoincidencePattern, usize>,
}

impl<L> ClassificationTable<L> {
    pub fn new(classes: Vec<(L, BTreeSet<CoincidencePattern>)>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (k, (_, patterns)) in classes.iter().enumerate() {
            for p in patterns {
                if index.insert(p.clone(), k).is_some() {
                    return Err(Error::OverlappingClasses(p.to_string()));
                }
            }
        }
        Ok(Self { classes, index })
    }

    /// The label of the class holding `pattern`, or `None` (unclassified).
    pub fn classify(&self, pattern: &CoincidencePattern) -> Option<&L> {
        self.index.get(pattern).map(|&k| &self.classes[k].0)
    }

    pub fn classes(&self) -> impl Iterator<Item = (&L, &BTreeSet<CoincidencePattern>)> {
        self.classes.iter().map(|(l, p)| (l, p))
    }

    pub fn patterns_for(&self, label: &L) -> Option<&BTreeSet<CoincidencePattern>>
    where
        L: PartialEq,
    {
        self.classes.iter().find(|(l, _)| l == label).map(|(_, p)| p)
    }
}

pub fn classify<'a, L>(pattern: &CoincidencePattern, table: &'a ClassificationTable<L>) -> Option<&'a L> {
    table.classify(pattern)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ps: &[&str]) -> BTreeSet<CoincidencePattern> {
        ps.iter().map(|p| p.parse().unwrap()).collect()
    }

    fn fig1_table() -> ClassificationTable<&'static str> {
        ClassificationTable::new(vec![
            ("Φ+", set(&["D5+D7+D9+D11", "D5+D7+D10+D12", "D6+D8+D9+D11", "D6+D8+D10+D12"])),
            ("Φ-", set(&["D5+D8+D9+D12", "D5+D8+D10+D11", "D6+D7+D9+D12", "D6+D7+D10+D11"])),
        ])
        .unwrap()
    }

    #[test]
    fn known_patterns_map_to_labels() {
        let t = fig1_table();
        assert_eq!(classify(&"D5+D7+D9+D11".parse().unwrap(), &t), Some(&"Φ+"));
        assert_eq!(classify(&"D5+D8+D9+D12".parse().unwrap(), &t), Some(&"Φ-"));
    }

    #[test]
    fn unknown_pattern_is_unclassified() {
        let t = fig1_table();
        assert_eq!(t.classify(&"D5+D7+D9+D12".parse().unwrap()), None);
    }

    #[test]
    fn overlapping_classes_are_rejected() {
        let err = ClassificationTable::new(vec![("x", set(&["D1+D2"])), ("y", set(&["D2+D1", "D3"]))]).unwrap_err();
        assert_eq!(err, Error::OverlappingClasses("D1+D2".into()));
    }
}
