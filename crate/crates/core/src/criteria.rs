//! Layout-specific overlap rules: which categories may be overlaid
//! (parent), which must sit on a parent (child), and which may not overlap
//! anything (others).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Parent,
    Child,
    Others,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriteriaSet {
    pub parent: BTreeSet<String>,
    pub child: BTreeSet<String>,
    pub others: BTreeSet<String>,
    pub preserve_aspect: BTreeSet<String>,
    pub preserve_size: BTreeSet<String>,
}

impl CriteriaSet {
    /// Every category placed in `others`.
    pub fn all_others<I, S>(categories: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            others: categories.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    /// Check disjointness and fold preservation-only categories into `others`.
    pub fn normalized(mut self) -> Result<Self> {
        for (a, an, b, bn) in [
            (&self.parent, "parent", &self.child, "child"),
            (&self.parent, "parent", &self.others, "others"),
            (&self.child, "child", &self.others, "others"),
        ] {
            if let Some(c) = a.intersection(b).next() {
                return Err(Error::InvalidCriteria(format!(
                    "category `{c}` listed in both {an} and {bn}"
                )));
            }
        }
        let extra: Vec<String> = self
            .preserve_aspect
            .iter()
            .chain(&self.preserve_size)
            .filter(|c| !self.contains(c))
            .cloned()
            .collect();
        self.others.extend(extra);
        Ok(self)
    }

    /// Whether `category` belongs to the declared universe.
    pub fn contains(&self, category: &str) -> bool {
        self.parent.contains(category) || self.child.contains(category) || self.others.contains(category)
    }

    /// Role of a category; undeclared categories behave as `others`.
    pub fn role(&self, category: &str) -> Role {
        if self.parent.contains(category) {
            Role::Parent
        } else if self.child.contains(category) {
            Role::Child
        } else {
            Role::Others
        }
    }

    pub fn universe(&self) -> BTreeSet<&str> {
        self.parent
            .iter()
            .chain(&self.child)
            .chain(&self.others)
            .map(String::as_str)
            .collect()
    }

    pub fn keeps_aspect(&self, category: &str) -> bool {
        self.preserve_aspect.contains(category)
    }

    pub fn keeps_size(&self, category: &str) -> bool {
        self.preserve_size.contains(category)
    }
}

/// Overlap weight for an ordered pair: 0 when exactly one side is a parent.
pub fn overlap_weight(a: Role, b: Role) -> f64 {
    if (a == Role::Parent) != (b == Role::Parent) {
        0.0
    } else {
        1.0
    }
}

/// Containment weight: 1 only for a (parent, child) pair in either order.
pub fn containment_weight(a: Role, b: Role) -> f64 {
    match (a, b) {
        (Role::Parent, Role::Child) | (Role::Child, Role::Parent) => 1.0,
        _ => 0.0,
    }
}

pub fn parse_criteria(bytes: &[u8]) -> Result<CriteriaSet> {
    let raw: CriteriaSet = serde_json::from_slice(bytes)?;
    raw.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn document_criteria_prohibit_all_overlap() {
        let c = parse_criteria(br#"{"others":["text","title","list","table","figure"]}"#).unwrap();
        assert!(c.parent.is_empty() && c.child.is_empty());
        assert_eq!(c.others.len(), 5);
        assert_eq!(c.role("table"), Role::Others);
    }

    #[test]
    fn magazine_criteria() {
        let c = parse_criteria(
            br#"{"parent":["image"],"child":["text-over-image","headline-over-image"],
                 "others":["text","headline"],"preserve_size":["image"]}"#,
        )
        .unwrap();
        assert_eq!(c.role("image"), Role::Parent);
        assert_eq!(c.role("headline-over-image"), Role::Child);
        assert_eq!(c.role("headline"), Role::Others);
        assert!(c.keeps_size("image"));
        assert!(!c.keeps_aspect("image"));
    }

    #[test]
    fn overlapping_sets_rejected() {
        let err = parse_criteria(br#"{"parent":["image"],"child":["image"]}"#).unwrap_err();
        assert!(err.to_string().contains("image"));
    }

    #[test]
    fn preservation_only_categories_join_others() {
        let c = parse_criteria(br#"{"parent":["image"],"preserve_aspect":["logo","image"]}"#).unwrap();
        assert!(c.others.contains("logo"));
        assert!(!c.others.contains("image"));
        assert_eq!(parse_criteria(b"{}").unwrap(), CriteriaSet::default());
    }

    #[test]
    fn pair_weights() {
        use Role::*;
        assert_eq!(overlap_weight(Parent, Child), 0.0);
        assert_eq!(overlap_weight(Others, Parent), 0.0);
        assert_eq!(overlap_weight(Parent, Parent), 1.0);
        assert_eq!(overlap_weight(Child, Others), 1.0);
        assert_eq!(containment_weight(Child, Parent), 1.0);
        assert_eq!(containment_weight(Parent, Others), 0.0);
        assert_eq!(containment_weight(Child, Child), 0.0);
    }
}
