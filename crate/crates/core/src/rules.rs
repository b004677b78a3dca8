//! Constant edit rules and the partial-key constraint they live under.

use std::fmt;

use crate::error::{Error, Result};
use crate::schema::{AttrId, Cell, Schema, Value};

/// Sorted, duplicate-free set of values of a single attribute.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValueSet(Vec<Value>);

impl ValueSet {
    pub fn new(mut values: Vec<Value>) -> Self {
        values.sort_unstable();
        values.dedup();
        ValueSet(values)
    }

    pub fn full(domain_len: usize) -> Self {
        ValueSet((0..domain_len as u32).map(Value).collect())
    }

    pub fn contains(&self, v: Value) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Value> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &ValueSet) -> bool {
        self.0.len() <= other.0.len() && self.0.iter().all(|v| other.contains(*v))
    }

    pub fn union(&self, other: &ValueSet) -> ValueSet {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        ValueSet::new(v)
    }

    pub fn intersection(&self, other: &ValueSet) -> ValueSet {
        ValueSet(self.0.iter().copied().filter(|v| other.contains(*v)).collect())
    }
}

impl FromIterator<Value> for ValueSet {
    fn from_iter<I: IntoIterator<Item = Value>>(iter: I) -> Self {
        ValueSet::new(iter.into_iter().collect())
    }
}

/// A forbidden combination `E_1 × … × E_k`.
///
/// Only strict components (`E_i ⊂ A_i`) are stored, sorted by attribute, so
/// the stored attributes are exactly the involved ones. A rule without
/// components is a contradiction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EditRule {
    components: Vec<(AttrId, ValueSet)>,
}

impl EditRule {
    /// Normalizes components against the schema: repeated attributes are
    /// intersected and full-domain components dropped.
    ///
    /// Fails with [`Error::Tautology`] when a component ends up empty; `line`
    /// is only used for error reporting.
    pub fn new(schema: &Schema, components: Vec<(AttrId, ValueSet)>, line: usize) -> Result<Self> {
        let mut merged: Vec<(AttrId, ValueSet)> = Vec::with_capacity(components.len());
        for (attr, set) in components {
            match merged.iter_mut().find(|(a, _)| *a == attr) {
                Some((_, existing)) => *existing = existing.intersection(&set),
                None => merged.push((attr, set)),
            }
        }
        if let Some((attr, _)) = merged.iter().find(|(_, s)| s.is_empty()) {
            return Err(Error::Tautology {
                line,
                attr: schema.name(*attr).to_string(),
            });
        }
        merged.retain(|(a, s)| s.len() < schema.domain_len(*a));
        merged.sort_by_key(|(a, _)| *a);
        Ok(EditRule { components: merged })
    }

    /// Builds a rule from components that are already strict and non-empty.
    pub(crate) fn from_strict(mut components: Vec<(AttrId, ValueSet)>) -> Self {
        components.sort_by_key(|(a, _)| *a);
        EditRule { components }
    }

    pub fn contradiction() -> Self {
        EditRule { components: Vec::new() }
    }

    pub fn components(&self) -> &[(AttrId, ValueSet)] {
        &self.components
    }

    pub fn component(&self, attr: AttrId) -> Option<&ValueSet> {
        self.components
            .binary_search_by_key(&attr, |(a, _)| *a)
            .ok()
            .map(|i| &self.components[i].1)
    }

    /// Attributes with a strict component.
    pub fn involves(&self) -> impl Iterator<Item = AttrId> + '_ {
        self.components.iter().map(|(a, _)| *a)
    }

    pub fn involves_attr(&self, attr: AttrId) -> bool {
        self.component(attr).is_some()
    }

    pub fn is_contradiction(&self) -> bool {
        self.components.is_empty()
    }

    /// True iff the assignment lies inside the forbidden combination. Null
    /// is a member of no component.
    pub fn fails(&self, tuple: &[Cell]) -> bool {
        self.components
            .iter()
            .all(|(a, set)| matches!(tuple[*a], Some(v) if set.contains(v)))
    }

    /// `self` is dominated by `other` when every component of `self` is a
    /// subset of the matching component of `other`.
    pub fn dominated_by(&self, other: &EditRule) -> bool {
        other.components.iter().all(|(a, theirs)| match self.component(*a) {
            Some(ours) => ours.is_subset(theirs),
            None => false,
        })
    }

    pub fn display<'a>(&'a self, schema: &'a Schema) -> RuleDisplay<'a> {
        RuleDisplay { rule: self, schema }
    }
}

/// Renders a rule in the rule-file syntax.
pub struct RuleDisplay<'a> {
    rule: &'a EditRule,
    schema: &'a Schema,
}

impl fmt::Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rule.is_contradiction() {
            return write!(f, "<contradiction>");
        }
        for (i, (attr, set)) in self.rule.components.iter().enumerate() {
            if i > 0 {
                write!(f, " & ")?;
            }
            let attr_schema = self.schema.attr(*attr);
            write!(f, "{}", attr_schema.name)?;
            if set.len() == 1 {
                write!(f, " = {}", quote(attr_schema.text(set.0[0])))?;
            } else {
                let values: Vec<String> = set.iter().map(|v| quote(attr_schema.text(v))).collect();
                write!(f, " in {{{}}}", values.join(", "))?;
            }
        }
        Ok(())
    }
}

pub(crate) fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('\'');
    for c in text.chars() {
        if c == '\'' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('\'');
    out
}

/// Edit rules under a partial key: `K → R1` must hold and every rule ranges
/// over `R1 ∪ R2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpkSet {
    pub key: Vec<AttrId>,
    pub determined: Vec<AttrId>,
    pub free: Vec<AttrId>,
    pub rules: Vec<EditRule>,
}

impl EpkSet {
    pub fn new(
        schema: &Schema,
        key: Vec<AttrId>,
        determined: Vec<AttrId>,
        rules: Vec<EditRule>,
    ) -> Result<Self> {
        let mut seen = vec![false; schema.len()];
        for &a in key.iter().chain(&determined) {
            if std::mem::replace(&mut seen[a], true) {
                return Err(Error::InvalidDeclaration {
                    line: 0,
                    message: format!("attribute `{}` declared twice", schema.name(a)),
                });
            }
        }
        if key.is_empty() {
            return Err(Error::InvalidDeclaration {
                line: 0,
                message: "key must name at least one attribute".into(),
            });
        }
        for rule in &rules {
            if let Some(a) = rule.involves().find(|a| key.contains(a)) {
                return Err(Error::RuleOnKey {
                    line: 0,
                    attr: schema.name(a).to_string(),
                });
            }
        }
        let free = (0..schema.len()).filter(|a| !seen[*a]).collect();
        Ok(EpkSet {
            key,
            determined,
            free,
            rules,
        })
    }

    /// `R1 ∪ R2` in schema order.
    pub fn non_key(&self) -> Vec<AttrId> {
        let mut attrs: Vec<AttrId> = self.determined.iter().chain(&self.free).copied().collect();
        attrs.sort_unstable();
        attrs
    }

    pub fn is_key(&self, attr: AttrId) -> bool {
        self.key.contains(&attr)
    }

    /// Same constraint with the rules dropped.
    pub fn without_rules(&self) -> EpkSet {
        EpkSet {
            rules: Vec::new(),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::AttributeSchema;

    fn schema() -> Schema {
        Schema::new(vec![
            AttributeSchema::new("double_blind", ["no", "yes"], false),
            AttributeSchema::new("open", ["no", "yes"], false),
            AttributeSchema::new("arms", ["1", "2", "3"], false),
        ])
        .unwrap()
    }

    fn v(s: &Schema, a: AttrId, t: &str) -> Value {
        s.value(a, t).unwrap()
    }

    fn e1(s: &Schema) -> EditRule {
        EditRule::new(
            s,
            vec![
                (0, ValueSet::new(vec![v(s, 0, "yes")])),
                (1, ValueSet::new(vec![v(s, 1, "yes")])),
            ],
            1,
        )
        .unwrap()
    }

    #[test]
    fn fails_on_forbidden_combination() {
        let s = schema();
        let rule = e1(&s);
        let yes0 = Some(v(&s, 0, "yes"));
        let yes1 = Some(v(&s, 1, "yes"));
        let no1 = Some(v(&s, 1, "no"));
        assert!(rule.fails(&[yes0, yes1, None]));
        assert!(!rule.fails(&[None, yes1, None]));
        assert!(!rule.fails(&[yes0, no1, None]));
    }

    #[test]
    fn involves_reports_strict_components() {
        let s = schema();
        assert_eq!(e1(&s).involves().collect::<Vec<_>>(), vec![0, 1]);
        let single = EditRule::new(&s, vec![(2, ValueSet::new(vec![Value(0)]))], 1).unwrap();
        assert_eq!(single.involves().collect::<Vec<_>>(), vec![2]);
        assert_eq!(EditRule::contradiction().involves().count(), 0);
    }

    #[test]
    fn full_components_are_dropped() {
        let s = schema();
        let rule = EditRule::new(
            &s,
            vec![(0, ValueSet::full(2)), (2, ValueSet::new(vec![Value(1)]))],
            1,
        )
        .unwrap();
        assert_eq!(rule.involves().collect::<Vec<_>>(), vec![2]);
        let all_full = EditRule::new(&s, vec![(0, ValueSet::full(2))], 1).unwrap();
        assert!(all_full.is_contradiction());
    }

    #[test]
    fn empty_intersection_is_a_tautology() {
        let s = schema();
        let err = EditRule::new(
            &s,
            vec![
                (2, ValueSet::new(vec![Value(0)])),
                (2, ValueSet::new(vec![Value(1)])),
            ],
            4,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Tautology { line: 4, .. }));
    }

    #[test]
    fn dominance() {
        let s = schema();
        let narrow = e1(&s);
        let wide = EditRule::new(&s, vec![(1, ValueSet::new(vec![v(&s, 1, "yes")]))], 1).unwrap();
        assert!(narrow.dominated_by(&wide));
        assert!(!wide.dominated_by(&narrow));
        assert!(narrow.dominated_by(&EditRule::contradiction()));
    }

    #[test]
    fn epk_partition_and_key_check() {
        let s = schema();
        let epk = EpkSet::new(&s, vec![2], vec![0], vec![e1(&s)]).unwrap();
        assert_eq!(epk.free, vec![1]);
        assert_eq!(epk.non_key(), vec![0, 1]);
        let on_key = EditRule::new(&s, vec![(2, ValueSet::new(vec![Value(0)]))], 1).unwrap();
        assert!(matches!(
            EpkSet::new(&s, vec![2], vec![], vec![on_key]),
            Err(Error::RuleOnKey { .. })
        ));
        assert!(EpkSet::new(&s, vec![0], vec![0], vec![]).is_err());
    }
}
