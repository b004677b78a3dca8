//! Attribute domains, cells and in-memory relations.
//!
//! Values are interned per attribute. Within an attribute, value ids follow
//! the lexicographic order of the value strings, with the synthetic fresh
//! value (when present) placed last. Null (`⊥`) is represented as `None` and is
//! never part of a domain.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type AttrId = usize;

/// Interned domain value of one attribute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(pub u32);

impl Value {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A cell is either a domain value or null.
pub type Cell = Option<Value>;

/// A full-width row, indexed by [`AttrId`].
pub type Tuple = Vec<Cell>;

const FRESH_BASE: &str = "__fresh__";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttributeSchema {
    pub name: String,
    values: Vec<String>,
    fresh: Option<Value>,
    pub nullable: bool,
}

impl AttributeSchema {
    /// Builds an attribute over the given values. Duplicates are removed and
    /// values sorted. When `fresh` is set, one synthetic value distinct from
    /// all others is appended.
    pub fn new<I, S>(name: impl Into<String>, values: I, fresh: bool) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = values.into_iter().map(Into::into).collect();
        let mut values: Vec<String> = set.into_iter().collect();
        let fresh = if fresh || values.is_empty() {
            let mut token = FRESH_BASE.to_string();
            while values.binary_search(&token).is_ok() {
                token.push('_');
            }
            values.push(token);
            Some(Value(values.len() as u32 - 1))
        } else {
            None
        };
        AttributeSchema {
            name: name.into(),
            values,
            fresh,
            nullable: false,
        }
    }

    pub fn domain_len(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> impl Iterator<Item = Value> + '_ {
        (0..self.values.len() as u32).map(Value)
    }

    pub fn fresh(&self) -> Option<Value> {
        self.fresh
    }

    pub fn lookup(&self, text: &str) -> Option<Value> {
        let observed = match self.fresh {
            Some(f) => &self.values[..f.index()],
            None => &self.values[..],
        };
        observed
            .binary_search_by(|v| v.as_str().cmp(text))
            .ok()
            .map(|i| Value(i as u32))
    }

    pub fn text(&self, value: Value) -> &str {
        &self.values[value.index()]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    attrs: Vec<AttributeSchema>,
    index: HashMap<String, AttrId>,
}

impl Schema {
    pub fn new(attrs: Vec<AttributeSchema>) -> Result<Self> {
        let mut index = HashMap::with_capacity(attrs.len());
        for (i, a) in attrs.iter().enumerate() {
            if index.insert(a.name.clone(), i).is_some() {
                return Err(Error::Input(format!("duplicate attribute `{}`", a.name)));
            }
        }
        Ok(Schema { attrs, index })
    }

    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }

    pub fn attr(&self, id: AttrId) -> &AttributeSchema {
        &self.attrs[id]
    }

    pub fn attrs(&self) -> &[AttributeSchema] {
        &self.attrs
    }

    pub fn id(&self, name: &str) -> Option<AttrId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: AttrId) -> &str {
        &self.attrs[id].name
    }

    pub fn domain_len(&self, id: AttrId) -> usize {
        self.attrs[id].domain_len()
    }

    pub fn value(&self, attr: AttrId, text: &str) -> Option<Value> {
        self.attrs[attr].lookup(text)
    }

    pub fn text(&self, attr: AttrId, cell: Cell) -> Option<&str> {
        cell.map(|v| self.attrs[attr].text(v))
    }

    /// Renders a cell for diagnostics, using `⊥` for null.
    pub fn display(&self, attr: AttrId, cell: Cell) -> String {
        self.text(attr, cell).unwrap_or("⊥").to_string()
    }
}

/// Untyped table as read from a file: header plus nullable string cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<String>>>,
}

impl RawTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Rows encoded against a [`Schema`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    schema: Arc<Schema>,
    rows: Vec<Tuple>,
}

impl Relation {
    pub fn new(schema: Arc<Schema>, rows: Vec<Tuple>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::Input(format!(
                    "row {} has {} cells, expected {}",
                    i,
                    row.len(),
                    schema.len()
                )));
            }
            for (a, cell) in row.iter().enumerate() {
                if let Some(v) = cell {
                    if v.index() >= schema.domain_len(a) {
                        return Err(Error::Input(format!(
                            "row {i}: value id {} outside the domain of `{}`",
                            v.0,
                            schema.name(a)
                        )));
                    }
                }
            }
        }
        Ok(Relation { schema, rows })
    }

    /// Encodes a raw table. The active domain of each attribute is the set of
    /// observed values, plus `constants` (attribute name, value) and, when
    /// `fresh` is set, one synthetic value.
    pub fn encode(raw: &RawTable, constants: &[(String, String)], fresh: bool) -> Result<Self> {
        let width = raw.header.len();
        let mut observed: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); width];
        let mut nullable = vec![false; width];
        for (i, row) in raw.rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Input(format!(
                    "row {} has {} cells, expected {}",
                    i + 1,
                    row.len(),
                    width
                )));
            }
            for (a, cell) in row.iter().enumerate() {
                match cell {
                    Some(text) => {
                        observed[a].insert(text.as_str());
                    }
                    None => nullable[a] = true,
                }
            }
        }
        for (name, value) in constants {
            if let Some(a) = raw.column(name) {
                observed[a].insert(value.as_str());
            }
        }
        let attrs = raw
            .header
            .iter()
            .zip(observed)
            .zip(nullable)
            .map(|((name, values), nullable)| {
                let mut attr = AttributeSchema::new(name.clone(), values, fresh);
                attr.nullable = nullable;
                attr
            })
            .collect();
        let schema = Arc::new(Schema::new(attrs)?);
        let rows = raw
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(a, cell)| cell.as_deref().and_then(|t| schema.value(a, t)))
                    .collect()
            })
            .collect();
        Ok(Relation { schema, rows })
    }

    pub fn decode(&self) -> RawTable {
        RawTable {
            header: self.schema.attrs().iter().map(|a| a.name.clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(a, c)| self.schema.text(a, *c).map(str::to_string))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn rows(&self) -> &[Tuple] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn with_rows(&self, rows: Vec<Tuple>) -> Relation {
        Relation {
            schema: Arc::clone(&self.schema),
            rows,
        }
    }

    pub fn text(&self, row: usize, attr: AttrId) -> Option<&str> {
        self.schema.text(attr, self.rows[row][attr])
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.schema.attrs().iter().map(|a| a.name.as_str()).collect();
        writeln!(f, "{}", names.join(" | "))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(a, c)| self.schema.display(a, *c))
                .collect();
            writeln!(f, "{}", cells.join(" | "))?;
        }
        Ok(())
    }
}
