//! Line-oriented rule file format.
//!
//! ```text
//! # masking and control rules
//! key: study
//! determined: double_blind, open, control
//! rule: double_blind = 'yes' & open = 'yes'
//! rule: control = 'no' & placebo in {'yes'}
//! ```
//!
//! `key:` appears exactly once. `determined:` appears at most once; when it
//! is missing no attribute is determined by the key. Every `rule:` line is a
//! conjunction of atoms `attr = 'v'` or `attr in {'v1', 'v2'}` describing a
//! forbidden combination. Attribute names containing special characters are
//! written in double quotes; values may be single-quoted or bare.

use crate::error::{Error, Result};
use crate::rules::{quote, EditRule, EpkSet, ValueSet};
use crate::schema::{AttrId, Schema};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub attr: String,
    pub values: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSource {
    pub line: usize,
    pub atoms: Vec<Atom>,
}

/// Parsed but unbound rule file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSpec {
    pub key: Vec<String>,
    key_line: usize,
    pub determined: Option<Vec<String>>,
    determined_line: usize,
    pub rules: Vec<RuleSource>,
}

impl RuleSpec {
    /// (attribute, value) pairs mentioned by rules; these enter the active
    /// domains.
    pub fn constants(&self) -> Vec<(String, String)> {
        self.rules
            .iter()
            .flat_map(|r| &r.atoms)
            .flat_map(|a| a.values.iter().map(move |v| (a.attr.clone(), v.clone())))
            .collect()
    }

    /// Resolves names against a schema. With `ignore_rules`, only the key and
    /// determined attributes are kept.
    pub fn bind(&self, schema: &Schema, ignore_rules: bool) -> Result<EpkSet> {
        let resolve = |name: &String, line: usize| {
            schema.id(name).ok_or_else(|| Error::UnknownAttribute {
                line,
                name: name.clone(),
            })
        };
        let key = self
            .key
            .iter()
            .map(|n| resolve(n, self.key_line))
            .collect::<Result<Vec<_>>>()?;
        let determined = match &self.determined {
            Some(names) => names
                .iter()
                .map(|n| resolve(n, self.determined_line))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        if let Some(a) = determined.iter().find(|a| key.contains(a)) {
            return Err(Error::InvalidDeclaration {
                line: self.determined_line,
                message: format!("`{}` is both key and determined", schema.name(*a)),
            });
        }
        let mut rules = Vec::new();
        if !ignore_rules {
            for src in &self.rules {
                rules.push(bind_rule(schema, src, &key)?);
            }
        }
        EpkSet::new(schema, key, determined, rules).map_err(|e| match e {
            Error::InvalidDeclaration { message, .. } => Error::InvalidDeclaration {
                line: self.determined_line.max(self.key_line),
                message,
            },
            other => other,
        })
    }
}

fn bind_rule(schema: &Schema, src: &RuleSource, key: &[AttrId]) -> Result<EditRule> {
    let mut components = Vec::with_capacity(src.atoms.len());
    for atom in &src.atoms {
        let attr = schema.id(&atom.attr).ok_or_else(|| Error::UnknownAttribute {
            line: src.line,
            name: atom.attr.clone(),
        })?;
        if key.contains(&attr) {
            return Err(Error::RuleOnKey {
                line: src.line,
                attr: atom.attr.clone(),
            });
        }
        let values = atom
            .values
            .iter()
            .map(|text| {
                schema.value(attr, text).ok_or_else(|| Error::InvalidDeclaration {
                    line: src.line,
                    message: format!("value {} is not in the domain of `{}`", quote(text), atom.attr),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        components.push((attr, ValueSet::new(values)));
    }
    let rule = EditRule::new(schema, components, src.line)?;
    if rule.is_contradiction() {
        return Err(Error::Contradiction { line: src.line });
    }
    Ok(rule)
}

/// Parses rule-file text.
pub fn parse(text: &str) -> Result<RuleSpec> {
    let mut key: Option<(usize, Vec<String>)> = None;
    let mut determined: Option<(usize, Vec<String>)> = None;
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut cur = Cursor::new(raw, line);
        cur.skip_ws();
        if cur.at_end() || cur.peek() == Some('#') {
            continue;
        }
        let directive = cur.ident()?;
        cur.skip_ws();
        cur.expect(':')?;
        match directive.as_str() {
            "key" => {
                if key.is_some() {
                    return Err(cur.error("duplicate `key:` line"));
                }
                let names = cur.name_list()?;
                if names.is_empty() {
                    return Err(cur.error("`key:` needs at least one attribute"));
                }
                key = Some((line, names));
            }
            "determined" => {
                if determined.is_some() {
                    return Err(cur.error("duplicate `determined:` line"));
                }
                determined = Some((line, cur.name_list()?));
            }
            "rule" => rules.push(RuleSource {
                line,
                atoms: cur.conjunction()?,
            }),
            other => {
                return Err(Error::Syntax {
                    line,
                    column: 1,
                    message: format!("unknown directive `{other}`"),
                })
            }
        }
        cur.finish()?;
    }
    let (key_line, key) = key.ok_or(Error::Syntax {
        line: 1,
        column: 1,
        message: "missing `key:` line".into(),
    })?;
    let (determined_line, determined) = match determined {
        Some((l, d)) => (l, Some(d)),
        None => (0, None),
    };
    Ok(RuleSpec {
        key,
        key_line,
        determined,
        determined_line,
        rules,
    })
}

/// Parses and binds in one step; `schema` must already hold rule constants.
pub fn parse_rule_file(text: &str, schema: &Schema) -> Result<EpkSet> {
    parse(text)?.bind(schema, false)
}

/// Renders an [`EpkSet`] back into rule-file syntax.
pub fn to_dsl(epk: &EpkSet, schema: &Schema) -> String {
    let names = |attrs: &[AttrId]| {
        attrs
            .iter()
            .map(|a| quote_name(schema.name(*a)))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut out = format!("key: {}\n", names(&epk.key));
    if !epk.determined.is_empty() {
        out.push_str(&format!("determined: {}\n", names(&epk.determined)));
    }
    for rule in &epk.rules {
        let parts: Vec<String> = rule
            .components()
            .iter()
            .map(|(a, set)| {
                let attr = schema.attr(*a);
                let values: Vec<String> = set.iter().map(|v| quote(attr.text(v))).collect();
                format!("{} in {{{}}}", quote_name(&attr.name), values.join(", "))
            })
            .collect();
        out.push_str(&format!("rule: {}\n", parts.join(" & ")));
    }
    out
}

fn is_bare(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '=' | '&' | ',' | '{' | '}' | '\'' | '"' | '#' | ':')
}

fn quote_name(name: &str) -> String {
    if !name.is_empty() && name.chars().all(is_bare) && name != "in" {
        name.to_string()
    } else {
        let escaped = name.replace('\\', "\\\\").replace('"', "\\\"");
        format!("\"{escaped}\"")
    }
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line,
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column: self.pos + 1,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn finish(&mut self) -> Result<()> {
        self.skip_ws();
        if self.at_end() || self.peek() == Some('#') {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        if self.peek() == Some('"') {
            return self.quoted('"');
        }
        let start = self.pos;
        while self.peek().is_some_and(is_bare) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a name"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn quoted(&mut self, delim: char) -> Result<String> {
        self.expect(delim)?;
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return Err(self.error("unterminated quoted string")),
                Some('\\') => {
                    self.pos += 1;
                    match self.peek() {
                        Some(c) => {
                            out.push(c);
                            self.pos += 1;
                        }
                        None => return Err(self.error("dangling escape")),
                    }
                }
                Some(c) if c == delim => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    fn value(&mut self) -> Result<String> {
        self.skip_ws();
        match self.peek() {
            Some('\'') => self.quoted('\''),
            Some(c) if is_bare(c) => self.ident(),
            _ => Err(self.error("expected a value")),
        }
    }

    fn name_list(&mut self) -> Result<Vec<String>> {
        let mut names = Vec::new();
        self.skip_ws();
        if self.at_end() || self.peek() == Some('#') {
            return Ok(names);
        }
        loop {
            self.skip_ws();
            names.push(self.ident()?);
            self.skip_ws();
            if self.peek() == Some(',') {
                self.pos += 1;
            } else {
                return Ok(names);
            }
        }
    }

    fn conjunction(&mut self) -> Result<Vec<Atom>> {
        let mut atoms = Vec::new();
        loop {
            self.skip_ws();
            atoms.push(self.atom()?);
            self.skip_ws();
            if self.peek() == Some('&') {
                self.pos += 1;
            } else {
                return Ok(atoms);
            }
        }
    }

    fn atom(&mut self) -> Result<Atom> {
        let attr = self.ident()?;
        self.skip_ws();
        match self.peek() {
            Some('=') => {
                self.pos += 1;
                let v = self.value()?;
                Ok(Atom { attr, values: vec![v] })
            }
            _ => {
                let word = self.ident().map_err(|_| self.error("expected `=` or `in`"))?;
                if word != "in" {
                    return Err(self.error("expected `=` or `in`"));
                }
                self.skip_ws();
                self.expect('{')?;
                let mut values = Vec::new();
                self.skip_ws();
                if self.peek() == Some('}') {
                    self.pos += 1;
                    return Ok(Atom { attr, values });
                }
                loop {
                    values.push(self.value()?);
                    self.skip_ws();
                    match self.peek() {
                        Some(',') => self.pos += 1,
                        Some('}') => {
                            self.pos += 1;
                            return Ok(Atom { attr, values });
                        }
                        _ => return Err(self.error("expected `,` or `}`")),
                    }
                }
            }
        }
    }
}
