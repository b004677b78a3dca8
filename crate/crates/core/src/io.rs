//! CSV tables and preference-table files.
//!
//! One dialect throughout: comma separated, double-quote escaping, a header
//! row, UTF-8, LF line endings. Cells equal to the null token read as null
//! and nulls are written as the null token.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::cost::{Cost, PreferenceTable};
use crate::error::{Error, Result};
use crate::schema::{AttrId, RawTable, Relation, Schema};

pub fn read_table<R: Read>(reader: R, null_token: &str) -> Result<RawTable> {
    let mut csv = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut records = csv.records();
    let header: Vec<String> = match records.next() {
        Some(r) => r?.iter().map(str::to_string).collect(),
        None => return Err(Error::Input("missing header row".into())),
    };
    let mut names = HashSet::new();
    for name in &header {
        if !names.insert(name.as_str()) {
            return Err(Error::Input(format!("duplicate column `{name}`")));
        }
    }
    let mut rows = Vec::new();
    for record in records {
        let record = record?;
        rows.push(
            record
                .iter()
                .map(|c| if c == null_token { None } else { Some(c.to_string()) })
                .collect(),
        );
    }
    Ok(RawTable { header, rows })
}

pub fn load_table(path: &Path, null_token: &str) -> Result<RawTable> {
    read_table(File::open(path)?, null_token)
}

pub fn write_table<W: Write>(writer: W, table: &RawTable, null_token: &str) -> Result<()> {
    let mut csv = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    csv.write_record(&table.header)?;
    for row in &table.rows {
        csv.write_record(row.iter().map(|c| c.as_deref().unwrap_or(null_token)))?;
    }
    csv.flush()?;
    Ok(())
}

pub fn save_table(path: &Path, table: &RawTable, null_token: &str) -> Result<()> {
    write_table(File::create(path)?, table, null_token)
}

/// Loads a relation. Rule constants `(attribute, value)` enter the active
/// domains; `fresh` adds one unseen value per attribute.
pub fn load_csv(path: &Path, null_token: &str, constants: &[(String, String)], fresh: bool) -> Result<Relation> {
    Relation::encode(&load_table(path, null_token)?, constants, fresh)
}

/// Reads a from/to cost matrix: the header lists target values after a
/// leading label cell, and each row starts with the source value. Empty
/// cells and values outside the attribute's domain are skipped.
pub fn read_preference<R: Read>(reader: R, schema: &Schema, attr: AttrId) -> Result<PreferenceTable> {
    let name = schema.name(attr).to_string();
    let err = |message: String| Error::Preference {
        attr: name.clone(),
        message,
    };
    let table = read_table(reader, "")?;
    let targets: Vec<Option<_>> = table
        .header
        .iter()
        .skip(1)
        .map(|t| schema.value(attr, t))
        .collect();
    let mut entries = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        let Some(Some(from_text)) = row.first() else {
            return Err(err(format!("row {} has no source value", i + 2)));
        };
        let Some(from) = schema.value(attr, from_text) else {
            continue;
        };
        for (cell, to) in row.iter().skip(1).zip(&targets) {
            let (Some(text), Some(to)) = (cell, to) else {
                continue;
            };
            let cost: Cost = text
                .trim()
                .parse()
                .map_err(|_| err(format!("row {}: `{text}` is not a non-negative integer", i + 2)))?;
            entries.push(((from, *to), cost));
        }
    }
    PreferenceTable::new(&name, entries)
}

/// Preference tables found as `<attribute>.csv` in `dir`.
pub fn load_preferences(dir: &Path, schema: &Schema) -> Result<BTreeMap<AttrId, PreferenceTable>> {
    if !dir.is_dir() {
        return Err(Error::Input(format!("{} is not a directory", dir.display())));
    }
    let mut tables = BTreeMap::new();
    for attr in 0..schema.len() {
        let path = dir.join(format!("{}.csv", schema.name(attr)));
        if path.is_file() {
            tables.insert(attr, read_preference(File::open(&path)?, schema, attr)?);
        }
    }
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{AttributeSchema, Value};

    #[test]
    fn empty_cell_reads_as_null() {
        let t = read_table("a,b\nx,\ny,z\n".as_bytes(), "").unwrap();
        assert_eq!(t.header, vec!["a", "b"]);
        assert_eq!(t.rows[0], vec![Some("x".to_string()), None]);
        assert_eq!(t.rows[1][1].as_deref(), Some("z"));
    }

    #[test]
    fn round_trip_with_quotes() {
        let src = "a,b\n\"x,1\",NA\n\"say \"\"hi\"\"\",y\n";
        let t = read_table(src.as_bytes(), "NA").unwrap();
        assert_eq!(t.rows[0][1], None);
        let mut out = Vec::new();
        write_table(&mut out, &t, "NA").unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), src);
    }

    #[test]
    fn malformed_tables() {
        assert!(matches!(read_table("".as_bytes(), ""), Err(Error::Input(_))));
        assert!(matches!(read_table("a,a\n1,2\n".as_bytes(), ""), Err(Error::Input(_))));
        assert!(matches!(read_table("a,b\n1\n".as_bytes(), ""), Err(Error::Csv(_))));
    }

    #[test]
    fn preference_matrix() {
        let s = Schema::new(vec![AttributeSchema::new("a", ["x", "y"], false)]).unwrap();
        let t = read_preference("from,x,y,w\nx,0,3,1\ny,1,0,\nw,5,5,0\n".as_bytes(), &s, 0).unwrap();
        assert_eq!(t.get(Value(0), Value(1)), Some(3));
        assert_eq!(t.get(Value(1), Value(0)), Some(1));
        assert!(read_preference("from,x,y\nx,0,0\n".as_bytes(), &s, 0).is_err());
        assert!(read_preference("from,x,y\nx,0,a\n".as_bytes(), &s, 0).is_err());
    }
}
