//! Knot tables: one `name<TAB>pd` record per line, `#` comment lines.

use std::collections::HashSet;

use thiserror::Error;

use crate::diagram::{parse, Diagram, DiagramError};

const BUNDLED: &str = include_str!("../data/knots.tsv");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("line {line}: {source}")]
    Diagram { line: usize, source: DiagramError },
    #[error("line {line}: expected `name<TAB>pd`")]
    Record { line: usize },
    #[error("line {line}: duplicate name {name}")]
    Duplicate { line: usize, name: String },
}

impl TableError {
    pub fn line(&self) -> usize {
        match *self {
            TableError::Diagram { line, .. }
            | TableError::Record { line }
            | TableError::Duplicate { line, .. } => line,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TableEntry {
    pub line: usize,
    pub name: String,
    pub pd: String,
    pub diagram: Diagram,
}

pub fn parse_table(text: &str) -> Result<Vec<TableEntry>, TableError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (name, pd) = raw.split_once('\t').ok_or(TableError::Record { line })?;
        let name = name.trim();
        if name.is_empty() {
            return Err(TableError::Record { line });
        }
        if !seen.insert(name.to_string()) {
            return Err(TableError::Duplicate {
                line,
                name: name.to_string(),
            });
        }
        let diagram = parse(pd).map_err(|source| TableError::Diagram { line, source })?;
        out.push(TableEntry {
            line,
            name: name.to_string(),
            pd: pd.trim().to_string(),
            diagram,
        });
    }
    Ok(out)
}

/// The prime knots through eight crossings, plus the unknot.
pub fn bundled() -> Vec<TableEntry> {
    parse_table(BUNDLED).expect("bundled table parses")
}

pub fn bundled_text() -> &'static str {
    BUNDLED
}

pub fn lookup(name: &str) -> Option<TableEntry> {
    bundled().into_iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_shape() {
        let t = bundled();
        assert_eq!(t.len(), 36);
        assert!(t.iter().all(|e| e.diagram.component_count() == 1));
        assert_eq!(lookup("0_1").unwrap().diagram.crossing_count(), 0);
        assert_eq!(lookup("3_1").unwrap().diagram.writhe(), 3);
    }

    #[test]
    fn errors_name_lines() {
        let e =
            parse_table("# c\n3_1\tX[1,5,2,4];X[3,1,4,6];X[5,3,6,2]\nbad\tX[1,2\n").unwrap_err();
        assert_eq!(e.line(), 3);
        let e = parse_table("a\tLoop[1]\na\tLoop[1]\n").unwrap_err();
        assert!(matches!(e, TableError::Duplicate { line: 2, .. }));
        assert_eq!(parse_table("no tab here").unwrap_err().line(), 1);
    }
}
