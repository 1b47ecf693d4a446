//! Minimal CSV reading and writing for the plain numeric tables this crate
//! emits. Fields never contain separators or quotes.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn check_field(what: &'static str, s: &str) -> Result<()> {
    if s.contains([',', '"', '\n', '\r']) {
        return Err(Error::format(what, format!("field `{s}` contains a CSV separator")));
    }
    Ok(())
}

pub(crate) fn write_table(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    fs::write(path, render_table(header, rows)).map_err(|e| Error::io(path, e))
}

pub(crate) fn render_table(header: &str, rows: &[Vec<String>]) -> String {
    let mut out = String::with_capacity(header.len() + 1 + rows.len() * 48);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses a table, checking the header and the column count of every row.
pub(crate) fn parse_table(what: &'static str, text: &str, header: &str) -> Result<Vec<Vec<String>>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == header => {}
        Some(h) => {
            return Err(Error::format(
                what,
                format!("expected header `{header}`, found `{h}`"),
            ))
        }
        None => return Err(Error::format(what, "empty file")),
    }
    let cols = header.split(',').count();
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let fields: Vec<String> = l.split(',').map(|f| f.trim().to_owned()).collect();
            if fields.len() != cols {
                return Err(Error::format(
                    what,
                    format!("line {}: expected {cols} fields, found {}", i + 2, fields.len()),
                ));
            }
            Ok(fields)
        })
        .collect()
}

pub(crate) fn read_table(what: &'static str, path: &Path, header: &str) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(what, &text, header)
}

pub(crate) fn parse_f64(what: &'static str, s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::format(what, format!("not a number: `{s}`")))
}

pub(crate) fn parse_opt_f64(what: &'static str, s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(what, s).map(Some)
    }
}

pub(crate) fn parse_usize(what: &'static str, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::format(what, format!("not an integer: `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_roundtrip_and_validation() {
        let rows = vec![vec!["1".into(), "a".into()], vec!["2".into(), "".into()]];
        let text = render_table("id,name", &rows);
        assert_eq!(parse_table("t", &text, "id,name").unwrap(), rows);
        assert!(parse_table("t", &text, "id,other").is_err());
        assert!(parse_table("t", "id,name\n1\n", "id,name").is_err());
        assert!(check_field("t", "a,b").is_err());
    }
}
