//! Versioned text cache for coefficient tables.
//!
//! ```text
//! # twistlab-coeffs v1 label=11a limit=1000 normalization=deligne
//! 1,1.0000000000000000e0
//! 2,-1.4142135623730951e0
//! ```

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{CoefficientTable, NewformSpec};
use crate::error::{Error, Result};

const MAGIC: &str = "# twistlab-coeffs v1";

pub fn header_line(label: &str, limit: usize) -> String {
    format!("{MAGIC} label={label} limit={limit} normalization=deligne")
}

/// Canonical cache file name inside a cache directory.
pub fn cache_path(dir: &Path, label: &str, limit: usize) -> PathBuf {
    dir.join(format!("{label}-{limit}.coeffs"))
}

pub fn write_table<W: Write>(table: &CoefficientTable, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{}", header_line(&table.form().label, table.limit()))?;
    for (n, l) in table.as_slice().iter().enumerate().skip(1) {
        writeln!(w, "{n},{l:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table_file(table: &CoefficientTable, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension("coeffs.tmp");
    write_table(table, fs::File::create(&tmp)?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Parsed header fields `(label, limit)`.
pub fn parse_header(line: &str) -> Result<(String, usize)> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::Cache(format!("bad header or version: '{line}'")))?;
    let mut label = None;
    let mut limit = None;
    let mut normalization = None;
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("label", v)) => label = Some(v.to_string()),
            Some(("limit", v)) => {
                limit = Some(
                    v.parse::<usize>()
                        .map_err(|_| Error::Cache(format!("bad limit '{v}'")))?,
                )
            }
            Some(("normalization", v)) => normalization = Some(v.to_string()),
            _ => return Err(Error::Cache(format!("unexpected header field '{field}'"))),
        }
    }
    if normalization.as_deref() != Some("deligne") {
        return Err(Error::Cache("header lacks normalization=deligne".into()));
    }
    match (label, limit) {
        (Some(l), Some(n)) if n >= 1 => Ok((l, n)),
        _ => Err(Error::Cache("header lacks label or limit".into())),
    }
}

pub fn read_table<R: BufRead>(form: &NewformSpec, input: R) -> Result<CoefficientTable> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Cache("empty cache file".into()))??;
    let (label, limit) = parse_header(&header)?;
    if label != form.label {
        return Err(Error::Cache(format!(
            "cache holds form '{label}', expected '{}'",
            form.label
        )));
    }
    let mut lambda = vec![0.0; limit + 1];
    let mut seen = 0usize;
    for line in lines {
        let line = line?;
        let (n, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Cache(format!("malformed row '{line}'")))?;
        let n: usize = n
            .parse()
            .map_err(|_| Error::Cache(format!("malformed index '{n}'")))?;
        if n != seen + 1 || n > limit {
            return Err(Error::Cache(format!("row {n} out of sequence")));
        }
        lambda[n] = v
            .parse()
            .map_err(|_| Error::Cache(format!("malformed value '{v}'")))?;
        seen = n;
    }
    if seen != limit {
        return Err(Error::Cache(format!(
            "truncated cache: {seen} of {limit} rows"
        )));
    }
    if lambda[1] != 1.0 {
        return Err(Error::Cache("lambda(1) != 1".into()));
    }
    Ok(CoefficientTable::from_parts(form.clone(), lambda))
}

pub fn read_table_file(form: &NewformSpec, path: &Path) -> Result<CoefficientTable> {
    read_table(form, BufReader::new(fs::File::open(path)?))
}

/// Validates the header of a cache file without loading the rows.
pub fn check_file_header(path: &Path) -> Result<(String, usize)> {
    let mut first = String::new();
    BufReader::new(fs::File::open(path)?).read_line(&mut first)?;
    parse_header(first.trim_end())
}

/// Loads the smallest cached table with limit `>= limit`, else builds and stores one.
pub fn load_or_build(form: &NewformSpec, limit: usize, dir: Option<&Path>) -> Result<CoefficientTable> {
    let Some(dir) = dir else {
        return super::build_table(form, limit);
    };
    if let Ok(entries) = fs::read_dir(dir) {
        let mut best: Option<(usize, PathBuf)> = None;
        for entry in entries.flatten() {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("coeffs") {
                continue;
            }
            if let Ok((label, n)) = check_file_header(&path) {
                if label == form.label && n >= limit && best.as_ref().is_none_or(|(b, _)| n < *b) {
                    best = Some((n, path));
                }
            }
        }
        if let Some((_, path)) = best {
            return read_table_file(form, &path);
        }
    }
    let table = super::build_table(form, limit)?;
    write_table_file(&table, &cache_path(dir, &form.label, limit))?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::build_table;

    #[test]
    fn round_trip_is_exact() {
        let f = NewformSpec::bundled("11a").unwrap();
        let t = build_table(&f, 500).unwrap();
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# twistlab-coeffs v1 label=11a limit=500 normalization=deligne\n"));
        assert_eq!(text.lines().count(), 501);
        let back = read_table(&f, buf.as_slice()).unwrap();
        assert_eq!(back.as_slice(), t.as_slice());
    }

    #[test]
    fn rejects_corruption() {
        let f = NewformSpec::bundled("11a").unwrap();
        let bad_version = "# twistlab-coeffs v2 label=11a limit=1 normalization=deligne\n1,1\n";
        assert!(read_table(&f, bad_version.as_bytes()).is_err());
        let truncated = "# twistlab-coeffs v1 label=11a limit=3 normalization=deligne\n1,1\n2,0.5\n";
        assert!(read_table(&f, truncated.as_bytes()).is_err());
        let wrong_label = "# twistlab-coeffs v1 label=17a limit=1 normalization=deligne\n1,1\n";
        assert!(read_table(&f, wrong_label.as_bytes()).is_err());
        let garbage = "# twistlab-coeffs v1 label=11a limit=2 normalization=deligne\n1,1\n2,abc\n";
        assert!(read_table(&f, garbage.as_bytes()).is_err());
    }

    #[test]
    fn load_or_build_reuses_larger_cache() {
        let dir = tempfile::tempdir().unwrap();
        let f = NewformSpec::bundled("17a").unwrap();
        let t1 = load_or_build(&f, 300, Some(dir.path())).unwrap();
        assert_eq!(t1.limit(), 300);
        let t2 = load_or_build(&f, 200, Some(dir.path())).unwrap();
        assert_eq!(t2.limit(), 300);
        assert_eq!(t1.as_slice(), t2.as_slice());
    }
}
