//! File helpers shared by the loaders and writers.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Prefix parse errors with the file they came from.
pub(crate) fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    }
}

/// Write through a temporary sibling file and rename into place.
pub(crate) fn write_atomic(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    let run = || -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
        drop(w);
        std::fs::rename(&tmp, path)
    };
    run().map_err(|e| Error::io(path, e))
}

/// Emit `header` as `# `-prefixed comment lines.
pub(crate) fn write_header(w: &mut impl Write, header: &str) -> std::io::Result<()> {
    for line in header.lines() {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

/// Read a tab-separated file whose first non-comment line must equal
/// `columns`. Returns `(line number, fields)` for each data row.
pub(crate) fn read_tsv(path: &Path, columns: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    parse_tsv(open(path)?, columns).map_err(|e| with_path(e, path))
}

pub(crate) fn parse_tsv(reader: impl BufRead, columns: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(str::to_string).collect();
        if !saw_header {
            if fields != columns {
                return Err(Error::parse(
                    lineno,
                    format!("expected header {:?}, found {:?}", columns.join("\t"), line),
                ));
            }
            saw_header = true;
            continue;
        }
        if fields.len() != columns.len() {
            return Err(Error::parse(
                lineno,
                format!("expected {} fields, found {}", columns.len(), fields.len()),
            ));
        }
        rows.push((lineno, fields));
    }
    if !saw_header {
        return Err(Error::parse(0, "missing header line"));
    }
    Ok(rows)
}
