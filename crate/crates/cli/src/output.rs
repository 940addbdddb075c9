use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{Map, Value};

use crate::args::Format;
use crate::manifest::RunManifest;

/// Rows for CSV output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// A command result in both output shapes.
#[derive(Debug, Clone)]
pub struct Artifact {
    /// Body merged next to `manifest` in JSON output.
    pub json: Map<String, Value>,
    pub table: Table,
}

/// Path of the manifest written next to a CSV file.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write_artifact(
    artifact: &Artifact,
    manifest: &RunManifest,
    format: Format,
    out: Option<&Path>,
) -> Result<()> {
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("manifest".into(), serde_json::to_value(manifest)?);
            doc.extend(artifact.json.clone());
            serde_json::to_writer_pretty(&mut sink, &Value::Object(doc))?;
            writeln!(sink)?;
        }
        Format::Csv => {
            write_csv(&mut sink, &artifact.table)?;
            if let Some(path) = out {
                let side = sidecar_path(path);
                let file =
                    File::create(&side).with_context(|| format!("creating {}", side.display()))?;
                let mut w = BufWriter::new(file);
                serde_json::to_writer_pretty(&mut w, manifest)?;
                writeln!(w)?;
                w.flush()?;
            }
        }
    }
    sink.flush()?;
    Ok(())
}

fn write_csv(sink: &mut dyn Write, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Empty cell for absent values.
pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_appends_suffix() {
        assert_eq!(
            sidecar_path(Path::new("out/t.csv")),
            PathBuf::from("out/t.csv.manifest.json")
        );
    }

    #[test]
    fn csv_quotes_when_needed() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        let mut buf = Vec::new();
        write_csv(&mut buf, &t).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,\"x,y\"\n");
    }
}
