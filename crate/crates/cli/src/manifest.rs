use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use recwalk::{Preset, RecurrenceSpec};

/// A sequence as resolved from a `--seq` argument.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedSpec {
    pub id: String,
    #[serde(flatten)]
    pub spec: RecurrenceSpec,
}

/// Resolves `--seq` values; `defaults` are used when none were given.
pub fn resolve_sequences(raw: &[String], defaults: &[Preset]) -> Result<Vec<NamedSpec>> {
    if raw.is_empty() {
        return Ok(defaults
            .iter()
            .map(|p| NamedSpec {
                id: p.name().to_string(),
                spec: p.spec(),
            })
            .collect());
    }
    let mut out: Vec<NamedSpec> = Vec::with_capacity(raw.len());
    for (i, arg) in raw.iter().enumerate() {
        let named = parse_sequence(arg, i + 1)?;
        if out.iter().any(|o| o.id == named.id) {
            bail!("sequence id `{}` given twice", named.id);
        }
        out.push(named);
    }
    Ok(out)
}

fn parse_sequence(arg: &str, position: usize) -> Result<NamedSpec> {
    let arg = arg.trim();
    if let Some(path) = arg.strip_prefix('@') {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading sequence file {path}"))?;
        let id = Path::new(path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| format!("seq{position}"));
        return Ok(NamedSpec {
            id,
            spec: parse_json(&text)?,
        });
    }
    if arg.starts_with('{') {
        return Ok(NamedSpec {
            id: format!("seq{position}"),
            spec: parse_json(arg)?,
        });
    }
    let preset: Preset = arg.parse()?;
    Ok(NamedSpec {
        id: preset.name().to_string(),
        spec: preset.spec(),
    })
}

fn parse_json(text: &str) -> Result<RecurrenceSpec> {
    let spec: RecurrenceSpec = serde_json::from_str(text).context("parsing sequence JSON")?;
    spec.validate()?;
    Ok(spec)
}

/// Provenance attached to every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub version: String,
    pub timestamp: String,
    /// SHA-256 of the canonical JSON of the resolved sequences.
    pub spec_hash: String,
}

impl RunManifest {
    pub fn new(command: &str, params: serde_json::Value, sequences: &[NamedSpec]) -> Result<Self> {
        let canonical = serde_json::to_vec(sequences)?;
        Ok(Self {
            command: command.to_string(),
            params,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            spec_hash: hex::encode(Sha256::digest(&canonical)),
        })
    }
}
