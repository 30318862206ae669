//! Corpus records, JSONL and directory ingestion, and the synthetic
//! program generator.

mod generate;

pub use generate::{generate_corpus, FAMILIES, MAX_FAMILIES};

use std::collections::HashSet;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::syntax::{parse_source, Ast, SyntaxError};

/// One line of a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub code: String,
}

/// A parsed corpus record. The entry method is the program's first method.
#[derive(Debug, Clone, PartialEq)]
pub struct Snippet {
    pub id: String,
    pub label: Option<String>,
    pub tree: Ast,
}

impl Snippet {
    pub fn entry(&self) -> &str {
        self.tree.children[0].token_str()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("family count {0} is outside 1..=10")]
    InvalidFamilyCount(usize),
    #[error("variants per family must be at least 1")]
    InvalidVariantCount,
    #[error("record `{id}` does not parse: {source}")]
    Syntax { id: String, source: SyntaxError },
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn read_jsonl(path: &Path) -> Result<Vec<CorpusRecord>, CorpusError> {
    let file = io::BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| CorpusError::Json { line: i + 1, source })?);
    }
    Ok(out)
}

pub fn write_jsonl(path: &Path, records: &[CorpusRecord]) -> Result<(), CorpusError> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    for record in records {
        serde_json::to_writer(&mut out, record).map_err(io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads every `*.mj` file below `root`; ids are relative paths without the
/// extension and labels are the immediate parent directory name.
pub fn read_dir(root: &Path) -> Result<Vec<CorpusRecord>, CorpusError> {
    let mut files = Vec::new();
    collect_mj(root, &mut files)?;
    files.sort();
    let mut out = Vec::new();
    for path in files {
        let rel = path.strip_prefix(root).unwrap_or(&path);
        let id = rel.with_extension("").to_string_lossy().replace('\\', "/");
        let label = rel.parent().and_then(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned());
        out.push(CorpusRecord { id, label, code: fs::read_to_string(&path)? });
    }
    Ok(out)
}

fn collect_mj(dir: &Path, out: &mut Vec<std::path::PathBuf>) -> io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_mj(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "mj") {
            out.push(path);
        }
    }
    Ok(())
}

/// Loads a JSONL file, or a directory of `.mj` files.
pub fn load(path: &Path) -> Result<Vec<CorpusRecord>, CorpusError> {
    if path.is_dir() {
        read_dir(path)
    } else {
        read_jsonl(path)
    }
}

/// Parses every record, rejecting duplicate ids.
pub fn parse_records(records: &[CorpusRecord]) -> Result<Vec<Snippet>, CorpusError> {
    let mut seen = HashSet::new();
    records
        .iter()
        .map(|r| {
            if !seen.insert(r.id.as_str()) {
                return Err(CorpusError::DuplicateId(r.id.clone()));
            }
            let tree = parse_source(&r.code).map_err(|source| CorpusError::Syntax { id: r.id.clone(), source })?;
            Ok(Snippet { id: r.id.clone(), label: r.label.clone(), tree })
        })
        .collect()
}
