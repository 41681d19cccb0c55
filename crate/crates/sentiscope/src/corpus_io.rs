//! Line-delimited corpus files and tab-separated category maps.

use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use sentiscope_core::corpus::{validate_document, CategoryMap, Corpus, CorpusError, Document, RawDocument};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Corpus { path: PathBuf, source: CorpusError },
    #[error("{path} line {line}: malformed category map entry (expected raw_label<TAB>display_label)")]
    CategoryMap { path: PathBuf, line: usize },
}

/// A record that could not be loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct LineRejection {
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for LineRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    pub accepted: usize,
    pub rejected: Vec<LineRejection>,
}

#[derive(Debug)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub report: LoadReport,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> LoadError + '_ {
    move |source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Parses documents from `reader`, one JSON object per line.
///
/// Malformed or invalid lines are skipped and reported; blank lines are ignored.
pub fn parse_documents<R: BufRead>(reader: R) -> io::Result<(Vec<Document>, LoadReport)> {
    let mut docs = Vec::new();
    let mut report = LoadReport::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawDocument = match serde_json::from_str(&line) {
            Ok(raw) => raw,
            Err(e) => {
                report.rejected.push(LineRejection {
                    line: line_no,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        match validate_document(raw) {
            Ok(doc) => docs.push(doc),
            Err(violations) => report.rejected.push(LineRejection {
                line: line_no,
                reason: violations
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("; "),
            }),
        }
    }
    report.accepted = docs.len();
    Ok((docs, report))
}

/// Loads a corpus file; without a category map, corpus labels map to themselves.
pub fn load_corpus(path: &Path, category_map: Option<&Path>) -> Result<LoadedCorpus, LoadError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let (docs, report) = parse_documents(BufReader::new(file)).map_err(io_err(path))?;
    let map = match category_map {
        Some(map_path) => load_category_map(map_path)?,
        None => CategoryMap::identity_for(&docs),
    };
    let corpus = Corpus::new(docs, map).map_err(|source| LoadError::Corpus {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(LoadedCorpus { corpus, report })
}

pub fn write_documents<W: Write>(mut out: W, docs: &[Document]) -> io::Result<()> {
    for doc in docs {
        let raw = RawDocument::from(doc.clone());
        serde_json::to_writer(&mut out, &raw)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_corpus(path: &Path, corpus: &Corpus) -> io::Result<()> {
    let file = fs::File::create(path)?;
    write_documents(BufWriter::new(file), corpus.documents())
}

pub fn parse_category_map<R: BufRead>(reader: R) -> Result<CategoryMap, (usize, Option<io::Error>)> {
    let mut map = CategoryMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| (i + 1, Some(e)))?;
        if line.trim().is_empty() {
            continue;
        }
        let (raw, display) = line.split_once('\t').ok_or((i + 1, None))?;
        if raw.is_empty() || display.is_empty() {
            return Err((i + 1, None));
        }
        map.insert(raw.to_string(), display.to_string());
    }
    Ok(map)
}

pub fn load_category_map(path: &Path) -> Result<CategoryMap, LoadError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    parse_category_map(BufReader::new(file)).map_err(|(line, e)| match e {
        Some(source) => LoadError::Io {
            path: path.to_path_buf(),
            source,
        },
        None => LoadError::CategoryMap {
            path: path.to_path_buf(),
            line,
        },
    })
}
