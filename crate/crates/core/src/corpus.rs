//! Corpus ingestion, text cleaning, label mapping and the two disjoint experiment splits.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub abstract_raw: String,
    pub abstract_clean: String,
    pub categories: Vec<String>,
    pub primary_label: String,
}

impl Document {
    pub fn new(id: impl Into<String>, abstract_raw: impl Into<String>, categories: Vec<String>) -> Result<Self> {
        let abstract_raw = abstract_raw.into();
        let first = categories
            .first()
            .ok_or_else(|| Error::InvalidCategory(String::new()))?;
        let primary_label = map_label(first)?.to_string();
        Ok(Document {
            id: id.into(),
            abstract_clean: clean_text(&abstract_raw),
            abstract_raw,
            categories,
            primary_label,
        })
    }
}

/// Lowercase (Unicode-aware), collapse every whitespace run to one space, trim.
pub fn clean_text(raw: &str) -> String {
    let lowered = raw.to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    for word in lowered.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Top-level label of a taxonomy string: `cs.AI` → `cs`, `hep-th` → `hep-th`.
pub fn map_label(category: &str) -> Result<&str> {
    if category.is_empty() {
        return Err(Error::InvalidCategory(category.to_string()));
    }
    Ok(category.split_once('.').map_or(category, |(top, _)| top))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct LoadedCorpus {
    pub documents: Vec<Document>,
    /// Records without an abstract or without categories.
    pub skipped: usize,
    /// Per-line problems (malformed JSON, duplicate ids, bad categories).
    pub diagnostics: Vec<Diagnostic>,
}

// The arXiv metadata dump stores categories as one space-separated string;
// the documented format is an array. Both are accepted.
#[derive(Deserialize)]
#[serde(untagged)]
enum Categories {
    List(Vec<String>),
    Spaced(String),
}

impl Categories {
    fn into_vec(self) -> Vec<String> {
        match self {
            Categories::List(v) => v,
            Categories::Spaced(s) => s.split_whitespace().map(str::to_string).collect(),
        }
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    #[serde(rename = "abstract")]
    abstract_text: Option<String>,
    categories: Option<Categories>,
}

pub fn load_corpus(path: &Path) -> Result<LoadedCorpus> {
    let file = File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingInput(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })?;
    let corpus = read_corpus(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    if corpus.documents.is_empty() {
        return Err(Error::EmptyCorpus(path.to_path_buf()));
    }
    Ok(corpus)
}

/// Parses JSON-lines records. Unlike [`load_corpus`] an empty result is not an error.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<LoadedCorpus> {
    let mut out = LoadedCorpus::default();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io("<corpus>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RawRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("corpus line {line_no}: {e}");
                out.diagnostics.push(Diagnostic {
                    line: line_no,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let categories = record.categories.map(Categories::into_vec).unwrap_or_default();
        let Some(abstract_raw) = record.abstract_text.filter(|_| !categories.is_empty()) else {
            out.skipped += 1;
            continue;
        };
        if !seen.insert(record.id.clone()) {
            out.diagnostics.push(Diagnostic {
                line: line_no,
                message: format!("duplicate id {:?}", record.id),
            });
            continue;
        }
        match Document::new(record.id, abstract_raw, categories) {
            Ok(doc) => out.documents.push(doc),
            Err(e) => out.diagnostics.push(Diagnostic {
                line: line_no,
                message: e.to_string(),
            }),
        }
    }
    Ok(out)
}

pub fn write_documents(path: &Path, docs: &[Document]) -> Result<()> {
    let mut w = crate::pipeline::create(path)?;
    for doc in docs {
        serde_json::to_writer(&mut w, doc)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_documents(path: &Path) -> Result<Vec<Document>> {
    crate::pipeline::read_jsonl(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub seed: u64,
    pub n_cluster: usize,
    pub n_class: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            seed: 42,
            n_cluster: 5000,
            n_class: 10000,
        }
    }
}

/// The split manifest: `{seed, cluster_ids, class_ids}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSplit {
    pub seed: u64,
    pub cluster_ids: Vec<String>,
    pub class_ids: Vec<String>,
}

/// Seeded Fisher-Yates over corpus order; the first `n_cluster` ids form the
/// clustering set and the next `n_class` the classification set.
pub fn split_corpus(docs: &[Document], spec: SplitSpec) -> Result<CorpusSplit> {
    let required = spec.n_cluster + spec.n_class;
    if docs.len() < required {
        return Err(Error::InsufficientDocuments {
            required,
            available: docs.len(),
        });
    }
    let mut order: Vec<usize> = (0..docs.len()).collect();
    rng::shuffle(&mut rng::seeded(spec.seed), &mut order);
    let ids = |range: std::ops::Range<usize>| -> Vec<String> {
        order[range].iter().map(|&i| docs[i].id.clone()).collect()
    };
    Ok(CorpusSplit {
        seed: spec.seed,
        cluster_ids: ids(0..spec.n_cluster),
        class_ids: ids(spec.n_cluster..required),
    })
}

/// Documents for `ids`, in `ids` order.
pub fn select<'a>(docs: &'a [Document], ids: &[String]) -> Result<Vec<&'a Document>> {
    let index: std::collections::HashMap<&str, &Document> =
        docs.iter().map(|d| (d.id.as_str(), d)).collect();
    ids.iter()
        .map(|id| {
            index
                .get(id.as_str())
                .copied()
                .ok_or_else(|| Error::Contract(format!("split references unknown document {id:?}")))
        })
        .collect()
}
