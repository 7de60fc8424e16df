//! File-level stage orchestration.
//!
//! Every stage reads the previous stage's files from the working directory
//! and writes its own, so any stage can be re-run in isolation:
//!
//! ```text
//! documents.jsonl, split.json                      ingest
//! triples.jsonl                                    triples
//! repr/<mode>.jsonl                                repr
//! embed/<provider>/<mode>.emb, provider.json       embed
//! cluster/<provider>/<mode>/sweep.csv, selection.json
//! propagate/<provider>/<mode>.jsonl
//! train/<provider>/<mode>/trials.jsonl, head.json, split.json
//! eval/<provider>/<mode>/metrics.json, predictions_<cluster mode>.jsonl
//! report/clustering_table.{csv,md}, classification_table.{csv,md},
//!        cluster_composition.csv, manifest.json
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::classify::{self, predict_scores, random_search, HeadFile, SearchSpace, TrialResult};
use crate::cluster::{
    cluster_composition, density_sweep, partition_sweep, write_sweep_csv, Algorithm, SweepEntry, SweepOutcome,
};
use crate::config::{Config, HASH_PROVIDER};
use crate::conllu::{self, ParsedDocument};
use crate::corpus::{self, CorpusSplit, Document, SplitSpec};
use crate::embed::{
    embed_corpus, load_matrix, save_matrix, EmbeddingMatrix, EmbeddingProvider, HashProvider, RemoteProvider,
    RetryPolicy,
};
use crate::error::{Error, Result};
use crate::metrics::{classification_report, MetricReport, PairwiseDistances};
use crate::propagate::{propagate_labels, Assignment};
use crate::report::{self, ClassificationOutcome, ClusteringOutcome, CompositionEntry, ProviderRecord, RunManifest};
use crate::repr::{build_representation, ReprDoc, ReprMode};
use crate::triples::{extract_document, ExtractConfig, Triple};

pub(crate) fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingInput(path.to_path_buf()),
        _ => Error::io(path, e),
    })
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

/// Reads one JSON value per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let reader = BufReader::new(open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line)
            .map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(value);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = create(path)?;
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let reader = BufReader::new(open(path)?);
    serde_json::from_reader(reader).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Paths of every stage artifact under one root.
#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
}

/// Provider names may contain `/`; keep directory names flat.
fn slug(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' })
        .collect()
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Workspace { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn documents(&self) -> PathBuf {
        self.root.join("documents.jsonl")
    }

    pub fn split(&self) -> PathBuf {
        self.root.join("split.json")
    }

    pub fn triples(&self) -> PathBuf {
        self.root.join("triples.jsonl")
    }

    pub fn repr(&self, mode: ReprMode) -> PathBuf {
        self.root.join("repr").join(format!("{}.jsonl", mode.as_str()))
    }

    pub fn embedding(&self, provider: &str, mode: ReprMode) -> PathBuf {
        self.root.join("embed").join(slug(provider)).join(format!("{}.emb", mode.as_str()))
    }

    pub fn provider_record(&self, provider: &str) -> PathBuf {
        self.root.join("embed").join(slug(provider)).join("provider.json")
    }

    fn cluster_dir(&self, provider: &str, mode: ReprMode) -> PathBuf {
        self.root.join("cluster").join(slug(provider)).join(mode.as_str())
    }

    pub fn sweep(&self, provider: &str, mode: ReprMode) -> PathBuf {
        self.cluster_dir(provider, mode).join("sweep.csv")
    }

    pub fn selection(&self, provider: &str, mode: ReprMode) -> PathBuf {
        self.cluster_dir(provider, mode).join("selection.json")
    }

    pub fn propagation(&self, provider: &str, mode: ReprMode) -> PathBuf {
        self.root.join("propagate").join(slug(provider)).join(format!("{}.jsonl", mode.as_str()))
    }

    fn train_dir(&self, provider: &str, mode: ReprMode) -> PathBuf {
        self.root.join("train").join(slug(provider)).join(mode.as_str())
    }

    pub fn trials(&self, provider: &str, mode: ReprMode) -> PathBuf {
        self.train_dir(provider, mode).join("trials.jsonl")
    }

    pub fn head(&self, provider: &str, mode: ReprMode) -> PathBuf {
        self.train_dir(provider, mode).join("head.json")
    }

    pub fn train_split(&self, provider: &str, mode: ReprMode) -> PathBuf {
        self.train_dir(provider, mode).join("split.json")
    }

    fn eval_dir(&self, provider: &str, mode: ReprMode) -> PathBuf {
        self.root.join("eval").join(slug(provider)).join(mode.as_str())
    }

    pub fn metrics(&self, provider: &str, classify_mode: ReprMode) -> PathBuf {
        self.eval_dir(provider, classify_mode).join("metrics.json")
    }

    pub fn predictions(&self, provider: &str, classify_mode: ReprMode, cluster_mode: ReprMode) -> PathBuf {
        self.eval_dir(provider, classify_mode)
            .join(format!("predictions_{}.jsonl", cluster_mode.as_str()))
    }

    pub fn report_dir(&self) -> PathBuf {
        self.root.join("report")
    }
}

/// The clustering carried forward for one (provider, mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSelection {
    pub mode: ReprMode,
    pub provider: String,
    /// Table name, e.g. `KMeans/GMM` when both sweeps agree.
    pub algorithm: String,
    /// k, or min_cluster_size for HDBSCAN.
    pub param: usize,
    pub n_clusters: usize,
    pub ari: f64,
    pub nmi: f64,
    pub silhouette: Option<f64>,
    pub noise_fraction: f64,
    pub score: f64,
    pub doc_ids: Vec<String>,
    pub labels: Vec<i64>,
}

/// Train/validation document ids of one classifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainSplit {
    pub classes: Vec<String>,
    pub train_ids: Vec<String>,
    pub val_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub provider: String,
    pub classify_mode: ReprMode,
    pub n_val: usize,
    pub report: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub doc_id: String,
    #[serde(rename = "true")]
    pub truth: String,
    pub pred: String,
    pub cluster: i64,
}

fn load_split(ws: &Workspace) -> Result<(Vec<Document>, CorpusSplit)> {
    Ok((corpus::read_documents(&ws.documents())?, read_json(&ws.split())?))
}

fn by_id(docs: &[Document]) -> HashMap<&str, &Document> {
    docs.iter().map(|d| (d.id.as_str(), d)).collect()
}

/// Sorted distinct labels and each id's index among them.
fn label_indices(docs: &[Document], ids: &[String]) -> Result<(Vec<String>, Vec<usize>)> {
    let selected = corpus::select(docs, ids)?;
    let classes: Vec<String> = selected
        .iter()
        .map(|d| d.primary_label.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let y = selected
        .iter()
        .map(|d| classes.binary_search(&d.primary_label).expect("label collected above"))
        .collect();
    Ok((classes, y))
}

pub fn ingest(cfg: &Config) -> Result<()> {
    let ws = Workspace::new(&cfg.paths.out);
    let loaded = corpus::load_corpus(&cfg.paths.corpus)?;
    for d in &loaded.diagnostics {
        log::warn!("{}:{}: {}", cfg.paths.corpus.display(), d.line, d.message);
    }
    log::info!(
        "ingested {} documents ({} skipped for missing fields)",
        loaded.documents.len(),
        loaded.skipped
    );
    let split = corpus::split_corpus(
        &loaded.documents,
        SplitSpec {
            seed: cfg.seed,
            n_cluster: cfg.split.n_cluster,
            n_class: cfg.split.n_class,
        },
    )?;
    std::fs::create_dir_all(ws.root()).map_err(|e| Error::io(ws.root(), e))?;
    corpus::write_documents(&ws.documents(), &loaded.documents)?;
    write_json(&ws.split(), &split)
}

fn read_parses(path: &Path) -> Result<Vec<ParsedDocument>> {
    if !path.is_dir() {
        return conllu::read_file(path);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "conllu"))
        .collect();
    files.sort();
    let mut docs = Vec::new();
    for f in files {
        docs.extend(conllu::read_file(&f)?);
    }
    Ok(docs)
}

pub fn triples(cfg: &Config) -> Result<()> {
    let ws = Workspace::new(&cfg.paths.out);
    let (docs, split) = load_split(&ws)?;
    let parses = read_parses(&cfg.paths.parses)?;
    let by_doc: HashMap<&str, &ParsedDocument> =
        parses.iter().filter_map(|p| p.doc_id.as_deref().map(|id| (id, p))).collect();
    let extract = ExtractConfig {
        scheme: cfg.triples.scheme.scheme(),
        relation: cfg.triples.relation,
        accept_passive: cfg.triples.accept_passive,
    };
    let known = by_id(&docs);
    let mut out = Vec::new();
    let mut missing = 0;
    for id in split.cluster_ids.iter().chain(&split.class_ids) {
        if !known.contains_key(id.as_str()) {
            return Err(Error::Contract(format!("split references unknown document {id:?}")));
        }
        match by_doc.get(id.as_str()) {
            Some(p) => out.extend(extract_document(p, id, &extract)),
            None => missing += 1,
        }
    }
    if missing > 0 {
        log::warn!("{missing} documents have no dependency parse and contribute no triples");
    }
    log::info!("extracted {} triples", out.len());
    write_jsonl(&ws.triples(), &out)
}

pub fn repr(cfg: &Config) -> Result<()> {
    let ws = Workspace::new(&cfg.paths.out);
    let (docs, split) = load_split(&ws)?;
    let triples: Vec<Triple> = read_jsonl(&ws.triples())?;
    let mut grouped: HashMap<&str, Vec<Triple>> = HashMap::new();
    for t in &triples {
        grouped.entry(t.doc_id.as_str()).or_default().push(t.clone());
    }
    let ids: Vec<String> = split.cluster_ids.iter().chain(&split.class_ids).cloned().collect();
    let selected = corpus::select(&docs, &ids)?;
    for mode in cfg.modes() {
        let rows: Vec<ReprDoc> = selected
            .iter()
            .map(|d| {
                let ts = grouped.get(d.id.as_str()).map_or(&[][..], Vec::as_slice);
                build_representation(d, ts, mode, cfg.repr.include_graph)
            })
            .collect();
        write_jsonl(&ws.repr(mode), &rows)?;
    }
    Ok(())
}

/// `hash` or a model name served at the configured endpoint.
pub fn make_provider(name: &str, cfg: &Config) -> Result<(Box<dyn EmbeddingProvider + Sync>, ProviderRecord)> {
    if name == HASH_PROVIDER {
        let p = HashProvider::new(cfg.embed.hash_dim, cfg.seed);
        let record = ProviderRecord {
            name: name.to_string(),
            dim: cfg.embed.hash_dim,
            details: None,
        };
        return Ok((Box::new(p), record));
    }
    let endpoint = cfg.embed.resolved_endpoint().ok_or_else(|| {
        Error::Config(format!(
            "provider {name:?} needs an embedding service; set {} or embed.endpoint",
            crate::config::ENDPOINT_ENV
        ))
    })?;
    let retry = RetryPolicy {
        attempts: cfg.embed.retries.max(1),
        ..RetryPolicy::default()
    };
    let p = RemoteProvider::connect(&endpoint, name, retry)?;
    let record = ProviderRecord {
        name: name.to_string(),
        dim: p.info().dim,
        details: Some(serde_json::to_value(p.info())?),
    };
    Ok((Box::new(p), record))
}

pub fn embed(cfg: &Config) -> Result<()> {
    let ws = Workspace::new(&cfg.paths.out);
    for name in &cfg.providers {
        let (provider, record) = make_provider(name, cfg)?;
        for mode in cfg.modes() {
            let reprs: Vec<ReprDoc> = read_jsonl(&ws.repr(mode))?;
            let m = embed_corpus(&reprs, provider.as_ref(), cfg.embed.batch_size)?;
            log::info!("embedded {} {mode} texts with {name} (dim {})", m.len(), m.dim());
            save_matrix(&m, &ws.embedding(name, mode))?;
        }
        write_json(&ws.provider_record(name), &record)?;
    }
    Ok(())
}

fn nan_to_none(v: f64) -> Option<f64> {
    (!v.is_nan()).then_some(v)
}

/// Picks the highest-ARI winner among the algorithm sweeps (earlier sweep
/// on ties) and names it `KMeans/GMM` when the two partition sweeps agree
/// at the printed precision.
fn choose(sweeps: &[SweepOutcome]) -> (&SweepEntry, String) {
    let winner = sweeps
        .iter()
        .map(SweepOutcome::best_entry)
        .fold(None::<&SweepEntry>, |b, e| match b {
            Some(b) if b.ari >= e.ari => Some(b),
            _ => Some(e),
        })
        .expect("at least one sweep");
    let same = |a: &SweepEntry, b: &SweepEntry| {
        a.param == b.param
            && report::fixed(a.ari, report::CLUSTERING_DECIMALS) == report::fixed(b.ari, report::CLUSTERING_DECIMALS)
            && report::fixed(a.nmi, report::CLUSTERING_DECIMALS) == report::fixed(b.nmi, report::CLUSTERING_DECIMALS)
    };
    let best_of = |alg: Algorithm| sweeps.iter().find(|s| s.algorithm == alg).map(SweepOutcome::best_entry);
    let name = match (winner.algorithm, best_of(Algorithm::KMeans), best_of(Algorithm::Gmm)) {
        (Algorithm::KMeans | Algorithm::Gmm, Some(k), Some(g)) if same(k, g) => "KMeans/GMM".to_string(),
        (alg, _, _) => alg.display_name().to_string(),
    };
    (winner, name)
}

pub fn cluster(cfg: &Config) -> Result<()> {
    let ws = Workspace::new(&cfg.paths.out);
    let (docs, split) = load_split(&ws)?;
    let (_, truth) = label_indices(&docs, &split.cluster_ids)?;
    let ks = cfg.cluster.ks();
    for name in &cfg.providers {
        for mode in cfg.modes() {
            let m = load_matrix(&ws.embedding(name, mode))?.select(&split.cluster_ids)?;
            let x = m.view();
            let dist = PairwiseDistances::compute(x);
            let mut sweeps = Vec::new();
            for alg in [Algorithm::KMeans, Algorithm::Gmm] {
                sweeps.push(partition_sweep(x, &dist, &truth, alg, &ks, cfg.seed)?);
            }
            sweeps.push(density_sweep(&dist, &truth, &cfg.cluster.min_cluster_sizes, cfg.seed)?);
            let mut w = create(&ws.sweep(name, mode))?;
            let entries: Vec<SweepEntry> = sweeps.iter().flat_map(|s| s.entries.iter().cloned()).collect();
            write_sweep_csv(&mut w, &entries)?;
            w.flush().map_err(|e| Error::io(ws.sweep(name, mode), e))?;
            let (best, algorithm) = choose(&sweeps);
            log::info!(
                "{name}/{mode}: {algorithm} param {} ARI {:.4} NMI {:.4}",
                best.param,
                best.ari,
                best.nmi
            );
            let selection = ClusterSelection {
                mode,
                provider: name.clone(),
                algorithm,
                param: best.param,
                n_clusters: best.n_clusters(),
                ari: best.ari,
                nmi: best.nmi,
                silhouette: nan_to_none(best.silhouette),
                noise_fraction: best.noise_fraction,
                score: best.score,
                doc_ids: split.cluster_ids.clone(),
                labels: best.labels.clone(),
            };
            write_json(&ws.selection(name, mode), &selection)?;
        }
    }
    Ok(())
}

pub fn propagate(cfg: &Config) -> Result<()> {
    let ws = Workspace::new(&cfg.paths.out);
    let (_, split) = load_split(&ws)?;
    for name in &cfg.providers {
        for mode in cfg.modes() {
            let selection: ClusterSelection = read_json(&ws.selection(name, mode))?;
            let all = load_matrix(&ws.embedding(name, mode))?;
            let source = all.select(&selection.doc_ids)?;
            let target = all.select(&split.class_ids)?;
            let map = propagate_labels(&source, &selection.labels, &target, cfg.propagate.neighbors)?;
            write_jsonl(&ws.propagation(name, mode), &map.assignments)?;
        }
    }
    Ok(())
}

pub fn train(cfg: &Config) -> Result<()> {
    let ws = Workspace::new(&cfg.paths.out);
    let (docs, split) = load_split(&ws)?;
    let (classes, y) = label_indices(&docs, &split.class_ids)?;
    for name in &cfg.providers {
        for mode in cfg.modes() {
            let m = load_matrix(&ws.embedding(name, mode))?.select(&split.class_ids)?;
            let out = random_search(
                m.view(),
                &y,
                classes.len(),
                cfg.classify.trials,
                cfg.seed,
                &SearchSpace::default(),
            )?;
            let best = out.best_trial();
            log::info!(
                "{name}/{mode}: best trial {} (lr {:.2e}, batch {}, epochs {}) val macro-F1 {:.3}",
                best.trial,
                best.lr,
                best.batch,
                best.epochs,
                best.val_macro_f1
            );
            write_jsonl(&ws.trials(name, mode), &out.trials)?;
            write_json(&ws.head(name, mode), &HeadFile::new(&out.head, classes.clone()))?;
            let ids = |idx: &[usize]| idx.iter().map(|&i| split.class_ids[i].clone()).collect();
            let ts = TrainSplit {
                classes: classes.clone(),
                train_ids: ids(&out.split.train),
                val_ids: ids(&out.split.val),
            };
            write_json(&ws.train_split(name, mode), &ts)?;
        }
    }
    Ok(())
}

pub fn evaluate(cfg: &Config) -> Result<()> {
    let ws = Workspace::new(&cfg.paths.out);
    let docs = corpus::read_documents(&ws.documents())?;
    let known = by_id(&docs);
    for name in &cfg.providers {
        for mode in cfg.modes() {
            let head_file: HeadFile = read_json(&ws.head(name, mode))?;
            let head = head_file.to_head()?;
            let ts: TrainSplit = read_json(&ws.train_split(name, mode))?;
            let x = load_matrix(&ws.embedding(name, mode))?.select(&ts.val_ids)?;
            let truth: Vec<usize> = ts
                .val_ids
                .iter()
                .map(|id| {
                    let label = &known
                        .get(id.as_str())
                        .ok_or_else(|| Error::Contract(format!("unknown document {id:?}")))?
                        .primary_label;
                    head_file
                        .classes
                        .iter()
                        .position(|c| c == label)
                        .ok_or_else(|| Error::Contract(format!("label {label:?} unknown to the head")))
                })
                .collect::<Result<_>>()?;
            let scores = predict_scores(&head, x.view())?;
            let pred = classify::argmax_rows(&scores, head.classes);
            let report = classification_report(&truth, &pred, &scores, head.classes)?;
            write_json(
                &ws.metrics(name, mode),
                &EvalMetrics {
                    provider: name.clone(),
                    classify_mode: mode,
                    n_val: truth.len(),
                    report,
                },
            )?;
            for cluster_mode in ReprMode::ALL {
                let path = ws.propagation(name, cluster_mode);
                if !path.exists() {
                    continue;
                }
                let assignments: Vec<Assignment> = read_jsonl(&path)?;
                let clusters: HashMap<&str, i64> =
                    assignments.iter().map(|a| (a.doc_id.as_str(), a.cluster)).collect();
                let rows: Vec<Prediction> = ts
                    .val_ids
                    .iter()
                    .zip(truth.iter().zip(&pred))
                    .map(|(id, (&t, &p))| {
                        Ok(Prediction {
                            doc_id: id.clone(),
                            truth: head_file.classes[t].clone(),
                            pred: head_file.classes[p].clone(),
                            cluster: *clusters
                                .get(id.as_str())
                                .ok_or_else(|| Error::Contract(format!("{id:?} has no propagated cluster")))?,
                        })
                    })
                    .collect::<Result<_>>()?;
                write_jsonl(&ws.predictions(name, mode, cluster_mode), &rows)?;
            }
        }
    }
    Ok(())
}

fn digest_input(path: &Path) -> Result<String> {
    if !path.is_dir() {
        return report::sha256_file(path);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    let mut listing = String::new();
    for f in files {
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        listing.push_str(&format!("{}  {name}\n", report::sha256_file(&f)?));
    }
    Ok(report::sha256_hex(listing.as_bytes()))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn report(cfg: &Config) -> Result<()> {
    let ws = Workspace::new(&cfg.paths.out);
    let docs = corpus::read_documents(&ws.documents())?;
    let known = by_id(&docs);
    let dir = ws.report_dir();

    let mut clustering = Vec::new();
    let mut composition = Vec::new();
    for name in &cfg.providers {
        for mode in cfg.modes() {
            let s: ClusterSelection = read_json(&ws.selection(name, mode))?;
            let truth: Vec<&str> = s
                .doc_ids
                .iter()
                .map(|id| {
                    known
                        .get(id.as_str())
                        .map(|d| d.primary_label.as_str())
                        .ok_or_else(|| Error::Contract(format!("unknown document {id:?}")))
                })
                .collect::<Result<_>>()?;
            composition.push(CompositionEntry {
                mode,
                provider: name.clone(),
                algorithm: s.algorithm.clone(),
                report: cluster_composition(&s.labels, &truth)?,
            });
            clustering.push(ClusteringOutcome {
                mode,
                provider: name.clone(),
                algorithm: s.algorithm,
                k: s.n_clusters,
                ari: s.ari,
                nmi: s.nmi,
                silhouette: s.silhouette.unwrap_or(f64::NAN),
            });
        }
    }
    let mut classification = Vec::new();
    for name in &cfg.providers {
        for classify_mode in cfg.modes() {
            let m: EvalMetrics = read_json(&ws.metrics(name, classify_mode))?;
            for cluster_mode in ReprMode::ALL {
                if ws.predictions(name, classify_mode, cluster_mode).exists() {
                    classification.push(ClassificationOutcome {
                        cluster_mode,
                        classify_mode,
                        model: name.clone(),
                        report: m.report.clone(),
                    });
                }
            }
        }
    }

    report::emit_table(
        &dir,
        "clustering_table",
        &report::CLUSTERING_COLUMNS,
        &report::clustering_rows(&clustering),
    )?;
    report::emit_table(
        &dir,
        "classification_table",
        &report::classification_columns(),
        &report::classification_rows(&classification),
    )?;
    let comp_path = dir.join("cluster_composition.csv");
    let mut w = create(&comp_path)?;
    report::write_composition_csv(&mut w, &composition)?;
    w.flush().map_err(|e| Error::io(&comp_path, e))?;

    let mut outputs = BTreeMap::new();
    for f in [
        "clustering_table.csv",
        "clustering_table.md",
        "classification_table.csv",
        "classification_table.md",
        "cluster_composition.csv",
    ] {
        outputs.insert(f.to_string(), report::sha256_file(&dir.join(f))?);
    }
    let mut inputs = BTreeMap::new();
    for p in [&cfg.paths.corpus, &cfg.paths.parses] {
        if p.exists() {
            inputs.insert(file_name(p), digest_input(p)?);
        }
    }
    let mut providers = Vec::new();
    for name in &cfg.providers {
        providers.push(read_json::<ProviderRecord>(&ws.provider_record(name))?);
    }
    let mut config = serde_json::to_value(cfg)?;
    if let Some(obj) = config.as_object_mut() {
        // neither changes any output
        obj.remove("paths");
        obj.remove("threads");
    }
    let stage_seeds = ["split", "embed", "cluster", "train"]
        .into_iter()
        .map(|s| (s.to_string(), cfg.seed))
        .collect();
    let manifest = RunManifest {
        software: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        stage_seeds,
        config,
        providers,
        inputs,
        outputs,
        conventions: report::conventions(),
        timestamp: std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.parse().ok()),
    };
    manifest.write(&dir.join("manifest.json"))
}

pub type Stage = fn(&Config) -> Result<()>;

pub const STAGES: [(&str, Stage); 9] = [
    ("ingest", ingest),
    ("triples", triples),
    ("repr", repr),
    ("embed", embed),
    ("cluster", cluster),
    ("propagate", propagate),
    ("train", train),
    ("evaluate", evaluate),
    ("report", report),
];

/// Runs every stage in order.
pub fn run_all(cfg: &Config) -> Result<()> {
    for (name, stage) in STAGES {
        let start = std::time::Instant::now();
        stage(cfg)?;
        log::info!("stage {name} finished in {:.2?}", start.elapsed());
    }
    Ok(())
}

/// Loads an embedding matrix restricted to `ids`; used by tests and tools.
pub fn load_rows(ws: &Workspace, provider: &str, mode: ReprMode, ids: &[String]) -> Result<EmbeddingMatrix> {
    load_matrix(&ws.embedding(provider, mode))?.select(ids)
}

/// Trial log of one classifier.
pub fn load_trials(ws: &Workspace, provider: &str, mode: ReprMode) -> Result<Vec<TrialResult>> {
    read_jsonl(&ws.trials(provider, mode))
}
