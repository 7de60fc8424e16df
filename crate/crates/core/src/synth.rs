//! Synthetic data: planted Gaussian blobs and a small templated abstract
//! corpus with matching dependency parses.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{self, Rng};

/// Points in row-major order with their planted blob index.
#[derive(Debug, Clone, PartialEq)]
pub struct Blobs {
    pub points: Vec<f64>,
    pub dim: usize,
    pub labels: Vec<usize>,
}

/// `n` points around `k` centroids placed on distinct axes at distance
/// `separation` from the origin, with unit within-blob standard deviation.
/// Point `i` belongs to blob `i % k`.
pub fn planted_blobs(n: usize, dim: usize, k: usize, separation: f64, seed: u64) -> Result<Blobs> {
    if k == 0 || k > dim {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= dim, got k={k}, dim={dim}")));
    }
    if !(separation.is_finite() && separation >= 0.0) {
        return Err(Error::InvalidArgument(format!("separation {separation} must be finite and >= 0")));
    }
    let mut g = rng::seeded(seed);
    let mut points = Vec::with_capacity(n * dim);
    let labels: Vec<usize> = (0..n).map(|i| i % k).collect();
    for &c in &labels {
        for d in 0..dim {
            let centre = if d == c { separation } else { 0.0 };
            points.push(centre + rng::normal(&mut g));
        }
    }
    Ok(Blobs { points, dim, labels })
}

struct Topic {
    category: &'static str,
    secondary: &'static str,
    subjects: &'static [&'static str],
    /// (surface, lemma)
    verbs: &'static [(&'static str, &'static str)],
    objects: &'static [&'static str],
    adjectives: &'static [&'static str],
}

const TOPICS: [Topic; 4] = [
    Topic {
        category: "cs.CL",
        secondary: "cs.LG",
        subjects: &[
            "transformer",
            "tokenizer",
            "parser",
            "language model",
            "encoder",
            "attention layer",
            "translation system",
            "tagger",
        ],
        verbs: &[
            ("improves", "improve"),
            ("encodes", "encode"),
            ("predicts", "predict"),
            ("generates", "generate"),
            ("aligns", "align"),
            ("parses", "parse"),
        ],
        objects: &[
            "accuracy",
            "sentences",
            "syntax",
            "word embeddings",
            "translation quality",
            "token sequences",
            "semantic roles",
            "dialogue",
        ],
        adjectives: &["multilingual", "pretrained", "neural", "contextual", "lexical", "sparse"],
    },
    Topic {
        category: "q-bio.GN",
        secondary: "q-bio.MN",
        subjects: &[
            "genome assembly",
            "sequencing pipeline",
            "gene network",
            "variant caller",
            "protein",
            "transcript",
            "regulatory element",
            "mutation",
        ],
        verbs: &[
            ("regulates", "regulate"),
            ("binds", "bind"),
            ("expresses", "express"),
            ("alters", "alter"),
            ("encodes", "encode"),
            ("controls", "control"),
        ],
        objects: &[
            "gene expression",
            "chromatin",
            "dna methylation",
            "protein folding",
            "cell growth",
            "rna splicing",
            "enhancers",
            "phenotypes",
        ],
        adjectives: &["genomic", "somatic", "conserved", "regulatory", "cellular", "epigenetic"],
    },
    Topic {
        category: "astro-ph.GA",
        secondary: "astro-ph.CO",
        subjects: &[
            "galaxy",
            "dark matter halo",
            "star cluster",
            "spiral arm",
            "black hole",
            "gas cloud",
            "stellar bar",
            "quasar",
        ],
        verbs: &[
            ("accretes", "accrete"),
            ("emits", "emit"),
            ("heats", "heat"),
            ("perturbs", "perturb"),
            ("traces", "trace"),
            ("predicts", "predict"),
        ],
        objects: &[
            "radiation",
            "interstellar gas",
            "star formation",
            "rotation curves",
            "metallicity",
            "tidal streams",
            "x-ray emission",
            "satellite galaxies",
        ],
        adjectives: &["massive", "luminous", "distant", "gravitational", "compact", "turbulent"],
    },
    Topic {
        category: "math.PR",
        secondary: "math.ST",
        subjects: &[
            "random walk",
            "markov chain",
            "martingale",
            "brownian motion",
            "branching process",
            "estimator",
            "stochastic process",
            "coupling",
        ],
        verbs: &[
            ("bounds", "bound"),
            ("satisfies", "satisfy"),
            ("approximates", "approximate"),
            ("dominates", "dominate"),
            ("characterizes", "characterize"),
            ("improves", "improve"),
        ],
        objects: &[
            "variance",
            "tail bounds",
            "mixing time",
            "large deviations",
            "limit laws",
            "hitting times",
            "stationary measures",
            "spectral gaps",
        ],
        adjectives: &["stochastic", "asymptotic", "ergodic", "random", "gaussian", "discrete"],
    },
];

const PREP_VERBS: [&str; 3] = ["focus", "rely", "build"];

/// One record in the raw corpus format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DemoRecord {
    pub id: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub categories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemoCorpus {
    pub records: Vec<DemoRecord>,
    /// Parses of the lowercased abstracts, one `newdoc` per record.
    pub conllu: String,
}

impl DemoCorpus {
    pub fn corpus_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("plain record serializes"));
            out.push('\n');
        }
        out
    }
}

struct Tok {
    form: String,
    lemma: String,
    upos: &'static str,
    head: usize,
    deprel: &'static str,
}

fn pick<'a>(g: &mut Rng, items: &'a [&'a str]) -> &'a str {
    items[rng::below(g, items.len())]
}

/// Appends a noun phrase whose last word heads the earlier ones.
fn push_phrase(toks: &mut Vec<Tok>, words: &[&str], head: usize, deprel: &'static str, det: bool) -> usize {
    let start = toks.len() + 1;
    let lead = usize::from(det) + words.len() - 1;
    let noun = start + lead;
    if det {
        toks.push(Tok {
            form: "the".into(),
            lemma: "the".into(),
            upos: "DET",
            head: noun,
            deprel: "det",
        });
    }
    for (i, w) in words.iter().enumerate() {
        let last = i + 1 == words.len();
        toks.push(Tok {
            form: (*w).into(),
            lemma: (*w).into(),
            upos: if !last && is_adjective(w) { "ADJ" } else { "NOUN" },
            head: if last { head } else { noun },
            deprel: if last {
                deprel
            } else if is_adjective(w) {
                "amod"
            } else {
                "compound"
            },
        });
    }
    noun
}

fn is_adjective(w: &str) -> bool {
    TOPICS.iter().any(|t| t.adjectives.contains(&w))
}

fn punct(toks: &mut Vec<Tok>, head: usize) {
    toks.push(Tok {
        form: ".".into(),
        lemma: ".".into(),
        upos: "PUNCT",
        head,
        deprel: "punct",
    });
}

fn sentence(g: &mut Rng, topic: &Topic) -> Vec<Tok> {
    let mut toks = Vec::new();
    match rng::below(g, 5) {
        // "the <adj> <subj> <verb> <obj> ."
        0..=2 => {
            let adj = pick(g, topic.adjectives);
            let subj = pick(g, topic.subjects);
            let (verb, lemma) = topic.verbs[rng::below(g, topic.verbs.len())];
            let obj = pick(g, topic.objects);
            let mut words = vec![adj];
            words.extend(subj.split(' '));
            let verb_at = 2 + words.len();
            push_phrase(&mut toks, &words, verb_at, "nsubj", true);
            toks.push(Tok {
                form: verb.into(),
                lemma: lemma.into(),
                upos: "VERB",
                head: 0,
                deprel: "ROOT",
            });
            push_phrase(&mut toks, &obj.split(' ').collect::<Vec<_>>(), verb_at, "dobj", false);
            punct(&mut toks, verb_at);
        }
        // "we <verb> on <obj> ."
        3 => {
            let verb = PREP_VERBS[rng::below(g, PREP_VERBS.len())];
            let obj = pick(g, topic.objects);
            toks.push(Tok {
                form: "we".into(),
                lemma: "we".into(),
                upos: "PRON",
                head: 2,
                deprel: "nsubj",
            });
            toks.push(Tok {
                form: verb.into(),
                lemma: verb.into(),
                upos: "VERB",
                head: 0,
                deprel: "ROOT",
            });
            toks.push(Tok {
                form: "on".into(),
                lemma: "on".into(),
                upos: "ADP",
                head: 2,
                deprel: "prep",
            });
            push_phrase(&mut toks, &obj.split(' ').collect::<Vec<_>>(), 3, "pobj", false);
            punct(&mut toks, 2);
        }
        // "the <subj> is <adj> ." carries no triple
        _ => {
            let subj = pick(g, topic.subjects);
            let words: Vec<&str> = subj.split(' ').collect();
            let aux_at = 2 + words.len();
            push_phrase(&mut toks, &words, aux_at, "nsubj", true);
            toks.push(Tok {
                form: "is".into(),
                lemma: "be".into(),
                upos: "AUX",
                head: 0,
                deprel: "ROOT",
            });
            let adj = pick(g, topic.adjectives);
            toks.push(Tok {
                form: adj.into(),
                lemma: adj.into(),
                upos: "ADJ",
                head: aux_at,
                deprel: "acomp",
            });
            punct(&mut toks, aux_at);
        }
    }
    toks
}

fn surface(toks: &[Tok]) -> String {
    let mut s = String::new();
    for (i, t) in toks.iter().enumerate() {
        if i > 0 && t.upos != "PUNCT" {
            s.push(' ');
        }
        s.push_str(&t.form);
    }
    s
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

/// `n` abstracts cycling through four topics. Each sentence is drawn from
/// the document's own topic with probability 0.7, otherwise from another
/// topic, so the categories overlap without being random.
pub fn demo_corpus(n: usize, seed: u64) -> DemoCorpus {
    let mut g = rng::seeded(seed);
    let mut records = Vec::with_capacity(n);
    let mut conllu = String::new();
    for i in 0..n {
        let id = format!("demo-{i:04}");
        let home = i % TOPICS.len();
        let n_sent = 3 + rng::below(&mut g, 3);
        let mut raw = Vec::new();
        let _ = writeln!(conllu, "# newdoc id = {id}");
        for s in 0..n_sent {
            let t = if rng::unit(&mut g) < 0.7 {
                home
            } else {
                (home + 1 + rng::below(&mut g, TOPICS.len() - 1)) % TOPICS.len()
            };
            let toks = sentence(&mut g, &TOPICS[t]);
            let text = surface(&toks);
            let _ = writeln!(conllu, "# sent_id = {id}-{}", s + 1);
            let _ = writeln!(conllu, "# text = {text}");
            for (k, tok) in toks.iter().enumerate() {
                let tight = toks.get(k + 1).is_some_and(|n| n.upos == "PUNCT") || k + 1 == toks.len();
                let _ = writeln!(
                    conllu,
                    "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t{}",
                    k + 1,
                    tok.form,
                    tok.lemma,
                    tok.upos,
                    tok.head,
                    tok.deprel,
                    if tight { "SpaceAfter=No" } else { "_" }
                );
            }
            conllu.push('\n');
            raw.push(capitalize(&text));
        }
        let topic = &TOPICS[home];
        let mut categories = vec![topic.category.to_string()];
        if rng::below(&mut g, 3) == 0 {
            categories.push(topic.secondary.to_string());
        }
        // line breaks as in the metadata dump
        let abstract_text = format!("  {}\n", raw.join("\n"));
        records.push(DemoRecord {
            id,
            abstract_text,
            categories,
        });
    }
    DemoCorpus { records, conllu }
}

/// Seed of the bundled demo corpus.
pub const DEMO_SEED: u64 = 2024;

/// Config for a demo directory: 40% of documents cluster, the rest classify.
pub fn demo_config(docs: usize) -> String {
    let n_cluster = docs * 2 / 5;
    format!(
        "seed = 42\n\n[paths]\ncorpus = \"corpus.jsonl\"\nparses = \"parses.conllu\"\nout = \"out\"\n\n\
         [split]\nn_cluster = {n_cluster}\nn_class = {}\n\n[embed]\nhash_dim = 256\n",
        docs - n_cluster
    )
}

/// Writes `corpus.jsonl`, `parses.conllu` and `demo.toml` into `dir`.
pub fn write_demo(dir: &Path, docs: usize) -> Result<()> {
    let demo = demo_corpus(docs, DEMO_SEED);
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        ("corpus.jsonl", demo.corpus_jsonl()),
        ("parses.conllu", demo.conllu),
        ("demo.toml", demo_config(docs)),
    ];
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    log::info!("wrote {docs} demo documents to {}", dir.display());
    Ok(())
}
