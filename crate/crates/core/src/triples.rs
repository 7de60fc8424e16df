//! Subject/relation/object extraction over dependency parses, linearization
//! into short statements, and per-corpus knowledge graphs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::conllu::{ParsedDocument, ParsedToken, Sentence};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub doc_id: String,
    pub sentence_index: usize,
    pub subject: String,
    pub relation: String,
    pub object: String,
    pub sentence_text: String,
}

/// Dependency-label inventory used by the extraction rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeprelScheme {
    pub subjects: Vec<String>,
    pub passive_subjects: Vec<String>,
    pub objects: Vec<String>,
    /// Verb → preposition labels, followed by `prep_objects` (spaCy `prep` → `pobj`).
    pub prepositions: Vec<String>,
    pub prep_objects: Vec<String>,
    /// Case-marked nominals attached directly to the verb (UD `obl`).
    pub obliques: Vec<String>,
}

fn labels(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

impl DeprelScheme {
    pub fn spacy() -> Self {
        DeprelScheme {
            subjects: labels(&["nsubj"]),
            passive_subjects: labels(&["nsubjpass"]),
            objects: labels(&["dobj"]),
            prepositions: labels(&["prep"]),
            prep_objects: labels(&["pobj"]),
            obliques: Vec::new(),
        }
    }

    pub fn universal() -> Self {
        DeprelScheme {
            subjects: labels(&["nsubj"]),
            passive_subjects: labels(&["nsubj:pass"]),
            objects: labels(&["obj"]),
            prepositions: Vec::new(),
            prep_objects: Vec::new(),
            obliques: labels(&["obl"]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationForm {
    #[default]
    Surface,
    Lemma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemePreset {
    #[default]
    Spacy,
    Ud,
}

impl SchemePreset {
    pub fn scheme(self) -> DeprelScheme {
        match self {
            SchemePreset::Spacy => DeprelScheme::spacy(),
            SchemePreset::Ud => DeprelScheme::universal(),
        }
    }
}

impl std::str::FromStr for SchemePreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spacy" => Ok(SchemePreset::Spacy),
            "ud" => Ok(SchemePreset::Ud),
            other => Err(format!("unknown deprel preset {other:?} (expected spacy or ud)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractConfig {
    pub scheme: DeprelScheme,
    pub relation: RelationForm,
    pub accept_passive: bool,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            scheme: DeprelScheme::spacy(),
            relation: RelationForm::Surface,
            accept_passive: true,
        }
    }
}

/// Replaces line breaks (and the whitespace around them) with single spaces.
pub fn flatten_abstract(text: &str) -> String {
    let segments: Vec<&str> = text.split(['\n', '\r']).collect();
    let last = segments.len() - 1;
    segments
        .iter()
        .enumerate()
        .map(|(i, seg)| {
            let s = if i > 0 { seg.trim_start() } else { seg };
            if i < last {
                s.trim_end()
            } else {
                s
            }
        })
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn has_label(set: &[String], deprel: &str) -> bool {
    set.iter().any(|l| l == deprel)
}

/// Surface text of the subtree rooted at `head`, punctuation removed, in sentence order.
fn subtree_span(sentence: &Sentence, head: usize) -> String {
    let n = sentence.tokens.len();
    let mut inside = vec![false; n + 1];
    inside[head] = true;
    // Heads may point forward, so iterate to a fixed point.
    let mut changed = true;
    while changed {
        changed = false;
        for t in &sentence.tokens {
            if !inside[t.index] && t.head != 0 && inside[t.head] {
                inside[t.index] = true;
                changed = true;
            }
        }
    }
    sentence
        .tokens
        .iter()
        .filter(|t| inside[t.index] && t.upos != "PUNCT")
        .map(|t| t.form.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

fn find_object<'a>(sentence: &'a Sentence, verb: &ParsedToken, scheme: &DeprelScheme) -> Option<&'a ParsedToken> {
    if let Some(o) = sentence
        .dependents(verb.index)
        .find(|t| has_label(&scheme.objects, &t.deprel))
    {
        return Some(o);
    }
    for dep in sentence.dependents(verb.index) {
        if has_label(&scheme.prepositions, &dep.deprel) {
            if let Some(p) = sentence
                .dependents(dep.index)
                .find(|t| has_label(&scheme.prep_objects, &t.deprel))
            {
                return Some(p);
            }
        }
        if has_label(&scheme.obliques, &dep.deprel) {
            return Some(dep);
        }
    }
    None
}

/// One triple per verb that has both a subject and an object, in verb order.
pub fn extract_triples(sentence: &Sentence, doc_id: &str, sentence_index: usize, config: &ExtractConfig) -> Vec<Triple> {
    let scheme = &config.scheme;
    let mut out = Vec::new();
    for verb in sentence.tokens.iter().filter(|t| t.upos == "VERB") {
        let subject = sentence.dependents(verb.index).find(|t| {
            has_label(&scheme.subjects, &t.deprel)
                || (config.accept_passive && has_label(&scheme.passive_subjects, &t.deprel))
        });
        let Some(subject) = subject else { continue };
        let Some(object) = find_object(sentence, verb, scheme) else {
            continue;
        };
        let subject = subtree_span(sentence, subject.index);
        let object = subtree_span(sentence, object.index);
        let relation = match config.relation {
            RelationForm::Surface => verb.form.clone(),
            RelationForm::Lemma => verb.lemma.clone(),
        };
        if subject.is_empty() || object.is_empty() || relation.is_empty() {
            continue;
        }
        out.push(Triple {
            doc_id: doc_id.to_string(),
            sentence_index,
            subject,
            relation,
            object,
            sentence_text: sentence.text.clone(),
        });
    }
    out
}

/// Triples of every sentence in `doc`. Documents without an id get `fallback_id`.
pub fn extract_document(doc: &ParsedDocument, fallback_id: &str, config: &ExtractConfig) -> Vec<Triple> {
    let doc_id = doc.doc_id.as_deref().unwrap_or(fallback_id);
    doc.sentences
        .iter()
        .enumerate()
        .flat_map(|(i, s)| extract_triples(s, doc_id, i, config))
        .collect()
}

/// `"<Subject> <relation> <object>."`, capitalizing only the first character.
pub fn linearize(triple: &Triple) -> String {
    let body = format!("{} {} {}", triple.subject, triple.relation, triple.object);
    let mut chars = body.chars();
    let mut out = String::with_capacity(body.len() + 1);
    if let Some(first) = chars.next() {
        out.extend(first.to_uppercase());
        out.push_str(chars.as_str());
    }
    out.push('.');
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub subject: String,
    pub relation: String,
    pub object: String,
    pub sentence_text: String,
}

/// Multigraph of concepts; duplicate triples give duplicate edges.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KnowledgeGraph {
    pub nodes: BTreeSet<String>,
    pub edges: Vec<Edge>,
}

pub fn build_graph(triples: &[Triple]) -> KnowledgeGraph {
    let mut g = KnowledgeGraph::default();
    for t in triples {
        g.nodes.insert(t.subject.clone());
        g.nodes.insert(t.object.clone());
        g.edges.push(Edge {
            subject: t.subject.clone(),
            relation: t.relation.clone(),
            object: t.object.clone(),
            sentence_text: t.sentence_text.clone(),
        });
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::parse_conllu;

    fn parse_one(src: &str) -> Sentence {
        parse_conllu(src).unwrap().remove(0)
    }

    pub(crate) fn triple(s: &str, r: &str, o: &str) -> Triple {
        Triple {
            doc_id: "d".into(),
            sentence_index: 0,
            subject: s.into(),
            relation: r.into(),
            object: o.into(),
            sentence_text: format!("{s} {r} {o}"),
        }
    }

    #[test]
    fn flatten_examples() {
        assert_eq!(flatten_abstract("line1\nline2"), "line1 line2");
        assert_eq!(flatten_abstract("no breaks"), "no breaks");
        assert_eq!(flatten_abstract("a\n\nb"), "a b");
        assert_eq!(flatten_abstract("a \r\n  b"), "a b");
        assert_eq!(flatten_abstract(""), "");
    }

    #[test]
    fn transformer_improves_accuracy() {
        let s = parse_one(
            "1\ttransformer\ttransformer\tNOUN\t_\t_\t2\tnsubj\t_\t_\n\
2\timproves\timprove\tVERB\t_\t_\t0\tROOT\t_\t_\n\
3\taccuracy\taccuracy\tNOUN\t_\t_\t2\tdobj\t_\t_\n",
        );
        let t = extract_triples(&s, "d", 0, &ExtractConfig::default());
        assert_eq!(t.len(), 1);
        assert_eq!((t[0].subject.as_str(), t[0].relation.as_str(), t[0].object.as_str()), ("transformer", "improves", "accuracy"));
        assert_eq!(linearize(&t[0]), "Transformer improves accuracy.");

        let lemma = ExtractConfig {
            relation: RelationForm::Lemma,
            ..ExtractConfig::default()
        };
        assert_eq!(extract_triples(&s, "d", 0, &lemma)[0].relation, "improve");
    }

    #[test]
    fn no_verb_no_triples() {
        let s = parse_one("1\taccuracy\taccuracy\tNOUN\t_\t_\t0\tROOT\t_\t_\n");
        assert!(extract_triples(&s, "d", 0, &ExtractConfig::default()).is_empty());
    }

    #[test]
    fn pobj_fallback() {
        let s = parse_one(
            "1\twe\twe\tPRON\t_\t_\t2\tnsubj\t_\t_\n\
2\trely\trely\tVERB\t_\t_\t0\tROOT\t_\t_\n\
3\ton\ton\tADP\t_\t_\t2\tprep\t_\t_\n\
4\tembeddings\tembedding\tNOUN\t_\t_\t3\tpobj\t_\t_\n",
        );
        let t = extract_triples(&s, "d", 0, &ExtractConfig::default());
        assert_eq!(t.len(), 1);
        assert_eq!((t[0].subject.as_str(), t[0].relation.as_str(), t[0].object.as_str()), ("we", "rely", "embeddings"));
    }

    #[test]
    fn ud_oblique_fallback_and_passive() {
        let src = "1\tmodels\tmodel\tNOUN\t_\t_\t3\tnsubj:pass\t_\t_\n\
2\tare\tbe\tAUX\t_\t_\t3\taux:pass\t_\t_\n\
3\ttrained\ttrain\tVERB\t_\t_\t0\troot\t_\t_\n\
4\ton\ton\tADP\t_\t_\t6\tcase\t_\t_\n\
5\tlarge\tlarge\tADJ\t_\t_\t6\tamod\t_\t_\n\
6\tcorpora\tcorpus\tNOUN\t_\t_\t3\tobl\t_\t_\n";
        let s = parse_one(src);
        let ud = ExtractConfig {
            scheme: DeprelScheme::universal(),
            ..ExtractConfig::default()
        };
        let t = extract_triples(&s, "d", 0, &ud);
        assert_eq!(t.len(), 1);
        // the case marker belongs to the oblique's subtree
        assert_eq!(t[0].object, "on large corpora");
        assert_eq!(t[0].subject, "models");

        let no_passive = ExtractConfig {
            accept_passive: false,
            ..ud
        };
        assert!(extract_triples(&s, "d", 0, &no_passive).is_empty());
    }

    #[test]
    fn multiword_spans_skip_punctuation_and_take_leftmost_arguments() {
        let src = "1\tdeep\tdeep\tADJ\t_\t_\t2\tamod\t_\t_\n\
2\tmodels\tmodel\tNOUN\t_\t_\t3\tnsubj\t_\t_\n\
3\trequire\trequire\tVERB\t_\t_\t0\tROOT\t_\t_\n\
4\tlarge\tlarge\tADJ\t_\t_\t5\tamod\t_\t_\n\
5\tdata\tdata\tNOUN\t_\t_\t3\tdobj\t_\t_\n\
6\t,\t,\tPUNCT\t_\t_\t5\tpunct\t_\t_\n\
7\tcompute\tcompute\tNOUN\t_\t_\t3\tdobj\t_\t_\n\
8\t.\t.\tPUNCT\t_\t_\t3\tpunct\t_\t_\n";
        let t = extract_triples(&parse_one(src), "d", 0, &ExtractConfig::default());
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].subject, "deep models");
        assert_eq!(t[0].object, "large data");
        assert_eq!(linearize(&t[0]), "Deep models require large data.");
    }

    #[test]
    fn copula_is_not_an_anchor() {
        let src = "1\tx\tx\tNOUN\t_\t_\t3\tnsubj\t_\t_\n\
2\tis\tbe\tAUX\t_\t_\t3\tcop\t_\t_\n\
3\ty\ty\tNOUN\t_\t_\t0\tROOT\t_\t_\n";
        assert!(extract_triples(&parse_one(src), "d", 0, &ExtractConfig::default()).is_empty());
    }

    #[test]
    fn linearize_examples() {
        assert_eq!(linearize(&triple("x", "y", "z")), "X y z.");
        assert_eq!(linearize(&triple("deep models", "require", "large data")), "Deep models require large data.");
        assert_eq!(linearize(&triple("élan", "drives", "it")), "Élan drives it.");
    }

    #[test]
    fn graph_counts() {
        assert_eq!(build_graph(&[]), KnowledgeGraph::default());
        let g = build_graph(&[triple("a", "r", "b")]);
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges.len(), 1);
        let g = build_graph(&[triple("a", "r", "b"), triple("b", "s", "c"), triple("a", "r", "b")]);
        assert_eq!(g.nodes.iter().map(String::as_str).collect::<Vec<_>>(), vec!["a", "b", "c"]);
        assert_eq!(g.edges.len(), 3);
        for e in &g.edges {
            assert!(g.nodes.contains(&e.subject) && g.nodes.contains(&e.object));
        }
    }
}
