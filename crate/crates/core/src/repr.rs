//! The four text representations fed to every encoder.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::triples::{linearize, KnowledgeGraph, Triple};

pub const SEP: &str = " [SEP] ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReprMode {
    Abstract,
    Triples,
    AbstractTriples,
    Hybrid,
}

impl ReprMode {
    pub const ALL: [ReprMode; 4] = [
        ReprMode::Abstract,
        ReprMode::Triples,
        ReprMode::AbstractTriples,
        ReprMode::Hybrid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReprMode::Abstract => "abstract",
            ReprMode::Triples => "triples",
            ReprMode::AbstractTriples => "abstract_triples",
            ReprMode::Hybrid => "hybrid",
        }
    }

    /// Abbreviation used in table rows ("Abs/Hyb").
    pub fn short(self) -> &'static str {
        match self {
            ReprMode::Abstract => "Abs",
            ReprMode::Triples => "Trip",
            ReprMode::AbstractTriples => "Abs_Trip",
            ReprMode::Hybrid => "Hyb",
        }
    }

    /// Human-readable name used in the clustering table.
    pub fn title(self) -> &'static str {
        match self {
            ReprMode::Abstract => "Full Abstract",
            ReprMode::Triples => "Triples Only",
            ReprMode::AbstractTriples => "Abstract+Triples",
            ReprMode::Hybrid => "Hybrid Approach",
        }
    }
}

impl fmt::Display for ReprMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReprMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '+'], "_").as_str() {
            "abstract" | "abs" => Ok(ReprMode::Abstract),
            "triples" | "trip" => Ok(ReprMode::Triples),
            "abstract_triples" | "abs_trip" => Ok(ReprMode::AbstractTriples),
            "hybrid" | "hyb" => Ok(ReprMode::Hybrid),
            other => Err(format!(
                "unknown representation mode {other:?} (expected abstract, triples, abstract_triples or hybrid)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReprDoc {
    pub doc_id: String,
    pub mode: ReprMode,
    pub text: String,
}

/// Linearized statements joined by single spaces, ordered by sentence
/// (verb order within a sentence is preserved from extraction).
pub fn triples_text(triples: &[Triple]) -> String {
    let mut ordered: Vec<&Triple> = triples.iter().collect();
    ordered.sort_by_key(|t| t.sentence_index);
    ordered.into_iter().map(linearize).collect::<Vec<_>>().join(" ")
}

/// Edges as `s -r-> o` joined by `"; "`.
pub fn graph_text(graph: &KnowledgeGraph) -> String {
    graph
        .edges
        .iter()
        .map(|e| format!("{} -{}-> {}", e.subject, e.relation, e.object))
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn build_representation(doc: &Document, triples: &[Triple], mode: ReprMode, include_graph: bool) -> ReprDoc {
    let text = match mode {
        ReprMode::Abstract => doc.abstract_clean.clone(),
        ReprMode::Triples => triples_text(triples),
        ReprMode::AbstractTriples => {
            let t = triples_text(triples);
            if t.is_empty() {
                doc.abstract_clean.clone()
            } else {
                format!("{} {}", doc.abstract_clean, t)
            }
        }
        ReprMode::Hybrid => {
            let mut s = format!("{}{}{}", doc.abstract_clean, SEP, triples_text(triples));
            if include_graph {
                s.push_str(SEP);
                s.push_str(&graph_text(&crate::triples::build_graph(triples)));
            }
            s
        }
    };
    ReprDoc {
        doc_id: doc.id.clone(),
        mode,
        text,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triple(s: &str, r: &str, o: &str, sentence_index: usize) -> Triple {
        Triple {
            doc_id: "1".into(),
            sentence_index,
            subject: s.into(),
            relation: r.into(),
            object: o.into(),
            sentence_text: String::new(),
        }
    }

    fn doc(text: &str) -> Document {
        Document::new("1", text, vec!["cs.AI".into()]).unwrap()
    }

    #[test]
    fn triples_text_examples() {
        assert_eq!(triples_text(&[triple("transformer", "improves", "accuracy", 0)]), "Transformer improves accuracy.");
        assert_eq!(triples_text(&[]), "");
        assert_eq!(triples_text(&[triple("a", "r", "b", 0), triple("c", "s", "d", 1)]), "A r b. C s d.");
        assert_eq!(triples_text(&[triple("c", "s", "d", 1), triple("a", "r", "b", 0)]), "A r b. C s d.");
    }

    #[test]
    fn modes() {
        let d = doc("We study X.");
        let t = [triple("transformer", "improves", "accuracy", 0)];
        assert_eq!(build_representation(&d, &t, ReprMode::Abstract, false).text, "we study x.");
        assert_eq!(build_representation(&d, &t, ReprMode::Triples, false).text, "Transformer improves accuracy.");
        assert_eq!(
            build_representation(&d, &t, ReprMode::Hybrid, false).text,
            "we study x. [SEP] Transformer improves accuracy."
        );
        assert_eq!(
            build_representation(&d, &t, ReprMode::AbstractTriples, false).text,
            "we study x. Transformer improves accuracy."
        );
        assert_eq!(
            build_representation(&d, &t, ReprMode::Hybrid, true).text,
            "we study x. [SEP] Transformer improves accuracy. [SEP] transformer -improves-> accuracy"
        );
    }

    #[test]
    fn zero_triples_still_renders_every_mode() {
        let d = doc("abc");
        assert_eq!(build_representation(&d, &[], ReprMode::Triples, false).text, "");
        assert_eq!(build_representation(&d, &[], ReprMode::AbstractTriples, false).text, "abc");
        assert_eq!(build_representation(&d, &[], ReprMode::Hybrid, false).text, "abc [SEP] ");
    }

    #[test]
    fn mode_names_round_trip() {
        for m in ReprMode::ALL {
            assert_eq!(m.as_str().parse::<ReprMode>().unwrap(), m);
            assert_eq!(m.short().parse::<ReprMode>().unwrap(), m);
        }
        assert!("graph".parse::<ReprMode>().is_err());
    }

    proptest! {
        #[test]
        fn hybrid_and_concat_decompose(abs in "[a-z ]{0,30}", words in proptest::collection::vec("[a-z]{1,5}", 0..9)) {
            let d = doc(&abs);
            let ts: Vec<_> = words.chunks_exact(3).enumerate().map(|(i, w)| triple(&w[0], &w[1], &w[2], i)).collect();
            let a = build_representation(&d, &ts, ReprMode::Abstract, false).text;
            let t = build_representation(&d, &ts, ReprMode::Triples, false).text;
            prop_assert_eq!(&a, &d.abstract_clean);

            let h = build_representation(&d, &ts, ReprMode::Hybrid, false).text;
            let parts: Vec<&str> = h.split(SEP).collect();
            prop_assert_eq!(parts.len(), 2);
            prop_assert_eq!(parts[0], a.as_str());
            prop_assert_eq!(parts[1], t.as_str());

            let hg = build_representation(&d, &ts, ReprMode::Hybrid, true).text;
            prop_assert_eq!(hg.split(SEP).count(), 3);

            let at = build_representation(&d, &ts, ReprMode::AbstractTriples, false).text;
            if t.is_empty() {
                prop_assert_eq!(at, a);
            } else {
                prop_assert_eq!(at, format!("{a} {t}"));
            }
        }
    }
}
