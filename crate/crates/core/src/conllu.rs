//! CoNLL-U reader.
//!
//! Multiword-token ranges (`3-4`) and empty nodes (`5.1`) are skipped, so the
//! token list of every sentence is exactly the integer ids `1..=n`. Documents
//! are delimited by `# newdoc id = ...` comments.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedToken {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    /// Governor index, 0 for the root.
    pub head: usize,
    pub deprel: String,
    pub space_after: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sentence {
    pub sent_id: Option<String>,
    /// From `# text = ...`, or rebuilt from token forms when absent.
    pub text: String,
    pub tokens: Vec<ParsedToken>,
}

impl Sentence {
    /// Token by 1-based index.
    pub fn token(&self, index: usize) -> Option<&ParsedToken> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    /// Dependents of `head` in sentence order.
    pub fn dependents(&self, head: usize) -> impl Iterator<Item = &ParsedToken> {
        self.tokens.iter().filter(move |t| t.head == head)
    }

    fn rebuild_text(&self) -> String {
        let mut s = String::new();
        for t in &self.tokens {
            s.push_str(&t.form);
            if t.space_after {
                s.push(' ');
            }
        }
        s.trim_end().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedDocument {
    pub doc_id: Option<String>,
    pub sentences: Vec<Sentence>,
}

/// All sentences of `text`, ignoring document boundaries.
pub fn parse_conllu(text: &str) -> Result<Vec<Sentence>> {
    Ok(parse_documents(text)?
        .into_iter()
        .flat_map(|d| d.sentences)
        .collect())
}

pub fn parse_documents(text: &str) -> Result<Vec<ParsedDocument>> {
    let mut docs: Vec<ParsedDocument> = Vec::new();
    let mut current = Sentence::default();
    let mut has_text = false;
    let mut sentence_start = 1;

    let finish = |docs: &mut Vec<ParsedDocument>, sentence: Sentence, has_text: bool, start: usize| -> Result<()> {
        if sentence.tokens.is_empty() {
            return Ok(());
        }
        let n = sentence.tokens.len();
        for t in &sentence.tokens {
            if t.head > n {
                return Err(Error::Conllu {
                    line: start,
                    message: format!("token {} has head {} outside sentence of length {n}", t.index, t.head),
                });
            }
        }
        let mut sentence = sentence;
        if !has_text {
            sentence.text = sentence.rebuild_text();
        }
        if docs.is_empty() {
            docs.push(ParsedDocument::default());
        }
        docs.last_mut().expect("document present").sentences.push(sentence);
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            finish(&mut docs, std::mem::take(&mut current), has_text, sentence_start)?;
            has_text = false;
            continue;
        }
        if current.tokens.is_empty() && current.sent_id.is_none() && !has_text {
            sentence_start = line_no;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some((key, value)) = comment.split_once('=') {
                let value = value.trim().to_string();
                match key.trim() {
                    "newdoc id" => {
                        finish(&mut docs, std::mem::take(&mut current), has_text, sentence_start)?;
                        has_text = false;
                        docs.push(ParsedDocument {
                            doc_id: Some(value),
                            sentences: Vec::new(),
                        });
                    }
                    "sent_id" => current.sent_id = Some(value),
                    "text" => {
                        current.text = value;
                        has_text = true;
                    }
                    _ => {}
                }
            }
            continue;
        }

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::Conllu {
                line: line_no,
                message: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let index: usize = id.parse().map_err(|_| Error::Conllu {
            line: line_no,
            message: format!("invalid token id {id:?}"),
        })?;
        if index != current.tokens.len() + 1 {
            return Err(Error::Conllu {
                line: line_no,
                message: format!("token id {index} out of sequence (expected {})", current.tokens.len() + 1),
            });
        }
        let head: usize = cols[6].parse().map_err(|_| Error::Conllu {
            line: line_no,
            message: format!("non-integer head {:?}", cols[6]),
        })?;
        current.tokens.push(ParsedToken {
            index,
            form: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos: cols[3].to_string(),
            head,
            deprel: cols[7].to_string(),
            space_after: !cols[9].split('|').any(|m| m == "SpaceAfter=No"),
        });
    }
    finish(&mut docs, current, has_text, sentence_start)?;
    docs.retain(|d| !d.sentences.is_empty() || d.doc_id.is_some());
    Ok(docs)
}

/// Reads a CoNLL-U file; a file without `newdoc` markers is one document
/// named after the file stem.
pub fn read_file(path: &Path) -> Result<Vec<ParsedDocument>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingInput(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })?;
    let mut docs = parse_documents(&text)?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    for d in &mut docs {
        if d.doc_id.is_none() {
            d.doc_id = stem.clone();
        }
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "# text = Transformer improves accuracy.\n\
1\tTransformer\ttransformer\tNOUN\t_\t_\t2\tnsubj\t_\t_\n\
2\timproves\timprove\tVERB\t_\t_\t0\tROOT\t_\t_\n\
3\taccuracy\taccuracy\tNOUN\t_\t_\t2\tdobj\t_\tSpaceAfter=No\n\
4\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_\n\
\n\
1\tWe\twe\tPRON\t_\t_\t2\tnsubj\t_\t_\n\
2\tsleep\tsleep\tVERB\t_\t_\t0\tROOT\t_\tSpaceAfter=No\n\
3\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_\n";

    #[test]
    fn two_sentences() {
        let s = parse_conllu(TWO).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].text, "Transformer improves accuracy.");
        assert_eq!(s[1].text, "We sleep.");
    }

    #[test]
    fn column_mapping() {
        let s = parse_conllu("1\ttransformer\ttransformer\tNOUN\t_\t_\t2\tnsubj\t_\t_\n2\truns\trun\tVERB\t_\t_\t0\troot\t_\t_\n").unwrap();
        let t = &s[0].tokens[0];
        assert_eq!(t.index, 1);
        assert_eq!(t.deprel, "nsubj");
        assert_eq!(t.head, 2);
        assert_eq!(t.form, "transformer");
        assert_eq!(t.upos, "NOUN");
    }

    #[test]
    fn ranges_and_empty_nodes_are_skipped() {
        let src = "1\tWe\twe\tPRON\t_\t_\t2\tnsubj\t_\t_\n\
2\tlook\tlook\tVERB\t_\t_\t0\troot\t_\t_\n\
3-4\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n\
3\tde\tde\tADP\t_\t_\t5\tcase\t_\t_\n\
4\tel\tel\tDET\t_\t_\t5\tdet\t_\t_\n\
4.1\tx\tx\tX\t_\t_\t_\t_\t_\t_\n\
5\tmodelo\tmodelo\tNOUN\t_\t_\t2\tobl\t_\t_\n";
        let s = parse_conllu(src).unwrap();
        let idx: Vec<_> = s[0].tokens.iter().map(|t| t.index).collect();
        assert_eq!(idx, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn wrong_column_count_reports_line() {
        let src = "# text = x\n1\tx\tx\tNOUN\t_\t_\t0\troot\t_\n";
        match parse_conllu(src) {
            Err(Error::Conllu { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_integer_head() {
        let src = "1\tx\tx\tNOUN\t_\t_\tROOT\troot\t_\t_\n";
        assert!(matches!(parse_conllu(src), Err(Error::Conllu { line: 1, .. })));
    }

    #[test]
    fn head_out_of_range() {
        let src = "1\tx\tx\tNOUN\t_\t_\t5\troot\t_\t_\n";
        assert!(matches!(parse_conllu(src), Err(Error::Conllu { .. })));
    }

    #[test]
    fn newdoc_groups_sentences() {
        let src = format!("# newdoc id = a\n{TWO}\n# newdoc id = b\n# text = Hi\n1\tHi\thi\tINTJ\t_\t_\t0\troot\t_\t_\n");
        let docs = parse_documents(&src).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].doc_id.as_deref(), Some("a"));
        assert_eq!(docs[0].sentences.len(), 2);
        assert_eq!(docs[1].doc_id.as_deref(), Some("b"));
        assert_eq!(docs[1].sentences[0].text, "Hi");
    }
}
