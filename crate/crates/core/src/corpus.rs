//! RFC text ingestion: rule-based noise removal and overlapping chunking.
//!
//! Chunk size is counted in whitespace tokens while the overlap carried into
//! the next chunk is counted in characters. A token is a maximal run of
//! non-whitespace characters.

use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

pub const DEFAULT_CHUNK_SIZE: usize = 1000;
pub const DEFAULT_OVERLAP: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
    pub source_path: String,
}

impl RawDocument {
    pub fn new(id: impl Into<String>, text: impl Into<String>, source_path: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.is_empty() {
            return Err(Error::Precondition("document text is empty".into()));
        }
        Ok(Self {
            id: id.into(),
            text,
            source_path: source_path.into(),
        })
    }

    /// Reads a plain-text file; the id is the file stem.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = jsonl::read_text(path)?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Self::new(id, text, path.display().to_string())
    }
}

/// Which lines `clean` deletes. The default value removes nothing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleaningRules {
    /// `[Page N]` footers, form feeds and the running header after each form feed.
    pub strip_page_furniture: bool,
    /// Regexes matched against section heading lines; a match drops the
    /// heading and its body up to the next heading of the same or higher level.
    pub drop_sections: Vec<String>,
    /// Collapse runs of blank lines to a single blank line.
    pub collapse_blank_runs: bool,
}

impl CleaningRules {
    /// Rules tuned for IETF plain-text RFCs.
    pub fn rfc_defaults() -> Self {
        Self {
            strip_page_furniture: true,
            drop_sections: vec![
                r"^Status of [Tt]his Memo".into(),
                r"^Copyright Notice".into(),
                r"^Table of Contents".into(),
                r"^(\d+(\.\d+)*\.?\s+)?Introduction\s*$".into(),
                r"^(\d+(\.\d+)*\.?\s+)?Acknowledge?ments?\s*$".into(),
                r"^(\d+(\.\d+)*\.?\s+)?Authors'? Addresses\s*$".into(),
                r"^(\d+(\.\d+)*\.?\s+)?Full Copyright Statement\s*$".into(),
                r"^(\d+(\.\d+)*\.?\s+)?References\s*$".into(),
            ],
            collapse_blank_runs: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedSpan {
    pub start: usize,
    pub end: usize,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanDocument {
    pub id: String,
    pub text: String,
    /// Byte ranges of the raw text that were deleted, sorted and disjoint.
    pub removed_spans: Vec<RemovedSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_id: String,
    pub index: usize,
    pub text: String,
    pub token_count: usize,
    /// Byte range of the chunk body in the clean text; excludes the overlap prefix.
    pub char_span: (usize, usize),
}

impl Chunk {
    /// The chunk text with the overlap prefix removed.
    pub fn body(&self) -> &str {
        let body_len = self.char_span.1 - self.char_span.0;
        &self.text[self.text.len() - body_len..]
    }

    /// The overlap prefix copied from the previous chunk.
    pub fn overlap_prefix(&self) -> &str {
        let body_len = self.char_span.1 - self.char_span.0;
        &self.text[..self.text.len() - body_len]
    }

    pub fn id(&self) -> String {
        format!("{}#{}", self.doc_id, self.index)
    }
}

const RULE_FURNITURE: &str = "page-furniture";
const RULE_SECTION: &str = "drop-section";
const RULE_BLANK: &str = "blank-run";

struct Line<'a> {
    start: usize,
    raw: &'a str,
    content: &'a str,
}

impl Line<'_> {
    fn is_blank(&self) -> bool {
        self.content.trim().is_empty()
    }

    fn is_heading(&self) -> bool {
        self.content.chars().next().is_some_and(|c| !c.is_whitespace())
    }
}

fn split_lines(text: &str) -> Vec<Line<'_>> {
    let mut start = 0;
    text.split_inclusive('\n')
        .map(|raw| {
            let content = raw.trim_end_matches('\n').trim_end_matches('\r');
            let line = Line { start, raw, content };
            start += raw.len();
            line
        })
        .collect()
}

fn heading_level(heading: &str, numbered: &Regex) -> usize {
    numbered
        .captures(heading)
        .map(|c| c[1].split('.').count())
        .unwrap_or(1)
}

/// Deletes every line claimed by an enabled rule and keeps the rest verbatim,
/// including their line terminators.
pub fn clean(raw: &RawDocument, rules: &CleaningRules) -> Result<CleanDocument> {
    if raw.text.is_empty() {
        return Err(Error::Precondition("document text is empty".into()));
    }
    let section_patterns = rules
        .drop_sections
        .iter()
        .map(|p| Regex::new(p).map_err(|e| Error::Config(format!("bad section pattern `{p}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;

    let lines = split_lines(&raw.text);
    let mut removed: Vec<Option<&'static str>> = vec![None; lines.len()];

    if rules.strip_page_furniture {
        let page_footer = Regex::new(r"\[Page \d+\]\s*$").expect("static regex");
        let mut after_form_feed = false;
        for (i, line) in lines.iter().enumerate() {
            if line.content.contains('\x0c') {
                removed[i] = Some(RULE_FURNITURE);
                after_form_feed = true;
            } else if page_footer.is_match(line.content) {
                removed[i] = Some(RULE_FURNITURE);
            } else if after_form_feed && !line.is_blank() {
                removed[i] = Some(RULE_FURNITURE);
                after_form_feed = false;
            }
        }
    }

    if !section_patterns.is_empty() {
        let numbered = Regex::new(r"^(\d+(?:\.\d+)*)\.?\s").expect("static regex");
        let mut dropping: Option<usize> = None;
        for (i, line) in lines.iter().enumerate() {
            if removed[i].is_some() {
                continue;
            }
            if line.is_heading() {
                let level = heading_level(line.content, &numbered);
                if dropping.is_some_and(|active| level <= active) {
                    dropping = None;
                }
                if dropping.is_none() && section_patterns.iter().any(|p| p.is_match(line.content.trim())) {
                    dropping = Some(level);
                }
            }
            if dropping.is_some() {
                removed[i] = Some(RULE_SECTION);
            }
        }
    }

    if rules.collapse_blank_runs {
        let mut previous_kept_blank = false;
        for (i, line) in lines.iter().enumerate() {
            if removed[i].is_some() {
                continue;
            }
            if line.is_blank() && previous_kept_blank {
                removed[i] = Some(RULE_BLANK);
            } else {
                previous_kept_blank = line.is_blank();
            }
        }
    }

    let mut text = String::with_capacity(raw.text.len());
    let mut removed_spans: Vec<RemovedSpan> = Vec::new();
    for (line, rule) in lines.iter().zip(&removed) {
        match rule {
            None => text.push_str(line.raw),
            Some(rule) => {
                let end = line.start + line.raw.len();
                match removed_spans.last_mut() {
                    Some(last) if last.end == line.start && last.rule == *rule => last.end = end,
                    _ => removed_spans.push(RemovedSpan {
                        start: line.start,
                        end,
                        rule: (*rule).to_string(),
                    }),
                }
            }
        }
    }

    Ok(CleanDocument {
        id: raw.id.clone(),
        text,
        removed_spans,
    })
}

/// Byte ranges of the whitespace-delimited tokens of `text`.
pub fn token_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

/// Splits the token stream into consecutive chunks of `chunk_size` tokens;
/// each chunk after the first starts with the last `overlap` characters of
/// the previous chunk's text.
pub fn chunk(doc: &CleanDocument, chunk_size: usize, overlap: usize) -> Result<Vec<Chunk>> {
    if chunk_size == 0 {
        return Err(Error::InvalidArgument("chunk_size must be at least 1".into()));
    }
    let spans = token_spans(&doc.text);
    let mut chunks: Vec<Chunk> = Vec::with_capacity(spans.len().div_ceil(chunk_size));
    for (index, group) in spans.chunks(chunk_size).enumerate() {
        let span = (group[0].0, group[group.len() - 1].1);
        let body = &doc.text[span.0..span.1];
        let mut text = String::new();
        if let (Some(prev), true) = (chunks.last(), overlap > 0) {
            let prev_chars = prev.text.chars().count();
            if overlap >= prev_chars {
                return Err(Error::Precondition(format!(
                    "overlap {overlap} is not smaller than chunk {} ({prev_chars} chars)",
                    prev.index
                )));
            }
            let cut = prev.text.char_indices().nth(prev_chars - overlap).map(|(i, _)| i).unwrap_or(0);
            text.push_str(&prev.text[cut..]);
        }
        text.push_str(body);
        chunks.push(Chunk {
            doc_id: doc.id.clone(),
            index,
            text,
            token_count: group.len(),
            char_span: span,
        });
    }
    Ok(chunks)
}

pub fn write_corpus(path: &Path, chunks: &[Chunk]) -> Result<()> {
    jsonl::write(path, chunks)
}

pub fn read_corpus(path: &Path) -> Result<Vec<Chunk>> {
    jsonl::read(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> RawDocument {
        RawDocument::new("d", text, "mem").unwrap()
    }

    fn clean_doc(text: &str) -> CleanDocument {
        clean(&doc(text), &CleaningRules::default()).unwrap()
    }

    #[test]
    fn page_footer_is_removed() {
        let raw = doc("   body one\nSchulzrinne, et. al.   Standards Track   [Page 12]\n   body two\n");
        let rules = CleaningRules {
            strip_page_furniture: true,
            ..Default::default()
        };
        let out = clean(&raw, &rules).unwrap();
        assert_eq!(out.text, "   body one\n   body two\n");
        assert_eq!(out.removed_spans.len(), 1);
        assert_eq!(out.removed_spans[0].rule, "page-furniture");
        assert_eq!(&raw.text[out.removed_spans[0].start..out.removed_spans[0].end].trim_end(),
            &"Schulzrinne, et. al.   Standards Track   [Page 12]");
    }

    #[test]
    fn form_feed_and_running_header_are_removed() {
        let raw = doc("   a\n\x0c\nRFC 2326   Real Time Streaming Protocol   April 1998\n\n   b\n");
        let rules = CleaningRules {
            strip_page_furniture: true,
            ..Default::default()
        };
        let out = clean(&raw, &rules).unwrap();
        assert_eq!(out.text, "   a\n\n   b\n");
        assert_eq!(out.removed_spans.len(), 1, "adjacent removals merge");
    }

    #[test]
    fn empty_rules_are_identity() {
        let text = "Title\n\n\n   body [Page 1]\n\x0c\n";
        let out = clean_doc(text);
        assert_eq!(out.text, text);
        assert!(out.removed_spans.is_empty());
    }

    #[test]
    fn blank_runs_collapse() {
        let raw = doc("body A\n\n\n\nbody B");
        let rules = CleaningRules {
            collapse_blank_runs: true,
            ..Default::default()
        };
        let out = clean(&raw, &rules).unwrap();
        assert_eq!(out.text, "body A\n\nbody B");
        assert_eq!(out.removed_spans, vec![RemovedSpan { start: 8, end: 10, rule: "blank-run".into() }]);
    }

    #[test]
    fn section_drop_respects_heading_levels() {
        let text = "1. Introduction\n   intro\n1.1 Purpose\n   purpose\n2. Methods\n   keep\n";
        let rules = CleaningRules {
            drop_sections: vec![r"^1\.\s+Introduction".into()],
            ..Default::default()
        };
        let out = clean(&doc(text), &rules).unwrap();
        assert_eq!(out.text, "2. Methods\n   keep\n");

        let rules = CleaningRules {
            drop_sections: vec![r"Purpose$".into()],
            ..Default::default()
        };
        let out = clean(&doc(text), &rules).unwrap();
        assert_eq!(out.text, "1. Introduction\n   intro\n2. Methods\n   keep\n");
    }

    #[test]
    fn bad_pattern_is_config_error() {
        let rules = CleaningRules {
            drop_sections: vec!["(".into()],
            ..Default::default()
        };
        assert!(matches!(clean(&doc("x"), &rules), Err(Error::Config(_))));
    }

    #[test]
    fn removed_spans_sorted_and_disjoint() {
        let text = "Table of Contents\n   1. x .... 3\n\n\n2. Body\n   body\n   more [Page 2]\n\x0c\nRFC 1  hdr\n\n\n   tail\n";
        let out = clean(&doc(text), &CleaningRules::rfc_defaults()).unwrap();
        for pair in out.removed_spans.windows(2) {
            assert!(pair[0].end <= pair[1].start);
        }
        assert_eq!(out.text, "2. Body\n   body\n\n   tail\n");
    }

    #[test]
    fn chunk_counts_follow_integer_division() {
        let text = (0..25).map(|i| format!("t{i}")).collect::<Vec<_>>().join(" ");
        let chunks = chunk(&clean_doc(&text), 10, 0).unwrap();
        let counts: Vec<_> = chunks.iter().map(|c| c.token_count).collect();
        assert_eq!(counts, vec![10, 10, 5]);
        assert_eq!(chunks.iter().map(|c| c.index).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn single_chunk_has_no_prefix() {
        let text = (0..10).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        let chunks = chunk(&clean_doc(&text), 1000, 200).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].text, text);
        assert_eq!(chunks[0].overlap_prefix(), "");
    }

    #[test]
    fn overlap_prefix_is_tail_of_previous_chunk() {
        let chunks = chunk(&clean_doc("alpha beta gamma delta"), 2, 5).unwrap();
        assert_eq!(chunks[0].text, "alpha beta");
        assert_eq!(chunks[1].text, " betagamma delta");
        assert_eq!(chunks[1].overlap_prefix(), " beta");
        assert_eq!(chunks[1].body(), "gamma delta");
        assert_eq!(chunks[1].char_span, (11, 22));
    }

    #[test]
    fn empty_document_gives_no_chunks() {
        let d = CleanDocument {
            id: "d".into(),
            text: "  \n\n ".into(),
            removed_spans: vec![],
        };
        assert!(chunk(&d, 5, 2).unwrap().is_empty());
    }

    #[test]
    fn oversized_overlap_is_rejected() {
        assert!(matches!(
            chunk(&clean_doc("a b c d"), 1, 1),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(chunk(&clean_doc("a"), 0, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn overlap_counts_characters_not_bytes() {
        let chunks = chunk(&clean_doc("héllo wörld"), 1, 2).unwrap();
        assert_eq!(chunks[1].overlap_prefix(), "lo");
        let chunks = chunk(&clean_doc("abcdé xyz"), 1, 2).unwrap();
        assert_eq!(chunks[1].overlap_prefix(), "dé");
    }
}
