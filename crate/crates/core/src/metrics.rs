//! Token-level similarity between a generated packet and its ground truth:
//! smoothed BLEU, ROUGE recall and word error rate.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenSource {
    Candidate,
    Reference,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    tokens: Vec<String>,
    source: TokenSource,
}

impl TokenSequence {
    pub fn candidate<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Self {
        Self {
            tokens: tokens.into_iter().map(Into::into).collect(),
            source: TokenSource::Candidate,
        }
    }

    /// References must be non-empty.
    pub fn reference<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::candidate(tokens).into_reference()
    }

    pub fn into_reference(self) -> Result<Self> {
        if self.tokens.is_empty() {
            return Err(Error::InvalidArgument("reference token sequence is empty".into()));
        }
        Ok(Self {
            source: TokenSource::Reference,
            ..self
        })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn source(&self) -> TokenSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Splits packet text on whitespace after CRLF/CR normalization. The result
/// is labelled a candidate; call [`TokenSequence::into_reference`] for ground truth.
pub fn tokenize_packet(raw: &[u8]) -> Result<TokenSequence> {
    let text = std::str::from_utf8(raw).map_err(|e| Error::Tokenize(format!("packet is not UTF-8: {e}")))?;
    let normalized = text.replace("\r\n", "\n").replace('\r', "\n");
    Ok(TokenSequence::candidate(normalized.split_whitespace()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricScores {
    pub bleu: f64,
    pub rouge: f64,
    pub wer: f64,
}

impl MetricScores {
    /// Score assigned to output that cannot be compared at all.
    pub const FLOOR: MetricScores = MetricScores {
        bleu: 0.0,
        rouge: 0.0,
        wer: 1.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RougeVariant {
    N(usize),
    L,
}

impl Default for RougeVariant {
    fn default() -> Self {
        RougeVariant::N(1)
    }
}

impl fmt::Display for RougeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RougeVariant::N(n) => write!(f, "rouge-{n}"),
            RougeVariant::L => f.write_str("rouge-l"),
        }
    }
}

impl From<RougeVariant> for String {
    fn from(v: RougeVariant) -> Self {
        v.to_string()
    }
}

impl TryFrom<String> for RougeVariant {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for RougeVariant {
    type Err = Error;

    /// Accepts `rouge-1`, `n2`, `l`, `rouge-l` and similar spellings.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let tail = lower.strip_prefix("rouge-").unwrap_or(&lower);
        if tail == "l" {
            return Ok(RougeVariant::L);
        }
        let digits = tail.strip_prefix('n').unwrap_or(tail);
        match digits.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(RougeVariant::N(n)),
            _ => Err(Error::InvalidArgument(format!("unknown ROUGE variant `{s}`"))),
        }
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Sum over candidate n-grams of min(count in candidate, count in reference).
fn clipped_overlap(candidate: &[String], reference: &[String], n: usize) -> usize {
    let reference = ngram_counts(reference, n);
    ngram_counts(candidate, n)
        .into_iter()
        .map(|(gram, c)| c.min(reference.get(gram).copied().unwrap_or(0)))
        .sum()
}

fn require_reference(reference: &TokenSequence) -> Result<()> {
    if reference.is_empty() {
        return Err(Error::InvalidArgument("reference is empty".into()));
    }
    Ok(())
}

/// Geometric mean of clipped n-gram precisions times the brevity penalty.
///
/// With `smoothing`, a zero numerator for n >= 2 counts as one match. The
/// highest order is capped at the candidate length.
pub fn bleu(candidate: &TokenSequence, reference: &TokenSequence, max_n: usize, smoothing: bool) -> Result<f64> {
    require_reference(reference)?;
    if !(1..=4).contains(&max_n) {
        return Err(Error::InvalidArgument(format!("max_n must be in 1..=4, got {max_n}")));
    }
    let (cand, refr) = (candidate.tokens(), reference.tokens());
    if cand.is_empty() {
        return Ok(0.0);
    }
    let orders = max_n.min(cand.len());
    let mut log_sum = 0.0;
    for n in 1..=orders {
        let total = cand.len() + 1 - n;
        let mut matches = clipped_overlap(cand, refr, n);
        if matches == 0 {
            if smoothing && n >= 2 {
                matches = 1;
            } else {
                return Ok(0.0);
            }
        }
        log_sum += (matches as f64 / total as f64).ln();
    }
    let precision = (log_sum / orders as f64).exp();
    let brevity = (1.0 - refr.len() as f64 / cand.len() as f64).exp().min(1.0);
    Ok((precision * brevity).clamp(0.0, 1.0))
}

pub fn rouge(candidate: &TokenSequence, reference: &TokenSequence, variant: RougeVariant) -> Result<f64> {
    require_reference(reference)?;
    let (cand, refr) = (candidate.tokens(), reference.tokens());
    match variant {
        RougeVariant::N(n) => {
            if n == 0 || refr.len() < n {
                return Err(Error::InvalidArgument(format!(
                    "reference of {} tokens has no {n}-grams",
                    refr.len()
                )));
            }
            let total = refr.len() + 1 - n;
            Ok(clipped_overlap(cand, refr, n) as f64 / total as f64)
        }
        RougeVariant::L => Ok(lcs_len(cand, refr) as f64 / refr.len() as f64),
    }
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// Word-level Levenshtein distance with unit costs.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(x != y);
            cur[j + 1] = substitute.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance divided by reference length; not clamped at 1.
pub fn wer(candidate: &TokenSequence, reference: &TokenSequence) -> Result<f64> {
    require_reference(reference)?;
    Ok(edit_distance(candidate.tokens(), reference.tokens()) as f64 / reference.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricSettings {
    pub max_n: usize,
    pub smoothing: bool,
    pub rouge_variant: RougeVariant,
}

impl Default for MetricSettings {
    fn default() -> Self {
        Self {
            max_n: 4,
            smoothing: true,
            rouge_variant: RougeVariant::N(1),
        }
    }
}

/// All three metrics under one settings block.
pub fn score(candidate: &TokenSequence, reference: &TokenSequence, settings: &MetricSettings) -> Result<MetricScores> {
    Ok(MetricScores {
        bleu: bleu(candidate, reference, settings.max_n, settings.smoothing)?,
        rouge: rouge(candidate, reference, settings.rouge_variant)?,
        wer: wer(candidate, reference)?,
    })
}
