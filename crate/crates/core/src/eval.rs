//! Evaluation harness: interaction logs in, per-method score tables and
//! baseline-vs-agent deltas out.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;
use crate::metrics::{self, MetricScores, MetricSettings, TokenSequence};
use crate::rtsp::{self, b64_decode, b64_encode, RtspMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ClientToServer,
    ServerToClient,
    FuzzerQuery,
    ModelAnswer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub timestamp: String,
    pub direction: Direction,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRecord {
    pub timestamp: String,
    pub direction: Direction,
    /// Base64 payload bytes.
    pub payload: String,
}

impl From<&LogEntry> for LogRecord {
    fn from(e: &LogEntry) -> Self {
        Self {
            timestamp: e.timestamp.clone(),
            direction: e.direction,
            payload: b64_encode(&e.payload),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedLine {
    /// 1-based.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestedLog {
    pub entries: Vec<LogEntry>,
    pub rejects: Vec<RejectedLine>,
}

/// Parses log text; bad lines become rejects instead of errors.
pub fn parse_logs(text: &str) -> IngestedLog {
    let mut out = IngestedLog::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<LogRecord>(line)
            .map_err(|e| format!("bad record: {e}"))
            .and_then(|rec| {
                let payload = b64_decode(&rec.payload).map_err(|e| format!("bad base64 payload: {e}"))?;
                if payload.is_empty() {
                    return Err("payload is empty".to_string());
                }
                Ok(LogEntry {
                    timestamp: rec.timestamp,
                    direction: rec.direction,
                    payload,
                })
            });
        match parsed {
            Ok(entry) => out.entries.push(entry),
            Err(reason) => out.rejects.push(RejectedLine { line: i + 1, reason }),
        }
    }
    out
}

pub fn ingest_logs(path: &Path) -> Result<IngestedLog> {
    Ok(parse_logs(&jsonl::read_text(path)?))
}

pub fn write_logs(path: &Path, entries: &[LogEntry]) -> Result<()> {
    jsonl::write(path, entries.iter().map(LogRecord::from))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalPair {
    pub id: String,
    pub method: RtspMethod,
    pub query: String,
    pub generated: Vec<u8>,
    pub ground_truth: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalPairRecord {
    pub id: String,
    pub method: RtspMethod,
    pub query: String,
    pub generated: String,
    pub ground_truth: String,
}

impl From<&EvalPair> for EvalPairRecord {
    fn from(p: &EvalPair) -> Self {
        Self {
            id: p.id.clone(),
            method: p.method,
            query: p.query.clone(),
            generated: b64_encode(&p.generated),
            ground_truth: b64_encode(&p.ground_truth),
        }
    }
}

/// Reads a pre-paired file. The ground truth must parse as a request of the stated method.
pub fn read_pairs(path: &Path) -> Result<Vec<EvalPair>> {
    let records: Vec<EvalPairRecord> = jsonl::read(path)?;
    records
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let bad = |m: String| Error::format(path, i + 1, m);
            let generated = b64_decode(&r.generated).map_err(|e| bad(format!("generated: {e}")))?;
            let ground_truth = b64_decode(&r.ground_truth).map_err(|e| bad(format!("ground_truth: {e}")))?;
            let parsed = rtsp::parse_request(&ground_truth).map_err(|e| bad(format!("ground_truth: {e}")))?;
            if parsed.method != r.method {
                return Err(bad(format!("ground truth is {} but pair says {}", parsed.method, r.method)));
            }
            Ok(EvalPair {
                id: r.id,
                method: r.method,
                query: r.query,
                generated,
                ground_truth,
            })
        })
        .collect()
}

pub fn write_pairs(path: &Path, pairs: &[EvalPair]) -> Result<()> {
    jsonl::write(path, pairs.iter().map(EvalPairRecord::from))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    pub pairs: Vec<EvalPair>,
    /// One line per query that never got an answer or a ground-truth packet.
    pub unmatched: Vec<String>,
}

struct PendingQuery {
    ordinal: usize,
    entry_index: usize,
    query: String,
    answer: Option<Vec<u8>>,
    wanted: Option<RtspMethod>,
}

fn leading_method(bytes: &[u8]) -> Option<RtspMethod> {
    let text = String::from_utf8_lossy(bytes);
    text.lines()
        .filter(|l| !l.trim().starts_with(crate::agent::INSERT_AT))
        .flat_map(str::split_whitespace)
        .next()
        .and_then(|t| t.parse().ok())
}

/// Pairs each fuzzer query with the next model answer, then with the next
/// client packet whose method matches the answer's leading method (any
/// method if the answer does not start with one).
pub fn extract_eval_pairs(entries: &[LogEntry]) -> Extraction {
    let mut pending: Vec<PendingQuery> = Vec::new();
    let mut done: Vec<(usize, EvalPair)> = Vec::new();
    let mut unmatched = Vec::new();
    let mut queries = 0;

    for (i, entry) in entries.iter().enumerate() {
        match entry.direction {
            Direction::FuzzerQuery => {
                pending.push(PendingQuery {
                    ordinal: queries,
                    entry_index: i,
                    query: String::from_utf8_lossy(&entry.payload).into_owned(),
                    answer: None,
                    wanted: None,
                });
                queries += 1;
            }
            Direction::ModelAnswer => match pending.iter_mut().find(|p| p.answer.is_none()) {
                Some(p) => {
                    p.wanted = leading_method(&entry.payload);
                    p.answer = Some(entry.payload.clone());
                }
                None => unmatched.push(format!("entry {i}: model answer without a pending query")),
            },
            Direction::ClientToServer => {
                let Ok(request) = rtsp::parse_request(&entry.payload) else {
                    continue;
                };
                let slot = pending
                    .iter()
                    .position(|p| p.answer.is_some() && p.wanted.is_none_or(|m| m == request.method));
                if let Some(pos) = slot {
                    let p = pending.remove(pos);
                    done.push((
                        p.ordinal,
                        EvalPair {
                            id: format!("q{:04}", p.ordinal),
                            method: request.method,
                            query: p.query,
                            generated: p.answer.unwrap_or_default(),
                            ground_truth: entry.payload.clone(),
                        },
                    ));
                }
            }
            Direction::ServerToClient => {}
        }
    }
    for p in pending {
        let what = if p.answer.is_some() {
            "no matching client packet"
        } else {
            "no model answer"
        };
        unmatched.push(format!("query at entry {}: {what}", p.entry_index));
    }
    done.sort_by_key(|(ordinal, _)| *ordinal);
    Extraction {
        pairs: done.into_iter().map(|(_, p)| p).collect(),
        unmatched,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoringMode {
    /// Score the packet in the answer that matches the ground-truth method.
    #[default]
    PerPacket,
    /// Score the whole answer text.
    WholeAnswer,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSettings {
    #[serde(flatten)]
    pub metrics: MetricSettings,
    pub mode: ScoringMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub pair_id: String,
    pub method: RtspMethod,
    pub scores: MetricScores,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

/// The packet in `text` that starts with `method`: its header block plus any
/// following blank-line-separated blocks up to the next request line.
fn packet_for_method(text: &str, method: RtspMethod) -> Option<String> {
    let normalized = text.replace("\r\n", "\n");
    let mut blocks: Vec<Vec<&str>> = vec![Vec::new()];
    for line in normalized.lines() {
        let t = line.trim();
        if t.starts_with("```") || t.starts_with(crate::agent::INSERT_AT) {
            continue;
        }
        if t.is_empty() {
            blocks.push(Vec::new());
        } else {
            blocks.last_mut().expect("non-empty").push(line);
        }
    }
    let first_token = |b: &Vec<&str>| b.first().and_then(|l| l.split_whitespace().next()).map(str::to_string);
    let start = blocks.iter().position(|b| first_token(b).as_deref() == Some(method.as_str()))?;
    let mut packet = blocks[start].join("\n");
    for body in blocks[start + 1..].iter().filter(|b| !b.is_empty()) {
        if first_token(body).is_some_and(|t| t.parse::<RtspMethod>().is_ok()) {
            break;
        }
        packet.push_str("\n\n");
        packet.push_str(&body.join("\n"));
    }
    Some(packet)
}

pub fn evaluate_pair(pair: &EvalPair, settings: &EvalSettings) -> Result<Evaluation> {
    let reference = metrics::tokenize_packet(&pair.ground_truth)
        .and_then(TokenSequence::into_reference)
        .map_err(|e| Error::Precondition(format!("pair {}: ground truth unusable: {e}", pair.id)))?;
    let mut diagnostics = Vec::new();
    let scores = match std::str::from_utf8(&pair.generated) {
        Err(_) => {
            diagnostics.push("generated output is not UTF-8; floor scores assigned".to_string());
            MetricScores::FLOOR
        }
        Ok(text) => {
            let scored_text = match settings.mode {
                ScoringMode::WholeAnswer => text.to_string(),
                ScoringMode::PerPacket => packet_for_method(text, pair.method).unwrap_or_else(|| {
                    if !text.trim().is_empty() {
                        diagnostics.push(format!("no {} packet in answer; scoring whole answer", pair.method));
                    }
                    text.to_string()
                }),
            };
            let candidate = metrics::tokenize_packet(scored_text.as_bytes())?;
            metrics::score(&candidate, &reference, &settings.metrics)?
        }
    };
    Ok(Evaluation {
        pair_id: pair.id.clone(),
        method: pair.method,
        scores,
        diagnostics,
    })
}

/// Scores pairs on worker threads; results come back in input order.
pub fn evaluate_all(pairs: &[EvalPair], settings: &EvalSettings) -> Result<Vec<Evaluation>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).clamp(1, 8);
    let per_worker = pairs.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = pairs
            .chunks(per_worker)
            .map(|slice| scope.spawn(move || slice.iter().map(|p| evaluate_pair(p, settings)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("scoring thread panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: RtspMethod,
    pub pair_count: usize,
    pub bleu: f64,
    pub rouge: f64,
    pub wer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageRow {
    pub pair_count: usize,
    pub bleu: f64,
    pub rouge: f64,
    pub wer: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelReport {
    pub model_label: String,
    pub rows: Vec<MethodReport>,
    /// Weighted by pair count, not the mean of the rows.
    pub average: AverageRow,
    /// Evaluated methods that had no pairs.
    pub omitted: Vec<RtspMethod>,
}

fn row_order(method: RtspMethod) -> usize {
    RtspMethod::ALL.iter().position(|&m| m == method).expect("method in ALL")
}

pub fn aggregate_report(scores: &[(RtspMethod, MetricScores)], label: &str) -> Result<ModelReport> {
    if scores.is_empty() {
        return Err(Error::Precondition("no scores to aggregate".into()));
    }
    let mut groups: BTreeMap<usize, Vec<&MetricScores>> = BTreeMap::new();
    for (method, s) in scores {
        groups.entry(row_order(*method)).or_default().push(s);
    }
    let mean = |xs: &[&MetricScores], f: fn(&MetricScores) -> f64| xs.iter().map(|s| f(s)).sum::<f64>() / xs.len() as f64;
    let rows: Vec<MethodReport> = groups
        .iter()
        .map(|(&order, xs)| MethodReport {
            method: RtspMethod::ALL[order],
            pair_count: xs.len(),
            bleu: mean(xs, |s| s.bleu),
            rouge: mean(xs, |s| s.rouge),
            wer: mean(xs, |s| s.wer),
        })
        .collect();
    let all: Vec<&MetricScores> = scores.iter().map(|(_, s)| s).collect();
    let omitted: Vec<RtspMethod> = RtspMethod::EVALUATED
        .into_iter()
        .filter(|m| !groups.contains_key(&row_order(*m)))
        .collect();
    for m in &omitted {
        log::warn!("{label}: no pairs for {m}; row omitted");
    }
    Ok(ModelReport {
        model_label: label.to_string(),
        rows,
        average: AverageRow {
            pair_count: all.len(),
            bleu: mean(&all, |s| s.bleu),
            rouge: mean(&all, |s| s.rouge),
            wer: mean(&all, |s| s.wer),
        },
        omitted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub bleu: f64,
    pub rouge: f64,
    pub wer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDelta {
    pub model_label: String,
    #[serde(flatten)]
    pub delta: Delta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaReport {
    pub per_model: Vec<ModelDelta>,
    pub cross_model_mean: Delta,
}

/// Agent minus baseline for BLEU and ROUGE, baseline minus agent for WER,
/// so improvements are positive everywhere. Reports pair up positionally
/// and must carry the same label.
pub fn improvement_delta(baselines: &[ModelReport], agents: &[ModelReport]) -> Result<DeltaReport> {
    if baselines.is_empty() {
        return Err(Error::InvalidArgument("need at least one model".into()));
    }
    if baselines.len() != agents.len() {
        return Err(Error::InvalidArgument(format!(
            "{} baseline reports but {} agent reports",
            baselines.len(),
            agents.len()
        )));
    }
    let per_model = baselines
        .iter()
        .zip(agents)
        .map(|(b, a)| {
            if b.model_label != a.model_label {
                return Err(Error::InvalidArgument(format!(
                    "baseline `{}` paired with agent `{}`",
                    b.model_label, a.model_label
                )));
            }
            Ok(ModelDelta {
                model_label: b.model_label.clone(),
                delta: Delta {
                    bleu: a.average.bleu - b.average.bleu,
                    rouge: a.average.rouge - b.average.rouge,
                    wer: b.average.wer - a.average.wer,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = per_model.len() as f64;
    let cross_model_mean = Delta {
        bleu: per_model.iter().map(|d| d.delta.bleu).sum::<f64>() / n,
        rouge: per_model.iter().map(|d| d.delta.rouge).sum::<f64>() / n,
        wer: per_model.iter().map(|d| d.delta.wer).sum::<f64>() / n,
    };
    Ok(DeltaReport {
        per_model,
        cross_model_mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    PlainTable,
    CommaSeparated,
    StructuredRecords,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plain" | "plain-table" | "table" => Ok(ReportFormat::PlainTable),
            "csv" | "comma-separated" => Ok(ReportFormat::CommaSeparated),
            "records" | "jsonl" | "structured-records" => Ok(ReportFormat::StructuredRecords),
            other => Err(Error::InvalidArgument(format!("unknown report format `{other}`"))),
        }
    }
}

/// Fraction as a percentage rounded half away from zero to two decimals.
/// A 1e-6 slack in hundredths absorbs binary representation error at exact halves.
pub fn format_percent(fraction: f64) -> String {
    let hundredths = (fraction.abs() * 10_000.0 + 0.5 + 1e-6).floor() as u64;
    let sign = if fraction < 0.0 && hundredths > 0 { "-" } else { "" };
    format!("{sign}{}.{:02}%", hundredths / 100, hundredths % 100)
}

fn format_signed_percent(fraction: f64) -> String {
    let p = format_percent(fraction);
    if p.starts_with('-') || p == "0.00%" {
        p
    } else {
        format!("+{p}")
    }
}

fn percent_number(fraction: f64) -> String {
    format_percent(fraction).trim_end_matches('%').to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum ReportRecord {
    Model { model_label: String },
    Row(MethodReport),
    Average(AverageRow),
    Omitted { method: RtspMethod },
    Delta(ModelDelta),
    CrossModelMean(Delta),
}

pub const AVERAGE_LABEL: &str = "Average Scores";
pub const CROSS_MEAN_LABEL: &str = "Cross-model mean";

fn table(rows: &[Vec<String>], average: &[String], right_from: usize) -> String {
    let cols = average.len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().chain(std::iter::once(&average.to_vec())).map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let fmt_row = |r: &[String]| {
        r.iter()
            .enumerate()
            .map(|(c, cell)| {
                if c >= right_from {
                    format!("{cell:>w$}", w = widths[c])
                } else {
                    format!("{cell:<w$}", w = widths[c])
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let rule = |ch: &str| widths.iter().map(|w| ch.repeat(*w)).collect::<Vec<_>>().join("  ");
    let mut out = String::new();
    let (header, body) = rows.split_first().expect("header row");
    writeln!(out, "{}", fmt_row(header)).unwrap();
    writeln!(out, "{}", rule("-")).unwrap();
    for r in body {
        writeln!(out, "{}", fmt_row(r)).unwrap();
    }
    writeln!(out, "{}", rule("=")).unwrap();
    writeln!(out, "{}", fmt_row(average)).unwrap();
    out
}

fn csv_text(rows: Vec<Vec<String>>) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in rows {
        writer
            .write_record(&r)
            .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn render_model_report(report: &ModelReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::PlainTable => {
            let mut rows = vec![vec!["Request".to_string(), "Pairs".into(), "BLEU".into(), "ROUGE".into(), "WER".into()]];
            rows.extend(report.rows.iter().map(|r| {
                vec![
                    r.method.to_string(),
                    r.pair_count.to_string(),
                    format_percent(r.bleu),
                    format_percent(r.rouge),
                    format_percent(r.wer),
                ]
            }));
            let a = &report.average;
            let average = vec![
                AVERAGE_LABEL.to_string(),
                a.pair_count.to_string(),
                format_percent(a.bleu),
                format_percent(a.rouge),
                format_percent(a.wer),
            ];
            let mut out = format!("{}\n\n", report.model_label);
            out.push_str(&table(&rows, &average, 1));
            for m in &report.omitted {
                writeln!(out, "omitted: {m} (no pairs)").unwrap();
            }
            Ok(out)
        }
        ReportFormat::CommaSeparated => {
            let mut rows = vec![vec![
                "model".to_string(),
                "request".into(),
                "pairs".into(),
                "bleu_pct".into(),
                "rouge_pct".into(),
                "wer_pct".into(),
            ]];
            for r in &report.rows {
                rows.push(vec![
                    report.model_label.clone(),
                    r.method.to_string(),
                    r.pair_count.to_string(),
                    percent_number(r.bleu),
                    percent_number(r.rouge),
                    percent_number(r.wer),
                ]);
            }
            let a = &report.average;
            rows.push(vec![
                report.model_label.clone(),
                AVERAGE_LABEL.into(),
                a.pair_count.to_string(),
                percent_number(a.bleu),
                percent_number(a.rouge),
                percent_number(a.wer),
            ]);
            csv_text(rows)
        }
        ReportFormat::StructuredRecords => {
            let records = std::iter::once(ReportRecord::Model {
                model_label: report.model_label.clone(),
            })
            .chain(report.rows.iter().cloned().map(ReportRecord::Row))
            .chain(std::iter::once(ReportRecord::Average(report.average.clone())))
            .chain(report.omitted.iter().map(|&method| ReportRecord::Omitted { method }));
            jsonl::to_string(records)
        }
    }
}

pub fn render_delta_report(report: &DeltaReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::PlainTable => {
            let mut rows = vec![vec!["Model".to_string(), "BLEU".into(), "ROUGE".into(), "WER".into()]];
            rows.extend(report.per_model.iter().map(|d| {
                vec![
                    d.model_label.clone(),
                    format_signed_percent(d.delta.bleu),
                    format_signed_percent(d.delta.rouge),
                    format_signed_percent(d.delta.wer),
                ]
            }));
            let m = &report.cross_model_mean;
            let mean = vec![
                CROSS_MEAN_LABEL.to_string(),
                format_signed_percent(m.bleu),
                format_signed_percent(m.rouge),
                format_signed_percent(m.wer),
            ];
            let mut out = "Improvement of agent over baseline (positive is better)\n\n".to_string();
            out.push_str(&table(&rows, &mean, 1));
            Ok(out)
        }
        ReportFormat::CommaSeparated => {
            let mut rows = vec![vec!["model".to_string(), "delta_bleu_pct".into(), "delta_rouge_pct".into(), "delta_wer_pct".into()]];
            for d in &report.per_model {
                rows.push(vec![
                    d.model_label.clone(),
                    percent_number(d.delta.bleu),
                    percent_number(d.delta.rouge),
                    percent_number(d.delta.wer),
                ]);
            }
            let m = &report.cross_model_mean;
            rows.push(vec![
                CROSS_MEAN_LABEL.into(),
                percent_number(m.bleu),
                percent_number(m.rouge),
                percent_number(m.wer),
            ]);
            csv_text(rows)
        }
        ReportFormat::StructuredRecords => jsonl::to_string(
            report
                .per_model
                .iter()
                .cloned()
                .map(ReportRecord::Delta)
                .chain(std::iter::once(ReportRecord::CrossModelMean(report.cross_model_mean))),
        ),
    }
}

/// Parses the structured-records form of a model report.
pub fn parse_model_report(text: &str) -> Result<ModelReport> {
    let path = Path::new("<report>");
    let records: Vec<ReportRecord> = jsonl::parse(path, text)?;
    let mut iter = records.into_iter();
    let Some(ReportRecord::Model { model_label }) = iter.next() else {
        return Err(Error::format(path, 1, "report must start with a model record"));
    };
    let mut rows = Vec::new();
    let mut average = None;
    let mut omitted = Vec::new();
    for record in iter {
        match record {
            ReportRecord::Row(r) => rows.push(r),
            ReportRecord::Average(a) => average = Some(a),
            ReportRecord::Omitted { method } => omitted.push(method),
            other => return Err(Error::InvalidArgument(format!("unexpected record in model report: {other:?}"))),
        }
    }
    Ok(ModelReport {
        model_label,
        rows,
        average: average.ok_or_else(|| Error::InvalidArgument("model report has no average record".into()))?,
        omitted,
    })
}

pub fn read_model_report(path: &Path) -> Result<ModelReport> {
    parse_model_report(&jsonl::read_text(path)?).map_err(|e| match e {
        Error::Format { line, message, .. } => Error::format(path, line, message),
        other => other,
    })
}
