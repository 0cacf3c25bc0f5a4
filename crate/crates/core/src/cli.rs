//! `seedrag` command line: ingest → index → enrich → evaluate → report,
//! with files handed between stages.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::agent::{self, ChatModel, ReActTranscript, Retriever, ScriptedModel};
use crate::config::CliConfig;
use crate::corpus::{self, RawDocument};
use crate::embedding::{self, Embedder, EmbeddingProviderConfig, VectorStore};
use crate::eval::{self, EvalPair, ReportFormat};
use crate::jsonl;
use crate::rtsp::{self, SeedSequence, TransitionTable};

#[derive(Debug, Parser)]
#[command(name = "seedrag", version, about = "RAG-driven RTSP seed enrichment and packet-similarity evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Use the deterministic embedder and a scripted model; never touch the network.
    #[arg(long, global = true)]
    offline: bool,
    /// Output path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clean and chunk RFC text files into a corpus file.
    Ingest {
        #[command(flatten)]
        common: Common,
        #[arg(long = "rfc", required = true)]
        rfc: Vec<PathBuf>,
        #[arg(long)]
        chunk_size: Option<usize>,
        #[arg(long)]
        overlap: Option<usize>,
    },
    /// Embed a corpus file into a vector index.
    Index {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Enrich seed sequences with the retrieval-augmented agent.
    Enrich {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long)]
        index: Option<PathBuf>,
        /// Canned model responses separated by `---` lines.
        #[arg(long)]
        script: Option<PathBuf>,
        /// Where to write per-sequence transcripts (default: <out>.transcripts.jsonl).
        #[arg(long)]
        transcripts: Option<PathBuf>,
        /// Exit with status 1 if any enrichment is rejected.
        #[arg(long)]
        strict: bool,
    },
    /// Score generated packets against ground truth.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "pairs")]
        logs: Option<PathBuf>,
        /// Pre-paired evaluation file.
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[arg(long, default_value = "model")]
        label: String,
        /// Re-answer every query with the agent instead of using the logged answer.
        #[arg(long)]
        regenerate: bool,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        script: Option<PathBuf>,
        /// Per-pair scores as line-delimited records.
        #[arg(long)]
        per_pair: Option<PathBuf>,
    },
    /// Render score files and baseline-vs-agent deltas.
    Report {
        #[command(flatten)]
        common: Common,
        /// Baseline score file; pairs positionally with --agent.
        #[arg(long)]
        baseline: Vec<PathBuf>,
        #[arg(long)]
        agent: Vec<PathBuf>,
        /// Extra score files rendered without a delta.
        #[arg(long)]
        score: Vec<PathBuf>,
        #[arg(long, default_value = "plain-table")]
        format: String,
    },
}

/// Parses `argv` (including the program name) and runs the command.
/// Returns 0 on success, 1 on operational failure, 2 on usage errors.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn load_config(common: &Common) -> anyhow::Result<CliConfig> {
    match &common.config {
        Some(path) => Ok(CliConfig::load(path)?),
        None => Ok(CliConfig::default()),
    }
}

fn out_path(common: &Common, fallback: Option<&PathBuf>) -> anyhow::Result<PathBuf> {
    common
        .out
        .clone()
        .or_else(|| fallback.cloned())
        .context("--out is required")
}

fn embedder_for(config: &CliConfig, offline: bool) -> anyhow::Result<Box<dyn Embedder>> {
    let provider = if offline {
        EmbeddingProviderConfig::offline(config.embedding.dimension)
    } else {
        config.embedding.clone()
    };
    Ok(provider.build()?)
}

fn model_for(config: &CliConfig, offline: bool, script: Option<&Path>) -> anyhow::Result<Box<dyn ChatModel>> {
    match script {
        Some(path) => Ok(Box::new(ScriptedModel::from_file(path)?)),
        None if offline => bail!("--offline needs --script with canned model responses"),
        None => Ok(Box::new(config.agent.llm_endpoint.build()?)),
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Serialize)]
struct InsertionRecord {
    position: usize,
    packet: String,
}

#[derive(Serialize)]
struct EnrichmentRecord {
    sequence_id: String,
    accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    insertions: Vec<InsertionRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    transcript: Option<ReActTranscript>,
}

#[derive(Serialize)]
struct PairScoreRecord<'a> {
    #[serde(flatten)]
    evaluation: &'a eval::Evaluation,
    #[serde(skip_serializing_if = "Option::is_none")]
    transcript: Option<&'a ReActTranscript>,
}

fn run(command: Command) -> anyhow::Result<i32> {
    match command {
        Command::Ingest {
            common,
            rfc,
            chunk_size,
            overlap,
        } => {
            let config = load_config(&common)?;
            let out = out_path(&common, config.paths.corpus.as_ref())?;
            let chunk_size = chunk_size.unwrap_or(config.chunk_size);
            let overlap = overlap.unwrap_or(config.overlap);
            let mut chunks = Vec::new();
            for path in &rfc {
                let raw = RawDocument::from_file(path)?;
                let clean = corpus::clean(&raw, &config.cleaning)?;
                let doc_chunks = corpus::chunk(&clean, chunk_size, overlap)?;
                log::info!(
                    "{}: removed {} spans, {} chunks",
                    raw.id,
                    clean.removed_spans.len(),
                    doc_chunks.len()
                );
                chunks.extend(doc_chunks);
            }
            corpus::write_corpus(&out, &chunks)?;
            log::info!("wrote {} chunks to {}", chunks.len(), out.display());
            Ok(0)
        }

        Command::Index { common, corpus: corpus_path } => {
            let config = load_config(&common)?;
            let corpus_path = corpus_path
                .or_else(|| config.paths.corpus.clone())
                .context("--corpus is required")?;
            let out = out_path(&common, config.paths.index.as_ref())?;
            let chunks = corpus::read_corpus(&corpus_path)?;
            let embedder = embedder_for(&config, common.offline)?;
            let store = embedding::build_index(&chunks, embedder.as_ref())?;
            store.save(&out)?;
            log::info!("indexed {} chunks ({}) into {}", store.len(), store.provider_fingerprint(), out.display());
            Ok(0)
        }

        Command::Enrich {
            common,
            seeds,
            index,
            script,
            transcripts,
            strict,
        } => {
            let config = load_config(&common)?;
            let index = index.or_else(|| config.paths.index.clone()).context("--index is required")?;
            let out = out_path(&common, None)?;
            let transcripts = transcripts.unwrap_or_else(|| with_suffix(&out, ".transcripts.jsonl"));
            let store = VectorStore::load(&index)?;
            let embedder = embedder_for(&config, common.offline)?;
            let mut model = model_for(&config, common.offline, script.as_deref())?;
            let retriever = Retriever {
                store: &store,
                embedder: embedder.as_ref(),
            };
            let table = TransitionTable::default();

            let sequences = rtsp::read_seed_file(&seeds)?;
            let mut enriched_out = Vec::with_capacity(sequences.len());
            let mut records = Vec::with_capacity(sequences.len());
            let mut rejected = 0;
            for seq in sequences {
                match agent::enrich_seeds(&seq.requests, retriever, model.as_mut(), &config.agent, &table) {
                    Ok(set) => {
                        records.push(EnrichmentRecord {
                            sequence_id: seq.id.clone(),
                            accepted: true,
                            reason: None,
                            insertions: set
                                .insertions
                                .iter()
                                .map(|(position, req)| {
                                    Ok(InsertionRecord {
                                        position: *position,
                                        packet: String::from_utf8_lossy(&rtsp::serialize_request(req)?).into_owned(),
                                    })
                                })
                                .collect::<crate::Result<_>>()?,
                            transcript: Some(set.transcript),
                        });
                        enriched_out.push(SeedSequence {
                            id: seq.id,
                            requests: set.enriched,
                        });
                    }
                    Err(e @ (crate::Error::EnrichmentRejected { .. } | crate::Error::EnrichmentFormat(_))) => {
                        log::warn!("sequence {}: {e}", seq.id);
                        rejected += 1;
                        records.push(EnrichmentRecord {
                            sequence_id: seq.id.clone(),
                            accepted: false,
                            reason: Some(e.to_string()),
                            insertions: Vec::new(),
                            transcript: None,
                        });
                        enriched_out.push(seq);
                    }
                    Err(e) => return Err(e).with_context(|| format!("sequence {}", seq.id)),
                }
            }
            rtsp::write_seed_file(&out, &enriched_out)?;
            jsonl::write(&transcripts, &records)?;
            log::info!(
                "enriched {} of {} sequences into {}",
                records.len() - rejected,
                records.len(),
                out.display()
            );
            Ok(if strict && rejected > 0 { 1 } else { 0 })
        }

        Command::Evaluate {
            common,
            logs,
            pairs,
            label,
            regenerate,
            index,
            script,
            per_pair,
        } => {
            let config = load_config(&common)?;
            let out = out_path(&common, None)?;
            let mut pairs: Vec<EvalPair> = match (pairs, logs.or_else(|| config.paths.logs.clone())) {
                (Some(path), _) => eval::read_pairs(&path)?,
                (None, Some(path)) => {
                    let log = eval::ingest_logs(&path)?;
                    for r in &log.rejects {
                        log::warn!("{}:{}: {}", path.display(), r.line, r.reason);
                    }
                    let extraction = eval::extract_eval_pairs(&log.entries);
                    for d in &extraction.unmatched {
                        log::warn!("{d}");
                    }
                    extraction.pairs
                }
                (None, None) => bail!("one of --logs or --pairs is required"),
            };
            if pairs.is_empty() {
                bail!("no evaluation pairs");
            }

            let mut transcripts: Vec<Option<ReActTranscript>> = vec![None; pairs.len()];
            if regenerate {
                let index = index.or_else(|| config.paths.index.clone()).context("--regenerate needs --index")?;
                let store = VectorStore::load(&index)?;
                let embedder = embedder_for(&config, common.offline)?;
                let mut model = model_for(&config, common.offline, script.as_deref())?;
                let retriever = Retriever {
                    store: &store,
                    embedder: embedder.as_ref(),
                };
                for (pair, slot) in pairs.iter_mut().zip(transcripts.iter_mut()) {
                    let transcript = agent::run_react(&pair.query, retriever, model.as_mut(), &config.agent)
                        .with_context(|| format!("pair {}", pair.id))?;
                    pair.generated = transcript.final_answer.clone().unwrap_or_default().into_bytes();
                    *slot = Some(transcript);
                }
            }

            let evaluations = eval::evaluate_all(&pairs, &config.metrics)?;
            for e in evaluations.iter().filter(|e| !e.diagnostics.is_empty()) {
                log::warn!("pair {}: {}", e.pair_id, e.diagnostics.join("; "));
            }
            if let Some(path) = per_pair {
                jsonl::write(
                    &path,
                    evaluations.iter().zip(&transcripts).map(|(evaluation, t)| PairScoreRecord {
                        evaluation,
                        transcript: t.as_ref(),
                    }),
                )?;
            }
            let scores: Vec<_> = evaluations.iter().map(|e| (e.method, e.scores)).collect();
            let report = eval::aggregate_report(&scores, &label)?;
            jsonl::write_text(&out, &eval::render_model_report(&report, ReportFormat::StructuredRecords)?)?;
            log::info!("scored {} pairs into {}", pairs.len(), out.display());
            if !report.omitted.is_empty() {
                let names: Vec<_> = report.omitted.iter().map(|m| m.as_str()).collect();
                eprintln!("error: no pairs for {}; rows omitted", names.join(", "));
                return Ok(1);
            }
            Ok(0)
        }

        Command::Report {
            common,
            baseline,
            agent,
            score,
            format,
        } => {
            let format: ReportFormat = format.parse()?;
            let config = load_config(&common)?;
            let out = out_path(&common, config.paths.reports.as_ref())?;
            if baseline.len() != agent.len() {
                bail!("--baseline and --agent must be given the same number of times");
            }
            if baseline.is_empty() && score.is_empty() {
                bail!("nothing to report: pass --baseline/--agent pairs or --score files");
            }
            let load = |paths: &[PathBuf]| -> crate::Result<Vec<_>> {
                paths.iter().map(|p| eval::read_model_report(p)).collect()
            };
            let (baselines, agents, extra) = (load(&baseline)?, load(&agent)?, load(&score)?);

            let separator = match format {
                ReportFormat::StructuredRecords => "",
                _ => "\n",
            };
            let mut sections = Vec::new();
            for (b, a) in baselines.iter().zip(&agents) {
                sections.push(eval::render_model_report(b, format)?);
                sections.push(eval::render_model_report(a, format)?);
            }
            for r in &extra {
                sections.push(eval::render_model_report(r, format)?);
            }
            if !baselines.is_empty() {
                let delta = eval::improvement_delta(&baselines, &agents)?;
                sections.push(eval::render_delta_report(&delta, format)?);
            }
            jsonl::write_text(&out, &sections.join(separator))?;
            let omitted = baselines.iter().chain(&agents).chain(&extra).any(|r| !r.omitted.is_empty());
            Ok(if omitted { 1 } else { 0 })
        }
    }
}
