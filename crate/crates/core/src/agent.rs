//! Retrieval-augmented ReAct agent that enriches RTSP seed sequences.
//!
//! The model speaks a line protocol: a `Thought:` line, then either
//! `Action: retrieve[<query>]` or the stop marker followed by the answer.
//! Enrichment answers list packets, each introduced by `Insert-At: <n>`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::embedding::{retrieve, transport_error, with_retries, Embedder, VectorStore, DEFAULT_K};
use crate::error::{Error, Result};
use crate::jsonl;
use crate::rtsp::{self, ConformanceReport, RtspRequest, TransitionTable};

pub const DEFAULT_STOP_MARKER: &str = "Final Answer:";
pub const DEFAULT_MAX_ITERATIONS: usize = 5;
pub const DEFAULT_OBSERVATION_BUDGET: usize = 8_000;
pub const OBSERVATION_DELIMITER: &str = "\n-----\n";
pub const INSERT_AT: &str = "Insert-At:";

/// Bearer credential for the chat endpoint.
pub const CHAT_API_KEY_ENV: &str = "SEEDRAG_CHAT_API_KEY";
/// Overrides the configured chat endpoint URL.
pub const CHAT_BASE_URL_ENV: &str = "SEEDRAG_CHAT_BASE_URL";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub agent_task: String,
    pub agent_goal: String,
    pub expected_output: String,
}

fn slot_pattern() -> Regex {
    Regex::new(r"\{([A-Za-z_][A-Za-z0-9_]*)\}").expect("static regex")
}

impl PromptTemplate {
    pub fn new(agent_task: impl Into<String>, agent_goal: impl Into<String>, expected_output: impl Into<String>) -> Self {
        Self {
            agent_task: agent_task.into(),
            agent_goal: agent_goal.into(),
            expected_output: expected_output.into(),
        }
    }

    /// Identifiers referenced as `{name}` in any section.
    pub fn slot_names(&self) -> BTreeSet<String> {
        let pattern = slot_pattern();
        [&self.agent_task, &self.agent_goal, &self.expected_output]
            .iter()
            .flat_map(|s| pattern.captures_iter(s).map(|c| c[1].to_string()).collect::<Vec<_>>())
            .collect()
    }

    fn assembled(&self) -> String {
        format!(
            "Agent Task:\n{}\n\nAgent Goal:\n{}\n\nExpected Output:\n{}",
            self.agent_task, self.agent_goal, self.expected_output
        )
    }
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self::new(
            "You are a protocol analyst for {protocol}. You are given an initial sequence of client \
             requests used as fuzzing seeds. Enrich it with new requests, each placed where the \
             server state machine accepts it, so that the fuzzer reaches more protocol states.",
            "Before answering, look up the relevant state machine rules, required headers and field \
             formats in the {protocol} specification with the retrieve tool. Reason step by step. \
             Every reply holds one line starting with \"Thought:\" and then either one line \
             \"Action: retrieve[<search query>]\" or a line starting with \"{stop_marker}\".",
            "After \"{stop_marker}\" write each new request as a complete {protocol} packet. Put a line \
             \"Insert-At: <position>\" before every packet, where <position> is the zero-based index \
             the packet takes in the sequence at the moment it is inserted, and separate packets \
             with a blank line. Each packet carries a CSeq header plus the headers its method needs: \
             Transport for SETUP; Session for PLAY, PAUSE, TEARDOWN and RECORD; Content-Type and \
             Content-Length for ANNOUNCE and SET_PARAMETER.",
        )
    }
}

/// Fills every slot and joins the sections as Agent Task, Agent Goal, Expected Output.
pub fn render_prompt(template: &PromptTemplate, slots: &BTreeMap<String, String>) -> Result<String> {
    if let Some(missing) = template.slot_names().into_iter().find(|s| !slots.contains_key(s)) {
        return Err(Error::MissingSlot(missing));
    }
    let assembled = template.assembled();
    Ok(slot_pattern()
        .replace_all(&assembled, |c: &regex::Captures<'_>| slots[&c[1]].clone())
        .into_owned())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    Retrieve { query: String },
    Finish { answer: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReActStep {
    pub thought: String,
    pub action: Action,
    pub observation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReActTranscript {
    pub question: String,
    pub steps: Vec<ReActStep>,
    pub final_answer: Option<String>,
    pub retrieved_chunk_ids: Vec<String>,
    /// Model calls made, including corrective re-prompts.
    pub model_turns: usize,
}

pub fn parse_react_output(model_text: &str, stop_marker: &str) -> Result<ReActStep> {
    if model_text.trim().is_empty() {
        return Err(Error::MalformedStep("empty model output".into()));
    }
    let action_line = Regex::new(r"(?im)^[ \t]*Action:[ \t]*retrieve[ \t]*\[(.*)\][ \t]*$").expect("static regex");
    let marker_at = (!stop_marker.is_empty()).then(|| model_text.find(stop_marker)).flatten();
    let action_at = action_line.captures(model_text);

    let thought_end = [marker_at, action_at.as_ref().map(|c| c.get(0).unwrap().start())]
        .into_iter()
        .flatten()
        .min()
        .unwrap_or(model_text.len());
    let head = &model_text[..thought_end];
    let thought = match head.find("Thought:") {
        Some(i) => &head[i + "Thought:".len()..],
        None => head,
    }
    .trim()
    .to_string();

    let action = if let Some(at) = marker_at {
        Action::Finish {
            answer: model_text[at + stop_marker.len()..].trim().to_string(),
        }
    } else if let Some(caps) = action_at {
        let query = caps[1].trim().to_string();
        if query.is_empty() {
            return Err(Error::MalformedStep("retrieve action has an empty query".into()));
        }
        Action::Retrieve { query }
    } else {
        return Err(Error::MalformedStep("no action line and no stop marker".into()));
    };
    Ok(ReActStep {
        thought,
        action,
        observation: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Self {
            role,
            content: content.into(),
        }
    }
}

pub trait ChatModel {
    fn complete(&mut self, messages: &[ChatMessage], temperature: f64) -> Result<String>;
}

/// Replays canned responses in order; running out is an error.
#[derive(Debug, Clone, Default)]
pub struct ScriptedModel {
    responses: VecDeque<String>,
}

/// Separates responses in a script file.
pub const SCRIPT_DELIMITER: &str = "---";

impl ScriptedModel {
    pub fn new<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        Self {
            responses: responses.into_iter().map(Into::into).collect(),
        }
    }

    /// Responses are separated by lines consisting of exactly `---`.
    pub fn parse_script(text: &str) -> Self {
        let mut responses = Vec::new();
        let mut current: Vec<&str> = Vec::new();
        for line in text.lines() {
            if line.trim_end() == SCRIPT_DELIMITER {
                responses.push(current.join("\n"));
                current.clear();
            } else {
                current.push(line);
            }
        }
        if current.iter().any(|l| !l.trim().is_empty()) {
            responses.push(current.join("\n"));
        }
        Self::new(responses.into_iter().filter(|r| !r.trim().is_empty()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(Self::parse_script(&jsonl::read_text(path)?))
    }

    pub fn remaining(&self) -> usize {
        self.responses.len()
    }
}

impl ChatModel for ScriptedModel {
    fn complete(&mut self, _messages: &[ChatMessage], _temperature: f64) -> Result<String> {
        self.responses
            .pop_front()
            .ok_or_else(|| Error::AgentRun("scripted model has no responses left".into()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChatEndpointConfig {
    pub endpoint_url: Option<String>,
    pub model_name: Option<String>,
}

impl ChatEndpointConfig {
    pub fn build(&self) -> Result<RemoteChat> {
        let endpoint = std::env::var(CHAT_BASE_URL_ENV)
            .ok()
            .or_else(|| self.endpoint_url.clone())
            .ok_or_else(|| Error::Config("chat endpoint_url is not configured".into()))?;
        let model = self
            .model_name
            .clone()
            .ok_or_else(|| Error::Config("chat model_name is not configured".into()))?;
        RemoteChat::new(endpoint, model, std::env::var(CHAT_API_KEY_ENV).ok())
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
}

#[derive(Deserialize)]
struct ChatChoiceMessage {
    content: String,
}

/// Client for an OpenAI-style `/chat/completions` endpoint.
pub struct RemoteChat {
    endpoint_url: String,
    model_name: String,
    api_key: Option<String>,
    max_attempts: usize,
    client: reqwest::blocking::Client,
}

impl RemoteChat {
    pub fn new(endpoint_url: String, model_name: String, api_key: Option<String>) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(300))
            .build()
            .map_err(|e| Error::Config(format!("http client: {e}")))?;
        Ok(Self {
            endpoint_url,
            model_name,
            api_key,
            max_attempts: 3,
            client,
        })
    }

    fn attempt(&self, messages: &[ChatMessage], temperature: f64) -> Result<String> {
        let body = ChatRequest {
            model: &self.model_name,
            messages,
            temperature,
        };
        let mut request = self.client.post(&self.endpoint_url).json(&body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| transport_error("chat", e))?;
        let status = response.status();
        if !status.is_success() {
            return Err(Error::Provider {
                provider: "chat",
                retryable: status.is_server_error() || status.as_u16() == 429,
                message: format!("HTTP {status}"),
            });
        }
        let parsed: ChatResponse = response.json().map_err(|e| Error::Provider {
            provider: "chat",
            retryable: false,
            message: format!("bad response body: {e}"),
        })?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| Error::Provider {
                provider: "chat",
                retryable: false,
                message: "response carried no choices".into(),
            })
    }
}

impl ChatModel for RemoteChat {
    fn complete(&mut self, messages: &[ChatMessage], temperature: f64) -> Result<String> {
        with_retries(self.max_attempts, || self.attempt(messages, temperature))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub max_iterations: usize,
    pub k: usize,
    pub temperature: f64,
    pub stop_marker: String,
    /// Observations are cut to this many characters.
    pub observation_budget: usize,
    pub protocol: String,
    pub template: PromptTemplate,
    pub llm_endpoint: ChatEndpointConfig,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            k: DEFAULT_K,
            temperature: 0.0,
            stop_marker: DEFAULT_STOP_MARKER.into(),
            observation_budget: DEFAULT_OBSERVATION_BUDGET,
            protocol: "RTSP".into(),
            template: PromptTemplate::default(),
            llm_endpoint: ChatEndpointConfig::default(),
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.stop_marker.is_empty() {
            return Err(Error::Config("stop_marker must not be empty".into()));
        }
        Ok(())
    }

    fn slots(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("protocol".to_string(), self.protocol.clone()),
            ("stop_marker".to_string(), self.stop_marker.clone()),
            ("k".to_string(), self.k.to_string()),
            ("max_iterations".to_string(), self.max_iterations.to_string()),
        ])
    }
}

/// A built store together with the embedder that produced it.
#[derive(Clone, Copy)]
pub struct Retriever<'a> {
    pub store: &'a VectorStore,
    pub embedder: &'a dyn Embedder,
}

fn corrective_prompt(stop_marker: &str) -> String {
    format!(
        "Your reply did not follow the required format. Answer with a \"Thought:\" line followed by \
         either \"Action: retrieve[<search query>]\" or \"{stop_marker}\" and your answer."
    )
}

fn truncate_chars(text: &str, budget: usize) -> &str {
    match text.char_indices().nth(budget) {
        Some((i, _)) => &text[..i],
        None => text,
    }
}

fn call_model(model: &mut dyn ChatModel, messages: &[ChatMessage], temperature: f64) -> Result<String> {
    model.complete(messages, temperature).map_err(|e| match e {
        Error::AgentRun(_) => e,
        other => Error::AgentRun(other.to_string()),
    })
}

/// Runs the thought/action/observation loop until the model finishes or
/// `max_iterations` steps are spent. A malformed reply earns one corrective
/// re-prompt; a second malformed reply burns the iteration.
pub fn run_react(
    question: &str,
    retriever: Retriever<'_>,
    model: &mut dyn ChatModel,
    config: &AgentConfig,
) -> Result<ReActTranscript> {
    config.validate()?;
    let system = render_prompt(&config.template, &config.slots())?;
    let mut messages = vec![
        ChatMessage::new(Role::System, system),
        ChatMessage::new(Role::User, question),
    ];
    let mut transcript = ReActTranscript {
        question: question.to_string(),
        steps: Vec::new(),
        final_answer: None,
        retrieved_chunk_ids: Vec::new(),
        model_turns: 0,
    };

    for _ in 0..config.max_iterations {
        let mut reply = call_model(model, &messages, config.temperature)?;
        transcript.model_turns += 1;
        let parsed = match parse_react_output(&reply, &config.stop_marker) {
            Ok(step) => Some(step),
            Err(Error::MalformedStep(why)) => {
                log::debug!("malformed step ({why}); re-prompting");
                messages.push(ChatMessage::new(Role::Assistant, reply));
                messages.push(ChatMessage::new(Role::User, corrective_prompt(&config.stop_marker)));
                reply = call_model(model, &messages, config.temperature)?;
                transcript.model_turns += 1;
                parse_react_output(&reply, &config.stop_marker).ok()
            }
            Err(e) => return Err(e),
        };
        let Some(mut step) = parsed else {
            messages.push(ChatMessage::new(Role::Assistant, reply));
            messages.push(ChatMessage::new(Role::User, corrective_prompt(&config.stop_marker)));
            continue;
        };
        match &step.action {
            Action::Finish { answer } => {
                transcript.final_answer = Some(answer.clone());
                transcript.steps.push(step);
                break;
            }
            Action::Retrieve { query } => {
                let hits = retrieve(retriever.store, query, config.k, retriever.embedder)?;
                transcript.retrieved_chunk_ids.extend(hits.iter().map(|h| h.chunk.id()));
                let joined = hits.iter().map(|h| h.chunk.text.as_str()).collect::<Vec<_>>().join(OBSERVATION_DELIMITER);
                let observation = truncate_chars(&joined, config.observation_budget).to_string();
                messages.push(ChatMessage::new(Role::Assistant, reply));
                messages.push(ChatMessage::new(Role::User, format!("Observation:\n{observation}")));
                step.observation = Some(observation);
                transcript.steps.push(step);
            }
        }
    }
    Ok(transcript)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnrichedSeedSet {
    pub original: Vec<RtspRequest>,
    /// Original plus insertions, with CSeq renumbered consecutively from the
    /// first original CSeq.
    pub enriched: Vec<RtspRequest>,
    /// Positions index the sequence as it stands when each insertion is applied.
    pub insertions: Vec<(usize, RtspRequest)>,
    pub conformance: ConformanceReport,
    pub transcript: ReActTranscript,
}

fn packet_text(req: &RtspRequest) -> Result<String> {
    let bytes = rtsp::serialize_request(req)?;
    Ok(String::from_utf8_lossy(&bytes).replace("\r\n", "\n").trim_end().to_string())
}

/// The question put to the agent for one seed sequence.
pub fn enrichment_question(seeds: &[RtspRequest]) -> Result<String> {
    let mut q = format!(
        "The current seed sequence has {} client requests, listed with their zero-based positions:\n",
        seeds.len()
    );
    for (i, req) in seeds.iter().enumerate() {
        q.push_str(&format!("\n[{i}]\n{}\n", packet_text(req)?));
    }
    q.push_str(
        "\nWhich new client requests should be added to this sequence, and at which positions, \
         so that it exercises more server states while staying valid under the state machine?",
    );
    Ok(q)
}

fn parse_packet_block(lines: &[&str]) -> Result<RtspRequest> {
    let start = lines.iter().position(|l| !l.trim().is_empty()).unwrap_or(lines.len());
    let end = lines.iter().rposition(|l| !l.trim().is_empty()).map_or(start, |i| i + 1);
    let block = &lines[start..end];
    if block.is_empty() {
        return Err(Error::EnrichmentFormat("Insert-At line is not followed by a packet".into()));
    }
    let split = block.iter().position(|l| l.trim().is_empty()).unwrap_or(block.len());
    let mut raw = String::new();
    for line in &block[..split] {
        raw.push_str(line.trim_end());
        raw.push_str("\r\n");
    }
    raw.push_str("\r\n");
    if split < block.len() {
        raw.push_str(&block[split + 1..].join("\r\n"));
    }
    rtsp::parse_request(raw.as_bytes()).map_err(|e| Error::EnrichmentFormat(e.to_string()))
}

/// Extracts `(position, packet)` pairs from a final answer.
pub fn parse_insertions(answer: &str) -> Result<Vec<(usize, RtspRequest)>> {
    let mut blocks: Vec<(usize, Vec<&str>)> = Vec::new();
    for line in answer.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with("```") {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix(INSERT_AT) {
            let position = rest
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::EnrichmentFormat(format!("bad insertion position `{}`", rest.trim())))?;
            blocks.push((position, Vec::new()));
        } else if let Some((_, lines)) = blocks.last_mut() {
            lines.push(line);
        }
    }
    if blocks.is_empty() {
        return Err(Error::EnrichmentFormat("answer contains no Insert-At lines".into()));
    }
    blocks
        .into_iter()
        .map(|(position, lines)| Ok((position, parse_packet_block(&lines)?)))
        .collect()
}

/// Asks the agent for new requests, applies them, and accepts the result
/// only if it is FSM-conformant and every packet carries its required headers.
pub fn enrich_seeds(
    seeds: &[RtspRequest],
    retriever: Retriever<'_>,
    model: &mut dyn ChatModel,
    config: &AgentConfig,
    table: &TransitionTable,
) -> Result<EnrichedSeedSet> {
    let initial = rtsp::validate_sequence(seeds, table);
    if !initial.valid {
        return Err(Error::Precondition(format!(
            "seed sequence is not conformant at {:?}: {}",
            initial.failing_index,
            initial.reason.unwrap_or_default()
        )));
    }
    let question = enrichment_question(seeds)?;
    let transcript = run_react(&question, retriever, model, config)?;
    let answer = transcript
        .final_answer
        .as_deref()
        .ok_or_else(|| Error::EnrichmentFormat("agent stopped without a final answer".into()))?;
    let insertions = parse_insertions(answer)?;

    let mut enriched = seeds.to_vec();
    for (position, req) in &insertions {
        if *position > enriched.len() {
            return Err(Error::EnrichmentFormat(format!(
                "insertion position {position} is past the end of a {}-request sequence",
                enriched.len()
            )));
        }
        enriched.insert(*position, req.clone());
    }
    let base = seeds.first().and_then(RtspRequest::cseq).unwrap_or(1);
    for (i, req) in enriched.iter_mut().enumerate() {
        req.set_cseq(base + i as u64);
    }

    let conformance = rtsp::validate_sequence(&enriched, table);
    if !conformance.valid {
        return Err(Error::EnrichmentRejected {
            reason: format!(
                "request {} breaks the state machine: {}",
                conformance.failing_index.unwrap_or_default(),
                conformance.reason.clone().unwrap_or_default()
            ),
            report: Box::new(conformance),
        });
    }
    if let Some((i, missing)) = enriched
        .iter()
        .enumerate()
        .map(|(i, r)| (i, rtsp::missing_headers(r)))
        .find(|(_, m)| !m.is_empty())
    {
        return Err(Error::EnrichmentRejected {
            reason: format!("request {i} ({}) lacks {}", enriched[i].method, missing.join(", ")),
            report: Box::new(conformance),
        });
    }
    Ok(EnrichedSeedSet {
        original: seeds.to_vec(),
        enriched,
        insertions,
        conformance,
        transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_all_sections_in_order() {
        let t = PromptTemplate::new("task {method}", "goal", "out {method}");
        let text = render_prompt(&t, &BTreeMap::from([("method".into(), "SETUP".into())])).unwrap();
        assert_eq!(text, "Agent Task:\ntask SETUP\n\nAgent Goal:\ngoal\n\nExpected Output:\nout SETUP");
        assert!(!slot_pattern().is_match(&text));
    }

    #[test]
    fn missing_slot_is_named() {
        let t = PromptTemplate::new("{a} {b}", "", "");
        match render_prompt(&t, &BTreeMap::from([("a".into(), "x".into())])) {
            Err(Error::MissingSlot(s)) => assert_eq!(s, "b"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn slotless_template_renders_verbatim() {
        let t = PromptTemplate::new("T", "G", "E");
        assert!(t.slot_names().is_empty());
        assert_eq!(render_prompt(&t, &BTreeMap::new()).unwrap(), t.assembled());
    }

    #[test]
    fn values_are_not_re_expanded() {
        let t = PromptTemplate::new("{a}", "", "");
        let out = render_prompt(&t, &BTreeMap::from([("a".into(), "{a}".into())])).unwrap();
        assert!(out.starts_with("Agent Task:\n{a}"));
    }

    #[test]
    fn default_template_slots() {
        let names = PromptTemplate::default().slot_names();
        assert_eq!(names, BTreeSet::from(["protocol".to_string(), "stop_marker".to_string()]));
    }

    #[test]
    fn parses_retrieve() {
        let step = parse_react_output(
            "Thought: need SETUP headers\nAction: retrieve[SETUP Transport header]",
            DEFAULT_STOP_MARKER,
        )
        .unwrap();
        assert_eq!(step.thought, "need SETUP headers");
        assert_eq!(
            step.action,
            Action::Retrieve {
                query: "SETUP Transport header".into()
            }
        );
        assert_eq!(step.observation, None);
    }

    #[test]
    fn parses_finish_and_prefers_it() {
        let step = parse_react_output("Thought: done\nFinal Answer: SETUP rtsp://a RTSP/1.0 ", DEFAULT_STOP_MARKER).unwrap();
        assert_eq!(step.thought, "done");
        assert_eq!(
            step.action,
            Action::Finish {
                answer: "SETUP rtsp://a RTSP/1.0".into()
            }
        );
        let both = "Thought: x\nAction: retrieve[q]\nFinal Answer: y";
        assert!(matches!(
            parse_react_output(both, DEFAULT_STOP_MARKER).unwrap().action,
            Action::Finish { .. }
        ));
    }

    #[test]
    fn malformed_outputs() {
        for text in ["I think maybe…", "", "Thought: x\nAction: retrieve[ ]", "Action: search[x]"] {
            assert!(matches!(
                parse_react_output(text, DEFAULT_STOP_MARKER),
                Err(Error::MalformedStep(_))
            ));
        }
    }

    #[test]
    fn script_parsing() {
        let m = ScriptedModel::parse_script("a\nb\n---\nc\n---\n\n---\nd\n");
        assert_eq!(m.responses, VecDeque::from(vec!["a\nb".to_string(), "c".into(), "d".into()]));
        let mut m = ScriptedModel::new(["only"]);
        assert_eq!(m.complete(&[], 0.0).unwrap(), "only");
        assert!(matches!(m.complete(&[], 0.0), Err(Error::AgentRun(_))));
    }

    #[test]
    fn insertion_parsing() {
        let answer = "Here you go.\n```\nInsert-At: 2\nPAUSE rtsp://s/1 RTSP/1.0\nCSeq: 9\nSession: 1\n\nInsert-At: 0\nOPTIONS * RTSP/1.0\nCSeq: 1\n```";
        let ins = parse_insertions(answer).unwrap();
        assert_eq!(ins.len(), 2);
        assert_eq!(ins[0].0, 2);
        assert_eq!(ins[0].1.method, rtsp::RtspMethod::Pause);
        assert_eq!(ins[1].1.uri, "*");
        assert!(matches!(parse_insertions("no packets"), Err(Error::EnrichmentFormat(_))));
        assert!(matches!(
            parse_insertions("Insert-At: x\nPLAY a RTSP/1.0\nCSeq: 1"),
            Err(Error::EnrichmentFormat(_))
        ));
        assert!(matches!(
            parse_insertions("Insert-At: 1\nPLAY a RTSP/1.0\nSession: 1"),
            Err(Error::EnrichmentFormat(_))
        ));
    }

    #[test]
    fn insertion_with_body() {
        let answer = "Insert-At: 1\nSET_PARAMETER rtsp://s RTSP/1.0\nCSeq: 3\nContent-Type: text/parameters\nContent-Length: 8\n\nfoo: bar\n";
        let (_, req) = parse_insertions(answer).unwrap().remove(0);
        assert_eq!(req.body.as_deref(), Some(&b"foo: bar"[..]));
        let wrong_length = answer.replace("Content-Length: 8", "Content-Length: 9");
        assert!(matches!(parse_insertions(&wrong_length), Err(Error::EnrichmentFormat(_))));
    }

    #[test]
    fn truncation_counts_chars() {
        assert_eq!(truncate_chars("héllo", 2), "hé");
        assert_eq!(truncate_chars("abc", 10), "abc");
    }
}
