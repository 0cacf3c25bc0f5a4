//! RTSP/1.0 request packets and the server session state machine.
//!
//! Parsing tolerates bare LF line endings; serialization always emits CRLF.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

pub const DEFAULT_VERSION: &str = "RTSP/1.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RtspMethod {
    #[serde(rename = "DESCRIBE")]
    Describe,
    #[serde(rename = "SETUP")]
    Setup,
    #[serde(rename = "PLAY")]
    Play,
    #[serde(rename = "PAUSE")]
    Pause,
    #[serde(rename = "TEARDOWN")]
    Teardown,
    #[serde(rename = "GET_PARAMETER")]
    GetParameter,
    #[serde(rename = "SET_PARAMETER")]
    SetParameter,
    #[serde(rename = "ANNOUNCE")]
    Announce,
    #[serde(rename = "RECORD")]
    Record,
    #[serde(rename = "REDIRECT")]
    Redirect,
    #[serde(rename = "OPTIONS")]
    Options,
}

impl RtspMethod {
    /// Every method the parser accepts.
    pub const ALL: [RtspMethod; 11] = [
        RtspMethod::Describe,
        RtspMethod::Setup,
        RtspMethod::Play,
        RtspMethod::Pause,
        RtspMethod::Teardown,
        RtspMethod::GetParameter,
        RtspMethod::SetParameter,
        RtspMethod::Announce,
        RtspMethod::Record,
        RtspMethod::Redirect,
        RtspMethod::Options,
    ];

    /// The evaluated methods in report row order.
    pub const EVALUATED: [RtspMethod; 10] = [
        RtspMethod::Describe,
        RtspMethod::Setup,
        RtspMethod::Play,
        RtspMethod::Pause,
        RtspMethod::Teardown,
        RtspMethod::GetParameter,
        RtspMethod::SetParameter,
        RtspMethod::Announce,
        RtspMethod::Record,
        RtspMethod::Redirect,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RtspMethod::Describe => "DESCRIBE",
            RtspMethod::Setup => "SETUP",
            RtspMethod::Play => "PLAY",
            RtspMethod::Pause => "PAUSE",
            RtspMethod::Teardown => "TEARDOWN",
            RtspMethod::GetParameter => "GET_PARAMETER",
            RtspMethod::SetParameter => "SET_PARAMETER",
            RtspMethod::Announce => "ANNOUNCE",
            RtspMethod::Record => "RECORD",
            RtspMethod::Redirect => "REDIRECT",
            RtspMethod::Options => "OPTIONS",
        }
    }
}

impl fmt::Display for RtspMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RtspMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RtspMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RtspRequest {
    pub method: RtspMethod,
    pub uri: String,
    pub version: String,
    /// In wire order, original casing preserved.
    pub headers: Vec<(String, String)>,
    pub body: Option<Vec<u8>>,
}

impl RtspRequest {
    /// A request with only a CSeq header.
    pub fn new(method: RtspMethod, uri: impl Into<String>, cseq: u64) -> Self {
        Self {
            method,
            uri: uri.into(),
            version: DEFAULT_VERSION.to_string(),
            headers: vec![("CSeq".to_string(), cseq.to_string())],
            body: None,
        }
    }

    pub fn with_header(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.headers.push((name.into(), value.into()));
        self
    }

    /// Attaches a body and appends a matching Content-Length header.
    pub fn with_body(mut self, content_type: &str, body: impl Into<Vec<u8>>) -> Self {
        let body = body.into();
        self.headers.push(("Content-Type".into(), content_type.into()));
        self.headers.push(("Content-Length".into(), body.len().to_string()));
        self.body = Some(body);
        self
    }

    /// First header value with this name, compared case-insensitively.
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    pub fn cseq(&self) -> Option<u64> {
        self.header("CSeq").and_then(|v| v.trim().parse().ok())
    }

    /// Replaces the value of the first CSeq header in place.
    pub fn set_cseq(&mut self, cseq: u64) {
        match self.headers.iter_mut().find(|(n, _)| n.eq_ignore_ascii_case("CSeq")) {
            Some((_, v)) => *v = cseq.to_string(),
            None => self.headers.insert(0, ("CSeq".into(), cseq.to_string())),
        }
    }

    /// Checks the invariants every well-formed request holds.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.uri.is_empty() || self.uri.contains(char::is_whitespace) {
            return Err(format!("request URI `{}` is empty or contains whitespace", self.uri));
        }
        if self.version.is_empty() || self.version.contains(char::is_whitespace) {
            return Err(format!("protocol version `{}` is invalid", self.version));
        }
        for (name, value) in &self.headers {
            if name.is_empty() || name.contains(|c: char| c == ':' || c.is_whitespace()) {
                return Err(format!("header name `{name}` is invalid"));
            }
            if value.contains(['\r', '\n']) {
                return Err(format!("header `{name}` value contains a line break"));
            }
        }
        match self.header("CSeq") {
            None => return Err("CSeq header is missing".into()),
            Some(v) if v.trim().parse::<u64>().is_err() => {
                return Err(format!("CSeq `{v}` is not a non-negative integer"))
            }
            _ => {}
        }
        let declared = match self.header("Content-Length") {
            Some(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("Content-Length `{v}` is not an integer"))?,
            ),
            None => None,
        };
        let actual = self.body.as_ref().map(Vec::len);
        match (declared, actual) {
            (None, Some(_)) => Err("body present without Content-Length".into()),
            (Some(d), Some(a)) if d != a => Err(format!("Content-Length {d} does not match body length {a}")),
            (Some(d), None) if d != 0 => Err(format!("Content-Length {d} but no body")),
            _ => Ok(()),
        }
    }
}

fn next_line(input: &[u8]) -> Option<(&[u8], &[u8])> {
    let end = input.iter().position(|&b| b == b'\n')?;
    let line = &input[..end];
    let line = line.strip_suffix(b"\r").unwrap_or(line);
    Some((line, &input[end + 1..]))
}

fn utf8(bytes: &[u8], what: &str) -> Result<String> {
    String::from_utf8(bytes.to_vec()).map_err(|_| Error::MalformedRequest(format!("{what} is not UTF-8")))
}

pub fn parse_request(raw: &[u8]) -> Result<RtspRequest> {
    if raw.is_empty() {
        return Err(Error::MalformedRequest("empty input".into()));
    }
    let (request_line, mut rest) = next_line(raw).unwrap_or((raw, &[]));
    let request_line = utf8(request_line, "request line")?;
    let parts: Vec<&str> = request_line.split(' ').collect();
    if parts.is_empty() || parts[0].is_empty() {
        return Err(Error::MalformedRequest("missing method".into()));
    }
    let method: RtspMethod = parts[0].parse()?;
    if parts.len() != 3 || parts[1].is_empty() || parts[2].is_empty() {
        return Err(Error::MalformedRequest(format!("bad request line `{request_line}`")));
    }

    let mut headers = Vec::new();
    let mut body = None;
    loop {
        let Some((line, after)) = next_line(rest) else {
            // Unterminated header block: treat trailing bytes as the last header line.
            if !rest.is_empty() {
                headers.push(parse_header(rest)?);
            }
            break;
        };
        rest = after;
        if line.is_empty() {
            if !rest.is_empty() {
                body = Some(rest.to_vec());
            }
            break;
        }
        headers.push(parse_header(line)?);
    }

    let request = RtspRequest {
        method,
        uri: parts[1].to_string(),
        version: parts[2].to_string(),
        headers,
        body,
    };
    request.validate().map_err(Error::MalformedRequest)?;
    Ok(request)
}

fn parse_header(line: &[u8]) -> Result<(String, String)> {
    let line = utf8(line, "header line")?;
    let (name, value) = line
        .split_once(':')
        .ok_or_else(|| Error::MalformedRequest(format!("header line `{line}` has no colon")))?;
    Ok((name.trim().to_string(), value.trim_matches(' ').to_string()))
}

pub fn serialize_request(req: &RtspRequest) -> Result<Vec<u8>> {
    req.validate().map_err(Error::Serialize)?;
    let mut out = format!("{} {} {}\r\n", req.method, req.uri, req.version);
    for (name, value) in &req.headers {
        out.push_str(name);
        out.push_str(": ");
        out.push_str(value);
        out.push_str("\r\n");
    }
    out.push_str("\r\n");
    let mut bytes = out.into_bytes();
    if let Some(body) = &req.body {
        bytes.extend_from_slice(body);
    }
    Ok(bytes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SessionState {
    Init,
    Ready,
    Playing,
    Recording,
}

impl SessionState {
    pub const ALL: [SessionState; 4] = [
        SessionState::Init,
        SessionState::Ready,
        SessionState::Playing,
        SessionState::Recording,
    ];
}

impl fmt::Display for SessionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SessionState::Init => "INIT",
            SessionState::Ready => "READY",
            SessionState::Playing => "PLAYING",
            SessionState::Recording => "RECORDING",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionTable {
    rules: BTreeMap<(SessionState, RtspMethod), SessionState>,
    neutral_methods: BTreeSet<RtspMethod>,
}

impl TransitionTable {
    /// Fails if a neutral method also triggers a rule or a pair is listed twice.
    pub fn new(
        rules: impl IntoIterator<Item = ((SessionState, RtspMethod), SessionState)>,
        neutral_methods: impl IntoIterator<Item = RtspMethod>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (key, target) in rules {
            if let Some(prev) = map.insert(key, target) {
                if prev != target {
                    return Err(Error::Config(format!(
                        "({}, {}) maps to both {prev} and {target}",
                        key.0, key.1
                    )));
                }
            }
        }
        let neutral_methods: BTreeSet<_> = neutral_methods.into_iter().collect();
        if let Some((_, m)) = map.keys().find(|(_, m)| neutral_methods.contains(m)) {
            return Err(Error::Config(format!("{m} is both neutral and a transition trigger")));
        }
        Ok(Self {
            rules: map,
            neutral_methods,
        })
    }

    fn base_rules(record: bool) -> Vec<((SessionState, RtspMethod), SessionState)> {
        use RtspMethod::*;
        use SessionState::*;
        let mut rules = vec![
            ((Init, Setup), Ready),
            ((Ready, Play), Playing),
            ((Playing, Pause), Ready),
        ];
        if record {
            rules.push(((Ready, Record), Recording));
            rules.push(((Recording, Pause), Ready));
        }
        let states: &[SessionState] = if record { &SessionState::ALL } else { &[Init, Ready, Playing] };
        rules.extend(states.iter().map(|&s| ((s, Teardown), Init)));
        rules
    }

    fn neutral() -> [RtspMethod; 6] {
        use RtspMethod::*;
        [Describe, Announce, GetParameter, SetParameter, Options, Redirect]
    }

    /// The four-state machine with RECORDING.
    pub fn rtsp_default() -> Self {
        Self::new(Self::base_rules(true), Self::neutral()).expect("default table is consistent")
    }

    /// INIT/READY/PLAYING only; RECORD is never valid.
    pub fn three_state() -> Self {
        Self::new(Self::base_rules(false), Self::neutral()).expect("three-state table is consistent")
    }

    pub fn is_neutral(&self, method: RtspMethod) -> bool {
        self.neutral_methods.contains(&method)
    }
}

impl Default for TransitionTable {
    fn default() -> Self {
        Self::rtsp_default()
    }
}

pub fn transition(state: SessionState, method: RtspMethod, table: &TransitionTable) -> Result<SessionState> {
    if let Some(&next) = table.rules.get(&(state, method)) {
        return Ok(next);
    }
    if table.neutral_methods.contains(&method) {
        return Ok(state);
    }
    Err(Error::InvalidTransition { state, method })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub valid: bool,
    pub failing_index: Option<usize>,
    /// State after each accepted request.
    pub state_trace: Vec<SessionState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Folds the FSM from INIT over the sequence and checks CSeq strictly increases.
pub fn validate_sequence(requests: &[RtspRequest], table: &TransitionTable) -> ConformanceReport {
    let mut state = SessionState::Init;
    let mut trace = Vec::with_capacity(requests.len());
    let mut last_cseq: Option<u64> = None;
    for (i, req) in requests.iter().enumerate() {
        let fail = |reason: String, trace: Vec<SessionState>| ConformanceReport {
            valid: false,
            failing_index: Some(i),
            state_trace: trace,
            reason: Some(reason),
        };
        let Some(cseq) = req.cseq() else {
            return fail("missing or invalid CSeq".into(), trace);
        };
        if let Some(prev) = last_cseq {
            if cseq <= prev {
                return fail(format!("CSeq {cseq} does not increase past {prev}"), trace);
            }
        }
        last_cseq = Some(cseq);
        match transition(state, req.method, table) {
            Ok(next) => {
                state = next;
                trace.push(next);
            }
            Err(e) => return fail(e.to_string(), trace),
        }
    }
    ConformanceReport {
        valid: true,
        failing_index: None,
        state_trace: trace,
        reason: None,
    }
}

/// Minimal header set a request of this method must carry.
pub fn required_headers(method: RtspMethod) -> Vec<&'static str> {
    use RtspMethod::*;
    let mut headers = vec!["CSeq"];
    match method {
        Setup => headers.push("Transport"),
        Play | Pause | Teardown | Record => headers.push("Session"),
        Announce | SetParameter => headers.extend(["Content-Type", "Content-Length"]),
        _ => {}
    }
    headers
}

/// Required headers absent from `req`.
pub fn missing_headers(req: &RtspRequest) -> Vec<&'static str> {
    required_headers(req.method)
        .into_iter()
        .filter(|h| req.header(h).is_none())
        .collect()
}

/// Encodes packets as a sequence of big-endian u32 length prefixes and payloads.
pub fn encode_container(packets: &[Vec<u8>]) -> Vec<u8> {
    let mut out = Vec::new();
    for p in packets {
        out.extend_from_slice(&(p.len() as u32).to_be_bytes());
        out.extend_from_slice(p);
    }
    out
}

/// Decodes a length-prefixed container; `None` if the bytes are not one.
pub fn decode_container(bytes: &[u8]) -> Option<Vec<Vec<u8>>> {
    let mut packets = Vec::new();
    let mut rest = bytes;
    while !rest.is_empty() {
        let len = u32::from_be_bytes(rest.get(..4)?.try_into().ok()?) as usize;
        let payload = rest.get(4..4 + len)?;
        packets.push(payload.to_vec());
        rest = &rest[4 + len..];
    }
    if packets.is_empty() {
        None
    } else {
        Some(packets)
    }
}

/// Reads a packet file: a length-prefixed container if it decodes as one,
/// otherwise a single raw packet.
pub fn read_packet_file(path: &Path) -> Result<Vec<Vec<u8>>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(decode_container(&bytes).unwrap_or_else(|| vec![bytes]))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub sequence_id: String,
    pub ordinal: usize,
    /// Base64-encoded packet bytes.
    pub packet: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSequence {
    pub id: String,
    pub requests: Vec<RtspRequest>,
}

pub fn b64_encode(bytes: &[u8]) -> String {
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

pub fn b64_decode(text: &str) -> std::result::Result<Vec<u8>, String> {
    base64::engine::general_purpose::STANDARD
        .decode(text.trim())
        .map_err(|e| e.to_string())
}

/// Sequences appear in first-seen order; packets are ordered by ordinal.
pub fn read_seed_file(path: &Path) -> Result<Vec<SeedSequence>> {
    let records: Vec<SeedRecord> = jsonl::read(path)?;
    let mut order: Vec<String> = Vec::new();
    let mut grouped: BTreeMap<String, Vec<(usize, RtspRequest)>> = BTreeMap::new();
    for (i, rec) in records.into_iter().enumerate() {
        let bytes = b64_decode(&rec.packet).map_err(|e| Error::format(path, i + 1, format!("bad base64: {e}")))?;
        let req = parse_request(&bytes).map_err(|e| Error::format(path, i + 1, e.to_string()))?;
        if !grouped.contains_key(&rec.sequence_id) {
            order.push(rec.sequence_id.clone());
        }
        grouped.entry(rec.sequence_id).or_default().push((rec.ordinal, req));
    }
    Ok(order
        .into_iter()
        .map(|id| {
            let mut packets = grouped.remove(&id).unwrap_or_default();
            packets.sort_by_key(|(ordinal, _)| *ordinal);
            SeedSequence {
                id,
                requests: packets.into_iter().map(|(_, r)| r).collect(),
            }
        })
        .collect())
}

pub fn seed_records(sequences: &[SeedSequence]) -> Result<Vec<SeedRecord>> {
    let mut records = Vec::new();
    for seq in sequences {
        for (ordinal, req) in seq.requests.iter().enumerate() {
            records.push(SeedRecord {
                sequence_id: seq.id.clone(),
                ordinal,
                packet: b64_encode(&serialize_request(req)?),
            });
        }
    }
    Ok(records)
}

pub fn write_seed_file(path: &Path, sequences: &[SeedSequence]) -> Result<()> {
    jsonl::write(path, seed_records(sequences)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use RtspMethod::*;
    use SessionState::*;

    #[test]
    fn parses_describe() {
        let req = parse_request(b"DESCRIBE rtsp://example.com/media.mp4 RTSP/1.0\r\nCSeq: 2\r\n\r\n").unwrap();
        assert_eq!(req.method, Describe);
        assert_eq!(req.uri, "rtsp://example.com/media.mp4");
        assert_eq!(req.version, "RTSP/1.0");
        assert_eq!(req.cseq(), Some(2));
        assert_eq!(req.body, None);
    }

    #[test]
    fn unknown_method_carries_token() {
        match parse_request(b"FOO rtsp://x RTSP/1.0\r\nCSeq: 1\r\n\r\n") {
            Err(Error::UnknownMethod(t)) => assert_eq!(t, "FOO"),
            other => panic!("unexpected {other:?}"),
        }
        // methods are case-sensitive
        assert!(matches!(parse_request(b"play rtsp://x RTSP/1.0\r\nCSeq: 1\r\n\r\n"), Err(Error::UnknownMethod(_))));
    }

    #[test]
    fn malformed_inputs() {
        for raw in [
            &b"PLAY rtsp://x RTSP/1.0\r\nSession: 1\r\n\r\n"[..],
            b"PLAY rtsp://x RTSP/1.0\r\nCSeq: abc\r\n\r\n",
            b"PLAY rtsp://x\r\nCSeq: 1\r\n\r\n",
            b"PLAY rtsp://x RTSP/1.0\r\nCSeq 1\r\n\r\n",
            b"ANNOUNCE rtsp://x RTSP/1.0\r\nCSeq: 1\r\nContent-Length: 4\r\n\r\nhello",
            b"ANNOUNCE rtsp://x RTSP/1.0\r\nCSeq: 1\r\n\r\nhello",
            b"",
        ] {
            assert!(
                matches!(parse_request(raw), Err(Error::MalformedRequest(_))),
                "{:?}",
                String::from_utf8_lossy(raw)
            );
        }
    }

    #[test]
    fn lone_lf_tolerated_and_header_values_trimmed() {
        let req = parse_request(b"SETUP rtsp://s/t RTSP/1.0\ncseq:   7  \nTransport: RTP/AVP;unicast\n\n").unwrap();
        assert_eq!(req.cseq(), Some(7));
        assert_eq!(req.headers[0], ("cseq".to_string(), "7".to_string()));
        assert_eq!(
            serialize_request(&req).unwrap(),
            b"SETUP rtsp://s/t RTSP/1.0\r\ncseq: 7\r\nTransport: RTP/AVP;unicast\r\n\r\n"
        );
    }

    #[test]
    fn serializes_play() {
        let req = RtspRequest::new(Play, "rtsp://s/1", 4).with_header("Session", "12345");
        assert_eq!(
            serialize_request(&req).unwrap(),
            b"PLAY rtsp://s/1 RTSP/1.0\r\nCSeq: 4\r\nSession: 12345\r\n\r\n".to_vec()
        );
    }

    #[test]
    fn refuses_bad_content_length() {
        let mut req = RtspRequest::new(Announce, "rtsp://s/1", 1)
            .with_header("Content-Type", "application/sdp")
            .with_header("Content-Length", "4");
        req.body = Some(b"v=0\r\n".to_vec());
        match serialize_request(&req) {
            Err(Error::Serialize(msg)) => assert!(msg.contains("Content-Length")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn body_round_trip() {
        let req = RtspRequest::new(SetParameter, "rtsp://s/1", 9)
            .with_header("Session", "abc")
            .with_body("text/parameters", b"barparam: barstuff\r\n".to_vec());
        let bytes = serialize_request(&req).unwrap();
        assert_eq!(parse_request(&bytes).unwrap(), req);
    }

    #[test]
    fn default_transitions() {
        let t = TransitionTable::default();
        assert_eq!(transition(Init, Setup, &t).unwrap(), Ready);
        assert_eq!(transition(Ready, Play, &t).unwrap(), Playing);
        assert_eq!(transition(Ready, Record, &t).unwrap(), Recording);
        assert_eq!(transition(Recording, Pause, &t).unwrap(), Ready);
        match transition(Init, Play, &t) {
            Err(Error::InvalidTransition { state, method }) => assert_eq!((state, method), (Init, Play)),
            other => panic!("unexpected {other:?}"),
        }
        for s in SessionState::ALL {
            assert_eq!(transition(s, Teardown, &t).unwrap(), Init);
            for m in [Describe, Announce, GetParameter, SetParameter, Options, Redirect] {
                assert_eq!(transition(s, m, &t).unwrap(), s);
            }
        }
    }

    #[test]
    fn three_state_table_rejects_record() {
        let t = TransitionTable::three_state();
        for s in SessionState::ALL {
            assert!(transition(s, Record, &t).is_err());
        }
        assert_eq!(transition(Playing, Teardown, &t).unwrap(), Init);
    }

    #[test]
    fn table_rejects_neutral_trigger_overlap() {
        let r = TransitionTable::new([((Init, Describe), Ready)], [Describe]);
        assert!(matches!(r, Err(Error::Config(_))));
        let r = TransitionTable::new([((Init, Setup), Ready), ((Init, Setup), Playing)], []);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    fn seq(methods: &[RtspMethod]) -> Vec<RtspRequest> {
        methods
            .iter()
            .enumerate()
            .map(|(i, &m)| RtspRequest::new(m, "rtsp://s/1", i as u64 + 1))
            .collect()
    }

    #[test]
    fn validates_sequences() {
        let t = TransitionTable::default();
        let r = validate_sequence(&seq(&[Setup, Play, Pause, Teardown]), &t);
        assert!(r.valid);
        assert_eq!(r.state_trace, vec![Ready, Playing, Ready, Init]);

        let r = validate_sequence(&seq(&[Play]), &t);
        assert!(!r.valid);
        assert_eq!(r.failing_index, Some(0));
        assert!(r.state_trace.is_empty());

        let r = validate_sequence(&[], &t);
        assert!(r.valid && r.state_trace.is_empty() && r.failing_index.is_none());
    }

    #[test]
    fn cseq_must_increase() {
        let t = TransitionTable::default();
        let mut requests = seq(&[Setup, Play, Teardown]);
        requests[2].set_cseq(2);
        let r = validate_sequence(&requests, &t);
        assert_eq!(r.failing_index, Some(2));
        assert_eq!(r.state_trace, vec![Ready, Playing]);
    }

    #[test]
    fn required_header_table() {
        assert_eq!(required_headers(Describe), vec!["CSeq"]);
        assert_eq!(required_headers(Setup), vec!["CSeq", "Transport"]);
        assert_eq!(required_headers(Pause), vec!["CSeq", "Session"]);
        assert_eq!(required_headers(Announce), vec!["CSeq", "Content-Type", "Content-Length"]);
        let req = RtspRequest::new(Play, "rtsp://s", 1);
        assert_eq!(missing_headers(&req), vec!["Session"]);
        assert!(missing_headers(&req.with_header("session", "1")).is_empty());
    }

    #[test]
    fn container_round_trip_and_raw_fallback() {
        let packets = vec![b"PLAY a".to_vec(), vec![], b"x".to_vec()];
        assert_eq!(decode_container(&encode_container(&packets)).unwrap(), packets);
        assert_eq!(decode_container(b"PLAY rtsp://x RTSP/1.0\r\n"), None);
        assert_eq!(decode_container(b""), None);
    }

    #[test]
    fn seed_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seeds.jsonl");
        let sequences = vec![
            SeedSequence {
                id: "s1".into(),
                requests: seq(&[Setup, Play]),
            },
            SeedSequence {
                id: "s0".into(),
                requests: seq(&[Describe]),
            },
        ];
        write_seed_file(&path, &sequences).unwrap();
        assert_eq!(read_seed_file(&path).unwrap(), sequences);
    }
}
