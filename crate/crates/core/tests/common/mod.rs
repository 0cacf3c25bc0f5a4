#![allow(dead_code)]

use std::path::PathBuf;

use seedrag::corpus::{self, Chunk, CleaningRules, RawDocument};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn rfc_chunks(chunk_size: usize, overlap: usize) -> Vec<Chunk> {
    let raw = RawDocument::from_file(&fixture("rfc2326_excerpt.txt")).unwrap();
    let clean = corpus::clean(&raw, &CleaningRules::rfc_defaults()).unwrap();
    corpus::chunk(&clean, chunk_size, overlap).unwrap()
}

/// Request text with CRLF line endings.
pub fn packet(method: &str, cseq: u64, extra: &[(&str, &str)]) -> String {
    let mut s = format!("{method} rtsp://127.0.0.1:8554/test RTSP/1.0\r\nCSeq: {cseq}\r\n");
    for (k, v) in extra {
        s.push_str(&format!("{k}: {v}\r\n"));
    }
    s.push_str("\r\n");
    s
}
