//! Retrieval-augmented RTSP seed enrichment and packet-similarity evaluation.
//!
//! The pipeline: [`corpus`] cleans and chunks RFC text, [`embedding`] indexes
//! the chunks for cosine retrieval, [`agent`] runs a ReAct loop that enriches
//! seed sequences under the [`rtsp`] session state machine, and [`eval`]
//! scores generated packets with the [`metrics`] module and renders reports.

pub mod agent;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod jsonl;
pub mod metrics;
pub mod rtsp;

pub use error::{Error, Result};
