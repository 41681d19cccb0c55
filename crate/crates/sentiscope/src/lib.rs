//! Storage, transport and tooling around `sentiscope-core`.
//!
//! - [`corpus_io`]: line-delimited corpus files and category maps
//! - [`event_log`]: the session log wire format and its durable file
//! - [`index_cache`]: on-disk index cache
//! - [`engine`]: ranked and faceted search responses
//! - [`report`]: JSON rendering of the study reports
//! - [`service`]: the HTTP API
//! - [`cli`]: the `sentiscope` command

pub mod cli;
pub mod corpus_io;
pub mod engine;
pub mod event_log;
pub mod index_cache;
pub mod report;
pub mod service;
