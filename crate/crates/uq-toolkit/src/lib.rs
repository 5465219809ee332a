//! I/O companion to `uq-core`: file formats and dataset adapters, an
//! OpenAI-compatible annotation client with record/replay, report
//! writers, and the `uqtriage` CLI commands.

pub mod client;
pub mod commands;
pub mod config;
pub mod fixture;
pub mod formats;
pub mod ingestion;
pub mod report_io;
