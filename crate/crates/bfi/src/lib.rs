//! File formats, reports and the command-line front end for `bfi-core`.

pub mod cli;
pub mod ingest;
pub mod report;
pub mod svg;
