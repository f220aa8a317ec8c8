pub mod bench;
pub mod build;
pub mod diag;
pub mod ingest;
pub mod query;
pub mod update;
