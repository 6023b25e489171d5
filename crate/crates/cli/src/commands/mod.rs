pub mod compare;
pub mod eval;
pub mod ingest;
pub mod search;
