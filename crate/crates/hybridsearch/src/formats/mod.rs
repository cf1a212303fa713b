pub mod jsonl;
pub mod report;
pub mod snapshot;
pub mod trec;
